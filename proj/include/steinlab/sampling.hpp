#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <memory>
#include <random>
#include <span>
#include <vector>

#include "steinlab/rational.hpp"

namespace steinlab {

// Reproducible random stream identified by (seed, stream_id). Streams with
// different ids are seeded through std::seed_seq and never share state.
class SeededStream {
 public:
  SeededStream(std::uint64_t seed, std::uint64_t stream_id);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

  // Child stream for shard / block `index`; depends only on (seed, id, index).
  SeededStream substream(std::uint64_t index) const;

  double normal() { return normal_(engine_); }
  double uniform() { return uniform_(engine_); }  // [0, 1)
  std::mt19937_64& engine() { return engine_; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_;
  std::uniform_real_distribution<double> uniform_;
};

// Uniform point of S^{n-1} (Gaussian draw, normalized; resamples the
// degenerate all-zero draw).
std::vector<double> sample_sphere(int n, SeededStream& stream);
void sample_sphere_into(SeededStream& stream, std::span<double> out);

// Uniform unit vector of the tangent space at x (x must be a unit vector).
std::vector<double> sample_tangent(std::span<const double> x, SeededStream& stream);
void sample_tangent_into(std::span<const double> x, SeededStream& stream, std::span<double> out);

// cos(eps) x + sin(eps) v. Throws std::invalid_argument unless |x| = |v| = 1,
// <x, v> = 0 and 0 < eps < pi.
std::vector<double> geodesic_step_sphere(std::span<const double> x, std::span<const double> v,
                                         double eps);

// Uniform point of [0, 1)^n.
std::vector<double> sample_torus(int n, SeededStream& stream);

// Reduces a coordinate into [0, 1).
double wrap_unit(double t);

// Flat metric <Bx, y> on R^n / Z^n.
class TorusMetric {
 public:
  // Throws std::invalid_argument unless B is square, symmetric and positive
  // definite (checked exactly).
  explicit TorusMetric(RationalMatrix b);

  int dimension() const { return static_cast<int>(b_.size()); }
  const RationalMatrix& exact() const { return b_; }
  const Eigen::MatrixXd& matrix() const { return b_double_; }
  const Eigen::MatrixXd& inverse() const { return b_inverse_; }
  double inner(std::span<const double> u, std::span<const double> v) const;

  // Uniform direction on the B-unit sphere: w = B^{-1/2} g, u = w / sqrt(<Bw, w>).
  std::vector<double> unit_tangent(SeededStream& stream) const;
  void unit_tangent_into(SeededStream& stream, std::span<double> out) const;

 private:
  RationalMatrix b_;
  Eigen::MatrixXd b_double_;
  Eigen::MatrixXd b_inverse_;
  Eigen::MatrixXd inv_sqrt_;
};

bool is_symmetric_positive_definite(const RationalMatrix& b);

// (x + eps u) mod 1, componentwise.
std::vector<double> geodesic_step_torus(std::span<const double> x, std::span<const double> u,
                                        double eps);

// Uniform point on the radius-sphere of R^m.
std::vector<double> sample_coefficient_sphere(int m, double radius, SeededStream& stream);

// The manifold an exchangeable pair lives on: S^{n-1} or a flat torus.
class Geometry {
 public:
  static Geometry sphere(int n);
  static Geometry torus(std::shared_ptr<const TorusMetric> metric);

  bool is_sphere() const { return metric_ == nullptr; }
  int ambient_dimension() const { return n_; }
  // n - 1 for S^{n-1}, n for T^n.
  int manifold_dimension() const { return is_sphere() ? n_ - 1 : n_; }
  const TorusMetric* metric() const { return metric_.get(); }

  void sample_point(SeededStream& stream, std::span<double> out) const;
  // Unit tangent direction at x (in the manifold's metric).
  void sample_direction(std::span<const double> x, SeededStream& stream,
                        std::span<double> out) const;
  // Geodesic step of length eps from x along unit direction v.
  void step(std::span<const double> x, std::span<const double> v, double eps,
            std::span<double> out) const;
  // Throws unless x is a point of the manifold (unit norm within 1e-12 on the
  // sphere, finite coordinates on the torus).
  void check_point(std::span<const double> x) const;
  // Throws unless 0 < eps (< pi on the sphere).
  void check_eps(double eps) const;

 private:
  Geometry(int n, std::shared_ptr<const TorusMetric> metric) : n_(n), metric_(std::move(metric)) {}

  int n_;
  std::shared_ptr<const TorusMetric> metric_;
};

}  // namespace steinlab
