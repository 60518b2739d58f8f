#include "steinlab/sampling.hpp"

#include <cmath>
#include <cstdlib>
#include <numbers>
#include <stdexcept>
#include <string>

#include "steinlab/parallel.hpp"

namespace steinlab {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::mt19937_64 make_engine(std::uint64_t seed, std::uint64_t stream_id) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream_id),
                    static_cast<std::uint32_t>(stream_id >> 32)};
  return std::mt19937_64(seq);
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

constexpr double kUnitTolerance = 1e-12;

}  // namespace

unsigned default_worker_count() {
  unsigned workers = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("STEINLAB_THREADS")) {
    const long cap = std::strtol(env, nullptr, 10);
    if (cap >= 1) workers = std::min<unsigned>(workers, static_cast<unsigned>(cap));
  }
  return workers;
}

SeededStream::SeededStream(std::uint64_t seed, std::uint64_t stream_id)
    : seed_(seed), stream_id_(stream_id), engine_(make_engine(seed, stream_id)) {}

SeededStream SeededStream::substream(std::uint64_t index) const {
  return SeededStream(seed_, splitmix64(stream_id_ ^ splitmix64(index + 0x5851F42D4C957F2DULL)));
}

void sample_sphere_into(SeededStream& stream, std::span<double> out) {
  double norm2 = 0.0;
  do {
    norm2 = 0.0;
    for (double& v : out) {
      v = stream.normal();
      norm2 += v * v;
    }
  } while (norm2 == 0.0);
  const double inv = 1.0 / std::sqrt(norm2);
  for (double& v : out) v *= inv;
}

std::vector<double> sample_sphere(int n, SeededStream& stream) {
  if (n < 2) throw std::invalid_argument("sample_sphere: n must be at least 2");
  std::vector<double> x(static_cast<std::size_t>(n));
  sample_sphere_into(stream, x);
  return x;
}

void sample_tangent_into(std::span<const double> x, SeededStream& stream, std::span<double> out) {
  for (;;) {
    for (double& v : out) v = stream.normal();
    const double along = dot(out, x);
    double norm2 = 0.0;
    for (std::size_t i = 0; i < out.size(); ++i) {
      out[i] -= along * x[i];
      norm2 += out[i] * out[i];
    }
    if (norm2 > 1e-24) {
      const double inv = 1.0 / std::sqrt(norm2);
      for (double& v : out) v *= inv;
      return;
    }
  }
}

std::vector<double> sample_tangent(std::span<const double> x, SeededStream& stream) {
  if (std::abs(std::sqrt(dot(x, x)) - 1.0) > kUnitTolerance)
    throw std::invalid_argument("sample_tangent: base point is not a unit vector");
  std::vector<double> v(x.size());
  sample_tangent_into(x, stream, v);
  return v;
}

std::vector<double> geodesic_step_sphere(std::span<const double> x, std::span<const double> v,
                                         double eps) {
  if (x.size() != v.size()) throw std::invalid_argument("geodesic_step_sphere: size mismatch");
  Geometry::sphere(static_cast<int>(x.size())).check_eps(eps);
  if (std::abs(std::sqrt(dot(x, x)) - 1.0) > kUnitTolerance ||
      std::abs(std::sqrt(dot(v, v)) - 1.0) > kUnitTolerance)
    throw std::invalid_argument("geodesic_step_sphere: x and v must be unit vectors");
  if (std::abs(dot(x, v)) > kUnitTolerance)
    throw std::invalid_argument("geodesic_step_sphere: v is not tangent at x");
  std::vector<double> out(x.size());
  const double c = std::cos(eps), s = std::sin(eps);
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = c * x[i] + s * v[i];
  return out;
}

double wrap_unit(double t) {
  double r = t - std::floor(t);
  return r >= 1.0 ? 0.0 : r;
}

std::vector<double> sample_torus(int n, SeededStream& stream) {
  if (n < 1) throw std::invalid_argument("sample_torus: n must be positive");
  std::vector<double> x(static_cast<std::size_t>(n));
  for (double& v : x) v = stream.uniform();
  return x;
}

bool is_symmetric_positive_definite(const RationalMatrix& b) {
  const std::size_t n = b.size();
  if (n == 0) return false;
  for (const auto& row : b)
    if (row.size() != n) return false;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (b[i][j] != b[j][i]) return false;
  // Exact Gaussian elimination without pivoting: all pivots positive.
  RationalMatrix a = b;
  for (std::size_t k = 0; k < n; ++k) {
    if (a[k][k].sign() <= 0) return false;
    for (std::size_t i = k + 1; i < n; ++i) {
      if (a[i][k].is_zero()) continue;
      const Rational factor = a[i][k] / a[k][k];
      for (std::size_t j = k; j < n; ++j) a[i][j] -= factor * a[k][j];
    }
  }
  return true;
}

TorusMetric::TorusMetric(RationalMatrix b) : b_(std::move(b)) {
  if (!is_symmetric_positive_definite(b_))
    throw std::invalid_argument("TorusMetric: B must be symmetric positive definite");
  const int n = dimension();
  b_double_.resize(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) b_double_(i, j) = b_[i][j].to_double();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(b_double_);
  const Eigen::VectorXd inv_sqrt_values = eig.eigenvalues().cwiseSqrt().cwiseInverse();
  inv_sqrt_ = eig.eigenvectors() * inv_sqrt_values.asDiagonal() * eig.eigenvectors().transpose();
  b_inverse_ = b_double_.inverse();
}

double TorusMetric::inner(std::span<const double> u, std::span<const double> v) const {
  const Eigen::Map<const Eigen::VectorXd> uu(u.data(), static_cast<Eigen::Index>(u.size()));
  const Eigen::Map<const Eigen::VectorXd> vv(v.data(), static_cast<Eigen::Index>(v.size()));
  return uu.dot(b_double_ * vv);
}

void TorusMetric::unit_tangent_into(SeededStream& stream, std::span<double> out) const {
  const int n = dimension();
  Eigen::VectorXd g(n);
  double norm2 = 0.0;
  do {
    for (int i = 0; i < n; ++i) g[i] = stream.normal();
    norm2 = g.squaredNorm();
  } while (norm2 == 0.0);
  const Eigen::VectorXd w = inv_sqrt_ * g;
  const double scale = 1.0 / std::sqrt(w.dot(b_double_ * w));
  for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = w[i] * scale;
}

std::vector<double> TorusMetric::unit_tangent(SeededStream& stream) const {
  std::vector<double> u(static_cast<std::size_t>(dimension()));
  unit_tangent_into(stream, u);
  return u;
}

std::vector<double> geodesic_step_torus(std::span<const double> x, std::span<const double> u,
                                        double eps) {
  if (x.size() != u.size()) throw std::invalid_argument("geodesic_step_torus: size mismatch");
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = wrap_unit(x[i] + eps * u[i]);
  return out;
}

std::vector<double> sample_coefficient_sphere(int m, double radius, SeededStream& stream) {
  if (m < 1) throw std::invalid_argument("sample_coefficient_sphere: m must be positive");
  if (!(radius > 0.0)) throw std::invalid_argument("sample_coefficient_sphere: radius must be > 0");
  std::vector<double> a(static_cast<std::size_t>(m));
  sample_sphere_into(stream, a);
  for (double& v : a) v *= radius;
  return a;
}

Geometry Geometry::sphere(int n) {
  if (n < 2) throw std::invalid_argument("Geometry: sphere needs n >= 2");
  return Geometry(n, nullptr);
}

Geometry Geometry::torus(std::shared_ptr<const TorusMetric> metric) {
  if (!metric) throw std::invalid_argument("Geometry: null torus metric");
  const int n = metric->dimension();
  return Geometry(n, std::move(metric));
}

void Geometry::sample_point(SeededStream& stream, std::span<double> out) const {
  if (is_sphere()) {
    sample_sphere_into(stream, out);
  } else {
    for (double& v : out) v = stream.uniform();
  }
}

void Geometry::sample_direction(std::span<const double> x, SeededStream& stream,
                                std::span<double> out) const {
  if (is_sphere())
    sample_tangent_into(x, stream, out);
  else
    metric_->unit_tangent_into(stream, out);
}

void Geometry::step(std::span<const double> x, std::span<const double> v, double eps,
                    std::span<double> out) const {
  if (is_sphere()) {
    const double c = std::cos(eps), s = std::sin(eps);
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = c * x[i] + s * v[i];
  } else {
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = wrap_unit(x[i] + eps * v[i]);
  }
}

void Geometry::check_point(std::span<const double> x) const {
  if (x.size() != static_cast<std::size_t>(n_))
    throw std::invalid_argument("point has dimension " + std::to_string(x.size()) +
                                ", expected " + std::to_string(n_));
  for (double v : x)
    if (!std::isfinite(v)) throw std::invalid_argument("point has a non-finite coordinate");
  if (is_sphere() && std::abs(std::sqrt(dot(x, x)) - 1.0) > kUnitTolerance)
    throw std::invalid_argument("point is not on the unit sphere (tolerance 1e-12)");
}

void Geometry::check_eps(double eps) const {
  if (!(eps > 0.0) || (is_sphere() && !(eps < std::numbers::pi)))
    throw std::invalid_argument("step length eps must lie in (0, pi) on the sphere and be "
                                "positive on the torus, got " + std::to_string(eps));
}

}  // namespace steinlab
