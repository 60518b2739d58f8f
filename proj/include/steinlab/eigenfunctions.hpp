#pragma once

#include <Eigen/Dense>

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "steinlab/rational.hpp"
#include "steinlab/sampling.hpp"
#include "steinlab/sphere_moments.hpp"

namespace steinlab {

// f = C <x, A x> on S^{n-1} with tr A = 0, held in the eigenbasis of A: only
// the spectrum d is stored and points are read in that basis.
struct QuadraticHarmonic {
  int n = 0;
  RationalVector d;
  Rational c_squared;  // n(n+2) / (2 |d|_2^2), so that E f^2 = 1
  double c = 0.0;
  std::vector<double> d_double;

  double eigenvalue() const { return 2.0 * n; }
};

// Throws std::invalid_argument on n < 2, nonzero trace or zero spectrum.
QuadraticHarmonic make_quadratic(RationalVector d);

// Extracts the spectrum of a symmetric matrix numerically. The matrix must be
// symmetric and traceless to within `tolerance` (relative to its Frobenius
// norm); the recovered spectrum is then shifted by its exact mean so the
// stored trace is exactly zero.
QuadraticHarmonic make_quadratic_from_matrix(const Eigen::MatrixXd& a, double tolerance = 1e-9);

// Coefficients (index = power of t) of the Gegenbauer polynomial C^k_m with
// k = two_k / 2, from the explicit alternating Gamma-ratio sum.
RationalVector gegenbauer_coefficients(int two_k, int m);
Rational gegenbauer_eval(int two_k, int m, const Rational& t);
double gegenbauer_eval(int two_k, int m, double t);

// A^2 = (n-3)! l! (n+2l-2) / ((n+l-3)! (n-2)); requires n >= 4, ell >= 1.
Rational harmonic_normalizer_squared(int n, int ell);

// p(x) = sum_k a_k A C^{(n-2)/2}_ell(x_k) on S^{n-1}, ell odd, sum a_k^2 = 1.
struct GegenbauerCombo {
  int n = 0;
  int ell = 0;
  std::vector<double> a;
  std::optional<RationalVector> a_exact;
  Rational normalizer_squared;
  double normalizer = 0.0;
  RationalVector zonal;               // C^{(n-2)/2}_ell coefficients
  std::vector<double> value_coeffs;   // A * zonal, as doubles
  std::vector<double> slope_coeffs;   // derivative of value_coeffs

  double eigenvalue() const { return static_cast<double>(ell) * (n + ell - 2); }
};

// Float coefficients: sum a_k^2 = 1 within `tolerance`.
GegenbauerCombo make_gegenbauer(int n, int ell, std::vector<double> a, double tolerance = 1e-10);
// Exact coefficients: sum a_k^2 = 1 exactly; enables the exact polynomial paths.
GegenbauerCombo make_gegenbauer(int n, int ell, RationalVector a);

struct TorusFrequency {
  RationalVector v;
  std::vector<std::pair<int, double>> v_sparse;     // nonzeros of v
  std::vector<std::pair<int, long>> bv_sparse;      // nonzeros of Bv (integers)
  Rational norm_squared;                            // <Bv, v>
};

// f(x) = Re sum_v a_v exp(2 pi i <Bv, x>) on (T^n, B), sum a_v^2 = 2.
struct TorusCombo {
  std::shared_ptr<const TorusMetric> metric;
  std::vector<TorusFrequency> frequencies;
  std::vector<double> a;

  int n() const { return metric->dimension(); }
  // mu_v = (2 pi |v|_B)^2
  double mu(std::size_t i) const;
};

// Throws std::invalid_argument when B is not SPD, some Bv is not integral,
// v + w = 0 for some v, w in V (including v = 0), V has duplicates, or
// |a|_2^2 differs from 2 by more than `tolerance`.
TorusCombo make_torus(RationalMatrix b, std::vector<RationalVector> frequencies,
                      std::vector<double> a, double tolerance = 1e-9);

using EigenfunctionSpec = std::variant<QuadraticHarmonic, GegenbauerCombo, TorusCombo>;

std::string family_name(const EigenfunctionSpec& spec);
int ambient_dimension(const EigenfunctionSpec& spec);
Geometry geometry_of(const EigenfunctionSpec& spec);

// Orthonormal decomposition f = sum_i b_i f_i with sum b_i^2 = 1 and
// Delta f_i = -mu_i f_i.
struct SpectralComponent {
  double weight;  // b_i^2
  double mu;
};
std::vector<SpectralComponent> spectral_components(const EigenfunctionSpec& spec);
// Arithmetic mean of the component eigenvalues.
double mean_eigenvalue(const EigenfunctionSpec& spec);
bool is_single_eigenvalue(const EigenfunctionSpec& spec);

// f(x). Validates dimension and, on the sphere, |x| = 1 within 1e-12; torus
// points are reduced mod 1.
double eval(const EigenfunctionSpec& spec, std::span<const double> x);
// Squared norm of the manifold gradient (spherical projection, or the B-metric
// norm of the B-gradient on the torus).
double gradient_norm_squared(const EigenfunctionSpec& spec, std::span<const double> x);
// Laplace-Beltrami Delta f(x), from the family's eigen-decomposition.
double laplacian(const EigenfunctionSpec& spec, std::span<const double> x);

// Unvalidated hot-path versions for Monte Carlo kernels.
double eval_unchecked(const EigenfunctionSpec& spec, std::span<const double> x);
double gradient_norm_squared_unchecked(const EigenfunctionSpec& spec, std::span<const double> x);

// Exact polynomial forms (sphere families with Rational coefficients only;
// std::invalid_argument otherwise).
SpherePolynomial squared_polynomial(const EigenfunctionSpec& spec);
SpherePolynomial gradient_norm_squared_polynomial(const EigenfunctionSpec& spec);
// f * (-Delta_S f), with the spherical Laplacian taken symbolically.
SpherePolynomial laplacian_pairing_polynomial(const EigenfunctionSpec& spec);

}  // namespace steinlab
