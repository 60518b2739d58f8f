#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "steinlab/eigenfunctions.hpp"
#include "steinlab/json_io.hpp"
#include "steinlab/sampling.hpp"

namespace steinlab {

// How the step direction of the pair (X, X_eps) is chosen.
enum class PairKind {
  Geodesic,  // uniform unit tangent: exchangeable
  Uphill,    // better of +v, -v for f (deliberately not exchangeable)
};

struct EpsRow {
  double eps = 0.0;
  double estimate = 0.0;
  double standard_error = 0.0;
  double reference = 0.0;
  double residual = 0.0;  // estimate - reference
};

// Per-eps Monte Carlo estimates of one Stein-pair condition at a fixed point.
// Rows follow the eps grid, which is strictly decreasing.
struct ConditionReport {
  std::string condition;  // "drift", "diffusion" or "third_moment"
  std::vector<double> x;
  std::uint64_t draws = 0;
  std::vector<EpsRow> rows;
  double reference = 0.0;           // eps -> 0 limit
  double linear_coefficient = 0.0;  // c in |residual| <= 4 SE + c eps
  double loglog_slope = 0.0;        // |residual| (or estimate) against eps
  double lipschitz = 0.0;           // third moment only
  bool pass = false;

  Json to_json() const;
  static std::string csv_header();
  std::string csv_rows(const std::string& prefix) const;
};

// Drift, diffusion and third moment from one shared set of antithetic draws.
struct ConditionSuite {
  ConditionReport drift;
  ConditionReport diffusion;
  ConditionReport third_moment;
};

// Antithetic pairs (V, -V): M tangent draws per point, each used for every
// eps. Drift reference Delta f(x) / (2 d), diffusion reference
// |grad f(x)|^2 / d, d the manifold dimension. Throws std::invalid_argument
// on an invalid point, an eps outside (0, pi), a grid that is not strictly
// decreasing, or M < 10^4.
ConditionSuite condition_suite(const EigenfunctionSpec& spec, std::span<const double> x,
                               const std::vector<double>& eps, std::uint64_t draws,
                               const SeededStream& stream, unsigned workers = 0);

ConditionReport drift_check(const EigenfunctionSpec& spec, std::span<const double> x,
                            const std::vector<double>& eps, std::uint64_t draws,
                            const SeededStream& stream, unsigned workers = 0);
ConditionReport diffusion_check(const EigenfunctionSpec& spec, std::span<const double> x,
                                const std::vector<double>& eps, std::uint64_t draws,
                                const SeededStream& stream, unsigned workers = 0);
ConditionReport third_moment_check(const EigenfunctionSpec& spec, std::span<const double> x,
                                   const std::vector<double>& eps, std::uint64_t draws,
                                   const SeededStream& stream, unsigned workers = 0);

// sqrt(max |grad f|^2) over `points` uniform points plus the extra points.
double estimate_lipschitz(const EigenfunctionSpec& spec, std::uint64_t points,
                          const SeededStream& stream, std::span<const double> extra = {});

struct AntisymmetricTest {
  std::string name;
  double mean = 0.0;
  double standard_error = 0.0;
  bool pass = false;  // |mean| <= 4 SE
};

struct ExchangeabilityReport {
  double eps = 0.0;
  std::uint64_t pairs = 0;
  PairKind kind = PairKind::Geodesic;
  std::vector<AntisymmetricTest> tests;
  bool pass = false;

  Json to_json() const;
};

// Draws N pairs (W, W_eps) = (f(X), f(X_eps)) with X uniform and checks five
// bounded antisymmetric statistics h(W, W_eps) for zero mean.
ExchangeabilityReport exchangeability_check(const EigenfunctionSpec& spec, double eps,
                                            std::uint64_t pairs, const SeededStream& stream,
                                            PairKind kind = PairKind::Geodesic,
                                            unsigned workers = 0);

std::string pair_kind_name(PairKind kind);

}  // namespace steinlab
