#include "steinlab/exchangeable_lab.hpp"

#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "steinlab/format.hpp"
#include "steinlab/parallel.hpp"

namespace steinlab {

namespace {

constexpr std::uint64_t kMinDraws = 10000;
constexpr double kSigmas = 4.0;
// Third-moment estimates must scale like eps: per-step ratio / eps-ratio.
constexpr double kThirdRatioLow = 0.6;
constexpr double kThirdRatioHigh = 1.4;
constexpr double kSlopeThreshold = 0.7;
constexpr std::uint64_t kLipschitzPoints = 10000;
constexpr std::uint64_t kLipschitzStream = 0x4C495053ULL;

void check_grid(const Geometry& geo, const std::vector<double>& eps) {
  if (eps.empty()) throw std::invalid_argument("eps grid is empty");
  for (std::size_t i = 0; i < eps.size(); ++i) {
    geo.check_eps(eps[i]);
    if (!(eps[i] < std::numbers::pi)) throw std::invalid_argument("eps must lie in (0, pi)");
    if (i > 0 && !(eps[i] < eps[i - 1])) throw std::invalid_argument("eps grid must be strictly decreasing");
  }
}

std::vector<double> checked_point(const Geometry& geo, std::span<const double> x) {
  geo.check_point(x);
  std::vector<double> out(x.begin(), x.end());
  if (!geo.is_sphere())
    for (double& v : out) v = wrap_unit(v);
  return out;
}

double mean_se(double sum, double sum_sq, double n, double* se) {
  const double mean = sum / n;
  const double var = std::max(0.0, (sum_sq / n - mean * mean) * n / (n - 1.0));
  *se = std::sqrt(var / n);
  return mean;
}

double loglog_slope(const std::vector<double>& eps, const std::vector<double>& y) {
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < eps.size(); ++i)
    if (y[i] > 0.0) {
      lx.push_back(std::log(eps[i]));
      ly.push_back(std::log(y[i]));
    }
  if (lx.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= static_cast<double>(lx.size());
  my /= static_cast<double>(lx.size());
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxy += (lx[i] - mx) * (ly[i] - my);
    sxx += (lx[i] - mx) * (lx[i] - mx);
  }
  return sxy / sxx;
}

// |r_i| <= 4 SE_i + c eps_i at every eps, c anchored at the largest eps.
void judge_linear(ConditionReport& r) {
  const EpsRow& first = r.rows.front();
  r.linear_coefficient = std::max(0.0, std::abs(first.residual) - kSigmas * first.standard_error) / first.eps;
  if (r.rows.size() == 1) r.linear_coefficient = 0.0;
  r.pass = true;
  std::vector<double> eps, res;
  for (const EpsRow& row : r.rows) {
    const double allowed = kSigmas * row.standard_error + r.linear_coefficient * row.eps +
                           1e-9 * (1.0 + std::abs(row.reference));
    if (!(std::abs(row.residual) <= allowed)) r.pass = false;
    eps.push_back(row.eps);
    res.push_back(std::abs(row.residual));
  }
  r.loglog_slope = loglog_slope(eps, res);
}

void judge_third(ConditionReport& r) {
  r.pass = true;
  std::vector<double> eps, est;
  for (std::size_t i = 0; i < r.rows.size(); ++i) {
    const EpsRow& row = r.rows[i];
    if (!(row.estimate >= 0.0) || !(row.estimate <= row.eps * std::pow(r.lipschitz, 3))) r.pass = false;
    if (i > 0) {
      const EpsRow& prev = r.rows[i - 1];
      const double scaled = (row.estimate / prev.estimate) / (row.eps / prev.eps);
      if (!(scaled >= kThirdRatioLow && scaled <= kThirdRatioHigh)) r.pass = false;
    }
    eps.push_back(row.eps);
    est.push_back(row.estimate);
  }
  r.loglog_slope = loglog_slope(eps, est);
  if (r.rows.size() >= 2 && !(r.loglog_slope >= kSlopeThreshold)) r.pass = false;
}

// Accumulators per eps: drift, diffusion, third moment (sum, sum of squares).
using Acc = std::array<double, 6>;

}  // namespace

Json ConditionReport::to_json() const {
  Json rs = Json::array();
  for (const EpsRow& row : rows)
    rs.push_back(Json{{"eps", row.eps},
                      {"estimate", row.estimate},
                      {"standard_error", row.standard_error},
                      {"reference", row.reference},
                      {"residual", row.residual}});
  Json j{{"condition", condition}, {"x", x},       {"draws", draws},
         {"reference", reference}, {"rows", rs},   {"linear_coefficient", linear_coefficient},
         {"loglog_slope", std::isfinite(loglog_slope) ? Json(loglog_slope) : Json(nullptr)},
         {"pass", pass}};
  if (condition == "third_moment") j["lipschitz"] = lipschitz;
  return j;
}

std::string ConditionReport::csv_header() {
  return "condition,eps,estimate,standard_error,reference,residual,pass";
}

std::string ConditionReport::csv_rows(const std::string& prefix) const {
  std::ostringstream os;
  for (const EpsRow& row : rows)
    os << prefix << condition << ',' << format_double(row.eps) << ',' << format_double(row.estimate) << ','
       << format_double(row.standard_error) << ',' << format_double(row.reference) << ','
       << format_double(row.residual) << ',' << (pass ? "true" : "false") << '\n';
  return os.str();
}

double estimate_lipschitz(const EigenfunctionSpec& spec, std::uint64_t points, const SeededStream& stream,
                          std::span<const double> extra) {
  const Geometry geo = geometry_of(spec);
  SeededStream s = stream;
  std::vector<double> x(static_cast<std::size_t>(geo.ambient_dimension()));
  double best = 0.0;
  for (std::uint64_t i = 0; i < points; ++i) {
    geo.sample_point(s, x);
    best = std::max(best, gradient_norm_squared_unchecked(spec, x));
  }
  if (!extra.empty()) best = std::max(best, gradient_norm_squared(spec, extra));
  return std::sqrt(best);
}

ConditionSuite condition_suite(const EigenfunctionSpec& spec, std::span<const double> x_in,
                               const std::vector<double>& eps, std::uint64_t draws,
                               const SeededStream& stream, unsigned workers) {
  const Geometry geo = geometry_of(spec);
  check_grid(geo, eps);
  if (draws < kMinDraws) throw std::invalid_argument("pair checks need at least 10^4 draws");
  const std::vector<double> x = checked_point(geo, x_in);
  const std::size_t dim = x.size();
  const std::size_t ne = eps.size();
  const double f0 = eval_unchecked(spec, x);

  const std::size_t blocks = block_count(draws);
  std::vector<std::vector<Acc>> partial(blocks, std::vector<Acc>(ne, Acc{}));
  for_each_block(draws, workers, [&](std::size_t b, std::size_t begin, std::size_t end) {
    SeededStream s = stream.substream(b);
    std::vector<double> v(dim), minus_v(dim), y(dim);
    auto& acc = partial[b];
    for (std::size_t i = begin; i < end; ++i) {
      geo.sample_direction(x, s, v);
      for (std::size_t j = 0; j < dim; ++j) minus_v[j] = -v[j];
      for (std::size_t k = 0; k < ne; ++k) {
        const double e2 = eps[k] * eps[k];
        geo.step(x, v, eps[k], y);
        const double dp = eval_unchecked(spec, y) - f0;
        geo.step(x, minus_v, eps[k], y);
        const double dm = eval_unchecked(spec, y) - f0;
        const double drift = 0.5 * (dp + dm) / e2;
        const double diff = 0.5 * (dp * dp + dm * dm) / e2;
        const double third = 0.5 * (std::abs(dp * dp * dp) + std::abs(dm * dm * dm)) / e2;
        Acc& a = acc[k];
        a[0] += drift;
        a[1] += drift * drift;
        a[2] += diff;
        a[3] += diff * diff;
        a[4] += third;
        a[5] += third * third;
      }
    }
  });
  std::vector<Acc> total(ne, Acc{});
  for (std::size_t b = 0; b < blocks; ++b)
    for (std::size_t k = 0; k < ne; ++k)
      for (std::size_t c = 0; c < 6; ++c) total[k][c] += partial[b][k][c];

  const double d = geo.manifold_dimension();
  ConditionSuite out;
  out.drift.condition = "drift";
  out.drift.reference = laplacian(spec, x) / (2.0 * d);
  out.diffusion.condition = "diffusion";
  out.diffusion.reference = gradient_norm_squared(spec, x) / d;
  out.third_moment.condition = "third_moment";
  out.third_moment.reference = 0.0;
  const double n = static_cast<double>(draws);
  ConditionReport* reports[3] = {&out.drift, &out.diffusion, &out.third_moment};
  for (int c = 0; c < 3; ++c) {
    ConditionReport& r = *reports[c];
    r.x = x;
    r.draws = draws;
    for (std::size_t k = 0; k < ne; ++k) {
      EpsRow row;
      row.eps = eps[k];
      row.estimate = mean_se(total[k][2 * c], total[k][2 * c + 1], n, &row.standard_error);
      row.reference = r.reference;
      row.residual = row.estimate - row.reference;
      r.rows.push_back(row);
    }
  }
  judge_linear(out.drift);
  judge_linear(out.diffusion);
  out.third_moment.lipschitz = estimate_lipschitz(spec, kLipschitzPoints, stream.substream(kLipschitzStream), x);
  judge_third(out.third_moment);
  return out;
}

ConditionReport drift_check(const EigenfunctionSpec& spec, std::span<const double> x, const std::vector<double>& eps,
                            std::uint64_t draws, const SeededStream& stream, unsigned workers) {
  return condition_suite(spec, x, eps, draws, stream, workers).drift;
}

ConditionReport diffusion_check(const EigenfunctionSpec& spec, std::span<const double> x,
                                const std::vector<double>& eps, std::uint64_t draws, const SeededStream& stream,
                                unsigned workers) {
  return condition_suite(spec, x, eps, draws, stream, workers).diffusion;
}

ConditionReport third_moment_check(const EigenfunctionSpec& spec, std::span<const double> x,
                                   const std::vector<double>& eps, std::uint64_t draws,
                                   const SeededStream& stream, unsigned workers) {
  return condition_suite(spec, x, eps, draws, stream, workers).third_moment;
}

std::string pair_kind_name(PairKind kind) {
  return kind == PairKind::Geodesic ? "geodesic" : "uphill";
}

Json ExchangeabilityReport::to_json() const {
  Json ts = Json::array();
  for (const auto& t : tests)
    ts.push_back(Json{{"name", t.name}, {"mean", t.mean}, {"standard_error", t.standard_error}, {"pass", t.pass}});
  return Json{{"eps", eps}, {"pairs", pairs}, {"kind", pair_kind_name(kind)}, {"tests", ts}, {"pass", pass}};
}

ExchangeabilityReport exchangeability_check(const EigenfunctionSpec& spec, double eps, std::uint64_t pairs,
                                            const SeededStream& stream, PairKind kind, unsigned workers) {
  const Geometry geo = geometry_of(spec);
  check_grid(geo, {eps});
  if (pairs < 2) throw std::invalid_argument("exchangeability_check: need at least 2 pairs");
  using H = double (*)(double, double);
  static const std::array<std::pair<const char*, H>, 5> kTests = {{
      {"sign", [](double a, double b) { return static_cast<double>((a > b) - (a < b)); }},
      {"tanh_difference", [](double a, double b) { return std::tanh(a) - std::tanh(b); }},
      {"tanh_product_skew",
       [](double a, double b) { return std::tanh(a) * std::tanh(b) * (std::tanh(b) - std::tanh(a)); }},
      {"threshold_half", [](double a, double b) { return (a > 0.5 ? 1.0 : 0.0) - (b > 0.5 ? 1.0 : 0.0); }},
      {"trig_skew", [](double a, double b) { return std::sin(a) * std::cos(2 * b) - std::sin(b) * std::cos(2 * a); }},
  }};
  const std::size_t dim = static_cast<std::size_t>(geo.ambient_dimension());
  const std::size_t blocks = block_count(pairs);
  std::vector<std::array<double, 10>> partial(blocks);
  for_each_block(pairs, workers, [&](std::size_t b, std::size_t begin, std::size_t end) {
    SeededStream s = stream.substream(b);
    std::vector<double> x(dim), v(dim), y(dim);
    std::array<double, 10> acc{};
    for (std::size_t i = begin; i < end; ++i) {
      geo.sample_point(s, x);
      geo.sample_direction(x, s, v);
      if (kind == PairKind::Uphill) {
        // Keep whichever of +v, -v raises f.
        geo.step(x, v, eps, y);
        const double up = eval_unchecked(spec, y);
        for (double& c : v) c = -c;
        geo.step(x, v, eps, y);
        if (eval_unchecked(spec, y) < up)
          for (double& c : v) c = -c;
      }
      geo.step(x, v, eps, y);
      const double w = eval_unchecked(spec, x);
      const double we = eval_unchecked(spec, y);
      for (std::size_t t = 0; t < kTests.size(); ++t) {
        const double h = kTests[t].second(w, we);
        acc[2 * t] += h;
        acc[2 * t + 1] += h * h;
      }
    }
    partial[b] = acc;
  });
  std::array<double, 10> total{};
  for (const auto& p : partial)
    for (std::size_t c = 0; c < total.size(); ++c) total[c] += p[c];

  ExchangeabilityReport r;
  r.eps = eps;
  r.pairs = pairs;
  r.kind = kind;
  r.pass = true;
  for (std::size_t t = 0; t < kTests.size(); ++t) {
    AntisymmetricTest test;
    test.name = kTests[t].first;
    test.mean = mean_se(total[2 * t], total[2 * t + 1], static_cast<double>(pairs), &test.standard_error);
    test.pass = std::abs(test.mean) <= kSigmas * test.standard_error;
    r.pass = r.pass && test.pass;
    r.tests.push_back(test);
  }
  return r;
}

}  // namespace steinlab
