#include "steinlab/tv_estimation.hpp"

#include <boost/math/distributions/normal.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>

#include "steinlab/format.hpp"
#include "steinlab/parallel.hpp"

namespace steinlab {

namespace {

void check_bins(int bins) {
  if (bins < 2) throw std::invalid_argument("bin count K must be at least 2");
}

}  // namespace

EmpiricalSample make_sample(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("empirical sample must be non-empty");
  for (double v : values)
    if (!std::isfinite(v)) throw std::invalid_argument("empirical sample has a non-finite value");
  std::sort(values.begin(), values.end());
  EmpiricalSample s;
  s.values = std::move(values);
  return s;
}

EmpiricalSample sample_values(const EigenfunctionSpec& spec, std::uint64_t n_samples,
                              const SeededStream& stream, unsigned workers) {
  if (n_samples < 1) throw std::invalid_argument("sample_values: N must be at least 1");
  const Geometry geo = geometry_of(spec);
  const std::size_t dim = static_cast<std::size_t>(geo.ambient_dimension());
  std::vector<double> values(n_samples);
  for_each_block(n_samples, workers, [&](std::size_t b, std::size_t begin, std::size_t end) {
    SeededStream s = stream.substream(b);
    std::vector<double> x(dim);
    for (std::size_t i = begin; i < end; ++i) {
      geo.sample_point(s, x);
      values[i] = eval_unchecked(spec, x);
    }
  });
  EmpiricalSample out = make_sample(std::move(values));
  out.seed = stream.seed();
  out.stream_id = stream.stream_id();
  return out;
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("normal_quantile: p must lie in (0, 1)");
  return boost::math::quantile(boost::math::normal_distribution<double>(), p);
}

std::vector<double> normal_cell_edges(int bins) {
  check_bins(bins);
  std::vector<double> edges;
  edges.reserve(static_cast<std::size_t>(bins) - 1);
  for (int i = 1; i < bins; ++i) edges.push_back(normal_quantile(static_cast<double>(i) / bins));
  return edges;
}

std::vector<std::uint64_t> bin_counts(const EmpiricalSample& sample, int bins) {
  const auto edges = normal_cell_edges(bins);
  std::vector<std::uint64_t> counts(static_cast<std::size_t>(bins));
  std::size_t prev = 0;
  for (std::size_t k = 0; k < edges.size(); ++k) {
    const auto it = std::lower_bound(sample.values.begin(), sample.values.end(), edges[k]);
    const std::size_t idx = static_cast<std::size_t>(it - sample.values.begin());
    counts[k] = idx - prev;
    prev = idx;
  }
  counts.back() = sample.values.size() - prev;
  return counts;
}

double tv_hat(const EmpiricalSample& sample, int bins) {
  if (sample.values.empty()) throw std::invalid_argument("tv_hat: empty sample");
  const auto counts = bin_counts(sample, bins);
  const double n = static_cast<double>(sample.values.size());
  const double cell = 1.0 / bins;
  double s = 0.0;
  for (std::uint64_t c : counts) s += std::abs(static_cast<double>(c) / n - cell);
  return 0.5 * s;
}

double ks_stat(const EmpiricalSample& sample) {
  if (sample.values.empty()) throw std::invalid_argument("ks_stat: empty sample");
  const double n = static_cast<double>(sample.values.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.values.size(); ++i) {
    const double phi = normal_cdf(sample.values[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - phi, phi - static_cast<double>(i) / n});
  }
  return d;
}

double tv_slack(int bins, std::uint64_t n_samples) {
  check_bins(bins);
  return 4.0 * std::sqrt(static_cast<double>(bins) / static_cast<double>(n_samples));
}

std::string bin_counts_csv(const EmpiricalSample& sample, int bins) {
  const auto edges = normal_cell_edges(bins);
  const auto counts = bin_counts(sample, bins);
  const double n = static_cast<double>(sample.values.size());
  std::ostringstream os;
  os << "cell,lower,upper,count,empirical_mass,normal_mass\n";
  for (int k = 0; k < bins; ++k) {
    const std::string lo = k == 0 ? "-inf" : format_double(edges[static_cast<std::size_t>(k) - 1]);
    const std::string hi = k == bins - 1 ? "inf" : format_double(edges[static_cast<std::size_t>(k)]);
    os << k << ',' << lo << ',' << hi << ',' << counts[static_cast<std::size_t>(k)] << ','
       << format_double(static_cast<double>(counts[static_cast<std::size_t>(k)]) / n) << ','
       << format_double(1.0 / bins) << '\n';
  }
  return os.str();
}

double null_tv_hat(std::uint64_t n_samples, int bins, SeededStream& stream) {
  check_bins(bins);
  // Multinomial(N, 1/K) by sequential conditional binomials.
  std::uint64_t remaining = n_samples;
  double s = 0.0;
  const double n = static_cast<double>(n_samples);
  for (int k = 0; k < bins; ++k) {
    std::uint64_t c = remaining;
    if (k + 1 < bins) {
      std::binomial_distribution<std::uint64_t> bin(remaining, 1.0 / (bins - k));
      c = bin(stream.engine());
    }
    remaining -= c;
    s += std::abs(static_cast<double>(c) / n - 1.0 / bins);
  }
  return 0.5 * s;
}

}  // namespace steinlab
