#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "steinlab/eigenfunctions.hpp"
#include "steinlab/sampling.hpp"

namespace steinlab {

// Sorted draws of W = f(X).
struct EmpiricalSample {
  std::vector<double> values;  // ascending
  std::uint64_t seed = 0;
  std::uint64_t stream_id = 0;
  std::string fingerprint;

  std::size_t size() const { return values.size(); }
};

// Sorts `values`; throws std::invalid_argument when empty or non-finite.
EmpiricalSample make_sample(std::vector<double> values);

// N independent draws of f(X), X uniform on the spec's manifold. Block b of
// the sample uses stream.substream(b), so the result does not depend on the
// worker count.
EmpiricalSample sample_values(const EigenfunctionSpec& spec, std::uint64_t n_samples,
                              const SeededStream& stream, unsigned workers = 0);

double normal_cdf(double x);
double normal_quantile(double p);  // p in (0, 1)

// Interior cell boundaries Phi^{-1}(i/K), i = 1..K-1.
std::vector<double> normal_cell_edges(int bins);
// Counts of the K cells equiprobable under N(0, 1); cells are [e_{i-1}, e_i).
std::vector<std::uint64_t> bin_counts(const EmpiricalSample& sample, int bins);

// (1/2) sum_k |count_k / N - 1/K|. Requires bins >= 2.
double tv_hat(const EmpiricalSample& sample, int bins);
// sup_x |F_N(x) - Phi(x)|.
double ks_stat(const EmpiricalSample& sample);
// 4 sqrt(K / N).
double tv_slack(int bins, std::uint64_t n_samples);

// CSV with columns cell,lower,upper,count,empirical_mass,normal_mass.
std::string bin_counts_csv(const EmpiricalSample& sample, int bins);

// tv_hat of a uniform-multinomial null sample, for calibration.
double null_tv_hat(std::uint64_t n_samples, int bins, SeededStream& stream);

}  // namespace steinlab
