#include "steinlab/runner.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <numbers>
#include <optional>
#include <regex>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "steinlab/exchangeable_lab.hpp"
#include "steinlab/format.hpp"
#include "steinlab/identity_verifier.hpp"
#include "steinlab/parallel.hpp"
#include "steinlab/sphere_moments.hpp"
#include "steinlab/stein_bounds.hpp"
#include "steinlab/tv_estimation.hpp"

namespace steinlab::cli {

namespace {

namespace fs = std::filesystem;

// Stream ids; every random input of an experiment derives from (seed, id).
constexpr std::uint64_t kCoefficientStream = 0xC0EFF1C1E17ULL;
constexpr std::uint64_t kDeltaStream = 0xDE17AULL;
constexpr std::uint64_t kSampleStream = 0x5A3B1EULL;
constexpr std::uint64_t kBoundStream = 0xB0D5ULL;
constexpr std::uint64_t kPointStream = 0x9015ULL;
constexpr std::uint64_t kPairStream = 0x9A125ULL;
constexpr std::uint64_t kMomentStream = 0x303E17ULL;

constexpr double kSigmas = 4.0;

const std::vector<std::string> kKinds = {"moments", "bounds", "tv", "pairlab", "identities", "report"};
const std::vector<std::string> kSweepParams = {"n", "ell", "N", "K", "eps"};

// Invalid configuration; `key` names the offending config field if any.
struct ConfigError : std::runtime_error {
  ConfigError(const std::string& msg, std::string k = {}) : std::runtime_error(msg), key(std::move(k)) {}
  std::string key;
};

struct Config {
  std::string kind = "tv";
  Json spec;  // explicit spec record or {"preset": name, ...}
  std::uint64_t seed = 1;
  std::uint64_t samples = 2000000;
  int bins = 50;
  unsigned shards = 0;
  std::vector<double> eps = {0.1, 0.05, 0.025};
  std::uint64_t draws = 1000000;
  int max_ell = 25;
  int max_p = 12;
  std::string metric = "both";
  int points = 5;
  std::optional<std::vector<double>> x;
  int coefficient_draws = 1;
  int n = 5;  // moments dimension
  int max_degree = 8;
  bool assert_mode = false;
  std::string out_dir = "steinlab_out";
  std::string sweep_param;
  std::vector<double> sweep_values;
};

struct Result {
  Json json = Json::object();
  std::string csv_header;
  std::vector<std::string> csv_rows;
  std::vector<std::pair<std::string, std::string>> plots;
  Json summary = Json::object();
  std::vector<std::string> failures;
};

// ---------------------------------------------------------------- config

template <class T>
T get_field(const Json& j, const char* key) {
  try {
    return j.at(key).get<T>();
  } catch (const Json::exception&) {
    throw ConfigError(std::string("field \"") + key + "\" has the wrong type", key);
  }
}

std::vector<double> parse_double_list(const std::string& text, const std::string& what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError(what + ": \"" + item + "\" is not a number");
    }
  }
  return out;
}

void apply_config_json(Config& c, const Json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  static const std::vector<std::string> known = {
      "experiment", "spec",   "preset", "seed",   "samples",           "bins",       "shards",
      "eps",        "draws",  "max_ell", "max_p", "metric",            "points",     "x",
      "n",          "max_degree", "assert", "out_dir", "coefficient_draws", "sweep"};
  for (const auto& [key, value] : j.items())
    if (std::find(known.begin(), known.end(), key) == known.end())
      throw ConfigError("unknown field \"" + key + "\"", key);
  if (j.contains("experiment")) c.kind = get_field<std::string>(j, "experiment");
  if (j.contains("spec") && j.contains("preset"))
    throw ConfigError("give either \"spec\" or \"preset\", not both", "preset");
  if (j.contains("spec")) c.spec = j.at("spec");
  if (j.contains("preset")) {
    c.spec = j.at("preset");
    if (!c.spec.is_object() || !c.spec.contains("name"))
      throw ConfigError("\"preset\" must be an object with a \"name\"", "preset");
    c.spec["preset"] = c.spec.at("name");
    c.spec.erase("name");
  }
  if (j.contains("seed")) c.seed = get_field<std::uint64_t>(j, "seed");
  if (j.contains("samples")) c.samples = get_field<std::uint64_t>(j, "samples");
  if (j.contains("bins")) c.bins = get_field<int>(j, "bins");
  if (j.contains("shards")) c.shards = get_field<unsigned>(j, "shards");
  if (j.contains("eps")) c.eps = get_field<std::vector<double>>(j, "eps");
  if (j.contains("draws")) c.draws = get_field<std::uint64_t>(j, "draws");
  if (j.contains("max_ell")) c.max_ell = get_field<int>(j, "max_ell");
  if (j.contains("max_p")) c.max_p = get_field<int>(j, "max_p");
  if (j.contains("metric")) c.metric = get_field<std::string>(j, "metric");
  if (j.contains("points")) c.points = get_field<int>(j, "points");
  if (j.contains("x")) c.x = get_field<std::vector<double>>(j, "x");
  if (j.contains("n")) c.n = get_field<int>(j, "n");
  if (j.contains("max_degree")) c.max_degree = get_field<int>(j, "max_degree");
  if (j.contains("assert")) c.assert_mode = get_field<bool>(j, "assert");
  if (j.contains("out_dir")) c.out_dir = get_field<std::string>(j, "out_dir");
  if (j.contains("coefficient_draws")) c.coefficient_draws = get_field<int>(j, "coefficient_draws");
  if (j.contains("sweep")) {
    const Json& s = j.at("sweep");
    if (!s.is_object()) throw ConfigError("\"sweep\" must be an object", "sweep");
    if (s.contains("parameter")) c.sweep_param = get_field<std::string>(s, "parameter");
    if (s.contains("values")) c.sweep_values = get_field<std::vector<double>>(s, "values");
  }
}

Json canonical_config(const Config& c) {
  Json j{{"experiment", c.kind},       {"spec", c.spec},         {"samples", c.samples},
         {"bins", c.bins},             {"eps", c.eps},           {"draws", c.draws},
         {"max_ell", c.max_ell},       {"max_p", c.max_p},       {"metric", c.metric},
         {"points", c.points},         {"n", c.n},               {"max_degree", c.max_degree},
         {"coefficient_draws", c.coefficient_draws}};
  if (c.x) j["x"] = *c.x;
  if (!c.sweep_param.empty()) j["sweep"] = Json{{"parameter", c.sweep_param}, {"values", c.sweep_values}};
  return j;
}

// ---------------------------------------------------------------- specs

struct SpecDraw {
  EigenfunctionSpec spec;
  int draw = 0;
};

int preset_int(const Json& p, const char* key, std::optional<int> fallback = std::nullopt) {
  if (!p.contains(key)) {
    if (fallback) return *fallback;
    throw ConfigError(std::string("preset needs \"") + key + "\"", key);
  }
  if (!p.at(key).is_number_integer()) throw ConfigError(std::string("preset field \"") + key + "\" must be an integer", key);
  return p.at(key).get<int>();
}

std::vector<double> torus_coefficients(const Json& p, std::size_t m, std::uint64_t seed, int draw) {
  const std::string mode = p.value("coefficients", std::string("random"));
  if (mode == "uniform") return std::vector<double>(m, std::sqrt(2.0 / static_cast<double>(m)));
  if (mode != "random") throw ConfigError("\"coefficients\" must be \"random\" or \"uniform\"", "coefficients");
  SeededStream s = SeededStream(seed, kCoefficientStream).substream(static_cast<std::uint64_t>(draw));
  return sample_coefficient_sphere(static_cast<int>(m), std::sqrt(2.0), s);
}

RationalVector preset_deltas(const Json& p, int n, std::uint64_t seed) {
  Rational delta_max(1, 100);
  if (p.contains("delta")) delta_max = rational_from_json(p.at("delta"));
  if (delta_max.sign() < 0 || delta_max >= Rational(1)) throw ConfigError("\"delta\" must lie in [0, 1)", "delta");
  SeededStream s(seed, kDeltaStream);
  const long grid = 1000000;
  RationalVector out;
  for (int i = 0; i < n; ++i) {
    const long k = static_cast<long>(std::floor(s.uniform() * (2 * grid + 1))) - grid;  // in [-grid, grid]
    out.push_back(delta_max * Rational(k) / Rational(grid));
  }
  return out;
}

bool preset_is_random(const Json& p) {
  const std::string name = p.at("preset").get<std::string>();
  if (name == "gegenbauer_random") return true;
  if (name.rfind("torus_", 0) == 0) return p.value("coefficients", std::string("random")) == "random";
  return false;
}

EigenfunctionSpec build_preset(const Json& p, std::uint64_t seed, int draw) {
  const std::string name = p.at("preset").get<std::string>();
  static const std::vector<std::string> allowed_keys = {"preset", "n", "ell", "coefficients", "delta"};
  for (const auto& [key, value] : p.items())
    if (std::find(allowed_keys.begin(), allowed_keys.end(), key) == allowed_keys.end())
      throw ConfigError("unknown preset field \"" + key + "\"", key);
  const int n = preset_int(p, "n");
  if (name == "quadratic_half_split") {
    if (n < 2 || n % 2) throw ConfigError("quadratic_half_split needs an even n >= 2", "n");
    RationalVector d(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) d[static_cast<std::size_t>(i)] = i < n / 2 ? 1 : -1;
    return make_quadratic(std::move(d));
  }
  if (name == "quadratic_two_coordinate") {
    if (n < 2) throw ConfigError("quadratic_two_coordinate needs n >= 2", "n");
    RationalVector d(static_cast<std::size_t>(n));
    d[0] = 1;
    d[1] = -1;
    return make_quadratic(std::move(d));
  }
  if (name.rfind("gegenbauer_", 0) == 0) {
    const int ell = preset_int(p, "ell", 1);
    if (name == "gegenbauer_uniform")
      return make_gegenbauer(n, ell, std::vector<double>(static_cast<std::size_t>(n), 1.0 / std::sqrt(n)));
    if (name == "gegenbauer_first_axis") {
      RationalVector a(static_cast<std::size_t>(n));
      a[0] = 1;
      return make_gegenbauer(n, ell, std::move(a));
    }
    if (name == "gegenbauer_random") {
      SeededStream s = SeededStream(seed, kCoefficientStream).substream(static_cast<std::uint64_t>(draw));
      return make_gegenbauer(n, ell, sample_coefficient_sphere(n, 1.0, s));
    }
  }
  if (name == "torus_basis" || name == "torus_pairs" || name == "torus_perturbed_pairs") {
    if (n < (name == "torus_basis" ? 1 : 2)) throw ConfigError("torus preset dimension is too small", "n");
    RationalMatrix b(static_cast<std::size_t>(n), RationalVector(static_cast<std::size_t>(n)));
    for (int i = 0; i < n; ++i) b[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)] = 1;
    std::vector<RationalVector> v;
    if (name == "torus_basis") {
      for (int i = 0; i < n; ++i) {
        RationalVector e(static_cast<std::size_t>(n));
        e[static_cast<std::size_t>(i)] = 1;
        v.push_back(std::move(e));
      }
    } else if (name == "torus_pairs") {
      v = pair_frequencies(n);
    } else {
      const RationalVector deltas = preset_deltas(p, n, seed);
      b = diagonal_metric(deltas);
      v = scaled_pair_frequencies(deltas);
    }
    const std::size_t m = v.size();
    return make_torus(std::move(b), std::move(v), torus_coefficients(p, m, seed, draw));
  }
  throw ConfigError("unknown preset \"" + name + "\"", "preset");
}

// Every spec instance the experiment runs on.
std::vector<SpecDraw> resolve_specs(const Config& c) {
  if (c.spec.is_null()) throw ConfigError("experiment needs a \"spec\" or \"preset\"", "spec");
  if (!c.spec.is_object()) throw ConfigError("\"spec\" must be an object", "spec");
  std::vector<SpecDraw> out;
  try {
    if (c.spec.contains("preset")) {
      if (!c.spec.at("preset").is_string()) throw ConfigError("preset name must be a string", "preset");
      const int draws = preset_is_random(c.spec) ? c.coefficient_draws : 1;
      for (int r = 0; r < draws; ++r) out.push_back({build_preset(c.spec, c.seed, r), r});
    } else {
      out.push_back({spec_from_json(c.spec), 0});
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("invalid spec: ") + e.what(), "spec");
  }
  return out;
}

// ---------------------------------------------------------------- helpers

std::string csv_bool(bool b) { return b ? "true" : "false"; }

double reference_bound(const EigenfunctionSpec& spec, std::string* name) {
  if (const auto* q = std::get_if<QuadraticHarmonic>(&spec)) {
    *name = "quadratic_theorem";
    return quadratic_bound(q->d).bound_value;
  }
  if (const auto* g = std::get_if<GegenbauerCombo>(&spec)) {
    if (g->ell == 1) {
      // A degree-1 harmonic is a rotated sqrt(n) x_1.
      *name = "linear_4_over_n_minus_1";
      return 4.0 / (g->n - 1);
    }
    *name = "degree_l";
    return degree_l_bound(g->ell, g->n, g->a).bound_value;
  }
  *name = "torus";
  return torus_bound(std::get<TorusCombo>(spec)).bound_value;
}

std::vector<std::vector<int>> even_partitions(int degree, int max_parts) {
  std::vector<std::vector<int>> out;
  std::vector<int> cur;
  const std::function<void(int, int)> rec = [&](int left, int largest) {
    if (left == 0) {
      out.push_back(cur);
      return;
    }
    if (static_cast<int>(cur.size()) == max_parts) return;
    for (int part = std::min(left, largest); part >= 2; part -= 2) {
      cur.push_back(part);
      rec(left - part, part);
      cur.pop_back();
    }
  };
  rec(degree, degree);
  return out;
}

std::string join_ints(const std::vector<int>& v, char sep) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? std::string(1, sep) : "") + std::to_string(v[i]);
  return s;
}

// ---------------------------------------------------------------- experiments

Result run_identities(const Config& c) {
  Result r;
  const auto results = all_identities(c.max_ell, c.max_p);
  r.csv_header = "identity,parameters,computed,expected,pass";
  Json arr = Json::array();
  std::ostringstream plot;
  plot << "ell,appendix_sum\n";
  int passed = 0;
  for (const auto& id : results) {
    std::string params = id.parameters.dump();
    std::replace(params.begin(), params.end(), ',', ';');
    r.csv_rows.push_back(id.id + "," + params + "," + id.computed.str() + "," + id.expected.str() + "," +
                         csv_bool(id.pass));
    arr.push_back(id.to_json());
    if (id.pass)
      ++passed;
    else
      r.failures.push_back(id.id + " " + id.parameters.dump() + " computed " + id.computed.str());
    if (id.id == "appendix_sum") plot << id.parameters.at("ell").get<int>() << ',' << id.computed.str() << '\n';
  }
  r.json["identities"] = arr;
  r.plots.emplace_back("identities.csv", plot.str());
  r.summary = Json{{"identities", results.size()}, {"passed", passed}, {"pass", passed == static_cast<int>(results.size())}};
  return r;
}

Result run_moments(const Config& c) {
  Result r;
  const int n = c.n;
  std::vector<std::vector<int>> parts;
  for (int deg = 0; deg <= c.max_degree; deg += 2)
    for (auto& p : even_partitions(deg, n)) parts.push_back(p);
  std::vector<MultiIndex> idx;
  for (const auto& p : parts) {
    std::vector<MultiIndex::Factor> f;
    for (std::size_t i = 0; i < p.size(); ++i) f.emplace_back(static_cast<int>(i), p[i]);
    idx.emplace_back(n, std::move(f));
  }
  // Monte Carlo column.
  const std::size_t m = idx.size();
  std::vector<double> mc_mean(m, 0.0), mc_se(m, 0.0);
  if (c.samples > 0) {
    const std::size_t blocks = block_count(c.samples);
    std::vector<std::vector<double>> sum(blocks, std::vector<double>(2 * m, 0.0));
    const SeededStream stream(c.seed, kMomentStream);
    for_each_block(c.samples, c.shards, [&](std::size_t b, std::size_t begin, std::size_t end) {
      SeededStream s = stream.substream(b);
      std::vector<double> x(static_cast<std::size_t>(n));
      auto& acc = sum[b];
      for (std::size_t i = begin; i < end; ++i) {
        sample_sphere_into(s, x);
        for (std::size_t k = 0; k < m; ++k) {
          double v = 1.0;
          for (const auto& [var, e] : idx[k].factors()) v *= std::pow(x[static_cast<std::size_t>(var)], e);
          acc[2 * k] += v;
          acc[2 * k + 1] += v * v;
        }
      }
    });
    const double nn = static_cast<double>(c.samples);
    for (std::size_t k = 0; k < m; ++k) {
      double s1 = 0.0, s2 = 0.0;
      for (const auto& acc : sum) {
        s1 += acc[2 * k];
        s2 += acc[2 * k + 1];
      }
      mc_mean[k] = s1 / nn;
      mc_se[k] = std::sqrt(std::max(0.0, s2 / nn - mc_mean[k] * mc_mean[k]) / (nn - 1.0));
    }
  }
  r.csv_header = "exponents,degree,gamma_ratio,closed_form,agree,value,mc_mean,mc_standard_error,mc_within";
  Json arr = Json::array();
  std::ostringstream plot;
  plot << "exponents,degree,value\n";
  bool all_agree = true, all_within = true;
  for (std::size_t k = 0; k < m; ++k) {
    const Rational g = monomial_moment(idx[k]);
    const Rational cf = monomial_moment_closed_form(idx[k]);
    const bool agree = g == cf;
    const double tol = kSigmas * mc_se[k] + 1e-12;
    const bool within = c.samples == 0 || std::abs(mc_mean[k] - g.to_double()) <= tol;
    all_agree = all_agree && agree;
    all_within = all_within && within;
    const std::string ex = join_ints(parts[k], ' ');
    r.csv_rows.push_back(ex + "," + std::to_string(idx[k].total_degree()) + "," + g.str() + "," + cf.str() + "," +
                         csv_bool(agree) + "," + format_double(g.to_double()) + "," + format_double(mc_mean[k]) +
                         "," + format_double(mc_se[k]) + "," + csv_bool(within));
    Json row{{"exponents", parts[k]}, {"gamma_ratio", rational_to_json(g)}, {"closed_form", rational_to_json(cf)},
             {"agree", agree}};
    if (c.samples > 0) row.update(Json{{"mc_mean", mc_mean[k]}, {"mc_standard_error", mc_se[k]}, {"mc_within", within}});
    arr.push_back(row);
    plot << ex << ',' << idx[k].total_degree() << ',' << format_double(g.to_double()) << '\n';
    if (!agree) r.failures.push_back("moment " + ex + ": Gamma ratio and closed form disagree");
    if (!within) r.failures.push_back("moment " + ex + ": Monte Carlo estimate outside 4 standard errors");
  }
  r.json["n"] = n;
  r.json["moments"] = arr;
  r.plots.emplace_back("moments.csv", plot.str());
  r.summary = Json{{"moments", m}, {"all_agree", all_agree}, {"all_mc_within", all_within}};
  return r;
}

Result run_bounds(const Config& c, const std::vector<SpecDraw>& specs) {
  Result r;
  r.csv_header = "draw," + BoundReport::csv_header();
  Json arr = Json::array();
  std::ostringstream plot;
  plot << "draw,bound,value\n";
  double first_exact = 0.0, first_generic = 0.0;
  for (const SpecDraw& sd : specs) {
    const EigenfunctionSpec& spec = sd.spec;
    std::vector<BoundReport> reps;
    Json extra = Json::object();
    if (const auto* q = std::get_if<QuadraticHarmonic>(&spec)) {
      reps.push_back(quadratic_bound(q->d));
      const auto mom = quadratic_gradient_moments(q->d);
      const Rational disp = quadratic_variance_displayed_bound(q->d);
      extra = Json{{"gradient_mean", rational_to_json(mom.mean)},
                   {"gradient_variance", rational_to_json(mom.variance)},
                   {"displayed_variance_bound", rational_to_json(disp)},
                   {"variance_within_displayed", mom.variance <= disp}};
      if (!(mom.variance <= disp)) r.failures.push_back("exact variance exceeds the displayed bound");
    } else if (const auto* g = std::get_if<GegenbauerCombo>(&spec)) {
      reps.push_back(degree_l_bound(g->ell, g->n, g->a));
      if (g->ell >= 3) {
        const KeyFacts k = degree_l_key_facts(g->ell, g->n);
        extra = Json{{"fact1_exact", rational_to_json(k.fact1_exact)}, {"fact1_ratio", k.fact1_ratio},
                     {"fact2_exact", rational_to_json(k.fact2_exact)}, {"fact2_ratio", k.fact2_ratio}};
      }
    } else {
      reps.push_back(torus_bound(std::get<TorusCombo>(spec)));
    }
    const double mu = mean_eigenvalue(spec);
    if (c.samples >= 1000) {
      const SeededStream s = SeededStream(c.seed, kBoundStream).substream(static_cast<std::uint64_t>(sd.draw));
      reps.push_back(generic_bound_mc(spec, mu, c.samples, s, c.shards));
      if (const auto* q = std::get_if<QuadraticHarmonic>(&spec)) {
        // E|G - EG| <= sqrt(Var G).
        const BoundReport& mc = reps.back();
        const double mad = mc.component("mean_abs_deviation").value;
        const double sd_exact = std::sqrt(quadratic_variance_exact(q->d).to_double());
        const double se = mc.standard_error * mu / 2.0;
        extra["holder_within"] = mad <= sd_exact + kSigmas * se;
        if (!(mad <= sd_exact + kSigmas * se)) r.failures.push_back("mean absolute deviation exceeds sqrt(Var) + 4 SE");
      }
    }
    Json reps_json = Json::array();
    for (BoundReport& b : reps) {
      if (!(b.bound_value >= 0.0) || !std::isfinite(b.bound_value))
        r.failures.push_back(b.bound + " bound is negative or not finite");
      r.csv_rows.push_back(std::to_string(sd.draw) + "," + b.csv_row());
      plot << sd.draw << ',' << b.bound << ',' << format_double(b.bound_value) << '\n';
      reps_json.push_back(b.to_json());
    }
    if (sd.draw == 0) {
      first_exact = reps.front().bound_value;
      first_generic = reps.size() > 1 ? reps.back().bound_value : std::nan("");
    }
    arr.push_back(Json{{"draw", sd.draw}, {"family", family_name(spec)}, {"n", ambient_dimension(spec)},
                       {"reports", reps_json}, {"exact", extra}});
  }
  r.json["bounds"] = arr;
  r.plots.emplace_back("bounds.csv", plot.str());
  r.summary = Json{{"bound", first_exact}, {"generic_mc", std::isfinite(first_generic) ? Json(first_generic) : Json(nullptr)}};
  return r;
}

Result run_tv(const Config& c, const std::vector<SpecDraw>& specs) {
  Result r;
  const bool want_tv = c.metric != "ks";
  const bool want_ks = c.metric != "tv";
  r.csv_header = "draw,family,n,samples,bins,tv_hat,ks,slack,bound_name,bound,within";
  const double slack = tv_slack(c.bins, c.samples);
  Json arr = Json::array();
  std::ostringstream draws_plot;
  draws_plot << "draw,tv_hat,ks,bound\n";
  double tv_sum = 0.0, ks_sum = 0.0, bound_sum = 0.0;
  std::string bound_name;
  for (const SpecDraw& sd : specs) {
    const SeededStream s = SeededStream(c.seed, kSampleStream).substream(static_cast<std::uint64_t>(sd.draw));
    const EmpiricalSample sample = sample_values(sd.spec, c.samples, s, c.shards);
    const double tv = want_tv ? tv_hat(sample, c.bins) : std::nan("");
    const double ks = want_ks ? ks_stat(sample) : std::nan("");
    const double bound = reference_bound(sd.spec, &bound_name);
    const bool within = !want_tv || tv <= bound + slack;
    if (want_tv && want_ks && !(ks <= tv + slack))
      r.failures.push_back("draw " + std::to_string(sd.draw) + ": KS exceeds tv_hat + slack");
    tv_sum += tv;
    ks_sum += ks;
    bound_sum += bound;
    r.csv_rows.push_back(std::to_string(sd.draw) + "," + family_name(sd.spec) + "," +
                         std::to_string(ambient_dimension(sd.spec)) + "," + std::to_string(c.samples) + "," +
                         std::to_string(c.bins) + "," + (want_tv ? format_double(tv) : "") + "," +
                         (want_ks ? format_double(ks) : "") + "," + format_double(slack) + "," + bound_name + "," +
                         format_double(bound) + "," + csv_bool(within));
    Json row{{"draw", sd.draw}, {"family", family_name(sd.spec)}, {"n", ambient_dimension(sd.spec)},
             {"bound_name", bound_name}, {"bound", bound}, {"slack", slack}};
    if (want_tv) row["tv_hat"] = tv;
    if (want_ks) row["ks"] = ks;
    arr.push_back(row);
    draws_plot << sd.draw << ',' << (want_tv ? format_double(tv) : "") << ',' << (want_ks ? format_double(ks) : "")
               << ',' << format_double(bound) << '\n';
    if (sd.draw == 0) r.plots.emplace_back("tv_bins.csv", bin_counts_csv(sample, c.bins));
  }
  const double k = static_cast<double>(specs.size());
  const double mean_tv = tv_sum / k, mean_ks = ks_sum / k, mean_bound = bound_sum / k;
  const bool pass = !want_tv || mean_tv <= mean_bound + slack;
  if (!pass) r.failures.push_back("mean tv_hat exceeds the bound plus slack");
  r.json["draws"] = arr;
  r.json["samples"] = c.samples;
  r.json["bins"] = c.bins;
  r.json["slack"] = slack;
  r.json["mean"] = Json{{"tv_hat", want_tv ? Json(mean_tv) : Json(nullptr)},
                        {"ks", want_ks ? Json(mean_ks) : Json(nullptr)},
                        {"bound", mean_bound}};
  r.plots.emplace_back("tv_draws.csv", draws_plot.str());
  r.summary = Json{{"tv_hat", want_tv ? Json(mean_tv) : Json(nullptr)},
                   {"ks", want_ks ? Json(mean_ks) : Json(nullptr)},
                   {"slack", slack},
                   {"bound", mean_bound},
                   {"pass", pass}};
  return r;
}

std::vector<std::vector<double>> base_points(const Config& c, const EigenfunctionSpec& spec) {
  const Geometry geo = geometry_of(spec);
  if (c.x) {
    geo.check_point(*c.x);
    return {*c.x};
  }
  SeededStream s(c.seed, kPointStream);
  std::vector<std::vector<double>> pts;
  for (int i = 0; i < c.points; ++i) {
    std::vector<double> x(static_cast<std::size_t>(geo.ambient_dimension()));
    geo.sample_point(s, x);
    pts.push_back(std::move(x));
  }
  return pts;
}

Result run_pairlab(const Config& c, const std::vector<SpecDraw>& specs) {
  Result r;
  const EigenfunctionSpec& spec = specs.front().spec;
  const auto pts = base_points(c, spec);
  r.csv_header = "point," + ConditionReport::csv_header();
  Json arr = Json::array();
  std::ostringstream plot;
  plot << "point,condition,eps,abs_residual\n";
  const std::size_t ne = c.eps.size();
  std::vector<double> drift_res(ne, 0.0), diff_res(ne, 0.0), third(ne, 0.0);
  bool all_pass = true;
  for (std::size_t p = 0; p < pts.size(); ++p) {
    const SeededStream s = SeededStream(c.seed, kPairStream).substream(p);
    const ConditionSuite suite = condition_suite(spec, pts[p], c.eps, c.draws, s, c.shards);
    Json reports = Json::array();
    for (const ConditionReport* rep : {&suite.drift, &suite.diffusion, &suite.third_moment}) {
      reports.push_back(rep->to_json());
      std::istringstream lines(rep->csv_rows(std::to_string(p) + ","));
      for (std::string line; std::getline(lines, line);) r.csv_rows.push_back(line);
      for (const EpsRow& row : rep->rows)
        plot << p << ',' << rep->condition << ',' << format_double(row.eps) << ','
             << format_double(rep->condition == "third_moment" ? row.estimate : std::abs(row.residual)) << '\n';
      if (!rep->pass) {
        all_pass = false;
        r.failures.push_back("point " + std::to_string(p) + ": " + rep->condition + " check failed");
      }
    }
    for (std::size_t k = 0; k < ne; ++k) {
      drift_res[k] += std::abs(suite.drift.rows[k].residual) / static_cast<double>(pts.size());
      diff_res[k] += std::abs(suite.diffusion.rows[k].residual) / static_cast<double>(pts.size());
      third[k] += suite.third_moment.rows[k].estimate / static_cast<double>(pts.size());
    }
    arr.push_back(Json{{"point", p}, {"conditions", reports}});
  }
  const SeededStream es(c.seed, kPairStream ^ 0xE5ULL);
  const ExchangeabilityReport ex = exchangeability_check(spec, c.eps.front(), c.draws, es, PairKind::Geodesic, c.shards);
  const ExchangeabilityReport neg =
      exchangeability_check(spec, c.eps.front(), c.draws, es.substream(1), PairKind::Uphill, c.shards);
  if (!ex.pass) r.failures.push_back("exchangeability check failed for the geodesic pair");
  if (neg.pass) r.failures.push_back("negative control (uphill pair) was not detected");
  r.json["points"] = arr;
  r.json["exchangeability"] = ex.to_json();
  r.json["negative_control"] = neg.to_json();
  r.plots.emplace_back("pairlab_residuals.csv", plot.str());
  r.summary = Json{{"conditions_pass", all_pass}, {"exchangeable", ex.pass}, {"negative_control_detected", !neg.pass}};
  Json per_eps = Json::array();
  for (std::size_t k = 0; k < ne; ++k)
    per_eps.push_back(Json{{"eps", c.eps[k]},
                           {"drift_abs_residual", drift_res[k]},
                           {"diffusion_abs_residual", diff_res[k]},
                           {"third_moment", third[k]}});
  r.json["mean_over_points"] = per_eps;
  return r;
}

Result run_report(const Config& c, const std::vector<SpecDraw>& specs) {
  Result ids = run_identities(c);
  Result bounds = run_bounds(c, specs);
  Result tv = run_tv(c, specs);
  Result r;
  r.json = Json{{"identities", ids.summary}, {"bounds", bounds.json.at("bounds")}, {"tv", tv.json}};
  r.csv_header = "section," + tv.csv_header;
  for (const auto& row : tv.csv_rows) r.csv_rows.push_back("tv," + row);
  r.plots = tv.plots;
  for (auto& p : bounds.plots) r.plots.push_back(p);
  r.failures = ids.failures;
  r.failures.insert(r.failures.end(), bounds.failures.begin(), bounds.failures.end());
  r.failures.insert(r.failures.end(), tv.failures.begin(), tv.failures.end());
  r.summary = tv.summary;
  r.summary["identities_pass"] = ids.summary.at("pass");
  r.summary["exact_bound"] = bounds.summary.at("bound");
  return r;
}

Result run_kind(const Config& c) {
  if (c.kind == "identities") return run_identities(c);
  if (c.kind == "moments") return run_moments(c);
  const auto specs = resolve_specs(c);
  if (c.kind == "bounds") return run_bounds(c, specs);
  if (c.kind == "tv") return run_tv(c, specs);
  if (c.kind == "pairlab") return run_pairlab(c, specs);
  return run_report(c, specs);
}

std::string summary_cell(const Json& v) {
  if (v.is_null()) return "";
  if (v.is_number_float()) return format_double(v.get<double>());
  if (v.is_boolean()) return csv_bool(v.get<bool>());
  if (v.is_string()) return v.get<std::string>();
  return v.dump();
}

Config with_sweep_value(const Config& base, double value) {
  Config c = base;
  const auto as_int = [&](const char* what) {
    if (value != std::floor(value) || value < 1) throw ConfigError(std::string("sweep ") + what + " values must be positive integers", "values");
    return static_cast<long long>(value);
  };
  if (base.sweep_param == "n" || base.sweep_param == "ell") {
    if (base.kind == "moments" && base.sweep_param == "n") {
      c.n = static_cast<int>(as_int("n"));
      return c;
    }
    if (!c.spec.is_object() || !c.spec.contains("preset"))
      throw ConfigError("sweeping " + base.sweep_param + " needs a preset spec", "preset");
    c.spec[base.sweep_param] = as_int(base.sweep_param.c_str());
  } else if (base.sweep_param == "N") {
    c.samples = static_cast<std::uint64_t>(as_int("N"));
  } else if (base.sweep_param == "K") {
    c.bins = static_cast<int>(as_int("K"));
  }
  return c;
}

void validate(const Config& c, bool sweep) {
  if (std::find(kKinds.begin(), kKinds.end(), c.kind) == kKinds.end())
    throw ConfigError("unknown experiment \"" + c.kind + "\"", "experiment");
  if (c.bins < 2) throw ConfigError("bins must be at least 2", "bins");
  if (c.metric != "tv" && c.metric != "ks" && c.metric != "both")
    throw ConfigError("metric must be tv, ks or both", "metric");
  if (c.max_ell < 1 || c.max_ell > 201) throw ConfigError("max_ell must lie in [1, 201]", "max_ell");
  if (c.max_p < 0 || c.max_p > 60) throw ConfigError("max_p must lie in [0, 60]", "max_p");
  if (c.points < 1) throw ConfigError("points must be positive", "points");
  if (c.coefficient_draws < 1) throw ConfigError("coefficient_draws must be positive", "coefficient_draws");
  if (c.kind == "moments") {
    if (c.n < 2) throw ConfigError("moments need n >= 2", "n");
    if (c.max_degree < 0 || c.max_degree % 2 || c.max_degree > 16)
      throw ConfigError("max_degree must be even and at most 16", "max_degree");
  }
  if ((c.kind == "tv" || c.kind == "report") && c.samples < 1) throw ConfigError("samples must be positive", "samples");
  if (c.kind == "bounds" && c.samples != 0 && c.samples < 1000)
    throw ConfigError("bounds need samples = 0 (exact only) or >= 1000", "samples");
  if (c.kind == "pairlab") {
    if (c.draws < 10000) throw ConfigError("draws must be at least 10000", "draws");
    if (c.eps.empty()) throw ConfigError("eps grid is empty", "eps");
    for (std::size_t i = 0; i < c.eps.size(); ++i) {
      if (!(c.eps[i] > 0.0 && c.eps[i] < std::numbers::pi)) throw ConfigError("eps values must lie in (0, pi)", "eps");
      if (i > 0 && !(c.eps[i] < c.eps[i - 1])) throw ConfigError("eps grid must be strictly decreasing", "eps");
    }
  }
  if (c.kind != "identities" && c.kind != "moments") {
    const auto specs = resolve_specs(c);
    if (c.kind == "pairlab") {
      try {
        base_points(c, specs.front().spec);
      } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("invalid base point: ") + e.what(), "x");
      }
    }
  }
  if (sweep) {
    if (std::find(kSweepParams.begin(), kSweepParams.end(), c.sweep_param) == kSweepParams.end())
      throw ConfigError("sweep parameter must be one of n, ell, N, K, eps", "parameter");
    if (c.sweep_values.empty()) throw ConfigError("sweep value list is empty", "values");
    if (c.sweep_param == "eps") {
      if (c.kind != "pairlab") throw ConfigError("sweeping eps needs the pairlab experiment", "experiment");
      Config e = c;
      e.eps = c.sweep_values;
      validate(e, false);
    } else {
      for (double v : c.sweep_values) validate(with_sweep_value(c, v), false);
    }
  }
}

Result run_sweep(const Config& base) {
  Result r;
  const std::string& param = base.sweep_param;
  std::vector<std::string> keys;
  std::ostringstream plot;
  Json rows = Json::array();
  if (param == "eps") {
    Config c = base;
    c.eps = base.sweep_values;
    Result inner = run_pairlab(c, resolve_specs(c));
    r.failures = inner.failures;
    keys = {"drift_abs_residual", "diffusion_abs_residual", "third_moment"};
    for (const Json& row : inner.json.at("mean_over_points")) {
      std::string line = format_double(row.at("eps").get<double>());
      for (const auto& k : keys) line += "," + summary_cell(row.at(k));
      r.csv_rows.push_back(line);
      rows.push_back(row);
    }
    r.json["pairlab"] = inner.json;
  } else {
    for (double v : base.sweep_values) {
      const Config c = with_sweep_value(base, v);
      Result inner = run_kind(c);
      if (keys.empty())
        for (const auto& [k, val] : inner.summary.items()) keys.push_back(k);
      std::string line = format_double(v);
      for (const auto& k : keys) line += "," + (inner.summary.contains(k) ? summary_cell(inner.summary.at(k)) : "");
      r.csv_rows.push_back(line);
      Json row{{"value", v}};
      row.update(inner.summary);
      rows.push_back(row);
      for (const auto& f : inner.failures) r.failures.push_back(param + "=" + format_double(v) + ": " + f);
    }
  }
  r.csv_header = param;
  for (const auto& k : keys) r.csv_header += "," + k;
  plot << r.csv_header << '\n';
  for (const auto& row : r.csv_rows) plot << row << '\n';
  r.plots.emplace_back("sweep_" + param + ".csv", plot.str());
  r.json["parameter"] = param;
  r.json["rows"] = rows;
  return r;
}

// ---------------------------------------------------------------- output

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << content;
  if (!f) throw std::runtime_error("failed writing " + path.string());
}

void write_outputs(const Config& c, const std::string& fp, const Json& canonical, const Result& r,
                   const std::string& experiment) {
  const fs::path dir(c.out_dir);
  fs::create_directories(dir / "plot");
  Json doc{{"tool", "steinlab"},   {"experiment", experiment}, {"fingerprint", fp},
           {"seed", c.seed},       {"config", canonical},      {"results", r.json},
           {"assertions", Json{{"checked", c.assert_mode}, {"failures", r.failures}}}};
  write_file(dir / "results.json", doc.dump(2) + "\n");
  std::ostringstream csv;
  csv << "fingerprint,seed," << r.csv_header << '\n';
  for (const auto& row : r.csv_rows) csv << fp << ',' << c.seed << ',' << row << '\n';
  write_file(dir / "results.csv", csv.str());
  for (const auto& [name, content] : r.plots) {
    std::istringstream in(content);
    std::ostringstream out;
    std::string line;
    bool header = true;
    while (std::getline(in, line)) {
      out << (header ? "fingerprint,seed," : fp + "," + std::to_string(c.seed) + ",") << line << '\n';
      header = false;
    }
    write_file(dir / "plot" / name, out.str());
  }
}

// 1-based line of the first occurrence of "key" in the config text, or 0.
int locate_key(const std::string& text, const std::string& key) {
  if (key.empty()) return 0;
  const auto pos = text.find('"' + key + '"');
  if (pos == std::string::npos) return 0;
  return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(pos), '\n'));
}

std::string read_text(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot open " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

Json parse_json_text(const std::string& text, const std::string& path) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    std::string msg = e.what();
    std::smatch m;
    static const std::regex line_re("line ([0-9]+)");
    if (std::regex_search(msg, m, line_re)) throw ConfigError(path + ":" + m[1].str() + ": malformed JSON: " + msg);
    throw ConfigError(path + ": malformed JSON: " + msg);
  }
}

}  // namespace

std::string fingerprint(const Json& canonical) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char ch : canonical.dump()) {
    h ^= ch;
    h *= 0x100000001B3ULL;
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"steinlab: normal-approximation bounds for Laplacian eigenfunctions"};
  app.require_subcommand(1);
  std::optional<std::string> config_path, spec_path, eps_text, values_text, metric, out_dir, param;
  std::optional<std::uint64_t> seed, samples, draws;
  std::optional<int> bins, max_ell, points;
  std::optional<unsigned> shards;
  bool assert_flag = false;
  const auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "experiment config (JSON)");
    sub->add_option("--spec", spec_path, "eigenfunction spec or preset (JSON file)");
    sub->add_option("--seed", seed, "random seed");
    sub->add_option("--samples", samples, "Monte Carlo sample count N");
    sub->add_option("--bins", bins, "tv_hat cell count K");
    sub->add_option("--shards", shards, "worker threads (results do not depend on it)");
    sub->add_option("--eps", eps_text, "comma-separated eps grid, decreasing");
    sub->add_option("--draws", draws, "antithetic draws per point (pairlab)");
    sub->add_option("--max-ell", max_ell, "largest odd ell for identities");
    sub->add_option("--points", points, "random base points (pairlab)");
    sub->add_option("--metric", metric, "tv, ks or both");
    sub->add_option("--out-dir", out_dir, "output directory");
    sub->add_flag("--assert", assert_flag, "exit 2 if any acceptance check fails");
  };
  add_common(&app);
  std::map<std::string, CLI::App*> subs;
  for (const auto& kind : kKinds) {
    subs[kind] = app.add_subcommand(kind, "run the " + kind + " experiment");
    add_common(subs[kind]);
  }
  CLI::App* sweep = app.add_subcommand("sweep", "repeat an experiment over one parameter");
  add_common(sweep);
  sweep->add_option("--param", param, "n, ell, N, K or eps");
  sweep->add_option("--values", values_text, "comma-separated values");

  std::vector<std::string> args;
  for (int i = argc - 1; i > 0; --i) args.emplace_back(argv[i]);
  try {
    app.parse(std::move(args));
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "steinlab: command line: " << e.what() << '\n';
    return kExitInvalidConfig;
  }

  Config c;
  std::string config_text, source = "command line";
  const bool is_sweep = sweep->parsed();
  try {
    if (config_path) {
      source = *config_path;
      config_text = read_text(*config_path);
      apply_config_json(c, parse_json_text(config_text, *config_path));
    }
    if (!is_sweep) {
      for (const auto& [kind, sub] : subs)
        if (sub->parsed()) c.kind = kind;
    }
    if (spec_path) {
      const Json s = parse_json_text(read_text(*spec_path), *spec_path);
      Config tmp;
      Json wrapper = s.is_object() && s.contains("name") && !s.contains("family") ? Json{{"preset", s}} : Json{{"spec", s}};
      apply_config_json(tmp, wrapper);
      c.spec = tmp.spec;
    }
    if (seed) c.seed = *seed;
    if (samples) c.samples = *samples;
    if (bins) c.bins = *bins;
    if (shards) c.shards = *shards;
    if (eps_text) c.eps = parse_double_list(*eps_text, "--eps");
    if (draws) c.draws = *draws;
    if (max_ell) c.max_ell = *max_ell;
    if (points) c.points = *points;
    if (metric) c.metric = *metric;
    if (out_dir) c.out_dir = *out_dir;
    if (assert_flag) c.assert_mode = true;
    if (param) c.sweep_param = *param;
    if (values_text) c.sweep_values = parse_double_list(*values_text, "--values");
    validate(c, is_sweep);
  } catch (const ConfigError& e) {
    const int line = locate_key(config_text, e.key);
    err << "steinlab: invalid config: " << source;
    if (line > 0) err << ':' << line;
    err << ": " << e.what() << '\n';
    return kExitInvalidConfig;
  }

  const Json canonical = canonical_config(c);
  const std::string fp = fingerprint(canonical);
  Result r;
  try {
    r = is_sweep ? run_sweep(c) : run_kind(c);
  } catch (const ConfigError& e) {
    err << "steinlab: invalid config: " << source << ": " << e.what() << '\n';
    return kExitInvalidConfig;
  } catch (const std::invalid_argument& e) {
    err << "steinlab: invalid config: " << source << ": " << e.what() << '\n';
    return kExitInvalidConfig;
  }
  const std::string experiment = is_sweep ? "sweep:" + c.kind : c.kind;
  try {
    write_outputs(c, fp, canonical, r, experiment);
  } catch (const std::exception& e) {
    err << "steinlab: " << e.what() << '\n';
    return kExitInvalidConfig;
  }
  out << "steinlab " << experiment << ": " << r.csv_rows.size() << " rows written to " << c.out_dir
      << " (fingerprint " << fp << ", seed " << c.seed << ")\n";
  if (!r.failures.empty()) {
    for (const auto& f : r.failures) (c.assert_mode ? err : out) << (c.assert_mode ? "FAIL: " : "note: ") << f << '\n';
    if (c.assert_mode) return kExitAssertion;
  } else if (c.assert_mode) {
    out << "all assertions passed\n";
  }
  return kExitOk;
}

}  // namespace steinlab::cli
