#pragma once

// Experiment configuration read from JSON. Every key is checked against a
// fixed schema; unknown keys and ill-typed values raise ConfigError.

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "htcg/equilibrium.hpp"
#include "htcg/error.hpp"
#include "htcg/gibbs.hpp"

namespace htcg {

using json = nlohmann::json;

/// Coefficient lists: cos[i] multiplies cos((i+1)x), sin[i] multiplies sin((i+1)x).
struct SeriesSpec {
  double constant = 0.0;
  std::vector<double> cos, sin;

  TrigSeries build() const {
    const int K = static_cast<int>(std::max<std::size_t>({cos.size(), sin.size(), 1}));
    TrigSeries f(K);
    f.set(0, constant);
    for (std::size_t i = 0; i < cos.size(); ++i) f += TrigSeries::cosine(static_cast<int>(i) + 1, cos[i]);
    for (std::size_t i = 0; i < sin.size(); ++i) f += TrigSeries::sine(static_cast<int>(i) + 1, sin[i]);
    return f;
  }
};

struct PotentialConfig {
  std::string preset = "zero";  // zero | cosine | series
  double a = 1.0, b = 0.0;      // cosine: a cos x + b cos 2x
  SeriesSpec series;

  PotentialSpec build() const {
    if (preset == "zero") return PotentialSpec::zero();
    if (preset == "cosine") return PotentialSpec::cosine(a, b);
    return PotentialSpec::from_series(series.build());
  }
};

struct ChainConfig {
  int N = 200;
  std::string algorithm = "mh";  // mh | mala | iid0
  double step_size = 0.0;
  int n_steps = 1;
  int burn_in = 30;
  int thinning = 1;
  bool adapt = true;
  std::size_t n_chains = 1000;
  bool dump_configurations = false;
};

struct ExperimentConfig {
  PotentialConfig potential;
  double beta = 1.0;
  std::vector<double> beta_grid;
  int K = 256;
  std::size_t M = 1024;
  int K_op = 64;
  double tol = 1e-10;
  double theta = 0.5;
  ChainConfig chain;
  SeriesSpec psi{0.0, {1.0}, {}};
  SeriesSpec phi{0.0, {1.0}, {}};
  int weyl_j_min = 20, weyl_j_max = 60;
  std::vector<double> r_grid{0.6, 0.8, 1.0, 1.2};
  double concentration_C = 0.0;  // 0: computed from the equilibrium
  std::size_t n_configs = 100;
  std::string out = "out";
  std::uint64_t seed = 1;
  unsigned workers = 0;

  SolverOptions solver() const {
    SolverOptions o;
    o.tol = tol;
    o.K = K;
    o.M = M;
    o.theta = theta;
    return o;
  }

  ChainSpec chain_spec() const {
    ChainSpec s;
    s.N = chain.N;
    s.beta = beta;
    s.potential = potential.build();
    s.algorithm = chain.algorithm == "mala" ? Algorithm::MALA : chain.algorithm == "iid0" ? Algorithm::IID0 : Algorithm::MH;
    s.step_size = chain.step_size;
    s.n_steps = chain.n_steps;
    s.burn_in = chain.burn_in;
    s.thinning = chain.thinning;
    s.seed = seed;
    s.adapt = chain.adapt;
    return s;
  }
};

namespace detail {

inline void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [k, v] : j.items())
    if (!allowed.count(k)) throw ConfigError("unknown key '" + (where.empty() ? k : where + "." + k) + "'");
}

template <class T>
void read(const json& j, const char* key, T& out, const std::string& where) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError("bad value for '" + (where.empty() ? std::string(key) : where + "." + key) + "'");
  }
}

inline SeriesSpec read_series(const json& j, const std::string& where) {
  check_keys(j, {"constant", "cos", "sin"}, where);
  SeriesSpec s{0.0, {}, {}};
  read(j, "constant", s.constant, where);
  read(j, "cos", s.cos, where);
  read(j, "sin", s.sin, where);
  return s;
}

inline json series_json(const SeriesSpec& s) { return {{"constant", s.constant}, {"cos", s.cos}, {"sin", s.sin}}; }

}  // namespace detail

inline ExperimentConfig parse_config(const json& j) {
  using detail::read;
  detail::check_keys(j,
                     {"potential", "beta", "beta_grid", "K", "M", "K_op", "tol", "theta", "chain", "psi", "phi",
                      "weyl_j_min", "weyl_j_max", "r_grid", "concentration_C", "n_configs", "out", "seed", "workers"},
                     "");
  ExperimentConfig c;
  if (j.contains("potential")) {
    const json& p = j["potential"];
    detail::check_keys(p, {"preset", "a", "b", "series"}, "potential");
    read(p, "preset", c.potential.preset, "potential");
    read(p, "a", c.potential.a, "potential");
    read(p, "b", c.potential.b, "potential");
    if (p.contains("series")) c.potential.series = detail::read_series(p["series"], "potential.series");
    if (c.potential.preset != "zero" && c.potential.preset != "cosine" && c.potential.preset != "series")
      throw ConfigError("potential.preset must be zero, cosine or series");
  }
  read(j, "beta", c.beta, "");
  read(j, "beta_grid", c.beta_grid, "");
  read(j, "K", c.K, "");
  read(j, "M", c.M, "");
  read(j, "K_op", c.K_op, "");
  read(j, "tol", c.tol, "");
  read(j, "theta", c.theta, "");
  if (j.contains("chain")) {
    const json& h = j["chain"];
    detail::check_keys(h, {"N", "algorithm", "step_size", "n_steps", "burn_in", "thinning", "adapt", "n_chains",
                           "dump_configurations"},
                       "chain");
    read(h, "N", c.chain.N, "chain");
    read(h, "algorithm", c.chain.algorithm, "chain");
    read(h, "step_size", c.chain.step_size, "chain");
    read(h, "n_steps", c.chain.n_steps, "chain");
    read(h, "burn_in", c.chain.burn_in, "chain");
    read(h, "thinning", c.chain.thinning, "chain");
    read(h, "adapt", c.chain.adapt, "chain");
    read(h, "n_chains", c.chain.n_chains, "chain");
    read(h, "dump_configurations", c.chain.dump_configurations, "chain");
    if (c.chain.algorithm != "mh" && c.chain.algorithm != "mala" && c.chain.algorithm != "iid0")
      throw ConfigError("chain.algorithm must be mh, mala or iid0");
  }
  if (j.contains("psi")) c.psi = detail::read_series(j["psi"], "psi");
  if (j.contains("phi")) c.phi = detail::read_series(j["phi"], "phi");
  read(j, "weyl_j_min", c.weyl_j_min, "");
  read(j, "weyl_j_max", c.weyl_j_max, "");
  read(j, "r_grid", c.r_grid, "");
  read(j, "concentration_C", c.concentration_C, "");
  read(j, "n_configs", c.n_configs, "");
  read(j, "out", c.out, "");
  read(j, "seed", c.seed, "");
  read(j, "workers", c.workers, "");

  if (c.beta < 0.0) throw ConfigError("beta must be >= 0");
  for (double b : c.beta_grid)
    if (!(b > 0.0)) throw ConfigError("beta_grid entries must be > 0");
  if (c.K < 1 || c.M < 4 || c.K_op < 1) throw ConfigError("K, M and K_op must be positive");
  if (!(c.tol > 0.0)) throw ConfigError("tol must be > 0");
  if (!(c.theta > 0.0) || c.theta > 1.0) throw ConfigError("theta must lie in (0, 1]");
  if (c.chain.N < 1) throw ConfigError("chain.N must be >= 1");
  if (c.chain.n_steps < 1 || c.chain.burn_in < 0 || c.chain.thinning < 1)
    throw ConfigError("chain.n_steps >= 1, chain.burn_in >= 0 and chain.thinning >= 1 required");
  if (c.weyl_j_min < 1 || c.weyl_j_max <= c.weyl_j_min) throw ConfigError("need 1 <= weyl_j_min < weyl_j_max");
  return c;
}

/// Fully resolved configuration, defaults included.
inline json to_json(const ExperimentConfig& c) {
  return {
      {"potential",
       {{"preset", c.potential.preset}, {"a", c.potential.a}, {"b", c.potential.b},
        {"series", detail::series_json(c.potential.series)}}},
      {"beta", c.beta},
      {"beta_grid", c.beta_grid},
      {"K", c.K},
      {"M", c.M},
      {"K_op", c.K_op},
      {"tol", c.tol},
      {"theta", c.theta},
      {"chain",
       {{"N", c.chain.N}, {"algorithm", c.chain.algorithm}, {"step_size", c.chain.step_size},
        {"n_steps", c.chain.n_steps}, {"burn_in", c.chain.burn_in}, {"thinning", c.chain.thinning},
        {"adapt", c.chain.adapt}, {"n_chains", c.chain.n_chains},
        {"dump_configurations", c.chain.dump_configurations}}},
      {"psi", detail::series_json(c.psi)},
      {"phi", detail::series_json(c.phi)},
      {"weyl_j_min", c.weyl_j_min},
      {"weyl_j_max", c.weyl_j_max},
      {"r_grid", c.r_grid},
      {"concentration_C", c.concentration_C},
      {"n_configs", c.n_configs},
      {"out", c.out},
      {"seed", c.seed},
      {"workers", c.workers},
  };
}

/// 64-bit FNV-1a.
inline std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  return h;
}

/// Hash of the resolved configuration without "out" and "workers", which do
/// not affect results.
inline std::string config_hash(const ExperimentConfig& c) {
  json j = to_json(c);
  j.erase("out");
  j.erase("workers");
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(j.dump())));
  return buf;
}

}  // namespace htcg
