// htcg: command-line experiments for the high-temperature circular ensemble.
// Exit codes: 0 all checks pass, 1 a check failed, 2 bad configuration,
// 3 numerical failure.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "htcg/htcg.hpp"

namespace fs = std::filesystem;
using namespace htcg;

namespace {

struct Outcome {
  bool pass = true;
  std::vector<std::string> warnings;

  void check(bool ok, const std::string& what) {
    std::printf("%s  %s\n", ok ? "ok  " : "FAIL", what.c_str());
    pass = pass && ok;
  }
};

struct Context {
  ExperimentConfig cfg;
  std::string command;
  fs::path out;
  unsigned workers = 0;

  Metadata meta() const { return {command, config_hash(cfg), cfg.seed, {}}; }
  fs::path file(const std::string& name) const { return out / name; }
};

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

EquilibriumResult solve(const Context& c) { return solve_equilibrium(c.cfg.potential.build(), c.cfg.beta, c.cfg.solver()); }

Outcome cmd_equilibrium(const Context& c) {
  Outcome o;
  const EquilibriumResult eq = solve(c);
  write_json(c.file("equilibrium.json"), to_json(eq), c.meta());
  CsvWriter csv(c.file("density.csv"), {"x", "rho"}, c.meta());
  for (std::size_t m = 0; m < eq.density.grid.size(); ++m) csv.row({eq.density.grid.node(m), eq.density.grid[m]});
  std::printf("beta %.6g  iterations %d  residual %.3e  C_beta %.15g  min rho %.6g  max rho %.6g\n", eq.beta,
              eq.iterations, eq.residual_sup, eq.C_beta(), eq.density.grid.min(), eq.density.grid.max());
  o.check(eq.residual_sup <= c.cfg.tol, "Euler-Lagrange residual " + fmt("%.3e", eq.residual_sup));
  if (eq.potential.is_zero()) {
    double dev = 0.0;
    for (double v : eq.density.grid.values()) dev = std::max(dev, std::abs(v - 1.0));
    o.check(dev <= 1e-12, "uniform density, sup|rho - 1| = " + fmt("%.3e", dev));
  }
  return o;
}

Outcome cmd_spectrum(const Context& c) {
  Outcome o;
  const EquilibriumResult eq = solve(c);
  const OperatorModel model = assemble(eq, c.cfg.K_op);
  const EigenSystem es = eigensystem(model);
  const EigenSystem ea = eigensystem_A(model);
  nlohmann::json body = to_json(es);
  const int jmax = std::min(c.cfg.weyl_j_max, es.size());
  if (c.cfg.weyl_j_min < jmax) {
    const WeylFit w = weyl_fit(es, c.cfg.weyl_j_min, jmax);
    body["weyl"] = to_json(w);
    std::printf("Weyl fit over j in [%d, %d]: alpha_hat %.6f  spread %.4f\n", w.j_min, w.j_max, w.alpha_hat,
                w.ratio_spread);
  }
  write_json(c.file("spectrum.json"), body, c.meta());
  CsvWriter csv(c.file("kappas.csv"), {"j", "kappa", "lambda_A"}, c.meta());
  bool interlace = true;
  for (int j = 1; j <= es.size(); ++j) {
    csv.row({static_cast<double>(j), es.kappa(j), ea.kappa(j)});
    interlace = interlace && es.kappa(j) >= ea.kappa(j) * (1.0 - 1e-10);
  }
  for (int j = 1; j <= std::min(6, es.size()); ++j) std::printf("kappa_%d = %.12g\n", j, es.kappa(j));
  o.check(es.ortho_residual <= 1e-8, "G-orthonormality residual " + fmt("%.3e", es.ortho_residual));
  o.check(interlace, "kappa_j >= lambda_j for all j");
  if (eq.potential.is_zero()) {
    double worst = 0.0;
    const int n = std::min(40, es.size());
    for (int j = 1; j <= n; ++j) {
      const double k = weyl_frequency(j);
      const double exact = k * k + c.cfg.beta * k;
      worst = std::max(worst, std::abs(es.kappa(j) - exact) / exact);
    }
    o.check(worst <= 1e-9, "V = 0 eigenvalues k^2 + beta k, max rel error " + fmt("%.3e", worst));
  }
  return o;
}

Outcome cmd_variance(const Context& c) {
  Outcome o;
  const EquilibriumResult eq = solve(c);
  const OperatorModel model = assemble(eq, c.cfg.K_op);
  const EigenSystem es = eigensystem(model);
  const TrigSeries psi = c.cfg.psi.build();
  const VarianceReport r = variance_report(psi, model, es);
  nlohmann::json body{{"beta", r.beta},           {"sigma2_eigen", r.sigma2_eigen}, {"sigma2_solve", r.sigma2_solve},
                      {"tail_estimate", r.tail_estimate}, {"n_modes_used", r.n_modes_used}, {"route_gap", r.route_gap}};
  std::printf("eigen route   %.15g\nsolve route   %.15g\n", r.sigma2_eigen, r.sigma2_solve);
  o.check(r.route_gap <= 1e-8, "route agreement " + fmt("%.3e", r.route_gap));
  if (eq.potential.is_zero()) {
    const double cf = closed_form_v0(psi, c.cfg.beta);
    body["sigma2_closed_form"] = cf;
    std::printf("closed form   %.15g\n", cf);
    const double gap = cf > 0.0 ? std::abs(r.sigma2_solve - cf) / cf : std::abs(r.sigma2_solve);
    o.check(gap <= 1e-8, "closed-form agreement " + fmt("%.3e", gap));
  }
  write_json(c.file("variance.json"), body, c.meta());
  return o;
}

Outcome cmd_interpolate(const Context& c) {
  Outcome o;
  const std::vector<double> grid = c.cfg.beta_grid.empty() ? log_grid(1e-3, 1e3, 13) : c.cfg.beta_grid;
  InterpolationOptions io;
  io.solver = c.cfg.solver();
  io.K_op = c.cfg.K_op;
  io.workers = c.workers;
  const TrigSeries psi = c.cfg.psi.build();
  const PotentialSpec V = c.cfg.potential.build();
  const auto rows = interpolation_check(psi, V, grid, io);
  CsvWriter csv(c.file("interpolation.csv"), {"beta", "sigma2", "beta_sigma2", "l2_target", "h_half_target", "beta_min_rho"},
                c.meta());
  std::printf("%12s %14s %14s %14s %12s\n", "beta", "sigma2", "beta*sigma2", "l2_target", "beta*min_rho");
  for (const auto& r : rows) {
    csv.row({r.beta, r.sigma2, r.beta_sigma2, r.l2_target, r.h_half_target, r.beta_min_rho});
    std::printf("%12.5g %14.8g %14.8g %14.8g %12.5g\n", r.beta, r.sigma2, r.beta_sigma2, r.l2_target, r.beta_min_rho);
  }
  const EndpointVerdict v = interpolation_endpoints(rows, psi, V, 0.01, 0.05, 100.0, c.cfg.K, c.cfg.M);
  o.check(v.low_pass, "low-beta endpoint gap " + fmt("%.3e", v.low_gap));
  if (v.high_abstained) {
    std::printf("abstain  high-beta endpoint: witness beta*min rho = %.4g < 100\n", v.high_witness);
    o.warnings.push_back("high-beta endpoint abstained");
  } else {
    o.check(v.high_pass, "high-beta endpoint gap " + fmt("%.3e", v.high_gap));
  }
  return o;
}

struct ChainBatch {
  StatSeries series;
  std::vector<Configuration> finals;
};

template <class Stat>
ChainBatch run_batch(const Context& c, const ChainSpec& spec, Stat&& stat, const std::string& name) {
  struct One {
    double value, acceptance;
    Configuration x;
    std::vector<std::string> warnings;
  };
  const bool keep = c.cfg.chain.dump_configurations;
  const auto parts = parallel_map(
      c.cfg.chain.n_chains,
      [&](std::size_t i) {
        ChainResult r = run_chain(spec, i, false);
        const double v = stat(r.final_state);
        return One{v, r.acceptance, keep ? std::move(r.final_state) : Configuration{}, std::move(r.warnings)};
      },
      c.workers);
  ChainBatch b;
  b.series.name = name;
  b.series.N = spec.N;
  b.series.beta = spec.beta;
  b.series.seed_base = spec.seed;
  double acc = 0.0;
  for (const auto& p : parts) {
    b.series.values.push_back(p.value);
    acc += p.acceptance;
    for (const auto& w : p.warnings) b.series.warnings.push_back(w);
    if (keep) b.finals.push_back(p.x);
  }
  b.series.mean_acceptance = parts.empty() ? 0.0 : acc / static_cast<double>(parts.size());
  return b;
}

void save_batch(const Context& c, const ChainBatch& b, Outcome& o) {
  write_json(c.file("statseries.json"), to_json(b.series), c.meta());
  if (c.cfg.chain.dump_configurations) dump_configurations(c.file("configurations.bin"), b.finals);
  if (!b.series.warnings.empty()) {
    o.warnings.push_back(std::to_string(b.series.warnings.size()) + " chain warnings, first: " + b.series.warnings.front());
  }
}

Outcome cmd_sample(const Context& c) {
  Outcome o;
  const ChainSpec spec = c.cfg.chain_spec();
  const EquilibriumResult eq = solve(c);
  const TrigSeries psi = c.cfg.psi.build();
  const ChainBatch b = run_batch(c, spec, [&](const Configuration& x) { return nu_N(x, psi, eq); }, "nu_N(psi)");
  save_batch(c, b, o);
  const Summary s = b.series.summary();
  std::printf("chains %zu  mean %.6g  variance %.6g  acceptance %.3f\n", s.n, s.mean, s.variance,
              b.series.mean_acceptance);
  return o;
}

Outcome cmd_clt(const Context& c) {
  Outcome o;
  const ChainSpec spec = c.cfg.chain_spec();
  const EquilibriumResult eq = solve(c);
  const TrigSeries psi = c.cfg.psi.build();
  const double target = c.cfg.beta == 0.0 ? centered_l2_norm_sq(psi, eq.density) : limiting_variance(psi, eq, c.cfg.K_op);
  const ChainBatch b = run_batch(c, spec, [&](const Configuration& x) { return nu_N(x, psi, eq); }, "nu_N(psi)");
  save_batch(c, b, o);
  const Summary s = b.series.summary();
  const double band = std::max(3.0 * s.variance_se, 0.02);
  write_json(c.file("clt.json"),
             {{"target_variance", target}, {"summary", to_json(s)}, {"variance_band", band},
              {"mean_acceptance", b.series.mean_acceptance}},
             c.meta());
  std::printf("target %.8g  sample variance %.8g (se %.3g)  mean %.4g (se %.3g)  AD p %.3f\n", target, s.variance,
              s.variance_se, s.mean, s.std_error, s.normality_p);
  o.check(std::abs(s.variance - target) <= band, "variance within max(3 SE, 0.02)");
  o.check(s.normality_p > 0.01, "Anderson-Darling p > 0.01");
  o.check(std::abs(s.mean) <= 3.0 * s.std_error, "mean within 3 SE of 0");
  return o;
}

Outcome cmd_concentration(const Context& c) {
  Outcome o;
  const ChainSpec spec = c.cfg.chain_spec();
  const EquilibriumResult eq = solve(c);
  const ConcentrationReport rep = concentration_experiment(spec, eq, c.cfg.r_grid, c.cfg.chain.n_chains,
                                                           c.cfg.concentration_C, c.workers);
  Metadata m = c.meta();
  m.extra.push_back({"C", fmt("%.10g", rep.C)});
  CsvWriter csv(c.file("concentration.csv"), {"r", "empirical_freq", "bound", "vacuous_flag"}, m);
  std::printf("C = %.6g\n", rep.C);
  for (const auto& r : rep.rows) {
    csv.row({r.r, r.empirical_freq, r.bound, r.vacuous ? 1.0 : 0.0});
    std::printf("r %.3f  freq %.5f  bound %.4g%s\n", r.r, r.empirical_freq, r.bound, r.vacuous ? "  (vacuous)" : "");
    o.check(r.holds(), "tail bound at r = " + fmt("%.3f", r.r));
  }
  write_json(c.file("statseries.json"), to_json(rep.w1), m);
  if (!rep.w1.warnings.empty()) o.warnings.push_back(std::to_string(rep.w1.warnings.size()) + " chain warnings");
  return o;
}

Outcome cmd_generator(const Context& c) {
  Outcome o;
  const EquilibriumResult eq = solve(c);
  const TrigSeries phi = c.cfg.phi.build();
  const GeneratorCheck check(phi, eq);
  const double limit = eq.potential.is_zero() ? 1e-10 : 1e-7;
  CsvWriter csv(c.file("generator.csv"), {"config", "lhs", "rhs", "gap"}, c.meta());
  double worst = 0.0;
  for (std::size_t i = 0; i < c.cfg.n_configs; ++i) {
    Rng rng(c.cfg.seed, i);
    Configuration x;
    x.angles.resize(c.cfg.chain.N);
    for (auto& a : x.angles) a = rng.angle();
    const GeneratorGap g = check(x);
    csv.row({static_cast<double>(i), g.lhs, g.rhs, g.gap});
    worst = std::max(worst, g.gap);
  }
  std::printf("configurations %zu  N %d  max relative gap %.3e\n", c.cfg.n_configs, c.cfg.chain.N, worst);
  o.check(worst <= limit, "max gap <= " + fmt("%.0e", limit));
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"htcg: equilibrium, spectrum, fluctuations and Gibbs sampling for the high-temperature circular ensemble"};
  app.require_subcommand(1);
  std::string config_path, out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> workers;
  bool strict = false;
  app.add_option("--config", config_path, "JSON configuration file");
  app.add_option("--out", out_dir, "output directory (overrides config 'out')");
  app.add_option("--seed", seed, "base seed (overrides config 'seed')");
  app.add_option("--workers", workers, "worker threads (default HTCG_WORKERS, then logical cores)");
  app.add_flag("--strict", strict, "treat warnings as failures");
  app.fallthrough();

  struct Cmd {
    const char* name;
    const char* help;
    Outcome (*run)(const Context&);
  };
  const std::vector<Cmd> cmds{
      {"equilibrium", "solve for the equilibrium density", cmd_equilibrium},
      {"spectrum", "generalized eigensystem and Weyl fit", cmd_spectrum},
      {"variance", "limiting variance by eigen and solve routes", cmd_variance},
      {"interpolate", "variance across a beta sweep", cmd_interpolate},
      {"sample", "independent chains and nu_N(psi)", cmd_sample},
      {"clt", "Monte-Carlo variance and normality check", cmd_clt},
      {"concentration", "W1 tail table against the concentration bound", cmd_concentration},
      {"generator-check", "generator identity on random configurations", cmd_generator},
  };
  for (const auto& c : cmds) app.add_subcommand(c.name, c.help)->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  Context ctx;
  try {
    nlohmann::json j = nlohmann::json::object();
    if (!config_path.empty()) {
      std::ifstream f(config_path);
      if (!f) throw ConfigError("cannot read config " + config_path);
      try {
        j = nlohmann::json::parse(f);
      } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
      }
    }
    ctx.cfg = parse_config(j);
    if (seed) ctx.cfg.seed = *seed;
    if (!out_dir.empty()) ctx.cfg.out = out_dir;
    if (workers) ctx.cfg.workers = *workers;
    ctx.cfg.chain_spec().validate();
  } catch (const Error& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  }
  ctx.out = ctx.cfg.out;
  ctx.workers = ctx.cfg.workers ? ctx.cfg.workers : default_workers();

  const Cmd* chosen = nullptr;
  for (const auto& c : cmds)
    if (app.got_subcommand(c.name)) chosen = &c;
  ctx.command = chosen->name;

  try {
    fs::create_directories(ctx.out);
    write_json(ctx.file("config.resolved.json"), to_json(ctx.cfg), ctx.meta());
    const Outcome o = chosen->run(ctx);
    for (const auto& w : o.warnings) std::printf("warning  %s\n", w.c_str());
    if (!o.pass) return 1;
    if (strict && !o.warnings.empty()) {
      std::printf("FAIL  warnings present under --strict\n");
      return 1;
    }
    return 0;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const ConvergenceError& e) {
    std::fprintf(stderr, "numerical failure: %s (residual %.3e after %d iterations)\n", e.what(), e.last_residual(),
                 e.iterations());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return 3;
  }
}
