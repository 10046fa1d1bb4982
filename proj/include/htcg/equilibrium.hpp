#pragma once

// Free-energy functional F(μ) = β E(μ) + H(μ | μ_0^V) and its minimizer μ_β^V.
//
// The minimizer is the fixed point ρ ∝ exp(−V − 2βU^ρ) of the Euler–Lagrange
// equation 2βU + V + log ρ = C'. It is reached by a geometrically damped
// (mirror-descent) iteration
//     ρ_{t+1} ∝ ρ_t^{1−θ} · exp(−V − 2βU^{ρ_t})^θ,
// optionally preconditioned mode by mode. The step keeps ρ positive; θ is
// halved whenever F increases, and large β is reached by continuation from β/2.

#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "htcg/density.hpp"
#include "htcg/torus.hpp"
#include "htcg/transport.hpp"

namespace htcg {

enum class Smoothness { c11, c31, analytic };

/// External potential V; the additive constant is free and fixed by
/// normalized(), which makes ∫ e^{−V} dx/2π = 1.
struct PotentialSpec {
  TrigSeries V;
  std::string name = "series";
  Smoothness smoothness = Smoothness::analytic;

  static PotentialSpec zero() { return {TrigSeries::constant(0.0), "zero", Smoothness::analytic}; }
  /// a·cos x + b·cos 2x
  static PotentialSpec cosine(double a, double b = 0.0) {
    return {TrigSeries::cosine(1, a) + TrigSeries::cosine(2, b), "cosine", Smoothness::analytic};
  }
  static PotentialSpec from_series(TrigSeries v) { return {std::move(v), "series", Smoothness::analytic}; }

  bool is_zero() const { return V.effective_degree() == 0; }

  /// log ∫ e^{−V} dx/2π by spectrally accurate trapezoid quadrature.
  double log_partition() const {
    const std::size_t M = next_pow2(std::max<std::size_t>(1024, 32 * (V.max_mode() + 1)));
    const GridFn g = to_grid(V, M);
    double vmin = g.min(), s = 0.0;
    for (double v : g.values()) s += std::exp(-(v - vmin));
    return std::log(s / static_cast<double>(M)) - vmin;
  }

  PotentialSpec normalized() const {
    PotentialSpec p = *this;
    p.V += TrigSeries::constant(log_partition());
    return p;
  }

  /// Density of μ_0^V (ρ-convention) band-limited to K modes.
  Density reference_density(int K, std::size_t M) const {
    const PotentialSpec n = normalized();
    const std::size_t Mf = std::max(M, next_pow2(4 * static_cast<std::size_t>(K) + 4));
    const GridFn g = to_grid(n.V.truncated(std::min(n.V.max_mode(), static_cast<int>(Mf / 2 - 1))), Mf)
                         .map([](double v) { return std::exp(-v); });
    return Density::from_series(to_series(g, K), M, 0.0);
  }
};

struct SolverOptions {
  double tol = 1e-10;
  int K = 256;
  std::size_t M = 1024;
  double theta = 0.5;
  int max_iterations = 2'000'000;
  double continuation_beta = 50.0;
  double positivity_floor = 1e-12;
  // Divide mode k of the log-step by 1 + β/k, the linearized stiffness at the
  // uniform law. Off: the plain geometric step, which needs θ ≲ 2/(1+β).
  bool preconditioned = true;
  // Called after every accepted step with (iteration, F, residual).
  std::function<void(int, double, double)> on_accept;
};

struct EquilibriumResult {
  Density density;
  TrigSeries U;
  double C_prime = 0.0;  // EL constant in ρ-convention: C_β^V + log 2π
  double residual_sup = 0.0;
  int iterations = 0;
  double beta = 0.0;
  double theta = 0.0;  // damping in force at exit
  PotentialSpec potential;  // normalized

  double free_energy_value = 0.0;
  const TrigSeries& rho() const { return density.series; }
  /// C_β^V for the density w.r.t. dx.
  double C_beta() const { return C_prime - std::log(kTwoPi); }
};

namespace detail {

// Relative tolerance on free-energy increases: F carries β·log 2 and its
// evaluation noise grows with β.
inline constexpr double kDescentSlack = 1e-12;

inline GridFn potential_on_grid(const PotentialSpec& V, std::size_t M) {
  if (2 * static_cast<std::size_t>(V.V.max_mode()) + 2 > M) throw ResolutionError("potential exceeds grid band limit");
  return to_grid(V.V, M);
}

// ∫(Vρ + ρ log ρ) dx/2π on the grid.
inline double entropy_part(const GridFn& rho, const GridFn& V) {
  double s = 0.0;
  for (std::size_t m = 0; m < rho.size(); ++m) {
    if (!(rho[m] > 0.0)) throw DomainError("free_energy: rho must be positive");
    s += rho[m] * (V[m] + std::log(rho[m]));
  }
  return s / static_cast<double>(rho.size());
}

inline double energy_from_series(const TrigSeries& rho) {
  double s = 0.0;
  for (int k = 1; k <= rho.max_mode(); ++k) s += std::norm(rho.coeff(k)) / k;
  return std::log(2.0) * rho.mean() * rho.mean() + s;
}

}  // namespace detail

/// Logarithmic energy E(μ) = log 2 + Σ_{k≥1} |ρ̂_k|²/k.
inline double log_energy(const Density& rho) { return detail::energy_from_series(rho.series); }

/// E(μ − ν) = Σ_{k≥1} |ρ̂_k − τ̂_k|²/k.
inline double log_energy_difference(const Density& rho, const Density& tau) {
  return detail::energy_from_series(rho.series - tau.series) - std::log(2.0) * std::pow(rho.series.mean() - tau.series.mean(), 2);
}

/// F_β^V(μ) = β E(μ) + ∫(Vρ + ρ log ρ) dx/2π with V normalized.
inline double free_energy(const Density& rho, const PotentialSpec& V, double beta) {
  const GridFn v = detail::potential_on_grid(V.normalized(), rho.grid.size());
  return beta * log_energy(rho) + detail::entropy_part(rho.grid, v);
}

/// β E(μ − μ_β^V) + H(μ | μ_β^V); equals F(μ) − F(μ_β^V) at the minimizer.
inline double energy_gap(const Density& rho, const EquilibriumResult& eq, double beta) {
  const std::size_t M = rho.grid.size();
  const GridFn tau = (eq.density.grid.size() == M) ? eq.density.grid : to_grid(eq.density.series, M);
  double h = 0.0;
  for (std::size_t m = 0; m < M; ++m) {
    if (!(rho.grid[m] > 0.0) || !(tau[m] > 0.0)) throw DomainError("energy_gap: densities must be positive");
    h += rho.grid[m] * std::log(rho.grid[m] / tau[m]);
  }
  return beta * log_energy_difference(rho, eq.density) + h / static_cast<double>(M);
}

/// Minimizes F_β^V. Throws ConvergenceError (with last residual) or
/// ResolutionError (density below the positivity floor).
inline EquilibriumResult solve_equilibrium(const PotentialSpec& potential, double beta, const SolverOptions& opt = {},
                                           const EquilibriumResult* warm_start = nullptr) {
  if (!(beta >= 0.0)) throw DomainError("solve_equilibrium: beta must be >= 0");
  if (!(opt.tol > 0.0)) throw DomainError("solve_equilibrium: tol must be > 0");
  const std::size_t M = opt.M;
  const int K = opt.K;
  if (2 * static_cast<std::size_t>(K) + 2 > M) throw ResolutionError("solve_equilibrium: need K <= M/2 - 1");

  std::optional<EquilibriumResult> coarse;
  if (!warm_start && beta > opt.continuation_beta) {
    coarse = solve_equilibrium(potential, beta / 2.0, opt);
    warm_start = &*coarse;
  }

  const PotentialSpec Vn = potential.normalized();
  const GridFn Vg = detail::potential_on_grid(Vn, M);

  Density rho = warm_start ? Density::from_series(warm_start->density.series.truncated(K), M, beta)
                           : Vn.reference_density(K, M);
  double theta = warm_start ? std::min(opt.theta, warm_start->theta) : opt.theta;

  // `field` is V + 2β(U − Û_0): the constant 2βÛ_0 = 2β log 2 is carried
  // separately so it does not limit the precision of the residual.
  auto evaluate = [&](const Density& r, GridFn& log_rho, GridFn& field) {
    TrigSeries U = log_potential(r.series);
    TrigSeries Unc = U;
    Unc.set(0, 0.0);
    log_rho = r.grid.map([](double x) { return std::log(x); });
    field = Vg + (2.0 * beta) * to_grid(Unc, M);
    return U;
  };
  auto residual_of = [&](const GridFn& log_rho, const GridFn& field, double& mean_out) {
    const GridFn el = field + log_rho;
    mean_out = el.mean();
    double r = 0.0;
    for (double v : el.values()) r = std::max(r, std::abs(v - mean_out));
    return r;
  };
  auto F_of = [&](const Density& r) { return beta * log_energy(r) + detail::entropy_part(r.grid, Vg); };

  GridFn log_rho(M, 0.0), field(M, 0.0);
  TrigSeries U = evaluate(rho, log_rho, field);
  double C = 0.0;
  double residual = residual_of(log_rho, field, C);
  double F = F_of(rho);

  int it = 0;
  while (residual > opt.tol) {
    if (it >= opt.max_iterations)
      throw ConvergenceError("solve_equilibrium: no convergence within max_iterations", residual, it);
    ++it;
    GridFn next(M, 0.0);
    if (opt.preconditioned) {
      TrigSeries step = to_series(field + log_rho, K);
      step.set(0, 0.0);
      for (int k = 1; k <= K; ++k) step.set(k, step.coeff(k) / (1.0 + beta / k));
      next = log_rho - theta * to_grid(step, M);
    } else {
      const double c = field.mean();
      next = (1.0 - theta) * log_rho - theta * field.map([c](double v) { return v - c; });
    }
    const double top = next.max();
    for (auto& v : next.mutable_values()) v = std::exp(v - top);
    TrigSeries s = to_series(next, K);
    s *= 1.0 / s.mean();
    GridFn g = to_grid(s, M);
    // A step whose band-limited projection dips below the floor is rejected
    // like an ascent step; persistent failure means under-resolution.
    const bool floor_hit = g.min() < opt.positivity_floor;
    Density cand{std::move(g), std::move(s), beta, 0.0};
    if (floor_hit || F_of(cand) > F + detail::kDescentSlack * (1.0 + std::abs(F))) {
      theta *= 0.5;
      if (theta < 1e-12) {
        if (floor_hit)
          throw ResolutionError("solve_equilibrium: density hit the positivity floor (under-resolved or invalid V)");
        throw ConvergenceError("solve_equilibrium: damping underflow", residual, it);
      }
      continue;
    }
    const double Fc = F_of(cand);
    rho = std::move(cand);
    F = Fc;
    U = evaluate(rho, log_rho, field);
    residual = residual_of(log_rho, field, C);
    if (opt.on_accept) opt.on_accept(it, F, residual);
  }

  rho.beta = beta;
  rho.delta_est = std::min(rho.grid.min(), to_grid(rho.series, 4 * M).min());
  C += 2.0 * beta * U.mean();
  EquilibriumResult out{std::move(rho), std::move(U), C, residual, it, beta, theta, Vn, F};
  return out;
}

struct LimitRow {
  double beta;
  double w1_to_reference;  // W1(μ_β^V, μ_0^V)
  double w1_to_uniform;    // W1(μ_β^V, dx/2π)
};

/// W1 distances of μ_β^V to both limits along an ascending β grid.
inline std::vector<LimitRow> limit_diagnostics(const PotentialSpec& V, const std::vector<double>& beta_grid,
                                               const SolverOptions& opt = {}) {
  for (std::size_t i = 1; i < beta_grid.size(); ++i)
    if (!(beta_grid[i] > beta_grid[i - 1])) throw DomainError("limit_diagnostics: beta grid must be ascending");
  const Density ref = V.reference_density(opt.K, opt.M);
  const Density uni = Density::uniform(opt.K, opt.M);
  const auto ref_m = CircleMeasure::from_density(ref);
  const auto uni_m = CircleMeasure::from_density(uni);
  std::vector<LimitRow> rows;
  std::optional<EquilibriumResult> prev;
  for (double b : beta_grid) {
    EquilibriumResult eq = solve_equilibrium(V, b, opt, prev && b > opt.continuation_beta ? &*prev : nullptr);
    const auto m = CircleMeasure::from_density(eq.density);
    rows.push_back({b, w1_circle(m, ref_m).w1_arc, w1_circle(m, uni_m).w1_arc});
    prev = std::move(eq);
  }
  return rows;
}

}  // namespace htcg
