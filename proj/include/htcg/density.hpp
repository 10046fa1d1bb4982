#pragma once

// Probability densities on the torus in the ρ-convention: ρ = 2π × (density
// w.r.t. dx), so the uniform law is ρ ≡ 1 and ∫ρ dx/2π = 1.

#include <cmath>
#include <cstddef>

#include "htcg/torus.hpp"

namespace htcg {

struct Density {
  GridFn grid;      // ρ(x_m), consistent with `series` (synthesized from it)
  TrigSeries series;
  double beta = 0.0;
  double delta_est = 0.0;  // ≤ min ρ

  std::size_t grid_size() const { return grid.size(); }
  int max_mode() const { return series.max_mode(); }

  /// Normalizes `rho` to unit mass and samples it on M points.
  static Density from_series(TrigSeries rho, std::size_t M, double beta = 0.0) {
    const double mass = rho.mean();
    if (!(mass > 0.0)) throw DomainError("Density: non-positive mass");
    rho *= 1.0 / mass;
    GridFn g = to_grid(rho, M);
    const double lo = std::min(g.min(), to_grid(rho, 4 * M).min());
    if (!(lo > 0.0)) throw DomainError("Density: rho must be positive everywhere");
    return Density{std::move(g), std::move(rho), beta, lo};
  }

  /// Band-limits grid samples to K modes, then normalizes.
  static Density from_grid(const GridFn& g, int K, double beta = 0.0) {
    return from_series(to_series(g, K), g.size(), beta);
  }

  static Density uniform(int K, std::size_t M) { return from_series(TrigSeries::constant(1.0).truncated(K), M); }
};

/// ∫ ψ dμ = ∫ ψ ρ dx/2π, exact on band-limited data.
inline double integrate(const TrigSeries& psi, const Density& rho) { return l2_inner(psi, rho.series); }

/// ∫ ψ² ρ dx/2π by trapezoid quadrature on ρ's grid; throws when the grid is
/// too coarse for ψ²ρ (M < 2·deg(ψ²ρ)).
inline double weighted_l2_norm_sq(const TrigSeries& psi, const Density& rho) {
  const std::size_t M = rho.grid.size();
  const std::size_t deg = 2 * static_cast<std::size_t>(psi.effective_degree()) +
                          static_cast<std::size_t>(rho.series.effective_degree());
  if (M < 2 * deg) throw ResolutionError("weighted_l2_norm_sq: grid aliases psi^2 rho");
  const GridFn p = to_grid(psi, M);
  double s = 0.0;
  for (std::size_t m = 0; m < M; ++m) s += p[m] * p[m] * rho.grid[m];
  return s / static_cast<double>(M);
}

/// ‖ψ − ∫ψ dμ‖²_{L²(μ)}.
inline double centered_l2_norm_sq(const TrigSeries& psi, const Density& rho) {
  const double m = integrate(psi, rho);
  return weighted_l2_norm_sq(psi - TrigSeries::constant(m), rho);
}

}  // namespace htcg
