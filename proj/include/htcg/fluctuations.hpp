#pragma once

// Limiting variance σ_β^V(ψ)² = ⟨ψ, ℒ⁻¹ψ⟩_H of the linear statistics, and
// its interpolation between the β → 0 and β → ∞ regimes.

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Cholesky>

#include "htcg/equilibrium.hpp"
#include "htcg/parallel.hpp"
#include "htcg/spectral.hpp"

namespace htcg {

/// ψ − ∫ψ dμ.
inline TrigSeries centered(const TrigSeries& psi, const Density& rho) {
  return psi - TrigSeries::constant(integrate(psi, rho));
}

namespace detail {
// Basis coordinates of ψ and their H-duals Gc; constants drop out.
inline Eigen::VectorXd basis_vector(const TrigSeries& psi, const OperatorModel& model) {
  if (psi.effective_degree() > model.K_op)
    throw ResolutionError("variance: psi has modes above K_op");
  const std::vector<double> c = basis_coordinates(psi, model.K_op);
  return Eigen::Map<const Eigen::VectorXd>(c.data(), static_cast<Eigen::Index>(c.size()));
}
}  // namespace detail

struct EigenVariance {
  double sigma2 = 0.0;
  double tail = 0.0;  // contribution of the upper quarter of the spectrum
  int n_modes = 0;
  bool degenerate = false;  // ψ constant
};

/// Σ_j κ_j⁻¹ ⟨ψ, φ_j⟩_H².
inline EigenVariance variance_eigen_detail(const TrigSeries& psi, const EigenSystem& es, const OperatorModel& model) {
  const TrigSeries p = centered(psi, model.density);
  EigenVariance out;
  out.n_modes = es.size();
  if (p.effective_degree(1e-300) == 0) {
    out.degenerate = true;
    return out;
  }
  const Eigen::VectorXd b = model.G * detail::basis_vector(p, model);
  const Eigen::VectorXd proj = es.vectors.transpose() * b;
  const int tail_from = es.size() - es.size() / 4;
  for (int j = 0; j < es.size(); ++j) {
    const double t = proj(j) * proj(j) / es.kappas(j);
    out.sigma2 += t;
    if (j >= tail_from) out.tail += t;
  }
  return out;
}

inline double variance_eigen(const TrigSeries& psi, const EigenSystem& es, const OperatorModel& model) {
  return variance_eigen_detail(psi, es, model).sigma2;
}

/// ⟨ψ, u⟩_H with ℒu = ψ solved in the Galerkin space.
inline double variance_solve(const TrigSeries& psi, const OperatorModel& model) {
  const TrigSeries p = centered(psi, model.density);
  if (p.effective_degree(1e-300) == 0) return 0.0;
  const Eigen::VectorXd c = detail::basis_vector(p, model);
  const Eigen::VectorXd rhs = model.G * c;
  Eigen::LDLT<Eigen::MatrixXd> ldlt(model.Lmat);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) throw Error("variance_solve: singular Galerkin system");
  const Eigen::VectorXd u = ldlt.solve(rhs);
  return rhs.dot(u);
}

/// V = 0: 2 Σ_{k≥1} |ψ̂_k|² / (1 + β/k).
inline double closed_form_v0(const TrigSeries& psi, double beta) {
  double s = 0.0;
  for (int k = 1; k <= psi.max_mode(); ++k) s += std::norm(psi.coeff(k)) / (1.0 + beta / k);
  return 2.0 * s;
}

struct VarianceReport {
  TrigSeries psi;
  double beta = 0.0;
  double sigma2_eigen = 0.0;
  double sigma2_solve = 0.0;
  double tail_estimate = 0.0;
  int n_modes_used = 0;
  double route_gap = 0.0;
  bool degenerate = false;
};

inline VarianceReport variance_report(const TrigSeries& psi, const OperatorModel& model, const EigenSystem& es) {
  VarianceReport r;
  r.psi = psi;
  r.beta = model.beta;
  const EigenVariance ev = variance_eigen_detail(psi, es, model);
  r.sigma2_eigen = ev.sigma2;
  r.tail_estimate = ev.tail;
  r.n_modes_used = ev.n_modes;
  r.degenerate = ev.degenerate;
  r.sigma2_solve = variance_solve(psi, model);
  r.route_gap = ev.degenerate ? 0.0 : std::abs(r.sigma2_eigen - r.sigma2_solve) / r.sigma2_eigen;
  return r;
}

/// Limiting variance at (V, β) through the linear-solve route.
inline double limiting_variance(const TrigSeries& psi, const EquilibriumResult& eq, int K_op) {
  return variance_solve(psi, assemble(eq, K_op));
}

struct InterpolationRow {
  double beta = 0.0;
  double sigma2 = 0.0;
  double beta_sigma2 = 0.0;
  double l2_target = 0.0;      // ‖ψ − ∫ψ dμ_β^V‖²_{L²(μ_β^V)}
  double h_half_target = 0.0;  // ‖ψ‖²_{H^{1/2}}
  double beta_min_rho = 0.0;
};

struct InterpolationOptions {
  SolverOptions solver{};
  int K_op = 64;
  unsigned workers = 0;
};

/// Logarithmic grid of n points between lo and hi.
inline std::vector<double> log_grid(double lo, double hi, int n) {
  if (!(lo > 0.0) || !(hi > lo) || n < 2) throw DomainError("log_grid: need 0 < lo < hi and n >= 2");
  std::vector<double> g(n);
  for (int i = 0; i < n; ++i) g[i] = lo * std::pow(hi / lo, static_cast<double>(i) / (n - 1));
  return g;
}

inline std::vector<InterpolationRow> interpolation_check(const TrigSeries& psi, const PotentialSpec& V,
                                                         const std::vector<double>& beta_grid,
                                                         const InterpolationOptions& opt = {}) {
  for (std::size_t i = 1; i < beta_grid.size(); ++i)
    if (!(beta_grid[i] > beta_grid[i - 1])) throw DomainError("interpolation_check: beta grid must be ascending");
  const double hh = h_half_norm_sq(psi);
  return parallel_map(
      beta_grid.size(),
      [&](std::size_t i) {
        const double b = beta_grid[i];
        const EquilibriumResult eq = solve_equilibrium(V, b, opt.solver);
        InterpolationRow row;
        row.beta = b;
        row.sigma2 = limiting_variance(psi, eq, opt.K_op);
        row.beta_sigma2 = b * row.sigma2;
        row.l2_target = centered_l2_norm_sq(psi, eq.density);
        row.h_half_target = hh;
        row.beta_min_rho = b * eq.density.delta_est;
        return row;
      },
      opt.workers);
}

struct EndpointVerdict {
  double low_beta = 0.0, low_gap = 0.0, low_target = 0.0;
  double high_beta = 0.0, high_gap = 0.0, high_witness = 0.0;
  bool high_abstained = false;
  bool low_pass = false, high_pass = false;
};

/// Compares the first row against ‖ψ − ∫ψdμ_0^V‖²_{L²(μ_0^V)} and the last
/// (β·σ²) against ‖ψ‖²_{H^{1/2}}; abstains at the top when β·min ρ < witness_min.
inline EndpointVerdict interpolation_endpoints(const std::vector<InterpolationRow>& rows, const TrigSeries& psi,
                                               const PotentialSpec& V, double low_tol = 0.01, double high_tol = 0.05,
                                               double witness_min = 100.0, int K = 256, std::size_t M = 1024) {
  if (rows.empty()) throw DomainError("interpolation_endpoints: empty table");
  EndpointVerdict v;
  const Density mu0 = V.reference_density(K, M);
  v.low_beta = rows.front().beta;
  v.low_target = centered_l2_norm_sq(psi, mu0);
  v.low_gap = std::abs(rows.front().sigma2 - v.low_target) / v.low_target;
  v.low_pass = v.low_gap <= low_tol;
  const auto& top = rows.back();
  v.high_beta = top.beta;
  v.high_witness = top.beta_min_rho;
  v.high_gap = std::abs(top.beta_sigma2 - top.h_half_target) / top.h_half_target;
  v.high_abstained = top.beta_min_rho < witness_min;
  v.high_pass = v.high_abstained || v.high_gap <= high_tol;
  return v;
}

}  // namespace htcg
