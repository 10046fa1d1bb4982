#pragma once

// The operator ℒ = 𝒜 + 2πβ𝒲 linearizing the Gibbs dynamics around μ_β^V,
// in the ρ-convention:
//     ℒφ = −φ″ − βH(ρφ′) − (log ρ)′φ′,   𝒜φ = −(ρφ′)′/ρ,   2π𝒲φ = −H(ρφ′).
// Discretized by Galerkin in the H inner product ⟨φ, ψ⟩_H = ∫φ′ψ′ρ dx/2π on
// the real basis {cos kx, sin kx}_{1≤k≤K_op}. With g = ρe_a′, h = ρe_b′:
//     G_ab = ∫ e_a′e_b′ρ,   A_ab = ∫ g′h′/ρ,   W_ab = Σ_k |k| ĝ_k conj(ĥ_k),
// and Lmat = A + βW.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "htcg/density.hpp"
#include "htcg/equilibrium.hpp"
#include "htcg/torus.hpp"

namespace htcg {

namespace detail {

// Grid fine enough that products of ρ with degree-K functions are exact.
inline std::size_t product_grid(int K_phi, int K_rho) {
  return next_pow2(4 * static_cast<std::size_t>(K_phi + K_rho) + 4);
}

inline int output_band(const EquilibriumResult& eq, int K_out) { return K_out > 0 ? K_out : eq.density.max_mode(); }

}  // namespace detail

/// ℒφ truncated to K_out modes (default: the equilibrium band).
inline TrigSeries apply_L(const TrigSeries& phi, const EquilibriumResult& eq, int K_out = 0) {
  const TrigSeries& rho = eq.density.series;
  const double beta = eq.beta;
  const int K = detail::output_band(eq, K_out);
  const TrigSeries dphi = derivative(phi);
  const std::size_t M = detail::product_grid(phi.max_mode(), rho.max_mode());
  const GridFn r = to_grid(rho, M), dr = to_grid(derivative(rho), M), dp = to_grid(dphi, M);
  GridFn drift(M, 0.0);
  for (std::size_t m = 0; m < M; ++m) drift[m] = dr[m] / r[m] * dp[m];
  const TrigSeries rp = to_series(r * dp, std::min<int>(static_cast<int>(M / 2 - 1), phi.max_mode() + rho.max_mode()));
  TrigSeries out = (-1.0) * derivative(phi, 2) - beta * hilbert_transform(rp) - to_series(drift, std::min<int>(K, static_cast<int>(M / 2 - 1)));
  return out.truncated(K);
}

/// 𝒜φ = −φ″ − (log ρ)′φ′.
inline TrigSeries apply_A(const TrigSeries& phi, const EquilibriumResult& eq, int K_out = 0) {
  const TrigSeries& rho = eq.density.series;
  const int K = detail::output_band(eq, K_out);
  const std::size_t M = detail::product_grid(phi.max_mode(), rho.max_mode());
  const GridFn r = to_grid(rho, M), dr = to_grid(derivative(rho), M), dp = to_grid(derivative(phi), M);
  GridFn drift(M, 0.0);
  for (std::size_t m = 0; m < M; ++m) drift[m] = dr[m] / r[m] * dp[m];
  TrigSeries out = (-1.0) * derivative(phi, 2) - to_series(drift, std::min<int>(K, static_cast<int>(M / 2 - 1)));
  return out.truncated(K);
}

/// 𝒲φ = −H(φ′ρ)/(2π), so that ℒ = 𝒜 + 2πβ𝒲.
inline TrigSeries apply_W(const TrigSeries& phi, const EquilibriumResult& eq, int K_out = 0) {
  const int K = detail::output_band(eq, K_out);
  TrigSeries w = (-1.0 / kTwoPi) * hilbert_transform(multiply(derivative(phi), eq.density.series));
  return w.truncated(K);
}

/// Ξψ = (H(ψρ) − ψH(ρ))/2, the weighted Hilbert transform
/// ∫ (ψ(x) − ψ(y)) / (2 tan((x−y)/2)) dμ(y).
inline TrigSeries apply_Xi(const TrigSeries& psi, const EquilibriumResult& eq, int K_out = 0) {
  const TrigSeries& rho = eq.density.series;
  TrigSeries x = 0.5 * (hilbert_transform(multiply(psi, rho)) - multiply(psi, hilbert_transform(rho)));
  return K_out > 0 ? x.truncated(K_out) : x;
}

/// ⟨φ, ψ⟩_H = ∫ φ′ψ′ρ dx/2π.
inline double h_inner(const TrigSeries& phi, const TrigSeries& psi, const Density& rho) {
  return l2_inner(multiply(derivative(phi), rho.series), derivative(psi));
}

struct OperatorModel {
  int K_op = 0;
  double beta = 0.0;
  Density density;
  Eigen::MatrixXd G;    // ⟨e_a, e_b⟩_H
  Eigen::MatrixXd A;    // ⟨𝒜e_a, e_b⟩_H
  Eigen::MatrixXd W;    // ⟨2π𝒲e_a, e_b⟩_H
  Eigen::MatrixXd Lmat; // A + βW, symmetrized
  double asymmetry_defect = 0.0;

  int dimension() const { return 2 * K_op; }
};

/// Galerkin matrices of ℒ. Requires K_op ≤ K/2 for the equilibrium band K.
inline OperatorModel assemble(const EquilibriumResult& eq, int K_op) {
  const TrigSeries& rho = eq.density.series;
  if (K_op < 1) throw DomainError("assemble: K_op must be >= 1");
  if (2 * K_op > rho.max_mode()) throw ResolutionError("assemble: need K_op <= K/2");
  const int d = 2 * K_op;
  const int Kg = K_op + rho.max_mode();
  const std::size_t M = detail::product_grid(K_op, rho.max_mode());
  const GridFn r = to_grid(rho, M);

  Eigen::MatrixXd E(M, d), Dg(M, d), Cg(2 * Kg, d);
  for (int a = 0; a < d; ++a) {
    const TrigSeries de = derivative(basis_function(a));
    const TrigSeries g = to_series(to_grid(de, M) * r, Kg);
    const GridFn eg = to_grid(de, M), dgg = to_grid(derivative(g), M);
    for (std::size_t m = 0; m < M; ++m) {
      E(m, a) = eg[m];
      Dg(m, a) = dgg[m];
    }
    // √(2k)·(Re ĝ_k, Im ĝ_k) so that W = CgᵀCg.
    for (int k = 1; k <= Kg; ++k) {
      const double s = std::sqrt(2.0 * k);
      Cg(2 * (k - 1), a) = s * g.coeff(k).real();
      Cg(2 * (k - 1) + 1, a) = s * g.coeff(k).imag();
    }
  }
  Eigen::VectorXd wr(M), winv(M);
  for (std::size_t m = 0; m < M; ++m) {
    wr(m) = r[m] / static_cast<double>(M);
    winv(m) = 1.0 / (r[m] * static_cast<double>(M));
  }

  OperatorModel om;
  om.K_op = K_op;
  om.beta = eq.beta;
  om.density = eq.density;
  om.G = E.transpose() * wr.asDiagonal() * E;
  om.A = Dg.transpose() * winv.asDiagonal() * Dg;
  om.W = Cg.transpose() * Cg;
  om.G = 0.5 * (om.G + om.G.transpose()).eval();
  om.A = 0.5 * (om.A + om.A.transpose()).eval();
  om.W = 0.5 * (om.W + om.W.transpose()).eval();
  const Eigen::MatrixXd L = om.A + eq.beta * om.W;
  om.asymmetry_defect = (L - L.transpose()).norm() / std::max(L.norm(), 1e-300);
  om.Lmat = 0.5 * (L + L.transpose());

  Eigen::LLT<Eigen::MatrixXd> chol(om.G);
  if (chol.info() != Eigen::Success) throw ResolutionError("assemble: Gram matrix is not positive definite");
  return om;
}

struct EigenSystem {
  Eigen::VectorXd kappas;   // ascending
  Eigen::MatrixXd vectors;  // columns: H-orthonormal coordinates in the trig basis
  double ortho_residual = 0.0;
  int K_op = 0;
  // m_j = ceil(j/2): eigenvalues come in near-pairs (cos/sin), so the j-th
  // eigenvalue sits at frequency m_j and κ_j ≈ α m_j².
  static constexpr const char* index_convention = "m_j = ceil(j/2), j = 1-based eigenvalue index";

  int size() const { return static_cast<int>(kappas.size()); }
  /// κ_j for 1-based j.
  double kappa(int j) const { return kappas(j - 1); }
  TrigSeries eigenfunction(int j) const {
    const Eigen::VectorXd c = vectors.col(j - 1);
    return from_basis_coordinates(std::span<const double>(c.data(), static_cast<std::size_t>(c.size())));
  }
};

namespace detail {
inline EigenSystem solve_pencil(const Eigen::MatrixXd& L, const Eigen::MatrixXd& G, int K_op) {
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(L, G, Eigen::ComputeEigenvectors | Eigen::Ax_lBx);
  if (es.info() != Eigen::Success) throw Error("eigensystem: generalized eigensolver failed");
  EigenSystem out;
  out.kappas = es.eigenvalues();
  out.vectors = es.eigenvectors();
  out.K_op = K_op;
  const Eigen::MatrixXd I = out.vectors.transpose() * G * out.vectors;
  out.ortho_residual = (I - Eigen::MatrixXd::Identity(I.rows(), I.cols())).cwiseAbs().maxCoeff();
  return out;
}
}  // namespace detail

/// Solves Lmat v = κ G v.
inline EigenSystem eigensystem(const OperatorModel& model) {
  return detail::solve_pencil(model.Lmat, model.G, model.K_op);
}

/// Eigenvalues λ_j of 𝒜 alone on the same basis.
inline EigenSystem eigensystem_A(const OperatorModel& model) {
  return detail::solve_pencil(model.A, model.G, model.K_op);
}

/// Upper bound λ_j + 4π²βδ⁻¹√λ_j with δ = min(min ρ, 1/max ρ).
inline double kappa_upper_bound(double lambda, double beta, const Density& rho) {
  const GridFn g = to_grid(rho.series, 4 * rho.grid.size());
  const double delta = std::min(g.min(), 1.0 / g.max());
  return lambda + 4.0 * kPi * kPi * beta / delta * std::sqrt(lambda);
}

struct WeylFit {
  double alpha_hat = 0.0;   // slope of κ_j against m_j²
  double intercept = 0.0;
  double ratio_spread = 0.0;  // (max − min)/mean of κ_j/m_j² over the window
  int j_min = 0, j_max = 0;
  std::string index_convention = EigenSystem::index_convention;
};

inline int weyl_frequency(int j) { return (j + 1) / 2; }

/// Least-squares κ_j ≈ α m_j² + b over 1 ≤ j_min < j_max ≤ K_op.
inline WeylFit weyl_fit(std::span<const double> kappas, int j_min, int j_max, int trusted_max) {
  if (j_min < 1 || j_max <= j_min) throw DomainError("weyl_fit: need 1 <= j_min < j_max");
  if (j_max > trusted_max || j_max > static_cast<int>(kappas.size()))
    throw ResolutionError("weyl_fit: window exceeds the truncation-clean range");
  const int n = j_max - j_min + 1;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  double rmin = 1e300, rmax = -1e300, rsum = 0;
  for (int j = j_min; j <= j_max; ++j) {
    const double x = std::pow(static_cast<double>(weyl_frequency(j)), 2);
    const double y = kappas[j - 1];
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    const double ratio = y / x;
    rmin = std::min(rmin, ratio);
    rmax = std::max(rmax, ratio);
    rsum += ratio;
  }
  WeylFit f;
  const double den = n * sxx - sx * sx;
  f.alpha_hat = (n * sxy - sx * sy) / den;
  f.intercept = (sy - f.alpha_hat * sx) / n;
  f.ratio_spread = (rmax - rmin) / (rsum / n);
  f.j_min = j_min;
  f.j_max = j_max;
  return f;
}

inline WeylFit weyl_fit(const EigenSystem& es, int j_min, int j_max) {
  return weyl_fit(std::span<const double>(es.kappas.data(), static_cast<std::size_t>(es.kappas.size())), j_min, j_max,
                  es.K_op);
}

}  // namespace htcg
