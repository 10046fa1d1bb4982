#include <algorithm>
#include <cmath>
#include <map>
#include <random>

#include <gtest/gtest.h>

#include "htcg/htcg.hpp"
#include "oracles.hpp"

using namespace htcg;

namespace {

TrigSeries random_mean_zero(int K, std::mt19937_64& g) {
  std::normal_distribution<double> n01;
  TrigSeries f(K);
  for (int k = 1; k <= K; ++k) f.set(k, cplx{n01(g), n01(g)} / std::pow(k, 2.5));
  return f;
}

const EquilibriumResult& eq_v0(double beta) {
  static std::map<double, EquilibriumResult> cache;
  auto it = cache.find(beta);
  if (it == cache.end()) it = cache.emplace(beta, solve_equilibrium(PotentialSpec::zero(), beta)).first;
  return it->second;
}

const EquilibriumResult& eq_cos(double beta) {
  static std::map<double, EquilibriumResult> cache;
  auto it = cache.find(beta);
  if (it == cache.end()) it = cache.emplace(beta, solve_equilibrium(PotentialSpec::cosine(1.0), beta)).first;
  return it->second;
}

double sup_diff(const TrigSeries& a, const TrigSeries& b) { return sup_norm(a - b, 1024); }

}  // namespace

TEST(ApplyL, FourierModesAtZeroPotential) {
  for (double beta : {0.0, 1.0, 2.5})
    for (int j = 1; j <= 8; ++j) {
      const TrigSeries c = TrigSeries::cosine(j), s = TrigSeries::sine(j);
      EXPECT_LT(sup_diff(apply_L(c, eq_v0(beta)), (j * j + beta * j) * c), 1e-11);
      EXPECT_LT(sup_diff(apply_L(s, eq_v0(beta)), (j * j + beta * j) * s), 1e-11);
    }
}

TEST(ApplyL, SturmLiouvilleAtBetaZero) {
  const EquilibriumResult& eq = eq_cos(0.0);
  std::mt19937_64 g(4);
  const TrigSeries phi = random_mean_zero(10, g);
  const TrigSeries expect = (-1.0) * derivative(phi, 2) + multiply(derivative(eq.potential.V), derivative(phi));
  EXPECT_LT(sup_diff(apply_L(phi, eq), expect), 1e-11);
}

TEST(ApplyL, MatchesFiniteDifferenceOracle) {
  const EquilibriumResult& eq = eq_cos(1.0);
  const TrigSeries phi = TrigSeries::cosine(1);
  const TrigSeries L = apply_L(phi, eq);
  const double h = kTwoPi / 8192.0;
  auto rho = [&](double x) { return eq.rho()(x); };
  auto f = [](double x) { return std::cos(x); };
  for (double x : {0.2, 1.0, 2.7, 4.4, 6.0}) {
    const double d2 = (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h);
    const double d1 = (f(x + h) - f(x - h)) / (2.0 * h);
    const double dlog = (std::log(rho(x + h)) - std::log(rho(x - h))) / (2.0 * h);
    auto rp = [&](double t) { return rho(t) * (f(t + h) - f(t - h)) / (2.0 * h); };
    const double Hrp = oracle::pv_hilbert(rp, x);
    const double fd = -d2 - eq.beta * Hrp - dlog * d1;
    EXPECT_NEAR(L(x), fd, 1e-6) << x;
  }
}

TEST(ApplyAW, ZeroPotentialModes) {
  const EquilibriumResult& eq = eq_v0(1.0);
  for (int j = 1; j <= 6; ++j) {
    const TrigSeries c = TrigSeries::cosine(j);
    EXPECT_LT(sup_diff(apply_A(c, eq), (j * j) * c), 1e-12);
    EXPECT_LT(sup_diff(apply_W(c, eq), (j / kTwoPi) * c), 1e-14);
  }
}

TEST(ApplyAW, PropertyDecompositionIdentity) {
  std::mt19937_64 g(9);
  for (double beta : {0.5, 3.0}) {
    const EquilibriumResult& eq = eq_cos(beta);
    for (int t = 0; t < 5; ++t) {
      const TrigSeries phi = random_mean_zero(20, g);
      const TrigSeries sum = apply_A(phi, eq) + (kTwoPi * beta) * apply_W(phi, eq);
      EXPECT_LT(sup_diff(sum, apply_L(phi, eq)), 1e-12);
    }
  }
}

TEST(ApplyAW, AIsDirichletFormInWeightedL2) {
  const EquilibriumResult& eq = eq_cos(1.0);
  std::mt19937_64 g(10);
  for (int t = 0; t < 5; ++t) {
    const TrigSeries phi = random_mean_zero(12, g);
    const double lhs = l2_inner(multiply(apply_A(phi, eq), eq.rho()), phi);
    const double rhs = weighted_l2_norm_sq(derivative(phi), Density::from_series(eq.rho(), 2048));
    EXPECT_NEAR(lhs, rhs, 1e-11 * rhs);
  }
}

TEST(ApplyAW, WQuadraticFormIsHalfSobolevOfWeightedDerivative) {
  // ⟨𝒲φ, φ⟩_H = (1/2π)‖φ′ρ‖²_{H^{1/2}} in the ρ-convention.
  const EquilibriumResult& eq = eq_cos(1.0);
  std::mt19937_64 g(12);
  for (int t = 0; t < 5; ++t) {
    const TrigSeries phi = random_mean_zero(12, g);
    const double lhs = h_inner(apply_W(phi, eq), phi, eq.density);
    const double rhs = h_half_norm_sq(multiply(derivative(phi), eq.rho())) / kTwoPi;
    EXPECT_NEAR(lhs, rhs, 1e-12 * rhs);
    EXPECT_GT(lhs, 0.0);
  }
}

TEST(ApplyXi, ZeroPotentialCosine) {
  EXPECT_LT(sup_diff(apply_Xi(TrigSeries::cosine(1), eq_v0(1.0)), TrigSeries::sine(1, -0.5)), 1e-15);
  EXPECT_LT(sup_norm(apply_Xi(TrigSeries::constant(1.0), eq_cos(1.0))), 1e-14);
}

TEST(ApplyXi, MatchesPrincipalValueQuadrature) {
  const EquilibriumResult& eq = eq_cos(1.0);
  const TrigSeries psi = TrigSeries::cosine(1) + TrigSeries::sine(3, 0.4);
  const TrigSeries xi = apply_Xi(psi, eq);
  auto rho = [&](double x) { return eq.rho()(x); };
  auto prod = [&](double x) { return psi(x) * rho(x); };
  for (double x : {0.3, 2.0, 5.1}) {
    const double q = 0.5 * (oracle::pv_hilbert(prod, x) - psi(x) * oracle::pv_hilbert(rho, x));
    EXPECT_NEAR(xi(x), q, 1e-8) << x;
  }
}

TEST(ApplyXi, PropertyMeanIdentity) {
  const EquilibriumResult& eq = eq_cos(2.0);
  std::mt19937_64 g(13);
  for (int t = 0; t < 10; ++t) {
    const TrigSeries psi = random_mean_zero(10, g);
    const double lhs = integrate(apply_Xi(psi, eq), eq.density);
    const double rhs = -l2_inner(multiply(hilbert_transform(eq.rho()), psi), eq.rho());
    EXPECT_NEAR(lhs, rhs, 1e-13);
  }
}

TEST(ApplyXi, PropertyVariationalEquation) {
  const EquilibriumResult& eq = eq_cos(1.5);
  std::mt19937_64 g(14);
  for (int t = 0; t < 5; ++t) {
    const TrigSeries phi = random_mean_zero(10, g);
    const TrigSeries dphi = derivative(phi);
    const TrigSeries lhs = derivative(phi, 2) + (2.0 * eq.beta) * apply_Xi(dphi, eq) -
                           multiply(derivative(eq.potential.V), dphi);
    EXPECT_LT(sup_diff(lhs, (-1.0) * apply_L(phi, eq)), 1e-8);
  }
}

TEST(Assemble, ZeroPotentialIsDiagonal) {
  const OperatorModel m = assemble(eq_v0(2.0), 16);
  for (int a = 0; a < m.dimension(); ++a)
    for (int b = 0; b < m.dimension(); ++b) {
      const int k = a / 2 + 1;
      const double g = (a == b) ? 0.5 * k * k : 0.0;
      EXPECT_NEAR(m.G(a, b), g, 1e-12);
      if (a != b) {
        EXPECT_NEAR(m.Lmat(a, b), 0.0, 1e-10);
      }
    }
}

TEST(Assemble, ZeroPotentialSpectrum) {
  const EigenSystem es = eigensystem(assemble(eq_v0(2.0), 32));
  for (int j = 1; j <= es.size(); ++j) {
    const int k = weyl_frequency(j);
    EXPECT_NEAR(es.kappa(j), k * k + 2.0 * k, 1e-9 * (k * k + 2.0 * k));
  }
}

TEST(Assemble, BetaZeroMatchesFiniteDifferenceSturmLiouville) {
  const EigenSystem es = eigensystem(assemble(eq_cos(0.0), 64));
  auto V = [](double x) { return std::cos(x); };
  const Eigen::VectorXd a = oracle::fd_sturm_liouville(V, 512), b = oracle::fd_sturm_liouville(V, 1024);
  for (int j = 1; j <= 10; ++j) {
    const double rich = (4.0 * b(j) - a(j)) / 3.0;  // a(0) = b(0) = 0 is the constant mode
    EXPECT_NEAR(es.kappa(j), rich, 1e-6 * rich) << j;
  }
  EXPECT_NEAR(a(0), 0.0, 1e-9);
}

TEST(Assemble, InvariantsOnCosinePotential) {
  for (double beta : {0.0, 1.0, 10.0}) {
    const OperatorModel m = assemble(eq_cos(beta), 32);
    EXPECT_LE(m.asymmetry_defect, 1e-8);
    EXPECT_LE((m.G - m.G.transpose()).norm(), 1e-12 * m.G.norm());
    const EigenSystem es = eigensystem(m);
    EXPECT_GT(es.kappa(1), 0.0);
    EXPECT_LE(es.ortho_residual, 1e-9);
    // H-orthonormality checked through the library inner product.
    for (int i = 1; i <= 4; ++i)
      for (int j = 1; j <= 4; ++j)
        EXPECT_NEAR(h_inner(es.eigenfunction(i), es.eigenfunction(j), m.density), i == j ? 1.0 : 0.0, 1e-9);
  }
}

TEST(Assemble, RequiresResolution) {
  EXPECT_THROW(assemble(eq_v0(1.0), 200), ResolutionError);
  EXPECT_THROW(assemble(eq_v0(1.0), 0), DomainError);
}

TEST(Eigensystem, EigenfunctionsSolveTheOperator) {
  const EquilibriumResult& eq = eq_cos(1.0);
  const EigenSystem es = eigensystem(assemble(eq, 64));
  for (int j = 1; j <= 6; ++j) {
    const TrigSeries phi = es.eigenfunction(j);
    // Constants are invisible to the H pairing; compare derivatives.
    const TrigSeries r = derivative(apply_L(phi, eq, 64) - es.kappa(j) * phi);
    EXPECT_LT(sup_norm(r) / (es.kappa(j) * sup_norm(derivative(phi))), 1e-8) << j;
  }
}

TEST(Eigensystem, InterlacingAndUpperBound) {
  for (double beta : {0.5, 1.0, 4.0}) {
    const OperatorModel m = assemble(eq_cos(beta), 32);
    const EigenSystem es = eigensystem(m), ea = eigensystem_A(m);
    for (int j = 1; j <= es.size(); ++j) {
      EXPECT_GE(es.kappa(j), ea.kappa(j) * (1.0 - 1e-12)) << j;
      EXPECT_LE(es.kappa(j), kappa_upper_bound(ea.kappa(j), beta, m.density)) << j;
      const double g = m.density.grid.max();
      EXPECT_LE(es.kappa(j), ea.kappa(j) + beta * g * std::sqrt(ea.kappa(j)) * (1.0 + 1e-12)) << j;
    }
  }
}

TEST(Eigensystem, PropertySelfAdjointAndPositiveInH) {
  const EquilibriumResult& eq = eq_cos(2.0);
  std::mt19937_64 g(19);
  for (int t = 0; t < 10; ++t) {
    const TrigSeries phi = random_mean_zero(16, g), psi = random_mean_zero(16, g);
    const double a = h_inner(apply_L(phi, eq), psi, eq.density), b = h_inner(phi, apply_L(psi, eq), eq.density);
    const double nphi = std::sqrt(h_inner(phi, phi, eq.density)), npsi = std::sqrt(h_inner(psi, psi, eq.density));
    EXPECT_LE(std::abs(a - b), 1e-8 * nphi * npsi);
    const double lq = h_inner(apply_L(phi, eq), phi, eq.density), aq = h_inner(apply_A(phi, eq), phi, eq.density);
    EXPECT_GE(lq, aq);
    EXPECT_GT(aq, 0.0);
    EXPECT_GE(aq, eq.density.delta_est * l2_norm_sq(derivative(phi)) - 1e-12);
  }
}

TEST(Eigensystem, ConvergesUnderBasisDoubling) {
  const EigenSystem a = eigensystem(assemble(eq_cos(1.0), 32)), b = eigensystem(assemble(eq_cos(1.0), 64));
  for (int j = 1; j <= 10; ++j) EXPECT_LE(std::abs(a.kappa(j) - b.kappa(j)), 1e-8 * b.kappa(j)) << j;
}

TEST(Weyl, ZeroPotentialAgainstExactList) {
  const EigenSystem es = eigensystem(assemble(eq_v0(1.0), 64));
  std::vector<double> exact;
  for (int k = 1; k <= 64; ++k) exact.insert(exact.end(), 2, k * k + 1.0 * k);
  const WeylFit w = weyl_fit(es, 20, 60), we = weyl_fit(exact, 20, 60, 64);
  EXPECT_NEAR(w.alpha_hat, we.alpha_hat, 1e-9);
  EXPECT_NEAR(w.ratio_spread, we.ratio_spread, 1e-9);
  // κ_j = m² + m: the fitted slope carries the 1/(2m) correction of the window.
  EXPECT_NEAR(w.alpha_hat, 1.0, 0.03);
  EXPECT_EQ(w.index_convention, std::string(EigenSystem::index_convention));
}

TEST(Weyl, BetaZeroRatioSpread) {
  const EigenSystem es = eigensystem(assemble(eq_cos(0.0), 64));
  const WeylFit w = weyl_fit(es, 20, 60);
  EXPECT_LE(w.ratio_spread, 0.10);
  EXPECT_NEAR(w.alpha_hat, 1.0, 0.02);
}

TEST(Weyl, DegenerateAndUntrustedWindows) {
  const EigenSystem es = eigensystem(assemble(eq_v0(1.0), 16));
  EXPECT_THROW(weyl_fit(es, 10, 10), DomainError);
  EXPECT_THROW(weyl_fit(es, 10, 40), ResolutionError);
}
