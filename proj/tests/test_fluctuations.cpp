#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "htcg/htcg.hpp"

using namespace htcg;

namespace {

TrigSeries random_series(int K, std::mt19937_64& g) {
  std::normal_distribution<double> n01;
  TrigSeries f(K);
  f.set(0, n01(g));
  for (int k = 1; k <= K; ++k) f.set(k, cplx{n01(g), n01(g)} / std::pow(k, 2.0));
  return f;
}

// 2Σ(1 + β/k)⁻¹|ψ̂_k|², summed term by term.
double lemma_sum(const TrigSeries& psi, double beta) {
  double s = 0.0;
  for (int k = 1; k <= psi.max_mode(); ++k) {
    const double a = psi.coeff(k).real(), b = psi.coeff(k).imag();
    s += 2.0 * (a * a + b * b) * k / (k + beta);
  }
  return s;
}

}  // namespace

TEST(Variance, ZeroPotentialCosineThreeRoutes) {
  const EquilibriumResult eq = solve_equilibrium(PotentialSpec::zero(), 1.0);
  const OperatorModel m = assemble(eq, 32);
  const EigenSystem es = eigensystem(m);
  const TrigSeries psi = TrigSeries::cosine(1);
  EXPECT_NEAR(variance_eigen(psi, es, m), 0.25, 1e-12);
  EXPECT_NEAR(variance_solve(psi, m), 0.25, 1e-12);
  EXPECT_NEAR(closed_form_v0(psi, 1.0), 0.25, 1e-15);
  EXPECT_NEAR(lemma_sum(psi, 1.0), 0.25, 1e-15);
}

TEST(Variance, ZeroPotentialCosTwoBetaThree) {
  const EquilibriumResult eq = solve_equilibrium(PotentialSpec::zero(), 3.0);
  const OperatorModel m = assemble(eq, 32);
  const TrigSeries psi = TrigSeries::cosine(2);
  EXPECT_NEAR(variance_solve(psi, m), 0.2, 1e-12);
  EXPECT_NEAR(variance_eigen(psi, eigensystem(m), m), 0.2, 1e-12);
}

TEST(Variance, BetaZeroIsL2Norm) {
  const EquilibriumResult eq = solve_equilibrium(PotentialSpec::zero(), 0.0);
  const OperatorModel m = assemble(eq, 16);
  EXPECT_NEAR(variance_solve(TrigSeries::cosine(1), m), 0.5, 1e-12);
  EXPECT_NEAR(closed_form_v0(TrigSeries::cosine(1), 0.0), 0.5, 1e-15);
  const EquilibriumResult ec = solve_equilibrium(PotentialSpec::cosine(1.0), 0.0);
  const TrigSeries psi = TrigSeries::cosine(1) + TrigSeries::sine(2, 0.3);
  EXPECT_NEAR(limiting_variance(psi, ec, 64), centered_l2_norm_sq(psi, ec.density), 1e-10);
}

TEST(Variance, ConstantIsDegenerate) {
  const EquilibriumResult eq = solve_equilibrium(PotentialSpec::cosine(1.0), 1.0);
  const OperatorModel m = assemble(eq, 16);
  const EigenSystem es = eigensystem(m);
  const EigenVariance ev = variance_eigen_detail(TrigSeries::constant(2.0), es, m);
  EXPECT_TRUE(ev.degenerate);
  EXPECT_EQ(ev.sigma2, 0.0);
  EXPECT_EQ(variance_solve(TrigSeries::constant(2.0), m), 0.0);
}

TEST(Variance, PropertyRoutesAgreeOnRandomInputs) {
  std::mt19937_64 g(77);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int t = 0; t < 6; ++t) {
    const PotentialSpec V = PotentialSpec::cosine(u(g), 0.5 * u(g));
    const double beta = std::exp(2.0 * u(g));
    const EquilibriumResult eq = solve_equilibrium(V, beta);
    const OperatorModel m = assemble(eq, 32);
    const VarianceReport r = variance_report(random_series(8, g), m, eigensystem(m));
    EXPECT_GT(r.sigma2_eigen, 0.0);
    EXPECT_LE(r.route_gap, 1e-8) << t;
  }
}

TEST(Variance, PropertyClosedFormTermByTerm) {
  std::mt19937_64 g(78);
  for (int t = 0; t < 10; ++t) {
    const TrigSeries psi = random_series(12, g);
    for (double beta : {0.0, 0.3, 5.0}) EXPECT_NEAR(closed_form_v0(psi, beta), lemma_sum(psi, beta), 1e-13);
  }
  const TrigSeries psi = random_series(6, g);
  EXPECT_NEAR(1e8 * closed_form_v0(psi, 1e8), h_half_norm_sq(psi), 1e-6 * h_half_norm_sq(psi));
}

TEST(Variance, PropertyMonotoneInBetaAtZeroPotential) {
  const TrigSeries psi = TrigSeries::cosine(1) + TrigSeries::cosine(3, 0.5);
  double prev = 1e300;
  for (double beta : {0.0, 0.1, 1.0, 10.0, 100.0}) {
    const double s = variance_solve(psi, assemble(solve_equilibrium(PotentialSpec::zero(), beta), 16));
    EXPECT_LT(s, prev);
    prev = s;
  }
}

TEST(Variance, PropertyUpperBounds) {
  const PotentialSpec V = PotentialSpec::cosine(1.0);
  std::mt19937_64 g(79);
  for (double beta : {0.01, 0.5, 3.0, 40.0}) {
    const EquilibriumResult eq = solve_equilibrium(V, beta);
    const TrigSeries psi = random_series(6, g);
    const double s = limiting_variance(psi, eq, 32);
    EXPECT_LE(s, centered_l2_norm_sq(psi, eq.density) * (1.0 + 1e-10));
    EXPECT_LE(beta * s, h_half_norm_sq(psi) * (1.0 + 1e-10));
  }
}

TEST(Variance, StableUnderBasisDoubling) {
  const EquilibriumResult eq = solve_equilibrium(PotentialSpec::cosine(1.0), 1.0);
  const TrigSeries psi = TrigSeries::cosine(1) + TrigSeries::sine(2, 0.2);
  const double a = limiting_variance(psi, eq, 32), b = limiting_variance(psi, eq, 64);
  EXPECT_LE(std::abs(a - b), 1e-8 * b);
}

TEST(Interpolation, ZeroPotentialBothEndsToHalf) {
  const TrigSeries psi = TrigSeries::cosine(1);
  const auto rows = interpolation_check(psi, PotentialSpec::zero(), {1e-4, 1.0, 1e4});
  EXPECT_NEAR(rows.front().sigma2, 0.5, 1e-3);
  EXPECT_NEAR(rows.back().beta_sigma2, 0.5, 1e-3);
  for (const auto& r : rows) EXPECT_NEAR(r.sigma2, closed_form_v0(psi, r.beta), 1e-12);
}

TEST(Interpolation, CosinePotentialEndpoints) {
  const TrigSeries psi = TrigSeries::cosine(1);
  const PotentialSpec V = PotentialSpec::cosine(1.0);
  const auto rows = interpolation_check(psi, V, log_grid(1e-3, 1e3, 7));
  const EndpointVerdict v = interpolation_endpoints(rows, psi, V);
  EXPECT_TRUE(v.low_pass) << v.low_gap;
  EXPECT_FALSE(v.high_abstained);
  EXPECT_GE(v.high_witness, 100.0);
  EXPECT_TRUE(v.high_pass) << v.high_gap;
  EXPECT_THROW(interpolation_check(psi, V, {1.0, 0.5}), DomainError);
}

TEST(Interpolation, AbstainsWithoutWitness) {
  const TrigSeries psi = TrigSeries::cosine(1);
  const PotentialSpec V = PotentialSpec::cosine(1.0);
  const auto rows = interpolation_check(psi, V, {1e-3, 10.0});
  const EndpointVerdict v = interpolation_endpoints(rows, psi, V);
  EXPECT_TRUE(v.high_abstained);
  EXPECT_TRUE(v.high_pass);
}
