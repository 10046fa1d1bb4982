#include <algorithm>
#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "htcg/htcg.hpp"
#include "oracles.hpp"

using namespace htcg;

namespace {

double lp_arc(const CircleMeasure& a, const CircleMeasure& b) {
  return oracle::transport_lp(a.weights, b.weights,
                              [&](int i, int j) { return oracle::arc_distance(a.atoms[i], b.atoms[j]); });
}

CircleMeasure random_measure(int n, std::mt19937_64& g) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  CircleMeasure m;
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    m.atoms.push_back(kTwoPi * u(g));
    m.weights.push_back(0.1 + u(g));
    total += m.weights.back();
  }
  for (auto& w : m.weights) w /= total;
  return m;
}

}  // namespace

TEST(W1, Anchors) {
  const std::vector<double> x{0.3, 2.0, 5.1};
  EXPECT_NEAR(w1_circle(CircleMeasure::empirical(x), CircleMeasure::empirical(x)).w1_arc, 0.0, 1e-15);
  const W1Result r = w1_circle(CircleMeasure::empirical(std::vector<double>{0.0}),
                               CircleMeasure::empirical(std::vector<double>{kPi}));
  EXPECT_NEAR(r.w1_arc, kPi, 1e-14);
  EXPECT_NEAR(r.w1_chord_hi, kPi, 1e-14);
  EXPECT_NEAR(r.w1_chord_lo, 2.0, 1e-14);
  // Wrapping: 0.1 and 2π − 0.1 are 0.2 apart.
  EXPECT_NEAR(w1_circle(CircleMeasure::empirical(std::vector<double>{0.1}),
                        CircleMeasure::empirical(std::vector<double>{kTwoPi - 0.1}))
                  .w1_arc,
              0.2, 1e-14);
}

TEST(W1, AtomsAgainstUniformGridMatchLinearProgram) {
  std::mt19937_64 g(4);
  std::uniform_real_distribution<double> u(0.0, kTwoPi);
  std::vector<double> x(6);
  for (auto& a : x) a = u(g);
  const CircleMeasure mu = CircleMeasure::empirical(x);
  const CircleMeasure nu = CircleMeasure::from_density(Density::uniform(8, 64));
  EXPECT_NEAR(w1_circle(mu, nu).w1_arc, lp_arc(mu, nu), 1e-9);
}

TEST(W1, PropertyMatchesLinearProgramOnSmallInstances) {
  std::mt19937_64 g(5);
  for (int t = 0; t < 60; ++t) {
    const CircleMeasure a = random_measure(1 + t % 8, g), b = random_measure(1 + (t / 8) % 8, g);
    EXPECT_NEAR(w1_circle(a, b).w1_arc, lp_arc(a, b), 1e-9) << t;
  }
}

TEST(W1, PropertyMetric) {
  std::mt19937_64 g(6);
  for (int t = 0; t < 30; ++t) {
    const CircleMeasure a = random_measure(5, g), b = random_measure(7, g), c = random_measure(3, g);
    const double ab = w1_circle(a, b).w1_arc, ba = w1_circle(b, a).w1_arc;
    EXPECT_NEAR(ab, ba, 1e-13);
    EXPECT_GE(ab, 0.0);
    EXPECT_LE(ab, w1_circle(a, c).w1_arc + w1_circle(c, b).w1_arc + 1e-13);
    EXPECT_NEAR(w1_circle(a, a).w1_arc, 0.0, 1e-14);
  }
}

TEST(W1, ChordBracketContainsChordalOptimum) {
  std::mt19937_64 g(7);
  for (int t = 0; t < 20; ++t) {
    const CircleMeasure a = random_measure(4, g), b = random_measure(5, g);
    const double chord = oracle::transport_lp(a.weights, b.weights, [&](int i, int j) {
      return std::abs(2.0 * std::sin(0.5 * (a.atoms[i] - b.atoms[j])));
    });
    const W1Result r = w1_circle(a, b);
    EXPECT_LE(r.w1_chord_lo, chord + 1e-12);
    EXPECT_GE(r.w1_chord_hi, chord - 1e-12);
  }
}

TEST(W1, RejectsUnnormalizedInput) {
  CircleMeasure m;
  m.atoms = {0.0, 1.0};
  m.weights = {0.5, 0.6};
  EXPECT_THROW(w1_circle(m, CircleMeasure::empirical(std::vector<double>{0.0})), DomainError);
  CircleMeasure neg;
  neg.atoms = {0.0, 1.0};
  neg.weights = {1.5, -0.5};
  EXPECT_THROW(w1_circle(neg, neg), DomainError);
}

TEST(W1, EmpiricalAgainstSmoothDensityConvergesInAtoms) {
  const Density rho = PotentialSpec::cosine(1.0).reference_density(64, 256);
  const std::vector<double> x{0.2, 1.1, 3.9, 4.4, 6.0};
  const double a = w1_empirical(x, rho, 4096).w1_arc, b = w1_empirical(x, rho, 16384).w1_arc;
  EXPECT_NEAR(a, b, 1e-3);
}

TEST(Concentration, ConstantAtZeroPotential) {
  const EquilibriumResult eq = solve_equilibrium(PotentialSpec::zero(), 1.0);
  const double expect = 2.0 * std::log(2.0) + 1.5 + 16.0 + 1.0 / kPi;
  EXPECT_NEAR(concentration_constant(eq), expect, 1e-12);
  EXPECT_NEAR(concentration_constant(eq), 19.2046, 1e-4);
}

TEST(Concentration, BoundAndVacuity) {
  EXPECT_NEAR(concentration_exponent(100, 2.0, 1.0, 3.0), -2.0 * (100.0 / (8.0 * kPi) - 5.0 * std::log(100.0) - 3.0),
              1e-12);
  EXPECT_GE(concentration_bound(100, 1.0, 0.5, 19.2), 1.0);
  EXPECT_LT(concentration_bound(100000, 1.0, 1.0, 19.2), 1e-100);
}

TEST(Concentration, SmallExperimentRowsHold) {
  const EquilibriumResult eq = solve_equilibrium(PotentialSpec::zero(), 1.0);
  ChainSpec spec;
  spec.N = 100;
  spec.burn_in = 30;
  spec.n_steps = 1;
  const ConcentrationReport rep = concentration_experiment(spec, eq, {0.2, 0.6, 1.0}, 100, 0.0, 0, 2048);
  ASSERT_EQ(rep.rows.size(), 3u);
  EXPECT_EQ(rep.w1.values.size(), 100u);
  EXPECT_TRUE(rep.all_hold());
  for (std::size_t i = 1; i < rep.rows.size(); ++i) EXPECT_LE(rep.rows[i].empirical_freq, rep.rows[i - 1].empirical_freq);
  spec.N = 5;
  EXPECT_THROW(concentration_experiment(spec, eq, {0.5}, 10), DomainError);
}

TEST(Concentration, MedianDistanceDecaysLikeInverseRootN) {
  const Density uni = Density::uniform(8, 64);
  const CircleMeasure target = CircleMeasure::from_density(uni, 8192);
  std::vector<double> Ns, med;
  for (int N : {50, 200, 800}) {
    ChainSpec spec;
    spec.N = N;
    spec.beta = 0.0;
    spec.algorithm = Algorithm::IID0;
    spec.n_steps = 1;
    StatSeries s = independent_statistic(
        spec, 300, [&](const Configuration& x) { return w1_circle(CircleMeasure::empirical(x.angles), target).w1_arc; },
        "w1");
    std::nth_element(s.values.begin(), s.values.begin() + 150, s.values.end());
    Ns.push_back(N);
    med.push_back(s.values[150]);
  }
  const double slope = loglog_slope(Ns, med);
  EXPECT_GE(slope, -0.65);
  EXPECT_LE(slope, -0.4);
}
