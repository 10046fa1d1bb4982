#pragma once

// Tail check for W1(μ̂_N, μ_β^V) against
//     P(W1 > r) ≤ exp(−β(N r²/(8π) − 5 log N − C)),
//     C = E(μ_β^V) + 3‖U‖_Lip + 16 + 3/2 + log 2 + 1/π.
// The empirical side uses the arc-length W1, an upper proxy for the chordal one.

#include <cmath>
#include <vector>

#include "htcg/equilibrium.hpp"
#include "htcg/gibbs.hpp"
#include "htcg/transport.hpp"

namespace htcg {

/// C for μ_β^V, with ‖U‖_Lip = sup|U′| by spectral differentiation.
inline double concentration_constant(const EquilibriumResult& eq) {
  const double lip = sup_norm(derivative(eq.U), 4096);
  return log_energy(eq.density) + 3.0 * lip + 16.0 + 1.5 + std::log(2.0) + 1.0 / kPi;
}

inline double concentration_exponent(int N, double beta, double r, double C) {
  const double n = static_cast<double>(N);
  return -beta * (n * r * r / (8.0 * kPi) - 5.0 * std::log(n) - C);
}

inline double concentration_bound(int N, double beta, double r, double C) {
  return std::exp(concentration_exponent(N, beta, r, C));
}

struct ConcentrationRow {
  double r = 0.0;
  double empirical_freq = 0.0;
  double bound = 0.0;
  bool vacuous = false;  // bound ≥ 1
  bool holds() const { return vacuous || empirical_freq <= bound; }
};

struct ConcentrationReport {
  double C = 0.0;
  StatSeries w1;  // w1_arc per independent chain
  std::vector<ConcentrationRow> rows;
  bool all_hold() const {
    for (const auto& r : rows)
      if (!r.holds()) return false;
    return true;
  }
};

/// Exceedance table over r_grid from n_samples independent chains. C defaults
/// to concentration_constant(eq); pass C > 0 to use a fixed value.
inline ConcentrationReport concentration_experiment(const ChainSpec& spec, const EquilibriumResult& eq,
                                                    const std::vector<double>& r_grid, std::size_t n_samples,
                                                    double C = 0.0, unsigned workers = 0,
                                                    std::size_t density_atoms = 8192) {
  if (spec.N < 10) throw DomainError("concentration_experiment: need N >= 10");
  ConcentrationReport rep;
  rep.C = C > 0.0 ? C : concentration_constant(eq);
  const CircleMeasure target = CircleMeasure::from_density(eq.density, density_atoms);
  rep.w1 = independent_statistic(
      spec, n_samples,
      [&](const Configuration& x) { return w1_circle(CircleMeasure::empirical(x.angles), target).w1_arc; },
      "w1_arc", workers);
  for (double r : r_grid) {
    ConcentrationRow row;
    row.r = r;
    std::size_t exceed = 0;
    for (double w : rep.w1.values) exceed += (w > r) ? 1 : 0;
    row.empirical_freq = static_cast<double>(exceed) / static_cast<double>(rep.w1.values.size());
    row.bound = concentration_bound(spec.N, spec.beta, r, rep.C);
    row.vacuous = row.bound >= 1.0;
    rep.rows.push_back(row);
  }
  return rep;
}

}  // namespace htcg
