#pragma once

// Wasserstein-1 distance on the circle between discrete measures.
//
// With arc-length cost the optimal cost has the closed form
//     W1 = min_c ∫_0^{2π} |F_μ(t) − F_ν(t) − c| dt,
// where the minimizing shift c is a weighted median of the CDF difference.
// The chordal metric |e^{ix} − e^{iy}| in the concentration bound is only
// bracketed, through (2/π) d_T ≤ |e^{ix} − e^{iy}| ≤ d_T.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <span>
#include <vector>

#include "htcg/density.hpp"

namespace htcg {

/// Weighted atoms at angles in [0, 2π).
struct CircleMeasure {
  std::vector<double> atoms;
  std::vector<double> weights;

  static CircleMeasure empirical(std::span<const double> angles) {
    CircleMeasure m;
    m.atoms.reserve(angles.size());
    for (double a : angles) m.atoms.push_back(wrap_angle(a));
    m.weights.assign(angles.size(), 1.0 / static_cast<double>(angles.size()));
    return m;
  }

  /// Atoms at the grid nodes of ρ (resampled to `M` points when M > 0),
  /// weights ρ(x_m)/M.
  static CircleMeasure from_density(const Density& rho, std::size_t M = 0) {
    const GridFn g = (M == 0 || M == rho.grid.size()) ? rho.grid : to_grid(rho.series, M);
    CircleMeasure m;
    const std::size_t n = g.size();
    m.atoms.resize(n);
    m.weights.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      m.atoms[i] = g.node(i);
      m.weights[i] = g[i] / static_cast<double>(n);
    }
    return m;
  }

  double mass() const { return std::accumulate(weights.begin(), weights.end(), 0.0); }
};

struct W1Result {
  enum class Method { cdf, lp_oracle };
  double w1_arc = 0.0;
  double w1_chord_lo = 0.0;
  double w1_chord_hi = 0.0;
  Method method = Method::cdf;

  static W1Result from_arc(double arc, Method method = Method::cdf) {
    return W1Result{arc, (2.0 / kPi) * arc, arc, method};
  }
};

namespace detail {
inline void require_normalized(const CircleMeasure& m, const char* who) {
  if (m.atoms.size() != m.weights.size() || m.atoms.empty()) throw DomainError(std::string(who) + ": malformed measure");
  for (double w : m.weights)
    if (w < 0.0) throw DomainError(std::string(who) + ": negative weight");
  if (std::abs(m.mass() - 1.0) > 1e-9) throw DomainError(std::string(who) + ": measure is not normalized");
}
}  // namespace detail

/// Exact arc-length W1 between two normalized discrete measures on the circle.
inline W1Result w1_circle(const CircleMeasure& mu, const CircleMeasure& nu) {
  detail::require_normalized(mu, "w1_circle");
  detail::require_normalized(nu, "w1_circle");

  struct Event {
    double at;
    double mass;
  };
  std::vector<Event> ev;
  ev.reserve(mu.atoms.size() + nu.atoms.size());
  for (std::size_t i = 0; i < mu.atoms.size(); ++i) ev.push_back({wrap_angle(mu.atoms[i]), mu.weights[i]});
  for (std::size_t i = 0; i < nu.atoms.size(); ++i) ev.push_back({wrap_angle(nu.atoms[i]), -nu.weights[i]});
  std::sort(ev.begin(), ev.end(), [](const Event& a, const Event& b) { return a.at < b.at; });

  // CDF difference D on [ev[i].at, ev[i+1].at); on [0, ev[0].at) it is 0,
  // which also equals its value after the last event (both unit mass).
  struct Piece {
    double value;
    double length;
  };
  std::vector<Piece> pieces;
  pieces.reserve(ev.size() + 1);
  pieces.push_back({0.0, ev.front().at + (kTwoPi - ev.back().at)});
  double d = 0.0;
  for (std::size_t i = 0; i + 1 < ev.size(); ++i) {
    d += ev[i].mass;
    const double len = ev[i + 1].at - ev[i].at;
    if (len > 0.0) pieces.push_back({d, len});
  }

  std::sort(pieces.begin(), pieces.end(), [](const Piece& a, const Piece& b) { return a.value < b.value; });
  double half = 0.0;
  for (const auto& p : pieces) half += p.length;
  half *= 0.5;
  double acc = 0.0, median = pieces.front().value;
  for (const auto& p : pieces) {
    acc += p.length;
    if (acc >= half) {
      median = p.value;
      break;
    }
  }
  double cost = 0.0;
  for (const auto& p : pieces) cost += p.length * std::abs(p.value - median);
  return W1Result::from_arc(cost);
}

/// W1 between the empirical measure of `angles` and a density.
inline W1Result w1_empirical(std::span<const double> angles, const Density& rho, std::size_t M = 0) {
  return w1_circle(CircleMeasure::empirical(angles), CircleMeasure::from_density(rho, M));
}

}  // namespace htcg
