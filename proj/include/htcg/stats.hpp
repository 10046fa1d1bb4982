#pragma once

// Sample summaries and goodness-of-fit tests used by the Monte-Carlo checks.

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <span>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>

#include "htcg/error.hpp"
#include "htcg/torus.hpp"

namespace htcg {

struct Summary {
  std::size_t n = 0;
  double mean = 0.0;
  double variance = 0.0;  // unbiased
  double std_error = 0.0;  // of the mean
  double variance_se = 0.0;  // of the variance, from the fourth central moment
  double normality_p = 1.0;  // Anderson–Darling
};

struct AndersonDarling {
  double a2 = 0.0;
  double a2_star = 0.0;
  double p_value = 1.0;
};

/// Normality test with estimated mean and variance (Stephens' modified
/// statistic, D'Agostino–Stephens p-value approximation).
inline AndersonDarling anderson_darling_normal(std::span<const double> values) {
  const std::size_t n = values.size();
  if (n < 8) throw DomainError("anderson_darling_normal: need at least 8 values");
  std::vector<double> x(values.begin(), values.end());
  std::sort(x.begin(), x.end());
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : x) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / (n - 1));
  if (!(sd > 0.0)) throw DomainError("anderson_darling_normal: zero variance");
  const boost::math::normal_distribution<double> N01;
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double zi = (x[i] - mean) / sd;
    const double zj = (x[n - 1 - i] - mean) / sd;
    const double lo = std::log(boost::math::cdf(N01, zi));
    const double hi = std::log(boost::math::cdf(boost::math::complement(N01, zj)));
    s += (2.0 * static_cast<double>(i) + 1.0) * (lo + hi);
  }
  AndersonDarling r;
  const double nn = static_cast<double>(n);
  r.a2 = -nn - s / nn;
  const double a = r.a2 * (1.0 + 0.75 / nn + 2.25 / (nn * nn));
  r.a2_star = a;
  if (a >= 0.6)
    r.p_value = std::exp(1.2937 - 5.709 * a + 0.0186 * a * a);
  else if (a >= 0.34)
    r.p_value = std::exp(0.9177 - 4.279 * a - 1.38 * a * a);
  else if (a >= 0.2)
    r.p_value = 1.0 - std::exp(-8.318 + 42.796 * a - 59.938 * a * a);
  else
    r.p_value = 1.0 - std::exp(-13.436 + 101.14 * a - 223.73 * a * a);
  r.p_value = std::clamp(r.p_value, 0.0, 1.0);
  return r;
}

inline Summary summarize(std::span<const double> values) {
  Summary s;
  s.n = values.size();
  if (s.n == 0) return s;
  const double n = static_cast<double>(s.n);
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double m2 = 0.0, m4 = 0.0;
  for (double v : values) {
    const double d = v - s.mean;
    m2 += d * d;
    m4 += d * d * d * d;
  }
  if (s.n > 1) {
    s.variance = m2 / (n - 1.0);
    s.std_error = std::sqrt(s.variance / n);
    const double mu2 = m2 / n, mu4 = m4 / n;
    s.variance_se = std::sqrt(std::max(0.0, (mu4 - (n - 3.0) / (n - 1.0) * mu2 * mu2) / n));
  }
  if (s.n >= 8 && s.variance > 0.0) s.normality_p = anderson_darling_normal(values).p_value;
  return s;
}

/// Kolmogorov distribution survival function P(K > λ).
inline double kolmogorov_sf(double lambda) {
  if (lambda <= 0.0) return 1.0;
  if (lambda < 1.18) {
    // √(2π)/λ Σ exp(−(2k−1)²π²/(8λ²)) is the CDF; it converges fast for small λ.
    double s = 0.0;
    for (int k = 1; k <= 20; ++k) {
      const double t = (2.0 * k - 1.0) * kPi / lambda;
      s += std::exp(-t * t / 8.0);
    }
    return std::clamp(1.0 - std::sqrt(kTwoPi) / lambda * s, 0.0, 1.0);
  }
  double s = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double t = 2.0 * std::exp(-2.0 * k * k * lambda * lambda);
    s += (k % 2 == 1) ? t : -t;
    if (t < 1e-18) break;
  }
  return std::clamp(s, 0.0, 1.0);
}

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

/// One-sample Kolmogorov–Smirnov test against a continuous CDF.
inline KsResult ks_one_sample(std::span<const double> values, const std::function<double(double)>& cdf) {
  std::vector<double> x(values.begin(), values.end());
  if (x.empty()) throw DomainError("ks_one_sample: empty sample");
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double F = cdf(x[i]);
    d = std::max({d, F - i / n, (i + 1) / n - F});
  }
  const double sn = std::sqrt(n);
  return {d, kolmogorov_sf((sn + 0.12 + 0.11 / sn) * d)};
}

inline KsResult ks_two_sample(std::span<const double> a, std::span<const double> b) {
  std::vector<double> x(a.begin(), a.end()), y(b.begin(), b.end());
  if (x.empty() || y.empty()) throw DomainError("ks_two_sample: empty sample");
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  const double n = static_cast<double>(x.size()), m = static_cast<double>(y.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < x.size() && j < y.size()) {
    const double t = std::min(x[i], y[j]);
    while (i < x.size() && x[i] <= t) ++i;
    while (j < y.size() && y[j] <= t) ++j;
    d = std::max(d, std::abs(i / n - j / m));
  }
  const double ne = std::sqrt(n * m / (n + m));
  return {d, kolmogorov_sf((ne + 0.12 + 0.11 / ne) * d)};
}

struct ChiSquare {
  double statistic = 0.0;
  int dof = 0;
  double p_value = 1.0;
  std::vector<double> counts;
};

/// Pearson test of binned angles against the cell probabilities `probs`.
inline ChiSquare chi_square_angles(std::span<const double> angles, std::span<const double> probs) {
  const std::size_t B = probs.size();
  if (B < 2) throw DomainError("chi_square_angles: need at least two bins");
  ChiSquare r;
  r.counts.assign(B, 0.0);
  for (double a : angles) {
    auto b = static_cast<std::size_t>(wrap_angle(a) / kTwoPi * static_cast<double>(B));
    r.counts[std::min(b, B - 1)] += 1.0;
  }
  const double n = static_cast<double>(angles.size());
  for (std::size_t b = 0; b < B; ++b) {
    const double e = n * probs[b];
    r.statistic += (r.counts[b] - e) * (r.counts[b] - e) / e;
  }
  r.dof = static_cast<int>(B) - 1;
  r.p_value = boost::math::cdf(boost::math::complement(boost::math::chi_squared_distribution<double>(r.dof), r.statistic));
  return r;
}

/// Exact 2-Wasserstein distance between the empirical law of `values` and
/// N(0, sigma2), via the quantile coupling.
inline double w2_to_normal(std::span<const double> values, double sigma2) {
  std::vector<double> x(values.begin(), values.end());
  if (x.empty()) throw DomainError("w2_to_normal: empty sample");
  if (!(sigma2 > 0.0)) throw DomainError("w2_to_normal: sigma2 must be positive");
  std::sort(x.begin(), x.end());
  const boost::math::normal_distribution<double> N01;
  const double sd = std::sqrt(sigma2);
  const double n = static_cast<double>(x.size());
  // On [a, b]: ∫Φ⁻¹ = φ(z_a) − φ(z_b) and ∫(Φ⁻¹)² = [u − zφ(z)]_a^b.
  auto edge = [&](std::size_t i, double& phi, double& zphi) {
    if (i == 0 || i == x.size()) {
      phi = 0.0;
      zphi = 0.0;
      return;
    }
    const double z = boost::math::quantile(N01, i / n);
    phi = boost::math::pdf(N01, z);
    zphi = z * phi;
  };
  double total = 0.0, pa, za;
  edge(0, pa, za);
  for (std::size_t i = 0; i < x.size(); ++i) {
    double pb, zb;
    edge(i + 1, pb, zb);
    const double I1 = pa - pb;
    const double I2 = (1.0 / n) - (zb - za);
    total += x[i] * x[i] / n - 2.0 * x[i] * sd * I1 + sigma2 * I2;
    pa = pb;
    za = zb;
  }
  return std::sqrt(std::max(total, 0.0));
}

/// Least-squares slope of log y against log x.
inline double loglog_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw DomainError("loglog_slope: need matching sizes >= 2");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw DomainError("loglog_slope: values must be positive");
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace htcg
