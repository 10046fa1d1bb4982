#pragma once

// The N-particle Gibbs measure
//     dP_N ∝ exp((2β/N) Σ_{i<j} log|e^{ix_i} − e^{ix_j}| − Σ V(x_i)) dx,
// its samplers, and the linear and quadratic statistics built on it.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "htcg/density.hpp"
#include "htcg/equilibrium.hpp"
#include "htcg/parallel.hpp"
#include "htcg/rng.hpp"
#include "htcg/spectral.hpp"
#include "htcg/stats.hpp"
#include "htcg/torus.hpp"

namespace htcg {

inline constexpr double kCoincidenceGap = 1e-12;

struct Configuration {
  std::vector<double> angles;
  std::size_t N() const { return angles.size(); }
};

enum class Algorithm { MH, MALA, IID0 };

inline const char* algorithm_name(Algorithm a) {
  switch (a) {
    case Algorithm::MH: return "MH";
    case Algorithm::MALA: return "MALA";
    case Algorithm::IID0: return "IID0";
  }
  return "?";
}

struct ChainSpec {
  int N = 100;
  double beta = 1.0;
  PotentialSpec potential = PotentialSpec::zero();
  Algorithm algorithm = Algorithm::MH;
  double step_size = 0.0;  // 0: default (MH σ = 1, MALA h = 0.5/N), tuned during burn-in
  int n_steps = 50;        // sweeps (MH), moves (MALA) or draws (IID0) after burn-in
  int burn_in = 50;
  int thinning = 1;
  std::uint64_t seed = 1;
  bool adapt = true;

  void validate() const {
    if (N < 1) throw DomainError("ChainSpec: N must be >= 1");
    if (!(beta >= 0.0)) throw DomainError("ChainSpec: beta must be >= 0");
    if (algorithm == Algorithm::IID0 && beta != 0.0) throw DomainError("ChainSpec: IID0 requires beta = 0");
    if (step_size < 0.0) throw DomainError("ChainSpec: step_size must be > 0");
    if (n_steps < 1 || burn_in < 0 || thinning < 1) throw DomainError("ChainSpec: invalid step counts");
  }
};

/// (2β/N) Σ_{i<j} log|e^{ix_i} − e^{ix_j}| − Σ V(x_i); −∞ on coincidences.
inline double log_density_unnorm(const Configuration& x, double beta, const PotentialSpec& V) {
  const std::size_t N = x.N();
  double pair = 0.0, pot = 0.0;
  for (std::size_t i = 0; i < N; ++i) {
    pot += V.V(x.angles[i]);
    for (std::size_t j = i + 1; j < N; ++j) {
      const double s = std::abs(2.0 * std::sin(0.5 * (x.angles[i] - x.angles[j])));
      if (s < kCoincidenceGap) return -std::numeric_limits<double>::infinity();
      pair += std::log(s);
    }
  }
  return (beta > 0.0 ? 2.0 * beta / static_cast<double>(N) * pair : 0.0) - pot;
}

namespace detail {
// Returns false on a near-coincident pair.
inline bool drift_into(std::span<const double> x, double beta, const TrigSeries& dV, std::span<double> out) {
  const std::size_t N = x.size();
  const double c = beta / static_cast<double>(N);
  for (std::size_t j = 0; j < N; ++j) out[j] = -dV(x[j]);
  if (beta == 0.0) return true;
  for (std::size_t j = 0; j < N; ++j) {
    for (std::size_t i = j + 1; i < N; ++i) {
      const double h = 0.5 * (x[j] - x[i]);
      const double s = std::sin(h);
      if (std::abs(2.0 * s) < kCoincidenceGap) return false;
      const double ct = c * std::cos(h) / s;
      out[j] += ct;
      out[i] -= ct;
    }
  }
  return true;
}
}  // namespace detail

/// Gradient of log_density_unnorm: (2β/N) Σ_{i≠j} 1/(2 tan((x_j − x_i)/2)) − V′(x_j).
inline std::vector<double> drift(const Configuration& x, double beta, const PotentialSpec& V) {
  std::vector<double> out(x.N());
  if (!detail::drift_into(x.angles, beta, derivative(V.V), out)) throw DomainError("drift: near-coincident pair");
  return out;
}

/// Exact i.i.d. sampler for the density ρ (ρ-convention) by inverse CDF.
class InverseCdfSampler {
public:
  explicit InverseCdfSampler(const Density& rho, std::size_t table = 4096) {
    const int K = std::max(1, rho.series.effective_degree(1e-17 * std::abs(rho.series.mean())));
    rho_ = rho.series.truncated(K);
    uniform_ = rho_.effective_degree(1e-15) == 0;
    // A(x) = Σ_{k≠0} ρ̂_k e^{ikx}/(ik), so F(x) = (ρ̂_0 x + A(x) − A(0))/2π.
    anti_ = TrigSeries(K);
    for (int k = 1; k <= K; ++k) anti_.set(k, rho_.coeff(k) / cplx{0.0, static_cast<double>(k)});
    a0_ = anti_(0.0);
    nodes_.resize(table + 1);
    cdf_.resize(table + 1);
    for (std::size_t m = 0; m <= table; ++m) {
      nodes_[m] = kTwoPi * static_cast<double>(m) / static_cast<double>(table);
      cdf_[m] = cdf(nodes_[m]);
    }
    cdf_.front() = 0.0;
    cdf_.back() = 1.0;
  }

  double cdf(double x) const { return (rho_.mean() * x + anti_(x) - a0_) / kTwoPi; }

  double quantile(double u) const {
    if (uniform_) return kTwoPi * u;
    const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    const std::size_t hi = std::clamp<std::size_t>(static_cast<std::size_t>(it - cdf_.begin()), 1, cdf_.size() - 1);
    double a = nodes_[hi - 1], b = nodes_[hi];
    double x = a + (b - a) * (u - cdf_[hi - 1]) / std::max(cdf_[hi] - cdf_[hi - 1], 1e-300);
    for (int it2 = 0; it2 < 30; ++it2) {
      const double f = cdf(x) - u;
      if (f > 0.0) b = x; else a = x;
      const double step = f / (rho_(x) / kTwoPi);
      double nx = x - step;
      if (!(nx > a && nx < b)) nx = 0.5 * (a + b);
      if (std::abs(nx - x) < 1e-15) {
        x = nx;
        break;
      }
      x = nx;
    }
    return wrap_angle(x);
  }

  double draw(Rng& rng) const { return quantile(rng.uniform()); }

private:
  TrigSeries rho_, anti_;
  double a0_ = 0.0;
  bool uniform_ = false;
  std::vector<double> nodes_, cdf_;
};

struct ChainResult {
  std::vector<Configuration> samples;
  Configuration final_state;
  double acceptance = 1.0;
  double step_size = 0.0;
  std::uint64_t seed = 0, chain_id = 0;
  std::vector<std::string> warnings;
};

namespace detail {

class MhKernel {
public:
  MhKernel(const std::vector<double>& x, double beta, const PotentialSpec& V)
      : x_(x), c_(x.size()), s_(x.size()), beta_(beta), V_(V.V) {
    for (std::size_t i = 0; i < x_.size(); ++i) {
      c_[i] = std::cos(x_[i]);
      s_[i] = std::sin(x_[i]);
    }
  }

  // Σ_{i≠j} (log|e^{iy} − e^{ix_i}| − log|e^{ix_j} − e^{ix_i}|) in one pass;
  // squared distances are multiplied in blocks of 8 before each logarithm.
  // Returns false when the proposal comes within the coincidence gap.
  bool log_ratio(std::size_t j, double cy, double sy, double& out) const {
    constexpr double floor2 = kCoincidenceGap * kCoincidenceGap;
    const double cx = c_[j], sx = s_[j];
    double acc = 0.0, lo = 4.0;
    auto range = [&](std::size_t b, std::size_t e) {
      std::size_t i = b;
      for (; i + 8 <= e; i += 8) {
        double dn[8], dd[8];
        for (int k = 0; k < 8; ++k) {
          const double an = cy - c_[i + k], bn = sy - s_[i + k];
          const double ao = cx - c_[i + k], bo = sx - s_[i + k];
          dn[k] = an * an + bn * bn;
          dd[k] = ao * ao + bo * bo;
        }
        const double m = std::min(std::min(std::min(dn[0], dn[1]), std::min(dn[2], dn[3])),
                                  std::min(std::min(dn[4], dn[5]), std::min(dn[6], dn[7])));
        lo = std::min(lo, m);
        const double pn = ((dn[0] * dn[1]) * (dn[2] * dn[3])) * ((dn[4] * dn[5]) * (dn[6] * dn[7]));
        const double po = ((dd[0] * dd[1]) * (dd[2] * dd[3])) * ((dd[4] * dd[5]) * (dd[6] * dd[7]));
        acc += std::log(pn) - std::log(po);
      }
      double pn = 1.0, po = 1.0;
      for (; i < e; ++i) {
        const double an = cy - c_[i], bn = sy - s_[i];
        const double ao = cx - c_[i], bo = sx - s_[i];
        const double dn = an * an + bn * bn;
        lo = std::min(lo, dn);
        pn *= dn;
        po *= ao * ao + bo * bo;
      }
      acc += std::log(pn) - std::log(po);
    };
    range(0, j);
    range(j + 1, x_.size());
    out = 0.5 * acc;
    return lo >= floor2;
  }

  // One sweep of single-site wrapped-Gaussian proposals; returns accepts.
  int sweep(Rng& rng, double sigma) {
    const std::size_t N = x_.size();
    const double w = 2.0 * beta_ / static_cast<double>(N);
    int accepted = 0;
    for (std::size_t j = 0; j < N; ++j) {
      const double y = wrap_angle(x_[j] + sigma * rng.normal());
      const double cy = std::cos(y), sy = std::sin(y);
      double delta = -(V_(y) - V_(x_[j]));
      const double u = rng.uniform();
      if (beta_ > 0.0) {
        double lr;
        if (!log_ratio(j, cy, sy, lr)) continue;
        delta += w * lr;
      }
      if (std::log(u) < delta) {
        x_[j] = y;
        c_[j] = cy;
        s_[j] = sy;
        ++accepted;
      }
    }
    return accepted;
  }

  const std::vector<double>& state() const { return x_; }

private:
  std::vector<double> x_, c_, s_;
  double beta_;
  TrigSeries V_;
};

class MalaKernel {
public:
  MalaKernel(const std::vector<double>& x, double beta, const PotentialSpec& V)
      : x_(x), beta_(beta), V_(V), dV_(derivative(V.V)), d_(x.size()) {
    if (!drift_into(x_, beta_, dV_, d_)) throw DomainError("MALA: initial state has a near-coincident pair");
    lp_ = log_density_unnorm(Configuration{x_}, beta_, V_);
  }

  // One full-vector Langevin proposal; the proposal density uses the
  // unwrapped displacement, which is symmetric under reversal.
  bool step(Rng& rng, double h) {
    const std::size_t N = x_.size();
    std::vector<double> disp(N), y(N), dy(N);
    const double sd = std::sqrt(2.0 * h);
    for (std::size_t j = 0; j < N; ++j) {
      disp[j] = h * d_[j] + sd * rng.normal();
      y[j] = wrap_angle(x_[j] + disp[j]);
    }
    const double u = rng.uniform();
    if (!drift_into(y, beta_, dV_, dy)) return false;
    const double lpy = log_density_unnorm(Configuration{y}, beta_, V_);
    if (!std::isfinite(lpy)) return false;
    double fwd = 0.0, bwd = 0.0;
    for (std::size_t j = 0; j < N; ++j) {
      const double a = disp[j] - h * d_[j];
      const double b = -disp[j] - h * dy[j];
      fwd += a * a;
      bwd += b * b;
    }
    const double log_alpha = lpy - lp_ + (fwd - bwd) / (4.0 * h);
    if (std::log(u) < log_alpha) {
      x_ = std::move(y);
      d_ = std::move(dy);
      lp_ = lpy;
      return true;
    }
    return false;
  }

  const std::vector<double>& state() const { return x_; }

private:
  std::vector<double> x_;
  double beta_;
  PotentialSpec V_;
  TrigSeries dV_;
  std::vector<double> d_;
  double lp_ = 0.0;
};

inline Configuration iid_configuration(const InverseCdfSampler& s, int N, Rng& rng) {
  Configuration c;
  c.angles.resize(N);
  for (auto& a : c.angles) a = s.draw(rng);
  return c;
}

}  // namespace detail

/// Runs one chain keyed by (spec.seed, chain_id). The chain starts from
/// i.i.d. draws of μ_0^V; its step size is tuned during burn-in only.
inline ChainResult run_chain(const ChainSpec& spec, std::uint64_t chain_id, bool keep_samples = true) {
  spec.validate();
  Rng rng(spec.seed, chain_id);
  const InverseCdfSampler ref(spec.potential.reference_density(256, 1024));
  ChainResult out;
  out.seed = spec.seed;
  out.chain_id = chain_id;
  auto keep = [&](const std::vector<double>& state, int t) {
    if (keep_samples && (t + 1) % spec.thinning == 0) out.samples.push_back(Configuration{state});
  };

  if (spec.algorithm == Algorithm::IID0) {
    for (int t = 0; t < spec.n_steps; ++t) {
      out.final_state = detail::iid_configuration(ref, spec.N, rng);
      keep(out.final_state.angles, t);
    }
    return out;
  }

  const Configuration start = detail::iid_configuration(ref, spec.N, rng);
  const double N = static_cast<double>(spec.N);
  if (spec.algorithm == Algorithm::MH) {
    double sigma = spec.step_size > 0.0 ? spec.step_size : 1.0;
    constexpr double target = 0.44, sigma_max = kPi;
    detail::MhKernel k(start.angles, spec.beta, spec.potential);
    int batch_acc = 0, batch_n = 0;
    for (int t = 0; t < spec.burn_in; ++t) {
      batch_acc += k.sweep(rng, sigma);
      batch_n += spec.N;
      if (spec.adapt && (t + 1) % 5 == 0) {
        sigma = std::clamp(sigma * std::exp(static_cast<double>(batch_acc) / batch_n - target), 1e-6, sigma_max);
        batch_acc = batch_n = 0;
      }
    }
    long acc = 0;
    for (int t = 0; t < spec.n_steps; ++t) {
      acc += k.sweep(rng, sigma);
      keep(k.state(), t);
    }
    out.final_state = Configuration{k.state()};
    out.acceptance = static_cast<double>(acc) / (static_cast<double>(spec.n_steps) * N);
    out.step_size = sigma;
  } else {
    double h = spec.step_size > 0.0 ? spec.step_size : 0.5 / N;
    constexpr double target = 0.57;
    detail::MalaKernel k(start.angles, spec.beta, spec.potential);
    int batch_acc = 0, batch_n = 0;
    for (int t = 0; t < spec.burn_in; ++t) {
      batch_acc += k.step(rng, h) ? 1 : 0;
      ++batch_n;
      if (spec.adapt && batch_n == 20) {
        h = std::clamp(h * std::exp(2.0 * (static_cast<double>(batch_acc) / batch_n - target)), 1e-9, 1.0);
        batch_acc = batch_n = 0;
      }
    }
    long acc = 0;
    for (int t = 0; t < spec.n_steps; ++t) {
      acc += k.step(rng, h) ? 1 : 0;
      keep(k.state(), t);
    }
    out.final_state = Configuration{k.state()};
    out.acceptance = static_cast<double>(acc) / spec.n_steps;
    out.step_size = h;
  }
  if (out.acceptance < 0.05 || out.acceptance > 0.95)
    out.warnings.push_back("acceptance rate " + std::to_string(out.acceptance) + " outside [0.05, 0.95]");
  return out;
}

/// Retained configurations of one chain.
inline std::vector<Configuration> sample(const ChainSpec& spec, std::uint64_t chain_id = 0) {
  return run_chain(spec, chain_id, true).samples;
}

struct StatSeries {
  std::string name;
  int N = 0;
  double beta = 0.0;
  std::uint64_t seed_base = 0;
  std::vector<double> values;
  double mean_acceptance = 0.0;
  std::vector<std::string> warnings;

  Summary summary() const { return summarize(values); }
};

/// One value of `stat` per independent chain, taken at the chain's final
/// state; chains are indexed 0..n_chains−1 and reduced in that order.
template <class Stat>
StatSeries independent_statistic(const ChainSpec& spec, std::size_t n_chains, Stat&& stat, std::string name,
                                 unsigned workers = 0) {
  struct One {
    double value;
    double acceptance;
    std::vector<std::string> warnings;
  };
  const auto parts = parallel_map(
      n_chains,
      [&](std::size_t c) {
        const ChainResult r = run_chain(spec, c, false);
        return One{stat(r.final_state), r.acceptance, r.warnings};
      },
      workers);
  StatSeries s;
  s.name = std::move(name);
  s.N = spec.N;
  s.beta = spec.beta;
  s.seed_base = spec.seed;
  s.values.reserve(n_chains);
  double acc = 0.0;
  for (const auto& p : parts) {
    s.values.push_back(p.value);
    acc += p.acceptance;
    for (const auto& w : p.warnings) s.warnings.push_back(w);
  }
  s.mean_acceptance = n_chains ? acc / static_cast<double>(n_chains) : 0.0;
  return s;
}

/// ν_N(ψ) = (1/√N) Σ ψ(x_i) − √N ∫ψ dμ.
inline double nu_N(const Configuration& x, const TrigSeries& psi, const Density& rho) {
  const double N = static_cast<double>(x.N());
  double s = 0.0;
  for (double a : x.angles) s += psi(a);
  return s / std::sqrt(N) - std::sqrt(N) * integrate(psi, rho);
}

inline double nu_N(const Configuration& x, const TrigSeries& psi, const EquilibriumResult& eq) {
  return nu_N(x, psi, eq.density);
}

/// Precomputed pieces of ζ_N(φ) for a fixed φ and equilibrium.
struct ZetaKernel {
  TrigSeries dphi, ddphi, xi;  // φ′, φ″, Ξφ′
  double xi_mean = 0.0;        // ∫ Ξφ′ dμ

  ZetaKernel(const TrigSeries& phi, const EquilibriumResult& eq)
      : dphi(derivative(phi)), ddphi(derivative(phi, 2)), xi(apply_Xi(derivative(phi), eq)),
        xi_mean(integrate(xi, eq.density)) {}

  /// ∬ k_φ dν_N dν_N − ∫φ″ dμ̂_N with k_φ(x, y) = (φ′(x) − φ′(y))/(2 tan((x − y)/2)).
  double operator()(const Configuration& x) const {
    const std::size_t N = x.N();
    std::vector<double> d1(N);
    for (std::size_t i = 0; i < N; ++i) d1[i] = dphi(x.angles[i]);
    double pairs = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      for (std::size_t j = i + 1; j < N; ++j) {
        const double d = std::remainder(x.angles[i] - x.angles[j], kTwoPi);
        pairs += (std::abs(d) < 1e-9) ? ddphi(x.angles[j] + 0.5 * d) : (d1[i] - d1[j]) / (2.0 * std::tan(0.5 * d));
      }
    }
    double cross = 0.0;
    for (double a : x.angles) cross += xi(a);
    const double n = static_cast<double>(N);
    return 2.0 * pairs / n - 2.0 * cross + n * xi_mean;
  }
};

inline double zeta_N(const Configuration& x, const TrigSeries& phi, const EquilibriumResult& eq) {
  return ZetaKernel(phi, eq)(x);
}

struct GeneratorGap {
  double lhs = 0.0;    // 𝐋ν_N(φ)
  double rhs = 0.0;    // −ν_N(ℒφ) + (β/√N) ζ_N(φ)
  double scale = 0.0;  // largest term
  double gap = 0.0;    // |lhs − rhs| / scale
};

/// Precomputed ℒφ (truncated to K_out) and ζ pieces for repeated checks.
class GeneratorCheck {
public:
  GeneratorCheck(const TrigSeries& phi, const EquilibriumResult& eq, int K_out = 0)
      : eq_(&eq), dphi_(derivative(phi)), ddphi_(derivative(phi, 2)), dV_(derivative(eq.potential.V)),
        Lphi_(apply_L(phi, eq, K_out)), zeta_(phi, eq) {}

  GeneratorGap operator()(const Configuration& x) const {
    const std::size_t N = x.N();
    const double n = static_cast<double>(N), sn = std::sqrt(n), beta = eq_->beta;
    double lap = 0.0, pot = 0.0, inter = 0.0;
    std::vector<double> d1(N);
    for (std::size_t j = 0; j < N; ++j) {
      d1[j] = dphi_(x.angles[j]);
      lap += ddphi_(x.angles[j]);
      pot += d1[j] * dV_(x.angles[j]);
    }
    for (std::size_t j = 0; j < N; ++j)
      for (std::size_t i = j + 1; i < N; ++i) {
        const double h = 0.5 * (x.angles[j] - x.angles[i]);
        inter += (d1[j] - d1[i]) * std::cos(h) / std::sin(h);
      }
    inter *= beta / n;
    GeneratorGap g;
    g.lhs = (lap + inter - pot) / sn;
    const double nl = nu_N(x, Lphi_, eq_->density);
    const double zt = beta / sn * zeta_(x);
    g.rhs = -nl + zt;
    g.scale = std::max({std::abs(lap) / sn, std::abs(inter) / sn, std::abs(pot) / sn, std::abs(nl), std::abs(zt), 1e-300});
    g.gap = std::abs(g.lhs - g.rhs) / g.scale;
    return g;
  }

private:
  const EquilibriumResult* eq_;
  TrigSeries dphi_, ddphi_, dV_, Lphi_;
  ZetaKernel zeta_;
};

inline GeneratorGap generator_identity_gap(const Configuration& x, const TrigSeries& phi, const EquilibriumResult& eq,
                                           int K_out = 0) {
  return GeneratorCheck(phi, eq, K_out)(x);
}

}  // namespace htcg
