#pragma once

// Fourier-side primitives on the torus T = R / 2πZ.
//
// Conventions: a real function f is stored through its Hermitian Fourier
// coefficients f̂_k = ∫ f(x) e^{-ikx} dx/2π for 0 ≤ k ≤ K; the negative modes
// are implied by f̂_{-k} = conj(f̂_k). Grids are uniform, x_m = 2πm/M.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <vector>

#include <unsupported/Eigen/FFT>

#include "htcg/error.hpp"

namespace htcg {

using cplx = std::complex<double>;
inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Band-limited real function on the torus.
class TrigSeries {
public:
  TrigSeries() : c_(1, cplx{0.0, 0.0}) {}
  explicit TrigSeries(int max_mode) : c_(check_mode(max_mode) + 1, cplx{0.0, 0.0}) {}

  /// From non-negative modes c_0..c_K; the imaginary part of c_0 is dropped.
  explicit TrigSeries(std::vector<cplx> half) : c_(std::move(half)) {
    if (c_.empty()) c_.assign(1, cplx{0.0, 0.0});
    c_[0] = cplx{c_[0].real(), 0.0};
  }

  static TrigSeries constant(double c) {
    TrigSeries s(0);
    s.c_[0] = c;
    return s;
  }
  /// amp · cos(kx)
  static TrigSeries cosine(int k, double amp = 1.0) {
    if (k == 0) return constant(amp);
    TrigSeries s(k);
    s.c_[k] = cplx{amp / 2.0, 0.0};
    return s;
  }
  /// amp · sin(kx)
  static TrigSeries sine(int k, double amp = 1.0) {
    TrigSeries s(k);
    if (k > 0) s.c_[k] = cplx{0.0, -amp / 2.0};
    return s;
  }

  int max_mode() const { return static_cast<int>(c_.size()) - 1; }

  /// Coefficient of e^{ikx} for any integer k (zero outside the band).
  cplx coeff(int k) const {
    const int a = k < 0 ? -k : k;
    if (a > max_mode()) return {0.0, 0.0};
    return k < 0 ? std::conj(c_[a]) : c_[a];
  }

  /// Sets the coefficient of e^{ikx}, k ≥ 0; the mirror mode follows.
  void set(int k, cplx value) {
    if (k < 0) {
      k = -k;
      value = std::conj(value);
    }
    if (k > max_mode()) c_.resize(k + 1, cplx{0.0, 0.0});
    c_[k] = (k == 0) ? cplx{value.real(), 0.0} : value;
  }

  std::span<const cplx> half() const { return c_; }

  double mean() const { return c_[0].real(); }

  double operator()(double x) const {
    const cplx step = std::polar(1.0, x);
    cplx w = step;
    double acc = 0.0;
    for (std::size_t k = 1; k < c_.size(); ++k) {
      acc += (c_[k] * w).real();
      w *= step;
    }
    return c_[0].real() + 2.0 * acc;
  }

  /// Value and first derivative at x in one pass.
  std::pair<double, double> value_and_slope(double x) const {
    const cplx step = std::polar(1.0, x);
    cplx w = step;
    double v = 0.0, d = 0.0;
    for (std::size_t k = 1; k < c_.size(); ++k) {
      const cplx t = c_[k] * w;
      v += t.real();
      d -= static_cast<double>(k) * t.imag();
      w *= step;
    }
    return {c_[0].real() + 2.0 * v, 2.0 * d};
  }

  TrigSeries truncated(int K) const {
    std::vector<cplx> h(c_.begin(), c_.begin() + std::min<std::size_t>(c_.size(), check_mode(K) + 1));
    h.resize(K + 1, cplx{0.0, 0.0});
    return TrigSeries(std::move(h));
  }

  /// Largest k with |c_k| above `floor` (0 for constants).
  int effective_degree(double floor = 0.0) const {
    for (int k = max_mode(); k > 0; --k)
      if (std::abs(c_[k]) > floor) return k;
    return 0;
  }

  TrigSeries& operator+=(const TrigSeries& o) {
    if (o.max_mode() > max_mode()) c_.resize(o.c_.size(), cplx{0.0, 0.0});
    for (std::size_t k = 0; k < o.c_.size(); ++k) c_[k] += o.c_[k];
    return *this;
  }
  TrigSeries& operator-=(const TrigSeries& o) { return *this += (-1.0) * o; }
  TrigSeries& operator*=(double a) {
    for (auto& c : c_) c *= a;
    return *this;
  }
  friend TrigSeries operator+(TrigSeries a, const TrigSeries& b) { return a += b; }
  friend TrigSeries operator-(TrigSeries a, const TrigSeries& b) { return a -= b; }
  friend TrigSeries operator*(double s, TrigSeries a) { return a *= s; }
  friend TrigSeries operator*(TrigSeries a, double s) { return a *= s; }

private:
  static int check_mode(int K) {
    if (K < 0) throw DomainError("TrigSeries: negative max mode");
    return K;
  }
  std::vector<cplx> c_;
};

/// Real samples on the uniform grid x_m = 2πm/M, M a power of two ≥ 4.
class GridFn {
public:
  GridFn() : v_(4, 0.0) {}
  explicit GridFn(std::vector<double> values) : v_(std::move(values)) { check_size(v_.size()); }
  GridFn(std::size_t M, double fill) : v_(check_size(M), fill) {}

  std::size_t size() const { return v_.size(); }
  double node(std::size_t m) const { return kTwoPi * static_cast<double>(m) / static_cast<double>(v_.size()); }
  double operator[](std::size_t m) const { return v_[m]; }
  double& operator[](std::size_t m) { return v_[m]; }
  std::span<const double> values() const { return v_; }
  std::vector<double>& mutable_values() { return v_; }

  double min() const { return *std::min_element(v_.begin(), v_.end()); }
  double max() const { return *std::max_element(v_.begin(), v_.end()); }

  /// Trapezoid rule (1/M) Σ f(x_m), exact for trig polynomials of degree < M.
  double mean() const {
    double s = 0.0;
    for (double x : v_) s += x;
    return s / static_cast<double>(v_.size());
  }

  template <class F>
  static GridFn sample(std::size_t M, F&& f) {
    GridFn g(M, 0.0);
    for (std::size_t m = 0; m < M; ++m) g.v_[m] = f(g.node(m));
    return g;
  }

  template <class F>
  GridFn map(F&& f) const {
    GridFn g(*this);
    for (auto& x : g.v_) x = f(x);
    return g;
  }

  friend GridFn operator*(const GridFn& a, const GridFn& b) {
    require_same(a, b);
    GridFn g(a);
    for (std::size_t m = 0; m < g.size(); ++m) g.v_[m] *= b.v_[m];
    return g;
  }
  friend GridFn operator+(const GridFn& a, const GridFn& b) {
    require_same(a, b);
    GridFn g(a);
    for (std::size_t m = 0; m < g.size(); ++m) g.v_[m] += b.v_[m];
    return g;
  }
  friend GridFn operator-(const GridFn& a, const GridFn& b) {
    require_same(a, b);
    GridFn g(a);
    for (std::size_t m = 0; m < g.size(); ++m) g.v_[m] -= b.v_[m];
    return g;
  }
  friend GridFn operator*(double s, GridFn a) {
    for (auto& x : a.v_) x *= s;
    return a;
  }

private:
  static std::size_t check_size(std::size_t M) {
    if (M < 4 || (M & (M - 1)) != 0) throw DomainError("GridFn: size must be a power of two >= 4");
    return M;
  }
  static void require_same(const GridFn& a, const GridFn& b) {
    if (a.size() != b.size()) throw DomainError("GridFn: size mismatch");
  }
  std::vector<double> v_;
};

namespace detail {
inline Eigen::FFT<double>& fft_engine() {
  thread_local Eigen::FFT<double> engine;
  return engine;
}
}  // namespace detail

inline std::size_t next_pow2(std::size_t n) {
  std::size_t p = 4;
  while (p < n) p <<= 1;
  return p;
}

/// Synthesis onto M points; requires K ≤ M/2 - 1.
inline GridFn to_grid(const TrigSeries& f, std::size_t M) {
  const int K = f.max_mode();
  if (2 * static_cast<std::size_t>(K) + 2 > M) throw ResolutionError("to_grid: band limit exceeds M/2 - 1");
  std::vector<cplx> spec(M, cplx{0.0, 0.0});
  for (int k = 0; k <= K; ++k) {
    spec[k] = f.coeff(k);
    if (k > 0) spec[M - k] = f.coeff(-k);
  }
  std::vector<cplx> out;
  auto& fft = detail::fft_engine();
  fft.SetFlag(Eigen::FFT<double>::Unscaled);
  fft.inv(out, spec);
  fft.ClearFlag(Eigen::FFT<double>::Unscaled);
  std::vector<double> v(M);
  for (std::size_t m = 0; m < M; ++m) v[m] = out[m].real();
  return GridFn(std::move(v));
}

/// Analysis with spectral truncation to K ≤ M/2 - 1.
inline TrigSeries to_series(const GridFn& g, int K) {
  const std::size_t M = g.size();
  if (K < 0 || 2 * static_cast<std::size_t>(K) + 2 > M) throw ResolutionError("to_series: K must satisfy K <= M/2 - 1");
  std::vector<cplx> in(M);
  for (std::size_t m = 0; m < M; ++m) in[m] = cplx{g[m], 0.0};
  std::vector<cplx> out;
  detail::fft_engine().fwd(out, in);
  std::vector<cplx> half(K + 1);
  const double inv = 1.0 / static_cast<double>(M);
  for (int k = 0; k <= K; ++k) half[k] = out[k] * inv;
  return TrigSeries(std::move(half));
}

/// Exact product of two trig polynomials (degree Ka + Kb).
inline TrigSeries multiply(const TrigSeries& a, const TrigSeries& b) {
  const int K = a.max_mode() + b.max_mode();
  const std::size_t M = next_pow2(2 * static_cast<std::size_t>(K) + 2);
  return to_series(to_grid(a, M) * to_grid(b, M), K);
}

/// d^order/dx^order, multiplier (ik)^order.
inline TrigSeries derivative(const TrigSeries& f, int order = 1) {
  TrigSeries d(f.max_mode());
  for (int k = 1; k <= f.max_mode(); ++k) d.set(k, f.coeff(k) * std::pow(cplx{0.0, static_cast<double>(k)}, order));
  return d;
}

/// H(e^{ikx}) = i sgn(k) e^{ikx}; kills the mean.
inline TrigSeries hilbert_transform(const TrigSeries& f) {
  TrigSeries h(f.max_mode());
  for (int k = 1; k <= f.max_mode(); ++k) h.set(k, cplx{0.0, 1.0} * f.coeff(k));
  return h;
}

/// Logarithmic potential of ρ dx/2π under the kernel log|sin((x-y)/2)|^{-1}:
/// Û_0 = log(2) ρ̂_0 and Û_k = ρ̂_k / (2|k|).
inline TrigSeries log_potential(const TrigSeries& rho) {
  TrigSeries u(rho.max_mode());
  u.set(0, std::log(2.0) * rho.coeff(0));
  for (int k = 1; k <= rho.max_mode(); ++k) u.set(k, rho.coeff(k) / (2.0 * k));
  return u;
}

/// ∫ f g dx/2π for real f, g.
inline double l2_inner(const TrigSeries& f, const TrigSeries& g) {
  const int K = std::min(f.max_mode(), g.max_mode());
  double s = 0.0;
  for (int k = 1; k <= K; ++k) s += (f.coeff(k) * std::conj(g.coeff(k))).real();
  return f.mean() * g.mean() + 2.0 * s;
}

inline double l2_norm_sq(const TrigSeries& f) { return l2_inner(f, f); }

/// ‖ψ‖²_{H^{1/2}} = 2 Σ_{k≥1} k |ψ̂_k|².
inline double h_half_norm_sq(const TrigSeries& psi) {
  double s = 0.0;
  for (int k = 1; k <= psi.max_mode(); ++k) s += k * std::norm(psi.coeff(k));
  return 2.0 * s;
}

/// Sup-norm on a grid of at least 8·(K+1) points.
inline double sup_norm(const TrigSeries& f, std::size_t min_points = 256) {
  const std::size_t M = next_pow2(std::max<std::size_t>(min_points, 8 * (f.max_mode() + 1)));
  const GridFn g = to_grid(f, M);
  double s = 0.0;
  for (double v : g.values()) s = std::max(s, std::abs(v));
  return s;
}

/// Real trigonometric basis e_a, a = 0..2K-1: e_{2(k-1)} = cos kx and e_{2(k-1)+1} = sin kx.
inline TrigSeries basis_function(int a) {
  const int k = a / 2 + 1;
  return (a % 2 == 0) ? TrigSeries::cosine(k) : TrigSeries::sine(k);
}

/// Coordinates of the non-constant part of f in the basis above.
inline std::vector<double> basis_coordinates(const TrigSeries& f, int K) {
  std::vector<double> c(2 * static_cast<std::size_t>(K), 0.0);
  for (int k = 1; k <= K; ++k) {
    const cplx z = f.coeff(k);
    c[2 * (k - 1)] = 2.0 * z.real();
    c[2 * (k - 1) + 1] = -2.0 * z.imag();
  }
  return c;
}

inline TrigSeries from_basis_coordinates(std::span<const double> c) {
  const int K = static_cast<int>(c.size() / 2);
  TrigSeries f(K);
  for (int k = 1; k <= K; ++k) f.set(k, cplx{c[2 * (k - 1)] / 2.0, -c[2 * (k - 1) + 1] / 2.0});
  return f;
}

/// Principal representative of an angle in [0, 2π).
inline double wrap_angle(double x) {
  double y = std::fmod(x, kTwoPi);
  if (y < 0.0) y += kTwoPi;
  if (y >= kTwoPi) y = 0.0;
  return y;
}

}  // namespace htcg
