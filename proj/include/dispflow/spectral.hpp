#pragma once

// Fourier machinery on the periodic unit interval: transforms, derivatives,
// Fourier multipliers, and uniform-grid quadrature.

#include <fftw3.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace dispflow {

/// Sampled field on the uniform grid x_i = i/N: one row per node, one column
/// per ambient component.
using Field = Eigen::MatrixXd;
/// Half-spectrum coefficients (n = 0..N/2) per component, unnormalised.
using HalfSpectrum = Eigen::MatrixXcd;

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

inline bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

inline Eigen::VectorXd grid_nodes(int n) {
  return Eigen::VectorXd::LinSpaced(n, 0.0, 1.0 - 1.0 / n);
}

namespace detail {

class FftPlans {
 public:
  explicit FftPlans(int n) : n_(n) {
    std::vector<double> re(n);
    std::vector<fftw_complex> co(n / 2 + 1);
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    forward_ = fftw_plan_dft_r2c_1d(n, re.data(), co.data(), flags);
    backward_ = fftw_plan_dft_c2r_1d(n, co.data(), re.data(), flags);
  }
  FftPlans(const FftPlans&) = delete;
  FftPlans& operator=(const FftPlans&) = delete;
  ~FftPlans() {
    fftw_destroy_plan(forward_);
    fftw_destroy_plan(backward_);
  }

  // new-array execution is thread-safe once the plan exists
  void forward(const double* in, std::complex<double>* out) const {
    fftw_execute_dft_r2c(forward_, const_cast<double*>(in),
                         reinterpret_cast<fftw_complex*>(out));
  }
  // destroys `in`
  void backward(std::complex<double>* in, double* out) const {
    fftw_execute_dft_c2r(backward_, reinterpret_cast<fftw_complex*>(in), out);
  }
  int size() const { return n_; }

 private:
  int n_;
  fftw_plan forward_ = nullptr;
  fftw_plan backward_ = nullptr;
};

inline const FftPlans& plans_for(int n) {
  static std::mutex mutex;
  static std::map<int, std::unique_ptr<FftPlans>> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[n];
  if (!slot) slot = std::make_unique<FftPlans>(n);
  return *slot;
}

}  // namespace detail

inline HalfSpectrum forward_transform(const Field& f) {
  const int n = static_cast<int>(f.rows());
  const auto& plans = detail::plans_for(n);
  HalfSpectrum out(n / 2 + 1, f.cols());
  for (Eigen::Index c = 0; c < f.cols(); ++c) plans.forward(f.col(c).data(), out.col(c).data());
  return out;
}

/// Inverse of forward_transform, including the 1/N normalisation.
inline Field inverse_transform(HalfSpectrum spec, int n) {
  const auto& plans = detail::plans_for(n);
  Field out(n, spec.cols());
  for (Eigen::Index c = 0; c < spec.cols(); ++c) plans.backward(spec.col(c).data(), out.col(c).data());
  out /= static_cast<double>(n);
  return out;
}

/// Multiplies mode n (0 <= n <= N/2) of every component by symbol(n).
template <class Symbol>
Field apply_symbol(const Field& f, Symbol&& symbol) {
  const int n = static_cast<int>(f.rows());
  HalfSpectrum spec = forward_transform(f);
  for (int k = 0; k <= n / 2; ++k) spec.row(k) *= std::complex<double>(symbol(k));
  return inverse_transform(std::move(spec), n);
}

/// Symbol of d^order/dx^order at mode k on a grid of n points.
inline std::complex<double> derivative_symbol(int k, int order, int n) {
  if (order % 2 == 1 && 2 * k == n) return 0.0;
  return std::pow(std::complex<double>(0.0, kTwoPi * k), order);
}

inline Field spectral_derivative(const Field& f, int order) {
  if (order < 1 || order > 4) throw std::invalid_argument("spectral_derivative: order must be in [1,4]");
  const int n = static_cast<int>(f.rows());
  return apply_symbol(f, [&](int k) { return derivative_symbol(k, order, n); });
}

/// Heat-type semigroup of u_t = -eps u_xxxx: mode n is damped by
/// exp(-eps t (2 pi n)^4).
inline Field semigroup_apply(double eps, double t, const Field& f) {
  if (t == 0.0) return f;
  return apply_symbol(f, [&](int k) { return std::exp(-eps * t * std::pow(kTwoPi * k, 4)); });
}

/// sup over 1 <= n <= nmax of |2 pi n|^3 exp(-eps t (2 pi n)^4).
inline double smoothing_sup(double eps, double t, int nmax) {
  double best = 0.0;
  for (int n = 1; n <= nmax; ++n) {
    const double k = kTwoPi * n;
    best = std::max(best, k * k * k * std::exp(-eps * t * k * k * k * k));
  }
  return best;
}

/// sup over xi >= 0 of xi^3 exp(-xi^4), maximized on a uniform grid.
inline double smoothing_constant(double step = 1e-6) {
  double best = 0.0;
  for (double xi = 0.0; xi <= 3.0; xi += step) best = std::max(best, xi * xi * xi * std::exp(-xi * xi * xi * xi));
  return best;
}

/// Zeroes every mode with |n| > cutoff.
inline Field lowpass(const Field& f, int cutoff) {
  if (cutoff >= f.rows() / 2) return f;
  return apply_symbol(f, [&](int k) { return k <= cutoff ? 1.0 : 0.0; });
}

/// Full coefficient table c_n for n in [-N/2, N/2) with f(x) = sum c_n e^{2 pi i n x}.
struct SpectralCoeffs {
  int n = 0;
  Eigen::MatrixXcd table;  // row (k + N/2) holds frequency k

  std::complex<double> operator()(int k, int comp) const { return table(k + n / 2, comp); }

  static SpectralCoeffs from_samples(const Field& f) {
    SpectralCoeffs out;
    out.n = static_cast<int>(f.rows());
    const HalfSpectrum half = forward_transform(f) / static_cast<double>(out.n);
    out.table.resize(out.n, f.cols());
    for (int k = -out.n / 2; k < out.n / 2; ++k) {
      out.table.row(k + out.n / 2) = k >= 0 ? Eigen::RowVectorXcd(half.row(k))
                                            : Eigen::RowVectorXcd(half.row(-k).conjugate());
    }
    return out;
  }

  /// Real part of the trigonometric interpolant; exact inverse when the
  /// coefficients came from real samples.
  Field to_samples() const {
    HalfSpectrum half(n / 2 + 1, table.cols());
    for (int k = 0; k < n / 2; ++k) half.row(k) = table.row(k + n / 2) * static_cast<double>(n);
    half.row(n / 2) = table.row(0).real().cast<std::complex<double>>() * static_cast<double>(n);
    return inverse_transform(std::move(half), n);
  }
};

/// Band-limited resampling of a periodic field onto m points (zero-padding or
/// truncating the spectrum). The Nyquist mode is split symmetrically.
inline Field resample(const Field& f, int m) {
  const int n = static_cast<int>(f.rows());
  if (m == n) return f;
  HalfSpectrum src = forward_transform(f) / static_cast<double>(n);
  HalfSpectrum dst = HalfSpectrum::Zero(m / 2 + 1, f.cols());
  const int keep = std::min(n, m) / 2;
  for (int k = 0; k < keep; ++k) dst.row(k) = src.row(k);
  if (m > n) dst.row(n / 2) = 0.5 * src.row(n / 2);
  else dst.row(m / 2) = 2.0 * src.row(m / 2).real().cast<std::complex<double>>();
  return inverse_transform(dst * static_cast<double>(m), m);
}

/// Pointwise Euclidean dot product of two fields.
inline Eigen::VectorXd dot_rows(const Field& x, const Field& y) {
  return (x.array() * y.array()).rowwise().sum();
}

/// Trapezoid rule on the uniform periodic grid.
inline double integrate(const Eigen::VectorXd& g) { return g.mean(); }

inline double inner(const Field& x, const Field& y) { return integrate(dot_rows(x, y)); }

inline double l2_norm(const Field& f) { return std::sqrt(inner(f, f)); }

/// Discrete H^1 norm (||f||^2 + ||f_x||^2)^{1/2} of a periodic field.
inline double h1_norm(const Field& f) {
  const Field fx = spectral_derivative(f, 1);
  return std::sqrt(inner(f, f) + inner(fx, fx));
}

inline double sup_norm(const Field& f) { return f.rowwise().norm().maxCoeff(); }

}  // namespace dispflow
