#pragma once

// Structural identities behind the energy estimates, checked numerically:
//   a4:  int g(nabla^{l+3} u_x, nabla^l u_x) dx = 0
//   a5:  int g(nabla^{l+1} J nabla u_x, nabla^l u_x) dx = 0
//   b6:  g(R(X,Y)Z, W) = g(R(W,Z)Y, X)
//   a1:  nabla_t nabla^k u_x = nabla^{k+1} u_t + sum_j nabla^{k-1-j} R(u_t, u_x) nabla^j u_x
// and the parallel complex structure, p(u) d/dx (J X) = J p(u) d/dx X.

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "dispflow/curve.hpp"
#include "dispflow/errors.hpp"
#include "dispflow/manifold.hpp"
#include "dispflow/spectral.hpp"

namespace dispflow {

inline constexpr int kMaxIdentityLevel = 2;

/// Which discretization of nabla_x the a4/a5 checks exercise. Intrinsic
/// p(u) D is skew-adjoint on the grid, so it satisfies a4 to rounding at
/// any resolution; the extrinsic form is the one assembled in the flow.
enum class TowerForm { Extrinsic, Intrinsic };

namespace detail {

inline std::vector<Field> tower(const ClosedCurve& c, int depth, TowerForm form) {
  return form == TowerForm::Extrinsic ? extrinsic_tower(c, depth) : covariant_tower(c, depth);
}

inline Field nabla(const ClosedCurve& c, const Field& u_x, const Field& f, TowerForm form) {
  const Field fx = spectral_derivative(f, 1);
  return form == TowerForm::Extrinsic ? Field(fx - c.manifold.second_form_field(c.samples, u_x, f))
                                      : c.manifold.tangent_part(c.samples, fx);
}

}  // namespace detail

/// |int g(nabla^{l+3} u_x, nabla^l u_x) dx|.
inline double a4_residual(const ClosedCurve& c, int l, TowerForm form = TowerForm::Extrinsic) {
  if (l < 0 || l > kMaxIdentityLevel) throw std::invalid_argument("a4_residual: l must be in [0,2]");
  const auto t = detail::tower(c, l + 3, form);
  return std::abs(inner(t[l + 3], t[l]));
}

/// |int g(nabla^{l+1} (J nabla u_x), nabla^l u_x) dx|.
inline double a5_residual(const ClosedCurve& c, int l, TowerForm form = TowerForm::Extrinsic) {
  if (l < 0 || l > kMaxIdentityLevel) throw std::invalid_argument("a5_residual: l must be in [0,2]");
  const auto t = detail::tower(c, std::max(l, 1), form);
  Field w = c.manifold.rotate_field(c.samples, t[1]);
  for (int k = 0; k <= l; ++k) w = detail::nabla(c, t[0], w, form);
  return std::abs(inner(w, t[l]));
}

/// Largest |g(R(X,Y)Z,W) - g(R(W,Z)Y,X)| over `count` random tangent
/// quadruples at the curve samples.
inline double b6_residual(const ClosedCurve& c, std::uint64_t seed, int count = 64) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double k = c.manifold.gaussian_curvature();
  auto random_tangent = [&] {
    Field f(c.size(), c.dim());
    for (int i = 0; i < f.rows(); ++i)
      for (int j = 0; j < f.cols(); ++j) f(i, j) = normal(rng);
    return c.manifold.tangent_part(c.samples, f);
  };
  double worst = 0.0;
  for (int q = 0; q < count; ++q) {
    const Field x = random_tangent(), y = random_tangent(), z = random_tangent(), w = random_tangent();
    const Eigen::VectorXd lhs = dot_rows(curvature_apply(k, x, y, z), w);
    const Eigen::VectorXd rhs = dot_rows(curvature_apply(k, w, z, y), x);
    worst = std::max(worst, (lhs - rhs).cwiseAbs().maxCoeff());
  }
  return worst;
}

/// Sup-norm of p(u) d/dx (J X) - J p(u) d/dx X for a tangent field X,
/// relative to the sup-norm of either side.
inline double kahler_residual(const ClosedCurve& c, const Field& x) {
  c.require_on_manifold();
  require_tangent(c, x);
  const Manifold& m = c.manifold;
  const Field lhs = m.tangent_part(c.samples, spectral_derivative(m.rotate_field(c.samples, x), 1));
  const Field rhs = m.rotate_field(c.samples, m.tangent_part(c.samples, spectral_derivative(x, 1)));
  const double scale = std::max(sup_norm(lhs), sup_norm(rhs));
  return scale > 0.0 ? sup_norm(lhs - rhs) / scale : sup_norm(lhs - rhs);
}

// ---------------------------------------------------------------------------
// Commutator identity along a one-parameter family of curves
// ---------------------------------------------------------------------------

using CurvePath = std::function<ClosedCurve(double)>;

/// L^2 residual of the commutator identity at order k and path parameter s,
/// with all t-derivatives replaced by centred differences of step h.
inline double a1_residual(const CurvePath& path, double s, double h, int k) {
  if (k < 1 || k > kMaxTowerDepth - 1) throw std::invalid_argument("a1_residual: k out of range");
  const ClosedCurve mid = path(s), plus = path(s + h), minus = path(s - h);
  const Manifold& m = mid.manifold;
  const double kk = m.gaussian_curvature();

  const Field ut = m.tangent_part(mid.samples, (plus.samples - minus.samples) / (2.0 * h));
  const Field lhs =
      m.tangent_part(mid.samples, (covariant_tower(plus, k)[k] - covariant_tower(minus, k)[k]) / (2.0 * h));

  const auto tower = covariant_tower(mid, k);
  auto nabla = [&](Field f, int times) {
    for (int i = 0; i < times; ++i) f = m.tangent_part(mid.samples, spectral_derivative(f, 1));
    return f;
  };
  Field rhs = nabla(ut, k + 1);
  for (int j = 0; j < k; ++j) rhs += nabla(curvature_apply(kk, ut, tower[0], tower[j]), k - 1 - j);
  return l2_norm(lhs - rhs);
}

struct CommutatorStudy {
  std::vector<double> steps;
  std::vector<double> residuals;
  double slope = 0.0;  // least-squares slope of log residual against log step
};

/// a1 residuals for steps h0, h0/2, ..., summed over orders k = 1..kmax.
inline CommutatorStudy a1_study(const CurvePath& path, double s, double h0, int levels = 3, int kmax = 2) {
  CommutatorStudy out;
  for (int i = 0; i < levels; ++i) {
    const double h = h0 / std::pow(2.0, i);
    double r = 0.0;
    for (int k = 1; k <= kmax; ++k) r += a1_residual(path, s, h, k);
    out.steps.push_back(h);
    out.residuals.push_back(r);
  }
  const int n = levels;
  double mx = 0, my = 0;
  for (int i = 0; i < n; ++i) {
    mx += std::log(out.steps[i]) / n;
    my += std::log(out.residuals[i]) / n;
  }
  double num = 0, den = 0;
  for (int i = 0; i < n; ++i) {
    const double dx = std::log(out.steps[i]) - mx;
    num += dx * (std::log(out.residuals[i]) - my);
    den += dx * dx;
  }
  out.slope = den > 0 ? num / den : 0.0;
  return out;
}

/// s -> pi(u0 + s * direction), a smooth family through u0.
inline CurvePath straight_path(const ClosedCurve& u0, const Field& direction) {
  return [u0, direction](double s) {
    return ClosedCurve(u0.manifold.nearest_field(u0.samples + s * direction), u0.manifold, u0.winding);
  };
}

struct IdentityReport {
  std::vector<double> a4;  // l = 0..2
  std::vector<double> a5;
  double b6 = 0.0;
};

inline IdentityReport identity_residuals(const ClosedCurve& c, std::uint64_t seed = 0,
                                         TowerForm form = TowerForm::Extrinsic) {
  IdentityReport r;
  for (int l = 0; l <= kMaxIdentityLevel; ++l) {
    r.a4.push_back(a4_residual(c, l, form));
    r.a5.push_back(a5_residual(c, l, form));
  }
  r.b6 = b6_residual(c, seed);
  return r;
}

}  // namespace dispflow
