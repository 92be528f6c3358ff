#pragma once

// Closed curves sampled on the uniform grid, their extrinsic derivatives,
// covariant derivatives along the curve and bundle Sobolev norms.

#include <Eigen/Dense>
#include <array>
#include <string>
#include <vector>

#include "dispflow/errors.hpp"
#include "dispflow/manifold.hpp"
#include "dispflow/spectral.hpp"

namespace dispflow {

inline constexpr int kMinGrid = 16;
inline constexpr int kMaxTowerDepth = 6;
inline constexpr int kMaxSobolevOrder = 5;

/// A periodic curve x -> u(x) in ambient coordinates, sampled at x_i = i/N.
///
/// `winding` is the period jump u(x + 1) - u(x). It is zero for embedded
/// targets and an integer vector for the flat-torus chart, where samples are
/// kept as an unwrapped continuous lift and only reduced mod 1 on output.
struct ClosedCurve {
  Field samples;
  Manifold manifold;
  Eigen::RowVectorXd winding;

  ClosedCurve() = default;
  ClosedCurve(Field s, Manifold m) : ClosedCurve(std::move(s), m, Eigen::RowVectorXd::Zero(m.ambient_dim())) {}
  ClosedCurve(Field s, Manifold m, Eigen::RowVectorXd w) : samples(std::move(s)), manifold(m), winding(std::move(w)) {
    const int n = static_cast<int>(samples.rows());
    if (!is_power_of_two(n) || n < kMinGrid)
      throw std::invalid_argument("ClosedCurve: grid size must be a power of two >= 16, got " + std::to_string(n));
    if (samples.cols() != manifold.ambient_dim() || winding.size() != manifold.ambient_dim())
      throw std::invalid_argument("ClosedCurve: ambient dimension mismatch for " + manifold.name());
  }

  int size() const { return static_cast<int>(samples.rows()); }
  int dim() const { return static_cast<int>(samples.cols()); }

  /// x_i * winding, the non-periodic part of the lift.
  Field secular_part() const { return grid_nodes(size()) * winding; }
  /// u - x * winding, always periodic.
  Field periodic_part() const { return samples - secular_part(); }

  double off_manifold() const { return manifold.max_constraint_residual(samples); }
  void require_on_manifold() const { manifold.require_on_manifold(samples); }

  /// Samples reduced into the fundamental domain (chart torus only).
  Field wrapped() const {
    if (manifold.kind() != ManifoldKind::ChartFlatTorus2) return samples;
    return samples.unaryExpr([](double v) { return v - std::floor(v); });
  }
};

/// u_x, including the winding contribution.
inline Field velocity(const ClosedCurve& c) {
  Field ux = spectral_derivative(c.periodic_part(), 1);
  ux.rowwise() += c.winding;
  return ux;
}

/// [u, u_x, ..., d^order u] computed spectrally; order <= 4.
inline std::vector<Field> extrinsic_derivatives(const ClosedCurve& c, int order) {
  std::vector<Field> out;
  out.reserve(order + 1);
  out.push_back(c.samples);
  if (order == 0) return out;
  const int n = c.size();
  const HalfSpectrum spec = forward_transform(c.periodic_part());
  for (int k = 1; k <= order; ++k) {
    HalfSpectrum d = spec;
    for (int m = 0; m <= n / 2; ++m) d.row(m) *= derivative_symbol(m, k, n);
    out.push_back(inverse_transform(std::move(d), n));
  }
  out[1].rowwise() += c.winding;
  return out;
}

/// Largest normal component of `field` relative to its sup-norm.
inline double tangency_residual(const ClosedCurve& c, const Field& field) {
  const double scale = field.rows() ? field.rowwise().norm().maxCoeff() : 0.0;
  if (scale == 0.0) return 0.0;
  const Field normal = field - c.manifold.tangent_part(c.samples, field);
  return normal.rowwise().norm().maxCoeff() / scale;
}

inline void require_tangent(const ClosedCurve& c, const Field& v, double tol = kOnManifoldTol) {
  if (v.rows() != c.samples.rows() || v.cols() != c.samples.cols())
    throw BaseMismatch("tangent field does not match its base curve");
  const double r = tangency_residual(c, v);
  if (r > tol) throw TangencyViolation("field is not tangent along the curve (relative residual " + std::to_string(r) + ")");
}

/// Covariant derivative along the curve, p(u) d/dx V; V must be tangent.
inline Field covariant_derivative(const ClosedCurve& c, const Field& v) {
  c.require_on_manifold();
  require_tangent(c, v);
  return c.manifold.tangent_part(c.samples, spectral_derivative(v, 1));
}

/// [u_x, nabla_x u_x, ..., nabla_x^depth u_x].
inline std::vector<Field> covariant_tower(const ClosedCurve& c, int depth) {
  if (depth < 0 || depth > kMaxTowerDepth)
    throw std::invalid_argument("covariant_tower: depth must be in [0," + std::to_string(kMaxTowerDepth) + "]");
  c.require_on_manifold();
  std::vector<Field> out;
  out.reserve(depth + 1);
  out.push_back(velocity(c));
  for (int k = 1; k <= depth; ++k)
    out.push_back(c.manifold.tangent_part(c.samples, spectral_derivative(out.back(), 1)));
  return out;
}

/// Extrinsic transcription of the tower: nabla X = X_x + A(u_x, X) with
/// A = -II, the form used by the right-hand side. Agrees with covariant_tower
/// up to aliasing; its values are tangent only to spectral accuracy.
inline std::vector<Field> extrinsic_tower(const ClosedCurve& c, int depth) {
  if (depth < 0 || depth > kMaxTowerDepth)
    throw std::invalid_argument("extrinsic_tower: depth must be in [0," + std::to_string(kMaxTowerDepth) + "]");
  c.require_on_manifold();
  std::vector<Field> out;
  out.reserve(depth + 1);
  out.push_back(velocity(c));
  for (int k = 1; k <= depth; ++k)
    out.push_back(spectral_derivative(out.back(), 1) - c.manifold.second_form_field(c.samples, out[0], out.back()));
  return out;
}

/// Bundle Sobolev norm (sum_{j<=m} ||nabla_x^j u_x||^2)^{1/2}.
inline double sobolev_norm(const ClosedCurve& c, int m) {
  if (m < 0 || m > kMaxSobolevOrder)
    throw std::invalid_argument("sobolev_norm: order must be in [0," + std::to_string(kMaxSobolevOrder) + "]");
  double sum = 0.0;
  for (const Field& f : covariant_tower(c, m)) sum += inner(f, f);
  return std::sqrt(sum);
}

/// All bundle Sobolev norms ||u_x||_{H^k}, k = 0..m, from a single tower.
inline std::vector<double> sobolev_norms(const ClosedCurve& c, int m) {
  std::vector<double> out;
  double sum = 0.0;
  for (const Field& f : covariant_tower(c, m)) {
    sum += inner(f, f);
    out.push_back(std::sqrt(sum));
  }
  return out;
}

/// Constant-curvature tensor R(X,Y)Z = K (g(Y,Z) X - g(X,Z) Y), pointwise.
inline Field curvature_apply(double k, const Field& x, const Field& y, const Field& z) {
  if (x.rows() != y.rows() || x.rows() != z.rows() || x.cols() != y.cols() || x.cols() != z.cols())
    throw BaseMismatch("curvature_apply: fields live on different base curves");
  return k * ((x.array().colwise() * dot_rows(y, z).array()) - (y.array().colwise() * dot_rows(x, z).array())).matrix();
}

}  // namespace dispflow
