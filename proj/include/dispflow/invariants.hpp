#pragma once

// Conserved quantities, drift reports and exact rotating-circle solutions.

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "dispflow/curve.hpp"
#include "dispflow/errors.hpp"
#include "dispflow/flow.hpp"
#include "dispflow/presets.hpp"
#include "dispflow/spectral.hpp"

namespace dispflow {

/// E(u) = ||nabla^2 u_x||^2 + K^2/8 int |u_x|^6 - K int g(u_x, nabla u_x)^2
///        - 3K/2 int |u_x|^2 |nabla u_x|^2.
inline double energy_E(const ClosedCurve& c, double k) {
  const auto t = covariant_tower(c, 2);
  const Eigen::ArrayXd speed2 = dot_rows(t[0], t[0]).array();
  const Eigen::ArrayXd mixed = dot_rows(t[0], t[1]).array();
  const Eigen::ArrayXd acc2 = dot_rows(t[1], t[1]).array();
  return inner(t[2], t[2]) + k * k / 8.0 * speed2.cube().mean() - k * mixed.square().mean() -
         1.5 * k * (speed2 * acc2).mean();
}

/// ||u_xxx||^2 - 7/2 || |u_x||u_xx| ||^2 - 14 ||u_x . u_xx||^2 + 21/8 || |u_x|^3 ||^2
/// in ambient R^3 quantities.
inline double nt_quantity(const ClosedCurve& c) {
  if (c.manifold.kind() != ManifoldKind::Sphere2) throw WrongManifold("nt_quantity is defined on Sphere2 only");
  const auto d = extrinsic_derivatives(c, 3);
  const Eigen::ArrayXd s1 = dot_rows(d[1], d[1]).array();
  const Eigen::ArrayXd s2 = dot_rows(d[2], d[2]).array();
  const Eigen::ArrayXd m12 = dot_rows(d[1], d[2]).array();
  return inner(d[3], d[3]) - 3.5 * (s1 * s2).mean() - 14.0 * m12.square().mean() + 21.0 / 8.0 * s1.cube().mean();
}

struct EnergyReport {
  double t = 0.0;
  double l2_ux = 0.0;               // ||u_x||^2
  double E = 0.0;
  std::vector<double> hm_norms;     // ||u_x||_{H^k}, k = 1..3
  double off_manifold = 0.0;
  std::optional<double> nt_quantity;
};

inline constexpr int kReportSobolevOrder = 3;

/// Quantities are evaluated at pi o v, so off-manifold states from the
/// regularized scheme are accepted; off_manifold keeps the raw distance.
inline EnergyReport energy_report(const ClosedCurve& v, double t) {
  EnergyReport r;
  r.t = t;
  r.off_manifold = v.off_manifold();
  const ClosedCurve c = r.off_manifold <= kOnManifoldTol ? v : ClosedCurve(v.manifold.nearest_field(v.samples), v.manifold, v.winding);
  const auto norms = sobolev_norms(c, kReportSobolevOrder);
  r.l2_ux = norms[0] * norms[0];
  r.hm_norms.assign(norms.begin() + 1, norms.end());
  r.E = energy_E(c, c.manifold.gaussian_curvature());
  if (c.manifold.kind() == ManifoldKind::Sphere2) r.nt_quantity = nt_quantity(c);
  return r;
}

inline std::vector<EnergyReport> energy_reports(const Trajectory& traj) {
  std::vector<EnergyReport> out;
  out.reserve(traj.states.size());
  for (std::size_t i = 0; i < traj.states.size(); ++i) out.push_back(energy_report(traj.states[i], traj.times[i]));
  return out;
}

struct DriftRow {
  double t = 0.0;
  double l2_drift = 0.0;  // relative
  double E_drift = 0.0;   // relative
  double off_manifold = 0.0;
};

struct DriftReport {
  std::vector<DriftRow> rows;
  double max_l2_drift = 0.0;
  double max_E_drift = 0.0;
  double max_off_manifold = 0.0;       // over snapshots
  double max_step_off_manifold = 0.0;  // before projection, over all steps
};

inline double relative_change(double value, double ref) {
  const double scale = std::abs(ref);
  return scale > 0.0 ? std::abs(value - ref) / scale : std::abs(value - ref);
}

inline DriftReport drift_report(const std::vector<EnergyReport>& reports) {
  DriftReport d;
  if (reports.empty()) return d;
  const EnergyReport& first = reports.front();
  for (const auto& r : reports) {
    DriftRow row{r.t, relative_change(r.l2_ux, first.l2_ux), relative_change(r.E, first.E), r.off_manifold};
    d.max_l2_drift = std::max(d.max_l2_drift, row.l2_drift);
    d.max_E_drift = std::max(d.max_E_drift, row.E_drift);
    d.max_off_manifold = std::max(d.max_off_manifold, row.off_manifold);
    d.rows.push_back(row);
  }
  return d;
}

inline DriftReport drift_report(const Trajectory& traj) {
  DriftReport d = drift_report(energy_reports(traj));
  for (double r : traj.off_manifold) d.max_step_off_manifold = std::max(d.max_step_off_manifold, r);
  return d;
}

// ---------------------------------------------------------------------------
// Rotating latitude circles
// ---------------------------------------------------------------------------

/// Parameters of u(t,x) = R_z(omega t) u0(x + c t) for the latitude circle.
/// For a latitude circle the rotation and the shift act identically, so only
/// omega + 2 pi c is fixed by the equation; omega carries the Schroedinger
/// part and c the third-order and cubic parts.
struct LatitudeMotion {
  double omega = 0.0;
  double c = 0.0;
};

inline LatitudeMotion latitude_motion(double theta, double a, double b) {
  if (!(theta > 0.0 && theta < std::numbers::pi)) throw UnsupportedCoefficients("latitude angle must lie in (0, pi)");
  const bool supported = (a == 0.0 && b == 0.0) || std::abs(b - 0.5 * a) <= 1e-12 * std::max(1.0, std::abs(a));
  if (!supported) throw UnsupportedCoefficients("latitude oracle needs a = b = 0 or b = a/2");
  const double k2 = kTwoPi * kTwoPi;
  const double s2 = std::sin(theta) * std::sin(theta);
  return {-k2 * std::cos(theta), k2 * ((a + b) * s2 - a)};
}

inline ClosedCurve oracle_latitude_circle(double theta, double t, double a, double b, int n = 128) {
  const LatitudeMotion mm = latitude_motion(theta, a, b);
  // R_z(omega t) u0(x + c t) = u0(x + c t + omega t / (2 pi))
  const double phase = kTwoPi * (mm.c * t) + mm.omega * t;
  const Eigen::ArrayXd x = kTwoPi * grid_nodes(n).array() + phase;
  Field s(n, 3);
  s.col(0) = std::sin(theta) * x.cos();
  s.col(1) = std::sin(theta) * x.sin();
  s.col(2).setConstant(std::cos(theta));
  return ClosedCurve(std::move(s), Manifold(ManifoldKind::Sphere2));
}

/// Exact time derivative of the oracle: omega e_z x u + c u_x.
inline Field oracle_latitude_velocity(double theta, double t, double a, double b, int n = 128) {
  const LatitudeMotion mm = latitude_motion(theta, a, b);
  const ClosedCurve u = oracle_latitude_circle(theta, t, a, b, n);
  const Field ux = velocity(u);
  Field ez_cross_u(n, 3);
  ez_cross_u.col(0) = -u.samples.col(1);
  ez_cross_u.col(1) = u.samples.col(0);
  ez_cross_u.col(2).setZero();
  return mm.omega * ez_cross_u + mm.c * ux;
}

/// L^2 norm of u_t - RHS for the oracle at time t.
inline double oracle_residual(double theta, double t, double a, double b, int n = 128) {
  const ClosedCurve u = oracle_latitude_circle(theta, t, a, b, n);
  return l2_norm(oracle_latitude_velocity(theta, t, a, b, n) - dispersive_rhs(u, a, b));
}

/// oracle_residual relative to the size of u_t. Third derivatives amplify
/// rounding in the samples by roughly (pi N)^3, which bounds the absolute
/// residual from below on fine grids.
inline double oracle_relative_residual(double theta, double t, double a, double b, int n = 128) {
  const ClosedCurve u = oracle_latitude_circle(theta, t, a, b, n);
  const Field ut = oracle_latitude_velocity(theta, t, a, b, n);
  const Field rhs = dispersive_rhs(u, a, b);
  const double scale = std::max(l2_norm(ut), l2_norm(rhs));
  const double r = l2_norm(ut - rhs);
  return scale > 0.0 ? r / scale : r;
}

/// Residual of the rotating-circle ansatz in closed form, with no spectral
/// differentiation: u_t = omega e_z x u + c u_x against
/// a nabla^2 u_x + u x nabla u_x + b |u_x|^2 u_x, where for a latitude circle
/// nabla u_x = u_xx + |u_x|^2 u and nabla^2 u_x = (2 pi)^2 (sin^2 theta - 1) u_x.
/// Relative L^2 size.
inline double oracle_ansatz_residual(double theta, double t, double a, double b, int n = 128) {
  const LatitudeMotion mm = latitude_motion(theta, a, b);
  const double st = std::sin(theta), ct = std::cos(theta);
  const double k2 = kTwoPi * kTwoPi;
  const double phase = kTwoPi * (mm.c * t) + mm.omega * t;
  double num = 0.0, den = 0.0;
  for (int i = 0; i < n; ++i) {
    const double phi = kTwoPi * i / n + phase;
    const Eigen::Vector3d u(st * std::cos(phi), st * std::sin(phi), ct);
    const Eigen::Vector3d ux = kTwoPi * st * Eigen::Vector3d(-std::sin(phi), std::cos(phi), 0.0);
    const Eigen::Vector3d uxx = -k2 * st * Eigen::Vector3d(std::cos(phi), std::sin(phi), 0.0);
    const Eigen::Vector3d nab1 = uxx + ux.squaredNorm() * u;
    const Eigen::Vector3d nab2 = k2 * (st * st - 1.0) * ux;
    const Eigen::Vector3d rhs = a * nab2 + u.cross(nab1) + b * ux.squaredNorm() * ux;
    const Eigen::Vector3d ut = mm.omega * Eigen::Vector3d::UnitZ().cross(u) + mm.c * ux;
    num += (ut - rhs).squaredNorm();
    den += std::max(ut.squaredNorm(), rhs.squaredNorm());
  }
  return den > 0.0 ? std::sqrt(num / den) : std::sqrt(num / n);
}

}  // namespace dispflow
