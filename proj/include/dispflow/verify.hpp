#pragma once

// Numerical studies and the named verification suites driven by `dcl verify`.

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "dispflow/flow.hpp"
#include "dispflow/identities.hpp"
#include "dispflow/invariants.hpp"
#include "dispflow/presets.hpp"

namespace dispflow {

struct Check {
  std::string suite;
  std::string name;
  int grid = 0;
  double value = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  std::string relation = "<=";  // value <= tolerance, or value >= tolerance
};

inline Check check_le(std::string suite, std::string name, int grid, double value, double tol) {
  return {std::move(suite), std::move(name), grid, value, tol, value <= tol, "<="};
}

inline Check check_ge(std::string suite, std::string name, int grid, double value, double tol) {
  return {std::move(suite), std::move(name), grid, value, tol, value >= tol, ">="};
}

// ---------------------------------------------------------------------------
// Studies
// ---------------------------------------------------------------------------

/// Least-squares slope of y against x.
inline double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i] / n;
    my += y[i] / n;
  }
  double num = 0, den = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    num += (x[i] - mx) * (y[i] - my);
    den += (x[i] - mx) * (x[i] - mx);
  }
  return den > 0 ? num / den : 0.0;
}

/// Off-manifold displacement rho(v) = v - pi(v).
inline Field normal_displacement(const ClosedCurve& v) { return v.samples - v.manifold.nearest_field(v.samples); }

struct MaxPrincipleStudy {
  std::vector<double> times;
  std::vector<double> rho_norm;      // ||rho o v||
  std::vector<double> rate;          // centred d/dt of ||rho||^2 / 2, interior snapshots
  std::vector<double> dissipation;   // -eps ||(rho o v)_xx||^2 at the same snapshots
  bool monotone = true;
  double worst_relative = 0.0;
  std::optional<Failure> failure;
};

/// Evolves v0 (off the manifold) and compares d/dt (||rho||^2/2) with
/// -eps ||rho_xx||^2 at every interior snapshot.
inline MaxPrincipleStudy max_principle_study(const ClosedCurve& v0, const FlowConfig& cfg, int stride = 1) {
  MaxPrincipleStudy s;
  const Trajectory traj = evolve(v0, cfg, stride);
  s.failure = traj.failure;
  std::vector<double> half_sq, diss;
  for (std::size_t i = 0; i < traj.states.size(); ++i) {
    const Field rho = normal_displacement(traj.states[i]);
    s.times.push_back(traj.times[i]);
    s.rho_norm.push_back(l2_norm(rho));
    half_sq.push_back(0.5 * inner(rho, rho));
    const Field rxx = spectral_derivative(rho, 2);
    diss.push_back(-cfg.epsilon * inner(rxx, rxx));
  }
  for (std::size_t i = 1; i < s.rho_norm.size(); ++i)
    if (!(s.rho_norm[i] < s.rho_norm[i - 1])) s.monotone = false;
  for (std::size_t i = 1; i + 1 < half_sq.size(); ++i) {
    const double r = (half_sq[i + 1] - half_sq[i - 1]) / (s.times[i + 1] - s.times[i - 1]);
    s.rate.push_back(r);
    s.dissipation.push_back(diss[i]);
    s.worst_relative = std::max(s.worst_relative, std::abs(r - diss[i]) / std::abs(diss[i]));
  }
  if (s.rate.empty()) s.worst_relative = std::numeric_limits<double>::infinity();
  return s;
}

/// v0 = u0 (1 + amplitude psi(x)) with psi = cos 2 pi x + sin(4 pi x)/2: a
/// radial, smooth push off the sphere.
inline ClosedCurve radial_perturbation(const ClosedCurve& u0, double amplitude) {
  if (u0.manifold.kind() != ManifoldKind::Sphere2) throw WrongManifold("radial_perturbation needs Sphere2");
  const Eigen::ArrayXd x = kTwoPi * grid_nodes(u0.size()).array();
  const Eigen::ArrayXd psi = x.cos() + 0.5 * (2.0 * x).sin();
  return ClosedCurve((u0.samples.array().colwise() * (1.0 + amplitude * psi)).matrix(), u0.manifold, u0.winding);
}

struct DtStudy {
  std::vector<double> dts;
  std::vector<double> differences;  // H^1 distance between successive levels at t = T
  std::vector<double> orders;       // log2 of successive difference ratios
  std::vector<double> E_drifts;
  std::optional<Failure> failure;
};

/// Runs cfg with dt, dt/2, ..., dt/2^(levels-1) and measures self-convergence.
inline DtStudy dt_study(const ClosedCurve& u0, const FlowConfig& cfg, int levels, int threads = sweep_threads()) {
  DtStudy s;
  std::vector<Trajectory> runs(levels);
  parallel_for(levels, threads, [&](int i) {
    FlowConfig c = cfg;
    c.dt = cfg.dt / std::pow(2.0, i);
    runs[i] = evolve(u0, c, std::numeric_limits<int>::max());
  });
  for (int i = 0; i < levels; ++i) {
    s.dts.push_back(cfg.dt / std::pow(2.0, i));
    if (runs[i].failure && !s.failure) s.failure = runs[i].failure;
    s.E_drifts.push_back(runs[i].ok() ? drift_report(runs[i]).max_E_drift : std::numeric_limits<double>::quiet_NaN());
  }
  if (s.failure) return s;
  for (int i = 0; i + 1 < levels; ++i)
    s.differences.push_back(h1_norm(runs[i].final_state().samples - runs[i + 1].final_state().samples));
  for (std::size_t i = 0; i + 1 < s.differences.size(); ++i)
    s.orders.push_back(std::log2(s.differences[i] / s.differences[i + 1]));
  return s;
}

struct GridStudy {
  std::vector<int> grids;
  std::vector<double> errors;  // H^1 distance to the finest level, sampled on the coarse grid
  std::optional<Failure> failure;
};

inline GridStudy grid_study(const std::string& initial, const Manifold& m, const FlowConfig& cfg, int levels,
                            std::uint64_t seed = 0, int threads = sweep_threads()) {
  GridStudy s;
  std::vector<Trajectory> runs(levels);
  parallel_for(levels, threads, [&](int i) {
    FlowConfig c = cfg;
    c.grid = cfg.grid << i;
    runs[i] = evolve(make_initial_curve(initial, c.grid, m, seed), c, std::numeric_limits<int>::max());
  });
  for (int i = 0; i < levels; ++i) {
    s.grids.push_back(cfg.grid << i);
    if (runs[i].failure && !s.failure) s.failure = runs[i].failure;
  }
  if (s.failure) return s;
  const ClosedCurve& fine = runs.back().final_state();
  for (int i = 0; i < levels; ++i) {
    const ClosedCurve& c = runs[i].final_state();
    const Field fine_here = resample(fine.periodic_part(), c.size()) + c.secular_part();
    s.errors.push_back(h1_norm(c.samples - fine_here));
  }
  return s;
}

struct DependenceStudy {
  std::vector<double> times;
  std::vector<double> distances;
  double rate = 0.0;  // fitted exponent C in d(t) ~ d(0) e^{C t}
  std::optional<Failure> failure;
};

/// Evolves u0 and pi(u0 + s phi) with s chosen so the initial discrete-H^1
/// distance is `size`, and fits an exponential rate to their distance.
inline DependenceStudy dependence_study(const ClosedCurve& u0, const Field& phi, double size, const FlowConfig& cfg,
                                        int stride) {
  DependenceStudy s;
  const double scale = size / h1_norm(phi);
  const ClosedCurve w0(u0.manifold.nearest_field(u0.samples + scale * phi), u0.manifold, u0.winding);
  const Trajectory a = evolve(u0, cfg, stride), b = evolve(w0, cfg, stride);
  s.failure = a.failure ? a.failure : b.failure;
  const std::size_t n = std::min(a.states.size(), b.states.size());
  std::vector<double> logs;
  for (std::size_t i = 0; i < n; ++i) {
    s.times.push_back(a.times[i]);
    s.distances.push_back(h1_norm(a.states[i].samples - b.states[i].samples));
    logs.push_back(std::log(s.distances.back()));
  }
  s.rate = fit_slope(s.times, logs);
  return s;
}

// ---------------------------------------------------------------------------
// Suites
// ---------------------------------------------------------------------------

inline constexpr std::uint64_t kSuiteSeed = 7;

namespace detail {

inline std::vector<Manifold> all_manifolds() {
  return {Manifold(ManifoldKind::Sphere2), Manifold(ManifoldKind::CliffordTorus2),
          Manifold(ManifoldKind::ChartFlatTorus2)};
}

inline Field random_field(std::mt19937_64& rng, int rows, int cols) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Field f(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) f(i, j) = normal(rng);
  return f;
}

/// Points on the Clifford torus or in the chart from random angles.
inline Field torus_points(const Manifold& m, std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Field p(n, m.ambient_dim());
  for (int i = 0; i < n; ++i) {
    const double a = unit(rng), b = unit(rng);
    if (m.kind() == ManifoldKind::ChartFlatTorus2) {
      p.row(i) << a, b;
    } else {
      p.row(i) << kCliffordRadius * std::cos(kTwoPi * a), kCliffordRadius * std::sin(kTwoPi * a),
          kCliffordRadius * std::cos(kTwoPi * b), kCliffordRadius * std::sin(kTwoPi * b);
    }
  }
  return p;
}

}  // namespace detail

/// a4/a5 residuals per grid, their decay between successive grids, b6, the
/// Kaehler check, and the a1 step-size slope.
inline std::vector<Check> suite_identities(const std::vector<int>& grids) {
  const std::string s = "identities";
  std::vector<Check> out;
  std::vector<IdentityReport> reports;
  const Manifold sphere(ManifoldKind::Sphere2);
  for (int n : grids) {
    const ClosedCurve c = random_smooth(kSuiteSeed, kDefaultDecay, kDefaultAmplitude, n, sphere);
    reports.push_back(identity_residuals(c, kSuiteSeed));
    const IdentityReport& r = reports.back();
    for (int l = 0; l <= kMaxIdentityLevel; ++l) {
      out.push_back({s, "a4_l" + std::to_string(l), n, r.a4[l], 0.0, true, "info"});
      out.push_back({s, "a5_l" + std::to_string(l), n, r.a5[l], 0.0, true, "info"});
    }
    out.push_back(check_le(s, "b6", n, r.b6, 1e-12));
    const ClosedCurve smooth = random_smooth(kSuiteSeed, 1.0, 0.3, n, sphere);
    const Field x =
        smooth.manifold.tangent_part(smooth.samples, velocity(random_smooth(kSuiteSeed + 1, 1.0, 0.3, n, sphere)));
    out.push_back(check_le(s, "kahler", n, kahler_residual(smooth, x), 1e-8));
    const Eigen::ArrayXd xs = kTwoPi * grid_nodes(n).array();
    Field dir(n, 3);
    dir.col(0) = (2 * xs).sin();
    dir.col(1) = 0.5 * xs.cos();
    dir.col(2) = 0.3 * (3 * xs).cos();
    out.push_back(check_ge(s, "a1_slope", n, a1_study(straight_path(smooth, dir), 0.0, 4e-4).slope, 1.8));
  }
  for (std::size_t i = 0; i + 1 < reports.size(); ++i) {
    for (int l = 0; l <= kMaxIdentityLevel; ++l) {
      out.push_back(check_ge(s, "a4_l" + std::to_string(l) + "_decades", grids[i + 1],
                             std::log10(reports[i].a4[l] / reports[i + 1].a4[l]), 4.0));
      out.push_back(check_ge(s, "a5_l" + std::to_string(l) + "_decades", grids[i + 1],
                             std::log10(reports[i].a5[l] / reports[i + 1].a5[l]), 4.0));
    }
  }
  return out;
}

/// Algebraic identities of the projectors and the complex structure at
/// random points of every target; `n` random samples per grid entry.
inline std::vector<Check> suite_projections(const std::vector<int>& grids) {
  const std::string s = "projections";
  std::vector<Check> out;
  for (int n : grids) {
    for (const Manifold& m : detail::all_manifolds()) {
      std::mt19937_64 rng(kSuiteSeed + n);
      const int d = m.ambient_dim();
      const Field base = m.nearest_field(m.kind() == ManifoldKind::Sphere2 ? detail::random_field(rng, n, d)
                                                                           : detail::torus_points(m, rng, n));
      const Field dirs = detail::random_field(rng, n, d);
      const double radius = std::isfinite(m.tubular_radius()) ? m.tubular_radius() : 1.0;
      Field normals = dirs - m.tangent_part(base, dirs);
      for (int i = 0; i < n; ++i) {
        const double len = normals.row(i).norm();
        if (len > 0) normals.row(i) *= 0.9 * radius / len * std::abs(std::sin(i + 1.0));
      }
      const Field near = base + normals;
      const Field once = m.project_field(near);
      const std::string tag = m.name() + "/";
      out.push_back(check_le(s, tag + "project_idempotent", n, sup_norm(m.project_field(once) - once), 1e-12));
      out.push_back(check_le(s, tag + "project_on_manifold", n, m.max_constraint_residual(once), 1e-12));
      const Field x = detail::random_field(rng, n, d), y = detail::random_field(rng, n, d);
      const Field px = m.tangent_part(base, x), py = m.tangent_part(base, y);
      out.push_back(check_le(s, tag + "p_plus_n", n, sup_norm(px + (x - px) - x), 1e-12));
      out.push_back(check_le(s, tag + "p_idempotent", n, sup_norm(m.tangent_part(base, px) - px), 1e-12));
      out.push_back(check_le(s, tag + "p_symmetric", n,
                             (dot_rows(px, y) - dot_rows(x, py)).cwiseAbs().maxCoeff(), 1e-12));
      const Field jx = m.rotate_field(base, px);
      out.push_back(check_le(s, tag + "J_squared", n, sup_norm(m.rotate_field(base, jx) + px), 1e-12));
      out.push_back(check_le(s, tag + "J_antisymmetric", n,
                             (dot_rows(jx, py) + dot_rows(px, m.rotate_field(base, py))).cwiseAbs().maxCoeff(), 1e-12));
    }
  }
  return out;
}

/// Relative PDE residual of the rotating latitude circles and the closed-form
/// invariants of the great circle.
inline std::vector<Check> suite_oracles(const std::vector<int>& grids) {
  const std::string s = "oracles";
  std::vector<Check> out;
  const double theta = std::numbers::pi / 3;
  for (int n : grids) {
    for (const auto& [a, b] : std::vector<std::pair<double, double>>{{0.0, 0.0}, {1.0, 0.5}}) {
      const std::string tag = "latitude_a" + std::to_string(static_cast<int>(a));
      // third derivatives put a floor of about ulp * (pi N)^3 under the discrete residual
      out.push_back(check_le(s, tag + "_residual", n, oracle_relative_residual(theta, 0.003, a, b, n),
                             a == 0.0 ? 1e-10 : 1e-9));
      out.push_back(check_le(s, tag + "_ansatz", n, oracle_ansatz_residual(theta, 0.003, a, b, n), 1e-10));
    }
    const ClosedCurve gc = great_circle(n);
    const double e_exact = std::pow(kTwoPi, 6) / 8.0;
    out.push_back(check_le(s, "great_circle_E", n, std::abs(energy_E(gc, 1.0) - e_exact) / e_exact, 1e-12));
    out.push_back(check_le(s, "great_circle_nt", n, std::abs(nt_quantity(gc) - e_exact) / e_exact, 1e-12));
    const ClosedCurve r = random_smooth(kSuiteSeed, 1.0, 0.3, n, gc.manifold);
    const double e = energy_E(r, 1.0);
    out.push_back(check_le(s, "nt_equals_E", n, std::abs(nt_quantity(r) - e) / std::abs(e), 1e-10));
  }
  return out;
}

/// Monotone decay of the off-manifold displacement under the regularized
/// flow and agreement of its rate with -eps ||rho_xx||^2.
inline std::vector<Check> suite_maxprinciple(const std::vector<int>& grids) {
  const std::string s = "maxprinciple";
  std::vector<Check> out;
  for (int n : grids) {
    FlowConfig cfg;
    cfg.a = 1.0;
    cfg.b = 0.5;
    cfg.epsilon = 1e-2;
    cfg.grid = n;
    cfg.dt = 2e-5;
    cfg.T = 2e-3;
    cfg.integrator = Integrator::DuhamelPicard;
    const ClosedCurve u0 = random_smooth(1, 5.0, 20.0, n, Manifold(ManifoldKind::Sphere2));
    const MaxPrincipleStudy st = max_principle_study(radial_perturbation(u0, 1e-4), cfg, 5);
    out.push_back(check_le(s, "solver_failure", n, st.failure ? 1.0 : 0.0, 0.0));
    out.push_back(check_ge(s, "monotone", n, st.monotone ? 1.0 : 0.0, 1.0));
    out.push_back(check_le(s, "rate_vs_dissipation", n, st.worst_relative, 0.1));
  }
  return out;
}

inline constexpr double kSmoothingTolerance = 0.01;

/// sup_n |2 pi n|^3 e^{-eps t (2 pi n)^4} (eps t)^{3/4} against the scalar
/// constant sup xi^3 e^{-xi^4}, for (eps, t) in {1e-3, 1e-2, 1e-1}^2.
inline std::vector<Check> suite_smoothing(const std::vector<int>& grids) {
  const std::string s = "smoothing";
  std::vector<Check> out;
  const double c = smoothing_constant();
  for (int n : grids) {
    for (double eps : {1e-3, 1e-2, 1e-1}) {
      for (double t : {1e-3, 1e-2, 1e-1}) {
        const double ratio = smoothing_sup(eps, t, n / 2) * std::pow(eps * t, 0.75) / c;
        char name[64];
        std::snprintf(name, sizeof name, "eps=%g,t=%g", eps, t);
        out.push_back(check_le(s, name, n, std::abs(ratio - 1.0), kSmoothingTolerance));
      }
    }
  }
  return out;
}

inline const std::map<std::string, std::function<std::vector<Check>(const std::vector<int>&)>>& verify_suites() {
  static const std::map<std::string, std::function<std::vector<Check>(const std::vector<int>&)>> suites = {
      {"identities", suite_identities}, {"projections", suite_projections}, {"oracles", suite_oracles},
      {"maxprinciple", suite_maxprinciple}, {"smoothing", suite_smoothing}};
  return suites;
}

}  // namespace dispflow
