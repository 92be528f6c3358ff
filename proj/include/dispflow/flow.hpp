#pragma once

// Right-hand sides of the dispersive curve flow in extrinsic form and the
// time integrators that march it:
//
//   u_t = a nabla_x^2 u_x + J_u nabla_x u_x + b g(u_x,u_x) u_x            (eps = 0)
//   v_t = -eps v_xxxx + F(pi o v)                                       (eps > 0)
//
// Throughout, "A" denotes the correction that turns ambient derivatives into
// covariant ones, A(X,Y) = -II(X,Y), so that dw(nabla_x u_x) = v_xx + A(v_x,v_x).

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <optional>
#include <string>
#include <vector>

#include "dispflow/curve.hpp"
#include "dispflow/errors.hpp"
#include "dispflow/manifold.hpp"
#include "dispflow/parallel.hpp"
#include "dispflow/quadrature.hpp"
#include "dispflow/spectral.hpp"

namespace dispflow {

enum class Integrator { DuhamelPicard, ProjectedRK4, IMEX };

inline std::string to_string(Integrator i) {
  switch (i) {
    case Integrator::DuhamelPicard: return "DuhamelPicard";
    case Integrator::ProjectedRK4: return "ProjectedRK4";
    case Integrator::IMEX: return "IMEX";
  }
  return {};
}

inline Integrator integrator_from_string(const std::string& s) {
  if (s == "DuhamelPicard") return Integrator::DuhamelPicard;
  if (s == "ProjectedRK4") return Integrator::ProjectedRK4;
  if (s == "IMEX") return Integrator::IMEX;
  throw ConfigError("unknown integrator '" + s + "'");
}

struct FlowConfig {
  double a = 0.0;
  double b = 0.0;
  double epsilon = 0.0;
  int grid = 128;
  double dt = 1e-5;
  double T = 0.01;
  Integrator integrator = Integrator::ProjectedRK4;
  double picard_tol = 1e-12;
  int picard_max_iter = 60;
  int quadrature_nodes = 8;

  void validate() const {
    if (!(epsilon >= 0.0)) throw ConfigError("epsilon must be >= 0");
    if (!(dt > 0.0)) throw ConfigError("dt must be > 0");
    if (!(T >= 0.0)) throw ConfigError("T must be >= 0");
    if (T > 0.0 && dt > T * (1.0 + 1e-12)) throw ConfigError("dt must not exceed T");
    if (!is_power_of_two(grid) || grid < kMinGrid) throw ConfigError("grid must be a power of two >= 16");
    if (integrator == Integrator::DuhamelPicard && !(epsilon > 0.0))
      throw ConfigError("DuhamelPicard requires epsilon > 0");
    if (!(picard_tol > 0.0) || picard_max_iter < 1 || quadrature_nodes < 1)
      throw ConfigError("invalid Picard parameters");
  }
};

// ---------------------------------------------------------------------------
// Right-hand sides
// ---------------------------------------------------------------------------

namespace detail {

inline Field cubic_speed_term(const Field& v1) {
  return (v1.array().colwise() * dot_rows(v1, v1).array()).matrix();
}

/// Pieces of the extrinsic operator at an on-manifold curve w.
struct ExtrinsicTerms {
  Field w1, w3;
  Field cov1;        // dw(nabla_x u_x)   = w_xx + A(w_x, w_x)
  Field cov2;        // dw(nabla_x^2 u_x) = w_xxx + [A(w_x,w_x)]_x + A(cov1, w_x)
  Field cov3_tail;   // dw(nabla_x^3 u_x) - w_xxxx; only when requested
  double scale = 0;  // size of the largest summand, for relative tangency checks
};

inline ExtrinsicTerms extrinsic_terms(const ClosedCurve& w, bool with_third) {
  const Manifold& m = w.manifold;
  const auto d = extrinsic_derivatives(w, 3);
  const Field& v = d[0];
  auto A = [&](const Field& x, const Field& y) -> Field { return -m.second_form_field(v, x, y); };

  ExtrinsicTerms t;
  t.w1 = d[1];
  t.w3 = d[3];
  const Field a11 = A(d[1], d[1]);
  const Field a11_x = spectral_derivative(a11, 1);
  t.cov1 = d[2] + a11;
  const Field a_c1 = A(t.cov1, d[1]);
  t.cov2 = d[3] + a11_x + a_c1;
  t.scale = std::max({sup_norm(d[3]), sup_norm(a11_x), sup_norm(a_c1), sup_norm(t.cov1)});
  if (with_third) {
    t.cov3_tail = spectral_derivative(a11_x, 1) + spectral_derivative(a_c1, 1) + A(t.cov2, d[1]);
  }
  return t;
}

/// F(w) for on-manifold w. With include_w3 = false the linear a*w_xxx
/// contribution is left out (integrators treat it exactly).
inline Field forcing(const ClosedCurve& w, double a, double b, double eps, bool include_w3) {
  const bool with_eps = eps != 0.0;
  ExtrinsicTerms t = extrinsic_terms(w, with_eps);
  Field f = w.manifold.rotate_field(w.samples, t.cov1) + b * cubic_speed_term(t.w1);
  if (a != 0.0) f += a * (include_w3 ? t.cov2 : Field(t.cov2 - t.w3));
  if (with_eps) f -= eps * t.cov3_tail;
  return f;
}

}  // namespace detail

/// Extrinsic transcription of a nabla^2 u_x + J nabla u_x + b |u_x|^2 u_x at
/// an on-manifold curve. Throws TangencyViolation if the result has a normal
/// component above 1e-6 relative to its summands (under-resolution).
inline Field dispersive_rhs(const ClosedCurve& c, double a, double b) {
  c.require_on_manifold();
  const detail::ExtrinsicTerms t = detail::extrinsic_terms(c, false);
  const Field cubic = detail::cubic_speed_term(t.w1);
  const Field rot = c.manifold.rotate_field(c.samples, t.cov1);
  Field rhs = a * t.cov2 + rot + b * cubic;
  const double scale = std::max({std::abs(a) * t.scale, sup_norm(rot), std::abs(b) * sup_norm(cubic)});
  if (scale > 0.0) {
    const Field normal = rhs - c.manifold.tangent_part(c.samples, rhs);
    const double r = sup_norm(normal) / scale;
    if (r > 1e-6) throw TangencyViolation("dispersive_rhs: normal residual " + std::to_string(r));
  }
  return rhs;
}

/// -eps v_xxxx + F(pi o v) for a state v inside the tubular neighbourhood.
inline Field regularized_rhs(const ClosedCurve& v, const FlowConfig& cfg) {
  const ClosedCurve w(v.manifold.project_field(v.samples), v.manifold, v.winding);
  Field rhs = detail::forcing(w, cfg.a, cfg.b, cfg.epsilon, true);
  if (cfg.epsilon != 0.0) rhs -= cfg.epsilon * spectral_derivative(v.periodic_part(), 4);
  return rhs;
}

// ---------------------------------------------------------------------------
// Linear part L = -eps d^4 + a d^3 and its exact propagator
// ---------------------------------------------------------------------------

/// Largest |z| with z on the imaginary axis inside the RK4 stability region is
/// 2 sqrt 2; a small margin is kept.
inline constexpr double kRk4ImaginaryBound = 2.8;
/// Same for the explicit tableau of ARS(4,4,3); its interval ends near 1.85.
inline constexpr double kArs443ImaginaryBound = 1.7;

inline std::complex<double> linear_symbol(int k, int n, double eps, double a) {
  const double kk = kTwoPi * k;
  std::complex<double> s = -eps * std::pow(kk, 4);
  if (2 * k != n) s += std::complex<double>(0.0, -a * kk * kk * kk);  // a (i kk)^3
  return s;
}

/// exp(h L) applied to a periodic field.
inline Field propagate_field(const Field& f, double h, double eps, double a) {
  const int n = static_cast<int>(f.rows());
  return apply_symbol(f, [&](int k) { return std::exp(h * linear_symbol(k, n, eps, a)); });
}

/// exp(h L) applied to a curve; the secular part x * winding is invariant.
inline ClosedCurve propagate(const ClosedCurve& c, double h, double eps, double a) {
  return ClosedCurve(propagate_field(c.periodic_part(), h, eps, a) + c.secular_part(), c.manifold, c.winding);
}

/// Highest mode kept in the explicit nonlinear stages. The Schroedinger term
/// has frequencies (2 pi n)^2; the exact ambient d^3 flow rotates tangent and
/// normal components into each other at a rate 3 |a| |u_x| kappa (2 pi n)^2,
/// kappa being the principal curvature of the embedding. Both must stay inside
/// the RK4 stability interval on the imaginary axis. An ambient mode n of a
/// curve whose embedding oscillates at wavenumber m carries intrinsic modes
/// up to n + m, so the cutoff is lowered by that carrier wavenumber.
inline int stability_cutoff(const ClosedCurve& c, const FlowConfig& cfg, double bound = kRk4ImaginaryBound) {
  const int by_grid = c.size() / 2 - 1;
  double kappa = 0.0;
  switch (c.manifold.kind()) {
    case ManifoldKind::Sphere2: kappa = 1.0; break;
    case ManifoldKind::CliffordTorus2: kappa = 1.0 / kCliffordRadius; break;
    case ManifoldKind::ChartFlatTorus2: kappa = 0.0; break;
  }
  const double speed = sup_norm(velocity(c));
  const double coupling = 1.0 + 3.0 * std::abs(cfg.a) * speed * kappa;
  const double kmax = std::sqrt(bound / (cfg.dt * coupling));
  const double carrier = std::ceil(speed * kappa / kTwoPi - 1e-9);
  const double by_step = std::max(1.0, std::floor(kmax / kTwoPi) - carrier);
  return by_step < by_grid ? static_cast<int>(by_step) : by_grid;
}

// ---------------------------------------------------------------------------
// Steppers
// ---------------------------------------------------------------------------

struct StepResult {
  ClosedCurve state;
  double off_manifold = 0.0;  // distance to the manifold before the final projection
  int picard_iterations = 0;
};

namespace detail {

inline ClosedCurve with_samples(const ClosedCurve& like, Field s) { return ClosedCurve(std::move(s), like.manifold, like.winding); }

inline ClosedCurve projected(const ClosedCurve& c) { return with_samples(c, c.manifold.project_field(c.samples)); }

/// Nonlinear part N(v) = F(pi o v) - a (pi o v)_xxx, low-passed.
inline Field nonlinear_part(const ClosedCurve& v, const FlowConfig& cfg, int cutoff) {
  return lowpass(forcing(v, cfg.a, cfg.b, cfg.epsilon, false), cutoff);
}

}  // namespace detail

/// One step of classical RK4 in integrating-factor form: the linear part
/// -eps d^4 + a d^3 is propagated exactly, the four stages act on the
/// remaining nonlinear terms, and every stage value is projected back onto
/// the manifold.
inline StepResult step_projected_rk4(const ClosedCurve& c, const FlowConfig& cfg) {
  const double h = cfg.dt, eps = cfg.epsilon, a = cfg.a;
  const int cutoff = stability_cutoff(c, cfg);
  using detail::projected;
  using detail::with_samples;

  const Field k1 = detail::nonlinear_part(c, cfg, cutoff);
  const ClosedCurve half = propagate(c, 0.5 * h, eps, a);
  const ClosedCurve full = propagate(c, h, eps, a);

  const ClosedCurve y2 = projected(with_samples(c, propagate(with_samples(c, c.samples + 0.5 * h * k1), 0.5 * h, eps, a).samples));
  const Field k2 = detail::nonlinear_part(y2, cfg, cutoff);
  const ClosedCurve y3 = projected(with_samples(c, half.samples + 0.5 * h * k2));
  const Field k3 = detail::nonlinear_part(y3, cfg, cutoff);
  const ClosedCurve y4 = projected(with_samples(c, full.samples + h * propagate_field(k3, 0.5 * h, eps, a)));
  const Field k4 = detail::nonlinear_part(y4, cfg, cutoff);

  const Field incr = propagate_field(k1, h, eps, a) + 2.0 * propagate_field(k2 + k3, 0.5 * h, eps, a) + k4;
  const ClosedCurve raw = with_samples(c, full.samples + (h / 6.0) * incr);
  StepResult r{projected(raw), c.manifold.max_distance(raw.samples), 0};
  return r;
}

/// Ascher-Ruuth-Spiteri (4,4,3) additive Runge-Kutta: L implicit (diagonal
/// in Fourier space), nonlinear part explicit, projection after each stage.
inline StepResult step_imex(const ClosedCurve& c, const FlowConfig& cfg) {
  static constexpr double ae[5][4] = {{0, 0, 0, 0},
                                      {1.0 / 2, 0, 0, 0},
                                      {11.0 / 18, 1.0 / 18, 0, 0},
                                      {5.0 / 6, -5.0 / 6, 1.0 / 2, 0},
                                      {1.0 / 4, 7.0 / 4, 3.0 / 4, -7.0 / 4}};
  static constexpr double ai[5][5] = {{0, 0, 0, 0, 0},
                                      {0, 1.0 / 2, 0, 0, 0},
                                      {0, 1.0 / 6, 1.0 / 2, 0, 0},
                                      {0, -1.0 / 2, 1.0 / 2, 1.0 / 2, 0},
                                      {0, 3.0 / 2, -3.0 / 2, 1.0 / 2, 1.0 / 2}};
  constexpr double gamma = 0.5;
  const double h = cfg.dt;
  const int n = c.size();
  const int cutoff = stability_cutoff(c, cfg, kArs443ImaginaryBound);
  auto symbol = [&](int k) { return linear_symbol(k, n, cfg.epsilon, cfg.a); };

  std::vector<Field> nl;   // N(Y_j)
  std::vector<Field> lin;  // L Y_j
  std::vector<ClosedCurve> ys{c};
  nl.push_back(detail::nonlinear_part(c, cfg, cutoff));
  lin.push_back(apply_symbol(c.periodic_part(), symbol));
  double residual = 0.0;
  for (int i = 1; i <= 4; ++i) {
    Field rhs = c.periodic_part();
    for (int j = 0; j < i; ++j) rhs += h * ae[i][j] * nl[j];
    for (int j = 1; j < i; ++j) rhs += h * ai[i][j] * lin[j];
    const Field periodic = apply_symbol(rhs, [&](int k) { return 1.0 / (1.0 - h * gamma * symbol(k)); });
    const ClosedCurve raw = detail::with_samples(c, periodic + c.secular_part());
    if (i == 4) residual = c.manifold.max_distance(raw.samples);
    ys.push_back(detail::projected(raw));
    if (i < 4) {
      nl.push_back(detail::nonlinear_part(ys.back(), cfg, cutoff));
      lin.push_back(apply_symbol(ys.back().periodic_part(), symbol));
    }
  }
  return {ys.back(), residual, 0};
}

/// Precomputed Duhamel weights for one (grid, eps, dt, nodes) combination.
class DuhamelWeights {
 public:
  DuhamelWeights(int n, double eps, double dt, int q) : n_(n), q_(q), rule_(q) {
    std::tie(times_, weights_) = rule_.on(0.0, dt);
    const int modes = n / 2 + 1;
    // rows: target node j (q interior nodes, then the endpoint); cols: source node m
    coef_.assign(q + 1, Eigen::MatrixXd::Zero(modes, q));
    start_.resize(q + 1, modes);
    for (int j = 0; j <= q; ++j) {
      const double tj = j < q ? times_(j) : dt;
      for (int k = 0; k < modes; ++k) {
        const double lambda = -eps * std::pow(kTwoPi * k, 4);
        start_(j, k) = std::exp(lambda * tj);
        if (j == q) {
          for (int m = 0; m < q; ++m) coef_[j](k, m) = weights_(m) * std::exp(lambda * (dt - times_(m)));
        } else {
          const auto [sub_t, sub_w] = rule_.on(0.0, tj);
          for (int i = 0; i < q; ++i) {
            const double damp = sub_w(i) * std::exp(lambda * (tj - sub_t(i)));
            for (int m = 0; m < q; ++m) coef_[j](k, m) += damp * lagrange_basis(times_, m, sub_t(i));
          }
        }
      }
    }
  }

  int nodes() const { return q_; }
  double time(int j) const { return times_(j); }

  /// S(t_j) v0 + quadrature of int_0^{t_j} S(t_j - s) F(s) ds, in spectral space.
  Field apply(int j, const HalfSpectrum& v0_hat, const std::vector<HalfSpectrum>& f_hat) const {
    HalfSpectrum acc = v0_hat;
    for (int k = 0; k <= n_ / 2; ++k) {
      acc.row(k) *= start_(j, k);
      for (int m = 0; m < q_; ++m) acc.row(k) += coef_[j](k, m) * f_hat[m].row(k);
    }
    return inverse_transform(std::move(acc), n_);
  }

 private:
  int n_, q_;
  GaussLegendre rule_;
  Eigen::VectorXd times_, weights_;
  std::vector<Eigen::MatrixXd> coef_;
  Eigen::MatrixXd start_;
};

/// Fixed point of v -> S(t) v0 + int_0^t S(t-s) F(pi o v(s)) ds on [0, dt],
/// collocated at Gauss-Legendre nodes and iterated until successive iterates
/// agree to picard_tol in discrete H^1. Throws NoContraction when
/// picard_max_iter is exceeded.
inline StepResult step_duhamel_picard(const ClosedCurve& v0, const FlowConfig& cfg, const DuhamelWeights& w) {
  const int q = w.nodes();
  const Field secular = v0.secular_part();
  const HalfSpectrum v0_hat = forward_transform(v0.periodic_part());
  std::vector<Field> iterate(q + 1, v0.periodic_part());
  std::vector<HalfSpectrum> f_hat(q);

  for (int it = 1; it <= cfg.picard_max_iter; ++it) {
    for (int m = 0; m < q; ++m) {
      const ClosedCurve node = detail::with_samples(v0, v0.manifold.project_field(iterate[m] + secular));
      f_hat[m] = forward_transform(detail::forcing(node, cfg.a, cfg.b, cfg.epsilon, true));
    }
    double change = 0.0;
    for (int j = 0; j <= q; ++j) {
      Field next = w.apply(j, v0_hat, f_hat);
      change = std::max(change, h1_norm(next - iterate[j]));
      iterate[j] = std::move(next);
    }
    if (!std::isfinite(change)) break;
    if (change <= cfg.picard_tol) {
      ClosedCurve end = detail::with_samples(v0, iterate[q] + secular);
      const double dist = v0.manifold.max_distance(end.samples);
      if (!(dist < v0.manifold.tubular_radius())) throw OutOfTubularNeighborhood("Picard iterate left the tubular neighbourhood");
      return {std::move(end), dist, it};
    }
  }
  throw NoContraction("Picard iteration did not converge in " + std::to_string(cfg.picard_max_iter) +
                      " iterations; reduce dt for this epsilon");
}

// ---------------------------------------------------------------------------
// Trajectories
// ---------------------------------------------------------------------------

struct Failure {
  std::string kind;
  std::string message;
  double t = 0.0;
};

struct Trajectory {
  FlowConfig config;
  std::vector<double> times;
  std::vector<ClosedCurve> states;
  std::vector<double> off_manifold;        // per step, before final projection
  std::vector<int> picard_iterations;      // per step, DuhamelPicard only
  std::optional<Failure> failure;

  bool ok() const { return !failure.has_value(); }
  const ClosedCurve& final_state() const { return states.back(); }
};

/// Single-interval trajectory [0, dt] produced by the Duhamel-Picard scheme.
inline Trajectory picard_solve(const ClosedCurve& v0, const FlowConfig& cfg) {
  cfg.validate();
  if (!(cfg.epsilon > 0.0)) throw ConfigError("picard_solve requires epsilon > 0");
  if (!(v0.manifold.max_distance(v0.samples) < v0.manifold.tubular_radius()))
    throw OutOfTubularNeighborhood("picard_solve: initial curve outside the tubular neighbourhood");
  const DuhamelWeights w(v0.size(), cfg.epsilon, cfg.dt, cfg.quadrature_nodes);
  StepResult r = step_duhamel_picard(v0, cfg, w);
  Trajectory traj;
  traj.config = cfg;
  traj.times = {0.0, cfg.dt};
  traj.states = {v0, std::move(r.state)};
  traj.off_manifold = {r.off_manifold};
  traj.picard_iterations = {r.picard_iterations};
  return traj;
}

inline constexpr double kBlowUpFactor = 10.0;

/// Marches u0 to cfg.T, emitting a snapshot every `stride` steps and at the
/// end. Errors stop the march; the partial trajectory is returned with a
/// failure marker.
inline Trajectory evolve(const ClosedCurve& u0, const FlowConfig& cfg, int stride = 1) {
  cfg.validate();
  if (stride < 1) throw ConfigError("stride must be >= 1");
  Trajectory traj;
  traj.config = cfg;
  traj.times.push_back(0.0);
  traj.states.push_back(u0);
  const long steps = cfg.T == 0.0 ? 0 : std::max(1L, std::lround(cfg.T / cfg.dt));
  if (steps == 0) return traj;
  FlowConfig step_cfg = cfg;
  step_cfg.dt = cfg.T / static_cast<double>(steps);

  std::optional<DuhamelWeights> weights;
  if (cfg.integrator == Integrator::DuhamelPicard)
    weights.emplace(u0.size(), cfg.epsilon, step_cfg.dt, cfg.quadrature_nodes);

  auto guard_norm = [](const ClosedCurve& c) {
    return sobolev_norm(ClosedCurve(c.manifold.nearest_field(c.samples), c.manifold, c.winding), 2);
  };

  ClosedCurve state = u0;
  double t = 0.0;
  try {
    double last_norm = guard_norm(u0);
    for (long s = 1; s <= steps; ++s) {
      StepResult r;
      switch (cfg.integrator) {
        case Integrator::ProjectedRK4: r = step_projected_rk4(state, step_cfg); break;
        case Integrator::IMEX: r = step_imex(state, step_cfg); break;
        case Integrator::DuhamelPicard: r = step_duhamel_picard(state, step_cfg, *weights); break;
      }
      if (!r.state.samples.allFinite()) throw StepSizeUnstable("non-finite state");
      state = std::move(r.state);
      t = static_cast<double>(s) * step_cfg.dt;
      traj.off_manifold.push_back(r.off_manifold);
      if (cfg.integrator == Integrator::DuhamelPicard) traj.picard_iterations.push_back(r.picard_iterations);
      if (s % stride == 0 || s == steps) {
        const double norm = guard_norm(state);
        if (!(norm <= kBlowUpFactor * last_norm))
          throw StepSizeUnstable("H^2 norm grew from " + std::to_string(last_norm) + " to " + std::to_string(norm) +
                                 " within one output stride");
        last_norm = norm;
        traj.times.push_back(t);
        traj.states.push_back(state);
      }
    }
  } catch (const Error& e) {
    traj.failure = Failure{e.kind(), e.what(), t};
  }
  return traj;
}

// ---------------------------------------------------------------------------
// Epsilon continuation
// ---------------------------------------------------------------------------

struct ContinuationRow {
  double epsilon = 0.0;
  double distance_to_zero = 0.0;      // discrete H^1 distance at t = T to the eps = 0 run
  double distance_to_previous = 0.0;  // to the preceding (larger) eps; NaN for the first row
  std::optional<Failure> failure;
};

struct ContinuationTable {
  std::vector<ContinuationRow> rows;   // ordered by decreasing eps
  std::optional<Failure> zero_failure; // failure of the eps = 0 reference run
};

/// Runs evolve for every eps in eps_list and for eps = 0, comparing final
/// states. Runs are independent and use up to `threads` workers.
inline ContinuationTable epsilon_continuation(const ClosedCurve& u0, const FlowConfig& cfg,
                                              const std::vector<double>& eps_list, int threads = sweep_threads()) {
  if (eps_list.empty()) throw ConfigError("epsilon_continuation: empty epsilon list");
  for (std::size_t i = 0; i < eps_list.size(); ++i) {
    if (!(eps_list[i] > 0.0)) throw ConfigError("epsilon_continuation: epsilons must be positive");
    if (i > 0 && !(eps_list[i] < eps_list[i - 1])) throw ConfigError("epsilon_continuation: epsilons must decrease");
  }
  const int runs = static_cast<int>(eps_list.size()) + 1;
  std::vector<Trajectory> results(runs);
  parallel_for(runs, threads, [&](int i) {
    FlowConfig c = cfg;
    if (i + 1 < runs) {
      c.epsilon = eps_list[i];
    } else {
      c.epsilon = 0.0;
      if (c.integrator == Integrator::DuhamelPicard) c.integrator = Integrator::ProjectedRK4;
    }
    results[i] = evolve(u0, c, std::numeric_limits<int>::max());
  });

  ContinuationTable table;
  const Trajectory& zero = results.back();
  table.zero_failure = zero.failure;
  for (int i = 0; i + 1 < runs; ++i) {
    ContinuationRow row;
    row.epsilon = eps_list[i];
    row.failure = results[i].failure;
    const Field& fin = results[i].final_state().samples;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    row.distance_to_zero = (row.failure || zero.failure) ? nan : h1_norm(fin - zero.final_state().samples);
    row.distance_to_previous = (i == 0 || row.failure || results[i - 1].failure)
                                   ? nan
                                   : h1_norm(fin - results[i - 1].final_state().samples);
    table.rows.push_back(std::move(row));
  }
  return table;
}

}  // namespace dispflow
