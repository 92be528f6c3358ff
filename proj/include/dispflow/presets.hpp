#pragma once

// Named initial curves. Descriptors:
//   great_circle
//   latitude:<theta>                 theta in radians, "pi/3" style accepted
//   torus_geodesic:<m1>,<m2>         integer winding numbers
//   random_smooth[:seed[,decay[,amplitude]]]
//   file:<path>                      JSON {"manifold", "samples", ["winding"]}

#include <nlohmann/json.hpp>

#include <Eigen/Dense>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "dispflow/curve.hpp"
#include "dispflow/errors.hpp"
#include "dispflow/manifold.hpp"
#include "dispflow/spectral.hpp"

namespace dispflow {

inline constexpr double kDefaultDecay = 0.5;
inline constexpr double kDefaultAmplitude = 0.15;
inline constexpr int kReferenceGrid = 1024;

/// (sin(theta) cos 2 pi x, sin(theta) sin 2 pi x, cos(theta)); theta = pi/2 is the equator.
inline ClosedCurve latitude_circle(double theta, int n) {
  const Eigen::ArrayXd x = kTwoPi * grid_nodes(n).array();
  Field s(n, 3);
  s.col(0) = std::sin(theta) * x.cos();
  s.col(1) = std::sin(theta) * x.sin();
  s.col(2).setConstant(std::cos(theta));
  return ClosedCurve(std::move(s), Manifold(ManifoldKind::Sphere2));
}

inline ClosedCurve great_circle(int n) { return latitude_circle(std::numbers::pi / 2, n); }

/// Embeds a chart curve (lift in R^2) into the Clifford torus in R^4.
inline ClosedCurve clifford_from_chart(const ClosedCurve& chart) {
  if (chart.manifold.kind() != ManifoldKind::ChartFlatTorus2) throw WrongManifold("clifford_from_chart: expected a chart curve");
  const Eigen::ArrayXd a = kTwoPi * chart.samples.col(0).array();
  const Eigen::ArrayXd b = kTwoPi * chart.samples.col(1).array();
  Field s(chart.size(), 4);
  s.col(0) = kCliffordRadius * a.cos();
  s.col(1) = kCliffordRadius * a.sin();
  s.col(2) = kCliffordRadius * b.cos();
  s.col(3) = kCliffordRadius * b.sin();
  return ClosedCurve(std::move(s), Manifold(ManifoldKind::CliffordTorus2));
}

/// x -> (m1 x, m2 x) in the chart, or its Clifford image.
inline ClosedCurve torus_geodesic(int m1, int m2, int n, const Manifold& m) {
  Eigen::RowVectorXd w(2);
  w << m1, m2;
  ClosedCurve chart(grid_nodes(n) * w, Manifold(ManifoldKind::ChartFlatTorus2), w);
  if (m.kind() == ManifoldKind::ChartFlatTorus2) return chart;
  if (m.kind() == ManifoldKind::CliffordTorus2) return clifford_from_chart(chart);
  throw WrongManifold("torus_geodesic needs a torus target, got " + m.name());
}

/// Smooth pseudo-random curve. Fourier coefficients of a perturbation of a
/// base geodesic are drawn with size amplitude * exp(-decay |n|); the curve is
/// projected, re-smoothed and projected again on a fixed reference grid and
/// then resampled, so every grid sees the same continuum curve.
inline ClosedCurve random_smooth(std::uint64_t seed, double decay, double amplitude, int n, const Manifold& m) {
  if (!(decay > 0.0)) throw ConfigError("random_smooth: decay must be positive");
  if (!(amplitude >= 0.0)) throw ConfigError("random_smooth: amplitude must be >= 0");
  const int ref = std::max(kReferenceGrid, n);
  const int modes = std::min(ref / 2 - 1, static_cast<int>(std::ceil(40.0 / decay)));
  const int chart_dim = m.kind() == ManifoldKind::Sphere2 ? 3 : 2;

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const Eigen::ArrayXd x = kTwoPi * grid_nodes(ref).array();
  Field pert = Field::Zero(ref, chart_dim);
  for (int k = 1; k <= modes; ++k) {
    const double size = amplitude * std::exp(-decay * k);
    for (int d = 0; d < chart_dim; ++d) {
      const double cs = normal(rng) * size, sn = normal(rng) * size;
      pert.col(d) += (cs * (k * x).cos() + sn * (k * x).sin()).matrix();
    }
  }

  const double keep = std::min(ref / 2 - 1.0, 36.0 / decay);
  auto smooth = [&](const Field& f) {
    return apply_symbol(f, [&](int k) { return std::exp(-std::pow(k / keep, 8)); });
  };

  if (m.kind() == ManifoldKind::Sphere2) {
    const Manifold sphere(ManifoldKind::Sphere2);
    Field s = sphere.nearest_field(great_circle(ref).samples + pert);
    s = sphere.nearest_field(smooth(s));
    return ClosedCurve(sphere.nearest_field(resample(s, n)), sphere);
  }
  // tori: perturb the straight line x -> (x, 0) in the chart
  Eigen::RowVectorXd w(2);
  w << 1, 0;
  const Field periodic = smooth(pert);
  ClosedCurve chart(resample(periodic, n) + grid_nodes(n) * w, Manifold(ManifoldKind::ChartFlatTorus2), w);
  return m.kind() == ManifoldKind::ChartFlatTorus2 ? chart : clifford_from_chart(chart);
}

namespace detail {

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(item);
  return out;
}

inline double parse_number(const std::string& s, const std::string& what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("cannot parse " + what + " from '" + s + "'");
  }
}

/// Accepts plain numbers and the forms "pi", "k*pi", "pi/k", "k*pi/l".
inline double parse_angle(const std::string& s) {
  const auto pos = s.find("pi");
  if (pos == std::string::npos) return parse_number(s, "angle");
  std::string head = s.substr(0, pos), tail = s.substr(pos + 2);
  double v = std::numbers::pi;
  if (!head.empty()) {
    if (head.back() == '*') head.pop_back();
    v *= parse_number(head, "angle");
  }
  if (!tail.empty()) {
    if (tail.front() != '/') throw ConfigError("cannot parse angle from '" + s + "'");
    v /= parse_number(tail.substr(1), "angle");
  }
  return v;
}

inline int parse_int(const std::string& s, const std::string& what) {
  const double v = parse_number(s, what);
  if (v != std::floor(v)) throw ConfigError(what + " must be an integer");
  return static_cast<int>(v);
}

inline ClosedCurve curve_from_file(const std::string& path, int n, const Manifold& m) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open curve file '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw ConfigError("curve file '" + path + "': " + e.what());
  }
  if (!j.contains("samples") || !j["samples"].is_array()) throw ConfigError("curve file needs a 'samples' array");
  if (j.contains("manifold") && Manifold::from_name(j["manifold"].get<std::string>()) != m)
    throw ConfigError("curve file manifold does not match the run manifold");
  const auto& rows = j["samples"];
  const int src = static_cast<int>(rows.size());
  if (!is_power_of_two(src) || src < kMinGrid) throw ConfigError("curve file: sample count must be a power of two >= 16");
  Field s(src, m.ambient_dim());
  for (int i = 0; i < src; ++i) {
    if (!rows[i].is_array() || static_cast<int>(rows[i].size()) != m.ambient_dim())
      throw ConfigError("curve file: wrong ambient dimension in row " + std::to_string(i));
    for (int d = 0; d < m.ambient_dim(); ++d) s(i, d) = rows[i][d].get<double>();
  }
  Eigen::RowVectorXd w = Eigen::RowVectorXd::Zero(m.ambient_dim());
  if (j.contains("winding")) {
    if (static_cast<int>(j["winding"].size()) != m.ambient_dim()) throw ConfigError("curve file: bad winding");
    for (int d = 0; d < m.ambient_dim(); ++d) w(d) = j["winding"][d].get<double>();
  }
  const Field periodic = s - grid_nodes(src) * w;
  Field target = resample(periodic, n) + grid_nodes(n) * w;
  if (m.max_distance(target) >= m.tubular_radius()) throw ConfigError("curve file: samples far from the manifold");
  return ClosedCurve(m.nearest_field(target), m, w);
}

}  // namespace detail

/// Resolves an initial-condition descriptor on an n-point grid.
inline ClosedCurve make_initial_curve(const std::string& descriptor, int n, const Manifold& m, std::uint64_t seed = 0) {
  if (!is_power_of_two(n) || n < kMinGrid) throw ConfigError("grid must be a power of two >= 16");
  const auto colon = descriptor.find(':');
  const std::string name = descriptor.substr(0, colon);
  const std::string args = colon == std::string::npos ? "" : descriptor.substr(colon + 1);
  const std::vector<std::string> parts = args.empty() ? std::vector<std::string>{} : detail::split(args, ',');

  auto need_sphere = [&] {
    if (m.kind() != ManifoldKind::Sphere2) throw ConfigError("preset '" + name + "' needs Sphere2");
  };

  if (name == "great_circle") {
    need_sphere();
    if (!parts.empty()) throw ConfigError("great_circle takes no arguments");
    return great_circle(n);
  }
  if (name == "latitude") {
    need_sphere();
    if (parts.size() != 1) throw ConfigError("latitude needs one angle");
    const double theta = detail::parse_angle(parts[0]);
    if (!(theta > 0.0 && theta < std::numbers::pi)) throw ConfigError("latitude angle must lie in (0, pi)");
    return latitude_circle(theta, n);
  }
  if (name == "torus_geodesic") {
    if (parts.size() != 2) throw ConfigError("torus_geodesic needs two winding numbers");
    if (m.kind() == ManifoldKind::Sphere2) throw ConfigError("torus_geodesic needs a torus target");
    return torus_geodesic(detail::parse_int(parts[0], "m1"), detail::parse_int(parts[1], "m2"), n, m);
  }
  if (name == "random_smooth") {
    if (parts.size() > 3) throw ConfigError("random_smooth takes at most seed,decay,amplitude");
    const std::uint64_t s = parts.size() > 0 ? static_cast<std::uint64_t>(detail::parse_int(parts[0], "seed")) : seed;
    const double decay = parts.size() > 1 ? detail::parse_number(parts[1], "decay") : kDefaultDecay;
    const double amp = parts.size() > 2 ? detail::parse_number(parts[2], "amplitude") : kDefaultAmplitude;
    return random_smooth(s, decay, amp, n, m);
  }
  if (name == "file") {
    if (args.empty()) throw ConfigError("file preset needs a path");
    return detail::curve_from_file(args, n, m);
  }
  throw ConfigError("unknown initial-condition preset '" + name + "'");
}

}  // namespace dispflow
