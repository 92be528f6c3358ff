#pragma once

// Run manifests, artifacts and the command implementations behind `dcl`.

#include <nlohmann/json.hpp>

#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "dispflow/flow.hpp"
#include "dispflow/invariants.hpp"
#include "dispflow/presets.hpp"
#include "dispflow/verify.hpp"

namespace dispflow {

enum ExitCode : int { kExitOk = 0, kExitCheckFailed = 1, kExitConfig = 2, kExitSolver = 3 };

struct RunManifest {
  FlowConfig config;
  std::string manifold = "Sphere2";
  std::string initial = "great_circle";
  std::string output_dir;
  int stride = 1;
  std::uint64_t seed = 0;
  bool checkpoints = false;

  long steps() const { return config.T == 0.0 ? 0 : std::max(1L, std::lround(config.T / config.dt)); }
};

// ---------------------------------------------------------------------------
// Manifest parsing
// ---------------------------------------------------------------------------

namespace detail {

inline void reject_unknown(const nlohmann::json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be a JSON object");
  for (const auto& [key, value] : j.items())
    if (!allowed.count(key)) throw ConfigError("unknown key '" + key + "' in " + where);
}

template <class T>
T required(const nlohmann::json& j, const std::string& key, const std::string& where) {
  if (!j.contains(key)) throw ConfigError("missing key '" + key + "' in " + where);
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError("key '" + key + "' in " + where + " has the wrong type");
  }
}

template <class T>
T optional_key(const nlohmann::json& j, const std::string& key, T fallback, const std::string& where) {
  return j.contains(key) ? required<T>(j, key, where) : fallback;
}

}  // namespace detail

inline RunManifest manifest_from_json(const nlohmann::json& j) {
  detail::reject_unknown(j, {"config", "output_dir", "stride", "seed", "checkpoints"}, "manifest");
  RunManifest m;
  const nlohmann::json& c = j.contains("config") ? j.at("config") : throw ConfigError("missing key 'config'");
  detail::reject_unknown(c,
                         {"a", "b", "epsilon", "grid", "dt", "T", "integrator", "picard_tol", "picard_max_iter",
                          "quadrature_nodes", "manifold", "initial"},
                         "config");
  const std::string w = "config";
  m.config.a = detail::required<double>(c, "a", w);
  m.config.b = detail::required<double>(c, "b", w);
  m.config.epsilon = detail::optional_key<double>(c, "epsilon", 0.0, w);
  m.config.grid = detail::required<int>(c, "grid", w);
  m.config.dt = detail::required<double>(c, "dt", w);
  m.config.T = detail::required<double>(c, "T", w);
  m.config.integrator = integrator_from_string(
      detail::optional_key<std::string>(c, "integrator", to_string(Integrator::ProjectedRK4), w));
  m.config.picard_tol = detail::optional_key<double>(c, "picard_tol", m.config.picard_tol, w);
  m.config.picard_max_iter = detail::optional_key<int>(c, "picard_max_iter", m.config.picard_max_iter, w);
  m.config.quadrature_nodes = detail::optional_key<int>(c, "quadrature_nodes", m.config.quadrature_nodes, w);
  m.manifold = detail::required<std::string>(c, "manifold", w);
  m.initial = detail::required<std::string>(c, "initial", w);
  m.output_dir = detail::required<std::string>(j, "output_dir", "manifest");
  m.stride = detail::optional_key<int>(j, "stride", 1, "manifest");
  m.seed = detail::optional_key<std::uint64_t>(j, "seed", 0, "manifest");
  m.checkpoints = detail::optional_key<bool>(j, "checkpoints", false, "manifest");

  m.config.validate();
  Manifold::from_name(m.manifold);
  if (m.output_dir.empty()) throw ConfigError("output_dir must not be empty");
  if (m.stride < 1) throw ConfigError("stride must be >= 1");
  if (m.steps() > 0 && m.steps() % m.stride != 0) throw ConfigError("stride must divide the step count");
  return m;
}

inline RunManifest load_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open manifest '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("manifest '" + path + "': " + e.what());
  }
  return manifest_from_json(j);
}

/// Resolved manifest with every default filled in; keys sort canonically.
inline nlohmann::json manifest_to_json(const RunManifest& m) {
  nlohmann::json c = {{"a", m.config.a},
                      {"b", m.config.b},
                      {"epsilon", m.config.epsilon},
                      {"grid", m.config.grid},
                      {"dt", m.config.dt},
                      {"T", m.config.T},
                      {"integrator", to_string(m.config.integrator)},
                      {"picard_tol", m.config.picard_tol},
                      {"picard_max_iter", m.config.picard_max_iter},
                      {"quadrature_nodes", m.config.quadrature_nodes},
                      {"manifold", m.manifold},
                      {"initial", m.initial}};
  return {{"config", c},
          {"output_dir", m.output_dir},
          {"stride", m.stride},
          {"seed", m.seed},
          {"checkpoints", m.checkpoints}};
}

inline ClosedCurve initial_curve(const RunManifest& m) {
  return make_initial_curve(m.initial, m.config.grid, Manifold::from_name(m.manifold), m.seed);
}

// ---------------------------------------------------------------------------
// Artifacts
// ---------------------------------------------------------------------------

/// Writes `text` to `path` through a temporary file and a rename.
inline void write_atomic(const std::filesystem::path& path, const std::string& text) {
  std::filesystem::create_directories(path.parent_path().empty() ? "." : path.parent_path());
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << text;
    if (!out.flush()) throw std::runtime_error("short write to " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

inline const char* kReportHeader = "t,l2_ux,E,h1,h2,h3,off_manifold,nt_quantity";

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string report_csv(const std::vector<EnergyReport>& rows) {
  std::ostringstream out;
  out << kReportHeader << "\r\n";
  for (const auto& r : rows) {
    out << format_double(r.t) << ',' << format_double(r.l2_ux) << ',' << format_double(r.E);
    for (int k = 0; k < kReportSobolevOrder; ++k) out << ',' << format_double(r.hm_norms.at(k));
    out << ',' << format_double(r.off_manifold) << ',';
    if (r.nt_quantity) out << format_double(*r.nt_quantity);
    out << "\r\n";
  }
  return out.str();
}

inline std::vector<EnergyReport> parse_report_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("report: empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kReportHeader) throw ConfigError("report: unexpected header '" + line + "'");
  std::vector<EnergyReport> rows;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::size_t start = 0;
    for (std::size_t pos; (pos = line.find(',', start)) != std::string::npos; start = pos + 1)
      f.push_back(line.substr(start, pos - start));
    f.push_back(line.substr(start));
    if (f.size() != 8) throw ConfigError("report: expected 8 fields, got " + std::to_string(f.size()));
    EnergyReport r;
    r.t = detail::parse_number(f[0], "t");
    r.l2_ux = detail::parse_number(f[1], "l2_ux");
    r.E = detail::parse_number(f[2], "E");
    for (int k = 0; k < kReportSobolevOrder; ++k) r.hm_norms.push_back(detail::parse_number(f[3 + k], "h"));
    r.off_manifold = detail::parse_number(f[6], "off_manifold");
    if (!f[7].empty()) r.nt_quantity = detail::parse_number(f[7], "nt_quantity");
    rows.push_back(std::move(r));
  }
  return rows;
}

/// 64-bit FNV-1a, hex encoded.
inline std::string fnv1a_hex(const std::string& text) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
  return buf;
}

inline nlohmann::json curve_to_json(const ClosedCurve& c, double t) {
  nlohmann::json samples = nlohmann::json::array();
  for (int i = 0; i < c.size(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (int d = 0; d < c.dim(); ++d) row.push_back(c.samples(i, d));
    samples.push_back(row);
  }
  nlohmann::json w = nlohmann::json::array();
  for (int d = 0; d < c.dim(); ++d) w.push_back(c.winding(d));
  return {{"t", t}, {"manifold", c.manifold.name()}, {"samples", samples}, {"winding", w}};
}

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

struct SimulateResult {
  int exit_code = kExitOk;
  std::vector<EnergyReport> rows;
  std::optional<Failure> failure;
};

inline SimulateResult run_simulation(const RunManifest& m) {
  SimulateResult res;
  const ClosedCurve u0 = initial_curve(m);
  const Trajectory traj = evolve(u0, m.config, m.stride);
  res.rows = energy_reports(traj);
  res.failure = traj.failure;
  res.exit_code = traj.ok() ? kExitOk : kExitSolver;

  const std::filesystem::path dir(m.output_dir);
  const std::string csv = report_csv(res.rows);
  write_atomic(dir / "report.csv", csv);
  write_atomic(dir / "manifest.json", manifest_to_json(m).dump(2) + "\n");
  if (m.checkpoints) {
    for (std::size_t k = 0; k < traj.states.size(); ++k)
      write_atomic(dir / ("checkpoint_" + std::to_string(k) + ".json"),
                   curve_to_json(traj.states[k], traj.times[k]).dump() + "\n");
  }
  const DriftReport drift = drift_report(res.rows);
  nlohmann::json status = {{"status", traj.ok() ? "ok" : "failed"},
                           {"rows", res.rows.size()},
                           {"report_checksum_fnv1a64", fnv1a_hex(csv)},
                           {"max_l2_drift", drift.max_l2_drift},
                           {"max_E_drift", drift.max_E_drift},
                           {"exit_code", res.exit_code}};
  if (traj.failure)
    status["failure"] = {{"kind", traj.failure->kind}, {"message", traj.failure->message}, {"t", traj.failure->t}};
  write_atomic(dir / "status.json", status.dump(2) + "\n");
  return res;
}

inline std::string check_line(const Check& c) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-5s %-13s N=%-5d %-34s %.3e %s %.3e", c.pass ? "PASS" : "FAIL", c.suite.c_str(),
                c.grid, c.name.c_str(), c.value, c.relation.c_str(), c.tolerance);
  return c.relation == "info" ? std::string("INFO ") + (buf + 5) : buf;
}

/// Runs the named suite; returns the exit code.
inline int run_verify(const std::string& suite, const std::vector<int>& grids, std::ostream& out) {
  const auto& suites = verify_suites();
  const auto it = suites.find(suite);
  if (it == suites.end()) {
    out << "unknown suite '" << suite << "'\n";
    return kExitConfig;
  }
  for (int n : grids)
    if (!is_power_of_two(n) || n < kMinGrid) {
      out << "grid sizes must be powers of two >= 16\n";
      return kExitConfig;
    }
  bool ok = true;
  for (const Check& c : it->second(grids)) {
    out << check_line(c) << "\n";
    ok = ok && c.pass;
  }
  return ok ? kExitOk : kExitCheckFailed;
}

enum class ConvergeMode { Epsilon, Grid, Dt };

inline ConvergeMode converge_mode_from_string(const std::string& s) {
  if (s == "epsilon") return ConvergeMode::Epsilon;
  if (s == "grid") return ConvergeMode::Grid;
  if (s == "dt") return ConvergeMode::Dt;
  throw ConfigError("unknown convergence mode '" + s + "'");
}

inline constexpr double kDefaultContinuationEpsilon = 4e-5;

/// Convergence table as CSV text; sets `failed` when any level failed.
inline std::string run_converge(const RunManifest& m, ConvergeMode mode, int levels, bool& failed) {
  if (levels < 3) throw ConfigError("converge needs at least 3 levels");
  std::ostringstream out;
  failed = false;
  const Manifold manifold = Manifold::from_name(m.manifold);
  switch (mode) {
    case ConvergeMode::Epsilon: {
      const double e0 = m.config.epsilon > 0.0 ? m.config.epsilon : kDefaultContinuationEpsilon;
      std::vector<double> eps;
      for (int i = 0; i < levels; ++i) eps.push_back(e0 / std::pow(2.0, i));
      const ContinuationTable table = epsilon_continuation(initial_curve(m), m.config, eps);
      out << "epsilon,distance_to_zero,distance_to_previous,status\r\n";
      if (table.zero_failure) failed = true;
      for (const auto& r : table.rows) {
        out << format_double(r.epsilon) << ',' << format_double(r.distance_to_zero) << ','
            << format_double(r.distance_to_previous) << ',' << (r.failure ? r.failure->kind : "ok") << "\r\n";
        failed = failed || r.failure.has_value();
      }
      break;
    }
    case ConvergeMode::Grid: {
      const GridStudy st = grid_study(m.initial, manifold, m.config, levels, m.seed);
      out << "grid,error_vs_finest,status\r\n";
      failed = st.failure.has_value();
      for (std::size_t i = 0; i < st.grids.size(); ++i)
        out << st.grids[i] << ',' << (i < st.errors.size() ? format_double(st.errors[i]) : "") << ','
            << (failed ? st.failure->kind : "ok") << "\r\n";
      break;
    }
    case ConvergeMode::Dt: {
      const DtStudy st = dt_study(initial_curve(m), m.config, levels);
      out << "dt,difference_to_next,observed_order,E_drift,status\r\n";
      failed = st.failure.has_value();
      for (std::size_t i = 0; i < st.dts.size(); ++i) {
        out << format_double(st.dts[i]) << ',' << (i < st.differences.size() ? format_double(st.differences[i]) : "")
            << ',' << (i < st.orders.size() ? format_double(st.orders[i]) : "") << ','
            << format_double(st.E_drifts[i]) << ',' << (failed ? st.failure->kind : "ok") << "\r\n";
      }
      break;
    }
  }
  return out.str();
}

}  // namespace dispflow
