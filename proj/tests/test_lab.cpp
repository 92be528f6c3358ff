#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <algorithm>
#include <numbers>
#include <sstream>
#include <sys/wait.h>
#include <unistd.h>

#include "dispflow/lab.hpp"

using namespace dispflow;
namespace fs = std::filesystem;

namespace {

nlohmann::json base_manifest(const std::string& out) {
  return {{"config",
           {{"manifold", "Sphere2"},
            {"initial", "random_smooth:1,5,20"},
            {"a", 1.0},
            {"b", 0.5},
            {"grid", 32},
            {"dt", 1e-5},
            {"T", 1e-4}}},
          {"output_dir", out},
          {"stride", 2}};
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("dispflow_lab_" + name + "_" + std::to_string(::getpid()));
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path write_manifest(const fs::path& dir, const nlohmann::json& j) {
  const fs::path p = dir / "manifest_in.json";
  std::ofstream(p) << j.dump(2);
  return p;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(DCL_EXECUTABLE) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST(Manifest, ParsesAndFillsDefaults) {
  const RunManifest m = manifest_from_json(base_manifest("out"));
  EXPECT_EQ(m.config.grid, 32);
  EXPECT_EQ(m.config.epsilon, 0.0);
  EXPECT_EQ(m.config.integrator, Integrator::ProjectedRK4);
  EXPECT_EQ(m.steps(), 10);
  EXPECT_FALSE(m.checkpoints);
  const RunManifest again = manifest_from_json(manifest_to_json(m));
  EXPECT_EQ(manifest_to_json(again), manifest_to_json(m));
}

TEST(Manifest, RejectsUnknownAndMissingKeys) {
  nlohmann::json j = base_manifest("out");
  j["colour"] = "red";
  EXPECT_THROW(manifest_from_json(j), ConfigError);
  j = base_manifest("out");
  j["config"]["alpha"] = 1.0;
  EXPECT_THROW(manifest_from_json(j), ConfigError);
  for (const char* key : {"a", "b", "grid", "dt", "T", "manifold", "initial"}) {
    j = base_manifest("out");
    j["config"].erase(key);
    EXPECT_THROW(manifest_from_json(j), ConfigError) << key;
  }
  j = base_manifest("out");
  j.erase("output_dir");
  EXPECT_THROW(manifest_from_json(j), ConfigError);
  j = base_manifest("out");
  j["config"]["grid"] = "big";
  EXPECT_THROW(manifest_from_json(j), ConfigError);
}

TEST(Manifest, RejectsInvalidValues) {
  auto with = [](const std::string& key, const nlohmann::json& v, bool top = false) {
    nlohmann::json j = base_manifest("out");
    (top ? j : j["config"])[key] = v;
    return j;
  };
  EXPECT_THROW(manifest_from_json(with("stride", 3, true)), ConfigError);  // 10 steps
  EXPECT_THROW(manifest_from_json(with("stride", 0, true)), ConfigError);
  EXPECT_THROW(manifest_from_json(with("grid", 48)), ConfigError);
  EXPECT_THROW(manifest_from_json(with("dt", 0.0)), ConfigError);
  EXPECT_THROW(manifest_from_json(with("epsilon", -1.0)), ConfigError);
  EXPECT_THROW(manifest_from_json(with("manifold", "Torus3")), ConfigError);
  EXPECT_THROW(manifest_from_json(with("integrator", "Euler")), ConfigError);
  EXPECT_THROW(manifest_from_json(with("integrator", "DuhamelPicard")), ConfigError);  // needs eps > 0
  EXPECT_THROW(manifest_from_json(with("output_dir", "", true)), ConfigError);
}

TEST(Manifest, LoadReportsMissingAndMalformedFiles) {
  const fs::path dir = scratch("load");
  EXPECT_THROW(load_manifest((dir / "nope.json").string()), ConfigError);
  std::ofstream(dir / "bad.json") << "{ not json";
  EXPECT_THROW(load_manifest((dir / "bad.json").string()), ConfigError);
}

TEST(Presets, Descriptors) {
  const Manifold sphere(ManifoldKind::Sphere2), chart(ManifoldKind::ChartFlatTorus2);
  const ClosedCurve lat = make_initial_curve("latitude:pi/3", 32, sphere);
  EXPECT_NEAR(lat.samples(0, 2), 0.5, 1e-15);
  EXPECT_NEAR(make_initial_curve("latitude:2*pi/3", 32, sphere).samples(0, 2), -0.5, 1e-15);
  EXPECT_NEAR(make_initial_curve("latitude:1", 32, sphere).samples(0, 2), std::cos(1.0), 1e-15);
  EXPECT_EQ(make_initial_curve("great_circle", 32, sphere).samples, great_circle(32).samples);
  EXPECT_EQ(make_initial_curve("torus_geodesic:2,1", 32, chart).winding(0), 2.0);
  EXPECT_EQ(make_initial_curve("random_smooth", 32, sphere, 9).samples,
            random_smooth(9, kDefaultDecay, kDefaultAmplitude, 32, sphere).samples);

  for (const char* bad : {"latitude", "latitude:pi", "latitude:0", "great_circle:1", "torus_geodesic:1",
                          "torus_geodesic:1.5,2", "random_smooth:1,2,3,4", "spiral", "file:/no/such/file"})
    EXPECT_THROW(make_initial_curve(bad, 32, sphere), ConfigError) << bad;
  EXPECT_THROW(make_initial_curve("great_circle", 32, chart), ConfigError);
  EXPECT_THROW(make_initial_curve("great_circle", 24, sphere), ConfigError);
}

TEST(Presets, CurveFileRoundTrip) {
  const fs::path dir = scratch("curvefile");
  const Manifold chart(ManifoldKind::ChartFlatTorus2);
  const ClosedCurve c = random_smooth(4, 1.0, 0.1, 32, chart);
  std::ofstream(dir / "c.json") << curve_to_json(c, 0.0).dump();
  const ClosedCurve back = make_initial_curve("file:" + (dir / "c.json").string(), 64, chart);
  EXPECT_EQ(back.size(), 64);
  for (int i = 0; i < 32; ++i) EXPECT_NEAR((back.samples.row(2 * i) - c.samples.row(i)).norm(), 0.0, 1e-12);
}

TEST(Report, CsvRoundTrip) {
  std::vector<EnergyReport> rows;
  rows.push_back(energy_report(random_smooth(1, 1.0, 0.3, 32, Manifold(ManifoldKind::Sphere2)), 0.0));
  rows.push_back(energy_report(random_smooth(2, 1.0, 0.1, 32, Manifold(ManifoldKind::CliffordTorus2)), 0.125));
  const std::string text = report_csv(rows);
  EXPECT_EQ(text.substr(0, text.find("\r\n")), kReportHeader);
  const auto back = parse_report_csv(text);
  ASSERT_EQ(back.size(), 2u);
  for (std::size_t i = 0; i < 2; ++i) {
    EXPECT_EQ(back[i].t, rows[i].t);
    EXPECT_EQ(back[i].E, rows[i].E);
    EXPECT_EQ(back[i].hm_norms, rows[i].hm_norms);
    EXPECT_EQ(back[i].nt_quantity, rows[i].nt_quantity);
  }
  EXPECT_FALSE(back[1].nt_quantity.has_value());
  EXPECT_EQ(report_csv(back), text);
  EXPECT_THROW(parse_report_csv("t,E\r\n"), ConfigError);
  EXPECT_THROW(parse_report_csv(""), ConfigError);
  EXPECT_THROW(parse_report_csv(std::string(kReportHeader) + "\r\n1,2,3\r\n"), ConfigError);
}

TEST(Simulate, WritesArtifactsDeterministically) {
  const fs::path a = scratch("det_a"), b = scratch("det_b");
  const SimulateResult ra = run_simulation(manifest_from_json(base_manifest(a.string())));
  const SimulateResult rb = run_simulation(manifest_from_json(base_manifest(b.string())));
  EXPECT_EQ(ra.exit_code, kExitOk);
  EXPECT_EQ(ra.rows.size(), 6u);  // t = 0 and every second step of ten
  const std::string ca = slurp(a / "report.csv"), cb = slurp(b / "report.csv");
  EXPECT_FALSE(ca.empty());
  EXPECT_EQ(ca, cb);
  const nlohmann::json status = nlohmann::json::parse(slurp(a / "status.json"));
  EXPECT_EQ(status["status"], "ok");
  EXPECT_EQ(status["report_checksum_fnv1a64"], fnv1a_hex(ca));
  const nlohmann::json echoed = nlohmann::json::parse(slurp(a / "manifest.json"));
  EXPECT_EQ(echoed["config"]["picard_max_iter"], 60);
}

TEST(Simulate, ZeroHorizonWritesOneRow) {
  const fs::path dir = scratch("t0");
  nlohmann::json j = base_manifest(dir.string());
  j["config"]["T"] = 0.0;
  const SimulateResult r = run_simulation(manifest_from_json(j));
  EXPECT_EQ(r.exit_code, kExitOk);
  EXPECT_EQ(parse_report_csv(slurp(dir / "report.csv")).size(), 1u);
}

TEST(Simulate, LatitudeCheckpointMatchesOracle) {
  const fs::path dir = scratch("lat");
  nlohmann::json j = nlohmann::json::parse(slurp(fs::path(MANIFEST_DIR) / "rotating_latitude.json"));
  j["output_dir"] = dir.string();
  const RunManifest m = manifest_from_json(j);
  const SimulateResult r = run_simulation(m);
  ASSERT_EQ(r.exit_code, kExitOk);
  const int last = static_cast<int>(r.rows.size()) - 1;
  const nlohmann::json cp = nlohmann::json::parse(slurp(dir / ("checkpoint_" + std::to_string(last) + ".json")));
  EXPECT_DOUBLE_EQ(cp["t"].get<double>(), m.config.T);
  const ClosedCurve exact = oracle_latitude_circle(1.0, m.config.T, m.config.a, m.config.b, m.config.grid);
  double worst = 0.0;
  for (int i = 0; i < m.config.grid; ++i)
    for (int d = 0; d < 3; ++d) worst = std::max(worst, std::abs(cp["samples"][i][d].get<double>() - exact.samples(i, d)));
  EXPECT_LE(worst, 1e-10);
  EXPECT_LE(drift_report(r.rows).max_E_drift, 1e-12);
}

TEST(Simulate, DaRiosManifestMatchesOracle) {
  const fs::path dir = scratch("darios");
  nlohmann::json j = nlohmann::json::parse(slurp(fs::path(MANIFEST_DIR) / "darios_latitude.json"));
  j["output_dir"] = dir.string();
  const RunManifest m = manifest_from_json(j);
  const SimulateResult r = run_simulation(m);
  ASSERT_EQ(r.exit_code, kExitOk);
  const nlohmann::json cp =
      nlohmann::json::parse(slurp(dir / ("checkpoint_" + std::to_string(r.rows.size() - 1) + ".json")));
  const ClosedCurve exact = oracle_latitude_circle(std::numbers::pi / 3, m.config.T, 0.0, 0.0, m.config.grid);
  double worst = 0.0;
  for (int i = 0; i < m.config.grid; ++i)
    for (int d = 0; d < 3; ++d) worst = std::max(worst, std::abs(cp["samples"][i][d].get<double>() - exact.samples(i, d)));
  EXPECT_LE(worst, 1e-6);
}

TEST(Simulate, GreatCircleReportConservesE) {
  const fs::path dir = scratch("gc");
  nlohmann::json j = base_manifest(dir.string());
  j["config"]["initial"] = "great_circle";
  j["config"]["grid"] = 64;
  j["config"]["T"] = 0.01;
  j["stride"] = 100;
  const SimulateResult r = run_simulation(manifest_from_json(j));
  ASSERT_EQ(r.exit_code, kExitOk);
  const auto rows = parse_report_csv(slurp(dir / "report.csv"));
  ASSERT_EQ(rows.size(), 11u);
  EXPECT_LE(drift_report(rows).max_E_drift, 1e-6);
}

TEST(Simulate, SampleManifestsLoad) {
  int count = 0;
  for (const auto& e : fs::directory_iterator(MANIFEST_DIR)) {
    if (e.path().extension() != ".json") continue;
    EXPECT_NO_THROW(initial_curve(load_manifest(e.path().string()))) << e.path();
    ++count;
  }
  EXPECT_GE(count, 5);
}

TEST(Verify, UnknownSuiteAndBadGrids) {
  std::ostringstream out;
  EXPECT_EQ(run_verify("nonsense", {64}, out), kExitConfig);
  EXPECT_EQ(run_verify("projections", {48}, out), kExitConfig);
  std::ostringstream ok;
  EXPECT_EQ(run_verify("projections", {32}, ok), kExitOk);
  EXPECT_NE(ok.str().find("PASS"), std::string::npos);
  EXPECT_EQ(ok.str().find("FAIL"), std::string::npos);
}

TEST(Converge, NeedsThreeLevels) {
  bool failed = false;
  EXPECT_THROW(run_converge(manifest_from_json(base_manifest("out")), ConvergeMode::Dt, 2, failed), ConfigError);
  EXPECT_THROW(converge_mode_from_string("space"), ConfigError);
}

TEST(Converge, DtTableHasOneRowPerLevel) {
  nlohmann::json j = base_manifest("out");
  j["config"]["dt"] = 2e-5;
  j["config"]["T"] = 4e-4;
  j["stride"] = 1;
  bool failed = true;
  const std::string csv = run_converge(manifest_from_json(j), ConvergeMode::Dt, 3, failed);
  EXPECT_FALSE(failed);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 4);
  EXPECT_EQ(csv.rfind("dt,difference_to_next,observed_order,E_drift,status", 0), 0u);
}

TEST(Converge, GridSaturatesOnBandLimitedData) {
  nlohmann::json j = base_manifest("out");
  j["config"]["initial"] = "latitude:1";
  j["config"]["grid"] = 16;
  j["config"]["T"] = 1e-3;
  j["config"]["dt"] = 1e-4;
  j["stride"] = 1;
  const RunManifest m = manifest_from_json(j);
  const GridStudy st = grid_study(m.initial, Manifold(ManifoldKind::Sphere2), m.config, 3);
  ASSERT_FALSE(st.failure.has_value());
  for (double e : st.errors) EXPECT_LE(e, 1e-9);
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override { dir_ = scratch("cli"); }
  fs::path dir_;
};

TEST_F(Cli, SimulateSucceeds) {
  const fs::path p = write_manifest(dir_, base_manifest((dir_ / "run").string()));
  EXPECT_EQ(run_cli("simulate --manifest " + p.string()), 0);
  EXPECT_TRUE(fs::exists(dir_ / "run" / "report.csv"));
}

TEST_F(Cli, ConfigErrorsExitTwo) {
  nlohmann::json j = base_manifest((dir_ / "run").string());
  j["config"]["bogus"] = 1;
  EXPECT_EQ(run_cli("simulate --manifest " + write_manifest(dir_, j).string()), 2);
  EXPECT_EQ(run_cli("simulate --manifest " + (dir_ / "missing.json").string()), 2);
  EXPECT_EQ(run_cli("simulate"), 2);
  EXPECT_EQ(run_cli("frobnicate"), 2);
  EXPECT_EQ(run_cli("verify --suite nonsense"), 2);
  const fs::path ok = write_manifest(dir_, base_manifest((dir_ / "run").string()));
  EXPECT_EQ(run_cli("converge --manifest " + ok.string() + " --mode dt --levels 2"), 2);
  EXPECT_EQ(run_cli("converge --manifest " + ok.string() + " --mode space"), 2);
}

TEST_F(Cli, SolverFailureExitsThree) {
  nlohmann::json j = base_manifest((dir_ / "run").string());
  j["config"] = {{"manifold", "Sphere2"},
                 {"initial", "random_smooth:19,0.5,0.3"},
                 {"a", 1.0},
                 {"b", 0.5},
                 {"epsilon", 1e-3},
                 {"grid", 128},
                 {"dt", 1e-2},
                 {"T", 0.1},
                 {"integrator", "DuhamelPicard"}};
  j["stride"] = 1;
  EXPECT_EQ(run_cli("simulate --manifest " + write_manifest(dir_, j).string()), 3);
  const nlohmann::json status = nlohmann::json::parse(slurp(dir_ / "run" / "status.json"));
  EXPECT_EQ(status["status"], "failed");
  EXPECT_TRUE(status.contains("failure"));
}

TEST_F(Cli, VerifyPassingSuiteExitsZero) { EXPECT_EQ(run_cli("verify --suite projections --grids 32"), 0); }
