#include <gtest/gtest.h>
#include <sys/wait.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"

namespace {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

std::string g_cli;      // path to the crossbif binary
std::string g_configs;  // path to the shipped config directory

struct RunResult {
  int exit_code{-1};
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

RunResult run_cli(const std::string& args, const fs::path& workdir) {
  const fs::path out_file = workdir / "stdout.txt";
  const fs::path err_file = workdir / "stderr.txt";
  const std::string cmd = "\"" + g_cli + "\" " + args + " > \"" + out_file.string() +
                          "\" 2> \"" + err_file.string() + "\"";
  const int status = std::system(cmd.c_str());
  RunResult r;
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(out_file);
  r.err = slurp(err_file);
  return r;
}

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("crossbif_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string config_path(const std::string& name) {
  return (fs::path(g_configs) / name).string();
}

ordered_json report_in(const fs::path& dir) {
  return ordered_json::parse(slurp(dir / "report.json"));
}

TEST(Cli, ClassifyTranscriticalIsByteStable) {
  const fs::path d1 = fresh_dir("tc1"), d2 = fresh_dir("tc2");
  const std::string args =
      "classify-map --config \"" + config_path("transcritical.json") + "\"";
  const RunResult r1 = run_cli(args + " --out \"" + d1.string() + "\"", d1);
  const RunResult r2 = run_cli(args + " --out \"" + d2.string() + "\"", d2);
  ASSERT_EQ(r1.exit_code, 0) << r1.err;
  ASSERT_EQ(r2.exit_code, 0) << r2.err;

  const std::string rep1 = slurp(d1 / "report.json");
  EXPECT_FALSE(rep1.empty());
  EXPECT_EQ(rep1, slurp(d2 / "report.json"));

  const ordered_json j = report_in(d1);
  EXPECT_EQ(j["mode"], "classify-map");
  EXPECT_EQ(j["classification"]["kind"], "Rank1CrossTranscritical");
  EXPECT_EQ(j["classification"]["p_qq"].get<double>(), -2.0);
}

TEST(Cli, PitchforkCurvature) {
  const fs::path d = fresh_dir("fork");
  const RunResult r = run_cli("classify-map --config \"" + config_path("pitchfork.json") +
                                  "\" --out \"" + d.string() + "\"",
                              d);
  ASSERT_EQ(r.exit_code, 0) << r.err;
  const ordered_json j = report_in(d);
  EXPECT_EQ(j["classification"]["kind"], "Rank1CrossForkLike");
  EXPECT_NEAR(j["classification"]["eps_b_second"].get<double>(), 2.0, 1e-8);
}

TEST(Cli, DefiniteAndSaddleNodeConfigs) {
  const fs::path d1 = fresh_dir("def");
  const RunResult r1 = run_cli("classify-map --config \"" + config_path("definite.json") +
                                   "\" --out \"" + d1.string() + "\"",
                               d1);
  ASSERT_EQ(r1.exit_code, 0) << r1.err;
  EXPECT_EQ(report_in(d1)["classification"]["kind"], "Rank1Definite");

  const fs::path d2 = fresh_dir("sn");
  const RunResult r2 = run_cli("classify-map --config \"" + config_path("saddle_node.json") +
                                   "\" --out \"" + d2.string() + "\"",
                               d2);
  ASSERT_EQ(r2.exit_code, 0) << r2.err;
  EXPECT_EQ(report_in(d2)["classification"]["kind"], "Rank2SaddleNodeCandidate");
}

TEST(Cli, ContinueModeWritesBranchCurves) {
  const fs::path d = fresh_dir("cont");
  const RunResult r =
      run_cli("continue --config \"" + config_path("continue_transcritical.json") +
                  "\" --out \"" + d.string() + "\"",
              d);
  ASSERT_EQ(r.exit_code, 0) << r.err;
  const ordered_json j = report_in(d);
  EXPECT_EQ(j["kind"], "Rank1CrossTranscritical");
  EXPECT_LE(std::fabs(j["trace_slope_sum"]["residual"].get<double>()), 1e-8);

  const std::string a = slurp(d / "branch_a.csv");
  const std::string b = slurp(d / "branch_b.csv");
  EXPECT_EQ(a.rfind("eps,q,p,trace\n", 0), 0u);
  EXPECT_EQ(b.rfind("eps,q,p,trace\n", 0), 0u);
  EXPECT_GT(std::count(a.begin(), a.end(), '\n'), 10);
  ASSERT_EQ(j["crossings"].size(), 1u);
  EXPECT_NEAR(j["crossings"][0]["eps_star"].get<double>(), 0.0, 1e-9);
}

TEST(Cli, SeedEpsOverrideMovesThePoint) {
  const fs::path d = fresh_dir("seed");
  const RunResult r = run_cli("classify-map --config \"" + config_path("transcritical.json") +
                                  "\" --seed-eps 0.05 --out \"" + d.string() + "\"",
                              d);
  ASSERT_EQ(r.exit_code, 0) << r.err;
  // at eps = 0.05 the origin is still fixed but the trace moves off 2
  EXPECT_EQ(report_in(d)["classification"]["kind"], "NoUnitEigenvalue");
}

TEST(Cli, LibrationScanFlagsFlatHarmonicTrace) {
  const fs::path d = fresh_dir("scanflat");
  const fs::path cfg = d / "scan.json";
  std::ofstream(cfg) << R"({"potential": {"name": "harmonic"}, "e0": 0.5,
                            "eps_range": [-0.1, 0.1], "samples": 5})";
  const RunResult r = run_cli(
      "libration-scan --config \"" + cfg.string() + "\" --out \"" + d.string() + "\"", d);
  ASSERT_EQ(r.exit_code, 0) << r.err;
  const ordered_json j = report_in(d);
  EXPECT_TRUE(j["degenerate_flat_trace"].get<bool>());
  EXPECT_EQ(j["crossings"].size(), 0u);
  const std::string csv = slurp(d / "scan.csv");
  EXPECT_EQ(csv.rfind("eps,T,trace,phiT,psiT,dphiT,dpsiT\n", 0), 0u);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 6);  // header + 5 rows
}

TEST(Cli, MonodromyModeComparesFiniteDifferences) {
  const fs::path d = fresh_dir("mono");
  const fs::path cfg = d / "mono.json";
  std::ofstream(cfg) << R"({"potential": {"name": "harmonic"}, "e0": 0.5,
                            "eps": 0.0, "compare_fd": true})";
  const RunResult r = run_cli(
      "monodromy --config \"" + cfg.string() + "\" --out \"" + d.string() + "\"", d);
  ASSERT_EQ(r.exit_code, 0) << r.err;
  const ordered_json j = report_in(d);
  EXPECT_NEAR(j["monodromy"]["trace"].get<double>(), 2.0, 1e-8);
  EXPECT_NEAR(j["orbit"]["T"].get<double>(), 6.283185307179586, 1e-8);
  EXPECT_LE(j["fd_jacobian"]["max_diff"].get<double>(), 1e-5);
  EXPECT_LE(j["fd_jacobian"]["det_defect"].get<double>(), 1e-6);
}

TEST(Cli, PerturbCheckModeReportsBothRegimes) {
  const fs::path d = fresh_dir("pert");
  const fs::path cfg = d / "pert.json";
  std::ofstream(cfg) << R"({"potential": {"name": "harmonic"}, "e0": 0.5, "eps_star": 0.0,
                            "perturbations": [{"name": "rotation"}, {"name": "x2y"}]})";
  const RunResult r = run_cli(
      "perturb-check --config \"" + cfg.string() + "\" --out \"" + d.string() + "\"", d);
  ASSERT_EQ(r.exit_code, 0) << r.err;
  const ordered_json j = report_in(d);
  ASSERT_EQ(j["perturbations"].size(), 2u);
  EXPECT_FALSE(j["perturbations"][0]["cross_preserving"].get<bool>());
  EXPECT_TRUE(j["perturbations"][0]["report"]["degenerate_identity"].get<bool>());
  EXPECT_FALSE(j["perturbations"][0]["report"]["eq60_vector"].is_null());
  EXPECT_TRUE(j["perturbations"][1]["cross_preserving"].get<bool>());
  EXPECT_EQ(j["perturbations"][1]["report"]["c1"].get<double>(), 0.0);
  EXPECT_EQ(j["perturbations"][1]["report"]["c2"].get<double>(), 0.0);
}

TEST(Cli, ConfigErrorsExitTwo) {
  const fs::path d = fresh_dir("cfgerr");

  // unknown top-level key
  const fs::path bad_key = d / "bad_key.json";
  std::ofstream(bad_key)
      << R"({"family": {"kind": "shear", "g": [{"i": 1, "j": 1, "c": 1.0}]}, "bogus": 1})";
  RunResult r = run_cli(
      "classify-map --config \"" + bad_key.string() + "\" --out \"" + d.string() + "\"", d);
  EXPECT_EQ(r.exit_code, 2);
  EXPECT_EQ(ordered_json::parse(r.err)["error"], "ConfigInvalid");
  EXPECT_TRUE(r.err.find("bogus") != std::string::npos);

  // malformed JSON
  const fs::path broken = d / "broken.json";
  std::ofstream(broken) << "{ not json";
  r = run_cli("classify-map --config \"" + broken.string() + "\" --out \"" + d.string() + "\"",
              d);
  EXPECT_EQ(r.exit_code, 2);

  // missing file
  r = run_cli("classify-map --config \"" + (d / "absent.json").string() + "\"", d);
  EXPECT_EQ(r.exit_code, 2);

  // unknown tolerance name
  r = run_cli("classify-map --config \"" + config_path("transcritical.json") +
                  "\" --tol nope=1 --out \"" + d.string() + "\"",
              d);
  EXPECT_EQ(r.exit_code, 2);

  // missing required --config flag
  r = run_cli("classify-map", d);
  EXPECT_EQ(r.exit_code, 2);

  // unknown subcommand
  r = run_cli("despline --config x.json", d);
  EXPECT_EQ(r.exit_code, 2);
}

TEST(Cli, NumericalFailuresExitThree) {
  const fs::path d = fresh_dir("numerr");
  const fs::path cfg = d / "sunken.json";
  // energy below the bottom of the well: the libration search must fail
  std::ofstream(cfg) << R"({"potential": {"name": "harmonic"}, "e0": -1.0, "eps": 0.0})";
  const RunResult r = run_cli(
      "monodromy --config \"" + cfg.string() + "\" --out \"" + d.string() + "\"", d);
  EXPECT_EQ(r.exit_code, 3);
  const ordered_json err = ordered_json::parse(r.err);
  EXPECT_EQ(err["error"], "NoWell");
  EXPECT_FALSE(err["message"].get<std::string>().empty());
  EXPECT_FALSE(fs::exists(d / "report.json"));  // nothing written on failure
}

TEST(Cli, HelpExitsZero) {
  const fs::path d = fresh_dir("help");
  EXPECT_EQ(run_cli("--help", d).exit_code, 0);
  EXPECT_EQ(run_cli("classify-map --help", d).exit_code, 0);
}

}  // namespace

int main(int argc, char** argv) {
  ::testing::InitGoogleTest(&argc, argv);
  if (argc < 3) {
    std::fprintf(stderr, "usage: cli_tests <crossbif-binary> <config-dir>\n");
    return 2;
  }
  g_cli = argv[1];
  g_configs = argv[2];
  return RUN_ALL_TESTS();
}
