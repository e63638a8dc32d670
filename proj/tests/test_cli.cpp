#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "corrdetect/cli.hpp"
#include "corrdetect/io.hpp"

using namespace corrdetect;
using io::json;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out, err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "corrdetect_cli_test";
  fs::create_directories(dir);
  const fs::path p = dir / name;
  fs::remove(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

class SeedEnvGuard {
 public:
  SeedEnvGuard() { unsetenv("CORRDETECT_SEED"); }
  ~SeedEnvGuard() { unsetenv("CORRDETECT_SEED"); }
};

}  // namespace

TEST(Cli, ExitCodesForUsage) {
  SeedEnvGuard g;
  EXPECT_EQ(run({}).code, kExitUsage);
  EXPECT_EQ(run({"frobnicate"}).code, kExitUsage);
  EXPECT_EQ(run({"second-moment"}).code, kExitUsage);  // --n missing
  EXPECT_EQ(run({"second-moment", "--n", "3", "--rho", "0.5", "--rho2", "0.25"}).code, kExitUsage);
  EXPECT_EQ(run({"second-moment", "--n", "3", "--rho", "1.5"}).code, kExitUsage);
  EXPECT_EQ(run({"second-moment", "--n", "3", "--k", "4", "--rho", "0.5"}).code, kExitUsage);
  EXPECT_EQ(run({"second-moment", "--n", "3", "--rho", "0.5", "--method", "magic"}).code, kExitUsage);
  EXPECT_EQ(run({"--format", "xml", "verify"}).code, kExitUsage);
  EXPECT_EQ(run({"sweep", "--n", "4", "--rho2", "0.2", "--resume"}).code, kExitUsage);
  EXPECT_EQ(run({"--help"}).code, kExitOk);
}

TEST(Cli, SecondMomentReport) {
  SeedEnvGuard g;
  const auto r = run({"second-moment", "--n", "2", "--rho2", "0.5"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const json doc = json::parse(r.out);
  EXPECT_EQ(doc["schema_version"], 1);
  EXPECT_EQ(doc["kind"], "second_moment_report");
  ASSERT_EQ(doc["results"].size(), 4u);
  for (const auto& e : doc["results"]) {
    ASSERT_FALSE(e.contains("error")) << e.dump();
    EXPECT_NEAR(e["value"].get<double>(), 8.0 / 3.0, 1e-10) << e["method"];
  }
  const auto mc = run({"--trials", "20000", "second-moment", "--n", "2", "--rho2", "0.5", "--method", "mc"});
  ASSERT_EQ(mc.code, kExitOk);
  const json m = json::parse(mc.out)["results"][0];
  EXPECT_EQ(m["trials"], 20000);
  EXPECT_EQ(m["seed"], 20240517);
  EXPECT_TRUE(m.contains("stderr"));

  const auto csv = run({"--format", "csv", "second-moment", "--n", "2", "--rho", "-0.5", "--method", "upper"});
  ASSERT_EQ(csv.code, kExitOk);
  EXPECT_EQ(csv.out.substr(0, csv.out.find('\n')), "method,value,tail_bound,stderr,trials,seed,terms,error");
}

TEST(Cli, SecondMomentAllMethodsFailing) {
  SeedEnvGuard g;
  // d rho^2 >= 1 leaves nothing finite.
  const auto r = run({"second-moment", "--n", "3", "--d", "4", "--rho2", "0.5", "--method", "equiv"});
  EXPECT_EQ(r.code, kExitRuntime);
  EXPECT_NE(r.err.find("n=3"), std::string::npos);
}

TEST(Cli, BoundsAtRhoZero) {
  SeedEnvGuard g;
  const auto r = run({"bounds", "--n", "10", "--rho", "0"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const json doc = json::parse(r.out);
  EXPECT_EQ(doc["kind"], "bounds");
  ASSERT_EQ(doc["lower_bounds"].size(), 2u);  // no cycle route for n = 10
  for (const auto& b : doc["lower_bounds"]) EXPECT_EQ(b["value"], 1.0);
  EXPECT_EQ(doc["conditions"]["cond_strong"], 0.0);
}

TEST(Cli, BoundsCarryExponents) {
  SeedEnvGuard g;
  const auto r = run({"bounds", "--n", "5", "--d", "4", "--rho2", "0.5"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const json doc = json::parse(r.out);
  EXPECT_EQ(doc["lower_bounds"].size(), 3u);
  EXPECT_TRUE(doc["lower_bounds"][0].contains("error"));  // d rho^2 >= 1
  EXPECT_NEAR(doc["exponent_profile"]["E_P"].get<double>(), 0.10893359314141082, 1e-8);
  EXPECT_LT(doc["chernoff"]["q_tail_bound"].get<double>(), 1.0);
}

TEST(Cli, ThresholdsDegenerate) {
  SeedEnvGuard g;
  const auto r = run({"thresholds", "--n", "10", "--rho", "0"});
  EXPECT_EQ(r.code, kExitRuntime);
  EXPECT_NE(r.err.find("degenerate"), std::string::npos);
  EXPECT_NE(r.err.find("n=10"), std::string::npos);
}

TEST(Cli, Thresholds) {
  SeedEnvGuard g;
  const auto r = run({"--trials", "5000", "thresholds", "--n", "100", "--rho2", "0.25"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const json doc = json::parse(r.out);
  EXPECT_EQ(doc["count"]["calibration_trials"], 5000);
  EXPECT_NEAR(doc["sum"]["threshold"].get<double>(), 25.0, 1e-12);
  EXPECT_GT(doc["comparison"]["theta"].get<double>(), 0.0);
}

TEST(Cli, SweepFlagsWideIntervals) {
  SeedEnvGuard g;
  const auto r = run({"--trials", "10", "sweep", "--n", "6", "--rho2", "0.5", "--detectors", "sum"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  std::istringstream is(r.out);
  const auto rows = io::read_sweep_csv(is);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_NE(rows[0].note.find("wide_ci"), std::string::npos);
  EXPECT_EQ(rows[0].trials, 10u);
  EXPECT_NE(r.err.find("[1/1]"), std::string::npos);
}

TEST(Cli, SweepIsReproducibleAndSeeded) {
  SeedEnvGuard g;
  const std::vector<std::string> base{"--trials", "200", "sweep", "--n", "5", "--rho2", "0.3", "0.6", "--detectors",
                                      "sum", "comparison"};
  const auto a = run(base), b = run(base);
  ASSERT_EQ(a.code, kExitOk) << a.err;
  EXPECT_EQ(a.out, b.out);
  auto other = base;
  other.insert(other.begin(), {"--seed", "5"});
  EXPECT_NE(run(other).out, a.out);
  // Environment seed applies when --seed is absent; the flag wins over it.
  setenv("CORRDETECT_SEED", "5", 1);
  EXPECT_EQ(run(base).out, run(other).out);
  auto flag = base;
  flag.insert(flag.begin(), {"--seed", "20240517"});
  EXPECT_EQ(run(flag).out, a.out);
  setenv("CORRDETECT_SEED", "five", 1);
  EXPECT_EQ(run(base).code, kExitUsage);
}

TEST(Cli, SweepResumeMatchesOneShot) {
  SeedEnvGuard g;
  const fs::path full = scratch("full.csv"), part = scratch("part.csv");
  const std::vector<std::string> grid{"sweep", "--n", "5", "--rho2", "0.2", "0.4", "0.6", "--detectors", "sum"};
  auto with = [&](const fs::path& p, std::vector<std::string> a) {
    a.insert(a.begin(), {"--trials", "300", "--output", p.string()});
    return a;
  };
  ASSERT_EQ(run(with(full, grid)).code, kExitOk);

  // Interrupted run: first grid point only.
  ASSERT_EQ(run(with(part, {"sweep", "--n", "5", "--rho2", "0.2", "--detectors", "sum"})).code, kExitOk);
  auto resumed = with(part, grid);
  resumed.push_back("--resume");
  const auto r = run(resumed);
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_EQ(slurp(part), slurp(full));
  // Resuming a finished file adds nothing.
  ASSERT_EQ(run(resumed).code, kExitOk);
  EXPECT_EQ(slurp(part), slurp(full));
}

TEST(Cli, SweepJsonMirror) {
  SeedEnvGuard g;
  const auto r = run({"--format", "json", "--trials", "50", "sweep", "--n", "4", "--rho2", "0.3", "--detectors", "none"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const json doc = json::parse(r.out);
  EXPECT_EQ(doc["kind"], "sweep");
  ASSERT_EQ(doc["rows"].size(), 1u);
  EXPECT_EQ(doc["rows"][0]["detector"], "none");
  EXPECT_TRUE(doc["rows"][0]["risk"].is_null());
}

TEST(Cli, ConfigFileFillsMissingOptions) {
  SeedEnvGuard g;
  const fs::path cfg = scratch("cfg.json");
  std::ofstream(cfg) << R"({"n": 2, "rho2": 0.5, "method": "upper", "seed": 9})";
  const auto r = run({"second-moment", "--config", cfg.string()});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const json doc = json::parse(r.out);
  EXPECT_EQ(doc["params"]["n"], 2);
  EXPECT_EQ(doc["results"].size(), 1u);
  EXPECT_NEAR(doc["results"][0]["value"].get<double>(), 8.0 / 3.0, 1e-12);
  // Command line wins over the file.
  const auto r2 = run({"second-moment", "--n", "3", "--config", cfg.string()});
  ASSERT_EQ(r2.code, kExitOk) << r2.err;
  EXPECT_EQ(json::parse(r2.out)["params"]["n"], 3);
  EXPECT_EQ(run({"second-moment", "--config", (cfg.string() + ".missing")}).code, kExitUsage);
  std::ofstream(cfg) << "[1, 2]";
  EXPECT_EQ(run({"second-moment", "--config", cfg.string()}).code, kExitUsage);
}

TEST(Cli, OutputFile) {
  SeedEnvGuard g;
  const fs::path p = scratch("bounds.json");
  const auto r = run({"--output", p.string(), "bounds", "--n", "4", "--rho", "0.3"});
  ASSERT_EQ(r.code, kExitOk);
  EXPECT_TRUE(r.out.empty());
  EXPECT_EQ(json::parse(slurp(p))["kind"], "bounds");
}

TEST(Cli, VerifyQuickPasses) {
  SeedEnvGuard g;
  const auto r = run({"verify", "--quick"});
  EXPECT_EQ(r.code, kExitOk) << r.out;
  EXPECT_EQ(r.out.find("FAIL"), std::string::npos);
  EXPECT_NE(r.out.find("PASS psi_vs_quadrature"), std::string::npos);
  const auto j = run({"--format", "json", "verify", "--quick"});
  EXPECT_EQ(json::parse(j.out)["checks"].size(), 15u);
}
