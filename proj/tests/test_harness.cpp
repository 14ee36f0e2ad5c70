#include <catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "qcut/harness.hpp"

using namespace qcut;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("qcut_harness_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(QCUT_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string metrics_of(const fs::path& report) { return load_results(report.string()).at("metrics").dump(); }

}  // namespace

TEST_CASE("stats helper") {
  const auto s = harness::stats({1.0, 2.0, 3.0, 4.0});
  CHECK(s.mean == Catch::Approx(2.5));
  CHECK(s.std == Catch::Approx(std::sqrt(5.0 / 3.0)));
  CHECK(harness::stats({7.0}).std == 0.0);
  CHECK(harness::recomputes(s, {4.0, 3.0, 2.0, 1.0}));
}

TEST_CASE("validate in exact mode reconstructs both circuits") {
  harness::ValidateOptions o;
  o.runs = 2;
  o.exact = true;
  const auto rep = harness::cmd_validate(o);
  CHECK(rep["consistent"].get<bool>());
  for (const auto* name : {"ghz", "random"}) {
    const auto& m = rep["metrics"][name];
    CHECK(m["cut_deviation"]["mean"].get<double>() < 1e-9);
    for (const auto& obs : harness::validation_observables()) CHECK(m["cut_abs_error"][obs]["mean"].get<double>() < 1e-9);
  }
  CHECK(rep["metrics"]["ghz"]["cuts"] == 1);
  CHECK(rep["metrics"]["random"]["cuts"] == 3);
}

TEST_CASE("validate report aggregates match per-run entries") {
  harness::ValidateOptions o;
  o.runs = 5;
  o.shots = 256;
  const auto rep = harness::cmd_validate(o);
  const auto& m = rep["metrics"]["ghz"];
  const auto dev = harness::column(m["runs"], "cut_deviation");
  CHECK(harness::recomputes({m["cut_deviation"]["mean"], m["cut_deviation"]["std"]}, dev));
  CHECK(m["runs"].size() == 5);
}

TEST_CASE("CLI flag and file errors map to exit codes") {
  CHECK(run_cli("") == 1);
  CHECK(run_cli("train --model nonsense") == 1);
  CHECK(run_cli("train --strategy sideways") == 1);
  CHECK(run_cli("train --lr -1") == 1);
  CHECK(run_cli("eval-cut /nonexistent/model.json") == 1);
  const auto dir = scratch("errors");
  {
    std::ofstream os(dir / "bad.json");
    os << R"({"config": {}})";
  }
  CHECK(run_cli("eval-cut " + (dir / "bad.json").string() + " --out " + dir.string()) == 4);
}

TEST_CASE("train, eval-cut and noise-compare end to end") {
  const auto dir = scratch("e2e");
  const std::string out = " --out " + dir.string();
  REQUIRE(run_cli("train --model parity --iterations 4 --batch-size 10 --seed 42" + out) == 0);
  const auto model = (dir / "model.json").string();
  REQUIRE(fs::exists(model));
  const auto report = load_results((dir / "train_report.json").string());
  CHECK(report["config"]["head"] == "parity");
  CHECK(report["metrics"]["splits"][0]["loss_history"].size() == 4);
  CHECK(slurp(dir / "confusion_test.csv").rfind("true\\pred,0,1,2\n", 0) == 0);

  REQUIRE(run_cli("eval-cut " + model + " --exact" + out) == 0);
  const auto ev = load_results((dir / "eval_cut_report.json").string());
  CHECK(ev["metrics"]["agreement"].get<double>() == 1.0);
  CHECK(ev["metrics"]["uncut_confusion"] == ev["metrics"]["cut_confusion"]);
  CHECK(ev["metrics"]["samples"].size() == 38);
  CHECK(ev["metrics"]["cut_deviation"]["mean"].get<double>() < 1e-9);

  REQUIRE(run_cli("noise-compare " + model + " --runs 2 --shots 64 --p1 0 --p2 0 --p-ro 0" + out) == 0);
  const auto csv = slurp(dir / "noise_bars.csv");
  CHECK(csv.rfind("bitstring,exact_p,uncut_mean,uncut_std,cut_mean,cut_std\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 17);

  REQUIRE(run_cli("train --strategy cut-then-fit --warm-start " + model +
                  " --iterations 2 --batch-size 2 --out " + (dir / "warm").string()) == 0);
  const auto warm = load_results((dir / "warm" / "train_report.json").string());
  const auto& split0 = warm["metrics"]["splits"][0];
  CHECK(split0["loss_history"].size() == 2);
  CHECK(split0["iterations"][0]["backward_evaluations_per_sample"] == 62208);
  CHECK(load_model((dir / "warm" / "model.json").string()).loss_history.size() == 6);
}

TEST_CASE("CLI metrics are identical across runs and thread counts") {
  const auto a = scratch("det_a"), b = scratch("det_b");
  auto both = [&](const std::string& args, const std::string& report) {
    REQUIRE(run_cli(args + " --threads 1 --out " + a.string()) == 0);
    REQUIRE(run_cli(args + " --threads 3 --out " + b.string()) == 0);
    CHECK(metrics_of(a / report) == metrics_of(b / report));
  };
  both("validate --runs 3 --shots 128 --seed 9", "validate_report.json");
  both("train --iterations 2 --batch-size 6 --shots 64 --seed 9", "train_report.json");
  const auto model = (a / "model.json").string();
  both("eval-cut " + model + " --shots 32 --seed 9", "eval_cut_report.json");
  both("noise-compare " + model + " --runs 2 --shots 32 --seed 9", "noise_report.json");
}
