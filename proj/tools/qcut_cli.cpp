// qcut: experiment driver for the circuit-cutting toolkit.
//
// Exit codes: 0 success, 1 bad flags, 2 file I/O failure, 3 a consistency
// check in the report failed, 4 any other library error.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "qcut/harness.hpp"

namespace fs = std::filesystem;
using qcut::harness::json;

namespace {

enum Exit { kOk = 0, kUsage = 1, kIo = 2, kInconsistent = 3, kFailure = 4 };

struct Common {
  std::uint64_t seed = 0;
  std::size_t shots = 4096;
  std::size_t runs = 0;  // 0: command default
  std::string out = ".";
  bool exact = false;
  int threads = 0;
};

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw qcut::Error(qcut::ErrorCode::IoError, "cannot write " + path.string());
  os << text;
  if (!os) throw qcut::Error(qcut::ErrorCode::IoError, "write failed for " + path.string());
}

fs::path out_dir(const Common& c) {
  fs::path dir(c.out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw qcut::Error(qcut::ErrorCode::IoError, "cannot create " + dir.string());
  return dir;
}

int finish(const json& report, const fs::path& path) {
  qcut::persist_results(path.string(), report);
  std::cout << report.at("experiment").get<std::string>() << ": wrote " << path.string() << '\n';
  if (!report.at("consistent").get<bool>()) {
    for (const auto& c : report.at("checks"))
      if (!c.at("passed").get<bool>()) std::cerr << "consistency check failed: " << c.at("name").get<std::string>() << '\n';
    return kInconsistent;
  }
  return kOk;
}

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--seed", c.seed, "Random seed")->capture_default_str();
  sub->add_option("--shots", c.shots, "Shots per circuit or subexperiment")->capture_default_str()->check(CLI::PositiveNumber);
  sub->add_option("--runs", c.runs, "Repetitions (0 = command default)");
  sub->add_option("--out", c.out, "Output directory")->capture_default_str();
  sub->add_flag("--exact", c.exact, "Use exact probabilities instead of shots");
  sub->add_option("--threads", c.threads, "Worker threads (0 = hardware)")->capture_default_str()->check(CLI::NonNegativeNumber);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Circuit cutting experiments"};
  app.require_subcommand(1);

  Common common;

  auto* validate = app.add_subcommand("validate", "Cut versus uncut reconstruction on GHZ and random circuits");
  add_common(validate, common);

  std::string model = "parity", strategy = "fit-then-cut";
  qcut::TrainConfig tc;
  std::optional<std::string> warm_start;
  std::optional<std::size_t> qpd_samples;
  std::size_t splits = 1;
  double test_fraction = 0.25;
  bool minmax = false;
  auto* train = app.add_subcommand("train", "Train a classifier on Iris");
  add_common(train, common);
  train->add_option("--model", model, "Head: expected | modulo | parity")
      ->capture_default_str()
      ->check(CLI::IsMember({"expected", "modulo", "parity"}));
  train->add_option("--strategy", strategy, "fit-then-cut | cut-then-fit")
      ->capture_default_str()
      ->check(CLI::IsMember({"fit-then-cut", "cut-then-fit"}));
  train->add_option("--lr", tc.learning_rate, "Learning rate")->capture_default_str()->check(CLI::PositiveNumber);
  train->add_option("--weight-decay", tc.weight_decay, "Weight decay")->capture_default_str()->check(CLI::NonNegativeNumber);
  train->add_option("--batch-size", tc.batch_size, "Batch size")->capture_default_str()->check(CLI::PositiveNumber);
  train->add_option("--iterations", tc.iterations, "Optimizer iterations")->capture_default_str();
  train->add_option("--warm-start", warm_start, "Model file to continue from")->check(CLI::ExistingFile);
  train->add_option("--mask-threshold", tc.mask_threshold, "Gradient magnitude below which a parameter is masked")
      ->capture_default_str()
      ->check(CLI::NonNegativeNumber);
  train->add_option("--mask-reset", tc.mask_reset, "Iterations between mask resets")->capture_default_str()->check(CLI::PositiveNumber);
  train->add_option("--qpd-samples", qpd_samples, "Monte-Carlo subexperiment samples per cut evaluation")->check(CLI::PositiveNumber);
  train->add_option("--splits", splits, "Repeated train/test splits")->capture_default_str()->check(CLI::PositiveNumber);
  train->add_option("--test-fraction", test_fraction, "Test share of the dataset")->capture_default_str();
  train->add_flag("--minmax", minmax, "Scale features onto [0, pi]");

  std::string model_path;
  auto* eval_cut = app.add_subcommand("eval-cut", "Compare cut and uncut predictions of a trained model");
  add_common(eval_cut, common);
  eval_cut->add_option("model_file", model_path, "Trained model JSON")->required()->check(CLI::ExistingFile);
  eval_cut->add_option("--qpd-samples", qpd_samples, "Monte-Carlo subexperiment samples")->check(CLI::PositiveNumber);

  qcut::harness::NoiseCompareOptions nc;
  auto* noise = app.add_subcommand("noise-compare", "Noisy cut versus uncut distribution error");
  add_common(noise, common);
  noise->add_option("model_file", model_path, "Trained model JSON")->required()->check(CLI::ExistingFile);
  noise->add_option("--p1", nc.noise.p1, "Single-qubit depolarizing probability")->capture_default_str();
  noise->add_option("--p2", nc.noise.p2, "Two-qubit depolarizing probability")->capture_default_str();
  noise->add_option("--p-ro", nc.noise.p_ro, "Readout flip probability")->capture_default_str();
  noise->add_option("--sample", nc.sample, "Test-split row to evaluate")->capture_default_str();
  noise->add_option("--qpd-samples", qpd_samples, "Monte-Carlo subexperiment samples")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (common.threads > 0) qcut::set_thread_count(common.threads);
    const fs::path dir = out_dir(common);

    if (*validate) {
      qcut::harness::ValidateOptions o;
      o.runs = common.runs ? common.runs : 100;
      o.shots = common.shots;
      o.seed = common.seed;
      o.exact = common.exact;
      o.threads = common.threads;
      return finish(qcut::harness::cmd_validate(o), dir / "validate_report.json");
    }

    if (*train) {
      qcut::harness::TrainOptions o;
      o.model.head = qcut::head_from_name(model);
      tc.strategy = qcut::strategy_from_name(strategy);
      // Training is exact unless shots were requested explicitly.
      tc.exact = common.exact || train->count("--shots") == 0;
      tc.shots = common.shots;
      tc.seed = common.seed;
      tc.qpd_samples = qpd_samples;
      tc.threads = common.threads;
      o.train = tc;
      o.test_fraction = test_fraction;
      o.minmax = minmax;
      o.splits = splits;
      o.warm_start = warm_start;
      const auto result = qcut::harness::cmd_train(o);
      qcut::save_model((dir / "model.json").string(), result.model);
      const auto& first = result.report.at("metrics").at("splits").at(0);
      write_text(dir / "confusion_test.csv",
                 qcut::confusion_csv(first.at("test_confusion").get<std::vector<std::vector<int>>>()));
      std::cout << "test accuracy " << result.report.at("metrics").at("test_accuracy").at("mean").get<double>() << '\n';
      return finish(result.report, dir / "train_report.json");
    }

    if (*eval_cut) {
      qcut::harness::EvalCutOptions o;
      o.model_path = model_path;
      o.exact = common.exact;
      o.shots = common.shots;
      o.seed = common.seed;
      o.qpd_samples = qpd_samples;
      o.threads = common.threads;
      const auto result = qcut::harness::cmd_eval_cut(o);
      write_text(dir / "confusion_uncut.csv", qcut::confusion_csv(result.uncut_confusion));
      write_text(dir / "confusion_cut.csv", qcut::confusion_csv(result.cut_confusion));
      std::cout << "agreement " << result.report.at("metrics").at("agreement").get<double>() << '\n';
      return finish(result.report, dir / "eval_cut_report.json");
    }

    if (*noise) {
      nc.model_path = model_path;
      nc.runs = common.runs ? common.runs : 50;
      nc.shots = common.shots;
      nc.seed = common.seed;
      nc.qpd_samples = qpd_samples;
      nc.threads = common.threads;
      const auto result = qcut::harness::cmd_noise_compare(nc);
      write_text(dir / "noise_bars.csv", result.csv);
      const auto& m = result.report.at("metrics");
      std::cout << "uncut error " << m.at("uncut_error").at("mean").get<double>() << ", cut error "
                << m.at("cut_error").at("mean").get<double>() << '\n';
      return finish(result.report, dir / "noise_report.json");
    }
  } catch (const qcut::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    if (e.code() == qcut::ErrorCode::IoError) return kIo;
    if (e.code() == qcut::ErrorCode::BadRange) return kUsage;
    return kFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFailure;
  }
  return kUsage;
}
