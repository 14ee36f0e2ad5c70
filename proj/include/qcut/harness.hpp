#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "qcut/model_io.hpp"
#include "qcut/synthesis.hpp"

namespace qcut::harness {

using json = nlohmann::ordered_json;

struct Stats {
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation (n - 1)
};

inline Stats stats(const std::vector<double>& v) {
  Stats s;
  if (v.empty()) return s;
  for (double x : v) s.mean += x;
  s.mean /= static_cast<double>(v.size());
  if (v.size() > 1) {
    for (double x : v) s.std += (x - s.mean) * (x - s.mean);
    s.std = std::sqrt(s.std / static_cast<double>(v.size() - 1));
  }
  return s;
}

inline json to_json(const Stats& s) { return {{"mean", s.mean}, {"std", s.std}}; }

/// Collects named consistency checks; a report with a failed check makes
/// the CLI exit nonzero.
struct Checks {
  json items = json::array();
  bool ok = true;

  void add(const std::string& name, bool passed) {
    items.push_back({{"name", name}, {"passed", passed}});
    ok = ok && passed;
  }
};

/// Report skeleton shared by all commands. Only "metrics" must be
/// reproducible; wall-clock time lives outside it.
struct Report {
  json doc;
  Checks checks;
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

  explicit Report(const std::string& experiment) {
    doc["schema_version"] = kResultsSchemaVersion;
    doc["experiment"] = experiment;
    doc["config"] = json::object();
    doc["metrics"] = json::object();
  }

  json& config() { return doc["config"]; }
  json& metrics() { return doc["metrics"]; }

  json finish() {
    doc["checks"] = checks.items;
    doc["consistent"] = checks.ok;
    doc["wall_clock_seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return doc;
  }
};

/// Checks that an aggregate equals its recomputation from per-run values.
inline bool recomputes(const Stats& s, const std::vector<double>& v) {
  const auto r = stats(v);
  return std::abs(r.mean - s.mean) <= 1e-12 && std::abs(r.std - s.std) <= 1e-12;
}

inline std::vector<double> column(const json& rows, const std::string& key) {
  std::vector<double> out;
  for (const auto& r : rows) out.push_back(r.at(key).get<double>());
  return out;
}

// ---------------------------------------------------------------- validate

struct ValidateOptions {
  std::size_t runs = 100;
  std::size_t shots = 4096;
  std::uint64_t seed = 0;
  bool exact = false;
  int threads = 0;
};

struct ValidationCircuit {
  std::string name;
  Circuit circuit;
  std::vector<int> side_a;
};

inline std::vector<ValidationCircuit> validation_circuits(std::uint64_t seed) {
  Circuit ghz(2);
  ghz.add(gate::h(0)).add(gate::cnot(0, 1));
  return {{"ghz", ghz, {0}}, {"random", synth::random_two_qubit_circuit(seed).circuit, {0}}};
}

inline const std::vector<std::string>& validation_observables() {
  static const std::vector<std::string> obs{"ZI", "IZ", "ZZ", "XX", "YY"};
  return obs;
}

/// Cut and uncut estimates against exact values, run by run.
inline json cmd_validate(const ValidateOptions& o) {
  Report rep("validate");
  rep.config() = {{"runs", o.runs}, {"shots", o.shots}, {"seed", o.seed}, {"exact", o.exact},
                  {"observables", validation_observables()}};
  if (o.runs == 0 || (!o.exact && o.shots == 0)) throw Error(ErrorCode::BadRange, "runs and shots must be >= 1");
  const Engine engine = o.exact ? Engine::exact() : Engine::sampled();
  const auto circuits = validation_circuits(o.seed);
  for (std::size_t ci = 0; ci < circuits.size(); ++ci) {
    const auto& vc = circuits[ci];
    const int width = vc.circuit.width();
    const auto exact_p = probabilities(run_statevector(vc.circuit));
    const CutPlan plan(vc.circuit, crossing_gates(vc.circuit, vc.side_a));

    struct Basis {
      std::string observable, z_string;
      CutPlan plan;
      Circuit circuit;
      double exact = 0.0;
    };
    std::vector<Basis> bases;
    for (const auto& obs : validation_observables()) {
      Circuit rotated = vc.circuit;
      const auto z = append_basis_change(rotated, obs);
      bases.push_back({obs, z, CutPlan(rotated, crossing_gates(rotated, vc.side_a)), rotated,
                       expectation_pauli(run_statevector(vc.circuit), obs)});
    }

    struct RunResult {
      std::vector<double> cut_q, uncut_q;
      std::vector<double> cut_err, uncut_err;
    };
    std::vector<RunResult> runs(o.runs);
    parallel_for(
        o.runs,
        [&](std::size_t r) {
          ExecutionConfig cfg;
          cfg.engine = engine;
          cfg.shots = o.shots;
          cfg.threads = 1;
          auto& rr = runs[r];
          for (std::size_t b = 0; b < bases.size(); ++b) {
            cfg.seed = derive_key({o.seed, ci, r, b});
            const auto cut = execute_plan(bases[b].plan, cfg);
            const auto uncut = execute_circuit(bases[b].circuit, cfg);
            const double ce = reconstruct_expectation(cut.tallies, bases[b].z_string, width);
            const double ue = expectation_from_distribution(uncut.net_weight, bases[b].z_string, width);
            rr.cut_err.push_back(std::abs(ce - bases[b].exact));
            rr.uncut_err.push_back(std::abs(ue - bases[b].exact));
            if (b == 0) {  // "ZI" needs no basis change: reuse for the distribution
              rr.cut_q = reconstruct_distribution(cut).weights;
              rr.uncut_q = uncut.net_weight;
            }
          }
        },
        o.threads);

    json per_run = json::array();
    std::vector<double> cut_avg(exact_p.size(), 0.0), uncut_avg(exact_p.size(), 0.0);
    for (std::size_t r = 0; r < o.runs; ++r) {
      json e;
      e["run"] = r;
      e["cut_deviation"] = total_deviation(runs[r].cut_q, exact_p);
      e["uncut_deviation"] = total_deviation(runs[r].uncut_q, exact_p);
      double total = 0.0;
      for (double w : runs[r].cut_q) total += w;
      e["cut_total_weight"] = total;
      for (std::size_t b = 0; b < bases.size(); ++b) {
        e["cut_abs_error"][bases[b].observable] = runs[r].cut_err[b];
        e["uncut_abs_error"][bases[b].observable] = runs[r].uncut_err[b];
      }
      per_run.push_back(e);
      for (std::size_t x = 0; x < exact_p.size(); ++x) {
        cut_avg[x] += runs[r].cut_q[x] / static_cast<double>(o.runs);
        uncut_avg[x] += runs[r].uncut_q[x] / static_cast<double>(o.runs);
      }
    }
    json m;
    m["cuts"] = plan.cut_count();
    m["subexperiments"] = plan.assignment_count();
    m["gamma"] = plan.gamma();
    m["exact_distribution"] = exact_p;
    const auto cut_dev = stats(column(per_run, "cut_deviation"));
    const auto uncut_dev = stats(column(per_run, "uncut_deviation"));
    m["cut_deviation"] = to_json(cut_dev);
    m["uncut_deviation"] = to_json(uncut_dev);
    m["cut_deviation_of_mean_distribution"] = total_deviation(cut_avg, exact_p);
    m["uncut_deviation_of_mean_distribution"] = total_deviation(uncut_avg, exact_p);
    for (std::size_t b = 0; b < bases.size(); ++b) {
      std::vector<double> ce, ue;
      for (const auto& r : runs) {
        ce.push_back(r.cut_err[b]);
        ue.push_back(r.uncut_err[b]);
      }
      m["cut_abs_error"][bases[b].observable] = to_json(stats(ce));
      m["uncut_abs_error"][bases[b].observable] = to_json(stats(ue));
    }
    m["runs"] = per_run;
    rep.checks.add(vc.name + ": aggregates recompute", recomputes(cut_dev, column(per_run, "cut_deviation")));
    if (o.exact) rep.checks.add(vc.name + ": exact reconstruction", cut_dev.mean < 1e-9);
    rep.metrics()[vc.name] = m;
  }
  return rep.finish();
}

// ------------------------------------------------------------------- train

struct TrainOptions {
  ModelConfig model;
  TrainConfig train;
  double test_fraction = 0.25;
  bool minmax = false;
  std::size_t splits = 1;  // > 1: repeated splits with seeds seed, seed + 1, ...
  std::optional<std::string> warm_start;
};

struct TrainOutcome {
  json report;
  ModelFile model;  // model of the first split
};

inline ForwardMode evaluation_mode(const TrainConfig& tc, std::uint64_t seed) {
  return tc.exact ? ForwardMode::exact() : ForwardMode::sampled(tc.shots, seed);
}

inline double dataset_loss(const ModelConfig& cfg, const Weights& w, const Dataset& d, const ForwardMode& mode,
                           int threads) {
  return evaluate(cfg, w, d, mode, threads).mean_loss;
}

inline TrainOutcome cmd_train(const TrainOptions& o) {
  Report rep("train");
  const auto& tc = o.train;
  ModelFile warm;
  if (o.warm_start) warm = load_model(*o.warm_start);
  const ModelConfig cfg = o.warm_start ? warm.config : o.model;
  cfg.check();
  tc.check();
  if (o.splits == 0) throw Error(ErrorCode::BadRange, "splits must be >= 1");
  if (o.warm_start && o.splits != 1) throw Error(ErrorCode::BadRange, "warm start trains on the stored split only");
  rep.config() = {{"head", std::string(head_name(cfg.head))},
                  {"strategy", std::string(strategy_name(tc.strategy))},
                  {"learning_rate", tc.learning_rate},
                  {"weight_decay", tc.weight_decay},
                  {"batch_size", tc.batch_size},
                  {"iterations", tc.iterations},
                  {"exact", tc.exact},
                  {"shots", tc.shots},
                  {"qpd_samples", tc.qpd_samples ? json(*tc.qpd_samples) : json(nullptr)},
                  {"mask_threshold", tc.mask_threshold},
                  {"mask_reset", tc.mask_reset},
                  {"seed", tc.seed},
                  {"test_fraction", o.warm_start ? warm.test_fraction : o.test_fraction},
                  {"minmax", o.warm_start ? warm.scaler.minmax : o.minmax},
                  {"splits", o.splits},
                  {"warm_start", o.warm_start ? json(*o.warm_start) : json(nullptr)},
                  {"layers", cfg.layers},
                  {"depth", cfg.depth},
                  {"partition_a", cfg.partition_a},
                  {"encode_first", cfg.encode_first}};

  const auto data = load_iris();
  TrainOutcome out;
  json per_split = json::array();
  for (std::size_t k = 0; k < o.splits; ++k) {
    const std::uint64_t split_seed = o.warm_start ? warm.split_seed : tc.seed + k;
    const double fraction = o.warm_start ? warm.test_fraction : o.test_fraction;
    const auto s = split(data, fraction, split_seed);
    const Scaler scaler = o.warm_start ? warm.scaler : (o.minmax ? Scaler::fit_minmax(s.train) : Scaler::identity());
    const Dataset train = scaler.apply(s.train), test = scaler.apply(s.test);
    TrainConfig run_tc = tc;
    run_tc.seed = o.warm_start ? tc.seed : split_seed;
    const Weights start = o.warm_start ? warm.weights : initial_weights(cfg, run_tc.seed);
    const auto eval_mode = evaluation_mode(run_tc, derive_key({run_tc.seed, 0xe7ULL}));
    const double initial_loss = dataset_loss(cfg, start, train, eval_mode, tc.threads);
    const auto fitted = fit(cfg, run_tc, train, start);
    const double final_loss = dataset_loss(cfg, fitted.weights, train, eval_mode, tc.threads);
    const auto tr = evaluate(cfg, fitted.weights, train, eval_mode, tc.threads);
    const auto te = evaluate(cfg, fitted.weights, test, eval_mode, tc.threads);

    json e;
    e["split_seed"] = split_seed;
    e["train_accuracy"] = tr.accuracy;
    e["test_accuracy"] = te.accuracy;
    e["initial_train_loss"] = initial_loss;
    e["final_train_loss"] = final_loss;
    e["loss_history"] = fitted.loss_history;
    json iters = json::array();
    for (const auto& l : fitted.log) {
      iters.push_back({{"batch", l.batch},
                       {"masked", l.masked},
                       {"backward_evaluations", l.backward_evaluations},
                       {"backward_evaluations_per_sample", l.backward_evaluations / l.batch}});
    }
    e["iterations"] = iters;
    e["test_confusion"] = te.confusion;
    per_split.push_back(e);
    rep.checks.add("split " + std::to_string(k) + ": loss history length", fitted.loss_history.size() == tc.iterations);

    if (k == 0) {
      out.model.config = cfg;
      out.model.scaler = scaler;
      out.model.weights = fitted.weights;
      out.model.optimizer = fitted.optimizer;
      out.model.loss_history = o.warm_start ? warm.loss_history : std::vector<double>{};
      out.model.loss_history.insert(out.model.loss_history.end(), fitted.loss_history.begin(), fitted.loss_history.end());
      out.model.seed = run_tc.seed;
      out.model.split_seed = split_seed;
      out.model.test_fraction = fraction;
    }
  }
  const auto acc = stats(column(per_split, "test_accuracy"));
  rep.metrics()["test_accuracy"] = to_json(acc);
  rep.metrics()["train_accuracy"] = to_json(stats(column(per_split, "train_accuracy")));
  rep.metrics()["splits"] = per_split;
  rep.checks.add("aggregates recompute", recomputes(acc, column(per_split, "test_accuracy")));
  out.report = rep.finish();
  return out;
}

// ---------------------------------------------------------------- eval-cut

struct EvalCutOptions {
  std::string model_path;
  bool exact = false;
  std::size_t shots = 4096;
  std::uint64_t seed = 0;
  std::optional<std::size_t> qpd_samples;
  int threads = 0;
};

struct EvalCutOutcome {
  json report;
  std::vector<std::vector<int>> uncut_confusion, cut_confusion;
};

inline EvalCutOutcome cmd_eval_cut(const EvalCutOptions& o) {
  Report rep("eval-cut");
  const auto m = load_model(o.model_path);
  rep.config() = {{"model", o.model_path},
                  {"head", std::string(head_name(m.config.head))},
                  {"exact", o.exact},
                  {"shots", o.shots},
                  {"seed", o.seed},
                  {"qpd_samples", o.qpd_samples ? json(*o.qpd_samples) : json(nullptr)},
                  {"split_seed", m.split_seed},
                  {"test_fraction", m.test_fraction}};
  const auto s = split(load_iris(), m.test_fraction, m.split_seed);
  const Dataset test = m.scaler.apply(s.test);

  ForwardMode uncut = o.exact ? ForwardMode::exact() : ForwardMode::sampled(o.shots, derive_key({o.seed, 1}));
  ForwardMode cut = o.exact ? ForwardMode::cut_exact() : ForwardMode::cut_sampled(o.shots, derive_key({o.seed, 2}));
  cut.qpd_samples = o.qpd_samples;
  const auto ideal = evaluate(m.config, m.weights, test, ForwardMode::exact(), o.threads);
  const auto eu = evaluate(m.config, m.weights, test, uncut, o.threads);
  const auto ec = evaluate(m.config, m.weights, test, cut, o.threads);

  std::size_t agree = 0;
  json samples = json::array();
  std::vector<double> devs;
  for (std::size_t i = 0; i < test.size(); ++i) {
    if (eu.predictions[i] == ec.predictions[i]) ++agree;
    const double dev = total_deviation(ec.quasi[i], ideal.distributions[i]);
    devs.push_back(dev);
    samples.push_back({{"row", s.test_rows[i]},
                       {"label", test.labels[i]},
                       {"uncut_prediction", eu.predictions[i]},
                       {"cut_prediction", ec.predictions[i]},
                       {"cut_deviation", dev},
                       {"clamped_mass", ec.clamped_mass[i]}});
  }
  const double agreement = static_cast<double>(agree) / static_cast<double>(test.size());
  auto& mt = rep.metrics();
  mt["uncut_accuracy"] = eu.accuracy;
  mt["cut_accuracy"] = ec.accuracy;
  mt["agreement"] = agreement;
  mt["uncut_confusion"] = eu.confusion;
  mt["cut_confusion"] = ec.confusion;
  mt["cut_deviation"] = to_json(stats(devs));
  mt["accumulated_cut_deviation"] = stats(devs).mean * static_cast<double>(devs.size());
  mt["subexperiment_evaluations"] = ec.evaluations;
  mt["samples"] = samples;
  if (o.exact) rep.checks.add("exact engines agree on every prediction", agree == test.size());
  rep.checks.add("aggregates recompute", recomputes(stats(devs), column(samples, "cut_deviation")));
  return {rep.finish(), eu.confusion, ec.confusion};
}

// ----------------------------------------------------------- noise-compare

struct NoiseCompareOptions {
  std::string model_path;
  NoiseModel noise{0.006, 0.06, 0.0};
  std::size_t runs = 50;
  std::size_t shots = 4096;
  std::uint64_t seed = 0;
  std::size_t sample = 0;  // row of the stored test split
  std::optional<std::size_t> qpd_samples;
  int threads = 0;
};

struct NoiseCompareOutcome {
  json report;
  std::string csv;
};

/// Error = sum over basis states of |estimate - ideal| for the model circuit
/// of one test sample, uncut versus cut under the same noise model.
inline NoiseCompareOutcome cmd_noise_compare(const NoiseCompareOptions& o) {
  Report rep("noise-compare");
  o.noise.check();
  if (o.runs == 0 || o.shots == 0) throw Error(ErrorCode::BadRange, "runs and shots must be >= 1");
  const auto m = load_model(o.model_path);
  const auto s = split(load_iris(), m.test_fraction, m.split_seed);
  if (o.sample >= s.test.size()) throw Error(ErrorCode::IndexOutOfRange, "sample index beyond the test split");
  const auto x = m.scaler.apply(s.test.features[o.sample]);
  rep.config() = {{"model", o.model_path},
                  {"p1", o.noise.p1},
                  {"p2", o.noise.p2},
                  {"p_ro", o.noise.p_ro},
                  {"runs", o.runs},
                  {"shots", o.shots},
                  {"seed", o.seed},
                  {"sample", o.sample},
                  {"qpd_samples", o.qpd_samples ? json(*o.qpd_samples) : json(nullptr)}};
  const Circuit circuit = build_model_circuit(m.config, x, m.weights);
  const CutPlan plan(circuit, crossing_gates(circuit, m.config.partition_a));
  const auto ideal = probabilities(run_statevector(circuit));
  const std::size_t dim = ideal.size();

  struct RunResult {
    std::vector<double> uncut, cut, cut_raw;
  };
  std::vector<RunResult> runs(o.runs);
  parallel_for(
      o.runs,
      [&](std::size_t r) {
        ExecutionConfig cfg;
        cfg.engine = Engine::noisy(o.noise);
        cfg.shots = o.shots;
        cfg.seed = derive_key({o.seed, r});
        cfg.qpd_samples = o.qpd_samples;
        cfg.threads = 1;
        runs[r].uncut = execute_circuit(circuit, cfg).net_weight;
        runs[r].cut_raw = reconstruct_distribution(execute_plan(plan, cfg)).weights;
        runs[r].cut = normalize({runs[r].cut_raw}).probabilities;
      },
      o.threads);

  json per_run = json::array();
  for (std::size_t r = 0; r < o.runs; ++r) {
    per_run.push_back({{"run", r},
                       {"uncut_error", total_deviation(runs[r].uncut, ideal)},
                       {"cut_error", total_deviation(runs[r].cut, ideal)},
                       {"cut_raw_error", total_deviation(runs[r].cut_raw, ideal)}});
  }
  const auto ue = stats(column(per_run, "uncut_error"));
  const auto ce = stats(column(per_run, "cut_error"));
  auto& mt = rep.metrics();
  mt["uncut_error"] = to_json(ue);
  mt["cut_error"] = to_json(ce);
  mt["cut_raw_error"] = to_json(stats(column(per_run, "cut_raw_error")));
  mt["cut_to_uncut_ratio"] = ce.mean / ue.mean;
  mt["cut_below_uncut_sigma"] =
      (ue.mean - ce.mean) / std::sqrt((ue.std * ue.std + ce.std * ce.std) / static_cast<double>(o.runs));
  mt["cuts"] = plan.cut_count();
  mt["runs"] = per_run;
  rep.checks.add("aggregates recompute", recomputes(ue, column(per_run, "uncut_error")) &&
                                             recomputes(ce, column(per_run, "cut_error")));

  std::ostringstream csv;
  csv.precision(17);
  csv << "bitstring,exact_p,uncut_mean,uncut_std,cut_mean,cut_std\n";
  for (std::size_t b = 0; b < dim; ++b) {
    std::vector<double> u, c;
    for (const auto& r : runs) {
      u.push_back(r.uncut[b]);
      c.push_back(r.cut[b]);
    }
    const auto us = stats(u), cs = stats(c);
    csv << to_bitstring(b, circuit.width()) << ',' << ideal[b] << ',' << us.mean << ',' << us.std << ',' << cs.mean
        << ',' << cs.std << '\n';
  }
  return {rep.finish(), csv.str()};
}

}  // namespace qcut::harness
