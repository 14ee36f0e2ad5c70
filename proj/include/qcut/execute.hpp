#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "qcut/cut_plan.hpp"
#include "qcut/parallel.hpp"
#include "qcut/simulator.hpp"

namespace qcut {

enum class EngineKind { Exact, Sampled, Noisy };

struct Engine {
  EngineKind kind = EngineKind::Exact;
  NoiseModel noise{};

  static Engine exact() { return {EngineKind::Exact, {}}; }
  static Engine sampled() { return {EngineKind::Sampled, {}}; }
  static Engine noisy(NoiseModel n) { return {EngineKind::Noisy, n}; }
};

struct ExecutionConfig {
  Engine engine = Engine::exact();
  std::size_t shots = 4096;                // per subexperiment (or fragment)
  std::uint64_t seed = 0;
  std::optional<std::size_t> qpd_samples;  // Monte-Carlo term sampling; enumerate when empty
  bool fragments = true;                   // run connected components independently
  int threads = 0;
};

/// Per-subexperiment signed tally: net_weight[x] = (1/N) sum_shots sign * [output == x]
/// (exact branch probabilities in the exact engine).
struct WeightedTally {
  std::uint64_t assignment_id = 0;
  double coefficient = 0.0;
  std::size_t shots = 0;  // 0 for exact tallies
  std::vector<double> net_weight;
};

struct PlanExecution {
  int width = 0;
  std::vector<WeightedTally> tallies;  // ordered by assignment id
  std::size_t evaluations = 0;         // subexperiment circuits executed
};

namespace detail {

/// Signed tally of one cut-free circuit. `task` keys the shot streams.
inline std::vector<double> run_tally(const Circuit& circuit, const ExecutionConfig& cfg, std::uint64_t task) {
  if (cfg.engine.kind == EngineKind::Exact) return exact_signed_distribution(circuit);
  const auto shots = cfg.engine.kind == EngineKind::Sampled
                         ? sample_shots(circuit, cfg.shots, cfg.seed, task)
                         : noisy_trajectory_sample(circuit, cfg.engine.noise, cfg.shots, cfg.seed, task);
  std::vector<double> net(std::size_t{1} << circuit.width(), 0.0);
  const double inv = 1.0 / static_cast<double>(cfg.shots);
  for (const auto& r : shots) net[r.output] += r.sign * inv;
  return net;
}

/// Restricts a circuit to a set of qubits, relabelled 0..m-1 in order.
inline Circuit restrict_to(const Circuit& circuit, const std::vector<int>& qubits) {
  std::vector<int> local(static_cast<std::size_t>(circuit.width()), -1);
  for (std::size_t i = 0; i < qubits.size(); ++i) local[static_cast<std::size_t>(qubits[i])] = static_cast<int>(i);
  Circuit out(static_cast<int>(qubits.size()));
  for (GateOp op : circuit.ops()) {
    if (local[static_cast<std::size_t>(op.qubits[0])] < 0) continue;
    op.qubits = {local[static_cast<std::size_t>(op.qubits[0])], local[static_cast<std::size_t>(op.qubits[op.arity() - 1])]};
    out.add(std::move(op));
  }
  return out;
}

/// Runs each connected component separately and joins the fragment tallies
/// by outer product (signs multiply, fragments are independent).
inline std::vector<double> run_fragmented(const Circuit& circuit, const ExecutionConfig& cfg, std::uint64_t id) {
  const auto components = connected_components(circuit);
  if (components.size() == 1) return run_tally(circuit, cfg, derive_key({id, 0}));
  std::vector<double> joint{1.0};
  std::vector<int> placed;
  for (std::size_t f = 0; f < components.size(); ++f) {
    const auto& qubits = components[f];
    const auto part = run_tally(restrict_to(circuit, qubits), cfg, derive_key({id, f + 1}));
    std::vector<double> next(joint.size() * part.size(), 0.0);
    for (std::size_t j = 0; j < joint.size(); ++j) {
      if (joint[j] == 0.0) continue;
      for (std::size_t p = 0; p < part.size(); ++p) next[j + joint.size() * p] = joint[j] * part[p];
    }
    joint = std::move(next);
    placed.insert(placed.end(), qubits.begin(), qubits.end());
  }
  // joint is indexed by bits in `placed` order; scatter to global positions.
  std::vector<double> out(joint.size(), 0.0);
  for (std::size_t j = 0; j < joint.size(); ++j) {
    if (joint[j] == 0.0) continue;
    std::size_t x = 0;
    for (std::size_t b = 0; b < placed.size(); ++b) x |= ((j >> b) & 1U) << placed[b];
    out[x] = joint[j];
  }
  return out;
}

}  // namespace detail

/// Executes every subexperiment of the plan (or a Monte-Carlo sample of
/// them). Results are a pure function of (plan, config) and independent of
/// thread count.
inline PlanExecution execute_plan(const CutPlan& plan, const ExecutionConfig& cfg) {
  if (cfg.engine.kind != EngineKind::Exact && cfg.shots == 0) throw Error(ErrorCode::BadRange, "shots must be > 0");
  std::vector<std::pair<std::uint64_t, double>> jobs;
  if (cfg.qpd_samples) {
    jobs = sampled_weights(plan, sample_subexperiment_terms(plan, *cfg.qpd_samples, cfg.seed));
  } else {
    jobs.reserve(plan.assignment_count());
    for (std::uint64_t id = 0; id < plan.assignment_count(); ++id) jobs.emplace_back(id, plan.coefficient(id));
  }
  PlanExecution result;
  result.width = plan.width();
  result.tallies.resize(jobs.size());
  parallel_for(
      jobs.size(),
      [&](std::size_t i) {
        const auto [id, coefficient] = jobs[i];
        const Circuit sub = plan.subexperiment(id);
        auto& tally = result.tallies[i];
        tally.assignment_id = id;
        tally.coefficient = coefficient;
        tally.shots = cfg.engine.kind == EngineKind::Exact ? 0 : cfg.shots;
        tally.net_weight = cfg.fragments ? detail::run_fragmented(sub, cfg, id)
                                         : detail::run_tally(sub, cfg, derive_key({id, 0}));
      },
      cfg.threads);
  result.evaluations = jobs.size();
  return result;
}

/// Uncut execution of a plain circuit through the same engines.
inline WeightedTally execute_circuit(const Circuit& circuit, const ExecutionConfig& cfg) {
  WeightedTally t;
  t.coefficient = 1.0;
  t.shots = cfg.engine.kind == EngineKind::Exact ? 0 : cfg.shots;
  t.net_weight = detail::run_tally(circuit, cfg, derive_key({0xc0ffeeULL, 0}));
  return t;
}

}  // namespace qcut
