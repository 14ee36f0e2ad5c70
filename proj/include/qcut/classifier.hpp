#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qcut/data.hpp"
#include "qcut/reconstruct.hpp"

namespace qcut {

enum class HeadKind { ExpectedValue, Modulo, Parity };

inline std::string_view head_name(HeadKind h) {
  switch (h) {
    case HeadKind::ExpectedValue: return "expected";
    case HeadKind::Modulo: return "modulo";
    case HeadKind::Parity: return "parity";
  }
  return "?";
}

inline HeadKind head_from_name(std::string_view s) {
  if (s == "expected" || s == "EXPECTED_VALUE") return HeadKind::ExpectedValue;
  if (s == "modulo" || s == "MODULO") return HeadKind::Modulo;
  if (s == "parity" || s == "PARITY") return HeadKind::Parity;
  throw Error(ErrorCode::ParseError, "unknown head '" + std::string(s) + "'");
}

struct ModelConfig {
  int n_qubits = 4;
  int n_classes = 3;
  int layers = 1;
  int depth = 2;
  HeadKind head = HeadKind::Parity;
  std::vector<int> partition_a{0, 2};  // cut side A; remaining qubits form side B
  bool encode_first = false;           // true: RX(X) before the trainable sub-layers in each block

  std::size_t parameter_count() const {
    return static_cast<std::size_t>(layers) * static_cast<std::size_t>(depth) * static_cast<std::size_t>(n_qubits) * 3;
  }

  std::size_t index(int block, int sub, int qubit, int angle) const {
    return ((static_cast<std::size_t>(block) * static_cast<std::size_t>(depth) + static_cast<std::size_t>(sub)) *
                static_cast<std::size_t>(n_qubits) +
            static_cast<std::size_t>(qubit)) *
               3 +
           static_cast<std::size_t>(angle);
  }

  void check() const {
    if (n_qubits < 1 || n_qubits > 20 || layers < 1 || depth < 1 || n_classes < 2) {
      throw Error(ErrorCode::BadRange, "model dimensions out of range");
    }
    if (n_classes > (1 << n_qubits)) throw Error(ErrorCode::HeadConfigInvalid, "more classes than bitstrings");
    if (head == HeadKind::ExpectedValue && n_classes > n_qubits) {
      throw Error(ErrorCode::HeadConfigInvalid, "expected-value head needs one qubit per class");
    }
  }
};

using Weights = std::vector<double>;

/// Per block: encoding layer RX(X_q) and `depth` sub-layers of RZ RY RZ on
/// every qubit followed by a CNOT ring q -> (q + r) mod n with
/// r = 1 + (sub mod (n - 1)).
inline Circuit build_model_circuit(const ModelConfig& cfg, const std::vector<double>& x, const Weights& w) {
  cfg.check();
  if (x.size() != static_cast<std::size_t>(cfg.n_qubits)) {
    throw Error(ErrorCode::DimMismatch, "feature vector has " + std::to_string(x.size()) + " entries, model expects " +
                                            std::to_string(cfg.n_qubits));
  }
  if (w.size() != cfg.parameter_count()) {
    throw Error(ErrorCode::DimMismatch, "weight vector has " + std::to_string(w.size()) + " entries, model expects " +
                                            std::to_string(cfg.parameter_count()));
  }
  const int n = cfg.n_qubits;
  Circuit c(n);
  auto encode = [&] {
    for (int q = 0; q < n; ++q) c.add(gate::rx(q, x[static_cast<std::size_t>(q)]));
  };
  for (int l = 0; l < cfg.layers; ++l) {
    if (cfg.encode_first) encode();
    for (int d = 0; d < cfg.depth; ++d) {
      for (int q = 0; q < n; ++q) {
        c.add(gate::rz(q, w[cfg.index(l, d, q, 0)]));
        c.add(gate::ry(q, w[cfg.index(l, d, q, 1)]));
        c.add(gate::rz(q, w[cfg.index(l, d, q, 2)]));
      }
      if (n > 1) {
        const int r = 1 + d % (n - 1);
        for (int q = 0; q < n; ++q) c.add(gate::cnot(q, (q + r) % n));
      }
    }
    if (!cfg.encode_first) encode();
  }
  return c;
}

inline int parity_class(std::uint64_t b, int n_classes) {
  int t = 0;
  while ((1 << t) < n_classes) ++t;
  const auto low = b & ((std::uint64_t{1} << t) - 1);
  const auto high_parity = static_cast<std::uint64_t>(__builtin_popcountll(b >> t) & 1);
  return static_cast<int>((low + high_parity) % static_cast<std::uint64_t>(n_classes));
}

/// Class scores from measurement data: a distribution over 2^n bitstrings
/// for the probability heads, or M expectation values for EXPECTED_VALUE.
inline std::vector<double> apply_head(HeadKind head, const std::vector<double>& data, int n_classes) {
  std::vector<double> s(static_cast<std::size_t>(n_classes), 0.0);
  switch (head) {
    case HeadKind::ExpectedValue:
      if (data.size() < s.size()) throw Error(ErrorCode::HeadConfigInvalid, "need one expectation value per class");
      std::copy_n(data.begin(), s.size(), s.begin());
      break;
    case HeadKind::Modulo:
      for (std::size_t b = 0; b < data.size(); ++b) s[b % s.size()] += data[b];
      break;
    case HeadKind::Parity:
      for (std::size_t b = 0; b < data.size(); ++b) s[static_cast<std::size_t>(parity_class(b, n_classes))] += data[b];
      break;
  }
  return s;
}

struct SoftmaxNll {
  std::vector<double> probabilities;
  double loss = 0.0;
};

inline SoftmaxNll softmax_nll(const std::vector<double>& scores, int label) {
  SoftmaxNll out;
  const double top = *std::max_element(scores.begin(), scores.end());
  double z = 0.0;
  for (double s : scores) z += std::exp(s - top);
  out.probabilities.reserve(scores.size());
  for (double s : scores) out.probabilities.push_back(std::exp(s - top) / z);
  out.loss = -(scores[static_cast<std::size_t>(label)] - top - std::log(z));
  return out;
}

/// d loss / d score = p - onehot(label).
inline std::vector<double> nll_score_gradient(const std::vector<double>& probabilities, int label) {
  auto g = probabilities;
  g[static_cast<std::size_t>(label)] -= 1.0;
  return g;
}

/// Chains one parameter's shifted scores through the loss:
/// sum_m dL/ds_m * (s_m(w+) - s_m(w-)) / 2.
inline double shift_chain(const std::vector<double>& dloss_dscore, const std::vector<double>& plus,
                          const std::vector<double>& minus) {
  double g = 0.0;
  for (std::size_t m = 0; m < dloss_dscore.size(); ++m) g += dloss_dscore[m] * (plus[m] - minus[m]) / 2.0;
  return g;
}

enum class ForwardKind { Exact, Shots, Cut };

struct ForwardMode {
  ForwardKind kind = ForwardKind::Exact;
  Engine engine = Engine::exact();  // Shots: sampled or noisy; Cut: any
  std::size_t shots = 4096;
  std::uint64_t seed = 0;
  std::optional<std::size_t> qpd_samples;
  int threads = 1;  // subexperiment threads inside one cut forward

  static ForwardMode exact() { return {}; }
  static ForwardMode sampled(std::size_t shots, std::uint64_t seed) {
    return {ForwardKind::Shots, Engine::sampled(), shots, seed, {}, 1};
  }
  static ForwardMode cut_exact() { return {ForwardKind::Cut, Engine::exact(), 0, 0, {}, 1}; }
  static ForwardMode cut_sampled(std::size_t shots, std::uint64_t seed) {
    return {ForwardKind::Cut, Engine::sampled(), shots, seed, {}, 1};
  }

  bool stochastic() const { return engine.kind != EngineKind::Exact; }

  ForwardMode reseeded(std::uint64_t s) const {
    ForwardMode m = *this;
    m.seed = s;
    return m;
  }
};

struct ForwardResult {
  std::vector<double> scores;
  std::vector<double> distribution;  // head input distribution (clamped and renormalized for cut runs)
  std::vector<double> quasi;         // raw reconstruction for cut runs
  double clamped_mass = 0.0;
  std::size_t evaluations = 0;       // circuits executed (subexperiments for cut runs)
};

namespace detail {

inline std::vector<double> z_expectations(const std::vector<double>& weights, int count) {
  std::vector<double> e(static_cast<std::size_t>(count), 0.0);
  for (std::size_t x = 0; x < weights.size(); ++x)
    for (int m = 0; m < count; ++m) e[static_cast<std::size_t>(m)] += ((x >> m) & 1U) ? -weights[x] : weights[x];
  return e;
}

}  // namespace detail

/// Class scores for one sample; the probability heads see a normalized
/// distribution, EXPECTED_VALUE reads <Z_m> on qubits 0..M-1.
inline ForwardResult forward_scores(const ModelConfig& cfg, const std::vector<double>& x, const Weights& w,
                                    const ForwardMode& mode) {
  const Circuit circuit = build_model_circuit(cfg, x, w);
  ForwardResult r;
  ExecutionConfig exec;
  exec.engine = mode.engine;
  exec.shots = mode.shots;
  exec.seed = mode.seed;
  exec.qpd_samples = mode.qpd_samples;
  exec.threads = mode.threads;
  std::vector<double> expectation_source;
  switch (mode.kind) {
    case ForwardKind::Exact:
      r.distribution = probabilities(run_statevector(circuit));
      expectation_source = r.distribution;
      r.evaluations = 1;
      break;
    case ForwardKind::Shots:
      if (exec.engine.kind == EngineKind::Exact) exec.engine = Engine::sampled();
      r.distribution = execute_circuit(circuit, exec).net_weight;
      expectation_source = r.distribution;
      r.evaluations = 1;
      break;
    case ForwardKind::Cut: {
      const CutPlan plan(circuit, crossing_gates(circuit, cfg.partition_a));
      const auto run = execute_plan(plan, exec);
      r.quasi = reconstruct_distribution(run).weights;
      auto norm = normalize({r.quasi});
      r.distribution = std::move(norm.probabilities);
      r.clamped_mass = norm.clamped_mass;
      expectation_source = r.quasi;
      r.evaluations = run.evaluations;
      break;
    }
  }
  r.scores = cfg.head == HeadKind::ExpectedValue
                 ? detail::z_expectations(expectation_source, cfg.n_classes)
                 : apply_head(cfg.head, r.distribution, cfg.n_classes);
  return r;
}

/// Class probability vector.
inline std::vector<double> forward(const ModelConfig& cfg, const std::vector<double>& x, const Weights& w,
                                   const ForwardMode& mode) {
  return softmax_nll(forward_scores(cfg, x, w, mode).scores, 0).probabilities;
}

inline void check_labels(const ModelConfig& cfg, const Dataset& data) {
  if (data.empty()) throw Error(ErrorCode::EmptyDataset, "dataset has no rows");
  for (int y : data.labels)
    if (y < 0 || y >= cfg.n_classes) throw Error(ErrorCode::BadRange, "label " + std::to_string(y) + " out of range");
}

struct GradientResult {
  std::vector<double> gradient;
  double loss = 0.0;                     // mean loss at the unshifted weights
  std::size_t forward_evaluations = 0;   // circuits run for the unshifted forwards
  std::size_t backward_evaluations = 0;  // circuits run for the shifted forwards
};

/// Parameter-shift gradient of the mean NLL over `batch`. Masked entries
/// (mask[j] == true) are neither evaluated nor updated. Stochastic modes
/// draw an independent seed per (sample, parameter, shift).
inline GradientResult grad_parameter_shift(const ModelConfig& cfg, const Dataset& batch, const Weights& w,
                                           const ForwardMode& mode, const std::vector<bool>& mask = {},
                                           int threads = 0) {
  check_labels(cfg, batch);
  const std::size_t p = cfg.parameter_count();
  if (!mask.empty() && mask.size() != p) throw Error(ErrorCode::DimMismatch, "mask length differs from parameter count");
  std::vector<std::size_t> active;
  for (std::size_t j = 0; j < p; ++j)
    if (mask.empty() || !mask[j]) active.push_back(j);

  // Task layout per sample: [unshifted, (+j, -j) for each active j].
  const std::size_t per_sample = 1 + 2 * active.size();
  std::vector<ForwardResult> results(batch.size() * per_sample);
  ForwardMode inner = mode;
  inner.threads = 1;
  parallel_for(
      results.size(),
      [&](std::size_t t) {
        const std::size_t i = t / per_sample, k = t % per_sample;
        Weights shifted = w;
        std::uint64_t tag = 0;
        if (k > 0) {
          const std::size_t j = active[(k - 1) / 2];
          const bool plus = (k - 1) % 2 == 0;
          shifted[j] += plus ? kPi / 2 : -kPi / 2;
          tag = 1 + 2 * j + (plus ? 0 : 1);
        }
        const auto m = mode.stochastic() ? inner.reseeded(derive_key({mode.seed, i, tag})) : inner;
        results[t] = forward_scores(cfg, batch.features[i], shifted, m);
      },
      threads);

  GradientResult g;
  g.gradient.assign(p, 0.0);
  const double inv = 1.0 / static_cast<double>(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const auto& base = results[i * per_sample];
    const auto sn = softmax_nll(base.scores, batch.labels[i]);
    g.loss += sn.loss * inv;
    g.forward_evaluations += base.evaluations;
    const auto dl = nll_score_gradient(sn.probabilities, batch.labels[i]);
    for (std::size_t a = 0; a < active.size(); ++a) {
      const auto& plus = results[i * per_sample + 1 + 2 * a];
      const auto& minus = results[i * per_sample + 2 + 2 * a];
      g.gradient[active[a]] += shift_chain(dl, plus.scores, minus.scores) * inv;
      g.backward_evaluations += plus.evaluations + minus.evaluations;
    }
  }
  return g;
}

struct OptimizerState {
  std::vector<double> accumulators;
  std::size_t iteration = 0;
  std::vector<bool> mask;  // true = parameter currently skipped

  static OptimizerState fresh(std::size_t parameters) { return {std::vector<double>(parameters, 0.0), 0, std::vector<bool>(parameters, false)}; }
};

/// Adagrad with L2 weight decay folded into the gradient.
inline void adagrad_step(OptimizerState& state, Weights& w, const std::vector<double>& grads, double lr,
                         double weight_decay) {
  if (grads.size() != w.size() || state.accumulators.size() != w.size()) {
    throw Error(ErrorCode::DimMismatch, "optimizer shapes differ");
  }
  for (std::size_t j = 0; j < w.size(); ++j) {
    const double g = grads[j] + weight_decay * w[j];
    state.accumulators[j] += g * g;
    w[j] -= lr * g / (std::sqrt(state.accumulators[j]) + 1e-10);
  }
  ++state.iteration;
}

enum class Strategy { FitThenCut, CutThenFit };

inline std::string_view strategy_name(Strategy s) { return s == Strategy::FitThenCut ? "fit-then-cut" : "cut-then-fit"; }

inline Strategy strategy_from_name(std::string_view s) {
  if (s == "fit-then-cut" || s == "FIT_THEN_CUT") return Strategy::FitThenCut;
  if (s == "cut-then-fit" || s == "CUT_THEN_FIT") return Strategy::CutThenFit;
  throw Error(ErrorCode::ParseError, "unknown strategy '" + std::string(s) + "'");
}

struct TrainConfig {
  Strategy strategy = Strategy::FitThenCut;
  double learning_rate = 0.1;
  double weight_decay = 1e-4;
  std::size_t batch_size = 25;
  std::size_t iterations = 55;
  bool exact = true;  // false: shot-sampled forwards
  std::size_t shots = 4096;
  std::optional<std::size_t> qpd_samples;
  double mask_threshold = 1e-9;
  std::size_t mask_reset = 10;
  std::uint64_t seed = 42;
  int threads = 0;

  void check() const {
    if (!(learning_rate > 0.0)) throw Error(ErrorCode::BadRange, "learning rate must be positive");
    if (weight_decay < 0.0) throw Error(ErrorCode::BadRange, "weight decay must be >= 0");
    if (!(mask_threshold >= 0.0)) throw Error(ErrorCode::BadRange, "mask threshold must be >= 0");
    if (batch_size == 0) throw Error(ErrorCode::BadRange, "batch size must be >= 1");
    if (mask_reset == 0) throw Error(ErrorCode::BadRange, "mask reset period must be >= 1");
    if (!exact && shots == 0) throw Error(ErrorCode::BadRange, "shots must be >= 1");
  }

  /// Forward mode used for every training evaluation at a given iteration.
  ForwardMode mode(std::size_t iteration) const {
    ForwardMode m;
    m.kind = strategy == Strategy::CutThenFit ? ForwardKind::Cut : (exact ? ForwardKind::Exact : ForwardKind::Shots);
    m.engine = exact ? Engine::exact() : Engine::sampled();
    m.shots = exact ? 0 : shots;
    m.seed = derive_key({seed, 0x7a11ULL, iteration});
    m.qpd_samples = qpd_samples;
    return m;
  }
};

/// Seeded uniform [0, 2 pi) initial weights.
inline Weights initial_weights(const ModelConfig& cfg, std::uint64_t seed) {
  Stream rng{seed, 0x1417ULL};
  Weights w(cfg.parameter_count());
  for (auto& v : w) v = 2.0 * kPi * rng.uniform();
  return w;
}

/// Row indices of each iteration's batch: an epoch is a seeded permutation
/// cut into consecutive batches, the last one possibly short.
inline std::vector<std::size_t> batch_rows(std::size_t n, std::size_t batch_size, std::uint64_t seed,
                                           std::size_t iteration) {
  const std::size_t per_epoch = (n + batch_size - 1) / batch_size;
  const std::size_t epoch = iteration / per_epoch, slot = iteration % per_epoch;
  const auto perm = permutation(n, seed, 0xe90c0000ULL + epoch);
  const std::size_t lo = slot * batch_size, hi = std::min(n, lo + batch_size);
  return {perm.begin() + static_cast<std::ptrdiff_t>(lo), perm.begin() + static_cast<std::ptrdiff_t>(hi)};
}

struct IterationLog {
  double loss = 0.0;
  std::size_t batch = 0;
  std::size_t masked = 0;                // parameters skipped at this iteration
  std::size_t backward_evaluations = 0;  // whole batch
};

struct FitResult {
  Weights weights;
  OptimizerState optimizer;
  std::vector<double> loss_history;
  std::vector<IterationLog> log;
};

/// Trains from `initial` (warm start) or seeded random weights.
/// CUT_THEN_FIT masks parameters whose last gradient magnitude fell below
/// the threshold and clears the mask when iteration % mask_reset == 0.
inline FitResult fit(const ModelConfig& cfg, const TrainConfig& tc, const Dataset& train,
                     std::optional<Weights> initial = std::nullopt) {
  cfg.check();
  tc.check();
  check_labels(cfg, train);
  FitResult r;
  r.weights = initial ? *initial : initial_weights(cfg, tc.seed);
  if (r.weights.size() != cfg.parameter_count()) throw Error(ErrorCode::DimMismatch, "initial weights have wrong length");
  r.optimizer = OptimizerState::fresh(cfg.parameter_count());
  const bool masking = tc.strategy == Strategy::CutThenFit;
  for (std::size_t it = 0; it < tc.iterations; ++it) {
    auto& mask = r.optimizer.mask;
    if (masking && it % tc.mask_reset == 0) std::fill(mask.begin(), mask.end(), false);
    const Dataset batch = train.subset(batch_rows(train.size(), tc.batch_size, tc.seed, it));
    const auto g = grad_parameter_shift(cfg, batch, r.weights, tc.mode(it), masking ? mask : std::vector<bool>{},
                                        tc.threads);
    IterationLog entry{g.loss, batch.size(), static_cast<std::size_t>(std::count(mask.begin(), mask.end(), true)),
                       g.backward_evaluations};
    if (masking) {
      for (std::size_t j = 0; j < mask.size(); ++j)
        if (!mask[j] && std::abs(g.gradient[j]) < tc.mask_threshold) mask[j] = true;
    }
    adagrad_step(r.optimizer, r.weights, g.gradient, tc.learning_rate, tc.weight_decay);
    r.loss_history.push_back(g.loss);
    r.log.push_back(entry);
  }
  return r;
}

struct Evaluation {
  std::vector<int> predictions;
  std::vector<std::vector<double>> probabilities;
  std::vector<std::vector<double>> distributions;  // head input per sample
  std::vector<std::vector<double>> quasi;          // raw reconstruction (cut modes) or the distribution
  std::vector<double> clamped_mass;
  double accuracy = 0.0;
  double mean_loss = 0.0;
  std::vector<std::vector<int>> confusion;  // rows = true label, columns = predicted
  std::size_t evaluations = 0;
};

inline int argmax(const std::vector<double>& v) {
  return static_cast<int>(std::max_element(v.begin(), v.end()) - v.begin());
}

inline int predict(const ModelConfig& cfg, const Weights& w, const std::vector<double>& x, const ForwardMode& mode) {
  return argmax(forward(cfg, x, w, mode));
}

/// Forward pass over a labelled set; stochastic modes reseed per row.
inline Evaluation evaluate(const ModelConfig& cfg, const Weights& w, const Dataset& data, const ForwardMode& mode,
                           int threads = 0) {
  check_labels(cfg, data);
  std::vector<ForwardResult> results(data.size());
  ForwardMode inner = mode;
  inner.threads = 1;
  parallel_for(
      data.size(),
      [&](std::size_t i) {
        const auto m = mode.stochastic() ? inner.reseeded(derive_key({mode.seed, 0xe7a1ULL, i})) : inner;
        results[i] = forward_scores(cfg, data.features[i], w, m);
      },
      threads);
  Evaluation e;
  e.confusion.assign(static_cast<std::size_t>(cfg.n_classes), std::vector<int>(static_cast<std::size_t>(cfg.n_classes), 0));
  std::size_t correct = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto sn = softmax_nll(results[i].scores, data.labels[i]);
    const int label = argmax(sn.probabilities);
    e.predictions.push_back(label);
    e.probabilities.push_back(sn.probabilities);
    e.distributions.push_back(results[i].distribution);
    e.quasi.push_back(results[i].quasi.empty() ? results[i].distribution : results[i].quasi);
    e.clamped_mass.push_back(results[i].clamped_mass);
    e.mean_loss += sn.loss / static_cast<double>(data.size());
    e.evaluations += results[i].evaluations;
    ++e.confusion[static_cast<std::size_t>(data.labels[i])][static_cast<std::size_t>(label)];
    if (label == data.labels[i]) ++correct;
  }
  e.accuracy = static_cast<double>(correct) / static_cast<double>(data.size());
  return e;
}

inline double score(const ModelConfig& cfg, const Weights& w, const Dataset& data, const ForwardMode& mode) {
  return evaluate(cfg, w, data, mode).accuracy;
}

inline std::vector<std::vector<int>> confusion(const ModelConfig& cfg, const Weights& w, const Dataset& data,
                                               const ForwardMode& mode) {
  return evaluate(cfg, w, data, mode).confusion;
}

inline std::string confusion_csv(const std::vector<std::vector<int>>& m) {
  std::string out = "true\\pred";
  for (std::size_t j = 0; j < m.size(); ++j) out += "," + std::to_string(j);
  out += '\n';
  for (std::size_t i = 0; i < m.size(); ++i) {
    out += std::to_string(i);
    for (int v : m[i]) out += "," + std::to_string(v);
    out += '\n';
  }
  return out;
}

}  // namespace qcut
