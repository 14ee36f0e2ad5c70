#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "qcut/circuit.hpp"
#include "qcut/rng.hpp"
#include "qcut/statevector.hpp"

namespace qcut {

/// One sampled shot: final bitstring plus the product of mid-measurement
/// eigenvalues (+1 for outcome 0, -1 for outcome 1).
struct ShotRecord {
  std::uint64_t output = 0;
  int sign = 1;
  bool operator==(const ShotRecord&) const = default;
};

struct NoiseModel {
  double p1 = 0.0;    // depolarizing probability after single-qubit gates
  double p2 = 0.0;    // depolarizing probability after two-qubit gates
  double p_ro = 0.0;  // readout flip probability per measured bit

  void check() const {
    for (double p : {p1, p2, p_ro})
      if (!(p >= 0.0 && p <= 1.0)) throw Error(ErrorCode::BadRange, "noise probabilities must lie in [0, 1]");
  }
  bool is_zero() const { return p1 == 0.0 && p2 == 0.0 && p_ro == 0.0; }
};

/// Binary literal with qubit n-1 leftmost.
inline std::string to_bitstring(std::uint64_t x, int width) {
  std::string s(static_cast<std::size_t>(width), '0');
  for (int q = 0; q < width; ++q)
    if ((x >> q) & 1U) s[static_cast<std::size_t>(width - 1 - q)] = '1';
  return s;
}

inline std::uint64_t from_bitstring(const std::string& s) {
  std::uint64_t x = 0;
  for (char c : s) {
    if (c != '0' && c != '1') throw Error(ErrorCode::ParseError, "bad bitstring '" + s + "'");
    x = (x << 1) | static_cast<std::uint64_t>(c == '1');
  }
  return x;
}

inline int sign_of(std::uint32_t mid_bits) { return (__builtin_popcount(mid_bits) & 1) ? -1 : 1; }

/// Pauli inserted after op `after` on `qubit` (1 = X, 2 = Y, 3 = Z).
struct PauliInsertion {
  std::uint32_t after = 0;
  std::uint8_t qubit = 0;
  std::uint8_t pauli = 0;
  auto operator<=>(const PauliInsertion&) const = default;
};

namespace detail {

inline void require_bound(const Circuit& circuit) {
  if (!circuit.is_bound()) throw Error(ErrorCode::UnboundParameter, "circuit has unbound symbols");
}

inline void apply_pauli(StateVector& state, int q, int pauli) {
  switch (pauli) {
    case 1: state.apply_x(q); break;
    case 2: state.apply_matrix(q, single_qubit_matrix(GateKind::Y)); break;
    case 3: state.apply_diagonal(q, 1.0, -1.0); break;
    default: break;
  }
}

/// Depth-first expansion of mid-circuit measurement branches. Calls
/// leaf(prob, mid_bits, state) once per branch of nonzero probability.
template <class Leaf>
void expand_branches(const Circuit& circuit, std::span<const PauliInsertion> errors, std::size_t start,
                     std::size_t next_error, StateVector state, double prob, std::uint32_t mid_bits, Leaf& leaf) {
  const auto& ops = circuit.ops();
  for (std::size_t i = start; i < ops.size(); ++i) {
    const GateOp& op = ops[i];
    if (op.kind == GateKind::MEASURE_Z_MID) {
      const int q = op.qubits[0];
      const double p1 = std::clamp(state.probability_one(q), 0.0, 1.0);
      const std::uint32_t bit = std::uint32_t{1} << *op.slot;
      const std::size_t err = next_error;
      if (p1 < 1.0) {
        StateVector zero = state;
        zero.collapse(q, 0, 1.0 - p1);
        std::size_t e = err;
        for (; e < errors.size() && errors[e].after == i; ++e) apply_pauli(zero, errors[e].qubit, errors[e].pauli);
        expand_branches(circuit, errors, i + 1, e, std::move(zero), prob * (1.0 - p1), mid_bits, leaf);
      }
      if (p1 > 0.0) {
        state.collapse(q, 1, p1);
        std::size_t e = err;
        for (; e < errors.size() && errors[e].after == i; ++e) apply_pauli(state, errors[e].qubit, errors[e].pauli);
        expand_branches(circuit, errors, i + 1, e, std::move(state), prob * p1, mid_bits | bit, leaf);
      }
      return;
    }
    if (op.kind == GateKind::PROJ_PLUS || op.kind == GateKind::PROJ_MINUS) {
      throw Error(ErrorCode::UnsupportedOp, "post-selection projectors are only valid in the channel oracle");
    }
    state.apply(op);
    for (; next_error < errors.size() && errors[next_error].after == i; ++next_error)
      apply_pauli(state, errors[next_error].qubit, errors[next_error].pauli);
  }
  leaf(prob, mid_bits, state);
}

}  // namespace detail

/// Calls leaf(prob, mid_bits, state) for every mid-measurement branch.
/// `errors` must be sorted by op position.
template <class Leaf>
void for_each_branch(const Circuit& circuit, Leaf&& leaf, std::span<const PauliInsertion> errors = {}) {
  detail::require_bound(circuit);
  for (const auto& op : circuit.ops())
    if (op.kind == GateKind::MEASURE_Z_MID && (*op.slot < 0 || *op.slot >= 32))
      throw Error(ErrorCode::BadRange, "mid-measurement slots must lie in [0, 32)");
  detail::expand_branches(circuit, errors, 0, 0, StateVector(circuit.width()), 1.0, 0U, leaf);
}

inline StateVector run_statevector(const Circuit& circuit) {
  detail::require_bound(circuit);
  StateVector state(circuit.width());
  for (const auto& op : circuit.ops()) {
    if (is_projective(op.kind)) {
      throw Error(ErrorCode::UnsupportedOp, std::string(gate_name(op.kind)) + " in a unitary-only simulation");
    }
    state.apply(op);
  }
  return state;
}

/// Exact signed tally: sum over branches of sign * Pr[branch, x].
inline std::vector<double> exact_signed_distribution(const Circuit& circuit) {
  std::vector<double> net(std::size_t{1} << circuit.width(), 0.0);
  for_each_branch(circuit, [&](double prob, std::uint32_t mid_bits, const StateVector& state) {
    const double w = prob * sign_of(mid_bits);
    for (std::size_t x = 0; x < net.size(); ++x) net[x] += w * std::norm(state[x]);
  });
  return net;
}

/// Joint distribution over (mid-measurement outcomes, output) laid out as a
/// cumulative table for inverse-transform sampling.
class OutcomeTable {
 public:
  struct Entry {
    std::uint32_t mid_bits;
    std::uint64_t output;
  };

  static OutcomeTable build(const Circuit& circuit, std::span<const PauliInsertion> errors = {}) {
    OutcomeTable t;
    double acc = 0.0;
    for_each_branch(
        circuit,
        [&](double prob, std::uint32_t mid_bits, const StateVector& state) {
          for (std::size_t x = 0; x < state.dim(); ++x) {
            const double p = prob * std::norm(state[x]);
            if (p <= 0.0) continue;
            acc += p;
            t.entries_.push_back({mid_bits, x});
            t.cdf_.push_back(acc);
          }
        },
        errors);
    return t;
  }

  /// Maps u in [0, 1) to an outcome.
  const Entry& draw(double u) const {
    const double target = u * cdf_.back();
    auto it = std::upper_bound(cdf_.begin(), cdf_.end(), target);
    auto idx = static_cast<std::size_t>(std::min<std::ptrdiff_t>(it - cdf_.begin(), static_cast<std::ptrdiff_t>(cdf_.size()) - 1));
    return entries_[idx];
  }

  std::size_t size() const { return entries_.size(); }

 private:
  std::vector<Entry> entries_;
  std::vector<double> cdf_;
};

/// Born-rule sampling. Shot s draws from the stream keyed by
/// (seed, task, s), so results do not depend on evaluation order.
inline std::vector<ShotRecord> sample_shots(const Circuit& circuit, std::size_t shots, std::uint64_t seed,
                                            std::uint64_t task = 0) {
  const auto table = OutcomeTable::build(circuit);
  std::vector<ShotRecord> out(shots);
  for (std::size_t s = 0; s < shots; ++s) {
    Stream rng{seed, task, s};
    const auto& e = table.draw(rng.uniform());
    out[s] = {e.output, sign_of(e.mid_bits)};
  }
  return out;
}

/// Pauli-trajectory sampling: after every gate a uniformly random
/// non-identity Pauli hits its qubits with probability p1 / p2, and every
/// measured bit (final and mid-circuit) flips with probability p_ro. The
/// first stream draw of each shot selects the outcome, so zero noise
/// reproduces sample_shots exactly.
inline std::vector<ShotRecord> noisy_trajectory_sample(const Circuit& circuit, const NoiseModel& noise,
                                                       std::size_t shots, std::uint64_t seed,
                                                       std::uint64_t task = 0) {
  noise.check();
  const auto clean = OutcomeTable::build(circuit);
  std::map<std::vector<PauliInsertion>, OutcomeTable> cache;
  const auto& ops = circuit.ops();
  std::vector<int> slots;
  for (const auto& op : ops)
    if (op.kind == GateKind::MEASURE_Z_MID) slots.push_back(*op.slot);

  std::vector<ShotRecord> out(shots);
  std::vector<PauliInsertion> pattern;
  for (std::size_t s = 0; s < shots; ++s) {
    Stream rng{seed, task, s};
    const double u = rng.uniform();
    pattern.clear();
    for (std::size_t i = 0; i < ops.size(); ++i) {
      const GateOp& op = ops[i];
      if (op.kind == GateKind::MEASURE_Z_MID) continue;
      const auto at = static_cast<std::uint32_t>(i);
      if (op.arity() == 1) {
        if (noise.p1 > 0.0 && rng.uniform() < noise.p1) {
          pattern.push_back({at, static_cast<std::uint8_t>(op.qubits[0]), static_cast<std::uint8_t>(1 + rng.below(3))});
        }
      } else if (noise.p2 > 0.0 && rng.uniform() < noise.p2) {
        const auto code = 1 + rng.below(15);
        if (code % 4) pattern.push_back({at, static_cast<std::uint8_t>(op.qubits[0]), static_cast<std::uint8_t>(code % 4)});
        if (code / 4) pattern.push_back({at, static_cast<std::uint8_t>(op.qubits[1]), static_cast<std::uint8_t>(code / 4)});
      }
    }
    const OutcomeTable* table = &clean;
    if (!pattern.empty()) {
      auto it = cache.find(pattern);
      if (it == cache.end()) {
        if (cache.size() > 4096) cache.clear();
        it = cache.emplace(pattern, OutcomeTable::build(circuit, pattern)).first;
      }
      table = &it->second;
    }
    const auto& e = table->draw(u);
    std::uint64_t output = e.output;
    std::uint32_t mid_bits = e.mid_bits;
    if (noise.p_ro > 0.0) {
      for (int q = 0; q < circuit.width(); ++q)
        if (rng.uniform() < noise.p_ro) output ^= std::uint64_t{1} << q;
      for (int slot : slots)
        if (rng.uniform() < noise.p_ro) mid_bits ^= std::uint32_t{1} << slot;
    }
    out[s] = {output, sign_of(mid_bits)};
  }
  return out;
}

/// CSV dump of shot records: output bitstring, sign.
inline std::string shots_to_csv(const std::vector<ShotRecord>& shots, int width) {
  std::ostringstream os;
  os << "output,sign\n";
  for (const auto& r : shots) os << to_bitstring(r.output, width) << ',' << r.sign << '\n';
  return os.str();
}

}  // namespace qcut
