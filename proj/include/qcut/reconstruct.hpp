#pragma once

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "qcut/execute.hpp"

namespace qcut {

/// Signed reconstruction q(x) = sum_i c_i * net_i(x); may contain negative
/// entries and need not sum to exactly one.
struct QuasiDistribution {
  std::vector<double> weights;

  double total() const {
    double s = 0.0;
    for (double w : weights) s += w;
    return s;
  }
};

/// Probability vector obtained by clamping negatives and renormalizing.
struct NormalizedDistribution {
  std::vector<double> probabilities;
  double clamped_mass = 0.0;  // sum of |q(x)| over negative entries
};

inline QuasiDistribution reconstruct_distribution(std::span<const WeightedTally> tallies) {
  QuasiDistribution q;
  if (tallies.empty()) return q;
  q.weights.assign(tallies.front().net_weight.size(), 0.0);
  for (const auto& t : tallies)
    for (std::size_t x = 0; x < q.weights.size(); ++x) q.weights[x] += t.coefficient * t.net_weight[x];
  return q;
}

inline QuasiDistribution reconstruct_distribution(const PlanExecution& run) { return reconstruct_distribution(run.tallies); }

inline NormalizedDistribution normalize(const QuasiDistribution& q) {
  NormalizedDistribution out;
  out.probabilities.resize(q.weights.size());
  double total = 0.0;
  for (std::size_t x = 0; x < q.weights.size(); ++x) {
    const double w = q.weights[x];
    if (w < 0.0) out.clamped_mass -= w;
    out.probabilities[x] = std::max(w, 0.0);
    total += out.probabilities[x];
  }
  if (total > 0.0) {
    for (auto& p : out.probabilities) p /= total;
  } else if (!out.probabilities.empty()) {
    const double u = 1.0 / static_cast<double>(out.probabilities.size());
    for (auto& p : out.probabilities) p = u;
  }
  return out;
}

/// Bitmask of the qubits a Z-type Pauli string acts on. Non-diagonal
/// strings must be rotated into the Z basis before cutting.
inline std::uint64_t z_mask_of(std::string_view pauli, int width) {
  const auto per_qubit = parse_pauli(pauli, width);
  std::uint64_t mask = 0;
  for (int q = 0; q < width; ++q) {
    const char c = per_qubit[static_cast<std::size_t>(q)];
    if (c == 'X' || c == 'Y') {
      throw Error(ErrorCode::BadPauliString, std::string(pauli) + " is not diagonal; append a basis change first");
    }
    if (c == 'Z') mask |= std::uint64_t{1} << q;
  }
  return mask;
}

inline double expectation_from_distribution(std::span<const double> weights, std::string_view pauli, int width) {
  const auto mask = z_mask_of(pauli, width);
  double e = 0.0;
  for (std::size_t x = 0; x < weights.size(); ++x) e += z_eigenvalue(mask, x) * weights[x];
  return e;
}

/// E = sum_i c_i * sum_x net_i(x) * eig(x).
inline double reconstruct_expectation(std::span<const WeightedTally> tallies, std::string_view pauli, int width) {
  const auto mask = z_mask_of(pauli, width);
  double e = 0.0;
  for (const auto& t : tallies) {
    double inner = 0.0;
    for (std::size_t x = 0; x < t.net_weight.size(); ++x) inner += z_eigenvalue(mask, x) * t.net_weight[x];
    e += t.coefficient * inner;
  }
  return e;
}

/// Appends single-qubit rotations mapping the X/Y factors of `pauli` onto Z
/// and returns the equivalent Z-type string.
inline std::string append_basis_change(Circuit& circuit, std::string_view pauli) {
  const auto per_qubit = parse_pauli(pauli, circuit.width());
  std::string z(pauli);
  for (int q = 0; q < circuit.width(); ++q) {
    const char c = per_qubit[static_cast<std::size_t>(q)];
    if (c == 'X') circuit.add(gate::h(q));
    if (c == 'Y') {
      circuit.add(gate::rz(q, -kPi / 2));
      circuit.add(gate::h(q));
    }
    if (c != 'I') z[static_cast<std::size_t>(circuit.width() - 1 - q)] = 'Z';
  }
  return z;
}

/// Sum over basis states of |a(x) - b(x)|.
inline double total_deviation(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw Error(ErrorCode::DimMismatch, "distribution sizes differ");
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d += std::abs(a[i] - b[i]);
  return d;
}

}  // namespace qcut
