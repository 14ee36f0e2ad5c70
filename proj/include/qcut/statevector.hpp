#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "qcut/circuit.hpp"

namespace qcut {

using cplx = std::complex<double>;
using Mat2 = std::array<cplx, 4>;  // row-major

inline constexpr double kPi = 3.14159265358979323846;

/// Matrix of a unitary single-qubit gate kind.
inline Mat2 single_qubit_matrix(GateKind kind, double angle = 0.0) {
  const double c = std::cos(angle / 2), s = std::sin(angle / 2);
  const cplx i{0.0, 1.0};
  const double r = 1.0 / std::sqrt(2.0);
  switch (kind) {
    case GateKind::RX: return {c, -i * s, -i * s, c};
    case GateKind::RY: return {c, -s, s, c};
    case GateKind::RZ: return {cplx(c, -s), 0.0, 0.0, cplx(c, s)};
    case GateKind::H: return {r, r, r, -r};
    case GateKind::X: return {0.0, 1.0, 1.0, 0.0};
    case GateKind::Y: return {0.0, -i, i, 0.0};
    case GateKind::Z: return {1.0, 0.0, 0.0, -1.0};
    case GateKind::PROJ_PLUS: return {1.0, 0.0, 0.0, 0.0};
    case GateKind::PROJ_MINUS: return {0.0, 0.0, 0.0, 1.0};
    default: throw Error(ErrorCode::UnsupportedOp, std::string(gate_name(kind)) + " is not a single-qubit matrix");
  }
}

/// Amplitudes over 2^n basis states; qubit q is bit q of the index.
class StateVector {
 public:
  explicit StateVector(int n) : n_(n), amps_(std::size_t{1} << n, cplx{0.0, 0.0}) { amps_[0] = 1.0; }

  int width() const { return n_; }
  std::size_t dim() const { return amps_.size(); }
  const std::vector<cplx>& amplitudes() const { return amps_; }
  std::vector<cplx>& amplitudes() { return amps_; }
  cplx operator[](std::size_t i) const { return amps_[i]; }

  void apply_matrix(int q, const Mat2& m) {
    const std::size_t stride = std::size_t{1} << q;
    for (std::size_t base = 0; base < amps_.size(); base += 2 * stride) {
      for (std::size_t i = base; i < base + stride; ++i) {
        const cplx a = amps_[i], b = amps_[i + stride];
        amps_[i] = m[0] * a + m[1] * b;
        amps_[i + stride] = m[2] * a + m[3] * b;
      }
    }
  }

  void apply_diagonal(int q, cplx d0, cplx d1) {
    const std::size_t mask = std::size_t{1} << q;
    for (std::size_t i = 0; i < amps_.size(); ++i) amps_[i] *= (i & mask) ? d1 : d0;
  }

  void apply_x(int q) {
    const std::size_t stride = std::size_t{1} << q;
    for (std::size_t base = 0; base < amps_.size(); base += 2 * stride)
      for (std::size_t i = base; i < base + stride; ++i) std::swap(amps_[i], amps_[i + stride]);
  }

  void apply_cnot(int control, int target) {
    const std::size_t cm = std::size_t{1} << control, tm = std::size_t{1} << target;
    for (std::size_t i = 0; i < amps_.size(); ++i)
      if ((i & cm) && !(i & tm)) std::swap(amps_[i], amps_[i | tm]);
  }

  void apply_cz(int a, int b) {
    const std::size_t mask = (std::size_t{1} << a) | (std::size_t{1} << b);
    for (std::size_t i = 0; i < amps_.size(); ++i)
      if ((i & mask) == mask) amps_[i] = -amps_[i];
  }

  void apply_rzz(int a, int b, double angle) {
    const cplx even = std::polar(1.0, -angle / 2), odd = std::polar(1.0, angle / 2);
    for (std::size_t i = 0; i < amps_.size(); ++i)
      amps_[i] *= (((i >> a) ^ (i >> b)) & 1U) ? odd : even;
  }

  /// Applies a bound unitary op. Projective kinds are rejected.
  void apply(const GateOp& op) {
    const int q = op.qubits[0];
    switch (op.kind) {
      case GateKind::RZ: {
        const double t = op.angle() / 2;
        apply_diagonal(q, std::polar(1.0, -t), std::polar(1.0, t));
        break;
      }
      case GateKind::Z: apply_diagonal(q, 1.0, -1.0); break;
      case GateKind::X: apply_x(q); break;
      case GateKind::RX:
      case GateKind::RY:
      case GateKind::H:
      case GateKind::Y: apply_matrix(q, single_qubit_matrix(op.kind, op.angle())); break;
      case GateKind::CNOT: apply_cnot(op.qubits[0], op.qubits[1]); break;
      case GateKind::CZ: apply_cz(op.qubits[0], op.qubits[1]); break;
      case GateKind::RZZ: apply_rzz(op.qubits[0], op.qubits[1], op.angle()); break;
      default: throw Error(ErrorCode::UnsupportedOp, std::string(gate_name(op.kind)) + " is not unitary");
    }
  }

  /// Probability that a Z measurement of qubit q yields 1.
  double probability_one(int q) const {
    const std::size_t mask = std::size_t{1} << q;
    double p = 0.0;
    for (std::size_t i = 0; i < amps_.size(); ++i)
      if (i & mask) p += std::norm(amps_[i]);
    return p;
  }

  /// Projects qubit q onto |outcome> and rescales by 1/sqrt(prob).
  void collapse(int q, int outcome, double prob) {
    const std::size_t mask = std::size_t{1} << q;
    const double scale = prob > 0.0 ? 1.0 / std::sqrt(prob) : 0.0;
    for (std::size_t i = 0; i < amps_.size(); ++i) {
      const bool one = (i & mask) != 0;
      amps_[i] = (one == (outcome == 1)) ? amps_[i] * scale : cplx{0.0, 0.0};
    }
  }

  double norm_squared() const {
    double s = 0.0;
    for (const auto& a : amps_) s += std::norm(a);
    return s;
  }

 private:
  int n_;
  std::vector<cplx> amps_;
};

inline std::vector<double> probabilities(const StateVector& state) {
  std::vector<double> p(state.dim());
  for (std::size_t i = 0; i < p.size(); ++i) p[i] = std::norm(state[i]);
  return p;
}

/// Parses a Pauli string. The rightmost character acts on qubit 0, matching
/// the binary-literal rendering of basis states.
inline std::vector<char> parse_pauli(std::string_view pauli, int width) {
  if (static_cast<int>(pauli.size()) != width) {
    throw Error(ErrorCode::BadPauliString, "length " + std::to_string(pauli.size()) + " != width " +
                                               std::to_string(width));
  }
  std::vector<char> per_qubit(static_cast<std::size_t>(width));
  for (int q = 0; q < width; ++q) {
    const char c = pauli[static_cast<std::size_t>(width - 1 - q)];
    if (c != 'I' && c != 'X' && c != 'Y' && c != 'Z') {
      throw Error(ErrorCode::BadPauliString, std::string("unexpected character '") + c + "'");
    }
    per_qubit[static_cast<std::size_t>(q)] = c;
  }
  return per_qubit;
}

/// Eigenvalue (+1/-1) of a Z-type string on basis state `index`.
inline double z_eigenvalue(std::uint64_t z_mask, std::uint64_t index) {
  return (__builtin_popcountll(z_mask & index) & 1) ? -1.0 : 1.0;
}

inline double expectation_pauli(const StateVector& state, std::string_view pauli) {
  const auto ops = parse_pauli(pauli, state.width());
  StateVector applied = state;
  for (int q = 0; q < state.width(); ++q) {
    const char c = ops[static_cast<std::size_t>(q)];
    if (c == 'X') applied.apply_x(q);
    if (c == 'Y') applied.apply_matrix(q, single_qubit_matrix(GateKind::Y));
    if (c == 'Z') applied.apply_diagonal(q, 1.0, -1.0);
  }
  cplx acc{0.0, 0.0};
  for (std::size_t i = 0; i < state.dim(); ++i) acc += std::conj(state[i]) * applied[i];
  return std::clamp(acc.real(), -1.0, 1.0);
}

}  // namespace qcut
