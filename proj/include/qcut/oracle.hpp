#pragma once

#include <Eigen/Dense>

#include "qcut/circuit.hpp"
#include "qcut/statevector.hpp"

// Dense reference implementations. They build full 2^n x 2^n operators from
// per-gate matrices and are meant for verification at small widths only.

namespace qcut::oracle {

using Matrix = Eigen::MatrixXcd;

inline constexpr int kMaxUnitaryWidth = 10;
inline constexpr int kMaxChannelWidth = 6;

/// Local matrix of a gate; for two-qubit gates the local index is
/// bit(qubits[0]) + 2 * bit(qubits[1]).
inline Matrix local_matrix(const GateOp& op) {
  if (op.arity() == 1) {
    const Mat2 m = single_qubit_matrix(op.kind, op.angle());
    Matrix out(2, 2);
    out << m[0], m[1], m[2], m[3];
    return out;
  }
  Matrix out = Matrix::Zero(4, 4);
  switch (op.kind) {
    case GateKind::CNOT:
      out(0, 0) = out(2, 2) = 1.0;
      out(1, 3) = out(3, 1) = 1.0;
      break;
    case GateKind::CZ:
      out(0, 0) = out(1, 1) = out(2, 2) = 1.0;
      out(3, 3) = -1.0;
      break;
    case GateKind::RZZ: {
      const cplx even = std::polar(1.0, -op.angle() / 2), odd = std::polar(1.0, op.angle() / 2);
      out(0, 0) = out(3, 3) = even;
      out(1, 1) = out(2, 2) = odd;
      break;
    }
    default: throw Error(ErrorCode::UnsupportedOp, std::string(gate_name(op.kind)));
  }
  return out;
}

/// Embeds a local gate matrix into the full register.
inline Matrix embed(const Matrix& local, std::span<const int> qubits, int width) {
  const std::size_t dim = std::size_t{1} << width;
  std::size_t mask = 0;
  for (int q : qubits) mask |= std::size_t{1} << q;
  auto sub = [&](std::size_t i) {
    std::size_t s = 0;
    for (std::size_t k = 0; k < qubits.size(); ++k) s |= ((i >> qubits[k]) & 1U) << k;
    return s;
  };
  Matrix full = Matrix::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  for (std::size_t r = 0; r < dim; ++r)
    for (std::size_t c = 0; c < dim; ++c)
      if ((r & ~mask) == (c & ~mask))
        full(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
            local(static_cast<Eigen::Index>(sub(r)), static_cast<Eigen::Index>(sub(c)));
  return full;
}

inline Matrix gate_operator(const GateOp& op, int width) { return embed(local_matrix(op), op.targets(), width); }

inline Matrix circuit_unitary(const Circuit& circuit) {
  if (circuit.width() > kMaxUnitaryWidth) throw Error(ErrorCode::BadRange, "unitary oracle limited to 10 qubits");
  if (!circuit.is_bound()) throw Error(ErrorCode::UnboundParameter, "circuit has unbound symbols");
  const auto dim = Eigen::Index{1} << circuit.width();
  Matrix u = Matrix::Identity(dim, dim);
  for (const auto& op : circuit.ops()) {
    if (is_projective(op.kind)) throw Error(ErrorCode::UnsupportedOp, std::string(gate_name(op.kind)));
    u = gate_operator(op, circuit.width()) * u;
  }
  return u;
}

/// Applies the circuit as a (possibly trace-decreasing) map on rho.
/// PROJ_* act as Pi rho Pi; MEASURE_Z_MID acts as the signed measurement
/// map P0 rho P0 - P1 rho P1.
inline Matrix channel(const Circuit& circuit, Matrix rho) {
  if (circuit.width() > kMaxChannelWidth) throw Error(ErrorCode::BadRange, "channel oracle limited to 6 qubits");
  if (!circuit.is_bound()) throw Error(ErrorCode::UnboundParameter, "circuit has unbound symbols");
  const int n = circuit.width();
  for (const auto& op : circuit.ops()) {
    if (op.kind == GateKind::MEASURE_Z_MID) {
      const Matrix p0 = gate_operator(gate::proj_plus(op.qubits[0]), n);
      const Matrix p1 = gate_operator(gate::proj_minus(op.qubits[0]), n);
      rho = p0 * rho * p0 - p1 * rho * p1;
      continue;
    }
    const Matrix g = gate_operator(op, n);
    rho = g * rho * g.adjoint();
  }
  return rho;
}

/// min over global phases of max |a - e^{i phi} b|.
inline double distance_up_to_phase(const Matrix& a, const Matrix& b) {
  Eigen::Index r = 0, c = 0;
  b.cwiseAbs().maxCoeff(&r, &c);
  if (std::abs(b(r, c)) == 0.0) return a.cwiseAbs().maxCoeff();
  const cplx ratio = a(r, c) / b(r, c);
  const cplx phase = std::abs(ratio) > 0 ? ratio / std::abs(ratio) : cplx{1.0, 0.0};
  return (a - phase * b).cwiseAbs().maxCoeff();
}

}  // namespace qcut::oracle
