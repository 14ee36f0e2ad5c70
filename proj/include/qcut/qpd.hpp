#pragma once

#include <array>
#include <cmath>
#include <vector>

#include "qcut/circuit.hpp"
#include "qcut/statevector.hpp"

namespace qcut {

/// One local operation assignment for a cut exp(i theta Z⊗Z). Side ops are
/// single-qubit templates on placeholder qubit 0; `instantiate` retargets
/// them. A MEASURE_Z_MID in a side list is sign-carrying: the shot weight
/// is multiplied by its eigenvalue.
struct QPDTerm {
  double coefficient = 0.0;
  std::vector<GateOp> side_a;
  std::vector<GateOp> side_b;
  bool sign_from_measurement = false;
};

using QPDTerms = std::array<QPDTerm, 6>;

/// Six-term decomposition of the channel rho -> e^{i theta ZZ} rho e^{-i theta ZZ}:
///   cos^2 * id + sin^2 * (Z⊗Z) + cs * [(M⊗R+) + (R+⊗M) - (M⊗R-) - (R-⊗M)]
/// where M is the signed Z measurement, R± = e^{±i pi/4 Z} = RZ(∓pi/2), and
/// cs = cos(theta) sin(theta).
inline QPDTerms qpd_rzz(double theta) {
  const double c = std::cos(theta), s = std::sin(theta), cs = c * s;
  const GateOp meas = gate::measure(0, 0);
  const GateOp rot_plus = gate::rz(0, -kPi / 2);
  const GateOp rot_minus = gate::rz(0, kPi / 2);
  return {{
      {c * c, {}, {}, false},
      {s * s, {gate::z(0)}, {gate::z(0)}, false},
      {cs, {meas}, {rot_plus}, true},
      {cs, {rot_plus}, {meas}, true},
      {-cs, {meas}, {rot_minus}, true},
      {-cs, {rot_minus}, {meas}, true},
  }};
}

/// Sampling overhead sum |c_i| = 1 + 2|sin 2 theta|.
inline double qpd_gamma(double theta) { return 1.0 + 2.0 * std::abs(std::sin(2.0 * theta)); }

/// Expresses a cuttable gate as global phase × pre · e^{i theta ZZ}(a, b) · post.
struct CutDressing {
  double theta = 0.0;
  int qubit_a = 0;
  int qubit_b = 1;
  std::vector<GateOp> pre;
  std::vector<GateOp> post;
};

/// CZ = e^{i pi/4} (RZ(pi/2) ⊗ RZ(pi/2)) e^{i pi/4 ZZ};
/// CNOT(c, t) = H_t CZ H_t; RZZ(phi) = e^{-i phi/2 ZZ}.
inline CutDressing cut_dress_gate(const GateOp& op) {
  const int a = op.qubits[0], b = op.qubits[1];
  switch (op.kind) {
    case GateKind::CZ: return {kPi / 4, a, b, {}, {gate::rz(a, kPi / 2), gate::rz(b, kPi / 2)}};
    case GateKind::CNOT:
      return {kPi / 4, a, b, {gate::h(b)}, {gate::rz(a, kPi / 2), gate::rz(b, kPi / 2), gate::h(b)}};
    case GateKind::RZZ:
      if (!op.is_bound()) throw Error(ErrorCode::UnboundParameter, "cut RZZ must have a concrete angle");
      return {-op.angle() / 2, a, b, {}, {}};
    default: throw Error(ErrorCode::UncuttableGate, std::string(gate_name(op.kind)) + " cannot be cut");
  }
}

inline GateOp retarget(GateOp op, int qubit, int slot) {
  op.qubits = {qubit, qubit};
  if (op.kind == GateKind::MEASURE_Z_MID) op.slot = slot;
  return op;
}

/// Appends the term's local ops for a cut on (qa, qb); measurements use `slot`.
inline void append_term(Circuit& circuit, const QPDTerm& term, int qa, int qb, int slot) {
  for (const auto& op : term.side_a) circuit.add(retarget(op, qa, slot));
  for (const auto& op : term.side_b) circuit.add(retarget(op, qb, slot));
}

/// Splits each sign-carrying measurement term into its two post-selected
/// projector cases (+coefficient for outcome 0, -coefficient for outcome 1).
/// Six terms become ten cases.
inline std::vector<QPDTerm> expand_post_selection(const QPDTerms& terms) {
  std::vector<QPDTerm> cases;
  for (const auto& term : terms) {
    if (!term.sign_from_measurement) {
      cases.push_back(term);
      continue;
    }
    for (int outcome = 0; outcome < 2; ++outcome) {
      QPDTerm c = term;
      c.sign_from_measurement = false;
      c.coefficient = outcome == 0 ? term.coefficient : -term.coefficient;
      for (auto* side : {&c.side_a, &c.side_b})
        for (auto& op : *side)
          if (op.kind == GateKind::MEASURE_Z_MID) op = gate::one(outcome == 0 ? GateKind::PROJ_PLUS : GateKind::PROJ_MINUS, 0);
      cases.push_back(std::move(c));
    }
  }
  return cases;
}

}  // namespace qcut
