#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "qcut/error.hpp"

namespace qcut {

enum class GateKind : std::uint8_t {
  RX,
  RY,
  RZ,
  RZZ,
  H,
  X,
  Y,
  Z,
  CZ,
  CNOT,
  MEASURE_Z_MID,
  PROJ_PLUS,
  PROJ_MINUS,
};

inline constexpr std::array<std::string_view, 13> kGateNames = {
    "RX", "RY", "RZ", "RZZ", "H", "X", "Y", "Z", "CZ", "CNOT", "MEASURE_Z_MID", "PROJ_PLUS", "PROJ_MINUS"};

constexpr std::string_view gate_name(GateKind kind) { return kGateNames[static_cast<std::size_t>(kind)]; }

inline std::optional<GateKind> gate_from_name(std::string_view name) {
  for (std::size_t i = 0; i < kGateNames.size(); ++i) {
    if (kGateNames[i] == name) return static_cast<GateKind>(i);
  }
  return std::nullopt;
}

constexpr int gate_arity(GateKind kind) {
  switch (kind) {
    case GateKind::RZZ:
    case GateKind::CZ:
    case GateKind::CNOT: return 2;
    default: return 1;
  }
}

constexpr bool is_rotation(GateKind kind) {
  return kind == GateKind::RX || kind == GateKind::RY || kind == GateKind::RZ || kind == GateKind::RZZ;
}

constexpr bool is_projective(GateKind kind) {
  return kind == GateKind::MEASURE_Z_MID || kind == GateKind::PROJ_PLUS || kind == GateKind::PROJ_MINUS;
}

/// Reference to an entry of the circuit's symbolic parameter table.
struct ParamRef {
  std::string name;
  bool operator==(const ParamRef&) const = default;
};

/// Rotation angle: absent, a concrete value in radians, or a symbol.
using Param = std::variant<std::monostate, double, ParamRef>;

struct GateOp {
  GateKind kind = GateKind::H;
  std::array<int, 2> qubits{0, 0};
  Param param{};
  std::optional<int> slot{};  // outcome slot, MEASURE_Z_MID only

  int arity() const { return gate_arity(kind); }
  std::span<const int> targets() const { return {qubits.data(), static_cast<std::size_t>(arity())}; }
  bool is_bound() const { return !std::holds_alternative<ParamRef>(param); }
  double angle() const { return std::holds_alternative<double>(param) ? std::get<double>(param) : 0.0; }

  bool operator==(const GateOp&) const = default;
};

namespace gate {

inline GateOp one(GateKind k, int q) { return GateOp{k, {q, q}, {}, {}}; }
inline GateOp two(GateKind k, int a, int b) { return GateOp{k, {a, b}, {}, {}}; }
inline GateOp rot(GateKind k, int q, double angle) { return GateOp{k, {q, q}, angle, {}}; }
inline GateOp rot(GateKind k, int q, std::string symbol) { return GateOp{k, {q, q}, ParamRef{std::move(symbol)}, {}}; }

inline GateOp rx(int q, double a) { return rot(GateKind::RX, q, a); }
inline GateOp ry(int q, double a) { return rot(GateKind::RY, q, a); }
inline GateOp rz(int q, double a) { return rot(GateKind::RZ, q, a); }
inline GateOp rzz(int a, int b, double angle) { return GateOp{GateKind::RZZ, {a, b}, angle, {}}; }
inline GateOp h(int q) { return one(GateKind::H, q); }
inline GateOp x(int q) { return one(GateKind::X, q); }
inline GateOp y(int q) { return one(GateKind::Y, q); }
inline GateOp z(int q) { return one(GateKind::Z, q); }
inline GateOp cz(int a, int b) { return two(GateKind::CZ, a, b); }
inline GateOp cnot(int control, int target) { return two(GateKind::CNOT, control, target); }
inline GateOp measure(int q, int slot) { return GateOp{GateKind::MEASURE_Z_MID, {q, q}, {}, slot}; }
inline GateOp proj_plus(int q) { return one(GateKind::PROJ_PLUS, q); }
inline GateOp proj_minus(int q) { return one(GateKind::PROJ_MINUS, q); }

}  // namespace gate

/// Ordered gate list over `width` qubits. Qubit 0 is the least significant
/// bit of every basis-state index.
class Circuit {
 public:
  explicit Circuit(int width, std::vector<std::string> params = {}) : width_(width), params_(std::move(params)) {
    if (width < 1) throw Error(ErrorCode::BadRange, "circuit width must be >= 1");
  }

  int width() const { return width_; }
  std::size_t size() const { return ops_.size(); }
  bool empty() const { return ops_.empty(); }
  const std::vector<GateOp>& ops() const { return ops_; }
  const GateOp& operator[](std::size_t i) const { return ops_[i]; }
  const std::vector<std::string>& params() const { return params_; }

  bool has_param(std::string_view name) const {
    return std::find(params_.begin(), params_.end(), name) != params_.end();
  }

  void check_op(const GateOp& op) const {
    const int arity = gate_arity(op.kind);
    for (int i = 0; i < arity; ++i) {
      if (op.qubits[i] < 0 || op.qubits[i] >= width_) {
        throw Error(ErrorCode::IndexOutOfRange, std::string(gate_name(op.kind)) + " qubit " +
                                                    std::to_string(op.qubits[i]) + " outside width " +
                                                    std::to_string(width_));
      }
    }
    if (arity == 2 && op.qubits[0] == op.qubits[1]) {
      throw Error(ErrorCode::ArityMismatch, std::string(gate_name(op.kind)) + " needs two distinct qubits");
    }
    const bool carries_angle = !std::holds_alternative<std::monostate>(op.param);
    if (is_rotation(op.kind) != carries_angle) {
      throw Error(ErrorCode::ArityMismatch, std::string(gate_name(op.kind)) +
                                                (carries_angle ? " takes no angle" : " requires an angle"));
    }
    if (op.kind == GateKind::MEASURE_Z_MID && !op.slot) {
      throw Error(ErrorCode::ArityMismatch, "MEASURE_Z_MID requires an outcome slot");
    }
    if (const auto* ref = std::get_if<ParamRef>(&op.param); ref && !has_param(ref->name)) {
      throw Error(ErrorCode::UnboundParameter, "symbol '" + ref->name + "' not in parameter table");
    }
  }

  /// In-place append used by builders; validates the op.
  Circuit& add(GateOp op) {
    check_op(op);
    ops_.push_back(std::move(op));
    return *this;
  }

  /// Adds a symbol to the parameter table if absent.
  Circuit& declare(std::string name) {
    if (!has_param(name)) params_.push_back(std::move(name));
    return *this;
  }

  bool is_bound() const {
    return std::all_of(ops_.begin(), ops_.end(), [](const GateOp& op) { return op.is_bound(); });
  }

  int mid_measurement_count() const {
    return static_cast<int>(std::count_if(ops_.begin(), ops_.end(),
                                          [](const GateOp& op) { return op.kind == GateKind::MEASURE_Z_MID; }));
  }

  bool operator==(const Circuit&) const = default;

 private:
  int width_;
  std::vector<std::string> params_;
  std::vector<GateOp> ops_;
};

/// Returns a copy of `circuit` with `op` appended.
[[nodiscard]] inline Circuit append(const Circuit& circuit, GateOp op) {
  Circuit out = circuit;
  out.add(std::move(op));
  return out;
}

/// Re-checks every op; throws on the first violation.
inline void validate(const Circuit& circuit) {
  for (const auto& op : circuit.ops()) circuit.check_op(op);
}

[[nodiscard]] inline Circuit bind_parameters(const Circuit& circuit, const std::map<std::string, double>& values) {
  Circuit out(circuit.width());
  for (GateOp op : circuit.ops()) {
    if (const auto* ref = std::get_if<ParamRef>(&op.param)) {
      auto it = values.find(ref->name);
      if (it == values.end()) throw Error(ErrorCode::UnboundParameter, "no value for '" + ref->name + "'");
      op.param = it->second;
    }
    out.add(std::move(op));
  }
  return out;
}

/// Groups qubits connected through multi-qubit gates. Components are sorted
/// internally and ordered by their smallest qubit.
inline std::vector<std::vector<int>> connected_components(const Circuit& circuit) {
  std::vector<int> parent(static_cast<std::size_t>(circuit.width()));
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int q) {
    while (parent[q] != q) q = parent[q] = parent[parent[q]];
    return q;
  };
  for (const auto& op : circuit.ops()) {
    if (op.arity() != 2) continue;
    int a = find(op.qubits[0]), b = find(op.qubits[1]);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
  std::map<int, std::vector<int>> groups;
  for (int q = 0; q < circuit.width(); ++q) groups[find(q)].push_back(q);
  std::vector<std::vector<int>> out;
  out.reserve(groups.size());
  for (auto& [root, members] : groups) out.push_back(std::move(members));
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace qcut
