#pragma once

#include <string>

#include <json.hpp>

#include "qcut/circuit.hpp"

namespace qcut {

using ordered_json = nlohmann::ordered_json;

/// {"width", "params", "ops": [{"kind", "qubits", "param", "slot"}]} in that
/// field order. Doubles use the shortest round-trip decimal form.
inline ordered_json circuit_to_json(const Circuit& circuit) {
  ordered_json doc;
  doc["width"] = circuit.width();
  doc["params"] = circuit.params();
  ordered_json ops = ordered_json::array();
  for (const auto& op : circuit.ops()) {
    ordered_json j;
    j["kind"] = std::string(gate_name(op.kind));
    ordered_json qs = ordered_json::array();
    for (int q : op.targets()) qs.push_back(q);
    j["qubits"] = std::move(qs);
    if (const auto* v = std::get_if<double>(&op.param)) {
      j["param"] = *v;
    } else if (const auto* ref = std::get_if<ParamRef>(&op.param)) {
      j["param"] = ordered_json{{"ref", ref->name}};
    } else {
      j["param"] = nullptr;
    }
    j["slot"] = op.slot ? ordered_json(*op.slot) : ordered_json(nullptr);
    ops.push_back(std::move(j));
  }
  doc["ops"] = std::move(ops);
  return doc;
}

inline Circuit circuit_from_json(const ordered_json& doc) {
  auto fail = [](const std::string& msg) -> Error { return Error(ErrorCode::ParseError, msg); };
  try {
    if (!doc.is_object() || !doc.contains("width") || !doc.contains("ops")) throw fail("missing width/ops");
    if (!doc["width"].is_number_integer()) throw fail("width must be an integer");
    std::vector<std::string> params;
    if (doc.contains("params")) params = doc["params"].get<std::vector<std::string>>();
    Circuit circuit(doc["width"].get<int>(), std::move(params));
    for (const auto& j : doc["ops"]) {
      const auto name = j.at("kind").get<std::string>();
      auto kind = gate_from_name(name);
      if (!kind) throw fail("unknown gate kind '" + name + "'");
      const auto qubits = j.at("qubits").get<std::vector<int>>();
      if (static_cast<int>(qubits.size()) != gate_arity(*kind)) {
        throw Error(ErrorCode::ArityMismatch, name + " expects " + std::to_string(gate_arity(*kind)) + " qubits");
      }
      GateOp op{*kind, {qubits[0], qubits.size() > 1 ? qubits[1] : qubits[0]}, {}, {}};
      if (j.contains("param") && !j["param"].is_null()) {
        const auto& p = j["param"];
        if (p.is_number()) {
          op.param = p.get<double>();
        } else if (p.is_object() && p.contains("ref")) {
          op.param = ParamRef{p["ref"].get<std::string>()};
        } else {
          throw fail("param must be a number, {\"ref\": name}, or null");
        }
      }
      if (j.contains("slot") && !j["slot"].is_null()) op.slot = j["slot"].get<int>();
      circuit.add(std::move(op));
    }
    return circuit;
  } catch (const nlohmann::json::exception& e) {
    throw fail(e.what());
  }
}

inline std::string serialize_circuit(const Circuit& circuit) { return circuit_to_json(circuit).dump(); }

inline Circuit parse_circuit(const std::string& text) {
  ordered_json doc;
  try {
    doc = ordered_json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, e.what());
  }
  return circuit_from_json(doc);
}

}  // namespace qcut
