#include <catch_amalgamated.hpp>

#include "qcut/circuit.hpp"
#include "qcut/circuit_json.hpp"
#include "qcut/oracle.hpp"
#include "test_util.hpp"

using namespace qcut;
using Catch::Approx;

TEST_CASE("append returns a new circuit and leaves the input untouched") {
  const Circuit empty(2);
  const Circuit one = append(empty, gate::h(0));
  CHECK(one.size() == 1);
  CHECK(empty.size() == 0);
}

TEST_CASE("append rejects out-of-range and malformed ops") {
  const Circuit c(1);
  try {
    (void)append(c, gate::cnot(0, 1));
    FAIL("expected INDEX_OUT_OF_RANGE");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::IndexOutOfRange);
  }
  const Circuit two(2);
  CHECK_THROWS_AS(append(two, gate::cnot(1, 1)), Error);
  GateOp bare_rx = gate::one(GateKind::RX, 0);
  try {
    (void)append(two, bare_rx);
    FAIL("expected ARITY_MISMATCH");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ArityMismatch);
  }
  GateOp unslotted = gate::measure(0, 0);
  unslotted.slot.reset();
  CHECK_THROWS_AS(append(two, unslotted), Error);
}

TEST_CASE("GHZ preparation matches the hand-written matrix") {
  Circuit ghz(2);
  ghz.add(gate::h(0)).add(gate::cnot(0, 1));
  REQUIRE(ghz.size() == 2);
  const double r = 1.0 / std::sqrt(2.0);
  // Little-endian: index = q0 + 2 q1. H on q0 then CNOT(0 -> 1).
  Eigen::Matrix4cd expected;
  expected << r, r, 0, 0,  //
      0, 0, r, -r,         //
      0, 0, r, r,          //
      r, -r, 0, 0;
  const auto u = oracle::circuit_unitary(ghz);
  CHECK((u - expected).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("bind_parameters resolves symbols and is idempotent") {
  Circuit c(1, {"theta"});
  c.add(gate::rot(GateKind::RX, 0, "theta"));
  CHECK_FALSE(c.is_bound());
  const auto bound = bind_parameters(c, {{"theta", 0.0}});
  CHECK(bound.is_bound());
  CHECK(bind_parameters(bound, {{"theta", 0.0}}) == bound);
  CHECK((oracle::circuit_unitary(bound) - Eigen::Matrix2cd::Identity()).cwiseAbs().maxCoeff() < 1e-15);
  try {
    (void)bind_parameters(c, {{"phi", 1.0}});
    FAIL("expected UNBOUND_PARAMETER");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::UnboundParameter);
  }
}

TEST_CASE("symbol references must resolve in the parameter table") {
  Circuit c(1);
  try {
    c.add(gate::rot(GateKind::RY, 0, "missing"));
    FAIL("expected UNBOUND_PARAMETER");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::UnboundParameter);
  }
}

TEST_CASE("JSON keeps the documented field order") {
  Circuit c(2, {"a"});
  c.add(gate::h(0)).add(gate::rot(GateKind::RZ, 1, "a")).add(gate::measure(1, 3)).add(gate::rx(0, 0.1));
  const std::string text = serialize_circuit(c);
  CHECK(text.find("{\"width\":2,\"params\":[\"a\"],\"ops\":[") == 0);
  CHECK(text.find("{\"kind\":\"RZ\",\"qubits\":[1],\"param\":{\"ref\":\"a\"},\"slot\":null}") != std::string::npos);
  CHECK(text.find("\"kind\":\"MEASURE_Z_MID\",\"qubits\":[1],\"param\":null,\"slot\":3") != std::string::npos);
  CHECK(text.find("\"param\":0.1,") != std::string::npos);
}

TEST_CASE("serialize then parse is the identity on random circuits") {
  Stream rng{7};
  for (int trial = 0; trial < 200; ++trial) {
    const int width = 1 + static_cast<int>(rng.below(6));
    Circuit c = testing::random_circuit(rng, width, static_cast<int>(rng.below(30)));
    if (trial % 3 == 0) {
      c.declare("s" + std::to_string(trial));
      c.add(gate::rot(GateKind::RY, 0, "s" + std::to_string(trial)));
    }
    if (trial % 5 == 0) c.add(gate::measure(width - 1, trial % 7));
    CHECK(parse_circuit(serialize_circuit(c)) == c);
  }
}

TEST_CASE("malformed documents raise PARSE_ERROR") {
  auto code_of = [](const std::string& text) {
    try {
      (void)parse_circuit(text);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::IoError;
  };
  CHECK(code_of(R"({"width":1,"params":[],"ops":[{"kind":"FOO","qubits":[0],"param":null,"slot":null}]})") ==
        ErrorCode::ParseError);
  CHECK(code_of("{not json") == ErrorCode::ParseError);
  CHECK(code_of(R"({"width":"two","ops":[]})") == ErrorCode::ParseError);
  CHECK(code_of(R"({"width":1,"ops":[{"kind":"RX","qubits":[0],"param":"x","slot":null}]})") == ErrorCode::ParseError);
}

TEST_CASE("connected_components follows two-qubit gates only") {
  Circuit c(4);
  c.add(gate::cnot(0, 1)).add(gate::cz(2, 3)).add(gate::h(1)).add(gate::measure(2, 0));
  CHECK(connected_components(c) == std::vector<std::vector<int>>{{0, 1}, {2, 3}});

  Circuit ghz(2);
  ghz.add(gate::h(0)).add(gate::cnot(0, 1));
  CHECK(connected_components(ghz) == std::vector<std::vector<int>>{{0, 1}});

  CHECK(connected_components(Circuit(3)) == std::vector<std::vector<int>>{{0}, {1}, {2}});
}

TEST_CASE("connected_components is a partition independent of op order") {
  Stream rng{11};
  for (int trial = 0; trial < 100; ++trial) {
    const int width = 2 + static_cast<int>(rng.below(6));
    const Circuit c = testing::random_circuit(rng, width, static_cast<int>(rng.below(12)));
    const auto parts = connected_components(c);
    std::vector<int> seen;
    for (const auto& p : parts) seen.insert(seen.end(), p.begin(), p.end());
    std::sort(seen.begin(), seen.end());
    std::vector<int> all(static_cast<std::size_t>(width));
    std::iota(all.begin(), all.end(), 0);
    CHECK(seen == all);

    Circuit reversed(width);
    for (auto it = c.ops().rbegin(); it != c.ops().rend(); ++it) reversed.add(*it);
    CHECK(connected_components(reversed) == parts);
  }
}
