#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <set>

#include "qcut/oracle.hpp"
#include "qcut/parallel.hpp"
#include "qcut/simulator.hpp"
#include "test_util.hpp"

using namespace qcut;

namespace {
Circuit ghz() {
  Circuit c(2);
  c.add(gate::h(0)).add(gate::cnot(0, 1));
  return c;
}

double tv_distance(const std::vector<ShotRecord>& shots, const std::vector<double>& exact) {
  std::vector<double> freq(exact.size(), 0.0);
  for (const auto& r : shots) freq[r.output] += 1.0 / static_cast<double>(shots.size());
  double d = 0.0;
  for (std::size_t i = 0; i < exact.size(); ++i) d += std::abs(freq[i] - exact[i]);
  return d / 2;
}
}  // namespace

TEST_CASE("GHZ amplitudes and probabilities") {
  const auto s = run_statevector(ghz());
  const double r = 1.0 / std::sqrt(2.0);
  CHECK(std::abs(s[0] - cplx(r, 0)) < 1e-15);
  CHECK(std::abs(s[3] - cplx(r, 0)) < 1e-15);
  CHECK(std::abs(s[1]) < 1e-15);
  CHECK(std::abs(s[2]) < 1e-15);
  const auto p = probabilities(s);
  CHECK(p[0] == Catch::Approx(0.5));
  CHECK(p[3] == Catch::Approx(0.5));
  CHECK(probabilities(StateVector(4))[0] == 1.0);
}

TEST_CASE("RX rotation probabilities and Z expectation") {
  for (double theta : {0.0, 0.3, 1.7, -2.5, kPi}) {
    Circuit c(1);
    c.add(gate::rx(0, theta));
    const auto s = run_statevector(c);
    const auto p = probabilities(s);
    CHECK(p[0] == Catch::Approx(std::pow(std::cos(theta / 2), 2)).margin(1e-14));
    CHECK(p[1] == Catch::Approx(std::pow(std::sin(theta / 2), 2)).margin(1e-14));
    CHECK(expectation_pauli(s, "Z") == Catch::Approx(std::cos(theta)).margin(1e-14));
  }
}

TEST_CASE("Pauli expectations on GHZ") {
  const auto s = run_statevector(ghz());
  CHECK(expectation_pauli(s, "ZZ") == Catch::Approx(1.0));
  CHECK(expectation_pauli(s, "ZI") == Catch::Approx(0.0).margin(1e-15));
  CHECK(expectation_pauli(s, "XX") == Catch::Approx(1.0));
  CHECK(expectation_pauli(s, "YY") == Catch::Approx(-1.0));
  try {
    (void)expectation_pauli(s, "Z");
    FAIL("expected BAD_PAULI_STRING");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::BadPauliString);
  }
  CHECK_THROWS_AS(expectation_pauli(s, "ZQ"), Error);
}

TEST_CASE("statevector rejects projective ops and unbound symbols") {
  Circuit c(1, {"t"});
  c.add(gate::measure(0, 0));
  try {
    (void)run_statevector(c);
    FAIL("expected UNSUPPORTED_OP");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::UnsupportedOp);
  }
  Circuit sym(1, {"t"});
  sym.add(gate::rot(GateKind::RX, 0, "t"));
  CHECK_THROWS_AS(run_statevector(sym), Error);
}

TEST_CASE("statevector agrees with the dense unitary oracle on random circuits") {
  Stream rng{2024};
  for (int trial = 0; trial < 60; ++trial) {
    const int width = 1 + static_cast<int>(rng.below(6));
    const Circuit c = testing::random_circuit(rng, width, static_cast<int>(rng.below(31)));
    const auto s = run_statevector(c);
    const auto u = oracle::circuit_unitary(c);
    double err = 0.0;
    for (std::size_t i = 0; i < s.dim(); ++i) err = std::max(err, std::abs(s[i] - u(static_cast<Eigen::Index>(i), 0)));
    CHECK(err < 1e-10);
    CHECK(std::abs(s.norm_squared() - 1.0) < 1e-12);
    double total = 0.0;
    for (double p : probabilities(s)) total += p;
    CHECK(std::abs(total - 1.0) < 1e-12);
    const double e = expectation_pauli(s, std::string(static_cast<std::size_t>(width), 'Y'));
    CHECK((e >= -1.0 && e <= 1.0));
  }
}

TEST_CASE("unitary oracle basics") {
  CHECK((oracle::circuit_unitary(Circuit(1)) - Eigen::Matrix2cd::Identity()).cwiseAbs().maxCoeff() == 0.0);
  Circuit cx(2);
  cx.add(gate::cnot(0, 1));
  Eigen::Matrix4cd perm = Eigen::Matrix4cd::Zero();
  perm(0, 0) = perm(2, 2) = perm(1, 3) = perm(3, 1) = 1.0;
  CHECK((oracle::circuit_unitary(cx) - perm).cwiseAbs().maxCoeff() == 0.0);

  Circuit hczh(2);
  hczh.add(gate::h(1)).add(gate::cz(0, 1)).add(gate::h(1));
  CHECK((oracle::circuit_unitary(hczh) - perm).cwiseAbs().maxCoeff() < 1e-15);

  Circuit with_measure(1);
  with_measure.add(gate::measure(0, 0));
  CHECK_THROWS_AS(oracle::circuit_unitary(with_measure), Error);

  Stream rng{5};
  const auto u = oracle::circuit_unitary(testing::random_circuit(rng, 4, 30));
  CHECK((u * u.adjoint() - Eigen::MatrixXcd::Identity(16, 16)).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("channel oracle handles projectors and unitaries") {
  Circuit proj(1);
  proj.add(gate::proj_plus(0));
  const Eigen::MatrixXcd mixed = Eigen::MatrixXcd::Identity(2, 2) / 2.0;
  CHECK(oracle::channel(proj, mixed).trace().real() == Catch::Approx(0.5));

  Stream rng{99};
  const auto rho = testing::random_density(rng, 3);
  const auto out = oracle::channel(testing::random_circuit(rng, 3, 20), rho);
  CHECK(out.trace().real() == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("sample_shots converges to the Born distribution") {
  const auto shots = sample_shots(ghz(), 4096, 17);
  double f00 = 0.0;
  for (const auto& r : shots) {
    CHECK(r.sign == 1);
    CHECK((r.output == 0 || r.output == 3));
    if (r.output == 0) f00 += 1.0 / 4096;
  }
  CHECK(std::abs(f00 - 0.5) < 0.05);
  CHECK(sample_shots(ghz(), 4096, 17) == shots);
  CHECK(sample_shots(ghz(), 4096, 18) != shots);
}

TEST_CASE("mid-circuit measurement on |+> yields balanced signs") {
  Circuit c(1);
  c.add(gate::h(0)).add(gate::measure(0, 0));
  const auto shots = sample_shots(c, 4096, 3);
  double minus = 0.0;
  for (const auto& r : shots) {
    CHECK(((r.sign == -1) == (r.output == 1)));
    if (r.sign < 0) minus += 1.0 / 4096;
  }
  CHECK(std::abs(minus - 0.5) < 0.05);
}

TEST_CASE("exact signed distribution folds mid-measurement eigenvalues") {
  // H, measure (signed), H: outcomes after the second H are uniform per branch,
  // and the two branches cancel.
  Circuit c(1);
  c.add(gate::h(0)).add(gate::measure(0, 0)).add(gate::h(0));
  const auto net = exact_signed_distribution(c);
  CHECK(std::abs(net[0]) < 1e-15);
  CHECK(std::abs(net[1]) < 1e-15);

  Circuit plain(1);
  plain.add(gate::ry(0, 0.7)).add(gate::measure(0, 0));
  const auto n2 = exact_signed_distribution(plain);
  CHECK(n2[0] == Catch::Approx(std::pow(std::cos(0.35), 2)));
  CHECK(n2[1] == Catch::Approx(-std::pow(std::sin(0.35), 2)));
}

TEST_CASE("total variation shrinks as 1/sqrt(shots)") {
  Stream rng{123};
  const Circuit c = testing::random_circuit(rng, 3, 20);
  const auto exact = probabilities(run_statevector(c));
  std::vector<double> small, large;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    small.push_back(tv_distance(sample_shots(c, 1024, seed), exact));
    large.push_back(tv_distance(sample_shots(c, 4096, seed), exact));
  }
  auto median = [](std::vector<double> v) {
    std::nth_element(v.begin(), v.begin() + v.size() / 2, v.end());
    return v[v.size() / 2];
  };
  const double ratio = median(large) / median(small);
  CHECK(ratio > 0.35);
  CHECK(ratio < 0.65);
}

TEST_CASE("noisy sampling with zero noise equals noiseless sampling") {
  Stream rng{8};
  Circuit c = testing::random_circuit(rng, 3, 15);
  c.add(gate::measure(1, 0)).add(gate::h(1));
  CHECK(noisy_trajectory_sample(c, {}, 2048, 5, 9) == sample_shots(c, 2048, 5, 9));
}

TEST_CASE("readout noise flips bits at the configured rate") {
  Circuit c(1);
  const auto shots = noisy_trajectory_sample(c, {0.0, 0.0, 0.1}, 4096, 1);
  double ones = 0.0;
  for (const auto& r : shots) ones += static_cast<double>(r.output) / 4096;
  CHECK(std::abs(ones - 0.1) < 0.02);
}

TEST_CASE("depolarizing noise matches the analytic single-qubit rate") {
  // X then p1 depolarizing: 2 of the 3 Paulis flip the outcome.
  Circuit c(1);
  c.add(gate::x(0));
  const auto shots = noisy_trajectory_sample(c, {0.3, 0.0, 0.0}, 8192, 4);
  double zeros = 0.0;
  for (const auto& r : shots) zeros += (r.output == 0) ? 1.0 / 8192 : 0.0;
  CHECK(std::abs(zeros - 0.2) < 0.02);
  CHECK_THROWS_AS(noisy_trajectory_sample(c, {1.5, 0.0, 0.0}, 1, 0), Error);
}

TEST_CASE("sampling is deterministic across thread counts") {
  Stream rng{31};
  const Circuit c = testing::random_circuit(rng, 4, 25);
  auto run = [&](int threads) {
    std::vector<std::vector<ShotRecord>> out(8);
    parallel_for(
        out.size(), [&](std::size_t i) { out[i] = noisy_trajectory_sample(c, {0.01, 0.05, 0.02}, 512, 77, i); },
        threads);
    return out;
  };
  CHECK(run(1) == run(4));
}

TEST_CASE("shot records export as CSV") {
  const std::vector<ShotRecord> shots{{0b01, 1}, {0b10, -1}};
  CHECK(shots_to_csv(shots, 2) == "output,sign\n01,1\n10,-1\n");
  CHECK(from_bitstring("10") == 2);
}
