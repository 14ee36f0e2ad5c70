#pragma once

#include <array>
#include <cmath>
#include <random>

#include <Eigen/Dense>

#include "qcut/circuit.hpp"
#include "qcut/oracle.hpp"
#include "qcut/rng.hpp"

// Haar sampling and synthesis of arbitrary one- and two-qubit unitaries into
// the RZ/RY/H/RZZ gate alphabet. Two-qubit unitaries go through the KAK
// (Cartan) decomposition so that their nonlocal part is a product of three
// cuttable ZZ-type interactions.

namespace qcut::synth {

using Matrix = Eigen::MatrixXcd;
using Matrix2 = Eigen::Matrix2cd;
using Matrix4 = Eigen::Matrix4cd;

/// Haar-random U(d) via QR of a complex Ginibre matrix with phase fix.
inline Matrix haar_unitary(int dim, Stream& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix z(dim, dim);
  for (int r = 0; r < dim; ++r)
    for (int c = 0; c < dim; ++c) z(r, c) = cplx(normal(rng), normal(rng)) / std::sqrt(2.0);
  Eigen::HouseholderQR<Matrix> qr(z);
  Matrix q = qr.householderQ();
  const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int c = 0; c < dim; ++c) {
    const cplx d = r(c, c);
    q.col(c) *= std::abs(d) > 0 ? d / std::abs(d) : cplx{1.0, 0.0};
  }
  return q;
}

/// Kronecker product with `high` acting on qubit 1 and `low` on qubit 0.
inline Matrix4 kron(const Matrix2& high, const Matrix2& low) {
  Matrix4 out;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) out.block<2, 2>(2 * i, 2 * j) = high(i, j) * low;
  return out;
}

/// Angles with U = e^{i phase} RZ(after) RY(mid) RZ(before).
struct ZyzAngles {
  double before = 0.0, mid = 0.0, after = 0.0, phase = 0.0;
};

inline ZyzAngles zyz_decompose(const Matrix2& u) {
  const cplx det = u.determinant();
  const cplx root = std::sqrt(det);
  const Matrix2 v = u / root;  // SU(2): [[a, -b*], [b, a*]]
  const cplx a = v(0, 0), b = v(1, 0);
  ZyzAngles out;
  out.mid = 2.0 * std::atan2(std::abs(b), std::abs(a));
  const double sum = std::abs(a) > 1e-14 ? -2.0 * std::arg(a) : 0.0;   // after + before
  const double diff = std::abs(b) > 1e-14 ? 2.0 * std::arg(b) : 0.0;   // after - before
  out.after = (sum + diff) / 2;
  out.before = (sum - diff) / 2;
  out.phase = std::arg(root);
  return out;
}

inline void append_single(Circuit& circuit, int q, const Matrix2& u) {
  const auto a = zyz_decompose(u);
  circuit.add(gate::rz(q, a.before));
  circuit.add(gate::ry(q, a.mid));
  circuit.add(gate::rz(q, a.after));
}

/// U = phase * (after_high ⊗ after_low) exp(i(xx XX + yy YY + zz ZZ)) (before_high ⊗ before_low)
struct KakDecomposition {
  Matrix2 before_low, before_high, after_low, after_high;
  double xx = 0.0, yy = 0.0, zz = 0.0;
};

namespace detail {

inline Matrix4 magic_basis() {
  const cplx i{0.0, 1.0};
  Matrix4 m;
  m << 1, 0, 0, i,  //
      0, i, 1, 0,   //
      0, i, -1, 0,  //
      1, 0, 0, -i;
  return m / std::sqrt(2.0);
}

inline std::pair<Matrix2, Matrix2> kron_factor(const Matrix4& k) {
  int bi = 0, bj = 0;
  double best = -1.0;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      if (double n = k.block<2, 2>(2 * i, 2 * j).norm(); n > best) best = n, bi = i, bj = j;
  Matrix2 low = k.block<2, 2>(2 * bi, 2 * bj);
  low /= std::sqrt(low.determinant());
  Matrix2 high;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) high(i, j) = (low.adjoint() * k.block<2, 2>(2 * i, 2 * j)).trace() / 2.0;
  return {high, low};
}

inline Matrix4 pauli_pair(char p) {
  Matrix2 m;
  const cplx i{0.0, 1.0};
  if (p == 'X') m << 0, 1, 1, 0;
  if (p == 'Y') m << 0, -i, i, 0;
  if (p == 'Z') m << 1, 0, 0, -1;
  return kron(m, m);
}

}  // namespace detail

inline KakDecomposition kak_decompose(const Matrix4& u) {
  const Matrix4 magic = detail::magic_basis();
  const Matrix4 u_special = u / std::pow(u.determinant(), 0.25);
  const Matrix4 mb = magic.adjoint() * u_special * magic;
  const Matrix4 sym = mb.transpose() * mb;
  const Eigen::Matrix4d re = sym.real(), im = sym.imag();

  Eigen::Matrix4d p;
  Eigen::Vector4cd d2;
  bool diagonalized = false;
  Stream rng{0x6b616bULL};
  for (int attempt = 0; attempt < 16 && !diagonalized; ++attempt) {
    const double mix = attempt == 0 ? 0.61803398874989 : 4.0 * rng.uniform() - 2.0;
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> solver(re + mix * im);
    p = solver.eigenvectors();
    const Matrix4 diag = p.transpose().cast<cplx>() * sym * p.cast<cplx>();
    d2 = diag.diagonal();
    diagonalized = (diag - Matrix4(d2.asDiagonal())).cwiseAbs().maxCoeff() < 1e-9;
  }
  if (!diagonalized) throw Error(ErrorCode::BadRange, "KAK: failed to diagonalize symmetric unitary");
  if (p.determinant() < 0) p.col(0) *= -1.0;

  Eigen::Vector4cd d;
  for (int j = 0; j < 4; ++j) d(j) = std::sqrt(d2(j));
  Matrix4 k1c = mb * p.cast<cplx>() * d.cwiseInverse().asDiagonal();
  Eigen::Matrix4d k1 = k1c.real();
  if (k1.determinant() < 0) {
    d(0) = -d(0);
    k1.col(0) *= -1.0;
  }

  const Matrix4 left = magic * k1.cast<cplx>() * magic.adjoint();
  const Matrix4 right = magic * p.transpose().cast<cplx>() * magic.adjoint();
  KakDecomposition out;
  std::tie(out.after_high, out.after_low) = detail::kron_factor(left);
  std::tie(out.before_high, out.before_low) = detail::kron_factor(right);

  // Solve phase(d_j) = xx*hx_j + yy*hy_j + zz*hz_j + g in the magic basis.
  Eigen::Matrix4d system;
  Eigen::Vector4d rhs;
  const Matrix4 hx = magic.adjoint() * detail::pauli_pair('X') * magic;
  const Matrix4 hy = magic.adjoint() * detail::pauli_pair('Y') * magic;
  const Matrix4 hz = magic.adjoint() * detail::pauli_pair('Z') * magic;
  for (int j = 0; j < 4; ++j) {
    system.row(j) << hx(j, j).real(), hy(j, j).real(), hz(j, j).real(), 1.0;
    rhs(j) = std::arg(d(j));
  }
  const Eigen::Vector4d sol = system.fullPivLu().solve(rhs);
  out.xx = sol(0);
  out.yy = sol(1);
  out.zz = sol(2);
  return out;
}

/// Appends exp(i(xx XX + yy YY + zz ZZ)) on (q0, q1) using three RZZ gates.
inline void append_interaction(Circuit& c, int q0, int q1, double xx, double yy, double zz) {
  for (int q : {q0, q1}) c.add(gate::h(q));
  c.add(gate::rzz(q0, q1, -2.0 * xx));
  for (int q : {q0, q1}) c.add(gate::h(q));
  for (int q : {q0, q1}) {
    c.add(gate::rz(q, -kPi / 2));
    c.add(gate::h(q));
  }
  c.add(gate::rzz(q0, q1, -2.0 * yy));
  for (int q : {q0, q1}) {
    c.add(gate::h(q));
    c.add(gate::rz(q, kPi / 2));
  }
  c.add(gate::rzz(q0, q1, -2.0 * zz));
}

/// Appends a two-qubit unitary; q_low plays the role of qubit 0 in `u`.
inline void append_two_qubit(Circuit& c, int q_low, int q_high, const Matrix4& u) {
  const auto kak = kak_decompose(u);
  append_single(c, q_low, kak.before_low);
  append_single(c, q_high, kak.before_high);
  append_interaction(c, q_low, q_high, kak.xx, kak.yy, kak.zz);
  append_single(c, q_low, kak.after_low);
  append_single(c, q_high, kak.after_high);
}

/// Two-qubit validation circuit: U1 on q0, U2 on q1, U3 on both, then U4 on
/// q0 and U5 on q1, each Haar-random.
struct RandomTwoQubitCircuit {
  std::array<Matrix2, 4> singles;  // U1, U2, U4, U5
  Matrix4 entangler;               // U3
  Circuit circuit{2};

  Matrix4 reference_unitary() const {
    return kron(singles[3], singles[2]) * entangler * kron(singles[1], singles[0]);
  }
};

inline RandomTwoQubitCircuit random_two_qubit_circuit(std::uint64_t seed) {
  Stream rng{seed, 0x5b5ULL};
  RandomTwoQubitCircuit out;
  out.singles[0] = haar_unitary(2, rng);
  out.singles[1] = haar_unitary(2, rng);
  out.entangler = haar_unitary(4, rng);
  out.singles[2] = haar_unitary(2, rng);
  out.singles[3] = haar_unitary(2, rng);
  append_single(out.circuit, 0, out.singles[0]);
  append_single(out.circuit, 1, out.singles[1]);
  append_two_qubit(out.circuit, 0, 1, out.entangler);
  append_single(out.circuit, 0, out.singles[2]);
  append_single(out.circuit, 1, out.singles[3]);
  return out;
}

}  // namespace qcut::synth
