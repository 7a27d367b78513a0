// Copyright 2026 The acqpt authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <unsupported/Eigen/KroneckerProduct>

#include "acqpt/operator_core.hpp"

using namespace acqpt;

namespace {

Matrix pauli_x() {
  Matrix s(2, 2);
  s << 0, 1, 1, 0;
  return s;
}

Matrix random_density(Index d, Rng& rng) {
  Matrix g(d, d);
  for (Index i = 0; i < d; ++i)
    for (Index j = 0; j < d; ++j) g(i, j) = rng.complex_gaussian();
  Matrix rho = g * g.adjoint();
  return rho / rho.trace().real();
}

double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace

TEST_CASE("haar unitary basics") {
  Rng rng(11);
  Matrix u1 = haar_unitary(1, rng);
  CHECK(std::abs(std::abs(u1(0, 0)) - 1.0) < 1e-12);

  Matrix u = haar_unitary(4, rng);
  CHECK(max_abs(u.adjoint() * u - Matrix::Identity(4, 4)) < 1e-12);
}

TEST_CASE("haar unitary first moment of |Tr U|^2") {
  Rng rng(7);
  double acc = 0.0;
  const int samples = 10000;
  for (int s = 0; s < samples; ++s) {
    Matrix u = haar_unitary(4, rng);
    acc += std::norm(u.trace());
  }
  CHECK(std::abs(acc / samples - 1.0) < 0.05);
}

TEST_CASE("haar unitary is deterministic under a fixed seed") {
  Rng a(42), b(42);
  Matrix ua = haar_unitary(3, a);
  Matrix ub = haar_unitary(3, b);
  CHECK(max_abs(ua - ub) == 0.0);
}

TEST_CASE("random kraus set") {
  Rng rng(5);
  KrausSet single = random_kraus_set(2, 1, rng);
  CHECK(single.ops.size() == 1);
  CHECK(max_abs(single.ops[0].adjoint() * single.ops[0] -
                Matrix::Identity(2, 2)) < 1e-10);

  KrausSet ks = random_kraus_set(4, 3, rng);
  Matrix sum = Matrix::Zero(4, 4);
  for (const Matrix& k : ks.ops) sum += k.adjoint() * k;
  CHECK(max_abs(sum - Matrix::Identity(4, 4)) < 1e-10);

  Matrix chi = kraus_to_chi(ks);
  Eigen::SelfAdjointEigenSolver<Matrix> es(chi);
  int above = 0;
  for (Index i = 0; i < es.eigenvalues().size(); ++i)
    if (es.eigenvalues()[i] > 1e-6 * 4) ++above;
  CHECK(above == 3);

  KrausSet full = random_kraus_set(2, 4, rng);
  Matrix chi_full = kraus_to_chi(full);
  Eigen::SelfAdjointEigenSolver<Matrix> es2(chi_full);
  CHECK(es2.eigenvalues().minCoeff() > 1e-6);
  CHECK(std::abs(chi_full.trace().real() - 2.0) < 1e-10);

  CHECK_THROWS(random_kraus_set(2, 0, rng));
  CHECK_THROWS(random_kraus_set(2, 5, rng));
}

TEST_CASE("kraus to chi on known channels") {
  KrausSet identity{2, {Matrix::Identity(2, 2)}};
  Matrix chi_id = kraus_to_chi(identity);
  Vector v(4);
  v << 1, 0, 0, 1;
  CHECK(max_abs(chi_id - Matrix(v * v.adjoint())) < 1e-14);
  CHECK(std::abs(chi_id.trace().real() - 2.0) < 1e-14);

  KrausSet flip{2, {pauli_x()}};
  Matrix chi_x = kraus_to_chi(flip);
  CHECK(std::abs((chi_id * chi_x).trace()) < 1e-14);
  Eigen::SelfAdjointEigenSolver<Matrix> es(chi_x);
  int nonzero = 0;
  for (Index i = 0; i < 4; ++i)
    if (es.eigenvalues()[i] > 1e-10) ++nonzero;
  CHECK(nonzero == 1);
}

TEST_CASE("channel form equivalence") {
  Rng rng(17);
  KrausSet ks = random_kraus_set(3, 2, rng);
  Matrix chi = kraus_to_chi(ks);
  for (int t = 0; t < 20; ++t) {
    Matrix rho = random_density(3, rng);
    CHECK(max_abs(apply_kraus(ks, rho) - apply_channel(chi, rho)) < 1e-10);
  }
}

TEST_CASE("apply channel basics") {
  KrausSet identity{2, {Matrix::Identity(2, 2)}};
  Matrix chi_id = kraus_to_chi(identity);
  Rng rng(3);
  Matrix rho = random_density(2, rng);
  CHECK(max_abs(apply_channel(chi_id, rho) - rho) < 1e-12);

  Matrix chi_x = kraus_to_chi(KrausSet{2, {pauli_x()}});
  Matrix ket0 = Matrix::Zero(2, 2);
  ket0(0, 0) = 1;
  Matrix out = apply_channel(chi_x, ket0);
  CHECK(std::abs(out(1, 1).real() - 1.0) < 1e-12);
  CHECK(std::abs(out(0, 0)) < 1e-12);

  KrausSet tp = random_kraus_set(4, 5, rng);
  Matrix chi = kraus_to_chi(tp);
  Matrix rho4 = random_density(4, rng);
  CHECK(std::abs(apply_channel(chi, rho4).trace().real() - 1.0) < 1e-10);
  CHECK(tp_residual(chi) < 1e-10);
}

TEST_CASE("vectorization identity and round trips") {
  Vector v_id = vec(Matrix::Identity(2, 2));
  Vector expect(4);
  expect << 1, 0, 0, 1;
  CHECK(max_abs(Matrix(v_id - expect)) == 0.0);

  Rng rng(23);
  for (int t = 0; t < 10; ++t) {
    Matrix a(3, 3), x(3, 3), b(3, 3);
    for (Index i = 0; i < 3; ++i)
      for (Index j = 0; j < 3; ++j) {
        a(i, j) = rng.complex_gaussian();
        x(i, j) = rng.complex_gaussian();
        b(i, j) = rng.complex_gaussian();
      }
    Vector lhs = vec(Matrix(a * x * b));
    Vector rhs =
        Matrix(Eigen::kroneckerProduct(b.transpose(), a)) * vec(x);
    CHECK(max_abs(Matrix(lhs - rhs)) < 1e-12);
    CHECK(max_abs(unvec(vec(x), 3, 3) - x) == 0.0);
  }
}

TEST_CASE("row-major flattening matches basis indexing") {
  Matrix m(2, 2);
  m << 1, 2, 3, 4;
  Vector f = flatten_row_major(m);
  CHECK(f[0] == Complex(1, 0));
  CHECK(f[1] == Complex(2, 0));
  CHECK(f[2] == Complex(3, 0));
  CHECK(f[3] == Complex(4, 0));
  CHECK(max_abs(unflatten_row_major(f, 2, 2) - m) == 0.0);
  for (Index mm = 0; mm < 4; ++mm) {
    Matrix b = basis_element(2, mm);
    CHECK(std::abs(b(mm / 2, mm % 2) - Complex(1, 0)) == 0.0);
    CHECK(std::abs(b.sum() - Complex(1, 0)) == 0.0);
  }
}

TEST_CASE("leading rank1") {
  Matrix b01 = Matrix::Zero(2, 2);
  b01(1, 0) = 1;  // |1><0|
  Rank1 r = leading_rank1(b01);
  CHECK(std::abs(r.lambda - 1.0) < 1e-12);
  CHECK(std::abs(r.left[1] - Complex(1, 0)) < 1e-12);
  CHECK(std::abs(r.right[0] - Complex(1, 0)) < 1e-12);

  Matrix half = Matrix::Identity(2, 2) / std::sqrt(2.0);
  Rank1 rd = leading_rank1(half);
  CHECK(std::abs(rd.lambda - 1.0 / std::sqrt(2.0)) < 1e-12);
  CHECK(std::abs(rd.left.norm() - 1.0) < 1e-12);
  CHECK(std::abs(rd.right.norm() - 1.0) < 1e-12);

  Rng rng(29);
  Matrix m(4, 4);
  for (Index i = 0; i < 4; ++i)
    for (Index j = 0; j < 4; ++j) m(i, j) = rng.complex_gaussian();
  Rank1 rl = leading_rank1(m);
  Eigen::BDCSVD<Matrix> svd(m);
  CHECK(std::abs(rl.lambda - svd.singularValues()[0]) < 1e-10);
  CHECK(rl.lambda + 1e-12 >= svd.singularValues().maxCoeff());
  CHECK_THROWS(leading_rank1(Matrix::Zero(2, 2)));
}

TEST_CASE("nearest product unitary") {
  Rng rng(31);
  Matrix a = haar_unitary(2, rng);
  Matrix b = haar_unitary(2, rng);
  Matrix v = Eigen::kroneckerProduct(a, b);
  Matrix prod = nearest_product_unitary(v, {2, 2});
  Matrix p = prod * v.adjoint();
  Complex phase = p(0, 0) / std::abs(p(0, 0));
  CHECK(max_abs(p - phase * Matrix::Identity(4, 4)) < 1e-8);

  Matrix single = haar_unitary(3, rng);
  CHECK(max_abs(nearest_product_unitary(single, {3}) - single) == 0.0);

  Matrix cnot = Matrix::Identity(4, 4);
  cnot(2, 2) = 0;
  cnot(3, 3) = 0;
  cnot(2, 3) = 1;
  cnot(3, 2) = 1;
  Matrix best = nearest_product_unitary(cnot, {2, 2});
  double obj = (best - cnot).norm();
  for (int t = 0; t < 50; ++t) {
    Matrix cand = Eigen::kroneckerProduct(haar_unitary(2, rng),
                                          haar_unitary(2, rng));
    CHECK(obj <= (cand - cnot).norm() + 1e-9);
  }
}

TEST_CASE("random positive Z") {
  Rng rng(37);
  Matrix z = random_positive_z(16, rng);
  Eigen::SelfAdjointEigenSolver<Matrix> es(z);
  CHECK(es.eigenvalues().minCoeff() > 0.0);
  CHECK(std::abs(z.trace().real() - 1.0) < 1e-12);

  Rng r1(99), r2(99);
  CHECK(max_abs(random_positive_z(16, r1) - random_positive_z(16, r2)) == 0.0);
}

TEST_CASE("process fidelity") {
  Rng rng(41);
  Matrix chi = kraus_to_chi(random_kraus_set(2, 2, rng));
  CHECK(std::abs(process_fidelity(chi, chi) - 1.0) < 1e-10);

  Matrix chi_id = kraus_to_chi(KrausSet{2, {Matrix::Identity(2, 2)}});
  Matrix chi_x = kraus_to_chi(KrausSet{2, {pauli_x()}});
  CHECK(process_fidelity(chi_id, chi_x) < 1e-10);
  CHECK(std::abs(process_fidelity(chi_id, chi_x) -
                 process_fidelity(chi_x, chi_id)) < 1e-12);
  CHECK_THROWS(process_fidelity(Matrix::Zero(4, 4), chi_id));
}

TEST_CASE("process entropy") {
  Matrix chi_id = kraus_to_chi(KrausSet{2, {Matrix::Identity(2, 2)}});
  CHECK(process_entropy(chi_id) < 1e-10);

  Matrix chi_mix = Matrix::Identity(4, 4) / 2.0;  // fully depolarizing, d=2
  CHECK(std::abs(process_entropy(chi_mix) - std::log(4.0)) < 1e-10);
}

TEST_CASE("cptp invariants over random channels") {
  Rng rng(53);
  for (int t = 0; t < 100; ++t) {
    Index d = 2 + (t % 3);  // 2..4
    Index r = 1 + static_cast<Index>(rng.next_u64() % std::uint64_t(d * d));
    KrausSet ks = random_kraus_set(d, r, rng);
    Matrix sum = Matrix::Zero(d, d);
    for (const Matrix& k : ks.ops) sum += k.adjoint() * k;
    CHECK(max_abs(sum - Matrix::Identity(d, d)) < 1e-10);
    Matrix chi = kraus_to_chi(ks);
    CHECK(std::abs(chi.trace().real() - double(d)) < 1e-8);
    CHECK(max_abs(chi - chi.adjoint()) < 1e-10);
    CHECK(tp_residual(chi) < 1e-8);
    Matrix rho = random_density(d, rng);
    CHECK(max_abs(apply_kraus(ks, rho) - apply_channel(chi, rho)) < 1e-9);
  }
}
