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

#include "acqpt/operator_core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>

namespace acqpt {

namespace {

// Lexicographic order on complex vectors by (re, im) entry pairs.
bool lex_less(const Vector& x, const Vector& y) {
  for (Index i = 0; i < x.size(); ++i) {
    if (x[i].real() != y[i].real()) return x[i].real() < y[i].real();
    if (x[i].imag() != y[i].imag()) return x[i].imag() < y[i].imag();
  }
  return false;
}

// Closest unitary in Frobenius norm, from the SVD polar factor.
Matrix polar_unitary(const Matrix& m) {
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  return svd.matrixU() * svd.matrixV().adjoint();
}

Matrix random_gaussian_matrix(Index rows, Index cols, Rng& rng) {
  Matrix a(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) a(i, j) = rng.complex_gaussian();
  return a;
}

}  // namespace

Vector vec(const Matrix& a) {
  Vector s(a.size());
  Index idx = 0;
  for (Index j = 0; j < a.cols(); ++j)
    for (Index i = 0; i < a.rows(); ++i) s[idx++] = a(i, j);
  return s;
}

Matrix unvec(const Vector& s, Index rows, Index cols) {
  if (s.size() != rows * cols)
    throw std::invalid_argument("unvec: size mismatch");
  Matrix a(rows, cols);
  Index idx = 0;
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) a(i, j) = s[idx++];
  return a;
}

Vector flatten_row_major(const Matrix& a) {
  Vector v(a.size());
  Index idx = 0;
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j) v[idx++] = a(i, j);
  return v;
}

Matrix unflatten_row_major(const Vector& v, Index rows, Index cols) {
  if (v.size() != rows * cols)
    throw std::invalid_argument("unflatten_row_major: size mismatch");
  Matrix a(rows, cols);
  Index idx = 0;
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) a(i, j) = v[idx++];
  return a;
}

Matrix basis_element(Index d, Index m) {
  if (m < 0 || m >= d * d) throw std::invalid_argument("basis_element: index");
  Matrix b = Matrix::Zero(d, d);
  b(m / d, m % d) = Complex(1.0, 0.0);
  return b;
}

Vector phase_fix(const Vector& v) {
  for (Index i = 0; i < v.size(); ++i) {
    double mag = std::abs(v[i]);
    if (mag > 1e-12) return v * (std::conj(v[i]) / mag);
  }
  return v;
}

Matrix haar_unitary(Index d, Rng& rng) {
  if (d < 1) throw std::invalid_argument("haar_unitary: d must be positive");
  Matrix a = random_gaussian_matrix(d, d, rng);
  Eigen::HouseholderQR<Matrix> qr(a);
  Matrix q = qr.householderQ() * Matrix::Identity(d, d);
  Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Index j = 0; j < d; ++j) {
    double mag = std::abs(r(j, j));
    Complex phase = mag > 0.0 ? r(j, j) / mag : Complex(1.0, 0.0);
    q.col(j) *= phase;
  }
  return q;
}

KrausSet random_kraus_set(Index d, Index r, Rng& rng) {
  if (d < 1) throw std::invalid_argument("random_kraus_set: d must be positive");
  if (r < 1 || r > d * d)
    throw std::invalid_argument("random_kraus_set: rank out of range");
  std::vector<Matrix> raw;
  raw.reserve(static_cast<std::size_t>(r));
  Matrix s = Matrix::Zero(d, d);
  for (Index l = 0; l < r; ++l) {
    raw.push_back(random_gaussian_matrix(d, d, rng));
    s += raw.back().adjoint() * raw.back();
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(s);
  Matrix inv_sqrt = es.eigenvectors() *
                    es.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() *
                    es.eigenvectors().adjoint();
  KrausSet ks;
  ks.d = d;
  for (Matrix& a : raw) ks.ops.push_back(a * inv_sqrt);
  return ks;
}

Matrix random_positive_z(Index d2, Rng& rng) {
  Matrix g = random_gaussian_matrix(d2, d2, rng);
  Matrix z = g * g.adjoint();
  return z / z.trace().real();
}

Matrix kraus_to_chi(const KrausSet& ks) {
  const Index n = ks.d * ks.d;
  Matrix chi = Matrix::Zero(n, n);
  for (const Matrix& k : ks.ops) {
    Vector c = flatten_row_major(k);
    chi += c * c.adjoint();
  }
  return chi;
}

Matrix apply_kraus(const KrausSet& ks, const Matrix& rho) {
  Matrix out = Matrix::Zero(ks.d, ks.d);
  for (const Matrix& k : ks.ops) out += k * rho * k.adjoint();
  return out;
}

Matrix apply_channel(const Matrix& chi, const Matrix& rho) {
  const Index d = rho.rows();
  if (chi.rows() != d * d || chi.cols() != d * d || rho.cols() != d)
    throw std::invalid_argument("apply_channel: dimension mismatch");
  Matrix out(d, d);
  for (Index i = 0; i < d; ++i)
    for (Index ip = 0; ip < d; ++ip)
      out(i, ip) = chi.block(d * i, d * ip, d, d).cwiseProduct(rho).sum();
  return out;
}

Matrix tp_partial_trace(const Matrix& chi) {
  const Index n = chi.rows();
  const Index d = static_cast<Index>(std::lround(std::sqrt(double(n))));
  if (d * d != n || chi.cols() != n)
    throw std::invalid_argument("tp_partial_trace: not a process matrix");
  Matrix t = Matrix::Zero(d, d);
  for (Index j = 0; j < d; ++j)
    for (Index jp = 0; jp < d; ++jp)
      for (Index i = 0; i < d; ++i) t(j, jp) += chi(d * i + j, d * i + jp);
  return t;
}

double tp_residual(const Matrix& chi) {
  const Index d = tp_partial_trace(chi).rows();
  return (tp_partial_trace(chi) - Matrix::Identity(d, d))
      .cwiseAbs()
      .maxCoeff();
}

Rank1 leading_rank1(const Matrix& b) {
  if (b.cwiseAbs().maxCoeff() == 0.0)
    throw std::invalid_argument("leading_rank1: zero matrix");
  Eigen::JacobiSVD<Matrix> svd(b, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  Index pick = 0;
  Vector best_left = phase_fix(svd.matrixU().col(0));
  Vector best_right = phase_fix(svd.matrixV().col(0));
  for (Index i = 1; i < sv.size(); ++i) {
    if (sv[0] - sv[i] > 1e-12 * sv[0]) break;
    Vector left = phase_fix(svd.matrixU().col(i));
    Vector right = phase_fix(svd.matrixV().col(i));
    if (lex_less(left, best_left) ||
        (!lex_less(best_left, left) && lex_less(right, best_right))) {
      pick = i;
      best_left = left;
      best_right = right;
    }
  }
  Rank1 out;
  out.lambda = sv[pick];
  out.left = best_left;
  out.right = best_right;
  return out;
}

namespace {

// Partial contraction of v against the conjugates of all factors except
// `skip`; maximizing Re<U, E> over unitaries updates that factor.
Matrix factor_environment(const Matrix& v, const std::vector<Matrix>& factors,
                          std::size_t skip) {
  const std::size_t s = factors.size();
  std::vector<Index> dims(s);
  for (std::size_t t = 0; t < s; ++t) dims[t] = factors[t].rows();
  const Index dt = dims[skip];
  Matrix e = Matrix::Zero(dt, dt);
  std::vector<Index> bi(s), bj(s);
  for (Index row = 0; row < v.rows(); ++row) {
    Index rest = row;
    for (std::size_t t = s; t-- > 0;) {
      bi[t] = rest % dims[t];
      rest /= dims[t];
    }
    for (Index col = 0; col < v.cols(); ++col) {
      Index cj = col;
      for (std::size_t t = s; t-- > 0;) {
        bj[t] = cj % dims[t];
        cj /= dims[t];
      }
      Complex weight = v(row, col);
      for (std::size_t t = 0; t < s; ++t) {
        if (t == skip) continue;
        weight *= std::conj(factors[t](bi[t], bj[t]));
      }
      e(bi[skip], bj[skip]) += weight;
    }
  }
  return e;
}

std::vector<Matrix> product_factors(const Matrix& v,
                                    const std::vector<Index>& dims) {
  if (dims.size() == 1) return {v};
  const Index d1 = dims[0];
  Index d2 = 1;
  for (std::size_t t = 1; t < dims.size(); ++t) d2 *= dims[t];
  // Realigned matrix is rank one on product operators: the (i1 j1, i2 j2)
  // entry of v becomes A(i1, j1) * B(i2, j2).
  Matrix r(d1 * d1, d2 * d2);
  for (Index i1 = 0; i1 < d1; ++i1)
    for (Index j1 = 0; j1 < d1; ++j1)
      for (Index i2 = 0; i2 < d2; ++i2)
        for (Index j2 = 0; j2 < d2; ++j2)
          r(i1 * d1 + j1, i2 * d2 + j2) = v(i1 * d2 + i2, j1 * d2 + j2);
  Eigen::JacobiSVD<Matrix> svd(r, Eigen::ComputeThinU | Eigen::ComputeThinV);
  double scale = std::sqrt(svd.singularValues()[0]);
  Matrix a = unflatten_row_major(scale * svd.matrixU().col(0), d1, d1);
  Matrix b = unflatten_row_major(scale * svd.matrixV().col(0).conjugate(), d2, d2);
  std::vector<Matrix> factors = {polar_unitary(a)};
  std::vector<Index> rest(dims.begin() + 1, dims.end());
  for (Matrix& f : product_factors(polar_unitary(b), rest))
    factors.push_back(std::move(f));
  return factors;
}

}  // namespace

Matrix nearest_product_unitary(const Matrix& v,
                               const std::vector<Index>& dims) {
  Index total = 1;
  for (Index d : dims) total *= d;
  if (dims.empty() || total != v.rows() || v.rows() != v.cols())
    throw std::invalid_argument("nearest_product_unitary: dims mismatch");
  if (dims.size() == 1) return v;
  std::vector<Matrix> factors = product_factors(v, dims);
  // One alternating sweep; each polar update cannot increase the
  // Frobenius distance to v.
  for (std::size_t t = 0; t < factors.size(); ++t)
    factors[t] = polar_unitary(factor_environment(v, factors, t));
  Matrix out = Matrix::Identity(1, 1);
  for (const Matrix& f : factors) {
    Matrix fixed = unflatten_row_major(phase_fix(flatten_row_major(f)),
                                       f.rows(), f.cols());
    Matrix next(out.rows() * fixed.rows(), out.cols() * fixed.cols());
    for (Index i = 0; i < out.rows(); ++i)
      for (Index j = 0; j < out.cols(); ++j)
        next.block(i * fixed.rows(), j * fixed.cols(), fixed.rows(),
                   fixed.cols()) = out(i, j) * fixed;
    out = next;
  }
  return out;
}

double process_fidelity(const Matrix& chi_a, const Matrix& chi_b) {
  if (chi_a.rows() != chi_b.rows() || chi_a.cols() != chi_b.cols())
    throw std::invalid_argument("process_fidelity: dimension mismatch");
  auto normalize = [](const Matrix& chi) {
    double tr = chi.trace().real();
    if (std::abs(tr) < 1e-12)
      throw std::invalid_argument("process_fidelity: zero trace");
    return Matrix(chi / tr);
  };
  Matrix rho_a = normalize(chi_a);
  Matrix rho_b = normalize(chi_b);
  Eigen::SelfAdjointEigenSolver<Matrix> es_a(rho_a);
  RealVector ev = es_a.eigenvalues();
  for (Index i = 0; i < ev.size(); ++i) {
    if (ev[i] < -1e-8)
      throw std::invalid_argument("process_fidelity: input not positive");
    if (ev[i] < 0.0) ev[i] = 0.0;
  }
  Matrix sqrt_a = es_a.eigenvectors() * ev.cwiseSqrt().asDiagonal() *
                  es_a.eigenvectors().adjoint();
  Matrix inner = sqrt_a * rho_b * sqrt_a;
  Eigen::SelfAdjointEigenSolver<Matrix> es_m(
      Matrix(0.5 * (inner + inner.adjoint())));
  double root_sum = 0.0;
  for (Index i = 0; i < es_m.eigenvalues().size(); ++i)
    root_sum += std::sqrt(std::max(0.0, es_m.eigenvalues()[i]));
  return std::clamp(root_sum * root_sum, 0.0, 1.0);
}

double process_entropy(const Matrix& chi) {
  const Index n = chi.rows();
  const Index d = static_cast<Index>(std::lround(std::sqrt(double(n))));
  Eigen::SelfAdjointEigenSolver<Matrix> es(chi);
  double entropy = 0.0;
  for (Index i = 0; i < n; ++i) {
    double lam = es.eigenvalues()[i] / static_cast<double>(d);
    if (lam <= 0.0) continue;
    entropy -= lam * std::log(std::max(lam, 1e-12));
  }
  return entropy;
}

}  // namespace acqpt
