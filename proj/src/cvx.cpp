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

#include "acqpt/cvx.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "acqpt/operator_core.hpp"
#include "acqpt/rng.hpp"

namespace acqpt {

namespace {

constexpr std::uint64_t kRestartSeed = 0x41435054u;

// Trace inner product of two Hermitian matrices, real by symmetry.
double herm_dot(const Matrix& a, const Matrix& b) {
  return a.cwiseProduct(b.conjugate()).sum().real();
}

// Trace-preservation equalities sum_i chi(d*i+j, d*i+j') = delta_{jj'} as
// real rows: d diagonal rows plus a real and an imaginary row per pair.
// Entry tuples (r, c, v) contribute v * chi(c, r) to the row value.
void add_tp_rows(ConeProblem& prob, Index d) {
  for (Index j = 0; j < d; ++j) {
    ConeRow row;
    for (Index i = 0; i < d; ++i)
      row.entries.push_back({d * i + j, d * i + j, Complex(1.0, 0.0)});
    row.rhs = 1.0;
    prob.rows.push_back(std::move(row));
  }
  for (Index j = 0; j < d; ++j) {
    for (Index jp = j + 1; jp < d; ++jp) {
      ConeRow re_row, im_row;
      for (Index i = 0; i < d; ++i) {
        Index r = d * i + j, c = d * i + jp;
        re_row.entries.push_back({c, r, Complex(0.5, 0.0)});
        re_row.entries.push_back({r, c, Complex(0.5, 0.0)});
        im_row.entries.push_back({c, r, Complex(0.0, -0.5)});
        im_row.entries.push_back({r, c, Complex(0.0, 0.5)});
      }
      re_row.rhs = 0.0;
      im_row.rhs = 0.0;
      prob.rows.push_back(std::move(re_row));
      prob.rows.push_back(std::move(im_row));
    }
  }
}

// Base problem over chi: TP rows plus one constraint per data row. A
// nonpositive eq_tol makes the data row an exact equality; a positive
// eq_tol widens it to a two-sided box with orthant slacks at 2k, 2k+1.
// Probe k sits at pool index k either way.
ConeProblem assemble_base(const FeasibleSetSpec& spec) {
  if (spec.rows.size() != spec.targets.size())
    throw std::invalid_argument("feasible set: rows/targets length mismatch");
  ConeProblem prob;
  prob.herm_dim = spec.d * spec.d;
  const Index k_total = static_cast<Index>(spec.rows.size());
  const bool boxed = spec.eq_tol > 0.0;
  prob.orthant_dim = boxed ? 2 * k_total : 0;
  for (Index k = 0; k < k_total; ++k)
    prob.pool.push_back(
        probe_from_row(spec.rows[static_cast<std::size_t>(k)], spec.d));
  if (spec.include_tp) add_tp_rows(prob, spec.d);
  for (Index k = 0; k < k_total; ++k) {
    double target = spec.targets[static_cast<std::size_t>(k)];
    if (!boxed) {
      ConeRow eq;
      eq.cross.push_back({k, k, Complex(1.0, 0.0), 0.5});
      eq.rhs = target;
      prob.rows.push_back(std::move(eq));
      continue;
    }
    ConeRow hi, lo;
    hi.cross.push_back({k, k, Complex(1.0, 0.0), 0.5});
    hi.orthant.push_back({2 * k, 1.0});
    hi.rhs = target + spec.eq_tol;
    lo.cross.push_back({k, k, Complex(1.0, 0.0), 0.5});
    lo.orthant.push_back({2 * k + 1, -1.0});
    lo.rhs = target - spec.eq_tol;
    prob.rows.push_back(std::move(hi));
    prob.rows.push_back(std::move(lo));
  }
  return prob;
}

SolverStatus worse(SolverStatus a, SolverStatus b) {
  auto rank = [](SolverStatus s) {
    return s == SolverStatus::infeasible ? 2 : (s == SolverStatus::max_iter ? 1 : 0);
  };
  return rank(a) >= rank(b) ? a : b;
}

// Matrix logarithm of chi/d with eigenvalues floored at 1e-12, used as the
// linearization point of the entropy objective.
Matrix log_density(const Matrix& chi, Index d) {
  Matrix rho = chi / static_cast<double>(d);
  rho = 0.5 * (rho + rho.adjoint()).eval();
  Eigen::SelfAdjointEigenSolver<Matrix> es(rho);
  RealVector lam = es.eigenvalues().cwiseMax(1e-12);
  return es.eigenvectors() * lam.array().log().matrix().asDiagonal() *
         es.eigenvectors().adjoint();
}

bool lex_less(const Matrix& a, const Matrix& b) {
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index j = 0; j < a.cols(); ++j) {
      Complex x = a(i, j), y = b(i, j);
      if (x.real() != y.real()) return x.real() < y.real();
      if (x.imag() != y.imag()) return x.imag() < y.imag();
    }
  }
  return false;
}

}  // namespace

void add_row(FeasibleSetSpec& spec, const Vector& phi, double target) {
  spec.rows.push_back(phi);
  spec.targets.push_back(target);
}

Vector probe_from_row(const Vector& phi, Index d) {
  const Index n = d * d;
  if (phi.size() != n * n) throw std::invalid_argument("probe row: bad size");
  Index m0 = 0;
  double best = -1.0;
  for (Index m = 0; m < n; ++m) {
    double diag = phi[m * n + m].real();
    if (diag > best) {
      best = diag;
      m0 = m;
    }
  }
  if (best <= 0.0) throw std::invalid_argument("probe row: zero row");
  double s = std::sqrt(best);
  Vector v(n);
  for (Index k = 0; k < n; ++k) v[k] = phi[m0 * n + k] / s;
  return v;
}

LinearResult solve_linear(const FeasibleSetSpec& spec, const Matrix& objective,
                          Sense sense) {
  ConeProblem prob = assemble_base(spec);
  prob.dense_objective =
      sense == Sense::minimize ? objective : Matrix(-objective);
  ConeSolution sol = solve_cone(prob);
  LinearResult out;
  out.status = sol.status;
  out.chi = 0.5 * (sol.herm + sol.herm.adjoint());
  out.value = herm_dot(objective, out.chi);
  return out;
}

IccResult icc(const FeasibleSetSpec& spec, const Matrix& z,
              std::optional<double> s1) {
  double scale = std::sqrt(std::max(herm_dot(z, z), 1e-300));
  Matrix objective = z / scale;
  LinearResult lo = solve_linear(spec, objective, Sense::minimize);
  LinearResult hi = solve_linear(spec, objective, Sense::maximize);
  IccResult out;
  out.f_min = lo.value;
  out.f_max = hi.value;
  out.argmin_chi = lo.chi;
  out.argmax_chi = hi.chi;
  out.solver_status = worse(lo.status, hi.status);
  double gap = std::max(out.f_max - out.f_min, 0.0);
  double denom = s1.has_value() ? *s1 : gap;
  out.s_cvx = denom > 1e-30 ? gap / denom : 0.0;
  return out;
}

Matrix min_entropy_estimator(const FeasibleSetSpec& spec, int restarts,
                             const std::optional<Matrix>& warm) {
  if (restarts < 1) throw std::invalid_argument("min entropy: restarts < 1");
  const Index n = spec.d * spec.d;
  bool have_best = false;
  double best_entropy = 0.0;
  Matrix best_chi;

  for (int r = 0; r < restarts; ++r) {
    // First linearization point: the warm hint for restart zero, otherwise
    // a deterministic random Hermitian direction.
    Matrix g0;
    if (r == 0 && warm.has_value()) {
      g0 = log_density(*warm, spec.d);
    } else {
      Rng rng(derive_seed(kRestartSeed, static_cast<std::uint64_t>(r)));
      Matrix raw(n, n);
      for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < n; ++j) raw(i, j) = rng.complex_gaussian();
      g0 = 0.5 * (raw + raw.adjoint());
    }

    LinearResult vertex = solve_linear(spec, g0, Sense::maximize);
    if (vertex.status == SolverStatus::infeasible)
      throw std::runtime_error("min entropy: infeasible set");
    Matrix chi = vertex.chi;
    double entropy = process_entropy(chi);

    // The entropy is concave, so each full jump to the linearized optimum
    // is guaranteed to decrease it by at least the linear gap.  The jump
    // budget shrinks with the parameter count d^4 so the estimator effort
    // per free parameter stays roughly constant across dimensions.
    const Index n2 = n * n;
    const int jump_cap = std::max(1, static_cast<int>(1024 / n2));
    for (int iter = 0; iter < jump_cap; ++iter) {
      Matrix g = log_density(chi, spec.d);
      LinearResult next = solve_linear(spec, g, Sense::maximize);
      double gain = (herm_dot(g, next.chi) - herm_dot(g, chi)) /
                    static_cast<double>(spec.d);
      if (gain < 1e-6) break;
      double next_entropy = process_entropy(next.chi);
      if (next_entropy >= entropy - 1e-12) break;
      chi = next.chi;
      entropy = next_entropy;
    }

    if (!have_best || entropy < best_entropy ||
        (entropy == best_entropy && lex_less(chi, best_chi))) {
      have_best = true;
      best_entropy = entropy;
      best_chi = chi;
    }
    if (best_entropy < 1e-8) break;
  }
  return best_chi;
}

Matrix min_l1_estimator(const FeasibleSetSpec& spec, const Matrix& u) {
  const Index n = spec.d * spec.d;
  if (u.rows() != n || u.cols() != n)
    throw std::invalid_argument("min l1: rotation dimension mismatch");
  ConeProblem prob = assemble_base(spec);
  const Index col_base = static_cast<Index>(prob.pool.size());
  for (Index m = 0; m < n; ++m) prob.pool.push_back(u.col(m));

  // One epigraph pair per real functional: the row fixes the functional to
  // (s_minus - s_plus)/2 and the objective charges (s_plus + s_minus)/2,
  // which prices |Re| and |Im| of each off-diagonal entry of U^dag chi U.
  Index slack = prob.orthant_dim;
  for (Index m = 0; m < n; ++m) {
    for (Index mp = m + 1; mp < n; ++mp) {
      for (int part = 0; part < 2; ++part) {
        ConeRow row;
        Complex c = part == 0 ? Complex(1.0, 0.0) : Complex(0.0, -1.0);
        row.cross.push_back({col_base + mp, col_base + m, c, 0.5});
        row.orthant.push_back({slack, 0.5});
        row.orthant.push_back({slack + 1, -0.5});
        row.rhs = 0.0;
        prob.rows.push_back(std::move(row));
        prob.objective.orthant.push_back({slack, 0.5});
        prob.objective.orthant.push_back({slack + 1, 0.5});
        slack += 2;
      }
    }
  }
  prob.orthant_dim = slack;

  ConeSolution sol = solve_cone(prob);
  if (sol.status == SolverStatus::infeasible)
    throw std::runtime_error("min l1: infeasible set");
  return 0.5 * (sol.herm + sol.herm.adjoint());
}

std::vector<double> ml_probabilities(const Dataset& dataset) {
  const Index d = dataset.d;
  const Index k_total = static_cast<Index>(dataset.records.size());
  ConeProblem prob;
  prob.herm_dim = d * d;
  prob.soc_dims = {k_total + 1};
  add_tp_rows(prob, d);

  std::vector<Vector> probes;
  for (Index k = 0; k < k_total; ++k) {
    const DataRecord& rec = dataset.records[static_cast<std::size_t>(k)];
    if (!rec.nu.has_value() || !rec.copies.has_value())
      throw std::invalid_argument("ml probabilities: record lacks nu or N");
    double w = std::max(*rec.nu, 1.0 / static_cast<double>(*rec.copies));
    double root_w = std::sqrt(w);
    Vector v = probe_vector(rec.setting);
    prob.pool.push_back(v);
    probes.push_back(v);
    ConeRow row;
    row.cross.push_back({k, k, Complex(1.0, 0.0), 0.5 / root_w});
    row.soc.push_back({0, 1 + k, 1.0});
    row.rhs = *rec.nu / root_w;
    prob.rows.push_back(std::move(row));
  }
  prob.objective.soc.push_back({0, 0, 1.0});

  ConeSolution sol = solve_cone(prob);
  Matrix chi = 0.5 * (sol.herm + sol.herm.adjoint());
  std::vector<double> p_ml;
  for (Index k = 0; k < k_total; ++k) {
    const Vector& v = probes[static_cast<std::size_t>(k)];
    double p = (v.adjoint() * chi * v)(0, 0).real();
    p_ml.push_back(std::clamp(p, 0.0, 1.0));
  }
  return p_ml;
}

}  // namespace acqpt
