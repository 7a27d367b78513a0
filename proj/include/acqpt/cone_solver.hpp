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

#pragma once

#include <functional>
#include <string>
#include <tuple>
#include <vector>

#include "acqpt/types.hpp"

namespace acqpt {

// Primal-dual interior-point solver for
//   minimize <C, X>  subject to  <A_i, X> = b_i,  X in K,
// where K is a product of one Hermitian PSD block, a nonnegative
// orthant, and second-order cone blocks. Nesterov-Todd scaling with a
// Mehrotra predictor-corrector step; infeasible start.

// Hermitian functional term gamma * (c x y^dag + conj(c) y x^dag) with
// x, y referencing the problem's vector pool. Keeping constraints in
// this low-rank form lets the Schur complement be assembled from scalar
// brackets x^dag W y instead of dense congruences.
struct CrossTerm {
  Index x = 0;
  Index y = 0;
  Complex c{1.0, 0.0};
  double gamma = 1.0;
};

// A linear functional on the cone variable; the inner product is
// Re Tr[H X] + sum(orthant) + sum(soc components).
struct ConeRow {
  std::vector<CrossTerm> cross;
  // Explicit Hermitian entry list (r, c, v); conjugate entries must be
  // listed too so the matrix sum_e v_e E_{r_e c_e} is Hermitian.
  std::vector<std::tuple<Index, Index, Complex>> entries;
  std::vector<std::pair<Index, double>> orthant;
  std::vector<std::tuple<Index, Index, double>> soc;  // block, component, coeff
  double rhs = 0.0;
};

struct ConeProblem {
  Index herm_dim = 0;
  Index orthant_dim = 0;
  std::vector<Index> soc_dims;
  std::vector<Vector> pool;
  ConeRow objective;        // rhs ignored
  Matrix dense_objective;   // optional extra Hermitian objective part
  std::vector<ConeRow> rows;
};

enum class SolverStatus { optimal, max_iter, infeasible };

std::string to_string(SolverStatus status);

struct ConeSolution {
  SolverStatus status = SolverStatus::max_iter;
  double objective = 0.0;
  Matrix herm;
  RealVector orthant;
  std::vector<RealVector> soc;
  RealVector y;  // equality multipliers
  double gap = 0.0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  int iterations = 0;
};

struct IterationInfo {
  int iteration = 0;
  double mu = 0.0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double gap = 0.0;
};

struct SolverOptions {
  int max_iter = 100;
  double feas_tol = 1e-9;
  double gap_tol = 1e-8;
  // Residual level still reported as optimal when progress stalls
  // before the target tolerances (ill-conditioning near the boundary).
  double accept_tol = 1e-7;
  double infeas_tol = 1e-7;
  double step_fraction = 0.99;
  std::function<void(const IterationInfo&)> log;
};

ConeSolution solve_cone(const ConeProblem& problem,
                        const SolverOptions& opts = {});

}  // namespace acqpt
