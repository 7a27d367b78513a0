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

#ifndef ACQPT_CVX_HPP
#define ACQPT_CVX_HPP

#include <optional>
#include <vector>

#include "acqpt/cone_solver.hpp"
#include "acqpt/tomography.hpp"
#include "acqpt/types.hpp"

namespace acqpt {

// Convex set of process matrices consistent with observed data: PSD cone,
// trace-preservation equalities, and one data constraint per row. With
// eq_tol <= 0 the data row is the exact equality <F_k, chi> = target_k;
// a positive eq_tol widens it to a two-sided box of that half width.
// Rows are stored in the flattened d^4 form produced by phi_row; each
// must be rank one so the probe vector can be recovered.
struct FeasibleSetSpec {
  Index d = 2;
  std::vector<Vector> rows;
  std::vector<double> targets;
  double eq_tol = 1e-7;
  bool include_tp = true;
};

enum class Sense { minimize, maximize };

struct LinearResult {
  double value = 0.0;
  Matrix chi;
  SolverStatus status = SolverStatus::optimal;
};

// Certification output. s_cvx is the gap f_max - f_min normalized by the
// first-step gap (the denominator the caller captured at step one).
struct IccResult {
  double f_min = 0.0;
  double f_max = 0.0;
  double s_cvx = 0.0;
  Matrix argmin_chi;
  Matrix argmax_chi;
  SolverStatus solver_status = SolverStatus::optimal;
};

// Appends one data row to the set.
void add_row(FeasibleSetSpec& spec, const Vector& phi, double target);

// Recovers the probe vector v (up to a global phase) from a rank-one
// flattened row with entries conj(v_m) v_n at position m*d^2 + n.
Vector probe_from_row(const Vector& phi, Index d);

// Optimizes Tr[chi * objective] over the set. The reported value is the
// requested optimum (not negated for the maximize sense).
LinearResult solve_linear(const FeasibleSetSpec& spec, const Matrix& objective,
                          Sense sense);

// Runs solve_linear twice on f(chi) = Tr[chi Z]/sqrt(Tr[Z^2]). When s1 is
// absent this call defines the normalization, so s_cvx equals one.
IccResult icc(const FeasibleSetSpec& spec, const Matrix& z,
              std::optional<double> s1 = std::nullopt);

// Returns a feasible point minimizing the entropy of chi/d via conditional
// gradient descent, best over `restarts` deterministic starting points. The
// optional warm matrix seeds the first restart's linearization and need not
// be feasible itself. Throws on an infeasible set.
Matrix min_entropy_estimator(const FeasibleSetSpec& spec, int restarts = 5,
                             const std::optional<Matrix>& warm = std::nullopt);

// Returns a feasible point minimizing the sum of |Re| + |Im| over the
// off-diagonal entries of U^dag chi U (the diagonal sums to a constant d
// for every feasible point). Throws on an infeasible set.
Matrix min_l1_estimator(const FeasibleSetSpec& spec, const Matrix& u);

// Projects observed frequencies onto the model: finds the physical chi
// whose predictions minimize the weighted least-squares misfit to nu with
// weights max(nu_k, 1/N_k), then returns those predictions clamped to
// [0, 1]. Every record must carry an observed frequency.
std::vector<double> ml_probabilities(const Dataset& dataset);

}  // namespace acqpt

#endif  // ACQPT_CVX_HPP
