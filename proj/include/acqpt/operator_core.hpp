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

#include <vector>

#include "acqpt/rng.hpp"
#include "acqpt/types.hpp"

namespace acqpt {

// Operators are expanded in the trace-orthonormal basis
// B_m = |i><j| with m = d*i + j (zero-based). A channel is the
// d^2 x d^2 process matrix chi with action
// M[rho] = sum_{mn} chi_mn B_m rho B_n^dag; trace-preserving
// channels satisfy sum_i chi[(i,j),(i,j')] = delta_{jj'}.

struct KrausSet {
  Index d = 0;
  std::vector<Matrix> ops;
};

struct Rank1 {
  double lambda = 0.0;  // leading singular value
  Vector left;          // |b>, output ket
  Vector right;         // |a>, input ket
};

// Column-stacking vectorization; satisfies vec(AXB) = kron(B^T, A) vec(X).
Vector vec(const Matrix& a);
Matrix unvec(const Vector& s, Index rows, Index cols);

// Row-major flattening used for the operator-basis index m = d*i + j.
Vector flatten_row_major(const Matrix& a);
Matrix unflatten_row_major(const Vector& v, Index rows, Index cols);

// Basis element B_m = |i><j| with i = m / d, j = m % d.
Matrix basis_element(Index d, Index m);

// Multiplies v by a unit phase so its first entry above 1e-12 in
// modulus becomes real nonnegative.
Vector phase_fix(const Vector& v);

Matrix haar_unitary(Index d, Rng& rng);
KrausSet random_kraus_set(Index d, Index r, Rng& rng);

// Full-rank positive unit-trace matrix, Z = GG^dag / Tr[GG^dag].
Matrix random_positive_z(Index d2, Rng& rng);

Matrix kraus_to_chi(const KrausSet& ks);
Matrix apply_kraus(const KrausSet& ks, const Matrix& rho);
Matrix apply_channel(const Matrix& chi, const Matrix& rho);

// Partial trace sum_i chi[(i,j),(i,j')] as a d x d matrix; equals the
// identity exactly when chi is trace preserving.
Matrix tp_partial_trace(const Matrix& chi);
double tp_residual(const Matrix& chi);

// Leading singular triple of B = sum_i lambda_i |b_i><a_i|, phases fixed
// and exact ties broken by lexicographic order of the (re, im) entries.
Rank1 leading_rank1(const Matrix& b);

// Closest product unitary across the given subsystem split, by the
// leading operator-Schmidt term, polar projection of each factor, and
// one sweep of alternating refinement.
Matrix nearest_product_unitary(const Matrix& v, const std::vector<Index>& dims);

// Uhlmann fidelity of the trace-normalized matrices. Eigenvalues in
// [-1e-8, 0) are clipped to zero; anything lower throws.
double process_fidelity(const Matrix& chi_a, const Matrix& chi_b);

// Entropy of chi/d with the 0 log 0 := 0 convention and floor 1e-12.
double process_entropy(const Matrix& chi);

}  // namespace acqpt
