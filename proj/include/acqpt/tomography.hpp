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

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "acqpt/operator_core.hpp"
#include "acqpt/types.hpp"

namespace acqpt {

enum class SettingOrigin { adaptive, random, manual };

std::string to_string(SettingOrigin origin);
SettingOrigin setting_origin_from_string(const std::string& s);

// One probe: prepare |a><a|, measure the projector |b><b|.
struct MeasurementSetting {
  Vector a;
  Vector b;
  SettingOrigin origin = SettingOrigin::manual;
  int k_index = 0;
  int kappa = 1;  // probed diagonal index, one-based
};

struct DataRecord {
  MeasurementSetting setting;
  Vector phi;  // dense row of the data map, d^4 coefficients
  std::optional<double> p_true;
  std::optional<std::int64_t> count;
  std::optional<std::int64_t> copies;
  std::optional<double> nu;
};

struct Dataset {
  Index d = 0;
  std::vector<DataRecord> records;
};

// Rotated basis element B'_kappa = sum_m U(m, kappa-1) B_m reduced to its
// leading rank-1 factor |b><a|.
MeasurementSetting setting_from_rotation(const Matrix& u, int kappa, Index d);

// Probe vector v with v[d*i+j] = b_i conj(a_j); the probability is
// v^dag chi v and the solver constraint matrix is v v^dag.
Vector probe_vector(const MeasurementSetting& setting);

// Row coefficients Phi[m*d^2+n] = conj(v_m) v_n so that
// sum_{mn} Phi[m*d^2+n] chi(m, n) is the probability.
Vector phi_row(const MeasurementSetting& setting, Index d);

double phi_dot_chi(const Vector& phi, const Matrix& chi);

double probability(const Matrix& chi, const MeasurementSetting& setting);

// Deterministic unitary completion with the given first column; the
// remaining columns come from Gram-Schmidt over the standard basis.
Matrix unitary_completion(const Vector& first_col);

void write_dataset_jsonl(const Dataset& dataset, std::ostream& out);
Dataset read_dataset_jsonl(std::istream& in, Index d);

// Shortest decimal-string round trip at 17 significant digits.
std::string format_real(double x);

}  // namespace acqpt
