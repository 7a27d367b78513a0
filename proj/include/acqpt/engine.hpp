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

#ifndef ACQPT_ENGINE_HPP
#define ACQPT_ENGINE_HPP

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "acqpt/noise.hpp"
#include "acqpt/operator_core.hpp"
#include "acqpt/tomography.hpp"
#include "acqpt/types.hpp"

namespace acqpt {

enum class Strategy { adaptive_minent, adaptive_minl1, random, adaptive_rank1 };

std::string to_string(Strategy s);
Strategy strategy_from_string(const std::string& s);

struct RunConfig {
  Index d = 2;
  KrausSet truth;
  Strategy strategy = Strategy::adaptive_minent;
  double epsilon = 5e-5;
  int max_steps = 0;  // zero means the default 6 d^4
  NoiseModel noise;
  std::optional<std::vector<Index>> subsystem_dims;
  std::uint64_t seed = 0;
  int restarts = 5;
  double tau_rank = 1e-3;
};

enum class RunStatus { converged, max_steps };

std::string to_string(RunStatus s);

struct StepRecord {
  int k = 0;
  int kappa = 1;
  int rank_prev = 0;  // support estimate that chose kappa; zero on step one
  double s_cvx = 0.0;
  double fidelity = 0.0;
  double entropy = 0.0;
  MeasurementSetting setting;
  double wall_ms = 0.0;
};

struct RunTrace {
  Index d = 0;
  Strategy strategy = Strategy::adaptive_minent;
  std::uint64_t seed = 0;
  double epsilon = 5e-5;
  RunStatus status = RunStatus::max_steps;
  int k_ic = 0;  // settings consumed; informationally complete iff converged
  Matrix chi_final;
  Matrix z;
  std::vector<StepRecord> steps;
  Dataset dataset;
};

// Count of eigenvalues above tau times the trace, at least one.
int rank_estimate(const Matrix& chi, double tau);

// Diagonalizing unitary with eigenvalues sorted descending; ties and phases
// are fixed deterministically.
Matrix next_rotation(const Matrix& chi_est);

// Closest product state across the given factor dimensions (leading
// operator Schmidt term, peeled left to right), normalized.
Vector nearest_product_state(const Vector& v, const std::vector<Index>& dims);

// Reference measurement budgets of the unitary-channel characterization
// scheme used as a yardstick: 2d^2 - d projective, d^2 + d otherwise.
int bkd_count(int d, bool projective);

// Built-in channels: "identity" (any d), "ixh", "cnot" (both d = 4), and
// "imperfect_cnot" (CNOT with depolarizing admixture eta, d = 4).
KrausSet named_channel(const std::string& name, Index d, double eta = 0.05);

// The adaptive certify-then-estimate loop.
RunTrace run(const RunConfig& config);

// Same loop with the probed index pinned to one (rank-one assumption).
RunTrace run_rank1_variant(const RunConfig& config);

// Trace serialization. Wall times are optional so artifacts can be byte
// reproducible; timing then lives with the caller's metadata.
void write_trace_json(const RunTrace& trace, std::ostream& out,
                      bool include_wall = true);
void write_trace_csv(const RunTrace& trace, std::ostream& out);

// Inverse of write_trace_json for the fields it serializes; the dataset is
// not part of the file and stays empty. Throws std::invalid_argument on a
// schema mismatch.
RunTrace read_trace_json(std::istream& in);

}  // namespace acqpt

#endif  // ACQPT_ENGINE_HPP
