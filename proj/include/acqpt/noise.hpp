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

#ifndef ACQPT_NOISE_HPP
#define ACQPT_NOISE_HPP

#include <cstdint>
#include <string>

#include "acqpt/rng.hpp"

namespace acqpt {

enum class NoiseKind { none, poisson };

std::string to_string(NoiseKind kind);
NoiseKind noise_kind_from_string(const std::string& s);

// Shot-noise model: N copies are consumed per setting; the observed
// normalized count nu may exceed 1 under Poisson statistics.
struct NoiseModel {
  NoiseKind kind = NoiseKind::none;
  std::int64_t copies = 10000;
};

struct Shot {
  std::int64_t count = 0;
  double nu = 0.0;
};

// none: count = round(p*N) and nu = p exactly.
// poisson: count ~ Poisson(p*N) and nu = count/N.
Shot sample_shot(double p, const NoiseModel& model, Rng& rng);

}  // namespace acqpt

#endif  // ACQPT_NOISE_HPP
