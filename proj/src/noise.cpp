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

#include "acqpt/noise.hpp"

#include <cmath>
#include <stdexcept>

namespace acqpt {

std::string to_string(NoiseKind kind) {
  return kind == NoiseKind::none ? "none" : "poisson";
}

NoiseKind noise_kind_from_string(const std::string& s) {
  if (s == "none") return NoiseKind::none;
  if (s == "poisson") return NoiseKind::poisson;
  throw std::invalid_argument("unknown noise kind: " + s);
}

Shot sample_shot(double p, const NoiseModel& model, Rng& rng) {
  if (model.copies < 1) throw std::invalid_argument("noise model: N < 1");
  Shot shot;
  double n = static_cast<double>(model.copies);
  if (model.kind == NoiseKind::none) {
    shot.count = static_cast<std::int64_t>(std::llround(p * n));
    shot.nu = p;
  } else {
    shot.count = static_cast<std::int64_t>(rng.poisson(p * n));
    shot.nu = static_cast<double>(shot.count) / n;
  }
  return shot;
}

}  // namespace acqpt
