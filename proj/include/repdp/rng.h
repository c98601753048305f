// Copyright 2026 The repdp Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef REPDP_RNG_H_
#define REPDP_RNG_H_

#include <cstdint>
#include <random>

namespace repdp {

// Mixes a master seed with a stream index (SplitMix64 finalizer). Used to give
// every tuning run and every Monte Carlo shard its own reproducible stream.
uint64_t DeriveSeed(uint64_t master_seed, uint64_t stream);

// Seeded generator. Owned by the caller and never shared across threads.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  uint64_t NextU64() { return engine_(); }

  // Uniform on the open interval (0, 1) with 53 random bits.
  double Uniform01();

  // Uniform integer in [0, n).
  uint64_t UniformIndex(uint64_t n);

  // Laplace noise with the given scale (density exp(-|x|/scale) / (2 scale)).
  double Laplace(double scale);

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace repdp

#endif  // REPDP_RNG_H_
