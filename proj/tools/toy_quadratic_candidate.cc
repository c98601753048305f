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

// A stand-in training run for the bundled tuning example. Reads
// {"hyperparameters":{"x":...},"seed":...,"run_index":...} on stdin and
// prints {"score":...,"payload":...} with score = -(x - 0.3)^2 + noise.

#include <cstdint>
#include <iostream>
#include <iterator>
#include <string>

#include "absl/strings/str_format.h"
#include "json.hpp"
#include "repdp/rng.h"

int main() {
  const std::string input((std::istreambuf_iterator<char>(std::cin)),
                          std::istreambuf_iterator<char>());
  const nlohmann::json request = nlohmann::json::parse(input, nullptr, false);
  if (request.is_discarded() || !request.contains("hyperparameters") ||
      !request["hyperparameters"].contains("x")) {
    std::cerr << "expected {\"hyperparameters\":{\"x\":...},\"seed\":...}\n";
    return 2;
  }
  const double x = request["hyperparameters"]["x"].get<double>();
  const uint64_t seed = request.value("seed", uint64_t{0});
  repdp::Rng rng(seed);
  const double noise = 0.02 * (rng.Uniform01() - 0.5);
  const double score = -(x - 0.3) * (x - 0.3) + noise;
  const nlohmann::json response = {
      {"score", score}, {"payload", absl::StrFormat("model(x=%g,seed=%d)", x, seed)}};
  std::cout << response.dump() << "\n";
  return 0;
}
