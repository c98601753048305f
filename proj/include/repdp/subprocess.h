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

#ifndef REPDP_SUBPROCESS_H_
#define REPDP_SUBPROCESS_H_

#include <optional>
#include <string>
#include <vector>

#include "absl/status/statusor.h"

namespace repdp {

struct SubprocessResult {
  int exit_code = -1;  // -1 when killed by a signal
  bool timed_out = false;
  std::string stdout_data;
  std::string stderr_data;
};

// Runs argv[0] (looked up on PATH) with `stdin_data` on standard input and
// `working_dir` as the current directory. Kills the child after
// `timeout_seconds`. Errors only when the child cannot be started.
absl::StatusOr<SubprocessResult> RunSubprocess(
    const std::vector<std::string>& argv, const std::string& stdin_data,
    const std::string& working_dir,
    std::optional<double> timeout_seconds = std::nullopt);

}  // namespace repdp

#endif  // REPDP_SUBPROCESS_H_
