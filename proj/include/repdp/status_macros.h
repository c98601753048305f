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

#ifndef REPDP_STATUS_MACROS_H_
#define REPDP_STATUS_MACROS_H_

#include <utility>

#include "absl/status/status.h"
#include "absl/status/statusor.h"

#define REPDP_CONCAT_INNER_(a, b) a##b
#define REPDP_CONCAT_(a, b) REPDP_CONCAT_INNER_(a, b)

#define RETURN_IF_ERROR(expr)                    \
  do {                                           \
    ::absl::Status repdp_status_ = (expr);       \
    if (!repdp_status_.ok()) return repdp_status_; \
  } while (0)

#define REPDP_ASSIGN_OR_RETURN_IMPL_(tmp, lhs, expr) \
  auto tmp = (expr);                                 \
  if (!tmp.ok()) return tmp.status();                \
  lhs = std::move(tmp).value()

#define ASSIGN_OR_RETURN(lhs, expr) \
  REPDP_ASSIGN_OR_RETURN_IMPL_(REPDP_CONCAT_(repdp_statusor_, __LINE__), lhs, expr)

#endif  // REPDP_STATUS_MACROS_H_
