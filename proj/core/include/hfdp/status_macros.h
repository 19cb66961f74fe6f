// Copyright 2026 The hfdp Authors
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

#ifndef HFDP_STATUS_MACROS_H_
#define HFDP_STATUS_MACROS_H_

#include <utility>

#include "absl/status/status.h"
#include "absl/status/statusor.h"

#define HFDP_CONCAT_INNER_(a, b) a##b
#define HFDP_CONCAT_(a, b) HFDP_CONCAT_INNER_(a, b)

#define HFDP_RETURN_IF_ERROR(expr)               \
  do {                                           \
    const absl::Status hfdp_status_ = (expr);    \
    if (!hfdp_status_.ok()) return hfdp_status_; \
  } while (false)

#define HFDP_ASSIGN_OR_RETURN_IMPL_(tmp, lhs, rexpr) \
  auto tmp = (rexpr);                                \
  if (!tmp.ok()) return tmp.status();                \
  lhs = std::move(tmp).value()

#define HFDP_ASSIGN_OR_RETURN(lhs, rexpr) \
  HFDP_ASSIGN_OR_RETURN_IMPL_(HFDP_CONCAT_(hfdp_statusor_, __LINE__), lhs, rexpr)

#endif  // HFDP_STATUS_MACROS_H_
