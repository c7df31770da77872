// Copyright 2026 The qpopf Authors
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

#ifndef QPOPF_UTIL_H_
#define QPOPF_UTIL_H_

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include <Eigen/Dense>
#include "json.hpp"

#define QPOPF_RETURN_IF_ERROR(expr)          \
  do {                                       \
    const absl::Status _st = (expr);         \
    if (!_st.ok()) return _st;               \
  } while (0)

#define QPOPF_CONCAT_INNER(a, b) a##b
#define QPOPF_CONCAT(a, b) QPOPF_CONCAT_INNER(a, b)
#define QPOPF_ASSIGN_OR_RETURN(lhs, expr) \
  QPOPF_ASSIGN_OR_RETURN_IMPL(QPOPF_CONCAT(_statusor_, __LINE__), lhs, expr)
#define QPOPF_ASSIGN_OR_RETURN_IMPL(tmp, lhs, expr) \
  auto tmp = (expr);                                 \
  if (!tmp.ok()) return tmp.status();                \
  lhs = *std::move(tmp)

namespace qpopf {

using Rng = std::mt19937_64;

// Hex-encoded SHA-256 of `data`.
std::string Sha256Hex(const std::string& data);

absl::StatusOr<std::string> ReadFile(const std::string& path);
absl::Status WriteFile(const std::string& path, const std::string& contents);
absl::StatusOr<nlohmann::json> ReadJsonFile(const std::string& path);
absl::Status WriteJsonFile(const std::string& path, const nlohmann::json& j);

// Hash of the file contents at `path`; empty string when unreadable.
std::string FileSha256(const std::string& path);

// Generator for stream `stream` of a run seeded with `seed`. Streams are
// independent of how work is split across threads.
Rng StreamRng(uint64_t seed, uint64_t stream);

// Runs fn(i) for i in [0, count) on up to `threads` workers. fn must only
// write to per-index state.
void ParallelFor(int count, int threads,
                 const std::function<void(int)>& fn);

// Default worker count (QPOPF_THREADS or hardware concurrency).
int DefaultThreads();

// Point `index` of the m-dimensional Halton sequence (bases 2, 3, 5, ...),
// with a Cranley-Patterson shift, in [0,1)^m.
Eigen::VectorXd HaltonPoint(int64_t index, const Eigen::VectorXd& shift);

nlohmann::json ToJson(const Eigen::VectorXd& v);
nlohmann::json ToJson(const Eigen::MatrixXd& m);  // row-major nested array
absl::StatusOr<Eigen::VectorXd> VectorFromJson(const nlohmann::json& j);
absl::StatusOr<Eigen::MatrixXd> MatrixFromJson(const nlohmann::json& j);

// Shortest decimal text that round-trips a double.
std::string FormatDouble(double v);

}  // namespace qpopf

#endif  // QPOPF_UTIL_H_
