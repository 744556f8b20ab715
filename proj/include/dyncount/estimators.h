//
// Copyright 2026 The dyncount Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

// CountDistinct, DegreeCount and TriangleCount on fully dynamic streams,
// reduced to continual counting over their difference streams.

#ifndef DYNCOUNT_ESTIMATORS_H_
#define DYNCOUNT_ESTIMATORS_H_

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dyncount/factorizations.h"
#include "dyncount/mechanisms.h"

namespace dyncount {

enum class UpdateOp { kInsert, kDelete, kNoop };

struct ItemUpdate {
  UpdateOp op = UpdateOp::kNoop;
  std::string item;
  friend bool operator==(const ItemUpdate&, const ItemUpdate&) = default;
};

// Endpoints index GraphStream::nodes.
struct EdgeUpdate {
  UpdateOp op = UpdateOp::kNoop;
  int a = 0;
  int b = 0;
  friend bool operator==(const EdgeUpdate&, const EdgeUpdate&) = default;
};

// One batch of updates per time step; T = steps.size().
struct ItemStream {
  std::vector<std::vector<ItemUpdate>> steps;
  friend bool operator==(const ItemStream&, const ItemStream&) = default;
};

struct GraphStream {
  std::vector<std::string> nodes;
  std::vector<std::vector<EdgeUpdate>> steps;
  friend bool operator==(const GraphStream&, const GraphStream&) = default;
};

using Edge = std::pair<int, int>;  // first < second

// Throws DataError on a self-loop or an endpoint outside [0, n).
Edge EdgeKey(const EdgeUpdate& u, int n);

// Items are present while inserted more often than deleted; the difference
// is (#newly present) - (#newly absent) per step.
std::vector<std::int64_t> DiffStreamCountDistinct(const ItemStream& s);

// Set semantics for edges. Indexed [node][t].
std::vector<std::vector<std::int64_t>> DiffStreamDegree(const GraphStream& s);

std::vector<std::int64_t> DiffStreamTriangles(const GraphStream& s);

enum class ContributionMode { kFlippancy, kDegree, kTriangle };

// Number of step boundaries at which each item's presence changes.
std::map<std::string, std::int64_t> Flippancies(const ItemStream& s);
// Number of updates (redundant ones included) to each edge.
std::map<Edge, std::int64_t> DegreeContributions(const GraphStream& s);
// sum over t of |change in the number of triangles containing the edge|.
std::map<Edge, std::int64_t> TriangleContributions(const GraphStream& s);

std::int64_t TrackMaxContribution(const ItemStream& s);
// kDegree or kTriangle.
std::int64_t TrackMaxContribution(const GraphStream& s, ContributionMode mode);

// Largest degree of any node over the whole stream.
std::int64_t MaxDegree(const GraphStream& s);

struct TruncationEntry {
  std::int64_t t = 0;
  std::size_t position = 0;  // index within the step's batch
  std::string key;
  friend bool operator==(const TruncationEntry&, const TruncationEntry&) = default;
};

template <typename Stream>
struct Truncated {
  Stream stream;
  std::vector<TruncationEntry> log;
};

// Replaces updates by no-ops so that every item flips at most k times. When
// an item would flip for the (k+1)-th time, all its updates in that step are
// suppressed. Throws UsageError unless mode is kFlippancy and k >= 0.
Truncated<ItemStream> Truncate(const ItemStream& s, ContributionMode mode,
                               std::int64_t k);

// Degree mode: every update of an edge after its k-th is suppressed.
// Throws UsageError for other modes; triangle truncation is undefined.
Truncated<GraphStream> Truncate(const GraphStream& s, ContributionMode mode,
                                std::int64_t k);

enum class Problem { kCountDistinct, kDegreeCount, kTriangleCount };

std::string ProblemName(Problem problem);
// Accepts "countdistinct", "degree" and "triangles". Throws UsageError.
Problem ParseProblem(const std::string& name);

struct EstimateConfig {
  Problem problem = Problem::kCountDistinct;
  FactorizationSpec factorization;
  // DegreeCount: the total budget; every node counter runs at half of it.
  PrivacyBudget budget;
  std::int64_t k = 1;
  // Required for TriangleCount.
  std::optional<std::int64_t> D;
  std::uint64_t seed = 0;
  RunOptions run;
};

struct EstimatorRun {
  Problem problem = Problem::kCountDistinct;
  std::string mechanism;
  PrivacyBudget budget;
  NoiseDescriptor noise;
  ResolvedSensitivity sensitivity;
  // Scalar problems: [t]. DegreeCount: [node][t].
  std::vector<double> outputs;
  std::vector<std::vector<double>> node_outputs;
  std::vector<std::int64_t> truth;
  std::vector<std::vector<std::int64_t>> node_truth;
  std::vector<TruncationEntry> truncation;
  // TriangleCount only protects (D, k)-neighbouring graph streams.
  bool restricted_neighbourhood = false;
};

// Throws DataError if the problem does not match the stream kind, and for
// TriangleCount inputs whose degree exceeds D or whose triangle
// contribution exceeds k.
EstimatorRun Estimate(const ItemStream& s, const EstimateConfig& config);
EstimatorRun Estimate(const GraphStream& s, const EstimateConfig& config);

}  // namespace dyncount

#endif  // DYNCOUNT_ESTIMATORS_H_
