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

// Integer sensitivity vectors and the bounded-interval-sum sets S_{D,k}.
//
// S_D holds integer vectors whose contiguous interval sums all lie in
// [-D, D]; S_{D,k} additionally bounds the l1 norm by k. S_1 restricted to
// {-1, 0, 1} entries is exactly the set of alternating vectors.

#ifndef DYNCOUNT_STREAM_MODEL_H_
#define DYNCOUNT_STREAM_MODEL_H_

#include <cstdint>
#include <functional>
#include <vector>

#include <Eigen/Core>

namespace dyncount {

using SensitivityVector = Eigen::Matrix<std::int64_t, Eigen::Dynamic, 1>;

// Parameters (D, k, T) of the set S_{D,k} over Z^T.
struct SetParams {
  std::int64_t D = 1;
  std::int64_t k = 1;
  std::int64_t T = 1;

  // Throws UsageError unless D, k, T >= 1.
  static SetParams Make(std::int64_t D, std::int64_t k, std::int64_t T);
};

// Alternating parts whose entrywise sum is the source vector.
struct Decomposition {
  std::vector<SensitivityVector> parts;
  // l1 norm of each part.
  std::vector<std::int64_t> part_weights;
};

// Limits that keep the brute-force oracles exact. Exceeding them is an error,
// never a silent truncation.
struct EnumerationLimits {
  int max_alternating_length = 22;
  std::int64_t max_bounded_candidates = 10'000'000;
};

// max over i <= j of |v[i] + ... + v[j]|, via max prefix - min prefix with
// the empty prefix included. Throws DataError on int64 overflow.
std::int64_t IntervalSumBound(const SensitivityVector& v);

// O(T^2) reference for IntervalSumBound.
std::int64_t IntervalSumBoundQuadratic(const SensitivityVector& v);

std::int64_t L1Norm(const SensitivityVector& v);

// Membership in S_{D,k}. Throws UsageError if v.size() != p.T.
bool IsMember(const SensitivityVector& v, const SetParams& p);

// Whether v is a {-1, 0, 1} vector whose non-zero entries alternate in sign.
bool IsAlternating(const SensitivityVector& v);

// Splits v in S_{D,k} into at most D alternating parts with a running
// counter: a +1 unit increments the counter then lands in part[counter], a -1
// unit lands in part[counter] then decrements it. Non-zero parts are
// returned ordered by counter index 1..D, 0, -1..-D.
// Throws UsageError if v is not in S_{D,k}.
Decomposition Decompose(const SensitivityVector& v, const SetParams& p);

// Number of alternating vectors in {-1,0,1}^T with l1 <= k:
// 1 + sum_{s=1}^{k} 2 C(T, s).
std::int64_t CountS1k(int T, int k);

// Visits every alternating vector of length T with l1 <= k exactly once,
// ordered by support size, then support (colexicographic), then leading sign
// (+ first). The visitor may return false to stop early.
// Throws FeasibilityError if T exceeds limits.max_alternating_length and
// UsageError unless 1 <= k <= T.
void ForEachS1k(int T, int k,
                const std::function<bool(const SensitivityVector&)>& visit,
                const EnumerationLimits& limits = {});

std::vector<SensitivityVector> EnumerateS1k(int T, int k,
                                            const EnumerationLimits& limits = {});

// Visits every vector in {-D..D}^T that lies in S_{D,k}, using
// branch-and-bound on the running prefix range and l1 norm.
// Throws FeasibilityError if (2D+1)^T exceeds limits.max_bounded_candidates.
void ForEachSDk(int T, std::int64_t D, std::int64_t k,
                const std::function<bool(const SensitivityVector&)>& visit,
                const EnumerationLimits& limits = {});

std::vector<SensitivityVector> EnumerateSDk(int T, std::int64_t D,
                                            std::int64_t k,
                                            const EnumerationLimits& limits = {});

}  // namespace dyncount

#endif  // DYNCOUNT_STREAM_MODEL_H_
