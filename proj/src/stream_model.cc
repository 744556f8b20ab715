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

#include "dyncount/stream_model.h"

#include <algorithm>
#include <cstdlib>
#include <limits>
#include <string>

#include "dyncount/errors.h"

namespace dyncount {
namespace {

std::int64_t CheckedAdd(std::int64_t a, std::int64_t b) {
  std::int64_t out;
  if (__builtin_add_overflow(a, b, &out)) {
    throw DataError("prefix sum overflows int64");
  }
  return out;
}

std::int64_t CheckedAbs(std::int64_t a) {
  if (a == std::numeric_limits<std::int64_t>::min()) {
    throw DataError("entry magnitude overflows int64");
  }
  return a < 0 ? -a : a;
}

void CheckLength(int T, const EnumerationLimits& limits) {
  if (T < 1) throw UsageError("T must be >= 1");
  if (T > limits.max_alternating_length) {
    throw FeasibilityError("enumeration length " + std::to_string(T) +
                           " exceeds limit " +
                           std::to_string(limits.max_alternating_length));
  }
}

}  // namespace

SetParams SetParams::Make(std::int64_t D, std::int64_t k, std::int64_t T) {
  if (D < 1 || k < 1 || T < 1) {
    throw UsageError("set parameters require D, k, T >= 1");
  }
  return SetParams{D, k, T};
}

std::int64_t IntervalSumBound(const SensitivityVector& v) {
  std::int64_t prefix = 0, lo = 0, hi = 0;
  for (Eigen::Index t = 0; t < v.size(); ++t) {
    prefix = CheckedAdd(prefix, v[t]);
    lo = std::min(lo, prefix);
    hi = std::max(hi, prefix);
  }
  std::int64_t out;
  if (__builtin_sub_overflow(hi, lo, &out)) {
    throw DataError("interval sum overflows int64");
  }
  return out;
}

std::int64_t IntervalSumBoundQuadratic(const SensitivityVector& v) {
  std::int64_t best = 0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    std::int64_t sum = 0;
    for (Eigen::Index j = i; j < v.size(); ++j) {
      sum = CheckedAdd(sum, v[j]);
      best = std::max(best, CheckedAbs(sum));
    }
  }
  return best;
}

std::int64_t L1Norm(const SensitivityVector& v) {
  std::int64_t total = 0;
  for (Eigen::Index t = 0; t < v.size(); ++t) {
    total = CheckedAdd(total, CheckedAbs(v[t]));
  }
  return total;
}

bool IsMember(const SensitivityVector& v, const SetParams& p) {
  if (v.size() != p.T) {
    throw UsageError("vector length " + std::to_string(v.size()) +
                     " does not match T = " + std::to_string(p.T));
  }
  return IntervalSumBound(v) <= p.D && L1Norm(v) <= p.k;
}

bool IsAlternating(const SensitivityVector& v) {
  std::int64_t last = 0;
  for (Eigen::Index t = 0; t < v.size(); ++t) {
    const std::int64_t x = v[t];
    if (x < -1 || x > 1) return false;
    if (x == 0) continue;
    if (x == last) return false;
    last = x;
  }
  return true;
}

Decomposition Decompose(const SensitivityVector& v, const SetParams& p) {
  if (!IsMember(v, p)) throw UsageError("vector is not in S_{D,k}");
  const std::int64_t D = p.D;
  const Eigen::Index T = v.size();
  // Slot d + D holds part d for d in [-D, D].
  std::vector<SensitivityVector> slots(2 * D + 1,
                                       SensitivityVector::Zero(T));
  std::int64_t counter = 0;
  for (Eigen::Index t = 0; t < T; ++t) {
    const std::int64_t units = v[t] < 0 ? -v[t] : v[t];
    for (std::int64_t u = 0; u < units; ++u) {
      if (v[t] > 0) {
        ++counter;
        slots[counter + D][t] += 1;
      } else {
        slots[counter + D][t] -= 1;
        --counter;
      }
    }
  }
  std::vector<std::int64_t> order;
  for (std::int64_t d = 1; d <= D; ++d) order.push_back(d);
  order.push_back(0);
  for (std::int64_t d = -1; d >= -D; --d) order.push_back(d);

  Decomposition out;
  for (std::int64_t d : order) {
    SensitivityVector& part = slots[d + D];
    const std::int64_t weight = L1Norm(part);
    if (weight == 0) continue;
    out.parts.push_back(std::move(part));
    out.part_weights.push_back(weight);
  }
  return out;
}

std::int64_t CountS1k(int T, int k) {
  std::int64_t total = 1, binom = 1;
  for (int s = 1; s <= std::min(k, T); ++s) {
    binom = binom * (T - s + 1) / s;
    total += 2 * binom;
  }
  return total;
}

void ForEachS1k(int T, int k,
                const std::function<bool(const SensitivityVector&)>& visit,
                const EnumerationLimits& limits) {
  CheckLength(T, limits);
  if (k < 1 || k > T) throw UsageError("enumeration requires 1 <= k <= T");
  SensitivityVector v = SensitivityVector::Zero(T);
  if (!visit(v)) return;
  const std::uint64_t end = std::uint64_t{1} << T;
  for (int s = 1; s <= k; ++s) {
    std::uint64_t mask = (std::uint64_t{1} << s) - 1;
    while (mask < end) {
      for (std::int64_t lead : {1, -1}) {
        v.setZero();
        std::int64_t sign = lead;
        for (int t = 0; t < T; ++t) {
          if (mask >> t & 1) {
            v[t] = sign;
            sign = -sign;
          }
        }
        if (!visit(v)) return;
      }
      // Gosper's hack: next mask with the same popcount.
      const std::uint64_t c = mask & (~mask + 1);
      const std::uint64_t r = mask + c;
      mask = (((r ^ mask) >> 2) / c) | r;
    }
  }
}

std::vector<SensitivityVector> EnumerateS1k(int T, int k,
                                            const EnumerationLimits& limits) {
  std::vector<SensitivityVector> out;
  ForEachS1k(T, k, [&](const SensitivityVector& v) {
    out.push_back(v);
    return true;
  }, limits);
  return out;
}

void ForEachSDk(int T, std::int64_t D, std::int64_t k,
                const std::function<bool(const SensitivityVector&)>& visit,
                const EnumerationLimits& limits) {
  SetParams::Make(D, k, T);
  std::int64_t candidates = 1;
  for (int t = 0; t < T; ++t) {
    if (__builtin_mul_overflow(candidates, 2 * D + 1, &candidates) ||
        candidates > limits.max_bounded_candidates) {
      throw FeasibilityError("(2D+1)^T exceeds the enumeration limit of " +
                             std::to_string(limits.max_bounded_candidates));
    }
  }
  SensitivityVector v = SensitivityVector::Zero(T);
  bool stopped = false;
  // Depth-first over positions with the running prefix, its extremes
  // (the empty prefix included) and the l1 norm so far.
  std::function<void(int, std::int64_t, std::int64_t, std::int64_t,
                     std::int64_t)>
      dfs = [&](int t, std::int64_t prefix, std::int64_t lo, std::int64_t hi,
                std::int64_t l1) {
        if (stopped) return;
        if (t == T) {
          if (!visit(v)) stopped = true;
          return;
        }
        const std::int64_t room = k - l1;
        for (std::int64_t x = -std::min(D, room); x <= std::min(D, room);
             ++x) {
          const std::int64_t next = prefix + x;
          const std::int64_t nlo = std::min(lo, next);
          const std::int64_t nhi = std::max(hi, next);
          if (nhi - nlo > D) continue;
          v[t] = x;
          dfs(t + 1, next, nlo, nhi, l1 + (x < 0 ? -x : x));
          if (stopped) return;
        }
        v[t] = 0;
      };
  dfs(0, 0, 0, 0, 0);
}

std::vector<SensitivityVector> EnumerateSDk(int T, std::int64_t D,
                                            std::int64_t k,
                                            const EnumerationLimits& limits) {
  std::vector<SensitivityVector> out;
  ForEachSDk(T, D, k, [&](const SensitivityVector& v) {
    out.push_back(v);
    return true;
  }, limits);
  return out;
}

}  // namespace dyncount
