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

#ifndef DYNCOUNT_TESTS_TEST_UTIL_H_
#define DYNCOUNT_TESTS_TEST_UTIL_H_

#include <cstdint>
#include <initializer_list>
#include <set>
#include <vector>

#include "dyncount/stream_model.h"

namespace dyncount::testing {

inline SensitivityVector Vec(std::initializer_list<std::int64_t> values) {
  SensitivityVector v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (std::int64_t x : values) v[i++] = x;
  return v;
}

inline std::vector<std::int64_t> ToStd(const SensitivityVector& v) {
  return {v.data(), v.data() + v.size()};
}

inline std::set<std::vector<std::int64_t>> AsSet(
    const std::vector<SensitivityVector>& vs) {
  std::set<std::vector<std::int64_t>> out;
  for (const auto& v : vs) out.insert(ToStd(v));
  return out;
}

}  // namespace dyncount::testing

#endif  // DYNCOUNT_TESTS_TEST_UTIL_H_
