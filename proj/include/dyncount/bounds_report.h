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

// Closed-form error bounds for comparing mechanisms across k at a fixed T.
// Pure arithmetic: T is not limited by the cost of running a mechanism.

#ifndef DYNCOUNT_BOUNDS_REPORT_H_
#define DYNCOUNT_BOUNDS_REPORT_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dyncount/mechanisms.h"

namespace dyncount {

// Leading constants of the subtraction-tree bounds as functions of b, with
// base-2 logarithms. zCDP errors scale as c * sqrt(Dk log(DT/k) log(T)/(2 rho)),
// pure DP errors as c * sqrt(2 log T) k log(DT/k) / epsilon.
double TreeConstantZcdpMax(int b);
double TreeConstantZcdpMean(int b);
double TreeConstantPureMax(int b);
double TreeConstantPureMean(int b);

// Parses a positive count written as decimal digits or as "2^e" / "b^e".
// Throws UsageError on malformed input or int64 overflow.
std::int64_t ParseCount(const std::string& text);

struct OptimalBranching {
  int b = 3;
  double value = 0.0;
};

// Minimises a constant over odd b in [b_lo, b_hi].
OptimalBranching MinimiseOverOddB(double (*constant)(int), int b_lo = 3,
                                  int b_hi = 31);

struct ReportRow {
  std::string mechanism;
  int b = 0;  // 0 when not a tree
  std::int64_t T = 0;
  std::int64_t k = 0;
  std::int64_t D = 0;
  std::string budget;
  double max_se_bound = 0.0;
  double mean_se_bound = 0.0;
  // Dominating terms only.
  double max_se_leading = 0.0;
  double mean_se_leading = 0.0;
  double sensitivity = 0.0;
  bool sensitivity_exact = false;
  std::string method;
};

struct BoundsQuery {
  std::int64_t T = 1;
  std::vector<std::int64_t> ks;
  std::int64_t D = 1;
  PrivacyBudget budget;
  // Fixed odd branching factor for the tree rows. Otherwise two tree rows
  // per k, at the odd b in [3, 31] minimising the MaxSE and the MeanSE
  // leading constants.
  std::optional<int> b;
};

// Rows per k: "sqrt", "tree", "naive" and, for zCDP with D = 1, the
// "binary-tree-baseline" proxy. Rows whose hypotheses fail are skipped.
std::vector<ReportRow> BoundsReport(const BoundsQuery& query);

std::vector<std::string> ReportHeader();
std::vector<std::string> ReportFields(const ReportRow& row);

}  // namespace dyncount

#endif  // DYNCOUNT_BOUNDS_REPORT_H_
