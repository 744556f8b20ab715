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

#include "dyncount/bounds_report.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <numbers>
#include <string_view>
#include <system_error>

#include "dyncount/errors.h"
#include "dyncount/sensitivity.h"
#include "dyncount/stream_io.h"

namespace dyncount {
namespace {

double Log2(double x) { return std::log2(x); }

// Error multiplier applied to ||L||: sens2 / sqrt(2 rho) or
// sqrt(2) sens1 / epsilon, given the matching sensitivity.
double NoiseStd(const PrivacyBudget& budget, double sens) {
  return budget.kind == PrivacyBudget::Kind::kZcdp
             ? sens / std::sqrt(2.0 * budget.value)
             : std::sqrt(2.0) * sens / budget.value;
}

ReportRow Base(const char* name, const BoundsQuery& q, std::int64_t k) {
  ReportRow row;
  row.mechanism = name;
  row.T = q.T;
  row.k = k;
  row.D = q.D;
  row.budget = q.budget.ToString();
  return row;
}

ReportRow SqrtRow(const BoundsQuery& q, std::int64_t k) {
  ReportRow row = Base("sqrt", q, k);
  const double lnT = std::log(static_cast<double>(q.T));
  const double Dk = static_cast<double>(q.D) * static_cast<double>(k);
  row.method = "closed_bound";
  if (q.budget.kind == PrivacyBudget::Kind::kZcdp) {
    const double scale = std::sqrt(Dk / (2.0 * q.budget.value));
    row.sensitivity = std::sqrt(Dk * (1.067 + lnT / std::numbers::pi));
    row.max_se_bound = (lnT / std::numbers::pi + 1.067) * scale;
    row.mean_se_bound = (lnT / std::numbers::pi + 0.908) * scale;
    row.max_se_leading = row.mean_se_leading = lnT / std::numbers::pi * scale;
    return row;
  }
  // l1 column norm: sum_t r_t <= 1 + 2 sqrt((T-1)/pi).
  const double T = static_cast<double>(q.T);
  const double col1 = 1.0 + 2.0 * std::sqrt((T - 1.0) / std::numbers::pi);
  row.sensitivity = std::min(static_cast<double>(k), q.D * T) * col1;
  const double lrow = std::sqrt(1.067 + lnT / std::numbers::pi);
  row.max_se_bound = row.mean_se_bound = lrow * NoiseStd(q.budget, row.sensitivity);
  row.max_se_leading = row.mean_se_leading =
      std::sqrt(lnT / std::numbers::pi) *
      NoiseStd(q.budget, k * 2.0 * std::sqrt(T / std::numbers::pi));
  return row;
}

std::optional<ReportRow> TreeRow(const BoundsQuery& q, std::int64_t k, int b) {
  const std::int64_t D = std::min(q.D, k);
  if (b < 3 || b % 2 == 0 || b > q.T || k > q.T) return std::nullopt;
  ReportRow row = Base("tree", q, k);
  row.b = b;
  row.method = "closed_bound";
  const int h = CeilLogRatio(b, q.T, 1);
  const double bd = b;
  const double l_max = std::sqrt(((bd - 1) * h + 2) / 2);
  const double l_mean =
      std::sqrt(bd * (1 - 1 / (bd * bd)) * h +
                2 * (1 + bd * bd + std::pow(bd, -h))) / 2;
  const std::int64_t per = (k + D - 1) / D;
  const int ceil_log = CeilLogRatio(b, D * q.T, k);
  const double inner = static_cast<double>(per) * (ceil_log + 2);
  // Clamped so the dominating term stays positive at k = DT.
  const double log_ratio =
      std::max(1.0, Log2(static_cast<double>(D) * q.T / k));
  const double log_T = Log2(static_cast<double>(q.T));
  const double Dk = static_cast<double>(D) * static_cast<double>(k);
  if (q.budget.kind == PrivacyBudget::Kind::kZcdp) {
    row.sensitivity = D * std::sqrt(inner);
    const double lead = std::sqrt(Dk * log_ratio * log_T / (2 * q.budget.value));
    row.max_se_leading = TreeConstantZcdpMax(b) * lead;
    row.mean_se_leading = TreeConstantZcdpMean(b) * lead;
  } else {
    row.sensitivity = D * inner;
    const double lead = std::sqrt(2 * log_T) * k * log_ratio / q.budget.value;
    row.max_se_leading = TreeConstantPureMax(b) * lead;
    row.mean_se_leading = TreeConstantPureMean(b) * lead;
  }
  row.max_se_bound = l_max * NoiseStd(q.budget, row.sensitivity);
  row.mean_se_bound = l_mean * NoiseStd(q.budget, row.sensitivity);
  return row;
}

ReportRow NaiveRow(const BoundsQuery& q, std::int64_t k) {
  ReportRow row = Base("naive", q, k);
  const double m = static_cast<double>(std::min(q.D, k));
  const double T = static_cast<double>(q.T);
  const bool zcdp = q.budget.kind == PrivacyBudget::Kind::kZcdp;
  row.sensitivity = zcdp ? m * std::sqrt(T) : m * T;
  row.sensitivity_exact = true;
  row.method = "closed_form";
  row.max_se_bound = row.mean_se_bound = row.max_se_leading =
      row.mean_se_leading = NoiseStd(q.budget, row.sensitivity);
  return row;
}

ReportRow BaselineRow(const BoundsQuery& q, std::int64_t k) {
  ReportRow row = Base("binary-tree-baseline", q, k);
  row.b = 2;
  row.method = "proxy";
  const int h = CeilLogRatio(2, q.T, 1);
  const double log_T = Log2(static_cast<double>(q.T));
  row.sensitivity = std::sqrt(k * (1 + log_T));
  const double scale = row.sensitivity / std::sqrt(2 * q.budget.value);
  row.max_se_bound = std::sqrt(static_cast<double>(h)) * scale;
  row.mean_se_bound = std::sqrt(h / 2.0 + std::pow(2.0, -h)) * scale;
  row.max_se_leading = std::sqrt(log_T) * std::sqrt(k * log_T) /
                       std::sqrt(2 * q.budget.value);
  row.mean_se_leading = row.max_se_leading / std::sqrt(2.0);
  return row;
}

// Fixed b, or the b minimising each of the two leading constants among odd
// b <= min(T, 31).
std::vector<int> TreeBranchings(const BoundsQuery& q) {
  if (q.b) return {*q.b};
  const int hi = static_cast<int>(std::min<std::int64_t>(q.T, 31));
  if (hi < 3) return {};
  const bool zcdp = q.budget.kind == PrivacyBudget::Kind::kZcdp;
  const int b_max =
      MinimiseOverOddB(zcdp ? TreeConstantZcdpMax : TreeConstantPureMax, 3, hi).b;
  const int b_mean =
      MinimiseOverOddB(zcdp ? TreeConstantZcdpMean : TreeConstantPureMean, 3, hi).b;
  if (b_max == b_mean) return {b_max};
  return {b_max, b_mean};
}

}  // namespace

std::int64_t ParseCount(const std::string& text) {
  auto parse = [&](std::string_view part) {
    std::int64_t v = 0;
    const auto [end, ec] =
        std::from_chars(part.data(), part.data() + part.size(), v);
    if (ec != std::errc() || end != part.data() + part.size() || part.empty()) {
      throw UsageError("malformed count '" + text + "'");
    }
    return v;
  };
  const std::string_view view(text);
  const auto caret = view.find('^');
  if (caret == std::string_view::npos) {
    const std::int64_t v = parse(view);
    if (v < 1) throw UsageError("count must be positive: '" + text + "'");
    return v;
  }
  const std::int64_t base = parse(view.substr(0, caret));
  const std::int64_t exp = parse(view.substr(caret + 1));
  if (base < 1 || exp < 0) throw UsageError("malformed power '" + text + "'");
  std::int64_t v = 1;
  for (std::int64_t i = 0; i < exp; ++i) {
    if (__builtin_mul_overflow(v, base, &v)) {
      throw UsageError("count overflows: '" + text + "'");
    }
  }
  return v;
}

double TreeConstantZcdpMax(int b) {
  return std::sqrt(b - 1.0) / (std::sqrt(2.0) * Log2(b));
}

double TreeConstantZcdpMean(int b) {
  const double bd = b;
  return std::sqrt(bd * (1 - 1 / (bd * bd))) / (2 * Log2(bd));
}

double TreeConstantPureMax(int b) {
  return std::sqrt((b - 1.0) / (2 * std::pow(Log2(b), 3)));
}

double TreeConstantPureMean(int b) {
  const double bd = b;
  return std::sqrt(bd * (1 - 1 / (bd * bd)) / (4 * std::pow(Log2(bd), 3)));
}

OptimalBranching MinimiseOverOddB(double (*constant)(int), int b_lo, int b_hi) {
  OptimalBranching best{0, std::numeric_limits<double>::infinity()};
  for (int b = b_lo | 1; b <= b_hi; b += 2) {
    const double v = constant(b);
    if (v < best.value) best = {b, v};
  }
  if (best.b == 0) throw UsageError("no odd b in range");
  return best;
}

std::vector<ReportRow> BoundsReport(const BoundsQuery& q) {
  if (q.T < 2) throw UsageError("bounds need T >= 2");
  if (q.D < 1) throw UsageError("D must be >= 1");
  if (q.b && (*q.b < 3 || *q.b % 2 == 0)) {
    throw UsageError("tree rows need an odd b >= 3");
  }
  std::vector<ReportRow> rows;
  for (std::int64_t k : q.ks) {
    if (k < 1 || k > q.T) throw UsageError("k must lie in [1, T]");
    rows.push_back(SqrtRow(q, k));
    for (int b : TreeBranchings(q)) {
      if (auto tree = TreeRow(q, k, b)) rows.push_back(*tree);
    }
    rows.push_back(NaiveRow(q, k));
    if (q.budget.kind == PrivacyBudget::Kind::kZcdp && q.D == 1) {
      rows.push_back(BaselineRow(q, k));
    }
  }
  return rows;
}

std::vector<std::string> ReportHeader() {
  return {"mechanism",      "b",              "T",
          "k",              "D",              "budget",
          "max_se_bound",   "mean_se_bound",  "max_se_leading",
          "mean_se_leading", "sensitivity",   "sensitivity_kind",
          "method"};
}

std::vector<std::string> ReportFields(const ReportRow& row) {
  return {row.mechanism,
          std::to_string(row.b),
          std::to_string(row.T),
          std::to_string(row.k),
          std::to_string(row.D),
          row.budget,
          FormatNumber(row.max_se_bound),
          FormatNumber(row.mean_se_bound),
          FormatNumber(row.max_se_leading),
          FormatNumber(row.mean_se_leading),
          FormatNumber(row.sensitivity),
          row.sensitivity_exact ? "exact" : "upper",
          row.method};
}

}  // namespace dyncount
