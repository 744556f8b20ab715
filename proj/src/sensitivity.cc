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

#include "dyncount/sensitivity.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <variant>

#include "dyncount/errors.h"
#include "dyncount/parallel.h"

namespace dyncount {
namespace {

constexpr std::int64_t kNeg = std::numeric_limits<std::int64_t>::min() / 4;
constexpr double kInf = std::numeric_limits<double>::infinity();

using Wide = __int128;

void CheckNormOrder(int p) {
  if (p != 1 && p != 2) throw UsageError("p must be 1 or 2");
}

double Root(double x, int p) { return p == 1 ? x : std::sqrt(x); }

// Smallest e >= 0 with b^e * m >= n.
int CeilLogWide(int b, Wide n, Wide m) {
  int e = 0;
  Wide v = m;
  while (v < n) {
    v *= b;
    ++e;
  }
  return e;
}

// Largest e >= 0 with b^e * m <= n (0 if m > n).
int FloorLogWide(int b, Wide n, Wide m) {
  int e = 0;
  Wide v = m * b;
  while (v <= n) {
    v *= b;
    ++e;
  }
  return e;
}

// Upper hull of (j, y[j]) evaluated at every integer j.
std::vector<double> ConcaveMajorant(const std::vector<double>& y) {
  const std::size_t n = y.size();
  std::vector<std::size_t> hull;
  for (std::size_t j = 0; j < n; ++j) {
    while (hull.size() >= 2) {
      const std::size_t a = hull[hull.size() - 2], c = hull.back();
      // Drop c if it lies on or below the chord from a to j.
      const double lhs = (y[c] - y[a]) * static_cast<double>(j - a);
      const double rhs = (y[j] - y[a]) * static_cast<double>(c - a);
      if (lhs <= rhs) {
        hull.pop_back();
      } else {
        break;
      }
    }
    hull.push_back(j);
  }
  std::vector<double> out(n);
  for (std::size_t s = 0; s + 1 < hull.size(); ++s) {
    const std::size_t a = hull[s], c = hull[s + 1];
    for (std::size_t j = a; j <= c; ++j) {
      const double w = static_cast<double>(j - a) / static_cast<double>(c - a);
      out[j] = y[a] + w * (y[c] - y[a]);
    }
  }
  if (hull.size() == 1) out[0] = y[0];
  return out;
}

SensitivityVector AlternatingFromPositions(std::int64_t T,
                                           const std::vector<std::int64_t>& pos) {
  SensitivityVector v = SensitivityVector::Zero(T);
  std::int64_t sign = 1;
  for (std::int64_t t : pos) {
    v[t] = sign;
    sign = -sign;
  }
  return v;
}

// Tightest D = 1 bracket on sens^p at ball budget j, or {0, inf}.
struct PowBracket {
  double lower = 0.0;
  double upper = kInf;
};

PowBracket TreeBracketAt(const BaryTree& tree, std::int64_t j,
                         std::vector<Bracket>* named, int p) {
  PowBracket out;
  if (j <= 0) return {0.0, 0.0};
  const int b = tree.b();
  const int h = tree.h();
  const std::int64_t T = tree.T();
  const double kd = static_cast<double>(std::min(j, T));
  const std::int64_t k = std::min(j, T);
  const bool power = tree.Span(h) == T;
  const bool reduced = tree.variant() == TreeVariant::kSubtractReduced;
  auto add = [&](const char* name, double lo, double up) {
    out.lower = std::max(out.lower, lo);
    out.upper = std::min(out.upper, up);
    if (named) named->push_back({name, Root(lo, p), Root(up, p)});
  };
  if (!reduced) {
    double levels = 0.0;
    for (int l = 0; l <= h; ++l) {
      const std::int64_t nodes = (T + tree.Span(l) - 1) / tree.Span(l);
      levels += static_cast<double>(std::min(k, nodes));
    }
    add("level-count", static_cast<double>(h + 1), levels);
    if (power && h >= 1) {
      const int a = CeilLog(b, k);
      const double ba = std::pow(static_cast<double>(b), a);
      const double lo = std::max(kd * (h - a + 1), ba / b * (h - a + 2));
      add("complete-tree", lo, kd * (h - a + 1) + (ba - 1) / (b - 1));
    }
    return out;
  }
  if (power && h >= 1) {
    const int a = CeilLog(b, k);
    const double ba1 = std::pow(static_cast<double>(b), a - 1);
    const double lo = std::max(kd * (h - a + 1 - 1.0 / b),
                               ba1 * (h - a + 2 - 1.0 / b));
    add("complete-reduced-tree", lo, kd * (h - a + 1) + ba1);
  }
  if (b >= 3 && b <= T) {
    const std::int64_t kt = std::min(k, tree.Span(h - 1));
    const double lo = static_cast<double>(kt) * (h - CeilLog(b, kt) - 1.0 / b);
    add("reduced-tree-any-T", lo, kd * (CeilLogRatio(b, T, k) + 2));
  }
  return out;
}

}  // namespace

std::string MethodName(SensMethod method) {
  switch (method) {
    case SensMethod::kExactDp:
      return "exact_dp";
    case SensMethod::kClosedBound:
      return "closed_bound";
    case SensMethod::kBruteForce:
      return "brute_force";
    case SensMethod::kEmpirical:
      return "empirical";
  }
  return "unknown";
}

SensMethod ParseMethod(const std::string& name) {
  if (name == "dp" || name == "exact_dp") return SensMethod::kExactDp;
  if (name == "bound" || name == "closed_bound") return SensMethod::kClosedBound;
  if (name == "brute" || name == "brute_force") return SensMethod::kBruteForce;
  if (name == "empirical") return SensMethod::kEmpirical;
  throw UsageError("unknown method '" + name +
                   "' (expected dp, bound, brute or empirical)");
}

int CeilLog(int b, std::int64_t k) {
  if (b < 2 || k < 1) throw UsageError("CeilLog needs b >= 2 and k >= 1");
  return CeilLogWide(b, k, 1);
}

int FloorLogRatio(int b, std::int64_t n, std::int64_t m) {
  if (b < 2 || n < 1 || m < 1) throw UsageError("bad log arguments");
  return FloorLogWide(b, n, m);
}

int CeilLogRatio(int b, std::int64_t n, std::int64_t m) {
  if (b < 2 || n < 1 || m < 1) throw UsageError("bad log arguments");
  return CeilLogWide(b, n, m);
}

TreeParityDp::TreeParityDp(int b, std::int64_t T, bool reduced,
                           std::int64_t kmax, const DpLimits& limits)
    : b_(b), h_(0), T_(T), reduced_(reduced) {
  if (b < 2) throw UsageError("branching factor must be >= 2");
  if (T < 1) throw UsageError("T must be >= 1");
  if (kmax < 0) throw UsageError("ball count must be >= 0");
  if (b > limits.max_branching) {
    throw FeasibilityError("branching factor " + std::to_string(b) +
                           " exceeds the DP limit " +
                           std::to_string(limits.max_branching));
  }
  span_.push_back(1);
  while (span_.back() < T) span_.push_back(span_.back() * b);
  h_ = static_cast<int>(span_.size()) - 1;
  cap_ = std::min(kmax, T);
  const double work = static_cast<double>(h_ + 1) * b *
                      static_cast<double>(cap_ + 1) *
                      static_cast<double>(cap_ + 1);
  if (work > limits.max_work) {
    throw FeasibilityError("parity DP work estimate exceeds the budget");
  }

  const bool root_complete = span_[h_] == T;
  const int top = root_complete ? h_ : h_ - 1;
  complete_base_.resize(top + 1);
  complete_take_.resize(top + 1);
  complete_base_[0].assign(std::min<std::int64_t>(cap_, 1) + 1, 0);
  const int mid = (b - 1) / 2;
  for (int l = 1; l <= top; ++l) {
    std::vector<std::vector<std::int64_t>> tables;
    for (int i = 0; i < b; ++i) {
      tables.push_back(Counted(complete_base_[l - 1], !(reduced && i == mid)));
    }
    complete_base_[l] = Combine(tables, complete_take_[l]);
  }

  std::vector<std::int64_t> root_base;
  if (root_complete) {
    root_base = complete_base_[h_];
  } else {
    int l = h_;
    std::int64_t lo = 0, n = T;
    while (n > 0 && n < span_[l]) {
      Level level{l, lo, {}, {}};
      const std::int64_t q = n / span_[l - 1], rem = n % span_[l - 1];
      for (int i = 0; i < b; ++i) {
        const std::int64_t child_lo = lo + i * span_[l - 1];
        const bool counted = !(reduced && i == mid);
        if (i < q) {
          level.children.push_back({Child::kComplete, child_lo, counted});
        } else if (i == q && rem > 0) {
          level.children.push_back({Child::kPartial, child_lo, counted});
        } else {
          level.children.push_back({Child::kEmpty, child_lo, counted});
        }
      }
      spine_.push_back(std::move(level));
      lo += q * span_[l - 1];
      n = rem;
      --l;
    }
    std::vector<std::int64_t> below;
    for (std::size_t s = spine_.size(); s-- > 0;) {
      Level& level = spine_[s];
      std::vector<std::vector<std::int64_t>> tables;
      for (const Child& c : level.children) {
        switch (c.kind) {
          case Child::kComplete:
            tables.push_back(Counted(complete_base_[level.level - 1], c.counted));
            break;
          case Child::kPartial:
            tables.push_back(Counted(below, c.counted));
            break;
          case Child::kEmpty:
            tables.push_back({0});
            break;
        }
      }
      below = Combine(tables, level.take);
    }
    root_base = below;
  }
  best_ = Counted(root_base, true);
}

std::vector<std::int64_t> TreeParityDp::Counted(
    const std::vector<std::int64_t>& base, bool counted) const {
  std::vector<std::int64_t> out = base;
  if (counted) {
    for (std::size_t j = 1; j < out.size(); j += 2) {
      if (out[j] > kNeg) out[j] += 1;
    }
  }
  return out;
}

std::vector<std::int64_t> TreeParityDp::Combine(
    const std::vector<std::vector<std::int64_t>>& tables,
    std::vector<std::vector<std::int32_t>>& take) const {
  take.assign(tables.size(), {});
  std::vector<std::int64_t> acc = tables[0];
  take[0].resize(acc.size());
  for (std::size_t j = 0; j < acc.size(); ++j) take[0][j] = static_cast<std::int32_t>(j);
  for (std::size_t i = 1; i < tables.size(); ++i) {
    const auto& child = tables[i];
    const std::size_t len = static_cast<std::size_t>(std::min<std::int64_t>(
        cap_, static_cast<std::int64_t>(acc.size() + child.size()) - 2)) + 1;
    std::vector<std::int64_t> next(len, kNeg);
    std::vector<std::int32_t> tk(len, 0);
    for (std::size_t j0 = 0; j0 < acc.size(); ++j0) {
      if (acc[j0] == kNeg) continue;
      for (std::size_t a = 0; a < child.size() && j0 + a < len; ++a) {
        if (child[a] == kNeg) continue;
        const std::int64_t v = acc[j0] + child[a];
        if (v > next[j0 + a]) {
          next[j0 + a] = v;
          tk[j0 + a] = static_cast<std::int32_t>(a);
        }
      }
    }
    acc = std::move(next);
    take[i] = std::move(tk);
  }
  return acc;
}

void TreeParityDp::Place(int level, std::int64_t lo, bool spine,
                         std::size_t spine_pos, std::int64_t j,
                         std::vector<std::int64_t>& out) const {
  if (j == 0) return;
  if (!spine && level == 0) {
    out.push_back(lo);
    return;
  }
  const auto& take = spine ? spine_[spine_pos].take : complete_take_[level];
  std::vector<std::int64_t> amounts(take.size());
  std::int64_t rem = j;
  for (std::size_t i = take.size(); i-- > 1;) {
    amounts[i] = take[i][rem];
    rem -= amounts[i];
  }
  amounts[0] = rem;
  for (std::size_t i = 0; i < take.size(); ++i) {
    if (amounts[i] == 0) continue;
    if (!spine) {
      Place(level - 1, lo + static_cast<std::int64_t>(i) * span_[level - 1],
            false, 0, amounts[i], out);
      continue;
    }
    const Child& c = spine_[spine_pos].children[i];
    Place(level - 1, c.lo, c.kind == Child::kPartial, spine_pos + 1,
          amounts[i], out);
  }
}

std::vector<std::int64_t> TreeParityDp::Placement(std::int64_t j) const {
  if (j < 0 || j > cap_) throw UsageError("ball count outside the DP table");
  std::vector<std::int64_t> out;
  Place(h_, 0, !spine_.empty(), 0, j, out);
  return out;
}

namespace {

std::int64_t CompleteLeaves(int b, int h) {
  if (b < 2 || h < 0) throw UsageError("need b >= 2 and h >= 0");
  std::int64_t n = 1;
  for (int l = 0; l < h; ++l) {
    if (__builtin_mul_overflow(n, static_cast<std::int64_t>(b), &n)) {
      throw FeasibilityError("b^h overflows int64");
    }
  }
  return n;
}

std::int64_t ParityDp(int b, int h, std::int64_t k, bool reduced,
                      const DpLimits& limits) {
  const std::int64_t leaves = CompleteLeaves(b, h);
  if (k < 0 || k > leaves) {
    throw UsageError("ball count must lie in [0, b^h]");
  }
  return TreeParityDp(b, leaves, reduced, k, limits).best()[k];
}

}  // namespace

std::int64_t ParityDpFull(int b, int h, std::int64_t k,
                          const DpLimits& limits) {
  return ParityDp(b, h, k, false, limits);
}

std::int64_t ParityDpReduced(int b, int h, std::int64_t k,
                             const DpLimits& limits) {
  return ParityDp(b, h, k, true, limits);
}

double MaxSplitUpper(const std::vector<double>& s, std::int64_t D,
                     std::int64_t k) {
  if (s.empty()) throw UsageError("empty sensitivity table");
  if (D < 1 || k < 0) throw UsageError("need D >= 1 and k >= 0");
  const std::int64_t parts = std::min(D, std::max<std::int64_t>(k, 1));
  const std::int64_t K = static_cast<std::int64_t>(s.size()) - 1;
  const std::int64_t total = std::min(k, parts * K);
  auto at = [&](std::int64_t j) { return s[std::min(j, K)]; };
  // acc[j]: best sum of the parts so far using at most j balls.
  std::vector<double> acc(total + 1);
  for (std::int64_t j = 0; j <= total; ++j) acc[j] = at(j);
  for (std::int64_t d = 1; d < parts; ++d) {
    std::vector<double> next(total + 1, -kInf);
    for (std::int64_t j = 0; j <= total; ++j) {
      for (std::int64_t a = 0; a <= std::min(j, K); ++a) {
        next[j] = std::max(next[j], acc[j - a] + at(a));
      }
    }
    acc = std::move(next);
  }
  return *std::max_element(acc.begin(), acc.end());
}

ReductionBracket ReductionBounds(
    const std::function<double(std::int64_t)>& base,
    const std::function<double(std::int64_t)>& upper_fn, const SetParams& set) {
  const std::int64_t D = set.D, k = set.k;
  std::vector<double> u(k + 1);
  for (std::int64_t j = 0; j <= k; ++j) u[j] = upper_fn(j);
  for (std::int64_t j = 1; j <= k; ++j) {
    if (u[j] < u[j - 1] - 1e-12 * std::max(1.0, std::fabs(u[j - 1]))) {
      throw UsageError("upper bound function is not nondecreasing at k = " +
                       std::to_string(j));
    }
  }
  const std::vector<double> hull = ConcaveMajorant(u);
  ReductionBracket out;
  for (std::int64_t j = 0; j <= k; ++j) {
    if (hull[j] > u[j] + 1e-9 * std::max(1.0, std::fabs(u[j]))) {
      out.upper_concave = false;
    }
  }
  out.lower = static_cast<double>(D) * base(k / D);
  out.upper = static_cast<double>(D) * hull[(k + D - 1) / D];
  return out;
}

std::vector<Bracket> TreeClosedForms(const BaryTree& tree, int p,
                                     const SetParams& set) {
  CheckNormOrder(p);
  std::vector<Bracket> out;
  const std::int64_t D = set.D, k = set.k, T = tree.T();
  const int b = tree.b();
  if (D == 1) {
    TreeBracketAt(tree, k, &out, p);
    return out;
  }
  if (tree.variant() == TreeVariant::kSubtractReduced && b >= 3 && b <= T &&
      D <= k && k * b <= T) {
    const Wide DT = static_cast<Wide>(D) * T;
    const double fl = static_cast<double>(k / D) *
                      (FloorLogWide(b, DT, k) - 1.0 / b);
    const double cl = static_cast<double>((k + D - 1) / D) *
                      (CeilLogWide(b, DT, k) + 2);
    out.push_back({"reduced-tree-D", D * Root(fl, p), D * Root(cl, p)});
  }
  if (k <= 10'000'000) {
    std::vector<double> lo(k + 1, 0.0), up(k + 1, 0.0);
    for (std::int64_t j = 1; j <= k; ++j) {
      const PowBracket pb = TreeBracketAt(tree, j, nullptr, p);
      lo[j] = std::max(lo[j - 1], pb.lower);
      up[j] = pb.upper;
    }
    // sens is nondecreasing in k, so any later upper bound also applies.
    for (std::int64_t j = k; j-- > 1;) up[j] = std::min(up[j], up[j + 1]);
    const ReductionBracket r = ReductionBounds(
        [&](std::int64_t j) { return Root(lo[j], p); },
        [&](std::int64_t j) { return Root(up[j], p); }, set);
    out.push_back({"reduction", std::max(r.lower, Root(lo[k], p)), r.upper});
  }
  return out;
}

SensResult TreeSens(const BaryTree& tree, int p, const SetParams& set,
                    SensMethod method, const DpLimits& limits) {
  CheckNormOrder(p);
  if (set.T != tree.T()) throw UsageError("set T does not match the tree");
  SensResult out;
  out.method = MethodName(method);
  out.closed_forms = TreeClosedForms(tree, p, set);
  if (method == SensMethod::kClosedBound) {
    for (const Bracket& c : out.closed_forms) {
      out.lower = std::max(out.lower, c.lower);
      out.upper = std::min(out.upper, c.upper);
    }
    return out;
  }
  if (method != SensMethod::kExactDp) {
    throw UsageError("TreeSens supports exact_dp and closed_bound only");
  }
  const bool reduced = tree.variant() == TreeVariant::kSubtractReduced;
  const std::int64_t K = std::min(set.k, tree.T());
  const TreeParityDp dp(tree.b(), tree.T(), reduced, K, limits);
  const auto& best = dp.best();
  std::vector<std::int64_t> argbest(K + 1, 0);
  std::vector<double> s(K + 1, 0.0);
  for (std::int64_t j = 1; j <= K; ++j) {
    argbest[j] = best[j] > best[argbest[j - 1]] ? j : argbest[j - 1];
    s[j] = Root(static_cast<double>(best[argbest[j]]), p);
  }
  auto witness = [&](std::int64_t j) {
    return AlternatingFromPositions(tree.T(), dp.Placement(argbest[j]));
  };
  if (set.D == 1) {
    out.value = s[K];
    out.lower = out.upper = s[K];
    out.witness = witness(K);
    return out;
  }
  const std::int64_t split = std::min(set.k / set.D, K);
  const double scaled = static_cast<double>(set.D) * s[split];
  if (scaled >= s[K]) {
    out.lower = scaled;
    out.witness = SensitivityVector(witness(split) * set.D);
  } else {
    out.lower = s[K];
    out.witness = witness(K);
  }
  out.upper = MaxSplitUpper(s, set.D, set.k);
  for (const Bracket& c : out.closed_forms) {
    out.upper = std::min(out.upper, c.upper);
  }
  out.note = "exact value unavailable for D > 1; bracket from exact D = 1 "
             "values";
  return out;
}

SensResult ToeplitzSensBound(const std::vector<double>& coeffs,
                             const SetParams& set) {
  if (coeffs.empty()) throw UsageError("empty Toeplitz column");
  double sq = 0.0;
  for (std::size_t t = 0; t < coeffs.size(); ++t) {
    if (coeffs[t] < 0.0 || (t > 0 && coeffs[t] > coeffs[t - 1])) {
      throw UsageError("Toeplitz diagonals must be non-negative and "
                       "non-increasing");
    }
    sq += coeffs[t] * coeffs[t];
  }
  const double column = std::sqrt(sq);
  SensResult out;
  out.method = MethodName(SensMethod::kClosedBound);
  out.upper = std::sqrt(static_cast<double>(set.D) *
                        static_cast<double>(set.k)) * column;
  // e_0 lies in every S_{D,k} and attains the first column norm.
  out.lower = column;
  SensitivityVector e0 = SensitivityVector::Zero(coeffs.size());
  e0[0] = 1;
  out.witness = e0;
  out.closed_forms.push_back({"toeplitz", column, out.upper});
  if (set.D * set.k == 1) out.value = column;
  return out;
}

SensResult ToeplitzSensBound(const SquareRootToeplitz& f,
                             const SetParams& set) {
  if (set.T != f.T()) throw UsageError("set T does not match the matrix");
  return ToeplitzSensBound(f.coeffs(), set);
}

SensResult BruteForceSens(const Factorization& f, int p, const SetParams& set,
                          const EnumerationLimits& limits) {
  CheckNormOrder(p);
  const std::int64_t T = HorizonOf(f);
  if (set.T != T) throw UsageError("set T does not match the factorization");
  if (T > std::numeric_limits<int>::max()) {
    throw FeasibilityError("T too large to enumerate");
  }
  constexpr std::size_t kBatch = 4096;
  constexpr int kChunks = 16;
  std::vector<SensitivityVector> batch;
  batch.reserve(kBatch);
  double best = -1.0;
  SensitivityVector best_v;

  auto norm_of = [&](const SensitivityVector& v) {
    const Eigen::VectorXd r = ApplyRight(f, v);
    return p == 1 ? r.lpNorm<1>() : r.norm();
  };
  auto flush = [&] {
    std::vector<double> chunk_best(kChunks, -1.0);
    std::vector<std::size_t> chunk_arg(kChunks, 0);
    const std::size_t n = batch.size();
    ParallelChunks(kChunks, [&](int c) {
      for (std::size_t i = n * c / kChunks; i < n * (c + 1) / kChunks; ++i) {
        const double v = norm_of(batch[i]);
        if (v > chunk_best[c]) {
          chunk_best[c] = v;
          chunk_arg[c] = i;
        }
      }
    });
    for (int c = 0; c < kChunks; ++c) {
      if (chunk_best[c] > best) {
        best = chunk_best[c];
        best_v = batch[chunk_arg[c]];
      }
    }
    batch.clear();
  };
  auto visit = [&](const SensitivityVector& v) {
    batch.push_back(v);
    if (batch.size() == kBatch) flush();
    return true;
  };
  if (set.D == 1) {
    ForEachS1k(static_cast<int>(T), static_cast<int>(std::min(set.k, T)),
               visit, limits);
  } else {
    ForEachSDk(static_cast<int>(T), set.D, set.k, visit, limits);
  }
  if (!batch.empty()) flush();
  SensResult out;
  out.method = MethodName(SensMethod::kBruteForce);
  out.value = best;
  out.lower = out.upper = best;
  out.witness = best_v;
  return out;
}

EmpiricalLower EmpiricalLowerEstimate(const SquareRootToeplitz& f,
                                      const SetParams& set, int trials,
                                      std::uint64_t seed) {
  const std::int64_t T = f.T(), k = set.k;
  if (set.D != 1) throw UsageError("empirical estimate needs D = 1");
  if (set.T != T || k < 1 || k > T) {
    throw UsageError("empirical estimate needs 1 <= k <= T = f.T()");
  }
  if (trials < 1) throw UsageError("trials must be >= 1");
  const int chunks = std::min(trials, 64);
  const auto& r = f.coeffs();
  std::vector<double> chunk_max(chunks, -1.0), chunk_sum(chunks, 0.0);
  std::vector<std::vector<std::int64_t>> chunk_pos(chunks);
  std::vector<std::int64_t> chunk_sign(chunks, 1);

  ParallelChunks(chunks, [&](int c) {
    std::mt19937_64 rng(DeriveSeed(seed, c));
    std::vector<std::int64_t> pos;
    const int lo = static_cast<int>(static_cast<std::int64_t>(trials) * c / chunks);
    const int hi = static_cast<int>(static_cast<std::int64_t>(trials) * (c + 1) / chunks);
    for (int trial = lo; trial < hi; ++trial) {
      // Floyd's algorithm: k distinct positions, uniformly.
      pos.clear();
      for (std::int64_t j = T - k; j < T; ++j) {
        const std::int64_t t =
            std::uniform_int_distribution<std::int64_t>(0, j)(rng);
        const auto it = std::lower_bound(pos.begin(), pos.end(), t);
        if (it != pos.end() && *it == t) {
          pos.insert(std::lower_bound(pos.begin(), pos.end(), j), j);
        } else {
          pos.insert(it, t);
        }
      }
      const std::int64_t lead =
          std::uniform_int_distribution<int>(0, 1)(rng) ? 1 : -1;
      double sq = 0.0;
      std::size_t live = 0;
      for (std::int64_t t = pos[0]; t < T; ++t) {
        while (live < pos.size() && pos[live] <= t) ++live;
        double x = 0.0, sign = static_cast<double>(lead);
        for (std::size_t i = 0; i < live; ++i) {
          x += sign * r[t - pos[i]];
          sign = -sign;
        }
        sq += x * x;
      }
      chunk_sum[c] += sq;
      if (sq > chunk_max[c]) {
        chunk_max[c] = sq;
        chunk_pos[c] = pos;
        chunk_sign[c] = lead;
      }
    }
  });

  EmpiricalLower out;
  double best = -1.0, total = 0.0;
  int arg = 0;
  for (int c = 0; c < chunks; ++c) {
    total += chunk_sum[c];
    if (chunk_max[c] > best) {
      best = chunk_max[c];
      arg = c;
    }
  }
  out.max_norm = std::sqrt(best);
  out.mean_square = total / trials;
  out.witness = SensitivityVector(
      AlternatingFromPositions(T, chunk_pos[arg]) * chunk_sign[arg]);
  return out;
}

namespace {

SensResult SqrtSens(const SquareRootToeplitz& f, const Factorization& whole,
                    int p, const SetParams& set, SensMethod method,
                    const SensOptions& options) {
  if (method == SensMethod::kExactDp) {
    throw UsageError("exact_dp applies to tree factorizations only");
  }
  if (method == SensMethod::kBruteForce) {
    return BruteForceSens(whole, p, set, options.limits);
  }
  const std::int64_t T = f.T();
  if (p == 1) {
    double col = 0.0;
    for (double c : f.coeffs()) col += c;
    SensResult out;
    out.method = MethodName(method);
    out.lower = col;
    out.upper = static_cast<double>(std::min(set.k, set.D * T)) * col;
    out.closed_forms.push_back({"l1-triangle", col, out.upper});
    if (std::min(set.k, set.D * T) == 1) out.value = col;
    out.note = "sens_1 bounded by k * ||R||_{1->1}";
    return out;
  }
  SensResult out = ToeplitzSensBound(f, set);
  out.method = MethodName(method);
  if (out.exact()) return out;
  if (!options.refine_lower && method == SensMethod::kClosedBound) return out;

  const double work_cap = 2e8;
  if (method == SensMethod::kClosedBound && T <= options.limits.max_alternating_length) {
    double count;
    if (set.D == 1) {
      count = static_cast<double>(
          CountS1k(static_cast<int>(T), static_cast<int>(std::min(set.k, T))));
    } else {
      count = std::pow(2.0 * set.D + 1.0, static_cast<double>(T));
    }
    if (count * static_cast<double>(T * T) <= work_cap &&
        count <= static_cast<double>(options.limits.max_bounded_candidates)) {
      const SensResult brute = BruteForceSens(whole, p, set, options.limits);
      out.lower = std::max(out.lower, *brute.value);
      out.witness = brute.witness;
      out.note = "lower bound from exhaustive enumeration";
      return out;
    }
  }
  const std::int64_t split = std::min(set.k / set.D, T);
  if (split >= 1 && static_cast<double>(options.trials) *
                            static_cast<double>(split) *
                            static_cast<double>(T) <= 20 * work_cap) {
    const EmpiricalLower e = EmpiricalLowerEstimate(
        f, SetParams{1, split, T}, options.trials, options.seed);
    const double lower = static_cast<double>(set.D) * e.max_norm;
    if (lower > out.lower) {
      out.lower = lower;
      out.witness = SensitivityVector(e.witness * set.D);
    }
    out.note = "lower bound from sampling; mean ||R delta||^2 = " +
               std::to_string(e.mean_square);
  } else if (method == SensMethod::kEmpirical) {
    throw FeasibilityError("empirical estimate exceeds the work budget");
  }
  return out;
}

}  // namespace

SensResult ComputeSensitivity(const Factorization& f, int p,
                              const SetParams& set, SensMethod method,
                              const SensOptions& options) {
  CheckNormOrder(p);
  if (set.T != HorizonOf(f)) {
    throw UsageError("set T does not match the factorization");
  }
  if (const auto* tree = std::get_if<BaryTree>(&f)) {
    if (method == SensMethod::kBruteForce) {
      return BruteForceSens(f, p, set, options.limits);
    }
    if (method == SensMethod::kEmpirical) {
      throw UsageError("empirical method applies to the square-root "
                       "factorization only");
    }
    return TreeSens(*tree, p, set, method, options.dp);
  }
  if (const auto* s = std::get_if<SquareRootToeplitz>(&f)) {
    return SqrtSens(*s, f, p, set, method, options);
  }
  if (method == SensMethod::kBruteForce) {
    return BruteForceSens(f, p, set, options.limits);
  }
  if (method != SensMethod::kClosedBound) {
    throw UsageError("the naive factorization supports bound and brute only");
  }
  // Every prefix of delta is bounded by both D and ||delta||_1.
  const std::int64_t m = std::min(set.D, set.k);
  SensResult out;
  out.method = MethodName(method);
  out.value = static_cast<double>(m) *
              std::pow(static_cast<double>(set.T), 1.0 / p);
  out.lower = out.upper = *out.value;
  SensitivityVector w = SensitivityVector::Zero(set.T);
  w[0] = m;
  out.witness = w;
  out.closed_forms.push_back({"naive", *out.value, *out.value});
  return out;
}

}  // namespace dyncount
