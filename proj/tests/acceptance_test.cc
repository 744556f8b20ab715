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

// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero if any fails.

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "dyncount/bounds_report.h"
#include "dyncount/estimators.h"
#include "dyncount/factorizations.h"
#include "dyncount/mechanisms.h"
#include "dyncount/sensitivity.h"
#include "dyncount/stream_model.h"
#include "stream_gen.h"

namespace dyncount {
namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

// Records the first few failures and counts the rest.
class Checker {
 public:
  void Expect(bool ok, const std::string& what) {
    ++checks_;
    if (ok) return;
    ++failures_;
    if (failures_ <= 3) first_ += (first_.empty() ? "" : "; ") + what;
  }
  Outcome Done(const std::string& summary) const {
    std::ostringstream os;
    os << checks_ << " checks, " << failures_ << " failures";
    if (!summary.empty()) os << ", " << summary;
    if (!first_.empty()) os << " [" << first_ << "]";
    return {failures_ == 0 && checks_ > 0, os.str()};
  }

 private:
  std::int64_t checks_ = 0;
  std::int64_t failures_ = 0;
  std::string first_;
};

std::int64_t Pow(std::int64_t b, int e) {
  std::int64_t v = 1;
  while (e-- > 0) v *= b;
  return v;
}

std::string Str(double x) {
  std::ostringstream os;
  os.precision(6);
  os << x;
  return os.str();
}

// Maximum odd counted nodes per ball count over all 2^(b^h) leaf subsets,
// walked in Gray-code order so each step flips one leaf and its ancestors.
void GrayCodeParity(int b, int h, std::vector<std::int64_t>& full,
                    std::vector<std::int64_t>& reduced) {
  const int n = static_cast<int>(Pow(b, h));
  full.assign(n + 1, 0);
  reduced.assign(n + 1, 0);
  std::vector<std::vector<std::uint8_t>> parity(h + 1);
  std::vector<std::int64_t> span(h + 1);
  for (int l = 0; l <= h; ++l) {
    span[l] = Pow(b, l);
    parity[l].assign(n / span[l], 0);
  }
  std::int64_t odd_full = 0, odd_reduced = 0;
  int balls = 0;
  const std::uint64_t end = std::uint64_t{1} << n;
  std::uint64_t gray = 0;
  for (std::uint64_t i = 1; i < end; ++i) {
    const int leaf = std::countr_zero(i);
    gray ^= std::uint64_t{1} << leaf;
    balls += (gray >> leaf & 1) ? 1 : -1;
    for (int l = 0; l <= h; ++l) {
      const std::int64_t idx = leaf / span[l];
      const int delta = parity[l][idx] ? -1 : 1;
      parity[l][idx] ^= 1;
      odd_full += delta;
      if (l == h || idx % b != (b - 1) / 2) odd_reduced += delta;
    }
    full[balls] = std::max(full[balls], odd_full);
    reduced[balls] = std::max(reduced[balls], odd_reduced);
  }
}

Outcome DpMatchesExhaustiveOracle() {
  Checker c;
  for (int b : {2, 3}) {
    for (int h = 0; h <= 3; ++h) {
      std::vector<std::int64_t> full, reduced;
      GrayCodeParity(b, h, full, reduced);
      for (std::int64_t k = 1; k <= Pow(b, h); ++k) {
        const std::string at = "b=" + std::to_string(b) + " h=" + std::to_string(h) +
                               " k=" + std::to_string(k);
        c.Expect(ParityDpFull(b, h, k) == full[k], "full " + at);
        c.Expect(ParityDpReduced(b, h, k) == reduced[k], "reduced " + at);
      }
    }
  }
  return c.Done("b in {2,3}, h <= 3");
}

Outcome TreeBracketsHold() {
  Checker c;
  for (int b : {2, 3, 5}) {
    for (int h = 1; h <= 5; ++h) {
      const std::int64_t T = Pow(b, h);
      const std::int64_t K = std::min<std::int64_t>(200, T);
      const auto full = TreeParityDp(b, T, false, K).best();
      const auto red = TreeParityDp(b, T, true, K).best();
      std::int64_t run_full = 0, run_red = 0;
      for (std::int64_t k = 1; k <= K; ++k) {
        int a = 0;
        while (Pow(b, a) < k) ++a;
        const double ba1 = std::pow(b, a - 1);
        const double base = static_cast<double>(k) * (h - a + 1);
        const double up_full = base + (Pow(b, a) - 1) / (b - 1);
        const double up_red = base + ba1;
        const double lo_red = k * (h - a + 1 - 1.0 / b);
        const std::string at = "b=" + std::to_string(b) + " h=" + std::to_string(h) +
                               " k=" + std::to_string(k);
        run_full = std::max(run_full, full[k]);
        run_red = std::max(run_red, red[k]);
        c.Expect(base <= full[k] && full[k] <= up_full, "full " + at);
        c.Expect(lo_red <= red[k] + 1e-9 && red[k] <= up_red + 1e-9, "reduced " + at);
        // The same brackets on the running maximum, i.e. on sens_p^p over
        // S_{1,k}.
        c.Expect(std::max(base, ba1 * (h - a + 2)) <= run_full && run_full <= up_full,
                 "full running max " + at);
        if (b >= 3) {
          c.Expect(std::max(lo_red, ba1 * (h - a + 2 - 1.0 / b)) <= run_red + 1e-9 &&
                       run_red <= up_red + 1e-9,
                   "reduced running max " + at);
        }
      }
    }
  }
  return c.Done("b in {2,3,5}, h <= 5, k <= min(200, b^h)");
}

Outcome ToeplitzBoundSound() {
  Checker c;
  double worst = 0.0;
  for (std::int64_t T = 1; T <= 18; ++T) {
    const SquareRootToeplitz f(T);
    const double col = Norms(f).r_one_to_two;
    for (std::int64_t k = 1; k <= std::min<std::int64_t>(T, 4); ++k) {
      const double bf = *BruteForceSens(f, 2, SetParams::Make(1, k, T)).value;
      const double bound = std::sqrt(static_cast<double>(k)) * col;
      worst = std::max(worst, bf / bound);
      c.Expect(bf <= bound + 1e-12, "T=" + std::to_string(T) + " k=" + std::to_string(k));
    }
  }
  for (std::int64_t T = 1; T <= 7; ++T) {
    const SquareRootToeplitz f(T);
    const double col = Norms(f).r_one_to_two;
    for (std::int64_t D = 1; D <= 2; ++D) {
      for (std::int64_t k = 1; k <= 4; ++k) {
        const double bf = *BruteForceSens(f, 2, SetParams::Make(D, k, T)).value;
        const double bound = std::sqrt(static_cast<double>(D * k)) * col;
        worst = std::max(worst, bf / bound);
        c.Expect(bf <= bound + 1e-12, "T=" + std::to_string(T) + " D=" +
                                          std::to_string(D) + " k=" + std::to_string(k));
      }
    }
  }
  return c.Done("largest sens/bound ratio " + Str(worst));
}

Outcome GramProperties() {
  Checker c;
  const std::int64_t T = 64;
  const SquareRootToeplitz s(T);
  std::vector<double> g(T * T);
  for (std::int64_t i = 0; i < T; ++i) {
    for (std::int64_t j = 0; j < T; ++j) g[i * T + j] = s.GramEntry(i, j);
  }
  for (std::int64_t i = 0; i < T; ++i) {
    for (std::int64_t j = 0; j < T; ++j) {
      const std::string at = "(" + std::to_string(i) + "," + std::to_string(j) + ")";
      c.Expect(g[i * T + j] == g[j * T + i], "symmetry " + at);
      if (j + 1 < T && i <= j) c.Expect(g[i * T + j] >= g[i * T + j + 1], "row " + at);
      if (i + 1 < T && j + 1 < T) {
        c.Expect(g[i * T + j] >= g[(i + 1) * T + j + 1], "diagonal " + at);
      }
    }
  }
  for (std::int64_t n : {16, 256, 4096}) {
    const SquareRootToeplitz f(n);
    for (std::int64_t i = 0; i < n; ++i) {
      const double lg = std::log(static_cast<double>(n - i)) / std::numbers::pi;
      const double d = f.GramDiagonal(i);
      c.Expect(1.0 + lg <= d + 1e-12 && d <= 1.067 + lg,
               "diagonal bracket T=" + std::to_string(n) + " i=" + std::to_string(i));
    }
  }
  return c.Done("T=64 exhaustive, diagonal bracket at T in {16,256,4096}");
}

bool Near(double a, double b) {
  return std::abs(a - b) <= 1e-12 * std::max(1.0, std::abs(b));
}

Outcome TreeNormClosedForms() {
  Checker c;
  for (int b : {2, 3, 5, 7}) {
    for (int h = 1; h <= 5; ++h) {
      const std::int64_t T = Pow(b, h);
      const double bd = b;
      const std::string at = "b=" + std::to_string(b) + " h=" + std::to_string(h);
      const auto plain = Norms(BaryTree(b, T, TreeVariant::kPlain));
      c.Expect(Near(plain.l_two_to_inf * plain.l_two_to_inf, (bd - 1) * h), "plain max " + at);
      c.Expect(Near(plain.l_frobenius_over_sqrtT * plain.l_frobenius_over_sqrtT,
                    (bd - 1) * h / 2 + std::pow(bd, -h)),
               "plain mean " + at);
      if (b % 2 == 0) continue;
      for (TreeVariant v : {TreeVariant::kSubtract, TreeVariant::kSubtractReduced}) {
        const auto n = Norms(BaryTree(b, T, v));
        c.Expect(Near(n.l_two_to_inf * n.l_two_to_inf, 1 + h * (bd - 1) / 2),
                 "subtract max " + at);
        c.Expect(Near(n.l_frobenius_over_sqrtT * n.l_frobenius_over_sqrtT,
                      (bd * (1 - 1 / (bd * bd)) * h + 2 * (1 + std::pow(bd, -h))) / 4),
                 "subtract mean " + at);
      }
    }
  }
  for (std::int64_t T : {10, 50, 200}) {
    const BaryTree tree(3, T, TreeVariant::kSubtract);
    const auto n = Norms(tree);
    const double b = 3, h = tree.h();
    const std::string at = "T=" + std::to_string(T);
    c.Expect(n.l_two_to_inf <= std::sqrt(((b - 1) * h + 2) / 2) + 1e-12, "max " + at);
    c.Expect(n.l_frobenius_over_sqrtT <=
                 std::sqrt(b * (1 - 1 / (b * b)) * h + 2 * (1 + b * b + std::pow(b, -h))) / 2 +
                     1e-12,
             "mean " + at);
  }
  return c.Done("complete trees b in {2,3,5,7}, 1 <= h <= 5; b=3 at T in {10,50,200}");
}

Outcome LeadingConstants() {
  Checker c;
  struct Case {
    const char* name;
    double (*fn)(int);
    int b;
    double value;
  };
  const Case cases[] = {{"zCDP MaxSE", TreeConstantZcdpMax, 5, 0.609},
                        {"zCDP MeanSE", TreeConstantZcdpMean, 7, 0.466},
                        {"pure MaxSE", TreeConstantPureMax, 17, 0.342},
                        {"pure MeanSE", TreeConstantPureMean, 19, 0.249}};
  std::string summary;
  for (const Case& k : cases) {
    int best_b = 0;
    double best = std::numeric_limits<double>::infinity();
    for (int b = 3; b <= 31; b += 2) {
      if (k.fn(b) < best) best = k.fn(b), best_b = b;
    }
    c.Expect(best_b == k.b, std::string(k.name) + " argmin " + std::to_string(best_b));
    c.Expect(std::abs(best - k.value) <= 1e-3, std::string(k.name) + " value " + Str(best));
    summary += (summary.empty() ? "" : " ") + std::to_string(best_b) + ":" + Str(best);
  }
  return c.Done(summary);
}

Outcome EmpiricalErrorMatchesAnalytic() {
  Checker c;
  const auto budget = PrivacyBudget::Zcdp(0.5);
  const Factorization fs[] = {NaiveFactorization(64),
                              BaryTree(3, 27, TreeVariant::kSubtract),
                              SquareRootToeplitz(64)};
  double worst = 0.0;
  std::uint64_t seed = 1;
  for (const auto& f : fs) {
    const auto set = SetParams::Make(1, 1, HorizonOf(f));
    const auto an = AnalyticError(f, budget, set);
    const auto em = EmpiricalError(f, budget, set, 100'000, seed++);
    const double dmax = std::abs(em.max_se - an.max_se) / an.max_se;
    const double dmean = std::abs(em.mean_se - an.mean_se) / an.mean_se;
    worst = std::max({worst, dmax, dmean});
    c.Expect(dmax < 0.02, Label(f) + " MaxSE deviation " + Str(dmax));
    c.Expect(dmean < 0.02, Label(f) + " MeanSE deviation " + Str(dmean));
  }
  return c.Done("largest relative deviation " + Str(worst));
}

// Certified concave upper bounds U(j) on sens_2 over S_{1,j}.
std::function<double(std::int64_t)> CertifiedUpper(const Factorization& f) {
  const std::int64_t T = HorizonOf(f);
  if (std::holds_alternative<NaiveFactorization>(f)) {
    return [T](std::int64_t j) { return j == 0 ? 0.0 : std::sqrt(double(T)); };
  }
  if (std::holds_alternative<SquareRootToeplitz>(f)) {
    const double col = Norms(f).r_one_to_two;
    return [col](std::int64_t j) { return std::sqrt(double(j)) * col; };
  }
  return [f, T](std::int64_t j) {
    if (j == 0) return 0.0;
    const auto set = SetParams::Make(1, std::min(j, T), T);
    return ComputeSensitivity(f, 2, set, SensMethod::kClosedBound).upper;
  };
}

Outcome ReductionSandwich() {
  Checker c;
  std::int64_t vectors = 0;
  for (int T = 1; T <= 6; ++T) {
    const Factorization fs[] = {NaiveFactorization(T), SquareRootToeplitz(T),
                                BaryTree(2, T, TreeVariant::kPlain)};
    for (const auto& f : fs) {
      std::vector<double> unit(T + 1, 0.0);
      for (std::int64_t j = 1; j <= T; ++j) {
        unit[j] = *BruteForceSens(f, 2, SetParams::Make(1, j, T)).value;
      }
      const auto base = [&](std::int64_t j) { return unit[std::min<std::int64_t>(j, T)]; };
      const auto upper = CertifiedUpper(f);
      for (std::int64_t D = 1; D <= 3; ++D) {
        for (std::int64_t k = 1; k <= 6; ++k) {
          const auto set = SetParams::Make(D, k, T);
          const double exact = *BruteForceSens(f, 2, set).value;
          const auto r = ReductionBounds(base, upper, set);
          const std::string at = Label(f) + " T=" + std::to_string(T) + " D=" +
                                 std::to_string(D) + " k=" + std::to_string(k);
          c.Expect(std::abs(r.lower - D * base(k / D)) <= 1e-12, "lower formula " + at);
          c.Expect(r.lower <= exact + 1e-9, "lower " + at);
          c.Expect(exact <= r.upper + 1e-9, "upper " + at);
        }
      }
    }
    for (std::int64_t D = 1; D <= 3; ++D) {
      for (std::int64_t k = 1; k <= 6; ++k) {
        const auto set = SetParams::Make(D, k, T);
        ForEachSDk(T, D, k, [&](const SensitivityVector& v) {
          ++vectors;
          const auto d = Decompose(v, set);
          SensitivityVector sum = SensitivityVector::Zero(T);
          std::int64_t weight = 0;
          bool ok = static_cast<std::int64_t>(d.parts.size()) <= D;
          for (std::size_t i = 0; i < d.parts.size(); ++i) {
            ok = ok && IsAlternating(d.parts[i]) && L1Norm(d.parts[i]) == d.part_weights[i];
            sum += d.parts[i];
            weight += d.part_weights[i];
          }
          ok = ok && sum == v && weight == L1Norm(v);
          c.Expect(ok, "decomposition T=" + std::to_string(T) + " D=" + std::to_string(D));
          return true;
        });
      }
    }
  }
  return c.Done(std::to_string(vectors) + " vectors decomposed");
}

SensitivityVector ToVector(const std::vector<std::int64_t>& v) {
  SensitivityVector out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i];
  return out;
}

SensitivityVector Difference(const std::vector<std::int64_t>& x,
                             const std::vector<std::int64_t>& y) {
  std::vector<std::int64_t> d(x.size());
  for (std::size_t t = 0; t < x.size(); ++t) d[t] = x[t] - y[t];
  return ToVector(d);
}

Outcome NeighbouringStreams() {
  Checker c;
  constexpr std::int64_t kPairs = 2000;
  constexpr int kMaxDegree = 3;
  std::int64_t items = 0, degree = 0, triangles = 0;
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> horizon(1, 50), nodes(3, 10);
  while (items < kPairs || degree < kPairs || triangles < kPairs) {
    const int T = horizon(rng);
    const auto x = testing::RandomItemStream(rng, T, 6, 3);
    const auto dx = DiffStreamCountDistinct(x);
    for (const auto& [item, flips] : Flippancies(x)) {
      const auto d = Difference(dx, DiffStreamCountDistinct(testing::WithoutItem(x, item)));
      c.Expect(IsAlternating(d), "item not alternating");
      c.Expect(L1Norm(d) == flips, "item sparsity differs from flippancy");
      c.Expect(IsMember(d, SetParams::Make(1, std::max<std::int64_t>(1, flips), T)),
               "item outside S_{1,k}");
      ++items;
    }
    const int n = nodes(rng);
    const auto g = testing::RandomGraphStream(rng, T, n, 3, kMaxDegree);
    const auto dg = DiffStreamDegree(g);
    const auto tg = DiffStreamTriangles(g);
    const auto tri = TriangleContributions(g);
    c.Expect(MaxDegree(g) <= kMaxDegree, "degree bound exceeded");
    for (const auto& [e, contribution] : DegreeContributions(g)) {
      const auto y = testing::WithoutEdge(g, e);
      const auto dh = DiffStreamDegree(y);
      bool ok = true;
      for (int v = 0; v < n; ++v) {
        const auto d = Difference(dg[v], dh[v]);
        if (v != e.first && v != e.second) {
          ok = ok && L1Norm(d) == 0;
        } else {
          ok = ok && IsAlternating(d) && L1Norm(d) <= contribution &&
               IsMember(d, SetParams::Make(1, std::max<std::int64_t>(1, contribution), T));
        }
      }
      c.Expect(ok, "degree pair");
      ++degree;
      const auto d = Difference(tg, DiffStreamTriangles(y));
      c.Expect(IsMember(d, SetParams::Make(kMaxDegree,
                                           std::max<std::int64_t>(1, tri.at(e)), T)),
               "triangle delta outside S_{D,k}");
      ++triangles;
    }
  }
  return c.Done(std::to_string(items) + " item, " + std::to_string(degree) + " degree, " +
                std::to_string(triangles) + " triangle pairs");
}

Outcome SquareRootLowerBound() {
  Checker c;
  const std::int64_t T = std::int64_t{1} << 14, k = 16;
  const SquareRootToeplitz f(T);
  const auto est = EmpiricalLowerEstimate(f, SetParams::Make(1, k, T), 10'000, 77);
  const double target = 0.75 * (k / std::numbers::pi) * std::log(double(T) / k);
  c.Expect(est.mean_square >= target, "mean square " + Str(est.mean_square));
  return c.Done("mean square " + Str(est.mean_square) + " vs " + Str(target));
}

EstimateConfig ZeroNoise(Problem problem, const FactorizationSpec& spec, std::int64_t k,
                         std::optional<std::int64_t> D = {}) {
  EstimateConfig c;
  c.problem = problem;
  c.factorization = spec;
  c.budget = PrivacyBudget::Zcdp(0.5);
  c.k = k;
  c.D = D;
  c.run.noise_scale_override = 0.0;
  return c;
}

Outcome ZeroNoiseExactness() {
  Checker c;
  const FactorizationSpec specs[] = {FactorizationSpec::Parse("naive", 2, "plain"),
                                     FactorizationSpec::Parse("sqrt", 2, "plain"),
                                     FactorizationSpec::Parse("tree", 2, "plain"),
                                     FactorizationSpec::Parse("tree", 3, "subtract"),
                                     FactorizationSpec::Parse("tree", 5, "reduced")};
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<int> horizon(1, 200), nodes(2, 12);
  int runs = 0;
  for (int trial = 0; trial < 40; ++trial) {
    const auto& spec = specs[trial % 5];
    const int T = horizon(rng), n = nodes(rng);
    const auto s = testing::RandomItemStream(rng, T, n, 3);
    const std::int64_t k = std::max<std::int64_t>(1, TrackMaxContribution(s));
    const auto cd = Estimate(s, ZeroNoise(Problem::kCountDistinct, spec, k));
    const auto truth = testing::DirectCountDistinct(s);
    bool ok = cd.outputs.size() == truth.size();
    for (std::size_t t = 0; ok && t < truth.size(); ++t) ok = cd.outputs[t] == truth[t];
    c.Expect(ok, "countdistinct " + cd.mechanism);

    const auto g = testing::RandomGraphStream(rng, T, n, 3, n - 1);
    const std::int64_t kd =
        std::max<std::int64_t>(1, TrackMaxContribution(g, ContributionMode::kDegree));
    const auto deg = Estimate(g, ZeroNoise(Problem::kDegreeCount, spec, kd));
    const auto degrees = testing::DirectDegrees(g);
    ok = deg.node_outputs.size() == degrees.size();
    for (std::size_t v = 0; ok && v < degrees.size(); ++v) {
      for (std::size_t t = 0; ok && t < degrees[v].size(); ++t) {
        ok = deg.node_outputs[v][t] == degrees[v][t];
      }
    }
    c.Expect(ok, "degree " + deg.mechanism);

    const std::int64_t kt =
        std::max<std::int64_t>(1, TrackMaxContribution(g, ContributionMode::kTriangle));
    const std::int64_t D = std::max<std::int64_t>(1, MaxDegree(g));
    const auto tri = Estimate(g, ZeroNoise(Problem::kTriangleCount, spec, kt, D));
    const auto counts = testing::DirectTriangles(g);
    ok = tri.outputs.size() == counts.size();
    for (std::size_t t = 0; ok && t < counts.size(); ++t) ok = tri.outputs[t] == counts[t];
    c.Expect(ok, "triangles " + tri.mechanism);
    runs += 3;

    for (std::int64_t cap : {0, 1, 2, 5}) {
      const auto once = Truncate(s, ContributionMode::kFlippancy, cap);
      const auto twice = Truncate(once.stream, ContributionMode::kFlippancy, cap);
      c.Expect(TrackMaxContribution(once.stream) <= cap, "flippancy bound");
      c.Expect(twice.stream == once.stream && twice.log.empty(), "item idempotence");
      const auto gonce = Truncate(g, ContributionMode::kDegree, cap);
      c.Expect(Truncate(gonce.stream, ContributionMode::kDegree, cap).stream == gonce.stream,
               "graph idempotence");
    }
    const auto fixed = Truncate(s, ContributionMode::kFlippancy, k);
    c.Expect(fixed.stream == s && fixed.log.empty(), "item fixed point");
    c.Expect(Truncate(g, ContributionMode::kDegree, kd).stream == g, "graph fixed point");
  }
  return c.Done(std::to_string(runs) + " estimator runs");
}

struct Criterion {
  const char* name;
  Outcome (*run)();
};

}  // namespace
}  // namespace dyncount

int main() {
  using namespace dyncount;
  const Criterion criteria[] = {
      {"parity DP equals exhaustive placement oracle", DpMatchesExhaustiveOracle},
      {"tree sensitivity brackets", TreeBracketsHold},
      {"Toeplitz sensitivity bound is sound", ToeplitzBoundSound},
      {"square-root Gram matrix properties", GramProperties},
      {"tree norm closed forms", TreeNormClosedForms},
      {"tree leading constants", LeadingConstants},
      {"empirical error matches analytic error", EmpiricalErrorMatchesAnalytic},
      {"bounded-to-alternating reduction sandwich", ReductionSandwich},
      {"neighbouring stream differences lie in the sensitivity sets", NeighbouringStreams},
      {"square-root empirical lower bound", SquareRootLowerBound},
      {"zero-noise estimators are exact", ZeroNoiseExactness},
  };
  int failed = 0, index = 0;
  for (const Criterion& c : criteria) {
    ++index;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s %2d %s: %s (%.1fs)\n", o.pass ? "PASS" : "FAIL", index, c.name,
                o.detail.c_str(), secs);
    std::fflush(stdout);
    failed += !o.pass;
  }
  std::printf("%d/%d criteria passed\n", index - failed, index);
  return failed == 0 ? 0 : 1;
}
