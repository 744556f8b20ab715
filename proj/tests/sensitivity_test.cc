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
#include <bit>
#include <cmath>
#include <cstdint>
#include <vector>

#include "dyncount/errors.h"
#include "dyncount/factorizations.h"
#include "dyncount/stream_model.h"
#include "gtest/gtest.h"
#include "test_util.h"

namespace dyncount {
namespace {

using ::dyncount::testing::ToStd;

std::int64_t Pow(std::int64_t b, int e) {
  std::int64_t v = 1;
  while (e-- > 0) v *= b;
  return v;
}

// best[j]: maximum odd counted nodes over all j-subsets of the b^h leaves,
// by scanning every subset. Reduced trees skip child (b-1)/2 of each parent.
std::vector<std::int64_t> ExhaustiveParity(int b, int h, bool reduced) {
  const int n = static_cast<int>(Pow(b, h));
  std::vector<std::int64_t> best(n + 1, 0);
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    std::int64_t odd = 0;
    for (int l = 0; l <= h; ++l) {
      const int span = static_cast<int>(Pow(b, l));
      for (int i = 0; i * span < n; ++i) {
        if (reduced && l < h && i % b == (b - 1) / 2) continue;
        const std::uint32_t bits =
            span == 32 ? mask : ((mask >> (i * span)) & ((1u << span) - 1));
        odd += std::popcount(bits) & 1;
      }
    }
    const int j = std::popcount(mask);
    best[j] = std::max(best[j], odd);
  }
  return best;
}

// Odd counted nodes of the truncated tree for a set of leaf positions.
std::int64_t OddNodes(const BaryTree& tree, const std::vector<std::int64_t>& leaves) {
  SensitivityVector x = SensitivityVector::Zero(tree.T());
  for (auto leaf : leaves) x[leaf] = 1;
  const Eigen::VectorXd r = ApplyRight(tree, x);
  std::int64_t odd = 0;
  for (Eigen::Index i = 0; i < r.size(); ++i) {
    odd += static_cast<std::int64_t>(std::llround(r[i])) & 1;
  }
  return odd;
}

TEST(ParityDpTest, Examples) {
  EXPECT_EQ(ParityDpFull(2, 0, 1), 1);
  EXPECT_EQ(ParityDpFull(2, 0, 0), 0);
  for (int b : {2, 3, 5}) {
    for (int h = 0; h <= 4; ++h) {
      EXPECT_EQ(ParityDpFull(b, h, 1), h + 1);
      EXPECT_EQ(ParityDpReduced(b, h, 1), h + 1);
    }
  }
  EXPECT_EQ(ParityDpFull(2, 2, 2), 4);
  EXPECT_EQ(ParityDpReduced(2, 1, 1), 2);
  const auto f = ParityDpReduced(3, 2, 3);
  EXPECT_GE(f, 5);
  EXPECT_LE(f, 7);
  EXPECT_THROW(ParityDpFull(2, 2, 5), UsageError);
}

TEST(ParityDpTest, MatchesExhaustiveSubsets) {
  for (int b : {2, 3, 4}) {
    for (int h = 0; Pow(b, h) <= 16; ++h) {
      for (bool reduced : {false, true}) {
        const auto oracle = ExhaustiveParity(b, h, reduced);
        for (std::int64_t k = 1; k <= Pow(b, h); ++k) {
          const auto dp = reduced ? ParityDpReduced(b, h, k) : ParityDpFull(b, h, k);
          ASSERT_EQ(dp, oracle[k]) << b << " " << h << " " << k << " " << reduced;
        }
      }
    }
  }
}

TEST(ParityDpTest, BudgetIsEnforced) {
  DpLimits tight;
  tight.max_work = 100;
  EXPECT_THROW(ParityDpFull(3, 5, 200, tight), FeasibilityError);
  DpLimits narrow;
  narrow.max_branching = 4;
  EXPECT_THROW(ParityDpFull(5, 2, 3, narrow), FeasibilityError);
}

TEST(TreeParityDpTest, PlacementsRescoreToTheTable) {
  for (int b : {2, 3, 5}) {
    for (std::int64_t T : {7, 9, 25, 31, 100}) {
      for (bool reduced : {false, true}) {
        if (reduced && b % 2 == 0) continue;
        const BaryTree tree(b, T, reduced ? TreeVariant::kSubtractReduced
                                          : TreeVariant::kPlain);
        const std::int64_t K = std::min<std::int64_t>(T, 12);
        const TreeParityDp dp(b, T, reduced, K);
        for (std::int64_t j = 0; j <= K; ++j) {
          const auto leaves = dp.Placement(j);
          ASSERT_EQ(static_cast<std::int64_t>(leaves.size()), j);
          ASSERT_TRUE(std::is_sorted(leaves.begin(), leaves.end()));
          ASSERT_TRUE(std::adjacent_find(leaves.begin(), leaves.end()) == leaves.end());
          ASSERT_EQ(OddNodes(tree, leaves), dp.best()[j])
              << b << " " << T << " " << j << " " << reduced;
        }
      }
    }
  }
}

std::vector<BaryTree> SmallTrees(std::int64_t T) {
  std::vector<BaryTree> out;
  for (int b : {2, 3, 5}) out.emplace_back(b, T, TreeVariant::kPlain);
  for (int b : {3, 5}) {
    out.emplace_back(b, T, TreeVariant::kSubtract);
    out.emplace_back(b, T, TreeVariant::kSubtractReduced);
  }
  return out;
}

TEST(TreeSensTest, ExactDpMatchesBruteForceOnAnyHorizon) {
  for (std::int64_t T = 1; T <= 13; ++T) {
    for (const auto& tree : SmallTrees(T)) {
      for (std::int64_t k = 1; k <= std::min<std::int64_t>(T, 5); ++k) {
        for (int p : {1, 2}) {
          const auto set = SetParams::Make(1, k, T);
          const auto dp = TreeSens(tree, p, set, SensMethod::kExactDp);
          const auto bf = BruteForceSens(tree, p, set);
          ASSERT_TRUE(dp.exact());
          ASSERT_NEAR(*dp.value, *bf.value, 1e-9)
              << Label(tree) << " T=" << T << " k=" << k << " p=" << p;
          ASSERT_TRUE(dp.witness);
          EXPECT_TRUE(IsMember(*dp.witness, set));
          const Eigen::VectorXd r = ApplyRight(tree, *dp.witness);
          EXPECT_NEAR(p == 1 ? r.lpNorm<1>() : r.norm(), *dp.value, 1e-9);
        }
      }
    }
  }
}

TEST(TreeSensTest, Examples) {
  const BaryTree plain(2, 8, TreeVariant::kPlain);
  EXPECT_DOUBLE_EQ(
      *TreeSens(plain, 2, SetParams::Make(1, 1, 8), SensMethod::kExactDp).value, 2.0);

  const BaryTree reduced(3, 9, TreeVariant::kSubtractReduced);
  const auto r = TreeSens(reduced, 1, SetParams::Make(1, 9, 9), SensMethod::kClosedBound);
  const auto any_t = std::find_if(r.closed_forms.begin(), r.closed_forms.end(),
                                  [](const Bracket& b) { return b.name == "reduced-tree-any-T"; });
  ASSERT_NE(any_t, r.closed_forms.end());
  EXPECT_DOUBLE_EQ(any_t->upper, 18.0);

  for (int p : {1, 2}) {
    const auto d2 = TreeSens(plain, p, SetParams::Make(2, 2, 8), SensMethod::kExactDp);
    EXPECT_FALSE(d2.exact());
    EXPECT_DOUBLE_EQ(d2.lower, 2 * std::pow(4.0, 1.0 / p));
    EXPECT_FALSE(d2.note.empty());
  }
}

TEST(TreeSensTest, BracketsContainExactValues) {
  for (int b : {2, 3, 5}) {
    for (int h = 1; Pow(b, h) <= 625; ++h) {
      const std::int64_t T = Pow(b, h);
      const std::int64_t K = std::min<std::int64_t>(T, 60);
      const auto full = TreeParityDp(b, T, false, K).best();
      const auto red = TreeParityDp(b, T, true, K).best();
      for (std::int64_t k = 1; k <= K; ++k) {
        int alpha = 0;
        while (Pow(b, alpha) < k) ++alpha;
        ASSERT_LE(k * (h - alpha + 1), full[k]);
        ASSERT_LE(full[k], k * (h - alpha + 1) + (Pow(b, alpha) - 1) / (b - 1));
        ASSERT_LE(k * (h - alpha + 1 - 1.0 / b), red[k] + 1e-9);
        ASSERT_LE(red[k], k * (h - alpha + 1) + Pow(b, alpha) / b + (alpha == 0));
      }
    }
  }
}

TEST(TreeSensTest, ClosedFormsBracketTheDp) {
  for (std::int64_t T : {9, 20, 27, 64, 81, 100}) {
    for (const auto& tree : SmallTrees(T)) {
      for (std::int64_t k : {1, 2, 3, 5, 8}) {
        if (k > T) continue;
        for (std::int64_t D : {1, 2, 3}) {
          for (int p : {1, 2}) {
            const auto set = SetParams::Make(D, k, T);
            const auto exact = TreeSens(tree, p, set, SensMethod::kExactDp);
            const auto closed = TreeSens(tree, p, set, SensMethod::kClosedBound);
            EXPECT_LE(closed.lower, exact.Certified() + 1e-9) << Label(tree);
            EXPECT_GE(closed.upper, exact.lower - 1e-9) << Label(tree);
            for (const auto& c : closed.closed_forms) {
              EXPECT_LE(c.lower, c.upper + 1e-9) << c.name;
              EXPECT_LE(c.lower, exact.Certified() + 1e-9) << c.name;
              EXPECT_GE(c.upper, exact.lower - 1e-9) << c.name << " " << Label(tree)
                                                     << " T=" << T << " k=" << k
                                                     << " D=" << D << " p=" << p;
            }
          }
        }
      }
    }
  }
}

TEST(TreeSensTest, MultiCounterBracketContainsBruteForce) {
  for (std::int64_t T = 2; T <= 6; ++T) {
    for (const auto& tree : SmallTrees(T)) {
      for (std::int64_t D : {2, 3}) {
        for (std::int64_t k = 1; k <= 5; ++k) {
          const auto set = SetParams::Make(D, k, T);
          const double bf = *BruteForceSens(tree, 2, set).value;
          for (auto method : {SensMethod::kExactDp, SensMethod::kClosedBound}) {
            const auto r = TreeSens(tree, 2, set, method);
            EXPECT_LE(r.lower, bf + 1e-9) << Label(tree) << " " << D << " " << k;
            EXPECT_GE(r.upper, bf - 1e-9) << Label(tree) << " " << D << " " << k;
          }
        }
      }
    }
  }
}

TEST(ToeplitzTest, Examples) {
  const SquareRootToeplitz f4(4);
  const auto one = ToeplitzSensBound(f4, SetParams::Make(1, 1, 4));
  ASSERT_TRUE(one.exact());
  EXPECT_DOUBLE_EQ(*one.value, std::sqrt(1.48828125));
  const auto two = ToeplitzSensBound(f4, SetParams::Make(1, 2, 4));
  EXPECT_NEAR(two.upper, 1.72527, 1e-5);
  const double bf = *BruteForceSens(f4, 2, SetParams::Make(1, 2, 4)).value;
  EXPECT_LT(bf, two.upper);
  EXPECT_THROW(ToeplitzSensBound(std::vector<double>{1.0, 2.0}, SetParams::Make(1, 1, 2)),
               UsageError);
}

TEST(ToeplitzTest, BoundIsSoundOnSmallHorizons) {
  for (std::int64_t T = 1; T <= 12; ++T) {
    const SquareRootToeplitz f(T);
    for (std::int64_t k = 1; k <= std::min<std::int64_t>(T, 4); ++k) {
      const auto set = SetParams::Make(1, k, T);
      EXPECT_LE(*BruteForceSens(f, 2, set).value,
                ToeplitzSensBound(f, set).upper + 1e-12);
    }
  }
}

TEST(BruteForceTest, Examples) {
  const auto naive = BruteForceSens(NaiveFactorization(4), 2, SetParams::Make(1, 1, 4));
  EXPECT_DOUBLE_EQ(*naive.value, 2.0);
  EXPECT_EQ(ToStd(*naive.witness), (std::vector<std::int64_t>{1, 0, 0, 0}));
  EXPECT_DOUBLE_EQ(
      *BruteForceSens(BaryTree(2, 4, TreeVariant::kPlain), 2, SetParams::Make(1, 2, 4)).value,
      2.0);
  EXPECT_DOUBLE_EQ(
      *BruteForceSens(SquareRootToeplitz(2), 2, SetParams::Make(1, 1, 2)).value,
      std::sqrt(1.25));
}

TEST(BruteForceTest, NaiveClosedForm) {
  for (std::int64_t T = 1; T <= 7; ++T) {
    for (std::int64_t D : {1, 2}) {
      for (std::int64_t k = 1; k <= 4; ++k) {
        for (int p : {1, 2}) {
          const auto set = SetParams::Make(D, k, T);
          const double expected =
              std::min(D, k) * std::pow(static_cast<double>(T), 1.0 / p);
          EXPECT_NEAR(*BruteForceSens(NaiveFactorization(T), p, set).value, expected, 1e-9);
          const auto closed = ComputeSensitivity(NaiveFactorization(T), p, set,
                                                 SensMethod::kClosedBound);
          EXPECT_NEAR(*closed.value, expected, 1e-9);
        }
      }
    }
  }
}

TEST(BruteForceTest, InfeasibleIsAnError) {
  EXPECT_THROW(BruteForceSens(NaiveFactorization(40), 2, SetParams::Make(1, 2, 40)),
               FeasibilityError);
}

TEST(EmpiricalTest, SingleBallStaysBelowColumnNorm) {
  const SquareRootToeplitz f(64);
  const auto e = EmpiricalLowerEstimate(f, SetParams::Make(1, 1, 64), 500, 3);
  EXPECT_LE(e.max_norm, std::sqrt(f.GramDiagonal(0)) + 1e-12);
  EXPECT_GT(e.max_norm, 0.0);
}

TEST(EmpiricalTest, SoundAndDeterministic) {
  const SquareRootToeplitz f(256);
  for (std::int64_t k : {2, 5, 16}) {
    const auto set = SetParams::Make(1, k, 256);
    const auto a = EmpiricalLowerEstimate(f, set, 2000, 17);
    const auto b = EmpiricalLowerEstimate(f, set, 2000, 17);
    EXPECT_EQ(a.max_norm, b.max_norm);
    EXPECT_EQ(a.mean_square, b.mean_square);
    EXPECT_LE(a.max_norm, ToeplitzSensBound(f, set).upper);
    EXPECT_LE(a.mean_square, a.max_norm * a.max_norm + 1e-9);
    EXPECT_TRUE(IsMember(a.witness, set));
    EXPECT_EQ(L1Norm(a.witness), k);
    EXPECT_NEAR(ApplyRight(f, a.witness).norm(), a.max_norm, 1e-9);
  }
}

TEST(MaxSplitTest, MatchesExhaustiveSplits) {
  const std::vector<double> s{0.0, 2.0, 2.5, 3.4, 3.5, 3.9, 4.0};
  for (std::int64_t D = 1; D <= 3; ++D) {
    for (std::int64_t k = 0; k <= 6; ++k) {
      double best = 0.0;
      for (std::int64_t a = 0; a <= k; ++a) {
        for (std::int64_t b = 0; a + b <= k; ++b) {
          for (std::int64_t c = 0; a + b + c <= k; ++c) {
            if ((D < 2 && b > 0) || (D < 3 && c > 0)) continue;
            best = std::max(best, s[a] + s[b] + s[c]);
          }
        }
      }
      EXPECT_DOUBLE_EQ(MaxSplitUpper(s, D, k), best) << D << " " << k;
    }
  }
}

TEST(ReductionBoundsTest, Examples) {
  auto base = [](std::int64_t j) { return std::sqrt(3.0 * j); };
  auto upper = [](std::int64_t j) { return std::sqrt(4.0 * j); };
  const auto one = ReductionBounds(base, upper, SetParams::Make(1, 6, 20));
  EXPECT_DOUBLE_EQ(one.lower, base(6));
  EXPECT_DOUBLE_EQ(one.upper, upper(6));
  EXPECT_TRUE(one.upper_concave);
  const auto dk = ReductionBounds(base, upper, SetParams::Make(4, 4, 20));
  EXPECT_DOUBLE_EQ(dk.lower, 4 * base(1));
  EXPECT_THROW(ReductionBounds(base, [](std::int64_t j) { return j == 3 ? 0.0 : 1.0 * j; },
                               SetParams::Make(1, 5, 20)),
               UsageError);
}

TEST(ReductionBoundsTest, NonConcaveUpperUsesMajorant) {
  // 4, 8, 9, 12: forward differences 4, 1, 3.
  const std::vector<double> u{0, 4, 8, 9, 12};
  const auto r = ReductionBounds([](std::int64_t) { return 0.0; },
                                 [&](std::int64_t j) { return u[j]; },
                                 SetParams::Make(2, 4, 9));
  EXPECT_FALSE(r.upper_concave);
  EXPECT_DOUBLE_EQ(r.upper, 2 * 8.0);
}

TEST(ReductionBoundsTest, TreeBracketMatchesMultiCounterFormula) {
  for (int b : {3, 5}) {
    for (std::int64_t T : {81, 125, 200}) {
      const BaryTree tree(b, T, TreeVariant::kSubtractReduced);
      for (std::int64_t D : {1, 2, 3}) {
        for (std::int64_t k = D; k * b <= T && k <= 12; ++k) {
          const auto forms = TreeClosedForms(tree, 2, SetParams::Make(D, k, T));
          if (D == 1) continue;
          const auto it = std::find_if(forms.begin(), forms.end(), [](const Bracket& c) {
            return c.name == "reduced-tree-D";
          });
          ASSERT_NE(it, forms.end());
          const double ratio = static_cast<double>(D) * T / k;
          const double fl = std::floor(std::log(ratio) / std::log(b) + 1e-12);
          const double cl = std::ceil(std::log(ratio) / std::log(b) - 1e-12);
          EXPECT_NEAR(it->lower, D * std::sqrt((k / D) * (fl - 1.0 / b)), 1e-9);
          EXPECT_NEAR(it->upper, D * std::sqrt(((k + D - 1) / D) * (cl + 2)), 1e-9);
        }
      }
    }
  }
}

TEST(IntegerLogTest, ExactRatios) {
  EXPECT_EQ(CeilLog(3, 1), 0);
  EXPECT_EQ(CeilLog(3, 9), 2);
  EXPECT_EQ(CeilLog(3, 10), 3);
  EXPECT_EQ(FloorLogRatio(3, 27, 1), 3);
  EXPECT_EQ(FloorLogRatio(3, 26, 1), 2);
  EXPECT_EQ(CeilLogRatio(3, 27, 3), 2);
  EXPECT_EQ(CeilLogRatio(3, 28, 3), 3);
  EXPECT_EQ(CeilLogRatio(2, std::int64_t{1} << 62, 1), 62);
}

TEST(ComputeSensitivityTest, Dispatch) {
  const auto set = SetParams::Make(1, 2, 8);
  EXPECT_THROW(ComputeSensitivity(BaryTree(2, 8, TreeVariant::kPlain), 2, set,
                                  SensMethod::kEmpirical),
               UsageError);
  EXPECT_THROW(ComputeSensitivity(SquareRootToeplitz(8), 2, set, SensMethod::kExactDp),
               UsageError);
  const auto sq = ComputeSensitivity(SquareRootToeplitz(8), 2, set, SensMethod::kClosedBound);
  EXPECT_FALSE(sq.exact());
  EXPECT_LE(sq.lower, sq.upper);
  const auto sq1 = ComputeSensitivity(SquareRootToeplitz(8), 1, set, SensMethod::kClosedBound);
  EXPECT_LE(*BruteForceSens(SquareRootToeplitz(8), 1, set).value, sq1.upper + 1e-12);
  const auto emp = ComputeSensitivity(SquareRootToeplitz(8), 2, set, SensMethod::kEmpirical);
  EXPECT_LE(emp.lower, sq.upper);
  EXPECT_EQ(MethodName(ParseMethod("dp")), "exact_dp");
  EXPECT_THROW(ParseMethod("guess"), UsageError);
}

}  // namespace
}  // namespace dyncount
