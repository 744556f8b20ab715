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

// l_p sensitivity of the right factor R over S_{D,k}:
// sens_p(R, S) = max_{delta in S} ||R delta||_p.
//
// Tree factorizations are solved exactly through parity counting: for an
// alternating delta every node value of R delta is -1, 0 or 1 depending on
// the parity of the non-zeros below it, so ||R delta||_p^p counts odd nodes.

#ifndef DYNCOUNT_SENSITIVITY_H_
#define DYNCOUNT_SENSITIVITY_H_

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "dyncount/factorizations.h"
#include "dyncount/stream_model.h"

namespace dyncount {

enum class SensMethod { kExactDp, kClosedBound, kBruteForce, kEmpirical };

std::string MethodName(SensMethod method);
// Accepts "dp", "bound", "brute" and "empirical". Throws UsageError.
SensMethod ParseMethod(const std::string& name);

// A named closed-form bracket.
struct Bracket {
  std::string name;
  double lower = 0.0;
  double upper = std::numeric_limits<double>::infinity();
};

struct SensResult {
  // Set only when the sensitivity is known exactly.
  std::optional<double> value;
  double lower = 0.0;
  double upper = std::numeric_limits<double>::infinity();
  // Attains `value` when exact, otherwise attains `lower`.
  std::optional<SensitivityVector> witness;
  std::string method;
  std::vector<Bracket> closed_forms;
  std::string note;

  bool exact() const { return value.has_value(); }
  // The value when exact, else the certified upper bound.
  double Certified() const { return value ? *value : upper; }
};

struct DpLimits {
  int max_branching = 64;
  // Rough operation budget, checked against h * b * (k+1)^2.
  double max_work = 4e9;
};

struct SensOptions {
  EnumerationLimits limits;
  DpLimits dp;
  int trials = 10'000;
  std::uint64_t seed = 0;
  // When false, square-root bounds skip the enumeration or sampling that
  // only tightens the lower end.
  bool refine_lower = true;
};

// Exact parity tables for a b-ary tree over T leaves (the first T leaves of
// the complete height-h tree), for every ball count j <= min(kmax, T).
// In reduced mode the child with index (b-1)/2 of every parent does not
// count; for odd b that is the middle child.
class TreeParityDp {
 public:
  // Throws UsageError on bad shape and FeasibilityError over budget.
  TreeParityDp(int b, std::int64_t T, bool reduced, std::int64_t kmax,
               const DpLimits& limits = {});

  // best()[j]: maximum number of odd counted nodes with exactly j balls on
  // distinct leaves.
  const std::vector<std::int64_t>& best() const { return best_; }

  // Sorted leaf positions of an optimal placement of j balls.
  std::vector<std::int64_t> Placement(std::int64_t j) const;

 private:
  struct Child {
    enum Kind { kComplete, kPartial, kEmpty } kind;
    std::int64_t lo;
    bool counted;
  };
  struct Level {
    int level;
    std::int64_t lo;
    std::vector<Child> children;
    std::vector<std::vector<std::int32_t>> take;
  };

  std::vector<std::int64_t> Counted(const std::vector<std::int64_t>& base,
                                    bool counted) const;
  std::vector<std::int64_t> Combine(
      const std::vector<std::vector<std::int64_t>>& tables,
      std::vector<std::vector<std::int32_t>>& take) const;
  void Place(int level, std::int64_t lo, bool spine, std::size_t spine_pos,
             std::int64_t j, std::vector<std::int64_t>& out) const;

  int b_;
  int h_;
  std::int64_t T_;
  bool reduced_;
  std::int64_t cap_;
  std::vector<std::int64_t> span_;
  // Complete subtrees per level: tables exclude the subtree root's parity.
  std::vector<std::vector<std::int64_t>> complete_base_;
  std::vector<std::vector<std::vector<std::int32_t>>> complete_take_;
  // Partial nodes on the path to leaf T-1, root first.
  std::vector<Level> spine_;
  std::vector<std::int64_t> best_;
};

// F_b(h, k): maximum number of odd nodes over placements of k balls on the
// b^h leaves. Throws UsageError if k > b^h.
std::int64_t ParityDpFull(int b, int h, std::int64_t k,
                          const DpLimits& limits = {});

// F^_b(h, k): as ParityDpFull but child (b-1)/2 of every parent never
// counts; the root always counts.
std::int64_t ParityDpReduced(int b, int h, std::int64_t k,
                             const DpLimits& limits = {});

// ceil(log_b k).
int CeilLog(int b, std::int64_t k);
// floor(log_b(n / m)) and ceil(log_b(n / m)) for n, m >= 1.
int FloorLogRatio(int b, std::int64_t n, std::int64_t m);
int CeilLogRatio(int b, std::int64_t n, std::int64_t m);

// Closed-form brackets on sens_p(R, S_{D,k}) for the given tree. Only the
// brackets whose hypotheses hold are returned.
std::vector<Bracket> TreeClosedForms(const BaryTree& tree, int p,
                                     const SetParams& set);

// Tree sensitivity. kExactDp gives the exact value for D = 1 and a bracket
// from the exact D = 1 values otherwise; kClosedBound returns closed forms
// only.
SensResult TreeSens(const BaryTree& tree, int p, const SetParams& set,
                    SensMethod method, const DpLimits& limits = {});

// Upper bound sqrt(D k) ||R||_{1->2} for a lower-triangular Toeplitz R with
// first column `coeffs`. Throws UsageError unless the coefficients are
// non-negative and non-increasing.
SensResult ToeplitzSensBound(const std::vector<double>& coeffs,
                             const SetParams& set);
SensResult ToeplitzSensBound(const SquareRootToeplitz& f,
                             const SetParams& set);

// Exhaustive maximum of ||R delta||_p with the first maximising witness in
// enumeration order.
SensResult BruteForceSens(const Factorization& f, int p, const SetParams& set,
                          const EnumerationLimits& limits = {});

struct EmpiricalLower {
  // Largest ||sqrt(A) delta||_2 seen; a valid sensitivity lower bound.
  double max_norm = 0.0;
  // Sample mean of ||sqrt(A) delta||_2^2.
  double mean_square = 0.0;
  SensitivityVector witness;
};

// Samples delta uniformly from the alternating vectors with exactly k
// non-zeros. Requires D = 1 and 1 <= k <= T.
EmpiricalLower EmpiricalLowerEstimate(const SquareRootToeplitz& f,
                                      const SetParams& set, int trials,
                                      std::uint64_t seed);

// max over k_1 + ... + k_D <= k of sum_d s[k_d], with s indexed 0..k and
// s[j] = s.back() beyond its end.
double MaxSplitUpper(const std::vector<double>& s, std::int64_t D,
                     std::int64_t k);

struct ReductionBracket {
  double lower = 0.0;
  double upper = 0.0;
  // False when U was not concave on the grid and its least concave
  // majorant was used instead.
  bool upper_concave = true;
};

// lower = D * base(floor(k/D)), upper = D * Uc(ceil(k/D)) with Uc the least
// concave majorant of U on {0, ..., k}. Throws UsageError if U decreases
// anywhere on that grid.
ReductionBracket ReductionBounds(
    const std::function<double(std::int64_t)>& base,
    const std::function<double(std::int64_t)>& upper_fn, const SetParams& set);

// Sensitivity of any factorization by the chosen method. Naive is solved in
// closed form, min(D, k) T^{1/p}, for kClosedBound.
SensResult ComputeSensitivity(const Factorization& f, int p,
                              const SetParams& set, SensMethod method,
                              const SensOptions& options = {});

}  // namespace dyncount

#endif  // DYNCOUNT_SENSITIVITY_H_
