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

// Factorizations A = L R of the T x T lower-triangular all-ones matrix.
//
// Three families are provided: the square-root Toeplitz factorization
// L = R = sqrt(A), b-ary tree aggregation (plain, with subtraction, and with
// subtraction and the unused middle-child rows removed), and the naive
// factorization L = I, R = A.

#ifndef DYNCOUNT_FACTORIZATIONS_H_
#define DYNCOUNT_FACTORIZATIONS_H_

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "dyncount/stream_model.h"

namespace dyncount {

// r_t = C(2t, t) / 4^t, evaluated by r_t = r_{t-1} (2t - 1) / (2t).
double SqrtCoeff(std::int64_t t);

class SquareRootToeplitz {
 public:
  explicit SquareRootToeplitz(std::int64_t T);

  std::int64_t T() const { return T_; }
  const std::vector<double>& coeffs() const { return coeffs_; }

  // c(i, j) = (R^T R)[i, j] = sum_{l=0}^{T-max(i,j)-1} r_l r_{l+|i-j|}.
  // O(T) per call; only the diagonal is cached.
  double GramEntry(std::int64_t i, std::int64_t j) const;
  double GramDiagonal(std::int64_t i) const;

  // sum_{l=0}^{t} r_l^2, the squared norm of row t of sqrt(A).
  double RowNormSquared(std::int64_t t) const { return coeff_sq_prefix_[t]; }

 private:
  std::int64_t T_;
  std::vector<double> coeffs_;
  std::vector<double> coeff_sq_prefix_;
};

enum class TreeVariant { kPlain, kSubtract, kSubtractReduced };

// Complete b-ary tree of height h = ceil(log_b T) over b^h leaves; only the
// first T leaves (columns) and T outputs (rows of L) are kept.
class BaryTree {
 public:
  struct Node {
    int level = 0;            // 0 = leaves, h = root
    std::int64_t index = 0;   // position within the level, left to right
    friend bool operator==(const Node&, const Node&) = default;
  };
  struct SignedNode {
    Node node;
    int sign = 1;
  };

  // Throws UsageError for b < 2, T < 1, or an even b with a subtract variant.
  BaryTree(int b, std::int64_t T, TreeVariant variant);

  int b() const { return b_; }
  int h() const { return h_; }
  std::int64_t T() const { return T_; }
  TreeVariant variant() const { return variant_; }

  // Number of rows of R before any reduction: (b^{h+1} - 1) / (b - 1).
  std::int64_t rows() const { return rows_; }
  // b^level.
  std::int64_t Span(int level) const { return pow_[level]; }

  // Breadth-first row numbering, root first.
  std::int64_t RowIndex(const Node& node) const;
  Node NodeAt(std::int64_t row) const;

  // Rows that subtract_reduced removes: the middle child of every parent.
  bool IsZeroedRow(std::int64_t row) const;
  bool IsMiddleChild(const Node& node) const;

  // Signed node set whose leaf intervals sum to the prefix [0, t].
  // Throws UsageError unless 0 <= t < T.
  std::vector<SignedNode> QueryNodes(std::int64_t t) const;

  // Decoder of QueryNodes written into `out`, reusing its storage.
  void QueryNodesInto(std::int64_t t, std::vector<SignedNode>& out) const;

 private:
  int b_;
  int h_;
  std::int64_t T_;
  TreeVariant variant_;
  std::int64_t rows_;
  std::vector<std::int64_t> pow_;
};

class NaiveFactorization {
 public:
  explicit NaiveFactorization(std::int64_t T);
  std::int64_t T() const { return T_; }

 private:
  std::int64_t T_;
};

using Factorization =
    std::variant<NaiveFactorization, SquareRootToeplitz, BaryTree>;

struct FactorNorms {
  double l_two_to_inf = 0.0;
  double l_frobenius_over_sqrtT = 0.0;
  double r_one_to_two = 0.0;
};

// Horizon-independent description of a factorization, for configuration.
struct FactorizationSpec {
  enum class Kind { kNaive, kSqrt, kTree };
  Kind kind = Kind::kSqrt;
  int b = 2;
  TreeVariant variant = TreeVariant::kPlain;

  // Parses "naive", "sqrt" or "tree" plus a variant name ("plain",
  // "subtract", "reduced"). Throws UsageError.
  static FactorizationSpec Parse(const std::string& kind, int b,
                                 const std::string& variant);
};

Factorization MakeFactorization(const FactorizationSpec& spec, std::int64_t T);

std::int64_t HorizonOf(const Factorization& f);

// Short label such as "naive", "sqrt" or "tree-subtract-b3".
std::string Label(const Factorization& f);

// Tree norms are computed from the node counts |Q(t)| over all t.
FactorNorms Norms(const Factorization& f);

// Squared l2 norm of row t of L.
double LeftRowNormSquared(const Factorization& f, std::int64_t t);

// R * delta. Length T for naive and sqrt, rows() for trees (zeroed rows
// stay 0). Cost is O(nnz(delta) * T) for sqrt and O(rows + T) otherwise.
Eigen::VectorXd ApplyRight(const Factorization& f, const SensitivityVector& delta);

// Dense L and R for small-T checks.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> DenseRight(
    const Factorization& f);
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> DenseLeft(
    const Factorization& f);

}  // namespace dyncount

#endif  // DYNCOUNT_FACTORIZATIONS_H_
