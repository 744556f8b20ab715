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

#include "dyncount/factorizations.h"

#include <algorithm>
#include <cmath>
#include <string>
#include <type_traits>

#include "dyncount/errors.h"

namespace dyncount {
namespace {

template <typename... Fs>
struct Overloaded : Fs... {
  using Fs::operator()...;
};
template <typename... Fs>
Overloaded(Fs...) -> Overloaded<Fs...>;

void CheckHorizon(std::int64_t T) {
  if (T < 1) throw UsageError("T must be >= 1");
}

// Balanced base-b digits of n in [-(b-1)/2, (b-1)/2], least significant
// first, padded to `width` digits.
void BalancedDigits(std::int64_t n, int b, int width, std::vector<int>& out) {
  out.assign(width, 0);
  const int c = (b - 1) / 2;
  for (int l = 0; l < width && n != 0; ++l) {
    std::int64_t r = n % b;
    if (r > c) r -= b;
    out[l] = static_cast<int>(r);
    n = (n - r) / b;
  }
}

}  // namespace

double SqrtCoeff(std::int64_t t) {
  double r = 1.0;
  for (std::int64_t s = 1; s <= t; ++s) {
    r *= static_cast<double>(2 * s - 1) / static_cast<double>(2 * s);
  }
  return r;
}

SquareRootToeplitz::SquareRootToeplitz(std::int64_t T) : T_(T) {
  CheckHorizon(T);
  coeffs_.resize(T);
  coeff_sq_prefix_.resize(T);
  double r = 1.0, acc = 0.0;
  for (std::int64_t t = 0; t < T; ++t) {
    if (t > 0) r *= static_cast<double>(2 * t - 1) / static_cast<double>(2 * t);
    coeffs_[t] = r;
    acc += r * r;
    coeff_sq_prefix_[t] = acc;
  }
}

double SquareRootToeplitz::GramEntry(std::int64_t i, std::int64_t j) const {
  if (i < 0 || j < 0 || i >= T_ || j >= T_) {
    throw UsageError("Gram index out of range");
  }
  const std::int64_t gap = i > j ? i - j : j - i;
  const std::int64_t last = T_ - std::max(i, j) - 1;
  double sum = 0.0;
  for (std::int64_t l = 0; l <= last; ++l) sum += coeffs_[l] * coeffs_[l + gap];
  return sum;
}

double SquareRootToeplitz::GramDiagonal(std::int64_t i) const {
  if (i < 0 || i >= T_) throw UsageError("Gram index out of range");
  return coeff_sq_prefix_[T_ - i - 1];
}

BaryTree::BaryTree(int b, std::int64_t T, TreeVariant variant)
    : b_(b), h_(0), T_(T), variant_(variant) {
  CheckHorizon(T);
  if (b < 2) throw UsageError("branching factor must be >= 2");
  if (variant != TreeVariant::kPlain && b % 2 == 0) {
    throw UsageError("subtraction trees need an odd branching factor >= 3");
  }
  pow_.push_back(1);
  while (pow_.back() < T) {
    std::int64_t next;
    if (__builtin_mul_overflow(pow_.back(), static_cast<std::int64_t>(b),
                               &next)) {
      throw FeasibilityError("tree size overflows int64");
    }
    pow_.push_back(next);
  }
  h_ = static_cast<int>(pow_.size()) - 1;
  std::int64_t top;
  if (__builtin_mul_overflow(pow_.back(), static_cast<std::int64_t>(b),
                             &top)) {
    throw FeasibilityError("tree size overflows int64");
  }
  rows_ = (top - 1) / (b - 1);
}

std::int64_t BaryTree::RowIndex(const Node& node) const {
  if (node.level < 0 || node.level > h_ || node.index < 0 ||
      node.index >= pow_[h_ - node.level]) {
    throw UsageError("node outside the tree");
  }
  return (pow_[h_ - node.level] - 1) / (b_ - 1) + node.index;
}

BaryTree::Node BaryTree::NodeAt(std::int64_t row) const {
  if (row < 0 || row >= rows_) throw UsageError("row outside the tree");
  int depth = 0;
  std::int64_t first = 0;
  while (first + pow_[depth] <= row) {
    first += pow_[depth];
    ++depth;
  }
  return Node{h_ - depth, row - first};
}

bool BaryTree::IsMiddleChild(const Node& node) const {
  return node.level < h_ && node.index % b_ == (b_ - 1) / 2;
}

bool BaryTree::IsZeroedRow(std::int64_t row) const {
  return variant_ == TreeVariant::kSubtractReduced && IsMiddleChild(NodeAt(row));
}

std::vector<BaryTree::SignedNode> BaryTree::QueryNodes(std::int64_t t) const {
  std::vector<SignedNode> out;
  QueryNodesInto(t, out);
  return out;
}

void BaryTree::QueryNodesInto(std::int64_t t,
                              std::vector<SignedNode>& out) const {
  if (t < 0 || t >= T_) throw UsageError("time index out of range");
  out.clear();
  const std::int64_t n = t + 1;
  if (variant_ == TreeVariant::kPlain) {
    std::int64_t cursor = 0;
    for (int l = h_; l >= 0; --l) {
      const std::int64_t digits = (n - cursor) / pow_[l];
      for (std::int64_t d = 0; d < digits; ++d) {
        out.push_back({Node{l, cursor / pow_[l]}, 1});
        cursor += pow_[l];
      }
    }
    return;
  }
  thread_local std::vector<int> digits;
  BalancedDigits(n, b_, h_ + 1, digits);
  std::int64_t cursor = 0;
  for (int l = h_; l >= 0; --l) {
    const int e = digits[l];
    for (int d = 0; d < e; ++d) {
      out.push_back({Node{l, cursor / pow_[l]}, 1});
      cursor += pow_[l];
    }
    for (int d = 0; d < -e; ++d) {
      cursor -= pow_[l];
      out.push_back({Node{l, cursor / pow_[l]}, -1});
    }
  }
}

NaiveFactorization::NaiveFactorization(std::int64_t T) : T_(T) {
  CheckHorizon(T);
}

FactorizationSpec FactorizationSpec::Parse(const std::string& kind, int b,
                                           const std::string& variant) {
  FactorizationSpec spec;
  spec.b = b;
  if (kind == "naive") {
    spec.kind = Kind::kNaive;
  } else if (kind == "sqrt") {
    spec.kind = Kind::kSqrt;
  } else if (kind == "tree") {
    spec.kind = Kind::kTree;
  } else {
    throw UsageError("unknown factorization '" + kind +
                     "' (expected naive, sqrt or tree)");
  }
  if (variant == "plain") {
    spec.variant = TreeVariant::kPlain;
  } else if (variant == "subtract") {
    spec.variant = TreeVariant::kSubtract;
  } else if (variant == "reduced" || variant == "subtract_reduced") {
    spec.variant = TreeVariant::kSubtractReduced;
  } else {
    throw UsageError("unknown tree variant '" + variant +
                     "' (expected plain, subtract or reduced)");
  }
  return spec;
}

Factorization MakeFactorization(const FactorizationSpec& spec, std::int64_t T) {
  switch (spec.kind) {
    case FactorizationSpec::Kind::kNaive:
      return NaiveFactorization(T);
    case FactorizationSpec::Kind::kSqrt:
      return SquareRootToeplitz(T);
    case FactorizationSpec::Kind::kTree:
      break;
  }
  return BaryTree(spec.b, T, spec.variant);
}

std::int64_t HorizonOf(const Factorization& f) {
  return std::visit([](const auto& x) { return x.T(); }, f);
}

std::string Label(const Factorization& f) {
  return std::visit(
      Overloaded{
          [](const NaiveFactorization&) { return std::string("naive"); },
          [](const SquareRootToeplitz&) { return std::string("sqrt"); },
          [](const BaryTree& tree) {
            std::string v = tree.variant() == TreeVariant::kPlain ? "plain"
                            : tree.variant() == TreeVariant::kSubtract
                                ? "subtract"
                                : "reduced";
            return "tree-" + v + "-b" + std::to_string(tree.b());
          }},
      f);
}

FactorNorms Norms(const Factorization& f) {
  return std::visit(
      Overloaded{
          [](const NaiveFactorization& n) {
            return FactorNorms{1.0, 1.0,
                               std::sqrt(static_cast<double>(n.T()))};
          },
          [](const SquareRootToeplitz& s) {
            double trace = 0.0;
            for (std::int64_t i = 0; i < s.T(); ++i) trace += s.GramDiagonal(i);
            const double c00 = s.GramDiagonal(0);
            return FactorNorms{std::sqrt(c00),
                               std::sqrt(trace / static_cast<double>(s.T())),
                               std::sqrt(c00)};
          },
          [](const BaryTree& tree) {
            std::vector<BaryTree::SignedNode> q;
            std::size_t most = 0;
            std::int64_t total = 0;
            for (std::int64_t t = 0; t < tree.T(); ++t) {
              tree.QueryNodesInto(t, q);
              most = std::max(most, q.size());
              total += static_cast<std::int64_t>(q.size());
            }
            // Leaf 0 lies under the left-most node of every level, none of
            // which is ever removed.
            return FactorNorms{
                std::sqrt(static_cast<double>(most)),
                std::sqrt(static_cast<double>(total) /
                          static_cast<double>(tree.T())),
                std::sqrt(static_cast<double>(tree.h() + 1))};
          }},
      f);
}

double LeftRowNormSquared(const Factorization& f, std::int64_t t) {
  if (t < 0 || t >= HorizonOf(f)) throw UsageError("time index out of range");
  return std::visit(
      Overloaded{
          [](const NaiveFactorization&) { return 1.0; },
          [t](const SquareRootToeplitz& s) { return s.RowNormSquared(t); },
          [t](const BaryTree& tree) {
            return static_cast<double>(tree.QueryNodes(t).size());
          }},
      f);
}

Eigen::VectorXd ApplyRight(const Factorization& f,
                           const SensitivityVector& delta) {
  const std::int64_t T = HorizonOf(f);
  if (delta.size() != T) {
    throw UsageError("vector length does not match the factorization");
  }
  std::vector<double> prefix(T + 1, 0.0);
  for (std::int64_t t = 0; t < T; ++t) {
    prefix[t + 1] = prefix[t] + static_cast<double>(delta[t]);
  }
  return std::visit(
      Overloaded{
          [&](const NaiveFactorization&) {
            Eigen::VectorXd out(T);
            for (std::int64_t t = 0; t < T; ++t) out[t] = prefix[t + 1];
            return out;
          },
          [&](const SquareRootToeplitz& s) {
            Eigen::VectorXd out = Eigen::VectorXd::Zero(T);
            const auto& r = s.coeffs();
            for (std::int64_t j = 0; j < T; ++j) {
              if (delta[j] == 0) continue;
              const double x = static_cast<double>(delta[j]);
              for (std::int64_t t = j; t < T; ++t) out[t] += r[t - j] * x;
            }
            return out;
          },
          [&](const BaryTree& tree) {
            Eigen::VectorXd out = Eigen::VectorXd::Zero(tree.rows());
            for (int l = tree.h(); l >= 0; --l) {
              const std::int64_t span = tree.Span(l);
              const std::int64_t count = tree.Span(tree.h() - l);
              for (std::int64_t j = 0; j < count; ++j) {
                const std::int64_t lo = j * span;
                if (lo >= T) break;
                const BaryTree::Node node{l, j};
                if (tree.variant() == TreeVariant::kSubtractReduced &&
                    tree.IsMiddleChild(node)) {
                  continue;
                }
                const std::int64_t hi = std::min(lo + span, T);
                out[tree.RowIndex(node)] = prefix[hi] - prefix[lo];
              }
            }
            return out;
          }},
      f);
}

template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> DenseRight(
    const Factorization& f) {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  const std::int64_t T = HorizonOf(f);
  return std::visit(
      Overloaded{
          [&](const NaiveFactorization&) -> Matrix {
            Matrix a = Matrix::Ones(T, T);
            return a.template triangularView<Eigen::Lower>();
          },
          [&](const SquareRootToeplitz& s) -> Matrix {
            Matrix r = Matrix::Zero(T, T);
            for (std::int64_t i = 0; i < T; ++i) {
              for (std::int64_t j = 0; j <= i; ++j) {
                r(i, j) = static_cast<Scalar>(s.coeffs()[i - j]);
              }
            }
            return r;
          },
          [&](const BaryTree& tree) -> Matrix {
            Matrix r = Matrix::Zero(tree.rows(), T);
            for (std::int64_t row = 0; row < tree.rows(); ++row) {
              if (tree.IsZeroedRow(row)) continue;
              const BaryTree::Node node = tree.NodeAt(row);
              const std::int64_t lo = node.index * tree.Span(node.level);
              const std::int64_t hi = std::min(lo + tree.Span(node.level), T);
              for (std::int64_t c = lo; c < hi; ++c) r(row, c) = Scalar(1);
            }
            return r;
          }},
      f);
}

template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> DenseLeft(
    const Factorization& f) {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  const std::int64_t T = HorizonOf(f);
  return std::visit(
      Overloaded{
          [&](const NaiveFactorization&) -> Matrix {
            return Matrix::Identity(T, T);
          },
          [&](const SquareRootToeplitz&) -> Matrix {
            return DenseRight<Scalar>(f);
          },
          [&](const BaryTree& tree) -> Matrix {
            Matrix l = Matrix::Zero(T, tree.rows());
            std::vector<BaryTree::SignedNode> q;
            for (std::int64_t t = 0; t < T; ++t) {
              tree.QueryNodesInto(t, q);
              for (const auto& s : q) {
                l(t, tree.RowIndex(s.node)) += Scalar(s.sign);
              }
            }
            return l;
          }},
      f);
}

template Eigen::MatrixXd DenseRight<double>(const Factorization&);
template Eigen::MatrixXd DenseLeft<double>(const Factorization&);
template Eigen::MatrixXf DenseRight<float>(const Factorization&);
template Eigen::MatrixXf DenseLeft<float>(const Factorization&);

}  // namespace dyncount
