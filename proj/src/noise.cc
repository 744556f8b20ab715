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

#include "dyncount/noise.h"

#include <algorithm>
#include <cmath>
#include <variant>
#include <vector>

#include "dyncount/errors.h"

namespace dyncount {
namespace {

class StreamBase : public NoiseStream {
 public:
  StreamBase(std::int64_t T, NoiseKind kind, double scale, std::uint64_t seed)
      : T_(T), sampler_(kind, scale, seed) {}

  double Next() final {
    if (t_ >= T_) throw UsageError("noise stream exhausted");
    const double out = Eval(t_);
    ++t_;
    return out;
  }
  std::int64_t step() const final { return t_; }

 protected:
  virtual double Eval(std::int64_t t) = 0;
  NoiseSampler& sampler() { return sampler_; }

 private:
  std::int64_t T_;
  std::int64_t t_ = 0;
  NoiseSampler sampler_;
};

class NaiveStream final : public StreamBase {
 public:
  using StreamBase::StreamBase;

 private:
  double Eval(std::int64_t) override { return sampler().Draw(); }
};

// Keeps the full history of z; each step is a length-t dot product.
class SqrtStream final : public StreamBase {
 public:
  SqrtStream(const SquareRootToeplitz& f, NoiseKind kind, double scale,
             std::uint64_t seed)
      : StreamBase(f.T(), kind, scale, seed), coeffs_(f.coeffs()) {
    history_.reserve(f.T());
  }

 private:
  double Eval(std::int64_t t) override {
    history_.push_back(sampler().Draw());
    double sum = 0.0;
    for (std::int64_t j = 0; j <= t; ++j) sum += coeffs_[t - j] * history_[j];
    return sum;
  }

  const std::vector<double>& coeffs_;
  std::vector<double> history_;
};

// Node noise is drawn lazily. Every node referenced at step t is a child of
// the level-(l+1) ancestor of leaf t, so each level only caches the b
// children of that ancestor and is reset when the ancestor changes.
class TreeStream final : public StreamBase {
 public:
  TreeStream(const BaryTree& tree, NoiseKind kind, double scale,
             std::uint64_t seed)
      : StreamBase(tree.T(), kind, scale, seed), tree_(tree) {
    levels_.resize(tree.h() + 1);
    for (auto& level : levels_) level.values.assign(tree.b(), 0.0);
    for (auto& level : levels_) level.drawn.assign(tree.b(), false);
  }

 private:
  struct LevelCache {
    std::int64_t parent = -1;
    std::vector<double> values;
    std::vector<bool> drawn;
  };

  double Eval(std::int64_t t) override {
    tree_.QueryNodesInto(t, query_);
    double sum = 0.0;
    for (const auto& s : query_) {
      const int l = s.node.level;
      LevelCache& cache = levels_[l];
      const std::int64_t parent = s.node.index / tree_.b();
      if (parent != cache.parent) {
        cache.parent = parent;
        std::fill(cache.drawn.begin(), cache.drawn.end(), false);
      }
      const std::int64_t child = s.node.index % tree_.b();
      if (!cache.drawn[child]) {
        cache.values[child] = sampler().Draw();
        cache.drawn[child] = true;
      }
      sum += s.sign * cache.values[child];
    }
    return sum;
  }

  const BaryTree& tree_;
  std::vector<LevelCache> levels_;
  std::vector<BaryTree::SignedNode> query_;
};

}  // namespace

NoiseSampler::NoiseSampler(NoiseKind kind, double scale, std::uint64_t seed)
    : kind_(kind), scale_(scale), rng_(seed), uniform_(0.0, 1.0) {
  if (!(scale >= 0.0) || !std::isfinite(scale)) {
    throw UsageError("noise scale must be finite and >= 0");
  }
}

double NoiseSampler::Draw() {
  if (scale_ == 0.0) return 0.0;
  if (kind_ == NoiseKind::kGaussian) return scale_ * normal_(rng_);
  // Inverse CDF on u in (-1/2, 1/2).
  double u;
  do {
    u = uniform_(rng_) - 0.5;
  } while (u == -0.5);
  const double mag = -scale_ * std::log1p(-2.0 * std::fabs(u));
  return u < 0 ? -mag : mag;
}

std::unique_ptr<NoiseStream> MakeNoiseStream(const Factorization& f,
                                             NoiseKind kind, double scale,
                                             std::uint64_t seed) {
  NoiseSampler(kind, scale, seed);  // validates the scale
  if (const auto* s = std::get_if<SquareRootToeplitz>(&f)) {
    return std::make_unique<SqrtStream>(*s, kind, scale, seed);
  }
  if (const auto* tree = std::get_if<BaryTree>(&f)) {
    return std::make_unique<TreeStream>(*tree, kind, scale, seed);
  }
  return std::make_unique<NaiveStream>(HorizonOf(f), kind, scale, seed);
}

}  // namespace dyncount
