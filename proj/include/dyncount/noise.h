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

// Online evaluation of the correlated noise (L z)[t], one step at a time.

#ifndef DYNCOUNT_NOISE_H_
#define DYNCOUNT_NOISE_H_

#include <cstdint>
#include <memory>
#include <random>

#include "dyncount/factorizations.h"

namespace dyncount {

enum class NoiseKind { kGaussian, kLaplace };

// i.i.d. draws with the given scale (Gaussian standard deviation or Laplace
// scale). A scale of exactly 0 yields zeros; it exists as a test hook.
// Not suitable for production DP: floating-point samplers leak through their
// low-order bits.
class NoiseSampler {
 public:
  NoiseSampler(NoiseKind kind, double scale, std::uint64_t seed);
  double Draw();
  NoiseKind kind() const { return kind_; }
  double scale() const { return scale_; }

 private:
  NoiseKind kind_;
  double scale_;
  std::mt19937_64 rng_;
  std::normal_distribution<double> normal_;
  std::uniform_real_distribution<double> uniform_;
};

// Yields (L z)[0], (L z)[1], ... for z with i.i.d. entries. Stateful and
// single-threaded.
class NoiseStream {
 public:
  virtual ~NoiseStream() = default;
  // Noise for the next step. Throws UsageError after T steps.
  virtual double Next() = 0;
  virtual std::int64_t step() const = 0;
};

// `f` must outlive the stream. Throws UsageError for a negative or
// non-finite scale.
std::unique_ptr<NoiseStream> MakeNoiseStream(const Factorization& f,
                                             NoiseKind kind, double scale,
                                             std::uint64_t seed);

}  // namespace dyncount

#endif  // DYNCOUNT_NOISE_H_
