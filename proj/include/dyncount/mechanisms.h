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

// Privacy calibration and the streaming factorization mechanism
// a_t = (A x)[t] + (L z)[t].

#ifndef DYNCOUNT_MECHANISMS_H_
#define DYNCOUNT_MECHANISMS_H_

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dyncount/factorizations.h"
#include "dyncount/noise.h"
#include "dyncount/sensitivity.h"
#include "dyncount/stream_model.h"

namespace dyncount {

struct PrivacyBudget {
  enum class Kind { kZcdp, kPure };
  Kind kind = Kind::kZcdp;
  // rho for zCDP, epsilon for pure DP.
  double value = 0.5;
  // Reporting only: the (epsilon, delta) conversion of a zCDP budget.
  std::optional<double> delta;

  // Throw UsageError unless the parameter is positive and finite and delta,
  // when given, lies in (0, 1).
  static PrivacyBudget Zcdp(double rho, std::optional<double> delta = {});
  static PrivacyBudget Pure(double epsilon);

  // l_p norm the calibration needs: 2 for zCDP, 1 for pure DP.
  int norm_order() const { return kind == Kind::kZcdp ? 2 : 1; }
  PrivacyBudget Scaled(double factor) const;
  std::string ToString() const;
};

// rho-zCDP implies (rho + 2 sqrt(rho ln(1/delta)), delta)-DP.
double ZcdpToApproxDp(double rho, double delta);

struct NoiseDescriptor {
  NoiseKind kind = NoiseKind::kGaussian;
  // Gaussian standard deviation or Laplace scale.
  double scale = 0.0;
  double stddev = 0.0;
};

// zCDP: Gaussian with sigma = sens2 / sqrt(2 rho). Pure DP: Laplace with
// scale sens1 / epsilon. Throws UsageError if the needed sensitivity is
// missing or not positive.
NoiseDescriptor Calibrate(const PrivacyBudget& budget,
                          std::optional<double> sens1,
                          std::optional<double> sens2);

// Sensitivity a mechanism calibrates to: exact when available, otherwise a
// certified upper bound.
struct ResolvedSensitivity {
  double value = 0.0;
  bool exact = false;
  int p = 2;
  std::string method;
};

ResolvedSensitivity ResolveSensitivity(const Factorization& f,
                                       const SetParams& set,
                                       const PrivacyBudget& budget,
                                       const SensOptions& options = {});

// Outputs prefix sums plus online correlated noise. `f` must outlive it.
class StreamingMechanism {
 public:
  StreamingMechanism(const Factorization& f, const NoiseDescriptor& noise,
                     std::uint64_t seed);

  // Consumes x[t] and returns a_t. Throws UsageError after T steps.
  double Observe(std::int64_t x);
  std::int64_t step() const { return noise_->step(); }

 private:
  std::unique_ptr<NoiseStream> noise_;
  std::int64_t prefix_ = 0;
};

struct RunOptions {
  // Test hook: replaces the calibrated noise scale (0 gives exact output).
  std::optional<double> noise_scale_override;
  SensOptions sens;
};

struct MechanismRun {
  std::string factorization;
  PrivacyBudget budget;
  NoiseDescriptor noise;
  ResolvedSensitivity sensitivity;
  std::uint64_t seed = 0;
  std::vector<double> outputs;
};

// Resolves sensitivity and noise for (f, budget, set) without running.
MechanismRun PrepareRun(const Factorization& f, const PrivacyBudget& budget,
                        const SetParams& set, std::uint64_t seed,
                        const RunOptions& options = {});

MechanismRun RunStream(const Factorization& f, const PrivacyBudget& budget,
                       const SetParams& set, std::span<const std::int64_t> input,
                       std::uint64_t seed, const RunOptions& options = {});

// Pull/push form: `next` is called once per step to read x[t], and `emit`
// receives a_t before `next` is called again.
MechanismRun RunStream(const Factorization& f, const PrivacyBudget& budget,
                       const SetParams& set,
                       const std::function<std::int64_t()>& next,
                       const std::function<void(std::int64_t, double)>& emit,
                       std::uint64_t seed, const RunOptions& options = {});

struct ErrorReport {
  double max_se = 0.0;
  double mean_se = 0.0;
  bool sens_exact = false;
  double sens_value = 0.0;
};

// MaxSE = ||L||_{2->inf} * s and MeanSE = ||L||_F / sqrt(T) * s, where
// s = sens2 / sqrt(2 rho) for zCDP and sqrt(2) sens1 / epsilon for pure DP.
ErrorReport AnalyticError(const Factorization& f, const PrivacyBudget& budget,
                          const SetParams& set, const RunOptions& options = {});

// Monte-Carlo MaxSE and MeanSE from `trials` runs on the zero stream.
ErrorReport EmpiricalError(const Factorization& f, const PrivacyBudget& budget,
                           const SetParams& set, int trials, std::uint64_t seed,
                           const RunOptions& options = {});

// Per-step sample variances of a_t on the zero stream (mean known to be 0).
std::vector<double> EmpiricalVariances(const Factorization& f,
                                       const NoiseDescriptor& noise, int trials,
                                       std::uint64_t seed);

}  // namespace dyncount

#endif  // DYNCOUNT_MECHANISMS_H_
