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

#include "dyncount/mechanisms.h"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

#include "dyncount/errors.h"
#include "dyncount/parallel.h"

namespace dyncount {
namespace {

void CheckPositive(double x, const char* what) {
  if (!(x > 0.0) || !std::isfinite(x)) {
    throw UsageError(std::string(what) + " must be positive and finite");
  }
}

}  // namespace

PrivacyBudget PrivacyBudget::Zcdp(double rho, std::optional<double> delta) {
  CheckPositive(rho, "rho");
  if (delta && !(*delta > 0.0 && *delta < 1.0)) {
    throw UsageError("delta must lie in (0, 1)");
  }
  return PrivacyBudget{Kind::kZcdp, rho, delta};
}

PrivacyBudget PrivacyBudget::Pure(double epsilon) {
  CheckPositive(epsilon, "epsilon");
  return PrivacyBudget{Kind::kPure, epsilon, std::nullopt};
}

PrivacyBudget PrivacyBudget::Scaled(double factor) const {
  PrivacyBudget out = *this;
  out.value *= factor;
  CheckPositive(out.value, "scaled budget");
  return out;
}

std::string PrivacyBudget::ToString() const {
  std::ostringstream os;
  os << (kind == Kind::kZcdp ? "rho=" : "eps=") << value;
  if (kind == Kind::kZcdp && delta) {
    os << " (eps=" << ZcdpToApproxDp(value, *delta) << ",delta=" << *delta
       << ")";
  }
  return os.str();
}

double ZcdpToApproxDp(double rho, double delta) {
  CheckPositive(rho, "rho");
  if (!(delta > 0.0 && delta < 1.0)) {
    throw UsageError("delta must lie in (0, 1)");
  }
  return rho + 2.0 * std::sqrt(rho * std::log(1.0 / delta));
}

NoiseDescriptor Calibrate(const PrivacyBudget& budget,
                          std::optional<double> sens1,
                          std::optional<double> sens2) {
  NoiseDescriptor out;
  if (budget.kind == PrivacyBudget::Kind::kZcdp) {
    if (!sens2) throw UsageError("zCDP calibration needs the l2 sensitivity");
    CheckPositive(*sens2, "l2 sensitivity");
    out.kind = NoiseKind::kGaussian;
    out.scale = *sens2 / std::sqrt(2.0 * budget.value);
    out.stddev = out.scale;
  } else {
    if (!sens1) throw UsageError("pure DP calibration needs the l1 sensitivity");
    CheckPositive(*sens1, "l1 sensitivity");
    out.kind = NoiseKind::kLaplace;
    out.scale = *sens1 / budget.value;
    out.stddev = std::sqrt(2.0) * out.scale;
  }
  return out;
}

ResolvedSensitivity ResolveSensitivity(const Factorization& f,
                                       const SetParams& set,
                                       const PrivacyBudget& budget,
                                       const SensOptions& options) {
  const int p = budget.norm_order();
  SensOptions quick = options;
  quick.refine_lower = false;
  SensResult r;
  if (std::holds_alternative<BaryTree>(f)) {
    try {
      r = ComputeSensitivity(f, p, set, SensMethod::kExactDp, quick);
    } catch (const FeasibilityError&) {
      r = ComputeSensitivity(f, p, set, SensMethod::kClosedBound, quick);
    }
  } else {
    r = ComputeSensitivity(f, p, set, SensMethod::kClosedBound, quick);
  }
  const double value = r.Certified();
  if (!(value > 0.0) || !std::isfinite(value)) {
    throw FeasibilityError("no finite sensitivity bound for " + Label(f));
  }
  return ResolvedSensitivity{value, r.exact(), p, r.method};
}

StreamingMechanism::StreamingMechanism(const Factorization& f,
                                       const NoiseDescriptor& noise,
                                       std::uint64_t seed)
    : noise_(MakeNoiseStream(f, noise.kind, noise.scale, seed)) {}

double StreamingMechanism::Observe(std::int64_t x) {
  const double z = noise_->Next();
  prefix_ += x;
  return static_cast<double>(prefix_) + z;
}

MechanismRun PrepareRun(const Factorization& f, const PrivacyBudget& budget,
                        const SetParams& set, std::uint64_t seed,
                        const RunOptions& options) {
  if (set.T != HorizonOf(f)) {
    throw UsageError("set T does not match the factorization");
  }
  MechanismRun run;
  run.factorization = Label(f);
  run.budget = budget;
  run.seed = seed;
  run.sensitivity = ResolveSensitivity(f, set, budget, options.sens);
  const double s = run.sensitivity.value;
  run.noise = Calibrate(budget, s, s);
  if (options.noise_scale_override) {
    const double o = *options.noise_scale_override;
    if (!(o >= 0.0) || !std::isfinite(o)) {
      throw UsageError("noise scale override must be finite and >= 0");
    }
    run.noise.scale = o;
    run.noise.stddev = run.noise.kind == NoiseKind::kLaplace ? std::sqrt(2.0) * o : o;
  }
  return run;
}

MechanismRun RunStream(const Factorization& f, const PrivacyBudget& budget,
                       const SetParams& set, std::span<const std::int64_t> input,
                       std::uint64_t seed, const RunOptions& options) {
  if (static_cast<std::int64_t>(input.size()) != set.T) {
    throw UsageError("input length does not match T");
  }
  std::size_t t = 0;
  return RunStream(
      f, budget, set, [&] { return input[t++]; },
      [](std::int64_t, double) {}, seed, options);
}

MechanismRun RunStream(const Factorization& f, const PrivacyBudget& budget,
                       const SetParams& set,
                       const std::function<std::int64_t()>& next,
                       const std::function<void(std::int64_t, double)>& emit,
                       std::uint64_t seed, const RunOptions& options) {
  MechanismRun run = PrepareRun(f, budget, set, seed, options);
  StreamingMechanism mech(f, run.noise, seed);
  run.outputs.reserve(set.T);
  for (std::int64_t t = 0; t < set.T; ++t) {
    const double a = mech.Observe(next());
    run.outputs.push_back(a);
    emit(t, a);
  }
  return run;
}

ErrorReport AnalyticError(const Factorization& f, const PrivacyBudget& budget,
                          const SetParams& set, const RunOptions& options) {
  const MechanismRun run = PrepareRun(f, budget, set, 0, options);
  const FactorNorms norms = Norms(f);
  ErrorReport out;
  out.max_se = norms.l_two_to_inf * run.noise.stddev;
  out.mean_se = norms.l_frobenius_over_sqrtT * run.noise.stddev;
  out.sens_exact = run.sensitivity.exact;
  out.sens_value = run.sensitivity.value;
  return out;
}

std::vector<double> EmpiricalVariances(const Factorization& f,
                                       const NoiseDescriptor& noise, int trials,
                                       std::uint64_t seed) {
  if (trials < 1) throw UsageError("trials must be >= 1");
  const std::int64_t T = HorizonOf(f);
  const int chunks = std::min(trials, 64);
  std::vector<std::vector<double>> sums(chunks, std::vector<double>(T, 0.0));
  ParallelChunks(chunks, [&](int c) {
    const int lo = static_cast<int>(static_cast<std::int64_t>(trials) * c / chunks);
    const int hi =
        static_cast<int>(static_cast<std::int64_t>(trials) * (c + 1) / chunks);
    for (int trial = lo; trial < hi; ++trial) {
      StreamingMechanism mech(f, noise, DeriveSeed(seed, trial));
      for (std::int64_t t = 0; t < T; ++t) {
        const double a = mech.Observe(0);
        sums[c][t] += a * a;
      }
    }
  });
  std::vector<double> var(T, 0.0);
  for (int c = 0; c < chunks; ++c) {
    for (std::int64_t t = 0; t < T; ++t) var[t] += sums[c][t];
  }
  for (double& v : var) v /= trials;
  return var;
}

ErrorReport EmpiricalError(const Factorization& f, const PrivacyBudget& budget,
                           const SetParams& set, int trials, std::uint64_t seed,
                           const RunOptions& options) {
  const MechanismRun run = PrepareRun(f, budget, set, seed, options);
  const std::vector<double> var = EmpiricalVariances(f, run.noise, trials, seed);
  double most = 0.0, total = 0.0;
  for (double v : var) {
    most = std::max(most, v);
    total += v;
  }
  ErrorReport out;
  out.max_se = std::sqrt(most);
  out.mean_se = std::sqrt(total / static_cast<double>(var.size()));
  out.sens_exact = run.sensitivity.exact;
  out.sens_value = run.sensitivity.value;
  return out;
}

}  // namespace dyncount
