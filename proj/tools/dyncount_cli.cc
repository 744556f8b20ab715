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

// dyncount_cli: sens | bounds | simulate | estimate.
//
// Exit codes: 0 ok, 2 usage, 3 data error, 4 budget or feasibility.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dyncount/bounds_report.h"
#include "dyncount/errors.h"
#include "dyncount/estimators.h"
#include "dyncount/factorizations.h"
#include "dyncount/mechanisms.h"
#include "dyncount/sensitivity.h"
#include "dyncount/stream_io.h"
#include "json.hpp"

namespace {

using dyncount::CsvWriter;
using dyncount::FormatNumber;
using nlohmann::json;

constexpr std::int64_t kMaxSimulationT = std::int64_t{1} << 22;

struct FactorFlags {
  std::string kind = "sqrt";
  int b = 2;
  std::string variant = "plain";

  void Add(CLI::App* cmd) {
    cmd->add_option("--fact", kind, "naive | sqrt | tree")
        ->check(CLI::IsMember({"naive", "sqrt", "tree"}));
    cmd->add_option("--b", b, "tree branching factor");
    cmd->add_option("--variant", variant,
                    "tree variant: plain | subtract | reduced");
  }
  dyncount::FactorizationSpec Spec() const {
    return dyncount::FactorizationSpec::Parse(kind, b, variant);
  }
};

struct BudgetFlags {
  std::optional<double> rho;
  std::optional<double> eps;
  std::optional<double> delta;

  void Add(CLI::App* cmd) {
    auto* r = cmd->add_option("--rho", rho, "zCDP parameter (default 0.5)");
    auto* e = cmd->add_option("--eps", eps, "pure DP epsilon");
    r->excludes(e);
    cmd->add_option("--delta", delta, "report (eps, delta) for a zCDP budget");
  }
  dyncount::PrivacyBudget Budget() const {
    if (eps) {
      if (delta) throw dyncount::UsageError("--delta applies to zCDP only");
      return dyncount::PrivacyBudget::Pure(*eps);
    }
    return dyncount::PrivacyBudget::Zcdp(rho.value_or(0.5), delta);
  }
};

std::ostream& OpenOutput(const std::string& path, std::ofstream& file) {
  if (path.empty() || path == "-") return std::cout;
  file.open(path, std::ios::binary);
  if (!file) throw dyncount::DataError("cannot write " + path);
  return file;
}

json Finite(double x) {
  return std::isfinite(x) ? json(x) : json(nullptr);
}

// ---------------------------------------------------------------- sens

struct SensFlags {
  FactorFlags fact;
  std::string T = "8";
  std::int64_t k = 1;
  std::int64_t D = 1;
  int p = 2;
  std::optional<std::string> method;
  int trials = 10'000;
  std::uint64_t seed = 0;
};

int RunSens(const SensFlags& f) {
  const std::int64_t T = dyncount::ParseCount(f.T);
  const auto spec = f.fact.Spec();
  const auto fact = dyncount::MakeFactorization(spec, T);
  const auto set = dyncount::SetParams::Make(f.D, f.k, T);
  std::string method_name = f.method.value_or(
      spec.kind == dyncount::FactorizationSpec::Kind::kTree ? "dp" : "bound");
  dyncount::SensOptions options;
  options.trials = f.trials;
  options.seed = f.seed;
  const auto result = dyncount::ComputeSensitivity(
      fact, f.p, set, dyncount::ParseMethod(method_name), options);

  json out;
  out["factorization"] = dyncount::Label(fact);
  out["T"] = T;
  out["k"] = f.k;
  out["D"] = f.D;
  out["p"] = f.p;
  out["method"] = result.method;
  out["exact"] = result.exact();
  out["value"] = result.value ? json(*result.value) : json(nullptr);
  out["lower"] = Finite(result.lower);
  out["upper"] = Finite(result.upper);
  if (result.witness) {
    out["witness"] = std::vector<std::int64_t>(
        result.witness->data(), result.witness->data() + result.witness->size());
  } else {
    out["witness"] = nullptr;
  }
  json forms = json::array();
  for (const auto& b : result.closed_forms) {
    forms.push_back(
        {{"name", b.name}, {"lower", Finite(b.lower)}, {"upper", Finite(b.upper)}});
  }
  out["closed_forms"] = forms;
  if (!result.note.empty()) out["note"] = result.note;
  std::cout << out.dump(2) << "\n";
  return 0;
}

// -------------------------------------------------------------- bounds

struct BoundsFlags {
  std::string T = "2^20";
  std::vector<std::string> ks;
  std::string k_min = "1";
  std::optional<std::string> k_max;
  std::int64_t k_factor = 2;
  std::int64_t D = 1;
  BudgetFlags budget;
  std::optional<int> b;
  std::string output;
};

int RunBounds(const BoundsFlags& f) {
  dyncount::BoundsQuery q;
  q.T = dyncount::ParseCount(f.T);
  q.D = f.D;
  q.budget = f.budget.Budget();
  q.b = f.b;
  if (!f.ks.empty()) {
    for (const auto& k : f.ks) q.ks.push_back(dyncount::ParseCount(k));
  } else {
    if (f.k_factor < 2) throw dyncount::UsageError("--k-factor must be >= 2");
    const std::int64_t hi = f.k_max ? dyncount::ParseCount(*f.k_max) : q.T;
    for (std::int64_t k = dyncount::ParseCount(f.k_min); k <= hi;) {
      q.ks.push_back(k);
      if (__builtin_mul_overflow(k, f.k_factor, &k)) break;
    }
  }
  const auto rows = dyncount::BoundsReport(q);
  std::ofstream file;
  CsvWriter csv(OpenOutput(f.output, file));
  csv.Row(dyncount::ReportHeader());
  for (const auto& row : rows) csv.Row(dyncount::ReportFields(row));
  return 0;
}

// ------------------------------------------------------------ simulate

struct SimulateFlags {
  FactorFlags fact;
  std::string T = "64";
  std::int64_t k = 1;
  std::int64_t D = 1;
  BudgetFlags budget;
  int trials = 1000;
  std::uint64_t seed = 0;
  std::optional<double> sigma;
  std::string output;
};

double RelativeDeviation(double analytic, double empirical) {
  if (analytic == 0.0) return empirical == 0.0 ? 0.0 : INFINITY;
  return std::abs(empirical - analytic) / analytic;
}

int RunSimulate(const SimulateFlags& f) {
  const std::int64_t T = dyncount::ParseCount(f.T);
  if (T > kMaxSimulationT) {
    throw dyncount::UsageError("simulate caps T at 2^22");
  }
  if (f.trials < 1) throw dyncount::UsageError("--trials must be >= 1");
  const auto fact = dyncount::MakeFactorization(f.fact.Spec(), T);
  const auto set = dyncount::SetParams::Make(f.D, f.k, T);
  const auto budget = f.budget.Budget();
  dyncount::RunOptions options;
  options.noise_scale_override = f.sigma;
  const auto analytic = dyncount::AnalyticError(fact, budget, set, options);
  const auto empirical =
      dyncount::EmpiricalError(fact, budget, set, f.trials, f.seed, options);

  std::ofstream file;
  CsvWriter csv(OpenOutput(f.output, file));
  csv.Row({"mechanism", "T", "k", "D", "budget", "trials", "seed", "metric",
           "analytic", "empirical", "relative_deviation", "sensitivity",
           "sensitivity_kind"});
  auto emit = [&](const char* metric, double a, double e) {
    csv.Row({dyncount::Label(fact), std::to_string(T), std::to_string(f.k),
             std::to_string(f.D), budget.ToString(), std::to_string(f.trials),
             std::to_string(f.seed), metric, FormatNumber(a), FormatNumber(e),
             FormatNumber(RelativeDeviation(a, e)),
             FormatNumber(analytic.sens_value),
             analytic.sens_exact ? "exact" : "upper"});
  };
  emit("max_se", analytic.max_se, empirical.max_se);
  emit("mean_se", analytic.mean_se, empirical.mean_se);
  return 0;
}

// ------------------------------------------------------------ estimate

struct EstimateFlags {
  std::string problem;
  std::string input;
  FactorFlags fact;
  BudgetFlags budget;
  std::int64_t k = 1;
  std::optional<std::int64_t> D;
  std::uint64_t seed = 0;
  std::string output;
  std::optional<std::string> trunc_log;
  bool with_truth = false;
  std::optional<double> sigma;
};

int RunEstimate(const EstimateFlags& f) {
  const auto stream = dyncount::ReadStreamFile(f.input);
  dyncount::EstimateConfig config;
  config.problem = dyncount::ParseProblem(f.problem);
  config.factorization = f.fact.Spec();
  config.budget = f.budget.Budget();
  config.k = f.k;
  config.D = f.D;
  config.seed = f.seed;
  config.run.noise_scale_override = f.sigma;
  const auto run = std::visit(
      [&](const auto& s) { return dyncount::Estimate(s, config); }, stream);

  {
    std::ofstream file;
    CsvWriter csv(OpenOutput(f.output, file));
    std::vector<std::string> header{"t"};
    if (run.problem == dyncount::Problem::kDegreeCount) {
      const auto& nodes = std::get<dyncount::GraphStream>(stream).nodes;
      for (const auto& n : nodes) {
        if (f.with_truth) header.push_back("true_value:" + n);
        header.push_back("private_estimate:" + n);
      }
      csv.Row(header);
      const std::size_t T = run.node_outputs.empty() ? 0 : run.node_outputs[0].size();
      for (std::size_t t = 0; t < T; ++t) {
        std::vector<std::string> row{std::to_string(t)};
        for (std::size_t v = 0; v < run.node_outputs.size(); ++v) {
          if (f.with_truth) row.push_back(std::to_string(run.node_truth[v][t]));
          row.push_back(FormatNumber(run.node_outputs[v][t]));
        }
        csv.Row(row);
      }
    } else {
      if (f.with_truth) header.push_back("true_value");
      header.push_back("private_estimate");
      csv.Row(header);
      for (std::size_t t = 0; t < run.outputs.size(); ++t) {
        std::vector<std::string> row{std::to_string(t)};
        if (f.with_truth) row.push_back(std::to_string(run.truth[t]));
        row.push_back(FormatNumber(run.outputs[t]));
        csv.Row(row);
      }
    }
  }

  std::string log_path = f.trunc_log.value_or(
      f.output.empty() || f.output == "-" ? "" : f.output + ".trunc.csv");
  if (!log_path.empty()) {
    std::ofstream file;
    CsvWriter csv(OpenOutput(log_path, file));
    csv.Row({"t", "position", "key"});
    for (const auto& e : run.truncation) {
      csv.Row({std::to_string(e.t), std::to_string(e.position), e.key});
    }
  }

  std::cerr << "mechanism=" << run.mechanism
            << " budget=" << run.budget.ToString()
            << " sensitivity=" << FormatNumber(run.sensitivity.value)
            << (run.sensitivity.exact ? " (exact)" : " (upper bound)")
            << " noise_stddev=" << FormatNumber(run.noise.stddev)
            << " truncated=" << run.truncation.size();
  if (run.restricted_neighbourhood) {
    std::cerr << " neighbourhood=(D,k)-restricted";
  }
  std::cerr << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Private continual counting over fully dynamic streams"};
  app.require_subcommand(1);

  SensFlags sens;
  auto* sens_cmd = app.add_subcommand("sens", "sensitivity of a factorization");
  sens.fact.Add(sens_cmd);
  sens_cmd->add_option("--T", sens.T, "horizon (accepts 2^e)");
  sens_cmd->add_option("--k", sens.k, "l1 budget of the sensitivity set");
  sens_cmd->add_option("--D", sens.D, "interval-sum bound");
  sens_cmd->add_option("--p", sens.p, "norm order")->check(CLI::IsMember({1, 2}));
  sens_cmd->add_option("--method", sens.method, "dp | bound | brute | empirical");
  sens_cmd->add_option("--trials", sens.trials, "samples for empirical");
  sens_cmd->add_option("--seed", sens.seed);

  BoundsFlags bounds;
  auto* bounds_cmd = app.add_subcommand("bounds", "closed-form error bounds (CSV)");
  bounds_cmd->add_option("--T", bounds.T, "horizon (accepts 2^e)");
  bounds_cmd->add_option("--k", bounds.ks, "explicit k values")->delimiter(',');
  bounds_cmd->add_option("--k-min", bounds.k_min);
  bounds_cmd->add_option("--k-max", bounds.k_max, "default T");
  bounds_cmd->add_option("--k-factor", bounds.k_factor, "geometric k step");
  bounds_cmd->add_option("--D", bounds.D);
  bounds_cmd->add_option("--b", bounds.b, "fixed odd tree branching factor");
  bounds.budget.Add(bounds_cmd);
  bounds_cmd->add_option("--output,-o", bounds.output, "CSV path (default stdout)");

  SimulateFlags sim;
  auto* sim_cmd =
      app.add_subcommand("simulate", "analytic vs Monte-Carlo error (CSV)");
  sim.fact.Add(sim_cmd);
  sim_cmd->add_option("--T", sim.T, "horizon, at most 2^22");
  sim_cmd->add_option("--k", sim.k);
  sim_cmd->add_option("--D", sim.D);
  sim.budget.Add(sim_cmd);
  sim_cmd->add_option("--trials", sim.trials);
  sim_cmd->add_option("--seed", sim.seed);
  sim_cmd->add_option("--sigma", sim.sigma, "override the noise scale (0 = exact)");
  sim_cmd->add_option("--output,-o", sim.output, "CSV path (default stdout)");

  EstimateFlags est;
  auto* est_cmd = app.add_subcommand("estimate", "private estimates of a stream");
  est_cmd->add_option("--problem", est.problem, "countdistinct | degree | triangles")
      ->required();
  est_cmd->add_option("--input,-i", est.input, "JSONL stream file")->required();
  est.fact.Add(est_cmd);
  est.budget.Add(est_cmd);
  est_cmd->add_option("--k", est.k, "contribution bound");
  est_cmd->add_option("--D", est.D, "degree bound (triangles)");
  est_cmd->add_option("--seed", est.seed);
  est_cmd->add_option("--output,-o", est.output, "CSV path (default stdout)");
  est_cmd->add_option("--trunc-log", est.trunc_log,
                      "truncation log path (default <output>.trunc.csv)");
  est_cmd->add_flag("--with-truth", est.with_truth, "add a true_value column");
  est_cmd->add_option("--sigma", est.sigma, "override the noise scale (0 = exact)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*sens_cmd) return RunSens(sens);
    if (*bounds_cmd) return RunBounds(bounds);
    if (*sim_cmd) return RunSimulate(sim);
    if (*est_cmd) return RunEstimate(est);
  } catch (const dyncount::UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const dyncount::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 3;
  } catch (const dyncount::FeasibilityError& e) {
    std::cerr << "infeasible: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
