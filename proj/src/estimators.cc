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

#include "dyncount/estimators.h"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>
#include <unordered_map>

#include "dyncount/errors.h"
#include "dyncount/parallel.h"

namespace dyncount {
namespace {

// Undirected simple graph with adjacency sets.
class Graph {
 public:
  explicit Graph(int n) : adj_(n) {}

  bool Has(int a, int b) const { return adj_[a].count(b) > 0; }
  const std::set<int>& Neighbours(int v) const { return adj_[v]; }
  std::int64_t Degree(int v) const {
    return static_cast<std::int64_t>(adj_[v].size());
  }

  // Applies an update; returns the change in the triangle count.
  std::int64_t Apply(UpdateOp op, int a, int b) {
    if (op == UpdateOp::kInsert && !Has(a, b)) {
      const std::int64_t c = Common(adj_[a], adj_[b]);
      adj_[a].insert(b);
      adj_[b].insert(a);
      return c;
    }
    if (op == UpdateOp::kDelete && Has(a, b)) {
      adj_[a].erase(b);
      adj_[b].erase(a);
      return -Common(adj_[a], adj_[b]);
    }
    return 0;
  }

  static std::int64_t Common(const std::set<int>& x, const std::set<int>& y) {
    const auto& small = x.size() <= y.size() ? x : y;
    const auto& large = x.size() <= y.size() ? y : x;
    std::int64_t c = 0;
    for (int w : small) c += large.count(w);
    return c;
  }

 private:
  std::vector<std::set<int>> adj_;
};

int NodeCount(const GraphStream& s) { return static_cast<int>(s.nodes.size()); }

// Net-count presence per item, advanced one step at a time.
class ItemState {
 public:
  bool Present(const std::string& item) const {
    const auto it = net_.find(item);
    return it != net_.end() && it->second > 0;
  }
  void Apply(const ItemUpdate& u) {
    if (u.op == UpdateOp::kInsert) ++net_[u.item];
    if (u.op == UpdateOp::kDelete) --net_[u.item];
  }

 private:
  std::unordered_map<std::string, std::int64_t> net_;
};

// Items touched by a batch, in order of first appearance, with the batch
// positions of their updates.
std::vector<std::pair<std::string, std::vector<std::size_t>>> GroupByItem(
    const std::vector<ItemUpdate>& batch) {
  std::vector<std::pair<std::string, std::vector<std::size_t>>> out;
  std::unordered_map<std::string, std::size_t> slot;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    if (batch[i].op == UpdateOp::kNoop) continue;
    const auto [it, fresh] = slot.emplace(batch[i].item, out.size());
    if (fresh) out.push_back({batch[i].item, {}});
    out[it->second].second.push_back(i);
  }
  return out;
}

std::string EdgeName(const GraphStream& s, const Edge& e) {
  return s.nodes[e.first] + "|" + s.nodes[e.second];
}

template <typename T>
std::vector<T> PrefixSums(const std::vector<std::int64_t>& diff) {
  std::vector<T> out(diff.size());
  std::int64_t acc = 0;
  for (std::size_t t = 0; t < diff.size(); ++t) {
    acc += diff[t];
    out[t] = static_cast<T>(acc);
  }
  return out;
}

}  // namespace

Edge EdgeKey(const EdgeUpdate& u, int n) {
  if (u.a < 0 || u.b < 0 || u.a >= n || u.b >= n) {
    throw DataError("edge endpoint outside the node set");
  }
  if (u.a == u.b) throw DataError("self-loop updates are not allowed");
  return {std::min(u.a, u.b), std::max(u.a, u.b)};
}

std::vector<std::int64_t> DiffStreamCountDistinct(const ItemStream& s) {
  std::vector<std::int64_t> diff(s.steps.size(), 0);
  ItemState state;
  for (std::size_t t = 0; t < s.steps.size(); ++t) {
    for (const auto& [item, positions] : GroupByItem(s.steps[t])) {
      const bool before = state.Present(item);
      for (std::size_t i : positions) state.Apply(s.steps[t][i]);
      diff[t] += static_cast<std::int64_t>(state.Present(item)) - before;
    }
  }
  return diff;
}

std::vector<std::vector<std::int64_t>> DiffStreamDegree(const GraphStream& s) {
  const int n = NodeCount(s);
  const std::size_t T = s.steps.size();
  std::vector<std::vector<std::int64_t>> diff(n, std::vector<std::int64_t>(T, 0));
  Graph g(n);
  std::vector<std::int64_t> prev(n, 0);
  for (std::size_t t = 0; t < T; ++t) {
    std::set<int> touched;
    for (const EdgeUpdate& u : s.steps[t]) {
      if (u.op == UpdateOp::kNoop) continue;
      const Edge e = EdgeKey(u, n);
      g.Apply(u.op, e.first, e.second);
      touched.insert(e.first);
      touched.insert(e.second);
    }
    for (int v : touched) {
      diff[v][t] = g.Degree(v) - prev[v];
      prev[v] = g.Degree(v);
    }
  }
  return diff;
}

std::vector<std::int64_t> DiffStreamTriangles(const GraphStream& s) {
  const int n = NodeCount(s);
  std::vector<std::int64_t> diff(s.steps.size(), 0);
  Graph g(n);
  for (std::size_t t = 0; t < s.steps.size(); ++t) {
    for (const EdgeUpdate& u : s.steps[t]) {
      if (u.op == UpdateOp::kNoop) continue;
      const Edge e = EdgeKey(u, n);
      diff[t] += g.Apply(u.op, e.first, e.second);
    }
  }
  return diff;
}

std::map<std::string, std::int64_t> Flippancies(const ItemStream& s) {
  std::map<std::string, std::int64_t> flips;
  ItemState state;
  for (const auto& batch : s.steps) {
    for (const auto& [item, positions] : GroupByItem(batch)) {
      const bool before = state.Present(item);
      for (std::size_t i : positions) state.Apply(batch[i]);
      flips[item] += state.Present(item) != before;
    }
  }
  return flips;
}

std::map<Edge, std::int64_t> DegreeContributions(const GraphStream& s) {
  std::map<Edge, std::int64_t> out;
  for (const auto& batch : s.steps) {
    for (const EdgeUpdate& u : batch) {
      if (u.op != UpdateOp::kNoop) ++out[EdgeKey(u, NodeCount(s))];
    }
  }
  return out;
}

std::map<Edge, std::int64_t> TriangleContributions(const GraphStream& s) {
  const int n = NodeCount(s);
  std::map<Edge, std::int64_t> out;
  Graph g(n);
  for (const auto& batch : s.steps) {
    // Start-of-step neighbourhoods of every node the batch touches; all
    // other neighbourhoods are unchanged by the batch.
    std::map<int, std::set<int>> before;
    std::set<Edge> touched;
    for (const EdgeUpdate& u : batch) {
      if (u.op == UpdateOp::kNoop) continue;
      const Edge e = EdgeKey(u, n);
      out.emplace(e, 0);
      touched.insert(e);
      before.emplace(e.first, g.Neighbours(e.first));
      before.emplace(e.second, g.Neighbours(e.second));
    }
    for (const EdgeUpdate& u : batch) {
      if (u.op == UpdateOp::kNoop) continue;
      const Edge e = EdgeKey(u, n);
      g.Apply(u.op, e.first, e.second);
    }
    std::set<Edge> candidates = touched;
    for (const auto& [x, old_nbrs] : before) {
      for (int w : old_nbrs) candidates.insert({std::min(x, w), std::max(x, w)});
      for (int w : g.Neighbours(x)) {
        candidates.insert({std::min(x, w), std::max(x, w)});
      }
    }
    auto old_nbrs = [&](int v) -> const std::set<int>& {
      const auto it = before.find(v);
      return it != before.end() ? it->second : g.Neighbours(v);
    };
    for (const Edge& e : candidates) {
      const auto& nx = old_nbrs(e.first);
      const std::int64_t c_old =
          nx.count(e.second) ? Graph::Common(nx, old_nbrs(e.second)) : 0;
      const std::int64_t c_new =
          g.Has(e.first, e.second)
              ? Graph::Common(g.Neighbours(e.first), g.Neighbours(e.second))
              : 0;
      if (c_old != c_new) out[e] += std::abs(c_new - c_old);
    }
  }
  return out;
}

std::int64_t TrackMaxContribution(const ItemStream& s) {
  std::int64_t best = 0;
  for (const auto& [item, f] : Flippancies(s)) best = std::max(best, f);
  return best;
}

std::int64_t TrackMaxContribution(const GraphStream& s, ContributionMode mode) {
  std::map<Edge, std::int64_t> per_edge;
  if (mode == ContributionMode::kDegree) {
    per_edge = DegreeContributions(s);
  } else if (mode == ContributionMode::kTriangle) {
    per_edge = TriangleContributions(s);
  } else {
    throw UsageError("flippancy is defined for item streams");
  }
  std::int64_t best = 0;
  for (const auto& [e, c] : per_edge) best = std::max(best, c);
  return best;
}

std::int64_t MaxDegree(const GraphStream& s) {
  const int n = NodeCount(s);
  Graph g(n);
  std::int64_t best = 0;
  for (const auto& batch : s.steps) {
    for (const EdgeUpdate& u : batch) {
      if (u.op == UpdateOp::kNoop) continue;
      const Edge e = EdgeKey(u, n);
      g.Apply(u.op, e.first, e.second);
    }
    for (int v = 0; v < n; ++v) best = std::max(best, g.Degree(v));
  }
  return best;
}

Truncated<ItemStream> Truncate(const ItemStream& s, ContributionMode mode,
                               std::int64_t k) {
  if (mode != ContributionMode::kFlippancy) {
    throw UsageError("item streams are truncated by flippancy");
  }
  if (k < 0) throw UsageError("truncation threshold must be >= 0");
  Truncated<ItemStream> out{s, {}};
  ItemState state;
  std::unordered_map<std::string, std::int64_t> flips;
  for (std::size_t t = 0; t < s.steps.size(); ++t) {
    auto& batch = out.stream.steps[t];
    for (const auto& [item, positions] : GroupByItem(s.steps[t])) {
      const bool before = state.Present(item);
      ItemState trial = state;
      for (std::size_t i : positions) trial.Apply(batch[i]);
      if (trial.Present(item) != before && flips[item] >= k) {
        for (std::size_t i : positions) {
          batch[i] = ItemUpdate{UpdateOp::kNoop, ""};
          out.log.push_back({static_cast<std::int64_t>(t), i, item});
        }
        continue;
      }
      for (std::size_t i : positions) state.Apply(batch[i]);
      flips[item] += state.Present(item) != before;
    }
  }
  return out;
}

Truncated<GraphStream> Truncate(const GraphStream& s, ContributionMode mode,
                                std::int64_t k) {
  if (mode == ContributionMode::kTriangle) {
    throw UsageError("truncation by triangle contribution is not defined");
  }
  if (mode != ContributionMode::kDegree) {
    throw UsageError("graph streams are truncated by degree contribution");
  }
  if (k < 0) throw UsageError("truncation threshold must be >= 0");
  Truncated<GraphStream> out{s, {}};
  std::map<Edge, std::int64_t> count;
  for (std::size_t t = 0; t < s.steps.size(); ++t) {
    auto& batch = out.stream.steps[t];
    for (std::size_t i = 0; i < batch.size(); ++i) {
      if (batch[i].op == UpdateOp::kNoop) continue;
      const Edge e = EdgeKey(batch[i], NodeCount(s));
      if (count[e] >= k) {
        out.log.push_back({static_cast<std::int64_t>(t), i, EdgeName(s, e)});
        batch[i] = EdgeUpdate{};
        continue;
      }
      ++count[e];
    }
  }
  return out;
}

std::string ProblemName(Problem problem) {
  switch (problem) {
    case Problem::kCountDistinct:
      return "countdistinct";
    case Problem::kDegreeCount:
      return "degree";
    case Problem::kTriangleCount:
      return "triangles";
  }
  return "unknown";
}

Problem ParseProblem(const std::string& name) {
  if (name == "countdistinct") return Problem::kCountDistinct;
  if (name == "degree" || name == "degreecount") return Problem::kDegreeCount;
  if (name == "triangles" || name == "trianglecount") {
    return Problem::kTriangleCount;
  }
  throw UsageError("unknown problem '" + name +
                   "' (expected countdistinct, degree or triangles)");
}

namespace {

EstimatorRun ScalarRun(const std::vector<std::int64_t>& diff,
                       const SetParams& set, const EstimateConfig& config) {
  const Factorization f = MakeFactorization(config.factorization, set.T);
  const MechanismRun run =
      RunStream(f, config.budget, set, diff, config.seed, config.run);
  EstimatorRun out;
  out.problem = config.problem;
  out.mechanism = run.factorization;
  out.budget = run.budget;
  out.noise = run.noise;
  out.sensitivity = run.sensitivity;
  out.outputs = run.outputs;
  out.truth = PrefixSums<std::int64_t>(diff);
  return out;
}

std::int64_t Horizon(std::size_t steps) {
  if (steps == 0) throw DataError("stream has no time steps");
  return static_cast<std::int64_t>(steps);
}

}  // namespace

EstimatorRun Estimate(const ItemStream& s, const EstimateConfig& config) {
  if (config.problem != Problem::kCountDistinct) {
    throw DataError("item streams support countdistinct only");
  }
  const SetParams set = SetParams::Make(1, config.k, Horizon(s.steps.size()));
  Truncated<ItemStream> trunc = Truncate(s, ContributionMode::kFlippancy, config.k);
  EstimatorRun out = ScalarRun(DiffStreamCountDistinct(trunc.stream), set, config);
  out.truncation = std::move(trunc.log);
  return out;
}

EstimatorRun Estimate(const GraphStream& s, const EstimateConfig& config) {
  const std::int64_t T = Horizon(s.steps.size());
  if (config.problem == Problem::kCountDistinct) {
    throw DataError("graph streams support degree and triangles only");
  }
  if (config.problem == Problem::kTriangleCount) {
    if (!config.D) throw UsageError("TriangleCount requires D");
    const SetParams set = SetParams::Make(*config.D, config.k, T);
    const std::int64_t degree = MaxDegree(s);
    if (degree > set.D) {
      throw DataError("graph reaches degree " + std::to_string(degree) +
                      " > D = " + std::to_string(set.D));
    }
    const std::int64_t contrib =
        TrackMaxContribution(s, ContributionMode::kTriangle);
    if (contrib > set.k) {
      throw DataError("an edge has triangle contribution " +
                      std::to_string(contrib) + " > k = " +
                      std::to_string(set.k));
    }
    EstimatorRun out = ScalarRun(DiffStreamTriangles(s), set, config);
    out.restricted_neighbourhood = true;
    return out;
  }

  const SetParams set = SetParams::Make(1, config.k, T);
  Truncated<GraphStream> trunc = Truncate(s, ContributionMode::kDegree, config.k);
  const auto diffs = DiffStreamDegree(trunc.stream);
  const Factorization f = MakeFactorization(config.factorization, T);
  // Only the two endpoints of an edge see its updates, so each node counter
  // runs at half the total budget.
  const PrivacyBudget node_budget = config.budget.Scaled(0.5);
  const MechanismRun plan = PrepareRun(f, node_budget, set, config.seed, config.run);

  EstimatorRun out;
  out.problem = config.problem;
  out.mechanism = plan.factorization;
  out.budget = config.budget;
  out.noise = plan.noise;
  out.sensitivity = plan.sensitivity;
  out.truncation = std::move(trunc.log);
  const int n = static_cast<int>(diffs.size());
  out.node_outputs.assign(n, {});
  out.node_truth.assign(n, {});
  ParallelChunks(n, [&](int v) {
    StreamingMechanism mech(f, plan.noise, DeriveSeed(config.seed, v));
    auto& o = out.node_outputs[v];
    o.reserve(T);
    for (std::int64_t t = 0; t < T; ++t) o.push_back(mech.Observe(diffs[v][t]));
    out.node_truth[v] = PrefixSums<std::int64_t>(diffs[v]);
  });
  return out;
}

}  // namespace dyncount
