// Copyright 2026 The NetCloak Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// -----------------------------------------------------------------------------
// File: sampling.cc
// -----------------------------------------------------------------------------

#include "netcloak/sampling.h"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "netcloak/error.h"
#include "netcloak/rng.h"

namespace netcloak {
namespace {

struct KindName {
  SamplingKind kind;
  std::string_view name;
};

constexpr KindName kKindNames[] = {
    {SamplingKind::kBfs, "bfs"},   {SamplingKind::kDfs, "dfs"},
    {SamplingKind::kRfs, "rfs"},   {SamplingKind::kSbs, "sbs"},
    {SamplingKind::kFfs, "ffs"},   {SamplingKind::kRw, "rw"},
    {SamplingKind::kMhrw, "mhrw"}, {SamplingKind::kMhda, "mhda"},
    {SamplingKind::kRcmh, "rcmh"},
};

// The router-only adjacency of a graph, indexed for fast random access.
struct Adjacency {
  std::vector<std::string> ids;
  std::vector<std::vector<int>> neighbors;

  explicit Adjacency(const Topology& graph) {
    ids = graph.Routers();
    std::map<std::string, int, std::less<>> index;
    for (size_t i = 0; i < ids.size(); ++i) index[ids[i]] = static_cast<int>(i);
    neighbors.resize(ids.size());
    for (size_t i = 0; i < ids.size(); ++i) {
      for (const std::string& n : graph.Neighbors(ids[i])) {
        auto it = index.find(n);
        if (it != index.end()) neighbors[i].push_back(it->second);
      }
    }
  }

  int Degree(int v) const { return static_cast<int>(neighbors[v].size()); }
};

int ComponentSize(const Adjacency& adj, int start) {
  std::vector<bool> seen(adj.ids.size(), false);
  std::vector<int> stack = {start};
  seen[start] = true;
  int size = 0;
  while (!stack.empty()) {
    int v = stack.back();
    stack.pop_back();
    ++size;
    for (int w : adj.neighbors[v]) {
      if (!seen[w]) {
        seen[w] = true;
        stack.push_back(w);
      }
    }
  }
  return size;
}

// Bookkeeping shared by all strategies: the visited set in visit order.
class Visited {
 public:
  Visited(size_t size, int target) : seen_(size, false), target_(target) {}

  bool Contains(int v) const { return seen_[v]; }
  bool Full() const { return static_cast<int>(order_.size()) >= target_; }
  void Add(int v) {
    if (!seen_[v] && !Full()) {
      seen_[v] = true;
      order_.push_back(v);
    }
  }
  const std::vector<int>& order() const { return order_; }

 private:
  std::vector<bool> seen_;
  std::vector<int> order_;
  int target_;
};

std::vector<int> ShuffledNeighbors(const Adjacency& adj, int v, Rng& rng) {
  std::vector<int> result = adj.neighbors[v];
  rng.Shuffle(result);
  return result;
}

// Unvisited neighbors of the visited set, in ascending index order.
std::vector<int> Frontier(const Adjacency& adj, const Visited& visited) {
  std::set<int> frontier;
  for (int v : visited.order()) {
    for (int w : adj.neighbors[v]) {
      if (!visited.Contains(w)) frontier.insert(w);
    }
  }
  return {frontier.begin(), frontier.end()};
}

void SampleBfs(const Adjacency& adj, int start, Visited& visited, Rng& rng) {
  std::deque<int> queue = {start};
  visited.Add(start);
  while (!queue.empty() && !visited.Full()) {
    int v = queue.front();
    queue.pop_front();
    for (int w : ShuffledNeighbors(adj, v, rng)) {
      if (!visited.Contains(w)) {
        visited.Add(w);
        queue.push_back(w);
      }
    }
  }
}

void SampleDfs(const Adjacency& adj, int start, Visited& visited, Rng& rng) {
  std::vector<int> stack = {start};
  while (!stack.empty() && !visited.Full()) {
    int v = stack.back();
    stack.pop_back();
    if (visited.Contains(v)) continue;
    visited.Add(v);
    for (int w : ShuffledNeighbors(adj, v, rng)) {
      if (!visited.Contains(w)) stack.push_back(w);
    }
  }
}

// Random first sampling: the next node is drawn uniformly from the frontier.
void SampleRfs(const Adjacency& adj, int start, Visited& visited, Rng& rng) {
  visited.Add(start);
  while (!visited.Full()) {
    std::vector<int> frontier = Frontier(adj, visited);
    if (frontier.empty()) return;
    visited.Add(rng.Pick(frontier));
  }
}

// Snowball and forest fire proceed in waves; each member of the current wave
// recruits some unvisited neighbors. When a fire dies out it is re-ignited at
// a random frontier node, which keeps the sample connected.
template <typename Recruits>
void SampleWaves(const Adjacency& adj, int start, Visited& visited, Rng& rng,
                 Recruits recruits) {
  std::vector<int> wave = {start};
  visited.Add(start);
  while (!visited.Full()) {
    std::vector<int> next;
    for (int v : wave) {
      std::vector<int> candidates;
      for (int w : ShuffledNeighbors(adj, v, rng)) {
        if (!visited.Contains(w)) candidates.push_back(w);
      }
      int count = std::min<int>(recruits(rng), candidates.size());
      for (int i = 0; i < count && !visited.Full(); ++i) {
        visited.Add(candidates[i]);
        next.push_back(candidates[i]);
      }
    }
    if (next.empty()) {
      std::vector<int> frontier = Frontier(adj, visited);
      if (frontier.empty()) return;
      int restart = rng.Pick(frontier);
      visited.Add(restart);
      next.push_back(restart);
    }
    wave = std::move(next);
  }
}

enum class Acceptance { kAlways, kMetropolis, kDelayed, kRejectionControlled };

// Random walks without restarts. Metropolis-Hastings variants accept a move
// v -> w with probability min(1, deg(v) / deg(w)); the delayed-acceptance
// variant, when an accepted move would backtrack, draws a second proposal
// that excludes the previous node; the rejection-controlled variant uses the
// tempered ratio (deg(v) / deg(w))^alpha.
void SampleWalk(const Adjacency& adj, int start, Visited& visited, Rng& rng,
                Acceptance acceptance, double alpha) {
  const size_t size = adj.ids.size();
  const uint64_t max_steps = 200 * size * size + 10000;
  int v = start;
  int previous = -1;
  visited.Add(v);
  for (uint64_t step = 0; step < max_steps && !visited.Full(); ++step) {
    const std::vector<int>& nbrs = adj.neighbors[v];
    if (nbrs.empty()) return;
    int w = rng.Pick(nbrs);
    double ratio = static_cast<double>(adj.Degree(v)) / adj.Degree(w);
    bool accept = true;
    switch (acceptance) {
      case Acceptance::kAlways:
        break;
      case Acceptance::kMetropolis:
        accept = rng.Uniform() < std::min(1.0, ratio);
        break;
      case Acceptance::kRejectionControlled:
        accept = rng.Uniform() < std::min(1.0, std::pow(ratio, alpha));
        break;
      case Acceptance::kDelayed: {
        accept = rng.Uniform() < std::min(1.0, ratio);
        if (accept && w == previous && nbrs.size() > 1) {
          std::vector<int> others;
          for (int x : nbrs) {
            if (x != previous) others.push_back(x);
          }
          int second = rng.Pick(others);
          double second_ratio =
              static_cast<double>(adj.Degree(v)) / adj.Degree(second);
          if (rng.Uniform() < std::min(1.0, second_ratio)) w = second;
        }
        break;
      }
    }
    if (!accept) continue;
    previous = v;
    v = w;
    visited.Add(v);
  }
}

}  // namespace

std::string_view SamplingKindName(SamplingKind kind) {
  for (const KindName& entry : kKindNames) {
    if (entry.kind == kind) return entry.name;
  }
  return "unknown";
}

std::optional<SamplingKind> ParseSamplingKind(std::string_view name) {
  for (const KindName& entry : kKindNames) {
    if (entry.name == name) return entry.kind;
  }
  return std::nullopt;
}

const std::vector<SamplingKind>& AllSamplingKinds() {
  static const std::vector<SamplingKind> kinds = [] {
    std::vector<SamplingKind> result;
    for (const KindName& entry : kKindNames) result.push_back(entry.kind);
    return result;
  }();
  return kinds;
}

Topology SampleSubgraph(const Topology& ref, int n,
                        const SamplingStrategy& strategy) {
  Adjacency adj(ref);
  if (n < 1 || n > static_cast<int>(adj.ids.size())) {
    throw Error(ErrorCode::kInvalidArgument,
                "sample size " + std::to_string(n) + " outside [1, " +
                    std::to_string(adj.ids.size()) + "]");
  }
  Rng rng(strategy.seed);
  int start = static_cast<int>(rng.Below(adj.ids.size()));
  if (ComponentSize(adj, start) < n) {
    throw Error(ErrorCode::kUnreachableTarget,
                "component of " + adj.ids[start] + " holds fewer than " +
                    std::to_string(n) + " routers");
  }
  Visited visited(adj.ids.size(), n);
  switch (strategy.kind) {
    case SamplingKind::kBfs:
      SampleBfs(adj, start, visited, rng);
      break;
    case SamplingKind::kDfs:
      SampleDfs(adj, start, visited, rng);
      break;
    case SamplingKind::kRfs:
      SampleRfs(adj, start, visited, rng);
      break;
    case SamplingKind::kSbs: {
      int width = std::max(1, strategy.snowball_width);
      SampleWaves(adj, start, visited, rng, [width](Rng&) { return width; });
      break;
    }
    case SamplingKind::kFfs: {
      double p = std::clamp(strategy.fire_probability, 0.0, 0.99);
      SampleWaves(adj, start, visited, rng, [p](Rng& r) {
        int burned = 0;
        while (r.Bernoulli(p)) ++burned;
        return burned;
      });
      break;
    }
    case SamplingKind::kRw:
      SampleWalk(adj, start, visited, rng, Acceptance::kAlways, 0);
      break;
    case SamplingKind::kMhrw:
      SampleWalk(adj, start, visited, rng, Acceptance::kMetropolis, 0);
      break;
    case SamplingKind::kMhda:
      SampleWalk(adj, start, visited, rng, Acceptance::kDelayed, 0);
      break;
    case SamplingKind::kRcmh:
      SampleWalk(adj, start, visited, rng, Acceptance::kRejectionControlled,
                 strategy.rcmh_alpha);
      break;
  }
  if (!visited.Full()) {
    throw Error(ErrorCode::kUnreachableTarget,
                std::string(SamplingKindName(strategy.kind)) + " visited only " +
                    std::to_string(visited.order().size()) + " of " +
                    std::to_string(n) + " routers");
  }
  std::set<std::string> ids;
  for (int v : visited.order()) ids.insert(adj.ids[v]);
  return ref.InducedSubgraph(ids);
}

}  // namespace netcloak
