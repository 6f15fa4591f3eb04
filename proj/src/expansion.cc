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
// File: expansion.cc
// -----------------------------------------------------------------------------

#include "netcloak/expansion.h"

#include <algorithm>
#include <functional>
#include <limits>
#include <tuple>

#include "netcloak/error.h"
#include "netcloak/rng.h"

namespace netcloak {
namespace {

// Copies hosts of `source` and their links into `target`; a host keeps its
// edges to routers that exist in `target`.
void CopyHosts(const Topology& source, Topology& target) {
  for (const std::string& host : source.Hosts()) {
    target.AddNode(host, NodeKind::kHost, source.Asn(host));
  }
  for (const std::string& host : source.Hosts()) {
    for (const std::string& n : source.Neighbors(host)) {
      if (target.HasNode(n)) target.AddEdge(host, n);
    }
  }
}

int RouterDegree(const Topology& graph, const std::string& id) {
  int degree = 0;
  for (const std::string& n : graph.Neighbors(id)) {
    if (graph.Kind(n) == NodeKind::kRouter) ++degree;
  }
  return degree;
}

// Kuhn's augmenting-path search for `u` over `candidates`.
bool Augment(int u, const std::vector<std::vector<int>>& candidates,
             std::vector<bool>& visited, std::vector<int>& owner) {
  for (int v : candidates[u]) {
    if (visited[v]) continue;
    visited[v] = true;
    if (owner[v] < 0 || Augment(owner[v], candidates, visited, owner)) {
      owner[v] = u;
      return true;
    }
  }
  return false;
}

bool IsConnectedOver(const Topology& graph, const std::set<std::string>& ids) {
  if (ids.empty()) return true;
  std::set<std::string> seen = {*ids.begin()};
  std::vector<std::string> stack = {*ids.begin()};
  while (!stack.empty()) {
    std::string v = stack.back();
    stack.pop_back();
    for (const std::string& n : graph.Neighbors(v)) {
      if (ids.count(n) && seen.insert(n).second) stack.push_back(n);
    }
  }
  return seen.size() == ids.size();
}

std::vector<Edge> UnprotectedEdges(const Topology& graph,
                                   const std::vector<std::string>& component,
                                   const std::set<Edge>& protected_edges) {
  std::vector<Edge> result;
  for (const std::string& v : component) {
    for (const std::string& n : graph.Neighbors(v)) {
      if (v < n && graph.Kind(n) == NodeKind::kRouter &&
          !protected_edges.count(MakeEdge(v, n))) {
        result.push_back(MakeEdge(v, n));
      }
    }
  }
  std::sort(result.begin(), result.end());
  return result;
}

std::string LowestDegree(const Topology& graph,
                         const std::vector<std::string>& ids) {
  std::string best;
  int best_degree = std::numeric_limits<int>::max();
  for (const std::string& id : ids) {
    int degree = RouterDegree(graph, id);
    if (degree < best_degree) {
      best = id;
      best_degree = degree;
    }
  }
  return best;
}

// Edge completion: repeatedly takes the router with the largest need (lowest
// id on ties) and links it to the routers with the largest need. A router
// that cannot be linked to anyone is set aside and the loop continues with
// the next one, so one blocked router does not stall the others.
int CompleteEdges(Topology& graph, std::map<std::string, int>& need) {
  int added = 0;
  std::set<std::string> blocked;
  while (true) {
    std::string u;
    for (const auto& [id, n] : need) {
      if (n > 0 && !blocked.count(id) && (u.empty() || n > need[u])) u = id;
    }
    if (u.empty()) return added;
    std::vector<std::string> others;
    for (const auto& [id, n] : need) {
      if (id != u && n > 0) others.push_back(id);
    }
    std::stable_sort(others.begin(), others.end(),
                     [&need](const std::string& a, const std::string& b) {
                       return need[a] > need[b];
                     });
    bool progress = false;
    for (const std::string& v : others) {
      if (need[u] == 0) break;
      if (graph.AddEdge(u, v)) {
        --need[u];
        --need[v];
        ++added;
        progress = true;
      }
    }
    if (!progress) blocked.insert(u);
  }
}

// Edge rearrangement: for under-target routers u and v, finds an unprotected
// edge (x, y) with x not adjacent to u and y not adjacent to v, and replaces
// it by (u, x) and (v, y). Degrees of x and y are unchanged while u and v
// each gain one. A single router two or more short of its target may pair
// with itself. Stops when a full pass finds no swap.
int RearrangeEdges(Topology& graph, std::map<std::string, int>& need,
                   const std::set<Edge>& protected_edges) {
  int swaps = 0;
  while (true) {
    std::vector<std::string> under;
    for (const auto& [id, n] : need) {
      if (n > 0) under.push_back(id);
    }
    bool swapped = false;
    std::vector<Edge> edges = graph.Edges();
    for (size_t i = 0; i < under.size() && !swapped; ++i) {
      for (size_t j = i; j < under.size() && !swapped; ++j) {
        const std::string& u = under[i];
        const std::string& v = under[j];
        if (u == v && need[u] < 2) continue;
        for (const Edge& e : edges) {
          if (protected_edges.count(e)) continue;
          for (auto [x, y] : {std::pair(e.first, e.second),
                              std::pair(e.second, e.first)}) {
            if (x == u || x == v || y == u || y == v) continue;
            if (graph.HasEdge(u, x) || graph.HasEdge(v, y)) continue;
            graph.RemoveEdge(x, y);
            graph.AddEdge(u, x);
            graph.AddEdge(v, y);
            --need[u];
            --need[v];
            ++swaps;
            swapped = true;
            break;
          }
          if (swapped) break;
        }
      }
    }
    if (!swapped) return swaps;
  }
}

}  // namespace

std::vector<std::string> FreshFakeIds(const Topology& graph, int count) {
  std::vector<std::string> ids;
  for (int i = 1; static_cast<int>(ids.size()) < count; ++i) {
    std::string id = "fake" + std::to_string(i);
    if (!graph.HasNode(id)) ids.push_back(id);
  }
  return ids;
}

std::string ReplicaId(const std::string& id, int layer) {
  return id + "_" + std::to_string(layer);
}

Topology ExpandReplica(const Topology& g, int k) {
  if (k < 2) {
    throw Error(ErrorCode::kInvalidK, "replica factor must be >= 2, got " +
                                          std::to_string(k));
  }
  Topology out;
  std::vector<std::string> routers = g.Routers();
  for (const std::string& r : routers) {
    out.AddNode(r, NodeKind::kRouter, g.Asn(r));
    for (int layer = 1; layer < k; ++layer) {
      std::string copy = ReplicaId(r, layer);
      if (g.HasNode(copy)) {
        throw Error(ErrorCode::kInternal, "replica id collides: " + copy);
      }
      out.AddNode(copy, NodeKind::kRouter, g.Asn(r));
    }
  }
  auto layer_id = [](const std::string& r, int layer) {
    return layer == 0 ? r : ReplicaId(r, layer);
  };
  for (const auto& [a, b] : g.RouterSubgraph().Edges()) {
    for (int la = 0; la < k; ++la) {
      for (int lb = 0; lb < k; ++lb) out.AddEdge(layer_id(a, la), layer_id(b, lb));
    }
  }
  CopyHosts(g, out);
  return out;
}

NodeMapping ComputeNodeMapping(const Topology& g, const Topology& ref) {
  std::vector<std::string> left = g.Routers();
  std::vector<std::string> right = ref.Routers();
  std::vector<int> left_degree, right_degree;
  for (const std::string& u : left) left_degree.push_back(RouterDegree(g, u));
  for (const std::string& v : right) right_degree.push_back(RouterDegree(ref, v));

  std::vector<int> order(left.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return left_degree[a] > left_degree[b];
  });
  std::vector<int> by_degree(right.size());
  for (size_t i = 0; i < by_degree.size(); ++i) by_degree[i] = static_cast<int>(i);
  std::stable_sort(by_degree.begin(), by_degree.end(), [&](int a, int b) {
    return right_degree[a] < right_degree[b];
  });
  std::vector<std::vector<int>> candidates(left.size());
  for (size_t u = 0; u < left.size(); ++u) {
    for (int v : by_degree) {
      if (right_degree[v] >= left_degree[u]) candidates[u].push_back(v);
    }
  }

  std::vector<int> owner(right.size(), -1);
  size_t matched = 0;
  for (int u : order) {
    std::vector<bool> visited(right.size(), false);
    if (Augment(u, candidates, visited, owner)) ++matched;
  }
  if (matched < left.size()) {
    throw Error(ErrorCode::kIncompleteMatching,
                "maximum matching covers " + std::to_string(matched) + " of " +
                    std::to_string(left.size()) + " routers");
  }
  NodeMapping mapping;
  for (size_t v = 0; v < right.size(); ++v) {
    if (owner[v] >= 0) mapping.map[left[owner[v]]] = right[v];
  }
  return mapping;
}

const ReferenceGraph& SelectReference(const std::vector<ReferenceGraph>& library,
                                      const Topology& g, int wanted_total) {
  const ReferenceGraph* best = nullptr;
  auto key = [wanted_total](const ReferenceGraph& r) {
    int size = static_cast<int>(r.graph.Routers().size());
    return std::tuple(std::abs(size - wanted_total), -size, r.name);
  };
  int own = static_cast<int>(g.Routers().size());
  for (const ReferenceGraph& candidate : library) {
    if (static_cast<int>(candidate.graph.Routers().size()) < own) continue;
    if (best && key(candidate) >= key(*best)) continue;
    try {
      ComputeNodeMapping(g, candidate.graph);
    } catch (const Error&) {
      continue;
    }
    best = &candidate;
  }
  if (!best) {
    throw Error(ErrorCode::kNoFeasibleReference,
                "no reference graph admits a complete node mapping");
  }
  return *best;
}

const ReferenceGraph& SelectSamplingReference(
    const std::vector<ReferenceGraph>& library, int n_add) {
  const ReferenceGraph* best = nullptr;
  for (const ReferenceGraph& candidate : library) {
    size_t size = candidate.graph.Routers().size();
    if (static_cast<int>(size) < n_add || !candidate.graph.IsConnected()) continue;
    if (!best ||
        std::pair(size, candidate.name) <
            std::pair(best->graph.Routers().size(), best->name)) {
      best = &candidate;
    }
  }
  if (!best) {
    throw Error(ErrorCode::kNoFeasibleReference,
                "no connected reference graph with " + std::to_string(n_add) +
                    " routers");
  }
  return *best;
}

EmbeddingResult EmbedGraphGreedy(const Topology& g, const Topology& ref) {
  return EmbedWithMapping(g, ref, ComputeNodeMapping(g, ref));
}

EmbeddingResult EmbedWithMapping(const Topology& g, const Topology& ref,
                                 const NodeMapping& mapping) {
  EmbeddingResult result;
  result.mapping = mapping;
  Topology& graph = result.graph;
  std::set<std::string> image;
  for (const std::string& r : g.Routers()) {
    auto it = mapping.map.find(r);
    if (it == mapping.map.end() || !ref.HasNode(it->second)) {
      throw Error(ErrorCode::kIncompleteMatching, "router " + r + " is unmapped");
    }
    if (!image.insert(it->second).second) {
      throw Error(ErrorCode::kIncompleteMatching,
                  "mapping is not injective at " + it->second);
    }
    graph.AddNode(r, NodeKind::kRouter, g.Asn(r));
    result.target_degree[r] = RouterDegree(ref, it->second);
  }
  std::vector<std::string> unmatched;
  for (const std::string& v : ref.Routers()) {
    if (!image.count(v)) unmatched.push_back(v);
  }
  std::vector<std::string> fake_ids =
      FreshFakeIds(g, static_cast<int>(unmatched.size()));
  for (size_t i = 0; i < unmatched.size(); ++i) {
    graph.AddNode(fake_ids[i], NodeKind::kRouter, 0);
    result.fake_to_ref[fake_ids[i]] = unmatched[i];
    result.target_degree[fake_ids[i]] = RouterDegree(ref, unmatched[i]);
  }
  for (const auto& [a, b] : g.RouterSubgraph().Edges()) {
    graph.AddEdge(a, b);
    result.protected_edges.insert(MakeEdge(a, b));
  }

  std::map<std::string, int> need;
  for (const auto& [id, target] : result.target_degree) {
    need[id] = target - graph.Degree(id);
  }
  result.completion_edges = CompleteEdges(graph, need);
  result.rearrangements = RearrangeEdges(graph, need, result.protected_edges);

  std::set<std::string> fakes(fake_ids.begin(), fake_ids.end());
  InheritAsns(graph, fakes);
  CopyHosts(g, graph);
  return result;
}

int ResidualDegreeGap(const EmbeddingResult& result) {
  int gap = 0;
  for (const auto& [id, target] : result.target_degree) {
    gap += std::abs(target - RouterDegree(result.graph, id));
  }
  return gap;
}

SampleConnectResult ExpandSampleConnect(const Topology& g, const Topology& ref,
                                        int n_add,
                                        const SamplingStrategy& strategy) {
  if (n_add < 1) {
    throw Error(ErrorCode::kInvalidArgument,
                "sample-connect needs n_add >= 1, got " + std::to_string(n_add));
  }
  Topology sample = SampleSubgraph(ref, n_add, strategy);
  SampleConnectResult result;
  Topology& graph = result.graph;
  std::vector<std::string> originals = g.Routers();
  for (const std::string& r : originals) graph.AddNode(r, NodeKind::kRouter, g.Asn(r));
  for (const auto& [a, b] : g.RouterSubgraph().Edges()) graph.AddEdge(a, b);

  std::vector<std::string> sampled = sample.Routers();
  std::vector<std::string> fake_ids =
      FreshFakeIds(g, static_cast<int>(sampled.size()));
  std::map<std::string, std::string> rename;
  for (size_t i = 0; i < sampled.size(); ++i) {
    rename[sampled[i]] = fake_ids[i];
    result.fake_to_ref[fake_ids[i]] = sampled[i];
    graph.AddNode(fake_ids[i], NodeKind::kRouter, 0);
  }
  for (const auto& [a, b] : sample.Edges()) graph.AddEdge(rename[a], rename[b]);

  const size_t pairs = originals.size() * fake_ids.size();
  const size_t wanted =
      std::min<size_t>(pairs, std::max(1, (n_add + 3) / 4));
  Rng rng = Rng::ForStage(strategy.seed, "sample-connect-bridges");
  while (result.bridges.size() < wanted) {
    const std::string& a = rng.Pick(originals);
    const std::string& b = rng.Pick(fake_ids);
    if (graph.AddEdge(a, b)) result.bridges.push_back(MakeEdge(a, b));
  }

  InheritAsns(graph, std::set<std::string>(fake_ids.begin(), fake_ids.end()));
  CopyHosts(g, graph);
  return result;
}

void InheritAsns(Topology& graph, const std::set<std::string>& fake_routers) {
  std::map<std::string, uint32_t> assigned;
  for (const std::string& r : graph.Routers()) {
    if (!fake_routers.count(r)) assigned[r] = graph.Asn(r);
  }
  std::set<std::string> layer;
  for (const auto& [id, asn] : assigned) layer.insert(id);
  while (!layer.empty()) {
    std::map<std::string, uint32_t> next;
    for (const std::string& v : layer) {
      for (const std::string& n : graph.Neighbors(v)) {
        if (!fake_routers.count(n) || assigned.count(n)) continue;
        auto it = next.find(n);
        if (it == next.end() || assigned[v] < it->second) next[n] = assigned[v];
      }
    }
    layer.clear();
    for (const auto& [id, asn] : next) {
      assigned[id] = asn;
      layer.insert(id);
    }
  }
  for (const std::string& r : fake_routers) {
    auto it = assigned.find(r);
    graph.SetAsn(r, it == assigned.end() ? 0 : it->second);
  }
}

int StitchComponents(Topology& graph, const std::set<Edge>& protected_edges,
                     const std::string& anchor) {
  int joins = 0;
  while (true) {
    std::vector<std::vector<std::string>> components =
        graph.RouterSubgraph().Components();
    if (components.size() <= 1) return joins;
    auto anchor_it = std::find_if(
        components.begin(), components.end(), [&anchor](const auto& c) {
          return std::binary_search(c.begin(), c.end(), anchor);
        });
    if (anchor_it == components.end()) {
      throw Error(ErrorCode::kInternal, "stitch anchor " + anchor + " missing");
    }
    const std::vector<std::string> main = *anchor_it;
    const std::vector<std::string> other =
        anchor_it == components.begin() ? components[1] : components[0];
    std::set<std::string> joined(main.begin(), main.end());
    joined.insert(other.begin(), other.end());

    bool done = false;
    for (const Edge& ab : UnprotectedEdges(graph, main, protected_edges)) {
      for (const Edge& cd : UnprotectedEdges(graph, other, protected_edges)) {
        for (auto [c, d] : {std::pair(cd.first, cd.second),
                            std::pair(cd.second, cd.first)}) {
          graph.RemoveEdge(ab.first, ab.second);
          graph.RemoveEdge(c, d);
          graph.AddEdge(ab.first, c);
          graph.AddEdge(ab.second, d);
          if (IsConnectedOver(graph, joined)) {
            done = true;
            break;
          }
          graph.RemoveEdge(ab.first, c);
          graph.RemoveEdge(ab.second, d);
          graph.AddEdge(ab.first, ab.second);
          graph.AddEdge(c, d);
        }
        if (done) break;
      }
      if (done) break;
    }
    if (!done) graph.AddEdge(LowestDegree(graph, other), LowestDegree(graph, main));
    ++joins;
  }
}

}  // namespace netcloak
