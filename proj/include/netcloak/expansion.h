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
// File: expansion.h
// -----------------------------------------------------------------------------
//
// Topology expansion: grows the router graph of a network with fake routers so
// that the original graph survives as a subgraph. Three strategies are offered:
//
//   * replica        - k-fold blow-up; every router gets k-1 copies adjacent to
//                      all copies of its neighbors, so swapping layers is an
//                      automorphism.
//   * sample-connect - a subgraph sampled from a reference topology, bridged to
//                      the original by random edges.
//   * embedding      - maps every router onto a reference node of at least its
//                      degree, adopts the reference degrees as targets and
//                      completes the graph greedily (largest residual first),
//                      then rewires edges to close remaining gaps.
//
// Expansion works on routers only; hosts of the input are carried over
// unchanged. Fake routers inherit the ASN of the nearest original router.

#ifndef NETCLOAK_EXPANSION_H_
#define NETCLOAK_EXPANSION_H_

#include <map>
#include <set>
#include <string>
#include <vector>

#include "netcloak/sampling.h"
#include "netcloak/topology.h"

namespace netcloak {

// Original router id -> reference node id; injective, and every target has at
// least the degree of its source.
struct NodeMapping {
  std::map<std::string, std::string> map;
};

// Returns `count` router ids "fake1", "fake2", ... that do not collide with
// nodes of `graph`.
std::vector<std::string> FreshFakeIds(const Topology& graph, int count);

// The copy of router `id` in replica layer `layer` (1-based): "<id>_<layer>".
std::string ReplicaId(const std::string& id, int layer);

// k-fold replica. Throws kInvalidK for k < 2.
Topology ExpandReplica(const Topology& g, int k);

// Maximum bipartite matching between the routers of `g` and of `ref` over
// pairs with deg_g(u) <= deg_ref(v). Routers of `g` are matched in descending
// degree order and prefer the lowest-degree eligible reference node, which
// keeps residual degrees small. Throws kIncompleteMatching if the matching
// does not saturate the routers of `g`.
NodeMapping ComputeNodeMapping(const Topology& g, const Topology& ref);

// Picks the library graph whose router count is closest to `wanted_total`
// among those admitting a complete node mapping from `g`; ties go to the
// larger graph, then to the smaller name. Throws kNoFeasibleReference.
const ReferenceGraph& SelectReference(const std::vector<ReferenceGraph>& library,
                                      const Topology& g, int wanted_total);

// Picks the library graph for sampling `n_add` routers: the smallest graph
// with at least `n_add` routers so that sampling runs at a high rate; ties go
// to the smaller name. Throws kNoFeasibleReference.
const ReferenceGraph& SelectSamplingReference(
    const std::vector<ReferenceGraph>& library, int n_add);

struct EmbeddingResult {
  Topology graph;
  NodeMapping mapping;
  // Fake router id -> the reference node it stands for.
  std::map<std::string, std::string> fake_to_ref;
  // Expected degree of every router (the degree of its reference node).
  std::map<std::string, int> target_degree;
  // Image of the original router edges; never removed.
  std::set<Edge> protected_edges;
  int completion_edges = 0;
  int rearrangements = 0;
};

// Greedy embedding: maps `g` onto `ref`, then runs edge completion and edge
// rearrangement. Propagates kIncompleteMatching.
EmbeddingResult EmbedGraphGreedy(const Topology& g, const Topology& ref);

// Greedy embedding with a given mapping (domain: the routers of `g`).
EmbeddingResult EmbedWithMapping(const Topology& g, const Topology& ref,
                                 const NodeMapping& mapping);

// Sum over routers of |target degree - degree|.
int ResidualDegreeGap(const EmbeddingResult& result);

struct SampleConnectResult {
  Topology graph;
  // Fake router id -> the sampled reference node.
  std::map<std::string, std::string> fake_to_ref;
  std::vector<Edge> bridges;
};

// Sample-connect: samples `n_add` routers of `ref`, renames them to fresh
// fake ids and adds max(1, ceil(n_add / 4)) bridging edges between distinct
// uniformly drawn (original, sampled) pairs. Throws kInvalidArgument for
// n_add < 1 and propagates kUnreachableTarget.
SampleConnectResult ExpandSampleConnect(const Topology& g, const Topology& ref,
                                        int n_add,
                                        const SamplingStrategy& strategy);

// Routers in `fake_routers` take the ASN of the closest router outside that
// set, by breadth-first search from all such routers at once; ties go to the
// lower ASN. Fake routers unreachable from any original router keep ASN 0.
void InheritAsns(Topology& graph, const std::set<std::string>& fake_routers);

// Joins the router components of `graph` into one. Each component without
// `anchor` is attached to the anchor component by a degree-preserving swap
// (edges (a,b) and (c,d) become (a,c) and (b,d)) using unprotected edges,
// accepted only if the joined part is connected afterwards. A component
// where no such swap exists gets one plain edge between its lowest-degree
// router and the lowest-degree router of the anchor component. Returns the
// number of joins.
int StitchComponents(Topology& graph, const std::set<Edge>& protected_edges,
                     const std::string& anchor);

}  // namespace netcloak

#endif  // NETCLOAK_EXPANSION_H_
