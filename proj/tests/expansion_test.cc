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
// File: expansion_test.cc
// -----------------------------------------------------------------------------

#include "netcloak/expansion.h"

#include <algorithm>
#include <numeric>

#include <gtest/gtest.h>

#include "netcloak/error.h"
#include "test_support.h"

namespace netcloak {
namespace {

using ::netcloak::testing::FixtureDir;
using ::netcloak::testing::LoadFixture;
using ::netcloak::testing::MakeGraph;
using ::netcloak::testing::MakeNamedGraph;
using ::netcloak::testing::RandomConnectedGraph;

// True iff `perm` maps edges onto edges and non-edges onto non-edges, i.e.
// the permuted adjacency matrix equals the original one.
bool IsAutomorphism(const Topology& g,
                    const std::map<std::string, std::string>& perm) {
  std::vector<std::string> nodes = g.Nodes();
  for (const auto& a : nodes) {
    for (const auto& b : nodes) {
      if (g.HasEdge(a, b) != g.HasEdge(perm.at(a), perm.at(b))) return false;
    }
  }
  return true;
}

// The permutation that shifts every router one replica layer up (cyclically).
std::map<std::string, std::string> LayerShift(const Topology& original, int k) {
  std::map<std::string, std::string> perm;
  for (const std::string& r : original.Routers()) {
    auto id = [&r](int layer) { return layer == 0 ? r : ReplicaId(r, layer); };
    for (int layer = 0; layer < k; ++layer) perm[id(layer)] = id((layer + 1) % k);
  }
  return perm;
}

// Every automorphism of a small graph, by exhaustive permutation search.
std::vector<std::map<std::string, std::string>> AllAutomorphisms(
    const Topology& g) {
  std::vector<std::string> nodes = g.Nodes();
  std::vector<std::string> image = nodes;
  std::vector<std::map<std::string, std::string>> result;
  do {
    std::map<std::string, std::string> perm;
    for (size_t i = 0; i < nodes.size(); ++i) perm[nodes[i]] = image[i];
    if (IsAutomorphism(g, perm)) result.push_back(perm);
  } while (std::next_permutation(image.begin(), image.end()));
  return result;
}

// Brute-force oracle: does any injective assignment of g's routers to ref's
// routers respect deg_g(u) <= deg_ref(v)?
bool SaturatingAssignmentExists(const Topology& g, const Topology& ref) {
  std::vector<int> left = DegreeSequence(g);
  std::vector<int> right = DegreeSequence(ref);
  if (left.size() > right.size()) return false;
  std::vector<int> idx(right.size());
  std::iota(idx.begin(), idx.end(), 0);
  do {
    bool ok = true;
    for (size_t i = 0; i < left.size() && ok; ++i) ok = right[idx[i]] >= left[i];
    if (ok) return true;
  } while (std::next_permutation(idx.begin(), idx.end()));
  return false;
}

void ExpectMappingValid(const Topology& g, const Topology& ref,
                        const NodeMapping& m) {
  std::set<std::string> image;
  ASSERT_EQ(m.map.size(), g.Routers().size());
  for (const auto& [u, v] : m.map) {
    EXPECT_TRUE(image.insert(v).second) << "not injective at " << v;
    EXPECT_GE(ref.Degree(v), g.Degree(u));
  }
}

void ExpectContainsOriginal(const Topology& g, const Topology& out) {
  for (const auto& [a, b] : g.Edges()) {
    EXPECT_TRUE(out.HasEdge(a, b)) << a << "-" << b;
  }
}

// ---------------------------------------------------------------------------
// Replica.
// ---------------------------------------------------------------------------

TEST(ReplicaTest, FourRouterFixtureDoubles) {
  Topology g = ExtractTopology(LoadFixture("small4")).RouterSubgraph();
  ASSERT_EQ(g.Routers().size(), 4u);
  Topology out = ExpandReplica(g, 2);
  EXPECT_EQ(out.Routers().size(), 8u);
  EXPECT_TRUE(out.HasNode("r1_1"));
  EXPECT_TRUE(IsAutomorphism(out, LayerShift(g, 2)));
  EXPECT_EQ(out.InducedSubgraph({"r1", "r2", "r3", "r4"}), g);
  ExpectContainsOriginal(g, out);
}

TEST(ReplicaTest, HostsAreCarriedOverUnchanged) {
  Topology g = ExtractTopology(LoadFixture("small4"));
  Topology out = ExpandReplica(g, 2);
  EXPECT_EQ(out.Hosts(), g.Hosts());
  EXPECT_TRUE(out.HasEdge("h1", "r1"));
  EXPECT_EQ(out.Degree("h1"), 1);
}

TEST(ReplicaTest, SingleEdgeSwapIsAutomorphism) {
  Topology g = MakeNamedGraph({{"a", "b"}});
  Topology out = ExpandReplica(g, 2);
  EXPECT_EQ(out.NumNodes(), 4u);
  EXPECT_EQ(out.NumEdges(), 4u);
  EXPECT_TRUE(IsAutomorphism(out, LayerShift(g, 2)));
}

TEST(ReplicaTest, TriangleThreeFoldShiftIsInAutomorphismGroup) {
  Topology g = MakeNamedGraph({{"a", "b"}, {"b", "c"}, {"a", "c"}});
  Topology out = ExpandReplica(g, 3);
  ASSERT_EQ(out.NumNodes(), 9u);
  std::vector<std::map<std::string, std::string>> group = AllAutomorphisms(out);
  // The blow-up of K3 by 3 is the complete tripartite graph K(3,3,3), whose
  // automorphism group has order 3!^3 * 3! = 1296.
  EXPECT_EQ(group.size(), 1296u);
  auto shift = LayerShift(g, 3);
  EXPECT_NE(std::find(group.begin(), group.end(), shift), group.end());
}

TEST(ReplicaTest, InvalidFactor) {
  Topology g = MakeNamedGraph({{"a", "b"}});
  try {
    ExpandReplica(g, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidK);
  }
}

// Property: every layer shift is an automorphism and the original is the
// induced subgraph on its own ids.
TEST(ReplicaTest, LayerShiftIsAutomorphismOnRandomGraphs) {
  for (uint64_t seed = 1; seed <= 10; ++seed) {
    Topology g = RandomConnectedGraph(3 + seed % 10, 0.3, seed);
    for (int k : {2, 3}) {
      Topology out = ExpandReplica(g, k);
      EXPECT_EQ(out.Routers().size(), k * g.Routers().size());
      EXPECT_TRUE(IsAutomorphism(out, LayerShift(g, k)));
      std::vector<std::string> ids = g.Nodes();
      EXPECT_EQ(out.InducedSubgraph({ids.begin(), ids.end()}), g);
    }
  }
}

// ---------------------------------------------------------------------------
// Node mapping and reference selection.
// ---------------------------------------------------------------------------

TEST(NodeMappingTest, PathIntoStarWithTail) {
  // g: path (degrees 2,1,1); ref: degrees 3,2,1,1,1.
  Topology g = MakeGraph(3, {{0, 1}, {1, 2}});
  Topology ref = MakeGraph(5, {{0, 1}, {0, 2}, {0, 3}, {1, 4}});
  ASSERT_TRUE(SaturatingAssignmentExists(g, ref));
  NodeMapping m = ComputeNodeMapping(g, ref);
  ExpectMappingValid(g, ref, m);
  // The degree-2 router prefers the lowest eligible degree: n1 (degree 2).
  EXPECT_EQ(m.map.at("n1"), "n1");
}

TEST(NodeMappingTest, NoEligibleTarget) {
  Topology star = MakeGraph(4, {{0, 1}, {0, 2}, {0, 3}});
  Topology cycle = MakeGraph(4, {{0, 1}, {1, 2}, {2, 3}, {0, 3}});
  try {
    ComputeNodeMapping(star, cycle);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kIncompleteMatching);
  }
}

TEST(NodeMappingTest, SelfMappingExists) {
  Topology g = ExtractTopology(LoadFixture("campus")).RouterSubgraph();
  ExpectMappingValid(g, g, ComputeNodeMapping(g, g));
}

// Property: the matching saturates exactly when a brute-force search over
// all assignments finds one.
TEST(NodeMappingTest, AgreesWithBruteForce) {
  for (uint64_t seed = 1; seed <= 150; ++seed) {
    Topology g = RandomConnectedGraph(2 + seed % 5, 0.4, seed);
    Topology ref = RandomConnectedGraph(g.NumNodes() + seed % 3, 0.25, seed + 1000);
    bool exists = SaturatingAssignmentExists(g, ref);
    try {
      NodeMapping m = ComputeNodeMapping(g, ref);
      EXPECT_TRUE(exists) << seed;
      ExpectMappingValid(g, ref, m);
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kIncompleteMatching);
      EXPECT_FALSE(exists) << seed;
    }
  }
}

std::vector<ReferenceGraph> Library(const std::vector<std::pair<std::string, Topology>>& graphs) {
  std::vector<ReferenceGraph> library;
  for (const auto& [name, graph] : graphs) library.push_back({name, graph});
  return library;
}

Topology Cycle(int n) {
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i < n; ++i) edges.push_back({i, (i + 1) % n});
  return MakeGraph(n, edges);
}

TEST(SelectReferenceTest, ClosestFeasibleSize) {
  Topology g = MakeGraph(3, {{0, 1}, {1, 2}});
  auto library = Library({{"six", Cycle(6)}, {"eight", Cycle(8)}, {"twenty", Cycle(20)}});
  EXPECT_EQ(SelectReference(library, g, 8).name, "eight");
}

TEST(SelectReferenceTest, SkipsInfeasibleSize) {
  // g has a degree-3 router; the size-8 cycle has maximum degree 2.
  Topology g = MakeGraph(4, {{0, 1}, {0, 2}, {0, 3}});
  Topology wheel = Cycle(20);
  for (int i = 2; i < 20; i += 4) wheel.AddEdge("n0", "n" + std::to_string(i));
  auto library = Library({{"six", Cycle(6)}, {"eight", Cycle(8)}, {"twenty", wheel}});
  EXPECT_FALSE(SaturatingAssignmentExists(g, library[1].graph));
  EXPECT_EQ(SelectReference(library, g, 8).name, "twenty");
}

TEST(SelectReferenceTest, TiesPreferLargerThenName) {
  Topology g = MakeGraph(2, {{0, 1}});
  auto library = Library({{"b", Cycle(6)}, {"a", Cycle(10)}, {"c", Cycle(10)}});
  EXPECT_EQ(SelectReference(library, g, 8).name, "a");
}

TEST(SelectReferenceTest, EmptyLibrary) {
  try {
    SelectReference({}, MakeGraph(2, {{0, 1}}), 4);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNoFeasibleReference);
  }
}

TEST(SelectReferenceTest, SamplingPrefersSmallestLargeEnough) {
  auto library = Library({{"six", Cycle(6)}, {"eight", Cycle(8)}, {"twenty", Cycle(20)}});
  EXPECT_EQ(SelectSamplingReference(library, 7).name, "eight");
  EXPECT_THROW(SelectSamplingReference(library, 21), Error);
}

// ---------------------------------------------------------------------------
// Greedy embedding.
// ---------------------------------------------------------------------------

TEST(EmbeddingTest, WorkedExampleEndsOnReferenceDegrees) {
  // Four routers r1..r4 (degrees r1 2, r2 2, r3 3, r4 1) mapped into an
  // eight-node reference with degrees [4,3,3,2,2,2,1,1]. Residual needs after
  // mapping are r2:2, r3:0, r4:1, r1:0 for the originals and 3, 2, 1, 1 for
  // the four fake routers.
  Topology g = MakeNamedGraph({{"r1", "r2"}, {"r2", "r3"}, {"r3", "r4"}, {"r1", "r3"}});
  Topology ref = MakeNamedGraph({{"A", "B"}, {"A", "C"}, {"A", "D"}, {"A", "E"},
                                 {"B", "C"}, {"B", "F"}, {"C", "G"}, {"D", "F"},
                                 {"E", "H"}});
  NodeMapping m;
  m.map = {{"r2", "A"}, {"r3", "B"}, {"r1", "D"}, {"r4", "E"}};
  EmbeddingResult r = EmbedWithMapping(g, ref, m);
  std::map<std::string, int> residual;
  for (const auto& [id, target] : r.target_degree) {
    residual[id] = target - (g.HasNode(id) ? g.Degree(id) : 0);
  }
  EXPECT_EQ(residual, (std::map<std::string, int>{{"r1", 0}, {"r2", 2}, {"r3", 0},
                                                  {"r4", 1}, {"fake1", 3},
                                                  {"fake2", 2}, {"fake3", 1},
                                                  {"fake4", 1}}));
  EXPECT_EQ(DegreeSequence(r.graph), DegreeSequence(ref));
  EXPECT_EQ(ResidualDegreeGap(r), 0);
  EXPECT_EQ(r.completion_edges, 5);
  ExpectContainsOriginal(g, r.graph);
}

TEST(EmbeddingTest, IdentityAddsNothing) {
  Topology g = ExtractTopology(LoadFixture("campus")).RouterSubgraph();
  EmbeddingResult r = EmbedGraphGreedy(g, g);
  EXPECT_EQ(r.graph, g);
  EXPECT_EQ(r.completion_edges, 0);
  EXPECT_TRUE(r.fake_to_ref.empty());
}

TEST(EmbeddingTest, EdgeIntoTriangle) {
  Topology g = MakeNamedGraph({{"a", "b"}});
  Topology triangle = MakeGraph(3, {{0, 1}, {1, 2}, {0, 2}});
  EmbeddingResult r = EmbedGraphGreedy(g, triangle);
  EXPECT_EQ(r.graph.NumNodes(), 3u);
  EXPECT_TRUE(r.graph.HasEdge("a", "fake1"));
  EXPECT_TRUE(r.graph.HasEdge("b", "fake1"));
  EXPECT_EQ(DegreeSequence(r.graph), (std::vector<int>{2, 2, 2}));
}

TEST(EmbeddingTest, RearrangementClosesGapCompletionCannot) {
  // Originals u-v (protected), each one short of its target 2. The two fake
  // routers (target 1) sort before u and v, so completion links them to each
  // other first; u and v are then only eligible for each other and already
  // adjacent. Rewiring replaces fake1-fake2 by u-fake1 and v-fake2.
  Topology g = MakeNamedGraph({{"u", "v"}});
  Topology ref = MakeNamedGraph({{"A", "B"}, {"A", "C"}, {"B", "D"}});
  NodeMapping m;
  m.map = {{"u", "A"}, {"v", "B"}};
  EmbeddingResult r = EmbedWithMapping(g, ref, m);
  EXPECT_EQ(r.completion_edges, 1);
  EXPECT_EQ(r.rearrangements, 1);
  EXPECT_EQ(ResidualDegreeGap(r), 0);
  EXPECT_TRUE(r.graph.HasEdge("u", "v"));
  EXPECT_TRUE(r.graph.HasEdge("u", "fake1"));
  EXPECT_TRUE(r.graph.HasEdge("v", "fake2"));
  EXPECT_FALSE(r.graph.HasEdge("fake1", "fake2"));
}

TEST(EmbeddingTest, PropagatesIncompleteMatching) {
  Topology star = MakeGraph(4, {{0, 1}, {0, 2}, {0, 3}});
  EXPECT_THROW(EmbedGraphGreedy(star, Cycle(8)), Error);
}

// Properties over random instances: the original survives, degrees never
// exceed targets, originals never lose degree, the result is deterministic.
TEST(EmbeddingTest, InvariantsOnRandomInstances) {
  std::vector<ReferenceGraph> library =
      LoadReferenceLibrary(FixtureDir("reference"));
  for (uint64_t seed = 1; seed <= 60; ++seed) {
    Topology g = RandomConnectedGraph(3 + seed % 8, 0.25, seed);
    const ReferenceGraph& ref =
        SelectReference(library, g, static_cast<int>(2 * g.NumNodes()));
    EmbeddingResult r = EmbedGraphGreedy(g, ref.graph);
    ExpectContainsOriginal(g, r.graph);
    for (const Edge& e : r.protected_edges) {
      EXPECT_TRUE(r.graph.HasEdge(e.first, e.second));
    }
    EXPECT_EQ(r.graph.Routers().size(), ref.graph.Routers().size());
    for (const auto& [id, target] : r.target_degree) {
      EXPECT_LE(r.graph.Degree(id), target) << id;
      if (g.HasNode(id)) EXPECT_GE(r.graph.Degree(id), g.Degree(id));
    }
    EXPECT_EQ(r.graph, EmbedGraphGreedy(g, ref.graph).graph);
  }
}

// ---------------------------------------------------------------------------
// Sample-connect.
// ---------------------------------------------------------------------------

TEST(SampleConnectTest, FourSampledRoutersBridged) {
  Topology g = ExtractTopology(LoadFixture("small4"));
  Topology ref = RandomConnectedGraph(8, 0.3, 77);
  SamplingStrategy s;
  s.seed = 11;
  SampleConnectResult r = ExpandSampleConnect(g, ref, 4, s);
  EXPECT_EQ(r.graph.Routers().size(), 8u);
  EXPECT_EQ(r.bridges.size(), 1u);
  EXPECT_EQ(r.fake_to_ref.size(), 4u);
  EXPECT_TRUE(r.graph.IsConnected());
  ExpectContainsOriginal(g, r.graph);
  EXPECT_EQ(r.graph.Asn("fake1"), g.Asn("r1"));
}

TEST(SampleConnectTest, BridgeCountFollowsSampleSize) {
  Topology g = MakeGraph(3, {{0, 1}, {1, 2}});
  Topology ref = RandomConnectedGraph(20, 0.2, 5);
  SamplingStrategy s;
  s.seed = 3;
  EXPECT_EQ(ExpandSampleConnect(g, ref, 9, s).bridges.size(), 3u);
  EXPECT_EQ(ExpandSampleConnect(g, ref, 1, s).bridges.size(), 1u);
  EXPECT_THROW(ExpandSampleConnect(g, ref, 0, s), Error);
}

TEST(SampleConnectTest, DeterministicAndConnectedForAllStrategies) {
  Topology g = ExtractTopology(LoadFixture("campus"));
  Topology ref = RandomConnectedGraph(16, 0.15, 8);
  for (SamplingKind kind : AllSamplingKinds()) {
    for (uint64_t seed = 1; seed <= 5; ++seed) {
      SamplingStrategy s;
      s.kind = kind;
      s.seed = seed;
      SampleConnectResult a = ExpandSampleConnect(g, ref, 6, s);
      SampleConnectResult b = ExpandSampleConnect(g, ref, 6, s);
      EXPECT_EQ(a.graph, b.graph);
      EXPECT_TRUE(a.graph.IsConnected());
      ExpectContainsOriginal(g, a.graph);
    }
  }
}

// ---------------------------------------------------------------------------
// ASN inheritance and stitching.
// ---------------------------------------------------------------------------

TEST(InheritAsnsTest, NearestOriginalWinsLowerOnTies) {
  Topology g;
  g.AddNode("a", NodeKind::kRouter, 100);
  g.AddNode("b", NodeKind::kRouter, 200);
  for (const char* f : {"f1", "f2", "f3", "f4"}) g.AddNode(f);
  g.AddEdge("a", "f1");
  g.AddEdge("f1", "f2");
  g.AddEdge("b", "f2");  // f2 is one hop from b, two from a.
  g.AddEdge("b", "f3");
  g.AddEdge("a", "f3");  // f3 ties between 100 and 200.
  InheritAsns(g, {"f1", "f2", "f3", "f4"});
  EXPECT_EQ(g.Asn("f1"), 100u);
  EXPECT_EQ(g.Asn("f2"), 200u);
  EXPECT_EQ(g.Asn("f3"), 100u);
  EXPECT_EQ(g.Asn("f4"), 0u);
}

TEST(StitchTest, SwapPreservesDegreesAndProtectedEdges) {
  // Anchor component: a cycle a-b-c-d; detached: triangle x-y-z.
  Topology g = MakeNamedGraph({{"a", "b"}, {"b", "c"}, {"c", "d"}, {"a", "d"},
                               {"x", "y"}, {"y", "z"}, {"x", "z"}});
  std::vector<int> before = DegreeSequence(g);
  std::set<Edge> protected_edges = {MakeEdge("a", "b")};
  EXPECT_EQ(StitchComponents(g, protected_edges, "a"), 1);
  EXPECT_TRUE(g.IsConnected());
  EXPECT_EQ(DegreeSequence(g), before);
  EXPECT_TRUE(g.HasEdge("a", "b"));
}

TEST(StitchTest, IsolatedRouterGetsPlainEdge) {
  Topology g = MakeNamedGraph({{"a", "b"}, {"b", "c"}});
  g.AddNode("lonely");
  EXPECT_EQ(StitchComponents(g, {}, "a"), 1);
  EXPECT_TRUE(g.IsConnected());
  EXPECT_TRUE(g.HasEdge("lonely", "a"));
}

TEST(StitchTest, TwoTreesNeedAPlainEdge) {
  // Swapping two bridges would split the result, so a plain edge is used.
  Topology g = MakeNamedGraph({{"a", "b"}, {"x", "y"}});
  EXPECT_EQ(StitchComponents(g, {}, "a"), 1);
  EXPECT_TRUE(g.IsConnected());
  EXPECT_EQ(g.NumEdges(), 3u);
}

}  // namespace
}  // namespace netcloak
