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
// File: anonymization_test.cc
// -----------------------------------------------------------------------------

#include "netcloak/anonymization.h"

#include <algorithm>

#include <gtest/gtest.h>

#include "netcloak/error.h"
#include "netcloak/expansion.h"
#include "test_support.h"

namespace netcloak {
namespace {

using ::netcloak::testing::FixtureDir;
using ::netcloak::testing::LoadFixture;
using ::netcloak::testing::MakeGraph;
using ::netcloak::testing::MakeNamedGraph;
using ::netcloak::testing::RandomConnectedGraph;

// Independent statement of the strong definition through order statistics:
// the (k+i-1)-th largest anonymized degree must be at least d_i.
bool StrongByOrderStatistics(const Topology& original, const Topology& anon, int k) {
  std::vector<int> d = DegreeSequence(original);
  std::vector<int> a = DegreeSequence(anon);
  for (size_t i = 0; i < d.size(); ++i) {
    size_t rank = k + i;  // 1-based (k + i - 1) with 0-based i, as an index + 1.
    if (rank > a.size() || a[rank - 1] < d[i]) return false;
  }
  return true;
}

void ExpectSuperset(const Topology& before, const Topology& after) {
  for (const auto& [a, b] : before.Edges()) EXPECT_TRUE(after.HasEdge(a, b));
}

// The triangle-with-pendants graph: degrees a3 b3 c2 d1 e1.
Topology Pendants() {
  return MakeNamedGraph({{"a", "b"}, {"b", "c"}, {"a", "c"}, {"a", "d"}, {"b", "e"}});
}

// ---------------------------------------------------------------------------
// Definitions.
// ---------------------------------------------------------------------------

TEST(CheckKdmaTest, WeakCountsAtLeastK) {
  Topology original = MakeNamedGraph({{"x", "y"}, {"y", "z"}});  // [2,1,1]
  EXPECT_TRUE(CheckKdma(original, Pendants(), 3, KdmaLevel::kWeak));
  EXPECT_FALSE(CheckKdma(original, Pendants(), 4, KdmaLevel::kWeak));
}

TEST(CheckKdmaTest, StrongGrowsWithRank) {
  Topology path3 = MakeNamedGraph({{"x", "y"}, {"y", "z"}});             // [2,1,1]
  Topology path4 = MakeNamedGraph({{"w", "x"}, {"x", "y"}, {"y", "z"}});  // [2,2,1,1]
  // Three routers of degree >= 2 cover i=1 with k=3; five of degree >= 1
  // cover i=2,3.
  EXPECT_TRUE(CheckKdma(path3, Pendants(), 3, KdmaLevel::kStrong));
  // A second degree-2 original needs four routers of degree >= 2.
  EXPECT_FALSE(CheckKdma(path4, Pendants(), 3, KdmaLevel::kStrong));
  EXPECT_TRUE(CheckKdma(path4, Pendants(), 2, KdmaLevel::kStrong));
}

TEST(CheckKdmaTest, GraphIsStronglyOneAnonymousOfItself) {
  for (uint64_t seed = 1; seed <= 30; ++seed) {
    Topology g = RandomConnectedGraph(2 + seed % 15, 0.3, seed);
    EXPECT_TRUE(CheckKdma(g, g, 1, KdmaLevel::kStrong));
    EXPECT_TRUE(StrongByOrderStatistics(g, g, 1));
  }
}

TEST(CheckKdmaTest, MatchesOrderStatisticOracle) {
  for (uint64_t seed = 1; seed <= 200; ++seed) {
    Topology g = RandomConnectedGraph(2 + seed % 7, 0.3, seed);
    Topology anon = RandomConnectedGraph(g.NumNodes() + seed % 6, 0.35, seed + 500);
    for (int k = 1; k <= 4; ++k) {
      EXPECT_EQ(CheckKdma(g, anon, k, KdmaLevel::kStrong),
                StrongByOrderStatistics(g, anon, k));
    }
  }
}

TEST(CheckKdaTest, Multiplicities) {
  EXPECT_TRUE(CheckKda(MakeGraph(4, {{0, 1}, {1, 2}, {2, 3}, {0, 3}}), 4));
  EXPECT_FALSE(CheckKda(MakeGraph(5, {{0, 1}, {0, 2}, {0, 3}, {0, 4}}), 2));
}

TEST(ParamsTest, Validation) {
  AnonymityParams p;
  EXPECT_NO_THROW(ValidateParams(p));
  p.k_hosts = 0;
  EXPECT_THROW(ValidateParams(p), Error);
  EXPECT_EQ(ParseKdmaLevel("weak"), KdmaLevel::kWeak);
  EXPECT_EQ(KdmaLevelName(KdmaLevel::kStrong), "strong");
}

// ---------------------------------------------------------------------------
// Greedy k-DMA.
// ---------------------------------------------------------------------------

TEST(KdmaGreedyTest, CompliantInputIsUnchanged) {
  Topology g = MakeNamedGraph({{"x", "y"}, {"y", "z"}});
  EXPECT_EQ(KdmaGreedy(g, Pendants(), 3, KdmaLevel::kStrong, 1), Pendants());
}

TEST(KdmaGreedyTest, RaisesToTopDegrees) {
  // Original degrees [3,2,2,1] plus three isolated fakes; k=2 needs two
  // routers of degree >= 3 and three (then four) of degree >= 2.
  Topology g = MakeNamedGraph({{"a", "b"}, {"a", "c"}, {"a", "d"}, {"b", "c"}});
  Topology emb = g;
  for (const char* f : {"fake1", "fake2", "fake3"}) emb.AddNode(f);
  Topology out = KdmaGreedy(g, emb, 2, KdmaLevel::kStrong, 7);
  EXPECT_TRUE(StrongByOrderStatistics(g, out, 2));
  std::vector<int> deg = DegreeSequence(out);
  EXPECT_GE(deg[1], 3);
  EXPECT_GE(deg[3], 2);
  ExpectSuperset(emb, out);
}

TEST(KdmaGreedyTest, PrefersFakeEndpoints) {
  // Degrees a3 b2 c2 d1; weak k=2 needs a second router of degree >= 3. The
  // first candidate is b, whose non-neighbors are d (real) and two fakes, so
  // its new edge must go to a fake.
  Topology g = MakeNamedGraph({{"a", "b"}, {"a", "c"}, {"a", "d"}, {"b", "c"}});
  Topology emb = g;
  emb.AddNode("fake1");
  emb.AddNode("fake2");
  Topology out = KdmaGreedy(g, emb, 2, KdmaLevel::kWeak, 3);
  EXPECT_TRUE(CheckKdma(g, out, 2, KdmaLevel::kWeak));
  EXPECT_EQ(out.Degree("b"), 3);
  EXPECT_FALSE(out.HasEdge("b", "d"));
  EXPECT_EQ(out.NumEdges(), g.NumEdges() + 1);
}

TEST(KdmaGreedyTest, InfeasibleWhenTooFewRouters) {
  Topology k4 = MakeGraph(4, {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}});
  Topology emb = k4;
  emb.AddNode("fake1");
  // k=2 is feasible (the fake rises to degree 3, five routers >= 3); k=3
  // needs k + n - 1 = 6 routers of degree >= 3 among five.
  EXPECT_NO_THROW(KdmaGreedy(k4, emb, 2, KdmaLevel::kStrong, 1));
  try {
    KdmaGreedy(k4, emb, 3, KdmaLevel::kStrong, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInfeasible);
  }
}

// Property: over random originals embedded into corpus references, greedy
// output is sound by the order-statistic oracle, only adds edges, keeps
// hosts, and is deterministic.
TEST(KdmaGreedyTest, SoundOnRandomEmbeddings) {
  std::vector<ReferenceGraph> library = LoadReferenceLibrary(FixtureDir("reference"));
  int checked = 0;
  for (uint64_t seed = 1; seed <= 100; ++seed) {
    Topology g = RandomConnectedGraph(3 + seed % 8, 0.3, seed);
    int wanted = static_cast<int>(g.NumNodes()) * (2 + seed % 3);
    const ReferenceGraph& ref = SelectReference(library, g, wanted);
    Topology emb = EmbedGraphGreedy(g, ref.graph).graph;
    if (emb.NumNodes() > 20) continue;
    for (KdmaLevel level : {KdmaLevel::kWeak, KdmaLevel::kStrong}) {
      for (int k : {2, 3, 4}) {
        Topology out;
        try {
          out = KdmaGreedy(g, emb, k, level, seed);
        } catch (const Error& e) {
          EXPECT_EQ(e.code(), ErrorCode::kInfeasible);
          continue;
        }
        EXPECT_TRUE(CheckKdma(g, out, k, level));
        if (level == KdmaLevel::kStrong) {
          EXPECT_TRUE(StrongByOrderStatistics(g, out, k));
          ++checked;
        }
        ExpectSuperset(emb, out);
        EXPECT_EQ(out, KdmaGreedy(g, emb, k, level, seed));
      }
    }
  }
  EXPECT_GT(checked, 100);
}

// ---------------------------------------------------------------------------
// MaxSMT.
// ---------------------------------------------------------------------------

// Exhaustive optimum of the MaxSMT program over every edge subset of the
// reference's node set (pinned original edges included); -1 if infeasible.
int ExhaustiveOptimum(const Topology& original, const Topology& ref,
                      const NodeMapping& m, int k) {
  std::vector<std::string> nodes = ref.Routers();
  const int n = static_cast<int>(nodes.size());
  std::vector<std::pair<int, int>> pairs;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) pairs.push_back({i, j});
  }
  std::map<std::string, int> index;
  for (int i = 0; i < n; ++i) index[nodes[i]] = i;
  uint64_t pinned = 0;
  for (const auto& [a, b] : original.Edges()) {
    int u = index[m.map.at(a)], v = index[m.map.at(b)];
    for (size_t p = 0; p < pairs.size(); ++p) {
      if (pairs[p] == std::pair(std::min(u, v), std::max(u, v))) pinned |= 1ull << p;
    }
  }
  std::vector<int> d = DegreeSequence(original);
  int best = -1;
  for (uint64_t mask = 0; mask < (1ull << pairs.size()); ++mask) {
    if ((mask & pinned) != pinned) continue;
    std::vector<int> deg(n, 0);
    for (size_t p = 0; p < pairs.size(); ++p) {
      if (mask >> p & 1) {
        ++deg[pairs[p].first];
        ++deg[pairs[p].second];
      }
    }
    std::vector<int> sorted = deg;
    std::sort(sorted.rbegin(), sorted.rend());
    bool ok = true;
    for (size_t i = 0; i < d.size() && ok; ++i) {
      size_t rank = k + i;
      ok = rank <= sorted.size() && sorted[rank - 1] >= d[i];
    }
    if (!ok) continue;
    int gap = 0;
    for (int i = 0; i < n; ++i) gap += std::abs(deg[i] - ref.Degree(nodes[i]));
    if (best < 0 || gap < best) best = gap;
  }
  return best;
}

TEST(KdmaMaxSmtTest, EdgeIntoTriangleIsOptimal) {
  Topology g = MakeNamedGraph({{"a", "b"}});
  Topology tri = MakeGraph(3, {{0, 1}, {1, 2}, {0, 2}});
  NodeMapping m;
  m.map = {{"a", "n0"}, {"b", "n1"}};
  MaxSmtResult r = KdmaMaxSmt(g, tri, m, 1);
  EXPECT_EQ(r.objective, 0);
  EXPECT_EQ(r.graph.NumEdges(), 3u);
  EXPECT_EQ(ExhaustiveOptimum(g, tri, m, 1), 0);
}

TEST(KdmaMaxSmtTest, IdentityIsFree) {
  Topology g = ExtractTopology(LoadFixture("small4")).RouterSubgraph();
  NodeMapping m;
  for (const std::string& r : g.Routers()) m.map[r] = r;
  MaxSmtResult r = KdmaMaxSmt(g, g, m, 1);
  EXPECT_EQ(r.objective, 0);
  EXPECT_EQ(r.graph, g);
}

TEST(KdmaMaxSmtTest, CountingBoundIsUnsatisfiable) {
  Topology g = MakeNamedGraph({{"a", "b"}});
  Topology tri = MakeGraph(3, {{0, 1}, {1, 2}, {0, 2}});
  NodeMapping m;
  m.map = {{"a", "n0"}, {"b", "n1"}};
  try {
    KdmaMaxSmt(g, tri, m, 3);  // i=2 needs 4 routers of degree >= 1.
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kUnsatisfiable);
  }
}

// Property: the solver's optimum equals exhaustive search, and its output
// satisfies the hard constraints.
TEST(KdmaMaxSmtTest, MatchesExhaustiveSearch) {
  int compared = 0;
  for (uint64_t seed = 1; seed <= 40; ++seed) {
    Topology g = RandomConnectedGraph(2 + seed % 3, 0.4, seed);
    Topology ref = RandomConnectedGraph(g.NumNodes() + 1 + seed % 2, 0.4, seed + 99);
    NodeMapping m;
    try {
      m = ComputeNodeMapping(g, ref);
    } catch (const Error&) {
      continue;
    }
    for (int k : {1, 2, 3}) {
      int expected = ExhaustiveOptimum(g, ref, m, k);
      if (expected < 0) {
        EXPECT_THROW(KdmaMaxSmt(g, ref, m, k), Error);
        continue;
      }
      MaxSmtResult r = KdmaMaxSmt(g, ref, m, k);
      EXPECT_EQ(r.objective, expected) << "seed " << seed << " k " << k;
      EXPECT_TRUE(CheckKdma(g, r.graph, k, KdmaLevel::kStrong));
      ExpectSuperset(g, r.graph);
      ++compared;
    }
  }
  EXPECT_GT(compared, 40);
}

// Property: on small instances the exact program is never worse in
// rationality than embedding plus greedy anonymization, up to 0.05.
TEST(KdmaMaxSmtTest, DominatesGreedyOnSmallInstances) {
  int compared = 0;
  for (uint64_t seed = 1; seed <= 30; ++seed) {
    Topology g = RandomConnectedGraph(3 + seed % 3, 0.35, seed);
    Topology ref = RandomConnectedGraph(7 + seed % 4, 0.25, seed + 7);
    NodeMapping m;
    try {
      m = ComputeNodeMapping(g, ref);
    } catch (const Error&) {
      continue;
    }
    Topology greedy;
    try {
      greedy = KdmaGreedy(g, EmbedWithMapping(g, ref, m).graph, 2,
                          KdmaLevel::kStrong, seed);
    } catch (const Error&) {
      continue;
    }
    MaxSmtResult exact = KdmaMaxSmt(g, ref, m, 2);
    EXPECT_LE(Rationality(exact.graph, ref), Rationality(greedy, ref) + 0.05)
        << "seed " << seed;
    ++compared;
  }
  EXPECT_GT(compared, 15);
}

// ---------------------------------------------------------------------------
// k-DA baseline.
// ---------------------------------------------------------------------------

TEST(KdaBaselineTest, RegularFatTreeIsUntouched) {
  Topology g = ExtractTopology(LoadFixture("fattree02")).RouterSubgraph();
  EXPECT_EQ(KdaBaseline(g, 2, 1), g);
  EXPECT_EQ(KdaBaseline(g, 4, 1), g);
}

TEST(KdaBaselineTest, StarNeedsSecondHub) {
  Topology star = MakeGraph(5, {{0, 1}, {0, 2}, {0, 3}, {0, 4}});
  Topology out = KdaBaseline(star, 2, 1);
  EXPECT_TRUE(CheckKda(out, 2));
  EXPECT_GE(DegreeSequence(out)[1], 4);
  ExpectSuperset(star, out);
}

TEST(KdaBaselineTest, KOneIsNoOp) {
  Topology g = RandomConnectedGraph(9, 0.3, 5);
  EXPECT_EQ(KdaBaseline(g, 1, 1), g);
}

TEST(KdaBaselineTest, SoundOnRandomGraphs) {
  for (uint64_t seed = 1; seed <= 60; ++seed) {
    Topology g = RandomConnectedGraph(6 + seed % 12, 0.2, seed);
    for (int k : {2, 3, 4}) {
      Topology out;
      try {
        out = KdaBaseline(g, k, seed);
      } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::kInfeasible);
        continue;
      }
      EXPECT_TRUE(CheckKda(out, k)) << seed << " " << k;
      ExpectSuperset(g, out);
    }
  }
}

}  // namespace
}  // namespace netcloak
