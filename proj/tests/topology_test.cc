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

#include "netcloak/topology.h"

#include <algorithm>
#include <cmath>
#include <set>

#include "gtest/gtest.h"
#include "netcloak/error.h"
#include "netcloak/rng.h"
#include "test_support.h"

namespace netcloak {
namespace {

// Brute-force K-S oracle: evaluates both empirical CDFs at every integer in
// the combined range using floating-point division.
double KsOracle(const std::vector<int>& a, const std::vector<int>& b) {
  int lo = std::min(*std::min_element(a.begin(), a.end()),
                    *std::min_element(b.begin(), b.end()));
  int hi = std::max(*std::max_element(a.begin(), a.end()),
                    *std::max_element(b.begin(), b.end()));
  double best = 0;
  for (int x = lo; x <= hi; ++x) {
    double fa = 0, fb = 0;
    for (int v : a) fa += v <= x;
    for (int v : b) fb += v <= x;
    best = std::max(best, std::fabs(fa / a.size() - fb / b.size()));
  }
  return best;
}

TEST(KsDistanceTest, WorkedExample) {
  EXPECT_DOUBLE_EQ(KsDistance({1, 1, 2, 2}, {1, 2, 2, 3}), 0.25);
}

TEST(KsDistanceTest, FrozenDerivedValues) {
  // Supports {1,2,3,4}: F_a = (0, .6, 1, 1), F_b = (.5, .5, .5, 1).
  EXPECT_DOUBLE_EQ(KsDistance({3, 3, 2, 2, 2}, {4, 1}), 0.5);
  EXPECT_DOUBLE_EQ(KsDistance({1, 1}, {5, 5}), 1.0);
  EXPECT_DOUBLE_EQ(KsDistance({2, 3, 4}, {4, 3, 2}), 0.0);
  // F_a(1) = 1/3, F_b(1) = 0; F_a(2) = 2/3, F_b(2) = 1/4 -> 5/12.
  EXPECT_DOUBLE_EQ(KsDistance({1, 2, 3}, {2, 3, 3, 3}), 5.0 / 12.0);
}

TEST(KsDistanceTest, Properties) {
  Rng rng(7);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<int> a(1 + rng.Below(12)), b(1 + rng.Below(12));
    for (int& x : a) x = static_cast<int>(rng.Below(6));
    for (int& x : b) x = static_cast<int>(rng.Below(6));
    double d = KsDistance(a, b);
    EXPECT_GE(d, 0.0);
    EXPECT_LE(d, 1.0);
    EXPECT_DOUBLE_EQ(d, KsDistance(b, a));
    EXPECT_EQ(KsDistance(a, a), 0.0);
    EXPECT_NEAR(d, KsOracle(a, b), 1e-12);
  }
}

TEST(KsDistanceTest, EmptySequenceIsAnError) {
  try {
    KsDistance({}, {1});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kEmptySequence);
  }
}

TEST(TopologyTest, GraphBasics) {
  Topology g = testing::MakeGraph(3, {{0, 1}, {1, 2}});
  EXPECT_FALSE(g.AddEdge("n0", "n0"));
  EXPECT_FALSE(g.AddEdge("n0", "n1"));
  EXPECT_FALSE(g.AddEdge("n0", "zz"));
  EXPECT_EQ(g.NumEdges(), 2u);
  EXPECT_EQ(g.Degree("n1"), 2);
  EXPECT_TRUE(g.IsConnected());
  g.RemoveEdge("n1", "n2");
  EXPECT_FALSE(g.IsConnected());
  EXPECT_EQ(g.Components().size(), 2u);
  EXPECT_EQ(DegreeSequence(g), (std::vector<int>{1, 1, 0}));
}

TEST(TopologyTest, CampusExtraction) {
  Topology t = ExtractTopology(testing::LoadFixture("campus"));
  EXPECT_EQ(t.Routers().size(), 5u);
  EXPECT_EQ(t.Hosts().size(), 4u);
  EXPECT_TRUE(t.HasEdge("r1", "r2"));
  EXPECT_TRUE(t.HasEdge("r4", "r5"));
  EXPECT_FALSE(t.HasEdge("r1", "r5"));
  EXPECT_EQ(DegreeSequence(t), (std::vector<int>{3, 3, 2, 2, 2}));
  // Each host has exactly one edge, to its gateway.
  for (const auto& h : t.Hosts()) {
    ASSERT_EQ(t.Degree(h), 1);
    EXPECT_EQ(t.Kind(*t.Neighbors(h).begin()), NodeKind::kRouter);
  }
  EXPECT_TRUE(t.HasEdge("h1", "r1"));
}

TEST(TopologyTest, AsnAssignment) {
  Topology t = ExtractTopology(testing::LoadFixture("bgp2"));
  EXPECT_EQ(t.Asn("a2"), 100u);
  EXPECT_EQ(t.Asn("b3"), 200u);
  EXPECT_EQ(t.Asn("h4"), 200u);
  EXPECT_TRUE(t.HasEdge("a1", "b1"));
}

TEST(TopologyTest, AmbiguousSubnet) {
  Snapshot s;
  for (const char* name : {"x", "y", "z"}) {
    std::string ip = std::string("10.0.0.") + (name[0] == 'x' ? "1" : name[0] == 'y' ? "2" : "3");
    s.configs[name] = ParseConfig(std::string("hostname ") + name +
                                  "\ninterface e0\n ip address " + ip +
                                  " 255.255.255.0\n");
  }
  try {
    ExtractTopology(s);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kAmbiguousSubnet);
  }
}

TEST(TopologyTest, OrphanHost) {
  Snapshot s = testing::LoadFixture("small4");
  s.hosts["h1"].gateway_router = "nowhere";
  EXPECT_THROW(ExtractTopology(s), Error);
  s = testing::LoadFixture("small4");
  s.hosts["h1"].iface_ip = *Ipv4::Parse("192.168.9.9");
  try {
    ExtractTopology(s);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kOrphanHost);
  }
}

TEST(TopologyTest, GraphmlReader) {
  const char* xml = R"(<?xml version="1.0"?>
<graphml xmlns="http://graphml.graphdrawing.org/xmlns">
  <key id="d0" for="node" attr.name="label" attr.type="string"/>
  <graph edgedefault="undirected">
    <node id="a"><data key="d0">A</data></node>
    <node id="b"/>
    <node id="c"/>
    <edge source="a" target="b"/>
    <edge source="b" target="a"/>
    <edge source="c" target="c"/>
    <edge source="b" target="c"/>
  </graph>
</graphml>)";
  Topology g = ParseGraphml(xml);
  EXPECT_EQ(g.NumNodes(), 3u);
  EXPECT_EQ(g.NumEdges(), 2u);
  EXPECT_THROW(ParseGraphml("<graphml><graph><edge source='a' target='q'/>"
                            "</graph></graphml>"),
               Error);
  EXPECT_THROW(ParseGraphml("<not-xml"), Error);
}

TEST(TopologyTest, BundledReferenceLibrary) {
  auto library = LoadReferenceLibrary(testing::FixtureDir("reference"));
  ASSERT_GE(library.size(), 10u);
  for (const auto& ref : library) {
    EXPECT_TRUE(ref.graph.IsConnected()) << ref.name;
  }
  auto abilene = std::find_if(library.begin(), library.end(),
                              [](const auto& r) { return r.name == "abilene"; });
  ASSERT_NE(abilene, library.end());
  EXPECT_EQ(abilene->graph.NumNodes(), 11u);
  EXPECT_EQ(abilene->graph.NumEdges(), 14u);
}

}  // namespace
}  // namespace netcloak
