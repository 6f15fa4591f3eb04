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
// File: simulator_test.cc
// -----------------------------------------------------------------------------

#include "netcloak/simulator.h"

#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "netcloak/error.h"
#include "netcloak/rng.h"
#include "test_support.h"

namespace netcloak {
namespace {

using ::netcloak::testing::FixtureDir;
using ::netcloak::testing::LoadFixture;
using ::netcloak::testing::MakeSnapshot;
using ::netcloak::testing::RandomConnectedGraph;

std::string ReadFile(const std::filesystem::path& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Prefix P(const char* text) { return *Prefix::Parse(text); }
Ipv4 Ip(const char* text) { return *Ipv4::Parse(text); }

HostSpec Host(const std::string& name, const char* ip, const char* mask,
              const std::string& gateway, const char* gateway_ip) {
  return ::netcloak::testing::MakeHost(name, ip, mask, gateway, gateway_ip);
}

// Appends top-level lines to a router's configuration.
void Append(Snapshot& s, const std::string& router, const std::string& lines) {
  s.configs[router] = ParseConfig(RenderConfig(s.configs.at(router)) + lines);
}

std::set<std::string> HopRouters(const Route& r) {
  std::set<std::string> out;
  for (const auto& nh : r.next_hops) out.insert(nh.router);
  return out;
}

// ---------------------------------------------------------------------------
// Protocol table.
// ---------------------------------------------------------------------------

TEST(SimulatorTest, AdminDistanceTable) {
  EXPECT_EQ(AdminDistance(Protocol::kConnected), 0);
  EXPECT_EQ(AdminDistance(Protocol::kStatic), 1);
  EXPECT_EQ(AdminDistance(Protocol::kEbgp), 20);
  EXPECT_EQ(AdminDistance(Protocol::kOspf), 110);
  EXPECT_EQ(AdminDistance(Protocol::kOspfExternal), 110);
  EXPECT_EQ(AdminDistance(Protocol::kIbgp), 200);
  for (Protocol p : {Protocol::kConnected, Protocol::kStatic, Protocol::kOspf,
                     Protocol::kOspfExternal, Protocol::kEbgp,
                     Protocol::kIbgp}) {
    EXPECT_EQ(ParseProtocol(ProtocolName(p)), p);
  }
  EXPECT_FALSE(ParseProtocol("rip").has_value());
}

// ---------------------------------------------------------------------------
// Shortest paths.
// ---------------------------------------------------------------------------

TEST(ShortestPathsTest, Line) {
  CostGraph g;
  g.AddLink("a", "b", 1, 1);
  g.AddLink("b", "c", 1, 1);
  ScostTable t = ShortestPaths(g, "a");
  EXPECT_EQ(t.scost.at("a"), 0);
  EXPECT_EQ(t.scost.at("c"), 2);
  EXPECT_EQ(t.preds.at("c"), (std::set<std::string>{"b"}));
  EXPECT_TRUE(t.preds.at("a").empty());
}

TEST(ShortestPathsTest, SquareKeepsBothPredecessors) {
  CostGraph g;
  g.AddLink("a", "b", 1, 1);
  g.AddLink("b", "c", 1, 1);
  g.AddLink("c", "d", 1, 1);
  g.AddLink("d", "a", 1, 1);
  ScostTable t = ShortestPaths(g, "a");
  EXPECT_EQ(t.preds.at("c"), (std::set<std::string>{"b", "d"}));
  auto paths = ShortestPathsTo(t, "c");
  ASSERT_EQ(paths.size(), 2u);
  EXPECT_EQ(paths[0], (std::vector<std::string>{"a", "b", "c"}));
  EXPECT_EQ(paths[1], (std::vector<std::string>{"a", "d", "c"}));
}

TEST(ShortestPathsTest, DirectedCostsAndUnreachable) {
  CostGraph g;
  g.AddLink("a", "b", 5, 1);
  g.AddLink("a", "c", 1, 1);
  g.AddLink("c", "b", 1, 1);
  g.nodes.insert("z");
  ScostTable from_a = ShortestPaths(g, "a");
  EXPECT_EQ(from_a.scost.at("b"), 2);
  EXPECT_EQ(from_a.preds.at("b"), (std::set<std::string>{"c"}));
  EXPECT_EQ(ShortestPaths(g, "b").scost.at("a"), 1);
  EXPECT_FALSE(from_a.scost.count("z"));
  EXPECT_TRUE(ShortestPathsTo(from_a, "z").empty());
}

// Property: Dijkstra agrees with a Bellman-Ford oracle on costs and on the
// full equal-cost predecessor sets.
TEST(ShortestPathsTest, MatchesBellmanFord) {
  for (uint64_t seed = 1; seed <= 100; ++seed) {
    Rng rng(seed);
    Topology topo = RandomConnectedGraph(2 + static_cast<int>(seed % 29),
                                         0.15, seed);
    CostGraph g;
    for (const auto& [a, b] : topo.Edges()) {
      g.AddLink(a, b, rng.Between(1, 4), rng.Between(1, 4));
    }
    for (const std::string& src : g.nodes) {
      std::map<std::string, int64_t> dist{{src, 0}};
      for (size_t round = 0; round < g.nodes.size(); ++round) {
        for (const auto& [u, outs] : g.out) {
          if (!dist.count(u)) continue;
          for (const auto& [v, c] : outs) {
            if (!dist.count(v) || dist[u] + c < dist[v]) dist[v] = dist[u] + c;
          }
        }
      }
      ScostTable t = ShortestPaths(g, src);
      ASSERT_EQ(t.scost, dist) << "seed " << seed;
      for (const auto& [v, d] : dist) {
        std::set<std::string> preds;
        if (v != src) {
          for (const auto& [u, outs] : g.out) {
            auto c = outs.find(v);
            if (c != outs.end() && dist[u] + c->second == d) preds.insert(u);
          }
        }
        EXPECT_EQ(t.preds.at(v), preds) << "seed " << seed << " " << v;
      }
    }
  }
}

// ---------------------------------------------------------------------------
// FIB lookup.
// ---------------------------------------------------------------------------

// Property: lookups return the longest present prefix containing the
// address; the default route only catches what nothing else does.
TEST(FibTest, LongestPrefixMatch) {
  Rng rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    Fib fib;
    bool with_default = trial % 2 == 0;
    if (with_default) fib.routes[P("0.0.0.0/0")].prefix = P("0.0.0.0/0");
    for (int i = 0; i < 20; ++i) {
      // Cluster prefixes in 10.0.0.0/16 so that many nest.
      Ipv4 base(0x0a000000u | static_cast<uint32_t>(rng.Below(1u << 16)));
      Prefix p(base, static_cast<int>(rng.Between(16, 30)));
      fib.routes[p].prefix = p;
    }
    for (int q = 0; q < 200; ++q) {
      Ipv4 addr(0x0a000000u | static_cast<uint32_t>(rng.Below(1u << 16)));
      const Prefix* expected = nullptr;
      for (const auto& [p, r] : fib.routes) {
        if (p.Contains(addr) &&
            (!expected || p.length() > expected->length())) {
          expected = &p;
        }
      }
      const Route* got = fib.Lookup(addr);
      if (!expected) {
        EXPECT_EQ(got, nullptr);
      } else {
        ASSERT_NE(got, nullptr);
        EXPECT_EQ(got->prefix, *expected);
      }
    }
    EXPECT_EQ(fib.Lookup(Ip("192.168.1.1")) != nullptr, with_default);
  }
}

// ---------------------------------------------------------------------------
// Fixture oracles.
// ---------------------------------------------------------------------------

TEST(SimulatorTest, CampusNextHopTowardH1IsR4) {
  Snapshot s = LoadFixture("campus");
  FibTable fibs = ComputeFibs(s);
  const Route* r = fibs.at("r5").Lookup(s.hosts.at("h1").iface_ip);
  ASSERT_NE(r, nullptr);
  EXPECT_EQ(r->protocol, Protocol::kOspf);
  EXPECT_EQ(HopRouters(*r), (std::set<std::string>{"r4"}));
  TraceResult t = Traceroute(s, fibs, "h5", "h1");
  EXPECT_EQ(t.status, TraceStatus::kOk);
  EXPECT_EQ(t.paths, (std::set<Path>{{"h5", "r5", "r4", "r1", "h1"}}));
}

TEST(SimulatorTest, Bgp2FibsMatchHandComputedOracle) {
  Snapshot s = LoadFixture("bgp2");
  FibTable expected =
      FibsFromJson(ReadFile(FixtureDir("bgp2") / "expected_fibs.json"));
  FibTable got = ComputeFibs(s);
  ASSERT_EQ(got.size(), expected.size());
  for (const auto& [router, fib] : expected) {
    const Fib& g = got.at(router);
    for (const auto& [prefix, route] : fib.routes) {
      const Route* r = g.Find(prefix);
      ASSERT_NE(r, nullptr) << router << " " << prefix.ToString();
      EXPECT_EQ(*r, route) << router << " " << prefix.ToString();
    }
    for (const auto& [prefix, route] : g.routes) {
      EXPECT_TRUE(fib.Find(prefix)) << "extra " << router << " "
                                    << prefix.ToString();
    }
  }
  EXPECT_EQ(got, expected);
}

TEST(SimulatorTest, Bgp2DataPlaneMatchesOracle) {
  Snapshot s = LoadFixture("bgp2");
  DataPlane expected = DataPlaneFromJson(
      ReadFile(FixtureDir("bgp2") / "expected_dataplane.json"));
  DataPlane got = ComputeDataPlane(s, ComputeFibs(s));
  EXPECT_EQ(got.paths.size(), 20u);
  EXPECT_EQ(got, expected) << DataPlaneToJson(got);
}

TEST(SimulatorTest, Bgp2Sessions) {
  Simulation sim = Simulate(LoadFixture("bgp2"));
  std::set<std::tuple<std::string, std::string, bool>> sessions;
  for (const auto& s : sim.sessions) sessions.emplace(s.local, s.peer, s.ebgp);
  EXPECT_EQ(sessions, (std::set<std::tuple<std::string, std::string, bool>>{
                          {"a1", "b1", true},
                          {"b1", "a1", true},
                          {"b1", "b2", false},
                          {"b1", "b3", false},
                          {"b2", "b1", false},
                          {"b3", "b1", false}}));
}

TEST(SimulatorTest, DataPlaneCountsOrderedPairs) {
  for (const char* name : {"campus", "small4", "ospf10", "fattree02"}) {
    Snapshot s = LoadFixture(name);
    size_t n = s.hosts.size();
    DataPlane dp = ComputeDataPlane(s, ComputeFibs(s));
    EXPECT_EQ(dp.paths.size(), n * (n - 1)) << name;
    std::vector<std::string> two;
    for (const auto& [h, spec] : s.hosts) {
      if (two.size() < 2) two.push_back(h);
    }
    EXPECT_EQ(ComputeDataPlane(s, ComputeFibs(s), &two).paths.size(), 2u);
  }
}

// Property: every emitted path walks topology edges and follows the FIB of
// each router, ending on the destination's gateway.
TEST(SimulatorTest, PathsAreEdgeAndFibConsistent) {
  for (const char* name : {"campus", "small4", "ospf10", "fattree02", "bgp2"}) {
    Snapshot s = LoadFixture(name);
    Topology topo = ExtractTopology(s);
    FibTable fibs = ComputeFibs(s);
    DataPlane dp = ComputeDataPlane(s, fibs);
    for (const auto& [pair, trace] : dp.paths) {
      const HostSpec& dst = s.hosts.at(pair.second);
      if (std::string(name) != "bgp2") {
        EXPECT_EQ(trace.status, TraceStatus::kOk) << name;
      }
      for (const Path& p : trace.paths) {
        ASSERT_GE(p.size(), 3u);
        EXPECT_EQ(p.front(), pair.first);
        EXPECT_EQ(p.back(), pair.second);
        EXPECT_EQ(p[1], s.hosts.at(pair.first).gateway_router);
        EXPECT_EQ(p[p.size() - 2], dst.gateway_router);
        for (size_t i = 1; i + 2 < p.size(); ++i) {
          EXPECT_TRUE(topo.HasEdge(p[i], p[i + 1])) << name;
          const Route* r = fibs.at(p[i]).Lookup(dst.iface_ip);
          ASSERT_NE(r, nullptr);
          EXPECT_TRUE(HopRouters(*r).count(p[i + 1])) << name;
        }
        EXPECT_EQ(fibs.at(p[p.size() - 2]).Lookup(dst.iface_ip)->protocol,
                  Protocol::kConnected);
      }
    }
  }
}

TEST(SimulatorTest, FibsAreDeterministicAndRoundTrip) {
  for (const char* name : {"campus", "bgp2", "ospf10"}) {
    std::string a = FibsToJson(ComputeFibs(LoadFixture(name)));
    std::string b = FibsToJson(ComputeFibs(LoadFixture(name)));
    EXPECT_EQ(a, b);
    EXPECT_EQ(FibsToJson(FibsFromJson(a)), a);
  }
  DataPlane dp = ComputeDataPlane(LoadFixture("bgp2"),
                                  ComputeFibs(LoadFixture("bgp2")));
  EXPECT_EQ(DataPlaneFromJson(DataPlaneToJson(dp)), dp);
  EXPECT_THROW(FibsFromJson("[1, 2]"), Error);
  EXPECT_THROW(FibsFromJson("{\"r\": [{\"prefix\": \"x\"}]}"), Error);
}

// ---------------------------------------------------------------------------
// Route selection.
// ---------------------------------------------------------------------------

TEST(SimulatorTest, StaticBeatsOspf) {
  Snapshot s = LoadFixture("campus");
  Append(s, "r5", "ip route 10.0.1.0 255.255.255.0 10.0.100.17\n");
  const Route* r = ComputeFibs(s).at("r5").Find(P("10.0.1.0/24"));
  ASSERT_NE(r, nullptr);
  EXPECT_EQ(r->protocol, Protocol::kStatic);
  EXPECT_EQ(r->admin_distance, 1);
  EXPECT_EQ(HopRouters(*r), (std::set<std::string>{"r3"}));
}

TEST(SimulatorTest, StaticLoopIsDetected) {
  Snapshot s = LoadFixture("campus");
  Append(s, "r5", "ip route 10.0.1.0 255.255.255.0 10.0.100.17\n");
  Append(s, "r3", "ip route 10.0.1.0 255.255.255.0 10.0.100.18\n");
  TraceResult t = Traceroute(s, ComputeFibs(s), "h5", "h1");
  EXPECT_EQ(t.status, TraceStatus::kLoopDetected);
  EXPECT_TRUE(t.paths.empty());
}

TEST(SimulatorTest, NullRouteDropsTraffic) {
  Snapshot s = LoadFixture("campus");
  Append(s, "r5", "ip route 10.0.1.0 255.255.255.0 Null0\n");
  EXPECT_EQ(Traceroute(s, ComputeFibs(s), "h5", "h1").status,
            TraceStatus::kNoRoute);
}

TEST(SimulatorTest, OspfDistributeListFiltersInstalledRoutes) {
  Snapshot s = LoadFixture("campus");
  s.configs["r5"] = ParseConfig([&] {
    std::string text = RenderConfig(s.configs["r5"]);
    std::string anchor = " network 10.0.0.0 0.0.255.255 area 0\n";
    text.replace(text.find(anchor), anchor.size(),
                 anchor + " distribute-list 20 in\n");
    return text;
  }());
  FibTable fibs = ComputeFibs(s);
  EXPECT_EQ(fibs.at("r5").Find(P("10.0.1.0/24")), nullptr);
  EXPECT_NE(fibs.at("r4").Find(P("10.0.1.0/24")), nullptr);
  EXPECT_EQ(Traceroute(s, fibs, "h5", "h1").status, TraceStatus::kNoRoute);
}

TEST(SimulatorTest, HostsOnOneRouter) {
  Snapshot s = LoadFixture("campus");
  s.hosts["h1b"] =
      Host("h1b", "10.0.1.101", "255.255.255.0", "r1", "10.0.1.1");
  TraceResult t = Traceroute(s, ComputeFibs(s), "h1", "h1b");
  EXPECT_EQ(t.status, TraceStatus::kOk);
  EXPECT_EQ(t.paths, (std::set<Path>{{"h1", "r1", "h1b"}}));
  EXPECT_THROW(Traceroute(s, ComputeFibs(s), "h1", "nobody"), Error);
}

std::string SquareRouter(const std::string& name, const std::string& body) {
  return "hostname " + name + "\n" + body +
         "router ospf 1\n network 10.9.0.0 0.0.255.255 area 0\n";
}

TEST(SimulatorTest, EcmpSquareHasTwoPaths) {
  Snapshot s = MakeSnapshot(
      {SquareRouter("s1",
                    "interface e0\n ip address 10.9.12.1 255.255.255.252\n"
                    "interface e1\n ip address 10.9.41.2 255.255.255.252\n"
                    "interface e2\n ip address 10.9.1.1 255.255.255.0\n"),
       SquareRouter("s2",
                    "interface e0\n ip address 10.9.12.2 255.255.255.252\n"
                    "interface e1\n ip address 10.9.23.1 255.255.255.252\n"),
       SquareRouter("s3",
                    "interface e0\n ip address 10.9.23.2 255.255.255.252\n"
                    "interface e1\n ip address 10.9.34.1 255.255.255.252\n"
                    "interface e2\n ip address 10.9.3.1 255.255.255.0\n"),
       SquareRouter("s4",
                    "interface e0\n ip address 10.9.34.2 255.255.255.252\n"
                    "interface e1\n ip address 10.9.41.1 255.255.255.252\n")},
      {Host("ha", "10.9.1.10", "255.255.255.0", "s1", "10.9.1.1"),
       Host("hb", "10.9.3.10", "255.255.255.0", "s3", "10.9.3.1")});
  FibTable fibs = ComputeFibs(s);
  EXPECT_EQ(HopRouters(*fibs.at("s1").Find(P("10.9.3.0/24"))),
            (std::set<std::string>{"s2", "s4"}));
  TraceResult t = Traceroute(s, fibs, "ha", "hb");
  EXPECT_EQ(t.status, TraceStatus::kOk);
  EXPECT_EQ(t.paths, (std::set<Path>{{"ha", "s1", "s2", "s3", "hb"},
                                     {"ha", "s1", "s4", "s3", "hb"}}));
}

// Two ASes: x1 (AS 100 border) peers with y1 (AS 200); x2 is an iBGP and
// OSPF neighbor of x1 inside AS 100.
struct TwoAs {
  std::string x1_bgp_extra;
  std::string x2_extra;
  std::string y1_remote_as = "100";
  std::string x1_extra;

  Snapshot Build() const {
    std::string x1 =
        "hostname x1\n"
        "interface e0\n ip address 172.16.0.1 255.255.255.252\n"
        "interface e1\n ip address 10.1.0.1 255.255.255.252\n"
        "router ospf 1\n network 10.1.0.0 0.0.255.255 area 0\n"
        "router bgp 100\n neighbor 172.16.0.2 remote-as 200\n"
        " neighbor 10.1.0.2 remote-as 100\n" +
        x1_bgp_extra + x1_extra;
    std::string x2 =
        "hostname x2\n"
        "interface e0\n ip address 10.1.0.2 255.255.255.252\n"
        "interface e1\n ip address 10.1.5.1 255.255.255.0\n"
        "router ospf 1\n network 10.1.0.0 0.0.255.255 area 0\n" +
        x2_extra +
        "router bgp 100\n neighbor 10.1.0.1 remote-as 100\n";
    std::string y1 =
        "hostname y1\n"
        "interface e0\n ip address 172.16.0.2 255.255.255.252\n"
        "interface e1\n ip address 10.2.0.1 255.255.255.0\n"
        "router bgp 200\n neighbor 172.16.0.1 remote-as " +
        y1_remote_as + "\n network 10.2.0.0 mask 255.255.255.0\n";
    return MakeSnapshot(
        {x1, x2, y1},
        {Host("hx", "10.1.5.10", "255.255.255.0", "x2", "10.1.5.1"),
         Host("hy", "10.2.0.10", "255.255.255.0", "y1", "10.2.0.1")});
  }
};

TEST(BgpTest, EbgpRouteInstalledAtBorder) {
  FibTable fibs = ComputeFibs(TwoAs{}.Build());
  const Route* r = fibs.at("x1").Find(P("10.2.0.0/24"));
  ASSERT_NE(r, nullptr);
  EXPECT_EQ(r->protocol, Protocol::kEbgp);
  EXPECT_EQ(r->as_path, (std::vector<uint32_t>{200}));
  EXPECT_EQ(HopRouters(*r), (std::set<std::string>{"y1"}));
}

TEST(BgpTest, InboundPrefixListDenies) {
  TwoAs net;
  net.x1_bgp_extra = " neighbor 172.16.0.2 prefix-list BLOCK in\n";
  net.x1_extra = "ip prefix-list BLOCK seq 5 deny 10.2.0.0/24\n"
                 "ip prefix-list BLOCK seq 10 permit 0.0.0.0/0 le 32\n";
  EXPECT_EQ(ComputeFibs(net.Build()).at("x1").Find(P("10.2.0.0/24")),
            nullptr);
}

// Without next-hop-self the iBGP route at x2 keeps y1's address as next hop,
// which x2's IGP cannot reach; with it, x2 resolves the route through x1.
TEST(BgpTest, IbgpRouteNeedsResolvableNextHop) {
  Snapshot plain = TwoAs{}.Build();
  EXPECT_EQ(ComputeFibs(plain).at("x2").Find(P("10.2.0.0/24")), nullptr);
  EXPECT_EQ(Traceroute(plain, ComputeFibs(plain), "hx", "hy").status,
            TraceStatus::kNoRoute);

  TwoAs nhs;
  nhs.x1_bgp_extra = " neighbor 10.1.0.2 next-hop-self\n";
  Snapshot s = nhs.Build();
  const Route* r = ComputeFibs(s).at("x2").Find(P("10.2.0.0/24"));
  ASSERT_NE(r, nullptr);
  EXPECT_EQ(r->protocol, Protocol::kIbgp);
  EXPECT_EQ(r->bgp_next_hop, Ip("10.1.0.1"));
  EXPECT_EQ(HopRouters(*r), (std::set<std::string>{"x1"}));
}

TEST(BgpTest, EbgpBeatsOspfExternal) {
  TwoAs net;
  net.x2_extra = " redistribute static subnets\n";
  Snapshot s = net.Build();
  Append(s, "x2", "ip route 10.2.0.0 255.255.255.0 Null0\n");
  FibTable fibs = ComputeFibs(s);
  EXPECT_EQ(fibs.at("x1").Find(P("10.2.0.0/24"))->protocol, Protocol::kEbgp);
  EXPECT_EQ(fibs.at("x2").Find(P("10.2.0.0/24"))->protocol,
            Protocol::kStatic);
  // Without the eBGP session x1 falls back to the external route.
  Snapshot no_session = net.Build();
  no_session.configs.erase("y1");
  no_session.hosts.erase("hy");
  Append(no_session, "x2", "ip route 10.2.0.0 255.255.255.0 Null0\n");
  EXPECT_EQ(ComputeFibs(no_session).at("x1").Find(P("10.2.0.0/24"))->protocol,
            Protocol::kOspfExternal);
}

TEST(BgpTest, RemoteAsMismatchIsRejected) {
  TwoAs net;
  net.y1_remote_as = "300";
  try {
    ComputeFibs(net.Build());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kSessionMismatch);
  }
}

}  // namespace
}  // namespace netcloak
