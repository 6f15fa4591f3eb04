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
// File: simulator.h
// -----------------------------------------------------------------------------
//
// Control-plane simulation of a snapshot: connected and static routes, OSPF
// (single area, Dijkstra with ECMP, external routes from redistribution) and a
// simplified BGP (best path by local origin, administrative distance, AS-path
// length and lowest neighbor router-id). The result is one forwarding table per
// router, from which host-to-host paths are enumerated by traceroute.
//
// Simulation runs in fixed stages:
//   1. connected and static routes;
//   2. OSPF intra-domain routes, plus externals redistributed from static and
//      connected routes;
//   3. BGP sessions iterated to a fixed point (iBGP next hops resolve through
//      the stage 1-2 tables);
//   4. OSPF externals redistributed from eBGP-learned routes;
//   5. per prefix, the route with the lowest administrative distance wins.

#ifndef NETCLOAK_SIMULATOR_H_
#define NETCLOAK_SIMULATOR_H_

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "netcloak/config_model.h"
#include "netcloak/ipv4.h"
#include "netcloak/snapshot.h"
#include "netcloak/topology.h"

namespace netcloak {

enum class Protocol { kConnected, kStatic, kOspf, kOspfExternal, kEbgp, kIbgp };

// "connected", "static", "ospf", "ospf-external", "ebgp", "ibgp".
std::string_view ProtocolName(Protocol protocol);
std::optional<Protocol> ParseProtocol(std::string_view name);

// Vendor defaults: connected 0, static 1, eBGP 20, OSPF 110 (intra and
// external), iBGP 200.
int AdminDistance(Protocol protocol);

// The neighbor a packet is handed to and the local interface it leaves by.
// Connected routes name the router itself; a static route to Null0 names the
// router itself with interface "Null0".
struct NextHop {
  std::string router;
  std::string interface;

  friend auto operator<=>(const NextHop&, const NextHop&) = default;
};

struct Route {
  Prefix prefix;
  std::set<NextHop> next_hops;
  Protocol protocol = Protocol::kConnected;
  int admin_distance = 0;
  // Path cost for OSPF, 20 for OSPF externals, AS-path length for BGP, 0
  // otherwise.
  int64_t metric = 0;
  // BGP only: the AS path and the BGP next-hop address.
  std::vector<uint32_t> as_path;
  std::optional<Ipv4> bgp_next_hop;

  friend bool operator==(const Route&, const Route&) = default;
};

struct Fib {
  std::string router;
  // Best route per prefix; equal-cost alternatives are folded into one route.
  std::map<Prefix, Route> routes;

  // Longest-prefix match; the default route (if any) matches last.
  const Route* Lookup(Ipv4 address) const;
  const Route* Find(const Prefix& prefix) const;

  friend bool operator==(const Fib&, const Fib&) = default;
};

using FibTable = std::map<std::string, Fib>;

// ---------------------------------------------------------------------------
// OSPF shortest paths.
// ---------------------------------------------------------------------------

// A directed, positively weighted router graph.
struct CostGraph {
  std::set<std::string> nodes;
  // out[v1][v2] is the cost of the directed link v1 -> v2.
  std::map<std::string, std::map<std::string, int64_t>> out;

  void AddLink(const std::string& a, const std::string& b, int64_t cost_ab,
               int64_t cost_ba);
  std::optional<int64_t> Cost(const std::string& from,
                              const std::string& to) const;
};

struct ScostTable {
  std::string source;
  // Shortest cost from the source; unreachable routers are absent.
  std::map<std::string, int64_t> scost;
  // All cost-minimizing in-neighbors; empty for the source.
  std::map<std::string, std::set<std::string>> preds;
};

// Dijkstra from `source` keeping every equal-cost predecessor.
ScostTable ShortestPaths(const CostGraph& graph, const std::string& source);

// All shortest paths source -> target (router lists), sorted, at most
// `limit`. Empty if the target is unreachable.
std::vector<std::vector<std::string>> ShortestPathsTo(
    const ScostTable& table, const std::string& target, size_t limit = 256);

// An OSPF adjacency over a point-to-point link: both interfaces are enabled by
// `network` statements and neither is passive. Costs are taken from the
// sending interface.
struct OspfAdjacency {
  L3Link link;
  int cost_ab = kDefaultOspfCost;
  int cost_ba = kDefaultOspfCost;
};

// True if `iface` is up, addressed and covered by a `network` statement.
bool OspfEnabled(const RouterModel& model, const InterfaceConfig& iface);

std::vector<OspfAdjacency> OspfAdjacencies(
    const std::map<std::string, RouterModel>& models,
    const std::vector<L3Link>& links);

// The OSPF graph of all routers (each connected component is one domain).
CostGraph BuildCostGraph(const std::map<std::string, RouterModel>& models,
                         const std::vector<OspfAdjacency>& adjacencies);

// ---------------------------------------------------------------------------
// Full simulation.
// ---------------------------------------------------------------------------

struct BgpSession {
  std::string local;
  std::string peer;
  // The local router's neighbor key for the peer (an address).
  std::string neighbor_key;
  Ipv4 local_address;
  Ipv4 peer_address;
  bool ebgp = false;

  friend auto operator<=>(const BgpSession&, const BgpSession&) = default;
};

struct Simulation {
  std::map<std::string, RouterModel> models;
  std::vector<L3Link> links;
  CostGraph ospf;
  // Established sessions, one entry per direction, sorted.
  std::vector<BgpSession> sessions;
  // Router -> prefix -> the peer that advertised its best BGP path (locally
  // originated paths are absent).
  std::map<std::string, std::map<Prefix, std::string>> bgp_from;
  FibTable fibs;
};

// Throws kSessionMismatch when a configured neighbor address belongs to a BGP
// router whose AS disagrees with the configured remote-as, and kNonConvergence
// if BGP does not reach a fixed point within 100 sweeps of sequential
// per-router updates (routers in name order). Propagates topology
// extraction errors (kAmbiguousSubnet).
Simulation Simulate(const Snapshot& snapshot);

FibTable ComputeFibs(const Snapshot& snapshot);

// Serialization sorted by router, then prefix:
//   {"<router>": [{"prefix", "protocol", "admin_distance", "metric",
//                  "next_hops": [{"router", "interface"}],
//                  "as_path"?, "bgp_next_hop"?}]}
std::string FibsToJson(const FibTable& fibs);
// Throws kInvalidArgument on malformed input.
FibTable FibsFromJson(std::string_view json_text);

// ---------------------------------------------------------------------------
// Host-to-host paths.
// ---------------------------------------------------------------------------

// (h_s, r_s, ..., r_d, h_d).
using Path = std::vector<std::string>;

enum class TraceStatus { kOk, kNoRoute, kLoopDetected };

// "Ok", "NoRoute", "LoopDetected".
std::string_view TraceStatusName(TraceStatus status);

struct TraceResult {
  // kOk when every branch reached the destination; otherwise the first
  // failure found. Branches that fail are not listed in `paths`.
  TraceStatus status = TraceStatus::kOk;
  std::set<Path> paths;

  friend bool operator==(const TraceResult&, const TraceResult&) = default;
};

inline constexpr int kMaxTraceHops = 64;
inline constexpr size_t kMaxTraceBranches = 256;

// Follows every next hop from the source host's gateway. A router revisited
// on a branch, or a branch longer than kMaxTraceHops routers, is a loop.
// Enumeration stops after kMaxTraceBranches complete or failed branches.
// Throws kInvalidArgument if either host is unknown.
TraceResult Traceroute(const Snapshot& snapshot, const FibTable& fibs,
                       const std::string& src, const std::string& dst);

struct DataPlane {
  std::map<std::pair<std::string, std::string>, TraceResult> paths;

  friend bool operator==(const DataPlane&, const DataPlane&) = default;
};

// Traceroute over all ordered pairs of distinct hosts (of `hosts` if given,
// else of the snapshot).
DataPlane ComputeDataPlane(const Snapshot& snapshot, const FibTable& fibs,
                           const std::vector<std::string>* hosts = nullptr);

//   {"<src>": {"<dst>": {"status": "...", "paths": [["h1", "r1", ...]]}}}
std::string DataPlaneToJson(const DataPlane& dataplane);
DataPlane DataPlaneFromJson(std::string_view json_text);

}  // namespace netcloak

#endif  // NETCLOAK_SIMULATOR_H_
