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
// File: topology.h
// -----------------------------------------------------------------------------
//
// Undirected simple graphs over named routers and hosts, their extraction from
// snapshots, degree statistics (two-sample Kolmogorov-Smirnov distance) and a
// GraphML reader for the reference topology library.

#ifndef NETCLOAK_TOPOLOGY_H_
#define NETCLOAK_TOPOLOGY_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "netcloak/config_model.h"
#include "netcloak/snapshot.h"

namespace netcloak {

enum class NodeKind { kRouter, kHost };

// An undirected edge with `first < second`.
using Edge = std::pair<std::string, std::string>;

Edge MakeEdge(const std::string& a, const std::string& b);

class Topology {
 public:
  // Adds a node; re-adding an existing id updates its kind and ASN.
  void AddNode(const std::string& id, NodeKind kind = NodeKind::kRouter,
               uint32_t asn = 0);
  bool HasNode(std::string_view id) const;
  void RemoveNode(const std::string& id);

  // Returns false (and changes nothing) for self-loops, unknown endpoints and
  // existing edges.
  bool AddEdge(const std::string& a, const std::string& b);
  bool RemoveEdge(const std::string& a, const std::string& b);
  bool HasEdge(std::string_view a, std::string_view b) const;

  int Degree(std::string_view id) const;
  const std::set<std::string>& Neighbors(std::string_view id) const;
  NodeKind Kind(std::string_view id) const;
  uint32_t Asn(std::string_view id) const;
  void SetAsn(const std::string& id, uint32_t asn);

  // Node ids in sorted order.
  std::vector<std::string> Nodes() const;
  std::vector<std::string> Routers() const;
  std::vector<std::string> Hosts() const;
  // All edges in sorted order.
  std::vector<Edge> Edges() const;
  size_t NumNodes() const { return nodes_.size(); }
  size_t NumEdges() const;

  // The subgraph induced by routers.
  Topology RouterSubgraph() const;
  // The subgraph induced by `ids`.
  Topology InducedSubgraph(const std::set<std::string>& ids) const;

  bool IsConnected() const;
  // Connected components, each sorted, ordered by smallest member.
  std::vector<std::vector<std::string>> Components() const;

  friend bool operator==(const Topology&, const Topology&);

 private:
  struct NodeData {
    NodeKind kind = NodeKind::kRouter;
    uint32_t asn = 0;
    std::set<std::string> neighbors;
  };
  std::map<std::string, NodeData, std::less<>> nodes_;
};

// Router-only degree sequence (router-router edges), sorted descending.
// With `routers_only` false every node and every edge counts.
std::vector<int> DegreeSequence(const Topology& topology,
                                bool routers_only = true);

// Two-sample Kolmogorov-Smirnov distance between the empirical distributions
// of `a` and `b`, evaluated at the union of their support points. Throws
// kEmptySequence if either input is empty.
double KsDistance(const std::vector<int>& a, const std::vector<int>& b);

// K-S distance between the router degree sequences of two graphs.
double Rationality(const Topology& anonymized, const Topology& reference);

// ---------------------------------------------------------------------------
// Extraction from snapshots.
// ---------------------------------------------------------------------------

// A point-to-point layer-3 adjacency between two routers.
struct L3Link {
  std::string router_a;
  std::string iface_a;
  Ipv4 ip_a;
  std::string router_b;
  std::string iface_b;
  Ipv4 ip_b;
  Prefix subnet;
};

// Router-router links derived from shared subnets of enabled interfaces,
// sorted by subnet. Throws kAmbiguousSubnet if three or more routers share a
// subnet.
std::vector<L3Link> ComputeLinks(const std::map<std::string, RouterModel>& models);

// Autonomous system of every router: its BGP ASN, else the ASN of the BGP
// router reachable through OSPF-speaking neighbors, else 0.
std::map<std::string, uint32_t> AssignAsns(
    const std::map<std::string, RouterModel>& models,
    const std::vector<L3Link>& links);

std::map<std::string, RouterModel> InterpretAll(const Snapshot& snapshot);

// Builds the network graph: routers are adjacent iff they share a subnet; each
// host has a single edge to its gateway router. Throws kAmbiguousSubnet and
// kOrphanHost (gateway missing or no gateway interface covering the host).
Topology ExtractTopology(const Snapshot& snapshot);

// ---------------------------------------------------------------------------
// Reference library.
// ---------------------------------------------------------------------------

struct ReferenceGraph {
  std::string name;
  Topology graph;
};

// Reads a GraphML document into an all-router graph; self-loops and parallel
// edges are dropped. Throws kGraphmlParse.
Topology ParseGraphml(std::string_view xml);

// Loads every `*.graphml` file of `dir`, sorted by file stem.
std::vector<ReferenceGraph> LoadReferenceLibrary(const std::filesystem::path& dir);

}  // namespace netcloak

#endif  // NETCLOAK_TOPOLOGY_H_
