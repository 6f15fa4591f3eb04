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
// File: confgen.h
// -----------------------------------------------------------------------------
//
// Configuration generation: turns an expanded topology into device
// configurations. New links are configured by a worklist that configures a
// new router the first time one of its edges touches an already configured
// router, taking that router's routing protocols and AS. Each fake router's
// configuration mimics a real template router (stanza order, interface
// naming, peer-group structure, policy objects). Fake hosts receive fresh
// subnets, and filter entries that match a real host are duplicated for the
// fake hosts mapped to it.
//
// Address pools: new links take /30s from 10.250.0.0/16, fake host LANs /24s
// from 10.251.0.0/16 and fake loopbacks /32s from 10.252.0.0/16, skipping
// anything overlapping an existing interface subnet.

#ifndef NETCLOAK_CONFGEN_H_
#define NETCLOAK_CONFGEN_H_

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "netcloak/config_model.h"
#include "netcloak/ipv4.h"
#include "netcloak/snapshot.h"
#include "netcloak/topology.h"

namespace netcloak {

struct ExpansionPlan {
  // Router-router edges to realize, in processing order. Endpoints are real
  // hostnames or new router ids.
  std::vector<Edge> new_edges;
  std::set<std::string> new_routers;
  std::set<std::string> new_hosts;
  // Fake host -> the real host it imitates.
  std::map<std::string, std::string> host_map;
  // Fake host -> its gateway (a real hostname or a new router id).
  std::map<std::string, std::string> host_gateway;
  // Fake router -> template real router. Routers without an entry get one
  // from SelectTemplate when first configured.
  std::map<std::string, std::string> template_of;
};

// One interface of a generated router.
struct FakeInterface {
  enum class Role { kLoopback, kLink, kLan };
  Role role = Role::kLink;
  // Filled in the template's naming style when empty.
  std::string name;
  Ipv4 address;
  Prefix subnet;
  // Peer router of a link.
  std::string neighbor;
  bool ospf = false;
  bool passive = false;
  std::optional<int> ospf_cost;
};

struct FakeBgpNeighbor {
  Ipv4 address;
  uint32_t remote_as = 0;
};

// Everything that is specific to one fake router.
struct FakeAssignment {
  std::string hostname;
  uint32_t asn = 0;
  bool ospf = false;
  bool bgp = false;
  std::vector<FakeInterface> interfaces;
  std::vector<FakeBgpNeighbor> bgp_neighbors;
  // Prefixes announced with BGP `network` statements.
  std::vector<Prefix> bgp_networks;
  std::optional<Ipv4> router_id;
};

// Snapshot-wide context for generating one fake configuration.
struct FakeConfigContext {
  // Router and host names; a template interface description naming one of
  // them is rewritten to name the fake interface's neighbor instead.
  std::set<std::string> known_names;
  // Policy objects in use anywhere, as "acl:<name>", "prefix-list:<name>" and
  // "route-map:<name>". Copied objects get names outside this set, which are
  // then added to it.
  std::set<std::string> filter_names;
};

// A realized new link.
struct NewLink {
  std::string router_a;
  std::string iface_a;
  Ipv4 ip_a;
  std::string router_b;
  std::string iface_b;
  Ipv4 ip_b;
  Prefix subnet;
  bool ospf = false;
  bool ebgp = false;
};

struct ExpansionResult {
  Snapshot snapshot;
  std::vector<NewLink> links;
  // Plan id -> generated hostname, for new routers and new hosts.
  std::map<std::string, std::string> hostname_of;
  // Generated router hostname -> template real router.
  std::map<std::string, std::string> template_of;
  // Generated router hostname -> its assignment.
  std::map<std::string, FakeAssignment> assignments;
};

// Names a new interface after the last non-loopback name of `existing`
// ("GigabitEthernet0/3" -> "GigabitEthernet0/4"), or after its loopbacks.
std::string NextInterfaceName(const std::vector<std::string>& existing,
                              bool loopback);

// For every new router, the configured router whose edge configures it under
// the worklist order of `new_edges` (edges between two unconfigured routers
// wait for a later pass). Throws kUnreachablePlan if some new router is
// never reached.
std::map<std::string, std::string> FirstContacts(
    const std::vector<Edge>& new_edges, const std::set<std::string>& configured,
    const std::set<std::string>& new_routers);

// Template score of real router `r` for `fake` in `graph` (fake and real
// routers present, ASNs set):
//   0.3 * (1 - |deg f - deg r| / max(deg f, deg r, 1))
//   + 0.2 * Jaccard(neighbors f, neighbors r)
//   + 0.3 * [same AS]
//   + 0.2 * Jaccard(protocols f, protocols r).
double TemplateScore(const std::string& fake, const std::string& real,
                     const Topology& graph,
                     const std::set<std::string>& fake_protocols,
                     const RouterModel& real_model);

// The highest-scoring real router; ties go to the smallest name. Throws
// kInvalidArgument if `reals` is empty.
std::string SelectTemplate(const std::string& fake, const Topology& graph,
                           const std::map<std::string, RouterModel>& reals,
                           const std::set<std::string>& fake_protocols);

// A new name in the style of `like` ("a1" -> "a4" when a2, a3 are taken).
std::string MimicName(const std::string& like,
                      const std::set<std::string>& taken);

// Renders the fake router's configuration from `tmpl`: stanza order, comment
// style, unknown stanzas and policy objects are kept; interfaces, router ids,
// network statements and neighbors are replaced by the assignment's; static
// routes are dropped; peer groups are reused for neighbors they fit; access
// lists, prefix lists and route maps are copied under fresh names with every
// reference rewritten. Fills empty interface names in `assignment`. Throws
// kIncompleteAssignment for an empty hostname, an interface without an
// address, a BGP router without an ASN or a neighbor without a remote AS.
RouterConfig GenerateFakeConfig(FakeAssignment& assignment,
                                const RouterConfig& tmpl,
                                FakeConfigContext* context = nullptr);

// A from-scratch configuration carrying only what routing needs (hostname,
// addressed interfaces, OSPF networks, BGP neighbors): the baseline that
// mimicry is compared against.
RouterConfig GenerateSkeletonConfig(const FakeAssignment& assignment);

// Realizes `plan` on `snapshot`. Real routers only gain lines; every original
// line survives. Throws kUnreachablePlan, kSubnetPoolExhausted and
// kInvalidArgument (inconsistent plan).
ExpansionResult ExpandNetwork(const ExpansionPlan& plan,
                              const Snapshot& snapshot);

// Fake hosts for `k_hosts`: k_hosts - 1 per real host (sorted by name), each
// placed round-robin (one counter per AS) over the AS's real egress routers
// followed by its new routers. `asns` covers real and new routers. Ids are
// "fakehost1", "fakehost2", ...
void PlanFakeHosts(const Snapshot& snapshot, int k_hosts,
                   const std::map<std::string, uint32_t>& asns,
                   const std::set<std::string>& new_routers,
                   ExpansionPlan& plan);

// For every filter entry (numbered or named ACL, prefix list) that matches a
// real host's address or subnet without already matching a mapped fake
// host, inserts the analogous entry for each fake host right after it. Entries
// matching everything are left alone. Idempotent.
Snapshot MimicFilters(const Snapshot& snapshot,
                      const std::map<std::string, std::string>& host_map);

}  // namespace netcloak

#endif  // NETCLOAK_CONFGEN_H_
