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
// File: config_model.h
// -----------------------------------------------------------------------------
//
// A lossless, stanza-structured representation of Cisco-style router
// configurations plus typed, read-only interpretations of the parts the rest of
// the system understands (interfaces, OSPF, BGP, static routes and routing
// filters).
//
// A configuration is a sequence of stanzas. Block stanzas (`interface`, `router
// ospf`, `router bgp`, `route-map`, named access lists and unknown blocks) own
// a header line and the indented lines that follow it. Line stanzas group
// consecutive top-level lines of the same kind and name (static routes,
// numbered access-list entries, prefix-list entries). Lines starting with `!`
// are comments and attach to the stanza that follows them; comments after the
// last stanza are kept as trailing comments. Blank lines carry no tokens and
// are not preserved.
//
// Rendering is canonical: `RenderConfig(ParseConfig(RenderConfig(c)))` equals
// `RenderConfig(c)`, and rendering an untouched parse reproduces every
// non-blank source line verbatim apart from indentation of block children,
// which is normalized to the block's first child indentation.

#ifndef NETCLOAK_CONFIG_MODEL_H_
#define NETCLOAK_CONFIG_MODEL_H_

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "netcloak/ipv4.h"

namespace netcloak {

enum class StanzaKind {
  kInterface,
  kRouterOspf,
  kRouterBgp,
  kStaticRoute,
  kAccessList,
  kPrefixList,
  kRouteMap,
  kDistributeListHost,
  kHostname,
  kOther,
};

inline constexpr int kNumStanzaKinds = 10;

std::string_view StanzaKindName(StanzaKind kind);

// One configuration line.
struct Command {
  // Keyword tokens in order, with parameters (addresses, numbers, names)
  // removed. Two commands that differ only in parameters share a path.
  std::vector<std::string> keyword_path;
  // Parameter tokens in order.
  std::vector<std::string> params;
  // Source text without leading indentation.
  std::string raw;
  // All whitespace-separated tokens of `raw`.
  std::vector<std::string> tokens;
  // 1-based source line, or 0 for synthesized lines.
  int line = 0;

  // `keyword_path` joined with single spaces.
  std::string KeywordKey() const;
};

// Tokenizes and classifies `text` (no indentation) into a command.
Command MakeCommand(std::string_view text, int line = 0);

struct Stanza {
  StanzaKind kind = StanzaKind::kOther;
  // `!` lines preceding the stanza, verbatim.
  std::vector<std::string> leading_comments;
  // True for block stanzas, which render `header` then indented `commands`.
  bool block = false;
  // Header line of a block stanza; unused for line stanzas.
  Command header;
  // Children of a block stanza, or the lines of a line stanza.
  std::vector<Command> commands;
  // Indentation used when rendering children of a block stanza.
  std::string indent = " ";
  // Interface name, process/AS number, list or map name; empty otherwise.
  std::string name;
};

struct RouterConfig {
  std::string hostname;
  std::vector<Stanza> stanzas;
  std::vector<std::string> trailing_comments;
};

// Parses a configuration. Throws `Error` with kMalformedLine (prefixed with the
// line number) for lines inside recognized stanzas that violate the grammar,
// and kMissingHostname if no `hostname` line exists.
RouterConfig ParseConfig(std::string_view text);

std::string RenderConfig(const RouterConfig& config);

// Host metadata sidecar.
struct HostSpec {
  std::string hostname;
  Ipv4 iface_ip;
  Ipv4 mask;
  std::string gateway_router;
  Ipv4 gateway_ip;

  Prefix subnet() const { return *Prefix::FromMask(iface_ip, mask); }
};

// Parses a host JSON document. Throws kMalformedHost on missing or mistyped
// fields or invalid addresses.
HostSpec ParseHost(std::string_view json_text);
std::string RenderHost(const HostSpec& host);

// ---------------------------------------------------------------------------
// Typed interpretation.
// ---------------------------------------------------------------------------

inline constexpr int kDefaultOspfCost = 1;

struct InterfaceConfig {
  std::string name;
  std::optional<Ipv4> address;
  std::optional<Prefix> subnet;
  int ospf_cost = kDefaultOspfCost;
  bool cost_explicit = false;
  bool shutdown = false;
};

// A reference from a routing process to a filter object.
struct FilterRef {
  enum class Kind { kPrefixList, kAccessList, kRouteMap };
  Kind kind = Kind::kPrefixList;
  std::string name;

  friend auto operator<=>(const FilterRef&, const FilterRef&) = default;
};

struct OspfConfig {
  int process_id = 0;
  // Networks from `network A W area N` statements.
  std::vector<Prefix> networks;
  // Redistributed sources: "static", "bgp", "connected".
  std::set<std::string> redistribute;
  std::set<std::string> passive_interfaces;
  // Inbound distribute-lists; each filters routes installed into the FIB.
  std::vector<FilterRef> distribute_in;
  std::optional<Ipv4> router_id;
};

struct BgpNeighbor {
  // The address or peer-group name used in the configuration.
  std::string key;
  bool is_group = false;
  std::optional<Ipv4> address;
  std::optional<uint32_t> remote_as;
  // Peer group this neighbor belongs to.
  std::optional<std::string> peer_group;
  bool next_hop_self = false;
  std::vector<FilterRef> in;
  std::vector<FilterRef> out;
};

struct BgpConfig {
  uint32_t asn = 0;
  std::optional<Ipv4> router_id;
  std::map<std::string, BgpNeighbor> neighbors;
  std::vector<Prefix> networks;
  // Redistributed sources: "ospf", "static", "connected".
  std::set<std::string> redistribute;

  // Resolves a member's effective settings by merging its peer group.
  BgpNeighbor Effective(const BgpNeighbor& neighbor) const;
};

struct StaticRoute {
  Prefix prefix;
  std::optional<Ipv4> next_hop;
  std::optional<std::string> interface;
  int distance = 1;
};

// Address match of an access-list entry.
struct AclAddress {
  enum class Kind { kAny, kHost, kWildcard };
  Kind kind = Kind::kAny;
  Ipv4 address;
  Ipv4 wildcard;

  bool Matches(Ipv4 value) const;
};

struct AclEntry {
  bool permit = true;
  bool extended = false;
  AclAddress source;
  AclAddress destination;
};

struct PrefixListEntry {
  int seq = 0;
  bool permit = true;
  Prefix prefix;
  std::optional<int> ge;
  std::optional<int> le;

  bool Matches(const Prefix& route) const;
};

struct RouteMapEntry {
  int seq = 0;
  bool permit = true;
  std::vector<FilterRef> matches;
};

struct RouterModel {
  std::string hostname;
  std::vector<InterfaceConfig> interfaces;
  std::optional<OspfConfig> ospf;
  std::optional<BgpConfig> bgp;
  std::vector<StaticRoute> static_routes;
  std::map<std::string, std::vector<AclEntry>> access_lists;
  // Entries sorted by sequence number.
  std::map<std::string, std::vector<PrefixListEntry>> prefix_lists;
  // Entries sorted by sequence number.
  std::map<std::string, std::vector<RouteMapEntry>> route_maps;

  const InterfaceConfig* FindInterface(std::string_view name) const;

  // True if the named filter permits a route to `route`. A reference to a
  // missing prefix list or access list permits; a missing route map denies.
  bool Permits(const FilterRef& filter, const Prefix& route) const;
  bool PermitsAll(const std::vector<FilterRef>& filters,
                  const Prefix& route) const;
};

// Builds the typed interpretation. Throws kMalformedLine on grammar
// violations inside recognized stanzas.
RouterModel Interpret(const RouterConfig& config);

// ---------------------------------------------------------------------------
// Editing helpers used by configuration generation and repair.
// ---------------------------------------------------------------------------

// Returns the first stanza of `kind` named `name` (any name if empty).
Stanza* FindStanza(RouterConfig& config, StanzaKind kind,
                   std::string_view name = {});
const Stanza* FindStanza(const RouterConfig& config, StanzaKind kind,
                         std::string_view name = {});

// Index of the last stanza of `kind`, or -1.
int LastStanzaIndex(const RouterConfig& config, StanzaKind kind);

// Inserts `stanza` after the last stanza of `anchor_kind` (or before the
// first stanza with a later canonical position if none exists).
void InsertStanza(RouterConfig& config, Stanza stanza, StanzaKind anchor_kind);

// Inserts `command` after the last child of `stanza` whose keyword path starts
// with `after_keyword`; appends if none matches.
void InsertCommandAfter(Stanza& stanza, Command command,
                        std::string_view after_keyword);

// True if most stanzas of the configuration are preceded by a `!` line.
bool UsesBangSeparators(const RouterConfig& config);

}  // namespace netcloak

#endif  // NETCLOAK_CONFIG_MODEL_H_
