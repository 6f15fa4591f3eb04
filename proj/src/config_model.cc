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

#include "netcloak/config_model.h"

#include <algorithm>
#include <charconv>

#include "json.hpp"

#include "netcloak/error.h"

namespace netcloak {
namespace {

// Tokens that are part of the command grammar rather than parameters.
const std::set<std::string, std::less<>>& Keywords() {
  static const auto* keywords = new std::set<std::string, std::less<>>{
      "hostname", "interface", "router", "ospf", "bgp", "ip", "address",
      "secondary", "cost", "shutdown", "no", "network", "area", "redistribute",
      "static", "connected", "subnets", "route-map", "distribute-list",
      "prefix", "prefix-list", "in", "out", "passive-interface", "router-id",
      "neighbor", "remote-as", "peer-group", "next-hop-self", "mask",
      "description", "update-source", "ebgp-multihop", "route",
      "access-list", "standard", "extended", "permit", "deny", "host", "any",
      "seq", "ge", "le", "match", "set", "local-preference", "metric",
      "metric-type", "community", "version", "service", "timestamps", "end",
      "line", "vty", "con", "login", "password", "enable", "secret",
      "logging", "duplex", "auto", "speed", "mtu", "bandwidth",
      "log-adjacency-changes", "maximum-paths", "auto-summary",
      "synchronization", "address-family", "ipv4", "unicast",
      "exit-address-family", "activate", "send-community", "default",
      "default-information", "originate", "exec-timeout", "transport",
      "input", "ssh", "telnet", "banner", "domain-name", "domain", "lookup",
      "cef", "name-server", "debugging", "datetime", "msec", "log",
      "password-encryption", "boot-start-marker", "boot-end-marker", "aaa",
      "new-model", "remark", "ntp", "server", "snmp-server", "clock",
      "timezone", "http", "negotiation", "encapsulation", "full", "half",
      "media-type", "keepalive", "timers", "throttle", "spf", "lsa",
      "uptime", "localtime", "show-timezone", "console", "monitor",
      "buffered", "classless", "forward-protocol", "nd", "always",
  };
  return *keywords;
}

std::vector<std::string> SplitTokens(std::string_view text) {
  std::vector<std::string> tokens;
  size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && (text[i] == ' ' || text[i] == '\t')) ++i;
    size_t start = i;
    while (i < text.size() && text[i] != ' ' && text[i] != '\t') ++i;
    if (i > start) tokens.emplace_back(text.substr(start, i - start));
  }
  return tokens;
}

std::string_view TrimRight(std::string_view text) {
  while (!text.empty() &&
         (text.back() == ' ' || text.back() == '\t' || text.back() == '\r')) {
    text.remove_suffix(1);
  }
  return text;
}

[[noreturn]] void Malformed(const Command& command, std::string_view why) {
  throw Error(ErrorCode::kMalformedLine,
              "line " + std::to_string(command.line) + ": " +
                  std::string(why) + ": '" + command.raw + "'");
}

std::optional<int64_t> ParseInt(std::string_view text) {
  int64_t value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(),
                                   value);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
    return std::nullopt;
  }
  return value;
}

Ipv4 RequireIp(const Command& command, size_t index) {
  if (index >= command.tokens.size()) Malformed(command, "missing address");
  auto ip = Ipv4::Parse(command.tokens[index]);
  if (!ip) Malformed(command, "invalid address");
  return *ip;
}

int64_t RequireInt(const Command& command, size_t index, int64_t lo,
                   int64_t hi) {
  if (index >= command.tokens.size()) Malformed(command, "missing number");
  auto value = ParseInt(command.tokens[index]);
  if (!value || *value < lo || *value > hi) {
    Malformed(command, "number out of range");
  }
  return *value;
}

bool IsPermitOrDeny(const std::string& token) {
  return token == "permit" || token == "deny";
}

// Parses an access-list address match. Standard lists accept a bare address
// as a host match. `index` is advanced past the consumed tokens.
AclAddress ParseAclAddress(const Command& command, size_t& index) {
  const auto& t = command.tokens;
  if (index >= t.size()) Malformed(command, "missing address match");
  AclAddress address;
  if (t[index] == "any") {
    ++index;
    return address;
  }
  if (t[index] == "host") {
    address.kind = AclAddress::Kind::kHost;
    address.address = RequireIp(command, index + 1);
    index += 2;
    return address;
  }
  address.address = RequireIp(command, index);
  if (index + 1 < t.size() && Ipv4::Parse(t[index + 1])) {
    address.kind = AclAddress::Kind::kWildcard;
    address.wildcard = *Ipv4::Parse(t[index + 1]);
    index += 2;
  } else {
    address.kind = AclAddress::Kind::kHost;
    index += 1;
  }
  return address;
}

// Parses "permit|deny <match...>" starting at `index`.
AclEntry ParseAclBody(const Command& command, size_t index, bool extended) {
  const auto& t = command.tokens;
  if (index >= t.size() || !IsPermitOrDeny(t[index])) {
    Malformed(command, "expected permit or deny");
  }
  AclEntry entry;
  entry.permit = t[index] == "permit";
  entry.extended = extended;
  ++index;
  if (extended) {
    if (index >= t.size()) Malformed(command, "missing protocol");
    ++index;  // Protocol; only "ip" is meaningful for route filtering.
    entry.source = ParseAclAddress(command, index);
    entry.destination = ParseAclAddress(command, index);
  } else {
    entry.source = ParseAclAddress(command, index);
  }
  return entry;
}

bool IsExtendedAclNumber(int64_t n) {
  return (n >= 100 && n <= 199) || (n >= 2000 && n <= 2699);
}

std::optional<FilterRef::Kind> FilterKindForKeyword(std::string_view word) {
  if (word == "route-map") return FilterRef::Kind::kRouteMap;
  if (word == "prefix-list") return FilterRef::Kind::kPrefixList;
  if (word == "distribute-list") return FilterRef::Kind::kAccessList;
  return std::nullopt;
}

// Classful mask for `network A` statements without an explicit mask.
int ClassfulLength(Ipv4 address) {
  uint32_t first = address.value() >> 24;
  if (first < 128) return 8;
  if (first < 192) return 16;
  return 24;
}

void InterpretInterface(const Stanza& stanza, RouterModel& model) {
  InterfaceConfig iface;
  iface.name = stanza.name;
  for (const Command& c : stanza.commands) {
    const auto& t = c.tokens;
    if (t[0] == "ip" && t.size() >= 2 && t[1] == "address") {
      if (t.size() < 4 || t.size() > 5) Malformed(c, "bad ip address");
      if (t.size() == 5 && t[4] == "secondary") continue;
      Ipv4 address = RequireIp(c, 2);
      Ipv4 mask = RequireIp(c, 3);
      auto subnet = Prefix::FromMask(address, mask);
      if (!subnet) Malformed(c, "non-contiguous mask");
      iface.address = address;
      iface.subnet = subnet;
    } else if (t[0] == "ip" && t.size() >= 2 && t[1] == "ospf" &&
               t.size() >= 3 && t[2] == "cost") {
      if (t.size() != 4) Malformed(c, "bad ip ospf cost");
      iface.ospf_cost = static_cast<int>(RequireInt(c, 3, 1, 65535));
      iface.cost_explicit = true;
    } else if (t[0] == "shutdown") {
      if (t.size() != 1) Malformed(c, "bad shutdown");
      iface.shutdown = true;
    } else if (t[0] == "no" && t.size() == 2 && t[1] == "shutdown") {
      iface.shutdown = false;
    }
  }
  model.interfaces.push_back(std::move(iface));
}

void InterpretOspf(const Stanza& stanza, RouterModel& model) {
  OspfConfig ospf;
  ospf.process_id =
      static_cast<int>(RequireInt(stanza.header, 2, 1, 65535));
  for (const Command& c : stanza.commands) {
    const auto& t = c.tokens;
    if (t[0] == "network") {
      if (t.size() != 5 || t[3] != "area") Malformed(c, "bad network");
      Ipv4 address = RequireIp(c, 1);
      Ipv4 wildcard = RequireIp(c, 2);
      auto length = LengthFromWildcard(wildcard);
      if (!length) Malformed(c, "non-contiguous wildcard");
      RequireInt(c, 4, 0, 4294967295LL);
      ospf.networks.emplace_back(address, *length);
    } else if (t[0] == "redistribute") {
      if (t.size() < 2) Malformed(c, "bad redistribute");
      if (t[1] != "static" && t[1] != "bgp" && t[1] != "connected") {
        Malformed(c, "unsupported redistribute source");
      }
      ospf.redistribute.insert(t[1]);
    } else if (t[0] == "distribute-list") {
      if (t.size() < 3) Malformed(c, "bad distribute-list");
      FilterRef ref;
      size_t direction = 2;
      if (t[1] == "prefix") {
        if (t.size() < 4) Malformed(c, "bad distribute-list");
        ref = {FilterRef::Kind::kPrefixList, t[2]};
        direction = 3;
      } else if (t[1] == "route-map") {
        if (t.size() < 4) Malformed(c, "bad distribute-list");
        ref = {FilterRef::Kind::kRouteMap, t[2]};
        direction = 3;
      } else {
        ref = {FilterRef::Kind::kAccessList, t[1]};
      }
      if (t[direction] != "in" && t[direction] != "out") {
        Malformed(c, "distribute-list direction");
      }
      if (t[direction] == "in") ospf.distribute_in.push_back(ref);
    } else if (t[0] == "passive-interface") {
      if (t.size() != 2) Malformed(c, "bad passive-interface");
      ospf.passive_interfaces.insert(t[1]);
    } else if (t[0] == "router-id") {
      if (t.size() != 2) Malformed(c, "bad router-id");
      ospf.router_id = RequireIp(c, 1);
    }
  }
  model.ospf = std::move(ospf);
}

void InterpretBgp(const Stanza& stanza, RouterModel& model) {
  BgpConfig bgp;
  bgp.asn = static_cast<uint32_t>(
      RequireInt(stanza.header, 2, 1, 4294967295LL));
  auto neighbor = [&bgp](const std::string& key) -> BgpNeighbor& {
    BgpNeighbor& n = bgp.neighbors[key];
    if (n.key.empty()) {
      n.key = key;
      n.address = Ipv4::Parse(key);
    }
    return n;
  };
  for (const Command& c : stanza.commands) {
    const auto& t = c.tokens;
    if (t[0] == "neighbor") {
      if (t.size() < 3) Malformed(c, "bad neighbor");
      const std::string& verb = t[2];
      if (verb == "remote-as") {
        if (t.size() != 4) Malformed(c, "bad remote-as");
        neighbor(t[1]).remote_as =
            static_cast<uint32_t>(RequireInt(c, 3, 1, 4294967295LL));
      } else if (verb == "peer-group") {
        if (t.size() == 3) {
          if (Ipv4::Parse(t[1])) Malformed(c, "peer-group name is an address");
          neighbor(t[1]).is_group = true;
        } else if (t.size() == 4) {
          if (!Ipv4::Parse(t[1])) Malformed(c, "peer-group member address");
          neighbor(t[1]).peer_group = t[3];
        } else {
          Malformed(c, "bad peer-group");
        }
      } else if (auto kind = FilterKindForKeyword(verb)) {
        if (t.size() != 5 || (t[4] != "in" && t[4] != "out")) {
          Malformed(c, "bad neighbor filter");
        }
        auto& list = t[4] == "in" ? neighbor(t[1]).in : neighbor(t[1]).out;
        list.push_back({*kind, t[3]});
      } else if (verb == "next-hop-self") {
        if (t.size() != 3) Malformed(c, "bad next-hop-self");
        neighbor(t[1]).next_hop_self = true;
      }
    } else if (t[0] == "network") {
      Ipv4 address = RequireIp(c, 1);
      if (t.size() == 2) {
        bgp.networks.emplace_back(address, ClassfulLength(address));
      } else if (t.size() == 4 && t[2] == "mask") {
        auto prefix = Prefix::FromMask(address, RequireIp(c, 3));
        if (!prefix) Malformed(c, "non-contiguous mask");
        bgp.networks.push_back(*prefix);
      } else {
        Malformed(c, "bad network");
      }
    } else if (t[0] == "redistribute") {
      if (t.size() < 2) Malformed(c, "bad redistribute");
      if (t[1] != "ospf" && t[1] != "static" && t[1] != "connected") {
        Malformed(c, "unsupported redistribute source");
      }
      bgp.redistribute.insert(t[1]);
    } else if (t[0] == "bgp" && t.size() >= 2 && t[1] == "router-id") {
      if (t.size() != 3) Malformed(c, "bad bgp router-id");
      bgp.router_id = RequireIp(c, 2);
    }
  }
  for (const auto& [key, n] : bgp.neighbors) {
    if (!n.is_group && !n.address) {
      throw Error(ErrorCode::kMalformedLine,
                  "neighbor '" + key + "' is neither an address nor a group");
    }
  }
  model.bgp = std::move(bgp);
}

void InterpretStatic(const Command& c, RouterModel& model) {
  const auto& t = c.tokens;
  if (t.size() < 5 || t.size() > 6) Malformed(c, "bad ip route");
  auto prefix = Prefix::FromMask(RequireIp(c, 2), RequireIp(c, 3));
  if (!prefix) Malformed(c, "non-contiguous mask");
  StaticRoute route;
  route.prefix = *prefix;
  if (auto nh = Ipv4::Parse(t[4])) {
    route.next_hop = nh;
  } else {
    route.interface = t[4];
  }
  if (t.size() == 6) route.distance = static_cast<int>(RequireInt(c, 5, 1, 255));
  model.static_routes.push_back(route);
}

void InterpretNumberedAcl(const Command& c, RouterModel& model) {
  const auto& t = c.tokens;
  int64_t number = RequireInt(c, 1, 1, 2699);
  if (t.size() >= 3 && t[2] == "remark") return;
  model.access_lists[t[1]].push_back(
      ParseAclBody(c, 2, IsExtendedAclNumber(number)));
}

void InterpretNamedAcl(const Stanza& stanza, RouterModel& model) {
  bool extended = stanza.header.tokens[2] == "extended";
  auto& entries = model.access_lists[stanza.name];
  for (const Command& c : stanza.commands) {
    if (c.tokens[0] == "remark") continue;
    size_t index = ParseInt(c.tokens[0]) ? 1 : 0;
    entries.push_back(ParseAclBody(c, index, extended));
  }
}

void InterpretPrefixList(const Command& c, RouterModel& model) {
  const auto& t = c.tokens;
  if (t.size() >= 4 && t[3] == "description") return;
  auto& entries = model.prefix_lists[t[2]];
  PrefixListEntry entry;
  size_t index = 3;
  if (index < t.size() && t[index] == "seq") {
    entry.seq = static_cast<int>(RequireInt(c, index + 1, 1, 4294967294LL));
    index += 2;
  } else {
    entry.seq = entries.empty() ? 5 : entries.back().seq + 5;
  }
  if (index >= t.size() || !IsPermitOrDeny(t[index])) {
    Malformed(c, "expected permit or deny");
  }
  entry.permit = t[index] == "permit";
  ++index;
  if (index >= t.size()) Malformed(c, "missing prefix");
  auto prefix = Prefix::Parse(t[index]);
  if (!prefix) Malformed(c, "invalid prefix");
  entry.prefix = *prefix;
  ++index;
  while (index < t.size()) {
    if (t[index] == "ge") {
      entry.ge = static_cast<int>(RequireInt(c, index + 1, 0, 32));
    } else if (t[index] == "le") {
      entry.le = static_cast<int>(RequireInt(c, index + 1, 0, 32));
    } else {
      Malformed(c, "unexpected token");
    }
    index += 2;
  }
  entries.push_back(entry);
  std::stable_sort(entries.begin(), entries.end(),
                   [](const auto& a, const auto& b) { return a.seq < b.seq; });
}

void InterpretRouteMap(const Stanza& stanza, RouterModel& model) {
  const auto& h = stanza.header;
  RouteMapEntry entry;
  entry.permit = h.tokens[2] == "permit";
  entry.seq = h.tokens.size() == 4
                  ? static_cast<int>(RequireInt(h, 3, 0, 65535))
                  : 10;
  for (const Command& c : stanza.commands) {
    const auto& t = c.tokens;
    if (t[0] != "match") continue;
    if (t.size() >= 3 && t[1] == "ip" && t[2] == "address") {
      size_t index = 3;
      FilterRef::Kind kind = FilterRef::Kind::kAccessList;
      if (index < t.size() && t[index] == "prefix-list") {
        kind = FilterRef::Kind::kPrefixList;
        ++index;
      }
      if (index >= t.size()) Malformed(c, "missing match list");
      for (; index < t.size(); ++index) entry.matches.push_back({kind, t[index]});
    }
  }
  auto& entries = model.route_maps[stanza.name];
  entries.push_back(entry);
  std::stable_sort(entries.begin(), entries.end(),
                   [](const auto& a, const auto& b) { return a.seq < b.seq; });
}

// Classifies a top-level line. Returns the stanza kind, the stanza name and
// whether it opens a block; validates headers of recognized stanzas.
struct TopLevelClass {
  StanzaKind kind;
  std::string name;
  bool block;
};

TopLevelClass ClassifyTopLevel(const Command& c) {
  const auto& t = c.tokens;
  const std::string& first = t[0];
  if (first == "hostname") {
    if (t.size() != 2) Malformed(c, "bad hostname");
    return {StanzaKind::kHostname, t[1], false};
  }
  if (first == "interface") {
    if (t.size() != 2) Malformed(c, "bad interface");
    return {StanzaKind::kInterface, t[1], true};
  }
  if (first == "router" && t.size() >= 2 && t[1] == "ospf") {
    if (t.size() != 3) Malformed(c, "bad router ospf");
    RequireInt(c, 2, 1, 65535);
    return {StanzaKind::kRouterOspf, t[2], true};
  }
  if (first == "router" && t.size() >= 2 && t[1] == "bgp") {
    if (t.size() != 3) Malformed(c, "bad router bgp");
    RequireInt(c, 2, 1, 4294967295LL);
    return {StanzaKind::kRouterBgp, t[2], true};
  }
  if (first == "ip" && t.size() >= 2 && t[1] == "route") {
    return {StanzaKind::kStaticRoute, "", false};
  }
  if (first == "ip" && t.size() >= 2 && t[1] == "prefix-list") {
    if (t.size() < 4) Malformed(c, "bad prefix-list");
    return {StanzaKind::kPrefixList, t[2], false};
  }
  if (first == "ip" && t.size() >= 2 && t[1] == "access-list") {
    if (t.size() != 4 || (t[2] != "standard" && t[2] != "extended")) {
      Malformed(c, "bad ip access-list");
    }
    return {StanzaKind::kAccessList, t[3], true};
  }
  if (first == "access-list") {
    if (t.size() < 3) Malformed(c, "bad access-list");
    RequireInt(c, 1, 1, 2699);
    return {StanzaKind::kAccessList, t[1], false};
  }
  if (first == "route-map") {
    if (t.size() < 3 || t.size() > 4 || !IsPermitOrDeny(t[2])) {
      Malformed(c, "bad route-map");
    }
    if (t.size() == 4) RequireInt(c, 3, 0, 65535);
    return {StanzaKind::kRouteMap, t[1], true};
  }
  if (first == "distribute-list") {
    return {StanzaKind::kDistributeListHost, "", false};
  }
  return {StanzaKind::kOther, "", true};
}

}  // namespace

std::string_view StanzaKindName(StanzaKind kind) {
  switch (kind) {
    case StanzaKind::kInterface: return "Interface";
    case StanzaKind::kRouterOspf: return "RouterOspf";
    case StanzaKind::kRouterBgp: return "RouterBgp";
    case StanzaKind::kStaticRoute: return "StaticRoute";
    case StanzaKind::kAccessList: return "AccessList";
    case StanzaKind::kPrefixList: return "PrefixList";
    case StanzaKind::kRouteMap: return "RouteMap";
    case StanzaKind::kDistributeListHost: return "DistributeListHost";
    case StanzaKind::kHostname: return "Hostname";
    case StanzaKind::kOther: return "Other";
  }
  return "Other";
}

std::string Command::KeywordKey() const {
  std::string key;
  for (const auto& k : keyword_path) {
    if (!key.empty()) key += ' ';
    key += k;
  }
  return key;
}

Command MakeCommand(std::string_view text, int line) {
  Command command;
  command.raw = std::string(TrimRight(text));
  command.line = line;
  command.tokens = SplitTokens(command.raw);
  const auto& keywords = Keywords();
  bool in_description = false;
  for (const auto& token : command.tokens) {
    if (!in_description && keywords.count(token)) {
      command.keyword_path.push_back(token);
      if (token == "description" || token == "remark" || token == "banner") {
        in_description = true;
      }
    } else {
      command.params.push_back(token);
    }
  }
  return command;
}

RouterConfig ParseConfig(std::string_view text) {
  RouterConfig config;
  std::vector<std::string> pending_comments;
  int open_block = -1;
  int line_no = 0;
  size_t pos = 0;
  while (pos <= text.size()) {
    size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = TrimRight(text.substr(pos, end - pos));
    pos = end + 1;
    ++line_no;
    size_t first = line.find_first_not_of(" \t");
    if (first == std::string_view::npos) continue;
    std::string_view body = line.substr(first);
    if (body[0] == '!') {
      pending_comments.emplace_back(line);
      open_block = -1;
      continue;
    }
    if (first > 0) {
      if (open_block >= 0) {
        Stanza& stanza = config.stanzas[open_block];
        if (stanza.commands.empty()) {
          stanza.indent = std::string(line.substr(0, first));
        }
        stanza.commands.push_back(MakeCommand(body, line_no));
        continue;
      }
      // An indented line outside any block is kept verbatim.
      Stanza orphan;
      orphan.kind = StanzaKind::kOther;
      orphan.leading_comments = std::move(pending_comments);
      pending_comments.clear();
      Command command = MakeCommand(body, line_no);
      command.raw = std::string(line);
      orphan.commands.push_back(std::move(command));
      config.stanzas.push_back(std::move(orphan));
      continue;
    }
    Command command = MakeCommand(body, line_no);
    TopLevelClass cls = ClassifyTopLevel(command);
    open_block = -1;
    if (cls.kind == StanzaKind::kHostname) {
      if (!config.hostname.empty()) {
        Malformed(command, "duplicate hostname line");
      }
      config.hostname = cls.name;
    }
    if (!cls.block && pending_comments.empty() && !config.stanzas.empty()) {
      Stanza& previous = config.stanzas.back();
      if (!previous.block && previous.kind == cls.kind &&
          previous.name == cls.name && cls.kind != StanzaKind::kHostname &&
          cls.kind != StanzaKind::kOther) {
        previous.commands.push_back(std::move(command));
        continue;
      }
    }
    Stanza stanza;
    stanza.kind = cls.kind;
    stanza.name = cls.name;
    stanza.block = cls.block;
    stanza.leading_comments = std::move(pending_comments);
    pending_comments.clear();
    if (cls.block) {
      stanza.header = std::move(command);
      open_block = static_cast<int>(config.stanzas.size());
    } else {
      stanza.commands.push_back(std::move(command));
    }
    config.stanzas.push_back(std::move(stanza));
  }
  config.trailing_comments = std::move(pending_comments);
  if (config.hostname.empty()) {
    throw Error(ErrorCode::kMissingHostname, "configuration has no hostname");
  }
  Interpret(config);  // Validates recognized stanzas.
  return config;
}

std::string RenderConfig(const RouterConfig& config) {
  std::string out;
  for (const Stanza& stanza : config.stanzas) {
    for (const auto& comment : stanza.leading_comments) {
      out += comment;
      out += '\n';
    }
    if (stanza.block) {
      out += stanza.header.raw;
      out += '\n';
      for (const Command& c : stanza.commands) {
        out += stanza.indent;
        out += c.raw;
        out += '\n';
      }
    } else {
      for (const Command& c : stanza.commands) {
        out += c.raw;
        out += '\n';
      }
    }
  }
  for (const auto& comment : config.trailing_comments) {
    out += comment;
    out += '\n';
  }
  return out;
}

HostSpec ParseHost(std::string_view json_text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kMalformedHost, e.what());
  }
  if (!doc.is_object()) {
    throw Error(ErrorCode::kMalformedHost, "host document is not an object");
  }
  auto field = [&doc](const char* name) -> std::string {
    auto it = doc.find(name);
    if (it == doc.end() || !it->is_string()) {
      throw Error(ErrorCode::kMalformedHost,
                  std::string("missing or non-string field '") + name + "'");
    }
    return it->get<std::string>();
  };
  auto address = [&field](const char* name) {
    auto ip = Ipv4::Parse(field(name));
    if (!ip) {
      throw Error(ErrorCode::kMalformedHost,
                  std::string("invalid address in '") + name + "'");
    }
    return *ip;
  };
  HostSpec host;
  host.hostname = field("hostname");
  host.iface_ip = address("iface_ip");
  host.mask = address("mask");
  host.gateway_router = field("gateway_router");
  host.gateway_ip = address("gateway_ip");
  if (host.hostname.empty() || host.gateway_router.empty()) {
    throw Error(ErrorCode::kMalformedHost, "empty name field");
  }
  if (!LengthFromMask(host.mask)) {
    throw Error(ErrorCode::kMalformedHost, "non-contiguous mask");
  }
  return host;
}

std::string RenderHost(const HostSpec& host) {
  nlohmann::ordered_json doc;
  doc["hostname"] = host.hostname;
  doc["iface_ip"] = host.iface_ip.ToString();
  doc["mask"] = host.mask.ToString();
  doc["gateway_router"] = host.gateway_router;
  doc["gateway_ip"] = host.gateway_ip.ToString();
  return doc.dump(2) + "\n";
}

BgpNeighbor BgpConfig::Effective(const BgpNeighbor& neighbor) const {
  if (!neighbor.peer_group) return neighbor;
  auto it = neighbors.find(*neighbor.peer_group);
  if (it == neighbors.end()) return neighbor;
  const BgpNeighbor& group = it->second;
  BgpNeighbor merged = neighbor;
  if (!merged.remote_as) merged.remote_as = group.remote_as;
  merged.next_hop_self = neighbor.next_hop_self || group.next_hop_self;
  merged.in = group.in;
  merged.in.insert(merged.in.end(), neighbor.in.begin(), neighbor.in.end());
  merged.out = group.out;
  merged.out.insert(merged.out.end(), neighbor.out.begin(), neighbor.out.end());
  return merged;
}

bool AclAddress::Matches(Ipv4 value) const {
  switch (kind) {
    case Kind::kAny: return true;
    case Kind::kHost: return value == address;
    case Kind::kWildcard: {
      uint32_t care = ~wildcard.value();
      return (value.value() & care) == (address.value() & care);
    }
  }
  return false;
}

bool PrefixListEntry::Matches(const Prefix& route) const {
  if (!prefix.Contains(route.network()) || route.length() < prefix.length()) {
    return false;
  }
  if (!ge && !le) return route.length() == prefix.length();
  int lo = ge ? *ge : prefix.length();
  int hi = le ? *le : 32;
  return route.length() >= lo && route.length() <= hi;
}

const InterfaceConfig* RouterModel::FindInterface(std::string_view name) const {
  for (const auto& iface : interfaces) {
    if (iface.name == name) return &iface;
  }
  return nullptr;
}

bool RouterModel::Permits(const FilterRef& filter, const Prefix& route) const {
  switch (filter.kind) {
    case FilterRef::Kind::kPrefixList: {
      auto it = prefix_lists.find(filter.name);
      if (it == prefix_lists.end()) return true;
      for (const auto& entry : it->second) {
        if (entry.Matches(route)) return entry.permit;
      }
      return false;
    }
    case FilterRef::Kind::kAccessList: {
      auto it = access_lists.find(filter.name);
      if (it == access_lists.end()) return true;
      for (const auto& entry : it->second) {
        bool match = entry.source.Matches(route.network());
        if (entry.extended) match = match && entry.destination.Matches(route.mask());
        if (match) return entry.permit;
      }
      return false;
    }
    case FilterRef::Kind::kRouteMap: {
      auto it = route_maps.find(filter.name);
      if (it == route_maps.end()) return false;
      for (const auto& entry : it->second) {
        bool match = true;
        for (const auto& m : entry.matches) {
          if (!Permits(m, route)) {
            match = false;
            break;
          }
        }
        if (match) return entry.permit;
      }
      return false;
    }
  }
  return false;
}

bool RouterModel::PermitsAll(const std::vector<FilterRef>& filters,
                             const Prefix& route) const {
  for (const auto& f : filters) {
    if (!Permits(f, route)) return false;
  }
  return true;
}

RouterModel Interpret(const RouterConfig& config) {
  RouterModel model;
  model.hostname = config.hostname;
  for (const Stanza& stanza : config.stanzas) {
    switch (stanza.kind) {
      case StanzaKind::kInterface:
        InterpretInterface(stanza, model);
        break;
      case StanzaKind::kRouterOspf:
        InterpretOspf(stanza, model);
        break;
      case StanzaKind::kRouterBgp:
        InterpretBgp(stanza, model);
        break;
      case StanzaKind::kStaticRoute:
        for (const auto& c : stanza.commands) InterpretStatic(c, model);
        break;
      case StanzaKind::kAccessList:
        if (stanza.block) {
          InterpretNamedAcl(stanza, model);
        } else {
          for (const auto& c : stanza.commands) InterpretNumberedAcl(c, model);
        }
        break;
      case StanzaKind::kPrefixList:
        for (const auto& c : stanza.commands) InterpretPrefixList(c, model);
        break;
      case StanzaKind::kRouteMap:
        InterpretRouteMap(stanza, model);
        break;
      case StanzaKind::kDistributeListHost:
      case StanzaKind::kHostname:
      case StanzaKind::kOther:
        break;
    }
  }
  return model;
}

Stanza* FindStanza(RouterConfig& config, StanzaKind kind,
                   std::string_view name) {
  for (Stanza& stanza : config.stanzas) {
    if (stanza.kind == kind && (name.empty() || stanza.name == name)) {
      return &stanza;
    }
  }
  return nullptr;
}

const Stanza* FindStanza(const RouterConfig& config, StanzaKind kind,
                         std::string_view name) {
  return FindStanza(const_cast<RouterConfig&>(config), kind, name);
}

int LastStanzaIndex(const RouterConfig& config, StanzaKind kind) {
  for (int i = static_cast<int>(config.stanzas.size()) - 1; i >= 0; --i) {
    if (config.stanzas[i].kind == kind) return i;
  }
  return -1;
}

namespace {

// Canonical relative position of stanza kinds, used when inserting a kind the
// configuration does not contain yet.
int CanonicalRank(StanzaKind kind) {
  switch (kind) {
    case StanzaKind::kHostname: return 0;
    case StanzaKind::kInterface: return 1;
    case StanzaKind::kRouterOspf: return 2;
    case StanzaKind::kRouterBgp: return 3;
    case StanzaKind::kStaticRoute: return 4;
    case StanzaKind::kAccessList: return 5;
    case StanzaKind::kPrefixList: return 6;
    case StanzaKind::kRouteMap: return 7;
    case StanzaKind::kDistributeListHost: return 8;
    case StanzaKind::kOther: return -1;
  }
  return -1;
}

}  // namespace

void InsertStanza(RouterConfig& config, Stanza stanza, StanzaKind anchor_kind) {
  int last = LastStanzaIndex(config, anchor_kind);
  if (last >= 0) {
    config.stanzas.insert(config.stanzas.begin() + last + 1, std::move(stanza));
    return;
  }
  // Place after the last known stanza with a rank not above the anchor's.
  int rank = CanonicalRank(anchor_kind);
  int position = -1;
  for (int i = 0; i < static_cast<int>(config.stanzas.size()); ++i) {
    int r = CanonicalRank(config.stanzas[i].kind);
    if (r >= 0 && r <= rank) position = i;
  }
  config.stanzas.insert(config.stanzas.begin() + position + 1,
                        std::move(stanza));
}

void InsertCommandAfter(Stanza& stanza, Command command,
                        std::string_view after_keyword) {
  int last = -1;
  for (int i = 0; i < static_cast<int>(stanza.commands.size()); ++i) {
    if (stanza.commands[i].KeywordKey().starts_with(after_keyword)) last = i;
  }
  if (last < 0 || after_keyword.empty()) {
    stanza.commands.push_back(std::move(command));
  } else {
    stanza.commands.insert(stanza.commands.begin() + last + 1,
                           std::move(command));
  }
}

bool UsesBangSeparators(const RouterConfig& config) {
  if (config.stanzas.size() < 2) return false;
  size_t with = 0;
  for (size_t i = 1; i < config.stanzas.size(); ++i) {
    if (!config.stanzas[i].leading_comments.empty()) ++with;
  }
  return 2 * with >= config.stanzas.size() - 1;
}

}  // namespace netcloak
