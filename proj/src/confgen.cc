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
// File: confgen.cc
// -----------------------------------------------------------------------------

#include "netcloak/confgen.h"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <tuple>

#include "netcloak/error.h"
#include "netcloak/simulator.h"

namespace netcloak {
namespace {

const Prefix kLinkPool(Ipv4((10u << 24) | (250u << 16)), 16);
const Prefix kLanPool(Ipv4((10u << 24) | (251u << 16)), 16);
const Prefix kLoopbackPool(Ipv4((10u << 24) | (252u << 16)), 16);

std::string JoinTokens(const std::vector<std::string>& tokens) {
  std::string out;
  for (const auto& t : tokens) {
    if (!out.empty()) out += ' ';
    out += t;
  }
  return out;
}

Command Line(const std::string& text) { return MakeCommand(text); }

std::optional<long long> ParseNumber(std::string_view text) {
  long long value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(),
                                   value);
  if (text.empty() || ec != std::errc() || ptr != text.data() + text.size()) {
    return std::nullopt;
  }
  return value;
}

bool IsLoopbackName(std::string_view name) {
  std::string lower;
  for (char c : name) lower += static_cast<char>(std::tolower(c));
  if (lower.starts_with("loopback")) return true;
  return lower.size() > 2 && lower.starts_with("lo") &&
         std::isdigit(static_cast<unsigned char>(lower[2]));
}

struct NameParts {
  std::string stem;
  std::optional<long long> number;
  size_t width = 0;
};

NameParts SplitNumber(const std::string& name) {
  size_t end = name.size();
  while (end > 0 && std::isdigit(static_cast<unsigned char>(name[end - 1]))) {
    --end;
  }
  NameParts parts{name.substr(0, end), std::nullopt, 0};
  std::string digits = name.substr(end);
  if (!digits.empty() && digits.size() <= 12) {
    parts.number = ParseNumber(digits);
    parts.width = digits.size();
  } else if (!digits.empty()) {
    parts.stem = name;
  }
  return parts;
}

std::string Numbered(const std::string& stem, long long n, size_t width) {
  std::string digits = std::to_string(n);
  if (digits.size() < width) digits.insert(0, width - digits.size(), '0');
  return stem + digits;
}

// ---------------------------------------------------------------------------
// Address pools.
// ---------------------------------------------------------------------------

bool Overlaps(const Prefix& a, const Prefix& b) {
  return a.Contains(b) || b.Contains(a);
}

class SubnetPool {
 public:
  SubnetPool(Prefix range, int length, std::vector<Prefix>* used)
      : range_(range), length_(length), used_(used) {
    cursor_ = range.network().value();
    // Loopbacks start at .1 rather than the network address.
    if (length == 32) ++cursor_;
  }

  Prefix Next() {
    const uint64_t step = uint64_t{1} << (32 - length_);
    const uint64_t end = uint64_t{range_.network().value()} +
                         (uint64_t{1} << (32 - range_.length()));
    while (cursor_ < end) {
      Prefix candidate(Ipv4(static_cast<uint32_t>(cursor_)), length_);
      cursor_ += step;
      bool clash = std::any_of(used_->begin(), used_->end(),
                               [&](const Prefix& p) {
                                 return Overlaps(p, candidate);
                               });
      if (clash) continue;
      used_->push_back(candidate);
      return candidate;
    }
    throw Error(ErrorCode::kSubnetPoolExhausted,
                "no free /" + std::to_string(length_) + " left in " +
                    range_.ToString());
  }

 private:
  Prefix range_;
  int length_;
  std::vector<Prefix>* used_;
  uint64_t cursor_ = 0;
};

Ipv4 Offset(const Prefix& subnet, uint32_t offset) {
  return Ipv4(subnet.network().value() + offset);
}

// ---------------------------------------------------------------------------
// Template interface roles.
// ---------------------------------------------------------------------------

using Role = FakeInterface::Role;

// Loopbacks by name; point-to-point subnets (/30, /31) are links; everything
// else is a LAN.
Role StanzaRole(const Stanza& stanza, const RouterModel& model) {
  if (IsLoopbackName(stanza.name)) return Role::kLoopback;
  const InterfaceConfig* iface = model.FindInterface(stanza.name);
  if (iface && iface->subnet && iface->subnet->length() < 30) return Role::kLan;
  return Role::kLink;
}

struct RoleModels {
  std::vector<const Stanza*> by_role[3];
  std::vector<Role> first_seen;

  const Stanza* Pick(Role role, size_t index) const {
    const auto& own = by_role[static_cast<int>(role)];
    if (!own.empty()) return own[index % own.size()];
    if (role == Role::kLoopback) return nullptr;
    const auto& other =
        by_role[static_cast<int>(role == Role::kLink ? Role::kLan : Role::kLink)];
    if (!other.empty()) return other[index % other.size()];
    return nullptr;
  }
};

RoleModels CollectRoleModels(const RouterConfig& config,
                             const RouterModel& model) {
  RoleModels models;
  for (const Stanza& s : config.stanzas) {
    if (s.kind != StanzaKind::kInterface) continue;
    Role role = StanzaRole(s, model);
    models.by_role[static_cast<int>(role)].push_back(&s);
    if (std::find(models.first_seen.begin(), models.first_seen.end(), role) ==
        models.first_seen.end()) {
      models.first_seen.push_back(role);
    }
  }
  for (Role r : {Role::kLoopback, Role::kLink, Role::kLan}) {
    if (std::find(models.first_seen.begin(), models.first_seen.end(), r) ==
        models.first_seen.end()) {
      models.first_seen.push_back(r);
    }
  }
  return models;
}

// Median OSPF cost over a router's OSPF-enabled non-loopback interfaces and
// whether any of them sets the cost explicitly.
std::pair<int, bool> MedianCost(const RouterModel& model) {
  std::vector<int> costs;
  bool explicit_cost = false;
  for (const auto& iface : model.interfaces) {
    if (IsLoopbackName(iface.name) || !OspfEnabled(model, iface)) continue;
    costs.push_back(iface.ospf_cost);
    explicit_cost = explicit_cost || iface.cost_explicit;
  }
  if (costs.empty()) return {kDefaultOspfCost, false};
  std::sort(costs.begin(), costs.end());
  return {costs[(costs.size() - 1) / 2], explicit_cost};
}

std::optional<int> LinkCost(const std::pair<int, bool>& median) {
  if (median.second || median.first != kDefaultOspfCost) return median.first;
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Interface stanzas.
// ---------------------------------------------------------------------------

bool IsNameChar(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

// Replaces, in `token`, the longest occurrence of a name from `known` that is
// not part of a longer word. Returns false if none occurs.
bool ReplaceKnownName(std::string& token, const std::set<std::string>& known,
                      const std::string& replacement) {
  size_t best_pos = std::string::npos, best_len = 0;
  for (const auto& name : known) {
    if (name.empty() || name.size() <= best_len) continue;
    for (size_t pos = token.find(name); pos != std::string::npos;
         pos = token.find(name, pos + 1)) {
      bool left = pos == 0 || !IsNameChar(token[pos - 1]);
      size_t after = pos + name.size();
      bool right = after == token.size() || !IsNameChar(token[after]);
      if (left && right) {
        best_pos = pos;
        best_len = name.size();
        break;
      }
    }
  }
  if (best_pos == std::string::npos) return false;
  token.replace(best_pos, best_len, replacement);
  return true;
}

struct NameRewrite {
  const std::set<std::string>* known = nullptr;
  std::string old_self;
  std::string new_self;
};

// Rewrites a template description for a new interface facing `neighbor`.
// Returns nullopt when it names a device but there is no neighbor to name.
std::optional<Command> RewriteDescription(const Command& description,
                                          const NameRewrite& names,
                                          const std::string& neighbor) {
  std::vector<std::string> tokens = description.tokens;
  for (size_t i = 1; i < tokens.size(); ++i) {
    std::string& t = tokens[i];
    if (!names.old_self.empty() && t == names.old_self) {
      t = names.new_self;
      continue;
    }
    if (!names.known) continue;
    std::set<std::string> others = *names.known;
    others.erase(names.old_self);
    std::string copy = t;
    if (ReplaceKnownName(copy, others, neighbor)) {
      if (neighbor.empty()) return std::nullopt;
      t = copy;
    }
  }
  return MakeCommand(JoinTokens(tokens));
}

struct InterfaceSpec {
  std::string name;
  Ipv4 address;
  Prefix subnet;
  std::string neighbor;
  std::optional<int> cost;
};

// A new interface stanza in the style of `model` (addresses, costs and
// descriptions replaced; shutdown and secondary addresses dropped).
Stanza MakeInterfaceStanza(const Stanza* model, const InterfaceSpec& spec,
                           const NameRewrite& names) {
  Stanza s;
  s.kind = StanzaKind::kInterface;
  s.block = true;
  s.name = spec.name;
  s.header = Line("interface " + spec.name);
  const std::string address_line = "ip address " + spec.address.ToString() +
                                   " " + spec.subnet.mask().ToString();
  bool address_done = false;
  bool cost_done = false;
  int address_index = -1;
  if (model) {
    s.indent = model->indent;
    for (const Command& c : model->commands) {
      const auto& t = c.tokens;
      if (t[0] == "ip" && t.size() >= 2 && t[1] == "address") {
        if (address_done) continue;
        address_index = static_cast<int>(s.commands.size());
        s.commands.push_back(Line(address_line));
        address_done = true;
      } else if (t[0] == "ip" && t.size() >= 3 && t[1] == "ospf" &&
                 t[2] == "cost") {
        if (!spec.cost) continue;
        s.commands.push_back(Line("ip ospf cost " + std::to_string(*spec.cost)));
        cost_done = true;
      } else if (t[0] == "shutdown") {
        continue;
      } else if (t[0] == "description") {
        if (auto d = RewriteDescription(c, names, spec.neighbor)) {
          s.commands.push_back(*d);
        }
      } else {
        Command copy = c;
        copy.line = 0;
        s.commands.push_back(copy);
      }
    }
  }
  if (!address_done) {
    size_t at = 0;
    while (at < s.commands.size() &&
           s.commands[at].tokens[0] == "description") {
      ++at;
    }
    s.commands.insert(s.commands.begin() + at, Line(address_line));
    address_index = static_cast<int>(at);
  }
  if (spec.cost && !cost_done) {
    s.commands.insert(s.commands.begin() + address_index + 1,
                      Line("ip ospf cost " + std::to_string(*spec.cost)));
  }
  return s;
}

std::vector<std::string> InterfaceNames(const RouterConfig& config) {
  std::vector<std::string> names;
  for (const Stanza& s : config.stanzas) {
    if (s.kind == StanzaKind::kInterface) names.push_back(s.name);
  }
  return names;
}

// ---------------------------------------------------------------------------
// OSPF and BGP lines.
// ---------------------------------------------------------------------------

std::string OspfArea(const Stanza* ospf) {
  if (ospf) {
    for (const Command& c : ospf->commands) {
      if (c.tokens[0] == "network" && c.tokens.size() == 5) return c.tokens[4];
    }
  }
  return "0";
}

std::string OspfNetworkLine(const Prefix& subnet, const std::string& area) {
  return "network " + subnet.network().ToString() + " " +
         subnet.wildcard().ToString() + " area " + area;
}

std::string BgpNetworkLine(const Prefix& prefix) {
  return "network " + prefix.network().ToString() + " mask " +
         prefix.mask().ToString();
}

// Adds a `network` statement covering `address` unless one already does.
void EnsureOspfNetwork(RouterConfig& config, Ipv4 address,
                       const Prefix& subnet) {
  Stanza* ospf = FindStanza(config, StanzaKind::kRouterOspf);
  if (!ospf) return;
  for (const Command& c : ospf->commands) {
    if (c.tokens[0] != "network" || c.tokens.size() != 5) continue;
    auto base = Ipv4::Parse(c.tokens[1]);
    auto wildcard = Ipv4::Parse(c.tokens[2]);
    if (!base || !wildcard) continue;
    auto length = LengthFromWildcard(*wildcard);
    if (length && Prefix(*base, *length).Contains(address)) return;
  }
  InsertCommandAfter(*ospf, Line(OspfNetworkLine(subnet, OspfArea(ospf))),
                     "network");
}

// Kind of a configured neighbor relative to `asn`: true for eBGP, nullopt if
// its remote AS is unknown.
std::optional<bool> NeighborIsEbgp(const BgpConfig& bgp, const BgpNeighbor& n) {
  BgpNeighbor eff = bgp.Effective(n);
  if (!eff.remote_as) return std::nullopt;
  return *eff.remote_as != bgp.asn;
}

// Order in which neighbor keys first appear in a BGP stanza.
std::vector<std::string> NeighborOrder(const Stanza& stanza) {
  std::vector<std::string> order;
  for (const Command& c : stanza.commands) {
    if (c.tokens[0] != "neighbor" || c.tokens.size() < 2) continue;
    if (std::find(order.begin(), order.end(), c.tokens[1]) == order.end()) {
      order.push_back(c.tokens[1]);
    }
  }
  return order;
}

// The lines of neighbor `key`, re-keyed to `address` with remote-as set.
std::vector<Command> CopyNeighborLines(const Stanza& stanza,
                                       const std::string& key, Ipv4 address,
                                       uint32_t remote_as) {
  std::vector<Command> out;
  for (const Command& c : stanza.commands) {
    if (c.tokens[0] != "neighbor" || c.tokens.size() < 3 ||
        c.tokens[1] != key) {
      continue;
    }
    std::vector<std::string> tokens = c.tokens;
    tokens[1] = address.ToString();
    if (tokens[2] == "remote-as" && tokens.size() == 4) {
      tokens[3] = std::to_string(remote_as);
    }
    out.push_back(MakeCommand(JoinTokens(tokens)));
  }
  return out;
}

// Lines configuring a new neighbor in the style of `stanza`/`bgp`: joins a
// peer group that fits, else copies a neighbor of the same kind, else a bare
// remote-as line.
std::vector<Command> NeighborLines(const Stanza* stanza, const BgpConfig& bgp,
                                   Ipv4 address, uint32_t remote_as,
                                   bool ebgp) {
  const std::string addr = address.ToString();
  const std::string remote_line =
      "neighbor " + addr + " remote-as " + std::to_string(remote_as);
  if (!stanza) return {Line(remote_line)};
  std::vector<std::string> order = NeighborOrder(*stanza);
  auto members_of = [&](const std::string& group) {
    std::vector<std::string> members;
    for (const auto& key : order) {
      auto it = bgp.neighbors.find(key);
      if (it != bgp.neighbors.end() && it->second.peer_group == group) {
        members.push_back(key);
      }
    }
    return members;
  };
  for (const auto& key : order) {
    auto it = bgp.neighbors.find(key);
    if (it == bgp.neighbors.end() || !it->second.is_group) continue;
    const BgpNeighbor& group = it->second;
    std::vector<std::string> members = members_of(key);
    bool fits;
    if (group.remote_as) {
      fits = *group.remote_as == remote_as;
    } else if (!members.empty()) {
      auto kind = NeighborIsEbgp(bgp, bgp.neighbors.at(members.front()));
      fits = kind && *kind == ebgp;
    } else {
      fits = true;
    }
    if (!fits) continue;
    if (!members.empty()) {
      auto lines = CopyNeighborLines(*stanza, members.front(), address,
                                     remote_as);
      bool has_remote = std::any_of(lines.begin(), lines.end(), [](auto& c) {
        return c.tokens[2] == "remote-as";
      });
      if (!group.remote_as && !has_remote) {
        lines.insert(lines.begin(), Line(remote_line));
      }
      return lines;
    }
    std::vector<Command> lines;
    if (!group.remote_as) lines.push_back(Line(remote_line));
    lines.push_back(Line("neighbor " + addr + " peer-group " + key));
    return lines;
  }
  for (const auto& key : order) {
    auto it = bgp.neighbors.find(key);
    if (it == bgp.neighbors.end() || it->second.is_group ||
        it->second.peer_group) {
      continue;
    }
    auto kind = NeighborIsEbgp(bgp, it->second);
    if (!kind || *kind != ebgp) continue;
    auto lines = CopyNeighborLines(*stanza, key, address, remote_as);
    bool has_remote = std::any_of(lines.begin(), lines.end(), [](auto& c) {
      return c.tokens[2] == "remote-as";
    });
    if (!has_remote) lines.insert(lines.begin(), Line(remote_line));
    return lines;
  }
  return {Line(remote_line)};
}

// Position after the leading `bgp ...` lines of a BGP stanza.
size_t AfterBgpSettings(const Stanza& stanza) {
  size_t at = 0;
  while (at < stanza.commands.size() && stanza.commands[at].tokens[0] == "bgp") {
    ++at;
  }
  return at;
}

void AddRealNeighbor(RouterConfig& config, const RouterModel& model,
                     Ipv4 address, uint32_t remote_as) {
  Stanza* stanza = FindStanza(config, StanzaKind::kRouterBgp);
  if (!stanza || !model.bgp) return;
  bool ebgp = remote_as != model.bgp->asn;
  auto lines = NeighborLines(stanza, *model.bgp, address, remote_as, ebgp);
  int last = -1;
  for (int i = 0; i < static_cast<int>(stanza->commands.size()); ++i) {
    if (stanza->commands[i].tokens[0] == "neighbor") last = i;
  }
  size_t at = last >= 0 ? static_cast<size_t>(last + 1) : AfterBgpSettings(*stanza);
  stanza->commands.insert(stanza->commands.begin() + at, lines.begin(),
                          lines.end());
}

void AddRealBgpNetwork(RouterConfig& config, const Prefix& prefix) {
  Stanza* stanza = FindStanza(config, StanzaKind::kRouterBgp);
  if (!stanza) return;
  std::string text = BgpNetworkLine(prefix);
  for (const Command& c : stanza->commands) {
    if (c.raw == text) return;
  }
  int last_network = -1, last_neighbor = -1;
  for (int i = 0; i < static_cast<int>(stanza->commands.size()); ++i) {
    const auto& t0 = stanza->commands[i].tokens[0];
    if (t0 == "network") last_network = i;
    if (t0 == "neighbor") last_neighbor = i;
  }
  int after = last_network >= 0 ? last_network : last_neighbor;
  size_t at = after >= 0 ? static_cast<size_t>(after + 1)
                         : AfterBgpSettings(*stanza);
  stanza->commands.insert(stanza->commands.begin() + at, Line(text));
}

// ---------------------------------------------------------------------------
// Policy object renaming.
// ---------------------------------------------------------------------------

enum class FilterKind { kAcl, kPrefixList, kRouteMap };

std::string FilterKey(FilterKind kind, const std::string& name) {
  switch (kind) {
    case FilterKind::kAcl: return "acl:" + name;
    case FilterKind::kPrefixList: return "prefix-list:" + name;
    case FilterKind::kRouteMap: return "route-map:" + name;
  }
  return name;
}

// Numbered access lists stay in their number range.
std::string FreshFilterName(FilterKind kind, const std::string& name,
                            std::set<std::string>& taken) {
  auto number = ParseNumber(name);
  if (kind == FilterKind::kAcl && number) {
    static const std::pair<long long, long long> kRanges[] = {
        {1, 99}, {100, 199}, {1300, 1999}, {2000, 2699}};
    for (auto [lo, hi] : kRanges) {
      if (*number < lo || *number > hi) continue;
      for (long long i = 1; i <= hi - lo; ++i) {
        long long candidate = lo + (*number - lo + i) % (hi - lo + 1);
        std::string n = std::to_string(candidate);
        if (taken.insert(FilterKey(kind, n)).second) return n;
      }
    }
  }
  NameParts parts = SplitNumber(name);
  long long n = parts.number.value_or(1);
  while (true) {
    ++n;
    std::string candidate = Numbered(parts.stem, n, parts.width);
    if (taken.insert(FilterKey(kind, candidate)).second) return candidate;
  }
}

using FilterRenames = std::map<std::pair<FilterKind, std::string>, std::string>;

void RenameFilterRefs(Command& command, const FilterRenames& renames) {
  std::vector<std::string> t = command.tokens;
  bool changed = false;
  auto apply = [&](size_t i, FilterKind kind) {
    auto it = renames.find({kind, t[i]});
    if (it == renames.end()) return;
    t[i] = it->second;
    changed = true;
  };
  if (t.size() >= 4 && t[0] == "match" && t[1] == "ip" && t[2] == "address") {
    bool prefix = t[3] == "prefix-list";
    for (size_t i = prefix ? 4 : 3; i < t.size(); ++i) {
      apply(i, prefix ? FilterKind::kPrefixList : FilterKind::kAcl);
    }
  } else {
    for (size_t i = 1; i < t.size(); ++i) {
      const std::string& prev = t[i - 1];
      if (prev == "route-map") {
        apply(i, FilterKind::kRouteMap);
      } else if (prev == "prefix-list") {
        apply(i, FilterKind::kPrefixList);
      } else if (prev == "prefix" && i >= 2 && t[i - 2] == "distribute-list") {
        apply(i, FilterKind::kPrefixList);
      } else if (prev == "distribute-list" && t[i] != "prefix" &&
                 t[i] != "route-map") {
        apply(i, FilterKind::kAcl);
      } else if (prev == "access-group") {
        apply(i, FilterKind::kAcl);
      } else if (prev == "access-list" && i == 1) {
        apply(i, FilterKind::kAcl);
      } else if ((prev == "standard" || prev == "extended") && i >= 2 &&
                 t[i - 2] == "access-list") {
        apply(i, FilterKind::kAcl);
      }
    }
  }
  if (changed) command = MakeCommand(JoinTokens(t));
}

void RenameFiltersInConfig(RouterConfig& config, const FilterRenames& renames) {
  if (renames.empty()) return;
  for (Stanza& s : config.stanzas) {
    if (s.block) RenameFilterRefs(s.header, renames);
    for (Command& c : s.commands) RenameFilterRefs(c, renames);
    FilterKind kind;
    if (s.kind == StanzaKind::kAccessList) {
      kind = FilterKind::kAcl;
    } else if (s.kind == StanzaKind::kPrefixList) {
      kind = FilterKind::kPrefixList;
    } else if (s.kind == StanzaKind::kRouteMap) {
      kind = FilterKind::kRouteMap;
    } else {
      continue;
    }
    auto it = renames.find({kind, s.name});
    if (it != renames.end()) s.name = it->second;
  }
}

void ReplaceHostnameTokens(Stanza& stanza, const std::string& from,
                           const std::string& to) {
  auto fix = [&](Command& c) {
    if (std::find(c.tokens.begin(), c.tokens.end(), from) == c.tokens.end()) {
      return;
    }
    std::vector<std::string> t = c.tokens;
    for (auto& x : t) {
      if (x == from) x = to;
    }
    c = MakeCommand(JoinTokens(t));
  };
  if (stanza.block) fix(stanza.header);
  for (Command& c : stanza.commands) fix(c);
}

// ---------------------------------------------------------------------------
// Fake router stanzas.
// ---------------------------------------------------------------------------

std::vector<std::string> BangComments(bool bang) {
  return bang ? std::vector<std::string>{"!"} : std::vector<std::string>{};
}

Stanza FakeOspfStanza(const Stanza* tmpl, const RouterModel& tm,
                      const FakeAssignment& a, bool bang) {
  Stanza s;
  if (tmpl) {
    s = *tmpl;
    s.commands.clear();
  } else {
    s.kind = StanzaKind::kRouterOspf;
    s.block = true;
    s.name = "1";
    s.header = Line("router ospf 1");
    s.leading_comments = BangComments(bang);
  }
  const std::string area = OspfArea(tmpl);
  std::vector<Command> networks, passives;
  std::set<Prefix> seen;
  for (const auto& iface : a.interfaces) {
    if (iface.ospf && seen.insert(iface.subnet).second) {
      networks.push_back(Line(OspfNetworkLine(iface.subnet, area)));
    }
    if (iface.ospf && iface.passive) {
      passives.push_back(Line("passive-interface " + iface.name));
    }
  }
  std::optional<Command> rid;
  if (a.router_id) rid = Line("router-id " + a.router_id->ToString());
  bool rid_done = false, networks_done = false, passive_done = false;
  if (tmpl) {
    for (const Command& c : tmpl->commands) {
      const auto& t = c.tokens;
      if (t[0] == "router-id") {
        if (rid && !rid_done) s.commands.push_back(*rid);
        rid_done = true;
      } else if (t[0] == "network") {
        if (!networks_done) {
          s.commands.insert(s.commands.end(), networks.begin(), networks.end());
        }
        networks_done = true;
      } else if (t[0] == "passive-interface" && t.size() == 2 &&
                 tm.FindInterface(t[1])) {
        if (!passive_done) {
          s.commands.insert(s.commands.end(), passives.begin(), passives.end());
        }
        passive_done = true;
      } else {
        Command copy = c;
        copy.line = 0;
        s.commands.push_back(copy);
      }
    }
  }
  if (rid && !rid_done) s.commands.insert(s.commands.begin(), *rid);
  if (!networks_done) {
    s.commands.insert(s.commands.end(), networks.begin(), networks.end());
  }
  if (!passive_done) {
    s.commands.insert(s.commands.end(), passives.begin(), passives.end());
  }
  return s;
}

Stanza FakeBgpStanza(const Stanza* tmpl, const RouterModel& tm,
                     const FakeAssignment& a, bool bang) {
  Stanza s;
  if (tmpl) {
    s = *tmpl;
    s.commands.clear();
  } else {
    s.kind = StanzaKind::kRouterBgp;
    s.block = true;
    s.leading_comments = BangComments(bang);
  }
  s.name = std::to_string(a.asn);
  s.header = Line("router bgp " + s.name);

  BgpConfig style;
  if (tm.bgp) style = *tm.bgp;
  style.asn = tm.bgp ? tm.bgp->asn : a.asn;
  // Peer groups with a remote AS are claimed by the first fake neighbor of
  // the same kind and re-pointed at its AS; unclaimed internal groups follow
  // the fake's own AS.
  std::vector<std::string> order = tmpl ? NeighborOrder(*tmpl)
                                        : std::vector<std::string>{};
  std::map<std::string, uint32_t> group_as;
  for (const auto& key : order) {
    const BgpNeighbor& n = style.neighbors.at(key);
    if (n.is_group && n.remote_as) group_as[key] = *n.remote_as;
  }
  std::set<std::string> claimed;
  for (const auto& fn : a.bgp_neighbors) {
    bool ebgp = fn.remote_as != a.asn;
    bool served = false;
    for (const auto& g : claimed) {
      if (group_as[g] == fn.remote_as) served = true;
    }
    if (served) continue;
    for (const auto& key : order) {
      if (!group_as.count(key) || claimed.count(key)) continue;
      bool group_ebgp = group_as[key] != style.asn;
      if (group_ebgp != ebgp) continue;
      group_as[key] = fn.remote_as;
      claimed.insert(key);
      break;
    }
  }
  for (auto& [key, asn] : group_as) {
    if (!claimed.count(key) && asn == style.asn) asn = a.asn;
    style.neighbors[key].remote_as = asn;
  }

  std::vector<Command> neighbor_block;
  if (tmpl) {
    for (const Command& c : tmpl->commands) {
      const auto& t = c.tokens;
      if (t[0] != "neighbor" || t.size() < 3) continue;
      auto it = style.neighbors.find(t[1]);
      if (it == style.neighbors.end() || !it->second.is_group) continue;
      std::vector<std::string> tokens = t;
      if (tokens[2] == "remote-as" && tokens.size() == 4) {
        tokens[3] = std::to_string(group_as[t[1]]);
      }
      neighbor_block.push_back(MakeCommand(JoinTokens(tokens)));
    }
  }
  for (const auto& fn : a.bgp_neighbors) {
    auto lines = NeighborLines(tmpl, style, fn.address, fn.remote_as,
                               fn.remote_as != a.asn);
    neighbor_block.insert(neighbor_block.end(), lines.begin(), lines.end());
  }
  std::vector<Command> networks;
  for (const auto& p : a.bgp_networks) networks.push_back(Line(BgpNetworkLine(p)));
  std::optional<Command> rid;
  if (a.router_id) rid = Line("bgp router-id " + a.router_id->ToString());

  bool rid_done = false, neighbors_done = false, networks_done = false;
  if (tmpl) {
    for (const Command& c : tmpl->commands) {
      const auto& t = c.tokens;
      if (t[0] == "bgp" && t.size() >= 2 && t[1] == "router-id") {
        if (rid && !rid_done) s.commands.push_back(*rid);
        rid_done = true;
      } else if (t[0] == "neighbor") {
        if (!neighbors_done) {
          s.commands.insert(s.commands.end(), neighbor_block.begin(),
                            neighbor_block.end());
        }
        neighbors_done = true;
      } else if (t[0] == "network") {
        if (!networks_done) {
          s.commands.insert(s.commands.end(), networks.begin(), networks.end());
        }
        networks_done = true;
      } else {
        Command copy = c;
        copy.line = 0;
        s.commands.push_back(copy);
      }
    }
  }
  if (rid && !rid_done) s.commands.insert(s.commands.begin(), *rid);
  if (!neighbors_done) {
    size_t at = AfterBgpSettings(s);
    s.commands.insert(s.commands.begin() + at, neighbor_block.begin(),
                      neighbor_block.end());
  }
  if (!networks_done) {
    s.commands.insert(s.commands.end(), networks.begin(), networks.end());
  }
  return s;
}

void ValidateAssignment(const FakeAssignment& a) {
  if (a.hostname.empty()) {
    throw Error(ErrorCode::kIncompleteAssignment, "fake router has no hostname");
  }
  for (const auto& iface : a.interfaces) {
    if (iface.address == Ipv4() || iface.subnet.length() == 0 ||
        !iface.subnet.Contains(iface.address)) {
      throw Error(ErrorCode::kIncompleteAssignment,
                  a.hostname + ": interface without a valid address");
    }
  }
  if (a.bgp && a.asn == 0) {
    throw Error(ErrorCode::kIncompleteAssignment,
                a.hostname + ": BGP requires an AS number");
  }
  for (const auto& n : a.bgp_neighbors) {
    if (n.remote_as == 0) {
      throw Error(ErrorCode::kIncompleteAssignment,
                  a.hostname + ": neighbor " + n.address.ToString() +
                      " has no remote AS");
    }
  }
  if (!a.bgp && !a.bgp_neighbors.empty()) {
    throw Error(ErrorCode::kIncompleteAssignment,
                a.hostname + ": neighbors without BGP");
  }
}

void FillInterfaceNames(FakeAssignment& a, const RouterConfig& tmpl,
                        const RouterModel& tm) {
  std::vector<std::string> loop_names, other_names;
  for (const Stanza& s : tmpl.stanzas) {
    if (s.kind != StanzaKind::kInterface) continue;
    (StanzaRole(s, tm) == Role::kLoopback ? loop_names : other_names)
        .push_back(s.name);
  }
  std::vector<std::string> assigned;
  for (const auto& iface : a.interfaces) {
    if (!iface.name.empty()) assigned.push_back(iface.name);
  }
  size_t next_loop = 0, next_other = 0;
  for (auto& iface : a.interfaces) {
    if (!iface.name.empty()) continue;
    bool loop = iface.role == Role::kLoopback;
    auto& pool = loop ? loop_names : other_names;
    size_t& next = loop ? next_loop : next_other;
    while (next < pool.size() &&
           std::find(assigned.begin(), assigned.end(), pool[next]) !=
               assigned.end()) {
      ++next;
    }
    if (next < pool.size()) {
      iface.name = pool[next++];
    } else {
      std::vector<std::string> all = assigned;
      all.insert(all.end(), pool.begin(), pool.end());
      iface.name = NextInterfaceName(all, loop);
    }
    assigned.push_back(iface.name);
  }
}

// ---------------------------------------------------------------------------
// Plan walking.
// ---------------------------------------------------------------------------

template <typename OnConfigure, typename OnLink>
void WalkPlan(const std::vector<Edge>& edges, std::set<std::string> configured,
              const std::set<std::string>& new_routers,
              OnConfigure&& on_configure, OnLink&& on_link) {
  for (const auto& [a, b] : edges) {
    for (const auto& x : {a, b}) {
      if (!configured.count(x) && !new_routers.count(x)) {
        throw Error(ErrorCode::kInvalidArgument,
                    "plan edge endpoint '" + x + "' is unknown");
      }
    }
    if (a == b) {
      throw Error(ErrorCode::kInvalidArgument, "plan has a self-loop on " + a);
    }
  }
  std::vector<Edge> work = edges;
  while (!work.empty()) {
    const std::set<std::string> at_start = configured;
    std::vector<Edge> remaining;
    bool progress = false;
    for (const auto& edge : work) {
      const auto& [a, b] = edge;
      if (!at_start.count(a) && !at_start.count(b)) {
        remaining.push_back(edge);
        continue;
      }
      if (!configured.count(a)) {
        on_configure(a, b);
        configured.insert(a);
      }
      if (!configured.count(b)) {
        on_configure(b, a);
        configured.insert(b);
      }
      on_link(a, b);
      progress = true;
    }
    if (!progress) {
      std::string list;
      for (const auto& [a, b] : remaining) list += " (" + a + "," + b + ")";
      throw Error(ErrorCode::kUnreachablePlan,
                  "edges never reach a configured router:" + list);
    }
    work = std::move(remaining);
  }
  for (const auto& r : new_routers) {
    if (!configured.count(r)) {
      throw Error(ErrorCode::kUnreachablePlan,
                  "new router '" + r + "' has no edge to a configured router");
    }
  }
}

std::set<std::string> ProtocolSet(bool ospf, bool bgp) {
  std::set<std::string> p;
  if (ospf) p.insert("ospf");
  if (bgp) p.insert("bgp");
  return p;
}

double Jaccard(const std::set<std::string>& a, const std::set<std::string>& b) {
  if (a.empty() && b.empty()) return 1.0;
  size_t common = 0;
  for (const auto& x : a) common += b.count(x);
  return static_cast<double>(common) /
         static_cast<double>(a.size() + b.size() - common);
}

const InterfaceConfig* InterfaceCovering(const RouterModel& model, Ipv4 ip) {
  for (const auto& iface : model.interfaces) {
    if (iface.subnet && iface.subnet->Contains(ip)) return &iface;
  }
  return nullptr;
}

}  // namespace

// ---------------------------------------------------------------------------
// Public API.
// ---------------------------------------------------------------------------

std::string NextInterfaceName(const std::vector<std::string>& existing,
                              bool loopback) {
  std::vector<std::string> same;
  for (const auto& n : existing) {
    if (IsLoopbackName(n) == loopback) same.push_back(n);
  }
  auto taken = [&](const std::string& n) {
    return std::find(existing.begin(), existing.end(), n) != existing.end();
  };
  std::string pattern =
      same.empty() ? (loopback ? "Loopback0" : "GigabitEthernet0/0")
                   : same.back();
  if (same.empty() && !taken(pattern)) return pattern;
  NameParts parts = SplitNumber(pattern);
  long long max = parts.number.value_or(0);
  for (const auto& n : existing) {
    NameParts p = SplitNumber(n);
    if (p.stem == parts.stem && p.number) max = std::max(max, *p.number);
  }
  std::string candidate;
  do {
    candidate = Numbered(parts.stem, ++max, parts.width);
  } while (taken(candidate));
  return candidate;
}

std::map<std::string, std::string> FirstContacts(
    const std::vector<Edge>& new_edges, const std::set<std::string>& configured,
    const std::set<std::string>& new_routers) {
  std::map<std::string, std::string> contacts;
  WalkPlan(
      new_edges, configured, new_routers,
      [&](const std::string& fake, const std::string& from) {
        contacts[fake] = from;
      },
      [](const std::string&, const std::string&) {});
  return contacts;
}

double TemplateScore(const std::string& fake, const std::string& real,
                     const Topology& graph,
                     const std::set<std::string>& fake_protocols,
                     const RouterModel& real_model) {
  double df = graph.HasNode(fake) ? graph.Degree(fake) : 0;
  double dr = graph.HasNode(real) ? graph.Degree(real) : 0;
  double closeness =
      1.0 - std::abs(df - dr) / std::max({df, dr, 1.0});
  static const std::set<std::string> kEmpty;
  const auto& nf = graph.HasNode(fake) ? graph.Neighbors(fake) : kEmpty;
  const auto& nr = graph.HasNode(real) ? graph.Neighbors(real) : kEmpty;
  double overlap = (nf.empty() && nr.empty()) ? 0.0 : Jaccard(nf, nr);
  bool same_as = graph.HasNode(fake) && graph.HasNode(real) &&
                 graph.Asn(fake) == graph.Asn(real);
  double protocols = Jaccard(
      fake_protocols,
      ProtocolSet(real_model.ospf.has_value(), real_model.bgp.has_value()));
  return 0.3 * closeness + 0.2 * overlap + 0.3 * (same_as ? 1.0 : 0.0) +
         0.2 * protocols;
}

std::string SelectTemplate(const std::string& fake, const Topology& graph,
                           const std::map<std::string, RouterModel>& reals,
                           const std::set<std::string>& fake_protocols) {
  if (reals.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "no real router to imitate");
  }
  std::string best;
  double best_score = -1;
  for (const auto& [name, model] : reals) {
    double score = TemplateScore(fake, name, graph, fake_protocols, model);
    if (score > best_score + 1e-12) {
      best = name;
      best_score = score;
    }
  }
  return best;
}

std::string MimicName(const std::string& like,
                      const std::set<std::string>& taken) {
  NameParts parts = SplitNumber(like);
  long long max = parts.number.value_or(1);
  for (const auto& t : taken) {
    NameParts p = SplitNumber(t);
    if (p.stem == parts.stem && p.number) max = std::max(max, *p.number);
  }
  std::string candidate;
  do {
    candidate = Numbered(parts.stem, ++max, parts.width);
  } while (taken.count(candidate));
  return candidate;
}

RouterConfig GenerateFakeConfig(FakeAssignment& a, const RouterConfig& tmpl,
                                FakeConfigContext* context) {
  ValidateAssignment(a);
  const RouterModel tm = Interpret(tmpl);
  FillInterfaceNames(a, tmpl, tm);
  const bool bang = UsesBangSeparators(tmpl);
  const RoleModels models = CollectRoleModels(tmpl, tm);

  static const std::set<std::string> kNoNames;
  NameRewrite names{context ? &context->known_names : &kNoNames,
                    tmpl.hostname, a.hostname};

  // Interfaces grouped by the template's role order.
  std::vector<size_t> order(a.interfaces.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  auto rank = [&](Role r) {
    return std::find(models.first_seen.begin(), models.first_seen.end(), r) -
           models.first_seen.begin();
  };
  std::stable_sort(order.begin(), order.end(), [&](size_t x, size_t y) {
    return rank(a.interfaces[x].role) < rank(a.interfaces[y].role);
  });
  std::vector<const Stanza*> template_ifaces;
  for (const Stanza& s : tmpl.stanzas) {
    if (s.kind == StanzaKind::kInterface) template_ifaces.push_back(&s);
  }
  std::vector<Stanza> iface_stanzas;
  size_t role_index[3] = {0, 0, 0};
  for (size_t i : order) {
    const FakeInterface& f = a.interfaces[i];
    const Stanza* model = models.Pick(f.role, role_index[static_cast<int>(f.role)]++);
    Stanza s = MakeInterfaceStanza(
        model, {f.name, f.address, f.subnet, f.neighbor, f.ospf_cost}, names);
    if (!template_ifaces.empty()) {
      s.leading_comments =
          template_ifaces[std::min(iface_stanzas.size(), template_ifaces.size() - 1)]
              ->leading_comments;
    } else {
      s.leading_comments = BangComments(bang);
    }
    iface_stanzas.push_back(std::move(s));
  }

  RouterConfig out;
  out.hostname = a.hostname;
  out.trailing_comments = tmpl.trailing_comments;
  bool ifaces_done = false, ospf_done = !a.ospf, bgp_done = !a.bgp;
  for (const Stanza& s : tmpl.stanzas) {
    switch (s.kind) {
      case StanzaKind::kHostname: {
        Stanza h = s;
        h.commands = {Line("hostname " + a.hostname)};
        h.name = a.hostname;
        out.stanzas.push_back(std::move(h));
        break;
      }
      case StanzaKind::kInterface:
        if (!ifaces_done) {
          out.stanzas.insert(out.stanzas.end(), iface_stanzas.begin(),
                             iface_stanzas.end());
        }
        ifaces_done = true;
        break;
      case StanzaKind::kRouterOspf:
        if (!ospf_done) out.stanzas.push_back(FakeOspfStanza(&s, tm, a, bang));
        ospf_done = true;
        break;
      case StanzaKind::kRouterBgp:
        if (!bgp_done) out.stanzas.push_back(FakeBgpStanza(&s, tm, a, bang));
        bgp_done = true;
        break;
      case StanzaKind::kStaticRoute:
        break;
      default: {
        Stanza copy = s;
        ReplaceHostnameTokens(copy, tmpl.hostname, a.hostname);
        out.stanzas.push_back(std::move(copy));
        break;
      }
    }
  }
  if (!ifaces_done) {
    for (auto& s : iface_stanzas) {
      InsertStanza(out, std::move(s), StanzaKind::kInterface);
    }
  }
  if (!ospf_done) {
    InsertStanza(out, FakeOspfStanza(nullptr, tm, a, bang),
                 StanzaKind::kRouterOspf);
  }
  if (!bgp_done) {
    InsertStanza(out, FakeBgpStanza(nullptr, tm, a, bang),
                 StanzaKind::kRouterBgp);
  }

  // Policy objects under fresh names.
  std::set<std::string> local_taken;
  std::set<std::string>& taken = context ? context->filter_names : local_taken;
  for (const auto& [name, _] : tm.access_lists) {
    taken.insert(FilterKey(FilterKind::kAcl, name));
  }
  for (const auto& [name, _] : tm.prefix_lists) {
    taken.insert(FilterKey(FilterKind::kPrefixList, name));
  }
  for (const auto& [name, _] : tm.route_maps) {
    taken.insert(FilterKey(FilterKind::kRouteMap, name));
  }
  FilterRenames renames;
  for (const Stanza& s : out.stanzas) {
    FilterKind kind;
    if (s.kind == StanzaKind::kAccessList) {
      kind = FilterKind::kAcl;
    } else if (s.kind == StanzaKind::kPrefixList) {
      kind = FilterKind::kPrefixList;
    } else if (s.kind == StanzaKind::kRouteMap) {
      kind = FilterKind::kRouteMap;
    } else {
      continue;
    }
    if (!renames.count({kind, s.name})) {
      renames[{kind, s.name}] = FreshFilterName(kind, s.name, taken);
    }
  }
  RenameFiltersInConfig(out, renames);
  return out;
}

RouterConfig GenerateSkeletonConfig(const FakeAssignment& a) {
  ValidateAssignment(a);
  std::string text = "hostname " + a.hostname + "\n";
  std::vector<FakeInterface> ifaces = a.interfaces;
  int next = 0;
  for (auto& iface : ifaces) {
    if (iface.name.empty()) {
      iface.name = iface.role == Role::kLoopback
                       ? "Loopback" + std::to_string(next++)
                       : "Ethernet" + std::to_string(next++);
    }
    text += "interface " + iface.name + "\n ip address " +
            iface.address.ToString() + " " + iface.subnet.mask().ToString() +
            "\n";
    if (iface.ospf_cost) {
      text += " ip ospf cost " + std::to_string(*iface.ospf_cost) + "\n";
    }
  }
  if (a.ospf) {
    text += "router ospf 1\n";
    for (const auto& iface : ifaces) {
      if (iface.ospf) text += " " + OspfNetworkLine(iface.subnet, "0") + "\n";
    }
  }
  if (a.bgp) {
    text += "router bgp " + std::to_string(a.asn) + "\n";
    for (const auto& n : a.bgp_neighbors) {
      text += " neighbor " + n.address.ToString() + " remote-as " +
              std::to_string(n.remote_as) + "\n";
    }
    for (const auto& p : a.bgp_networks) text += " " + BgpNetworkLine(p) + "\n";
  }
  return ParseConfig(text);
}

ExpansionResult ExpandNetwork(const ExpansionPlan& plan,
                              const Snapshot& snapshot) {
  ExpansionResult result;
  result.snapshot = snapshot;
  if (plan.new_edges.empty() && plan.new_routers.empty() &&
      plan.new_hosts.empty()) {
    return result;
  }
  const auto models = InterpretAll(snapshot);
  const auto links = ComputeLinks(models);
  const auto real_asns = AssignAsns(models, links);
  Topology graph = ExtractTopology(snapshot).RouterSubgraph();

  for (const auto& r : plan.new_routers) {
    if (snapshot.configs.count(r) || snapshot.hosts.count(r)) {
      throw Error(ErrorCode::kInvalidArgument,
                  "new router id '" + r + "' collides with a real node");
    }
    graph.AddNode(r);
  }
  for (const auto& [a, b] : plan.new_edges) {
    if (graph.HasNode(a) && graph.HasNode(b) && !graph.AddEdge(a, b)) {
      throw Error(ErrorCode::kInvalidArgument,
                  "plan edge (" + a + "," + b + ") duplicates an edge");
    }
  }

  std::set<std::string> taken;
  FakeConfigContext context;
  std::vector<Prefix> used;
  for (const auto& [name, model] : models) {
    taken.insert(name);
    context.known_names.insert(name);
    for (const auto& iface : model.interfaces) {
      if (iface.subnet) used.push_back(*iface.subnet);
    }
    for (const auto& [n, _] : model.access_lists) {
      context.filter_names.insert(FilterKey(FilterKind::kAcl, n));
    }
    for (const auto& [n, _] : model.prefix_lists) {
      context.filter_names.insert(FilterKey(FilterKind::kPrefixList, n));
    }
    for (const auto& [n, _] : model.route_maps) {
      context.filter_names.insert(FilterKey(FilterKind::kRouteMap, n));
    }
  }
  for (const auto& [name, host] : snapshot.hosts) {
    taken.insert(name);
    context.known_names.insert(name);
    used.push_back(host.subnet());
  }
  SubnetPool link_pool(kLinkPool, 30, &used);
  SubnetPool lan_pool(kLanPool, 24, &used);
  SubnetPool loopback_pool(kLoopbackPool, 32, &used);

  std::map<std::string, FakeAssignment> fakes;
  std::map<std::string, std::string> template_of;
  std::map<std::string, std::pair<int, bool>> fake_cost;

  auto is_fake = [&](const std::string& id) { return fakes.count(id) > 0; };
  auto asn_of = [&](const std::string& id) -> uint32_t {
    if (is_fake(id)) return fakes.at(id).asn;
    auto it = real_asns.find(id);
    return it == real_asns.end() ? 0 : it->second;
  };
  auto ospf_of = [&](const std::string& id) {
    return is_fake(id) ? fakes.at(id).ospf : models.at(id).ospf.has_value();
  };
  auto bgp_of = [&](const std::string& id) {
    return is_fake(id) ? fakes.at(id).bgp : models.at(id).bgp.has_value();
  };
  auto name_of = [&](const std::string& id) {
    return is_fake(id) ? fakes.at(id).hostname : id;
  };

  // Adds an interface on a real router in its own style; returns its name.
  auto add_real_interface = [&](const std::string& router, Ipv4 ip,
                                const Prefix& subnet,
                                const std::string& neighbor, Role role,
                                bool ospf, bool passive) {
    RouterConfig& config = result.snapshot.configs.at(router);
    const RouterModel& model = models.at(router);
    const RoleModels roles = CollectRoleModels(snapshot.configs.at(router), model);
    std::string name = NextInterfaceName(InterfaceNames(config), false);
    std::optional<int> cost;
    if (ospf) cost = LinkCost(MedianCost(model));
    const Stanza* style = roles.Pick(role, 0);
    NameRewrite names{&context.known_names, router, router};
    Stanza s = MakeInterfaceStanza(style, {name, ip, subnet, neighbor, cost},
                                   names);
    if (style) {
      s.leading_comments = style->leading_comments;
    } else {
      s.leading_comments = BangComments(UsesBangSeparators(config));
    }
    InsertStanza(config, std::move(s), StanzaKind::kInterface);
    if (ospf) {
      EnsureOspfNetwork(config, ip, subnet);
      if (passive) {
        if (Stanza* o = FindStanza(config, StanzaKind::kRouterOspf)) {
          InsertCommandAfter(*o, Line("passive-interface " + name),
                             "passive-interface");
        }
      }
    }
    return name;
  };

  std::string just_configured;
  auto on_configure = [&](const std::string& fake, const std::string& contact) {
    FakeAssignment f;
    f.asn = asn_of(contact);
    f.ospf = ospf_of(contact);
    f.bgp = bgp_of(contact);
    graph.SetAsn(fake, f.asn);
    std::string tmpl;
    if (auto it = plan.template_of.find(fake); it != plan.template_of.end()) {
      tmpl = it->second;
      if (!models.count(tmpl)) {
        throw Error(ErrorCode::kInvalidArgument,
                    "template '" + tmpl + "' is not a real router");
      }
    } else {
      tmpl = SelectTemplate(fake, graph, models, ProtocolSet(f.ospf, f.bgp));
    }
    f.hostname = MimicName(tmpl, taken);
    taken.insert(f.hostname);
    context.known_names.insert(f.hostname);

    const RouterModel& tm = models.at(tmpl);
    const InterfaceConfig* loop = nullptr;
    for (const auto& iface : tm.interfaces) {
      if (IsLoopbackName(iface.name) && iface.address && !iface.shutdown) {
        loop = &iface;
        break;
      }
    }
    if (loop) {
      Prefix p = loopback_pool.Next();
      FakeInterface li;
      li.role = Role::kLoopback;
      li.address = p.network();
      li.subnet = p;
      li.ospf = f.ospf && OspfEnabled(tm, *loop);
      f.interfaces.push_back(li);
      if (f.bgp && tm.bgp &&
          std::find(tm.bgp->networks.begin(), tm.bgp->networks.end(),
                    *loop->subnet) != tm.bgp->networks.end()) {
        f.bgp_networks.push_back(p);
      }
    }
    bool explicit_rid = (tm.ospf && tm.ospf->router_id) ||
                        (tm.bgp && tm.bgp->router_id);
    if (explicit_rid) {
      f.router_id = loop ? f.interfaces.front().address
                         : loopback_pool.Next().network();
    }
    fake_cost[fake] = MedianCost(tm);
    template_of[fake] = tmpl;
    fakes[fake] = std::move(f);
    just_configured = fake;
  };

  struct Draft {
    std::string a, b;
    Ipv4 ip_a, ip_b;
    std::string iface_a, iface_b;
    Prefix subnet;
    bool ospf, ebgp;
  };
  std::vector<Draft> drafts;

  auto attach = [&](const std::string& id, Ipv4 ip, const Prefix& subnet,
                    const std::string& peer, bool ospf) -> std::string {
    if (is_fake(id)) {
      FakeInterface fi;
      fi.role = Role::kLink;
      fi.address = ip;
      fi.subnet = subnet;
      fi.neighbor = peer;
      fi.ospf = ospf;
      if (ospf) fi.ospf_cost = LinkCost(fake_cost.at(id));
      fakes.at(id).interfaces.push_back(fi);
      return "";
    }
    return add_real_interface(id, ip, subnet, peer, Role::kLink, ospf, false);
  };
  auto add_session = [&](const std::string& id, Ipv4 peer_ip,
                         uint32_t remote_as) {
    if (is_fake(id)) {
      fakes.at(id).bgp_neighbors.push_back({peer_ip, remote_as});
    } else {
      AddRealNeighbor(result.snapshot.configs.at(id), models.at(id), peer_ip,
                      remote_as);
    }
  };

  auto on_link = [&](const std::string& a, const std::string& b) {
    bool first_contact = just_configured == a || just_configured == b;
    just_configured.clear();
    Prefix subnet = link_pool.Next();
    Ipv4 ip_a = Offset(subnet, 1), ip_b = Offset(subnet, 2);
    bool same_as = asn_of(a) == asn_of(b);
    bool ospf = same_as && ospf_of(a) && ospf_of(b);
    bool both_bgp = bgp_of(a) && bgp_of(b);
    bool ebgp = !same_as && both_bgp;
    bool ibgp = same_as && both_bgp && (first_contact || !ospf);
    Draft d{a, b, ip_a, ip_b, "", "", subnet, ospf, ebgp};
    d.iface_a = attach(a, ip_a, subnet, name_of(b), ospf);
    d.iface_b = attach(b, ip_b, subnet, name_of(a), ospf);
    if (ebgp || ibgp) {
      add_session(a, ip_b, asn_of(b));
      add_session(b, ip_a, asn_of(a));
    }
    drafts.push_back(std::move(d));
  };

  std::set<std::string> configured;
  for (const auto& [name, _] : models) configured.insert(name);
  WalkPlan(plan.new_edges, configured, plan.new_routers, on_configure, on_link);

  // Fake hosts.
  for (const auto& id : plan.new_hosts) {
    auto real_it = plan.host_map.find(id);
    auto gw_it = plan.host_gateway.find(id);
    if (real_it == plan.host_map.end() || !snapshot.hosts.count(real_it->second)) {
      throw Error(ErrorCode::kInvalidArgument,
                  "fake host '" + id + "' has no real host");
    }
    if (gw_it == plan.host_gateway.end() ||
        (!is_fake(gw_it->second) && !models.count(gw_it->second))) {
      throw Error(ErrorCode::kInvalidArgument,
                  "fake host '" + id + "' has no gateway router");
    }
    const HostSpec& real = snapshot.hosts.at(real_it->second);
    const std::string& gw = gw_it->second;
    const RouterModel& real_gw = models.at(real.gateway_router);
    const InterfaceConfig* lan_iface = InterfaceCovering(real_gw, real.iface_ip);
    bool lan_ospf = lan_iface && OspfEnabled(real_gw, *lan_iface);
    bool lan_passive = lan_ospf && real_gw.ospf &&
                       real_gw.ospf->passive_interfaces.count(lan_iface->name);

    Prefix lan = lan_pool.Next();
    const Prefix real_subnet = real.subnet();
    auto offset_of = [&](Ipv4 ip) -> uint32_t {
      return (ip.value() - real_subnet.network().value()) & 0xffu;
    };
    uint32_t host_off = offset_of(real.iface_ip);
    if (host_off < 1 || host_off > 254) host_off = 100;
    uint32_t gw_off = offset_of(real.gateway_ip);
    if (gw_off < 1 || gw_off > 254 || gw_off == host_off) {
      gw_off = host_off == 1 ? 254 : 1;
    }
    HostSpec spec;
    spec.hostname = MimicName(real.hostname, taken);
    taken.insert(spec.hostname);
    context.known_names.insert(spec.hostname);
    spec.iface_ip = Offset(lan, host_off);
    spec.mask = lan.mask();
    spec.gateway_router = name_of(gw);
    spec.gateway_ip = Offset(lan, gw_off);

    if (is_fake(gw)) {
      FakeInterface fi;
      fi.role = Role::kLan;
      fi.address = spec.gateway_ip;
      fi.subnet = lan;
      fi.neighbor = spec.hostname;
      fi.ospf = fakes.at(gw).ospf && lan_ospf;
      fi.passive = fi.ospf && lan_passive;
      fakes.at(gw).interfaces.push_back(fi);
    } else {
      bool ospf = models.at(gw).ospf.has_value() && lan_ospf;
      add_real_interface(gw, spec.gateway_ip, lan, spec.hostname, Role::kLan,
                         ospf, ospf && lan_passive);
    }
    // Wherever the real subnet is announced into BGP, announce the fake one
    // too (from the fake gateway when the real gateway announces its own).
    for (const auto& [router, model] : models) {
      if (!model.bgp ||
          std::find(model.bgp->networks.begin(), model.bgp->networks.end(),
                    real_subnet) == model.bgp->networks.end()) {
        continue;
      }
      std::string target = router == real.gateway_router ? gw : router;
      if (!bgp_of(target)) continue;
      if (is_fake(target)) {
        auto& nets = fakes.at(target).bgp_networks;
        if (std::find(nets.begin(), nets.end(), lan) == nets.end()) {
          nets.push_back(lan);
        }
      } else {
        AddRealBgpNetwork(result.snapshot.configs.at(target), lan);
      }
    }
    result.hostname_of[id] = spec.hostname;
    result.snapshot.hosts[spec.hostname] = spec;
  }

  // Fake router configurations, now that every interface is known.
  for (auto& [id, f] : fakes) {
    const std::string& tmpl = template_of.at(id);
    RouterConfig config =
        GenerateFakeConfig(f, snapshot.configs.at(tmpl), &context);
    result.snapshot.configs[f.hostname] = std::move(config);
    result.hostname_of[id] = f.hostname;
    result.template_of[f.hostname] = tmpl;
    result.assignments[f.hostname] = f;
  }
  auto fake_iface = [&](const std::string& id, Ipv4 ip) {
    for (const auto& iface : fakes.at(id).interfaces) {
      if (iface.address == ip) return iface.name;
    }
    return std::string();
  };
  for (const Draft& d : drafts) {
    NewLink link;
    link.router_a = name_of(d.a);
    link.iface_a = is_fake(d.a) ? fake_iface(d.a, d.ip_a) : d.iface_a;
    link.ip_a = d.ip_a;
    link.router_b = name_of(d.b);
    link.iface_b = is_fake(d.b) ? fake_iface(d.b, d.ip_b) : d.iface_b;
    link.ip_b = d.ip_b;
    link.subnet = d.subnet;
    link.ospf = d.ospf;
    link.ebgp = d.ebgp;
    result.links.push_back(std::move(link));
  }
  return result;
}

void PlanFakeHosts(const Snapshot& snapshot, int k_hosts,
                   const std::map<std::string, uint32_t>& asns,
                   const std::set<std::string>& new_routers,
                   ExpansionPlan& plan) {
  if (k_hosts <= 1) return;
  auto asn = [&](const std::string& id) -> uint32_t {
    auto it = asns.find(id);
    return it == asns.end() ? 0 : it->second;
  };
  std::map<uint32_t, std::vector<std::string>> candidates;
  std::map<std::string, int> deficit;
  for (const auto& [name, host] : snapshot.hosts) {
    deficit.emplace(host.gateway_router, k_hosts);
    --deficit[host.gateway_router];
  }
  for (const auto& [router, _] : deficit) candidates[asn(router)].push_back(router);
  for (const auto& r : new_routers) candidates[asn(r)].push_back(r);
  std::map<uint32_t, size_t> counter;
  int next_id = 1;
  auto fresh_id = [&] {
    while (true) {
      std::string id = "fakehost" + std::to_string(next_id++);
      if (!plan.new_hosts.count(id) && !snapshot.hosts.count(id) &&
          !snapshot.configs.count(id) && !new_routers.count(id)) {
        return id;
      }
    }
  };
  for (const auto& [name, host] : snapshot.hosts) {
    uint32_t as = asn(host.gateway_router);
    const auto& list = candidates[as];
    for (int j = 1; j < k_hosts; ++j) {
      std::string gw;
      if (deficit[host.gateway_router] > 0) {
        gw = host.gateway_router;
      } else {
        for (const auto& r : list) {
          auto it = deficit.find(r);
          if (it != deficit.end() && it->second > 0) {
            gw = r;
            break;
          }
        }
      }
      if (gw.empty()) gw = list[counter[as]++ % list.size()];
      if (auto it = deficit.find(gw); it != deficit.end()) --it->second;
      std::string id = fresh_id();
      plan.new_hosts.insert(id);
      plan.host_map[id] = name;
      plan.host_gateway[id] = gw;
    }
  }
}

namespace {

// The address fields of an access-list entry: token indices of each match
// (the index of "host"/"any"/the address) and whether it is a wildcard.
struct AclField {
  size_t index;
  AclAddress address;
  size_t width;  // Tokens used.
};

std::optional<std::vector<AclField>> AclFields(
    const std::vector<std::string>& t, size_t action, bool extended) {
  std::vector<AclField> fields;
  size_t i = action + 1;
  if (extended) ++i;  // Protocol.
  int count = extended ? 2 : 1;
  for (int f = 0; f < count; ++f) {
    if (i >= t.size()) return std::nullopt;
    AclField field{i, {}, 1};
    if (t[i] == "any") {
      field.address.kind = AclAddress::Kind::kAny;
    } else if (t[i] == "host") {
      if (i + 1 >= t.size()) return std::nullopt;
      auto ip = Ipv4::Parse(t[i + 1]);
      if (!ip) return std::nullopt;
      field.address = {AclAddress::Kind::kHost, *ip, Ipv4()};
      field.width = 2;
    } else {
      auto ip = Ipv4::Parse(t[i]);
      if (!ip) return std::nullopt;
      std::optional<Ipv4> wildcard;
      if (i + 1 < t.size()) wildcard = Ipv4::Parse(t[i + 1]);
      if (wildcard) {
        field.address = {AclAddress::Kind::kWildcard, *ip, *wildcard};
        field.width = 2;
      } else {
        field.address = {AclAddress::Kind::kHost, *ip, Ipv4()};
      }
    }
    fields.push_back(field);
    i += field.width;
  }
  return fields;
}

// The analogous ACL entry for `fake`, or nullopt if the entry does not single
// out `real` (matches everything, does not match it, or already matches the
// fake host).
std::optional<std::vector<std::string>> AclAnalog(
    const std::vector<std::string>& t, size_t action, bool extended,
    const HostSpec& real, const HostSpec& fake) {
  auto fields = AclFields(t, action, extended);
  if (!fields) return std::nullopt;
  std::vector<std::string> out = t;
  bool changed = false;
  for (const AclField& f : *fields) {
    const AclAddress& a = f.address;
    if (a.kind == AclAddress::Kind::kAny) continue;
    if (!a.Matches(real.iface_ip) || a.Matches(fake.iface_ip)) continue;
    size_t addr_index = f.width == 2 && t[f.index] == "host" ? f.index + 1
                                                              : f.index;
    if (a.kind == AclAddress::Kind::kHost) {
      out[addr_index] = fake.iface_ip.ToString();
    } else {
      uint32_t w = a.wildcard.value();
      out[addr_index] =
          Ipv4((fake.iface_ip.value() & ~w) | (a.address.value() & w))
              .ToString();
    }
    changed = true;
  }
  if (!changed) return std::nullopt;
  return out;
}

struct PrefixLine {
  std::string name;
  std::optional<int> seq;
  size_t action;
  bool permit;
  Prefix prefix;
  std::optional<int> ge, le;
};

std::optional<PrefixLine> ParsePrefixLine(const std::vector<std::string>& t) {
  if (t.size() < 5 || t[0] != "ip" || t[1] != "prefix-list") return std::nullopt;
  PrefixLine p;
  p.name = t[2];
  size_t i = 3;
  if (t[i] == "seq") {
    if (i + 2 >= t.size()) return std::nullopt;
    auto seq = ParseNumber(t[i + 1]);
    if (!seq) return std::nullopt;
    p.seq = static_cast<int>(*seq);
    i += 2;
  }
  if (i >= t.size() || (t[i] != "permit" && t[i] != "deny")) return std::nullopt;
  p.action = i;
  p.permit = t[i] == "permit";
  if (++i >= t.size()) return std::nullopt;
  auto prefix = Prefix::Parse(t[i]);
  if (!prefix) return std::nullopt;
  p.prefix = *prefix;
  for (++i; i + 1 < t.size(); i += 2) {
    auto v = ParseNumber(t[i + 1]);
    if (!v) return std::nullopt;
    if (t[i] == "ge") p.ge = static_cast<int>(*v);
    if (t[i] == "le") p.le = static_cast<int>(*v);
  }
  return p;
}

bool SamePrefixRule(const PrefixLine& a, const PrefixLine& b) {
  return a.name == b.name && a.permit == b.permit && a.prefix == b.prefix &&
         a.ge == b.ge && a.le == b.le;
}

PrefixListEntry AsEntry(const PrefixLine& p) {
  PrefixListEntry e;
  e.permit = p.permit;
  e.prefix = p.prefix;
  e.ge = p.ge;
  e.le = p.le;
  return e;
}

bool IsExtendedNumber(long long n) {
  return (n >= 100 && n <= 199) || (n >= 2000 && n <= 2699);
}

// Picks a sequence number strictly between `after` and the next used one,
// else one past the largest.
int FreeSeq(std::set<int>& used, int after, int step) {
  auto next = used.upper_bound(after);
  int limit = next == used.end() ? after + step + 1 : *next;
  for (int s = after + 1; s < limit; ++s) {
    if (!used.count(s)) {
      used.insert(s);
      return s;
    }
  }
  int s = (used.empty() ? 0 : *used.rbegin()) + step;
  used.insert(s);
  return s;
}

}  // namespace

Snapshot MimicFilters(const Snapshot& snapshot,
                      const std::map<std::string, std::string>& host_map) {
  // Real host -> its fake hosts, both resolved to specs.
  std::map<std::string, std::vector<const HostSpec*>> fakes_of;
  for (const auto& [fake, real] : host_map) {
    auto f = snapshot.hosts.find(fake);
    if (f == snapshot.hosts.end() || !snapshot.hosts.count(real)) {
      throw Error(ErrorCode::kInvalidArgument,
                  "host map entry " + fake + " -> " + real + " is unknown");
    }
    fakes_of[real].push_back(&f->second);
  }
  Snapshot out = snapshot;
  for (auto& [router, config] : out.configs) {
    // Sequence numbers in use per prefix list across the configuration.
    std::map<std::string, std::set<int>> seqs;
    for (const Stanza& s : config.stanzas) {
      if (s.kind != StanzaKind::kPrefixList) continue;
      for (const Command& c : s.commands) {
        if (auto p = ParsePrefixLine(c.tokens); p && p->seq) {
          seqs[p->name].insert(*p->seq);
        }
      }
    }
    for (Stanza& s : config.stanzas) {
      if (s.kind != StanzaKind::kAccessList && s.kind != StanzaKind::kPrefixList) {
        continue;
      }
      std::set<std::string> present;
      for (const Command& c : s.commands) present.insert(JoinTokens(c.tokens));
      std::vector<Command> rebuilt;
      for (const Command& c : s.commands) {
        rebuilt.push_back(c);
        const auto& t = c.tokens;
        if (s.kind == StanzaKind::kAccessList) {
          size_t action;
          bool extended;
          if (s.block) {
            action = ParseNumber(t[0]) ? 1 : 0;
            extended = s.header.tokens.size() > 2 &&
                       s.header.tokens[2] == "extended";
          } else {
            action = 2;
            auto number = t.size() > 1 ? ParseNumber(t[1]) : std::nullopt;
            extended = number && IsExtendedNumber(*number);
          }
          if (action >= t.size() || (t[action] != "permit" && t[action] != "deny")) {
            continue;
          }
          for (const auto& [real_name, fakes] : fakes_of) {
            const HostSpec& real = snapshot.hosts.at(real_name);
            for (const HostSpec* fake : fakes) {
              auto analog = AclAnalog(t, action, extended, real, *fake);
              if (!analog) continue;
              if (s.block && action == 1) {
                // Named entries with sequence numbers: drop the number and let
                // the position order the entry.
                analog->erase(analog->begin());
              }
              std::string text = JoinTokens(*analog);
              if (!present.insert(text).second) continue;
              // An analog without its sequence number may still duplicate an
              // existing numbered entry.
              bool duplicate = false;
              for (const Command& other : s.commands) {
                std::vector<std::string> o = other.tokens;
                if (s.block && !o.empty() && ParseNumber(o[0])) o.erase(o.begin());
                if (JoinTokens(o) == text) duplicate = true;
              }
              if (duplicate) continue;
              rebuilt.push_back(MakeCommand(text));
            }
          }
        } else {
          auto line = ParsePrefixLine(t);
          if (!line) continue;
          PrefixListEntry entry = AsEntry(*line);
          for (const auto& [real_name, fakes] : fakes_of) {
            const HostSpec& real = snapshot.hosts.at(real_name);
            if (!entry.Matches(real.subnet())) continue;
            for (const HostSpec* fake : fakes) {
              if (entry.Matches(fake->subnet())) continue;
              PrefixLine analog = *line;
              analog.prefix = Prefix(fake->iface_ip, line->prefix.length());
              bool exists = false;
              for (const Stanza& other : config.stanzas) {
                if (other.kind != StanzaKind::kPrefixList) continue;
                for (const Command& oc : other.commands) {
                  auto ol = ParsePrefixLine(oc.tokens);
                  if (ol && SamePrefixRule(*ol, analog)) exists = true;
                }
              }
              for (const Command& rc : rebuilt) {
                auto rl = ParsePrefixLine(rc.tokens);
                if (rl && SamePrefixRule(*rl, analog)) exists = true;
              }
              if (exists) continue;
              std::vector<std::string> tokens = {"ip", "prefix-list", line->name};
              if (line->seq) {
                int seq = FreeSeq(seqs[line->name], *line->seq, 5);
                tokens.push_back("seq");
                tokens.push_back(std::to_string(seq));
              }
              tokens.push_back(line->permit ? "permit" : "deny");
              tokens.push_back(analog.prefix.ToString());
              if (line->ge) {
                tokens.push_back("ge");
                tokens.push_back(std::to_string(*line->ge));
              }
              if (line->le) {
                tokens.push_back("le");
                tokens.push_back(std::to_string(*line->le));
              }
              rebuilt.push_back(MakeCommand(JoinTokens(tokens)));
            }
          }
        }
      }
      s.commands = std::move(rebuilt);
    }
  }
  return out;
}

}  // namespace netcloak
