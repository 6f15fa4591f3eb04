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
// File: simulator.cc
// -----------------------------------------------------------------------------

#include "netcloak/simulator.h"

#include <algorithm>
#include <cctype>
#include <functional>
#include <queue>
#include <tuple>

#include "json.hpp"
#include "netcloak/error.h"

namespace netcloak {

namespace {

using json = nlohmann::json;

// Fixed metric of OSPF external (type-2) routes.
constexpr int64_t kExternalMetric = 20;
constexpr int kMaxBgpRounds = 100;
constexpr const char* kNullInterface = "Null0";

using Rib = std::map<Prefix, Route>;

const Route* LongestMatch(const Rib& rib, Ipv4 address) {
  for (int length = 32; length >= 0; --length) {
    auto it = rib.find(Prefix(address, length));
    if (it != rib.end()) return &it->second;
  }
  return nullptr;
}

// Installs `route` if it beats the current entry for its prefix: lower
// administrative distance, then protocol order (intra-area OSPF before
// external), then metric. Equal non-BGP candidates merge their next hops.
void Offer(Rib& rib, Route route) {
  auto [it, inserted] = rib.try_emplace(route.prefix, route);
  if (inserted) return;
  Route& current = it->second;
  auto key = [](const Route& r) {
    return std::tuple(r.admin_distance, static_cast<int>(r.protocol),
                      r.metric);
  };
  if (key(route) < key(current)) {
    current = std::move(route);
  } else if (key(route) == key(current) &&
             route.protocol != Protocol::kEbgp &&
             route.protocol != Protocol::kIbgp) {
    current.next_hops.insert(route.next_hops.begin(), route.next_hops.end());
  }
}

Route MakeRoute(const Prefix& prefix, std::set<NextHop> next_hops,
                Protocol protocol, int64_t metric) {
  Route r;
  r.prefix = prefix;
  r.next_hops = std::move(next_hops);
  r.protocol = protocol;
  r.admin_distance = AdminDistance(protocol);
  r.metric = metric;
  return r;
}

// Addresses of enabled interfaces -> owning router.
using AddressOwners = std::map<Ipv4, std::string>;

AddressOwners IndexAddresses(const std::map<std::string, RouterModel>& models) {
  AddressOwners owners;
  for (const auto& [name, model] : models) {
    for (const auto& iface : model.interfaces) {
      if (!iface.shutdown && iface.address) owners.emplace(*iface.address, name);
    }
  }
  return owners;
}

// Next hops of `router` toward `address` through `rib`. A connected match
// hands the packet to the router owning the address; other routes contribute
// their own next hops. BGP routes are never used for resolution.
std::set<NextHop> Resolve(const std::string& router, Ipv4 address,
                          const Rib& rib, const AddressOwners& owners) {
  const Route* route = LongestMatch(rib, address);
  if (!route) return {};
  if (route->protocol == Protocol::kConnected) {
    auto owner = owners.find(address);
    if (owner == owners.end() || owner->second == router) return {};
    return {{owner->second, route->next_hops.begin()->interface}};
  }
  if (route->protocol == Protocol::kEbgp || route->protocol == Protocol::kIbgp) {
    return {};
  }
  std::set<NextHop> hops;
  for (const auto& nh : route->next_hops) {
    if (nh.router != router) hops.insert(nh);
  }
  return hops;
}

Rib ConnectedAndStatic(const std::string& name, const RouterModel& model,
                       const std::vector<L3Link>& links,
                       const AddressOwners& owners) {
  Rib rib;
  for (const auto& iface : model.interfaces) {
    if (iface.shutdown || !iface.subnet) continue;
    Offer(rib, MakeRoute(*iface.subnet, {{name, iface.name}},
                         Protocol::kConnected, 0));
  }
  for (const auto& st : model.static_routes) {
    std::set<NextHop> hops;
    if (st.next_hop) {
      // Static next hops must be on a connected subnet.
      const Route* connected = LongestMatch(rib, *st.next_hop);
      auto owner = owners.find(*st.next_hop);
      if (connected && connected->protocol == Protocol::kConnected &&
          owner != owners.end() && owner->second != name) {
        hops.insert({owner->second, connected->next_hops.begin()->interface});
      }
    } else if (st.interface) {
      std::string lowered = *st.interface;
      std::transform(lowered.begin(), lowered.end(), lowered.begin(),
                     [](unsigned char c) { return std::tolower(c); });
      if (lowered == "null0") {
        hops.insert({name, kNullInterface});
      } else {
        for (const auto& link : links) {
          if (link.router_a == name && link.iface_a == *st.interface) {
            hops.insert({link.router_b, link.iface_a});
          } else if (link.router_b == name && link.iface_b == *st.interface) {
            hops.insert({link.router_a, link.iface_b});
          }
        }
      }
    }
    if (hops.empty()) continue;
    Route r = MakeRoute(st.prefix, std::move(hops), Protocol::kStatic, 0);
    r.admin_distance = st.distance;
    Offer(rib, std::move(r));
  }
  return rib;
}

// ---------------------------------------------------------------------------
// OSPF.
// ---------------------------------------------------------------------------

struct OspfState {
  CostGraph graph;
  // (router, neighbor) -> local interface of the cheapest adjacency.
  std::map<std::pair<std::string, std::string>, std::string> iface_to;
  // Router -> (prefix, cost of the advertising interface).
  std::map<std::string, std::vector<std::pair<Prefix, int>>> stubs;
  std::map<std::string, ScostTable> tables;
  // Router -> first hops toward every reachable router.
  std::map<std::string, std::map<std::string, std::set<NextHop>>> first_hops;
};

OspfState BuildOspf(const std::map<std::string, RouterModel>& models,
                    const std::vector<L3Link>& links) {
  OspfState state;
  std::vector<OspfAdjacency> adjacencies = OspfAdjacencies(models, links);
  state.graph = BuildCostGraph(models, adjacencies);
  for (const auto& adj : adjacencies) {
    const L3Link& l = adj.link;
    auto keep = [&](const std::string& from, const std::string& to,
                    const std::string& iface, int cost) {
      // The first interface at the (minimum) graph cost wins.
      if (*state.graph.Cost(from, to) == cost) {
        state.iface_to.emplace(std::pair(from, to), iface);
      }
    };
    keep(l.router_a, l.router_b, l.iface_a, adj.cost_ab);
    keep(l.router_b, l.router_a, l.iface_b, adj.cost_ba);
  }
  for (const auto& [name, model] : models) {
    if (!model.ospf) continue;
    for (const auto& iface : model.interfaces) {
      if (iface.subnet && OspfEnabled(model, iface)) {
        state.stubs[name].emplace_back(*iface.subnet, iface.ospf_cost);
      }
    }
  }
  for (const std::string& source : state.graph.nodes) {
    ScostTable table = ShortestPaths(state.graph, source);
    std::vector<std::pair<int64_t, std::string>> order;
    for (const auto& [v, cost] : table.scost) order.emplace_back(cost, v);
    std::sort(order.begin(), order.end());
    auto& hops = state.first_hops[source];
    for (const auto& [cost, v] : order) {
      if (v == source) continue;
      for (const std::string& p : table.preds.at(v)) {
        if (p == source) {
          hops[v].insert({v, state.iface_to.at({source, v})});
        } else {
          hops[v].insert(hops[p].begin(), hops[p].end());
        }
      }
    }
    state.tables.emplace(source, std::move(table));
  }
  return state;
}

// OSPF routes of `router`: intra-domain stubs of every reachable router and
// externals injected by reachable ASBRs (`externals`: ASBR -> prefixes),
// filtered by the router's inbound distribute-lists.
Rib OspfRoutes(const std::string& router, const RouterModel& model,
               const OspfState& ospf,
               const std::map<std::string, std::set<Prefix>>& externals) {
  Rib rib;
  auto table_it = ospf.tables.find(router);
  if (!model.ospf || table_it == ospf.tables.end()) return rib;
  const ScostTable& table = table_it->second;
  const auto& hops = ospf.first_hops.at(router);
  auto permitted = [&](const Prefix& p) {
    return model.PermitsAll(model.ospf->distribute_in, p);
  };
  for (const auto& [v, cost] : table.scost) {
    if (v == router) continue;
    auto stubs = ospf.stubs.find(v);
    if (stubs == ospf.stubs.end()) continue;
    for (const auto& [prefix, stub_cost] : stubs->second) {
      if (!permitted(prefix)) continue;
      Offer(rib, MakeRoute(prefix, hops.at(v), Protocol::kOspf,
                           cost + stub_cost));
    }
  }
  // Type-2 externals all share one metric; the closest ASBR wins.
  std::map<Prefix, std::pair<int64_t, std::set<NextHop>>> best_external;
  for (const auto& [asbr, prefixes] : externals) {
    if (asbr == router) continue;
    auto cost = table.scost.find(asbr);
    if (cost == table.scost.end()) continue;
    for (const Prefix& prefix : prefixes) {
      if (!permitted(prefix)) continue;
      auto [it, inserted] =
          best_external.try_emplace(prefix, cost->second, hops.at(asbr));
      if (inserted) continue;
      if (cost->second < it->second.first) {
        it->second = {cost->second, hops.at(asbr)};
      } else if (cost->second == it->second.first) {
        it->second.second.insert(hops.at(asbr).begin(), hops.at(asbr).end());
      }
    }
  }
  for (auto& [prefix, entry] : best_external) {
    Offer(rib, MakeRoute(prefix, std::move(entry.second),
                         Protocol::kOspfExternal, kExternalMetric));
  }
  return rib;
}

// ---------------------------------------------------------------------------
// BGP.
// ---------------------------------------------------------------------------

struct BgpPath {
  std::vector<uint32_t> as_path;
  Ipv4 next_hop;
  // Advertising peer; empty for locally originated paths.
  std::string from;
  Ipv4 from_router_id;
  bool ebgp = false;

  bool local() const { return from.empty(); }
  friend bool operator==(const BgpPath&, const BgpPath&) = default;
};

using BgpTable = std::map<Prefix, BgpPath>;

Ipv4 RouterId(const RouterModel& model) {
  if (model.bgp && model.bgp->router_id) return *model.bgp->router_id;
  if (model.ospf && model.ospf->router_id) return *model.ospf->router_id;
  std::optional<Ipv4> loopback, any;
  for (const auto& iface : model.interfaces) {
    if (iface.shutdown || !iface.address) continue;
    if (!any || *iface.address > *any) any = iface.address;
    if (iface.name.rfind("Loopback", 0) == 0 &&
        (!loopback || *iface.address > *loopback)) {
      loopback = iface.address;
    }
  }
  return loopback ? *loopback : any.value_or(Ipv4());
}

// Effective settings of every addressed neighbor of `bgp`.
std::vector<BgpNeighbor> AddressedNeighbors(const BgpConfig& bgp) {
  std::vector<BgpNeighbor> out;
  for (const auto& [key, n] : bgp.neighbors) {
    if (n.is_group || !n.address) continue;
    out.push_back(bgp.Effective(n));
  }
  return out;
}

std::vector<BgpSession> EstablishSessions(
    const std::map<std::string, RouterModel>& models,
    const AddressOwners& owners, const std::map<std::string, Rib>& igp) {
  std::vector<BgpSession> sessions;
  for (const auto& [name, model] : models) {
    if (!model.bgp) continue;
    for (const BgpNeighbor& n : AddressedNeighbors(*model.bgp)) {
      if (!n.remote_as) continue;
      auto owner = owners.find(*n.address);
      if (owner == owners.end() || owner->second == name) continue;
      const RouterModel& peer = models.at(owner->second);
      if (!peer.bgp) continue;
      if (peer.bgp->asn != *n.remote_as) {
        throw Error(ErrorCode::kSessionMismatch,
                    name + " expects AS " + std::to_string(*n.remote_as) +
                        " at " + n.address->ToString() + " but " + peer.hostname +
                        " is AS " + std::to_string(peer.bgp->asn));
      }
      // The peer's neighbor statement pointing back at us.
      std::optional<Ipv4> local_address;
      for (const BgpNeighbor& back : AddressedNeighbors(*peer.bgp)) {
        auto back_owner = owners.find(*back.address);
        if (back_owner == owners.end() || back_owner->second != name) continue;
        if (back.remote_as && *back.remote_as != model.bgp->asn) {
          throw Error(ErrorCode::kSessionMismatch,
                      peer.hostname + " expects AS " +
                          std::to_string(*back.remote_as) + " at " +
                          back.address->ToString() + " but " + name + " is AS " +
                          std::to_string(model.bgp->asn));
        }
        if (back.remote_as) {
          local_address = back.address;
          break;
        }
      }
      if (!local_address) continue;
      BgpSession s;
      s.local = name;
      s.peer = owner->second;
      s.neighbor_key = n.key;
      s.local_address = *local_address;
      s.peer_address = *n.address;
      s.ebgp = peer.bgp->asn != model.bgp->asn;
      // eBGP peers must be directly connected; iBGP peers reachable by IGP.
      const Rib& rib = igp.at(name);
      if (s.ebgp) {
        const Route* r = LongestMatch(rib, s.peer_address);
        if (!r || r->protocol != Protocol::kConnected) continue;
      } else if (Resolve(name, s.peer_address, rib, owners).empty()) {
        continue;
      }
      sessions.push_back(std::move(s));
    }
  }
  std::sort(sessions.begin(), sessions.end());
  return sessions;
}

BgpTable LocalBgpRoutes(const std::string& name, const RouterModel& model,
                        const Rib& igp) {
  BgpTable local;
  const BgpConfig& bgp = *model.bgp;
  auto originate = [&](const Prefix& p) { local.try_emplace(p, BgpPath{}); };
  for (const Prefix& p : bgp.networks) {
    if (igp.count(p)) originate(p);
  }
  for (const auto& [prefix, route] : igp) {
    switch (route.protocol) {
      case Protocol::kConnected:
        if (bgp.redistribute.count("connected")) originate(prefix);
        if (bgp.redistribute.count("ospf") && model.ospf) {
          const InterfaceConfig* iface =
              model.FindInterface(route.next_hops.begin()->interface);
          if (iface && OspfEnabled(model, *iface)) originate(prefix);
        }
        break;
      case Protocol::kStatic:
        if (bgp.redistribute.count("static")) originate(prefix);
        break;
      case Protocol::kOspf:
        if (bgp.redistribute.count("ospf")) originate(prefix);
        break;
      default:
        break;
    }
  }
  (void)name;
  return local;
}

// Decision process: local origin, administrative distance, AS-path length,
// lowest advertising router-id (router name breaks exact ties).
bool Preferred(const BgpPath& a, const BgpPath& b) {
  auto key = [](const BgpPath& p) {
    return std::tuple(p.local() ? 0 : 1,
                      AdminDistance(p.ebgp ? Protocol::kEbgp : Protocol::kIbgp),
                      p.as_path.size(), p.from_router_id, p.from);
  };
  return key(a) < key(b);
}

struct BgpResult {
  std::map<std::string, BgpTable> best;
};

BgpResult RunBgp(const std::map<std::string, RouterModel>& models,
                 const std::vector<BgpSession>& sessions,
                 const std::map<std::string, Rib>& igp,
                 const AddressOwners& owners) {
  std::map<std::string, BgpTable> local;
  std::map<std::string, Ipv4> router_ids;
  for (const auto& [name, model] : models) {
    if (!model.bgp) continue;
    local[name] = LocalBgpRoutes(name, model, igp.at(name));
    router_ids[name] = RouterId(model);
  }
  // Reverse direction of each session: (peer, local) -> peer's neighbor key.
  std::map<std::pair<std::string, std::string>, const BgpSession*> by_pair;
  for (const auto& s : sessions) by_pair[{s.local, s.peer}] = &s;

  // rib_in[router][peer] = paths received from that peer.
  using RibIn = std::map<std::string, std::map<std::string, BgpTable>>;
  RibIn rib_in;
  std::map<std::string, BgpTable> best;
  std::map<std::pair<std::string, Ipv4>, bool> resolvable;
  auto valid = [&](const std::string& router, const BgpPath& path) {
    if (path.ebgp || path.local()) return true;
    auto key = std::pair(router, path.next_hop);
    auto it = resolvable.find(key);
    if (it == resolvable.end()) {
      it = resolvable
               .emplace(key, !Resolve(router, path.next_hop, igp.at(router),
                                      owners)
                                  .empty())
               .first;
    }
    return it->second;
  };
  auto effective_neighbor = [&](const std::string& router,
                                const std::string& key) {
    const BgpConfig& bgp = *models.at(router).bgp;
    return bgp.Effective(bgp.neighbors.at(key));
  };
  // Routers update one at a time in name order, each seeing its peers'
  // latest advertisements. Unlike synchronous rounds, this cannot flip
  // forever between two stable states (e.g. a prefix originated in two ASes).
  std::map<std::string, std::vector<const BgpSession*>> outgoing;
  for (const auto& s : sessions) {
    if (by_pair.count({s.peer, s.local})) outgoing[s.local].push_back(&s);
  }
  auto select_best = [&](const std::string& name) {
    BgpTable b = local.at(name);
    for (const auto& [peer, paths] : rib_in[name]) {
      for (const auto& [prefix, path] : paths) {
        if (!valid(name, path)) continue;
        auto [it, inserted] = b.try_emplace(prefix, path);
        if (!inserted && Preferred(path, it->second)) it->second = path;
      }
    }
    return b;
  };
  auto advertise = [&](const BgpSession& s, const BgpTable& table) {
    const BgpSession* back = by_pair.at({s.peer, s.local});
    const RouterModel& sender = models.at(s.local);
    const RouterModel& receiver = models.at(s.peer);
    BgpNeighbor out = effective_neighbor(s.local, s.neighbor_key);
    BgpNeighbor in = effective_neighbor(s.peer, back->neighbor_key);
    BgpTable received;
    for (const auto& [prefix, path] : table) {
      if (!path.local() && !path.ebgp && !s.ebgp) continue;
      if (!sender.PermitsAll(out.out, prefix)) continue;
      BgpPath sent = path;
      sent.from = s.local;
      sent.from_router_id = router_ids.at(s.local);
      sent.ebgp = s.ebgp;
      if (s.ebgp) {
        sent.as_path.insert(sent.as_path.begin(), sender.bgp->asn);
        sent.next_hop = s.local_address;
      } else if (path.local() || out.next_hop_self) {
        sent.next_hop = s.local_address;
      }
      if (!receiver.PermitsAll(in.in, prefix)) continue;
      if (s.ebgp && std::find(sent.as_path.begin(), sent.as_path.end(),
                              receiver.bgp->asn) != sent.as_path.end()) {
        continue;
      }
      received.emplace(prefix, std::move(sent));
    }
    return received;
  };
  for (int round = 0;; ++round) {
    if (round == kMaxBgpRounds) {
      throw Error(ErrorCode::kNonConvergence,
                  "BGP did not converge within " +
                      std::to_string(kMaxBgpRounds) + " rounds");
    }
    bool changed = false;
    for (const auto& [name, _] : local) {
      BgpTable b = select_best(name);
      if (!best.count(name) || best[name] != b) {
        best[name] = std::move(b);
        changed = true;
      }
      for (const BgpSession* s : outgoing[name]) {
        BgpTable received = advertise(*s, best[name]);
        BgpTable& slot = rib_in[s->peer][s->local];
        if (slot != received) {
          slot = std::move(received);
          changed = true;
        }
      }
    }
    if (!changed) break;
  }
  return {std::move(best)};
}

// ---------------------------------------------------------------------------
// JSON helpers.
// ---------------------------------------------------------------------------

[[noreturn]] void BadJson(const std::string& what) {
  throw Error(ErrorCode::kInvalidArgument, "malformed JSON: " + what);
}

Prefix RequirePrefix(const json& j) {
  if (!j.is_string()) BadJson("prefix must be a string");
  auto p = Prefix::Parse(j.get<std::string>());
  if (!p) BadJson("bad prefix " + j.get<std::string>());
  return *p;
}

}  // namespace

std::string_view ProtocolName(Protocol protocol) {
  switch (protocol) {
    case Protocol::kConnected: return "connected";
    case Protocol::kStatic: return "static";
    case Protocol::kOspf: return "ospf";
    case Protocol::kOspfExternal: return "ospf-external";
    case Protocol::kEbgp: return "ebgp";
    case Protocol::kIbgp: return "ibgp";
  }
  return "unknown";
}

std::optional<Protocol> ParseProtocol(std::string_view name) {
  for (Protocol p : {Protocol::kConnected, Protocol::kStatic, Protocol::kOspf,
                     Protocol::kOspfExternal, Protocol::kEbgp,
                     Protocol::kIbgp}) {
    if (ProtocolName(p) == name) return p;
  }
  return std::nullopt;
}

int AdminDistance(Protocol protocol) {
  switch (protocol) {
    case Protocol::kConnected: return 0;
    case Protocol::kStatic: return 1;
    case Protocol::kEbgp: return 20;
    case Protocol::kOspf:
    case Protocol::kOspfExternal: return 110;
    case Protocol::kIbgp: return 200;
  }
  return 255;
}

const Route* Fib::Lookup(Ipv4 address) const {
  return LongestMatch(routes, address);
}

const Route* Fib::Find(const Prefix& prefix) const {
  auto it = routes.find(prefix);
  return it == routes.end() ? nullptr : &it->second;
}

void CostGraph::AddLink(const std::string& a, const std::string& b,
                        int64_t cost_ab, int64_t cost_ba) {
  nodes.insert(a);
  nodes.insert(b);
  auto set_min = [this](const std::string& from, const std::string& to,
                        int64_t cost) {
    auto [it, inserted] = out[from].try_emplace(to, cost);
    if (!inserted) it->second = std::min(it->second, cost);
  };
  set_min(a, b, cost_ab);
  set_min(b, a, cost_ba);
}

std::optional<int64_t> CostGraph::Cost(const std::string& from,
                                       const std::string& to) const {
  auto it = out.find(from);
  if (it == out.end()) return std::nullopt;
  auto jt = it->second.find(to);
  if (jt == it->second.end()) return std::nullopt;
  return jt->second;
}

ScostTable ShortestPaths(const CostGraph& graph, const std::string& source) {
  ScostTable table;
  table.source = source;
  if (!graph.nodes.count(source)) return table;
  using Item = std::pair<int64_t, std::string>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> queue;
  std::set<std::string> done;
  table.scost[source] = 0;
  table.preds[source];
  queue.emplace(0, source);
  while (!queue.empty()) {
    auto [cost, v] = queue.top();
    queue.pop();
    if (!done.insert(v).second) continue;
    auto out = graph.out.find(v);
    if (out == graph.out.end()) continue;
    for (const auto& [w, c] : out->second) {
      int64_t candidate = cost + c;
      auto it = table.scost.find(w);
      if (it == table.scost.end() || candidate < it->second) {
        table.scost[w] = candidate;
        table.preds[w] = {v};
        queue.emplace(candidate, w);
      } else if (candidate == it->second && w != source) {
        table.preds[w].insert(v);
      }
    }
  }
  return table;
}

std::vector<std::vector<std::string>> ShortestPathsTo(
    const ScostTable& table, const std::string& target, size_t limit) {
  std::vector<std::vector<std::string>> paths;
  if (!table.scost.count(target)) return paths;
  std::vector<std::string> reversed{target};
  std::function<void(const std::string&)> walk = [&](const std::string& v) {
    if (paths.size() >= limit) return;
    if (v == table.source) {
      paths.emplace_back(reversed.rbegin(), reversed.rend());
      return;
    }
    for (const std::string& p : table.preds.at(v)) {
      reversed.push_back(p);
      walk(p);
      reversed.pop_back();
    }
  };
  walk(target);
  std::sort(paths.begin(), paths.end());
  return paths;
}

bool OspfEnabled(const RouterModel& model, const InterfaceConfig& iface) {
  if (!model.ospf || iface.shutdown || !iface.address) return false;
  for (const auto& network : model.ospf->networks) {
    if (network.Contains(*iface.address)) return true;
  }
  return false;
}

std::vector<OspfAdjacency> OspfAdjacencies(
    const std::map<std::string, RouterModel>& models,
    const std::vector<L3Link>& links) {
  std::vector<OspfAdjacency> out;
  for (const L3Link& link : links) {
    const RouterModel& a = models.at(link.router_a);
    const RouterModel& b = models.at(link.router_b);
    const InterfaceConfig* ia = a.FindInterface(link.iface_a);
    const InterfaceConfig* ib = b.FindInterface(link.iface_b);
    if (!ia || !ib || !OspfEnabled(a, *ia) || !OspfEnabled(b, *ib)) continue;
    if (a.ospf->passive_interfaces.count(ia->name) ||
        b.ospf->passive_interfaces.count(ib->name)) {
      continue;
    }
    out.push_back({link, ia->ospf_cost, ib->ospf_cost});
  }
  return out;
}

CostGraph BuildCostGraph(const std::map<std::string, RouterModel>& models,
                         const std::vector<OspfAdjacency>& adjacencies) {
  CostGraph graph;
  for (const auto& [name, model] : models) {
    if (model.ospf) graph.nodes.insert(name);
  }
  for (const auto& adj : adjacencies) {
    graph.AddLink(adj.link.router_a, adj.link.router_b, adj.cost_ab,
                  adj.cost_ba);
  }
  return graph;
}

Simulation Simulate(const Snapshot& snapshot) {
  Simulation sim;
  sim.models = InterpretAll(snapshot);
  sim.links = ComputeLinks(sim.models);
  AddressOwners owners = IndexAddresses(sim.models);

  // Stage 1: connected and static routes.
  std::map<std::string, Rib> base;
  for (const auto& [name, model] : sim.models) {
    base[name] = ConnectedAndStatic(name, model, sim.links, owners);
  }

  // Stage 2: OSPF with externals from static and connected redistribution.
  OspfState ospf = BuildOspf(sim.models, sim.links);
  sim.ospf = ospf.graph;
  std::map<std::string, std::set<Prefix>> externals;
  for (const auto& [name, model] : sim.models) {
    if (!model.ospf) continue;
    const auto& redistribute = model.ospf->redistribute;
    for (const auto& [prefix, route] : base[name]) {
      if (route.protocol == Protocol::kStatic && redistribute.count("static")) {
        externals[name].insert(prefix);
      }
      if (route.protocol == Protocol::kConnected &&
          redistribute.count("connected")) {
        const InterfaceConfig* iface =
            model.FindInterface(route.next_hops.begin()->interface);
        if (iface && !OspfEnabled(model, *iface)) externals[name].insert(prefix);
      }
    }
  }
  std::map<std::string, Rib> igp = base;
  for (const auto& [name, model] : sim.models) {
    for (auto& [prefix, route] : OspfRoutes(name, model, ospf, externals)) {
      Offer(igp[name], std::move(route));
    }
  }

  // Stage 3: BGP.
  sim.sessions = EstablishSessions(sim.models, owners, igp);
  BgpResult bgp = RunBgp(sim.models, sim.sessions, igp, owners);

  // Stage 4: OSPF externals from eBGP-learned routes.
  bool bgp_externals = false;
  for (const auto& [name, model] : sim.models) {
    if (!model.ospf || !model.ospf->redistribute.count("bgp")) continue;
    auto it = bgp.best.find(name);
    if (it == bgp.best.end()) continue;
    for (const auto& [prefix, path] : it->second) {
      if (!path.local() && path.ebgp) {
        externals[name].insert(prefix);
        bgp_externals = true;
      }
    }
  }

  // Stage 5: merge.
  for (const auto& [name, model] : sim.models) {
    Rib rib = base[name];
    if (bgp_externals) {
      for (auto& [prefix, route] : OspfRoutes(name, model, ospf, externals)) {
        Offer(rib, std::move(route));
      }
    } else {
      rib = igp[name];
    }
    auto best = bgp.best.find(name);
    if (best != bgp.best.end()) {
      for (const auto& [prefix, path] : best->second) {
        if (path.local()) continue;
        sim.bgp_from[name][prefix] = path.from;
        std::set<NextHop> hops = Resolve(name, path.next_hop, igp[name], owners);
        if (hops.empty()) continue;
        Route r = MakeRoute(prefix, std::move(hops),
                            path.ebgp ? Protocol::kEbgp : Protocol::kIbgp,
                            static_cast<int64_t>(path.as_path.size()));
        r.as_path = path.as_path;
        r.bgp_next_hop = path.next_hop;
        Offer(rib, std::move(r));
      }
    }
    Fib& fib = sim.fibs[name];
    fib.router = name;
    fib.routes = std::move(rib);
  }
  return sim;
}

FibTable ComputeFibs(const Snapshot& snapshot) {
  return Simulate(snapshot).fibs;
}

std::string FibsToJson(const FibTable& fibs) {
  json doc = json::object();
  for (const auto& [router, fib] : fibs) {
    json routes = json::array();
    for (const auto& [prefix, route] : fib.routes) {
      json r;
      r["prefix"] = prefix.ToString();
      r["protocol"] = std::string(ProtocolName(route.protocol));
      r["admin_distance"] = route.admin_distance;
      r["metric"] = route.metric;
      json hops = json::array();
      for (const auto& nh : route.next_hops) {
        hops.push_back({{"router", nh.router}, {"interface", nh.interface}});
      }
      r["next_hops"] = std::move(hops);
      if (route.protocol == Protocol::kEbgp || route.protocol == Protocol::kIbgp) {
        r["as_path"] = route.as_path;
        if (route.bgp_next_hop) {
          r["bgp_next_hop"] = route.bgp_next_hop->ToString();
        }
      }
      routes.push_back(std::move(r));
    }
    doc[router] = std::move(routes);
  }
  return doc.dump(2) + "\n";
}

FibTable FibsFromJson(std::string_view json_text) {
  json doc = json::parse(json_text, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) BadJson("expected an object");
  FibTable fibs;
  try {
    for (const auto& [router, routes] : doc.items()) {
      Fib& fib = fibs[router];
      fib.router = router;
      if (!routes.is_array()) BadJson("routes of " + router);
      for (const json& r : routes) {
        Route route;
        route.prefix = RequirePrefix(r.at("prefix"));
        auto protocol = ParseProtocol(r.at("protocol").get<std::string>());
        if (!protocol) BadJson("unknown protocol");
        route.protocol = *protocol;
        route.admin_distance = r.at("admin_distance").get<int>();
        route.metric = r.at("metric").get<int64_t>();
        for (const json& nh : r.at("next_hops")) {
          route.next_hops.insert({nh.at("router").get<std::string>(),
                                  nh.at("interface").get<std::string>()});
        }
        if (r.contains("as_path")) {
          route.as_path = r.at("as_path").get<std::vector<uint32_t>>();
        }
        if (r.contains("bgp_next_hop")) {
          route.bgp_next_hop =
              Ipv4::Parse(r.at("bgp_next_hop").get<std::string>());
          if (!route.bgp_next_hop) BadJson("bad bgp_next_hop");
        }
        fib.routes[route.prefix] = std::move(route);
      }
    }
  } catch (const json::exception& e) {
    BadJson(e.what());
  }
  return fibs;
}

std::string_view TraceStatusName(TraceStatus status) {
  switch (status) {
    case TraceStatus::kOk: return "Ok";
    case TraceStatus::kNoRoute: return "NoRoute";
    case TraceStatus::kLoopDetected: return "LoopDetected";
  }
  return "Unknown";
}

TraceResult Traceroute(const Snapshot& snapshot, const FibTable& fibs,
                       const std::string& src, const std::string& dst) {
  auto s = snapshot.hosts.find(src);
  auto d = snapshot.hosts.find(dst);
  if (s == snapshot.hosts.end() || d == snapshot.hosts.end()) {
    throw Error(ErrorCode::kInvalidArgument,
                "unknown host " + (s == snapshot.hosts.end() ? src : dst));
  }
  const HostSpec& target = d->second;
  Ipv4 address = target.iface_ip;
  TraceResult result;
  size_t branches = 0;
  auto fail = [&](TraceStatus status) {
    ++branches;
    if (result.status == TraceStatus::kOk) result.status = status;
  };
  Path path{src};
  std::function<void(const std::string&)> walk = [&](const std::string& router) {
    if (branches >= kMaxTraceBranches) return;
    path.push_back(router);
    auto fib = fibs.find(router);
    const Route* route = fib == fibs.end() ? nullptr : fib->second.Lookup(address);
    if (static_cast<int>(path.size()) - 1 > kMaxTraceHops) {
      fail(TraceStatus::kLoopDetected);
    } else if (!route) {
      fail(TraceStatus::kNoRoute);
    } else if (route->protocol == Protocol::kConnected) {
      if (router == target.gateway_router) {
        path.push_back(dst);
        result.paths.insert(path);
        path.pop_back();
        ++branches;
      } else {
        fail(TraceStatus::kNoRoute);
      }
    } else {
      for (const NextHop& nh : route->next_hops) {
        if (branches >= kMaxTraceBranches) break;
        if (nh.router == router) {
          fail(TraceStatus::kNoRoute);
        } else if (std::find(path.begin() + 1, path.end(), nh.router) !=
                   path.end()) {
          fail(TraceStatus::kLoopDetected);
        } else {
          walk(nh.router);
        }
      }
    }
    path.pop_back();
  };
  walk(s->second.gateway_router);
  return result;
}

DataPlane ComputeDataPlane(const Snapshot& snapshot, const FibTable& fibs,
                           const std::vector<std::string>* hosts) {
  std::vector<std::string> names;
  if (hosts) {
    names = *hosts;
  } else {
    for (const auto& [name, host] : snapshot.hosts) names.push_back(name);
  }
  DataPlane dp;
  for (const auto& a : names) {
    for (const auto& b : names) {
      if (a != b) dp.paths[{a, b}] = Traceroute(snapshot, fibs, a, b);
    }
  }
  return dp;
}

std::string DataPlaneToJson(const DataPlane& dataplane) {
  json doc = json::object();
  for (const auto& [pair, trace] : dataplane.paths) {
    json paths = json::array();
    for (const Path& p : trace.paths) paths.push_back(p);
    doc[pair.first][pair.second] = {
        {"status", std::string(TraceStatusName(trace.status))},
        {"paths", std::move(paths)}};
  }
  return doc.dump(2) + "\n";
}

DataPlane DataPlaneFromJson(std::string_view json_text) {
  json doc = json::parse(json_text, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) BadJson("expected an object");
  DataPlane dp;
  try {
    for (const auto& [src, row] : doc.items()) {
      for (const auto& [dst, entry] : row.items()) {
        TraceResult trace;
        std::string status = entry.at("status").get<std::string>();
        bool known = false;
        for (TraceStatus t : {TraceStatus::kOk, TraceStatus::kNoRoute,
                              TraceStatus::kLoopDetected}) {
          if (TraceStatusName(t) == status) {
            trace.status = t;
            known = true;
          }
        }
        if (!known) BadJson("unknown status " + status);
        for (const json& p : entry.at("paths")) {
          trace.paths.insert(p.get<Path>());
        }
        dp.paths[{src, dst}] = std::move(trace);
      }
    }
  } catch (const json::exception& e) {
    BadJson(e.what());
  }
  return dp;
}

}  // namespace netcloak
