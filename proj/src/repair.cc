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
// File: repair.cc
// -----------------------------------------------------------------------------

#include "netcloak/repair.h"

#include <z3++.h>

#include <algorithm>
#include <deque>
#include <functional>
#include <variant>

#include "netcloak/config_model.h"
#include "netcloak/error.h"
#include "netcloak/topology.h"

namespace netcloak {
namespace {

// In-neighbors of every node.
std::map<std::string, std::vector<std::string>> InNeighbors(
    const CostGraph& graph) {
  std::map<std::string, std::vector<std::string>> in;
  for (const auto& [u, outs] : graph.out) {
    for (const auto& [v, cost] : outs) in[v].push_back(u);
  }
  return in;
}

std::set<std::string> ReachableFrom(const CostGraph& graph,
                                    const std::string& source) {
  std::set<std::string> seen{source};
  std::deque<std::string> queue{source};
  while (!queue.empty()) {
    std::string u = queue.front();
    queue.pop_front();
    auto it = graph.out.find(u);
    if (it == graph.out.end()) continue;
    for (const auto& [v, cost] : it->second) {
      if (seen.insert(v).second) queue.push_back(v);
    }
  }
  return seen;
}

// Requested predecessors of every node on the routes (the source excluded).
std::map<std::string, std::set<std::string>> RequiredPreds(
    const std::set<Path>& routes) {
  std::map<std::string, std::set<std::string>> preds;
  for (const Path& p : routes) {
    for (size_t i = 1; i < p.size(); ++i) preds[p[i]].insert(p[i - 1]);
  }
  return preds;
}

std::set<std::string> HopRouters(const Route* route) {
  std::set<std::string> routers;
  if (!route) return routers;
  for (const NextHop& hop : route->next_hops) routers.insert(hop.router);
  return routers;
}

}  // namespace

// ---------------------------------------------------------------------------
// Requirements and the Dijkstra oracle.
// ---------------------------------------------------------------------------

std::set<Path> PathRequirement::Routes() const {
  if (kind == Kind::kPrimary) return {path};
  return paths;
}

std::string RequirementName(const PathRequirement& req) {
  std::string out = req.kind == PathRequirement::Kind::kPrimary ? "primary "
                                                                  : "ecmp ";
  out += req.src + "->" + req.dst + " [";
  bool first_route = true;
  for (const Path& p : req.Routes()) {
    if (!first_route) out += " | ";
    first_route = false;
    for (size_t i = 0; i < p.size(); ++i) out += (i ? "-" : "") + p[i];
  }
  return out + "]";
}

CostGraph WithCosts(const CostGraph& graph, const CostAssignment& costs) {
  CostGraph out = graph;
  for (const auto& [edge, cost] : costs) {
    auto it = out.out.find(edge.first);
    if (it == out.out.end() || !it->second.count(edge.second)) {
      throw Error(ErrorCode::kInvalidArgument,
                  "cost for unknown link " + edge.first + "->" + edge.second);
    }
    it->second[edge.second] = cost;
  }
  return out;
}

void CheckRequirement(const PathRequirement& req, const CostGraph& graph) {
  std::set<Path> routes = req.Routes();
  if (routes.empty()) {
    throw Error(ErrorCode::kPathNotInGraph, "requirement without routes");
  }
  for (const Path& p : routes) {
    if (p.size() < 2 || p.front() != req.src || p.back() != req.dst) {
      throw Error(ErrorCode::kPathNotInGraph,
                  "route endpoints differ from " + req.src + "->" + req.dst);
    }
    std::set<std::string> seen;
    for (size_t i = 0; i < p.size(); ++i) {
      if (!graph.nodes.count(p[i]) || !seen.insert(p[i]).second) {
        throw Error(ErrorCode::kPathNotInGraph,
                    "bad node " + p[i] + " in " + RequirementName(req));
      }
      if (i > 0 && !graph.Cost(p[i - 1], p[i])) {
        throw Error(ErrorCode::kPathNotInGraph,
                    "no link " + p[i - 1] + "->" + p[i] + " in " +
                        RequirementName(req));
      }
    }
  }
}

namespace {

// SatisfiedBy against a precomputed table of the requirement's source.
bool SatisfiedByTable(const PathRequirement& req, const ScostTable& table) {
  for (const auto& [v, preds] : RequiredPreds(req.Routes())) {
    auto it = table.preds.find(v);
    if (it == table.preds.end() || it->second != preds) return false;
  }
  return true;
}

}  // namespace

bool SatisfiedBy(const PathRequirement& req, const CostGraph& graph) {
  return SatisfiedByTable(req, ShortestPaths(graph, req.src));
}

// ---------------------------------------------------------------------------
// SMT encoding.
// ---------------------------------------------------------------------------

struct ConstraintSet::Impl {
  struct Source {
    std::map<std::string, z3::expr> scost;
    std::map<std::string, z3::expr> pred;
  };

  Impl(CostModel m, CostEncoding e)
      : model(std::move(m)), encoding(e), constraints(ctx) {
    in = InNeighbors(model.graph);
    int i = 0;
    for (const auto& v : model.graph.nodes) index[v] = i++;
    for (const auto& [u, outs] : model.graph.out) {
      for (const auto& [v, cost] : outs) {
        if (model.fixed.count({u, v})) continue;
        cost_vars.emplace(DirectedEdge(u, v),
                          ctx.int_const(("c|" + u + "|" + v).c_str()));
      }
    }
  }

  z3::expr Cost(const std::string& u, const std::string& v) {
    auto it = cost_vars.find({u, v});
    if (it != cost_vars.end()) return it->second;
    return ctx.int_val(static_cast<int64_t>(*model.graph.Cost(u, v)));
  }

  z3::expr Via(Source& s, const std::string& u, const std::string& v) {
    return s.scost.at(u) + Cost(u, v);
  }

  Source& GetSource(const std::string& src) {
    auto it = sources.find(src);
    if (it != sources.end()) return it->second;
    Source& s = sources[src];
    std::set<std::string> reach = ReachableFrom(model.graph, src);
    for (const auto& v : reach) {
      s.scost.emplace(v, ctx.int_const(("d|" + src + "|" + v).c_str()));
    }
    constraints.push_back(s.scost.at(src) == 0);
    if (encoding == CostEncoding::kPotential) {
      // scost holds potentials: lower bounds of the true distance.
      for (const auto& v : reach) {
        for (const auto& u : in[v]) {
          if (!reach.count(u)) continue;
          constraints.push_back(s.scost.at(v) <= Via(s, u, v));
        }
      }
      return s;
    }
    for (const auto& v : reach) {
      if (v == src) continue;
      z3::expr_vector attained(ctx);
      for (const auto& u : in[v]) {
        constraints.push_back(s.scost.at(v) <= Via(s, u, v));
        attained.push_back(s.scost.at(v) == Via(s, u, v));
      }
      constraints.push_back(z3::mk_or(attained));
    }
    return s;
  }

  z3::expr& Pred(Source& s, const std::string& src, const std::string& v2) {
    auto it = s.pred.find(v2);
    if (it != s.pred.end()) return it->second;
    z3::expr pred = ctx.int_const(("p|" + src + "|" + v2).c_str());
    if (v2 == src) {
      constraints.push_back(pred == index.at(src));
    } else {
      for (const auto& v1 : in[v2]) {
        z3::expr_vector alternatives(ctx);
        for (const auto& v3 : in[v2]) {
          if (v3 != v1) alternatives.push_back(Via(s, v3, v2) <= Via(s, v1, v2));
        }
        z3::expr has_alt = alternatives.empty() ? ctx.bool_val(false)
                                                : z3::mk_or(alternatives);
        constraints.push_back(z3::implies(
            !has_alt,
            s.scost.at(v2) == Via(s, v1, v2) && pred == index.at(v1)));
        constraints.push_back(z3::implies(has_alt, pred != index.at(v1)));
      }
    }
    return s.pred.emplace(v2, pred).first->second;
  }

  CostModel model;
  CostEncoding encoding;
  z3::context ctx;
  z3::expr_vector constraints;
  std::map<std::string, std::vector<std::string>> in;
  std::map<std::string, int> index;
  std::map<DirectedEdge, z3::expr> cost_vars;
  std::map<std::string, Source> sources;
  int count = 0;
};

ConstraintSet::ConstraintSet(CostModel model, CostEncoding encoding)
    : impl_(std::make_unique<Impl>(std::move(model), encoding)) {}
ConstraintSet::~ConstraintSet() = default;
ConstraintSet::ConstraintSet(ConstraintSet&&) noexcept = default;
ConstraintSet& ConstraintSet::operator=(ConstraintSet&&) noexcept = default;

const CostModel& ConstraintSet::model() const { return impl_->model; }
CostEncoding ConstraintSet::encoding() const { return impl_->encoding; }
int ConstraintSet::size() const { return impl_->count; }
int ConstraintSet::num_sources() const {
  return static_cast<int>(impl_->sources.size());
}

void EncodePrimary(const PathRequirement& req, ConstraintSet& set) {
  if (req.kind != PathRequirement::Kind::kPrimary) {
    throw Error(ErrorCode::kInvalidArgument, "not a primary requirement");
  }
  ConstraintSet::Impl& impl = *set.impl_;
  if (impl.encoding != CostEncoding::kPredecessor) {
    throw Error(ErrorCode::kInvalidArgument, "set uses the potential encoding");
  }
  CheckRequirement(req, impl.model.graph);
  auto& source = impl.GetSource(req.src);
  impl.Pred(source, req.src, req.src);
  for (size_t i = 1; i < req.path.size(); ++i) {
    z3::expr& pred = impl.Pred(source, req.src, req.path[i]);
    impl.constraints.push_back(pred == impl.index.at(req.path[i - 1]));
  }
  ++impl.count;
}

void EncodeEcmp(const PathRequirement& req, ConstraintSet& set) {
  if (req.kind != PathRequirement::Kind::kEcmp) {
    throw Error(ErrorCode::kInvalidArgument, "not an ECMP requirement");
  }
  ConstraintSet::Impl& impl = *set.impl_;
  if (impl.encoding != CostEncoding::kPredecessor) {
    throw Error(ErrorCode::kInvalidArgument, "set uses the potential encoding");
  }
  CheckRequirement(req, impl.model.graph);
  auto& source = impl.GetSource(req.src);
  for (const auto& [v2, preds] : RequiredPreds(req.paths)) {
    for (const auto& v1 : impl.in[v2]) {
      z3::expr member = source.scost.at(v2) == impl.Via(source, v1, v2);
      impl.constraints.push_back(preds.count(v1) ? member : !member);
    }
  }
  ++impl.count;
}

void EncodePotential(const PathRequirement& req, ConstraintSet& set) {
  ConstraintSet::Impl& impl = *set.impl_;
  if (impl.encoding != CostEncoding::kPotential) {
    throw Error(ErrorCode::kInvalidArgument, "set uses the predecessor encoding");
  }
  CheckRequirement(req, impl.model.graph);
  auto& source = impl.GetSource(req.src);
  // Prefix cost of the requested routes to each node; branches meeting at a
  // node must cost the same.
  std::map<std::string, z3::expr> prefix;
  prefix.emplace(req.src, impl.ctx.int_val(0));
  for (const Path& path : req.Routes()) {
    for (size_t i = 1; i < path.size(); ++i) {
      z3::expr via = prefix.at(path[i - 1]) + impl.Cost(path[i - 1], path[i]);
      auto [it, inserted] = prefix.emplace(path[i], via);
      if (!inserted) impl.constraints.push_back(it->second == via);
    }
  }
  for (const auto& [v, preds] : RequiredPreds(req.Routes())) {
    const z3::expr& d = prefix.at(v);
    impl.constraints.push_back(source.scost.at(v) >= d);
    for (const auto& u : impl.in[v]) {
      if (preds.count(u) || !source.scost.count(u)) continue;
      impl.constraints.push_back(impl.Via(source, u, v) >= d + 1);
    }
  }
  ++impl.count;
}

std::string_view CostEncodingName(CostEncoding encoding) {
  return encoding == CostEncoding::kPotential ? "potential" : "predecessor";
}

void Encode(const PathRequirement& req, ConstraintSet& set) {
  if (set.encoding() == CostEncoding::kPotential) {
    EncodePotential(req, set);
  } else if (req.kind == PathRequirement::Kind::kPrimary) {
    EncodePrimary(req, set);
  } else {
    EncodeEcmp(req, set);
  }
}

CostAssignment SolveCosts(const ConstraintSet& set, unsigned timeout_ms) {
  ConstraintSet::Impl& impl = *set.impl_;
  try {
    std::vector<int64_t> bounds{std::min(kInitialCostBound, impl.model.cost_max)};
    if (impl.model.cost_max > bounds.back()) bounds.push_back(impl.model.cost_max);
    // A fresh solver per bound: push/pop would switch z3 to its slower
    // incremental mode, and the wider bound is rarely needed.
    for (int64_t bound : bounds) {
      z3::solver solver(impl.ctx);
      z3::params params(impl.ctx);
      params.set("timeout", timeout_ms);
      solver.set(params);
      solver.add(impl.constraints);
      for (const auto& [edge, var] : impl.cost_vars) {
        solver.add(var >= 1);
        solver.add(var <= impl.ctx.int_val(bound));
      }
      z3::check_result result = solver.check();
      if (result == z3::unknown) {
        throw Error(ErrorCode::kSolverTimeout,
                    "cost synthesis: " + solver.reason_unknown());
      }
      if (result == z3::sat) {
        z3::model m = solver.get_model();
        CostAssignment costs;
        for (const auto& [edge, var] : impl.cost_vars) {
          costs[edge] = m.eval(var, true).get_numeral_int64();
        }
        return costs;
      }
    }
  } catch (const z3::exception& e) {
    throw Error(ErrorCode::kInternal, std::string("z3: ") + e.msg());
  }
  throw Error(ErrorCode::kUnsat, "link-cost constraints are unsatisfiable");
}

// ---------------------------------------------------------------------------
// CEGIS.
// ---------------------------------------------------------------------------

CegisResult CegisRepair(const CostModel& model,
                        const std::vector<PathRequirement>& reqs,
                        unsigned timeout_ms, CostEncoding encoding) {
  for (const auto& req : reqs) CheckRequirement(req, model.graph);
  CegisResult result;
  CostAssignment initial;
  for (const auto& [u, outs] : model.graph.out) {
    for (const auto& [v, cost] : outs) {
      if (!model.fixed.count({u, v})) initial[{u, v}] = cost;
    }
  }
  // One shortest-path table per distinct source.
  auto violated = [&](const CostAssignment& costs) {
    CostGraph g = WithCosts(model.graph, costs);
    std::map<std::string, ScostTable> tables;
    std::vector<size_t> out;
    for (size_t i = 0; i < reqs.size(); ++i) {
      auto it = tables.find(reqs[i].src);
      if (it == tables.end()) {
        it = tables.emplace(reqs[i].src, ShortestPaths(g, reqs[i].src)).first;
      }
      if (!SatisfiedByTable(reqs[i], it->second)) out.push_back(i);
    }
    return out;
  };

  CostAssignment costs = initial;
  std::vector<size_t> bad = violated(costs);
  if (bad.empty()) {
    result.costs = std::move(costs);
    result.log.iterations = 1;
    result.log.converged = true;
    return result;
  }
  ConstraintSet set(model, encoding);
  std::set<size_t> active;
  while (true) {
    bool grew = false;
    for (size_t i : bad) {
      if (active.insert(i).second) {
        Encode(reqs[i], set);
        grew = true;
      }
    }
    if (!grew) {
      throw Error(ErrorCode::kInternal,
                  "synthesized costs violate encoded " +
                      RequirementName(reqs[bad.front()]));
    }
    ++result.log.iterations;
    costs = SolveCosts(set, timeout_ms);
    bad = violated(costs);
    if (bad.empty()) break;
  }
  // Undo changes the requirements do not need.
  for (const auto& [edge, original] : initial) {
    if (costs.at(edge) == original) continue;
    int64_t solved = costs.at(edge);
    costs[edge] = original;
    if (!violated(costs).empty()) costs[edge] = solved;
  }
  for (const auto& [edge, cost] : costs) {
    if (cost != initial.at(edge)) result.log.costs_assigned[edge] = cost;
  }
  result.costs = std::move(costs);
  result.log.converged = true;
  return result;
}

// ---------------------------------------------------------------------------
// Requirements from the original network.
// ---------------------------------------------------------------------------

std::vector<PathRequirement> ExtractRequirements(const Snapshot& original,
                                                 const Simulation& sim) {
  auto asns = AssignAsns(sim.models, sim.links);
  std::map<uint32_t, std::set<std::string>> egress, asbrs;
  for (const auto& [name, host] : original.hosts) {
    if (asns.count(host.gateway_router)) {
      egress[asns.at(host.gateway_router)].insert(host.gateway_router);
    }
  }
  for (const auto& s : sim.sessions) {
    if (s.ebgp) asbrs[asns.at(s.local)].insert(s.local);
  }
  std::set<uint32_t> ases;
  for (const auto& [asn, _] : egress) ases.insert(asn);
  for (const auto& [asn, _] : asbrs) ases.insert(asn);

  std::vector<PathRequirement> reqs;
  std::map<std::string, ScostTable> tables;
  for (uint32_t asn : ases) {
    const auto& e = egress[asn];
    const auto& b = asbrs[asn];
    std::set<std::pair<std::string, std::string>> pairs;
    auto add_all = [&](const std::set<std::string>& from,
                       const std::set<std::string>& to) {
      for (const auto& x : from) {
        for (const auto& y : to) {
          if (x != y) pairs.emplace(x, y);
        }
      }
    };
    add_all(e, e);
    add_all(e, b);
    add_all(b, e);
    add_all(b, b);
    for (const auto& [x, y] : pairs) {
      if (!sim.ospf.nodes.count(x)) continue;
      auto it = tables.find(x);
      if (it == tables.end()) {
        it = tables.emplace(x, ShortestPaths(sim.ospf, x)).first;
      }
      if (!it->second.scost.count(y)) continue;
      auto routes = ShortestPathsTo(it->second, y);
      PathRequirement req;
      req.src = x;
      req.dst = y;
      req.as_id = asn;
      if (routes.size() == 1) {
        req.kind = PathRequirement::Kind::kPrimary;
        req.path = routes.front();
      } else {
        req.kind = PathRequirement::Kind::kEcmp;
        req.paths.insert(routes.begin(), routes.end());
      }
      reqs.push_back(std::move(req));
    }
  }
  return reqs;
}

std::vector<PathRequirement> ExtractRequirements(const Snapshot& original) {
  return ExtractRequirements(original, Simulate(original));
}

RepairBaseline PrepareRepair(const Snapshot& original) {
  Simulation sim = Simulate(original);
  RepairBaseline baseline;
  baseline.fibs = sim.fibs;
  for (const auto& s : sim.sessions) baseline.sessions.emplace(s.local, s.peer);
  for (const auto& [u, outs] : sim.ospf.out) {
    for (const auto& [v, cost] : outs) baseline.ospf_links.emplace(u, v);
  }
  for (const auto& [name, host] : original.hosts) {
    baseline.destinations[name] = host.iface_ip;
  }
  baseline.requirements = ExtractRequirements(original, sim);
  baseline.asns = AssignAsns(sim.models, sim.links);
  return baseline;
}

CostModel BuildCostModel(const CostGraph& ospf,
                         const std::map<std::string, uint32_t>& asns,
                         uint32_t asn, const RepairBaseline& baseline) {
  auto in_as = [&](const std::string& v) {
    auto it = asns.find(v);
    return it != asns.end() && it->second == asn;
  };
  CostModel model;
  for (const auto& v : ospf.nodes) {
    if (in_as(v)) model.graph.nodes.insert(v);
  }
  for (const auto& [u, outs] : ospf.out) {
    if (!in_as(u)) continue;
    for (const auto& [v, cost] : outs) {
      if (!in_as(v)) continue;
      model.graph.out[u][v] = cost;
      if (baseline.ospf_links.count({u, v})) model.fixed.emplace(u, v);
    }
  }
  return model;
}

// ---------------------------------------------------------------------------
// Configuration edits.
// ---------------------------------------------------------------------------

namespace {

Command Line(const std::string& text) { return MakeCommand(text); }

void SetInterfaceCost(RouterConfig& config, const std::string& iface,
                      int64_t cost) {
  Stanza* s = FindStanza(config, StanzaKind::kInterface, iface);
  if (!s) {
    throw Error(ErrorCode::kInternal,
                "no interface " + iface + " on " + config.hostname);
  }
  Command line = Line("ip ospf cost " + std::to_string(cost));
  int address = -1;
  for (size_t i = 0; i < s->commands.size(); ++i) {
    const auto& t = s->commands[i].tokens;
    if (t.size() >= 3 && t[0] == "ip" && t[1] == "ospf" && t[2] == "cost") {
      s->commands[i] = line;
      return;
    }
    if (address < 0 && t.size() >= 2 && t[0] == "ip" && t[1] == "address") {
      address = static_cast<int>(i);
    }
  }
  s->commands.insert(s->commands.begin() + (address + 1), line);
}

// All prefix-list names of the snapshot.
std::set<std::string> PrefixListNames(const Snapshot& snapshot) {
  std::set<std::string> names;
  for (const auto& [_, config] : snapshot.configs) {
    for (const Stanza& s : config.stanzas) {
      if (s.kind == StanzaKind::kPrefixList) names.insert(s.name);
    }
  }
  return names;
}

std::string FreshPrefixListName(const Snapshot& snapshot) {
  std::set<std::string> taken = PrefixListNames(snapshot);
  for (int i = 1;; ++i) {
    std::string name = "PL-IN-" + std::to_string(i);
    if (!taken.count(name)) return name;
  }
}

// Replaces (or creates) the deny-then-permit-all filter `name` of kind
// `kind` with one deny entry per prefix of `denied`.
void WriteDenyFilter(RouterConfig& config, FilterRule::Kind kind,
                     const std::string& name,
                     const std::set<Prefix>& denied) {
  std::vector<Command> lines;
  if (kind == FilterRule::Kind::kBgpDistributeListIn) {
    for (const Prefix& p : denied) {
      lines.push_back(Line("access-list " + name + " deny " +
                           p.network().ToString() + " 0.0.0.0"));
    }
    lines.push_back(Line("access-list " + name + " permit any"));
  } else {
    int seq = 5;
    for (const Prefix& p : denied) {
      lines.push_back(Line("ip prefix-list " + name + " seq " +
                           std::to_string(seq) + " deny " + p.ToString()));
      seq += 5;
    }
    lines.push_back(Line("ip prefix-list " + name + " seq " +
                         std::to_string(seq) + " permit 0.0.0.0/0 le 32"));
  }
  StanzaKind stanza_kind = kind == FilterRule::Kind::kBgpDistributeListIn
                               ? StanzaKind::kAccessList
                               : StanzaKind::kPrefixList;
  if (Stanza* s = FindStanza(config, stanza_kind, name)) {
    s->commands = std::move(lines);
    return;
  }
  Stanza s;
  s.kind = stanza_kind;
  s.name = name;
  s.commands = std::move(lines);
  if (UsesBangSeparators(config)) s.leading_comments = {"!"};
  InsertStanza(config, std::move(s), stanza_kind);
}

// Adds `line` after the last line configuring BGP neighbor `key`.
void AddNeighborLine(Stanza& bgp, const std::string& key,
                     const std::string& line) {
  int last = -1;
  for (size_t i = 0; i < bgp.commands.size(); ++i) {
    const auto& t = bgp.commands[i].tokens;
    if (t.size() >= 2 && t[0] == "neighbor" && t[1] == key) {
      last = static_cast<int>(i);
    }
  }
  Command c = Line(line);
  if (last < 0) {
    bgp.commands.push_back(std::move(c));
  } else {
    bgp.commands.insert(bgp.commands.begin() + last + 1, std::move(c));
  }
}

std::string FreeStandardAcl(const RouterModel& model) {
  for (int n = 1; n < 100; ++n) {
    if (!model.access_lists.count(std::to_string(n))) return std::to_string(n);
  }
  throw Error(ErrorCode::kConflictingRequirement,
              "no free standard access list on " + model.hostname);
}

// Repair-owned filters of one snapshot, keyed by (router, neighbor key);
// the key is empty for the OSPF filter.
class FilterBook {
 public:
  // Denies `prefix` and returns the rule if it is new.
  std::optional<FilterRule> Deny(Snapshot& snapshot, const std::string& router,
                                 const std::string& neighbor,
                                 const Prefix& prefix) {
    auto key = std::pair(router, neighbor);
    auto it = entries_.find(key);
    RouterConfig& config = snapshot.configs.at(router);
    if (it == entries_.end()) {
      Entry e = Create(snapshot, config, neighbor);
      it = entries_.emplace(key, std::move(e)).first;
    }
    Entry& e = it->second;
    if (!e.denied.insert(prefix).second) return std::nullopt;
    WriteDenyFilter(config, e.kind, e.name, e.denied);
    return FilterRule{e.kind, neighbor, e.name, prefix};
  }

 private:
  struct Entry {
    FilterRule::Kind kind;
    std::string name;
    std::set<Prefix> denied;
  };

  Entry Create(Snapshot& snapshot, RouterConfig& config,
               const std::string& neighbor) {
    RouterModel model = Interpret(config);
    Entry e;
    if (neighbor.empty()) {
      Stanza* ospf = FindStanza(config, StanzaKind::kRouterOspf);
      if (!ospf) {
        throw Error(ErrorCode::kInternal, "no OSPF on " + config.hostname);
      }
      e.kind = FilterRule::Kind::kOspfDistributeListIn;
      e.name = FreshPrefixListName(snapshot);
      InsertCommandAfter(*ospf,
                         Line("distribute-list prefix " + e.name + " in"),
                         "network");
      return e;
    }
    Stanza* bgp = FindStanza(config, StanzaKind::kRouterBgp);
    if (!bgp || !model.bgp || !model.bgp->neighbors.count(neighbor)) {
      throw Error(ErrorCode::kInternal,
                  "no BGP neighbor " + neighbor + " on " + config.hostname);
    }
    const BgpNeighbor& n = model.bgp->neighbors.at(neighbor);
    auto has = [&](FilterRef::Kind kind) {
      return std::any_of(n.in.begin(), n.in.end(),
                         [&](const FilterRef& f) { return f.kind == kind; });
    };
    if (!has(FilterRef::Kind::kPrefixList)) {
      e.kind = FilterRule::Kind::kBgpPrefixListIn;
      e.name = FreshPrefixListName(snapshot);
      AddNeighborLine(*bgp, neighbor,
                      "neighbor " + neighbor + " prefix-list " + e.name + " in");
    } else if (!has(FilterRef::Kind::kAccessList)) {
      e.kind = FilterRule::Kind::kBgpDistributeListIn;
      e.name = FreeStandardAcl(model);
      AddNeighborLine(*bgp, neighbor,
                      "neighbor " + neighbor + " distribute-list " + e.name +
                          " in");
    } else {
      throw Error(ErrorCode::kConflictingRequirement,
                  "neighbor " + neighbor + " on " + config.hostname +
                      " already has inbound prefix and distribute lists");
    }
    return e;
  }

  std::map<std::pair<std::string, std::string>, Entry> entries_;
};

struct DenyFix {
  std::string router;
  // Neighbor key, or empty for the OSPF filter.
  std::string neighbor;
  Prefix prefix;
  friend auto operator<=>(const DenyFix&, const DenyFix&) = default;
};

struct CostFix {
  DirectedEdge link;
  int64_t cost = 0;
  friend auto operator<=>(const CostFix&, const CostFix&) = default;
};

using Fix = std::variant<DenyFix, CostFix>;

const BgpSession* FindSession(const Simulation& sim, const std::string& local,
                              const std::string& peer) {
  for (const auto& s : sim.sessions) {
    if (s.local == local && s.peer == peer) return &s;
  }
  return nullptr;
}

// Locates the root of one discrepancy by following the current route from
// the discrepant router.
class CulpritFinder {
 public:
  CulpritFinder(const Simulation& sim, const RepairBaseline& baseline,
                const InterAsOptions& options)
      : sim_(sim), baseline_(baseline), options_(options) {}

  std::optional<Fix> Find(const std::string& router, Ipv4 destination) {
    std::set<std::string> visited;
    return Visit(router, destination, visited);
  }

 private:
  bool IsReal(const std::string& router) const {
    return baseline_.fibs.count(router) > 0;
  }

  const Route* CurrentRoute(const std::string& router, Ipv4 destination) const {
    auto it = sim_.fibs.find(router);
    return it == sim_.fibs.end() ? nullptr : it->second.Lookup(destination);
  }

  std::optional<Fix> Visit(const std::string& u, Ipv4 destination,
                           std::set<std::string>& visited) {
    if (!visited.insert(u).second) return std::nullopt;
    const Route* route = CurrentRoute(u, destination);
    if (!route) return std::nullopt;
    switch (route->protocol) {
      case Protocol::kEbgp:
      case Protocol::kIbgp: {
        auto from = sim_.bgp_from.find(u);
        if (from == sim_.bgp_from.end() || !from->second.count(route->prefix)) {
          return std::nullopt;
        }
        const std::string& peer = from->second.at(route->prefix);
        if (!baseline_.sessions.count({u, peer})) {
          return SessionFix(u, peer, *route);
        }
        return Visit(peer, destination, visited);
      }
      case Protocol::kOspf:
      case Protocol::kOspfExternal: {
        if (options_.repair_costs && route->protocol == Protocol::kOspf &&
            IsReal(u)) {
          if (auto fix = CostRaise(u, destination, *route)) return fix;
        }
        for (const std::string& w : HopRouters(route)) {
          if (w == u) continue;
          if (auto fix = Visit(w, destination, visited)) return fix;
        }
        return std::nullopt;
      }
      default:
        return std::nullopt;
    }
  }

  // A route learned over the new session local <- peer.
  std::optional<Fix> SessionFix(const std::string& local,
                                const std::string& peer, const Route& route) {
    const BgpSession* session = FindSession(sim_, local, peer);
    if (!session) return std::nullopt;
    DenyFix here{local, session->neighbor_key, route.prefix};
    if (route.protocol == Protocol::kEbgp || IsReal(peer)) return here;
    if (options_.ibgp_strategy == IbgpStrategy::kFilterNextHop) {
      // The fake next-hop router discards the route where it learned it.
      auto from = sim_.bgp_from.find(peer);
      const Route* at_peer = sim_.fibs.at(peer).Find(route.prefix);
      if (at_peer && at_peer->protocol == Protocol::kEbgp &&
          from != sim_.bgp_from.end() && from->second.count(route.prefix)) {
        const BgpSession* upstream =
            FindSession(sim_, peer, from->second.at(route.prefix));
        if (upstream) return DenyFix{peer, upstream->neighbor_key, route.prefix};
      }
      return here;
    }
    // Block the IGP route towards the fake next hop, so the iBGP route no
    // longer resolves.
    if (route.bgp_next_hop) {
      const Route* igp = sim_.fibs.at(local).Lookup(*route.bgp_next_hop);
      const Fib& stored = baseline_.fibs.at(local);
      if (igp && igp->protocol == Protocol::kOspf &&
          !stored.Find(igp->prefix)) {
        return DenyFix{local, "", igp->prefix};
      }
    }
    return here;
  }

  std::optional<Fix> CostRaise(const std::string& u, Ipv4 destination,
                               const Route& route) {
    const Route* stored = baseline_.fibs.at(u).Lookup(destination);
    std::set<std::string> expected = HopRouters(stored);
    for (const std::string& w : HopRouters(&route)) {
      if (w == u || expected.count(w) || baseline_.ospf_links.count({u, w})) {
        continue;
      }
      auto cost = sim_.ospf.Cost(u, w);
      if (!cost) continue;
      int64_t raise = 1;
      if (stored && stored->protocol == Protocol::kOspf) {
        raise = std::max<int64_t>(1, stored->metric - route.metric + 1);
      }
      int64_t raised = std::min(kCostMax, *cost + raise);
      if (raised == *cost) continue;
      return CostFix{{u, w}, raised};
    }
    return std::nullopt;
  }

  const Simulation& sim_;
  const RepairBaseline& baseline_;
  const InterAsOptions& options_;
};

}  // namespace

void ApplyCosts(Snapshot& snapshot, const CostAssignment& costs) {
  if (costs.empty()) return;
  auto models = InterpretAll(snapshot);
  auto adjacencies = OspfAdjacencies(models, ComputeLinks(models));
  std::set<DirectedEdge> applied;
  for (const auto& adj : adjacencies) {
    const L3Link& l = adj.link;
    if (auto it = costs.find({l.router_a, l.router_b}); it != costs.end()) {
      SetInterfaceCost(snapshot.configs.at(l.router_a), l.iface_a, it->second);
      applied.insert(it->first);
    }
    if (auto it = costs.find({l.router_b, l.router_a}); it != costs.end()) {
      SetInterfaceCost(snapshot.configs.at(l.router_b), l.iface_b, it->second);
      applied.insert(it->first);
    }
  }
  for (const auto& [edge, cost] : costs) {
    if (!applied.count(edge)) {
      throw Error(ErrorCode::kInvalidArgument,
                  "no OSPF link " + edge.first + "->" + edge.second);
    }
  }
}

IntraAsResult IntraAsRepair(Snapshot& anonymized,
                            const RepairBaseline& baseline,
                            unsigned timeout_ms) {
  auto models = InterpretAll(anonymized);
  auto links = ComputeLinks(models);
  CostGraph ospf = BuildCostGraph(models, OspfAdjacencies(models, links));
  auto asns = AssignAsns(models, links);
  std::map<uint32_t, std::vector<PathRequirement>> by_as;
  for (const auto& req : baseline.requirements) by_as[req.as_id].push_back(req);
  IntraAsResult result;
  CostAssignment changes;
  for (const auto& [asn, reqs] : by_as) {
    CostModel model = BuildCostModel(ospf, asns, asn, baseline);
    CegisResult r = CegisRepair(model, reqs, timeout_ms);
    changes.insert(r.log.costs_assigned.begin(), r.log.costs_assigned.end());
    result.logs[asn] = std::move(r.log);
  }
  ApplyCosts(anonymized, changes);
  return result;
}

std::vector<Discrepancy> DiffFibs(const RepairBaseline& baseline,
                                  const FibTable& fibs) {
  std::vector<Discrepancy> out;
  for (const auto& [router, stored] : baseline.fibs) {
    auto it = fibs.find(router);
    for (const auto& [host, address] : baseline.destinations) {
      const Route* before = stored.Lookup(address);
      const Route* after = it == fibs.end() ? nullptr : it->second.Lookup(address);
      std::set<std::string> expected = HopRouters(before);
      std::set<std::string> actual = HopRouters(after);
      if (expected != actual || (before == nullptr) != (after == nullptr)) {
        out.push_back({router, host, std::move(expected), std::move(actual)});
      }
    }
  }
  return out;
}

RepairLog InterAsRepair(Snapshot& anonymized, const RepairBaseline& baseline,
                        const InterAsOptions& options) {
  RepairLog log;
  FilterBook book;
  for (int iteration = 0;; ++iteration) {
    if (iteration == options.max_iterations) {
      throw Error(ErrorCode::kNonConvergence,
                  "forwarding tables still differ after " +
                      std::to_string(options.max_iterations) + " iterations");
    }
    Simulation sim = Simulate(anonymized);
    std::vector<Discrepancy> diffs = DiffFibs(baseline, sim.fibs);
    ++log.iterations;
    log.discrepancies.push_back(static_cast<int>(diffs.size()));
    if (diffs.empty()) {
      log.converged = true;
      return log;
    }
    CulpritFinder finder(sim, baseline, options);
    std::set<DenyFix> denies;
    std::map<DirectedEdge, int64_t> raises;
    for (const Discrepancy& d : diffs) {
      auto fix = finder.Find(d.router, baseline.destinations.at(d.destination));
      if (!fix) continue;
      if (auto* deny = std::get_if<DenyFix>(&*fix)) {
        denies.insert(*deny);
      } else {
        const CostFix& raise = std::get<CostFix>(*fix);
        int64_t& cost = raises[raise.link];
        cost = std::max(cost, raise.cost);
      }
    }
    bool progress = false;
    for (const DenyFix& d : denies) {
      if (auto rule = book.Deny(anonymized, d.router, d.neighbor, d.prefix)) {
        log.filters_added.emplace_back(d.router, *rule);
        progress = true;
      }
    }
    if (!raises.empty()) {
      ApplyCosts(anonymized, raises);
      for (const auto& [edge, cost] : raises) log.costs_assigned[edge] = cost;
      progress = true;
    }
    if (!progress) {
      log.converged = false;
      return log;
    }
  }
}

std::string_view FilterRuleKindName(FilterRule::Kind kind) {
  switch (kind) {
    case FilterRule::Kind::kBgpPrefixListIn: return "bgp-prefix-list-in";
    case FilterRule::Kind::kBgpDistributeListIn: return "bgp-distribute-list-in";
    case FilterRule::Kind::kOspfDistributeListIn: return "ospf-distribute-list-in";
  }
  return "";
}

std::string_view IbgpStrategyName(IbgpStrategy strategy) {
  switch (strategy) {
    case IbgpStrategy::kFilterNextHop: return "filter-nexthop";
    case IbgpStrategy::kBlockIgp: return "block-igp";
  }
  return "";
}

std::optional<IbgpStrategy> ParseIbgpStrategy(std::string_view name) {
  if (name == "filter-nexthop") return IbgpStrategy::kFilterNextHop;
  if (name == "block-igp") return IbgpStrategy::kBlockIgp;
  return std::nullopt;
}

}  // namespace netcloak
