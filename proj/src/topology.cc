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
#include <cstdlib>
#include <deque>
#include <fstream>
#include <numeric>
#include <sstream>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include "netcloak/error.h"

namespace netcloak {

Edge MakeEdge(const std::string& a, const std::string& b) {
  return a < b ? Edge(a, b) : Edge(b, a);
}

void Topology::AddNode(const std::string& id, NodeKind kind, uint32_t asn) {
  NodeData& data = nodes_[id];
  data.kind = kind;
  data.asn = asn;
}

bool Topology::HasNode(std::string_view id) const {
  return nodes_.find(id) != nodes_.end();
}

void Topology::RemoveNode(const std::string& id) {
  auto it = nodes_.find(id);
  if (it == nodes_.end()) return;
  for (const auto& n : it->second.neighbors) {
    nodes_.find(n)->second.neighbors.erase(id);
  }
  nodes_.erase(it);
}

bool Topology::AddEdge(const std::string& a, const std::string& b) {
  if (a == b) return false;
  auto ia = nodes_.find(a);
  auto ib = nodes_.find(b);
  if (ia == nodes_.end() || ib == nodes_.end()) return false;
  if (!ia->second.neighbors.insert(b).second) return false;
  ib->second.neighbors.insert(a);
  return true;
}

bool Topology::RemoveEdge(const std::string& a, const std::string& b) {
  auto ia = nodes_.find(a);
  auto ib = nodes_.find(b);
  if (ia == nodes_.end() || ib == nodes_.end()) return false;
  if (ia->second.neighbors.erase(b) == 0) return false;
  ib->second.neighbors.erase(a);
  return true;
}

bool Topology::HasEdge(std::string_view a, std::string_view b) const {
  auto ia = nodes_.find(a);
  if (ia == nodes_.end()) return false;
  return ia->second.neighbors.count(std::string(b)) > 0;
}

int Topology::Degree(std::string_view id) const {
  auto it = nodes_.find(id);
  return it == nodes_.end() ? 0 : static_cast<int>(it->second.neighbors.size());
}

const std::set<std::string>& Topology::Neighbors(std::string_view id) const {
  static const std::set<std::string> kEmpty;
  auto it = nodes_.find(id);
  return it == nodes_.end() ? kEmpty : it->second.neighbors;
}

NodeKind Topology::Kind(std::string_view id) const {
  auto it = nodes_.find(id);
  return it == nodes_.end() ? NodeKind::kRouter : it->second.kind;
}

uint32_t Topology::Asn(std::string_view id) const {
  auto it = nodes_.find(id);
  return it == nodes_.end() ? 0 : it->second.asn;
}

void Topology::SetAsn(const std::string& id, uint32_t asn) {
  auto it = nodes_.find(id);
  if (it != nodes_.end()) it->second.asn = asn;
}

std::vector<std::string> Topology::Nodes() const {
  std::vector<std::string> ids;
  ids.reserve(nodes_.size());
  for (const auto& [id, _] : nodes_) ids.push_back(id);
  return ids;
}

std::vector<std::string> Topology::Routers() const {
  std::vector<std::string> ids;
  for (const auto& [id, data] : nodes_) {
    if (data.kind == NodeKind::kRouter) ids.push_back(id);
  }
  return ids;
}

std::vector<std::string> Topology::Hosts() const {
  std::vector<std::string> ids;
  for (const auto& [id, data] : nodes_) {
    if (data.kind == NodeKind::kHost) ids.push_back(id);
  }
  return ids;
}

std::vector<Edge> Topology::Edges() const {
  std::vector<Edge> edges;
  for (const auto& [id, data] : nodes_) {
    for (const auto& n : data.neighbors) {
      if (id < n) edges.emplace_back(id, n);
    }
  }
  return edges;
}

size_t Topology::NumEdges() const {
  size_t twice = 0;
  for (const auto& [_, data] : nodes_) twice += data.neighbors.size();
  return twice / 2;
}

Topology Topology::RouterSubgraph() const {
  std::set<std::string> routers;
  for (const auto& [id, data] : nodes_) {
    if (data.kind == NodeKind::kRouter) routers.insert(id);
  }
  return InducedSubgraph(routers);
}

Topology Topology::InducedSubgraph(const std::set<std::string>& ids) const {
  Topology sub;
  for (const auto& id : ids) {
    auto it = nodes_.find(id);
    if (it != nodes_.end()) sub.AddNode(id, it->second.kind, it->second.asn);
  }
  for (const auto& id : ids) {
    for (const auto& n : Neighbors(id)) {
      if (id < n && ids.count(n)) sub.AddEdge(id, n);
    }
  }
  return sub;
}

std::vector<std::vector<std::string>> Topology::Components() const {
  std::vector<std::vector<std::string>> components;
  std::set<std::string> seen;
  for (const auto& [start, _] : nodes_) {
    if (seen.count(start)) continue;
    std::vector<std::string> component;
    std::deque<std::string> queue{start};
    seen.insert(start);
    while (!queue.empty()) {
      std::string u = queue.front();
      queue.pop_front();
      component.push_back(u);
      for (const auto& v : Neighbors(u)) {
        if (seen.insert(v).second) queue.push_back(v);
      }
    }
    std::sort(component.begin(), component.end());
    components.push_back(std::move(component));
  }
  return components;
}

bool Topology::IsConnected() const { return Components().size() <= 1; }

bool operator==(const Topology& a, const Topology& b) {
  if (a.nodes_.size() != b.nodes_.size()) return false;
  for (auto ia = a.nodes_.begin(), ib = b.nodes_.begin(); ia != a.nodes_.end();
       ++ia, ++ib) {
    if (ia->first != ib->first || ia->second.kind != ib->second.kind ||
        ia->second.asn != ib->second.asn ||
        ia->second.neighbors != ib->second.neighbors) {
      return false;
    }
  }
  return true;
}

std::vector<int> DegreeSequence(const Topology& topology, bool routers_only) {
  std::vector<int> degrees;
  for (const auto& id : topology.Nodes()) {
    if (routers_only && topology.Kind(id) != NodeKind::kRouter) continue;
    int degree = 0;
    for (const auto& n : topology.Neighbors(id)) {
      if (!routers_only || topology.Kind(n) == NodeKind::kRouter) ++degree;
    }
    degrees.push_back(degree);
  }
  std::sort(degrees.rbegin(), degrees.rend());
  return degrees;
}

double KsDistance(const std::vector<int>& a, const std::vector<int>& b) {
  if (a.empty() || b.empty()) {
    throw Error(ErrorCode::kEmptySequence, "K-S distance of an empty sample");
  }
  std::vector<int> sa = a;
  std::vector<int> sb = b;
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  const int64_t na = static_cast<int64_t>(sa.size());
  const int64_t nb = static_cast<int64_t>(sb.size());
  // Walk the merged support; compare counts scaled to a common denominator so
  // that the maximum is found exactly before the single division.
  int64_t best = 0;
  size_t i = 0;
  size_t j = 0;
  while (i < sa.size() || j < sb.size()) {
    int x;
    if (j >= sb.size() || (i < sa.size() && sa[i] <= sb[j])) {
      x = sa[i];
    } else {
      x = sb[j];
    }
    while (i < sa.size() && sa[i] == x) ++i;
    while (j < sb.size() && sb[j] == x) ++j;
    int64_t diff = static_cast<int64_t>(i) * nb - static_cast<int64_t>(j) * na;
    best = std::max<int64_t>(best, diff < 0 ? -diff : diff);
  }
  return static_cast<double>(best) / static_cast<double>(na * nb);
}

double Rationality(const Topology& anonymized, const Topology& reference) {
  return KsDistance(DegreeSequence(anonymized), DegreeSequence(reference));
}

std::map<std::string, RouterModel> InterpretAll(const Snapshot& snapshot) {
  std::map<std::string, RouterModel> models;
  for (const auto& [name, config] : snapshot.configs) {
    models.emplace(name, Interpret(config));
  }
  return models;
}

std::vector<L3Link> ComputeLinks(
    const std::map<std::string, RouterModel>& models) {
  struct Attachment {
    std::string router;
    std::string iface;
    Ipv4 ip;
  };
  std::map<Prefix, std::vector<Attachment>> by_subnet;
  for (const auto& [name, model] : models) {
    for (const auto& iface : model.interfaces) {
      if (iface.shutdown || !iface.subnet || iface.subnet->length() >= 32) {
        continue;
      }
      by_subnet[*iface.subnet].push_back({name, iface.name, *iface.address});
    }
  }
  std::vector<L3Link> links;
  for (const auto& [subnet, attachments] : by_subnet) {
    std::set<std::string> routers;
    for (const auto& a : attachments) routers.insert(a.router);
    if (routers.size() >= 3) {
      throw Error(ErrorCode::kAmbiguousSubnet,
                  subnet.ToString() + " is shared by " +
                      std::to_string(routers.size()) + " routers");
    }
    if (routers.size() < 2) continue;
    const Attachment* a = &attachments[0];
    const Attachment* b = nullptr;
    for (const auto& candidate : attachments) {
      if (candidate.router != a->router) {
        b = &candidate;
        break;
      }
    }
    if (b->router < a->router) std::swap(a, b);
    links.push_back({a->router, a->iface, a->ip, b->router, b->iface, b->ip,
                     subnet});
  }
  return links;
}

namespace {

// True if `iface` of `model` is covered by an OSPF network statement.
bool OspfEnabled(const RouterModel& model, const std::string& iface_name) {
  if (!model.ospf) return false;
  const InterfaceConfig* iface = model.FindInterface(iface_name);
  if (!iface || !iface->address) return false;
  for (const auto& network : model.ospf->networks) {
    if (network.Contains(*iface->address)) return true;
  }
  return false;
}

}  // namespace

std::map<std::string, uint32_t> AssignAsns(
    const std::map<std::string, RouterModel>& models,
    const std::vector<L3Link>& links) {
  std::map<std::string, uint32_t> asn;
  std::map<std::string, std::vector<std::string>> ospf_neighbors;
  for (const auto& link : links) {
    const auto& ma = models.at(link.router_a);
    const auto& mb = models.at(link.router_b);
    if (OspfEnabled(ma, link.iface_a) && OspfEnabled(mb, link.iface_b)) {
      ospf_neighbors[link.router_a].push_back(link.router_b);
      ospf_neighbors[link.router_b].push_back(link.router_a);
    }
  }
  // Seed with BGP speakers in ASN order so the smallest ASN wins ties.
  std::vector<std::pair<uint32_t, std::string>> seeds;
  for (const auto& [name, model] : models) {
    if (model.bgp) seeds.emplace_back(model.bgp->asn, name);
  }
  std::sort(seeds.begin(), seeds.end());
  std::deque<std::string> queue;
  for (const auto& [a, name] : seeds) {
    asn[name] = a;
    queue.push_back(name);
  }
  while (!queue.empty()) {
    std::string u = queue.front();
    queue.pop_front();
    for (const auto& v : ospf_neighbors[u]) {
      if (asn.count(v) || models.at(v).bgp) continue;
      asn[v] = asn[u];
      queue.push_back(v);
    }
  }
  for (const auto& [name, _] : models) asn.emplace(name, 0);
  return asn;
}

Topology ExtractTopology(const Snapshot& snapshot) {
  auto models = InterpretAll(snapshot);
  auto links = ComputeLinks(models);
  auto asns = AssignAsns(models, links);
  Topology topology;
  for (const auto& [name, _] : models) {
    topology.AddNode(name, NodeKind::kRouter, asns[name]);
  }
  for (const auto& link : links) topology.AddEdge(link.router_a, link.router_b);
  for (const auto& [name, host] : snapshot.hosts) {
    auto it = models.find(host.gateway_router);
    if (it == models.end()) {
      throw Error(ErrorCode::kOrphanHost,
                  name + ": unknown gateway router " + host.gateway_router);
    }
    bool attached = false;
    for (const auto& iface : it->second.interfaces) {
      if (!iface.shutdown && iface.subnet &&
          iface.subnet->Contains(host.iface_ip) &&
          iface.subnet->Contains(host.gateway_ip)) {
        attached = true;
        break;
      }
    }
    if (!attached) {
      throw Error(ErrorCode::kOrphanHost,
                  name + ": no interface of " + host.gateway_router +
                      " covers " + host.iface_ip.ToString());
    }
    topology.AddNode(name, NodeKind::kHost, asns[host.gateway_router]);
    topology.AddEdge(name, host.gateway_router);
  }
  return topology;
}

Topology ParseGraphml(std::string_view xml) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    std::istringstream in{std::string(xml)};
    pt::read_xml(in, tree);
  } catch (const pt::ptree_error& e) {
    throw Error(ErrorCode::kGraphmlParse, e.what());
  }
  auto graphml = tree.get_child_optional("graphml");
  if (!graphml) throw Error(ErrorCode::kGraphmlParse, "no <graphml> element");
  auto graph = graphml->get_child_optional("graph");
  if (!graph) throw Error(ErrorCode::kGraphmlParse, "no <graph> element");
  Topology topology;
  std::vector<std::pair<std::string, std::string>> edges;
  for (const auto& [tag, child] : *graph) {
    if (tag == "node") {
      auto id = child.get_optional<std::string>("<xmlattr>.id");
      if (!id) throw Error(ErrorCode::kGraphmlParse, "node without id");
      topology.AddNode(*id);
    } else if (tag == "edge") {
      auto source = child.get_optional<std::string>("<xmlattr>.source");
      auto target = child.get_optional<std::string>("<xmlattr>.target");
      if (!source || !target) {
        throw Error(ErrorCode::kGraphmlParse, "edge without endpoints");
      }
      edges.emplace_back(*source, *target);
    }
  }
  for (const auto& [a, b] : edges) {
    if (!topology.HasNode(a) || !topology.HasNode(b)) {
      throw Error(ErrorCode::kGraphmlParse, "edge to unknown node");
    }
    topology.AddEdge(a, b);
  }
  return topology;
}

std::vector<ReferenceGraph> LoadReferenceLibrary(
    const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) {
    throw Error(ErrorCode::kIo, "no reference directory " + dir.string());
  }
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.path().extension() == ".graphml") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<ReferenceGraph> library;
  for (const auto& path : files) {
    std::ifstream in(path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    try {
      library.push_back({path.stem().string(), ParseGraphml(buffer.str())});
    } catch (const Error& e) {
      throw Error(e.code(), path.filename().string() + ": " + e.what());
    }
  }
  return library;
}

}  // namespace netcloak
