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
// File: repair.h
// -----------------------------------------------------------------------------
//
// Route repair after expansion. Inside each AS, OSPF link costs of fake links
// are synthesized with an SMT encoding of the original shortest paths and
// refined by counterexample-guided iterations (CEGIS) against an independent
// Dijkstra oracle. Across ASes, forwarding tables are compared with the stored
// original ones and discrepancies are resolved by adding deny filters on new
// BGP sessions.
//
// Original links keep their costs and original filters are never edited:
// repair only touches fake links, fake routers and the lines configuration
// generation added to real routers.

#ifndef NETCLOAK_REPAIR_H_
#define NETCLOAK_REPAIR_H_

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "netcloak/ipv4.h"
#include "netcloak/simulator.h"
#include "netcloak/snapshot.h"

namespace netcloak {

// A directed link (from, to).
using DirectedEdge = std::pair<std::string, std::string>;

inline constexpr int64_t kCostMax = 65535;
// Costs are first searched in [1, kInitialCostBound]; the bound escalates to
// kCostMax when that is unsatisfiable.
inline constexpr int64_t kInitialCostBound = 1000;
inline constexpr int kMaxInterAsIterations = 50;
inline constexpr int kMaxIterativeIterations = 200;

struct PathRequirement {
  enum class Kind { kPrimary, kEcmp };
  Kind kind = Kind::kPrimary;
  std::string src;
  std::string dst;
  // The required route (kPrimary).
  Path path;
  // The required load-balanced routes (kEcmp).
  std::set<Path> paths;
  uint32_t as_id = 0;

  // {path} for kPrimary, `paths` for kEcmp.
  std::set<Path> Routes() const;

  friend bool operator==(const PathRequirement&, const PathRequirement&) =
      default;
};

std::string RequirementName(const PathRequirement& req);

struct CostModel {
  // Directed links with their current costs.
  CostGraph graph;
  // Links whose cost is pinned to its value in `graph`.
  std::set<DirectedEdge> fixed;
  int64_t cost_max = kCostMax;
};

using CostAssignment = std::map<DirectedEdge, int64_t>;

// `graph` with the costs of `costs` substituted.
CostGraph WithCosts(const CostGraph& graph, const CostAssignment& costs);

// Independent Dijkstra check: a kPrimary path must be the unique shortest
// path (every node's predecessor set is exactly its path predecessor); for
// kEcmp, every node on the requested routes must have exactly the requested
// predecessors.
bool SatisfiedBy(const PathRequirement& req, const CostGraph& graph);

// Checks the requirement's shape against `graph`: endpoints match and every
// hop is a link. Throws kPathNotInGraph otherwise.
void CheckRequirement(const PathRequirement& req, const CostGraph& graph);

// How path requirements become constraints.
enum class CostEncoding {
  // Shortest-path potentials: per source, pi(s) = 0 and pi(y) <= pi(x) +
  // cost(x, y) on every link, so pi never exceeds the true distance. For a
  // requested route with prefix costs D, pi(v) >= D(v) on every route node,
  // equal-cost requested branches, and pi(u) + cost(u, v) >= D(v) + 1 for
  // every other in-neighbor u. A pure conjunction of linear inequalities,
  // equivalent to the predecessor encoding (distances are a witness for pi).
  kPotential,
  // The explicit encoding of exact shortest costs and predecessor variables
  // below (EncodePrimary / EncodeEcmp), rich in disjunctions.
  kPredecessor,
};

std::string_view CostEncodingName(CostEncoding encoding);

// Accumulated constraints over one cost model. Constraints of requirements
// sharing a source share that source's shortest-cost variables.
class ConstraintSet {
 public:
  explicit ConstraintSet(CostModel model,
                         CostEncoding encoding = CostEncoding::kPotential);
  ~ConstraintSet();
  ConstraintSet(ConstraintSet&&) noexcept;
  ConstraintSet& operator=(ConstraintSet&&) noexcept;

  const CostModel& model() const;
  CostEncoding encoding() const;
  // Number of requirements encoded so far.
  int size() const;
  // Number of sources with shortest-cost variables.
  int num_sources() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;

  friend void EncodePrimary(const PathRequirement& req, ConstraintSet& set);
  friend void EncodeEcmp(const PathRequirement& req, ConstraintSet& set);
  friend void EncodePotential(const PathRequirement& req, ConstraintSet& set);
  friend CostAssignment SolveCosts(const ConstraintSet& set,
                                   unsigned timeout_ms);
};

// For source s (once per source): scost(s) = 0, and for every other node v
// reachable from s, scost(v) <= scost(u) + cost(u, v) on every link u -> v with
// equality on at least one (scost is the exact shortest cost). For every node
// v2 on the path and link v1 -> v2:
//   hasAlt(v1, v2) := exists v3 != v1: scost(v3) + cost(v3, v2)
//                                      <= scost(v1) + cost(v1, v2),
//   !hasAlt => scost(v2) = scost(v1) + cost(v1, v2) and pred(v2) = v1,
//   hasAlt => pred(v2) != v1,
// and pred(path[i]) = path[i - 1]. Throws kPathNotInGraph.
void EncodePrimary(const PathRequirement& req, ConstraintSet& set);

// Shares the source's scost variables; for every node v2 on the requested
// routes and link v1 -> v2: (scost(v2) = scost(v1) + cost(v1, v2)) <=> v1 in
// preds(v2), and preds(v2) is exactly the set of requested predecessors.
// Throws kPathNotInGraph.
void EncodeEcmp(const PathRequirement& req, ConstraintSet& set);

// The potential encoding of a requirement of either kind (see
// CostEncoding::kPotential). Throws kPathNotInGraph.
void EncodePotential(const PathRequirement& req, ConstraintSet& set);

// Dispatches on the set's encoding and the requirement's kind.
void Encode(const PathRequirement& req, ConstraintSet& set);

// Integer costs for every unpinned link, within [1, kInitialCostBound] if
// possible and else within [1, cost_max]. Throws kUnsat and kSolverTimeout.
CostAssignment SolveCosts(const ConstraintSet& set,
                          unsigned timeout_ms = 60000);

struct FilterRule {
  enum class Kind {
    // `neighbor <peer> prefix-list <name> in` on the BGP session.
    kBgpPrefixListIn,
    // `neighbor <peer> distribute-list <acl> in` on the BGP session.
    kBgpDistributeListIn,
    // `distribute-list prefix <name> in` under `router ospf`.
    kOspfDistributeListIn,
  };
  Kind kind = Kind::kBgpPrefixListIn;
  // The neighbor address for BGP rules; empty for OSPF rules.
  std::string neighbor;
  // The filter's name (prefix list or access list).
  std::string name;
  Prefix denied;

  friend auto operator<=>(const FilterRule&, const FilterRule&) = default;
};

std::string_view FilterRuleKindName(FilterRule::Kind kind);

struct RepairLog {
  int iterations = 0;
  std::vector<std::pair<std::string, FilterRule>> filters_added;
  // Final costs of the links repair changed.
  std::map<DirectedEdge, int64_t> costs_assigned;
  bool converged = false;
  // Inter-AS loops: discrepancy count observed by each iteration.
  std::vector<int> discrepancies;
};

struct CegisResult {
  // Costs of every unpinned link after repair.
  CostAssignment costs;
  RepairLog log;
};

// Verifies every requirement on the current costs; violated requirements form
// the active set. While some requirement is violated: encode the active set,
// solve, verify all, and add the violated ones. `log.iterations` counts
// solves (1 when nothing was violated). Changes that turn out unnecessary are
// reverted afterwards, so `log.costs_assigned` lists only needed changes.
// Throws kUnsat, kSolverTimeout, kPathNotInGraph.
CegisResult CegisRepair(const CostModel& model,
                        const std::vector<PathRequirement>& reqs,
                        unsigned timeout_ms = 60000,
                        CostEncoding encoding = CostEncoding::kPotential);

// ---------------------------------------------------------------------------
// Snapshot-level repair.
// ---------------------------------------------------------------------------

enum class IbgpStrategy { kFilterNextHop, kBlockIgp };

std::string_view IbgpStrategyName(IbgpStrategy strategy);
std::optional<IbgpStrategy> ParseIbgpStrategy(std::string_view name);

// Everything recorded about the original network before anonymization.
struct RepairBaseline {
  // Stored forwarding tables of every real router.
  FibTable fibs;
  // Original BGP sessions as (local, peer).
  std::set<std::pair<std::string, std::string>> sessions;
  // Original OSPF links; their costs are pinned.
  std::set<DirectedEdge> ospf_links;
  // Original host -> address; the destinations FIBs are compared on.
  std::map<std::string, Ipv4> destinations;
  std::vector<PathRequirement> requirements;
  std::map<std::string, uint32_t> asns;
};

// Intra-AS requirements from the original OSPF shortest paths, per AS:
//   (1) between the gateways of the AS's hosts;
//   (2) from each gateway to each AS boundary router, and back;
//   (3) between the AS boundary routers.
// kPrimary when the original has one shortest path, kEcmp when several.
// Pairs without an OSPF path are skipped.
std::vector<PathRequirement> ExtractRequirements(const Snapshot& original,
                                                 const Simulation& sim);
std::vector<PathRequirement> ExtractRequirements(const Snapshot& original);

RepairBaseline PrepareRepair(const Snapshot& original);

// The cost model of `asn` in `anonymized`: its OSPF links, with the original
// ones pinned.
CostModel BuildCostModel(const CostGraph& ospf,
                         const std::map<std::string, uint32_t>& asns,
                         uint32_t asn, const RepairBaseline& baseline);

// Writes `ip ospf cost` on the sending interface of every listed link.
void ApplyCosts(Snapshot& snapshot, const CostAssignment& costs);

struct IntraAsResult {
  // Per AS.
  std::map<uint32_t, RepairLog> logs;
};

// CEGIS per AS over the baseline's requirements, then ApplyCosts.
IntraAsResult IntraAsRepair(Snapshot& anonymized,
                            const RepairBaseline& baseline,
                            unsigned timeout_ms = 60000);

struct Discrepancy {
  std::string router;
  std::string destination;
  // Stored and current next-hop routers.
  std::set<std::string> expected;
  std::set<std::string> actual;

  friend auto operator<=>(const Discrepancy&, const Discrepancy&) = default;
};

// Compares every stored router's route towards each destination
// (longest-prefix match, the default route last) by next-hop routers.
std::vector<Discrepancy> DiffFibs(const RepairBaseline& baseline,
                                  const FibTable& fibs);

struct InterAsOptions {
  IbgpStrategy ibgp_strategy = IbgpStrategy::kFilterNextHop;
  // Also raise fake OSPF link costs on intra-AS discrepancies (the purely
  // iterative baseline).
  bool repair_costs = false;
  int max_iterations = kMaxInterAsIterations;
};

// Loop: simulate, diff against the stored tables, and fix each discrepancy at
// its root: a route learned over a new eBGP session is denied inbound on that
// session; a route learned over a new iBGP session is handled by the iBGP
// strategy (deny at the fake next-hop router, or block the IGP route to the
// next hop); with `repair_costs`, a fake OSPF link the route wrongly uses is
// made more expensive. Stops when the diff is empty (`converged`) or no fix
// applies. Throws kNonConvergence after `max_iterations`.
RepairLog InterAsRepair(Snapshot& anonymized, const RepairBaseline& baseline,
                        const InterAsOptions& options = {});

}  // namespace netcloak

#endif  // NETCLOAK_REPAIR_H_
