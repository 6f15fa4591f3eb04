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
// File: anonymization.h
// -----------------------------------------------------------------------------
//
// k-degree mapping anonymity (k-DMA) over expanded router graphs.
//
// With the original degrees sorted descending, d_1 >= d_2 >= ... >= d_n, an
// expanded graph is
//   * weakly k-DMA   if for every i at least k of its routers have degree
//                    >= d_i, and
//   * strongly k-DMA if for every i at least k + i - 1 of them do.
//
// Three anonymizers are provided: a greedy edge-adding one, an exact
// weighted-MaxSMT one that embeds and anonymizes in a single optimization,
// and a classic k-degree anonymity (k-DA) baseline. All of them only add
// edges and all degrees are router-router degrees; hosts are carried along.

#ifndef NETCLOAK_ANONYMIZATION_H_
#define NETCLOAK_ANONYMIZATION_H_

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>

#include "netcloak/expansion.h"
#include "netcloak/topology.h"

namespace netcloak {

enum class KdmaLevel { kWeak, kStrong };

std::string_view KdmaLevelName(KdmaLevel level);
std::optional<KdmaLevel> ParseKdmaLevel(std::string_view name);

struct AnonymityParams {
  int k_routers = 2;
  // Every real host ends up on an egress router serving >= k_hosts hosts;
  // applied by configuration generation.
  int k_hosts = 2;
  KdmaLevel level = KdmaLevel::kStrong;
  // Added routers = mul x original routers when no explicit count is given.
  int mul = 1;
};

// Throws kInvalidK unless every field is >= 1.
void ValidateParams(const AnonymityParams& params);

// Checks weak or strong k-DMA of `anonymized` against the router degrees of
// `original`.
bool CheckKdma(const Topology& original, const Topology& anonymized, int k,
               KdmaLevel level);

// True iff every router degree of `graph` occurs at least k times.
bool CheckKda(const Topology& graph, int k);

// Greedy k-DMA: for each original degree d_i (descending) raises the
// highest-degree routers below d_i up to d_i until the level's count holds.
// Routers not in `original` count as fake; new edges prefer fake endpoints,
// drawn in seeded random order, and never duplicate edges. Throws
// kInfeasible when too few distinct endpoints exist.
Topology KdmaGreedy(const Topology& original, const Topology& embedded,
                    int k, KdmaLevel level, uint64_t seed);

struct MaxSmtResult {
  Topology graph;
  // Fake router id -> reference node.
  std::map<std::string, std::string> fake_to_ref;
  // Sum over routers of |degree - reference degree| at the optimum.
  int objective = 0;
};

// All-in-one embedding and strong k-DMA as weighted MaxSMT over one Boolean
// per router pair of the reference: original edges (under `mapping`) are
// pinned, and for each i at least k + i - 1 routers have degree >= d_i; the
// objective minimizes the summed gap to the reference degrees. Degrees are
// cardinality constraints and each unit of gap is one soft clause. Among
// optimal graphs, one with a smaller K-S distance to the reference is
// preferred (a tie-break under a deterministic solver work budget; the
// objective is never traded for it). Throws kUnsatisfiable when the hard
// constraints conflict and kSolverTimeout when the optimization gives up
// within `timeout_ms`.
MaxSmtResult KdmaMaxSmt(const Topology& original, const Topology& ref,
                        const NodeMapping& mapping, int k,
                        unsigned timeout_ms = 30000);

// k-degree anonymity baseline: groups the sorted degree sequence into runs of
// at least k raised to the run maximum (minimum total raise, by dynamic
// programming), then realizes the raises as new edges between routers that
// both need them. Unrealizable targets are retried with small seeded
// perturbations of low degrees. Throws kInfeasible.
Topology KdaBaseline(const Topology& graph, int k, uint64_t seed);

}  // namespace netcloak

#endif  // NETCLOAK_ANONYMIZATION_H_
