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
// File: sampling.h
// -----------------------------------------------------------------------------
//
// Graph sampling over reference topologies: traversal-based (BFS, DFS, RFS,
// snowball, forest fire) and random-walk-based (RW, Metropolis-Hastings RW,
// delayed-acceptance MH, rejection-controlled MH) strategies. Every strategy
// returns the subgraph induced by the visited nodes and is fully determined by
// its seed.

#ifndef NETCLOAK_SAMPLING_H_
#define NETCLOAK_SAMPLING_H_

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "netcloak/topology.h"

namespace netcloak {

enum class SamplingKind { kBfs, kDfs, kRfs, kSbs, kFfs, kRw, kMhrw, kMhda, kRcmh };

std::string_view SamplingKindName(SamplingKind kind);
std::optional<SamplingKind> ParseSamplingKind(std::string_view name);
const std::vector<SamplingKind>& AllSamplingKinds();

struct SamplingStrategy {
  SamplingKind kind = SamplingKind::kRw;
  // Forest fire: probability parameter of the geometric burn count; a node
  // ignites on average p / (1 - p) unvisited neighbors.
  double fire_probability = 0.7;
  // Snowball: number of neighbors each member recruits per wave.
  int snowball_width = 2;
  // Rejection-controlled MH: exponent of the acceptance ratio
  // (deg(v) / deg(w))^alpha; 1 is plain MHRW, 0 is a simple random walk.
  double rcmh_alpha = 0.5;
  uint64_t seed = 0;
};

// Samples `n` distinct routers of `ref` and returns their induced subgraph.
// Requires 1 <= n <= |routers|. Throws kUnreachableTarget if the component of
// the starting node holds fewer than `n` routers, kInvalidArgument if `n` is
// out of range.
Topology SampleSubgraph(const Topology& ref, int n,
                        const SamplingStrategy& strategy);

}  // namespace netcloak

#endif  // NETCLOAK_SAMPLING_H_
