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
// File: similarity.h
// -----------------------------------------------------------------------------
//
// Metrics of how well generated configurations blend in and how much path
// diversity an anonymized network exposes.
//
// Configuration similarity has three components, each in [0, 1]:
//   * stanza: cosine similarity of the stanza-kind frequency vectors;
//   * command: mean, over stanzas aligned by kind and occurrence index, of the
//     Jaccard similarity of their parameter-stripped command sets;
//   * order: fraction of concordant pairs among the stanza kinds both
//     configurations use, ordered by first occurrence.
// The overall score is their weighted sum.

#ifndef NETCLOAK_SIMILARITY_H_
#define NETCLOAK_SIMILARITY_H_

#include <map>
#include <set>
#include <string>

#include "netcloak/config_model.h"
#include "netcloak/simulator.h"
#include "netcloak/snapshot.h"

namespace netcloak {

struct SimilarityWeights {
  double stanza = 0.2;
  double cmd = 0.5;
  double order = 0.3;
};

struct SimilarityReport {
  double sim_stanza = 0;
  double sim_cmd = 0;
  double sim_order = 0;
  double overall = 0;
  SimilarityWeights weights;
  // The configuration that attained the reported maximum.
  std::string best_match;
};

double StanzaSimilarity(const RouterConfig& a, const RouterConfig& b);
double CommandSimilarity(const RouterConfig& a, const RouterConfig& b);
double OrderSimilarity(const RouterConfig& a, const RouterConfig& b);

// The weighted sum of the three components. Throws kInvalidArgument unless
// the weights are non-negative and sum to 1.
double CombineSimilarity(double sim_stanza, double sim_cmd, double sim_order,
                         const SimilarityWeights& weights = {});

// Throws kInvalidArgument unless the weights are non-negative and sum to 1.
SimilarityReport CompareConfigs(const RouterConfig& a, const RouterConfig& b,
                                const SimilarityWeights& weights = {});

// The report of the real configuration with the highest overall score (ties
// to the smallest hostname). Throws kInvalidArgument if `reals` is empty.
SimilarityReport Similarity(const RouterConfig& fake,
                            const std::map<std::string, RouterConfig>& reals,
                            const SimilarityWeights& weights = {});

struct PathAnonymity {
  // Mean number of distinct router-level paths per ordered egress pair.
  double n_r = 0;
  int pairs = 0;
};

// Over ordered pairs of distinct routers of `egress`, counts the distinct
// router-level paths (host endpoints dropped) of every data-plane entry whose
// paths start at the first router and end at the second, and averages the
// counts. Pairs without any path count as zero.
PathAnonymity ComputePathAnonymity(const DataPlane& dataplane,
                                   const std::set<std::string>& egress);

// Routers serving at least one host of `snapshot`.
std::set<std::string> EgressRouters(const Snapshot& snapshot);

}  // namespace netcloak

#endif  // NETCLOAK_SIMILARITY_H_
