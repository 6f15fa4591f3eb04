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
// File: similarity.cc
// -----------------------------------------------------------------------------

#include "netcloak/similarity.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <vector>

#include "netcloak/error.h"

namespace netcloak {
namespace {

std::array<double, kNumStanzaKinds> KindCounts(const RouterConfig& config) {
  std::array<double, kNumStanzaKinds> counts{};
  for (const Stanza& s : config.stanzas) counts[static_cast<int>(s.kind)] += 1;
  return counts;
}

std::set<std::string> CommandKeys(const Stanza& stanza) {
  std::set<std::string> keys;
  if (stanza.block) keys.insert(stanza.header.KeywordKey());
  for (const Command& c : stanza.commands) keys.insert(c.KeywordKey());
  return keys;
}

double Jaccard(const std::set<std::string>& a, const std::set<std::string>& b) {
  if (a.empty() && b.empty()) return 1.0;
  size_t common = 0;
  for (const auto& x : a) common += b.count(x);
  return static_cast<double>(common) /
         static_cast<double>(a.size() + b.size() - common);
}

std::vector<StanzaKind> FirstOccurrenceOrder(const RouterConfig& config) {
  std::vector<StanzaKind> order;
  for (const Stanza& s : config.stanzas) {
    if (std::find(order.begin(), order.end(), s.kind) == order.end()) {
      order.push_back(s.kind);
    }
  }
  return order;
}

void ValidateWeights(const SimilarityWeights& w) {
  if (w.stanza < 0 || w.cmd < 0 || w.order < 0 ||
      std::abs(w.stanza + w.cmd + w.order - 1.0) > 1e-9) {
    throw Error(ErrorCode::kInvalidArgument,
                "similarity weights must be non-negative and sum to 1");
  }
}

}  // namespace

double StanzaSimilarity(const RouterConfig& a, const RouterConfig& b) {
  auto ca = KindCounts(a);
  auto cb = KindCounts(b);
  double dot = 0, na = 0, nb = 0;
  for (int i = 0; i < kNumStanzaKinds; ++i) {
    dot += ca[i] * cb[i];
    na += ca[i] * ca[i];
    nb += cb[i] * cb[i];
  }
  if (na == 0 && nb == 0) return 1.0;
  if (na == 0 || nb == 0) return 0.0;
  return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), 0.0, 1.0);
}

double CommandSimilarity(const RouterConfig& a, const RouterConfig& b) {
  std::map<StanzaKind, std::vector<const Stanza*>> by_kind_a, by_kind_b;
  for (const Stanza& s : a.stanzas) by_kind_a[s.kind].push_back(&s);
  for (const Stanza& s : b.stanzas) by_kind_b[s.kind].push_back(&s);
  double total = 0;
  int aligned = 0;
  for (const auto& [kind, list_a] : by_kind_a) {
    auto it = by_kind_b.find(kind);
    if (it == by_kind_b.end()) continue;
    size_t n = std::min(list_a.size(), it->second.size());
    for (size_t i = 0; i < n; ++i) {
      total += Jaccard(CommandKeys(*list_a[i]), CommandKeys(*it->second[i]));
      ++aligned;
    }
  }
  return aligned == 0 ? 0.0 : total / aligned;
}

double OrderSimilarity(const RouterConfig& a, const RouterConfig& b) {
  auto order_a = FirstOccurrenceOrder(a);
  auto order_b = FirstOccurrenceOrder(b);
  std::map<StanzaKind, int> pos_b;
  for (size_t i = 0; i < order_b.size(); ++i) pos_b[order_b[i]] = static_cast<int>(i);
  std::vector<int> common;  // Positions in b, listed in a's order.
  for (StanzaKind kind : order_a) {
    auto it = pos_b.find(kind);
    if (it != pos_b.end()) common.push_back(it->second);
  }
  if (common.empty()) return 0.0;
  if (common.size() == 1) return 1.0;
  int concordant = 0, pairs = 0;
  for (size_t i = 0; i < common.size(); ++i) {
    for (size_t j = i + 1; j < common.size(); ++j) {
      ++pairs;
      if (common[i] < common[j]) ++concordant;
    }
  }
  return static_cast<double>(concordant) / pairs;
}

double CombineSimilarity(double sim_stanza, double sim_cmd, double sim_order,
                         const SimilarityWeights& weights) {
  ValidateWeights(weights);
  return weights.stanza * sim_stanza + weights.cmd * sim_cmd +
         weights.order * sim_order;
}

SimilarityReport CompareConfigs(const RouterConfig& a, const RouterConfig& b,
                                const SimilarityWeights& weights) {
  SimilarityReport report;
  report.weights = weights;
  report.sim_stanza = StanzaSimilarity(a, b);
  report.sim_cmd = CommandSimilarity(a, b);
  report.sim_order = OrderSimilarity(a, b);
  report.overall = CombineSimilarity(report.sim_stanza, report.sim_cmd,
                                     report.sim_order, weights);
  report.best_match = b.hostname;
  return report;
}

SimilarityReport Similarity(const RouterConfig& fake,
                            const std::map<std::string, RouterConfig>& reals,
                            const SimilarityWeights& weights) {
  if (reals.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "no real configurations");
  }
  std::optional<SimilarityReport> best;
  for (const auto& [name, real] : reals) {
    SimilarityReport r = CompareConfigs(fake, real, weights);
    r.best_match = name;
    if (!best || r.overall > best->overall + 1e-12) best = r;
  }
  return *best;
}

PathAnonymity ComputePathAnonymity(const DataPlane& dataplane,
                                   const std::set<std::string>& egress) {
  std::map<std::pair<std::string, std::string>, std::set<Path>> seen;
  for (const auto& [pair, trace] : dataplane.paths) {
    for (const Path& path : trace.paths) {
      if (path.size() < 3) continue;
      Path routers(path.begin() + 1, path.end() - 1);
      std::string first = routers.front();
      std::string last = routers.back();
      if (first == last || !egress.count(first) || !egress.count(last)) {
        continue;
      }
      seen[{first, last}].insert(std::move(routers));
    }
  }
  PathAnonymity result;
  double total = 0;
  for (const auto& a : egress) {
    for (const auto& b : egress) {
      if (a == b) continue;
      ++result.pairs;
      auto it = seen.find({a, b});
      if (it != seen.end()) total += static_cast<double>(it->second.size());
    }
  }
  result.n_r = result.pairs == 0 ? 0.0 : total / result.pairs;
  return result;
}

std::set<std::string> EgressRouters(const Snapshot& snapshot) {
  std::set<std::string> egress;
  for (const auto& [name, host] : snapshot.hosts) {
    egress.insert(host.gateway_router);
  }
  return egress;
}

}  // namespace netcloak
