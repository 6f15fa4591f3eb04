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
// File: anonymization.cc
// -----------------------------------------------------------------------------

#include "netcloak/anonymization.h"

#include <algorithm>
#include <limits>
#include <vector>

#include <z3++.h>

#include "netcloak/error.h"
#include "netcloak/rng.h"

namespace netcloak {
namespace {

// Solver work units granted to the K-S tie-break of the MaxSMT anonymizer.
constexpr unsigned kTieBreakResourceLimit = 20'000'000;

int RouterDegree(const Topology& graph, const std::string& id) {
  int degree = 0;
  for (const std::string& n : graph.Neighbors(id)) {
    if (graph.Kind(n) == NodeKind::kRouter) ++degree;
  }
  return degree;
}

int CountAtLeast(const Topology& graph, int degree) {
  int count = 0;
  for (const std::string& r : graph.Routers()) {
    if (RouterDegree(graph, r) >= degree) ++count;
  }
  return count;
}

// Required count of routers with degree >= d_i for the i-th (0-based)
// original degree.
int Required(int k, size_t i, KdmaLevel level) {
  return level == KdmaLevel::kStrong ? k + static_cast<int>(i) : k;
}

// Routers not adjacent to `u`, fakes first, each group in seeded random order.
std::vector<std::string> EndpointsFor(const Topology& graph, const std::string& u,
                                      const std::set<std::string>& originals,
                                      Rng& rng) {
  std::vector<std::string> fakes, reals;
  for (const std::string& r : graph.Routers()) {
    if (r == u || graph.HasEdge(u, r)) continue;
    (originals.count(r) ? reals : fakes).push_back(r);
  }
  rng.Shuffle(fakes);
  rng.Shuffle(reals);
  fakes.insert(fakes.end(), reals.begin(), reals.end());
  return fakes;
}

// Minimum-raise partition of `values` (sorted descending) into consecutive
// groups of size k..2k-1; returns the raised values.
std::vector<int> AnonymizeSequence(const std::vector<int>& values, int k) {
  const int n = static_cast<int>(values.size());
  const int64_t kInf = std::numeric_limits<int64_t>::max() / 4;
  std::vector<int64_t> best(n + 1, kInf);
  std::vector<int> start(n + 1, -1);
  best[0] = 0;
  for (int j = k; j <= n; ++j) {
    for (int i = std::max(0, j - (2 * k - 1)); i <= j - k; ++i) {
      if (best[i] >= kInf) continue;
      int64_t cost = 0;
      for (int l = i; l < j; ++l) cost += values[i] - values[l];
      if (best[i] + cost < best[j]) {
        best[j] = best[i] + cost;
        start[j] = i;
      }
    }
  }
  std::vector<int> raised(values);
  for (int j = n; j > 0; j = start[j]) {
    for (int l = start[j]; l < j; ++l) raised[l] = values[start[j]];
  }
  return raised;
}

// Adds edges between routers with positive residual, largest residual first,
// never duplicating an edge. Returns false if some residual stays positive.
bool RealizeRaises(Topology& graph, std::map<std::string, int> residual) {
  std::set<std::string> blocked;
  while (true) {
    std::string u;
    for (const auto& [id, r] : residual) {
      if (r > 0 && !blocked.count(id) && (u.empty() || r > residual[u])) u = id;
    }
    if (u.empty()) break;
    std::vector<std::string> partners;
    for (const auto& [id, r] : residual) {
      if (id != u && r > 0 && !graph.HasEdge(u, id)) partners.push_back(id);
    }
    std::stable_sort(partners.begin(), partners.end(),
                     [&residual](const std::string& a, const std::string& b) {
                       return residual[a] > residual[b];
                     });
    bool progress = false;
    for (const std::string& v : partners) {
      if (residual[u] == 0) break;
      graph.AddEdge(u, v);
      --residual[u];
      --residual[v];
      progress = true;
    }
    if (!progress) blocked.insert(u);
  }
  for (const auto& [id, r] : residual) {
    if (r != 0) return false;
  }
  return true;
}

}  // namespace

std::string_view KdmaLevelName(KdmaLevel level) {
  return level == KdmaLevel::kWeak ? "weak" : "strong";
}

std::optional<KdmaLevel> ParseKdmaLevel(std::string_view name) {
  if (name == "weak") return KdmaLevel::kWeak;
  if (name == "strong") return KdmaLevel::kStrong;
  return std::nullopt;
}

void ValidateParams(const AnonymityParams& params) {
  if (params.k_routers < 1 || params.k_hosts < 1 || params.mul < 1) {
    throw Error(ErrorCode::kInvalidK,
                "k_routers, k_hosts and mul must be >= 1 (got " +
                    std::to_string(params.k_routers) + ", " +
                    std::to_string(params.k_hosts) + ", " +
                    std::to_string(params.mul) + ")");
  }
}

bool CheckKdma(const Topology& original, const Topology& anonymized, int k,
               KdmaLevel level) {
  std::vector<int> degrees = DegreeSequence(original);
  std::vector<int> anonymized_degrees = DegreeSequence(anonymized);
  for (size_t i = 0; i < degrees.size(); ++i) {
    int count = 0;
    for (int d : anonymized_degrees) count += d >= degrees[i];
    if (count < Required(k, i, level)) return false;
  }
  return true;
}

bool CheckKda(const Topology& graph, int k) {
  std::map<int, int> multiplicity;
  for (int d : DegreeSequence(graph)) ++multiplicity[d];
  for (const auto& [degree, count] : multiplicity) {
    if (count < k) return false;
  }
  return true;
}

Topology KdmaGreedy(const Topology& original, const Topology& embedded, int k,
                    KdmaLevel level, uint64_t seed) {
  if (k < 1) throw Error(ErrorCode::kInvalidK, "k must be >= 1");
  Topology out = embedded;
  std::vector<std::string> routers = out.Routers();
  std::vector<std::string> original_routers = original.Routers();
  std::set<std::string> originals(original_routers.begin(), original_routers.end());
  Rng rng = Rng::ForStage(seed, "kdma-greedy");
  std::vector<int> degrees = DegreeSequence(original);
  for (size_t i = 0; i < degrees.size(); ++i) {
    const int d = degrees[i];
    const int required = Required(k, i, level);
    if (CountAtLeast(out, d) >= required) continue;
    std::vector<std::string> candidates;
    for (const std::string& r : routers) {
      if (RouterDegree(out, r) < d) candidates.push_back(r);
    }
    std::stable_sort(candidates.begin(), candidates.end(),
                     [&out](const std::string& a, const std::string& b) {
                       return RouterDegree(out, a) > RouterDegree(out, b);
                     });
    for (const std::string& cand : candidates) {
      if (CountAtLeast(out, d) >= required) break;
      int shortfall = d - RouterDegree(out, cand);
      if (shortfall <= 0) continue;  // Raised meanwhile as someone's endpoint.
      std::vector<std::string> endpoints = EndpointsFor(out, cand, originals, rng);
      if (static_cast<int>(endpoints.size()) < shortfall) continue;
      for (int e = 0; e < shortfall; ++e) out.AddEdge(cand, endpoints[e]);
    }
    if (CountAtLeast(out, d) < required) {
      throw Error(ErrorCode::kInfeasible,
                  "cannot raise " + std::to_string(required) +
                      " routers to degree " + std::to_string(d) + " among " +
                      std::to_string(routers.size()));
    }
  }
  return out;
}

MaxSmtResult KdmaMaxSmt(const Topology& original, const Topology& ref,
                        const NodeMapping& mapping, int k, unsigned timeout_ms) {
  if (k < 1) throw Error(ErrorCode::kInvalidK, "k must be >= 1");
  std::vector<std::string> nodes = ref.Routers();
  const int n = static_cast<int>(nodes.size());
  std::map<std::string, int> index;
  for (int i = 0; i < n; ++i) index[nodes[i]] = i;
  std::vector<int> expected(n);
  for (int i = 0; i < n; ++i) expected[i] = RouterDegree(ref, nodes[i]);

  // Output ids: originals keep theirs, the rest of the reference becomes fake.
  std::vector<std::string> out_id(n);
  std::set<int> mapped;
  for (const std::string& r : original.Routers()) {
    auto it = mapping.map.find(r);
    if (it == mapping.map.end() || !index.count(it->second) ||
        !mapped.insert(index[it->second]).second) {
      throw Error(ErrorCode::kIncompleteMatching, "router " + r + " is unmapped");
    }
    out_id[index[it->second]] = r;
  }
  std::vector<std::string> fake_ids =
      FreshFakeIds(original, n - static_cast<int>(mapped.size()));
  MaxSmtResult result;
  for (int i = 0, f = 0; i < n; ++i) {
    if (!mapped.count(i)) {
      out_id[i] = fake_ids[f++];
      result.fake_to_ref[out_id[i]] = nodes[i];
    }
  }

  std::vector<std::vector<bool>> edges(n, std::vector<bool>(n, false));
  try {
    z3::context ctx;
    std::vector<std::vector<z3::expr>> x(n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        std::string name = "x_" + std::to_string(std::min(i, j)) + "_" +
                           std::to_string(std::max(i, j));
        x[i].push_back(ctx.bool_const(name.c_str()));
      }
    }
    // degree(r) >= t as a cardinality constraint over the incident pairs.
    std::map<std::pair<int, int>, z3::expr> at_least_cache;
    auto at_least = [&](int r, int t) -> z3::expr {
      if (t <= 0) return ctx.bool_val(true);
      if (t > n - 1) return ctx.bool_val(false);
      auto it = at_least_cache.find({r, t});
      if (it != at_least_cache.end()) return it->second;
      z3::expr_vector incident(ctx);
      for (int j = 0; j < n; ++j) {
        if (j != r) incident.push_back(x[r][j]);
      }
      z3::expr e = z3::atleast(incident, t);
      at_least_cache.emplace(std::pair(r, t), e);
      return e;
    };

    // Hard constraints: pinned original edges and strong k-DMA; for a
    // repeated original degree only its last (largest) rank binds.
    z3::expr_vector hard(ctx);
    for (const auto& [a, b] : original.RouterSubgraph().Edges()) {
      hard.push_back(x[index[mapping.map.at(a)]][index[mapping.map.at(b)]]);
    }
    std::vector<int> degrees = DegreeSequence(original);
    for (size_t i = 0; i < degrees.size(); ++i) {
      if (i + 1 < degrees.size() && degrees[i + 1] == degrees[i]) continue;
      int required = Required(k, i, KdmaLevel::kStrong);
      if (required > n) {
        throw Error(ErrorCode::kUnsatisfiable,
                    "k-DMA needs " + std::to_string(required) +
                        " routers, reference has " + std::to_string(n));
      }
      z3::expr_vector reach(ctx);
      for (int r = 0; r < n; ++r) reach.push_back(at_least(r, degrees[i]));
      hard.push_back(z3::atleast(reach, required));
    }

    // Soft constraints: |degree(r) - expected(r)| unit penalties, one per
    // threshold between the two values.
    z3::expr_vector violated(ctx);
    z3::expr_vector soft(ctx);
    for (int r = 0; r < n; ++r) {
      for (int t = 1; t <= n - 1; ++t) {
        z3::expr want = t <= expected[r] ? at_least(r, t) : !at_least(r, t);
        soft.push_back(want);
        violated.push_back(!want);
      }
    }

    z3::optimize opt(ctx);
    z3::params params(ctx);
    params.set("timeout", timeout_ms);
    opt.set(params);
    for (const z3::expr& h : hard) opt.add(h);
    for (const z3::expr& w : soft) opt.add_soft(w, 1);
    switch (opt.check()) {
      case z3::unsat:
        throw Error(ErrorCode::kUnsatisfiable,
                    "k-DMA constraints unsatisfiable for k=" + std::to_string(k) +
                        " over " + std::to_string(n) + " routers");
      case z3::unknown:
        throw Error(ErrorCode::kSolverTimeout,
                    std::string("MaxSMT gave up: ") +
                        Z3_optimize_get_reason_unknown(ctx, opt));
      case z3::sat:
        break;
    }

    auto read = [&](const z3::model& model) {
      for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
          edges[i][j] = model.eval(x[i][j], true).is_true();
        }
      }
    };
    auto degree_of = [&](int r) {
      int d = 0;
      for (int j = 0; j < n; ++j) d += j < r ? edges[j][r] : j > r && edges[r][j];
      return d;
    };
    // n * K-S distance to the reference; both sequences have n entries.
    auto scaled_ks = [&]() {
      int worst = 0;
      for (int t = 0; t < n; ++t) {
        int a = 0, b = 0;
        for (int r = 0; r < n; ++r) {
          a += degree_of(r) <= t;
          b += expected[r] <= t;
        }
        worst = std::max(worst, std::abs(a - b));
      }
      return worst;
    };
    read(opt.get_model());
    for (int r = 0; r < n; ++r) result.objective += std::abs(degree_of(r) - expected[r]);

    // Tie-break among optimal graphs by K-S distance: keep the objective at
    // its optimum and ask for ever smaller distances. The deterministic
    // resource limit keeps the outcome machine-independent; when it runs
    // out the best optimal graph found so far stands.
    z3::solver tie(ctx);
    z3::params tie_params(ctx);
    tie_params.set("rlimit", kTieBreakResourceLimit);
    tie.set(tie_params);
    for (const z3::expr& h : hard) tie.add(h);
    tie.add(z3::atmost(violated, result.objective));
    for (int ks = scaled_ks(); ks > 0; ks = scaled_ks()) {
      tie.push();
      for (int t = 0; t < n; ++t) {
        z3::expr_vector below(ctx);
        int b = 0;
        for (int r = 0; r < n; ++r) {
          below.push_back(!at_least(r, t + 1));
          b += expected[r] <= t;
        }
        tie.add(z3::atmost(below, b + ks - 1));
        if (b - ks + 1 > 0) tie.add(z3::atleast(below, b - ks + 1));
      }
      bool improved = tie.check() == z3::sat;
      if (improved) read(tie.get_model());
      tie.pop();
      if (!improved) break;
    }
  } catch (const z3::exception& e) {
    throw Error(ErrorCode::kInternal, std::string("z3: ") + e.msg());
  }

  for (int i = 0; i < n; ++i) {
    const std::string& id = out_id[i];
    uint32_t asn = original.HasNode(id) ? original.Asn(id) : 0;
    result.graph.AddNode(id, NodeKind::kRouter, asn);
  }
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (edges[i][j]) result.graph.AddEdge(out_id[i], out_id[j]);
    }
  }
  InheritAsns(result.graph, {fake_ids.begin(), fake_ids.end()});
  for (const std::string& host : original.Hosts()) {
    result.graph.AddNode(host, NodeKind::kHost, original.Asn(host));
    for (const std::string& gw : original.Neighbors(host)) result.graph.AddEdge(host, gw);
  }
  return result;
}

Topology KdaBaseline(const Topology& graph, int k, uint64_t seed) {
  if (k < 1) throw Error(ErrorCode::kInvalidK, "k must be >= 1");
  if (k == 1 || CheckKda(graph, k)) return graph;
  std::vector<std::string> routers = graph.Routers();
  const int n = static_cast<int>(routers.size());
  if (n < k) {
    throw Error(ErrorCode::kInfeasible, "k-DA needs at least k=" +
                                            std::to_string(k) + " routers, have " +
                                            std::to_string(n));
  }
  std::map<std::string, int> base;
  for (const std::string& r : routers) base[r] = RouterDegree(graph, r);
  std::map<std::string, int> noise;
  Rng rng = Rng::ForStage(seed, "kda-probe");
  constexpr int kMaxAttempts = 400;
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    std::vector<std::string> order = routers;
    auto value = [&](const std::string& r) { return base[r] + noise[r]; };
    std::stable_sort(order.begin(), order.end(),
                     [&](const std::string& a, const std::string& b) {
                       return value(a) > value(b);
                     });
    std::vector<int> values;
    for (const std::string& r : order) values.push_back(value(r));
    std::vector<int> raised = AnonymizeSequence(values, k);
    std::map<std::string, int> residual;
    int total = 0;
    bool fits = true;
    for (int i = 0; i < n; ++i) {
      residual[order[i]] = raised[i] - base[order[i]];
      total += residual[order[i]];
      fits = fits && raised[i] <= n - 1;
    }
    if (fits && total % 2 == 0) {
      Topology out = graph;
      if (RealizeRaises(out, residual) && CheckKda(out, k)) return out;
    }
    // Probe: nudge a random router from the lower half of the sequence.
    std::vector<std::string> low(order.begin() + n / 2, order.end());
    const std::string& pick = rng.Pick(low);
    if (value(pick) < n - 1) ++noise[pick];
  }
  throw Error(ErrorCode::kInfeasible,
              "no realizable k-degree anonymous sequence for k=" +
                  std::to_string(k) + " after " + std::to_string(kMaxAttempts) +
                  " probes");
}

}  // namespace netcloak
