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
// File: pipeline.cc
// -----------------------------------------------------------------------------

#include "netcloak/pipeline.h"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <functional>

#include "json.hpp"
#include "netcloak/confgen.h"
#include "netcloak/expansion.h"
#include "netcloak/rng.h"

namespace netcloak {

namespace {

using Json = nlohmann::json;

const char* const kPhases[] = {"preprocess", "expand", "generate", "repair",
                               "verify"};

// Adds the elapsed time of its scope to `wall_ms[phase]` when enabled.
class PhaseTimer {
 public:
  PhaseTimer(RunReport& report, const char* phase)
      : report_(report), phase_(phase),
        start_(std::chrono::steady_clock::now()) {}
  ~PhaseTimer() {
    if (!report_.config.record_timings) return;
    std::chrono::duration<double, std::milli> d =
        std::chrono::steady_clock::now() - start_;
    report_.wall_ms[phase_] += d.count();
  }

 private:
  RunReport& report_;
  const char* phase_;
  std::chrono::steady_clock::time_point start_;
};

uint64_t StageSeed(uint64_t seed, std::string_view stage) {
  return Rng::ForStage(seed, stage).NextU64();
}

// A router graph after expansion and anonymization.
struct ExpandedGraph {
  Topology graph;
  const ReferenceGraph* reference = nullptr;
  int stitch_joins = 0;
};

// Joins the components of a grown graph, keeping the original edges and
// anchoring at the smallest original router.
int Stitch(const Topology& original, Topology& graph) {
  std::vector<Edge> edges = original.Edges();
  return StitchComponents(graph, std::set<Edge>(edges.begin(), edges.end()),
                          original.Routers().front());
}

// Stitches `expanded` and anonymizes it. Stitching comes first so that the
// anonymizer makes the final change and its guarantee holds on the output;
// both anonymizers only add edges, which keeps the graph connected.
Topology Anonymize(const Topology& original, Topology expanded,
                   const RunConfig& config, int& stitch_joins) {
  stitch_joins = Stitch(original, expanded);
  const AnonymityParams& p = config.params;
  switch (config.anonymizer) {
    case Anonymizer::kGreedy:
      return KdmaGreedy(original, expanded, p.k_routers, p.level,
                        StageSeed(config.seed, "kdma"));
    case Anonymizer::kKda:
      return KdaBaseline(expanded, p.k_routers, StageSeed(config.seed, "kda"));
    case Anonymizer::kMaxSmt:
      break;
  }
  throw Error(ErrorCode::kInvalidArgument,
              "the maxsmt anonymizer embeds by itself; use --mode embedding");
}

ExpandedGraph Expand(const Topology& g, const std::vector<ReferenceGraph>& library,
                     const RunConfig& config, int requested) {
  const int n = static_cast<int>(g.Routers().size());
  ExpandedGraph out;
  switch (config.mode) {
    case ExpansionMode::kReplica: {
      // Replica adds whole copies: round up to a multiple of |V|.
      int k = 1 + (requested + n - 1) / n;
      out.graph = Anonymize(g, ExpandReplica(g, k), config, out.stitch_joins);
      break;
    }
    case ExpansionMode::kSampleConnect: {
      out.reference = &SelectSamplingReference(library, requested);
      SamplingStrategy strategy = config.sampling;
      strategy.seed = StageSeed(config.seed, "sampling");
      SampleConnectResult r =
          ExpandSampleConnect(g, out.reference->graph, requested, strategy);
      out.graph = Anonymize(g, std::move(r.graph), config, out.stitch_joins);
      break;
    }
    case ExpansionMode::kEmbedding: {
      out.reference = &SelectReference(library, g, n + requested);
      const Topology& ref = out.reference->graph;
      if (config.anonymizer == Anonymizer::kMaxSmt) {
        out.graph = KdmaMaxSmt(g, ref, ComputeNodeMapping(g, ref),
                               config.params.k_routers,
                               config.solver_timeout_ms)
                        .graph;
        // Joins only add degree, which the strong check tolerates.
        out.stitch_joins = Stitch(g, out.graph);
      } else {
        out.graph = Anonymize(g, EmbedGraphGreedy(g, ref).graph, config,
                              out.stitch_joins);
      }
      break;
    }
  }
  return out;
}

// ASNs of real and planned routers: a new router joins the AS of the router
// that configures it.
std::map<std::string, uint32_t> PlannedAsns(const Snapshot& original,
                                            const ExpansionPlan& plan) {
  auto models = InterpretAll(original);
  std::map<std::string, uint32_t> asns = AssignAsns(models, ComputeLinks(models));
  std::set<std::string> configured;
  for (const auto& [name, _] : original.configs) configured.insert(name);
  auto contacts = FirstContacts(plan.new_edges, configured, plan.new_routers);
  std::function<uint32_t(const std::string&)> asn_of =
      [&](const std::string& id) -> uint32_t {
    if (auto it = asns.find(id); it != asns.end()) return it->second;
    uint32_t asn = asn_of(contacts.at(id));
    asns[id] = asn;
    return asn;
  };
  for (const auto& r : plan.new_routers) asn_of(r);
  return asns;
}

SimilaritySummary Summarize(const Snapshot& anonymized, const Snapshot& original,
                            const ExpansionResult& expansion) {
  SimilaritySummary s;
  double skeleton = 0;
  s.min_overall = 1;
  for (const auto& [name, assignment] : expansion.assignments) {
    SimilarityReport r = Similarity(anonymized.configs.at(name), original.configs);
    s.sim_stanza += r.sim_stanza;
    s.sim_cmd += r.sim_cmd;
    s.sim_order += r.sim_order;
    s.overall += r.overall;
    s.min_overall = std::min(s.min_overall, r.overall);
    skeleton +=
        Similarity(GenerateSkeletonConfig(assignment), original.configs).overall;
    s.per_router[name] = std::move(r);
  }
  s.routers = static_cast<int>(expansion.assignments.size());
  if (s.routers == 0) {
    s.min_overall = 0;
    return s;
  }
  s.sim_stanza /= s.routers;
  s.sim_cmd /= s.routers;
  s.sim_order /= s.routers;
  s.overall /= s.routers;
  s.skeleton_overall = skeleton / s.routers;
  return s;
}

// Runs `body`; a module error is recorded with `phase` and ends the run.
bool RunPhase(RunReport& report, const char* phase,
              const std::function<void()>& body) {
  PhaseTimer timer(report, phase);
  try {
    body();
    return true;
  } catch (const Error& e) {
    report.error_phase = phase;
    report.error_code = e.code();
    report.error_message = e.what();
  } catch (const std::exception& e) {
    report.error_phase = phase;
    report.error_code = ErrorCode::kInternal;
    report.error_message = e.what();
  }
  report.exit_code = ExitCodeFor(*report.error_code);
  return false;
}

Json LogToJson(const RepairLog& log) {
  Json filters = Json::array();
  for (const auto& [router, rule] : log.filters_added) {
    filters.push_back({{"router", router},
                       {"kind", FilterRuleKindName(rule.kind)},
                       {"neighbor", rule.neighbor},
                       {"name", rule.name},
                       {"denied", rule.denied.ToString()}});
  }
  Json costs = Json::array();
  for (const auto& [edge, cost] : log.costs_assigned) {
    costs.push_back({{"from", edge.first}, {"to", edge.second}, {"cost", cost}});
  }
  return {{"iterations", log.iterations},
          {"converged", log.converged},
          {"filters_added", filters},
          {"costs_assigned", costs},
          {"discrepancies", log.discrepancies}};
}

Json SimilarityToJson(const SimilarityReport& r) {
  return {{"sim_stanza", r.sim_stanza},
          {"sim_cmd", r.sim_cmd},
          {"sim_order", r.sim_order},
          {"overall", r.overall},
          {"best_match", r.best_match}};
}

}  // namespace

// ---------------------------------------------------------------------------
// Names.
// ---------------------------------------------------------------------------

std::string_view ExpansionModeName(ExpansionMode mode) {
  switch (mode) {
    case ExpansionMode::kReplica: return "replica";
    case ExpansionMode::kSampleConnect: return "sample-connect";
    case ExpansionMode::kEmbedding: return "embedding";
  }
  return "embedding";
}

std::optional<ExpansionMode> ParseExpansionMode(std::string_view name) {
  for (auto m : {ExpansionMode::kReplica, ExpansionMode::kSampleConnect,
                 ExpansionMode::kEmbedding}) {
    if (ExpansionModeName(m) == name) return m;
  }
  return std::nullopt;
}

std::string_view AnonymizerName(Anonymizer anonymizer) {
  switch (anonymizer) {
    case Anonymizer::kGreedy: return "greedy";
    case Anonymizer::kMaxSmt: return "maxsmt";
    case Anonymizer::kKda: return "kda";
  }
  return "greedy";
}

std::optional<Anonymizer> ParseAnonymizer(std::string_view name) {
  for (auto a : {Anonymizer::kGreedy, Anonymizer::kMaxSmt, Anonymizer::kKda}) {
    if (AnonymizerName(a) == name) return a;
  }
  return std::nullopt;
}

std::string_view RepairModeName(RepairMode mode) {
  return mode == RepairMode::kConstraint ? "constraint" : "iterative";
}

std::optional<RepairMode> ParseRepairMode(std::string_view name) {
  for (auto m : {RepairMode::kConstraint, RepairMode::kIterative}) {
    if (RepairModeName(m) == name) return m;
  }
  return std::nullopt;
}

int ExitCodeFor(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInfeasible:
    case ErrorCode::kUnsatisfiable:
    case ErrorCode::kNoFeasibleReference:
    case ErrorCode::kIncompleteMatching:
      return 3;
    case ErrorCode::kSolverTimeout:
      return 4;
    case ErrorCode::kUnsat:
    case ErrorCode::kNonConvergence:
    case ErrorCode::kConflictingRequirement:
      return 2;
    default:
      return 1;
  }
}

// ---------------------------------------------------------------------------
// Verification.
// ---------------------------------------------------------------------------

std::vector<PathDiff> VerifyEquivalence(
    const DataPlane& original, const DataPlane& anonymized,
    const std::map<std::string, std::string>& mapping) {
  auto map = [&](const std::string& id) {
    auto it = mapping.find(id);
    return it == mapping.end() ? id : it->second;
  };
  std::vector<PathDiff> out;
  for (const auto& [pair, trace] : original.paths) {
    std::pair<std::string, std::string> image{map(pair.first), map(pair.second)};
    auto it = anonymized.paths.find(image);
    for (const Path& path : trace.paths) {
      Path mapped;
      for (const auto& node : path) mapped.push_back(map(node));
      if (it != anonymized.paths.end() && it->second.paths.count(mapped)) {
        continue;
      }
      out.push_back({image.first, image.second, std::move(mapped),
                     it == anonymized.paths.end() ? TraceStatus::kNoRoute
                                                  : it->second.status});
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// The run.
// ---------------------------------------------------------------------------

PipelineOutput AnonymizeSnapshot(const Snapshot& original,
                                 const std::vector<ReferenceGraph>& library,
                                 const RunConfig& config) {
  PipelineOutput out;
  RunReport& report = out.report;
  report.config = config;
  if (config.record_timings) {
    for (const char* phase : kPhases) report.wall_ms[phase] = 0;
  }

  Topology g;
  RepairBaseline baseline;
  DataPlane original_dp;
  if (!RunPhase(report, "preprocess", [&] {
        ValidateParams(config.params);
        if (config.add_routers < 0) {
          throw Error(ErrorCode::kInvalidArgument, "add_routers must be >= 0");
        }
        g = ExtractTopology(original).RouterSubgraph();
        if (g.Routers().empty()) {
          throw Error(ErrorCode::kInvalidArgument, "snapshot has no routers");
        }
        baseline = PrepareRepair(original);
        original_dp = ComputeDataPlane(original, baseline.fibs);
        report.n_r_before =
            ComputePathAnonymity(original_dp, EgressRouters(original)).n_r;
      })) {
    out.anonymized = original;
    return out;
  }

  const int n = static_cast<int>(g.Routers().size());
  report.requested_adds =
      config.add_routers > 0 ? config.add_routers : config.params.mul * n;
  ExpandedGraph expanded;
  if (!RunPhase(report, "expand", [&] {
        expanded = Expand(g, library, config, report.requested_adds);
        report.stitch_joins = expanded.stitch_joins;
        for (const auto& [a, b] : g.Edges()) {
          if (!expanded.graph.HasEdge(a, b)) {
            throw Error(ErrorCode::kInternal,
                        "expansion lost original edge " + a + "-" + b);
          }
        }
        report.actual_adds =
            static_cast<int>(expanded.graph.Routers().size()) - n;
        if (expanded.reference) report.reference = expanded.reference->name;
      })) {
    out.anonymized = original;
    return out;
  }

  ExpansionResult expansion;
  if (!RunPhase(report, "generate", [&] {
        ExpansionPlan plan;
        for (const auto& r : expanded.graph.Routers()) {
          if (!g.HasNode(r)) plan.new_routers.insert(r);
        }
        for (const auto& e : expanded.graph.Edges()) {
          if (!g.HasEdge(e.first, e.second)) plan.new_edges.push_back(e);
        }
        PlanFakeHosts(original, config.params.k_hosts,
                      PlannedAsns(original, plan), plan.new_routers, plan);
        expansion = ExpandNetwork(plan, original);
        report.fake_hosts = static_cast<int>(plan.new_hosts.size());
        if (config.mimic_filters) {
          std::map<std::string, std::string> host_map;
          for (const auto& [id, real] : plan.host_map) {
            host_map[expansion.hostname_of.at(id)] = real;
          }
          expansion.snapshot = MimicFilters(expansion.snapshot, host_map);
        }
      })) {
    out.anonymized = original;
    return out;
  }
  out.anonymized = expansion.snapshot;

  if (config.repair &&
      !RunPhase(report, "repair", [&] {
        Snapshot repaired = out.anonymized;
        InterAsOptions options;
        options.ibgp_strategy = config.ibgp_strategy;
        if (config.repair_mode == RepairMode::kConstraint) {
          report.intra_as =
              IntraAsRepair(repaired, baseline, config.solver_timeout_ms).logs;
        } else {
          options.repair_costs = true;
          options.max_iterations = kMaxIterativeIterations;
        }
        report.inter_as = InterAsRepair(repaired, baseline, options);
        out.anonymized = std::move(repaired);
      })) {
    return out;
  }

  RunPhase(report, "verify", [&] {
    const Snapshot& anon = out.anonymized;
    DataPlane dp = ComputeDataPlane(anon, ComputeFibs(anon));
    report.path_diff = VerifyEquivalence(original_dp, dp);
    report.equivalent = report.path_diff.empty();
    report.n_r_after = ComputePathAnonymity(dp, EgressRouters(anon)).n_r;

    Topology a = ExtractTopology(anon).RouterSubgraph();
    const int k = config.params.k_routers;
    report.kdma_weak = CheckKdma(g, a, k, KdmaLevel::kWeak);
    report.kdma_strong = CheckKdma(g, a, k, KdmaLevel::kStrong);
    report.kda = CheckKda(a, k);
    if (config.anonymizer == Anonymizer::kKda) {
      report.anonymity_check = report.kda;
    } else {
      report.anonymity_check = config.params.level == KdmaLevel::kStrong
                                   ? report.kdma_strong
                                   : report.kdma_weak;
    }
    report.ks_to_original = Rationality(a, g);
    if (expanded.reference) {
      report.ks_to_reference = Rationality(a, expanded.reference->graph);
    }
    report.similarity = Summarize(anon, original, expansion);
    report.verified = report.equivalent && report.anonymity_check;
    report.exit_code = report.verified ? 0 : 2;
  });
  return out;
}

RunReport RunPipeline(const RunConfig& config) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (config.output_dir.empty() ||
      fs::weakly_canonical(config.output_dir, ec) ==
          fs::weakly_canonical(config.input_dir, ec)) {
    throw Error(ErrorCode::kInvalidArgument,
                "output directory must differ from the input directory");
  }
  Snapshot original;
  std::vector<ReferenceGraph> library;
  RunReport failed;
  failed.config = config;
  bool loaded = RunPhase(failed, "preprocess", [&] {
    original = LoadSnapshot(config.input_dir);
    if (config.mode != ExpansionMode::kReplica) {
      if (config.reference_dir.empty()) {
        throw Error(ErrorCode::kInvalidArgument,
                    "mode " + std::string(ExpansionModeName(config.mode)) +
                        " needs a reference directory");
      }
      library = LoadReferenceLibrary(config.reference_dir);
    }
  });
  RunReport report;
  if (loaded) {
    PipelineOutput out = AnonymizeSnapshot(original, library, config);
    report = std::move(out.report);
    if (!report.error_phase) WriteSnapshot(out.anonymized, config.output_dir);
  } else {
    report = std::move(failed);
  }
  if (!config.report_path.empty()) {
    std::ofstream f(config.report_path);
    f << ReportToJson(report);
    if (!f) {
      throw Error(ErrorCode::kIo,
                  "cannot write report " + config.report_path.string());
    }
  }
  return report;
}

// ---------------------------------------------------------------------------
// Report serialization.
// ---------------------------------------------------------------------------

std::string ReportToJson(const RunReport& r) {
  const RunConfig& c = r.config;
  Json j;
  j["schema"] = kReportSchema;
  j["config"] = {
      {"input_dir", c.input_dir.string()},
      {"output_dir", c.output_dir.string()},
      {"reference_dir", c.reference_dir.string()},
      {"mode", ExpansionModeName(c.mode)},
      {"add_routers", c.add_routers},
      {"k_routers", c.params.k_routers},
      {"k_hosts", c.params.k_hosts},
      {"kdma", KdmaLevelName(c.params.level)},
      {"mul", c.params.mul},
      {"anonymizer", AnonymizerName(c.anonymizer)},
      {"sampling",
       {{"kind", SamplingKindName(c.sampling.kind)},
        {"fire_probability", c.sampling.fire_probability},
        {"snowball_width", c.sampling.snowball_width},
        {"rcmh_alpha", c.sampling.rcmh_alpha}}},
      {"repair", RepairModeName(c.repair_mode)},
      {"repair_enabled", c.repair},
      {"ibgp_strategy", IbgpStrategyName(c.ibgp_strategy)},
      {"mimic_filters", c.mimic_filters},
      {"seed", c.seed},
      {"solver_timeout_ms", c.solver_timeout_ms},
  };
  j["expansion"] = {{"reference",
                     r.reference.empty() ? Json(nullptr) : Json(r.reference)},
                    {"requested_adds", r.requested_adds},
                    {"actual_adds", r.actual_adds},
                    {"gap", r.actual_adds - r.requested_adds},
                    {"fake_hosts", r.fake_hosts},
                    {"stitch_joins", r.stitch_joins}};
  j["rationality"] = {
      {"ks_distance",
       r.ks_to_reference ? Json(*r.ks_to_reference) : Json(nullptr)},
      {"reference_name",
       r.reference.empty() ? Json(nullptr) : Json(r.reference)},
      {"ks_to_original", r.ks_to_original}};
  std::string required =
      c.anonymizer == Anonymizer::kKda ? "kda"
                                       : std::string(KdmaLevelName(c.params.level));
  j["kdma_check"] = {{"weak", r.kdma_weak},
                     {"strong", r.kdma_strong},
                     {"kda", r.kda},
                     {"required", required},
                     {"passed", r.anonymity_check}};
  Json per_router = Json::object();
  for (const auto& [name, s] : r.similarity.per_router) {
    per_router[name] = SimilarityToJson(s);
  }
  const SimilarityWeights w;
  j["similarity"] = {{"routers", r.similarity.routers},
                     {"sim_stanza", r.similarity.sim_stanza},
                     {"sim_cmd", r.similarity.sim_cmd},
                     {"sim_order", r.similarity.sim_order},
                     {"overall", r.similarity.overall},
                     {"min_overall", r.similarity.min_overall},
                     {"skeleton_overall", r.similarity.skeleton_overall},
                     {"weights",
                      {{"stanza", w.stanza}, {"cmd", w.cmd}, {"order", w.order}}},
                     {"per_router", per_router}};
  j["n_r"] = {{"before", r.n_r_before}, {"after", r.n_r_after}};
  Json intra = Json::object();
  for (const auto& [asn, log] : r.intra_as) {
    intra[std::to_string(asn)] = LogToJson(log);
  }
  j["repair"] = {{"mode", RepairModeName(c.repair_mode)},
                 {"intra_as", intra},
                 {"inter_as", LogToJson(r.inter_as)}};
  Json diff = Json::array();
  for (const auto& d : r.path_diff) {
    diff.push_back({{"src", d.src},
                    {"dst", d.dst},
                    {"missing", d.missing},
                    {"status", TraceStatusName(d.status)}});
  }
  j["verification"] = {{"equivalent", r.equivalent},
                       {"path_diff", diff},
                       {"anonymity_check", r.anonymity_check},
                       {"verified", r.verified}};
  Json wall = Json::object();
  for (const char* phase : kPhases) {
    auto it = r.wall_ms.find(phase);
    wall[phase] = it == r.wall_ms.end() ? Json(nullptr) : Json(it->second);
  }
  j["wall_ms"] = wall;
  if (r.error_phase) {
    j["error"] = {{"phase", *r.error_phase},
                  {"code", ErrorCodeName(*r.error_code)},
                  {"message", r.error_message}};
  } else {
    j["error"] = nullptr;
  }
  j["exit_code"] = r.exit_code;
  return j.dump(2) + "\n";
}

}  // namespace netcloak
