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
// File: pipeline.h
// -----------------------------------------------------------------------------
//
// The end-to-end anonymization run:
//
//   preprocess  - parse the snapshot, store the forwarding tables, path
//                 requirements and data plane of the original network;
//   expand      - grow the router graph (replica, sample-connect or
//                 embedding) and make it k-degree-mapping anonymous;
//   generate    - configure fake routers and hosts, mimic host filters;
//   repair      - restore every original forwarding path (link-cost
//                 synthesis inside ASes, filters across them, or the purely
//                 iterative baseline);
//   verify      - functional equivalence and the anonymity check.
//
// Every random choice derives from the run seed, so identical configurations
// give byte-identical snapshots and reports.

#ifndef NETCLOAK_PIPELINE_H_
#define NETCLOAK_PIPELINE_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "netcloak/anonymization.h"
#include "netcloak/error.h"
#include "netcloak/repair.h"
#include "netcloak/sampling.h"
#include "netcloak/similarity.h"
#include "netcloak/simulator.h"
#include "netcloak/snapshot.h"
#include "netcloak/topology.h"

namespace netcloak {

inline constexpr int kReportSchema = 1;

enum class ExpansionMode { kReplica, kSampleConnect, kEmbedding };
enum class Anonymizer { kGreedy, kMaxSmt, kKda };
enum class RepairMode { kConstraint, kIterative };

// "replica", "sample-connect", "embedding".
std::string_view ExpansionModeName(ExpansionMode mode);
std::optional<ExpansionMode> ParseExpansionMode(std::string_view name);
// "greedy", "maxsmt", "kda".
std::string_view AnonymizerName(Anonymizer anonymizer);
std::optional<Anonymizer> ParseAnonymizer(std::string_view name);
// "constraint", "iterative".
std::string_view RepairModeName(RepairMode mode);
std::optional<RepairMode> ParseRepairMode(std::string_view name);

struct RunConfig {
  std::filesystem::path input_dir;
  std::filesystem::path output_dir;
  // GraphML reference library; required by sample-connect and embedding.
  std::filesystem::path reference_dir;
  ExpansionMode mode = ExpansionMode::kEmbedding;
  // Requested fake routers; 0 means params.mul x original routers.
  int add_routers = 0;
  AnonymityParams params;
  Anonymizer anonymizer = Anonymizer::kGreedy;
  // The seed field is ignored; sampling draws from the run seed.
  SamplingStrategy sampling;
  RepairMode repair_mode = RepairMode::kConstraint;
  IbgpStrategy ibgp_strategy = IbgpStrategy::kFilterNextHop;
  uint64_t seed = 0;
  // Empty: no report file.
  std::filesystem::path report_path;
  // Wall times make reports differ between runs; off by default.
  bool record_timings = false;
  // Off only for ablations: fake hosts without analog filter entries.
  bool mimic_filters = true;
  // Off only for ablations: skips route repair (verification then fails
  // wherever fake links divert traffic).
  bool repair = true;
  // Per-solve budget of the SMT back ends.
  unsigned solver_timeout_ms = 60000;
};

// One original path whose image is missing from the anonymized data plane.
struct PathDiff {
  std::string src;
  std::string dst;
  Path missing;
  // The anonymized traceroute status of the pair.
  TraceStatus status = TraceStatus::kOk;

  friend bool operator==(const PathDiff&, const PathDiff&) = default;
};

// Empty iff, for every pair of the original data plane, every original path
// mapped node by node through `mapping` (identity for absent names) is among
// the anonymized paths of the mapped pair.
std::vector<PathDiff> VerifyEquivalence(
    const DataPlane& original, const DataPlane& anonymized,
    const std::map<std::string, std::string>& mapping = {});

struct SimilaritySummary {
  int routers = 0;
  // Means over fake routers of the reported (best-match) components.
  double sim_stanza = 0;
  double sim_cmd = 0;
  double sim_order = 0;
  double overall = 0;
  double min_overall = 0;
  // Mean overall score of from-scratch skeleton configurations of the same
  // fake routers: the baseline mimicry is compared against.
  double skeleton_overall = 0;
  std::map<std::string, SimilarityReport> per_router;
};

struct RunReport {
  RunConfig config;
  // Name of the chosen reference graph; empty for replica.
  std::string reference;
  int requested_adds = 0;
  int actual_adds = 0;
  int fake_hosts = 0;
  // Component joins made before anonymization.
  int stitch_joins = 0;
  // Degree-sequence K-S distances of the anonymized router graph.
  std::optional<double> ks_to_reference;
  double ks_to_original = 0;
  bool kdma_weak = false;
  bool kdma_strong = false;
  bool kda = false;
  SimilaritySummary similarity;
  double n_r_before = 0;
  double n_r_after = 0;
  std::map<uint32_t, RepairLog> intra_as;
  RepairLog inter_as;
  std::vector<PathDiff> path_diff;
  bool equivalent = false;
  // The anonymity check required by the anonymizer: strong or weak k-DMA,
  // or k-DA for the k-DA baseline.
  bool anonymity_check = false;
  bool verified = false;
  // Phase -> milliseconds, filled when timings are recorded.
  std::map<std::string, double> wall_ms;
  // Set when a phase failed.
  std::optional<std::string> error_phase;
  std::optional<ErrorCode> error_code;
  std::string error_message;
  int exit_code = 0;
};

// Exit codes: 0 verified, 1 error, 2 verification failure (including
// unrepairable routing), 3 infeasible anonymity, 4 solver timeout.
int ExitCodeFor(ErrorCode code);

struct PipelineOutput {
  Snapshot anonymized;
  RunReport report;
};

// Runs every phase in memory on `original`. Module errors are caught and
// recorded with their phase in the report (with the matching exit code);
// `anonymized` then holds the last completed state.
PipelineOutput AnonymizeSnapshot(const Snapshot& original,
                                 const std::vector<ReferenceGraph>& library,
                                 const RunConfig& config);

// Loads the input and the reference library, anonymizes, writes the output
// snapshot (when one was produced) and the report. Throws kInvalidArgument
// when the output directory is the input directory; load errors are
// recorded like module errors.
RunReport RunPipeline(const RunConfig& config);

// Schema-1 JSON with sorted keys.
std::string ReportToJson(const RunReport& report);

}  // namespace netcloak

#endif  // NETCLOAK_PIPELINE_H_
