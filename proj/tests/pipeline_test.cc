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
// File: pipeline_test.cc
// -----------------------------------------------------------------------------

#include "netcloak/pipeline.h"

#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include <unistd.h>

#include "json.hpp"
#include "netcloak/confgen.h"
#include "netcloak/error.h"
#include "test_support.h"

namespace netcloak {
namespace {

using ::netcloak::testing::FixtureDir;
using ::netcloak::testing::LoadFixture;

std::vector<ReferenceGraph> Library() {
  return LoadReferenceLibrary(FixtureDir("reference"));
}

RunConfig Config(ExpansionMode mode, int k, uint64_t seed) {
  RunConfig c;
  c.mode = mode;
  c.params.k_routers = k;
  c.params.k_hosts = 2;
  c.seed = seed;
  return c;
}

std::string RenderAll(const Snapshot& s) {
  std::string out;
  for (const auto& [name, c] : s.configs) out += RenderConfig(c);
  for (const auto& [name, h] : s.hosts) out += RenderHost(h);
  return out;
}

std::string ReadFile(const std::filesystem::path& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// ---------------------------------------------------------------------------
// verify_equivalence.
// ---------------------------------------------------------------------------

TEST(VerifyEquivalenceTest, IdenticalNetworksHaveNoDiff) {
  Snapshot campus = LoadFixture("campus");
  DataPlane dp = ComputeDataPlane(campus, ComputeFibs(campus));
  EXPECT_TRUE(VerifyEquivalence(dp, dp).empty());
}

TEST(VerifyEquivalenceTest, ShortcutDivertsR5AndRepairRestoresIt) {
  // A new r1-r5 link makes r5 send h1's traffic directly to r1 instead of
  // through r4.
  Snapshot campus = LoadFixture("campus");
  DataPlane before = ComputeDataPlane(campus, ComputeFibs(campus));
  ExpansionPlan plan;
  plan.new_edges = {MakeEdge("r1", "r5")};
  Snapshot s = ExpandNetwork(plan, campus).snapshot;
  auto diff = VerifyEquivalence(before, ComputeDataPlane(s, ComputeFibs(s)));
  auto it = std::find_if(diff.begin(), diff.end(), [](const PathDiff& d) {
    return d.src == "h5" && d.dst == "h1";
  });
  ASSERT_NE(it, diff.end());
  EXPECT_EQ(it->missing, (Path{"h5", "r5", "r4", "r1", "h1"}));
  EXPECT_EQ(it->status, TraceStatus::kOk);

  RepairBaseline baseline = PrepareRepair(campus);
  IntraAsRepair(s, baseline);
  EXPECT_TRUE(InterAsRepair(s, baseline).converged);
  EXPECT_TRUE(
      VerifyEquivalence(before, ComputeDataPlane(s, ComputeFibs(s))).empty());
}

TEST(VerifyEquivalenceTest, MappingRenamesNodes) {
  DataPlane original, anonymized;
  original.paths[{"a", "b"}].paths = {{"a", "x", "b"}};
  anonymized.paths[{"a", "b"}].paths = {{"a", "y", "b"}};
  EXPECT_EQ(VerifyEquivalence(original, anonymized).size(), 1u);
  EXPECT_TRUE(VerifyEquivalence(original, anonymized, {{"x", "y"}}).empty());
  // Missing pairs are reported as unreachable.
  original.paths[{"b", "a"}].paths = {{"b", "x", "a"}};
  auto diff = VerifyEquivalence(original, anonymized, {{"x", "y"}});
  ASSERT_EQ(diff.size(), 1u);
  EXPECT_EQ(diff[0].status, TraceStatus::kNoRoute);
}

// ---------------------------------------------------------------------------
// End-to-end runs.
// ---------------------------------------------------------------------------

TEST(PipelineTest, CampusEmbeddingVerifies) {
  PipelineOutput out = AnonymizeSnapshot(
      LoadFixture("campus"), Library(), Config(ExpansionMode::kEmbedding, 2, 7));
  const RunReport& r = out.report;
  ASSERT_FALSE(r.error_phase) << r.error_message;
  EXPECT_TRUE(r.kdma_strong);
  EXPECT_TRUE(r.path_diff.empty());
  EXPECT_TRUE(r.verified);
  EXPECT_EQ(r.exit_code, 0);
  EXPECT_FALSE(r.reference.empty());
  ASSERT_TRUE(r.ks_to_reference.has_value());
  EXPECT_LE(*r.ks_to_reference, 0.2);
  EXPECT_EQ(r.requested_adds, 5);
  EXPECT_GE(r.actual_adds, 1);
  EXPECT_EQ(r.fake_hosts, 4);
  EXPECT_EQ(out.anonymized.configs.size(), 5u + r.actual_adds);
  EXPECT_EQ(r.similarity.routers, r.actual_adds);
}

TEST(PipelineTest, ReplicaRoundsUpToWholeCopies) {
  RunConfig c = Config(ExpansionMode::kReplica, 2, 1);
  c.add_routers = 7;
  PipelineOutput out = AnonymizeSnapshot(LoadFixture("campus"), {}, c);
  ASSERT_FALSE(out.report.error_phase) << out.report.error_message;
  EXPECT_EQ(out.report.requested_adds, 7);
  EXPECT_EQ(out.report.actual_adds, 10);
  auto j = nlohmann::json::parse(ReportToJson(out.report));
  EXPECT_EQ(j["expansion"]["gap"], 3);
  EXPECT_TRUE(j["expansion"]["reference"].is_null());
  EXPECT_TRUE(out.report.verified);
}

TEST(PipelineTest, IdenticalConfigsAreByteIdentical) {
  Snapshot bgp2 = LoadFixture("bgp2");
  auto library = Library();
  for (ExpansionMode mode : {ExpansionMode::kReplica, ExpansionMode::kSampleConnect,
                             ExpansionMode::kEmbedding}) {
    RunConfig c = Config(mode, 2, 3);
    PipelineOutput a = AnonymizeSnapshot(bgp2, library, c);
    PipelineOutput b = AnonymizeSnapshot(bgp2, library, c);
    EXPECT_EQ(ReportToJson(a.report), ReportToJson(b.report));
    EXPECT_EQ(RenderAll(a.anonymized), RenderAll(b.anonymized));
  }
}

TEST(PipelineTest, SeedsChangeTheOutput) {
  Snapshot ospf10 = LoadFixture("ospf10");
  auto library = Library();
  RunConfig c = Config(ExpansionMode::kSampleConnect, 2, 1);
  std::string first = RenderAll(AnonymizeSnapshot(ospf10, library, c).anonymized);
  c.seed = 2;
  EXPECT_NE(first, RenderAll(AnonymizeSnapshot(ospf10, library, c).anonymized));
}

TEST(PipelineTest, WithoutRepairVerificationFails) {
  // Phase isolation: the replica of ospf10 diverts original paths.
  Snapshot ospf10 = LoadFixture("ospf10");
  RunConfig c = Config(ExpansionMode::kReplica, 2, 1);
  c.repair = false;
  PipelineOutput broken = AnonymizeSnapshot(ospf10, {}, c);
  ASSERT_FALSE(broken.report.error_phase);
  EXPECT_FALSE(broken.report.equivalent);
  EXPECT_FALSE(broken.report.path_diff.empty());
  EXPECT_EQ(broken.report.exit_code, 2);
  c.repair = true;
  PipelineOutput fixed = AnonymizeSnapshot(ospf10, {}, c);
  EXPECT_TRUE(fixed.report.equivalent);
  EXPECT_EQ(fixed.report.exit_code, 0);
}

TEST(PipelineTest, IterativeRepairAlsoVerifies) {
  RunConfig c = Config(ExpansionMode::kReplica, 2, 1);
  c.repair_mode = RepairMode::kIterative;
  PipelineOutput out = AnonymizeSnapshot(LoadFixture("ospf10"), {}, c);
  ASSERT_FALSE(out.report.error_phase) << out.report.error_message;
  EXPECT_TRUE(out.report.intra_as.empty());
  EXPECT_FALSE(out.report.inter_as.costs_assigned.empty());
  EXPECT_TRUE(out.report.verified);
}

TEST(PipelineTest, AnonymizersMeetTheirChecks) {
  Snapshot campus = LoadFixture("campus");
  auto library = Library();
  for (Anonymizer a : {Anonymizer::kGreedy, Anonymizer::kMaxSmt, Anonymizer::kKda}) {
    RunConfig c = Config(ExpansionMode::kEmbedding, 2, 1);
    c.anonymizer = a;
    PipelineOutput out = AnonymizeSnapshot(campus, library, c);
    ASSERT_FALSE(out.report.error_phase)
        << AnonymizerName(a) << ": " << out.report.error_message;
    EXPECT_TRUE(out.report.anonymity_check) << AnonymizerName(a);
    EXPECT_TRUE(out.report.equivalent) << AnonymizerName(a);
    if (a == Anonymizer::kKda) {
      EXPECT_TRUE(out.report.kda);
    } else {
      EXPECT_TRUE(out.report.kdma_strong);
    }
  }
}

TEST(PipelineTest, MaxSmtOutsideEmbeddingIsAnError) {
  RunConfig c = Config(ExpansionMode::kReplica, 2, 1);
  c.anonymizer = Anonymizer::kMaxSmt;
  RunReport r = AnonymizeSnapshot(LoadFixture("campus"), {}, c).report;
  ASSERT_TRUE(r.error_phase);
  EXPECT_EQ(*r.error_phase, "expand");
  EXPECT_EQ(r.error_code, ErrorCode::kInvalidArgument);
  EXPECT_EQ(r.exit_code, 1);
}

TEST(PipelineTest, InvalidKIsRejectedInPreprocess) {
  RunConfig c = Config(ExpansionMode::kReplica, 0, 1);
  RunReport r = AnonymizeSnapshot(LoadFixture("campus"), {}, c).report;
  ASSERT_TRUE(r.error_phase);
  EXPECT_EQ(*r.error_phase, "preprocess");
  EXPECT_EQ(r.error_code, ErrorCode::kInvalidK);
}

TEST(PipelineTest, ExitCodes) {
  EXPECT_EQ(ExitCodeFor(ErrorCode::kInfeasible), 3);
  EXPECT_EQ(ExitCodeFor(ErrorCode::kUnsatisfiable), 3);
  EXPECT_EQ(ExitCodeFor(ErrorCode::kSolverTimeout), 4);
  EXPECT_EQ(ExitCodeFor(ErrorCode::kNonConvergence), 2);
  EXPECT_EQ(ExitCodeFor(ErrorCode::kMalformedLine), 1);
}

TEST(PipelineTest, FilterMimicryRaisesPathAnonymityOnBgp2Replica) {
  Snapshot bgp2 = LoadFixture("bgp2");
  RunConfig c = Config(ExpansionMode::kReplica, 2, 1);
  double with = AnonymizeSnapshot(bgp2, {}, c).report.n_r_after;
  c.mimic_filters = false;
  double without = AnonymizeSnapshot(bgp2, {}, c).report.n_r_after;
  EXPECT_GT(with, without);
}

// ---------------------------------------------------------------------------
// Files and the report.
// ---------------------------------------------------------------------------

class RunPipelineTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = std::filesystem::temp_directory_path() /
           ("netcloak_pipeline_" + std::to_string(::getpid()));
    std::filesystem::remove_all(dir_);
    std::filesystem::create_directories(dir_);
  }
  void TearDown() override { std::filesystem::remove_all(dir_); }
  std::filesystem::path dir_;
};

TEST_F(RunPipelineTest, WritesSnapshotAndCompleteReport) {
  RunConfig c = Config(ExpansionMode::kEmbedding, 2, 7);
  c.input_dir = FixtureDir("campus");
  c.output_dir = dir_ / "out";
  c.reference_dir = FixtureDir("reference");
  c.report_path = dir_ / "report.json";
  RunReport r = RunPipeline(c);
  EXPECT_EQ(r.exit_code, 0);
  Snapshot written = LoadSnapshot(c.output_dir);
  EXPECT_EQ(written.configs.size(), 5u + r.actual_adds);
  auto j = nlohmann::json::parse(ReadFile(c.report_path));
  EXPECT_EQ(j["schema"], 1);
  EXPECT_EQ(j["config"]["seed"], 7);
  for (const char* key : {"config", "expansion", "rationality", "kdma_check",
                          "similarity", "n_r", "repair", "verification",
                          "wall_ms", "error", "exit_code"}) {
    EXPECT_TRUE(j.contains(key)) << key;
  }
  EXPECT_TRUE(j["kdma_check"]["passed"].get<bool>());
  EXPECT_TRUE(j["verification"]["path_diff"].empty());
  // Timings are off by default.
  EXPECT_TRUE(j["wall_ms"]["repair"].is_null());
}

TEST_F(RunPipelineTest, ErrorsStillWriteTheReport) {
  RunConfig c = Config(ExpansionMode::kEmbedding, 2, 1);
  c.input_dir = FixtureDir("campus");
  c.output_dir = dir_ / "out";
  c.report_path = dir_ / "report.json";
  RunReport r = RunPipeline(c);  // No reference directory.
  EXPECT_EQ(r.exit_code, 1);
  EXPECT_FALSE(std::filesystem::exists(c.output_dir));
  auto j = nlohmann::json::parse(ReadFile(c.report_path));
  EXPECT_EQ(j["error"]["phase"], "preprocess");
  EXPECT_EQ(j["error"]["code"], "InvalidArgument");
  EXPECT_TRUE(j.contains("verification"));
}

TEST_F(RunPipelineTest, OutputMustDifferFromInput) {
  RunConfig c = Config(ExpansionMode::kReplica, 2, 1);
  c.input_dir = FixtureDir("campus");
  c.output_dir = FixtureDir("campus");
  EXPECT_THROW(RunPipeline(c), Error);
}

TEST(NamesTest, RoundTrip) {
  for (auto m : {ExpansionMode::kReplica, ExpansionMode::kSampleConnect,
                 ExpansionMode::kEmbedding}) {
    EXPECT_EQ(ParseExpansionMode(ExpansionModeName(m)), m);
  }
  for (auto a : {Anonymizer::kGreedy, Anonymizer::kMaxSmt, Anonymizer::kKda}) {
    EXPECT_EQ(ParseAnonymizer(AnonymizerName(a)), a);
  }
  for (auto m : {RepairMode::kConstraint, RepairMode::kIterative}) {
    EXPECT_EQ(ParseRepairMode(RepairModeName(m)), m);
  }
  EXPECT_FALSE(ParseExpansionMode("bogus"));
}

}  // namespace
}  // namespace netcloak
