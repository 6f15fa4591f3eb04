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
// File: netcloak_main.cc
// -----------------------------------------------------------------------------
//
// Command-line entry point:
//
//   netcloak anonymize --input DIR --output DIR [--mode ...] [--report F]
//
// Exit codes: 0 verified, 1 error, 2 verification failure, 3 infeasible
// anonymity, 4 solver timeout.

#include <iostream>
#include <map>
#include <string>

#include "CLI11.hpp"
#include "netcloak/error.h"
#include "netcloak/pipeline.h"

namespace {

template <typename T>
std::map<std::string, T> NameMap(std::initializer_list<T> values,
                                 std::string_view (*name)(T)) {
  std::map<std::string, T> out;
  for (T v : values) out.emplace(std::string(name(v)), v);
  return out;
}

// Registers an enum-valued option that accepts the names in `names` and
// shows them (not the underlying integers) in --help.
template <typename T>
CLI::Option* AddEnumOption(CLI::App* app, const std::string& flag, T& value,
                           const std::map<std::string, T>& names,
                           const std::string& description,
                           const std::string& default_name) {
  std::string text = "{";
  for (const auto& [name, _] : names) {
    text += (text.size() > 1 ? "," : "") + name;
  }
  text += "} [" + default_name + "]";
  return app->add_option(flag, value, description)
      ->transform(CLI::CheckedTransformer(names, CLI::ignore_case))
      ->option_text(text);
}

}  // namespace

int main(int argc, char** argv) {
  using namespace netcloak;
  CLI::App app{"Network configuration anonymization with route repair"};
  app.require_subcommand(1);
  CLI::App* anonymize =
      app.add_subcommand("anonymize", "Anonymize a configuration snapshot");

  RunConfig config;
  std::string input, output, reference, report;
  SamplingKind sampling_kind = config.sampling.kind;
  anonymize->add_option("--input", input, "Input snapshot directory")
      ->required()
      ->check(CLI::ExistingDirectory);
  anonymize->add_option("--output", output, "Output snapshot directory")
      ->required();
  AddEnumOption(anonymize, "--mode", config.mode,
                NameMap({ExpansionMode::kReplica, ExpansionMode::kSampleConnect,
                         ExpansionMode::kEmbedding},
                        &ExpansionModeName),
                "Topology expansion strategy", "embedding");
  anonymize->add_option("--add-routers", config.add_routers,
                        "Fake routers to add (0: one per real router)");
  anonymize->add_option("--k-routers", config.params.k_routers,
                        "Router anonymity k")
      ->default_val(2);
  anonymize->add_option("--k-hosts", config.params.k_hosts, "Host anonymity k")
      ->default_val(2);
  AddEnumOption(anonymize, "--kdma", config.params.level,
                NameMap({KdmaLevel::kWeak, KdmaLevel::kStrong}, &KdmaLevelName),
                "k-DMA level", "strong");
  AddEnumOption(anonymize, "--anonymizer", config.anonymizer,
                NameMap({Anonymizer::kGreedy, Anonymizer::kMaxSmt, Anonymizer::kKda},
                        &AnonymizerName),
                "Anonymizer", "greedy");
  std::map<std::string, SamplingKind> sampling_names;
  for (SamplingKind k : AllSamplingKinds()) {
    sampling_names.emplace(std::string(SamplingKindName(k)), k);
  }
  AddEnumOption(anonymize, "--sampling", sampling_kind, sampling_names,
                "Sampling method for sample-connect",
                std::string(SamplingKindName(sampling_kind)));
  AddEnumOption(anonymize, "--repair", config.repair_mode,
                NameMap({RepairMode::kConstraint, RepairMode::kIterative},
                        &RepairModeName),
                "Route repair method", "constraint");
  AddEnumOption(anonymize, "--ibgp-strategy", config.ibgp_strategy,
                NameMap({IbgpStrategy::kFilterNextHop, IbgpStrategy::kBlockIgp},
                        &IbgpStrategyName),
                "Fix for routes learned from fake iBGP peers", "filter-nexthop");
  anonymize->add_option("--reference-dir", reference,
                        "GraphML reference library");
  anonymize->add_option("--seed", config.seed, "Random seed")->default_val(0);
  anonymize->add_option("--report", report, "JSON report path");
  anonymize->add_option("--solver-timeout-ms", config.solver_timeout_ms,
                        "Per-solve SMT budget")
      ->default_val(60000);
  anonymize->add_flag("--record-timings", config.record_timings,
                      "Record wall times per phase in the report");
  bool no_mimicry = false, no_repair = false;
  anonymize->add_flag("--no-filter-mimicry", no_mimicry,
                      "Ablation: skip analog filter entries for fake hosts");
  anonymize->add_flag("--no-repair", no_repair,
                      "Ablation: skip route repair");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // --help exits 0; usage errors share the generic error code.
    return app.exit(e) == 0 ? 0 : 1;
  }

  config.input_dir = input;
  config.output_dir = output;
  config.reference_dir = reference;
  config.report_path = report;
  config.sampling.kind = sampling_kind;
  config.mimic_filters = !no_mimicry;
  config.repair = !no_repair;
  try {
    RunReport r = RunPipeline(config);
    if (r.error_phase) {
      std::cerr << "netcloak: " << *r.error_phase << ": " << r.error_message
                << "\n";
    } else {
      std::cerr << "netcloak: added " << r.actual_adds << " routers, "
                << r.fake_hosts << " hosts; equivalent="
                << (r.equivalent ? "yes" : "no")
                << " anonymity=" << (r.anonymity_check ? "yes" : "no") << "\n";
      for (const auto& d : r.path_diff) {
        std::cerr << "  missing path " << d.src << " -> " << d.dst << ":";
        for (const auto& node : d.missing) std::cerr << " " << node;
        std::cerr << "\n";
      }
    }
    return r.exit_code;
  } catch (const Error& e) {
    std::cerr << "netcloak: " << e.what() << "\n";
    return ExitCodeFor(e.code());
  }
}
