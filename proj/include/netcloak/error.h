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
//
// -----------------------------------------------------------------------------
// File: error.h
// -----------------------------------------------------------------------------
//
// Every module reports failures by throwing `netcloak::Error`, which carries a
// typed `ErrorCode`. Callers that need to distinguish failure kinds (the CLI
// maps some of them to exit codes) switch on `Error::code()`.

#ifndef NETCLOAK_ERROR_H_
#define NETCLOAK_ERROR_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace netcloak {

enum class ErrorCode {
  // Configuration and snapshot loading.
  kMalformedLine,
  kMissingHostname,
  kDuplicateHostname,
  kMalformedHost,
  kIo,
  // Topology.
  kAmbiguousSubnet,
  kOrphanHost,
  kEmptySequence,
  kGraphmlParse,
  // Expansion.
  kInvalidK,
  kUnreachableTarget,
  kNoFeasibleReference,
  kIncompleteMatching,
  // Anonymization.
  kInfeasible,
  kUnsatisfiable,
  kSolverTimeout,
  // Configuration generation.
  kUnreachablePlan,
  kSubnetPoolExhausted,
  kIncompleteAssignment,
  // Simulation.
  kSessionMismatch,
  kNoRoute,
  kLoopDetected,
  // Repair.
  kPathNotInGraph,
  kUnsat,
  kNonConvergence,
  kConflictingRequirement,
  // Generic.
  kInvalidArgument,
  kInternal,
};

// Returns a stable CamelCase name for `code`, e.g. "AmbiguousSubnet".
std::string_view ErrorCodeName(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(ErrorCodeName(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace netcloak

#endif  // NETCLOAK_ERROR_H_
