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

#include "netcloak/error.h"

namespace netcloak {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kMalformedLine: return "MalformedLine";
    case ErrorCode::kMissingHostname: return "MissingHostname";
    case ErrorCode::kDuplicateHostname: return "DuplicateHostname";
    case ErrorCode::kMalformedHost: return "MalformedHost";
    case ErrorCode::kIo: return "Io";
    case ErrorCode::kAmbiguousSubnet: return "AmbiguousSubnet";
    case ErrorCode::kOrphanHost: return "OrphanHost";
    case ErrorCode::kEmptySequence: return "EmptySequence";
    case ErrorCode::kGraphmlParse: return "GraphmlParse";
    case ErrorCode::kInvalidK: return "InvalidK";
    case ErrorCode::kUnreachableTarget: return "UnreachableTarget";
    case ErrorCode::kNoFeasibleReference: return "NoFeasibleReference";
    case ErrorCode::kIncompleteMatching: return "IncompleteMatching";
    case ErrorCode::kInfeasible: return "Infeasible";
    case ErrorCode::kUnsatisfiable: return "Unsatisfiable";
    case ErrorCode::kSolverTimeout: return "SolverTimeout";
    case ErrorCode::kUnreachablePlan: return "UnreachablePlan";
    case ErrorCode::kSubnetPoolExhausted: return "SubnetPoolExhausted";
    case ErrorCode::kIncompleteAssignment: return "IncompleteAssignment";
    case ErrorCode::kSessionMismatch: return "SessionMismatch";
    case ErrorCode::kNoRoute: return "NoRoute";
    case ErrorCode::kLoopDetected: return "LoopDetected";
    case ErrorCode::kPathNotInGraph: return "PathNotInGraph";
    case ErrorCode::kUnsat: return "Unsat";
    case ErrorCode::kNonConvergence: return "NonConvergence";
    case ErrorCode::kConflictingRequirement: return "ConflictingRequirement";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kInternal: return "Internal";
  }
  return "Unknown";
}

}  // namespace netcloak
