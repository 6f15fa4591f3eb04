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
// File: snapshot.h
// -----------------------------------------------------------------------------
//
// A snapshot is a directory holding `configs/*.cfg` (one router configuration
// per file) and `hosts/*.json` (one host sidecar per file). In memory it is
// keyed by hostname so iteration order is deterministic.

#ifndef NETCLOAK_SNAPSHOT_H_
#define NETCLOAK_SNAPSHOT_H_

#include <filesystem>
#include <map>
#include <string>

#include "netcloak/config_model.h"

namespace netcloak {

struct Snapshot {
  std::map<std::string, RouterConfig> configs;
  std::map<std::string, HostSpec> hosts;
};

// Loads a snapshot directory. Throws kIo if the directory or its `configs`
// subdirectory is missing, kDuplicateHostname if two files declare the same
// router or host name, and propagates parse errors (prefixed with the file).
Snapshot LoadSnapshot(const std::filesystem::path& dir);

// Writes `configs/<hostname>.cfg` and `hosts/<hostname>.json` under `dir`,
// creating it. Existing files in those subdirectories are removed first so the
// output reflects exactly `snapshot`.
void WriteSnapshot(const Snapshot& snapshot, const std::filesystem::path& dir);

}  // namespace netcloak

#endif  // NETCLOAK_SNAPSHOT_H_
