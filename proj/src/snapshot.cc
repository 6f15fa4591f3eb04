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

#include "netcloak/snapshot.h"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <vector>

#include "netcloak/error.h"

namespace netcloak {
namespace {

namespace fs = std::filesystem;

std::string ReadFile(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot read " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void WriteFile(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out << text;
}

// Files in `dir` with `extension`, sorted by name.
std::vector<fs::path> ListFiles(const fs::path& dir, const char* extension) {
  std::vector<fs::path> files;
  if (!fs::is_directory(dir)) return files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == extension) {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  return files;
}

}  // namespace

Snapshot LoadSnapshot(const fs::path& dir) {
  if (!fs::is_directory(dir / "configs")) {
    throw Error(ErrorCode::kIo, "no configs directory under " + dir.string());
  }
  Snapshot snapshot;
  for (const auto& path : ListFiles(dir / "configs", ".cfg")) {
    RouterConfig config;
    try {
      config = ParseConfig(ReadFile(path));
    } catch (const Error& e) {
      throw Error(e.code(), path.filename().string() + ": " + e.what());
    }
    std::string name = config.hostname;
    if (!snapshot.configs.emplace(name, std::move(config)).second) {
      throw Error(ErrorCode::kDuplicateHostname, "router '" + name + "'");
    }
  }
  for (const auto& path : ListFiles(dir / "hosts", ".json")) {
    HostSpec host;
    try {
      host = ParseHost(ReadFile(path));
    } catch (const Error& e) {
      throw Error(e.code(), path.filename().string() + ": " + e.what());
    }
    std::string name = host.hostname;
    if (snapshot.configs.count(name) ||
        !snapshot.hosts.emplace(name, host).second) {
      throw Error(ErrorCode::kDuplicateHostname, "host '" + name + "'");
    }
  }
  return snapshot;
}

void WriteSnapshot(const Snapshot& snapshot, const fs::path& dir) {
  for (const char* sub : {"configs", "hosts"}) {
    fs::create_directories(dir / sub);
    for (const auto& path :
         ListFiles(dir / sub, std::string(sub) == "configs" ? ".cfg" : ".json")) {
      fs::remove(path);
    }
  }
  for (const auto& [name, config] : snapshot.configs) {
    WriteFile(dir / "configs" / (name + ".cfg"), RenderConfig(config));
  }
  for (const auto& [name, host] : snapshot.hosts) {
    WriteFile(dir / "hosts" / (name + ".json"), RenderHost(host));
  }
}

}  // namespace netcloak
