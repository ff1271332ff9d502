// Copyright 2026 The normforge Authors
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

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace normforge::pipeline {

// Run record written to <out>/manifests/<stage>.json after a stage succeeds.
// Inputs map logical names to paths and digests; outputs map paths relative
// to the output directory to digests. `state` lists persistent files the
// stage reads and extends (caches, logs).
struct Manifest {
  std::string stage;
  std::string version;
  std::uint64_t seed = 0;
  std::string config_digest;
  std::map<std::string, std::pair<std::string, std::string>> inputs;  // name -> (path, sha256)
  std::map<std::string, std::string> outputs;                         // relative path -> sha256
  std::vector<std::string> state;

  bool operator==(const Manifest&) const = default;
};

std::string to_json(const Manifest& m);
Manifest manifest_from_json(const std::string& text, const std::string& origin);
std::optional<Manifest> read_manifest(const std::filesystem::path& path);

}  // namespace normforge::pipeline
