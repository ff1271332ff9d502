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

#include "pipeline/manifest.hpp"

#include "common/error.hpp"
#include "common/text.hpp"
#include "json.hpp"

namespace normforge::pipeline {

using nlohmann::json;

std::string to_json(const Manifest& m) {
  json inputs = json::object();
  for (const auto& [name, v] : m.inputs) inputs[name] = {{"path", v.first}, {"sha256", v.second}};
  json j = {{"stage", m.stage},
            {"version", m.version},
            {"seed", m.seed},
            {"config_digest", m.config_digest},
            {"inputs", inputs},
            {"outputs", m.outputs},
            {"state", m.state}};
  return j.dump(2) + "\n";
}

Manifest manifest_from_json(const std::string& text, const std::string& origin) {
  try {
    json j = json::parse(text);
    Manifest m;
    m.stage = j.at("stage").get<std::string>();
    m.version = j.at("version").get<std::string>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.config_digest = j.at("config_digest").get<std::string>();
    for (const auto& [name, v] : j.at("inputs").items()) {
      m.inputs[name] = {v.at("path").get<std::string>(), v.at("sha256").get<std::string>()};
    }
    m.outputs = j.at("outputs").get<std::map<std::string, std::string>>();
    m.state = j.at("state").get<std::vector<std::string>>();
    return m;
  } catch (const json::exception& e) {
    fail(ErrorCode::Parse, origin + ": malformed manifest: " + e.what());
  }
}

std::optional<Manifest> read_manifest(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) return std::nullopt;
  try {
    return manifest_from_json(text::read_file(path), path.string());
  } catch (const Error&) {
    return std::nullopt;  // unreadable manifests just force a rerun
  }
}

}  // namespace normforge::pipeline
