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
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace normforge::pipeline {

using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;

std::optional<std::string> process_env(const std::string& name);

// Replaces ${VAR} and ${VAR:-default} in a value. An unset variable without a
// default is an error.
std::string interpolate(const std::string& value, const EnvLookup& env);

// INI file: [section] headers, key = value lines, ';' or '#' comments.
class Config {
 public:
  using Section = std::map<std::string, std::string>;

  static Config load(const std::filesystem::path& path, const EnvLookup& env = process_env);
  static Config parse(const std::string& text, const std::filesystem::path& base_dir,
                      const EnvLookup& env = process_env);

  bool has(const std::string& section, const std::string& key) const;
  bool has_section(const std::string& section) const { return sections_.count(section) != 0; }
  const Section& section(const std::string& name) const;

  std::string get(const std::string& section, const std::string& key,
                  const std::string& fallback) const;
  std::string require(const std::string& section, const std::string& key) const;
  std::int64_t get_int(const std::string& section, const std::string& key,
                       std::int64_t fallback) const;
  double get_double(const std::string& section, const std::string& key, double fallback) const;
  std::vector<std::string> get_list(const std::string& section, const std::string& key) const;
  // Relative paths resolve against the config file's directory.
  std::filesystem::path get_path(const std::string& section, const std::string& key,
                                 const std::filesystem::path& fallback = {}) const;
  std::filesystem::path resolve(const std::filesystem::path& p) const;

  // Digest of the named sections (missing ones included as absent). Keys
  // named `token` and the keys in `ignore` are left out.
  std::string digest(const std::vector<std::string>& sections,
                     const std::vector<std::string>& ignore = {}) const;

  const std::filesystem::path& base_dir() const { return base_dir_; }

 private:
  std::filesystem::path base_dir_;
  std::map<std::string, Section> sections_;
};

}  // namespace normforge::pipeline
