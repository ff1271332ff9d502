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

#include "pipeline/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <cstdlib>
#include <sstream>

#include "common/digest.hpp"
#include "common/error.hpp"
#include "common/text.hpp"

namespace normforge::pipeline {

std::optional<std::string> process_env(const std::string& name) {
  const char* v = std::getenv(name.c_str());
  if (!v) return std::nullopt;
  return std::string(v);
}

std::string interpolate(const std::string& value, const EnvLookup& env) {
  std::string out;
  std::size_t pos = 0;
  while (pos < value.size()) {
    std::size_t start = value.find("${", pos);
    if (start == std::string::npos) {
      out.append(value, pos);
      break;
    }
    out.append(value, pos, start - pos);
    std::size_t end = value.find('}', start);
    if (end == std::string::npos) fail(ErrorCode::Parse, "unterminated ${ in '" + value + "'");
    std::string body = value.substr(start + 2, end - start - 2);
    std::optional<std::string> fallback;
    if (auto d = body.find(":-"); d != std::string::npos) {
      fallback = body.substr(d + 2);
      body = body.substr(0, d);
    }
    if (body.empty()) fail(ErrorCode::Parse, "empty variable name in '" + value + "'");
    auto v = env(body);
    if (!v || (v->empty() && fallback)) {
      if (!fallback) fail(ErrorCode::InvalidArgument, "environment variable " + body + " is not set");
      v = fallback;
    }
    out += *v;
    pos = end + 1;
  }
  return out;
}

Config Config::load(const std::filesystem::path& path, const EnvLookup& env) {
  if (!std::filesystem::is_regular_file(path)) {
    fail(ErrorCode::NotFound, "config file not found: " + path.string());
  }
  auto base = std::filesystem::absolute(path).parent_path();
  return parse(text::read_file(path), base, env);
}

Config Config::parse(const std::string& data, const std::filesystem::path& base_dir,
                     const EnvLookup& env) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  std::istringstream in(data);
  try {
    pt::ini_parser::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    fail(ErrorCode::Parse, std::string("config: ") + e.what());
  }
  Config cfg;
  cfg.base_dir_ = base_dir;
  for (const auto& [name, body] : tree) {
    if (body.empty() && !body.data().empty()) {
      fail(ErrorCode::Parse, "config: key '" + name + "' outside any section");
    }
    Section& s = cfg.sections_[name];
    for (const auto& [key, value] : body) {
      s[key] = interpolate(text::trim(value.data()), env);
    }
  }
  return cfg;
}

bool Config::has(const std::string& section, const std::string& key) const {
  auto it = sections_.find(section);
  return it != sections_.end() && it->second.count(key) != 0;
}

const Config::Section& Config::section(const std::string& name) const {
  auto it = sections_.find(name);
  if (it == sections_.end()) fail(ErrorCode::InvalidArgument, "config: missing section [" + name + "]");
  return it->second;
}

std::string Config::get(const std::string& section, const std::string& key,
                        const std::string& fallback) const {
  if (!has(section, key)) return fallback;
  return sections_.at(section).at(key);
}

std::string Config::require(const std::string& section, const std::string& key) const {
  if (!has(section, key)) {
    fail(ErrorCode::InvalidArgument, "config: missing [" + section + "] " + key);
  }
  return sections_.at(section).at(key);
}

std::int64_t Config::get_int(const std::string& section, const std::string& key,
                             std::int64_t fallback) const {
  if (!has(section, key)) return fallback;
  try {
    return text::parse_int(sections_.at(section).at(key));
  } catch (const Error& e) {
    fail(ErrorCode::InvalidArgument, "config: [" + section + "] " + key + ": " + e.what());
  }
}

double Config::get_double(const std::string& section, const std::string& key,
                          double fallback) const {
  if (!has(section, key)) return fallback;
  try {
    return text::parse_double(sections_.at(section).at(key));
  } catch (const Error& e) {
    fail(ErrorCode::InvalidArgument, "config: [" + section + "] " + key + ": " + e.what());
  }
}

std::vector<std::string> Config::get_list(const std::string& section,
                                          const std::string& key) const {
  std::vector<std::string> out;
  if (!has(section, key)) return out;
  for (const auto& part : text::split(sections_.at(section).at(key), ',')) {
    std::string t = text::trim(part);
    if (!t.empty()) out.push_back(t);
  }
  return out;
}

std::filesystem::path Config::resolve(const std::filesystem::path& p) const {
  if (p.empty() || p.is_absolute()) return p;
  return (base_dir_ / p).lexically_normal();
}

std::filesystem::path Config::get_path(const std::string& section, const std::string& key,
                                       const std::filesystem::path& fallback) const {
  if (!has(section, key)) return resolve(fallback);
  return resolve(sections_.at(section).at(key));
}

std::string Config::digest(const std::vector<std::string>& sections,
                           const std::vector<std::string>& ignore) const {
  std::vector<std::string> names = sections;
  std::sort(names.begin(), names.end());
  names.erase(std::unique(names.begin(), names.end()), names.end());
  std::string canon;
  for (const auto& name : names) {
    canon += "[" + name + "]\n";
    auto it = sections_.find(name);
    if (it == sections_.end()) continue;
    for (const auto& [k, v] : it->second) {
      if (k == "token" || std::find(ignore.begin(), ignore.end(), k) != ignore.end()) continue;
      canon += text::escape_field(k) + "=" + text::escape_field(v) + "\n";
    }
  }
  return sha256_hex(canon);
}

}  // namespace normforge::pipeline
