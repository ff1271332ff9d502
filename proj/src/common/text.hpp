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
#include <string>
#include <string_view>
#include <vector>

namespace normforge::text {

std::string trim(std::string_view s);
std::string casefold(std::string_view s);
std::vector<std::string> split(std::string_view s, char sep);
std::vector<std::string> split_whitespace(std::string_view s);
std::string join(const std::vector<std::string>& parts, std::string_view sep);

// Tab-separated fields escape backslash, tab, CR and LF so that any string
// survives a one-record-per-line file.
std::string escape_field(std::string_view s);
std::string unescape_field(std::string_view s);

// Shortest representation that parses back to the same double.
std::string format_double(double v);
double parse_double(std::string_view s);
std::int64_t parse_int(std::string_view s);

struct Line {
  std::size_t number;  // 1-based
  std::string text;
};

// Reads every line of a file; '\r' line endings are tolerated. Throws Io when
// the file cannot be opened.
std::vector<Line> read_lines(const std::filesystem::path& path);

// Skips blank lines and lines starting with '#'.
bool is_record(const std::string& line);

std::string read_file(const std::filesystem::path& path);

// Writes to a sibling temporary and renames, so readers never observe a
// half-written file.
void write_file_atomic(const std::filesystem::path& path, std::string_view data);

}  // namespace normforge::text
