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

#include "norms/norm_matrix.hpp"

#include <algorithm>
#include <set>
#include <sstream>
#include <unordered_set>

#include "common/error.hpp"
#include "common/text.hpp"

namespace normforge::norms {

NormMatrix::NormMatrix(std::vector<Concept> concepts, std::vector<Feature> features)
    : concepts_(std::move(concepts)), features_(std::move(features)) {
  std::unordered_set<std::string> seen;
  for (std::size_t i = 0; i < concepts_.size(); ++i) {
    const Concept& c = concepts_[i];
    if (c.id != static_cast<int>(i)) {
      fail(ErrorCode::InvalidArgument, "concept ids must be dense and ordered");
    }
    if (text::trim(c.label).empty()) {
      fail(ErrorCode::InvalidArgument, "concept " + std::to_string(i) + " has an empty label");
    }
    if (!seen.insert(text::casefold(text::trim(c.label))).second) {
      fail(ErrorCode::InvalidArgument, "duplicate concept label '" + c.label + "'");
    }
  }
  for (std::size_t j = 0; j < features_.size(); ++j) {
    const Feature& f = features_[j];
    if (f.id != static_cast<int>(j)) {
      fail(ErrorCode::InvalidArgument, "feature ids must be dense and ordered");
    }
    if (f.phrase.empty()) {
      fail(ErrorCode::InvalidArgument, "feature " + std::to_string(j) + " has an empty phrase");
    }
    if (std::find(f.members.begin(), f.members.end(), f.phrase) == f.members.end()) {
      fail(ErrorCode::InvalidArgument,
           "feature '" + f.phrase + "' does not list its phrase among its members");
    }
  }
  rows_.resize(concepts_.size());
}

void NormMatrix::check_ids(int concept_id, int feature_id) const {
  if (concept_id < 0 || concept_id >= static_cast<int>(concepts_.size()) ||
      feature_id < 0 || feature_id >= static_cast<int>(features_.size())) {
    fail(ErrorCode::InvalidArgument, "cell (" + std::to_string(concept_id) + ", " +
                                         std::to_string(feature_id) + ") out of range");
  }
}

const NormMatrix::Row& NormMatrix::row(int concept_id) const {
  if (concept_id < 0 || concept_id >= static_cast<int>(rows_.size())) {
    fail(ErrorCode::InvalidArgument, "concept id out of range");
  }
  return rows_[static_cast<std::size_t>(concept_id)];
}

Provenance NormMatrix::get(int concept_id, int feature_id) const {
  check_ids(concept_id, feature_id);
  const Row& r = rows_[static_cast<std::size_t>(concept_id)];
  auto it = std::lower_bound(r.begin(), r.end(), feature_id,
                             [](const auto& cell, int f) { return cell.first < f; });
  if (it == r.end() || it->first != feature_id) return Provenance::Absent;
  return it->second;
}

void NormMatrix::set(int concept_id, int feature_id, Provenance p) {
  check_ids(concept_id, feature_id);
  Row& r = rows_[static_cast<std::size_t>(concept_id)];
  auto it = std::lower_bound(r.begin(), r.end(), feature_id,
                             [](const auto& cell, int f) { return cell.first < f; });
  const bool present = it != r.end() && it->first == feature_id;
  if (p == Provenance::Absent) {
    if (present) r.erase(it);
  } else if (present) {
    it->second = p;
  } else {
    r.insert(it, {feature_id, p});
  }
}

std::size_t NormMatrix::cell_count(View view) const {
  std::size_t n = 0;
  for (const Row& r : rows_) {
    for (const auto& [f, p] : r) n += is_set(p, view) ? 1 : 0;
  }
  return n;
}

std::size_t NormMatrix::count(Provenance p) const {
  if (p == Provenance::Absent) {
    return concepts_.size() * features_.size() - cell_count(View::Full);
  }
  std::size_t n = 0;
  for (const Row& r : rows_) {
    for (const auto& cell : r) n += cell.second == p ? 1 : 0;
  }
  return n;
}

NormMatrix NormMatrix::human_only() const {
  NormMatrix out = *this;
  for (Row& r : out.rows_) {
    std::erase_if(r, [](const auto& cell) { return cell.second != Provenance::HumanElicited; });
  }
  return out;
}

// ---- serialization -------------------------------------------------------

std::string serialize_matrix(const NormMatrix& m) {
  std::ostringstream out;
  out << "normmatrix v" << kMatrixFormatVersion << ' ' << m.concept_count() << ' '
      << m.feature_count() << '\n';
  for (const Concept& c : m.concepts()) {
    out << c.id << '\t' << text::escape_field(c.label) << '\n';
  }
  for (const Feature& f : m.features()) {
    out << f.id << '\t' << text::escape_field(f.phrase);
    for (const auto& member : f.members) out << '\t' << text::escape_field(member);
    out << '\n';
  }
  std::size_t n_cells = 0;
  for (const Concept& c : m.concepts()) {
    for (const auto& [j, p] : m.row(c.id)) {
      out << c.id << '\t' << j << '\t' << (p == Provenance::HumanElicited ? 'H' : 'A') << '\n';
      ++n_cells;
    }
  }
  out << "end " << n_cells << '\n';
  return out.str();
}

namespace {

[[noreturn]] void corrupt(const std::string& origin, std::size_t line, const std::string& why) {
  fail(ErrorCode::Parse, origin + ":" + std::to_string(line) + ": corrupt record: " + why);
}

int parse_id(const std::string& s, const std::string& origin, std::size_t line) {
  try {
    auto v = text::parse_int(s);
    if (v < 0 || v > INT32_MAX) corrupt(origin, line, "id out of range");
    return static_cast<int>(v);
  } catch (const Error&) {
    corrupt(origin, line, "bad id '" + s + "'");
  }
}

}  // namespace

NormMatrix parse_matrix(const std::string& data, const std::string& origin) {
  std::vector<std::string> lines = text::split(data, '\n');
  if (!lines.empty() && lines.back().empty()) lines.pop_back();
  if (lines.empty()) fail(ErrorCode::Parse, origin + ": empty matrix file");

  auto header = text::split_whitespace(lines[0]);
  if (header.size() != 4 || header[0] != "normmatrix" || header[1].size() < 2 ||
      header[1][0] != 'v') {
    fail(ErrorCode::Parse, origin + ":1: not a normmatrix header");
  }
  std::int64_t version = 0;
  try {
    version = text::parse_int(header[1].substr(1));
  } catch (const Error&) {
    fail(ErrorCode::Parse, origin + ":1: bad version field '" + header[1] + "'");
  }
  if (version != kMatrixFormatVersion) {
    fail(ErrorCode::Version, origin + ": matrix format version " + std::to_string(version) +
                                 " is not supported (expected " +
                                 std::to_string(kMatrixFormatVersion) + ")");
  }
  const auto n_concepts = static_cast<std::size_t>(parse_id(header[2], origin, 1));
  const auto n_features = static_cast<std::size_t>(parse_id(header[3], origin, 1));

  std::size_t ln = 1;
  auto next = [&]() -> const std::string& {
    if (ln >= lines.size()) corrupt(origin, ln + 1, "unexpected end of file");
    return lines[ln++];
  };

  std::vector<Concept> concepts;
  concepts.reserve(n_concepts);
  for (std::size_t i = 0; i < n_concepts; ++i) {
    auto fields = text::split(next(), '\t');
    if (fields.size() != 2) corrupt(origin, ln, "concept record needs 2 fields");
    concepts.push_back({parse_id(fields[0], origin, ln), text::unescape_field(fields[1])});
  }
  std::vector<Feature> features;
  features.reserve(n_features);
  for (std::size_t j = 0; j < n_features; ++j) {
    auto fields = text::split(next(), '\t');
    if (fields.size() < 3) corrupt(origin, ln, "feature record needs id, phrase and members");
    Feature f;
    f.id = parse_id(fields[0], origin, ln);
    f.phrase = text::unescape_field(fields[1]);
    for (std::size_t k = 2; k < fields.size(); ++k) {
      f.members.push_back(text::unescape_field(fields[k]));
    }
    features.push_back(std::move(f));
  }

  NormMatrix m;
  try {
    m = NormMatrix(std::move(concepts), std::move(features));
  } catch (const Error& e) {
    corrupt(origin, ln, e.what());
  }

  std::size_t n_cells = 0;
  for (;;) {
    const std::string& line = next();
    if (line.rfind("end ", 0) == 0) {
      if (static_cast<std::size_t>(parse_id(line.substr(4), origin, ln)) != n_cells) {
        corrupt(origin, ln, "cell count does not match trailer");
      }
      break;
    }
    auto fields = text::split(line, '\t');
    if (fields.size() != 3 || (fields[2] != "H" && fields[2] != "A")) {
      corrupt(origin, ln, "cell record must be i TAB j TAB {H|A}");
    }
    int i = parse_id(fields[0], origin, ln);
    int j = parse_id(fields[1], origin, ln);
    if (static_cast<std::size_t>(i) >= m.concept_count() ||
        static_cast<std::size_t>(j) >= m.feature_count()) {
      corrupt(origin, ln, "cell references an unknown id");
    }
    m.set(i, j, fields[2] == "H" ? Provenance::HumanElicited : Provenance::AiImputed);
    ++n_cells;
  }
  if (ln != lines.size()) corrupt(origin, ln + 1, "trailing data after end marker");
  return m;
}

void save_matrix(const NormMatrix& m, const std::filesystem::path& path) {
  text::write_file_atomic(path, serialize_matrix(m));
}

NormMatrix load_matrix(const std::filesystem::path& path) {
  return parse_matrix(text::read_file(path), path.string());
}

}  // namespace normforge::norms
