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

#include <algorithm>
#include <cmath>
#include <sstream>

#include "common/error.hpp"
#include "common/text.hpp"
#include "similarity/similarity.hpp"

namespace normforge::similarity {

DissimilarityMatrix cosine_dissim(const norms::NormMatrix& m, norms::View view) {
  const std::size_t n = m.concept_count();
  std::vector<std::vector<int>> rows(n);
  for (const auto& c : m.concepts()) {
    for (const auto& [j, p] : m.row(c.id)) {
      if (norms::is_set(p, view)) rows[static_cast<std::size_t>(c.id)].push_back(j);
    }
    if (rows[static_cast<std::size_t>(c.id)].empty()) {
      fail(ErrorCode::InvalidArgument, "concept '" + c.label + "' has no features in this view");
    }
  }
  DissimilarityMatrix out;
  for (const auto& c : m.concepts()) out.labels.push_back(c.label);
  out.d = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      // Binary rows: the dot product is the size of the intersection.
      std::size_t common = 0;
      auto x = rows[i].begin();
      auto y = rows[j].begin();
      while (x != rows[i].end() && y != rows[j].end()) {
        if (*x < *y) {
          ++x;
        } else if (*y < *x) {
          ++y;
        } else {
          ++common;
          ++x;
          ++y;
        }
      }
      const double denom =
          std::sqrt(static_cast<double>(rows[i].size()) * static_cast<double>(rows[j].size()));
      const double v = std::max(0.0, 1.0 - static_cast<double>(common) / denom);
      out.d(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
      out.d(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = v;
    }
  }
  return out;
}

DissimilarityMatrix cosine_dissim(const Eigen::MatrixXd& rows, std::vector<std::string> labels) {
  if (static_cast<std::size_t>(rows.rows()) != labels.size()) {
    fail(ErrorCode::InvalidArgument, "one label per row required");
  }
  Eigen::MatrixXd unit = rows;
  for (Eigen::Index i = 0; i < unit.rows(); ++i) {
    double norm = unit.row(i).norm();
    if (norm == 0.0) {
      fail(ErrorCode::InvalidArgument, "vector for '" + labels[static_cast<std::size_t>(i)] +
                                           "' is zero");
    }
    unit.row(i) /= norm;
  }
  DissimilarityMatrix out{std::move(labels), {}};
  out.d = (1.0 - (unit * unit.transpose()).array()).max(0.0).matrix();
  out.d.diagonal().setZero();
  // Exact symmetry regardless of the product's rounding.
  out.d = (0.5 * (out.d + out.d.transpose())).eval();
  return out;
}

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::vector<std::string> csv_row(const std::string& line, const std::string& origin,
                                 std::size_t number) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (quoted) fail(ErrorCode::Parse, origin + ":" + std::to_string(number) + ": unterminated quote");
  out.push_back(std::move(cur));
  return out;
}

}  // namespace

std::string to_csv(const DissimilarityMatrix& m) {
  std::ostringstream out;
  out << "label";
  for (const auto& l : m.labels) out << ',' << csv_field(l);
  out << '\n';
  for (std::size_t i = 0; i < m.size(); ++i) {
    out << csv_field(m.labels[i]);
    for (std::size_t j = 0; j < m.size(); ++j) {
      out << ',' << text::format_double(m.d(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
    }
    out << '\n';
  }
  return out.str();
}

DissimilarityMatrix dissim_from_csv(const std::string& csv, const std::string& origin) {
  auto lines = text::split(csv, '\n');
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  if (lines.empty()) fail(ErrorCode::Parse, origin + ": empty dissimilarity file");
  auto header = csv_row(lines[0], origin, 1);
  if (header.empty() || header[0] != "label") {
    fail(ErrorCode::Parse, origin + ":1: header must start with 'label'");
  }
  DissimilarityMatrix m;
  m.labels.assign(header.begin() + 1, header.end());
  const auto n = static_cast<Eigen::Index>(m.labels.size());
  if (lines.size() != m.labels.size() + 1) {
    fail(ErrorCode::Parse, origin + ": expected " + std::to_string(n) + " rows");
  }
  m.d.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    auto row = csv_row(lines[static_cast<std::size_t>(i) + 1], origin, static_cast<std::size_t>(i) + 2);
    if (row.size() != m.labels.size() + 1 || row[0] != m.labels[static_cast<std::size_t>(i)]) {
      fail(ErrorCode::Parse, origin + ":" + std::to_string(i + 2) + ": malformed row");
    }
    for (Eigen::Index j = 0; j < n; ++j) {
      m.d(i, j) = text::parse_double(row[static_cast<std::size_t>(j) + 1]);
    }
  }
  return m;
}

void save_dissim(const DissimilarityMatrix& m, const std::filesystem::path& path) {
  text::write_file_atomic(path, to_csv(m));
}

DissimilarityMatrix load_dissim(const std::filesystem::path& path) {
  return dissim_from_csv(text::read_file(path), path.string());
}

}  // namespace normforge::similarity
