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

#include "fixture.hpp"

#include "support.hpp"

namespace nftest {

using namespace normforge::norms;

nlohmann::json expected() { return nlohmann::json::parse(slurp(fixture("expected.json"))); }

LabelPairs label_pairs(const nlohmann::json& list) {
  LabelPairs out;
  for (const auto& p : list) out.insert({p[0].get<std::string>(), p[1].get<std::string>()});
  return out;
}

namespace {

void mark(NormMatrix& m, const LabelPairs& cells, Provenance p) {
  for (const auto& [c, f] : cells) {
    int ci = -1, fi = -1;
    for (const auto& x : m.concepts())
      if (x.label == c) ci = x.id;
    for (const auto& x : m.features())
      if (x.phrase == f) fi = x.id;
    m.set(ci, fi, p);
  }
}

}  // namespace

NormMatrix human_matrix() {
  const auto e = expected();
  std::vector<Concept> cs;
  std::vector<Feature> fs;
  for (const auto& c : e["concepts"]) cs.push_back({int(cs.size()), c.get<std::string>()});
  for (const auto& f : e["features"]) {
    fs.push_back({int(fs.size()), f.get<std::string>(), {f.get<std::string>()}});
  }
  NormMatrix m(cs, fs);
  mark(m, label_pairs(e["human_cells"]), Provenance::HumanElicited);
  return m;
}

NormMatrix full_matrix() {
  auto m = human_matrix();
  mark(m, label_pairs(expected()["ai_cells"]), Provenance::AiImputed);
  return m;
}

LabelPairs cells_with(const NormMatrix& m, Provenance p) {
  LabelPairs out;
  for (const auto& c : m.concepts())
    for (const auto& f : m.features())
      if (m.get(c.id, f.id) == p) out.insert({c.label, f.phrase});
  return out;
}

}  // namespace nftest
