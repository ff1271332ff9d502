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

#include <map>
#include <set>
#include <unordered_map>

#include "common/error.hpp"
#include "common/text.hpp"
#include "norms/norm_matrix.hpp"

namespace normforge::norms {

std::map<std::string, std::size_t> ElicitationData::phrase_frequencies() const {
  std::map<std::string, std::size_t> freq;
  for (const auto& r : records) ++freq[r.phrase];
  return freq;
}

ElicitationData read_elicitation(const std::filesystem::path& path) {
  ElicitationData data;
  std::unordered_map<std::string, int> concept_by_key;
  std::unordered_map<std::string, std::string> spelling_by_key;
  std::set<std::string> collisions;
  std::unordered_map<std::string, bool> phrase_seen;

  for (const auto& line : text::read_lines(path)) {
    if (!text::is_record(line.text)) continue;
    auto fields = text::split(line.text, '\t');
    auto where = path.string() + ":" + std::to_string(line.number) + ": ";
    if (fields.size() != 3) {
      fail(ErrorCode::Parse, where + "expected participant<TAB>concept<TAB>phrase, got " +
                                 std::to_string(fields.size()) + " fields");
    }
    std::string participant = text::trim(fields[0]);
    std::string label = text::trim(fields[1]);
    std::string phrase = text::trim(fields[2]);
    if (participant.empty()) fail(ErrorCode::Parse, where + "empty participant");
    if (label.empty()) fail(ErrorCode::Parse, where + "empty concept");
    if (phrase.empty()) fail(ErrorCode::Parse, where + "empty phrase");

    std::string key = text::casefold(label);
    auto [it, inserted] = concept_by_key.try_emplace(key, static_cast<int>(data.concepts.size()));
    if (inserted) {
      data.concepts.push_back({it->second, label});
      spelling_by_key[key] = label;
    } else if (spelling_by_key[key] != label &&
               collisions.insert(label + " -> " + spelling_by_key[key]).second) {
      data.label_collisions.push_back("'" + label + "' folded onto '" + spelling_by_key[key] + "'");
    }
    if (!phrase_seen[phrase]) {
      phrase_seen[phrase] = true;
      data.phrases.push_back(phrase);
    }
    data.records.push_back({std::move(participant), it->second, std::move(phrase)});
  }
  if (data.records.empty()) {
    fail(ErrorCode::Parse, path.string() + ": no elicitation records");
  }
  return data;
}

namespace {

NormMatrix build(const ElicitationData& data, std::vector<Feature> features,
                 const std::unordered_map<std::string, int>& feature_of_phrase,
                 std::size_t min_participants) {
  NormMatrix m(data.concepts, std::move(features));
  std::map<std::pair<int, int>, std::set<std::string>> listed_by;
  for (const auto& r : data.records) {
    auto it = feature_of_phrase.find(r.phrase);
    if (it == feature_of_phrase.end()) continue;
    listed_by[{r.concept_id, it->second}].insert(r.participant);
  }
  for (const auto& [cell, participants] : listed_by) {
    if (participants.size() >= std::max<std::size_t>(1, min_participants)) {
      m.set(cell.first, cell.second, Provenance::HumanElicited);
    }
  }
  return m;
}

}  // namespace

NormMatrix build_elicitation_matrix(const ElicitationData& data, std::size_t min_participants) {
  std::vector<Feature> features;
  std::unordered_map<std::string, int> index;
  for (const auto& phrase : data.phrases) {
    int id = static_cast<int>(features.size());
    features.push_back({id, phrase, {phrase}});
    index.emplace(phrase, id);
  }
  return build(data, std::move(features), index, min_participants);
}

NormMatrix build_reduced_matrix(const ElicitationData& data, const std::vector<Feature>& features,
                                std::size_t min_participants) {
  std::unordered_map<std::string, int> index;
  for (const auto& f : features) {
    for (const auto& member : f.members) {
      if (!index.emplace(member, f.id).second) {
        fail(ErrorCode::InvalidArgument, "phrase '" + member + "' belongs to two features");
      }
    }
  }
  return build(data, features, index, min_participants);
}

NormMatrix load_elicitation(const std::filesystem::path& path) {
  return build_elicitation_matrix(read_elicitation(path), 1);
}

}  // namespace normforge::norms
