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
#include <string>
#include <utility>
#include <vector>

namespace normforge::norms {

struct Concept {
  int id = 0;
  std::string label;

  bool operator==(const Concept&) const = default;
};

struct Feature {
  int id = 0;
  std::string phrase;                // canonical phrase
  std::vector<std::string> members;  // raw phrases merged into this feature

  bool operator==(const Feature&) const = default;
};

enum class Provenance : std::uint8_t { Absent = 0, HumanElicited = 1, AiImputed = 2 };

// Which cells count as 1: HumanOnly sees only HumanElicited cells, Full sees
// HumanElicited and AiImputed.
enum class View { HumanOnly, Full };

inline bool is_set(Provenance p, View view) {
  return p == Provenance::HumanElicited ||
         (view == View::Full && p == Provenance::AiImputed);
}

// Binary concept x feature matrix with per-cell provenance. Stored sparsely:
// each row keeps its non-absent cells sorted by feature id.
class NormMatrix {
 public:
  using Row = std::vector<std::pair<int, Provenance>>;

  NormMatrix() = default;
  // Validates ids (dense, in order), non-empty labels and phrases, members
  // containing the phrase, and case-insensitive label uniqueness.
  NormMatrix(std::vector<Concept> concepts, std::vector<Feature> features);

  std::size_t concept_count() const { return concepts_.size(); }
  std::size_t feature_count() const { return features_.size(); }
  const std::vector<Concept>& concepts() const { return concepts_; }
  const std::vector<Feature>& features() const { return features_; }
  const Row& row(int concept_id) const;

  Provenance get(int concept_id, int feature_id) const;
  bool value(int concept_id, int feature_id, View view) const {
    return is_set(get(concept_id, feature_id), view);
  }
  // Setting Absent erases the cell.
  void set(int concept_id, int feature_id, Provenance p);

  std::size_t cell_count(View view) const;
  std::size_t count(Provenance p) const;

  // Copy holding only the HumanElicited cells.
  NormMatrix human_only() const;

  bool operator==(const NormMatrix&) const = default;

 private:
  void check_ids(int concept_id, int feature_id) const;

  std::vector<Concept> concepts_;
  std::vector<Feature> features_;
  std::vector<Row> rows_;
};

inline constexpr int kMatrixFormatVersion = 1;

// Text format:
//   normmatrix v1 <n_concepts> <n_features>
//   <id> TAB <label>                                    (n_concepts lines)
//   <id> TAB <phrase> TAB <member> [TAB <member>...]    (n_features lines)
//   <i> TAB <j> TAB {H|A}                               (one per non-absent cell)
//   end <n_cells>
// Strings are escaped with text::escape_field. The trailer makes truncation
// detectable.
std::string serialize_matrix(const NormMatrix& m);
NormMatrix parse_matrix(const std::string& data, const std::string& origin = "<memory>");
void save_matrix(const NormMatrix& m, const std::filesystem::path& path);
NormMatrix load_matrix(const std::filesystem::path& path);

// ---- elicitation ---------------------------------------------------------

struct ElicitationRecord {
  std::string participant;
  int concept_id = 0;
  std::string phrase;
};

struct ElicitationData {
  std::vector<Concept> concepts;
  std::vector<std::string> phrases;  // distinct raw phrases, first-seen order
  std::vector<ElicitationRecord> records;
  // Raw label spellings that folded onto an already-seen concept, e.g.
  // "Dog" next to "dog". Reported, never silently dropped.
  std::vector<std::string> label_collisions;

  // Number of records listing each phrase (all concepts).
  std::map<std::string, std::size_t> phrase_frequencies() const;
};

// Line records `participant TAB concept TAB phrase`; blank and '#' lines are
// skipped. Labels are matched after trimming and case-folding.
ElicitationData read_elicitation(const std::filesystem::path& path);

// Human-only matrix over raw phrases: one single-member Feature per distinct
// phrase; a cell is HumanElicited when at least `min_participants` distinct
// participants listed the phrase for the concept.
NormMatrix build_elicitation_matrix(const ElicitationData& data,
                                    std::size_t min_participants = 1);

// Human-only matrix over reduced features: cell (i, f) is HumanElicited when
// at least `min_participants` distinct participants listed any member of f
// for concept i. Phrases outside every feature are ignored.
NormMatrix build_reduced_matrix(const ElicitationData& data,
                                const std::vector<Feature>& features,
                                std::size_t min_participants = 1);

NormMatrix load_elicitation(const std::filesystem::path& path);

// ---- descriptive statistics ----------------------------------------------

struct DensityStats {
  std::vector<std::size_t> per_concept;  // features set per concept
  double mean = 0;
  double median = 0;
  std::vector<std::size_t> histogram;    // histogram[k] = concepts with k features
};

struct OverlapStats {
  std::vector<std::size_t> per_feature;  // concepts per feature
  double mean = 0;
  std::size_t singleton_features = 0;
  double singleton_fraction = 0;         // features true of exactly one concept
};

DensityStats feature_density_stats(const NormMatrix& m, View view);
OverlapStats feature_overlap_stats(const NormMatrix& m, View view);

}  // namespace normforge::norms
