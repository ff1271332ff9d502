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

#include <set>
#include <string>
#include <utility>

#include "json.hpp"
#include "norms/norm_matrix.hpp"

namespace nftest {

nlohmann::json expected();

// The reduced 12 x 30 human matrix described by expected.json, built without
// going through reduction.
normforge::norms::NormMatrix human_matrix();
// human_matrix() plus the expected AI-imputed cells.
normforge::norms::NormMatrix full_matrix();

using LabelPairs = std::set<std::pair<std::string, std::string>>;
LabelPairs label_pairs(const nlohmann::json& list);
LabelPairs cells_with(const normforge::norms::NormMatrix& m, normforge::norms::Provenance p);

}  // namespace nftest
