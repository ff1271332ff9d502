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

#include <optional>
#include <string>
#include <vector>

namespace nftest {

struct ResponseCase {
  std::string text;
  std::optional<bool> expected;  // hand-labelled cases only
};

// 200 model replies aimed at the response parser: casing, punctuation,
// near-miss words, matches past the fifth token, odd whitespace and
// non-ASCII bytes. The first cases are hand-labelled; the rest are drawn
// from a fixed seed.
std::vector<ResponseCase> response_corpus();

}  // namespace nftest
