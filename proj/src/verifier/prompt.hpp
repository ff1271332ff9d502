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

#include <array>
#include <string>

namespace normforge::verifier {

enum class PromptMode { ZeroShot, TwoShot };

const char* to_string(PromptMode mode);
PromptMode parse_prompt_mode(const std::string& s);  // "zero_shot" | "two_shot"

struct Exemplar {
  std::string concept_label;
  std::string feature;
  bool answer = false;
};

struct PromptTemplate {
  PromptMode mode = PromptMode::ZeroShot;
  // Used only in TwoShot mode; must hold one true and one false example.
  std::array<Exemplar, 2> exemplars{
      Exemplar{"dog", "has ears", true},
      Exemplar{"car", "has feathers", false},
  };

  // Digest of the exemplars as they affect the prompt text ("" for ZeroShot).
  std::string exemplars_digest() const;
};

void validate(const PromptTemplate& t);

// The question for one pair, with the feature and concept placed inside
// square brackets:
//   In one word True or False, answer the following question question: Is
//   the property [<feature>] true for [<concept>]? Answer:
// (one line). TwoShot prefixes the two exemplars in the same form, each
// followed by " True" or " False" and a blank line.
std::string build_prompt(const PromptTemplate& t, const std::string& concept_label,
                         const std::string& feature);

// Keeps the first five whitespace-delimited tokens, strips punctuation from
// each, and returns the verdict of the first token equal (ignoring case) to
// true/yes (positive) or false/no (negative). No match means false.
bool parse_response(const std::string& raw);

}  // namespace normforge::verifier
