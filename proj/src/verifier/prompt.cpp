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

#include "verifier/prompt.hpp"

#include <cctype>

#include "common/digest.hpp"
#include "common/error.hpp"
#include "common/text.hpp"

namespace normforge::verifier {

namespace {

constexpr std::size_t kMaxResponseTokens = 5;

std::string question(const std::string& concept_label, const std::string& feature) {
  return "In one word True or False, answer the following question question: "
         "Is the property [" + feature + "] true for [" + concept_label + "]? Answer:";
}

}  // namespace

const char* to_string(PromptMode mode) {
  return mode == PromptMode::ZeroShot ? "zero_shot" : "two_shot";
}

PromptMode parse_prompt_mode(const std::string& s) {
  std::string k = text::casefold(text::trim(s));
  if (k == "zero_shot" || k == "zero-shot" || k == "0-shot" || k == "0") return PromptMode::ZeroShot;
  if (k == "two_shot" || k == "two-shot" || k == "2-shot" || k == "2") return PromptMode::TwoShot;
  fail(ErrorCode::InvalidArgument, "unknown prompt mode '" + s + "'");
}

std::string PromptTemplate::exemplars_digest() const {
  if (mode == PromptMode::ZeroShot) return "";
  std::string blob;
  for (const auto& e : exemplars) {
    blob += e.concept_label + '\x1f' + e.feature + '\x1f' + (e.answer ? "1" : "0") + '\x1e';
  }
  return sha256_hex(blob).substr(0, 16);
}

void validate(const PromptTemplate& t) {
  if (t.mode == PromptMode::ZeroShot) return;
  if (t.exemplars[0].answer == t.exemplars[1].answer) {
    fail(ErrorCode::InvalidArgument, "two-shot exemplars need one true and one false example");
  }
  for (const auto& e : t.exemplars) {
    if (e.concept_label.empty() || e.feature.empty()) {
      fail(ErrorCode::InvalidArgument, "two-shot exemplar has an empty concept or feature");
    }
  }
}

std::string build_prompt(const PromptTemplate& t, const std::string& concept_label,
                         const std::string& feature) {
  if (concept_label.empty()) fail(ErrorCode::InvalidArgument, "build_prompt: empty concept");
  if (feature.empty()) fail(ErrorCode::InvalidArgument, "build_prompt: empty feature");
  validate(t);
  std::string out;
  if (t.mode == PromptMode::TwoShot) {
    for (const auto& e : t.exemplars) {
      out += question(e.concept_label, e.feature);
      out += e.answer ? " True" : " False";
      out += "\n\n";
    }
  }
  out += question(concept_label, feature);
  return out;
}

bool parse_response(const std::string& raw) {
  auto tokens = text::split_whitespace(raw);
  if (tokens.size() > kMaxResponseTokens) tokens.resize(kMaxResponseTokens);
  for (const auto& token : tokens) {
    std::string word;
    for (char c : token) {
      if (!std::ispunct(static_cast<unsigned char>(c))) word += c;
    }
    word = text::casefold(word);
    if (word == "true" || word == "yes") return true;
    if (word == "false" || word == "no") return false;
  }
  return false;
}

}  // namespace normforge::verifier
