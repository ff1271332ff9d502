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

#include <fstream>

#include "checks.hpp"
#include "corpus.hpp"
#include "fixture.hpp"
#include "mock/mock_servers.hpp"
#include "oracles.hpp"
#include "support.hpp"
#include "verifier/verifier.hpp"

using namespace normforge;
using namespace normforge::verifier;
using normforge::norms::Provenance;

namespace {

struct ChatRig {
  mock::MockChatServer server;
  CascadeConfig cfg;

  explicit ChatRig(mock::ChatScript script) : server(std::move(script)) {
    server.start();
    cfg.stage1 = stage("mock-llama", PromptMode::TwoShot);
    cfg.stage2 = stage("mock-gpt4", PromptMode::ZeroShot);
    cfg.max_parallel = 3;
    cfg.checkpoint_every = 50;
  }

  Stage stage(const std::string& model, PromptMode mode) const {
    PromptTemplate t;
    t.mode = mode;
    auto client = std::make_shared<HttpChatClient>(http::Endpoint{server.url(), model, "", 10},
                                                   http::RetryPolicy{2, std::chrono::milliseconds(1)});
    return {client, t};
  }
};

mock::ChatScript fixture_script() {
  return mock::load_chat_script(nftest::fixture("chat_script.tsv"));
}

Pair pair(const std::string& c, const std::string& f) { return {0, 0, c, f}; }

}  // namespace

TEST_SUITE("verifier") {

TEST_CASE("zero-shot prompt text") {
  PromptTemplate t;
  auto p = build_prompt(t, "alligator", "has legs");
  CHECK(p.find("Is the property [has legs] true for [alligator]? Answer:") != std::string::npos);
  CHECK(p ==
        "In one word True or False, answer the following question question: Is the property "
        "[has legs] true for [alligator]? Answer:");
  CHECK(p.find('\n') == std::string::npos);
}

TEST_CASE("two-shot prompt text") {
  PromptTemplate t;
  t.mode = PromptMode::TwoShot;
  auto p = build_prompt(t, "alligator", "has legs");
  const std::string q =
      "In one word True or False, answer the following question question: Is the property ";
  CHECK(p == q + "[has ears] true for [dog]? Answer: True\n\n" + q +
                 "[has feathers] true for [car]? Answer: False\n\n" + q +
                 "[has legs] true for [alligator]? Answer:");
}

TEST_CASE("prompt errors") {
  PromptTemplate t;
  CHECK_FAILS_WITH(build_prompt(t, "", "x"), ErrorCode::InvalidArgument);
  CHECK_FAILS_WITH(build_prompt(t, "x", ""), ErrorCode::InvalidArgument);
  t.mode = PromptMode::TwoShot;
  t.exemplars[1].answer = true;
  CHECK_FAILS_WITH(build_prompt(t, "dog", "barks"), ErrorCode::InvalidArgument);
  CHECK(parse_prompt_mode("two_shot") == PromptMode::TwoShot);
  CHECK(parse_prompt_mode("Zero-Shot") == PromptMode::ZeroShot);
  CHECK_FAILS_WITH(parse_prompt_mode("three_shot"), ErrorCode::InvalidArgument);
}

TEST_CASE("response parsing examples") {
  CHECK(parse_response("True"));
  CHECK_FALSE(parse_response("I am not certain about it"));
  CHECK_FALSE(parse_response("Not really, no."));
  CHECK_FALSE(parse_response("blah blah blah blah blah true"));
  CHECK(parse_response("blah blah blah blah true"));
  CHECK_FALSE(parse_response(""));
}

TEST_CASE("response parsing agrees with the table oracle") {
  auto corpus = nftest::response_corpus();
  REQUIRE(corpus.size() == 200);
  for (const auto& c : corpus) {
    CAPTURE(c.text);
    CHECK(parse_response(c.text) == oracle::parse(c.text));
    if (c.expected) CHECK(parse_response(c.text) == *c.expected);
  }
}

TEST_CASE("cache key") {
  PromptTemplate zero, two;
  two.mode = PromptMode::TwoShot;
  auto k = cache_key("m", zero, "dog", "barks");
  CHECK(k.size() == 64);
  CHECK(k == cache_key("m", zero, "dog", "barks"));
  CHECK(k != cache_key("m2", zero, "dog", "barks"));
  CHECK(k != cache_key("m", two, "dog", "barks"));
  CHECK(k != cache_key("m", zero, "cat", "barks"));
  CHECK(k != cache_key("m", zero, "dog", "bark"));
  // no ambiguity across field boundaries
  CHECK(cache_key("m", zero, "a b", "c") != cache_key("m", zero, "a", "b c"));
  auto other = two;
  other.exemplars[0].feature = "has a tail";
  CHECK(cache_key("m", two, "dog", "barks") != cache_key("m", other, "dog", "barks"));
}

TEST_CASE("request log persists and drops a torn tail") {
  nftest::TempDir dir;
  VerificationRecord r;
  r.model_id = "m";
  r.raw_text = "True,\n\tsure";
  r.parsed = true;
  r.cache_key = "k1";
  {
    RequestLog log(dir / "requests.log");
    log.append(r);
    r.cache_key = "k2";
    r.raw_text = "";
    r.parsed = false;
    log.append(r);
  }
  {
    std::ofstream out(dir / "requests.log", std::ios::app);
    out << "k3\tm\tzero_shot\tTr";
  }
  RequestLog log(dir / "requests.log");
  CHECK(log.size() == 2);
  REQUIRE(log.find("k1"));
  CHECK(log.find("k1")->raw_text == "True,\n\tsure");
  CHECK(log.find("k1")->parsed);
  CHECK_FALSE(log.find("k2")->parsed);
  CHECK_FALSE(log.contains("k3"));
  // appending after a torn tail still yields a readable log
  r.cache_key = "k4";
  log.append(r);
  RequestLog again(dir / "requests.log");
  CHECK(again.size() == 3);
  CHECK(again.contains("k4"));
  std::ifstream in(dir / "requests.log");
  std::string line;
  std::getline(in, line);
  CHECK(std::count(line.begin(), line.end(), '\t') == 4);
}

TEST_CASE("verify_pair is cache first") {
  mock::ChatScript script;
  script.add("m", "dog", "barks", "True");
  script.add("m", "dog", "is empty", "");
  ChatRig rig(script);
  auto stage = rig.stage("m", PromptMode::ZeroShot);
  RequestLog log;
  auto first = verify_pair(pair("dog", "barks"), stage, log);
  CHECK(first.parsed);
  CHECK(first.raw_text == "True");
  CHECK_FALSE(first.from_cache);
  CHECK(rig.server.requests() == 1);
  auto second = verify_pair(pair("dog", "barks"), stage, log);
  CHECK(rig.server.requests() == 1);
  CHECK(second.from_cache);
  CHECK(second.raw_text == first.raw_text);
  CHECK(second.cache_key == first.cache_key);
  CHECK_FALSE(verify_pair(pair("dog", "has wings"), stage, log).parsed);
  auto empty = verify_pair(pair("dog", "is empty"), stage, log);
  CHECK(empty.raw_text.empty());
  CHECK_FALSE(empty.parsed);
}

TEST_CASE("transport failure names the pair") {
  ChatRig rig({});
  auto stage = rig.stage("m", PromptMode::ZeroShot);
  rig.server.fail_after(0);
  RequestLog log;
  try {
    verify_pair(pair("dog", "barks"), stage, log);
    FAIL("expected a transport error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Transport);
    CHECK(std::string(e.what()).find("dog") != std::string::npos);
    CHECK(std::string(e.what()).find("barks") != std::string::npos);
  }
  CHECK(log.size() == 0);
}

TEST_CASE("cascade rules") {
  mock::ChatScript script;
  script.add("mock-llama", "dog", "barks", "True");
  script.add("mock-gpt4", "dog", "barks", "Yes.");
  script.add("mock-llama", "dog", "meows", "True");
  script.add("mock-gpt4", "dog", "meows", "No");
  script.add("mock-gpt4", "dog", "flies", "True");
  ChatRig rig(script);
  RequestLog log;

  auto no = run_cascade(pair("dog", "flies"), rig.cfg, log);
  CHECK_FALSE(no.verdict);
  CHECK_FALSE(no.stage2.has_value());
  CHECK(rig.server.requests("mock-gpt4") == 0);

  auto split = run_cascade(pair("dog", "meows"), rig.cfg, log);
  CHECK_FALSE(split.verdict);
  REQUIRE(split.stage2.has_value());
  CHECK_FALSE(split.stage2->parsed);

  auto both = run_cascade(pair("dog", "barks"), rig.cfg, log);
  CHECK(both.verdict);
  CHECK(rig.server.requests("mock-gpt4") == 2);
  CHECK(rig.server.requests("mock-llama") == 3);
}

TEST_CASE("impute with no absent cells makes no calls") {
  ChatRig rig({});
  norms::NormMatrix m({{0, "dog"}}, {{0, "barks", {"barks"}}});
  m.set(0, 0, Provenance::HumanElicited);
  RequestLog log;
  auto r = impute_matrix(m, rig.cfg, log);
  CHECK(r.matrix == m);
  CHECK(r.summary.absent_cells == 0);
  CHECK(rig.server.requests() == 0);
}

TEST_CASE("fixture imputation matches the hand-applied cascade") {
  const auto e = nftest::expected();
  const auto human = nftest::human_matrix();
  ChatRig rig(fixture_script());
  RequestLog log;
  auto r = impute_matrix(human, rig.cfg, log);
  CHECK(r.summary.absent_cells == e["absent_cells"].get<std::size_t>());
  CHECK(r.summary.stage1_true == e["stage1_true"].get<std::size_t>());
  CHECK(r.summary.final_true == e["final_true"].get<std::size_t>());
  CHECK(r.summary.stage2_queries == r.summary.stage1_true);
  CHECK(nftest::cells_with(r.matrix, Provenance::AiImputed) == nftest::label_pairs(e["ai_cells"]));
  CHECK(r.matrix.human_only() == human);
  CHECK(rig.server.requests("mock-llama") == r.summary.absent_cells);
  CHECK(rig.server.requests("mock-gpt4") == r.summary.stage1_true);

  // human cells never reach the model
  const auto human_cells = nftest::cells_with(human, Provenance::HumanElicited);
  for (const auto& prompt : rig.server.prompts()) {
    std::string c, f;
    REQUIRE(mock::extract_pair(prompt, c, f));
    CHECK(human_cells.count({c, f}) == 0);
  }

  // second run: fully cached, identical result
  rig.server.reset_counts();
  auto again = impute_matrix(human, rig.cfg, log);
  CHECK(again.matrix == r.matrix);
  CHECK(rig.server.requests() == 0);
  CHECK(again.summary.cache_hits == r.summary.absent_cells + r.summary.stage1_true);
}

TEST_CASE("interrupted imputation resumes to the same bytes") {
  const auto human = nftest::human_matrix();
  nftest::TempDir dir;
  std::string reference;
  {
    ChatRig rig(fixture_script());
    RequestLog log;
    reference = norms::serialize_matrix(impute_matrix(human, rig.cfg, log).matrix);
  }

  ChatRig rig(fixture_script());
  ImputeOptions opts;
  opts.checkpoint = dir / "impute.ckpt";
  SUBCASE("killed after a checkpoint") {
    int seen = 0;
    opts.on_checkpoint = [&](const ImputeSummary&) {
      if (++seen == 3) throw std::runtime_error("killed");
    };
    {
      RequestLog log(dir / "requests.log");
      CHECK_THROWS_AS(impute_matrix(human, rig.cfg, log, opts), std::runtime_error);
    }
    CHECK(std::filesystem::exists(opts.checkpoint));
  }
  SUBCASE("endpoint dies mid-run") {
    rig.server.fail_after(120);
    {
      RequestLog log(dir / "requests.log");
      CHECK_FAILS_WITH(impute_matrix(human, rig.cfg, log, opts), ErrorCode::Transport);
    }
    CHECK(std::filesystem::exists(opts.checkpoint));
  }
  const auto before = rig.server.requests();
  rig.server.reset_counts();
  opts.on_checkpoint = nullptr;
  RequestLog log(dir / "requests.log");
  auto resumed = impute_matrix(human, rig.cfg, log, opts);
  CHECK(resumed.summary.resumed);
  CHECK(norms::serialize_matrix(resumed.matrix) == reference);
  CHECK_FALSE(std::filesystem::exists(opts.checkpoint));
  // nothing already logged is asked again
  CHECK(before + rig.server.requests() == 316 + 25);
}

TEST_CASE("checkpoint for another matrix is refused") {
  auto human = nftest::human_matrix();
  nftest::TempDir dir;
  ChatRig rig(fixture_script());
  ImputeOptions opts;
  opts.checkpoint = dir / "impute.ckpt";
  opts.on_checkpoint = [](const ImputeSummary&) { throw std::runtime_error("stop"); };
  RequestLog log;
  CHECK_THROWS(impute_matrix(human, rig.cfg, log, opts));
  human.set(0, 0, human.get(0, 0) == Provenance::Absent ? Provenance::HumanElicited
                                                        : Provenance::Absent);
  opts.on_checkpoint = nullptr;
  CHECK_FAILS_WITH(impute_matrix(human, rig.cfg, log, opts), ErrorCode::State);
}

}  // TEST_SUITE
