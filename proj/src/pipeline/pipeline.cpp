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

#include "pipeline/pipeline.hpp"

#include <algorithm>
#include <functional>
#include <set>

#include "common/digest.hpp"
#include "common/error.hpp"
#include "common/text.hpp"
#include "common/version.hpp"
#include "judgment/judgment.hpp"
#include "norms/norm_matrix.hpp"
#include "reduction/clustering.hpp"
#include "reduction/embedding.hpp"
#include "sdt/sdt.hpp"
#include "service/experiment_service.hpp"
#include "similarity/similarity.hpp"
#include "verifier/verifier.hpp"

namespace normforge::pipeline {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const std::vector<std::string> kStages = {"reduce", "eval-verifiers", "impute",
                                          "stats",  "dissim",         "procrustes",
                                          "mine-triplets", "eval-judgments", "tsne"};

constexpr const char* kReduced = "reduced.nm";
constexpr const char* kImputed = "imputed.nm";
constexpr const char* kDissimHuman = "dissim_human.csv";
constexpr const char* kDissimFull = "dissim_full.csv";
constexpr const char* kTriplets = "triplets.tsv";
constexpr const char* kRequestLog = "cache/requests.log";
constexpr const char* kEmbeddingCache = "cache/embeddings.cache";

std::string dump(const json& j) { return j.dump(2) + "\n"; }

std::string rel(const fs::path& p, const fs::path& base) {
  return p.lexically_relative(base).generic_string();
}

// What a stage body sees.
struct StageContext {
  fs::path staging;
  fs::path out;
  json details = json::object();

  void write(const std::string& name, const std::string& data) const {
    text::write_file_atomic(staging / name, data);
  }
};

struct StagePlan {
  std::vector<std::string> sections;        // config sections that shape the outputs
  std::vector<std::string> ignore_keys;     // keys in those sections that do not
  std::vector<std::pair<std::string, fs::path>> inputs;
  std::vector<std::string> state;
  std::uint64_t seed = 0;
  std::function<void(StageContext&)> body;
};

http::RetryPolicy retry_policy(const Config& c) {
  http::RetryPolicy r;
  r.attempts = static_cast<int>(c.get_int("cascade", "retries", 3));
  r.backoff = std::chrono::milliseconds(c.get_int("cascade", "backoff_ms", 200));
  if (r.attempts < 1) fail(ErrorCode::InvalidArgument, "config: [cascade] retries must be >= 1");
  return r;
}

std::string model_section(const std::string& name) { return "model." + name; }

std::shared_ptr<verifier::ChatClient> chat_client(const Config& c, const std::string& name) {
  const std::string s = model_section(name);
  if (!c.has_section(s)) fail(ErrorCode::InvalidArgument, "config: no [" + s + "] section");
  http::Endpoint ep;
  ep.url = c.require(s, "url");
  ep.model = c.get(s, "model", name);
  ep.token = c.get(s, "token", "");
  ep.timeout_seconds = static_cast<int>(c.get_int(s, "timeout_seconds", 60));
  return std::make_shared<verifier::HttpChatClient>(
      ep, retry_policy(c), static_cast<int>(c.get_int(s, "max_tokens", 8)),
      c.get_double(s, "temperature", 0.0));
}

verifier::PromptTemplate prompt_template(const Config& c, verifier::PromptMode mode) {
  verifier::PromptTemplate t;
  t.mode = mode;
  if (c.has_section("exemplars")) {
    t.exemplars[0] = {c.get("exemplars", "true_concept", t.exemplars[0].concept_label),
                      c.get("exemplars", "true_feature", t.exemplars[0].feature), true};
    t.exemplars[1] = {c.get("exemplars", "false_concept", t.exemplars[1].concept_label),
                      c.get("exemplars", "false_feature", t.exemplars[1].feature), false};
  }
  verifier::validate(t);
  return t;
}

verifier::Stage make_stage(const Config& c, const std::string& model, const std::string& mode) {
  return {chat_client(c, model), prompt_template(c, verifier::parse_prompt_mode(mode))};
}

json counts_json(const sdt::ConfusionCounts& c) {
  return {{"hits", c.hits},
          {"misses", c.misses},
          {"false_alarms", c.false_alarms},
          {"correct_rejections", c.correct_rejections}};
}

json score_json(const std::vector<sdt::GoldLabel>& gold, const sdt::Predictions& preds, int resamples,
                std::uint64_t seed) {
  auto counts = sdt::confusion(gold, preds);
  auto d = sdt::d_prime(counts);
  auto ci = sdt::bootstrap_ci(gold, preds, resamples, seed);
  return {{"counts", counts_json(counts)}, {"hit_rate", d.hit_rate}, {"fa_rate", d.fa_rate},
          {"d_prime", d.d_prime},          {"ci_low", ci.low},       {"ci_high", ci.high}};
}

json density_json(const norms::NormMatrix& m, norms::View view) {
  auto d = norms::feature_density_stats(m, view);
  auto o = norms::feature_overlap_stats(m, view);
  return {{"cells", m.cell_count(view)},
          {"features_per_concept", {{"mean", d.mean}, {"median", d.median},
                                    {"histogram", d.histogram}, {"per_concept", d.per_concept}}},
          {"concepts_per_feature", {{"mean", o.mean}, {"per_feature", o.per_feature}}},
          {"singleton_features", o.singleton_features},
          {"singleton_fraction", o.singleton_fraction}};
}

const char* flag_name(judgment::Flag f) {
  switch (f) {
    case judgment::Flag::Agree: return "agree";
    case judgment::Flag::Disagree: return "disagree";
    case judgment::Flag::VoteTie: return "vote_tie";
    case judgment::Flag::PredictionTie: return "prediction_tie";
  }
  return "?";
}

}  // namespace

Pipeline::Pipeline(const fs::path& config_path, RunOptions options)
    : Pipeline(Config::load(config_path), std::move(options)) {}

Pipeline::Pipeline(Config config, RunOptions options)
    : config_(std::move(config)), options_(std::move(options)) {
  out_ = options_.out_dir.empty() ? config_.get_path("paths", "out", "out")
                                  : fs::absolute(options_.out_dir).lexically_normal();
}

const std::vector<std::string>& Pipeline::stage_names() { return kStages; }

std::uint64_t Pipeline::seed_for(const std::string& section) const {
  if (options_.seed) return *options_.seed;
  auto base = config_.get_int("run", "seed", 0);
  return static_cast<std::uint64_t>(config_.get_int(section, "seed", base));
}

std::size_t Pipeline::parallel_for(const std::string& section, std::size_t fallback) const {
  if (options_.max_parallel) return std::max<std::size_t>(1, *options_.max_parallel);
  auto v = config_.get_int(section, "max_parallel", static_cast<std::int64_t>(fallback));
  if (v < 1) fail(ErrorCode::InvalidArgument, "config: [" + section + "] max_parallel must be >= 1");
  return static_cast<std::size_t>(v);
}

std::vector<std::pair<std::string, fs::path>> Pipeline::external_inputs(
    const std::string& stage) const {
  auto req = [&](const char* key) {
    return std::pair<std::string, fs::path>{key, config_.get_path("paths", key)};
  };
  if (stage == "reduce") return {req("elicitation")};
  if (stage == "eval-verifiers") return {req("judgments")};
  if (stage == "eval-judgments") {
    std::vector<std::pair<std::string, fs::path>> v{req("responses")};
    if (config_.has("paths", "word_vectors")) v.push_back(req("word_vectors"));
    return v;
  }
  return {};
}

void Pipeline::preflight(const std::vector<std::string>& stages) const {
  std::vector<std::string> missing;
  for (const auto& s : stages) {
    for (const auto& [name, path] : external_inputs(s)) {
      if (path.empty()) {
        missing.push_back(s + ": [paths] " + name + " is not configured");
      } else if (!fs::is_regular_file(path)) {
        missing.push_back(s + ": " + name + " not found: " + path.string());
      }
    }
  }
  if (!missing.empty()) fail(ErrorCode::NotFound, "missing inputs: " + text::join(missing, "; "));
}

std::vector<StageReport> Pipeline::run_all() {
  preflight(kStages);
  std::vector<StageReport> out;
  for (const auto& s : kStages) out.push_back(run(s));
  return out;
}

StageReport Pipeline::run(const std::string& stage) {
  if (std::find(kStages.begin(), kStages.end(), stage) == kStages.end()) {
    fail(ErrorCode::InvalidArgument, "unknown stage '" + stage + "'");
  }
  preflight({stage});
  const Config& c = config_;
  const fs::path out = out_;
  StagePlan plan;

  if (stage == "reduce") {
    plan.sections = {"reduce", "embedding"};
    plan.ignore_keys = {"max_parallel", "batch_size", "timeout_seconds"};
    plan.inputs = {{"elicitation", c.get_path("paths", "elicitation")}};
    plan.state = {kEmbeddingCache};
    plan.seed = seed_for("reduce");
    plan.body = [&, seed = plan.seed](StageContext& ctx) {
      auto data = norms::read_elicitation(c.get_path("paths", "elicitation"));
      reduction::ClusterConfig cc;
      cc.merge_threshold = c.get_double("reduce", "merge_threshold", 0.1);
      cc.seed = seed;
      auto sample = c.get_int("reduce", "sample_size", 0);
      if (sample < 0) fail(ErrorCode::InvalidArgument, "config: [reduce] sample_size must be >= 0");
      cc.sample_size = sample == 0 ? 1 : static_cast<std::size_t>(sample);
      reduction::validate(cc);
      auto min_prod = c.get_int("reduce", "min_production", 1);
      if (min_prod < 1) fail(ErrorCode::InvalidArgument, "config: [reduce] min_production must be >= 1");

      http::Endpoint ep;
      ep.url = c.require("embedding", "url");
      ep.model = c.require("embedding", "model");
      ep.token = c.get("embedding", "token", "");
      ep.timeout_seconds = static_cast<int>(c.get_int("embedding", "timeout_seconds", 60));
      reduction::HttpEmbeddingClient client(ep, retry_policy(c));
      reduction::EmbeddingCache cache(out / kEmbeddingCache);
      reduction::EmbedOptions eo;
      eo.batch_size = static_cast<std::size_t>(c.get_int("embedding", "batch_size", 64));
      eo.max_parallel = parallel_for("embedding", 4);
      auto embs = reduction::embed_phrases(data.phrases, client, cache, eo);
      auto features = reduction::cluster_phrases(embs, cc, data.phrase_frequencies());
      const std::size_t clustered = features.size();
      if (sample > 0) features = reduction::sample_features(features, cc);
      auto m = norms::build_reduced_matrix(data, features, static_cast<std::size_t>(min_prod));
      ctx.write(kReduced, norms::serialize_matrix(m));
      json report = {{"concepts", m.concept_count()},
                     {"raw_phrases", data.phrases.size()},
                     {"records", data.records.size()},
                     {"clustered_features", clustered},
                     {"features", m.feature_count()},
                     {"merge_threshold", cc.merge_threshold},
                     {"min_production", min_prod},
                     {"label_collisions", data.label_collisions},
                     {"human_cells", m.cell_count(norms::View::HumanOnly)}};
      ctx.write("reduce_report.json", dump(report));
      ctx.details = report;
    };
  } else if (stage == "impute") {
    const std::string s1 = c.get("cascade", "stage1", "stage1");
    const std::string s2 = c.get("cascade", "stage2", "stage2");
    plan.sections = {"cascade", "exemplars", model_section(s1), model_section(s2)};
    plan.ignore_keys = {"max_parallel", "checkpoint_every", "retries", "backoff_ms",
                        "timeout_seconds"};
    plan.inputs = {{"reduced", out / kReduced}};
    plan.state = {kRequestLog};
    plan.seed = 0;
    plan.body = [&, s1, s2](StageContext& ctx) {
      auto m = norms::load_matrix(out / kReduced);
      verifier::CascadeConfig cc;
      cc.stage1 = make_stage(c, s1, c.get("cascade", "stage1_mode", "zero_shot"));
      cc.stage2 = make_stage(c, s2, c.get("cascade", "stage2_mode", "zero_shot"));
      cc.max_parallel = parallel_for("cascade", 4);
      auto every = c.get_int("cascade", "checkpoint_every", 1000);
      if (every < 1) fail(ErrorCode::InvalidArgument, "config: [cascade] checkpoint_every must be >= 1");
      cc.checkpoint_every = static_cast<std::size_t>(every);
      verifier::RequestLog log(out / kRequestLog);
      verifier::ImputeOptions io;
      io.checkpoint = out / "cache/impute.ckpt";
      auto r = verifier::impute_matrix(m, cc, log, io);
      ctx.write(kImputed, norms::serialize_matrix(r.matrix));
      const auto& s = r.summary;
      json summary = {{"absent_cells", s.absent_cells},
                      {"stage1_model", cc.stage1.client->model_id()},
                      {"stage1_mode", verifier::to_string(cc.stage1.prompt.mode)},
                      {"stage2_model", cc.stage2.client->model_id()},
                      {"stage2_mode", verifier::to_string(cc.stage2.prompt.mode)},
                      {"stage1_true", s.stage1_true},
                      {"stage2_queries", s.stage2_queries},
                      {"final_true", s.final_true},
                      {"human_cells", r.matrix.count(norms::Provenance::HumanElicited)},
                      {"ai_cells", r.matrix.count(norms::Provenance::AiImputed)}};
      ctx.write("impute_summary.json", dump(summary));
      ctx.details = summary;
      ctx.details["stage1_requests"] = s.stage1_requests;
      ctx.details["stage2_requests"] = s.stage2_requests;
      ctx.details["cache_hits"] = s.cache_hits;
      ctx.details["resumed"] = s.resumed;
    };
  } else if (stage == "eval-verifiers") {
    auto models = c.get_list("eval", "models");
    auto modes = c.get_list("eval", "modes");
    if (modes.empty()) modes = {"zero_shot", "two_shot"};
    if (models.empty()) fail(ErrorCode::InvalidArgument, "config: [eval] models is empty");
    const std::string rever = c.get("eval", "reverifier", c.get("cascade", "stage2", "stage2"));
    plan.sections = {"eval", "exemplars", model_section(rever)};
    for (const auto& m : models) plan.sections.push_back(model_section(m));
    plan.ignore_keys = {"max_parallel", "timeout_seconds"};
    plan.inputs = {{"judgments", c.get_path("paths", "judgments")}};
    plan.state = {kRequestLog};
    plan.seed = seed_for("eval");
    plan.body = [&, models, modes, rever, seed = plan.seed](StageContext& ctx) {
      auto js = sdt::load_judgments(c.get_path("paths", "judgments"));
      auto min_j = c.get_int("eval", "min_judgments", 5);
      auto gold = sdt::select_gold(js.records, static_cast<int>(min_j));
      if (gold.empty()) fail(ErrorCode::Degenerate, "no unanimous gold pairs in the judgments");
      std::vector<verifier::Pair> pairs;
      std::size_t gold_true = 0;
      for (const auto& g : gold) {
        pairs.push_back({g.concept_id, g.feature_id, js.concepts[g.concept_id],
                         js.features[g.feature_id]});
        gold_true += g.label ? 1 : 0;
      }
      const int resamples = static_cast<int>(c.get_int("eval", "bootstrap_resamples", 1000));
      const std::size_t par = parallel_for("eval", 4);
      const auto rever_stage = make_stage(c, rever, c.get("eval", "reverifier_mode", "zero_shot"));
      verifier::RequestLog log(out / kRequestLog);
      json results = json::array();
      std::size_t requests = 0;
      for (const auto& model : models) {
        for (const auto& mode : modes) {
          auto stage = make_stage(c, model, mode);
          auto recs = verifier::verify_batch(pairs, stage, log, par);
          sdt::Predictions raw;
          std::vector<verifier::Pair> positives;
          for (std::size_t k = 0; k < recs.size(); ++k) {
            raw[gold[k].key()] = recs[k].parsed;
            if (recs[k].parsed) positives.push_back(pairs[k]);
            requests += recs[k].from_cache ? 0 : 1;
          }
          sdt::Predictions confirmed = raw;
          auto second = verifier::verify_batch(positives, rever_stage, log, par);
          for (std::size_t k = 0; k < second.size(); ++k) {
            confirmed[{positives[k].concept_id, positives[k].feature_id}] = second[k].parsed;
            requests += second[k].from_cache ? 0 : 1;
          }
          results.push_back({{"model", stage.client->model_id()},
                             {"config_name", model},
                             {"mode", mode},
                             {"raw", score_json(gold, raw, resamples, seed)},
                             {"reverified", score_json(gold, confirmed, resamples, seed)}});
        }
      }
      json report = {{"gold_pairs", gold.size()},
                     {"gold_true", gold_true},
                     {"gold_false", gold.size() - gold_true},
                     {"min_judgments", min_j},
                     {"reverifier", rever_stage.client->model_id()},
                     {"reverifier_mode", verifier::to_string(rever_stage.prompt.mode)},
                     {"bootstrap_resamples", resamples},
                     {"seed", seed},
                     {"results", results}};
      ctx.write("verifier_eval.json", dump(report));
      ctx.details = {{"gold_pairs", gold.size()}, {"evaluations", results.size()},
                     {"requests", requests}};
    };
  } else if (stage == "stats") {
    plan.inputs = {{"imputed", out / kImputed}};
    plan.body = [&](StageContext& ctx) {
      auto m = norms::load_matrix(out / kImputed);
      json report = {{"concepts", m.concept_count()},
                     {"features", m.feature_count()},
                     {"human_cells", m.count(norms::Provenance::HumanElicited)},
                     {"ai_cells", m.count(norms::Provenance::AiImputed)},
                     {"human_only", density_json(m, norms::View::HumanOnly)},
                     {"full", density_json(m, norms::View::Full)}};
      ctx.write("stats.json", dump(report));
      ctx.details = {{"human_mean_features", report["human_only"]["features_per_concept"]["mean"]},
                     {"full_mean_features", report["full"]["features_per_concept"]["mean"]},
                     {"human_singleton_fraction", report["human_only"]["singleton_fraction"]},
                     {"full_singleton_fraction", report["full"]["singleton_fraction"]}};
    };
  } else if (stage == "dissim") {
    plan.inputs = {{"imputed", out / kImputed}};
    plan.body = [&](StageContext& ctx) {
      auto m = norms::load_matrix(out / kImputed);
      ctx.write(kDissimHuman, similarity::to_csv(similarity::cosine_dissim(m, norms::View::HumanOnly)));
      ctx.write(kDissimFull, similarity::to_csv(similarity::cosine_dissim(m, norms::View::Full)));
      ctx.details = {{"concepts", m.concept_count()}};
    };
  } else if (stage == "procrustes") {
    plan.inputs = {{"dissim_human", out / kDissimHuman}, {"dissim_full", out / kDissimFull}};
    plan.body = [&](StageContext& ctx) {
      auto a = similarity::load_dissim(out / kDissimHuman);
      auto b = similarity::load_dissim(out / kDissimFull);
      auto r = similarity::procrustes(a, b);
      auto ranked = similarity::rank_discrepant(a, r);
      std::string tsv = "# concept\tdiscrepancy\n";
      json top = json::array();
      for (const auto& d : ranked) {
        tsv += text::escape_field(d.label) + '\t' + text::format_double(d.score) + '\n';
        if (top.size() < 10) top.push_back({{"concept", d.label}, {"score", d.score}});
      }
      json report = {{"a", "human"},        {"b", "full"},
                     {"disparity", r.disparity}, {"scale", r.scale},
                     {"rank", r.rank},      {"degenerate", r.degenerate},
                     {"most_discrepant", top}};
      ctx.write("procrustes.json", dump(report));
      ctx.write("discrepancy.tsv", tsv);
      ctx.details = {{"disparity", r.disparity}};
    };
  } else if (stage == "mine-triplets") {
    plan.sections = {"mining"};
    plan.inputs = {{"dissim_human", out / kDissimHuman}, {"dissim_full", out / kDissimFull}};
    plan.seed = seed_for("mining");
    plan.body = [&, seed = plan.seed](StageContext& ctx) {
      auto a = similarity::load_dissim(out / kDissimHuman);
      auto b = similarity::load_dissim(out / kDissimFull);
      if (a.labels != b.labels) fail(ErrorCode::InvalidArgument, "dissimilarity matrices disagree on labels");
      similarity::MiningConfig mc;
      mc.n_triplets = static_cast<std::size_t>(c.get_int("mining", "n_triplets", 1424));
      mc.per_target = static_cast<std::size_t>(c.get_int("mining", "per_target", 2));
      mc.epsilon = c.get_double("mining", "epsilon", 1e-6);
      mc.seed = seed;
      mc.space_a = "human";
      mc.space_b = "ai";
      auto r = similarity::mine_triplets(a, b, mc);
      ctx.write(kTriplets, similarity::triplets_to_tsv(a.labels, r, mc));
      json report = {{"requested", mc.n_triplets}, {"mined", r.triplets.size()},
                     {"per_target", mc.per_target}, {"epsilon", mc.epsilon},
                     {"seed", seed},                {"warnings", r.warnings}};
      ctx.write("mining_report.json", dump(report));
      ctx.details = {{"mined", r.triplets.size()}, {"warnings", r.warnings.size()}};
    };
  } else if (stage == "eval-judgments") {
    plan.sections = {};
    plan.inputs = {{"triplets", out / kTriplets},
                   {"dissim_human", out / kDissimHuman},
                   {"dissim_full", out / kDissimFull}};
    for (const auto& in : external_inputs(stage)) plan.inputs.push_back(in);
    plan.body = [&](StageContext& ctx) {
      auto triplets = judgment::load_triplets(out / kTriplets);
      auto responses = judgment::load_responses(c.get_path("paths", "responses"));
      auto votes = judgment::majority_votes(responses, triplets.size());
      std::vector<std::unique_ptr<judgment::Space>> spaces;
      spaces.push_back(std::make_unique<judgment::DissimilaritySpace>(
          "human", similarity::load_dissim(out / kDissimHuman)));
      spaces.push_back(std::make_unique<judgment::DissimilaritySpace>(
          "ai", similarity::load_dissim(out / kDissimFull)));
      std::optional<judgment::WordVectorTable> table;
      if (c.has("paths", "word_vectors")) {
        table = judgment::WordVectorTable::load(c.get_path("paths", "word_vectors"));
        spaces.push_back(std::make_unique<judgment::WordVectorSpace>("fasttext", *table));
      }
      json reports = json::array();
      std::vector<judgment::AgreementReport> agreements;
      for (const auto& sp : spaces) {
        auto rep = judgment::agreement(*sp, triplets, votes);
        json flags = json::array();
        for (auto f : rep.flags) flags.push_back(flag_name(f));
        reports.push_back({{"space", rep.space}, {"proportion", rep.proportion}, {"k", rep.k},
                           {"n", rep.n}, {"p_value", rep.p_value}, {"flags", flags}});
        agreements.push_back(std::move(rep));
      }
      // Paired tests on per-triplet agreement indicators (1 = agrees with the
      // majority), over triplets whose vote is not tied.
      json tests = json::array();
      for (std::size_t i = 0; i < agreements.size(); ++i) {
        for (std::size_t j = i + 1; j < agreements.size(); ++j) {
          std::vector<double> x, y;
          for (std::size_t t = 0; t < triplets.size(); ++t) {
            if (votes[t] == similarity::Choice::Tie) continue;
            x.push_back(agreements[i].flags[t] == judgment::Flag::Agree ? 1.0 : 0.0);
            y.push_back(agreements[j].flags[t] == judgment::Flag::Agree ? 1.0 : 0.0);
          }
          json entry = {{"x", agreements[i].space}, {"y", agreements[j].space}, {"n", x.size()}};
          try {
            auto tt = judgment::paired_t_test(x, y);
            entry["t"] = tt.t;
            entry["df"] = tt.df;
            entry["p_value"] = tt.p_value;
          } catch (const Error& e) {
            if (e.code() != ErrorCode::Degenerate && e.code() != ErrorCode::InvalidArgument) throw;
            entry["error"] = e.what();
          }
          tests.push_back(entry);
        }
      }
      json report = {{"triplets", triplets.size()},
                     {"responses", responses.size()},
                     {"agreement", reports},
                     {"paired_t_tests", tests}};
      ctx.write("judgment_report.json", dump(report));
      ctx.details = json::object();
      for (const auto& a : agreements) ctx.details[a.space] = a.proportion;
    };
  } else if (stage == "tsne") {
    plan.sections = {"tsne"};
    plan.inputs = {{"imputed", out / kImputed}};
    plan.seed = seed_for("tsne");
    plan.body = [&, seed = plan.seed](StageContext& ctx) {
      auto m = norms::load_matrix(out / kImputed);
      similarity::TsneConfig tc;
      tc.perplexity = c.get_double("tsne", "perplexity", 30);
      tc.iterations = static_cast<int>(c.get_int("tsne", "iterations", 1000));
      tc.learning_rate = c.get_double("tsne", "learning_rate", 200);
      tc.early_exaggeration = c.get_double("tsne", "early_exaggeration", 12);
      tc.seed = seed;
      std::vector<std::string> labels;
      for (const auto& k : m.concepts()) labels.push_back(k.label);
      json report = json::object();
      for (auto [view, name] : {std::pair{norms::View::HumanOnly, "human"},
                                std::pair{norms::View::Full, "full"}}) {
        auto r = similarity::tsne_embed(m, view, tc);
        ctx.write(std::string("tsne_") + name + ".csv", similarity::tsne_to_csv(labels, r));
        report[name] = {{"initial_kl", r.initial_kl}, {"final_kl", r.final_kl}};
      }
      report["perplexity"] = tc.perplexity;
      report["iterations"] = tc.iterations;
      report["seed"] = seed;
      ctx.write("tsne.json", dump(report));
      ctx.details = report;
    };
  }

  // Current input digests and config digest.
  Manifest want;
  want.stage = stage;
  want.version = kVersion;
  want.seed = plan.seed;
  want.config_digest = c.digest(plan.sections, plan.ignore_keys);
  want.state = plan.state;
  for (const auto& [name, path] : plan.inputs) {
    if (!fs::is_regular_file(path)) {
      fail(ErrorCode::NotFound, stage + ": missing input " + name + ": " + path.string() +
                                    (path.parent_path() == out ? " (run the stage that produces it)" : ""));
    }
    want.inputs[name] = {path.parent_path() == out
                             ? path.filename().string()
                             : path.lexically_relative(c.base_dir()).generic_string(),
                         sha256_file(path)};
  }

  const fs::path manifest_path = out / "manifests" / (stage + ".json");
  if (auto have = read_manifest(manifest_path)) {
    bool fresh = have->version == want.version && have->seed == want.seed &&
                 have->config_digest == want.config_digest && have->inputs == want.inputs &&
                 !have->outputs.empty();
    for (const auto& [p, digest] : have->outputs) {
      if (!fresh) break;
      fresh = fs::is_regular_file(out / p) && sha256_file(out / p) == digest;
    }
    if (fresh) return {stage, true, {{"outputs", have->outputs}}};
  }

  StageContext ctx;
  ctx.out = out;
  ctx.staging = out / ".staging" / stage;
  fs::remove_all(ctx.staging);
  fs::create_directories(ctx.staging);
  fs::create_directories(out / "cache");
  try {
    plan.body(ctx);
  } catch (...) {
    const fs::path q = out / ".quarantine" / stage;
    std::error_code ec;
    fs::remove_all(q, ec);
    fs::create_directories(q.parent_path(), ec);
    fs::rename(ctx.staging, q, ec);
    throw;
  }

  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(ctx.staging)) {
    if (e.is_regular_file()) files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& f : files) {
    const std::string r = rel(f, ctx.staging);
    want.outputs[r] = sha256_file(f);
    fs::create_directories((out / r).parent_path());
    fs::rename(f, out / r);
  }
  fs::remove_all(ctx.staging);
  std::error_code ec;
  fs::remove(out / ".staging", ec);  // only if empty
  fs::create_directories(manifest_path.parent_path());
  text::write_file_atomic(manifest_path, to_json(want));

  StageReport report{stage, false, ctx.details};
  report.details["outputs"] = want.outputs;
  return report;
}

void Pipeline::serve() {
  const Config& c = config_;
  service::ItemPool pool;
  if (c.has("serve", "verification_items")) {
    pool.verification = service::load_verification_items(c.get_path("serve", "verification_items"));
  }
  fs::path triplets = c.has("serve", "triplets") ? c.get_path("serve", "triplets") : out_ / kTriplets;
  if (fs::is_regular_file(triplets)) pool.triads = judgment::load_triplets(triplets);
  if (pool.verification.empty() && pool.triads.empty()) {
    fail(ErrorCode::NotFound, "serve: no verification items and no triplets to serve");
  }
  service::AssignmentPolicy policy;
  policy.target_per_item = static_cast<int>(c.get_int("serve", "target_per_item", 5));
  policy.verification_batch = static_cast<std::size_t>(c.get_int("serve", "verification_batch", 110));
  policy.triadic_batch = static_cast<std::size_t>(c.get_int("serve", "triadic_batch", 0));
  policy.seed = seed_for("serve");
  policy.session_ttl = std::chrono::seconds(c.get_int("serve", "session_ttl_seconds", 24 * 3600));
  fs::path data = !options_.data_dir.empty() ? fs::absolute(options_.data_dir)
                                             : c.get_path("serve", "data_dir", out_ / "service");
  service::ExperimentService svc(std::move(pool), policy, data);
  service::HttpOptions ho;
  ho.host = c.get("serve", "host", "127.0.0.1");
  ho.port = options_.port ? *options_.port : static_cast<int>(c.get_int("serve", "port", 8080));
  ho.static_dir = c.get_path("serve", "static_dir");
  ho.admin_token = c.get("serve", "admin_token", "");
  service::HttpFrontend frontend(svc, ho);
  frontend.run();
}

}  // namespace normforge::pipeline
