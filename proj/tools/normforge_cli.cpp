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

#include <cstdio>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "normforge/normforge.h"

namespace {

int report_error(nf_status s, const std::string& command) {
  nlohmann::json j = {{"error", {{"code", nf_status_name(s)},
                                 {"message", nf_last_error()},
                                 {"command", command}}}};
  std::fprintf(stderr, "%s\n", j.dump().c_str());
  return static_cast<int>(s);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"normforge: semantic feature norm toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(nf_version()));

  std::string config;
  std::string out_dir;
  std::uint64_t seed = 0;
  std::size_t max_parallel = 0;
  int port = -1;
  std::string data_dir;

  std::vector<std::string> commands;
  for (std::size_t i = 0; i < nf_stage_count(); ++i) commands.emplace_back(nf_stage_name(i));
  commands.emplace_back("all");
  commands.emplace_back("serve");

  for (const auto& name : commands) {
    std::string help = name == "all"     ? "run every stage in order"
                       : name == "serve" ? "serve the experiment API"
                                         : "run the " + name + " stage";
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config, "pipeline configuration file")->required();
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--seed", seed, "seed for every randomized stage");
    sub->add_option("--max-parallel", max_parallel, "concurrent requests")
        ->check(CLI::PositiveNumber);
    if (name == "serve") {
      sub->add_option("--port", port, "listen port (0 picks one)")->check(CLI::Range(0, 65535));
      sub->add_option("--data-dir", data_dir, "response store directory");
    }
  }

  CLI11_PARSE(app, argc, argv);
  const std::string command = app.get_subcommands().front()->get_name();
  const CLI::App* sub = app.get_subcommands().front();

  nf_run_options opts;
  nf_run_options_init(&opts);
  if (!out_dir.empty()) opts.out_dir = out_dir.c_str();
  if (sub->count("--seed")) {
    opts.has_seed = 1;
    opts.seed = seed;
  }
  opts.max_parallel = max_parallel;
  opts.port = port;
  if (!data_dir.empty()) opts.data_dir = data_dir.c_str();

  nf_pipeline* p = nullptr;
  if (nf_status s = nf_pipeline_open(config.c_str(), &opts, &p); s != NF_OK) {
    return report_error(s, command);
  }
  nf_status s = NF_OK;
  if (command == "serve") {
    s = nf_pipeline_serve(p);
  } else {
    const char* report = nullptr;
    s = nf_pipeline_run(p, command.c_str(), &report);
    if (s == NF_OK) std::printf("%s\n", report);
  }
  int rc = s == NF_OK ? 0 : report_error(s, command);
  nf_pipeline_free(p);
  return rc;
}
