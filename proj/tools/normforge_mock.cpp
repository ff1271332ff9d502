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

// Scripted chat-completions and embeddings servers for offline runs.
#include <csignal>
#include <cstdio>
#include <optional>

#include "CLI11.hpp"
#include "common/error.hpp"
#include "json.hpp"
#include "mock/mock_servers.hpp"

using namespace normforge;

int main(int argc, char** argv) {
  CLI::App app{"normforge-mock: scripted LLM and embedding endpoints"};
  std::string chat_script, embed_script, host = "127.0.0.1";
  int chat_port = 0, embed_port = 0;
  app.add_option("--chat-script", chat_script, "model/concept/feature/answer TSV");
  app.add_option("--embedding-script", embed_script, "phrase/vector TSV");
  app.add_option("--host", host);
  app.add_option("--chat-port", chat_port)->check(CLI::Range(0, 65535));
  app.add_option("--embedding-port", embed_port)->check(CLI::Range(0, 65535));
  CLI11_PARSE(app, argc, argv);

  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &set, nullptr);  // inherited by the server threads

  try {
    mock::MockChatServer chat(chat_script.empty() ? mock::ChatScript{}
                                                  : mock::load_chat_script(chat_script));
    mock::MockEmbeddingServer embed(embed_script.empty() ? mock::EmbeddingScript{}
                                                         : mock::load_embedding_script(embed_script));
    chat.start(host, chat_port);
    embed.start(host, embed_port);
    std::printf("%s\n", nlohmann::json{{"chat_url", chat.url()}, {"embedding_url", embed.url()}}
                            .dump()
                            .c_str());
    std::fflush(stdout);
    int sig = 0;
    sigwait(&set, &sig);
    chat.stop();
    embed.stop();
  } catch (const Error& e) {
    std::fprintf(stderr, "%s\n",
                 nlohmann::json{{"error", {{"code", to_string(e.code())}, {"message", e.what()}}}}
                     .dump()
                     .c_str());
    return 1;
  }
  return 0;
}
