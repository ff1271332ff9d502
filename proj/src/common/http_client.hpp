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

#include <chrono>
#include <string>

#include "json.hpp"

namespace normforge::http {

struct Endpoint {
  std::string url;    // e.g. http://127.0.0.1:8080/v1/chat/completions
  std::string model;
  std::string token;  // sent as a bearer token when non-empty
  int timeout_seconds = 60;

  // Stable identity used in cache keys: url + model, never the token.
  std::string id() const { return url + "#" + model; }
};

struct RetryPolicy {
  int attempts = 3;
  std::chrono::milliseconds backoff{200};  // doubled after every failed attempt
};

struct Url {
  std::string scheme_host_port;
  std::string path;
};

Url parse_url(const std::string& url);

// POSTs a JSON body and returns the parsed JSON reply. Connection errors,
// HTTP 429 and 5xx are retried with exponential backoff; other statuses and
// unparseable replies fail immediately. Throws Error(Transport).
nlohmann::json post_json(const Endpoint& endpoint, const nlohmann::json& body,
                         const RetryPolicy& retry);

}  // namespace normforge::http
