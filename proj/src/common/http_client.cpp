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

#include "common/http_client.hpp"

#include <thread>

#include "common/error.hpp"
#include "httplib.h"

namespace normforge::http {

Url parse_url(const std::string& url) {
  auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    fail(ErrorCode::InvalidArgument, "endpoint url lacks a scheme: " + url);
  }
  std::string scheme = url.substr(0, scheme_end);
  if (scheme != "http" && scheme != "https") {
    fail(ErrorCode::InvalidArgument, "unsupported scheme in " + url);
  }
  auto path_start = url.find('/', scheme_end + 3);
  Url out;
  if (path_start == std::string::npos) {
    out.scheme_host_port = url;
    out.path = "/";
  } else {
    out.scheme_host_port = url.substr(0, path_start);
    out.path = url.substr(path_start);
  }
  if (out.scheme_host_port.size() <= scheme_end + 3) {
    fail(ErrorCode::InvalidArgument, "endpoint url lacks a host: " + url);
  }
  return out;
}

nlohmann::json post_json(const Endpoint& endpoint, const nlohmann::json& body,
                         const RetryPolicy& retry) {
  const Url url = parse_url(endpoint.url);
  httplib::Client client(url.scheme_host_port);
  client.set_connection_timeout(endpoint.timeout_seconds);
  client.set_read_timeout(endpoint.timeout_seconds);
  client.set_write_timeout(endpoint.timeout_seconds);

  httplib::Headers headers;
  if (!endpoint.token.empty()) {
    headers.emplace("Authorization", "Bearer " + endpoint.token);
  }
  const std::string payload = body.dump();

  std::string last_error;
  auto delay = retry.backoff;
  const int attempts = std::max(1, retry.attempts);
  for (int attempt = 0; attempt < attempts; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(delay);
      delay *= 2;
    }
    auto res = client.Post(url.path, headers, payload, "application/json");
    if (!res) {
      last_error = "connection failed: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status == 429 || res->status >= 500) {
      last_error = "HTTP " + std::to_string(res->status);
      continue;
    }
    if (res->status != 200) {
      fail(ErrorCode::Transport, endpoint.url + " returned HTTP " +
                                     std::to_string(res->status) + ": " + res->body);
    }
    try {
      return nlohmann::json::parse(res->body);
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorCode::Transport, endpoint.url + " returned invalid JSON: " + e.what());
    }
  }
  fail(ErrorCode::Transport, endpoint.url + " failed after " +
                                 std::to_string(attempts) + " attempts (" +
                                 last_error + ")");
}

}  // namespace normforge::http
