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

#include "service/experiment_service.hpp"

#include <thread>

#include "common/error.hpp"
#include "httplib.h"
#include "json.hpp"

namespace normforge::service {

using nlohmann::json;

namespace {

int status_for(ErrorCode c) {
  switch (c) {
    case ErrorCode::InvalidArgument:
    case ErrorCode::Parse:
      return 400;
    case ErrorCode::NotFound:
      return 404;
    case ErrorCode::State:
      return 409;
    default:
      return 500;
  }
}

void reply(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

template <class F>
httplib::Server::Handler guarded(F f) {
  return [f](const httplib::Request& req, httplib::Response& res) {
    try {
      f(req, res);
    } catch (const Error& e) {
      reply(res, status_for(e.code()), {{"error", e.what()}, {"code", to_string(e.code())}});
    } catch (const json::exception& e) {
      reply(res, 400, {{"error", std::string("bad request body: ") + e.what()},
                       {"code", to_string(ErrorCode::InvalidArgument)}});
    } catch (const std::exception& e) {
      reply(res, 500, {{"error", e.what()}, {"code", "internal"}});
    }
  };
}

json parse_body(const httplib::Request& req) {
  json body = json::parse(req.body, nullptr, false);
  if (body.is_discarded() || !body.is_object()) {
    fail(ErrorCode::InvalidArgument, "request body must be a JSON object");
  }
  return body;
}

json item_json(const Item& item) {
  json j = {{"task", to_string(item.task)}, {"item", item.id}};
  if (item.verification) {
    j["concept"] = item.verification->concept_label;
    j["feature"] = item.verification->feature;
  } else {
    j["target"] = item.triad->target;
    j["a"] = item.triad->opt_a;
    j["b"] = item.triad->opt_b;
  }
  return j;
}

}  // namespace

struct HttpFrontend::Impl {
  ExperimentService& service;
  HttpOptions options;
  httplib::Server server;
  std::thread thread;

  Impl(ExperimentService& s, HttpOptions o) : service(s), options(std::move(o)) { routes(); }

  void routes() {
    server.Post("/api/session", guarded([this](const httplib::Request& req, httplib::Response& res) {
      json body = parse_body(req);
      Session s = service.start_session(body.at("task").get<std::string>(),
                                        body.at("participant").get<std::string>());
      reply(res, 200, {{"session", s.id}, {"task", to_string(s.task)}, {"items", s.items.size()}});
    }));
    server.Get("/api/session/:id/next",
               guarded([this](const httplib::Request& req, httplib::Response& res) {
                 auto item = service.next_item(req.path_params.at("id"));
                 if (!item) {
                   reply(res, 200, {{"done", true}});
                   return;
                 }
                 json j = item_json(*item);
                 j["done"] = false;
                 reply(res, 200, j);
               }));
    server.Post("/api/session/:id/response",
                guarded([this](const httplib::Request& req, httplib::Response& res) {
                  json body = parse_body(req);
                  auto r = service.submit_response(req.path_params.at("id"),
                                                   body.at("item").get<std::size_t>(),
                                                   body.at("response").get<std::string>());
                  reply(res, 200, {{"stored", !r.duplicate}, {"duplicate", r.duplicate},
                                   {"done", r.done}});
                }));
    server.Get("/api/export/:task",
               guarded([this](const httplib::Request& req, httplib::Response& res) {
                 if (!options.admin_token.empty() &&
                     req.get_header_value("X-Admin-Token") != options.admin_token) {
                   reply(res, 403, {{"error", "admin token required"}, {"code", "forbidden"}});
                   return;
                 }
                 Task t = parse_task(req.path_params.at("task"));
                 res.status = 200;
                 res.set_content(service.export_task(t), "text/tab-separated-values");
               }));
    if (!options.static_dir.empty()) {
      if (!server.set_mount_point("/", options.static_dir.string())) {
        fail(ErrorCode::Io, "static directory not found: " + options.static_dir.string());
      }
    }
  }

  int bind() {
    int port = options.port;
    if (port == 0) {
      port = server.bind_to_any_port(options.host);
    } else if (!server.bind_to_port(options.host, port)) {
      port = -1;
    }
    if (port < 0) {
      fail(ErrorCode::Io, "cannot bind " + options.host + ":" + std::to_string(options.port));
    }
    return port;
  }
};

HttpFrontend::HttpFrontend(ExperimentService& service, HttpOptions options)
    : impl_(std::make_unique<Impl>(service, std::move(options))) {}

HttpFrontend::~HttpFrontend() { stop(); }

int HttpFrontend::start() {
  int port = impl_->bind();
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  return port;
}

void HttpFrontend::run() {
  impl_->bind();
  impl_->server.listen_after_bind();
}

void HttpFrontend::stop() {
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace normforge::service
