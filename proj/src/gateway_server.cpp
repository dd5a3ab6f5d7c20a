/*
 * Copyright 2026 The Switchboard Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "exclusive_bind.hpp"
#include "switchboard/error.hpp"
#include "switchboard/gateway.hpp"
#include "switchboard/log.hpp"
#include "switchboard/mock_fleet.hpp"

namespace switchboard {

using json = nlohmann::json;

struct GatewayServer::Impl {
  GatewayConfig config;
  std::shared_ptr<AgentTransport> transport;
  std::shared_ptr<const ExampleRouterModel> router_model;
  Registry registry;
  AskOptions ask_options;
  httplib::Server server;
  std::thread thread;
  int port = 0;

  void install_routes();
  ScorerHandle resolve_scorer(const std::string& spec) const;
};

namespace {

void reply_error(httplib::Response& res, int status, const std::string& message) {
  res.status = status;
  res.set_content(json{{"error", message}}.dump(), "application/json");
}

int http_status_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument:
    case ErrorCode::kParse:
    case ErrorCode::kOutOfRange:
      return 400;
    case ErrorCode::kNotFound: return 404;
    case ErrorCode::kDuplicate: return 409;
    case ErrorCode::kTimeout: return 504;
    case ErrorCode::kUnavailable:
    case ErrorCode::kMalformedReply:
      return 502;
    case ErrorCode::kIo: return 500;
  }
  return 500;
}

}  // namespace

ScorerHandle GatewayServer::Impl::resolve_scorer(const std::string& spec) const {
  const int timeout = config.fanout.per_agent_timeout_ms;
  constexpr std::string_view kRemote = "remote:";
  if (spec.rfind(kRemote, 0) == 0) {
    const std::string target = spec.substr(kRemote.size());
    if (auto it = config.scorer_endpoints.find(target);
        it != config.scorer_endpoints.end()) {
      return ScorerHandle::remote(it->second, timeout);
    }
  }
  return ScorerHandle::parse(spec, timeout);
}

void GatewayServer::Impl::install_routes() {
  server.Get("/healthz", [](const httplib::Request&, httplib::Response& res) {
    res.set_content("ok", "text/plain");
  });

  server.Get("/agents", [this](const httplib::Request&, httplib::Response& res) {
    const auto agents = registry.snapshot();
    res.set_content(profiles_to_json(agents), "application/json");
  });

  server.Post("/agents", [this](const httplib::Request& req, httplib::Response& res) {
    try {
      const json body = json::parse(req.body);
      std::optional<std::string> endpoint;
      if (body.contains("endpoint") && !body["endpoint"].is_null()) {
        endpoint = body["endpoint"].get<std::string>();
      }
      const std::string id = body.at("id").get<std::string>();
      AgentProfile profile = make_profile(id, body.value("name", id),
                                          body.value("description", ""), endpoint);
      registry.add(profile);
      res.status = 201;
      res.set_content(profiles_to_json(std::span(&profile, 1)), "application/json");
    } catch (const json::exception& e) {
      reply_error(res, 400, std::string("malformed agent profile: ") + e.what());
    } catch (const Error& e) {
      reply_error(res, http_status_for(e.code()), e.what());
    }
  });

  server.Delete(R"(/agents/([^/]+))",
                [this](const httplib::Request& req, httplib::Response& res) {
                  if (registry.remove(req.matches[1].str())) {
                    res.status = 204;
                  } else {
                    reply_error(res, 404, "no agent \"" + req.matches[1].str() + "\"");
                  }
                });

  server.Post("/ask", [this](const httplib::Request& req, httplib::Response& res) {
    json body;
    try {
      body = json::parse(req.body);
    } catch (const json::parse_error&) {
      reply_error(res, 400, "body must be a JSON object");
      return;
    }
    if (!body.is_object() || !body.contains("text") || !body["text"].is_string()) {
      reply_error(res, 400, "missing \"text\"");
      return;
    }
    const std::string text = body["text"].get<std::string>();
    if (trim(text).empty()) {
      reply_error(res, 400, "empty query text");
      return;
    }
    Strategy strategy;
    try {
      const std::string name = body.value("strategy", "qr");
      auto kind = parse_strategy(name);
      if (!kind) {
        reply_error(res, 400, "unknown strategy \"" + name + "\"");
        return;
      }
      strategy.kind = *kind;
      strategy.scorer = resolve_scorer(body.value("scorer", config.default_scorer));
      strategy.router_model = router_model;
      strategy.filter_fallbacks = body.value("filter_fallbacks", config.filter_fallbacks);
      if (body.value("whole_description", false)) {
        strategy.description_mode = DescriptionMode::kWhole;
      }
    } catch (const json::exception& e) {
      reply_error(res, 400, e.what());
      return;
    } catch (const Error& e) {
      reply_error(res, 400, e.what());
      return;
    }
    try {
      const AskResult result = ask(text, strategy, registry, ask_options, transport);
      res.set_content(ask_result_to_json(result), "application/json");
    } catch (const Error& e) {
      int status = http_status_for(e.code());
      if (e.code() == ErrorCode::kInvalidArgument && registry.size() == 0) status = 503;
      reply_error(res, status, e.what());
    }
  });
}

GatewayServer::GatewayServer(GatewayConfig config,
                             std::shared_ptr<AgentTransport> transport,
                             std::vector<AgentProfile> agents,
                             std::shared_ptr<const ExampleRouterModel> router_model)
    : impl_(std::make_unique<Impl>()) {
  impl_->config = std::move(config);
  impl_->transport = std::move(transport);
  impl_->router_model = std::move(router_model);
  impl_->ask_options.fanout = impl_->config.fanout;
  if (!impl_->config.fallback_phrases.empty()) {
    impl_->ask_options.fallback_phrases = FallbackPhrases(impl_->config.fallback_phrases);
  }
  for (auto& agent : agents) impl_->registry.add(std::move(agent));
  impl_->server.new_task_queue = [] { return new httplib::ThreadPool(16); };
  detail::use_exclusive_bind(impl_->server);
  impl_->install_routes();
}

std::unique_ptr<GatewayServer> GatewayServer::from_config(GatewayConfig config) {
  std::vector<AgentProfile> agents;
  if (!config.agents_path.empty()) agents = load_agent_profiles(config.agents_path);

  std::shared_ptr<AgentTransport> transport;
  if (config.fleet_mode == "replay") {
    if (config.dataset_path.empty()) {
      throw Error(ErrorCode::kInvalidArgument, "replay fleet needs a dataset path");
    }
    Dataset dataset = load_dataset(config.dataset_path, config.vote_threshold, agents);
    FallbackPhrases phrases = config.fallback_phrases.empty()
                                  ? FallbackPhrases()
                                  : FallbackPhrases(config.fallback_phrases);
    LatencySpec latency{config.replay_latency_min_ms, config.replay_latency_max_ms,
                        config.replay_latency_seed};
    transport = std::make_shared<ReplayTransport>(
        build_fleet(dataset, latency, kDefaultFallbackText, phrases));
    if (agents.empty()) agents = dataset.agents;
  } else {
    transport = std::make_shared<HttpAgentTransport>();
    for (const auto& agent : agents) {
      if (!agent.endpoint) log_warning("agent " + agent.id + " has no endpoint");
    }
  }

  std::shared_ptr<const ExampleRouterModel> router;
  if (!config.router_model_path.empty()) {
    router = std::make_shared<const ExampleRouterModel>(
        ExampleRouterModel::load_file(config.router_model_path));
  }
  return std::make_unique<GatewayServer>(std::move(config), std::move(transport),
                                         std::move(agents), std::move(router));
}

GatewayServer::~GatewayServer() { stop(); }

int GatewayServer::start() {
  if (impl_->thread.joinable()) return impl_->port;
  const auto& host = impl_->config.host;
  const int requested = impl_->config.port;
  if (requested == 0) {
    impl_->port = impl_->server.bind_to_any_port(host);
  } else {
    impl_->port = impl_->server.bind_to_port(host, requested) ? requested : -1;
  }
  if (impl_->port <= 0) {
    throw Error(ErrorCode::kUnavailable,
                "gateway: cannot bind " + host + ":" + std::to_string(requested));
  }
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  return impl_->port;
}

void GatewayServer::stop() {
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

void GatewayServer::wait() {
  while (impl_->server.is_running()) {
    std::this_thread::sleep_for(std::chrono::milliseconds(20));
  }
}

int GatewayServer::port() const { return impl_->port; }

Registry& GatewayServer::registry() { return impl_->registry; }

}  // namespace switchboard
