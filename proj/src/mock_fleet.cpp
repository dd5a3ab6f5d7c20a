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

#include "switchboard/mock_fleet.hpp"

#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "exclusive_bind.hpp"
#include "switchboard/error.hpp"
#include "switchboard/log.hpp"

namespace switchboard {

using json = nlohmann::json;

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t fnv1a(std::string_view text) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

std::int64_t elapsed_ms(Clock::time_point since) {
  return std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() -
                                                               since)
      .count();
}

}  // namespace

ReplayAgent::ReplayAgent(AgentProfile profile, std::string default_fallback,
                         LatencySpec latency)
    : profile_(std::move(profile)),
      default_fallback_(std::move(default_fallback)),
      latency_(latency) {
  if (latency_.min_ms < 0 || latency_.max_ms < latency_.min_ms) {
    throw Error(ErrorCode::kInvalidArgument,
                "latency range needs 0 <= min <= max");
  }
}

bool ReplayAgent::add(std::string_view query_text, ReplayEntry entry) {
  return lookup_.emplace(normalize_query_text(query_text), std::move(entry))
      .second;
}

AgentResponse ReplayAgent::lookup(std::string_view query_text) const {
  AgentResponse response;
  response.agent_id = profile_.id;
  auto it = lookup_.find(normalize_query_text(query_text));
  if (it == lookup_.end()) {
    response.text = default_fallback_;
    response.status = ResponseStatus::kFallback;
  } else {
    response.text = it->second.text;
    response.status = it->second.status;
  }
  return response;
}

std::int64_t ReplayAgent::latency_for(std::string_view query_text) const {
  if (latency_.max_ms == latency_.min_ms) return latency_.min_ms;
  const std::uint64_t mixed = splitmix64(
      latency_.seed ^ splitmix64(fnv1a(profile_.id)) ^
      fnv1a(normalize_query_text(query_text)));
  const auto span = static_cast<std::uint64_t>(latency_.max_ms - latency_.min_ms) + 1;
  return latency_.min_ms + static_cast<std::int64_t>(mixed % span);
}

std::vector<ReplayAgent> build_fleet(const Dataset& dataset,
                                     const LatencySpec& latency,
                                     std::string_view fallback_text,
                                     const FallbackPhrases& phrases,
                                     FleetBuildReport* report) {
  std::vector<ReplayAgent> fleet;
  fleet.reserve(dataset.agents.size());
  std::map<std::string, std::size_t> index;
  for (const auto& profile : dataset.agents) {
    index.emplace(profile.id, fleet.size());
    fleet.emplace_back(profile, std::string(fallback_text), latency);
  }
  std::size_t collisions = 0;
  for (const auto& example : dataset.examples) {
    for (const auto& [agent, response] : example.responses) {
      auto it = index.find(agent);
      if (it == index.end()) continue;
      ReplayEntry entry{response.text, classify_response(response.text, phrases)};
      if (!fleet[it->second].add(example.query.text, std::move(entry))) {
        ++collisions;
        log_warning("fleet: agent " + agent + " already has a reply for \"" +
                    example.query.text + "\" (query " + example.query.id +
                    "); keeping the first");
      }
    }
  }
  if (report) report->collisions = collisions;
  return fleet;
}

AgentResponse respond(const ReplayAgent& agent, std::string_view query_text) {
  const auto started = Clock::now();
  std::this_thread::sleep_for(
      std::chrono::milliseconds(agent.latency_for(query_text)));
  AgentResponse response = agent.lookup(query_text);
  response.latency_ms = elapsed_ms(started);
  return response;
}

ReplayTransport::ReplayTransport(std::vector<ReplayAgent> fleet)
    : fleet_(std::move(fleet)) {
  for (std::size_t i = 0; i < fleet_.size(); ++i) {
    by_id_.emplace(fleet_[i].id(), i);
  }
}

const ReplayAgent* ReplayTransport::find(std::string_view id) const {
  auto it = by_id_.find(id);
  return it == by_id_.end() ? nullptr : &fleet_[it->second];
}

std::size_t ReplayTransport::dispatch_count() const { return dispatches_.load(); }

AgentResponse ReplayTransport::dispatch(const AgentProfile& agent,
                                        std::string_view query,
                                        Clock::time_point deadline) {
  ++dispatches_;
  const auto started = Clock::now();
  const ReplayAgent* replay = find(agent.id);
  if (!replay) {
    return {agent.id, "", ResponseStatus::kError, 0};
  }
  const auto wake =
      started + std::chrono::milliseconds(replay->latency_for(query));
  if (wake > deadline) {
    std::this_thread::sleep_until(deadline);
    return {agent.id, "", ResponseStatus::kTimeout, elapsed_ms(started)};
  }
  std::this_thread::sleep_until(wake);
  AgentResponse response = replay->lookup(query);
  response.latency_ms = elapsed_ms(started);
  return response;
}

struct FleetServer::Impl {
  std::vector<ReplayAgent> fleet;
  std::map<std::string, std::size_t, std::less<>> by_id;
  httplib::Server server;
  std::thread thread;
  int port = 0;
};

FleetServer::FleetServer(std::vector<ReplayAgent> fleet)
    : impl_(std::make_unique<Impl>()) {
  impl_->fleet = std::move(fleet);
  for (std::size_t i = 0; i < impl_->fleet.size(); ++i) {
    impl_->by_id.emplace(impl_->fleet[i].id(), i);
  }
  // Fan-out sends one request per agent at once; each handler sleeps.
  const std::size_t workers = std::max<std::size_t>(8, impl_->fleet.size() * 4);
  impl_->server.new_task_queue = [workers] {
    return new httplib::ThreadPool(workers);
  };
  detail::use_exclusive_bind(impl_->server);

  Impl* impl = impl_.get();
  impl_->server.Post(
      R"(/agents/([^/]+)/respond)",
      [impl](const httplib::Request& req, httplib::Response& res) {
        auto it = impl->by_id.find(req.matches[1].str());
        if (it == impl->by_id.end()) {
          res.status = 404;
          res.set_content(json{{"error", "unknown agent"}}.dump(), "application/json");
          return;
        }
        json body;
        try {
          body = json::parse(req.body);
        } catch (const json::parse_error&) {
          body = nullptr;
        }
        if (!body.is_object() || !body.contains("text") || !body["text"].is_string()) {
          res.status = 400;
          res.set_content(json{{"error", "expected {\"text\": \"...\"}"}}.dump(),
                          "application/json");
          return;
        }
        const AgentResponse reply =
            respond(impl->fleet[it->second], body["text"].get<std::string>());
        res.set_content(json{{"agent", reply.agent_id},
                             {"text", reply.text},
                             {"status", status_name(reply.status)}}
                            .dump(),
                        "application/json");
      });
  impl_->server.Get("/agents", [impl](const httplib::Request&, httplib::Response& res) {
    json list = json::array();
    for (const auto& agent : impl->fleet) list.push_back(agent.id());
    res.set_content(list.dump(), "application/json");
  });
  impl_->server.Get("/healthz", [](const httplib::Request&, httplib::Response& res) {
    res.set_content("ok", "text/plain");
  });
}

FleetServer::~FleetServer() { stop(); }

int FleetServer::start(const std::string& host, int port) {
  if (impl_->thread.joinable()) return impl_->port;
  if (port == 0) {
    impl_->port = impl_->server.bind_to_any_port(host);
  } else if (impl_->server.bind_to_port(host, port)) {
    impl_->port = port;
  } else {
    impl_->port = -1;
  }
  if (impl_->port <= 0) {
    throw Error(ErrorCode::kUnavailable,
                "fleet: cannot bind " + host + ":" + std::to_string(port));
  }
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  return impl_->port;
}

void FleetServer::stop() {
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

void FleetServer::wait() {
  while (impl_->server.is_running()) {
    std::this_thread::sleep_for(std::chrono::milliseconds(20));
  }
}

int FleetServer::port() const { return impl_->port; }

std::vector<AgentProfile> FleetServer::profiles(const std::string& host) const {
  std::vector<AgentProfile> out;
  out.reserve(impl_->fleet.size());
  for (const auto& agent : impl_->fleet) {
    AgentProfile profile = agent.profile();
    profile.endpoint = "http://" + host + ":" + std::to_string(impl_->port) +
                       "/agents/" + agent.id();
    out.push_back(std::move(profile));
  }
  return out;
}

}  // namespace switchboard
