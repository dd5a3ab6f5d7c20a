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

#include "switchboard/transport.hpp"

#include <httplib.h>
#include <json.hpp>

#include "switchboard/error.hpp"
#include "switchboard/qr_arbiter.hpp"

namespace switchboard {

using json = nlohmann::json;

AgentResponse HttpAgentTransport::dispatch(const AgentProfile& agent,
                                           std::string_view query,
                                           Clock::time_point deadline) {
  const auto started = Clock::now();
  auto since = [&] {
    return std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() -
                                                                 started)
        .count();
  };
  AgentResponse response{agent.id, "", ResponseStatus::kError, 0};
  if (!agent.endpoint) return response;

  const auto remaining =
      std::chrono::ceil<std::chrono::milliseconds>(deadline - started);
  if (remaining.count() <= 0) {
    response.status = ResponseStatus::kTimeout;
    return response;
  }

  Endpoint target;
  try {
    target = parse_endpoint(*agent.endpoint, "/");
  } catch (const Error&) {
    return response;
  }
  const std::string path = (target.path == "/" ? "" : target.path) + "/respond";

  httplib::Client client(target.scheme_host_port);
  client.set_connection_timeout(remaining);
  client.set_read_timeout(remaining);
  client.set_write_timeout(remaining);
  auto res = client.Post(path, json{{"text", std::string(query)}}.dump(),
                         "application/json");
  response.latency_ms = since();
  if (Clock::now() >= deadline) {
    response.status = ResponseStatus::kTimeout;
    return response;
  }
  if (!res || res->status != 200) return response;

  try {
    const json body = json::parse(res->body);
    response.text = body.at("text").get<std::string>();
    const std::string status = body.value("status", "answered");
    response.status = status == "fallback" ? ResponseStatus::kFallback
                                           : ResponseStatus::kAnswered;
  } catch (const json::exception&) {
    response.text.clear();
    response.status = ResponseStatus::kError;
  }
  return response;
}

}  // namespace switchboard
