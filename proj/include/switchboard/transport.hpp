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

#ifndef SWITCHBOARD_TRANSPORT_HPP_
#define SWITCHBOARD_TRANSPORT_HPP_

#include <chrono>
#include <string>
#include <string_view>

#include "switchboard/core_model.hpp"

namespace switchboard {

using Clock = std::chrono::steady_clock;

// How the gateway reaches an agent. Implementations must return by
// `deadline` (plus scheduling slack) and report a late answer as a timeout;
// they may be called concurrently from many threads.
class AgentTransport {
 public:
  virtual ~AgentTransport() = default;
  virtual AgentResponse dispatch(const AgentProfile& agent,
                                 std::string_view query,
                                 Clock::time_point deadline) = 0;
};

// Speaks the agent wire protocol:
//   POST {endpoint}/respond {"text": "..."}
//   -> {"agent": "...", "text": "...", "status": "answered"|"fallback"}
class HttpAgentTransport : public AgentTransport {
 public:
  AgentResponse dispatch(const AgentProfile& agent, std::string_view query,
                         Clock::time_point deadline) override;
};

}  // namespace switchboard

#endif  // SWITCHBOARD_TRANSPORT_HPP_
