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

// Replay agents: each one answers with the text it gave for a recorded
// utterance, after an injected delay. Stands in for real black-box agents.

#ifndef SWITCHBOARD_MOCK_FLEET_HPP_
#define SWITCHBOARD_MOCK_FLEET_HPP_

#include <atomic>
#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "switchboard/core_model.hpp"
#include "switchboard/transport.hpp"

namespace switchboard {

inline constexpr std::string_view kDefaultFallbackText = "Didn't get that!";

// Fixed latency when min == max, else uniform in [min, max] drawn from a
// stream seeded by (seed, agent id, normalized query).
struct LatencySpec {
  std::int64_t min_ms = 0;
  std::int64_t max_ms = 0;
  std::uint64_t seed = 0;

  static LatencySpec fixed(std::int64_t ms) { return {ms, ms, 0}; }
};

struct ReplayEntry {
  std::string text;
  ResponseStatus status = ResponseStatus::kAnswered;
};

class ReplayAgent {
 public:
  ReplayAgent(AgentProfile profile, std::string default_fallback,
              LatencySpec latency);

  const AgentProfile& profile() const { return profile_; }
  const std::string& id() const { return profile_.id; }
  const LatencySpec& latency() const { return latency_; }
  void set_latency(LatencySpec latency) { latency_ = latency; }
  std::size_t size() const { return lookup_.size(); }

  // Returns false (keeping the first entry) when the key already exists.
  bool add(std::string_view query_text, ReplayEntry entry);

  // Recorded answer or the default fallback, without sleeping.
  AgentResponse lookup(std::string_view query_text) const;
  std::int64_t latency_for(std::string_view query_text) const;

 private:
  AgentProfile profile_;
  std::unordered_map<std::string, ReplayEntry> lookup_;
  std::string default_fallback_;
  LatencySpec latency_;
};

struct FleetBuildReport {
  std::size_t collisions = 0;
};

std::vector<ReplayAgent> build_fleet(
    const Dataset& dataset, const LatencySpec& latency,
    std::string_view fallback_text = kDefaultFallbackText,
    const FallbackPhrases& phrases = FallbackPhrases(),
    FleetBuildReport* report = nullptr);

// Sleeps for the agent's latency, then answers.
AgentResponse respond(const ReplayAgent& agent, std::string_view query_text);

// In-process dispatch to a fleet, honoring the caller's deadline: an agent
// whose latency would overrun it sleeps until the deadline and times out.
class ReplayTransport : public AgentTransport {
 public:
  explicit ReplayTransport(std::vector<ReplayAgent> fleet);

  AgentResponse dispatch(const AgentProfile& agent, std::string_view query,
                         Clock::time_point deadline) override;

  const ReplayAgent* find(std::string_view id) const;
  std::size_t dispatch_count() const;

 private:
  std::vector<ReplayAgent> fleet_;
  std::map<std::string, std::size_t, std::less<>> by_id_;
  mutable std::atomic<std::size_t> dispatches_{0};
};

// Serves every agent of a fleet on one port under per-agent path prefixes:
//   POST /agents/{id}/respond
class FleetServer {
 public:
  explicit FleetServer(std::vector<ReplayAgent> fleet);
  ~FleetServer();

  FleetServer(const FleetServer&) = delete;
  FleetServer& operator=(const FleetServer&) = delete;

  // Binds (port 0 picks a free port) and serves on a background thread.
  int start(const std::string& host = "127.0.0.1", int port = 0);
  void stop();
  // Blocks until stop() is called from another thread.
  void wait();
  int port() const;

  // Profiles with endpoints pointing at this server.
  std::vector<AgentProfile> profiles(const std::string& host = "127.0.0.1")
      const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace switchboard

#endif  // SWITCHBOARD_MOCK_FLEET_HPP_
