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

#include <doctest.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>

#include <json.hpp>

#include "scorer_conformance.hpp"
#include "switchboard/error.hpp"
#include "switchboard/lexical.hpp"
#include "switchboard/qr_arbiter.hpp"
#include "test_support.hpp"

using namespace switchboard;
using json = nlohmann::json;

namespace {

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::kInvalidArgument;
}

// Stub scorer speaking the wire protocol; `reply` maps a parsed request to
// the reply body.
sbtest::StubServer scorer_stub(std::function<json(const json&)> reply) {
  return sbtest::StubServer("/score", [reply](const httplib::Request& req,
                                              httplib::Response& res) {
    json body;
    try {
      body = json::parse(req.body);
    } catch (const json::parse_error&) {
      res.status = 400;
      return;
    }
    if (!body.is_object() || !body.contains("query") || !body["query"].is_string() ||
        !body.contains("candidates") || !body["candidates"].is_array()) {
      res.status = 400;
      return;
    }
    res.set_content(reply(body).dump(), "application/json");
  });
}

// Deterministic per-pair score so order checks mean something.
json length_scores(const json& body) {
  json scores = json::array();
  for (const auto& c : body["candidates"]) {
    scores.push_back(static_cast<double>(c["text"].get<std::string>().size()) / 7.0);
  }
  return {{"scores", scores}};
}

}  // namespace

TEST_CASE("bm25 response scoring over the candidate micro-corpus") {
  const std::vector<Candidate> candidates{{"a", "it is 3 pm"}, {"b", "cannot help with that"}};
  const auto scores = score_candidates(ScorerHandle::bm25(), "what time is it", candidates);
  REQUIRE(scores.size() == 2);
  CHECK(scores[0].first == "a");
  CHECK(scores[0].second > scores[1].second);
  CHECK(scores[1].second == 0.0);

  // Oracle equivalence with lexical scoring on the same corpus.
  const std::vector<Bm25Index::Document> docs{{"a", "it is 3 pm"}, {"b", "cannot help with that"}};
  const Bm25Index index(docs);
  CHECK(scores[0].second == index.score("what time is it", "a"));

  CHECK(score_candidates(ScorerHandle::bm25(), "anything", {}).empty());
  CHECK(score_candidates(ScorerHandle::tfidf(), "anything", {}).empty());
}

TEST_CASE("tfidf response scoring stays in [0, 1]") {
  const std::vector<Candidate> candidates{{"a", "it is 3 pm"},
                                          {"b", "cannot help with that"},
                                          {"c", "what time is it"}};
  const auto scores = score_candidates(ScorerHandle::tfidf(), "what time is it", candidates);
  REQUIRE(scores.size() == 3);
  for (const auto& [id, s] : scores) {
    CHECK(s >= 0.0);
    CHECK(s <= 1.0);
  }
  CHECK(scores[2].second == doctest::Approx(1.0));
}

TEST_CASE("custom scorer results are validated") {
  const std::vector<Candidate> candidates{{"a", "x"}, {"b", "y"}};
  auto constant = ScorerHandle::custom_fn("constant", [](std::string_view, std::span<const Candidate> c) {
    return std::vector<double>(c.size(), 0.5);
  });
  for (const auto& [id, s] : score_candidates(constant, "q", candidates)) CHECK(s == 0.5);

  auto short_fn = ScorerHandle::custom_fn("short", [](std::string_view, std::span<const Candidate>) {
    return std::vector<double>{1.0};
  });
  CHECK(code_of([&] { score_candidates(short_fn, "q", candidates); }) == ErrorCode::kMalformedReply);

  auto nan_fn = ScorerHandle::custom_fn("nan", [](std::string_view, std::span<const Candidate> c) {
    return std::vector<double>(c.size(), std::nan(""));
  });
  CHECK(code_of([&] { score_candidates(nan_fn, "q", candidates); }) == ErrorCode::kMalformedReply);
}

TEST_CASE("select_best") {
  CHECK(select_best({{"alexa", 0.2}, {"google", 0.9}}).selected_agent == "google");
  CHECK(select_best({{"b", 0.5}, {"a", 0.5}}).selected_agent == "a");
  const auto none = select_best({});
  CHECK_FALSE(none.selected_agent.has_value());
  CHECK(none.ranked.empty());

  const std::vector<Candidate> candidates{{"a", "first"}, {"b", "second"}};
  const auto chosen = select_best({{"a", 0.1}, {"b", 0.7}}, candidates);
  CHECK(chosen.selected_text == "second");
}

TEST_CASE("select_best is permutation invariant and argmax invariant") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int trial = 0; trial < 100; ++trial) {
    ScoredCandidates scores;
    for (int i = 0; i < 6; ++i) {
      // Coarse values so ties happen.
      scores.emplace_back(std::string(1, static_cast<char>('a' + i)),
                          std::round(u(rng)));
    }
    const auto base = select_best(scores);
    auto shuffled = scores;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    CHECK(select_best(shuffled).selected_agent == base.selected_agent);
    CHECK(select_best(shuffled).ranked == base.ranked);
    auto transformed = scores;
    for (auto& [id, s] : transformed) s = std::exp(2.0 * s) + 1.0;
    CHECK(select_best(transformed).selected_agent == base.selected_agent);
  }
}

TEST_CASE("scorer handle parsing") {
  CHECK(ScorerHandle::parse("bm25").kind == ScorerKind::kBm25);
  CHECK(ScorerHandle::parse("tfidf").kind == ScorerKind::kTfidfCosine);
  const auto remote = ScorerHandle::parse("remote:http://127.0.0.1:9000/score", 750);
  CHECK(remote.kind == ScorerKind::kRemote);
  CHECK(remote.remote_endpoint == "http://127.0.0.1:9000/score");
  CHECK(remote.timeout_ms == 750);
  CHECK_THROWS_AS(ScorerHandle::parse("remote:"), Error);
  CHECK_THROWS_AS(ScorerHandle::parse("mars"), Error);
  CHECK(ScorerHandle::bm25().describe() == "bm25");
}

TEST_CASE("endpoint parsing") {
  auto e = parse_endpoint("127.0.0.1:9000", "/score");
  CHECK(e.scheme_host_port == "http://127.0.0.1:9000");
  CHECK(e.path == "/score");
  e = parse_endpoint("http://localhost:1/v1/rank/", "/score");
  CHECK(e.scheme_host_port == "http://localhost:1");
  CHECK(e.path == "/v1/rank");
  CHECK_THROWS_AS(parse_endpoint("https://x:1", "/score"), Error);
  CHECK_THROWS_AS(parse_endpoint("http://", "/score"), Error);
}

TEST_CASE("remote scorer passes scores through unchanged") {
  auto stub = scorer_stub([](const json&) { return json{{"scores", {0.1, 0.9}}}; });
  const std::vector<Candidate> candidates{{"a", "x"}, {"b", "y"}};
  const auto scores = remote_score(stub.base_url(), "q", candidates, 2000);
  CHECK(scores == std::vector<double>{0.1, 0.9});

  const auto scored = score_candidates(ScorerHandle::remote(stub.base_url()), "q", candidates);
  CHECK(scored[1] == std::pair<std::string, double>{"b", 0.9});
}

TEST_CASE("remote scorer echoing a constant") {
  auto stub = scorer_stub([](const json& body) {
    return json{{"scores", std::vector<double>(body["candidates"].size(), 0.5)}};
  });
  const std::vector<Candidate> candidates{{"a", "x"}, {"b", "y"}, {"c", "z"}};
  for (const auto& [id, s] : score_candidates(ScorerHandle::remote(stub.base_url()), "q", candidates)) {
    CHECK(s == 0.5);
  }
  CHECK(select_best(score_candidates(ScorerHandle::remote(stub.base_url()), "q", candidates))
            .selected_agent == "a");
}

TEST_CASE("remote scorer round trips score arrays exactly") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  std::vector<double> sent;
  for (int i = 0; i < 64; ++i) sent.push_back(i % 3 == 0 ? u(rng) * 1e-9 : u(rng));
  auto stub = scorer_stub([&](const json&) { return json{{"scores", sent}}; });
  std::vector<Candidate> candidates;
  for (int i = 0; i < 64; ++i) candidates.push_back({"a" + std::to_string(i), "t"});
  const auto got = remote_score(stub.base_url(), "q", candidates, 2000);
  REQUIRE(got.size() == sent.size());
  for (std::size_t i = 0; i < sent.size(); ++i) {
    CHECK(std::abs(got[i] - sent[i]) <= 1e-12 * std::max(1.0, std::abs(sent[i])));
    CHECK(got[i] == sent[i]);
  }
}

TEST_CASE("remote scorer contract violations") {
  const std::vector<Candidate> two{{"a", "x"}, {"b", "y"}};

  SUBCASE("length mismatch") {
    auto stub = scorer_stub([](const json&) { return json{{"scores", {0.3}}}; });
    CHECK(code_of([&] { remote_score(stub.base_url(), "q", two, 2000); }) ==
          ErrorCode::kMalformedReply);
  }
  SUBCASE("non-finite score") {
    sbtest::StubServer stub("/score", [](const httplib::Request&, httplib::Response& res) {
      res.set_content(R"({"scores": [1e400, 0.2]})", "application/json");
    });
    CHECK(code_of([&] { remote_score(stub.base_url(), "q", two, 2000); }) ==
          ErrorCode::kMalformedReply);
  }
  SUBCASE("non-numeric score") {
    auto stub = scorer_stub([](const json&) { return json{{"scores", {"high", 0.2}}}; });
    CHECK(code_of([&] { remote_score(stub.base_url(), "q", two, 2000); }) ==
          ErrorCode::kMalformedReply);
  }
  SUBCASE("missing scores") {
    auto stub = scorer_stub([](const json&) { return json{{"score", 1}}; });
    CHECK(code_of([&] { remote_score(stub.base_url(), "q", two, 2000); }) ==
          ErrorCode::kMalformedReply);
  }
  SUBCASE("http error") {
    sbtest::StubServer stub("/score", [](const httplib::Request&, httplib::Response& res) {
      res.status = 500;
    });
    CHECK(code_of([&] { remote_score(stub.base_url(), "q", two, 2000); }) ==
          ErrorCode::kUnavailable);
  }
}

TEST_CASE("slow scorer times out within the budget") {
  sbtest::StubServer stub("/score", [](const httplib::Request&, httplib::Response& res) {
    std::this_thread::sleep_for(std::chrono::milliseconds(600));
    res.set_content(R"({"scores": [1]})", "application/json");
  });
  const std::vector<Candidate> one{{"a", "x"}};
  const auto started = std::chrono::steady_clock::now();
  CHECK(code_of([&] { remote_score(stub.base_url(), "q", one, 150); }) == ErrorCode::kTimeout);
  const auto elapsed = std::chrono::steady_clock::now() - started;
  CHECK(elapsed < std::chrono::milliseconds(150 + 250));
}

TEST_CASE("unreachable scorer fails within the budget") {
  const std::string endpoint = "http://127.0.0.1:" + std::to_string(sbtest::unused_port());
  const std::vector<Candidate> one{{"a", "x"}};
  const auto started = std::chrono::steady_clock::now();
  const ErrorCode code = code_of([&] { remote_score(endpoint, "q", one, 300); });
  CHECK((code == ErrorCode::kTimeout || code == ErrorCode::kUnavailable));
  CHECK(std::chrono::steady_clock::now() - started < std::chrono::milliseconds(300 + 250));
}

TEST_CASE("remote failure policy") {
  const std::string endpoint = "http://127.0.0.1:" + std::to_string(sbtest::unused_port());
  const std::vector<Candidate> candidates{{"a", "it is 3 pm"}, {"b", "cannot help"}};
  ScorerHandle handle = ScorerHandle::remote(endpoint, 300);
  CHECK_THROWS_AS(score_candidates(handle, "what time is it", candidates), Error);
  handle.on_failure = RemoteFailurePolicy::kFallbackBm25;
  CHECK(score_candidates(handle, "what time is it", candidates) ==
        score_candidates(ScorerHandle::bm25(), "what time is it", candidates));
}

TEST_CASE("stub scorer passes the wire conformance suite") {
  auto stub = scorer_stub(length_scores);
  const auto failures = sbtest::check_scorer_conformance(stub.base_url());
  for (const auto& f : failures) INFO(f);
  CHECK(failures.empty());
}

TEST_CASE("conformance suite catches a scorer that ignores order") {
  auto stub = scorer_stub([](const json& body) {
    json scores = json::array();
    for (std::size_t i = 0; i < body["candidates"].size(); ++i) {
      scores.push_back(static_cast<double>(i));
    }
    return json{{"scores", scores}};
  });
  CHECK_FALSE(sbtest::check_scorer_conformance(stub.base_url()).empty());
}
