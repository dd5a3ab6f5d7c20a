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
#include <cmath>
#include <cstring>
#include <sstream>

#include "switchboard/error.hpp"
#include "switchboard/qa_router.hpp"
#include "synthetic.hpp"
#include "test_support.hpp"

using namespace switchboard;

namespace {

std::string strip_spaces(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (!std::isspace(static_cast<unsigned char>(c))) out += c;
  }
  return out;
}

double score_of(const std::vector<RankedCandidate>& ranked, const std::string& id) {
  for (const auto& c : ranked) {
    if (c.agent_id == id) return c.score;
  }
  throw std::runtime_error("missing " + id);
}

std::vector<RouterExample> synthetic_examples(std::size_t per_agent, std::uint64_t seed) {
  return router_examples(sbtest::synthetic_dataset(per_agent, seed, Split::kTrain),
                         Split::kTrain);
}

std::vector<std::string> synthetic_ids() {
  std::vector<std::string> ids;
  for (const auto& a : sbtest::synthetic_agents()) ids.push_back(a.id);
  return ids;
}

}  // namespace

TEST_CASE("split_description") {
  using V = std::vector<std::string>;
  CHECK(split_description("Get weather forecasts. Set alarms.") ==
        V{"Get weather forecasts.", "Set alarms."});
  CHECK(split_description("").empty());
  CHECK(split_description("Covers stocks, e.g. NYSE tickers. Also news.") ==
        V{"Covers stocks, e.g.", "NYSE tickers.", "Also news."});
  CHECK(split_description("Version 2.0 is out!  Really?Yes") ==
        V{"Version 2.0 is out!", "Really?Yes"});
  CHECK(split_description("   \n ").empty());
  CHECK(split_description("No terminal punctuation") == V{"No terminal punctuation"});
}

TEST_CASE("sentences reconstruct the description up to whitespace") {
  const char* descriptions[] = {
      "Get weather forecasts. Set alarms.", "  One!   Two? Three.  ",
      "Covers stocks, e.g. NYSE tickers. Also news.", "trailing words"};
  for (const char* d : descriptions) {
    std::string joined;
    for (const auto& s : split_description(d)) {
      CHECK_FALSE(s.empty());
      joined += s;
    }
    CHECK(strip_spaces(joined) == strip_spaces(d));
  }
}

TEST_CASE("description score is the max over sentence scores") {
  const std::vector<SkillSentences> skills{
      {"alarm", {"Get weather forecasts.", "Set alarms."}},
      {"music", {"Play music.", "Set the volume."}}};
  const Bm25Index index = build_sentence_index(skills);
  const auto similarity = bm25_similarity(index);
  for (const char* q : {"will it rain tomorrow", "set weather alarms", "play the volume"}) {
    const auto ranked = route_by_description(q, skills, similarity);
    for (const auto& agent : skills) {
      double best = 0.0;
      for (const auto& s : agent.sentences) best = std::max(best, index.score_text(q, s));
      CHECK(score_of(ranked, agent.agent_id) == best);
    }
  }
  CHECK(score_of(route_by_description("will it rain tomorrow", skills, similarity),
                 "alarm") == 0.0);
}

TEST_CASE("no shared vocabulary means all zero and the smallest id wins") {
  const std::vector<SkillSentences> skills{
      {"zeta", {"Plays music."}}, {"alpha", {"Books flights."}}, {"mid", {"Orders food."}}};
  const Bm25Index index = build_sentence_index(skills);
  const auto ranked = route_by_description("quantum chromodynamics", skills,
                                           bm25_similarity(index));
  REQUIRE(ranked.size() == 3);
  for (const auto& c : ranked) CHECK(c.score == 0.0);
  CHECK(ranked.front().agent_id == "alpha");
}

TEST_CASE("single sentence equals the raw scorer value") {
  const std::vector<SkillSentences> skills{{"solo", {"Finds cheap flights to Paris."}}};
  const Bm25Index index = build_sentence_index(skills);
  const auto ranked = route_by_description("flights paris", skills, bm25_similarity(index));
  CHECK(ranked.at(0).score == index.score_text("flights paris", skills[0].sentences[0]));
  CHECK(ranked.at(0).score > 0.0);
}

TEST_CASE("appending a sentence never lowers an agent's score") {
  std::vector<SkillSentences> skills{{"a", {"Get weather forecasts."}},
                                     {"b", {"Plays music loud."}}};
  std::vector<SkillSentences> extended = skills;
  extended[0].sentences.push_back("Also reads the weather news today.");
  // A fixed similarity function so only the max changes.
  const Bm25Index index = build_sentence_index(extended);
  const auto similarity = bm25_similarity(index);
  for (const char* q : {"weather today", "news", "forecasts", "music"}) {
    CHECK(score_of(route_by_description(q, extended, similarity), "a") >=
          score_of(route_by_description(q, skills, similarity), "a"));
  }
}

TEST_CASE("agents without sentences score zero; whole mode keeps one sentence") {
  const std::vector<AgentProfile> agents{
      make_profile("empty", "Empty", ""),
      make_profile("full", "Full", "Gives weather forecasts. Sets alarms.")};
  const auto sentences = skills_from_profiles(agents);
  CHECK(sentences[0].sentences.empty());
  CHECK(sentences[1].sentences.size() == 2);
  const auto whole = skills_from_profiles(agents, DescriptionMode::kWhole);
  CHECK(whole[1].sentences == std::vector<std::string>{"Gives weather forecasts. Sets alarms."});
  CHECK(whole[0].sentences.empty());

  const Bm25Index index = build_sentence_index(sentences);
  const auto ranked = route_by_description("weather", sentences, bm25_similarity(index));
  CHECK(score_of(ranked, "empty") == 0.0);
  CHECK(ranked.front().agent_id == "full");
}

TEST_CASE("similarity returning the wrong count is rejected") {
  const std::vector<SkillSentences> skills{{"a", {"One.", "Two."}}};
  SimilarityFn broken = [](std::string_view, std::span<const std::string>) {
    return std::vector<double>{1.0};
  };
  CHECK_THROWS_AS(route_by_description("q", skills, broken), Error);
}

TEST_CASE("hashed features are normalized and deterministic") {
  const auto x = hash_features("open my banking balance", kDefaultFeatureDim);
  const auto y = hash_features("open my banking balance", kDefaultFeatureDim);
  CHECK(x.index == y.index);
  CHECK(x.value == y.value);
  double norm = 0;
  for (double v : x.value) norm += v * v;
  CHECK(norm == doctest::Approx(1.0).epsilon(1e-12));
  for (auto i : x.index) CHECK(i < kDefaultFeatureDim);
  CHECK(std::is_sorted(x.index.begin(), x.index.end()));
  CHECK(hash_features("", kDefaultFeatureDim).index.empty());
  CHECK(hash_features("...", 64).index.empty());
}

TEST_CASE("separable corpus routes perfectly") {
  const auto train = synthetic_examples(30, 1);
  const auto held_out = sbtest::synthetic_dataset(20, 99, Split::kTest);
  const auto ids = synthetic_ids();
  const ExampleRouterModel model = train_example_router(train, ids);
  std::size_t correct = 0;
  for (const auto& e : held_out.examples) {
    const auto ranked = route_by_examples(model, e.query.text);
    if (e.gold_agents.count(ranked.front().agent_id)) ++correct;
  }
  CHECK(correct == held_out.examples.size());
  CHECK(route_by_examples(model, "open my banking balance").front().agent_id == "bank-agent");
}

TEST_CASE("multi-label pair ranks both gold agents above the rest") {
  const Dataset d = load_dataset(sbtest::data_path("sample.jsonl"));
  const auto train = router_examples(d, Split::kTrain);
  const auto ids = d.agent_ids();
  const ExampleRouterModel model = train_example_router(train, ids);
  const auto ranked =
      route_by_examples(model, "locate me some good places in Kentucky that serve sushi");
  const double alexa = score_of(ranked, "alexa");
  const double google = score_of(ranked, "google");
  for (const auto& c : ranked) {
    if (c.agent_id == "alexa" || c.agent_id == "google") continue;
    CHECK(alexa > c.score);
    CHECK(google > c.score);
  }
}

TEST_CASE("single agent is always selected") {
  const std::vector<RouterExample> train{{"hello there", {"only"}}, {"weather today", {}}};
  const std::vector<std::string> ids{"only"};
  const auto model = train_example_router(train, ids);
  for (const char* q : {"hello", "anything", ""}) {
    const auto ranked = route_by_examples(model, q);
    REQUIRE(ranked.size() == 1);
    CHECK(ranked[0].agent_id == "only");
  }
}

TEST_CASE("zero weights give 0.5 everywhere and the smallest id") {
  const ExampleRouterModel model({"zeta", "beta", "alpha"}, 1024, {});
  const auto ranked = route_by_examples(model, "anything at all");
  for (const auto& c : ranked) CHECK(c.score == 0.5);
  CHECK(ranked.front().agent_id == "alpha");
  CHECK(route_by_examples(model, "").size() == 3);
}

TEST_CASE("empty query scores with the bias only") {
  ExampleRouterModel model({"a", "b"}, 1024, {});
  model.bias(1) = 2.0;
  const auto ranked = route_by_examples(model, "");
  CHECK(ranked.front().agent_id == "b");
  CHECK(ranked.front().score == doctest::Approx(1.0 / (1.0 + std::exp(-2.0))));
}

TEST_CASE("training is deterministic and the model round trips bit-exactly") {
  const auto train = synthetic_examples(10, 5);
  const auto ids = synthetic_ids();
  RouterHyperparams hyper;
  hyper.seed = 17;
  hyper.epochs = 5;
  const auto first = train_example_router(train, ids, hyper, 4096);
  const auto second = train_example_router(train, ids, hyper, 4096);
  CHECK(first == second);

  std::stringstream buffer;
  first.save(buffer);
  const auto loaded = ExampleRouterModel::load(buffer);
  CHECK(loaded == first);
  for (std::size_t a = 0; a < ids.size(); ++a) {
    CHECK(std::memcmp(loaded.weights(a).data(), first.weights(a).data(),
                      first.weights(a).size() * sizeof(double)) == 0);
  }

  sbtest::TempDir dir;
  first.save_file(dir.file("router.txt"));
  CHECK(ExampleRouterModel::load_file(dir.file("router.txt")) == first);

  hyper.seed = 18;
  CHECK_FALSE(train_example_router(train, ids, hyper, 4096) == first);
}

TEST_CASE("ranking does not depend on agent enumeration order") {
  const auto train = synthetic_examples(10, 3);
  auto ids = synthetic_ids();
  const auto forward = train_example_router(train, ids, {}, 4096);
  std::reverse(ids.begin(), ids.end());
  const auto backward = train_example_router(train, ids, {}, 4096);
  for (const char* q : {"play jazz radio", "rain forecast", "bank loan", "nothing known"}) {
    CHECK(route_by_examples(forward, q) == route_by_examples(backward, q));
  }
}

TEST_CASE("trainer and loader errors") {
  const std::vector<std::string> ids{"a"};
  CHECK_THROWS_AS(train_example_router({}, ids), Error);
  const std::vector<RouterExample> stray{{"hello", {"b"}}};
  try {
    train_example_router(stray, ids);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kNotFound);
  }
  std::istringstream garbage("not a model\n");
  CHECK_THROWS_AS(ExampleRouterModel::load(garbage), Error);
  CHECK_THROWS_AS(ExampleRouterModel::load_file("/nonexistent/router.txt"), Error);
}

TEST_CASE("router_examples keep all-negative rows") {
  const Dataset d = load_dataset(sbtest::data_path("sample.jsonl"));
  const auto test = router_examples(d, Split::kTest);
  CHECK(test.size() == 4);
  CHECK(std::any_of(test.begin(), test.end(), [](const RouterExample& e) { return e.gold.empty(); }));
}
