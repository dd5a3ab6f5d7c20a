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
#include <iterator>
#include <random>
#include <sstream>

#include "switchboard/error.hpp"
#include "switchboard/eval.hpp"
#include "switchboard/gateway.hpp"
#include "switchboard/mock_fleet.hpp"
#include "synthetic.hpp"
#include "test_support.hpp"

using namespace switchboard;

namespace {

Dataset sample() {
  return load_dataset(sbtest::data_path("sample.jsonl"), 3,
                      load_agent_profiles(sbtest::data_path("sample_agents.jsonl")));
}

const LabeledExample* find_example(const Dataset& d, std::string_view query) {
  for (const auto& e : d.examples) {
    if (normalize_query_text(e.query.text) == normalize_query_text(query)) return &e;
  }
  return nullptr;
}

Strategy oracle_strategy(const Dataset& d) {
  Strategy s;
  s.scorer = ScorerHandle::custom_fn("oracle", [&d](std::string_view q,
                                                    std::span<const Candidate> c) {
    const LabeledExample* e = find_example(d, q);
    std::vector<double> scores;
    for (const auto& x : c) scores.push_back(e && e->gold_agents.count(x.agent_id) ? 1.0 : 0.0);
    return scores;
  });
  return s;
}

Strategy constant_strategy() {
  Strategy s;
  s.scorer = ScorerHandle::custom_fn("constant", [](std::string_view, std::span<const Candidate> c) {
    return std::vector<double>(c.size(), 0.5);
  });
  return s;
}

double share_sum(const EvalReport& r) {
  double sum = 0;
  for (const auto& [agent, share] : r.per_agent_selection_share) sum += share;
  return sum;
}

}  // namespace

TEST_CASE("precision at 1") {
  const GoldMap gold{{"q1", {"a"}}, {"q2", {"b", "c"}}};
  const std::vector<Selection> half{{"q1", "a"}, {"q2", "a"}};
  CHECK(precision_at_1(half, gold) == 0.5);
  const std::vector<Selection> none{{"q1", std::nullopt}, {"q2", std::nullopt}};
  CHECK(precision_at_1(none, gold) == 0.0);
  const std::vector<Selection> oracle{{"q1", "a"}, {"q2", "c"}};
  CHECK(precision_at_1(oracle, gold) == 1.0);
  const std::vector<Selection> stray{{"q9", "a"}};
  CHECK_THROWS_AS(precision_at_1(stray, gold), Error);
  CHECK(precision_at_1({}, gold) == 0.0);
}

TEST_CASE("precision at 1 ignores example order") {
  std::mt19937 rng(3);
  GoldMap gold;
  std::vector<Selection> selections;
  for (int i = 0; i < 50; ++i) {
    const std::string id = "q" + std::to_string(i);
    gold[id] = {std::string(1, static_cast<char>('a' + rng() % 3))};
    selections.push_back({id, std::string(1, static_cast<char>('a' + rng() % 3))});
  }
  const double base = precision_at_1(selections, gold);
  for (int i = 0; i < 10; ++i) {
    std::shuffle(selections.begin(), selections.end(), rng);
    CHECK(precision_at_1(selections, gold) == base);
  }
}

TEST_CASE("individual agent baseline") {
  Dataset d = sbtest::synthetic_dataset(4, 1, Split::kTest);
  for (auto& e : d.examples) e.gold_agents = {"bank-agent"};
  const auto examples = select_examples(d, Split::kTest, true);
  const auto ids = d.agent_ids();
  CHECK(individual_agent_baseline(examples, "bank-agent", ids) == 1.0);
  CHECK(individual_agent_baseline(examples, "music-agent", ids) == 0.0);
  CHECK_THROWS_AS(individual_agent_baseline(examples, "nobody", ids), Error);
}

TEST_CASE("per-domain breakdown") {
  const GoldMap gold{{"a1", {"x"}}, {"a2", {"x"}}, {"b1", {"y"}}};
  const std::map<std::string, std::string> domain_of{{"a1", "A"}, {"a2", "A"}, {"b1", "B"}};
  const std::vector<Selection> selections{{"a1", "x"}, {"a2", "x"}, {"b1", "x"}};
  const auto breakdown = per_domain_breakdown(selections, gold, domain_of);
  CHECK(breakdown == std::map<std::string, double>{{"A", 1.0}, {"B", 0.0}});

  const std::map<std::string, std::string> one_domain{{"a1", "A"}, {"a2", "A"}, {"b1", "A"}};
  const auto single = per_domain_breakdown(selections, gold, one_domain);
  REQUIRE(single.size() == 1);
  CHECK(single.at("A") == precision_at_1(selections, gold));
}

TEST_CASE("oracle scorer reaches 1.0 everywhere") {
  const Dataset d = sample();
  const EvalReport r = run_eval(oracle_strategy(d), d).report;
  CHECK(r.n_evaluated == 3);
  CHECK(r.overall_precision_at_1 == 1.0);
  for (const auto& [domain, acc] : r.per_domain_accuracy) CHECK(acc == 1.0);
  CHECK(r.strategy == "qr/oracle");
}

TEST_CASE("constant scorer equals the tie-break winner's baseline") {
  const Dataset d = sample();
  const EvalRun run = run_eval(constant_strategy(), d);
  for (const auto& s : run.selections) CHECK(s.agent_id == "adasa");
  CHECK(run.report.overall_precision_at_1 == run.report.individual_agent_baselines.at("adasa"));
  CHECK(run.report.per_agent_selection_share.at("adasa") == 1.0);

  EvalOptions subset;
  subset.agent_subset = {"google", "houndify"};
  const EvalRun narrowed = run_eval(constant_strategy(), d, subset);
  for (const auto& s : narrowed.selections) CHECK(s.agent_id == "google");
  CHECK(narrowed.report.overall_precision_at_1 ==
        narrowed.report.individual_agent_baselines.at("google"));
}

TEST_CASE("report arithmetic is consistent") {
  for (const Dataset& d : {sbtest::synthetic_dataset(10, 4, Split::kTest), sample()}) {
    for (auto scorer : {ScorerHandle::bm25(), ScorerHandle::tfidf()}) {
      for (auto kind : {StrategyKind::kQr, StrategyKind::kQaDescriptions}) {
        Strategy s;
        s.kind = kind;
        s.scorer = scorer;
        const EvalReport r = run_eval(s, d).report;
        CHECK(share_sum(r) == doctest::Approx(1.0).epsilon(1e-9));
        double weighted = 0;
        for (const auto& [domain, acc] : r.per_domain_accuracy) {
          weighted += static_cast<double>(r.per_domain_count.at(domain)) /
                      static_cast<double>(r.n_evaluated) * acc;
        }
        CHECK(weighted == doctest::Approx(r.overall_precision_at_1).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("parallel and serial evaluation agree exactly") {
  const Dataset d = sbtest::synthetic_dataset(25, 8, Split::kTest);
  Strategy s;
  EvalOptions serial;
  serial.threads = 1;
  EvalOptions parallel;
  parallel.threads = 4;
  const EvalRun a = run_eval(s, d, serial);
  const EvalRun b = run_eval(s, d, parallel);
  CHECK(a.report == b.report);
  REQUIRE(a.selections.size() == b.selections.size());
  for (std::size_t i = 0; i < a.selections.size(); ++i) {
    CHECK(a.selections[i].agent_id == b.selections[i].agent_id);
  }
}

TEST_CASE("agent subsets intersect gold sets") {
  const Dataset d = sample();
  EvalOptions options;
  options.agent_subset = {"alexa", "houndify"};
  const EvalReport r = run_eval(Strategy{}, d, options).report;
  CHECK(r.n_agents == 2);
  CHECK(r.agents == std::vector<std::string>{"alexa", "houndify"});
  // q1 (gold adasa) drops out; q2 (google, houndify) and q6 (alexa) stay.
  CHECK(r.n_evaluated == 2);

  options.agent_subset = {"nobody"};
  CHECK_THROWS_AS(run_eval(Strategy{}, d, options), Error);
}

TEST_CASE("evaluating all examples counts gold-less ones as misses") {
  const Dataset d = sample();
  EvalOptions options;
  options.require_gold = false;
  const EvalReport all = run_eval(oracle_strategy(d), d, options).report;
  CHECK(all.n_evaluated == 4);
  CHECK(all.overall_precision_at_1 == 0.75);

  options.split = Split::kTrain;
  CHECK(run_eval(oracle_strategy(d), d, options).report.n_evaluated == 4);
}

TEST_CASE("no selection shows up under its own key") {
  const Dataset d = sample();
  Strategy s;
  s.filter_fallbacks = true;
  EvalOptions options;
  options.agent_subset = {"houndify"};
  options.require_gold = false;
  // houndify falls back on q1, so nothing is left to select there.
  const EvalReport r = run_eval(s, d, options).report;
  CHECK(r.per_agent_selection_share.count(std::string(kNoSelectionKey)) == 1);
  CHECK(share_sum(r) == doctest::Approx(1.0));
}

TEST_CASE("wire evaluation matches offline evaluation") {
  const Dataset d = sample();
  auto transport = std::make_shared<ReplayTransport>(build_fleet(d, LatencySpec::fixed(0)));
  for (auto kind : {StrategyKind::kQr, StrategyKind::kQaDescriptions}) {
    for (auto scorer : {ScorerHandle::bm25(), ScorerHandle::tfidf()}) {
      Strategy s;
      s.kind = kind;
      s.scorer = scorer;
      const EvalRun offline = run_eval(s, d);
      const EvalRun wire = run_eval_wire(s, d, transport, AskOptions{});
      CHECK(offline.report == wire.report);
    }
  }
}

TEST_CASE("qa-examples evaluation uses the router") {
  const Dataset train = sbtest::synthetic_dataset(30, 1, Split::kTrain, "tr");
  Dataset d = sbtest::synthetic_dataset(10, 2, Split::kTest, "te");
  for (const auto& e : train.examples) d.examples.push_back(e);
  Strategy s;
  s.kind = StrategyKind::kQaExamples;
  CHECK_THROWS_AS(run_eval(s, d), Error);
  const auto examples = router_examples(d, Split::kTrain);
  const auto ids = d.agent_ids();
  s.router_model = std::make_shared<const ExampleRouterModel>(train_example_router(examples, ids));
  const EvalReport r = run_eval(s, d).report;
  CHECK(r.n_evaluated == 30);
  CHECK(r.overall_precision_at_1 == 1.0);
  CHECK(r.strategy == "qa-examples");
}

TEST_CASE("scorer failures abort the run") {
  const Dataset d = sample();
  Strategy s;
  s.scorer = ScorerHandle::custom_fn("broken", [](std::string_view, std::span<const Candidate>) {
    return std::vector<double>{};
  });
  CHECK_THROWS_AS(run_eval(s, d), Error);
  s.scorer = ScorerHandle::remote("http://127.0.0.1:" + std::to_string(sbtest::unused_port()), 200);
  CHECK_THROWS_AS(run_eval(s, d), Error);
}

TEST_CASE("records round trip") {
  const Dataset d = sample();
  for (const Strategy& s : {Strategy{}, oracle_strategy(d), constant_strategy()}) {
    EvalOptions options;
    options.require_gold = false;
    const EvalReport r = run_eval(s, d, options).report;
    std::istringstream in(format_report_records(r));
    CHECK(parse_report_records(in) == r);
  }
  std::istringstream empty_in(format_report_records(EvalReport{}));
  CHECK(parse_report_records(empty_in) == EvalReport{});
  std::istringstream bad("{\"metric\": 3}\n");
  CHECK_THROWS_AS(parse_report_records(bad), Error);
}

TEST_CASE("table layout") {
  const Dataset d = sample();
  const EvalReport r = run_eval(Strategy{}, d).report;
  const std::string table = format_report_table(r);
  const std::string header = table.substr(0, table.find('\n'));
  for (const char* agent : {"adasa", "alexa", "google", "houndify"}) {
    CHECK(header.find(agent) != std::string::npos);
  }
  CHECK(header.find("Accuracy (n=4)") != std::string::npos);
  CHECK(table.find("qr/bm25") != std::string::npos);

  EvalReport empty = r;
  empty.n_evaluated = 0;
  empty.overall_precision_at_1 = 0;
  const std::string blank = format_report_table(empty);
  CHECK(blank.find("n_evaluated=0") != std::string::npos);
  std::istringstream rows(blank);
  std::string line;
  std::getline(rows, line);
  std::getline(rows, line);
  std::istringstream cells(line);
  std::vector<std::string> tokens(std::istream_iterator<std::string>(cells), {});
  CHECK(tokens == std::vector<std::string>{"qr/bm25", "-", "-", "-", "-", "-"});
}

TEST_CASE("emit_report writes files and refuses bad paths") {
  const Dataset d = sample();
  const EvalReport r = run_eval(Strategy{}, d).report;
  sbtest::TempDir dir;
  emit_report(r, ReportFormat::kRecords, dir.file("report.jsonl"));
  std::istringstream in(sbtest::read_file(dir.file("report.jsonl")));
  CHECK(parse_report_records(in) == r);
  emit_report(r, ReportFormat::kTable, dir.file("report.txt"));
  CHECK(sbtest::read_file(dir.file("report.txt")) == format_report_table(r));
  try {
    emit_report(r, ReportFormat::kTable, "/nonexistent/dir/report.txt");
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kIo);
  }
}
