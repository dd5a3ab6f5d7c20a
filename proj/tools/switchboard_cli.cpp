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

// switchboard: command line front end over libswitchboard.
//
// Exit codes: 0 success, 1 validation or runtime failure, 2 usage error.

#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "switchboard/switchboard.h"

namespace {

using json = nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Failure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Keys of the config file consumed only by the CLI; everything else is passed
// to the gateway as is.
const char* const kCliOnlyKeys[] = {"strategy", "seed", "out", "format", "subset"};

struct Options {
  std::string config_path;
  std::optional<std::string> dataset;
  std::optional<std::string> agents;
  std::optional<std::string> strategy;
  std::optional<std::string> scorer;
  std::optional<std::string> router_model;
  std::optional<std::string> out;
  std::optional<std::string> format;
  std::optional<std::string> subset;
  std::optional<std::string> host;
  std::optional<std::string> fleet_mode;
  std::optional<int> timeout_ms;
  std::optional<int> port;
  std::optional<int> vote_threshold;
  std::optional<std::uint64_t> seed;
  bool filter_fallbacks = false;

  // train-router
  std::optional<int> epochs;
  std::optional<double> learning_rate;
  std::optional<double> l2;
  std::optional<int> batch_size;

  // eval
  std::string split = "test";
  bool all_examples = false;
  bool whole_description = false;
  bool wire = false;
  unsigned threads = 0;

  // fleet
  std::vector<std::int64_t> latency_ms;
  std::string profiles_out;
  std::string fallback_text;

  // score-debug
  std::string corpus = "responses";
  std::string query_id;
  std::string query;

  json config = json::object();
};

void check(sb_status status, const std::string& what) {
  if (status != SB_OK) {
    throw Failure(what + ": " + sb_last_error());
  }
}

template <typename T>
void fill(std::optional<T>& slot, const json& config, const char* key) {
  if (slot || !config.contains(key)) return;
  try {
    slot = config.at(key).get<T>();
  } catch (const json::exception&) {
    throw UsageError(std::string("config: bad value for \"") + key + "\"");
  }
}

void load_config(Options& o, const CLI::App& sub) {
  std::string path = o.config_path;
  if (path.empty()) {
    if (const char* env = std::getenv("OFA_CONFIG"); env && *env) path = env;
  }
  if (path.empty()) return;
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config \"" + path + "\"");
  try {
    o.config = json::parse(in);
  } catch (const json::parse_error& e) {
    throw UsageError("config \"" + path + "\": " + e.what());
  }
  if (!o.config.is_object()) throw UsageError("config must be a JSON object");

  const json& c = o.config;
  fill(o.dataset, c, "dataset");
  fill(o.agents, c, "agents");
  fill(o.strategy, c, "strategy");
  fill(o.scorer, c, "scorer");
  fill(o.router_model, c, "router_model");
  fill(o.out, c, "out");
  fill(o.format, c, "format");
  fill(o.subset, c, "subset");
  fill(o.host, c, "host");
  fill(o.fleet_mode, c, "fleet_mode");
  fill(o.timeout_ms, c, "timeout_ms");
  fill(o.port, c, "port");
  fill(o.vote_threshold, c, "vote_threshold");
  fill(o.seed, c, "seed");
  if (sub.count("--filter-fallbacks") == 0 && c.contains("filter_fallbacks")) {
    o.filter_fallbacks = c["filter_fallbacks"].is_boolean() && c["filter_fallbacks"].get<bool>();
  }
}

const std::string& need(const std::optional<std::string>& value, const char* flag) {
  if (!value || value->empty()) throw UsageError(std::string(flag) + " is required");
  return *value;
}

struct DatasetDeleter {
  void operator()(sb_dataset* d) const { sb_dataset_free(d); }
};
using DatasetPtr = std::unique_ptr<sb_dataset, DatasetDeleter>;

struct StringDeleter {
  void operator()(char* s) const { sb_string_free(s); }
};
using StringPtr = std::unique_ptr<char, StringDeleter>;

DatasetPtr open_dataset(const Options& o) {
  sb_dataset* raw = nullptr;
  const std::string agents = o.agents.value_or("");
  check(sb_dataset_load(need(o.dataset, "--dataset").c_str(),
                        agents.empty() ? nullptr : agents.c_str(),
                        o.vote_threshold.value_or(3), &raw),
        "dataset");
  return DatasetPtr(raw);
}

int run_validate(const Options& o) {
  DatasetPtr dataset = open_dataset(o);
  char* raw = nullptr;
  check(sb_dataset_stats_json(dataset.get(), &raw), "stats");
  StringPtr text(raw);
  const json stats = json::parse(text.get());
  std::cout << "examples=" << stats["total"] << " agents=" << stats["n_agents"] << "\n"
            << "train=" << stats["train"]["total"] << " test=" << stats["test"]["total"]
            << "\n"
            << "with_gold=" << stats["with_gold"]
            << " without_gold=" << stats["without_gold"] << "\n"
            << "train_with_gold=" << stats["train"]["with_gold"]
            << " test_with_gold=" << stats["test"]["with_gold"] << "\n";
  for (const char* split : {"train", "test"}) {
    for (const auto& [domain, count] : stats[split]["per_domain"].items()) {
      std::cout << split << "." << domain << "=" << count << "\n";
    }
  }
  return kExitOk;
}

int run_train_router(const Options& o) {
  const std::string& out = need(o.out, "--out");
  DatasetPtr dataset = open_dataset(o);
  sb_router_params params;
  sb_router_params_init(&params);
  if (o.seed) params.seed = *o.seed;
  if (o.epochs) params.epochs = *o.epochs;
  if (o.learning_rate) params.learning_rate = *o.learning_rate;
  if (o.l2) params.l2 = *o.l2;
  if (o.batch_size) params.batch_size = *o.batch_size;
  sb_router* router = nullptr;
  check(sb_router_train(dataset.get(), &params, &router), "train-router");
  const sb_status saved = sb_router_save(router, out.c_str());
  sb_router_free(router);
  check(saved, "train-router");
  std::cerr << "wrote " << out << "\n";
  return kExitOk;
}

sb_report_format parse_format(const std::optional<std::string>& name) {
  if (!name || *name == "table") return SB_REPORT_TABLE;
  if (*name == "records" || *name == "jsonl") return SB_REPORT_RECORDS;
  throw UsageError("--format must be table or records");
}

int run_eval(const Options& o) {
  const sb_report_format format = parse_format(o.format);
  const std::string strategy = o.strategy.value_or("qr");
  if (strategy != "qr" && strategy != "qa-examples" && strategy != "qa-descriptions") {
    throw UsageError("--strategy must be qa-examples, qa-descriptions or qr");
  }
  if (strategy == "qa-examples" && !o.router_model) {
    throw UsageError("--router-model is required for qa-examples");
  }
  DatasetPtr dataset = open_dataset(o);

  sb_router* router = nullptr;
  if (o.router_model) check(sb_router_load(o.router_model->c_str(), &router), "router");
  std::unique_ptr<sb_router, void (*)(sb_router*)> router_guard(router, sb_router_free);

  const std::string scorer = o.scorer.value_or("bm25");
  sb_eval_params params;
  sb_eval_params_init(&params);
  params.strategy = strategy.c_str();
  params.scorer = scorer.c_str();
  params.split = o.split.c_str();
  params.agent_subset = o.subset ? o.subset->c_str() : nullptr;
  params.router = router;
  if (o.timeout_ms) params.timeout_ms = *o.timeout_ms;
  params.filter_fallbacks = o.filter_fallbacks;
  params.all_examples = o.all_examples;
  params.whole_description = o.whole_description;
  params.wire = o.wire;
  params.threads = o.threads;

  sb_report* report = nullptr;
  check(sb_eval_run(dataset.get(), &params, &report), "eval");
  const sb_status written = sb_report_write(report, format, o.out.value_or("-").c_str());
  sb_report_free(report);
  check(written, "eval");
  return kExitOk;
}

// Blocks SIGINT/SIGTERM in every thread started afterwards and returns the
// set to wait on.
sigset_t block_stop_signals() {
  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &set, nullptr);
  return set;
}

void serve_until_signal(sb_server* server, const sigset_t& set) {
  int sig = 0;
  sigwait(&set, &sig);
  std::cerr << "stopping\n";
  sb_server_stop(server);
  sb_server_wait(server);
  sb_server_free(server);
}

int run_serve(const Options& o) {
  json config = o.config;
  for (const char* key : kCliOnlyKeys) config.erase(key);
  if (o.dataset) config["dataset"] = *o.dataset;
  if (o.agents) config["agents"] = *o.agents;
  if (o.scorer) config["scorer"] = *o.scorer;
  if (o.router_model) config["router_model"] = *o.router_model;
  if (o.host) config["host"] = *o.host;
  if (o.fleet_mode) config["fleet_mode"] = *o.fleet_mode;
  if (o.timeout_ms) config["timeout_ms"] = *o.timeout_ms;
  if (o.port) config["port"] = *o.port;
  if (o.vote_threshold) config["vote_threshold"] = *o.vote_threshold;
  if (o.filter_fallbacks) config["filter_fallbacks"] = true;
  if (!config.contains("port")) config["port"] = 8080;
  if (!config.contains("agents") && !config.contains("dataset")) {
    throw UsageError("serve needs --agents or a replay --dataset");
  }

  const sigset_t set = block_stop_signals();
  sb_server* server = nullptr;
  check(sb_gateway_start(config.dump().c_str(), &server), "serve");
  std::cerr << "gateway listening on port " << sb_server_port(server) << "\n";
  serve_until_signal(server, set);
  return kExitOk;
}

int run_fleet(const Options& o) {
  DatasetPtr dataset = open_dataset(o);
  sb_fleet_params params;
  sb_fleet_params_init(&params);
  const std::string host = o.host.value_or("127.0.0.1");
  params.host = host.c_str();
  params.port = o.port.value_or(9000);
  if (!o.latency_ms.empty()) {
    if (o.latency_ms.size() > 2) throw UsageError("--latency-ms takes MIN [MAX]");
    params.latency_min_ms = o.latency_ms.front();
    params.latency_max_ms = o.latency_ms.back();
  }
  if (o.seed) params.latency_seed = *o.seed;
  if (!o.fallback_text.empty()) params.fallback_text = o.fallback_text.c_str();

  const sigset_t set = block_stop_signals();
  sb_server* server = nullptr;
  check(sb_fleet_start(dataset.get(), &params, &server), "fleet");
  if (!o.profiles_out.empty()) {
    const sb_status status = sb_fleet_write_profiles(server, o.profiles_out.c_str());
    if (status != SB_OK) {
      sb_server_stop(server);
      sb_server_free(server);
      check(status, "fleet");
    }
  }
  std::cerr << "fleet of " << sb_dataset_agent_count(dataset.get())
            << " agents listening on port " << sb_server_port(server) << "\n";
  serve_until_signal(server, set);
  return kExitOk;
}

int run_score_debug(const Options& o) {
  DatasetPtr dataset = open_dataset(o);
  char* raw = nullptr;
  check(sb_score_debug(dataset.get(), o.corpus.c_str(),
                       o.query_id.empty() ? nullptr : o.query_id.c_str(),
                       o.query.empty() ? nullptr : o.query.c_str(), &raw),
        "score-debug");
  StringPtr records(raw);
  const std::string path = o.out.value_or("-");
  if (path == "-") {
    std::cout << records.get();
  } else {
    std::ofstream out(path, std::ios::trunc);
    if (!out || !(out << records.get())) throw Failure("cannot write \"" + path + "\"");
  }
  return kExitOk;
}

void add_common(CLI::App* sub, Options& o) {
  sub->add_option("--config", o.config_path, "JSON config file (default: $OFA_CONFIG)");
  sub->add_option("--dataset", o.dataset, "Labeled dataset (JSONL)");
  sub->add_option("--agents", o.agents, "Agent profiles (JSONL)");
  sub->add_option("--vote-threshold", o.vote_threshold, "Votes needed for gold (default 3)")
      ->check(CLI::Range(0, 6));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"switchboard: route queries across a fleet of black-box agents"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(sb_version()));
  Options o;

  auto* validate = app.add_subcommand("validate", "Lint a dataset and print split statistics");
  add_common(validate, o);

  auto* train = app.add_subcommand("train-router", "Train the example router on the train split");
  add_common(train, o);
  train->add_option("--out", o.out, "Model output path");
  train->add_option("--seed", o.seed, "Shuffle seed");
  train->add_option("--epochs", o.epochs);
  train->add_option("--learning-rate", o.learning_rate);
  train->add_option("--l2", o.l2);
  train->add_option("--batch-size", o.batch_size);

  auto* eval = app.add_subcommand("eval", "Evaluate a strategy and write a report");
  add_common(eval, o);
  eval->add_option("--strategy", o.strategy, "qa-examples | qa-descriptions | qr");
  eval->add_option("--scorer", o.scorer, "bm25 | tfidf | remote:<endpoint>");
  eval->add_option("--router-model", o.router_model, "Trained example router");
  eval->add_option("--timeout-ms", o.timeout_ms, "Per-agent timeout")->check(CLI::PositiveNumber);
  eval->add_option("--seed", o.seed, "Accepted for symmetry; evaluation is deterministic");
  eval->add_option("--out", o.out, "Report path, - for stdout");
  eval->add_option("--format", o.format, "table | records");
  eval->add_option("--subset", o.subset, "Comma-separated agent ids");
  eval->add_option("--split", o.split, "test | train")->check(CLI::IsMember({"test", "train"}));
  eval->add_flag("--filter-fallbacks", o.filter_fallbacks, "Drop fallback replies before scoring");
  eval->add_flag("--all-examples", o.all_examples, "Include examples without gold");
  eval->add_flag("--whole-description", o.whole_description,
                 "Score whole descriptions instead of sentences");
  eval->add_flag("--wire", o.wire, "Run every query through the gateway fan-out");
  eval->add_option("--threads", o.threads, "Worker threads, 0 for all cores");

  auto* serve = app.add_subcommand("serve", "Run the HTTP gateway");
  add_common(serve, o);
  serve->add_option("--host", o.host);
  serve->add_option("--port", o.port)->check(CLI::Range(0, 65535));
  serve->add_option("--scorer", o.scorer, "Default qr scorer");
  serve->add_option("--router-model", o.router_model);
  serve->add_option("--timeout-ms", o.timeout_ms)->check(CLI::PositiveNumber);
  serve->add_option("--fleet-mode", o.fleet_mode, "http | replay")
      ->check(CLI::IsMember({"http", "replay"}));
  serve->add_flag("--filter-fallbacks", o.filter_fallbacks);

  auto* fleet = app.add_subcommand("fleet", "Serve recorded responses as HTTP agents");
  add_common(fleet, o);
  fleet->add_option("--host", o.host);
  fleet->add_option("--port", o.port)->check(CLI::Range(0, 65535));
  fleet->add_option("--latency-ms", o.latency_ms, "MIN [MAX] injected latency")->expected(1, 2);
  fleet->add_option("--seed", o.seed, "Latency seed");
  fleet->add_option("--fallback-text", o.fallback_text, "Reply for unknown queries");
  fleet->add_option("--profiles-out", o.profiles_out,
                    "Write agent profiles pointing at this fleet");

  auto* debug = app.add_subcommand("score-debug", "Print BM25 per-term statistics");
  add_common(debug, o);
  debug->add_option("--corpus", o.corpus, "responses | descriptions")
      ->check(CLI::IsMember({"responses", "descriptions"}));
  debug->add_option("--query-id", o.query_id);
  debug->add_option("--query", o.query);
  debug->add_option("--out", o.out, "Output path, - for stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  CLI::App* sub = app.get_subcommands().front();
  try {
    load_config(o, *sub);
    if (sub == validate) return run_validate(o);
    if (sub == train) return run_train_router(o);
    if (sub == eval) return run_eval(o);
    if (sub == serve) return run_serve(o);
    if (sub == fleet) return run_fleet(o);
    if (sub == debug) return run_score_debug(o);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n" << sub->help();
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitUsage;
}
