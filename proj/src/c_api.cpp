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

#include "switchboard/switchboard.h"

#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "switchboard/error.hpp"
#include "switchboard/eval.hpp"
#include "switchboard/gateway.hpp"
#include "switchboard/lexical.hpp"
#include "switchboard/mock_fleet.hpp"
#include "switchboard/qa_router.hpp"

using json = nlohmann::json;
namespace sb = switchboard;

struct sb_dataset {
  sb::Dataset dataset;
};

struct sb_router {
  std::shared_ptr<const sb::ExampleRouterModel> model;
};

struct sb_report {
  sb::EvalReport report;
};

struct sb_server {
  std::unique_ptr<sb::FleetServer> fleet;
  std::unique_ptr<sb::GatewayServer> gateway;
};

namespace {

thread_local std::string g_last_error;

sb_status to_status(sb::ErrorCode code) {
  switch (code) {
    case sb::ErrorCode::kInvalidArgument: return SB_ERR_INVALID_ARGUMENT;
    case sb::ErrorCode::kParse: return SB_ERR_PARSE;
    case sb::ErrorCode::kDuplicate: return SB_ERR_DUPLICATE;
    case sb::ErrorCode::kNotFound: return SB_ERR_NOT_FOUND;
    case sb::ErrorCode::kOutOfRange: return SB_ERR_OUT_OF_RANGE;
    case sb::ErrorCode::kTimeout: return SB_ERR_TIMEOUT;
    case sb::ErrorCode::kUnavailable: return SB_ERR_UNAVAILABLE;
    case sb::ErrorCode::kMalformedReply: return SB_ERR_MALFORMED_REPLY;
    case sb::ErrorCode::kIo: return SB_ERR_IO;
  }
  return SB_ERR_INTERNAL;
}

sb_status fail(sb_status status, std::string message) {
  g_last_error = std::move(message);
  return status;
}

template <typename Fn>
sb_status guarded(Fn&& fn) {
  try {
    fn();
    return SB_OK;
  } catch (const sb::Error& e) {
    return fail(to_status(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(SB_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(SB_ERR_INTERNAL, e.what());
  }
}

void require(const void* p, const char* what) {
  if (!p) throw sb::Error(sb::ErrorCode::kInvalidArgument, std::string(what) + " is NULL");
}

char* copy_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

json split_json(const sb::SplitCounts& counts) {
  return {{"total", counts.total},
          {"with_gold", counts.with_gold},
          {"without_gold", counts.without_gold},
          {"per_domain", counts.per_domain}};
}

std::vector<std::string> split_list(const char* text) {
  std::vector<std::string> out;
  if (!text) return out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    item = sb::trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::string c_str_or(const char* s, const char* fallback) {
  return s && *s ? std::string(s) : std::string(fallback);
}

}  // namespace

extern "C" {

const char* sb_version(void) { return "0.3.0"; }

const char* sb_status_name(sb_status status) {
  switch (status) {
    case SB_OK: return "ok";
    case SB_ERR_INVALID_ARGUMENT: return "invalid argument";
    case SB_ERR_PARSE: return "parse error";
    case SB_ERR_DUPLICATE: return "duplicate";
    case SB_ERR_NOT_FOUND: return "not found";
    case SB_ERR_OUT_OF_RANGE: return "out of range";
    case SB_ERR_TIMEOUT: return "timeout";
    case SB_ERR_UNAVAILABLE: return "unavailable";
    case SB_ERR_MALFORMED_REPLY: return "malformed reply";
    case SB_ERR_IO: return "i/o error";
    case SB_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* sb_last_error(void) { return g_last_error.c_str(); }

void sb_string_free(char* s) { std::free(s); }

sb_status sb_dataset_load(const char* path, const char* agents_path,
                          int vote_threshold, sb_dataset** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    std::vector<sb::AgentProfile> agents;
    if (agents_path && *agents_path) agents = sb::load_agent_profiles(agents_path);
    auto handle = std::make_unique<sb_dataset>();
    handle->dataset = sb::load_dataset(path, vote_threshold, std::move(agents));
    *out = handle.release();
  });
}

void sb_dataset_free(sb_dataset* dataset) { delete dataset; }

size_t sb_dataset_size(const sb_dataset* dataset) {
  return dataset ? dataset->dataset.examples.size() : 0;
}

size_t sb_dataset_agent_count(const sb_dataset* dataset) {
  return dataset ? dataset->dataset.agents.size() : 0;
}

sb_status sb_dataset_stats_json(const sb_dataset* dataset, char** out_json) {
  return guarded([&] {
    require(dataset, "dataset");
    require(out_json, "out_json");
    const sb::DatasetStats stats = sb::dataset_stats(dataset->dataset);
    json doc{{"total", stats.total},
             {"with_gold", stats.with_gold},
             {"without_gold", stats.without_gold},
             {"n_agents", stats.n_agents},
             {"vote_threshold", dataset->dataset.vote_threshold},
             {"train", split_json(stats.train)},
             {"test", split_json(stats.test)}};
    *out_json = copy_string(doc.dump());
  });
}

void sb_router_params_init(sb_router_params* params) {
  if (!params) return;
  const sb::RouterHyperparams defaults;
  params->learning_rate = defaults.learning_rate;
  params->epochs = defaults.epochs;
  params->l2 = defaults.l2;
  params->batch_size = defaults.batch_size;
  params->seed = defaults.seed;
  params->feature_dim = sb::kDefaultFeatureDim;
}

sb_status sb_router_train(const sb_dataset* dataset,
                          const sb_router_params* params, sb_router** out) {
  return guarded([&] {
    require(dataset, "dataset");
    require(out, "out");
    sb_router_params p;
    sb_router_params_init(&p);
    if (params) p = *params;
    sb::RouterHyperparams hyper{p.learning_rate, p.epochs, p.l2, p.batch_size, p.seed};
    const auto examples = sb::router_examples(dataset->dataset, sb::Split::kTrain);
    const auto agents = dataset->dataset.agent_ids();
    auto handle = std::make_unique<sb_router>();
    handle->model = std::make_shared<const sb::ExampleRouterModel>(
        sb::train_example_router(examples, agents, hyper, p.feature_dim));
    *out = handle.release();
  });
}

sb_status sb_router_save(const sb_router* router, const char* path) {
  return guarded([&] {
    require(router, "router");
    require(path, "path");
    router->model->save_file(path);
  });
}

sb_status sb_router_load(const char* path, sb_router** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    auto handle = std::make_unique<sb_router>();
    handle->model = std::make_shared<const sb::ExampleRouterModel>(
        sb::ExampleRouterModel::load_file(path));
    *out = handle.release();
  });
}

void sb_router_free(sb_router* router) { delete router; }

sb_status sb_router_route_json(const sb_router* router, const char* query,
                               char** out_json) {
  return guarded([&] {
    require(router, "router");
    require(query, "query");
    require(out_json, "out_json");
    json list = json::array();
    for (const auto& c : sb::route_by_examples(*router->model, query)) {
      list.push_back({{"agent", c.agent_id}, {"score", c.score}});
    }
    *out_json = copy_string(list.dump());
  });
}

void sb_eval_params_init(sb_eval_params* params) {
  if (!params) return;
  *params = sb_eval_params{};
  params->strategy = "qr";
  params->scorer = "bm25";
  params->split = "test";
  params->timeout_ms = 2000;
}

sb_status sb_eval_run(const sb_dataset* dataset, const sb_eval_params* params,
                      sb_report** out) {
  return guarded([&] {
    require(dataset, "dataset");
    require(params, "params");
    require(out, "out");
    const std::string strategy_name = c_str_or(params->strategy, "qr");
    auto kind = sb::parse_strategy(strategy_name);
    if (!kind) {
      throw sb::Error(sb::ErrorCode::kInvalidArgument,
                      "unknown strategy \"" + strategy_name + "\"");
    }
    const int timeout = params->timeout_ms > 0 ? params->timeout_ms : 2000;
    sb::Strategy strategy;
    strategy.kind = *kind;
    strategy.scorer = sb::ScorerHandle::parse(c_str_or(params->scorer, "bm25"), timeout);
    strategy.filter_fallbacks = params->filter_fallbacks != 0;
    strategy.description_mode = params->whole_description
                                    ? sb::DescriptionMode::kWhole
                                    : sb::DescriptionMode::kSentences;
    if (params->router) strategy.router_model = params->router->model;

    sb::EvalOptions options;
    options.split = sb::parse_split(c_str_or(params->split, "test"));
    options.require_gold = params->all_examples == 0;
    options.agent_subset = split_list(params->agent_subset);
    options.threads = params->threads;

    auto handle = std::make_unique<sb_report>();
    if (params->wire) {
      auto transport = std::make_shared<sb::ReplayTransport>(
          sb::build_fleet(dataset->dataset, sb::LatencySpec::fixed(0)));
      sb::AskOptions ask_options;
      ask_options.fanout.per_agent_timeout_ms = timeout;
      handle->report =
          sb::run_eval_wire(strategy, dataset->dataset, transport, ask_options, options)
              .report;
    } else {
      handle->report = sb::run_eval(strategy, dataset->dataset, options).report;
    }
    *out = handle.release();
  });
}

void sb_report_free(sb_report* report) { delete report; }

double sb_report_precision_at_1(const sb_report* report) {
  return report ? report->report.overall_precision_at_1 : 0.0;
}

size_t sb_report_n_evaluated(const sb_report* report) {
  return report ? report->report.n_evaluated : 0;
}

sb_status sb_report_format_text(const sb_report* report,
                                sb_report_format format, char** out) {
  return guarded([&] {
    require(report, "report");
    require(out, "out");
    *out = copy_string(format == SB_REPORT_TABLE
                           ? sb::format_report_table(report->report)
                           : sb::format_report_records(report->report));
  });
}

sb_status sb_report_write(const sb_report* report, sb_report_format format,
                          const char* path) {
  return guarded([&] {
    require(report, "report");
    require(path, "path");
    sb::emit_report(report->report,
                    format == SB_REPORT_TABLE ? sb::ReportFormat::kTable
                                              : sb::ReportFormat::kRecords,
                    path);
  });
}

sb_status sb_score_debug(const sb_dataset* dataset, const char* corpus,
                         const char* query_id, const char* query,
                         char** out_records) {
  return guarded([&] {
    require(dataset, "dataset");
    require(out_records, "out_records");
    const std::string kind = c_str_or(corpus, "responses");
    std::string query_text = query ? query : "";
    sb::Bm25Index index;
    if (kind == "responses") {
      if (!query_id || !*query_id) {
        throw sb::Error(sb::ErrorCode::kInvalidArgument,
                        "the responses corpus needs a query id");
      }
      const sb::LabeledExample* example = nullptr;
      for (const auto& e : dataset->dataset.examples) {
        if (e.query.id == query_id) example = &e;
      }
      if (!example) {
        throw sb::Error(sb::ErrorCode::kNotFound,
                        std::string("no example \"") + query_id + "\"");
      }
      if (query_text.empty()) query_text = example->query.text;
      std::vector<sb::Bm25Index::Document> docs;
      for (const auto& [agent, response] : example->responses) {
        docs.emplace_back(agent, response.text);
      }
      index = sb::Bm25Index(docs);
    } else if (kind == "descriptions") {
      if (query_text.empty()) {
        throw sb::Error(sb::ErrorCode::kInvalidArgument,
                        "the descriptions corpus needs query text");
      }
      index = sb::build_sentence_index(sb::skills_from_profiles(dataset->dataset.agents));
    } else {
      throw sb::Error(sb::ErrorCode::kInvalidArgument,
                      "corpus must be \"responses\" or \"descriptions\"");
    }

    std::ostringstream out;
    out << json{{"record", "corpus"},
                {"query", query_text},
                {"tokens", sb::tokenize(query_text)},
                {"n_docs", index.size()},
                {"avg_doc_len", index.avg_doc_len()},
                {"k1", index.params().k1},
                {"b", index.params().b}}
               .dump()
        << '\n';
    for (std::size_t i = 0; i < index.size(); ++i) {
      const std::string& doc = index.doc_id(i);
      for (const auto& stat : index.explain(query_text, doc)) {
        out << json{{"record", "term"},
                    {"doc", doc},
                    {"term", stat.term},
                    {"df", stat.df},
                    {"idf", stat.idf},
                    {"tf", stat.tf},
                    {"contribution", stat.contribution}}
                   .dump()
            << '\n';
      }
      out << json{{"record", "doc"},
                  {"doc", doc},
                  {"doc_len", index.doc_tokens(doc).size()},
                  {"score", index.score(query_text, doc)}}
                 .dump()
          << '\n';
    }
    *out_records = copy_string(out.str());
  });
}

void sb_fleet_params_init(sb_fleet_params* params) {
  if (!params) return;
  *params = sb_fleet_params{};
  params->host = "127.0.0.1";
}

sb_status sb_fleet_start(const sb_dataset* dataset,
                         const sb_fleet_params* params, sb_server** out) {
  return guarded([&] {
    require(dataset, "dataset");
    require(out, "out");
    sb_fleet_params p;
    sb_fleet_params_init(&p);
    if (params) p = *params;
    const sb::LatencySpec latency{p.latency_min_ms, p.latency_max_ms, p.latency_seed};
    auto fleet = sb::build_fleet(
        dataset->dataset, latency,
        p.fallback_text ? std::string_view(p.fallback_text) : sb::kDefaultFallbackText);
    auto handle = std::make_unique<sb_server>();
    handle->fleet = std::make_unique<sb::FleetServer>(std::move(fleet));
    handle->fleet->start(c_str_or(p.host, "127.0.0.1"), p.port);
    *out = handle.release();
  });
}

sb_status sb_fleet_write_profiles(const sb_server* fleet, const char* path) {
  return guarded([&] {
    require(fleet, "fleet");
    require(path, "path");
    if (!fleet->fleet) {
      throw sb::Error(sb::ErrorCode::kInvalidArgument, "server is not a fleet");
    }
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw sb::Error(sb::ErrorCode::kIo, std::string("cannot write \"") + path + "\"");
    sb::write_agent_profiles(fleet->fleet->profiles(), out);
  });
}

sb_status sb_gateway_start(const char* config_json, sb_server** out) {
  return guarded([&] {
    require(config_json, "config_json");
    require(out, "out");
    auto handle = std::make_unique<sb_server>();
    handle->gateway = sb::GatewayServer::from_config(sb::GatewayConfig::parse(config_json));
    handle->gateway->start();
    *out = handle.release();
  });
}

int sb_server_port(const sb_server* server) {
  if (!server) return -1;
  if (server->fleet) return server->fleet->port();
  if (server->gateway) return server->gateway->port();
  return -1;
}

void sb_server_stop(sb_server* server) {
  if (!server) return;
  if (server->fleet) server->fleet->stop();
  if (server->gateway) server->gateway->stop();
}

void sb_server_wait(sb_server* server) {
  if (!server) return;
  if (server->fleet) server->fleet->wait();
  if (server->gateway) server->gateway->wait();
}

void sb_server_free(sb_server* server) { delete server; }

}  // extern "C"
