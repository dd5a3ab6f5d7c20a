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

/*
 * C interface to libswitchboard.
 *
 * Objects are opaque handles released with the matching *_free function.
 * Every fallible call returns an sb_status; on failure sb_last_error()
 * describes the problem (the message is per thread and valid until the next
 * failing call on that thread). Strings returned through char** are
 * heap-allocated and must be released with sb_string_free().
 */

#ifndef SWITCHBOARD_SWITCHBOARD_H_
#define SWITCHBOARD_SWITCHBOARD_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define SB_API __declspec(dllexport)
#else
#define SB_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum sb_status {
  SB_OK = 0,
  SB_ERR_INVALID_ARGUMENT = 1,
  SB_ERR_PARSE = 2,
  SB_ERR_DUPLICATE = 3,
  SB_ERR_NOT_FOUND = 4,
  SB_ERR_OUT_OF_RANGE = 5,
  SB_ERR_TIMEOUT = 6,
  SB_ERR_UNAVAILABLE = 7,
  SB_ERR_MALFORMED_REPLY = 8,
  SB_ERR_IO = 9,
  SB_ERR_INTERNAL = 100
} sb_status;

typedef struct sb_dataset sb_dataset;
typedef struct sb_router sb_router;
typedef struct sb_report sb_report;
typedef struct sb_server sb_server;

SB_API const char* sb_version(void);
SB_API const char* sb_status_name(sb_status status);
SB_API const char* sb_last_error(void);
SB_API void sb_string_free(char* s);

/* Dataset -------------------------------------------------------------- */

/* agents_path may be NULL; agents are then inferred from the responses. */
SB_API sb_status sb_dataset_load(const char* path, const char* agents_path,
                                 int vote_threshold, sb_dataset** out);
SB_API void sb_dataset_free(sb_dataset* dataset);
SB_API size_t sb_dataset_size(const sb_dataset* dataset);
SB_API size_t sb_dataset_agent_count(const sb_dataset* dataset);

/* {"total","with_gold","without_gold","n_agents",
 *  "train":{"total","with_gold","without_gold","per_domain":{...}},
 *  "test":{...}} */
SB_API sb_status sb_dataset_stats_json(const sb_dataset* dataset,
                                       char** out_json);

/* Example router --------------------------------------------------------- */

typedef struct sb_router_params {
  double learning_rate;
  int epochs;
  double l2;
  int batch_size;
  uint64_t seed;
  size_t feature_dim;
} sb_router_params;

SB_API void sb_router_params_init(sb_router_params* params);
/* Trains on the train split only. */
SB_API sb_status sb_router_train(const sb_dataset* dataset,
                                 const sb_router_params* params,
                                 sb_router** out);
SB_API sb_status sb_router_save(const sb_router* router, const char* path);
SB_API sb_status sb_router_load(const char* path, sb_router** out);
SB_API void sb_router_free(sb_router* router);
/* [{"agent": "...", "score": p}, ...] sorted best first. */
SB_API sb_status sb_router_route_json(const sb_router* router,
                                      const char* query, char** out_json);

/* Evaluation ------------------------------------------------------------- */

typedef struct sb_eval_params {
  const char* strategy;      /* "qa-examples" | "qa-descriptions" | "qr" */
  const char* scorer;        /* "bm25" | "tfidf" | "remote:<endpoint>" */
  const char* split;         /* "test" (default) | "train" */
  const char* agent_subset;  /* comma-separated ids, NULL for all agents */
  const sb_router* router;   /* required for qa-examples */
  int timeout_ms;
  int filter_fallbacks;
  int all_examples;          /* also evaluate examples without gold */
  int whole_description;     /* qa-descriptions: do not split sentences */
  int wire;                  /* go through the gateway + replay transport */
  unsigned threads;          /* 0 = hardware concurrency */
} sb_eval_params;

typedef enum sb_report_format {
  SB_REPORT_TABLE = 0,
  SB_REPORT_RECORDS = 1
} sb_report_format;

SB_API void sb_eval_params_init(sb_eval_params* params);
SB_API sb_status sb_eval_run(const sb_dataset* dataset,
                             const sb_eval_params* params, sb_report** out);
SB_API void sb_report_free(sb_report* report);
SB_API double sb_report_precision_at_1(const sb_report* report);
SB_API size_t sb_report_n_evaluated(const sb_report* report);
SB_API sb_status sb_report_format_text(const sb_report* report,
                                       sb_report_format format, char** out);
/* path "-" writes to stdout. */
SB_API sb_status sb_report_write(const sb_report* report,
                                 sb_report_format format, const char* path);

/* BM25 diagnostics -------------------------------------------------------- */

/* Line-delimited records describing how `query` scores against a corpus:
 * corpus "responses" indexes the responses of example `query_id` (query
 * defaults to that example's text); corpus "descriptions" indexes every
 * agent skill sentence. */
SB_API sb_status sb_score_debug(const sb_dataset* dataset, const char* corpus,
                                const char* query_id, const char* query,
                                char** out_records);

/* Services --------------------------------------------------------------- */

typedef struct sb_fleet_params {
  const char* host;
  int port;                 /* 0 picks a free port */
  int64_t latency_min_ms;
  int64_t latency_max_ms;
  uint64_t latency_seed;
  const char* fallback_text;
} sb_fleet_params;

SB_API void sb_fleet_params_init(sb_fleet_params* params);
SB_API sb_status sb_fleet_start(const sb_dataset* dataset,
                                const sb_fleet_params* params, sb_server** out);
/* Agent profile file whose endpoints point at a running fleet. */
SB_API sb_status sb_fleet_write_profiles(const sb_server* fleet,
                                         const char* path);

/* config_json follows the gateway configuration file format. */
SB_API sb_status sb_gateway_start(const char* config_json, sb_server** out);

SB_API int sb_server_port(const sb_server* server);
/* Safe to call from any thread, including a signal-watching thread. */
SB_API void sb_server_stop(sb_server* server);
SB_API void sb_server_wait(sb_server* server);
SB_API void sb_server_free(sb_server* server);

#ifdef __cplusplus
}
#endif

#endif /* SWITCHBOARD_SWITCHBOARD_H_ */
