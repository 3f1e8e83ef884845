/* Copyright 2026 The bidlearn Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef BIDLEARN_BIDLEARN_H_
#define BIDLEARN_BIDLEARN_H_

/* C interface of libbidlearn.
 *
 * Every call returns a bl_status. On failure a description is available from
 * bl_last_error() on the same thread until the next failing call. Strings
 * returned through out-parameters are owned by the library and stay valid
 * until the owning handle is destroyed or the same call is repeated on it.
 */

#include <stddef.h>
#include <stdint.h>

#if defined(BIDLEARN_BUILDING_LIBRARY)
#define BL_API __attribute__((visibility("default")))
#else
#define BL_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Numeric values 2, 3 and 4 equal the CLI exit codes. */
typedef enum bl_status {
  BL_OK = 0,
  BL_ERR_INVALID_ARGUMENT = 1,
  BL_ERR_CONFIG = 2,
  BL_ERR_NUMERIC = 3,
  BL_ERR_IO = 4,
  BL_ERR_STATE = 5,
  BL_ERR_RESOURCE = 6,
  BL_ERR_INTERNAL = 7
} bl_status;

typedef enum bl_command {
  BL_CMD_RUN = 0,
  BL_CMD_SWEEP_LR = 1,
  BL_CMD_STUDY_NORM = 2,
  BL_CMD_SWEEP_BUFFER = 3,
  BL_CMD_ORACLE = 4
} bl_command;

typedef struct bl_config bl_config;
typedef struct bl_report bl_report;

typedef struct bl_exec_options {
  int workers;                 /* 0 = hardware concurrency */
  int quiet;                   /* nonzero suppresses progress on stderr */
  double max_aborted_fraction; /* above this, bl_execute returns NUMERIC */
} bl_exec_options;

BL_API const char* bl_version(void);
BL_API const char* bl_last_error(void);
BL_API const char* bl_status_name(bl_status status);

/* Configuration holds `key = value` entries applied over the defaults. */
BL_API bl_status bl_config_create(bl_config** out);
BL_API void bl_config_destroy(bl_config* config);
BL_API bl_status bl_config_load_file(bl_config* config, const char* path);
BL_API bl_status bl_config_parse_text(bl_config* config, const char* text);
BL_API bl_status bl_config_set(bl_config* config, const char* key,
                               const char* value);
BL_API bl_status bl_config_get(bl_config* config, const char* key,
                               const char** value);
BL_API bl_status bl_config_serialize(bl_config* config, const char** text);

BL_API bl_exec_options bl_exec_options_default(void);

/* Runs a subcommand. The report is produced on BL_OK and on BL_ERR_NUMERIC
 * (too many aborted runs); otherwise *report is set to NULL. */
BL_API bl_status bl_execute(const bl_config* config, bl_command command,
                            const bl_exec_options* options,
                            bl_report** report);
BL_API void bl_report_destroy(bl_report* report);
BL_API int bl_report_run_count(const bl_report* report);
BL_API int bl_report_aborted_count(const bl_report* report);
BL_API const char* bl_report_summary(const bl_report* report);
BL_API size_t bl_report_file_count(const bl_report* report);
BL_API const char* bl_report_file(const bl_report* report, size_t index);

/* Clears one auction round. quantities and profits have two entries. */
BL_API bl_status bl_clear_auction(const bl_config* config,
                                  const double offers[2],
                                  double* clearing_price, double quantities[2],
                                  double profits[2]);

/* Equilibrium threshold and high price for the configured market. regime is
 * 0 constrained, 1 unconstrained, 2 uncompetitive. */
BL_API bl_status bl_ne_threshold(const bl_config* config,
                                 double* low_threshold, double* high_price,
                                 int* regime);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* BIDLEARN_BIDLEARN_H_ */
