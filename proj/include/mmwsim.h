// SPDX-License-Identifier: Apache-2.0
//
// mmwsim: system-level simulator for multi-layer hybrid beamforming in mmWave cells
// Copyright (C) 2026 The mmwsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#ifndef MMWSIM_H
#define MMWSIM_H

#include <stddef.h>

#if defined(_WIN32)
#define MMWSIM_API __declspec(dllexport)
#else
#define MMWSIM_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Status codes returned by every fallible call. */
typedef enum mmwsim_status
{
    MMWSIM_OK = 0,
    MMWSIM_E_INVALID_ARGUMENT = 1,
    MMWSIM_E_CONFIG = 2,
    MMWSIM_E_RUNTIME = 3,
    MMWSIM_E_PROTOCOL = 4,
    MMWSIM_E_IO = 5
} mmwsim_status;

typedef enum mmwsim_direction
{
    MMWSIM_DL = 0,
    MMWSIM_UL = 1
} mmwsim_direction;

typedef enum mmwsim_metric
{
    MMWSIM_METRIC_DELAY_MS = 0,
    MMWSIM_METRIC_SINR_DB = 1,
    MMWSIM_METRIC_BLER = 2
} mmwsim_metric;

typedef enum mmwsim_bf
{
    MMWSIM_BF_GBF = 0,
    MMWSIM_BF_CBF = 1,
    MMWSIM_BF_FMBF = 2,
    MMWSIM_BF_SMBF = 3
} mmwsim_bf;

typedef struct mmwsim_scenario mmwsim_scenario;
typedef struct mmwsim_campaign mmwsim_campaign;

/* Per-config, per-direction aggregate over all runs. Percentiles are NaN
 * when the pooled sample is empty. */
typedef struct mmwsim_summary
{
    int runs;
    double offered_bps;
    double throughput_bps;
    double throughput_stderr_bps;
    double mean_delay_ms;
    double delay_p50_ms;
    double delay_p80_ms;
    double delay_p95_ms;
    double sinr_p10_db;
    double sinr_p50_db;
    double sinr_p90_db;
    double outage_fraction;
    double step_fraction;
    double padding_ratio;
    long long tb_count;
    long long harq_retx;
    long long am_retx;
    int harq_max_gap_slots;
    int invariants_ok;
} mmwsim_summary;

typedef void (*mmwsim_progress_fn)(int done, int total, void *user);

MMWSIM_API const char *mmwsim_version(void);
/* Message of the last failed call on this thread; "" when none. */
MMWSIM_API const char *mmwsim_last_error(void);

/* Scenarios. Keys are the scenario-file keys plus output_dir and preset. */
MMWSIM_API int mmwsim_scenario_new(mmwsim_scenario **out);
MMWSIM_API int mmwsim_scenario_parse_file(const char *path, mmwsim_scenario **out);
MMWSIM_API int mmwsim_scenario_parse_text(const char *text, mmwsim_scenario **out);
MMWSIM_API void mmwsim_scenario_free(mmwsim_scenario *scenario);
/* Sets one key; the scenario is validated when used or by _validate. */
MMWSIM_API int mmwsim_scenario_set(mmwsim_scenario *scenario, const char *key, const char *value);
/* String getters copy at most len bytes including the terminator and always
 * report the full size (terminator included) through `needed` when non-NULL.
 * A short buffer returns MMWSIM_E_INVALID_ARGUMENT. */
MMWSIM_API int mmwsim_scenario_get(const mmwsim_scenario *scenario, const char *key, char *buf, size_t len,
                                   size_t *needed);
MMWSIM_API int mmwsim_scenario_render(const mmwsim_scenario *scenario, char *buf, size_t len, size_t *needed);
MMWSIM_API int mmwsim_scenario_validate(const mmwsim_scenario *scenario);

MMWSIM_API int mmwsim_preset_count(void);
MMWSIM_API const char *mmwsim_preset_name(int index);

/* Campaigns. */
MMWSIM_API int mmwsim_campaign_from_scenario(const mmwsim_scenario *scenario, const char *label,
                                             mmwsim_campaign **out);
/* `base` may be NULL for defaults; its seed, runs, duration and radio
 * settings carry over. */
MMWSIM_API int mmwsim_campaign_from_preset(const char *name, const mmwsim_scenario *base, mmwsim_campaign **out);
MMWSIM_API int mmwsim_campaign_from_manifest(const char *path, mmwsim_campaign **out);
MMWSIM_API void mmwsim_campaign_free(mmwsim_campaign *campaign);
/* 0 selects the hardware concurrency. */
MMWSIM_API int mmwsim_campaign_set_workers(mmwsim_campaign *campaign, int workers);
/* Rows per CDF curve in the written bundle; 0 keeps every sample. */
MMWSIM_API int mmwsim_campaign_set_cdf_points(mmwsim_campaign *campaign, int points);
MMWSIM_API int mmwsim_campaign_config_count(const mmwsim_campaign *campaign, int *out);
MMWSIM_API int mmwsim_campaign_config_label(const mmwsim_campaign *campaign, int index, char *buf, size_t len,
                                            size_t *needed);
MMWSIM_API int mmwsim_campaign_run(mmwsim_campaign *campaign, mmwsim_progress_fn progress, void *user);
/* Writes metrics.csv, summary.csv, cdf_*.csv and manifest.json. Needs a
 * finished run. */
MMWSIM_API int mmwsim_campaign_write(const mmwsim_campaign *campaign, const char *dir);
MMWSIM_API int mmwsim_campaign_summary(const mmwsim_campaign *campaign, int index, mmwsim_direction direction,
                                       mmwsim_summary *out);
/* Sorted pooled samples. Copies min(len, count) values; `count` receives the
 * full sample size. */
MMWSIM_API int mmwsim_campaign_samples(const mmwsim_campaign *campaign, int index, mmwsim_direction direction,
                                       mmwsim_metric metric, double *buf, size_t len, size_t *count);

/* Digital feedback size in bits for one report. */
MMWSIM_API int mmwsim_feedback_bits(mmwsim_bf kind, int n_bit, int n_users, int subcarriers, int codebook_size,
                                    long long *out);

#ifdef __cplusplus
}
#endif

#endif
