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

#ifndef MMWSIM_SCENARIO_IO_HPP
#define MMWSIM_SCENARIO_IO_HPP

#include "mmwsim/engine.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace mmwsim::io
{

/// A scenario file: `key = value` lines, `#` starts a comment. Keys mirror
/// sim::Scenario plus `output_dir` and `preset`.
struct ScenarioDocument
{
    sim::Scenario scenario;
    std::string output_dir = "mmwsim-out";
    std::string preset;
};

/// Sets or reads one key (scenario keys plus output_dir and preset) without
/// validating the scenario. ErrorCode::config for unknown keys or bad values.
void set_key(ScenarioDocument &doc, const std::string &key, const std::string &value);
std::string get_key(const ScenarioDocument &doc, const std::string &key);

/// Parse errors carry "<source>:<line>: ..."; unknown keys are named; the
/// resulting scenario is validated (ErrorCode::config on failure).
ScenarioDocument parse_scenario_text(const std::string &text, const std::string &source = "<scenario>");
/// ErrorCode::io when the file cannot be read.
ScenarioDocument parse_scenario(const std::string &path);

/// Every scenario key in canonical order, one `key = value` line each.
/// Doubles are printed with 17 significant digits so parsing the text back
/// gives the identical scenario.
std::string render_scenario(const sim::Scenario &sc);
std::vector<std::string> scenario_keys();

/// FNV-1a over render_scenario.
std::uint64_t config_hash(const sim::Scenario &sc);
std::string hex64(std::uint64_t v);

struct ConfigPoint
{
    std::string label;
    sim::Scenario scenario;
};

const std::vector<std::string> &preset_names();
/// The configuration matrix of a preset built on top of `base` (seed, runs,
/// duration and radio settings are taken from it). ErrorCode::config for an
/// unknown name.
std::vector<ConfigPoint> preset_configs(const std::string &name, const sim::Scenario &base = {});

struct ConfigResult
{
    std::string label;
    sim::Scenario scenario;
    std::vector<sim::MetricsReport> reports; // indexed by run
    sim::CampaignSummary summary;
};

/// Called after each finished run with (done, total); serialised.
using Progress = std::function<void(int, int)>;

/// Runs every (config, run) pair on `workers` threads (0: hardware
/// concurrency). Results do not depend on the worker count.
std::vector<ConfigResult> run_campaign(const std::vector<ConfigPoint> &configs, int workers = 0,
                                       const Progress &progress = {});

struct Manifest
{
    std::string kind = "scenario"; // "scenario" or "preset"
    std::string name;              // preset name, or the scenario label
    std::uint64_t seed = 1;
    int runs = 1;
    int cdf_points = 1000; // rows per CDF curve, 0 keeps every sample
    std::vector<ConfigPoint> configs;

    /// FNV-1a over every config label and rendered scenario.
    std::uint64_t hash() const;
    std::string to_json() const;
    /// Rebuilds the configs from their rendered text and checks every hash.
    static Manifest from_json(const std::string &text);
};

Manifest make_manifest(const std::string &kind, const std::string &name, const std::vector<ConfigPoint> &configs,
                       int cdf_points = 1000);
Manifest load_manifest(const std::string &path);

/// CDF rows for one curve. With max_rows > 0 and more samples than that, only
/// the ranks ceil(j N / max_rows) - 1 (j = 1..max_rows) are written; each
/// written row is still an exact (x_i, (i + 1) / N) pair. Expects sorted input.
void write_cdf_rows(std::ostream &os, const std::string &label, const std::vector<double> &sorted, int max_rows);

/// Files written into `dir` (created if needed):
///   metrics.csv   one row per (config, run, direction)
///   summary.csv   one row per (config, direction)
///   cdf_<delay|sinr|bler>_<dl|ul>.csv   config,value,cdf
///   manifest.json
/// Returns the paths written.
std::vector<std::string> write_bundle(const std::string &dir, const Manifest &manifest,
                                      const std::vector<ConfigResult> &results);

/// Convenience: run the manifest's configs and write the bundle.
std::vector<ConfigResult> execute_manifest(const Manifest &manifest, const std::string &dir, int workers = 0,
                                           const Progress &progress = {});

} // namespace mmwsim::io

#endif
