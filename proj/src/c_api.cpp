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

#include "mmwsim.h"

#include "mmwsim/beamforming.hpp"
#include "mmwsim/scenario_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <new>
#include <optional>
#include <string>

using namespace mmwsim;

struct mmwsim_scenario
{
    io::ScenarioDocument doc;
};

struct mmwsim_campaign
{
    io::Manifest manifest;
    int workers = 0;
    std::optional<std::vector<io::ConfigResult>> results;
    std::vector<std::vector<double>> sorted[2][3]; // [direction][metric][config]
};

namespace
{

thread_local std::string g_last_error;

int fail(int code, const std::string &msg)
{
    g_last_error = msg;
    return code;
}

template <class F>
int guarded(F &&f)
{
    try
    {
        g_last_error.clear();
        f();
        return MMWSIM_OK;
    }
    catch (const Error &e)
    {
        return fail(static_cast<int>(e.code()), e.what());
    }
    catch (const std::bad_alloc &)
    {
        return fail(MMWSIM_E_RUNTIME, "out of memory");
    }
    catch (const std::exception &e)
    {
        return fail(MMWSIM_E_RUNTIME, e.what());
    }
    catch (...)
    {
        return fail(MMWSIM_E_RUNTIME, "unknown error");
    }
}

void require(bool cond, const char *what)
{
    if (!cond)
        throw Error(ErrorCode::invalid_argument, what);
}

void copy_out(const std::string &s, char *buf, size_t len, size_t *needed)
{
    if (needed)
        *needed = s.size() + 1;
    if (buf == nullptr && len == 0)
        return;
    require(buf != nullptr, "null output buffer");
    if (len < s.size() + 1)
        throw Error(ErrorCode::invalid_argument, "output buffer too small");
    std::memcpy(buf, s.c_str(), s.size() + 1);
}

const io::ConfigResult &result_at(const mmwsim_campaign *c, int index)
{
    require(c != nullptr, "null campaign");
    if (!c->results)
        throw Error(ErrorCode::protocol, "campaign has not been run");
    require(index >= 0 && index < static_cast<int>(c->results->size()), "config index out of range");
    return (*c->results)[static_cast<std::size_t>(index)];
}

Direction to_direction(mmwsim_direction d)
{
    require(d == MMWSIM_DL || d == MMWSIM_UL, "invalid direction");
    return d == MMWSIM_DL ? Direction::downlink : Direction::uplink;
}

} // namespace

extern "C" {

const char *mmwsim_version(void)
{
    return MMWSIM_VERSION;
}

const char *mmwsim_last_error(void)
{
    return g_last_error.c_str();
}

int mmwsim_scenario_new(mmwsim_scenario **out)
{
    return guarded([&] {
        require(out != nullptr, "null output handle");
        *out = new mmwsim_scenario{};
    });
}

int mmwsim_scenario_parse_file(const char *path, mmwsim_scenario **out)
{
    return guarded([&] {
        require(path != nullptr && out != nullptr, "null argument");
        *out = nullptr;
        auto doc = io::parse_scenario(path);
        *out = new mmwsim_scenario{std::move(doc)};
    });
}

int mmwsim_scenario_parse_text(const char *text, mmwsim_scenario **out)
{
    return guarded([&] {
        require(text != nullptr && out != nullptr, "null argument");
        *out = nullptr;
        auto doc = io::parse_scenario_text(text);
        *out = new mmwsim_scenario{std::move(doc)};
    });
}

void mmwsim_scenario_free(mmwsim_scenario *scenario)
{
    delete scenario;
}

int mmwsim_scenario_set(mmwsim_scenario *scenario, const char *key, const char *value)
{
    return guarded([&] {
        require(scenario != nullptr && key != nullptr && value != nullptr, "null argument");
        io::set_key(scenario->doc, key, value);
    });
}

int mmwsim_scenario_get(const mmwsim_scenario *scenario, const char *key, char *buf, size_t len, size_t *needed)
{
    return guarded([&] {
        require(scenario != nullptr && key != nullptr, "null argument");
        copy_out(io::get_key(scenario->doc, key), buf, len, needed);
    });
}

int mmwsim_scenario_render(const mmwsim_scenario *scenario, char *buf, size_t len, size_t *needed)
{
    return guarded([&] {
        require(scenario != nullptr, "null scenario");
        copy_out(io::render_scenario(scenario->doc.scenario), buf, len, needed);
    });
}

int mmwsim_scenario_validate(const mmwsim_scenario *scenario)
{
    return guarded([&] {
        require(scenario != nullptr, "null scenario");
        scenario->doc.scenario.validate();
    });
}

int mmwsim_preset_count(void)
{
    return static_cast<int>(io::preset_names().size());
}

const char *mmwsim_preset_name(int index)
{
    const auto &names = io::preset_names();
    if (index < 0 || index >= static_cast<int>(names.size()))
        return nullptr;
    return names[static_cast<std::size_t>(index)].c_str();
}

int mmwsim_campaign_from_scenario(const mmwsim_scenario *scenario, const char *label, mmwsim_campaign **out)
{
    return guarded([&] {
        require(scenario != nullptr && out != nullptr, "null argument");
        *out = nullptr;
        scenario->doc.scenario.validate();
        const std::string name = label && *label ? label : "scenario";
        auto *c = new mmwsim_campaign{};
        c->manifest = io::make_manifest("scenario", name, {{name, scenario->doc.scenario}});
        *out = c;
    });
}

int mmwsim_campaign_from_preset(const char *name, const mmwsim_scenario *base, mmwsim_campaign **out)
{
    return guarded([&] {
        require(name != nullptr && out != nullptr, "null argument");
        *out = nullptr;
        const sim::Scenario b = base ? base->doc.scenario : sim::Scenario{};
        auto *c = new mmwsim_campaign{};
        try
        {
            c->manifest = io::make_manifest("preset", name, io::preset_configs(name, b));
        }
        catch (...)
        {
            delete c;
            throw;
        }
        *out = c;
    });
}

int mmwsim_campaign_from_manifest(const char *path, mmwsim_campaign **out)
{
    return guarded([&] {
        require(path != nullptr && out != nullptr, "null argument");
        *out = nullptr;
        auto m = io::load_manifest(path);
        auto *c = new mmwsim_campaign{};
        c->manifest = std::move(m);
        *out = c;
    });
}

void mmwsim_campaign_free(mmwsim_campaign *campaign)
{
    delete campaign;
}

int mmwsim_campaign_set_workers(mmwsim_campaign *campaign, int workers)
{
    return guarded([&] {
        require(campaign != nullptr, "null campaign");
        require(workers >= 0, "workers must be >= 0");
        campaign->workers = workers;
    });
}

int mmwsim_campaign_set_cdf_points(mmwsim_campaign *campaign, int points)
{
    return guarded([&] {
        require(campaign != nullptr, "null campaign");
        require(points >= 0, "cdf points must be >= 0");
        campaign->manifest.cdf_points = points;
    });
}

int mmwsim_campaign_config_count(const mmwsim_campaign *campaign, int *out)
{
    return guarded([&] {
        require(campaign != nullptr && out != nullptr, "null argument");
        *out = static_cast<int>(campaign->manifest.configs.size());
    });
}

int mmwsim_campaign_config_label(const mmwsim_campaign *campaign, int index, char *buf, size_t len,
                                 size_t *needed)
{
    return guarded([&] {
        require(campaign != nullptr, "null campaign");
        const auto &cfg = campaign->manifest.configs;
        require(index >= 0 && index < static_cast<int>(cfg.size()), "config index out of range");
        copy_out(cfg[static_cast<std::size_t>(index)].label, buf, len, needed);
    });
}

int mmwsim_campaign_run(mmwsim_campaign *campaign, mmwsim_progress_fn progress, void *user)
{
    return guarded([&] {
        require(campaign != nullptr, "null campaign");
        io::Progress cb;
        if (progress)
            cb = [progress, user](int done, int total) { progress(done, total, user); };
        auto results = io::run_campaign(campaign->manifest.configs, campaign->workers, cb);
        for (int d = 0; d < 2; ++d)
            for (int m = 0; m < 3; ++m)
            {
                auto &slot = campaign->sorted[d][m];
                slot.clear();
                for (const auto &r : results)
                {
                    const auto &s = r.summary.at(d == 0 ? Direction::downlink : Direction::uplink);
                    auto v = m == 0 ? s.delay_ms : m == 1 ? s.sinr_db : s.bler;
                    std::sort(v.begin(), v.end());
                    slot.push_back(std::move(v));
                }
            }
        campaign->results = std::move(results);
    });
}

int mmwsim_campaign_write(const mmwsim_campaign *campaign, const char *dir)
{
    return guarded([&] {
        require(campaign != nullptr && dir != nullptr, "null argument");
        if (!campaign->results)
            throw Error(ErrorCode::protocol, "campaign has not been run");
        io::write_bundle(dir, campaign->manifest, *campaign->results);
    });
}

int mmwsim_campaign_summary(const mmwsim_campaign *campaign, int index, mmwsim_direction direction,
                            mmwsim_summary *out)
{
    return guarded([&] {
        require(out != nullptr, "null output");
        const auto &r = result_at(campaign, index);
        const auto dir = to_direction(direction);
        const auto &s = r.summary.at(dir);
        const auto &delay = campaign->sorted[static_cast<int>(direction)][0][static_cast<std::size_t>(index)];
        const auto &sinr = campaign->sorted[static_cast<int>(direction)][1][static_cast<std::size_t>(index)];
        mmwsim_summary o{};
        o.runs = r.summary.runs;
        o.offered_bps = s.offered_bps;
        o.throughput_bps = s.mean_throughput_bps;
        o.throughput_stderr_bps = s.stderr_throughput_bps;
        o.mean_delay_ms = delay.empty() ? std::nan("") : s.mean_delay_ms;
        o.delay_p50_ms = sim::percentile(delay, 0.5);
        o.delay_p80_ms = sim::percentile(delay, 0.8);
        o.delay_p95_ms = sim::percentile(delay, 0.95);
        o.sinr_p10_db = sim::percentile(sinr, 0.1);
        o.sinr_p50_db = sim::percentile(sinr, 0.5);
        o.sinr_p90_db = sim::percentile(sinr, 0.9);
        o.outage_fraction = s.outage_fraction();
        o.step_fraction = s.step_fraction();
        o.padding_ratio = r.summary.padding_ratio;
        o.tb_count = s.tb_count;
        o.harq_retx = s.harq_retx;
        o.am_retx = s.am_retx;
        o.harq_max_gap_slots = s.harq_max_gap_slots;
        o.invariants_ok = r.summary.invariants.ok() ? 1 : 0;
        *out = o;
    });
}

int mmwsim_campaign_samples(const mmwsim_campaign *campaign, int index, mmwsim_direction direction,
                            mmwsim_metric metric, double *buf, size_t len, size_t *count)
{
    return guarded([&] {
        result_at(campaign, index);
        to_direction(direction);
        require(metric >= MMWSIM_METRIC_DELAY_MS && metric <= MMWSIM_METRIC_BLER, "invalid metric");
        const auto &v = campaign->sorted[static_cast<int>(direction)][static_cast<int>(metric)]
                                        [static_cast<std::size_t>(index)];
        if (count)
            *count = v.size();
        const std::size_t n = std::min(len, v.size());
        require(n == 0 || buf != nullptr, "null sample buffer");
        std::copy_n(v.begin(), n, buf);
    });
}

int mmwsim_feedback_bits(mmwsim_bf kind, int n_bit, int n_users, int subcarriers, int codebook_size,
                         long long *out)
{
    return guarded([&] {
        require(out != nullptr, "null output");
        require(kind >= MMWSIM_BF_GBF && kind <= MMWSIM_BF_SMBF, "invalid beamforming kind");
        const bf::BfKind kinds[] = {bf::BfKind::gbf, bf::BfKind::cbf, bf::BfKind::fmbf, bf::BfKind::smbf};
        bf::FeedbackBudget b;
        b.n_bit = n_bit;
        b.n_users = n_users;
        b.subcarriers = subcarriers;
        b.codebook_size = codebook_size;
        *out = bf::feedback_bits(b, kinds[kind]);
    });
}

} // extern "C"
