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

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <memory>
#include <string>

namespace
{

constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

struct Failure
{
    int status;
};

void check(int status)
{
    if (status != MMWSIM_OK)
        throw Failure{status};
}

int exit_code(int status)
{
    return status == MMWSIM_E_CONFIG || status == MMWSIM_E_INVALID_ARGUMENT ? kExitConfig : kExitRuntime;
}

struct Options
{
    std::string input;
    std::string out;
    std::string base;
    long long seed = -1;
    int runs = 0;
    double duration = -1.0;
    int workers = 0;
    int cdf_points = -1;
    bool quiet = false;
};

class Scenario
{
  public:
    Scenario() { check(mmwsim_scenario_new(&h_)); }
    explicit Scenario(const std::string &path) { check(mmwsim_scenario_parse_file(path.c_str(), &h_)); }
    ~Scenario() { mmwsim_scenario_free(h_); }
    Scenario(const Scenario &) = delete;
    Scenario &operator=(const Scenario &) = delete;

    mmwsim_scenario *get() const { return h_; }
    void set(const char *key, const std::string &value) { check(mmwsim_scenario_set(h_, key, value.c_str())); }
    std::string value(const char *key) const
    {
        size_t needed = 0;
        check(mmwsim_scenario_get(h_, key, nullptr, 0, &needed));
        std::string s(needed, '\0');
        check(mmwsim_scenario_get(h_, key, s.data(), s.size(), nullptr));
        s.pop_back();
        return s;
    }

  private:
    mmwsim_scenario *h_ = nullptr;
};

class Campaign
{
  public:
    explicit Campaign(mmwsim_campaign *h) : h_(h) {}
    ~Campaign() { mmwsim_campaign_free(h_); }
    Campaign(const Campaign &) = delete;
    Campaign &operator=(const Campaign &) = delete;
    mmwsim_campaign *get() const { return h_; }

  private:
    mmwsim_campaign *h_;
};

void apply_overrides(Scenario &sc, const Options &o)
{
    if (o.seed >= 0)
        sc.set("seed", std::to_string(o.seed));
    if (o.runs > 0)
        sc.set("runs", std::to_string(o.runs));
    if (o.duration >= 0.0)
    {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.17g", o.duration);
        sc.set("duration_s", buf);
    }
}

void progress(int done, int total, void *)
{
    std::fprintf(stderr, "\r  %d/%d runs", done, total);
    if (done == total)
        std::fputc('\n', stderr);
    std::fflush(stderr);
}

std::string cell(double v, const char *fmt)
{
    if (!std::isfinite(v))
        return "-";
    char buf[32];
    std::snprintf(buf, sizeof buf, fmt, v);
    return buf;
}

void print_summary(const Campaign &c)
{
    int n = 0;
    check(mmwsim_campaign_config_count(c.get(), &n));
    std::printf("%-28s %-3s %10s %10s %10s %10s %10s %9s %4s\n", "config", "dir", "offered", "thr_mbps",
                "delay_ms", "p80_ms", "sinr_p50", "outage", "inv");
    for (int i = 0; i < n; ++i)
    {
        char label[128];
        check(mmwsim_campaign_config_label(c.get(), i, label, sizeof label, nullptr));
        for (auto d : {MMWSIM_DL, MMWSIM_UL})
        {
            mmwsim_summary s{};
            check(mmwsim_campaign_summary(c.get(), i, d, &s));
            std::printf("%-28s %-3s %10s %10s %10s %10s %10s %9s %4s\n", label, d == MMWSIM_DL ? "dl" : "ul",
                        cell(s.offered_bps / 1e6, "%.2f").c_str(), cell(s.throughput_bps / 1e6, "%.2f").c_str(),
                        cell(s.mean_delay_ms, "%.3f").c_str(), cell(s.delay_p80_ms, "%.3f").c_str(),
                        cell(s.sinr_p50_db, "%.2f").c_str(), cell(s.outage_fraction, "%.4f").c_str(),
                        s.invariants_ok ? "ok" : "FAIL");
        }
    }
}

void run_and_write(Campaign &c, const Options &o, const std::string &out)
{
    check(mmwsim_campaign_set_workers(c.get(), o.workers));
    if (o.cdf_points >= 0)
        check(mmwsim_campaign_set_cdf_points(c.get(), o.cdf_points));
    check(mmwsim_campaign_run(c.get(), o.quiet ? nullptr : progress, nullptr));
    check(mmwsim_campaign_write(c.get(), out.c_str()));
    if (!o.quiet)
        print_summary(c);
    std::printf("wrote %s\n", out.c_str());
}

int cmd_simulate(const Options &o)
{
    Scenario sc(o.input);
    apply_overrides(sc, o);
    check(mmwsim_scenario_validate(sc.get()));
    const std::string preset = sc.value("preset");
    const std::string out = o.out.empty() ? sc.value("output_dir") : o.out;
    mmwsim_campaign *h = nullptr;
    if (preset.empty())
        check(mmwsim_campaign_from_scenario(sc.get(), "scenario", &h));
    else
        check(mmwsim_campaign_from_preset(preset.c_str(), sc.get(), &h));
    Campaign c(h);
    run_and_write(c, o, out);
    return 0;
}

int cmd_preset(const Options &o)
{
    std::unique_ptr<Scenario> base = o.base.empty() ? std::make_unique<Scenario>() : std::make_unique<Scenario>(o.base);
    apply_overrides(*base, o);
    check(mmwsim_scenario_validate(base->get()));
    mmwsim_campaign *h = nullptr;
    check(mmwsim_campaign_from_preset(o.input.c_str(), base->get(), &h));
    Campaign c(h);
    run_and_write(c, o, o.out.empty() ? "mmwsim-" + o.input : o.out);
    return 0;
}

int cmd_rerun(const Options &o)
{
    mmwsim_campaign *h = nullptr;
    check(mmwsim_campaign_from_manifest(o.input.c_str(), &h));
    Campaign c(h);
    run_and_write(c, o, o.out.empty() ? "mmwsim-rerun" : o.out);
    return 0;
}

int cmd_validate(const Options &o)
{
    Scenario sc(o.input);
    size_t needed = 0;
    check(mmwsim_scenario_render(sc.get(), nullptr, 0, &needed));
    std::string text(needed, '\0');
    check(mmwsim_scenario_render(sc.get(), text.data(), text.size(), nullptr));
    text.pop_back();
    std::printf("%s: ok\n", o.input.c_str());
    if (!o.quiet)
        std::fputs(text.c_str(), stdout);
    return 0;
}

} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"mmwsim: multi-layer hybrid beamforming mmWave cell simulator"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(mmwsim_version()));

    Options o;
    auto *simulate = app.add_subcommand("simulate", "Run a scenario file");
    simulate->add_option("scenario", o.input, "Scenario file")->required();
    simulate->add_option("--seed", o.seed, "Override the seed")->check(CLI::NonNegativeNumber);
    simulate->add_option("--out", o.out, "Output directory (default: output_dir from the file)");
    simulate->add_option("--runs", o.runs, "Override the number of drops")->check(CLI::PositiveNumber);

    auto *preset = app.add_subcommand("preset", "Run a preset campaign");
    std::string names;
    for (int i = 0; i < mmwsim_preset_count(); ++i)
        names += std::string(i ? ", " : "") + mmwsim_preset_name(i);
    preset->add_option("name", o.input, "One of: " + names)->required();
    preset->add_option("--runs", o.runs, "Drops per configuration")->check(CLI::PositiveNumber);
    preset->add_option("--out", o.out, "Output directory (default: mmwsim-<name>)");
    preset->add_option("--seed", o.seed, "Campaign seed")->check(CLI::NonNegativeNumber);
    preset->add_option("--duration", o.duration, "Simulated seconds per run")->check(CLI::NonNegativeNumber);
    preset->add_option("--scenario", o.base, "Base scenario file for radio and timing settings");

    auto *rerun = app.add_subcommand("rerun", "Reproduce a bundle from its manifest.json");
    rerun->add_option("manifest", o.input, "manifest.json of an earlier bundle")->required();
    rerun->add_option("--out", o.out, "Output directory (default: mmwsim-rerun)");

    auto *validate = app.add_subcommand("validate", "Parse and check a scenario file");
    validate->add_option("scenario", o.input, "Scenario file")->required();

    for (auto *sub : {simulate, preset, rerun})
    {
        sub->add_option("--workers", o.workers, "Worker threads (0: all cores)")->check(CLI::NonNegativeNumber);
        sub->add_option("--cdf-points", o.cdf_points, "Rows per CDF curve, 0 keeps every sample")
            ->check(CLI::NonNegativeNumber);
    }
    for (auto *sub : {simulate, preset, rerun, validate})
        sub->add_flag("-q,--quiet", o.quiet, "Less output");

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError &e)
    {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kExitConfig;
    }

    try
    {
        if (*simulate)
            return cmd_simulate(o);
        if (*preset)
            return cmd_preset(o);
        if (*rerun)
            return cmd_rerun(o);
        return cmd_validate(o);
    }
    catch (const Failure &f)
    {
        std::fprintf(stderr, "mmwsim: %s\n", mmwsim_last_error());
        return exit_code(f.status);
    }
}
