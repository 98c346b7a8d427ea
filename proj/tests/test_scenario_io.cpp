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

#include <catch_amalgamated.hpp>

#include "mmwsim/scenario_io.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace mmwsim;
using namespace mmwsim::io;

namespace
{

std::string slurp(const std::filesystem::path &p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::filesystem::path scratch(const std::string &name)
{
    auto p = std::filesystem::temp_directory_path() / ("mmwsim_test_" + name);
    std::filesystem::remove_all(p);
    return p;
}

ErrorCode code_of(const std::function<void()> &f)
{
    try
    {
        f();
    }
    catch (const Error &e)
    {
        return e.code();
    }
    return ErrorCode::ok;
}

std::string message_of(const std::function<void()> &f)
{
    try
    {
        f();
    }
    catch (const Error &e)
    {
        return e.what();
    }
    return {};
}

std::vector<ConfigPoint> tiny_campaign()
{
    sim::Scenario sc;
    sc.duration_s = 0.06;
    sc.warmup_s = 0.01;
    sc.runs = 2;
    sc.ue_count = 3;
    sc.bf = bf::BfKind::cbf;
    sc.traffic = traffic::Profile::udp_fast;
    sim::Scenario amrs = sc;
    amrs.scheduler = mac::SchedulerKind::amrs;
    amrs.rlc.mode = rlc::RlcMode::am;
    amrs.harq = true;
    return {{"pmrs", sc}, {"amrs", amrs}};
}

} // namespace

TEST_CASE("Scenario files - defaults")
{
    const auto doc = parse_scenario_text("");
    const auto &sc = doc.scenario;
    CHECK(sc.ue_count == 7);
    CHECK(sc.radius_m == 100.0);
    CHECK(sc.bs_height_m == 25.0);
    CHECK(sc.phy.numerology == 2);
    CHECK(sc.phy.carrier_ghz == 28.0);
    CHECK(sc.phy.bandwidth_hz == 198e6);
    CHECK(sc.phy.resource_blocks == 275);
    CHECK(sc.phy.bs_power_dbm == 30.0);
    CHECK(sc.phy.ue_power_dbm == 30.0);
    CHECK(sc.phy.noise_figure_db == 5.0);
    CHECK(sc.bs_array.size() == 64);
    CHECK(sc.ue_array.size() == 16);
    CHECK(sc.duration_s == 2.0);
    CHECK(sc.warmup_s == 0.1);
    CHECK(sc.runs == 20);
    CHECK(doc.preset.empty());
    CHECK(render_scenario(sc) == render_scenario(sim::Scenario{}));
}

TEST_CASE("Scenario files - values, comments and round trip")
{
    const std::string text = "# campaign\n"
                             "scheduler = amrs   # asynchronous\n"
                             "\n"
                             "  layers=2\n"
                             "bf = FMBF\n"
                             "rlc_mode = am\n"
                             "harq = yes\n"
                             "traffic = adaptive\n"
                             "interval_us = 37.5\n"
                             "warmup_s = 0.123\n"
                             "seed = 18446744073709551615\n"
                             "output_dir = results/a\n"
                             "preset = apps\n";
    const auto doc = parse_scenario_text(text);
    CHECK(doc.scenario.scheduler == mac::SchedulerKind::amrs);
    CHECK(doc.scenario.layers == 2);
    CHECK(doc.scenario.bf == bf::BfKind::fmbf);
    CHECK(doc.scenario.rlc.mode == rlc::RlcMode::am);
    CHECK(doc.scenario.harq);
    CHECK(doc.scenario.traffic == traffic::Profile::adaptive);
    CHECK(doc.scenario.interval_override == 37500);
    CHECK(doc.scenario.warmup_s == 0.123);
    CHECK(doc.scenario.seed == 18446744073709551615ULL);
    CHECK(doc.output_dir == "results/a");
    CHECK(doc.preset == "apps");

    const std::string rendered = render_scenario(doc.scenario);
    const auto again = parse_scenario_text(rendered).scenario;
    CHECK(render_scenario(again) == rendered);
    CHECK(config_hash(again) == config_hash(doc.scenario));

    // one line per key, in table order
    std::istringstream in(rendered);
    std::string line;
    std::size_t i = 0;
    const auto names = scenario_keys();
    while (std::getline(in, line))
    {
        REQUIRE(i < names.size());
        CHECK(line.rfind(names[i] + " = ", 0) == 0);
        ++i;
    }
    CHECK(i == names.size());
}

TEST_CASE("Scenario files - errors")
{
    SECTION("TMRS with several layers names both fields")
    {
        const auto msg = message_of([] { parse_scenario_text("scheduler = tmrs\nlayers = 4\n"); });
        CHECK(msg.find("tmrs") != std::string::npos);
        CHECK(msg.find("layers") != std::string::npos);
        CHECK(code_of([] { parse_scenario_text("scheduler = tmrs\nlayers = 4\n"); }) == ErrorCode::config);
        CHECK(code_of([] { parse_scenario_text("scheduler = tmrs\nlayers = 1\n"); }) == ErrorCode::ok);
    }
    SECTION("Unknown key is named with its line")
    {
        const auto msg = message_of([] { parse_scenario_text("layers = 2\nbeam_sweep = 7\n", "cfg.txt"); });
        CHECK(msg.find("beam_sweep") != std::string::npos);
        CHECK(msg.find("cfg.txt:2") != std::string::npos);
    }
    SECTION("Malformed lines and values carry line info")
    {
        CHECK(message_of([] { parse_scenario_text("\n\nlayers 4\n", "f"); }).find("f:3") != std::string::npos);
        CHECK(message_of([] { parse_scenario_text("layers = four\n", "f"); }).find("f:1") != std::string::npos);
        CHECK(message_of([] { parse_scenario_text("radius_m = 1e999\n", "f"); }).find("radius_m") !=
              std::string::npos);
        CHECK(code_of([] { parse_scenario_text("harq = maybe\n"); }) == ErrorCode::config);
        CHECK(code_of([] { parse_scenario_text("bf = XBF\n"); }) == ErrorCode::config);
        CHECK(code_of([] { parse_scenario_text("layers =\n"); }) == ErrorCode::config);
        CHECK(code_of([] { parse_scenario_text("= 3\n"); }) == ErrorCode::config);
        CHECK(code_of([] { parse_scenario_text("seed = -1\n"); }) == ErrorCode::config);
        CHECK(code_of([] { parse_scenario_text("preset = nope\n"); }) == ErrorCode::config);
    }
    SECTION("Duplicate keys")
    {
        CHECK(message_of([] { parse_scenario_text("runs = 2\nruns = 3\n", "f"); }).find("f:2") !=
              std::string::npos);
    }
    SECTION("Semantic validation")
    {
        CHECK(code_of([] { parse_scenario_text("radius_m = 5\n"); }) == ErrorCode::config);
        CHECK(code_of([] { parse_scenario_text("runs = 0\n"); }) == ErrorCode::config);
    }
    SECTION("Missing file")
    {
        CHECK(code_of([] { parse_scenario("/nonexistent/mmwsim.cfg"); }) == ErrorCode::io);
    }
}

TEST_CASE("Scenario files - config hash")
{
    sim::Scenario a;
    sim::Scenario b;
    CHECK(config_hash(a) == config_hash(b));
    b.phy.noise_figure_db = 5.5;
    CHECK(config_hash(a) != config_hash(b));
    CHECK(hex64(0x1fULL) == "000000000000001f");
}

TEST_CASE("Presets - configuration matrices")
{
    sim::Scenario base;
    base.runs = 3;
    base.seed = 9;
    CHECK(preset_configs("bf-comparison", base).size() == 6);
    CHECK(preset_configs("sched-comparison", base).size() == 4);
    CHECK(preset_configs("delay-retx", base).size() == 8);
    CHECK(preset_configs("throughput-delay", base).size() == 6);
    CHECK(preset_configs("apps", base).size() == 9);
    CHECK(code_of([] { preset_configs("everything"); }) == ErrorCode::config);

    for (const auto &name : preset_names())
        for (const auto &c : preset_configs(name, base))
        {
            CHECK(c.scenario.runs == 3);
            CHECK(c.scenario.seed == 9);
            if (c.scenario.scheduler == mac::SchedulerKind::tmrs)
                CHECK(c.scenario.layers == 1);
        }

    for (const auto &c : preset_configs("bf-comparison", base))
    {
        CHECK(c.scenario.scheduler == mac::SchedulerKind::pmrs);
        CHECK(c.scenario.rlc.mode == rlc::RlcMode::um);
        CHECK_FALSE(c.scenario.harq);
        CHECK(c.scenario.traffic == traffic::Profile::udp_slow);
    }
    const auto bfc = preset_configs("bf-comparison", base);
    CHECK(bfc[0].label == "gbf-1");
    CHECK(bfc[5].label == "smbf-4");
    CHECK(bfc[5].scenario.bf == bf::BfKind::smbf);
    CHECK(bfc[5].scenario.layers == 4);

    for (const auto &c : preset_configs("sched-comparison", base))
    {
        CHECK(c.scenario.traffic == traffic::Profile::udp_fast);
        CHECK(c.scenario.rlc.mode == rlc::RlcMode::um);
        CHECK_FALSE(c.scenario.harq);
    }
    int harq = 0;
    int am = 0;
    for (const auto &c : preset_configs("delay-retx", base))
    {
        harq += c.scenario.harq ? 1 : 0;
        am += c.scenario.rlc.mode == rlc::RlcMode::am ? 1 : 0;
    }
    CHECK(harq == 4);
    CHECK(am == 4);
    for (const auto &c : preset_configs("apps", base))
    {
        CHECK(c.scenario.rlc.mode == rlc::RlcMode::am);
        CHECK(c.scenario.harq);
    }
}

TEST_CASE("CDF rows")
{
    SECTION("Full output")
    {
        std::ostringstream os;
        write_cdf_rows(os, "a", {1.0, 2.0, 3.0}, 0);
        CHECK(os.str() == "a,1,0.333333333\na,2,0.666666667\na,3,1\n");
    }
    SECTION("Thinned rows are exact order statistics")
    {
        std::vector<double> s;
        for (int i = 0; i < 10; ++i)
            s.push_back(i);
        std::ostringstream os;
        write_cdf_rows(os, "x", s, 4);
        CHECK(os.str() == "x,2,0.3\nx,4,0.5\nx,7,0.8\nx,9,1\n");
    }
    SECTION("Single sample and sorted input")
    {
        std::ostringstream a;
        sim::emit_cdf(a, {4.25});
        CHECK(a.str() == "value,cdf\n4.25,1\n");
        std::ostringstream b;
        std::ostringstream c;
        sim::emit_cdf(b, {1.0, 2.0, 5.0});
        sim::emit_cdf(c, {5.0, 1.0, 2.0});
        CHECK(b.str() == c.str());
        std::ostringstream e;
        sim::emit_cdf(e, {});
        CHECK(e.str() == "value,cdf\n");
    }
}

TEST_CASE("Campaign - bundle and manifest reproduction")
{
    const auto configs = tiny_campaign();
    const auto manifest = make_manifest("scenario", "tiny", configs, 50);
    CHECK(manifest.runs == 2);

    const auto dir_a = scratch("bundle_a");
    const auto dir_b = scratch("bundle_b");
    int last = 0;
    const auto results = execute_manifest(manifest, dir_a.string(), 1, [&](int done, int total) {
        CHECK(done == last + 1);
        CHECK(total == 4);
        last = done;
    });
    CHECK(last == 4);
    REQUIRE(results.size() == 2);
    CHECK(results[0].label == "pmrs");
    CHECK(results[1].reports.size() == 2);
    CHECK(results[1].reports[1].run == 1);

    const auto reloaded = load_manifest((dir_a / "manifest.json").string());
    CHECK(reloaded.hash() == manifest.hash());
    CHECK(reloaded.cdf_points == 50);
    execute_manifest(reloaded, dir_b.string(), 3);

    const char *files[] = {"metrics.csv",    "summary.csv",    "cdf_delay_dl.csv", "cdf_delay_ul.csv",
                           "cdf_sinr_dl.csv", "cdf_sinr_ul.csv", "cdf_bler_dl.csv",  "cdf_bler_ul.csv",
                           "manifest.json"};
    for (const char *f : files)
    {
        INFO(f);
        const auto a = slurp(dir_a / f);
        CHECK_FALSE(a.empty());
        CHECK(a == slurp(dir_b / f));
    }

    // 2 configs x 2 runs x 2 directions plus the header
    const auto metrics = slurp(dir_a / "metrics.csv");
    CHECK(std::count(metrics.begin(), metrics.end(), '\n') == 9);
    const auto summary = slurp(dir_a / "summary.csv");
    CHECK(std::count(summary.begin(), summary.end(), '\n') == 5);
    CHECK(slurp(dir_a / "cdf_sinr_dl.csv").rfind("config,value,cdf\n", 0) == 0);

    std::filesystem::remove_all(dir_a);
    std::filesystem::remove_all(dir_b);
}

TEST_CASE("Campaign - manifest tampering is detected")
{
    const auto manifest = make_manifest("scenario", "tiny", tiny_campaign());
    std::string json = manifest.to_json();
    const auto pos = json.find("layers = 4");
    REQUIRE(pos != std::string::npos);
    json.replace(pos, 10, "layers = 2");
    CHECK(code_of([&] { Manifest::from_json(json); }) == ErrorCode::config);
    CHECK(code_of([] { Manifest::from_json("{not json"); }) == ErrorCode::config);
}

TEST_CASE("Campaign - runtime errors propagate")
{
    sim::Scenario bad;
    bad.runs = 1;
    bad.layers = 0;
    CHECK(code_of([&] { run_campaign({{"bad", bad}}, 2); }) == ErrorCode::config);
}
