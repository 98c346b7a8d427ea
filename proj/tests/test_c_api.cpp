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

#include "mmwsim.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace
{

std::string get(const mmwsim_scenario *s, const char *key)
{
    size_t needed = 0;
    REQUIRE(mmwsim_scenario_get(s, key, nullptr, 0, &needed) == MMWSIM_OK);
    std::string out(needed, '\0');
    REQUIRE(mmwsim_scenario_get(s, key, out.data(), out.size(), nullptr) == MMWSIM_OK);
    out.pop_back();
    return out;
}

std::string slurp(const std::filesystem::path &p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

mmwsim_scenario *tiny_scenario()
{
    mmwsim_scenario *s = nullptr;
    REQUIRE(mmwsim_scenario_parse_text("ue_count = 2\n"
                                       "duration_s = 0.06\n"
                                       "warmup_s = 0.01\n"
                                       "runs = 2\n"
                                       "bf = cbf\n"
                                       "traffic = udp-slow\n",
                                       &s) == MMWSIM_OK);
    return s;
}

void count_progress(int done, int total, void *user)
{
    auto *calls = static_cast<std::vector<std::pair<int, int>> *>(user);
    calls->emplace_back(done, total);
}

} // namespace

TEST_CASE("C API - version and presets")
{
    CHECK(std::string(mmwsim_version()) == "1.0.0");
    REQUIRE(mmwsim_preset_count() == 5);
    CHECK(std::string(mmwsim_preset_name(0)) == "bf-comparison");
    CHECK(std::string(mmwsim_preset_name(4)) == "apps");
    CHECK(mmwsim_preset_name(5) == nullptr);
    CHECK(mmwsim_preset_name(-1) == nullptr);
}

TEST_CASE("C API - scenario handles")
{
    mmwsim_scenario *s = nullptr;
    REQUIRE(mmwsim_scenario_new(&s) == MMWSIM_OK);
    CHECK(get(s, "ue_count") == "7");
    CHECK(get(s, "scheduler") == "pmrs");
    CHECK(get(s, "numerology") == "2");

    SECTION("Setters and validation")
    {
        CHECK(mmwsim_scenario_set(s, "layers", "3") == MMWSIM_OK);
        CHECK(get(s, "layers") == "3");
        CHECK(mmwsim_scenario_set(s, "output_dir", "x/y") == MMWSIM_OK);
        CHECK(get(s, "output_dir") == "x/y");
        CHECK(mmwsim_scenario_set(s, "warp_drive", "1") == MMWSIM_E_CONFIG);
        CHECK(std::string(mmwsim_last_error()).find("warp_drive") != std::string::npos);
        CHECK(mmwsim_scenario_set(s, "layers", "x") == MMWSIM_E_CONFIG);
        CHECK(mmwsim_scenario_set(s, "scheduler", "tmrs") == MMWSIM_OK);
        CHECK(mmwsim_scenario_validate(s) == MMWSIM_E_CONFIG);
        CHECK(std::string(mmwsim_last_error()).find("layers") != std::string::npos);
        CHECK(mmwsim_scenario_set(s, "layers", "1") == MMWSIM_OK);
        CHECK(mmwsim_scenario_validate(s) == MMWSIM_OK);
        CHECK(std::string(mmwsim_last_error()).empty());
    }
    SECTION("Buffers")
    {
        char small[2];
        size_t needed = 0;
        CHECK(mmwsim_scenario_get(s, "radius_m", small, sizeof small, &needed) == MMWSIM_E_INVALID_ARGUMENT);
        CHECK(needed == 4); // "100" plus the terminator
        CHECK(mmwsim_scenario_render(s, nullptr, 0, &needed) == MMWSIM_OK);
        std::string text(needed, '\0');
        CHECK(mmwsim_scenario_render(s, text.data(), text.size(), nullptr) == MMWSIM_OK);
        CHECK(text.find("ue_count = 7\n") != std::string::npos);
    }
    SECTION("Null arguments")
    {
        CHECK(mmwsim_scenario_new(nullptr) == MMWSIM_E_INVALID_ARGUMENT);
        CHECK(mmwsim_scenario_set(nullptr, "layers", "1") == MMWSIM_E_INVALID_ARGUMENT);
        CHECK(mmwsim_scenario_get(s, nullptr, nullptr, 0, nullptr) == MMWSIM_E_INVALID_ARGUMENT);
    }
    mmwsim_scenario_free(s);
}

TEST_CASE("C API - parse errors")
{
    mmwsim_scenario *s = reinterpret_cast<mmwsim_scenario *>(0x1);
    CHECK(mmwsim_scenario_parse_text("scheduler = tmrs\nlayers = 4\n", &s) == MMWSIM_E_CONFIG);
    CHECK(s == nullptr);
    CHECK(mmwsim_scenario_parse_text("layers 4\n", &s) == MMWSIM_E_CONFIG);
    CHECK(std::string(mmwsim_last_error()).find(":1:") != std::string::npos);
    CHECK(mmwsim_scenario_parse_file("/nonexistent/file.cfg", &s) == MMWSIM_E_IO);
    mmwsim_campaign *c = nullptr;
    CHECK(mmwsim_campaign_from_preset("nope", nullptr, &c) == MMWSIM_E_CONFIG);
    CHECK(c == nullptr);
    CHECK(mmwsim_campaign_from_manifest("/nonexistent/manifest.json", &c) == MMWSIM_E_IO);
}

TEST_CASE("C API - campaign lifecycle")
{
    mmwsim_scenario *s = tiny_scenario();
    mmwsim_campaign *c = nullptr;
    REQUIRE(mmwsim_campaign_from_scenario(s, "tiny", &c) == MMWSIM_OK);
    mmwsim_scenario_free(s);

    int n = 0;
    REQUIRE(mmwsim_campaign_config_count(c, &n) == MMWSIM_OK);
    CHECK(n == 1);
    char label[16];
    CHECK(mmwsim_campaign_config_label(c, 0, label, sizeof label, nullptr) == MMWSIM_OK);
    CHECK(std::string(label) == "tiny");

    mmwsim_summary sum{};
    CHECK(mmwsim_campaign_summary(c, 0, MMWSIM_DL, &sum) == MMWSIM_E_PROTOCOL);
    CHECK(mmwsim_campaign_write(c, "unused") == MMWSIM_E_PROTOCOL);

    std::vector<std::pair<int, int>> calls;
    REQUIRE(mmwsim_campaign_set_workers(c, 2) == MMWSIM_OK);
    REQUIRE(mmwsim_campaign_set_cdf_points(c, 0) == MMWSIM_OK);
    REQUIRE(mmwsim_campaign_run(c, count_progress, &calls) == MMWSIM_OK);
    REQUIRE(calls.size() == 2);
    CHECK(calls.back() == std::make_pair(2, 2));

    for (auto d : {MMWSIM_DL, MMWSIM_UL})
    {
        REQUIRE(mmwsim_campaign_summary(c, 0, d, &sum) == MMWSIM_OK);
        CHECK(sum.runs == 2);
        CHECK(sum.invariants_ok == 1);
        // two users at 1500 B every 1.5 ms
        CHECK(sum.offered_bps == Catch::Approx(16e6).epsilon(0.05));
        CHECK(sum.throughput_bps <= sum.offered_bps * 1.05);
        CHECK(sum.tb_count > 0);
        CHECK(sum.delay_p50_ms >= 0.25);

        size_t count = 0;
        REQUIRE(mmwsim_campaign_samples(c, 0, d, MMWSIM_METRIC_SINR_DB, nullptr, 0, &count) == MMWSIM_OK);
        REQUIRE(count > 0);
        std::vector<double> v(count);
        REQUIRE(mmwsim_campaign_samples(c, 0, d, MMWSIM_METRIC_SINR_DB, v.data(), v.size(), nullptr) ==
                MMWSIM_OK);
        CHECK(std::is_sorted(v.begin(), v.end()));
        CHECK(v[(count + 1) / 2 - 1] == sum.sinr_p50_db);
    }
    CHECK(mmwsim_campaign_summary(c, 1, MMWSIM_DL, &sum) == MMWSIM_E_INVALID_ARGUMENT);
    CHECK(mmwsim_campaign_samples(c, 0, MMWSIM_DL, static_cast<mmwsim_metric>(7), nullptr, 0, nullptr) ==
          MMWSIM_E_INVALID_ARGUMENT);

    const auto dir_a = std::filesystem::temp_directory_path() / "mmwsim_capi_a";
    const auto dir_b = std::filesystem::temp_directory_path() / "mmwsim_capi_b";
    std::filesystem::remove_all(dir_a);
    std::filesystem::remove_all(dir_b);
    REQUIRE(mmwsim_campaign_write(c, dir_a.string().c_str()) == MMWSIM_OK);
    mmwsim_campaign_free(c);

    mmwsim_campaign *again = nullptr;
    REQUIRE(mmwsim_campaign_from_manifest((dir_a / "manifest.json").string().c_str(), &again) == MMWSIM_OK);
    REQUIRE(mmwsim_campaign_run(again, nullptr, nullptr) == MMWSIM_OK);
    REQUIRE(mmwsim_campaign_write(again, dir_b.string().c_str()) == MMWSIM_OK);
    mmwsim_campaign_free(again);
    for (const char *f : {"metrics.csv", "summary.csv", "cdf_sinr_dl.csv", "cdf_delay_ul.csv", "cdf_bler_ul.csv"})
    {
        INFO(f);
        CHECK(slurp(dir_a / f) == slurp(dir_b / f));
    }
    std::filesystem::remove_all(dir_a);
    std::filesystem::remove_all(dir_b);
}

TEST_CASE("C API - presets carry the base scenario")
{
    mmwsim_scenario *base = tiny_scenario();
    mmwsim_campaign *c = nullptr;
    REQUIRE(mmwsim_campaign_from_preset("delay-retx", base, &c) == MMWSIM_OK);
    int n = 0;
    REQUIRE(mmwsim_campaign_config_count(c, &n) == MMWSIM_OK);
    CHECK(n == 8);
    size_t needed = 0;
    CHECK(mmwsim_campaign_config_label(c, 8, nullptr, 0, &needed) == MMWSIM_E_INVALID_ARGUMENT);
    mmwsim_campaign_free(c);
    mmwsim_scenario_free(base);
}

TEST_CASE("C API - feedback accounting")
{
    long long bits = 0;
    REQUIRE(mmwsim_feedback_bits(MMWSIM_BF_FMBF, 32, 4, 3300, 64, &bits) == MMWSIM_OK);
    CHECK(bits == 1024);
    REQUIRE(mmwsim_feedback_bits(MMWSIM_BF_FMBF, 3, 4, 3300, 64, &bits) == MMWSIM_OK);
    CHECK(bits == 96);
    REQUIRE(mmwsim_feedback_bits(MMWSIM_BF_SMBF, 3, 4, 100, 64, &bits) == MMWSIM_OK);
    CHECK(bits == 9600);
    CHECK(mmwsim_feedback_bits(MMWSIM_BF_SMBF, 0, 4, 100, 64, &bits) == MMWSIM_E_INVALID_ARGUMENT);
    CHECK(mmwsim_feedback_bits(static_cast<mmwsim_bf>(9), 3, 4, 100, 64, &bits) == MMWSIM_E_INVALID_ARGUMENT);
}
