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

#include "mmwsim/engine.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

using namespace mmwsim;
using namespace mmwsim::sim;

namespace
{

Scenario small(mac::SchedulerKind kind, int layers, bf::BfKind bf, double duration = 0.2)
{
    Scenario sc;
    sc.scheduler = kind;
    sc.layers = layers;
    sc.bf = bf;
    sc.duration_s = duration;
    sc.warmup_s = 0.02;
    return sc;
}

std::vector<std::string> split(const std::string &line)
{
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ','))
        out.push_back(cell);
    return out;
}

} // namespace

TEST_CASE("Engine - UE drops")
{
    SECTION("Uniform over the disc area")
    {
        const double r = 100.0;
        auto pts = drop_ues(3, 100000, r, 0.0);
        double acc = 0.0;
        for (const auto &p : pts)
        {
            const double d2 = p.x * p.x + p.y * p.y;
            CHECK(d2 <= r * r);
            acc += d2;
        }
        const double mean = acc / static_cast<double>(pts.size());
        CHECK(std::abs(mean - r * r / 2.0) < 0.01 * r * r / 2.0);
    }

    SECTION("Minimum distance and height")
    {
        for (const auto &p : drop_ues(4, 5000, 100.0, 10.0, 1.6))
        {
            CHECK(std::hypot(p.x, p.y) >= 10.0);
            CHECK(p.z == 1.6);
        }
    }

    SECTION("Deterministic per seed")
    {
        auto a = drop_ues(9, 7, 100.0);
        auto b = drop_ues(9, 7, 100.0);
        auto c = drop_ues(10, 7, 100.0);
        for (std::size_t i = 0; i < a.size(); ++i)
        {
            CHECK(a[i].x == b[i].x);
            CHECK(a[i].y == b[i].y);
        }
        CHECK(a[0].x != c[0].x);
    }

    CHECK(drop_ues(1, 0, 100.0).empty());
    CHECK_THROWS_AS(drop_ues(1, 3, 100.0, 100.0), Error);
    CHECK_THROWS_AS(drop_ues(1, 3, 0.0, 0.0), Error);
}

TEST_CASE("Engine - event queue")
{
    EventQueue q;
    q.push(30, EventKind::am_timer, 0, 1);
    q.push(10, EventKind::am_timer, 0, 2);
    q.push(10, EventKind::am_timer, 1, 3);
    q.push(20, EventKind::am_timer, 0, 4);
    REQUIRE(q.size() == 4);
    CHECK(q.next_time() == 10);
    std::vector<std::uint64_t> ids;
    while (!q.empty())
        ids.push_back(q.pop().id);
    CHECK(ids == std::vector<std::uint64_t>{2, 3, 4, 1});
    CHECK(q.causality_violations() == 0);

    // pushing into the past is recorded, not hidden
    q.push(5, EventKind::am_timer, 0, 9);
    q.pop();
    CHECK(q.causality_violations() == 1);
}

TEST_CASE("Engine - scenario validation")
{
    Scenario sc;
    CHECK_NOTHROW(sc.validate());
    CHECK(sc.slot_count() == 8000);
    sc.scheduler = mac::SchedulerKind::tmrs;
    CHECK_THROWS_AS(sc.validate(), Error);
    try
    {
        sc.validate();
    }
    catch (const Error &e)
    {
        CHECK(e.code() == ErrorCode::config);
        CHECK(std::string(e.what()).find("layers") != std::string::npos);
    }
    sc.layers = 1;
    CHECK_NOTHROW(sc.validate());
    sc.duration_s = -1.0;
    CHECK_THROWS_AS(sc.validate(), Error);

    Scenario f;
    f.traffic = traffic::Profile::udp_fast;
    CHECK(f.flow().interval == 150 * kNsPerUs);
    f.interval_override = 300 * kNsPerUs;
    CHECK(f.flow().interval == 300 * kNsPerUs);
}

TEST_CASE("Engine - empty and trivial runs")
{
    SECTION("Zero duration")
    {
        Scenario sc = small(mac::SchedulerKind::pmrs, 4, bf::BfKind::smbf, 0.0);
        auto r = run(sc);
        CHECK(r.dl.tb_count == 0);
        CHECK(r.ul.packets_generated == 0);
        CHECK(r.invariants.slots == 0);
        CHECK(r.dl.throughput_bps == 0.0);
    }

    SECTION("No users")
    {
        Scenario sc = small(mac::SchedulerKind::amrs, 4, bf::BfKind::smbf);
        sc.ue_count = 0;
        auto r = run(sc);
        CHECK(r.dl.tb_count == 0);
        CHECK(r.invariants.slots == sc.slot_count());
    }

    SECTION("Invalid scenario is rejected")
    {
        Scenario sc = small(mac::SchedulerKind::tmrs, 4, bf::BfKind::cbf);
        CHECK_THROWS_AS(run(sc), Error);
    }
}

TEST_CASE("Engine - single close user is served in full")
{
    Scenario sc = small(mac::SchedulerKind::pmrs, 1, bf::BfKind::cbf, 0.5);
    sc.ue_count = 1;
    sc.radius_m = 30.0;
    auto r = run(sc);
    for (auto d : {Direction::downlink, Direction::uplink})
    {
        const auto &m = r.at(d);
        CHECK(m.tb_outage == 0);
        CHECK(m.packets_dropped == 0);
        // at most the packets still on the way at the end are missing
        CHECK(m.offered_bits - m.delivered_bits <= 2 * 8 * 1500);
        const double window = sc.duration_s - sc.warmup_s;
        CHECK(m.throughput_bps == Catch::Approx(8e6).epsilon(0.01));
        CHECK(m.offered_bits / window == Catch::Approx(8e6).epsilon(0.01));
        for (double x : m.delay_ms)
            CHECK(x >= 0.25 - 1e-12);
    }
}

TEST_CASE("Engine - determinism")
{
    Scenario sc = small(mac::SchedulerKind::pmrs, 4, bf::BfKind::smbf, 0.1);
    sc.traffic = traffic::Profile::udp_fast;
    sc.harq = true;
    sc.rlc.mode = rlc::RlcMode::am;
    std::ostringstream p1, k1, p2, k2;
    auto a = run(sc, 2, {&p1, &k1});
    auto b = run(sc, 2, {&p2, &k2});
    CHECK(p1.str() == p2.str());
    CHECK(k1.str() == k2.str());
    CHECK(a.dl.sinr_db == b.dl.sinr_db);
    CHECK(a.ul.delay_ms == b.ul.delay_ms);
    CHECK(a.dl.delivered_bits == b.dl.delivered_bits);

    auto c = run(sc, 3);
    CHECK(c.dl.sinr_db != a.dl.sinr_db);

    // same drop for every configuration of one run index
    Scenario other = sc;
    other.bf = bf::BfKind::cbf;
    other.harq = false;
    auto d = run(other, 2);
    CHECK(d.dl.packets_generated == a.dl.packets_generated);
}

TEST_CASE("Engine - invariants across configurations")
{
    struct Config
    {
        mac::SchedulerKind kind;
        int layers;
        bf::BfKind bf;
    };
    const std::vector<Config> configs{
        {mac::SchedulerKind::tmrs, 1, bf::BfKind::cbf},  {mac::SchedulerKind::pmrs, 1, bf::BfKind::gbf},
        {mac::SchedulerKind::pmrs, 4, bf::BfKind::fmbf}, {mac::SchedulerKind::pmrs, 4, bf::BfKind::smbf},
        {mac::SchedulerKind::amrs, 4, bf::BfKind::smbf}, {mac::SchedulerKind::amrs, 2, bf::BfKind::cbf},
    };
    for (const auto &c : configs)
        for (auto profile : {traffic::Profile::udp_fast, traffic::Profile::adaptive})
        {
            Scenario sc = small(c.kind, c.layers, c.bf, 0.15);
            sc.traffic = profile;
            sc.harq = true;
            sc.rlc.mode = rlc::RlcMode::am;
            auto r = run(sc, 1);
            INFO(mac::to_string(c.kind) << " layers " << c.layers << " " << bf::to_string(c.bf) << " "
                                        << traffic::to_string(profile));
            CHECK(r.invariants.ok());
            CHECK(r.invariants.slots == sc.slot_count());
            for (auto d : {Direction::downlink, Direction::uplink})
            {
                const auto &m = r.at(d);
                CHECK(m.conserved());
                CHECK(m.delivered_bits <= m.offered_bits);
                CHECK(m.tb_count > 0);
                CHECK(m.harq_max_gap_slots <= 1);
                for (double x : m.delay_ms)
                    CHECK(x >= 0.25 - 1e-12);
                for (double b : m.bler)
                {
                    CHECK(b >= 0.0);
                    CHECK(b <= 1.0);
                }
                if (c.kind != mac::SchedulerKind::pmrs)
                    CHECK(m.padding_symbols == 0);
            }
        }
}

TEST_CASE("Engine - AM retransmissions wait for the reordering timer")
{
    Scenario sc = small(mac::SchedulerKind::pmrs, 4, bf::BfKind::cbf, 0.3);
    sc.traffic = traffic::Profile::udp_fast;
    sc.rlc.mode = rlc::RlcMode::am;
    std::ostringstream packets;
    auto r = run(sc, 0, {nullptr, &packets});
    REQUIRE(r.dl.am_retx + r.ul.am_retx > 0);

    std::istringstream in(packets.str());
    std::string line;
    std::getline(in, line);
    const auto header = split(line);
    REQUIRE(header.size() == 10);
    CHECK(header[6] == "outcome");
    long delivered_after_retx = 0;
    while (std::getline(in, line))
    {
        const auto row = split(line);
        if (row[6] != "delivered" || std::stoi(row[9]) == 0)
            continue;
        ++delivered_after_retx;
        const double delay_ms = (std::stod(row[7]) - std::stod(row[4])) / 1e6;
        CHECK(delay_ms >= 10.0);
    }
    CHECK(delivered_after_retx > 0);
}

TEST_CASE("Engine - plan trace")
{
    Scenario sc = small(mac::SchedulerKind::pmrs, 4, bf::BfKind::smbf, 0.01);
    sc.traffic = traffic::Profile::udp_fast;
    std::ostringstream plan;
    run(sc, 0, {&plan, nullptr});
    std::istringstream in(plan.str());
    std::string line;
    std::getline(in, line);
    CHECK(line == "slot,layer,user,start,length,direction,bf_mode,mcs,is_retx,padding_symbols");
    int rows = 0;
    while (std::getline(in, line))
    {
        const auto row = split(line);
        REQUIRE(row.size() == 10);
        CHECK(std::stoi(row[3]) >= 1);
        CHECK(std::stoi(row[3]) + std::stoi(row[4]) - 1 <= 12);
        CHECK(row[6] == "mmse");
        ++rows;
    }
    CHECK(rows > 0);
}

TEST_CASE("Metrics - aggregation and CDFs")
{
    SECTION("emit_cdf")
    {
        std::ostringstream os;
        emit_cdf(os, {3.0, 1.0, 2.0});
        CHECK(os.str() == "value,cdf\n1,0.333333333\n2,0.666666667\n3,1\n");
        std::ostringstream empty;
        emit_cdf(empty, {});
        CHECK(empty.str() == "value,cdf\n");
    }

    SECTION("percentile and cdf_at")
    {
        const std::vector<double> v{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
        CHECK(percentile(v, 0.8) == 8.0);
        CHECK(percentile(v, 0.05) == 1.0);
        CHECK(percentile(v, 1.0) == 10.0);
        CHECK(std::isnan(percentile({}, 0.5)));
        CHECK(cdf_at(v, 2.5) == 0.2);
        CHECK(cdf_at(v, 10.0) == 1.0);
        CHECK(cdf_at(v, 0.0) == 0.0);
    }

    SECTION("aggregate")
    {
        CHECK_THROWS_AS(aggregate({}), Error);
        MetricsReport r;
        r.duration_s = 1.1;
        r.warmup_s = 0.1;
        r.dl.throughput_bps = 5e6;
        r.dl.offered_bits = 8'000'000;
        r.dl.delay_ms = {1.0, 3.0};
        r.dl.tb_count = 10;
        r.dl.tb_outage = 1;
        r.dl.tb_clear = 8;
        r.dl.padding_symbols = 2;
        r.dl.allocated_symbols = 6;
        auto one = aggregate({r}, "x");
        CHECK(one.label == "x");
        CHECK(one.runs == 1);
        CHECK(one.dl.mean_throughput_bps == 5e6);
        CHECK(one.dl.stderr_throughput_bps == 0.0);
        CHECK(one.dl.mean_delay_ms == 2.0);
        CHECK(one.dl.offered_bps == Catch::Approx(8e6));
        CHECK(one.dl.outage_fraction() == 0.1);
        CHECK(one.dl.step_fraction() == 0.9);
        CHECK(one.padding_ratio == 0.25);

        MetricsReport s = r;
        s.dl.throughput_bps = 7e6;
        s.dl.delay_ms = {4.0};
        auto two = aggregate({r, s});
        CHECK(two.dl.mean_throughput_bps == 6e6);
        CHECK(two.dl.stderr_throughput_bps == Catch::Approx(1e6));
        CHECK(two.dl.mean_delay_ms == 3.0);
        CHECK(two.dl.delay_ms.size() == 3);
        CHECK(two.dl.tb_count == 20);
    }
}
