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

#include "mmwsim/traffic.hpp"

#include <sstream>

using namespace mmwsim;
using namespace mmwsim::traffic;

TEST_CASE("Traffic - CBR")
{
    SECTION("Offered load arithmetic")
    {
        const auto fast = flow_for(Profile::udp_fast);
        const auto slow = flow_for(Profile::udp_slow);
        CHECK(7.0 * offered_rate_bps(fast) == Catch::Approx(560e6).epsilon(1e-12));
        CHECK(offered_rate_bps(slow) == Catch::Approx(8e6).epsilon(1e-12));
        CHECK(7.0 * offered_rate_bps(slow) == Catch::Approx(56e6).epsilon(1e-12));
        CHECK(offered_rate_bps(flow_for(Profile::adaptive)) == 0.0);
    }

    SECTION("Exact timestamps, first packet at zero")
    {
        CbrSource s(150 * kNsPerUs, 1500);
        auto first = s.tick(0);
        REQUIRE(first.size() == 1);
        CHECK(first[0] == 0);
        CHECK(s.tick(0).empty());
        auto next = s.tick(250 * kNsPerUs);
        CHECK(next == std::vector<TimeNs>{150 * kNsPerUs});
    }

    SECTION("Count over a horizon is floor(T / interval) +- 1")
    {
        for (TimeNs interval : {150 * kNsPerUs, 1500 * kNsPerUs, 777 * kNsPerUs})
        {
            CbrSource s(interval, 1500);
            std::size_t count = 0;
            const TimeNs horizon = 2 * kNsPerSecond;
            for (TimeNs t = 0; t < horizon; t += 250 * kNsPerUs)
                count += s.tick(t).size();
            const auto expected = static_cast<long>(horizon / interval);
            CHECK(std::abs(static_cast<long>(count) - expected) <= 1);
        }
    }

    SECTION("Invalid parameters")
    {
        CHECK_THROWS_AS(CbrSource(0, 1500), Error);
        CHECK_THROWS_AS(parse_profile("tcp"), Error);
        CHECK(parse_profile("udp-fast") == Profile::udp_fast);
    }
}

TEST_CASE("Traffic - adaptive source")
{
    AdaptiveSource src;
    CHECK(src.window() == 10.0);
    CHECK(src.releasable() == 10);

    SECTION("A full window acked in slow start doubles it")
    {
        for (PacketId i = 1; i <= 10; ++i)
            src.on_send(i, 0);
        CHECK(src.releasable() == 0);
        for (PacketId i = 1; i <= 10; ++i)
            CHECK(src.on_ack(i, 5 * kNsPerMs));
        CHECK(src.window() == 20.0);
        CHECK(src.releasable() == 20);
        CHECK(src.srtt() == 5 * kNsPerMs);
    }

    SECTION("Loss halves the window once per episode")
    {
        for (PacketId i = 1; i <= 10; ++i)
            src.on_send(i, 0);
        CHECK(src.on_loss(3));
        CHECK(src.threshold() == 5.0);
        CHECK(src.window() == 5.0);
        CHECK(src.on_loss(4));
        CHECK(src.window() == 5.0);
        CHECK_FALSE(src.on_loss(4)); // idempotent
        CHECK(src.window() == 5.0);
        src.on_send(11, 0);
        CHECK(src.on_loss(11));
        CHECK(src.window() == 2.5);
    }

    SECTION("Congestion avoidance is additive")
    {
        for (PacketId i = 1; i <= 10; ++i)
            src.on_send(i, 0);
        src.on_loss(1);
        const double w = src.window();
        for (PacketId i = 2; i <= 6; ++i)
            src.on_ack(i, kNsPerMs);
        CHECK(src.window() > w);
        CHECK(src.window() < w + 1.0 + 1e-12);
    }

    SECTION("RTO collapses to one packet")
    {
        for (PacketId i = 1; i <= 10; ++i)
            src.on_send(i, 0);
        src.on_rto();
        CHECK(src.window() == 1.0);
        CHECK(src.threshold() == 5.0);
        CHECK(src.releasable() == 0);
    }

    SECTION("RTO floor and scaling")
    {
        CHECK(src.rto() == 200 * kNsPerMs);
        src.on_send(1, 0);
        src.on_ack(1, 300 * kNsPerMs);
        CHECK(src.rto() == 600 * kNsPerMs);
    }

    SECTION("Unknown ack ignored")
    {
        CHECK_FALSE(src.on_ack(77, kNsPerMs));
        CHECK(src.window() == 10.0);
    }

    SECTION("In flight never exceeds the window")
    {
        AdaptiveSource s({10.0, 40.0});
        PacketId next = 1;
        std::uint64_t lcg = 7;
        std::vector<PacketId> flight;
        for (int step = 0; step < 2000; ++step)
        {
            const auto before = s.in_flight();
            for (int r = s.releasable(); r > 0; --r)
            {
                s.on_send(next, step);
                flight.push_back(next++);
            }
            if (s.in_flight() > before)
                CHECK(static_cast<double>(s.in_flight()) <= s.window() + 1e-9);
            if (flight.empty())
                continue;
            lcg = lcg * 6364136223846793005ULL + 1442695040888963407ULL;
            const PacketId id = flight.front();
            flight.erase(flight.begin());
            if ((lcg >> 40) % 50 == 0)
                s.on_loss(id);
            else
                s.on_ack(id, kNsPerMs);
            CHECK(s.window() >= 1.0);
            CHECK(s.window() <= 40.0);
        }
    }
}

TEST_CASE("Traffic - packet trace")
{
    PacketRecord p;
    p.id = 5;
    p.flow = {2, Direction::uplink};
    p.bytes = 1500;
    p.created = 100;
    p.first_tx = 250000;
    p.delivered = 500000;
    std::ostringstream os;
    write_packet_header(os);
    write_packet_row(os, p);
    CHECK(os.str() == "id,user,direction,bytes,created_ns,first_tx_ns,outcome,time_ns,harq_attempts,am_retx\n"
                      "5,2,ul,1500,100,250000,delivered,500000,0,0\n");
    CHECK(p.delay_ms() == Catch::Approx(0.4999));
}
