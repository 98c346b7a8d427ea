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

#include "mmwsim/array_geometry.hpp"
#include "mmwsim/random.hpp"

#include <sstream>

using namespace mmwsim;
using namespace mmwsim::array;

TEST_CASE("Array geometry - response vectors")
{
    SECTION("Boresight of a 2x2 array is flat")
    {
        auto a = array_response({2, 2}, AnglePair(0.0, 0.0));
        REQUIRE(a.size() == 4);
        for (int i = 0; i < 4; ++i)
        {
            CHECK(std::abs(a[i].real() - 0.5) < 1e-15);
            CHECK(std::abs(a[i].imag()) < 1e-15);
        }
    }

    SECTION("2x1 array at sin(az) = 1")
    {
        auto a = array_response({2, 1}, AnglePair(kPi / 2.0, 0.0));
        const double s = 1.0 / std::sqrt(2.0);
        CHECK(std::abs(a[0] - Complex(s, 0.0)) < 1e-12);
        CHECK(std::abs(a[1] - Complex(0.0, -s)) < 1e-12);
    }

    SECTION("Unit norm for random angles")
    {
        Rng rng = make_rng(11, "test");
        for (int t = 0; t < 100; ++t)
        {
            AnglePair ang(kTwoPi * uniform01(rng), kPi * (uniform01(rng) - 0.5));
            CHECK(std::abs(array_response({8, 8}, ang).norm() - 1.0) < 1e-9);
        }
    }

    SECTION("Element phase follows the closed form")
    {
        ArrayConfig cfg{3, 2, kPi / 2.0};
        AnglePair ang(0.7, -0.3);
        auto a = array_response(cfg, ang);
        for (int i = 0; i < 6; ++i)
        {
            const double expected =
                -(kPi / 2.0) * ((i % 3) * std::sin(0.7) + (i / 3) * std::sin(-0.3));
            CHECK(std::abs(a[i] - std::polar(1.0 / std::sqrt(6.0), expected)) < 1e-12);
        }
    }

    SECTION("Configurable phase constant")
    {
        auto a = array_response({2, 1, kPi}, AnglePair(kPi / 2.0, 0.0));
        CHECK(std::abs(a[1] - Complex(-1.0 / std::sqrt(2.0), 0.0)) < 1e-12);
    }

    SECTION("Inner-product identity against boresight")
    {
        ArrayConfig cfg{8, 8};
        const auto ref = array_response(cfg, AnglePair(0.0, 0.0));
        auto cb = build_codebook(cfg, 16, 4);
        for (const auto &g : cb.grid)
        {
            const auto a = array_response(cfg, g);
            const auto b = array_response(cfg, AnglePair(-g.azimuth, -g.elevation));
            CHECK(std::abs(std::abs(a.dot(ref)) - std::abs(ref.dot(b))) < 1e-9);
        }
    }

    SECTION("Invalid configuration")
    {
        CHECK_THROWS_AS(ArrayConfig({0, 4}).validate(), Error);
    }
}

TEST_CASE("Array geometry - pointing angles")
{
    SECTION("BS above a UE due east")
    {
        auto p = geometric_angles({0, 0, 25}, {100, 0, 1.6});
        CHECK(std::abs(p.departure.azimuth) < 1e-12);
        CHECK(std::abs(p.departure.elevation - std::atan(-23.4 / 100.0)) < 1e-12);
        CHECK(std::abs(p.departure.elevation + 0.229864) < 1e-5);
        CHECK(std::abs(p.arrival.azimuth - kPi) < 1e-12);
        CHECK(std::abs(p.arrival.elevation - 0.229864) < 1e-5);
    }

    SECTION("Receiver behind the transmitter")
    {
        auto p = geometric_angles({0, 0, 25}, {-100, 0, 25});
        CHECK(std::abs(p.departure.azimuth - kPi) < 1e-12);
        CHECK(std::abs(p.departure.elevation) < 1e-12);
    }

    SECTION("Receiver due north")
    {
        auto p = geometric_angles({0, 0, 25}, {0, 50, 25});
        CHECK(std::abs(p.departure.azimuth - kPi / 2.0) < 1e-12);
        CHECK(std::abs(p.departure.elevation) < 1e-12);
        CHECK(std::abs(p.arrival.elevation) < 1e-12);
    }

    SECTION("Coincident points")
    {
        CHECK_THROWS_AS(geometric_angles({1, 2, 3}, {1, 2, 3}), Error);
    }

    SECTION("Swapping ends swaps departure and arrival")
    {
        Rng rng = make_rng(3, "test");
        for (int t = 0; t < 200; ++t)
        {
            Vec3 a{200 * uniform01(rng) - 100, 200 * uniform01(rng) - 100, 30 * uniform01(rng)};
            Vec3 b{200 * uniform01(rng) - 100, 200 * uniform01(rng) - 100, 30 * uniform01(rng)};
            auto ab = geometric_angles(a, b);
            auto ba = geometric_angles(b, a);
            auto az_close = [](double x, double y) {
                const double d = std::abs(wrap_two_pi(x - y));
                return std::min(d, kTwoPi - d) < 1e-9;
            };
            CHECK(az_close(ab.departure.azimuth, ba.arrival.azimuth));
            CHECK(az_close(ab.arrival.azimuth, ba.departure.azimuth));
            CHECK(az_close(ab.departure.azimuth + kPi, ba.departure.azimuth));
            CHECK(std::abs(ab.departure.elevation + ba.departure.elevation) < 1e-12);
            CHECK(std::abs(ab.departure.elevation - ba.arrival.elevation) < 1e-12);
        }
    }
}

TEST_CASE("Array geometry - codebooks")
{
    SECTION("Size and unit norm")
    {
        auto cb = build_codebook({8, 8}, 16, 4);
        REQUIRE(cb.size() == 64);
        for (const auto &b : cb.beams)
            CHECK(std::abs(b.norm() - 1.0) < 1e-9);
    }

    SECTION("Members reproduce the response at their grid angle")
    {
        auto cb = build_codebook({4, 4}, 8, 2, AzimuthSector::front_half);
        for (std::size_t i = 0; i < cb.size(); ++i)
            CHECK((cb.beams[i] - array_response(cb.array, cb.grid[i])).norm() == 0.0);
        for (const auto &g : cb.grid)
        {
            const double az = g.azimuth > kPi ? g.azimuth - kTwoPi : g.azimuth;
            CHECK(az >= -kPi / 2.0);
            CHECK(az < kPi / 2.0);
            CHECK(std::abs(g.elevation) <= kPi / 4.0);
        }
    }

    SECTION("Single entry grid")
    {
        auto cb = build_codebook({2, 2}, 1, 1);
        REQUIRE(cb.size() == 1);
        CHECK(std::abs(cb.beams[0].norm() - 1.0) < 1e-12);
    }

    SECTION("Text round trip keeps order and coefficients")
    {
        auto cb = build_codebook({8, 8}, 16, 4);
        std::stringstream ss;
        write_codebook(ss, cb);
        auto back = read_codebook(ss);
        REQUIRE(back.size() == cb.size());
        CHECK(back.array == cb.array);
        for (std::size_t i = 0; i < cb.size(); ++i)
        {
            CHECK(back.grid[i].azimuth == cb.grid[i].azimuth);
            CHECK(back.grid[i].elevation == cb.grid[i].elevation);
            CHECK((back.beams[i] - cb.beams[i]).cwiseAbs().maxCoeff() < 1e-11);
        }
        // a second pass through the text form is exact
        std::stringstream s1, s2;
        write_codebook(s1, back);
        write_codebook(s2, read_codebook(s1));
        std::stringstream s3;
        write_codebook(s3, back);
        CHECK(s2.str() == s3.str());
    }

    SECTION("Malformed documents")
    {
        std::stringstream bad("mmwsim-codebook 1\narray 2 2 1.5\ngrid 1 1 sideways\nbeams 1\n");
        CHECK_THROWS_AS(read_codebook(bad), Error);
        std::stringstream truncated("mmwsim-codebook 1\narray 2 1 1.5\ngrid 1 1 full\nbeams 1\nbeam 0 0 0\n1 0\n");
        CHECK_THROWS_AS(read_codebook(truncated), Error);
    }
}
