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

#ifndef MMWSIM_COMMON_HPP
#define MMWSIM_COMMON_HPP

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>

namespace mmwsim
{

using Complex = std::complex<double>;
using ComplexVector = Eigen::VectorXcd;
using ComplexMatrix = Eigen::MatrixXcd;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
inline constexpr double kSpeedOfLight = 299792458.0;

/// Error categories surfaced through the C API as integer codes.
enum class ErrorCode : int
{
    ok = 0,
    invalid_argument = 1,
    config = 2,
    runtime = 3,
    protocol = 4,
    io = 5,
};

/// Exception type used throughout the library. The code survives the trip
/// across the C boundary.
class Error : public std::runtime_error
{
  public:
    Error(ErrorCode code, const std::string &what) : std::runtime_error(what), code_(code) {}
    ErrorCode code() const noexcept { return code_; }

  private:
    ErrorCode code_;
};

struct Vec3
{
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    friend bool operator==(const Vec3 &, const Vec3 &) = default;
};

inline double horizontal_distance(const Vec3 &a, const Vec3 &b)
{
    return std::hypot(b.x - a.x, b.y - a.y);
}

inline double distance(const Vec3 &a, const Vec3 &b)
{
    return std::sqrt((b.x - a.x) * (b.x - a.x) + (b.y - a.y) * (b.y - a.y) + (b.z - a.z) * (b.z - a.z));
}

enum class Direction : std::uint8_t
{
    downlink = 0,
    uplink = 1,
};

inline const char *to_string(Direction d)
{
    return d == Direction::downlink ? "dl" : "ul";
}

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double lin) { return 10.0 * std::log10(lin); }

/// Simulation time is kept in integer nanoseconds so slot boundaries and
/// packet intervals stay exact over long runs.
using TimeNs = std::int64_t;

inline constexpr TimeNs kNsPerSecond = 1'000'000'000;
inline constexpr TimeNs kNsPerMs = 1'000'000;
inline constexpr TimeNs kNsPerUs = 1'000;

inline double to_seconds(TimeNs t) { return static_cast<double>(t) * 1e-9; }

} // namespace mmwsim

#endif
