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

#ifndef MMWSIM_RANDOM_HPP
#define MMWSIM_RANDOM_HPP

#include <cstdint>
#include <random>
#include <string_view>

namespace mmwsim
{

using Rng = std::mt19937_64;

/// 64-bit FNV-1a.
std::uint64_t fnv1a(std::string_view s);

/// Named substreams: every consumer (drop, channel, traffic, tb-errors, ...)
/// gets a generator keyed on (scenario seed, stream name, indices), so
/// enabling one feature never shifts the draws seen by another.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view stream, std::uint64_t a = 0, std::uint64_t b = 0);

inline Rng make_rng(std::uint64_t seed, std::string_view stream, std::uint64_t a = 0, std::uint64_t b = 0)
{
    return Rng(derive_seed(seed, stream, a, b));
}

/// Uniform double in [0, 1) built from the top 53 bits; unlike
/// std::uniform_real_distribution the result does not depend on the
/// standard library implementation.
inline double uniform01(Rng &rng)
{
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

} // namespace mmwsim

#endif
