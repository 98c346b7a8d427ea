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

#ifndef MMWSIM_ARRAY_GEOMETRY_HPP
#define MMWSIM_ARRAY_GEOMETRY_HPP

#include "mmwsim/common.hpp"

#include <iosfwd>
#include <vector>

namespace mmwsim::array
{

/// Uniform planar array of n1 (horizontal) by n2 (vertical) elements.
///
/// `phase_constant` is the factor in front of the element phase progression.
/// Defaults to pi/2. Half-wavelength spacing in the textbook derivation
/// gives pi; any finite value is accepted.
struct ArrayConfig
{
    int n1 = 8;
    int n2 = 8;
    double phase_constant = kPi / 2.0;

    int size() const { return n1 * n2; }
    void validate() const;

    friend bool operator==(const ArrayConfig &, const ArrayConfig &) = default;
};

inline ArrayConfig default_bs_array() { return {8, 8, kPi / 2.0}; }
inline ArrayConfig default_ue_array() { return {4, 4, kPi / 2.0}; }

/// Azimuth is stored modulo 2*pi, elevation in [-pi/2, pi/2].
struct AnglePair
{
    double azimuth = 0.0;
    double elevation = 0.0;

    AnglePair() = default;
    AnglePair(double az, double el);
};

double wrap_two_pi(double angle);

/// Unit-norm complex weight vector over the array elements.
using BeamVector = ComplexVector;

/// a_i = exp(-j * c * ((i mod n1) sin(az) + floor(i / n1) sin(el))) / sqrt(N)
BeamVector array_response(const ArrayConfig &cfg, const AnglePair &angles);

struct PointingAngles
{
    AnglePair departure;
    AnglePair arrival;
};

/// Line-of-sight departure angles at `tx` and arrival angles at `rx`.
/// Throws Error(invalid_argument, "degenerate geometry") for coincident points.
PointingAngles geometric_angles(const Vec3 &tx, const Vec3 &rx);

enum class AzimuthSector
{
    full_circle, // [0, 2pi)
    front_half,  // [-pi/2, pi/2)
};

/// Beam codebook. Index into `beams` is the beam indicator message.
struct Codebook
{
    ArrayConfig array;
    int azimuth_count = 0;
    int elevation_count = 0;
    AzimuthSector sector = AzimuthSector::full_circle;
    std::vector<AnglePair> grid;
    std::vector<BeamVector> beams;

    std::size_t size() const { return beams.size(); }
};

/// Cartesian grid of azimuths (uniform over the sector) and elevations
/// (uniform over [-pi/4, pi/4], endpoints excluded by half-step centring).
Codebook build_codebook(const ArrayConfig &cfg, int azimuth_count, int elevation_count,
                        AzimuthSector sector = AzimuthSector::full_circle);

/// Plain-text codebook document; coefficients written as (re, im) pairs with
/// 12 significant digits.
void write_codebook(std::ostream &os, const Codebook &cb);
Codebook read_codebook(std::istream &is);

} // namespace mmwsim::array

#endif
