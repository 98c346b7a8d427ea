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

#include "mmwsim/array_geometry.hpp"

#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

namespace mmwsim::array
{

void ArrayConfig::validate() const
{
    if (n1 < 1 || n2 < 1)
        throw Error(ErrorCode::invalid_argument, "array dimensions must be >= 1");
    if (!std::isfinite(phase_constant))
        throw Error(ErrorCode::invalid_argument, "array phase constant must be finite");
}

double wrap_two_pi(double angle)
{
    double a = std::fmod(angle, kTwoPi);
    if (a < 0.0)
        a += kTwoPi;
    // fmod can hand back exactly 2pi after the correction above for tiny negatives
    if (a >= kTwoPi)
        a = 0.0;
    return a;
}

AnglePair::AnglePair(double az, double el) : azimuth(wrap_two_pi(az)), elevation(el) {}

BeamVector array_response(const ArrayConfig &cfg, const AnglePair &angles)
{
    const int n = cfg.size();
    const double s_az = std::sin(angles.azimuth);
    const double s_el = std::sin(angles.elevation);
    const double norm = 1.0 / std::sqrt(static_cast<double>(n));
    BeamVector a(n);
    for (int i = 0; i < n; ++i)
    {
        const double phase = -cfg.phase_constant * ((i % cfg.n1) * s_az + (i / cfg.n1) * s_el);
        a[i] = std::polar(norm, phase);
    }
    return a;
}

PointingAngles geometric_angles(const Vec3 &tx, const Vec3 &rx)
{
    const double dx = rx.x - tx.x;
    const double dy = rx.y - tx.y;
    const double dz = rx.z - tx.z;
    if (dx == 0.0 && dy == 0.0 && dz == 0.0)
        throw Error(ErrorCode::invalid_argument, "degenerate geometry: transmitter and receiver coincide");

    const double horiz = std::hypot(dx, dy);
    double az = 0.0;
    if (horiz > 0.0)
    {
        az = (dx == 0.0) ? (dy > 0.0 ? kPi / 2.0 : -kPi / 2.0) : std::atan(dy / dx);
        if (dx < 0.0)
            az += kPi;
    }
    const double el = (horiz > 0.0) ? std::atan(dz / horiz) : (dz > 0.0 ? kPi / 2.0 : -kPi / 2.0);

    PointingAngles out;
    out.departure = AnglePair(az, el);
    out.arrival = AnglePair(az + kPi, -el);
    return out;
}

Codebook build_codebook(const ArrayConfig &cfg, int azimuth_count, int elevation_count, AzimuthSector sector)
{
    cfg.validate();
    if (azimuth_count < 1 || elevation_count < 1)
        throw Error(ErrorCode::invalid_argument, "codebook grid counts must be >= 1");

    Codebook cb;
    cb.array = cfg;
    cb.azimuth_count = azimuth_count;
    cb.elevation_count = elevation_count;
    cb.sector = sector;
    cb.grid.reserve(static_cast<std::size_t>(azimuth_count) * elevation_count);
    cb.beams.reserve(cb.grid.capacity());

    const double el_step = (kPi / 2.0) / elevation_count;
    for (int ia = 0; ia < azimuth_count; ++ia)
    {
        double az = 0.0;
        if (sector == AzimuthSector::full_circle)
            az = kTwoPi * ia / azimuth_count;
        else
            az = -kPi / 2.0 + (ia + 0.5) * kPi / azimuth_count;
        for (int ie = 0; ie < elevation_count; ++ie)
        {
            const double el = -kPi / 4.0 + (ie + 0.5) * el_step;
            cb.grid.emplace_back(az, el);
            cb.beams.push_back(array_response(cfg, cb.grid.back()));
        }
    }
    return cb;
}

namespace
{

std::string fmt_g(double v, int digits)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", digits, v);
    return buf;
}

[[noreturn]] void bad_doc(const std::string &what)
{
    throw Error(ErrorCode::io, "codebook document: " + what);
}

} // namespace

void write_codebook(std::ostream &os, const Codebook &cb)
{
    os << "mmwsim-codebook 1\n";
    os << "array " << cb.array.n1 << ' ' << cb.array.n2 << ' ' << fmt_g(cb.array.phase_constant, 17) << '\n';
    os << "grid " << cb.azimuth_count << ' ' << cb.elevation_count << ' '
       << (cb.sector == AzimuthSector::full_circle ? "full" : "front") << '\n';
    os << "beams " << cb.size() << '\n';
    for (std::size_t b = 0; b < cb.size(); ++b)
    {
        os << "beam " << b << ' ' << fmt_g(cb.grid[b].azimuth, 17) << ' ' << fmt_g(cb.grid[b].elevation, 17) << '\n';
        for (Eigen::Index i = 0; i < cb.beams[b].size(); ++i)
            os << fmt_g(cb.beams[b][i].real(), 12) << ' ' << fmt_g(cb.beams[b][i].imag(), 12) << '\n';
    }
}

Codebook read_codebook(std::istream &is)
{
    std::string tag;
    int version = 0;
    if (!(is >> tag >> version) || tag != "mmwsim-codebook" || version != 1)
        bad_doc("missing or unsupported header");

    Codebook cb;
    std::string sector;
    std::size_t count = 0;
    if (!(is >> tag >> cb.array.n1 >> cb.array.n2 >> cb.array.phase_constant) || tag != "array")
        bad_doc("bad array line");
    cb.array.validate();
    if (!(is >> tag >> cb.azimuth_count >> cb.elevation_count >> sector) || tag != "grid")
        bad_doc("bad grid line");
    if (sector == "full")
        cb.sector = AzimuthSector::full_circle;
    else if (sector == "front")
        cb.sector = AzimuthSector::front_half;
    else
        bad_doc("unknown sector '" + sector + "'");
    if (!(is >> tag >> count) || tag != "beams")
        bad_doc("bad beams line");

    const int n = cb.array.size();
    cb.grid.reserve(count);
    cb.beams.reserve(count);
    for (std::size_t b = 0; b < count; ++b)
    {
        std::size_t index = 0;
        double az = 0.0;
        double el = 0.0;
        if (!(is >> tag >> index >> az >> el) || tag != "beam" || index != b)
            bad_doc("bad beam header at index " + std::to_string(b));
        cb.grid.emplace_back(az, el);
        BeamVector v(n);
        for (int i = 0; i < n; ++i)
        {
            double re = 0.0;
            double im = 0.0;
            if (!(is >> re >> im))
                bad_doc("truncated coefficients in beam " + std::to_string(b));
            v[i] = Complex(re, im);
        }
        cb.beams.push_back(std::move(v));
    }
    return cb;
}

} // namespace mmwsim::array
