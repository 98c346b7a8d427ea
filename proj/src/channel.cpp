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

#include "mmwsim/channel.hpp"
#include "mmwsim/random.hpp"

#include <algorithm>
#include <cstdio>
#include <ostream>
#include <random>

namespace mmwsim::channel
{

void ChannelParams::validate() const
{
    if (cluster_count < 1)
        throw Error(ErrorCode::config, "cluster_count must be >= 1");
    if (carrier_ghz <= 0.0)
        throw Error(ErrorCode::config, "carrier frequency must be positive");
    if (max_delay_s < 0.0 || azimuth_spread_deg < 0.0 || elevation_spread_deg < 0.0)
        throw Error(ErrorCode::config, "delay and angular spreads must be non-negative");
    if (ue_speed_kmh < 0.0)
        throw Error(ErrorCode::config, "UE speed must be non-negative");
    if (regen_period_s <= 0.0)
        throw Error(ErrorCode::config, "channel regeneration period must be positive");
    if (shadowing_los_db < 0.0 || shadowing_nlos_db < 0.0)
        throw Error(ErrorCode::config, "shadowing deviations must be non-negative");
}

double los_probability(double distance_2d)
{
    if (distance_2d <= 0.0)
        return 1.0;
    const double e = std::exp(-distance_2d / 63.0);
    return std::min(18.0 / distance_2d, 1.0) * (1.0 - e) + e;
}

double pathloss_db(double distance_3d, double carrier_ghz, bool los)
{
    if (distance_3d <= 0.0)
        throw Error(ErrorCode::invalid_argument, "pathloss distance must be positive");
    const double slope = los ? 21.0 : 30.0;
    return 32.4 + slope * std::log10(distance_3d) + 20.0 * std::log10(carrier_ghz);
}

namespace
{

double laplacian(Rng &rng, double rms)
{
    if (rms <= 0.0)
        return 0.0;
    const double b = rms / std::sqrt(2.0);
    const double u = uniform01(rng) - 0.5;
    const double mag = -b * std::log(std::max(1.0 - 2.0 * std::abs(u), 1e-300));
    return u < 0.0 ? -mag : mag;
}

double clamp_elevation(double el) { return std::clamp(el, -kPi / 2.0, kPi / 2.0); }

/// Gains of `epoch`, valid at the epoch's start instant.
void draw_gains(MultipathChannel &ch, std::int64_t epoch)
{
    Rng rng = make_rng(ch.seed, "gains", static_cast<std::uint64_t>(epoch));
    std::normal_distribution<double> normal(0.0, 1.0);
    for (auto &c : ch.clusters)
    {
        if (c.specular)
        {
            c.gain = std::polar(std::sqrt(c.mean_power), kTwoPi * uniform01(rng));
        }
        else
        {
            const double s = std::sqrt(c.mean_power / 2.0);
            const double re = normal(rng);
            const double im = normal(rng);
            c.gain = Complex(s * re, s * im);
        }
    }
}

std::int64_t epoch_of(double t, double period)
{
    // a small guard so that t = n * period computed in floating point lands in epoch n
    return static_cast<std::int64_t>(std::floor(t / period + 1e-9));
}

} // namespace

LinkDrop drop_link(std::uint64_t seed, const Vec3 &bs_pos, const Vec3 &ue_pos, const ChannelParams &params)
{
    params.validate();
    const auto angles = array::geometric_angles(bs_pos, ue_pos);

    LinkDrop out;
    out.geometry.bs_pos = bs_pos;
    out.geometry.ue_pos = ue_pos;
    out.geometry.distance_3d = distance(bs_pos, ue_pos);
    out.geometry.distance_2d = horizontal_distance(bs_pos, ue_pos);

    Rng rng = make_rng(seed, "link");
    out.geometry.los = uniform01(rng) < los_probability(out.geometry.distance_2d);

    double loss = pathloss_db(out.geometry.distance_3d, params.carrier_ghz, out.geometry.los);
    if (params.shadowing)
    {
        std::normal_distribution<double> normal(0.0, 1.0);
        loss += normal(rng) * (out.geometry.los ? params.shadowing_los_db : params.shadowing_nlos_db);
    }
    // linear gain must stay in (0, 1]
    loss = std::max(loss, 0.0);
    out.pathloss = Pathloss::from_db(loss);

    auto &ch = out.channel;
    ch.seed = derive_seed(seed, "cluster-gains");
    ch.regen_period_s = params.regen_period_s;

    const int total = params.cluster_count;
    const bool specular = out.geometry.los;
    const int scattered = specular ? total - 1 : total;
    const double k_lin = db_to_linear(params.k_factor_db);
    const double specular_power = (specular && scattered > 0) ? k_lin / (k_lin + 1.0) : 1.0;
    const double scattered_power = specular ? (1.0 - specular_power) / std::max(scattered, 1) : 1.0 / total;

    const double az_rms = params.azimuth_spread_deg * kPi / 180.0;
    const double el_rms = params.elevation_spread_deg * kPi / 180.0;
    const double max_doppler = 2.0 * kPi * (params.ue_speed_kmh / 3.6) * params.carrier_ghz * 1e9 / kSpeedOfLight;

    for (int c = 0; c < total; ++c)
    {
        Cluster cl;
        const bool is_specular = specular && c == 0;
        cl.specular = is_specular;
        cl.mean_power = is_specular ? specular_power : scattered_power;
        if (is_specular)
        {
            cl.departure = angles.departure;
            cl.arrival = angles.arrival;
            cl.delay_s = 0.0;
        }
        else
        {
            cl.departure = AnglePair(angles.departure.azimuth + laplacian(rng, az_rms),
                                     clamp_elevation(angles.departure.elevation + laplacian(rng, el_rms)));
            cl.arrival = AnglePair(angles.arrival.azimuth + laplacian(rng, az_rms),
                                   clamp_elevation(angles.arrival.elevation + laplacian(rng, el_rms)));
            cl.delay_s = uniform01(rng) * params.max_delay_s;
        }
        cl.doppler_rad_s = max_doppler * std::cos(kTwoPi * uniform01(rng));
        ch.clusters.push_back(cl);
    }

    ch.time_s = 0.0;
    ch.epoch = 0;
    draw_gains(ch, 0);
    return out;
}

MultipathChannel evolve(const MultipathChannel &ch, double dt)
{
    if (dt < 0.0)
        throw Error(ErrorCode::invalid_argument, "evolve needs dt >= 0");
    MultipathChannel out = ch;
    if (dt == 0.0)
        return out;
    out.time_s = ch.time_s + dt;
    const std::int64_t epoch = epoch_of(out.time_s, ch.regen_period_s);
    if (epoch != ch.epoch)
    {
        out.epoch = epoch;
        draw_gains(out, epoch);
        const double since = out.time_s - static_cast<double>(epoch) * ch.regen_period_s;
        for (auto &c : out.clusters)
            c.gain *= std::polar(1.0, c.doppler_rad_s * since);
    }
    else
    {
        for (auto &c : out.clusters)
            c.gain *= std::polar(1.0, c.doppler_rad_s * dt);
    }
    return out;
}

ComplexMatrix channel_matrix(const MultipathChannel &ch, const ArrayConfig &bs_array, const ArrayConfig &ue_array,
                             double symbol_time, int subcarrier, const phy::PhyConfig &phy)
{
    if (subcarrier < 0 || subcarrier >= phy.subcarriers())
        throw Error(ErrorCode::invalid_argument, "subcarrier out of range: " + std::to_string(subcarrier));
    const int n_tx = bs_array.size();
    const int n_rx = ue_array.size();
    const double fk = phy.baseband_frequency_hz(subcarrier);
    const double scale = std::sqrt(static_cast<double>(n_tx) * n_rx);

    ComplexMatrix h = ComplexMatrix::Zero(n_rx, n_tx);
    for (const auto &c : ch.clusters)
    {
        const Complex w = scale * c.gain * std::polar(1.0, c.doppler_rad_s * symbol_time) *
                          std::polar(1.0, -kTwoPi * fk * c.delay_s);
        const auto a_rx = array::array_response(ue_array, c.arrival);
        const auto a_tx = array::array_response(bs_array, c.departure);
        h.noalias() += w * a_rx * a_tx.transpose();
    }
    return h;
}

Complex effective_gain(const BeamVector &w, const ComplexMatrix &h, const BeamVector &v)
{
    if (w.size() != h.rows() || v.size() != h.cols())
        throw Error(ErrorCode::invalid_argument, "effective_gain: dimension mismatch (w " + std::to_string(w.size()) +
                                                     ", H " + std::to_string(h.rows()) + "x" +
                                                     std::to_string(h.cols()) + ", v " + std::to_string(v.size()) + ")");
    return (w.transpose() * h * v)(0, 0);
}

ComplexVector tx_projection(const MultipathChannel &ch, const ArrayConfig &bs_array, const BeamVector &v)
{
    if (v.size() != bs_array.size())
        throw Error(ErrorCode::invalid_argument, "tx_projection: beam length does not match the BS array");
    ComplexVector out(static_cast<Eigen::Index>(ch.clusters.size()));
    for (std::size_t c = 0; c < ch.clusters.size(); ++c)
        out[static_cast<Eigen::Index>(c)] = array::array_response(bs_array, ch.clusters[c].departure).transpose() * v;
    return out;
}

ComplexVector rx_projection(const MultipathChannel &ch, const ArrayConfig &ue_array, const BeamVector &w)
{
    if (w.size() != ue_array.size())
        throw Error(ErrorCode::invalid_argument, "rx_projection: beam length does not match the UE array");
    ComplexVector out(static_cast<Eigen::Index>(ch.clusters.size()));
    for (std::size_t c = 0; c < ch.clusters.size(); ++c)
        out[static_cast<Eigen::Index>(c)] = w.transpose() * array::array_response(ue_array, ch.clusters[c].arrival);
    return out;
}

ComplexVector cluster_amplitudes(const MultipathChannel &ch, int n_tx, int n_rx, double symbol_time)
{
    const double scale = std::sqrt(static_cast<double>(n_tx) * n_rx);
    ComplexVector out(static_cast<Eigen::Index>(ch.clusters.size()));
    for (std::size_t c = 0; c < ch.clusters.size(); ++c)
    {
        const auto &cl = ch.clusters[c];
        out[static_cast<Eigen::Index>(c)] = scale * cl.gain * std::polar(1.0, cl.doppler_rad_s * symbol_time);
    }
    return out;
}

ComplexMatrix delay_phases(const MultipathChannel &ch, std::span<const int> subcarriers, const phy::PhyConfig &phy)
{
    ComplexMatrix out(static_cast<Eigen::Index>(subcarriers.size()), static_cast<Eigen::Index>(ch.clusters.size()));
    for (std::size_t i = 0; i < subcarriers.size(); ++i)
    {
        const int k = subcarriers[i];
        if (k < 0 || k >= phy.subcarriers())
            throw Error(ErrorCode::invalid_argument, "subcarrier out of range: " + std::to_string(k));
        const double fk = phy.baseband_frequency_hz(k);
        for (std::size_t c = 0; c < ch.clusters.size(); ++c)
            out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) =
                std::polar(1.0, -kTwoPi * fk * ch.clusters[c].delay_s);
    }
    return out;
}

void write_trace_header(std::ostream &os)
{
    os << "seed,slot,link,cluster,gain_re,gain_im,dep_az,dep_el,arr_az,arr_el,delay_s\n";
}

void write_trace_rows(std::ostream &os, std::uint64_t seed, std::int64_t slot, int link, const MultipathChannel &ch)
{
    char buf[512];
    for (std::size_t c = 0; c < ch.clusters.size(); ++c)
    {
        const auto &cl = ch.clusters[c];
        std::snprintf(buf, sizeof buf, "%llu,%lld,%d,%zu,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g\n",
                      static_cast<unsigned long long>(seed), static_cast<long long>(slot), link, c, cl.gain.real(),
                      cl.gain.imag(), cl.departure.azimuth, cl.departure.elevation, cl.arrival.azimuth,
                      cl.arrival.elevation, cl.delay_s);
        os << buf;
    }
}

} // namespace mmwsim::channel
