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

#ifndef MMWSIM_CHANNEL_HPP
#define MMWSIM_CHANNEL_HPP

#include "mmwsim/array_geometry.hpp"
#include "mmwsim/phy.hpp"

#include <cstdint>
#include <iosfwd>
#include <vector>

namespace mmwsim::channel
{

using array::AnglePair;
using array::ArrayConfig;
using array::BeamVector;

/// Knobs of the simplified clustered channel.
struct ChannelParams
{
    double carrier_ghz = 28.0;
    int cluster_count = 8;
    double k_factor_db = 10.0;
    double azimuth_spread_deg = 10.0;
    double elevation_spread_deg = 5.0;
    double max_delay_s = 200e-9;
    double ue_speed_kmh = 3.0;
    double regen_period_s = 0.1;
    double shadowing_los_db = 4.0;
    double shadowing_nlos_db = 7.8;
    bool shadowing = true;

    void validate() const;
};

struct LinkGeometry
{
    Vec3 bs_pos;
    Vec3 ue_pos;
    double distance_3d = 0.0;
    double distance_2d = 0.0;
    bool los = false;
};

struct Pathloss
{
    double linear = 1.0;
    double db = 0.0;

    static Pathloss from_db(double loss_db) { return {db_to_linear(-loss_db), loss_db}; }
};

double los_probability(double distance_2d);

/// Log-distance loss in dB (no shadowing): 32.4 + {21 | 30} log10(d) + 20 log10(f_GHz).
double pathloss_db(double distance_3d, double carrier_ghz, bool los);

struct Cluster
{
    Complex gain;             // value at the channel's reference time
    double mean_power = 0.0;  // E|gain|^2
    AnglePair departure;      // at the BS
    AnglePair arrival;        // at the UE
    double delay_s = 0.0;
    double doppler_rad_s = 0.0;
    bool specular = false;
};

/// Cluster set of one BS-UE link. Average power sums to one; pathloss lives
/// in Pathloss only.
struct MultipathChannel
{
    std::vector<Cluster> clusters;
    double time_s = 0.0;           // instant the stored gains refer to
    double regen_period_s = 0.1;
    std::int64_t epoch = 0;
    std::uint64_t seed = 0;        // gains of epoch e come from (seed, e)

    std::size_t cluster_count() const { return clusters.size(); }
};

struct LinkDrop
{
    LinkGeometry geometry;
    Pathloss pathloss;
    MultipathChannel channel;
};

/// Draws LOS state, shadowed pathloss and clusters for one link.
/// Deterministic in `seed`.
LinkDrop drop_link(std::uint64_t seed, const Vec3 &bs_pos, const Vec3 &ue_pos, const ChannelParams &params);

/// H[k] (N_rx x N_tx) at `symbol_time` seconds after the channel's
/// reference time:
///   sqrt(N_tx N_rx) sum_c g_c e^{j w_c t} e^{-j 2 pi f_k tau_c} a_rx(arr_c) a_tx(dep_c)^T
/// The transmit steering enters transposed so that w^T H v is symmetric in
/// the two ends (see effective_gain).
ComplexMatrix channel_matrix(const MultipathChannel &ch, const ArrayConfig &bs_array, const ArrayConfig &ue_array,
                             double symbol_time, int subcarrier, const phy::PhyConfig &phy);

/// h = w^T H v. The UL value v^T H^T w is the same number.
Complex effective_gain(const BeamVector &w, const ComplexMatrix &h, const BeamVector &v);

/// Advances every cluster phase by doppler * dt. Crossing a regeneration
/// boundary redraws the gains (angles, delays and Doppler rates persist).
MultipathChannel evolve(const MultipathChannel &ch, double dt);

// ---------------------------------------------------------------------------
// Factored evaluation. Because H is a sum of rank-one cluster terms,
// w^T H v = sum_c weight_c (w^T a_rx,c)(a_tx,c^T v); the engine works on these
// per-cluster projections instead of materialising N_rx x N_tx matrices.

/// a_tx(dep_c)^T v for each cluster.
ComplexVector tx_projection(const MultipathChannel &ch, const ArrayConfig &bs_array, const BeamVector &v);
/// w^T a_rx(arr_c) for each cluster.
ComplexVector rx_projection(const MultipathChannel &ch, const ArrayConfig &ue_array, const BeamVector &w);
/// sqrt(N_tx N_rx) g_c e^{j w_c t} for each cluster.
ComplexVector cluster_amplitudes(const MultipathChannel &ch, int n_tx, int n_rx, double symbol_time);
/// e^{-j 2 pi f_k tau_c}, one row per listed subcarrier.
ComplexMatrix delay_phases(const MultipathChannel &ch, std::span<const int> subcarriers, const phy::PhyConfig &phy);

/// One CSV row per cluster: seed,slot,link,cluster,gain_re,gain_im,dep_az,dep_el,arr_az,arr_el,delay_s
void write_trace_header(std::ostream &os);
void write_trace_rows(std::ostream &os, std::uint64_t seed, std::int64_t slot, int link, const MultipathChannel &ch);

} // namespace mmwsim::channel

#endif
