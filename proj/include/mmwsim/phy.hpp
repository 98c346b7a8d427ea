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

#ifndef MMWSIM_PHY_HPP
#define MMWSIM_PHY_HPP

#include "mmwsim/common.hpp"

#include <span>
#include <vector>

namespace mmwsim::phy
{

/// NR numerology and radio parameters. Defaults describe a 28 GHz carrier,
/// mu = 2 (60 kHz spacing), 275 RBs of 12 subcarriers, 30 dBm at both ends
/// and a 5 dB noise figure.
struct PhyConfig
{
    double carrier_ghz = 28.0;
    double bandwidth_hz = 198e6;
    int numerology = 2;
    int resource_blocks = 275;
    double bs_power_dbm = 30.0;
    double ue_power_dbm = 30.0;
    double noise_figure_db = 5.0;
    double thermal_noise_dbm_hz = -174.0;
    /// Subcarriers actually evaluated for SINR: every `sinr_stride`-th one,
    /// starting at 0. Power and transport block sizing always use all K.
    int sinr_stride = 50;

    double subcarrier_spacing_hz() const { return 15e3 * static_cast<double>(1 << numerology); }
    int subcarriers() const { return resource_blocks * 12; }
    int slots_per_subframe() const { return 1 << numerology; }
    TimeNs slot_duration_ns() const { return kNsPerMs / slots_per_subframe(); }
    double symbol_duration_s() const { return to_seconds(slot_duration_ns()) / 14.0; }
    int reference_subcarrier() const { return subcarriers() / 2; }
    /// Baseband frequency offset of subcarrier k relative to the carrier.
    double baseband_frequency_hz(int k) const { return (k - subcarriers() / 2) * subcarrier_spacing_hz(); }
    /// Delta_f * N_o in watts, noise figure included.
    double noise_per_subcarrier_w() const;
    double bs_power_w() const { return db_to_linear(bs_power_dbm - 30.0); }
    double ue_power_w() const { return db_to_linear(ue_power_dbm - 30.0); }
    /// Regularisation N_o * Delta_f / P used by the MMSE precoder.
    double noise_over_power() const { return noise_per_subcarrier_w() / bs_power_w(); }
    std::vector<int> evaluated_subcarriers() const;

    void validate() const;
};

/// 14-symbol slot: symbol 0 carries DL control, 1..12 data, 13 UL control.
struct SlotStructure
{
    static constexpr int symbols_per_slot = 14;
    static constexpr int dl_control_symbol = 0;
    static constexpr int first_data_symbol = 1;
    static constexpr int last_data_symbol = 12;
    static constexpr int ul_control_symbol = 13;
    static constexpr int data_symbols = last_data_symbol - first_data_symbol + 1;
};

struct McsEntry
{
    double efficiency;   // bits per subcarrier per symbol
    double threshold_db; // SINR giving BLER 1e-2
};

class McsTable
{
  public:
    /// 15-entry CQI-like table, thresholds from a Shannon-gap model.
    static McsTable standard(double gap_db = 3.0);
    explicit McsTable(std::vector<McsEntry> entries);

    int size() const { return static_cast<int>(entries_.size()); }
    const McsEntry &operator[](int mcs) const;
    std::span<const McsEntry> entries() const { return entries_; }

    /// Lowest index whose efficiency is at least `efficiency`, or -1.
    int lowest_index_with_efficiency(double efficiency) const;

  private:
    std::vector<McsEntry> entries_;
};

/// Effective gains of one co-scheduled set on one subcarrier.
///
/// gain(u, v) is the scalar channel seen by user u through the beam serving
/// user v (DL: v's effective transmit vector; UL: v's effective combining
/// vector at the BS), without pathloss. Diagonal entries are the desired
/// links.
struct ActiveSetGains
{
    ComplexMatrix gain;
    std::vector<double> pathloss; // linear L_u
};

/// DL SINR of user u: desired and interference both travel through u's own
/// channel and pathloss.
double sinr_dl(const ActiveSetGains &set, int u, double power_per_subcarrier_w, double noise_w);

/// UL SINR of user u at its BS layer: interferer u' arrives through its own
/// channel and pathloss L_u'.
double sinr_ul(const ActiveSetGains &set, int u, double power_per_subcarrier_w, double noise_w);

/// Highest index whose threshold is at or below the reported SINR; index 0
/// when the report falls below every threshold.
int select_mcs(double reported_sinr_db, const McsTable &table);

/// Logistic block error model anchored at BLER(threshold) = 1e-2 and
/// BLER(threshold - 6 dB) >= 0.99.
struct BlerModel
{
    double slope_db = 0.5;
    double offset_db() const;
    double operator()(double sinr_db, const McsTable &table, int mcs) const;
};

double bler(double actual_sinr_db, int mcs, const McsTable &table, const BlerModel &model = {});

/// floor(efficiency * K * n_symbols)
long transport_block_bits(const McsTable &table, int mcs, int n_symbols, int subcarriers);

/// Per-subcarrier and wideband SINR of one transmission.
struct SinrSample
{
    int user = 0;
    Direction direction = Direction::downlink;
    std::vector<double> per_subcarrier;
    double wideband = 0.0;
};

/// Arithmetic mean of linear SINR values.
double wideband_sinr(std::span<const double> per_subcarrier);

} // namespace mmwsim::phy

#endif
