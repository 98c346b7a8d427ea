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

#include "mmwsim/phy.hpp"

#include <algorithm>
#include <numeric>

namespace mmwsim::phy
{

double PhyConfig::noise_per_subcarrier_w() const
{
    const double dbm = thermal_noise_dbm_hz + noise_figure_db + linear_to_db(subcarrier_spacing_hz());
    return db_to_linear(dbm - 30.0);
}

std::vector<int> PhyConfig::evaluated_subcarriers() const
{
    std::vector<int> ks;
    for (int k = 0; k < subcarriers(); k += sinr_stride)
        ks.push_back(k);
    return ks;
}

void PhyConfig::validate() const
{
    if (numerology < 0 || numerology > 4)
        throw Error(ErrorCode::config, "numerology must be in 0..4");
    if (resource_blocks < 1)
        throw Error(ErrorCode::config, "resource_blocks must be >= 1");
    if (subcarrier_spacing_hz() * subcarriers() > bandwidth_hz + 1e-6)
        throw Error(ErrorCode::config, "subcarriers * spacing exceeds the configured bandwidth");
    if (sinr_stride < 1)
        throw Error(ErrorCode::config, "sinr_stride must be >= 1");
    if (carrier_ghz <= 0.0)
        throw Error(ErrorCode::config, "carrier frequency must be positive");
}

// ---------------------------------------------------------------------------

McsTable McsTable::standard(double gap_db)
{
    static constexpr double kEfficiencies[] = {0.2, 0.5, 0.8, 1.2,  1.6, 1.82, 2.2, 2.6,
                                               3.0, 3.64, 4.0, 4.4, 4.8, 5.2,  5.5};
    const double gap = db_to_linear(gap_db);
    std::vector<McsEntry> entries;
    for (double eff : kEfficiencies)
        entries.push_back({eff, linear_to_db(gap * (std::exp2(eff) - 1.0))});
    return McsTable(std::move(entries));
}

McsTable::McsTable(std::vector<McsEntry> entries) : entries_(std::move(entries))
{
    if (entries_.empty())
        throw Error(ErrorCode::invalid_argument, "MCS table must not be empty");
    for (std::size_t i = 1; i < entries_.size(); ++i)
    {
        if (!(entries_[i].efficiency > entries_[i - 1].efficiency) ||
            !(entries_[i].threshold_db > entries_[i - 1].threshold_db))
            throw Error(ErrorCode::invalid_argument, "MCS efficiencies and thresholds must increase strictly");
    }
}

const McsEntry &McsTable::operator[](int mcs) const
{
    if (mcs < 0 || mcs >= size())
        throw Error(ErrorCode::invalid_argument, "MCS index out of range: " + std::to_string(mcs));
    return entries_[static_cast<std::size_t>(mcs)];
}

int McsTable::lowest_index_with_efficiency(double efficiency) const
{
    for (int i = 0; i < size(); ++i)
        if (entries_[static_cast<std::size_t>(i)].efficiency >= efficiency)
            return i;
    return -1;
}

// ---------------------------------------------------------------------------

namespace
{

void check_set(const ActiveSetGains &set, int u)
{
    const auto n = set.gain.rows();
    if (set.gain.cols() != n || static_cast<Eigen::Index>(set.pathloss.size()) != n)
        throw Error(ErrorCode::invalid_argument, "active set gain matrix must be square and match pathloss count");
    if (u < 0 || u >= n)
        throw Error(ErrorCode::invalid_argument, "target user not in the active set");
}

} // namespace

double sinr_dl(const ActiveSetGains &set, int u, double power_per_subcarrier_w, double noise_w)
{
    check_set(set, u);
    const double lu = set.pathloss[static_cast<std::size_t>(u)];
    const double signal = lu * std::norm(set.gain(u, u)) * power_per_subcarrier_w;
    double interference = 0.0;
    for (Eigen::Index v = 0; v < set.gain.cols(); ++v)
        if (v != u)
            interference += lu * std::norm(set.gain(u, v)) * power_per_subcarrier_w;
    return signal / (interference + noise_w);
}

double sinr_ul(const ActiveSetGains &set, int u, double power_per_subcarrier_w, double noise_w)
{
    check_set(set, u);
    const double signal =
        set.pathloss[static_cast<std::size_t>(u)] * std::norm(set.gain(u, u)) * power_per_subcarrier_w;
    double interference = 0.0;
    for (Eigen::Index v = 0; v < set.gain.rows(); ++v)
        if (v != u)
            interference +=
                set.pathloss[static_cast<std::size_t>(v)] * std::norm(set.gain(v, u)) * power_per_subcarrier_w;
    return signal / (interference + noise_w);
}

int select_mcs(double reported_sinr_db, const McsTable &table)
{
    int best = 0;
    for (int i = 0; i < table.size(); ++i)
        if (table[i].threshold_db <= reported_sinr_db)
            best = i;
    return best;
}

double BlerModel::offset_db() const
{
    // bler(threshold) = 1 / (1 + exp(offset / slope)) = 1e-2
    return slope_db * std::log(99.0);
}

double BlerModel::operator()(double sinr_db, const McsTable &table, int mcs) const
{
    const double x = (sinr_db - table[mcs].threshold_db + offset_db()) / slope_db;
    if (x > 700.0)
        return 0.0;
    return 1.0 / (1.0 + std::exp(x));
}

double bler(double actual_sinr_db, int mcs, const McsTable &table, const BlerModel &model)
{
    return model(actual_sinr_db, table, mcs);
}

long transport_block_bits(const McsTable &table, int mcs, int n_symbols, int subcarriers)
{
    if (n_symbols < 1)
        throw Error(ErrorCode::invalid_argument, "transport block needs at least one symbol");
    // the 1e-9 guard keeps products like 3.64 * 3300 = 12012 from landing one bit short
    return static_cast<long>(std::floor(table[mcs].efficiency * subcarriers * n_symbols + 1e-9));
}

double wideband_sinr(std::span<const double> per_subcarrier)
{
    if (per_subcarrier.empty())
        return 0.0;
    return std::accumulate(per_subcarrier.begin(), per_subcarrier.end(), 0.0) /
           static_cast<double>(per_subcarrier.size());
}

} // namespace mmwsim::phy
