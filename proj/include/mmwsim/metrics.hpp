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

#ifndef MMWSIM_METRICS_HPP
#define MMWSIM_METRICS_HPP

#include "mmwsim/common.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace mmwsim::sim
{

/// Per-direction statistics of one run. Samples and byte counts only cover
/// the post-warm-up window; the packet conservation counters cover the
/// whole run.
struct DirectionMetrics
{
    long long offered_bits = 0;
    long long delivered_bits = 0;
    double throughput_bps = 0.0;

    std::vector<double> delay_ms; // delivered packets only
    std::vector<double> sinr_db;  // one wideband value per transport block
    std::vector<double> bler;     // instantaneous BLER of each transport block

    long long tb_count = 0;
    long long tb_errors = 0;
    long long tb_outage = 0; // BLER >= 0.9
    long long tb_clear = 0;  // BLER <= 1e-2

    long long packets_generated = 0;
    long long packets_delivered = 0;
    long long packets_dropped = 0;
    long long packets_in_queue = 0; // still held anywhere at the end

    long long harq_retx = 0;
    long long harq_abandoned = 0; // missed the slot after their NACK
    long long harq_drops = 0;
    int harq_max_gap_slots = 0; // slots between a NACK and its retransmission
    long long am_retx = 0;

    long long allocated_symbols = 0;
    long long padding_symbols = 0;
    long long idle_allocations = 0; // granted but nothing fit

    double mean_delay_ms() const;
    double outage_fraction() const;
    bool conserved() const
    {
        return packets_generated == packets_delivered + packets_dropped + packets_in_queue;
    }
};

/// Structural checks performed on every slot plan.
struct InvariantStats
{
    long long slots = 0;
    long long overlap_violations = 0;
    long long pmrs_misaligned = 0;
    long long pmrs_fallbacks = 0;
    long long amrs_gaps = 0;
    long long unexpected_padding = 0;
    long long fairness_windows = 0;
    long long fairness_violations = 0;
    long long causality_violations = 0;

    bool ok() const
    {
        return overlap_violations == 0 && pmrs_misaligned == 0 && pmrs_fallbacks == 0 && amrs_gaps == 0 &&
               unexpected_padding == 0 && fairness_violations == 0 && causality_violations == 0;
    }
    InvariantStats &operator+=(const InvariantStats &o);
};

struct MetricsReport
{
    std::uint64_t seed = 0;
    int run = 0;
    double duration_s = 0.0;
    double warmup_s = 0.0;
    DirectionMetrics dl;
    DirectionMetrics ul;
    InvariantStats invariants;

    const DirectionMetrics &at(Direction d) const { return d == Direction::downlink ? dl : ul; }
    DirectionMetrics &at(Direction d) { return d == Direction::downlink ? dl : ul; }
    /// padding / (allocated + padding) over both directions
    double padding_ratio() const;
};

struct DirectionSummary
{
    std::vector<double> delay_ms;
    std::vector<double> sinr_db;
    std::vector<double> bler;
    double mean_throughput_bps = 0.0;
    double stderr_throughput_bps = 0.0;
    double mean_delay_ms = 0.0; // mean of per-run means
    double stderr_delay_ms = 0.0;
    double offered_bps = 0.0;
    long long tb_count = 0;
    long long tb_errors = 0;
    long long tb_outage = 0;
    long long tb_clear = 0;
    long long harq_retx = 0;
    long long harq_abandoned = 0;
    int harq_max_gap_slots = 0;
    long long am_retx = 0;

    double outage_fraction() const;
    /// fraction of transport blocks whose BLER is <= 1e-2 or >= 0.9
    double step_fraction() const;
};

struct CampaignSummary
{
    std::string label;
    int runs = 0;
    DirectionSummary dl;
    DirectionSummary ul;
    InvariantStats invariants;
    double padding_ratio = 0.0;

    const DirectionSummary &at(Direction d) const { return d == Direction::downlink ? dl : ul; }
};

/// Pools samples and averages per-run figures; standard errors are over runs.
CampaignSummary aggregate(const std::vector<MetricsReport> &reports, const std::string &label = {});

/// Linear-interpolation free order statistic: the smallest sample with
/// cumulative fraction >= q (q in (0, 1]). Expects sorted input.
double percentile(const std::vector<double> &sorted, double q);
/// Fraction of samples <= x. Expects sorted input.
double cdf_at(const std::vector<double> &sorted, double x);

/// 9 significant digits, shortest form
std::string format_number(double v);

/// Header "value,cdf" then rows (x_i, (i+1)/N) over the sorted samples.
void emit_cdf(std::ostream &os, std::vector<double> samples);

} // namespace mmwsim::sim

#endif
