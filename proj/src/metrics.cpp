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

#include "mmwsim/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>

namespace mmwsim::sim
{

namespace
{

double mean(const std::vector<double> &v)
{
    if (v.empty())
        return 0.0;
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double standard_error(const std::vector<double> &v)
{
    if (v.size() < 2)
        return 0.0;
    const double m = mean(v);
    double ss = 0.0;
    for (double x : v)
        ss += (x - m) * (x - m);
    return std::sqrt(ss / static_cast<double>(v.size() - 1)) / std::sqrt(static_cast<double>(v.size()));
}

void append(std::vector<double> &dst, const std::vector<double> &src)
{
    dst.insert(dst.end(), src.begin(), src.end());
}

} // namespace

double DirectionMetrics::mean_delay_ms() const
{
    return mean(delay_ms);
}

double DirectionMetrics::outage_fraction() const
{
    return tb_count == 0 ? 0.0 : static_cast<double>(tb_outage) / static_cast<double>(tb_count);
}

InvariantStats &InvariantStats::operator+=(const InvariantStats &o)
{
    slots += o.slots;
    overlap_violations += o.overlap_violations;
    pmrs_misaligned += o.pmrs_misaligned;
    pmrs_fallbacks += o.pmrs_fallbacks;
    amrs_gaps += o.amrs_gaps;
    unexpected_padding += o.unexpected_padding;
    fairness_windows += o.fairness_windows;
    fairness_violations += o.fairness_violations;
    causality_violations += o.causality_violations;
    return *this;
}

double MetricsReport::padding_ratio() const
{
    const double pad = static_cast<double>(dl.padding_symbols + ul.padding_symbols);
    const double used = static_cast<double>(dl.allocated_symbols + ul.allocated_symbols);
    return pad + used == 0.0 ? 0.0 : pad / (pad + used);
}

double DirectionSummary::outage_fraction() const
{
    return tb_count == 0 ? 0.0 : static_cast<double>(tb_outage) / static_cast<double>(tb_count);
}

double DirectionSummary::step_fraction() const
{
    return tb_count == 0 ? 1.0 : static_cast<double>(tb_outage + tb_clear) / static_cast<double>(tb_count);
}

CampaignSummary aggregate(const std::vector<MetricsReport> &reports, const std::string &label)
{
    if (reports.empty())
        throw Error(ErrorCode::invalid_argument, "aggregate needs at least one report");
    CampaignSummary out;
    out.label = label;
    out.runs = static_cast<int>(reports.size());
    double pad = 0.0;
    double used = 0.0;
    for (auto d : {Direction::downlink, Direction::uplink})
    {
        DirectionSummary &s = d == Direction::downlink ? out.dl : out.ul;
        std::vector<double> thr;
        std::vector<double> delay;
        double offered = 0.0;
        for (const auto &r : reports)
        {
            const auto &m = r.at(d);
            append(s.delay_ms, m.delay_ms);
            append(s.sinr_db, m.sinr_db);
            append(s.bler, m.bler);
            thr.push_back(m.throughput_bps);
            if (!m.delay_ms.empty())
                delay.push_back(m.mean_delay_ms());
            const double window = r.duration_s - r.warmup_s;
            offered += window > 0.0 ? static_cast<double>(m.offered_bits) / window : 0.0;
            s.tb_count += m.tb_count;
            s.tb_errors += m.tb_errors;
            s.tb_outage += m.tb_outage;
            s.tb_clear += m.tb_clear;
            s.harq_retx += m.harq_retx;
            s.harq_abandoned += m.harq_abandoned;
            s.harq_max_gap_slots = std::max(s.harq_max_gap_slots, m.harq_max_gap_slots);
            s.am_retx += m.am_retx;
            pad += static_cast<double>(m.padding_symbols);
            used += static_cast<double>(m.allocated_symbols);
        }
        s.mean_throughput_bps = mean(thr);
        s.stderr_throughput_bps = standard_error(thr);
        s.mean_delay_ms = mean(delay);
        s.stderr_delay_ms = standard_error(delay);
        s.offered_bps = offered / static_cast<double>(reports.size());
    }
    for (const auto &r : reports)
        out.invariants += r.invariants;
    out.padding_ratio = pad + used == 0.0 ? 0.0 : pad / (pad + used);
    return out;
}

double percentile(const std::vector<double> &sorted, double q)
{
    if (sorted.empty())
        return std::nan("");
    const double n = static_cast<double>(sorted.size());
    auto idx = static_cast<std::size_t>(std::ceil(q * n - 1e-9));
    idx = std::clamp<std::size_t>(idx, 1, sorted.size());
    return sorted[idx - 1];
}

double cdf_at(const std::vector<double> &sorted, double x)
{
    if (sorted.empty())
        return 0.0;
    const auto it = std::upper_bound(sorted.begin(), sorted.end(), x);
    return static_cast<double>(it - sorted.begin()) / static_cast<double>(sorted.size());
}

std::string format_number(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

void emit_cdf(std::ostream &os, std::vector<double> samples)
{
    std::sort(samples.begin(), samples.end());
    os << "value,cdf\n";
    const double n = static_cast<double>(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i)
        os << format_number(samples[i]) << ',' << format_number(static_cast<double>(i + 1) / n) << '\n';
}

} // namespace mmwsim::sim
