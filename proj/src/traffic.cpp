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

#include "mmwsim/traffic.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

namespace mmwsim::traffic
{

void write_packet_header(std::ostream &os)
{
    os << "id,user,direction,bytes,created_ns,first_tx_ns,outcome,time_ns,harq_attempts,am_retx\n";
}

void write_packet_row(std::ostream &os, const PacketRecord &p)
{
    const char *outcome = p.is_delivered() ? "delivered" : (p.is_dropped() ? "dropped" : "queued");
    const TimeNs t = p.is_delivered() ? p.delivered : (p.is_dropped() ? p.dropped : -1);
    os << p.id << ',' << p.flow.user << ',' << to_string(p.flow.direction) << ',' << p.bytes << ',' << p.created
       << ',' << p.first_tx << ',' << outcome << ',' << t << ',' << p.harq_attempts << ',' << p.am_retx << '\n';
}

const char *to_string(FlowType t)
{
    return t == FlowType::cbr ? "cbr" : "adaptive";
}

const char *to_string(Profile p)
{
    switch (p)
    {
    case Profile::udp_slow:
        return "udp-slow";
    case Profile::udp_fast:
        return "udp-fast";
    case Profile::adaptive:
        return "adaptive";
    }
    return "?";
}

Profile parse_profile(const std::string &name)
{
    for (auto p : {Profile::udp_slow, Profile::udp_fast, Profile::adaptive})
        if (name == to_string(p))
            return p;
    throw Error(ErrorCode::config, "unknown traffic profile '" + name + "' (expected udp-slow, udp-fast or adaptive)");
}

void FlowConfig::validate() const
{
    if (interval <= 0)
        throw Error(ErrorCode::config, "flow interval must be positive");
    if (packet_bytes <= 0)
        throw Error(ErrorCode::config, "packet size must be positive");
}

FlowConfig flow_for(Profile p)
{
    switch (p)
    {
    case Profile::udp_slow:
        return {FlowType::cbr, 1500 * kNsPerUs, 1500};
    case Profile::udp_fast:
        return {FlowType::cbr, 150 * kNsPerUs, 1500};
    case Profile::adaptive:
        return {FlowType::adaptive, 0, 1500};
    }
    return {};
}

double offered_rate_bps(const FlowConfig &f)
{
    if (f.type != FlowType::cbr)
        return 0.0;
    return 8.0 * f.packet_bytes / to_seconds(f.interval);
}

CbrSource::CbrSource(TimeNs interval, int packet_bytes, TimeNs first)
    : interval_(interval), packet_bytes_(packet_bytes), next_(first)
{
    if (interval <= 0)
        throw Error(ErrorCode::invalid_argument, "CBR interval must be positive");
    if (packet_bytes <= 0)
        throw Error(ErrorCode::invalid_argument, "CBR packet size must be positive");
}

std::vector<TimeNs> CbrSource::tick(TimeNs now)
{
    std::vector<TimeNs> out;
    while (next_ <= now)
    {
        out.push_back(next_);
        next_ += interval_;
    }
    return out;
}

void AdaptiveConfig::validate() const
{
    if (initial_window < 1.0 || max_window < initial_window)
        throw Error(ErrorCode::config, "adaptive windows need 1 <= initial <= max");
    if (min_rto <= 0)
        throw Error(ErrorCode::config, "adaptive minimum RTO must be positive");
    if (packet_bytes <= 0)
        throw Error(ErrorCode::config, "packet size must be positive");
}

AdaptiveSource::AdaptiveSource(AdaptiveConfig cfg) : cfg_(cfg), cwnd_(cfg.initial_window)
{
    cfg_.validate();
}

TimeNs AdaptiveSource::rto() const
{
    return srtt_ < 0 ? cfg_.min_rto : std::max(cfg_.min_rto, 2 * srtt_);
}

int AdaptiveSource::releasable() const
{
    const long allowed = static_cast<long>(std::floor(cwnd_ + 1e-9)) - static_cast<long>(in_flight_.size());
    return static_cast<int>(std::max(0L, allowed));
}

void AdaptiveSource::on_send(PacketId id, TimeNs now)
{
    in_flight_.emplace(id, now);
    highest_sent_ = std::max(highest_sent_, id);
}

bool AdaptiveSource::on_ack(PacketId id, TimeNs rtt_sample)
{
    auto it = in_flight_.find(id);
    if (it == in_flight_.end())
        return false;
    in_flight_.erase(it);
    srtt_ = srtt_ < 0 ? rtt_sample : (7 * srtt_ + rtt_sample) / 8;
    if (cwnd_ < ssthresh_)
        cwnd_ += 1.0;
    else
        cwnd_ += 1.0 / cwnd_;
    cwnd_ = std::min(cwnd_, cfg_.max_window);
    return true;
}

bool AdaptiveSource::on_loss(PacketId id)
{
    auto it = in_flight_.find(id);
    if (it == in_flight_.end())
        return false;
    in_flight_.erase(it);
    if (any_reduction_ && id <= recovery_point_)
        return true;
    ssthresh_ = std::max(cwnd_ / 2.0, 1.0);
    cwnd_ = ssthresh_;
    recovery_point_ = highest_sent_;
    any_reduction_ = true;
    return true;
}

void AdaptiveSource::on_rto()
{
    ssthresh_ = std::max(cwnd_ / 2.0, 2.0);
    cwnd_ = 1.0;
    recovery_point_ = highest_sent_;
    any_reduction_ = true;
}

} // namespace mmwsim::traffic
