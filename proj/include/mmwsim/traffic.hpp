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

#ifndef MMWSIM_TRAFFIC_HPP
#define MMWSIM_TRAFFIC_HPP

#include "mmwsim/common.hpp"

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <map>
#include <string>
#include <vector>

namespace mmwsim::traffic
{

using PacketId = std::uint64_t;

/// Identifies one traffic flow: a user and a direction.
struct FlowId
{
    int user = 0;
    Direction direction = Direction::downlink;

    int index() const { return 2 * user + static_cast<int>(direction); }
    friend bool operator==(const FlowId &, const FlowId &) = default;
};

struct PacketRecord
{
    PacketId id = 0;
    FlowId flow;
    int bytes = 0;
    TimeNs created = 0;
    TimeNs first_tx = -1;
    TimeNs delivered = -1; // -1 while undelivered
    TimeNs dropped = -1;
    int harq_attempts = 0;
    int am_retx = 0;

    bool is_delivered() const { return delivered >= 0; }
    bool is_dropped() const { return dropped >= 0; }
    double delay_ms() const { return static_cast<double>(delivered - created) / static_cast<double>(kNsPerMs); }
};

/// One CSV row per packet: id,user,direction,bytes,created_ns,first_tx_ns,outcome,time_ns,harq_attempts,am_retx
void write_packet_header(std::ostream &os);
void write_packet_row(std::ostream &os, const PacketRecord &p);

enum class FlowType
{
    cbr,
    adaptive,
};

const char *to_string(FlowType t);

/// Traffic profile applied to every user in both directions.
enum class Profile
{
    udp_slow,
    udp_fast,
    adaptive,
};

const char *to_string(Profile p);
Profile parse_profile(const std::string &name);

struct FlowConfig
{
    FlowType type = FlowType::cbr;
    TimeNs interval = 1500 * kNsPerUs;
    int packet_bytes = 1500;

    void validate() const;
};

FlowConfig flow_for(Profile p);

/// bits per second offered by one CBR flow
double offered_rate_bps(const FlowConfig &f);

/// Jitter-free constant-bit-rate generator. The first packet is created at
/// `next` (time zero by default).
class CbrSource
{
  public:
    CbrSource(TimeNs interval, int packet_bytes, TimeNs first = 0);

    /// Creation times of every packet due at or before `now`.
    std::vector<TimeNs> tick(TimeNs now);

    TimeNs interval() const { return interval_; }
    int packet_bytes() const { return packet_bytes_; }
    TimeNs next() const { return next_; }

  private:
    TimeNs interval_;
    int packet_bytes_;
    TimeNs next_;
};

struct AdaptiveConfig
{
    double initial_window = 10.0;
    double max_window = 64.0;
    TimeNs min_rto = 200 * kNsPerMs;
    int packet_bytes = 1500;

    void validate() const;
};

/// Window-based AIMD sender (NewReno-like). Windows count packets.
class AdaptiveSource
{
  public:
    explicit AdaptiveSource(AdaptiveConfig cfg = {});

    const AdaptiveConfig &config() const { return cfg_; }
    double window() const { return cwnd_; }
    double threshold() const { return ssthresh_; }
    std::size_t in_flight() const { return in_flight_.size(); }
    /// Smoothed RTT in ns, -1 before the first sample.
    TimeNs srtt() const { return srtt_; }
    /// max(min_rto, 2 srtt)
    TimeNs rto() const;
    /// Packets the window currently allows on top of those in flight.
    int releasable() const;

    void on_send(PacketId id, TimeNs now);
    /// Slow start adds one packet per ACK below the threshold, congestion
    /// avoidance 1/cwnd above it. Unknown ids are ignored (returns false).
    bool on_ack(PacketId id, TimeNs rtt_sample);
    /// Halves the window once per loss episode; later losses of packets sent
    /// before the reduction do not reduce it again. Unknown ids are ignored.
    bool on_loss(PacketId id);
    /// window = 1, threshold = max(window / 2, 2)
    void on_rto();

    TimeNs last_progress() const { return last_progress_; }
    void set_last_progress(TimeNs t) { last_progress_ = t; }

  private:
    AdaptiveConfig cfg_;
    double cwnd_;
    double ssthresh_ = std::numeric_limits<double>::infinity();
    TimeNs srtt_ = -1;
    std::map<PacketId, TimeNs> in_flight_;
    PacketId highest_sent_ = 0;
    PacketId recovery_point_ = 0;
    bool any_reduction_ = false;
    TimeNs last_progress_ = 0;
};

} // namespace mmwsim::traffic

#endif
