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

#ifndef MMWSIM_ENGINE_HPP
#define MMWSIM_ENGINE_HPP

#include "mmwsim/array_geometry.hpp"
#include "mmwsim/beamforming.hpp"
#include "mmwsim/channel.hpp"
#include "mmwsim/mac_scheduler.hpp"
#include "mmwsim/metrics.hpp"
#include "mmwsim/phy.hpp"
#include "mmwsim/rlc.hpp"
#include "mmwsim/traffic.hpp"

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <queue>
#include <vector>

namespace mmwsim::sim
{

/// Everything one simulation needs. Defaults reproduce the single-cell
/// desk-scale setup: 7 UEs in a 100 m disc, 28 GHz, 8x8 BS and 4x4 UE arrays.
struct Scenario
{
    std::uint64_t seed = 1;
    int ue_count = 7;
    double radius_m = 100.0;
    double min_distance_m = 10.0;
    double bs_height_m = 25.0;
    double ue_height_m = 1.6;

    int layers = 4;
    bf::BfKind bf = bf::BfKind::smbf;
    mac::SchedulerKind scheduler = mac::SchedulerKind::pmrs;
    bool harq = false;
    int harq_max_attempts = 3;
    rlc::RlcConfig rlc;
    traffic::Profile traffic = traffic::Profile::udp_slow;
    int packet_bytes = 1500;
    TimeNs interval_override = 0; // 0 keeps the profile interval
    traffic::AdaptiveConfig adaptive;

    double duration_s = 2.0;
    double warmup_s = 0.1;
    int runs = 20;

    phy::PhyConfig phy;
    channel::ChannelParams channel;
    array::ArrayConfig bs_array = array::default_bs_array();
    array::ArrayConfig ue_array = array::default_ue_array();
    int bs_codebook_azimuths = 16;
    int bs_codebook_elevations = 4;
    int ue_codebook_azimuths = 8;
    int ue_codebook_elevations = 2;
    double beam_period_ms = 5.0; // analog beam reselection period
    double mcs_gap_db = 3.0;

    /// Throws Error(config) naming the offending field(s).
    void validate() const;
    traffic::FlowConfig flow() const;
    long long slot_count() const;
};

/// Uniform over the disc area (r = R sqrt(u)), rejecting points closer than
/// `min_distance` (horizontal) to the BS at the origin.
std::vector<Vec3> drop_ues(std::uint64_t seed, int count, double radius, double min_distance = 10.0,
                           double height = 1.6);

enum class EventKind : std::uint8_t
{
    am_timer,
};

struct Event
{
    TimeNs time = 0;
    std::uint64_t seq = 0;
    EventKind kind = EventKind::am_timer;
    int flow = 0;
    std::uint64_t id = 0;
};

/// Time-ordered queue; equal times pop in insertion order.
class EventQueue
{
  public:
    void push(TimeNs time, EventKind kind, int flow, std::uint64_t id);
    bool empty() const { return heap_.empty(); }
    std::size_t size() const { return heap_.size(); }
    TimeNs next_time() const { return heap_.top().time; }
    Event pop();
    long long causality_violations() const { return violations_; }

  private:
    struct Later
    {
        bool operator()(const Event &a, const Event &b) const
        {
            return a.time != b.time ? a.time > b.time : a.seq > b.seq;
        }
    };
    std::priority_queue<Event, std::vector<Event>, Later> heap_;
    std::uint64_t seq_ = 0;
    TimeNs last_ = std::numeric_limits<TimeNs>::min();
    long long violations_ = 0;
};

/// Optional CSV sinks for one run.
struct RunTraces
{
    std::ostream *plan = nullptr;
    std::ostream *packets = nullptr;
};

/// Runs drop number `run_index` of the scenario. Deterministic in
/// (scenario, run_index).
MetricsReport run(const Scenario &scenario, int run_index = 0, const RunTraces &traces = {});

} // namespace mmwsim::sim

#endif
