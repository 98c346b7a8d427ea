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

#ifndef MMWSIM_RLC_HPP
#define MMWSIM_RLC_HPP

#include "mmwsim/traffic.hpp"

#include <cstdint>
#include <deque>
#include <map>
#include <string>
#include <vector>

namespace mmwsim::rlc
{

using traffic::PacketId;

enum class RlcMode
{
    um,
    am,
};

const char *to_string(RlcMode m);
RlcMode parse_rlc_mode(const std::string &name);

struct RlcConfig
{
    RlcMode mode = RlcMode::um;
    TimeNs reordering_timeout = 10 * kNsPerMs;
    int max_retx = 8;
    long buffer_bytes = 10'000'000; // drop-tail limit on queued (not in-flight) bytes

    void validate() const;
};

/// One SDU: a whole application packet, never segmented.
struct Sdu
{
    PacketId id = 0;
    int bytes = 0;
    std::uint64_t sn = 0;
    int am_retx = 0;

    long bits() const { return 8L * bytes; }
};

struct TbContents
{
    std::uint64_t tb_id = 0;
    std::vector<Sdu> sdus;

    bool empty() const { return sdus.empty(); }
    long bits() const;
};

struct Delivery
{
    PacketId id = 0;
    TimeNs time = 0;
    int am_retx = 0;
};

struct TimerRequest
{
    PacketId id = 0;
    TimeNs expiry = 0;
};

/// Everything the engine needs to act on after an RLC event.
struct Outcome
{
    std::vector<Delivery> delivered;
    std::vector<PacketId> dropped;
    std::vector<TimerRequest> timers;
    std::vector<PacketId> retransmitted; // re-queued by an AM timer
};

struct RlcCounters
{
    long long accepted = 0;
    long long rejected = 0; // tail drops at enqueue
    long long delivered = 0;
    long long dropped = 0;
    long long am_retransmissions = 0;
};

/// Transmitter and receiver of one flow. Status reporting is ideal, so both
/// ends live in one object.
class RlcEntity
{
  public:
    explicit RlcEntity(RlcConfig cfg = {});

    const RlcConfig &config() const { return cfg_; }

    /// Appends a packet; returns false when the buffer limit drops it.
    bool enqueue(PacketId id, int bytes);

    /// Queued bits awaiting transmission (AM retransmissions included).
    long queued_bits() const;
    std::size_t queued_packets() const { return retx_.size() + fresh_.size(); }
    /// Bits of the first SDU to be sent next, 0 when nothing is queued.
    long head_bits() const;

    /// Greedy FIFO packing of whole SDUs, retransmissions first. Returns an
    /// empty TB (and registers nothing) when the head SDU does not fit.
    TbContents take(long capacity_bits);

    /// Result of one transmission attempt of `tb_id`. `final` is false while
    /// HARQ will try again, in which case the TB stays registered.
    /// Unknown TB ids raise Error(protocol).
    Outcome on_tb_outcome(std::uint64_t tb_id, bool delivered, bool final, TimeNs now);

    /// Reordering timer expiry; stale or cancelled timers are ignored.
    Outcome on_timer(PacketId id, TimeNs now);

    const RlcCounters &counters() const { return counters_; }
    /// accepted - delivered - dropped
    long long outstanding() const { return counters_.accepted - counters_.delivered - counters_.dropped; }

  private:
    enum class State : std::uint8_t
    {
        queued,
        in_flight,
        lost,     // waiting for its reordering timer
        received, // held by the in-order receiver
    };

    struct Track
    {
        Sdu sdu;
        State state = State::queued;
        TimeNs timer = -1;
    };

    void arm_timer(Track &t, TimeNs now, Outcome &out);
    void resolve(const Sdu &sdu, bool received, TimeNs now, Outcome &out);

    RlcConfig cfg_;
    std::deque<Sdu> retx_;
    std::deque<Sdu> fresh_;
    long queued_bytes_ = 0;
    std::map<std::uint64_t, std::vector<Sdu>> tbs_;
    std::uint64_t next_tb_ = 1;
    std::uint64_t next_sn_ = 0;
    // AM bookkeeping, keyed by packet id
    std::map<PacketId, Track> tracks_;
    // in-order receiver
    std::uint64_t next_expected_ = 0;
    std::map<std::uint64_t, std::pair<Sdu, bool>> resolved_; // sn -> (sdu, received)
    RlcCounters counters_;
};

} // namespace mmwsim::rlc

#endif
