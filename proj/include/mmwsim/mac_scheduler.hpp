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

#ifndef MMWSIM_MAC_SCHEDULER_HPP
#define MMWSIM_MAC_SCHEDULER_HPP

#include "mmwsim/common.hpp"

#include <cstdint>
#include <deque>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace mmwsim::mac
{

enum class SchedulerKind
{
    tmrs,
    pmrs,
    amrs,
};

const char *to_string(SchedulerKind kind);
SchedulerKind parse_scheduler_kind(const std::string &name);

enum class BfMode : std::uint8_t
{
    mmse,         // synchronous group, digital precoding allowed
    cbf_fallback, // asynchronous overlap, analog beams only
};

struct DemandEntry
{
    int user = 0;
    Direction direction = Direction::downlink;
    long queued_bits = 0;
    int requested_symbols = 0;
    bool retransmission = false;
};

/// ceil(queued / bits_per_symbol), at least 1 when anything is queued.
int requested_symbols(long queued_bits, long bits_per_symbol);

struct Allocation
{
    int user = 0;
    int layer = 0;
    int start = 1;  // first data symbol is 1
    int length = 0;
    Direction direction = Direction::downlink;
    int harq_process = -1;
    BfMode bf_mode = BfMode::mmse;
    int mcs = 0;
    bool retransmission = false;
    int padding = 0; // PMRS: idle symbols left on this layer inside the bundle
    int bundle = -1;

    int end() const { return start + length; } // one past the last symbol
};

struct SlotPlan
{
    std::int64_t slot = 0;
    std::vector<Allocation> allocations;
    std::vector<int> bundle_starts;
    int dl_symbols = 0;
    int ul_symbols = 0;
};

/// Round-robin position: the user id that heads the next list. `recent`
/// keeps the per-user symbols of the latest saturated slots.
struct RoundRobin
{
    static constexpr int history = 20;
    int cursor = 0;
    std::deque<std::map<int, int>> recent;
};

/// Users ordered for service: retransmissions first, then cyclic order from
/// the cursor. Only users present in `demands` appear.
std::vector<int> rr_order(const std::vector<DemandEntry> &demands, const RoundRobin &rr);

/// Region parameters shared by the three schedulers.
struct Region
{
    int first_symbol = 1;
    int symbols = 12;
    int layers = 1;
};

/// Single-layer round robin; identical to amrs_schedule with one layer.
std::vector<Allocation> tmrs_schedule(const std::vector<DemandEntry> &demands, RoundRobin &rr, Region region = {});

/// Padded multi-layer scheduler: N_b = ceil(N_u / N_l) bundles of
/// N_a = floor(N_s / N_b) symbols, one user per layer per bundle, all
/// starting at the bundle's first symbol.
std::vector<Allocation> pmrs_schedule(const std::vector<DemandEntry> &demands, RoundRobin &rr, Region region,
                                      std::vector<int> *bundle_starts = nullptr);

/// Asynchronous multi-layer scheduler: users split into N_l groups in RR
/// order, each group time-multiplexed on its own layer without gaps.
/// Saturated users are capped at floor(N_s N_l / N_u) symbols; symbols left
/// over after the cap go one at a time, in list order, to users that still
/// have demand.
std::vector<Allocation> amrs_schedule(const std::vector<DemandEntry> &demands, RoundRobin &rr, Region region);

/// Group sizes for `users` users on `layers` layers (integer division, the
/// first groups take the remainder).
std::vector<int> amrs_group_sizes(int users, int layers);

/// Data-region split: DL first, UL second, proportional to the requested
/// symbols of each direction, at least one symbol for a direction with demand.
std::pair<int, int> split_directions(int dl_demand_symbols, int ul_demand_symbols, int data_symbols = 12);

struct MmseGrouping
{
    std::vector<std::vector<int>> groups; // indices into the plan's allocations
    std::vector<int> fallback;            // indices reverted to analog beams
};

/// Allocations overlapping in time form connected components; a component
/// whose members all share one start symbol is an MMSE group, any other
/// component falls back to CBF as a whole.
MmseGrouping mmse_groups(const std::vector<Allocation> &allocations);

/// Writes the grouping result into each allocation's bf_mode.
void apply_grouping(std::vector<Allocation> &allocations, const MmseGrouping &grouping);

/// Per-slot orchestrator: splits the region, runs the configured scheduler
/// per direction and owns the round-robin cursors.
class Scheduler
{
  public:
    Scheduler(SchedulerKind kind, int layers);

    SchedulerKind kind() const { return kind_; }
    int layers() const { return layers_; }

    SlotPlan plan(std::int64_t slot, const std::vector<DemandEntry> &demands);

  private:
    SchedulerKind kind_;
    int layers_;
    RoundRobin rr_[2];
};

// ---------------------------------------------------------------------------
// HARQ

struct TransportBlock
{
    std::uint64_t id = 0;
    int user = 0;
    Direction direction = Direction::downlink;
    long bits = 0;          // capacity at the chosen MCS
    long payload_bits = 0;  // sum of carried packets
    int mcs = 0;
    int symbols = 0;
    std::vector<std::uint64_t> packets;
};

enum class HarqState : std::uint8_t
{
    idle,
    awaiting_feedback,
    pending_retransmission,
};

struct HarqProcess
{
    int id = 0;
    TransportBlock tb;
    int attempts = 0;
    int max_attempts = 3;
    HarqState state = HarqState::idle;
    std::int64_t last_tx_slot = -1;
};

enum class HarqAction : std::uint8_t
{
    released,
    retransmit,
    dropped,
};

/// Starts a fresh transmission of `tb`.
void harq_start(HarqProcess &process, const TransportBlock &tb, std::int64_t slot);
/// Marks a retransmission attempt.
void harq_retransmit(HarqProcess &process, std::int64_t slot);
/// Throws Error(protocol) for an idle or non-waiting process.
HarqAction harq_on_feedback(HarqProcess &process, bool ack, std::int64_t slot);
/// Gives up a pending retransmission that missed its slot; the process
/// returns to idle. Throws Error(protocol) unless a retransmission is pending.
void harq_abandon(HarqProcess &process);

// ---------------------------------------------------------------------------

void write_plan_header(std::ostream &os);
void write_plan_rows(std::ostream &os, const SlotPlan &plan);

} // namespace mmwsim::mac

#endif
