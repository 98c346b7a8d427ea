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

#include "mmwsim/rlc.hpp"

namespace mmwsim::rlc
{

const char *to_string(RlcMode m)
{
    return m == RlcMode::um ? "um" : "am";
}

RlcMode parse_rlc_mode(const std::string &name)
{
    if (name == "um" || name == "UM")
        return RlcMode::um;
    if (name == "am" || name == "AM")
        return RlcMode::am;
    throw Error(ErrorCode::config, "unknown rlc mode '" + name + "' (expected um or am)");
}

void RlcConfig::validate() const
{
    if (reordering_timeout <= 0)
        throw Error(ErrorCode::config, "rlc reordering timeout must be positive");
    if (max_retx < 0)
        throw Error(ErrorCode::config, "rlc max retransmissions must be >= 0");
    if (buffer_bytes <= 0)
        throw Error(ErrorCode::config, "rlc buffer size must be positive");
}

long TbContents::bits() const
{
    long total = 0;
    for (const auto &s : sdus)
        total += s.bits();
    return total;
}

RlcEntity::RlcEntity(RlcConfig cfg) : cfg_(cfg)
{
    cfg_.validate();
}

bool RlcEntity::enqueue(PacketId id, int bytes)
{
    if (bytes <= 0)
        throw Error(ErrorCode::invalid_argument, "rlc_enqueue: packet size must be positive");
    if (queued_bytes_ + bytes > cfg_.buffer_bytes)
    {
        ++counters_.rejected;
        return false;
    }
    Sdu sdu{id, bytes, next_sn_++, 0};
    fresh_.push_back(sdu);
    queued_bytes_ += bytes;
    ++counters_.accepted;
    if (cfg_.mode == RlcMode::am)
        tracks_.emplace(id, Track{sdu, State::queued, -1});
    return true;
}

long RlcEntity::queued_bits() const
{
    return 8L * queued_bytes_;
}

long RlcEntity::head_bits() const
{
    if (!retx_.empty())
        return retx_.front().bits();
    if (!fresh_.empty())
        return fresh_.front().bits();
    return 0;
}

TbContents RlcEntity::take(long capacity_bits)
{
    TbContents tb;
    long left = capacity_bits;
    for (auto *q : {&retx_, &fresh_})
    {
        while (!q->empty() && q->front().bits() <= left)
        {
            left -= q->front().bits();
            queued_bytes_ -= q->front().bytes;
            tb.sdus.push_back(q->front());
            q->pop_front();
        }
        if (!q->empty())
            break; // keep FIFO order: nothing overtakes a stuck head
    }
    if (tb.sdus.empty())
        return tb;
    tb.tb_id = next_tb_++;
    if (cfg_.mode == RlcMode::am)
        for (const auto &s : tb.sdus)
            tracks_.at(s.id).state = State::in_flight;
    tbs_.emplace(tb.tb_id, tb.sdus);
    return tb;
}

void RlcEntity::arm_timer(Track &t, TimeNs now, Outcome &out)
{
    if (t.timer >= 0)
        return;
    t.timer = now + cfg_.reordering_timeout;
    out.timers.push_back({t.sdu.id, t.timer});
}

void RlcEntity::resolve(const Sdu &sdu, bool received, TimeNs now, Outcome &out)
{
    resolved_.emplace(sdu.sn, std::make_pair(sdu, received));
    for (auto it = resolved_.find(next_expected_); it != resolved_.end(); it = resolved_.find(next_expected_))
    {
        const auto &[s, ok] = it->second;
        if (ok)
        {
            out.delivered.push_back({s.id, now, s.am_retx});
            ++counters_.delivered;
        }
        tracks_.erase(s.id);
        resolved_.erase(it);
        ++next_expected_;
    }
}

Outcome RlcEntity::on_tb_outcome(std::uint64_t tb_id, bool delivered, bool final, TimeNs now)
{
    auto it = tbs_.find(tb_id);
    if (it == tbs_.end())
        throw Error(ErrorCode::protocol, "rlc: unknown transport block " + std::to_string(tb_id));
    Outcome out;
    const std::vector<Sdu> sdus = it->second;
    if (delivered || final)
        tbs_.erase(it);

    if (cfg_.mode == RlcMode::um)
    {
        if (delivered)
        {
            for (const auto &s : sdus)
                out.delivered.push_back({s.id, now, 0});
            counters_.delivered += static_cast<long long>(sdus.size());
        }
        else if (final)
        {
            for (const auto &s : sdus)
                out.dropped.push_back(s.id);
            counters_.dropped += static_cast<long long>(sdus.size());
        }
        return out;
    }

    for (const auto &s : sdus)
    {
        Track &t = tracks_.at(s.id);
        if (delivered)
        {
            t.timer = -1;
            t.state = State::received;
            resolve(t.sdu, true, now, out);
        }
        else
        {
            arm_timer(t, now, out);
            if (final)
                t.state = State::lost;
        }
    }
    return out;
}

Outcome RlcEntity::on_timer(PacketId id, TimeNs now)
{
    Outcome out;
    auto it = tracks_.find(id);
    if (it == tracks_.end() || it->second.timer != now)
        return out;
    Track &t = it->second;
    t.timer = -1;
    if (t.state == State::in_flight)
    {
        arm_timer(t, now, out);
        return out;
    }
    if (t.state != State::lost)
        return out;
    if (t.sdu.am_retx < cfg_.max_retx)
    {
        ++t.sdu.am_retx;
        t.state = State::queued;
        retx_.push_back(t.sdu);
        queued_bytes_ += t.sdu.bytes;
        ++counters_.am_retransmissions;
        out.retransmitted.push_back(id);
        return out;
    }
    ++counters_.dropped;
    out.dropped.push_back(id);
    const Sdu sdu = t.sdu;
    resolve(sdu, false, now, out);
    return out;
}

} // namespace mmwsim::rlc
