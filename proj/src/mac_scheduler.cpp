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

#include "mmwsim/mac_scheduler.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <limits>
#include <map>
#include <numeric>
#include <ostream>

namespace mmwsim::mac
{

const char *to_string(SchedulerKind kind)
{
    switch (kind)
    {
    case SchedulerKind::tmrs:
        return "TMRS";
    case SchedulerKind::pmrs:
        return "PMRS";
    case SchedulerKind::amrs:
        return "AMRS";
    }
    return "?";
}

SchedulerKind parse_scheduler_kind(const std::string &name)
{
    std::string up;
    for (char c : name)
        up.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
    if (up == "TMRS")
        return SchedulerKind::tmrs;
    if (up == "PMRS")
        return SchedulerKind::pmrs;
    if (up == "AMRS")
        return SchedulerKind::amrs;
    throw Error(ErrorCode::config, "unknown scheduler '" + name + "'");
}

int requested_symbols(long queued_bits, long bits_per_symbol)
{
    if (queued_bits <= 0)
        return 0;
    if (bits_per_symbol <= 0)
        throw Error(ErrorCode::invalid_argument, "bits per symbol must be positive");
    return static_cast<int>((queued_bits + bits_per_symbol - 1) / bits_per_symbol);
}

std::vector<int> rr_order(const std::vector<DemandEntry> &demands, const RoundRobin &rr)
{
    std::vector<const DemandEntry *> items;
    for (const auto &d : demands)
        if (d.requested_symbols > 0)
            items.push_back(&d);
    auto key = [&](const DemandEntry *d) {
        return std::make_tuple(d->retransmission ? 0 : 1, d->user < rr.cursor ? 1 : 0, d->user);
    };
    std::sort(items.begin(), items.end(), [&](auto *a, auto *b) { return key(a) < key(b); });
    std::vector<int> out;
    for (auto *d : items)
        out.push_back(d->user);
    return out;
}

namespace
{

struct Prepared
{
    std::vector<int> order;
    std::map<int, const DemandEntry *> by_user;
};

Prepared prepare(const std::vector<DemandEntry> &demands, const RoundRobin &rr, const Region &region)
{
    if (region.layers < 1)
        throw Error(ErrorCode::invalid_argument, "scheduler needs at least one layer");
    if (region.symbols < 0 || region.first_symbol < 1 || region.first_symbol + region.symbols - 1 > 12)
        throw Error(ErrorCode::invalid_argument, "scheduling region outside the data symbols");
    Prepared p;
    for (const auto &d : demands)
    {
        if (d.requested_symbols <= 0)
            continue;
        if (!p.by_user.emplace(d.user, &d).second)
            throw Error(ErrorCode::invalid_argument, "duplicate demand for user " + std::to_string(d.user));
    }
    p.order = rr_order(demands, rr);
    return p;
}

/// Next list starts at the first user left without symbols. When everyone
/// was served it continues after the last one, except that a slot whose fill
/// pass pushed someone past the cap rotates the list by one so the leftovers
/// move around.
void advance_cursor(RoundRobin &rr, const std::vector<int> &order, const std::map<int, int> &counts, bool bonus)
{
    if (order.empty())
        return;
    for (int u : order)
    {
        auto it = counts.find(u);
        if (it == counts.end() || it->second == 0)
        {
            rr.cursor = u;
            return;
        }
    }
    if (!bonus)
    {
        rr.cursor = order.back() + 1;
        return;
    }
    std::vector<int> ids(order);
    std::sort(ids.begin(), ids.end());
    auto it = std::upper_bound(ids.begin(), ids.end(), rr.cursor - 1);
    const int head = (it == ids.end()) ? ids.front() : *it;
    rr.cursor = head + 1;
}

/// Symbol counts for one layer group of users sharing `symbols` symbols.
std::map<int, int> group_counts(const std::vector<int> &group, const Prepared &p, int symbols, int cap)
{
    std::map<int, int> counts;
    int remaining = symbols;
    for (int u : group)
    {
        const int req = p.by_user.at(u)->requested_symbols;
        int c = req >= symbols ? std::min(req, cap) : req;
        c = std::min(c, remaining);
        counts[u] = c;
        remaining -= c;
    }
    bool progress = true;
    while (remaining > 0 && progress)
    {
        progress = false;
        for (int u : group)
        {
            if (remaining == 0)
                break;
            if (counts[u] > 0 && counts[u] < p.by_user.at(u)->requested_symbols)
            {
                ++counts[u];
                --remaining;
                progress = true;
            }
        }
    }
    return counts;
}

Allocation make_allocation(const DemandEntry &d, int layer, int start, int length)
{
    Allocation a;
    a.user = d.user;
    a.layer = layer;
    a.start = start;
    a.length = length;
    a.direction = d.direction;
    a.retransmission = d.retransmission;
    return a;
}

} // namespace

std::vector<int> amrs_group_sizes(int users, int layers)
{
    if (layers < 1)
        throw Error(ErrorCode::invalid_argument, "layers must be >= 1");
    std::vector<int> sizes;
    const int groups = std::min(users, layers);
    for (int g = 0; g < groups; ++g)
        sizes.push_back(users / groups + (g < users % groups ? 1 : 0));
    return sizes;
}

std::vector<Allocation> amrs_schedule(const std::vector<DemandEntry> &demands, RoundRobin &rr, Region region)
{
    auto p = prepare(demands, rr, region);
    std::vector<Allocation> out;
    const int n_u = static_cast<int>(p.order.size());
    if (n_u == 0 || region.symbols == 0)
        return out;

    const int cap = std::max(1, region.symbols * region.layers / n_u);
    const auto sizes = amrs_group_sizes(n_u, region.layers);
    auto layout = [&](const std::vector<int> &order) {
        std::map<int, int> counts;
        std::size_t pos = 0;
        for (int size : sizes)
        {
            std::vector<int> group(order.begin() + static_cast<long>(pos),
                                   order.begin() + static_cast<long>(pos + static_cast<std::size_t>(size)));
            pos += static_cast<std::size_t>(size);
            counts.merge(group_counts(group, p, region.symbols, cap));
        }
        return counts;
    };

    bool saturated = true;
    for (int u : p.order)
    {
        const auto *d = p.by_user.at(u);
        saturated = saturated && !d->retransmission && d->requested_symbols >= 12;
    }
    if (!saturated)
        rr.recent.clear();

    auto order = p.order;
    auto counts = layout(order);
    if (saturated)
    {
        // excess over one quantum for every window ending at this slot,
        // the longest one first
        auto score = [&](const std::map<int, int> &c) {
            std::vector<long long> excess;
            std::map<int, long long> total;
            int quantum = 0;
            for (const auto &[u, n] : c)
            {
                total[u] = n;
                quantum = std::max(quantum, n);
            }
            long long spread = 0;
            auto add = [&] {
                long long lo = std::numeric_limits<long long>::max(), hi = 0;
                for (const auto &[u, t] : total)
                {
                    lo = std::min(lo, t);
                    hi = std::max(hi, t);
                }
                spread = hi - lo;
                excess.push_back(std::max(0LL, spread - quantum));
            };
            add();
            for (auto it = rr.recent.rbegin(); it != rr.recent.rend(); ++it)
            {
                for (auto &[u, t] : total)
                {
                    auto f = it->find(u);
                    const int n = f == it->end() ? 0 : f->second;
                    t += n;
                    quantum = std::max(quantum, n);
                }
                add();
            }
            std::reverse(excess.begin(), excess.end());
            excess.push_back(spread);
            return excess;
        };
        auto best = score(counts);
        auto rotated = order;
        for (int r = 1; r < n_u; ++r)
        {
            std::rotate(rotated.begin(), rotated.begin() + 1, rotated.end());
            auto c = layout(rotated);
            auto s = score(c);
            if (s < best)
            {
                best = std::move(s);
                order = rotated;
                counts = std::move(c);
            }
        }
        rr.recent.push_back(counts);
        while (static_cast<int>(rr.recent.size()) >= RoundRobin::history)
            rr.recent.pop_front();
    }

    bool bonus = false;
    std::size_t pos = 0;
    for (std::size_t g = 0; g < sizes.size(); ++g)
    {
        int start = region.first_symbol;
        for (int k = 0; k < sizes[g]; ++k, ++pos)
        {
            const int u = order[pos];
            const int c = counts[u];
            bonus = bonus || c > cap;
            if (c == 0)
                continue;
            out.push_back(make_allocation(*p.by_user.at(u), static_cast<int>(g), start, c));
            start += c;
        }
    }
    advance_cursor(rr, order, counts, bonus);
    return out;
}

std::vector<Allocation> tmrs_schedule(const std::vector<DemandEntry> &demands, RoundRobin &rr, Region region)
{
    region.layers = 1;
    return amrs_schedule(demands, rr, region);
}

std::vector<Allocation> pmrs_schedule(const std::vector<DemandEntry> &demands, RoundRobin &rr, Region region,
                                      std::vector<int> *bundle_starts)
{
    auto p = prepare(demands, rr, region);
    std::vector<Allocation> out;
    const int n_u = static_cast<int>(p.order.size());
    if (n_u == 0 || region.symbols == 0)
        return out;

    int n_b = (n_u + region.layers - 1) / region.layers;
    int n_a = 0;
    if (n_b > region.symbols)
    {
        n_b = region.symbols;
        n_a = 1;
    }
    else
    {
        n_a = region.symbols / n_b;
    }

    std::map<int, int> counts;
    for (int b = 0; b < n_b; ++b)
    {
        const int start = region.first_symbol + b * n_a;
        if (bundle_starts)
            bundle_starts->push_back(start);
        for (int l = 0; l < region.layers; ++l)
        {
            const std::size_t idx = static_cast<std::size_t>(b * region.layers + l);
            if (idx >= p.order.size())
                break;
            const int u = p.order[idx];
            const auto &d = *p.by_user.at(u);
            const int len = std::min(d.requested_symbols, n_a);
            auto a = make_allocation(d, l, start, len);
            a.padding = n_a - len;
            a.bundle = b;
            out.push_back(a);
            counts[u] = len;
        }
    }
    advance_cursor(rr, p.order, counts, false);
    return out;
}

std::pair<int, int> split_directions(int dl_demand_symbols, int ul_demand_symbols, int data_symbols)
{
    const int d = std::max(dl_demand_symbols, 0);
    const int u = std::max(ul_demand_symbols, 0);
    if (d == 0 && u == 0)
        return {0, 0};
    if (u == 0)
        return {data_symbols, 0};
    if (d == 0)
        return {0, data_symbols};
    int n_dl = static_cast<int>(std::lround(static_cast<double>(data_symbols) * d / (static_cast<double>(d) + u)));
    n_dl = std::clamp(n_dl, 1, data_symbols - 1);
    return {n_dl, data_symbols - n_dl};
}

MmseGrouping mmse_groups(const std::vector<Allocation> &allocations)
{
    const std::size_t n = allocations.size();
    std::vector<std::size_t> parent(n);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](std::size_t x) {
        while (parent[x] != x)
            x = parent[x] = parent[parent[x]];
        return x;
    };
    for (std::size_t i = 0; i < n; ++i)
    {
        for (std::size_t j = i + 1; j < n; ++j)
        {
            const auto &a = allocations[i];
            const auto &b = allocations[j];
            if (a.start < b.end() && b.start < a.end())
                parent[find(i)] = find(j);
        }
    }

    std::map<std::size_t, std::vector<int>> components;
    for (std::size_t i = 0; i < n; ++i)
        components[find(i)].push_back(static_cast<int>(i));

    MmseGrouping out;
    // deterministic order: by first member index
    std::vector<std::vector<int>> comps;
    for (auto &[root, members] : components)
        comps.push_back(members);
    std::sort(comps.begin(), comps.end());
    for (auto &members : comps)
    {
        const int s = allocations[static_cast<std::size_t>(members.front())].start;
        const bool sync = std::all_of(members.begin(), members.end(), [&](int i) {
            return allocations[static_cast<std::size_t>(i)].start == s;
        });
        if (sync)
            out.groups.push_back(members);
        else
            out.fallback.insert(out.fallback.end(), members.begin(), members.end());
    }
    std::sort(out.fallback.begin(), out.fallback.end());
    return out;
}

void apply_grouping(std::vector<Allocation> &allocations, const MmseGrouping &grouping)
{
    for (auto &a : allocations)
        a.bf_mode = BfMode::mmse;
    for (int i : grouping.fallback)
        allocations[static_cast<std::size_t>(i)].bf_mode = BfMode::cbf_fallback;
}

Scheduler::Scheduler(SchedulerKind kind, int layers) : kind_(kind), layers_(layers)
{
    if (layers < 1)
        throw Error(ErrorCode::config, "layers must be >= 1");
    if (kind == SchedulerKind::tmrs && layers != 1)
        throw Error(ErrorCode::config, "TMRS requires exactly one layer");
}

SlotPlan Scheduler::plan(std::int64_t slot, const std::vector<DemandEntry> &demands)
{
    SlotPlan plan;
    plan.slot = slot;
    std::vector<DemandEntry> per_dir[2];
    int need[2] = {0, 0};
    for (const auto &d : demands)
    {
        if (d.requested_symbols <= 0)
            continue;
        const int i = static_cast<int>(d.direction);
        per_dir[i].push_back(d);
        need[i] += d.requested_symbols;
    }
    const auto [n_dl, n_ul] = split_directions(need[0], need[1], 12);
    plan.dl_symbols = n_dl;
    plan.ul_symbols = n_ul;

    const Region regions[2] = {{1, n_dl, layers_}, {1 + n_dl, n_ul, layers_}};
    for (int i = 0; i < 2; ++i)
    {
        if (regions[i].symbols == 0)
            continue;
        std::vector<Allocation> allocs;
        switch (kind_)
        {
        case SchedulerKind::tmrs:
            allocs = tmrs_schedule(per_dir[i], rr_[i], regions[i]);
            break;
        case SchedulerKind::pmrs:
            allocs = pmrs_schedule(per_dir[i], rr_[i], regions[i], &plan.bundle_starts);
            break;
        case SchedulerKind::amrs:
            allocs = amrs_schedule(per_dir[i], rr_[i], regions[i]);
            break;
        }
        plan.allocations.insert(plan.allocations.end(), allocs.begin(), allocs.end());
    }
    apply_grouping(plan.allocations, mmse_groups(plan.allocations));
    return plan;
}

// ---------------------------------------------------------------------------

void harq_start(HarqProcess &process, const TransportBlock &tb, std::int64_t slot)
{
    if (process.state != HarqState::idle)
        throw Error(ErrorCode::protocol, "HARQ process " + std::to_string(process.id) + " is busy");
    process.tb = tb;
    process.attempts = 1;
    process.state = HarqState::awaiting_feedback;
    process.last_tx_slot = slot;
}

void harq_retransmit(HarqProcess &process, std::int64_t slot)
{
    if (process.state != HarqState::pending_retransmission)
        throw Error(ErrorCode::protocol, "HARQ process " + std::to_string(process.id) + " has nothing to resend");
    ++process.attempts;
    process.state = HarqState::awaiting_feedback;
    process.last_tx_slot = slot;
}

HarqAction harq_on_feedback(HarqProcess &process, bool ack, std::int64_t slot)
{
    (void)slot;
    if (process.state != HarqState::awaiting_feedback)
        throw Error(ErrorCode::protocol, "feedback for HARQ process " + std::to_string(process.id) +
                                             " that is not awaiting feedback");
    if (ack)
    {
        process.state = HarqState::idle;
        return HarqAction::released;
    }
    if (process.attempts < process.max_attempts)
    {
        process.state = HarqState::pending_retransmission;
        return HarqAction::retransmit;
    }
    process.state = HarqState::idle;
    return HarqAction::dropped;
}

void harq_abandon(HarqProcess &process)
{
    if (process.state != HarqState::pending_retransmission)
        throw Error(ErrorCode::protocol, "HARQ process " + std::to_string(process.id) + " has nothing to abandon");
    process.state = HarqState::idle;
}

// ---------------------------------------------------------------------------

void write_plan_header(std::ostream &os)
{
    os << "slot,layer,user,start,length,direction,bf_mode,mcs,is_retx,padding_symbols\n";
}

void write_plan_rows(std::ostream &os, const SlotPlan &plan)
{
    char buf[160];
    for (const auto &a : plan.allocations)
    {
        std::snprintf(buf, sizeof buf, "%lld,%d,%d,%d,%d,%s,%s,%d,%d,%d\n", static_cast<long long>(plan.slot),
                      a.layer, a.user, a.start, a.length, to_string(a.direction),
                      a.bf_mode == BfMode::mmse ? "mmse" : "cbf_fallback", a.mcs, a.retransmission ? 1 : 0,
                      a.padding);
        os << buf;
    }
}

} // namespace mmwsim::mac
