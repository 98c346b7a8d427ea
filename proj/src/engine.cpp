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

#include "mmwsim/engine.hpp"

#include "mmwsim/random.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <optional>
#include <ostream>

namespace mmwsim::sim
{

void Scenario::validate() const
{
    auto fail = [](const std::string &msg) { throw Error(ErrorCode::config, msg); };
    if (ue_count < 0)
        fail("ue_count must be >= 0");
    if (!(radius_m > 0.0))
        fail("radius_m must be positive");
    if (min_distance_m < 0.0 || min_distance_m >= radius_m)
        fail("min_distance_m must lie in [0, radius_m)");
    if (bs_height_m == ue_height_m && min_distance_m <= 0.0)
        fail("bs_height_m equals ue_height_m with min_distance_m = 0: degenerate geometry possible");
    if (layers < 1)
        fail("layers must be >= 1");
    if (scheduler == mac::SchedulerKind::tmrs && layers != 1)
        fail("scheduler = tmrs requires layers = 1 (got layers = " + std::to_string(layers) + ")");
    if (harq_max_attempts < 1)
        fail("harq_max_attempts must be >= 1");
    if (packet_bytes <= 0)
        fail("packet_bytes must be positive");
    if (interval_override < 0)
        fail("interval_us must be >= 0");
    if (duration_s < 0.0)
        fail("duration_s must be >= 0");
    if (warmup_s < 0.0)
        fail("warmup_s must be >= 0");
    if (runs < 1)
        fail("runs must be >= 1");
    if (bs_codebook_azimuths < 1 || bs_codebook_elevations < 1 || ue_codebook_azimuths < 1 ||
        ue_codebook_elevations < 1)
        fail("codebook grid counts must be >= 1");
    if (!(beam_period_ms > 0.0))
        fail("beam_period_ms must be positive");
    rlc.validate();
    adaptive.validate();
    phy.validate();
    channel.validate();
    bs_array.validate();
    ue_array.validate();
}

traffic::FlowConfig Scenario::flow() const
{
    auto f = traffic::flow_for(traffic);
    f.packet_bytes = packet_bytes;
    if (interval_override > 0)
        f.interval = interval_override;
    return f;
}

long long Scenario::slot_count() const
{
    const double slots = duration_s * static_cast<double>(kNsPerSecond) / static_cast<double>(phy.slot_duration_ns());
    return static_cast<long long>(std::floor(slots + 1e-9));
}

std::vector<Vec3> drop_ues(std::uint64_t seed, int count, double radius, double min_distance, double height)
{
    if (!(radius > 0.0))
        throw Error(ErrorCode::invalid_argument, "drop radius must be positive");
    if (min_distance >= radius)
        throw Error(ErrorCode::invalid_argument, "minimum distance must be below the drop radius");
    Rng rng = make_rng(seed, "drop");
    std::vector<Vec3> out;
    for (int i = 0; i < count; ++i)
    {
        double r = 0.0;
        double phi = 0.0;
        do
        {
            r = radius * std::sqrt(uniform01(rng));
            phi = kTwoPi * uniform01(rng);
        } while (r < min_distance);
        out.push_back({r * std::cos(phi), r * std::sin(phi), height});
    }
    return out;
}

void EventQueue::push(TimeNs time, EventKind kind, int flow, std::uint64_t id)
{
    heap_.push(Event{time, seq_++, kind, flow, id});
}

Event EventQueue::pop()
{
    Event e = heap_.top();
    heap_.pop();
    if (e.time < last_)
        ++violations_;
    last_ = e.time;
    return e;
}

namespace
{

constexpr int kWindow = 20; // fairness window in saturated slots

struct Link
{
    channel::MultipathChannel ch;
    double pathloss = 1.0;
    ComplexMatrix txp;       // clusters x BS beam library
    ComplexMatrix rxp;       // clusters x UE beam library
    ComplexMatrix phases;    // evaluated subcarriers x clusters
    ComplexVector phase_ref; // reference subcarrier, per cluster
    int bs_beam = 0;
    int ue_beam = 0;
};

struct Flow
{
    traffic::FlowId id;
    rlc::RlcEntity rlc;
    mac::HarqProcess harq;
    std::uint64_t rlc_tb = 0;
    std::int64_t nack_slot = -1;
    double cqi_db = 0.0;
    std::optional<traffic::CbrSource> cbr;
    std::optional<traffic::AdaptiveSource> adaptive;
};

/// MMSE precoding of one synchronous group: geff(k, i * size + j) is the
/// gain of user i through the effective beam of member j at evaluated
/// subcarrier k.
struct GroupPrecoding
{
    std::vector<int> members; // allocation indices
    Eigen::Index size = 0;
    ComplexMatrix geff;
    bool valid = false;
};

struct Tx
{
    int alloc = 0;
    int flow = 0;
    bool retx = false;
    mac::TransportBlock tb;
    double sinr_db = 0.0;
    double bler = 0.0;
};

struct FairnessWindow
{
    std::deque<std::vector<int>> slots; // per-user symbols of each saturated slot
    std::deque<int> quantum;
};

class Simulation
{
  public:
    Simulation(const Scenario &sc, int run_index, const RunTraces &traces);
    MetricsReport execute();

  private:
    void select_beams();
    double snr_db(int u);
    const ComplexVector &amplitudes(int u, int symbol);
    ComplexVector analog_gain(int user, int bs_beam, int symbol);
    GroupPrecoding precode(const std::vector<int> &members, const mac::SlotPlan &plan);
    ComplexVector gain_toward(int user, int alloc, int symbol, const mac::SlotPlan &plan);

    void create_packet(int f, TimeNs t);
    void release_adaptive(int f, TimeNs now);
    void handle(int f, const rlc::Outcome &out, TimeNs now);
    // a retransmission that cannot go out in the slot after its NACK
    void abandon(int f, TimeNs now);
    void process_events(TimeNs until);
    std::vector<mac::DemandEntry> demands();
    std::optional<Tx> build_tx(const mac::Allocation &a, std::int64_t slot);
    void evaluate(std::vector<Tx> &txs, const mac::SlotPlan &plan);
    void check(const mac::SlotPlan &plan, const std::vector<mac::DemandEntry> &demand);

    int flow_index(int user, Direction d) const { return 2 * user + static_cast<int>(d); }
    bool in_window(TimeNs t) const { return t >= warmup_ns_; }

    Scenario sc_;
    RunTraces traces_;
    std::uint64_t run_seed_;
    MetricsReport report_;
    TimeNs slot_ns_;
    TimeNs warmup_ns_;
    double symbol_s_;
    int n_tx_;
    int n_rx_;
    int subcarriers_;
    double noise_w_;
    double power_[2];
    double noise_over_power_;
    phy::McsTable mcs_;
    phy::BlerModel bler_model_;
    array::Codebook bs_book_;
    array::Codebook ue_book_;
    ComplexMatrix bs_gram_;
    std::vector<Link> links_;
    std::vector<Flow> flows_;
    std::vector<traffic::PacketRecord> packets_;
    mac::Scheduler scheduler_;
    EventQueue events_;
    Rng tb_rng_;
    std::vector<std::array<std::optional<ComplexVector>, 14>> amp_cache_;
    std::vector<GroupPrecoding> groups_;
    std::vector<int> group_of_;   // allocation -> group index or -1
    std::vector<int> member_pos_; // allocation -> position inside its group
    FairnessWindow fairness_[2];
};

Simulation::Simulation(const Scenario &sc, int run_index, const RunTraces &traces)
    : sc_(sc), traces_(traces), run_seed_(derive_seed(sc.seed, "run", static_cast<std::uint64_t>(run_index))),
      mcs_(phy::McsTable::standard(sc.mcs_gap_db)), scheduler_(sc.scheduler, sc.layers),
      tb_rng_(make_rng(run_seed_, "tb-errors"))
{
    sc_.validate();
    sc_.channel.carrier_ghz = sc_.phy.carrier_ghz;
    report_.seed = sc_.seed;
    report_.run = run_index;
    report_.duration_s = sc_.duration_s;
    report_.warmup_s = std::min(sc_.warmup_s, sc_.duration_s);
    slot_ns_ = sc_.phy.slot_duration_ns();
    warmup_ns_ = static_cast<TimeNs>(std::llround(report_.warmup_s * static_cast<double>(kNsPerSecond)));
    symbol_s_ = sc_.phy.symbol_duration_s();
    n_tx_ = sc_.bs_array.size();
    n_rx_ = sc_.ue_array.size();
    subcarriers_ = sc_.phy.subcarriers();
    noise_w_ = sc_.phy.noise_per_subcarrier_w();
    power_[0] = sc_.phy.bs_power_w() / subcarriers_;
    power_[1] = sc_.phy.ue_power_w() / subcarriers_;
    noise_over_power_ = sc_.phy.noise_over_power();

    const Vec3 bs{0.0, 0.0, sc_.bs_height_m};
    const auto positions = drop_ues(run_seed_, sc_.ue_count, sc_.radius_m, sc_.min_distance_m, sc_.ue_height_m);
    bs_book_ = array::build_codebook(sc_.bs_array, sc_.bs_codebook_azimuths, sc_.bs_codebook_elevations,
                                     array::AzimuthSector::full_circle);
    ue_book_ = array::build_codebook(sc_.ue_array, sc_.ue_codebook_azimuths, sc_.ue_codebook_elevations,
                                     array::AzimuthSector::front_half);

    // BS library: codebook beams, then one geometric beam per user
    const int n_bs_book = static_cast<int>(bs_book_.size());
    const int n_ue_book = static_cast<int>(ue_book_.size());
    const int users = sc_.ue_count;
    ComplexMatrix bs_lib(n_tx_, n_bs_book + users);
    for (int b = 0; b < n_bs_book; ++b)
        bs_lib.col(b) = bs_book_.beams[static_cast<std::size_t>(b)];
    std::vector<bf::BeamPair> gbf;
    for (int u = 0; u < users; ++u)
    {
        gbf.push_back(bf::gbf_pair(bs, positions[static_cast<std::size_t>(u)], sc_.bs_array, sc_.ue_array));
        bs_lib.col(n_bs_book + u) = gbf.back().v;
    }
    bs_gram_ = bs_lib.adjoint() * bs_lib;

    const std::vector<int> evaluated = sc_.phy.evaluated_subcarriers();
    const int k_ref[1] = {sc_.phy.reference_subcarrier()};
    for (int u = 0; u < users; ++u)
    {
        const auto drop = channel::drop_link(derive_seed(run_seed_, "channel", static_cast<std::uint64_t>(u)), bs,
                                             positions[static_cast<std::size_t>(u)], sc_.channel);
        Link l;
        l.ch = drop.channel;
        l.pathloss = drop.pathloss.linear;
        const auto nc = static_cast<Eigen::Index>(l.ch.cluster_count());
        ComplexMatrix a_dep(nc, n_tx_);
        ComplexMatrix a_arr(nc, n_rx_);
        for (Eigen::Index c = 0; c < nc; ++c)
        {
            const auto &cl = l.ch.clusters[static_cast<std::size_t>(c)];
            a_dep.row(c) = array::array_response(sc_.bs_array, cl.departure).transpose();
            a_arr.row(c) = array::array_response(sc_.ue_array, cl.arrival).transpose();
        }
        ComplexMatrix ue_lib(n_rx_, n_ue_book + 1);
        for (int r = 0; r < n_ue_book; ++r)
            ue_lib.col(r) = ue_book_.beams[static_cast<std::size_t>(r)];
        ue_lib.col(n_ue_book) = gbf[static_cast<std::size_t>(u)].w;
        l.txp = a_dep * bs_lib;
        l.rxp = a_arr * ue_lib;
        l.phases = channel::delay_phases(l.ch, evaluated, sc_.phy);
        l.phase_ref = channel::delay_phases(l.ch, k_ref, sc_.phy).row(0).transpose();
        links_.push_back(std::move(l));
    }
    amp_cache_.resize(static_cast<std::size_t>(users));

    const auto flow_cfg = sc_.flow();
    for (int u = 0; u < users; ++u)
        for (auto d : {Direction::downlink, Direction::uplink})
        {
            Flow f{{u, d}, rlc::RlcEntity(sc_.rlc), {}, 0, -1, 0.0, std::nullopt, std::nullopt};
            f.harq.id = flow_index(u, d);
            f.harq.max_attempts = sc_.harq ? sc_.harq_max_attempts : 1;
            if (flow_cfg.type == traffic::FlowType::cbr)
                f.cbr.emplace(flow_cfg.interval, flow_cfg.packet_bytes);
            else
            {
                auto cfg = sc_.adaptive;
                cfg.packet_bytes = flow_cfg.packet_bytes;
                f.adaptive.emplace(cfg);
            }
            flows_.push_back(std::move(f));
        }

    select_beams();
    for (int u = 0; u < users; ++u)
    {
        const double snr = snr_db(u);
        flows_[static_cast<std::size_t>(flow_index(u, Direction::downlink))].cqi_db = snr;
        flows_[static_cast<std::size_t>(flow_index(u, Direction::uplink))].cqi_db = snr;
    }
}

void Simulation::select_beams()
{
    const int n_bs_book = static_cast<int>(bs_book_.size());
    const int n_ue_book = static_cast<int>(ue_book_.size());
    for (std::size_t u = 0; u < links_.size(); ++u)
    {
        auto &l = links_[u];
        for (auto &slot : amp_cache_[u])
            slot.reset();
        if (sc_.bf == bf::BfKind::gbf)
        {
            l.bs_beam = n_bs_book + static_cast<int>(u);
            l.ue_beam = n_ue_book;
            continue;
        }
        const ComplexVector d = channel::cluster_amplitudes(l.ch, n_tx_, n_rx_, 0.0).cwiseProduct(l.phase_ref);
        const ComplexMatrix gains =
            l.rxp.leftCols(n_ue_book).transpose() * d.asDiagonal() * l.txp.leftCols(n_bs_book);
        const auto choice = bf::cbf_select_from_gains(gains, bs_book_, ue_book_);
        l.bs_beam = choice.tx_index;
        l.ue_beam = choice.rx_index;
    }
}

double Simulation::snr_db(int u)
{
    const auto g = analog_gain(u, links_[static_cast<std::size_t>(u)].bs_beam, 0);
    const double l = links_[static_cast<std::size_t>(u)].pathloss;
    double acc = 0.0;
    for (Eigen::Index k = 0; k < g.size(); ++k)
        acc += l * std::norm(g[k]) * power_[0] / noise_w_;
    return linear_to_db(std::max(acc / static_cast<double>(g.size()), 1e-30));
}

const ComplexVector &Simulation::amplitudes(int u, int symbol)
{
    auto &slot = amp_cache_[static_cast<std::size_t>(u)][static_cast<std::size_t>(symbol)];
    if (!slot)
        slot = channel::cluster_amplitudes(links_[static_cast<std::size_t>(u)].ch, n_tx_, n_rx_,
                                           symbol * symbol_s_);
    return *slot;
}

ComplexVector Simulation::analog_gain(int user, int bs_beam, int symbol)
{
    const auto &l = links_[static_cast<std::size_t>(user)];
    const ComplexVector coef =
        l.rxp.col(l.ue_beam).cwiseProduct(amplitudes(user, symbol)).cwiseProduct(l.txp.col(bs_beam));
    return l.phases * coef;
}

GroupPrecoding Simulation::precode(const std::vector<int> &members, const mac::SlotPlan &plan)
{
    GroupPrecoding g;
    g.members = members;
    const auto n = static_cast<Eigen::Index>(members.size());
    const int symbol = plan.allocations[static_cast<std::size_t>(members.front())].start;
    std::vector<int> ports;
    std::vector<double> pathloss;
    for (int m : members)
    {
        const int u = plan.allocations[static_cast<std::size_t>(m)].user;
        ports.push_back(links_[static_cast<std::size_t>(u)].bs_beam);
        pathloss.push_back(links_[static_cast<std::size_t>(u)].pathloss);
    }
    const Eigen::Index nk = links_.front().phases.rows();
    // column i * n + p holds h_eq[i, p] over the evaluated subcarriers
    ComplexMatrix h_all(nk, n * n);
    ComplexMatrix h_ref(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
    {
        const int u = plan.allocations[static_cast<std::size_t>(members[static_cast<std::size_t>(i)])].user;
        const auto &l = links_[static_cast<std::size_t>(u)];
        const ComplexVector w = l.rxp.col(l.ue_beam).cwiseProduct(amplitudes(u, symbol));
        ComplexMatrix c(l.txp.rows(), n);
        for (Eigen::Index p = 0; p < n; ++p)
            c.col(p) = w.cwiseProduct(l.txp.col(ports[static_cast<std::size_t>(p)]));
        h_all.middleCols(i * n, n) = l.phases * c;
        h_ref.row(i) = l.phase_ref.transpose() * c;
    }
    ComplexMatrix gram(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
            gram(i, j) = bs_gram_(ports[static_cast<std::size_t>(i)], ports[static_cast<std::size_t>(j)]);

    auto channel_at = [&](Eigen::Index k, auto &h) {
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index p = 0; p < n; ++p)
                h(i, p) = h_all(k, i * n + p);
    };
    auto store = [&](Eigen::Index k, const auto &geff) {
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j < n; ++j)
                h_all(k, i * n + j) = geff(i, j);
    };

    if (n <= bf::kSmallGroup)
    {
        Eigen::VectorXd scale(n);
        for (Eigen::Index i = 0; i < n; ++i)
            scale[i] = std::sqrt(pathloss[static_cast<std::size_t>(i)]);
        const bf::SmallMatrix gram_s = gram;
        bf::SmallMatrix hk(n, n);
        bf::SmallMatrix w(n, n);
        bf::SmallMatrix geff(n, n);
        const bool flat = sc_.bf == bf::BfKind::fmbf;
        if (flat && !bf::normalised_mmse(bf::SmallMatrix(scale.asDiagonal() * h_ref), gram_s, noise_over_power_, w))
            return g;
        for (Eigen::Index k = 0; k < nk; ++k)
        {
            channel_at(k, hk);
            if (!flat && !bf::normalised_mmse(bf::SmallMatrix(scale.asDiagonal() * hk), gram_s, noise_over_power_, w))
                return g;
            geff.noalias() = hk * w;
            store(k, geff);
        }
    }
    else
    {
        auto weights = [&](const ComplexMatrix &h) -> std::optional<ComplexMatrix> {
            const auto v = bf::mmse_precoder(bf::build_equivalent(h, pathloss), noise_over_power_);
            const Eigen::VectorXd norms = bf::effective_norms(gram, v.matrix);
            if (norms.minCoeff() < 1e-12)
                return std::nullopt;
            return ComplexMatrix(v.matrix * norms.cwiseInverse().asDiagonal());
        };
        std::optional<ComplexMatrix> flat;
        if (sc_.bf == bf::BfKind::fmbf && !(flat = weights(h_ref)))
            return g;
        ComplexMatrix hk(n, n);
        for (Eigen::Index k = 0; k < nk; ++k)
        {
            channel_at(k, hk);
            const auto w = flat ? flat : weights(hk);
            if (!w)
                return g;
            store(k, ComplexMatrix(hk * *w));
        }
    }
    g.size = n;
    g.geff = std::move(h_all);
    g.valid = true;
    return g;
}

ComplexVector Simulation::gain_toward(int user, int alloc, int symbol, const mac::SlotPlan &plan)
{
    const int gi = group_of_[static_cast<std::size_t>(alloc)];
    if (gi >= 0)
    {
        const auto &g = groups_[static_cast<std::size_t>(gi)];
        Eigen::Index row = -1;
        for (std::size_t i = 0; i < g.members.size(); ++i)
            if (plan.allocations[static_cast<std::size_t>(g.members[i])].user == user)
                row = static_cast<Eigen::Index>(i);
        if (row < 0)
            throw Error(ErrorCode::runtime, "interference across MMSE groups");
        const auto col = static_cast<Eigen::Index>(member_pos_[static_cast<std::size_t>(alloc)]);
        return g.geff.col(row * g.size + col);
    }
    const int owner = plan.allocations[static_cast<std::size_t>(alloc)].user;
    return analog_gain(user, links_[static_cast<std::size_t>(owner)].bs_beam, symbol);
}

void Simulation::create_packet(int f, TimeNs t)
{
    auto &flow = flows_[static_cast<std::size_t>(f)];
    auto &m = report_.at(flow.id.direction);
    traffic::PacketRecord p;
    p.id = packets_.size();
    p.flow = flow.id;
    p.bytes = flow.cbr ? flow.cbr->packet_bytes() : flow.adaptive->config().packet_bytes;
    p.created = t;
    ++m.packets_generated;
    if (in_window(t))
        m.offered_bits += 8LL * p.bytes;
    if (flow.adaptive)
    {
        if (flow.adaptive->in_flight() == 0)
            flow.adaptive->set_last_progress(t);
        flow.adaptive->on_send(p.id, t);
    }
    const bool accepted = flow.rlc.enqueue(p.id, p.bytes);
    if (!accepted)
    {
        p.dropped = t;
        ++m.packets_dropped;
    }
    packets_.push_back(p);
    if (!accepted && flow.adaptive)
        flow.adaptive->on_loss(p.id);
}

void Simulation::release_adaptive(int f, TimeNs now)
{
    auto &flow = flows_[static_cast<std::size_t>(f)];
    if (!flow.adaptive)
        return;
    // a rejected packet reduces the window immediately, so this terminates
    for (int guard = 0; flow.adaptive->releasable() > 0 && guard < 100000; ++guard)
        create_packet(f, now);
}

void Simulation::handle(int f, const rlc::Outcome &out, TimeNs now)
{
    auto &flow = flows_[static_cast<std::size_t>(f)];
    auto &m = report_.at(flow.id.direction);
    for (const auto &d : out.delivered)
    {
        auto &p = packets_[static_cast<std::size_t>(d.id)];
        p.delivered = d.time;
        p.am_retx = d.am_retx;
        ++m.packets_delivered;
        if (in_window(p.created))
        {
            m.delivered_bits += 8LL * p.bytes;
            m.delay_ms.push_back(p.delay_ms());
        }
        if (flow.adaptive && flow.adaptive->on_ack(p.id, d.time - p.created))
            flow.adaptive->set_last_progress(d.time);
    }
    for (auto id : out.dropped)
    {
        auto &p = packets_[static_cast<std::size_t>(id)];
        p.dropped = now;
        ++m.packets_dropped;
        if (flow.adaptive)
            flow.adaptive->on_loss(id);
    }
    for (const auto &t : out.timers)
        events_.push(t.expiry, EventKind::am_timer, f, t.id);
    m.am_retx += static_cast<long long>(out.retransmitted.size());
    release_adaptive(f, now);
}

void Simulation::abandon(int f, TimeNs now)
{
    auto &flow = flows_[static_cast<std::size_t>(f)];
    mac::harq_abandon(flow.harq);
    ++report_.at(flow.id.direction).harq_abandoned;
    handle(f, flow.rlc.on_tb_outcome(flow.rlc_tb, false, true, now), now);
}

void Simulation::process_events(TimeNs until)
{
    while (!events_.empty() && events_.next_time() <= until)
    {
        const Event e = events_.pop();
        auto &flow = flows_[static_cast<std::size_t>(e.flow)];
        handle(e.flow, flow.rlc.on_timer(e.id, e.time), e.time);
    }
}

std::vector<mac::DemandEntry> Simulation::demands()
{
    std::vector<mac::DemandEntry> out;
    for (std::size_t f = 0; f < flows_.size(); ++f)
    {
        auto &flow = flows_[f];
        if (flow.harq.state == mac::HarqState::pending_retransmission)
        {
            out.push_back({flow.id.user, flow.id.direction, flow.harq.tb.bits, flow.harq.tb.symbols, true});
            continue;
        }
        const long queued = flow.rlc.queued_bits();
        if (queued == 0)
            continue;
        const int mcs = phy::select_mcs(flow.cqi_db, mcs_);
        const long per_symbol = phy::transport_block_bits(mcs_, mcs, 1, subcarriers_);
        out.push_back({flow.id.user, flow.id.direction, queued, mac::requested_symbols(queued, per_symbol), false});
    }
    return out;
}

std::optional<Tx> Simulation::build_tx(const mac::Allocation &a, std::int64_t slot)
{
    const int f = flow_index(a.user, a.direction);
    auto &flow = flows_[static_cast<std::size_t>(f)];
    auto &m = report_.at(a.direction);
    if (a.retransmission && a.length < flow.harq.tb.symbols)
        abandon(f, static_cast<TimeNs>(slot) * slot_ns_);
    auto lowest_fitting = [&](long bits) {
        for (int i = 0; i < mcs_.size(); ++i)
            if (phy::transport_block_bits(mcs_, i, a.length, subcarriers_) >= bits)
                return i;
        return -1;
    };

    Tx tx;
    tx.flow = f;
    if (a.retransmission && a.length >= flow.harq.tb.symbols)
    {
        mac::harq_retransmit(flow.harq, slot);
        ++m.harq_retx;
        m.harq_max_gap_slots = std::max(m.harq_max_gap_slots, static_cast<int>(slot - flow.nack_slot));
        tx.retx = true;
        tx.tb = flow.harq.tb;
    }
    else
    {
        const long head = flow.rlc.head_bits();
        if (head == 0)
            return std::nullopt;
        int mcs = phy::select_mcs(flow.cqi_db, mcs_);
        long cap = phy::transport_block_bits(mcs_, mcs, a.length, subcarriers_);
        if (head > cap)
        {
            mcs = lowest_fitting(head);
            if (mcs < 0)
                return std::nullopt;
            cap = phy::transport_block_bits(mcs_, mcs, a.length, subcarriers_);
        }
        const auto contents = flow.rlc.take(cap);
        mac::TransportBlock tb;
        tb.id = contents.tb_id;
        tb.user = a.user;
        tb.direction = a.direction;
        tb.bits = cap;
        tb.payload_bits = contents.bits();
        tb.mcs = mcs;
        tb.symbols = a.length;
        for (const auto &s : contents.sdus)
            tb.packets.push_back(s.id);
        mac::harq_start(flow.harq, tb, slot);
        flow.rlc_tb = contents.tb_id;
        tx.tb = tb;
    }
    const TimeNs start = static_cast<TimeNs>(slot) * slot_ns_;
    for (auto id : tx.tb.packets)
    {
        auto &p = packets_[static_cast<std::size_t>(id)];
        if (p.first_tx < 0)
            p.first_tx = start;
        ++p.harq_attempts;
    }
    return tx;
}

void Simulation::evaluate(std::vector<Tx> &txs, const mac::SlotPlan &plan)
{
    const auto &allocs = plan.allocations;
    std::vector<int> active;
    for (const auto &t : txs)
        active.push_back(t.alloc);

    for (auto &tx : txs)
    {
        const auto &a = allocs[static_cast<std::size_t>(tx.alloc)];
        const int dir = static_cast<int>(a.direction);
        const int u = a.user;
        const double lu = links_[static_cast<std::size_t>(u)].pathloss;
        const ComplexVector sig = gain_toward(u, tx.alloc, a.start, plan);

        struct Interferer
        {
            int start;
            int end;
            double weight;
            ComplexVector gain;
        };
        std::vector<Interferer> others;
        std::vector<int> cuts{a.start, a.end()};
        for (int b : active)
        {
            if (b == tx.alloc)
                continue;
            const auto &o = allocs[static_cast<std::size_t>(b)];
            if (o.direction != a.direction || o.end() <= a.start || o.start >= a.end())
                continue;
            Interferer in;
            in.start = o.start;
            in.end = o.end();
            if (a.direction == Direction::downlink)
            {
                in.weight = lu;
                in.gain = gain_toward(u, b, a.start, plan);
            }
            else
            {
                in.weight = links_[static_cast<std::size_t>(o.user)].pathloss;
                in.gain = gain_toward(o.user, tx.alloc, a.start, plan);
            }
            others.push_back(std::move(in));
            if (o.start > a.start)
                cuts.push_back(o.start);
            if (o.end() < a.end())
                cuts.push_back(o.end());
        }
        std::sort(cuts.begin(), cuts.end());
        cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

        const double p = power_[dir];
        const Eigen::Index nk = sig.size();
        double acc = 0.0;
        for (std::size_t c = 0; c + 1 < cuts.size(); ++c)
        {
            const int s0 = cuts[c];
            const int len = cuts[c + 1] - s0;
            double seg = 0.0;
            for (Eigen::Index k = 0; k < nk; ++k)
            {
                double interference = 0.0;
                for (const auto &in : others)
                    if (in.start <= s0 && s0 < in.end)
                        interference += in.weight * std::norm(in.gain[k]) * p;
                seg += lu * std::norm(sig[k]) * p / (interference + noise_w_);
            }
            acc += len * seg / static_cast<double>(nk);
        }
        const double wideband = acc / static_cast<double>(a.length);
        tx.sinr_db = linear_to_db(std::max(wideband, 1e-30));
        tx.bler = bler_model_(tx.sinr_db, mcs_, tx.tb.mcs);
    }
}

void Simulation::check(const mac::SlotPlan &plan, const std::vector<mac::DemandEntry> &demand)
{
    auto &inv = report_.invariants;
    ++inv.slots;
    const auto &allocs = plan.allocations;
    for (std::size_t i = 0; i < allocs.size(); ++i)
        for (std::size_t j = i + 1; j < allocs.size(); ++j)
            if (allocs[i].layer == allocs[j].layer && allocs[i].start < allocs[j].end() &&
                allocs[j].start < allocs[i].end())
                ++inv.overlap_violations;

    if (sc_.scheduler == mac::SchedulerKind::pmrs)
    {
        for (std::size_t i = 0; i < allocs.size(); ++i)
            for (std::size_t j = i + 1; j < allocs.size(); ++j)
                if (allocs[i].direction == allocs[j].direction && allocs[i].bundle == allocs[j].bundle &&
                    allocs[i].start != allocs[j].start)
                    ++inv.pmrs_misaligned;
        for (const auto &a : allocs)
            if (a.bundle < 0 || std::find(plan.bundle_starts.begin(), plan.bundle_starts.end(), a.start) ==
                                    plan.bundle_starts.end())
                ++inv.pmrs_misaligned;
        inv.pmrs_fallbacks += static_cast<long long>(mac::mmse_groups(allocs).fallback.size());
    }
    else
    {
        for (auto d : {Direction::downlink, Direction::uplink})
        {
            const int first = d == Direction::downlink ? 1 : 1 + plan.dl_symbols;
            for (int layer = 0; layer < sc_.layers; ++layer)
            {
                std::vector<const mac::Allocation *> on;
                for (const auto &a : allocs)
                    if (a.direction == d && a.layer == layer)
                        on.push_back(&a);
                std::sort(on.begin(), on.end(),
                          [](const mac::Allocation *x, const mac::Allocation *y) { return x->start < y->start; });
                int expect = first;
                for (const auto *a : on)
                {
                    if (a->start != expect)
                        ++inv.amrs_gaps;
                    expect = a->end();
                }
            }
        }
        for (const auto &a : allocs)
            if (a.padding != 0)
                ++inv.unexpected_padding;
    }

    // round-robin fairness over windows of consecutive saturated slots
    for (auto d : {Direction::downlink, Direction::uplink})
    {
        auto &w = fairness_[static_cast<int>(d)];
        bool saturated = sc_.ue_count > 0;
        std::vector<int> requested(static_cast<std::size_t>(sc_.ue_count), 0);
        for (const auto &e : demand)
            if (e.direction == d)
            {
                requested[static_cast<std::size_t>(e.user)] = e.requested_symbols;
                if (e.retransmission)
                    saturated = false;
            }
        for (int r : requested)
            if (r < phy::SlotStructure::data_symbols)
                saturated = false;
        if (!saturated)
        {
            w.slots.clear();
            w.quantum.clear();
            continue;
        }
        std::vector<int> got(static_cast<std::size_t>(sc_.ue_count), 0);
        int quantum = 0;
        for (const auto &a : allocs)
            if (a.direction == d)
            {
                got[static_cast<std::size_t>(a.user)] += a.length;
                quantum = std::max(quantum, a.length);
            }
        w.slots.push_back(std::move(got));
        w.quantum.push_back(quantum);
        if (static_cast<int>(w.slots.size()) > kWindow)
        {
            w.slots.pop_front();
            w.quantum.pop_front();
        }
        if (static_cast<int>(w.slots.size()) == kWindow)
        {
            ++inv.fairness_windows;
            std::vector<int> total(static_cast<std::size_t>(sc_.ue_count), 0);
            for (const auto &s : w.slots)
                for (std::size_t u = 0; u < s.size(); ++u)
                    total[u] += s[u];
            const int q = *std::max_element(w.quantum.begin(), w.quantum.end());
            const auto [lo, hi] = std::minmax_element(total.begin(), total.end());
            if (*hi - *lo > q)
                ++inv.fairness_violations;
        }
    }
}

MetricsReport Simulation::execute()
{
    const long long slots = sc_.slot_count();
    const long long beam_period =
        std::max<long long>(1, std::llround(sc_.beam_period_ms * static_cast<double>(kNsPerMs) / slot_ns_));
    if (traces_.plan)
        mac::write_plan_header(*traces_.plan);

    for (std::size_t f = 0; f < flows_.size(); ++f)
        release_adaptive(static_cast<int>(f), 0);

    for (long long s = 0; s < slots; ++s)
    {
        const TimeNs t0 = s * slot_ns_;
        const TimeNs t1 = t0 + slot_ns_;
        process_events(t0);

        for (std::size_t u = 0; u < links_.size(); ++u)
        {
            auto &l = links_[u];
            const double dt = to_seconds(t0) - l.ch.time_s;
            if (dt > 0.0)
                l.ch = channel::evolve(l.ch, dt);
            for (auto &slot : amp_cache_[u])
                slot.reset();
        }
        if (s > 0 && s % beam_period == 0)
            select_beams();

        for (std::size_t f = 0; f < flows_.size(); ++f)
        {
            auto &flow = flows_[f];
            if (flow.cbr)
                for (TimeNs t : flow.cbr->tick(t0))
                    create_packet(static_cast<int>(f), t);
            else if (flow.adaptive->in_flight() > 0 && t0 - flow.adaptive->last_progress() >= flow.adaptive->rto())
            {
                flow.adaptive->on_rto();
                flow.adaptive->set_last_progress(t0);
                release_adaptive(static_cast<int>(f), t0);
            }
        }

        const auto demand = demands();
        mac::SlotPlan plan = scheduler_.plan(s, demand);
        check(plan, demand);

        std::vector<Tx> txs;
        for (std::size_t i = 0; i < plan.allocations.size(); ++i)
        {
            auto &a = plan.allocations[i];
            auto &m = report_.at(a.direction);
            m.allocated_symbols += a.length;
            m.padding_symbols += a.padding;
            auto tx = build_tx(a, s);
            if (!tx)
            {
                ++m.idle_allocations;
                continue;
            }
            tx->alloc = static_cast<int>(i);
            a.mcs = tx->tb.mcs;
            a.retransmission = tx->retx;
            txs.push_back(std::move(*tx));
        }
        for (std::size_t f = 0; f < flows_.size(); ++f)
            if (flows_[f].harq.state == mac::HarqState::pending_retransmission)
                abandon(static_cast<int>(f), t0);

        groups_.clear();
        group_of_.assign(plan.allocations.size(), -1);
        member_pos_.assign(plan.allocations.size(), -1);
        if (bf::is_mmse(sc_.bf))
        {
            const auto grouping = mac::mmse_groups(plan.allocations);
            for (const auto &members : grouping.groups)
            {
                if (members.size() < 2)
                    continue;
                auto g = precode(members, plan);
                if (!g.valid)
                    continue;
                for (std::size_t i = 0; i < members.size(); ++i)
                {
                    group_of_[static_cast<std::size_t>(members[i])] = static_cast<int>(groups_.size());
                    member_pos_[static_cast<std::size_t>(members[i])] = static_cast<int>(i);
                }
                groups_.push_back(std::move(g));
            }
        }
        evaluate(txs, plan);

        for (auto &tx : txs)
        {
            auto &flow = flows_[static_cast<std::size_t>(tx.flow)];
            auto &m = report_.at(flow.id.direction);
            const bool ok = uniform01(tb_rng_) >= tx.bler;
            if (in_window(t0))
            {
                ++m.tb_count;
                m.tb_errors += ok ? 0 : 1;
                m.tb_outage += tx.bler >= 0.9 ? 1 : 0;
                m.tb_clear += tx.bler <= 1e-2 ? 1 : 0;
                m.sinr_db.push_back(tx.sinr_db);
                m.bler.push_back(tx.bler);
            }
            flow.cqi_db = tx.sinr_db;
            const auto action = mac::harq_on_feedback(flow.harq, ok, s);
            rlc::Outcome out;
            switch (action)
            {
            case mac::HarqAction::released:
                out = flow.rlc.on_tb_outcome(flow.rlc_tb, true, true, t1);
                break;
            case mac::HarqAction::retransmit:
                flow.nack_slot = s;
                out = flow.rlc.on_tb_outcome(flow.rlc_tb, false, false, t1);
                break;
            case mac::HarqAction::dropped:
                if (sc_.harq)
                    ++m.harq_drops;
                out = flow.rlc.on_tb_outcome(flow.rlc_tb, false, true, t1);
                break;
            }
            handle(tx.flow, out, t1);
        }
        if (traces_.plan)
            mac::write_plan_rows(*traces_.plan, plan);
    }

    const TimeNs end = slots * slot_ns_;
    process_events(end);
    const double window = to_seconds(end) - report_.warmup_s;
    for (auto d : {Direction::downlink, Direction::uplink})
    {
        auto &m = report_.at(d);
        m.throughput_bps = window > 0.0 ? static_cast<double>(m.delivered_bits) / window : 0.0;
    }
    for (const auto &flow : flows_)
        report_.at(flow.id.direction).packets_in_queue += flow.rlc.outstanding();
    report_.invariants.causality_violations = events_.causality_violations();
    if (traces_.packets)
    {
        traffic::write_packet_header(*traces_.packets);
        for (const auto &p : packets_)
            traffic::write_packet_row(*traces_.packets, p);
    }
    return std::move(report_);
}

} // namespace

MetricsReport run(const Scenario &scenario, int run_index, const RunTraces &traces)
{
    Simulation sim(scenario, run_index, traces);
    return sim.execute();
}

} // namespace mmwsim::sim
