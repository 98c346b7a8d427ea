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

#include "mmwsim/scenario_io.hpp"

#include "mmwsim/random.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cstdio>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

namespace mmwsim::io
{

namespace
{

using sim::Scenario;

[[noreturn]] void bad_value(const std::string &what)
{
    throw Error(ErrorCode::config, what);
}

long long to_integer(const std::string &v)
{
    long long out = 0;
    const auto *end = v.data() + v.size();
    const auto r = std::from_chars(v.data(), end, out);
    if (r.ec != std::errc() || r.ptr != end)
        bad_value("expected an integer, got '" + v + "'");
    return out;
}

int to_int(const std::string &v)
{
    const long long x = to_integer(v);
    if (x < std::numeric_limits<int>::min() || x > std::numeric_limits<int>::max())
        bad_value("integer out of range: '" + v + "'");
    return static_cast<int>(x);
}

std::uint64_t to_u64(const std::string &v)
{
    std::uint64_t out = 0;
    const auto *end = v.data() + v.size();
    const auto r = std::from_chars(v.data(), end, out);
    if (r.ec != std::errc() || r.ptr != end)
        bad_value("expected an unsigned integer, got '" + v + "'");
    return out;
}

double to_double(const std::string &v)
{
    double out = 0.0;
    const auto *end = v.data() + v.size();
    const auto r = std::from_chars(v.data(), end, out);
    if (r.ec != std::errc() || r.ptr != end || !std::isfinite(out))
        bad_value("expected a finite number, got '" + v + "'");
    return out;
}

bool to_bool(const std::string &v)
{
    if (v == "true" || v == "1" || v == "yes" || v == "on")
        return true;
    if (v == "false" || v == "0" || v == "no" || v == "off")
        return false;
    bad_value("expected true or false, got '" + v + "'");
}

std::string num(double v)
{
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

std::string num(long long v) { return std::to_string(v); }

std::string lower(std::string s)
{
    for (char &c : s)
        c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

TimeNs scaled_ns(const std::string &v, double ns_per_unit)
{
    return static_cast<TimeNs>(std::llround(to_double(v) * ns_per_unit));
}

struct Key
{
    const char *name;
    std::function<std::string(const Scenario &)> get;
    std::function<void(Scenario &, const std::string &)> set;
};

#define MMWSIM_INT_KEY(key, field)                                                                                   \
    Key { #key, [](const Scenario &s) { return num(static_cast<long long>(s.field)); },                               \
          [](Scenario &s, const std::string &v) { s.field = to_int(v); } }
#define MMWSIM_DOUBLE_KEY(key, field)                                                                                \
    Key { #key, [](const Scenario &s) { return num(s.field); },                                                       \
          [](Scenario &s, const std::string &v) { s.field = to_double(v); } }
#define MMWSIM_TIME_KEY(key, field, ns_per_unit)                                                                     \
    Key { #key, [](const Scenario &s) { return num(static_cast<double>(s.field) / (ns_per_unit)); },                  \
          [](Scenario &s, const std::string &v) { s.field = scaled_ns(v, ns_per_unit); } }

const std::vector<Key> &keys()
{
    static const std::vector<Key> table = {
        Key{"seed", [](const Scenario &s) { return std::to_string(s.seed); },
            [](Scenario &s, const std::string &v) { s.seed = to_u64(v); }},
        MMWSIM_INT_KEY(ue_count, ue_count),
        MMWSIM_DOUBLE_KEY(radius_m, radius_m),
        MMWSIM_DOUBLE_KEY(min_distance_m, min_distance_m),
        MMWSIM_DOUBLE_KEY(bs_height_m, bs_height_m),
        MMWSIM_DOUBLE_KEY(ue_height_m, ue_height_m),
        MMWSIM_INT_KEY(layers, layers),
        Key{"bf", [](const Scenario &s) { return lower(bf::to_string(s.bf)); },
            [](Scenario &s, const std::string &v) { s.bf = bf::parse_bf_kind(v); }},
        Key{"scheduler", [](const Scenario &s) { return lower(mac::to_string(s.scheduler)); },
            [](Scenario &s, const std::string &v) { s.scheduler = mac::parse_scheduler_kind(v); }},
        Key{"harq", [](const Scenario &s) { return std::string(s.harq ? "true" : "false"); },
            [](Scenario &s, const std::string &v) { s.harq = to_bool(v); }},
        MMWSIM_INT_KEY(harq_max_attempts, harq_max_attempts),
        Key{"rlc_mode", [](const Scenario &s) { return lower(rlc::to_string(s.rlc.mode)); },
            [](Scenario &s, const std::string &v) { s.rlc.mode = rlc::parse_rlc_mode(lower(v)); }},
        MMWSIM_TIME_KEY(rlc_reordering_ms, rlc.reordering_timeout, 1e6),
        MMWSIM_INT_KEY(rlc_max_retx, rlc.max_retx),
        Key{"rlc_buffer_bytes", [](const Scenario &s) { return num(static_cast<long long>(s.rlc.buffer_bytes)); },
            [](Scenario &s, const std::string &v) { s.rlc.buffer_bytes = static_cast<long>(to_integer(v)); }},
        Key{"traffic", [](const Scenario &s) { return std::string(traffic::to_string(s.traffic)); },
            [](Scenario &s, const std::string &v) { s.traffic = traffic::parse_profile(lower(v)); }},
        MMWSIM_INT_KEY(packet_bytes, packet_bytes),
        MMWSIM_TIME_KEY(interval_us, interval_override, 1e3),
        MMWSIM_DOUBLE_KEY(adaptive_initial_window, adaptive.initial_window),
        MMWSIM_DOUBLE_KEY(adaptive_max_window, adaptive.max_window),
        MMWSIM_TIME_KEY(adaptive_min_rto_ms, adaptive.min_rto, 1e6),
        MMWSIM_DOUBLE_KEY(duration_s, duration_s),
        MMWSIM_DOUBLE_KEY(warmup_s, warmup_s),
        MMWSIM_INT_KEY(runs, runs),
        MMWSIM_DOUBLE_KEY(carrier_ghz, phy.carrier_ghz),
        MMWSIM_DOUBLE_KEY(bandwidth_hz, phy.bandwidth_hz),
        MMWSIM_INT_KEY(numerology, phy.numerology),
        MMWSIM_INT_KEY(resource_blocks, phy.resource_blocks),
        MMWSIM_DOUBLE_KEY(bs_power_dbm, phy.bs_power_dbm),
        MMWSIM_DOUBLE_KEY(ue_power_dbm, phy.ue_power_dbm),
        MMWSIM_DOUBLE_KEY(noise_figure_db, phy.noise_figure_db),
        MMWSIM_DOUBLE_KEY(thermal_noise_dbm_hz, phy.thermal_noise_dbm_hz),
        MMWSIM_INT_KEY(sinr_stride, phy.sinr_stride),
        MMWSIM_INT_KEY(cluster_count, channel.cluster_count),
        MMWSIM_DOUBLE_KEY(k_factor_db, channel.k_factor_db),
        MMWSIM_DOUBLE_KEY(azimuth_spread_deg, channel.azimuth_spread_deg),
        MMWSIM_DOUBLE_KEY(elevation_spread_deg, channel.elevation_spread_deg),
        MMWSIM_DOUBLE_KEY(max_delay_s, channel.max_delay_s),
        MMWSIM_DOUBLE_KEY(ue_speed_kmh, channel.ue_speed_kmh),
        MMWSIM_DOUBLE_KEY(regen_period_s, channel.regen_period_s),
        Key{"shadowing", [](const Scenario &s) { return std::string(s.channel.shadowing ? "true" : "false"); },
            [](Scenario &s, const std::string &v) { s.channel.shadowing = to_bool(v); }},
        MMWSIM_DOUBLE_KEY(shadowing_los_db, channel.shadowing_los_db),
        MMWSIM_DOUBLE_KEY(shadowing_nlos_db, channel.shadowing_nlos_db),
        MMWSIM_INT_KEY(bs_array_n1, bs_array.n1),
        MMWSIM_INT_KEY(bs_array_n2, bs_array.n2),
        MMWSIM_DOUBLE_KEY(bs_phase_constant, bs_array.phase_constant),
        MMWSIM_INT_KEY(ue_array_n1, ue_array.n1),
        MMWSIM_INT_KEY(ue_array_n2, ue_array.n2),
        MMWSIM_DOUBLE_KEY(ue_phase_constant, ue_array.phase_constant),
        MMWSIM_INT_KEY(bs_codebook_azimuths, bs_codebook_azimuths),
        MMWSIM_INT_KEY(bs_codebook_elevations, bs_codebook_elevations),
        MMWSIM_INT_KEY(ue_codebook_azimuths, ue_codebook_azimuths),
        MMWSIM_INT_KEY(ue_codebook_elevations, ue_codebook_elevations),
        MMWSIM_DOUBLE_KEY(beam_period_ms, beam_period_ms),
        MMWSIM_DOUBLE_KEY(mcs_gap_db, mcs_gap_db),
    };
    return table;
}

#undef MMWSIM_INT_KEY
#undef MMWSIM_DOUBLE_KEY
#undef MMWSIM_TIME_KEY

std::string trim(const std::string &s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::string read_file(const std::string &path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(ErrorCode::io, "cannot read '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::filesystem::path &path, const std::string &content)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw Error(ErrorCode::io, "cannot write '" + path.string() + "'");
    out << content;
    if (!out)
        throw Error(ErrorCode::io, "write failed for '" + path.string() + "'");
}

} // namespace

std::vector<std::string> scenario_keys()
{
    std::vector<std::string> out;
    for (const auto &k : keys())
        out.emplace_back(k.name);
    return out;
}

void set_key(ScenarioDocument &doc, const std::string &key, const std::string &value)
{
    if (key == "output_dir")
    {
        doc.output_dir = value;
        return;
    }
    if (key == "preset")
    {
        if (!value.empty())
        {
            const auto &names = preset_names();
            if (std::find(names.begin(), names.end(), value) == names.end())
                throw Error(ErrorCode::config, "unknown preset '" + value + "'");
        }
        doc.preset = value;
        return;
    }
    const auto &table = keys();
    const auto it = std::find_if(table.begin(), table.end(), [&](const Key &k) { return key == k.name; });
    if (it == table.end())
        throw Error(ErrorCode::config, "unknown key '" + key + "'");
    if (value.empty())
        throw Error(ErrorCode::config, "missing value for '" + key + "'");
    try
    {
        it->set(doc.scenario, value);
    }
    catch (const Error &e)
    {
        throw Error(ErrorCode::config, key + ": " + e.what());
    }
}

std::string get_key(const ScenarioDocument &doc, const std::string &key)
{
    if (key == "output_dir")
        return doc.output_dir;
    if (key == "preset")
        return doc.preset;
    const auto &table = keys();
    const auto it = std::find_if(table.begin(), table.end(), [&](const Key &k) { return key == k.name; });
    if (it == table.end())
        throw Error(ErrorCode::config, "unknown key '" + key + "'");
    return it->get(doc.scenario);
}

ScenarioDocument parse_scenario_text(const std::string &text, const std::string &source)
{
    ScenarioDocument doc;
    std::istringstream in(text);
    std::string raw;
    int line_no = 0;
    std::vector<std::string> seen;
    while (std::getline(in, raw))
    {
        ++line_no;
        const auto hash = raw.find('#');
        const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (line.empty())
            continue;
        const std::string where = source + ":" + std::to_string(line_no) + ": ";
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw Error(ErrorCode::config, where + "expected 'key = value', got '" + line + "'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty())
            throw Error(ErrorCode::config, where + "missing key before '='");
        if (std::find(seen.begin(), seen.end(), key) != seen.end())
            throw Error(ErrorCode::config, where + "duplicate key '" + key + "'");
        seen.push_back(key);
        try
        {
            set_key(doc, key, value);
        }
        catch (const Error &e)
        {
            throw Error(ErrorCode::config, where + e.what());
        }
    }
    try
    {
        doc.scenario.validate();
    }
    catch (const Error &e)
    {
        throw Error(ErrorCode::config, source + ": " + e.what());
    }
    return doc;
}

ScenarioDocument parse_scenario(const std::string &path)
{
    return parse_scenario_text(read_file(path), path);
}

std::string render_scenario(const Scenario &sc)
{
    std::string out;
    for (const auto &k : keys())
        out += std::string(k.name) + " = " + k.get(sc) + "\n";
    return out;
}

std::uint64_t config_hash(const Scenario &sc)
{
    return fnv1a(render_scenario(sc));
}

std::string hex64(std::uint64_t v)
{
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

const std::vector<std::string> &preset_names()
{
    static const std::vector<std::string> names = {"bf-comparison", "sched-comparison", "delay-retx",
                                                   "throughput-delay", "apps"};
    return names;
}

namespace
{

struct Stack
{
    const char *label;
    mac::SchedulerKind scheduler;
    int layers;
    bf::BfKind bf;
};

constexpr Stack kTmrs1{"tmrs-1-cbf", mac::SchedulerKind::tmrs, 1, bf::BfKind::cbf};
constexpr Stack kPmrs1{"pmrs-1-cbf", mac::SchedulerKind::pmrs, 1, bf::BfKind::cbf};
constexpr Stack kPmrs4{"pmrs-4-smbf", mac::SchedulerKind::pmrs, 4, bf::BfKind::smbf};
constexpr Stack kAmrs4{"amrs-4-smbf", mac::SchedulerKind::amrs, 4, bf::BfKind::smbf};

Scenario with_stack(Scenario sc, const Stack &s)
{
    sc.scheduler = s.scheduler;
    sc.layers = s.layers;
    sc.bf = s.bf;
    return sc;
}

Scenario with_retx(Scenario sc, rlc::RlcMode mode, bool harq)
{
    sc.rlc.mode = mode;
    sc.harq = harq;
    return sc;
}

} // namespace

std::vector<ConfigPoint> preset_configs(const std::string &name, const Scenario &base)
{
    using bf::BfKind;
    using rlc::RlcMode;
    using traffic::Profile;
    std::vector<ConfigPoint> out;
    if (name == "bf-comparison")
    {
        Scenario sc = with_retx(base, RlcMode::um, false);
        sc.traffic = Profile::udp_slow;
        sc.scheduler = mac::SchedulerKind::pmrs;
        const std::pair<int, BfKind> roster[] = {{1, BfKind::gbf},  {1, BfKind::cbf},  {4, BfKind::gbf},
                                                 {4, BfKind::cbf},  {4, BfKind::fmbf}, {4, BfKind::smbf}};
        for (const auto &[layers, kind] : roster)
        {
            Scenario c = sc;
            c.layers = layers;
            c.bf = kind;
            out.push_back({lower(bf::to_string(kind)) + "-" + std::to_string(layers), c});
        }
    }
    else if (name == "sched-comparison")
    {
        Scenario sc = with_retx(base, RlcMode::um, false);
        sc.traffic = Profile::udp_fast;
        for (const auto &s : {kTmrs1, kPmrs1, kPmrs4, kAmrs4})
            out.push_back({s.label, with_stack(sc, s)});
    }
    else if (name == "delay-retx")
    {
        Scenario sc = base;
        sc.traffic = Profile::udp_fast;
        for (const auto &s : {kTmrs1, kPmrs4})
            for (auto mode : {RlcMode::um, RlcMode::am})
                for (bool harq : {false, true})
                    out.push_back({std::string(s.label) + "-" + rlc::to_string(mode) + (harq ? "-harq" : ""),
                                   with_retx(with_stack(sc, s), mode, harq)});
    }
    else if (name == "throughput-delay")
    {
        Scenario sc = base;
        sc.traffic = Profile::udp_fast;
        for (const auto &s : {kTmrs1, kPmrs4, kAmrs4})
        {
            out.push_back({std::string(s.label) + "-noretx", with_retx(with_stack(sc, s), RlcMode::um, false)});
            out.push_back({std::string(s.label) + "-fullretx", with_retx(with_stack(sc, s), RlcMode::am, true)});
        }
    }
    else if (name == "apps")
    {
        const Scenario sc = with_retx(base, RlcMode::am, true);
        for (auto p : {Profile::udp_slow, Profile::udp_fast, Profile::adaptive})
            for (const auto &s : {kTmrs1, kPmrs4, kAmrs4})
            {
                Scenario c = with_stack(sc, s);
                c.traffic = p;
                out.push_back({std::string(traffic::to_string(p)) + "-" + s.label, c});
            }
    }
    else
    {
        std::string list;
        for (const auto &n : preset_names())
            list += (list.empty() ? "" : ", ") + n;
        throw Error(ErrorCode::config, "unknown preset '" + name + "' (expected one of " + list + ")");
    }
    for (auto &c : out)
        c.scenario.validate();
    return out;
}

std::vector<ConfigResult> run_campaign(const std::vector<ConfigPoint> &configs, int workers,
                                       const Progress &progress)
{
    std::vector<ConfigResult> results(configs.size());
    std::vector<std::pair<std::size_t, int>> tasks;
    for (std::size_t c = 0; c < configs.size(); ++c)
    {
        configs[c].scenario.validate();
        results[c].label = configs[c].label;
        results[c].scenario = configs[c].scenario;
        results[c].reports.resize(static_cast<std::size_t>(configs[c].scenario.runs));
        for (int r = 0; r < configs[c].scenario.runs; ++r)
            tasks.emplace_back(c, r);
    }
    if (workers <= 0)
        workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    workers = std::min<int>(workers, static_cast<int>(std::max<std::size_t>(tasks.size(), 1)));

    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::mutex mu;
    int done = 0;
    const int total = static_cast<int>(tasks.size());
    auto worker = [&] {
        while (!failed.load())
        {
            const std::size_t i = next.fetch_add(1);
            if (i >= tasks.size())
                return;
            const auto [c, r] = tasks[i];
            try
            {
                results[c].reports[static_cast<std::size_t>(r)] = sim::run(configs[c].scenario, r);
            }
            catch (...)
            {
                std::lock_guard<std::mutex> lock(mu);
                if (!error)
                    error = std::current_exception();
                failed.store(true);
                return;
            }
            std::lock_guard<std::mutex> lock(mu);
            ++done;
            if (progress)
                progress(done, total);
        }
    };
    if (workers == 1)
        worker();
    else
    {
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w)
            pool.emplace_back(worker);
        for (auto &t : pool)
            t.join();
    }
    if (error)
        std::rethrow_exception(error);
    for (auto &r : results)
        r.summary = sim::aggregate(r.reports, r.label);
    return results;
}

std::uint64_t Manifest::hash() const
{
    std::string all;
    for (const auto &c : configs)
        all += "[" + c.label + "]\n" + render_scenario(c.scenario);
    return fnv1a(all);
}

std::string Manifest::to_json() const
{
    nlohmann::ordered_json j;
    j["tool"] = "mmwsim";
    j["version"] = MMWSIM_VERSION;
    j["csv_schema"] = 1;
    j["kind"] = kind;
    j["name"] = name;
    j["seed"] = seed;
    j["runs"] = runs;
    j["cdf_points"] = cdf_points;
    j["config_hash"] = hex64(hash());
    auto arr = nlohmann::ordered_json::array();
    for (const auto &c : configs)
    {
        nlohmann::ordered_json e;
        e["label"] = c.label;
        e["hash"] = hex64(config_hash(c.scenario));
        e["scenario"] = render_scenario(c.scenario);
        arr.push_back(e);
    }
    j["configs"] = arr;
    return j.dump(2) + "\n";
}

Manifest Manifest::from_json(const std::string &text)
{
    nlohmann::json j;
    try
    {
        j = nlohmann::json::parse(text);
    }
    catch (const nlohmann::json::exception &e)
    {
        throw Error(ErrorCode::config, std::string("manifest is not valid JSON: ") + e.what());
    }
    Manifest m;
    try
    {
        if (j.at("csv_schema").get<int>() != 1)
            throw Error(ErrorCode::config, "unsupported csv_schema in manifest");
        m.kind = j.at("kind").get<std::string>();
        m.name = j.at("name").get<std::string>();
        m.seed = j.at("seed").get<std::uint64_t>();
        m.runs = j.at("runs").get<int>();
        m.cdf_points = j.at("cdf_points").get<int>();
        for (const auto &e : j.at("configs"))
        {
            ConfigPoint c;
            c.label = e.at("label").get<std::string>();
            c.scenario = parse_scenario_text(e.at("scenario").get<std::string>(), "manifest[" + c.label + "]").scenario;
            if (hex64(config_hash(c.scenario)) != e.at("hash").get<std::string>())
                throw Error(ErrorCode::config, "config hash mismatch for '" + c.label + "'");
            m.configs.push_back(std::move(c));
        }
        if (hex64(m.hash()) != j.at("config_hash").get<std::string>())
            throw Error(ErrorCode::config, "manifest config_hash does not match its configs");
    }
    catch (const nlohmann::json::exception &e)
    {
        throw Error(ErrorCode::config, std::string("malformed manifest: ") + e.what());
    }
    if (m.cdf_points < 0)
        throw Error(ErrorCode::config, "cdf_points must be >= 0");
    return m;
}

Manifest make_manifest(const std::string &kind, const std::string &name, const std::vector<ConfigPoint> &configs,
                       int cdf_points)
{
    if (cdf_points < 0)
        throw Error(ErrorCode::config, "cdf_points must be >= 0");
    Manifest m;
    m.kind = kind;
    m.name = name;
    m.cdf_points = cdf_points;
    m.configs = configs;
    if (!configs.empty())
    {
        m.seed = configs.front().scenario.seed;
        m.runs = configs.front().scenario.runs;
    }
    return m;
}

Manifest load_manifest(const std::string &path)
{
    return Manifest::from_json(read_file(path));
}

void write_cdf_rows(std::ostream &os, const std::string &label, const std::vector<double> &sorted, int max_rows)
{
    const std::size_t n = sorted.size();
    const double dn = static_cast<double>(n);
    auto row = [&](std::size_t i) {
        os << label << ',' << sim::format_number(sorted[i]) << ','
           << sim::format_number(static_cast<double>(i + 1) / dn) << '\n';
    };
    if (max_rows <= 0 || n <= static_cast<std::size_t>(max_rows))
    {
        for (std::size_t i = 0; i < n; ++i)
            row(i);
        return;
    }
    const auto m = static_cast<std::size_t>(max_rows);
    for (std::size_t j = 1; j <= m; ++j)
        row((j * n + m - 1) / m - 1);
}

namespace
{

std::string fmt_or_empty(double v)
{
    return std::isfinite(v) ? sim::format_number(v) : std::string();
}

std::vector<double> sorted_copy(const std::vector<double> &v)
{
    std::vector<double> s = v;
    std::sort(s.begin(), s.end());
    return s;
}

} // namespace

std::vector<std::string> write_bundle(const std::string &dir, const Manifest &manifest,
                                      const std::vector<ConfigResult> &results)
{
    namespace fs = std::filesystem;
    using sim::format_number;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec)
        throw Error(ErrorCode::io, "cannot create output directory '" + dir + "': " + ec.message());
    const fs::path root(dir);
    std::vector<std::string> written;

    std::ostringstream metrics;
    metrics << "config,run,direction,offered_mbps,throughput_mbps,mean_delay_ms,packets_generated,"
               "packets_delivered,packets_dropped,packets_in_queue,tb_count,tb_errors,tb_outage,tb_clear,"
               "harq_retx,harq_abandoned,harq_drops,harq_max_gap_slots,am_retx,allocated_symbols,"
               "padding_symbols,idle_allocations,invariants_ok\n";
    for (const auto &res : results)
        for (const auto &r : res.reports)
            for (auto d : {Direction::downlink, Direction::uplink})
            {
                const auto &m = r.at(d);
                const double window = r.duration_s - r.warmup_s;
                const double offered = window > 0.0 ? static_cast<double>(m.offered_bits) / window : 0.0;
                metrics << res.label << ',' << r.run << ',' << to_string(d) << ',' << format_number(offered / 1e6)
                        << ',' << format_number(m.throughput_bps / 1e6) << ','
                        << (m.delay_ms.empty() ? std::string() : format_number(m.mean_delay_ms())) << ','
                        << m.packets_generated << ',' << m.packets_delivered << ',' << m.packets_dropped << ','
                        << m.packets_in_queue << ',' << m.tb_count << ',' << m.tb_errors << ',' << m.tb_outage
                        << ',' << m.tb_clear << ',' << m.harq_retx << ',' << m.harq_abandoned << ','
                        << m.harq_drops << ',' << m.harq_max_gap_slots << ',' << m.am_retx << ','
                        << m.allocated_symbols << ',' << m.padding_symbols << ',' << m.idle_allocations << ','
                        << (r.invariants.ok() ? 1 : 0) << '\n';
            }
    write_file(root / "metrics.csv", metrics.str());
    written.push_back((root / "metrics.csv").string());

    std::ostringstream summary;
    summary << "config,direction,runs,offered_mbps,throughput_mbps,throughput_stderr_mbps,mean_delay_ms,"
               "delay_stderr_ms,delay_p50_ms,delay_p80_ms,delay_p95_ms,sinr_p10_db,sinr_p50_db,sinr_p90_db,"
               "tb_count,tb_errors,outage_fraction,step_fraction,harq_retx,harq_abandoned,harq_max_gap_slots,"
               "am_retx,padding_ratio,invariants_ok\n";
    for (const auto &res : results)
        for (auto d : {Direction::downlink, Direction::uplink})
        {
            const auto &s = res.summary.at(d);
            const auto delay = sorted_copy(s.delay_ms);
            const auto sinr = sorted_copy(s.sinr_db);
            summary << res.label << ',' << to_string(d) << ',' << res.summary.runs << ','
                    << format_number(s.offered_bps / 1e6) << ',' << format_number(s.mean_throughput_bps / 1e6)
                    << ',' << format_number(s.stderr_throughput_bps / 1e6) << ','
                    << (delay.empty() ? std::string() : format_number(s.mean_delay_ms)) << ','
                    << (delay.empty() ? std::string() : format_number(s.stderr_delay_ms)) << ','
                    << fmt_or_empty(sim::percentile(delay, 0.5)) << ',' << fmt_or_empty(sim::percentile(delay, 0.8))
                    << ',' << fmt_or_empty(sim::percentile(delay, 0.95)) << ','
                    << fmt_or_empty(sim::percentile(sinr, 0.1)) << ',' << fmt_or_empty(sim::percentile(sinr, 0.5))
                    << ',' << fmt_or_empty(sim::percentile(sinr, 0.9)) << ',' << s.tb_count << ',' << s.tb_errors
                    << ',' << format_number(s.outage_fraction()) << ',' << format_number(s.step_fraction()) << ','
                    << s.harq_retx << ',' << s.harq_abandoned << ',' << s.harq_max_gap_slots << ',' << s.am_retx
                    << ',' << format_number(res.summary.padding_ratio) << ','
                    << (res.summary.invariants.ok() ? 1 : 0) << '\n';
        }
    write_file(root / "summary.csv", summary.str());
    written.push_back((root / "summary.csv").string());

    using Field = std::vector<double> sim::DirectionSummary::*;
    const std::pair<const char *, Field> metrics_list[] = {{"delay", &sim::DirectionSummary::delay_ms},
                                                            {"sinr", &sim::DirectionSummary::sinr_db},
                                                            {"bler", &sim::DirectionSummary::bler}};
    for (const auto &[metric, field] : metrics_list)
        for (auto d : {Direction::downlink, Direction::uplink})
        {
            std::ostringstream os;
            os << "config,value,cdf\n";
            for (const auto &res : results)
                write_cdf_rows(os, res.label, sorted_copy(res.summary.at(d).*field), manifest.cdf_points);
            const fs::path p = root / (std::string("cdf_") + metric + "_" + to_string(d) + ".csv");
            write_file(p, os.str());
            written.push_back(p.string());
        }

    write_file(root / "manifest.json", manifest.to_json());
    written.push_back((root / "manifest.json").string());
    return written;
}

std::vector<ConfigResult> execute_manifest(const Manifest &manifest, const std::string &dir, int workers,
                                           const Progress &progress)
{
    auto results = run_campaign(manifest.configs, workers, progress);
    write_bundle(dir, manifest, results);
    return results;
}

} // namespace mmwsim::io
