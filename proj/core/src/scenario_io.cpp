#include "psim/scenario_io.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"

namespace psim {

using nlohmann::json;

namespace {

std::string join_problems(const std::vector<std::string>& problems) {
    std::string msg = "invalid scenario input:";
    for (const auto& p : problems) msg += "\n  - " + p;
    return msg;
}

std::string g17(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ScenarioError({"cannot open file: " + path});
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ScenarioError({"cannot write file: " + path});
    out << text;
}

json parse_json(const std::string& text, const char* what) {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded()) throw ScenarioError({std::string("malformed JSON in ") + what});
    return j;
}

}  // namespace

ScenarioError::ScenarioError(std::vector<std::string> problems)
    : std::runtime_error(join_problems(problems)), problems_(std::move(problems)) {}

Case parse_case(const std::string& json_text) {
    const json j = parse_json(json_text, "case");
    std::vector<std::string> problems;
    Case c;

    c.name = j.value("name", "");
    c.base_mva = j.value("base_mva", 100.0);
    c.f_hz = j.value("f_hz", 60.0);

    static const std::map<std::string, BusKind> kinds = {
        {"slack", BusKind::slack}, {"generator", BusKind::generator}, {"load", BusKind::load}};

    std::set<int> bus_ids;
    for (const json& jb : j.value("buses", json::array())) {
        Bus b;
        b.id = jb.value("id", 0);
        const std::string kind = jb.value("kind", "load");
        if (auto it = kinds.find(kind); it != kinds.end())
            b.kind = it->second;
        else
            problems.push_back("bus " + std::to_string(b.id) + ": unknown kind '" + kind + "'");
        b.v_set = jb.value("v_set", 1.0);
        b.gs = jb.value("gs", 0.0);
        b.bs = jb.value("bs", 0.0);
        b.p_load = jb.value("p_load", 0.0);
        b.q_load = jb.value("q_load", 0.0);
        if (!bus_ids.insert(b.id).second)
            problems.push_back("duplicate bus id " + std::to_string(b.id));
        c.buses.push_back(b);
    }
    if (c.buses.empty()) problems.push_back("case has no buses");

    auto known_bus = [&](int id) { return bus_ids.count(id) > 0; };

    std::set<std::string> branch_ids;
    for (const json& jb : j.value("branches", json::array())) {
        Branch br;
        br.id = jb.value("id", "");
        br.from = jb.value("from", 0);
        br.to = jb.value("to", 0);
        br.r = jb.value("r", 0.0);
        br.x = jb.value("x", 0.0);
        br.b = jb.value("b", 0.0);
        br.tap = jb.value("tap", 1.0);
        br.in_service = jb.value("in_service", true);
        if (br.id.empty()) problems.push_back("branch with empty id");
        if (!branch_ids.insert(br.id).second)
            problems.push_back("duplicate branch id '" + br.id + "'");
        if (br.x == 0.0) problems.push_back("branch '" + br.id + "': zero reactance");
        if (br.tap <= 0.0) problems.push_back("branch '" + br.id + "': nonpositive tap");
        for (int end : {br.from, br.to})
            if (!known_bus(end))
                problems.push_back("branch '" + br.id + "': unknown bus " + std::to_string(end));
        c.branches.push_back(br);
    }

    for (const json& jg : j.value("generators", json::array())) {
        GeneratorParams g;
        g.bus = jg.value("bus", 0);
        g.h = jg.value("h", g.h);
        g.d = jg.value("d", g.d);
        g.xd = jg.value("xd", g.xd);
        g.xq = jg.value("xq", g.xq);
        g.xdp = jg.value("xdp", g.xdp);
        g.xqp = jg.value("xqp", g.xqp);
        g.td0p = jg.value("td0p", g.td0p);
        g.tq0p = jg.value("tq0p", g.tq0p);
        g.p_set = jg.value("p_set", 0.0);
        if (!known_bus(g.bus))
            problems.push_back("generator at unknown bus " + std::to_string(g.bus));
        if (g.h <= 0.0)
            problems.push_back("generator at bus " + std::to_string(g.bus) +
                               ": nonpositive inertia");
        for (auto [v, nm] : {std::pair{g.td0p, "td0p"}, {g.tq0p, "tq0p"}})
            if (v <= 0.0)
                problems.push_back("generator at bus " + std::to_string(g.bus) +
                                   ": nonpositive " + nm);
        if (jg.contains("avr")) {
            const json& ja = jg["avr"];
            AvrParams a;
            a.ka = ja.value("ka", a.ka);
            a.ta = ja.value("ta", a.ta);
            a.tr = ja.value("tr", a.tr);
            a.te = ja.value("te", a.te);
            a.efd_min = ja.value("efd_min", a.efd_min);
            a.efd_max = ja.value("efd_max", a.efd_max);
            if (a.ta <= 0 || a.tr <= 0 || a.te <= 0)
                problems.push_back("generator at bus " + std::to_string(g.bus) +
                                   ": nonpositive avr time constant");
            g.avr = a;
        }
        if (jg.contains("oxl")) {
            const json& jo = jg["oxl"];
            OxlParams o;
            o.if_lim = jo.value("if_lim", o.if_lim);
            o.t_delay = jo.value("t_delay", o.t_delay);
            o.k_oxl = jo.value("k_oxl", o.k_oxl);
            o.t_reset = jo.value("t_reset", o.t_reset);
            o.hysteresis_frac = jo.value("hysteresis_frac", o.hysteresis_frac);
            if (!g.avr)
                problems.push_back("generator at bus " + std::to_string(g.bus) +
                                   ": oxl without avr");
            g.oxl = o;
        }
        if (jg.contains("governor")) {
            const json& jv = jg["governor"];
            GovernorParams gv;
            gv.droop = jv.value("droop", gv.droop);
            gv.tg = jv.value("tg", gv.tg);
            gv.ts = jv.value("ts", gv.ts);
            gv.p_max = jv.value("p_max", gv.p_max);
            if (gv.droop <= 0 || gv.tg <= 0 || gv.ts <= 0)
                problems.push_back("generator at bus " + std::to_string(g.bus) +
                                   ": bad governor parameters");
            g.governor = gv;
        }
        c.generators.push_back(g);
    }

    for (const json& jl : j.value("recovery_loads", json::array())) {
        RecoveryLoadParams l;
        l.bus = jl.value("bus", 0);
        l.tp = jl.value("tp", l.tp);
        l.tq = jl.value("tq", l.tq);
        l.alpha_s = jl.value("alpha_s", l.alpha_s);
        l.alpha_t = jl.value("alpha_t", l.alpha_t);
        l.beta_s = jl.value("beta_s", l.beta_s);
        l.beta_t = jl.value("beta_t", l.beta_t);
        if (!known_bus(l.bus))
            problems.push_back("recovery load at unknown bus " + std::to_string(l.bus));
        if (l.tp <= 0 || l.tq <= 0)
            problems.push_back("recovery load at bus " + std::to_string(l.bus) +
                               ": nonpositive time constant");
        c.recovery_loads.push_back(l);
    }

    for (const json& jt : j.value("ltcs", json::array())) {
        LtcParams t;
        t.branch = jt.value("branch", "");
        t.controlled_bus = jt.value("controlled_bus", 0);
        t.v_ref = jt.value("v_ref", t.v_ref);
        t.deadband = jt.value("deadband", t.deadband);
        t.n_min = jt.value("n_min", t.n_min);
        t.n_max = jt.value("n_max", t.n_max);
        t.dn = jt.value("dn", t.dn);
        t.t_d0 = jt.value("t_d0", t.t_d0);
        t.t_step = jt.value("t_step", t.t_step);
        if (!branch_ids.count(t.branch))
            problems.push_back("ltc on unknown branch '" + t.branch + "'");
        if (!known_bus(t.controlled_bus))
            problems.push_back("ltc '" + t.branch + "': unknown controlled bus " +
                               std::to_string(t.controlled_bus));
        if (t.dn <= 0 || t.t_d0 <= 0 || t.t_step <= 0 || t.n_min >= t.n_max)
            problems.push_back("ltc '" + t.branch + "': bad tap parameters");
        c.ltcs.push_back(t);
    }

    if (j.contains("bounds")) {
        const json& jb = j["bounds"];
        c.bounds.omega_max = jb.value("omega_max", c.bounds.omega_max);
        c.bounds.v_min = jb.value("v_min", c.bounds.v_min);
        c.bounds.state_abs_max = jb.value("state_abs_max", c.bounds.state_abs_max);
    }

    const int n_slack =
        static_cast<int>(std::count_if(c.buses.begin(), c.buses.end(),
                                       [](const Bus& b) { return b.kind == BusKind::slack; }));
    if (!c.buses.empty() && n_slack != 1)
        problems.push_back("case needs exactly one slack bus, found " + std::to_string(n_slack));

    if (!problems.empty()) throw ScenarioError(std::move(problems));
    return c;
}

Case load_case(const std::string& path) { return parse_case(read_file(path)); }

std::string serialize_case(const Case& c) {
    json j;
    j["name"] = c.name;
    j["base_mva"] = c.base_mva;
    j["f_hz"] = c.f_hz;
    j["buses"] = json::array();
    for (const Bus& b : c.buses) {
        const char* kind = b.kind == BusKind::slack      ? "slack"
                           : b.kind == BusKind::generator ? "generator"
                                                          : "load";
        j["buses"].push_back({{"id", b.id},
                              {"kind", kind},
                              {"v_set", b.v_set},
                              {"gs", b.gs},
                              {"bs", b.bs},
                              {"p_load", b.p_load},
                              {"q_load", b.q_load}});
    }
    j["branches"] = json::array();
    for (const Branch& br : c.branches)
        j["branches"].push_back({{"id", br.id},
                                 {"from", br.from},
                                 {"to", br.to},
                                 {"r", br.r},
                                 {"x", br.x},
                                 {"b", br.b},
                                 {"tap", br.tap},
                                 {"in_service", br.in_service}});
    j["generators"] = json::array();
    for (const GeneratorParams& g : c.generators) {
        json jg = {{"bus", g.bus},   {"h", g.h},       {"d", g.d},     {"xd", g.xd},
                   {"xq", g.xq},     {"xdp", g.xdp},   {"xqp", g.xqp}, {"td0p", g.td0p},
                   {"tq0p", g.tq0p}, {"p_set", g.p_set}};
        if (g.avr)
            jg["avr"] = {{"ka", g.avr->ka},           {"ta", g.avr->ta},
                         {"tr", g.avr->tr},           {"te", g.avr->te},
                         {"efd_min", g.avr->efd_min}, {"efd_max", g.avr->efd_max}};
        if (g.oxl)
            jg["oxl"] = {{"if_lim", g.oxl->if_lim},
                         {"t_delay", g.oxl->t_delay},
                         {"k_oxl", g.oxl->k_oxl},
                         {"t_reset", g.oxl->t_reset},
                         {"hysteresis_frac", g.oxl->hysteresis_frac}};
        if (g.governor)
            jg["governor"] = {{"droop", g.governor->droop},
                              {"tg", g.governor->tg},
                              {"ts", g.governor->ts},
                              {"p_max", g.governor->p_max}};
        j["generators"].push_back(std::move(jg));
    }
    j["recovery_loads"] = json::array();
    for (const RecoveryLoadParams& l : c.recovery_loads)
        j["recovery_loads"].push_back({{"bus", l.bus},
                                       {"tp", l.tp},
                                       {"tq", l.tq},
                                       {"alpha_s", l.alpha_s},
                                       {"alpha_t", l.alpha_t},
                                       {"beta_s", l.beta_s},
                                       {"beta_t", l.beta_t}});
    j["ltcs"] = json::array();
    for (const LtcParams& t : c.ltcs)
        j["ltcs"].push_back({{"branch", t.branch},
                             {"controlled_bus", t.controlled_bus},
                             {"v_ref", t.v_ref},
                             {"deadband", t.deadband},
                             {"n_min", t.n_min},
                             {"n_max", t.n_max},
                             {"dn", t.dn},
                             {"t_d0", t.t_d0},
                             {"t_step", t.t_step}});
    j["bounds"] = {{"omega_max", c.bounds.omega_max},
                   {"v_min", c.bounds.v_min},
                   {"state_abs_max", c.bounds.state_abs_max}};
    return j.dump(2) + "\n";
}

EventSchedule parse_schedule(const std::string& json_text) {
    const json j = parse_json(json_text, "schedule");
    std::vector<std::string> problems;
    EventSchedule sched;
    for (const json& je : j.value("events", json::array())) {
        ScheduledEvent e;
        e.t = je.value("t", 0.0);
        e.type = je.value("type", "");
        e.branch = je.value("branch", "");
        e.bus = je.value("bus", 0);
        e.dp = je.value("dp", 0.0);
        e.dq = je.value("dq", 0.0);
        if (e.type == "branch_trip") {
            if (e.branch.empty()) problems.push_back("branch_trip event without branch id");
        } else if (e.type == "load_step") {
            if (e.bus == 0) problems.push_back("load_step event without bus");
        } else {
            problems.push_back("unknown event type '" + e.type + "'");
        }
        if (e.t < 0.0) problems.push_back("event at negative time");
        sched.events.push_back(std::move(e));
    }
    if (!problems.empty()) throw ScenarioError(std::move(problems));
    std::stable_sort(sched.events.begin(), sched.events.end(),
                     [](const ScheduledEvent& a, const ScheduledEvent& b) { return a.t < b.t; });
    return sched;
}

EventSchedule load_schedule(const std::string& path) { return parse_schedule(read_file(path)); }

std::string serialize_schedule(const EventSchedule& sched) {
    json j;
    j["events"] = json::array();
    for (const ScheduledEvent& e : sched.events) {
        json je = {{"t", e.t}, {"type", e.type}};
        if (e.type == "branch_trip") je["branch"] = e.branch;
        if (e.type == "load_step") {
            je["bus"] = e.bus;
            je["dp"] = e.dp;
            je["dq"] = e.dq;
        }
        j["events"].push_back(std::move(je));
    }
    return j.dump(2) + "\n";
}

namespace {

const char* kind_name(EventKind k) {
    switch (k) {
        case EventKind::fault: return "fault";
        case EventKind::jump: return "jump";
        case EventKind::mode_switch: return "mode_switch";
    }
    return "fault";
}

EventKind kind_from(const std::string& s) {
    if (s == "jump") return EventKind::jump;
    if (s == "mode_switch") return EventKind::mode_switch;
    return EventKind::fault;
}

Termination termination_from(const std::string& s) {
    if (s == "short_term_unstable") return Termination::short_term_unstable;
    if (s == "newton_failure") return Termination::newton_failure;
    if (s == "singularity") return Termination::singularity;
    return Termination::completed;
}

}  // namespace

void write_trace_csv(std::ostream& os, const Trace& trace, const DynamicModel& model) {
    const Dims d = model.dims();
    os << "# dims n_zc=" << d.n_zc << " n_zd=" << d.n_zd << " n_x=" << d.n_x
       << " n_y=" << d.n_y << "\n";
    os << "t";
    for (const auto& n : model.names_zc()) os << "," << n;
    for (const auto& n : model.names_zd()) os << "," << n;
    for (const auto& n : model.names_x()) os << "," << n;
    for (const auto& n : model.names_y()) os << "," << n;
    os << "\n";

    size_t ei = 0;
    for (size_t i = 0; i < trace.samples.size(); ++i) {
        while (ei < trace.events.size() &&
               trace.events[ei].sample_index < static_cast<int>(i)) {
            const TraceEvent& e = trace.events[ei];
            os << "# event t=" << g17(e.t) << " kind=" << kind_name(e.kind) << " k=" << e.k
               << " sample=" << e.sample_index << " detail=" << e.detail << "\n";
            ++ei;
        }
        const TraceSample& smp = trace.samples[i];
        os << g17(smp.t);
        for (int v = 0; v < d.n_zc; ++v) os << "," << g17(smp.state.z_c(v));
        for (int v = 0; v < d.n_zd; ++v) os << "," << g17(smp.state.z_d(v));
        for (int v = 0; v < d.n_x; ++v) os << "," << g17(smp.state.x(v));
        for (int v = 0; v < d.n_y; ++v) os << "," << g17(smp.state.y(v));
        os << "\n";
    }
    while (ei < trace.events.size()) {
        const TraceEvent& e = trace.events[ei];
        os << "# event t=" << g17(e.t) << " kind=" << kind_name(e.kind) << " k=" << e.k
           << " sample=" << e.sample_index << " detail=" << e.detail << "\n";
        ++ei;
    }
    os << "# termination " << to_string(trace.termination) << "\n";
}

void write_trace_csv(const std::string& path, const Trace& trace, const DynamicModel& model) {
    std::ostringstream ss;
    write_trace_csv(ss, trace, model);
    write_file(path, ss.str());
}

ParsedTrace parse_trace_csv(std::istream& is) {
    ParsedTrace out;
    Dims d;
    std::string line;
    bool have_header = false;

    auto parse_event = [&](const std::string& l) {
        TraceEvent e;
        std::istringstream ss(l);
        std::string tok;
        ss >> tok >> tok;  // "#", "event"
        while (ss >> tok) {
            if (tok.rfind("t=", 0) == 0)
                e.t = std::stod(tok.substr(2));
            else if (tok.rfind("kind=", 0) == 0)
                e.kind = kind_from(tok.substr(5));
            else if (tok.rfind("k=", 0) == 0)
                e.k = std::stoi(tok.substr(2));
            else if (tok.rfind("sample=", 0) == 0)
                e.sample_index = std::stoi(tok.substr(7));
            else if (tok.rfind("detail=", 0) == 0) {
                std::string rest;
                std::getline(ss, rest);
                e.detail = tok.substr(7) + rest;
                break;
            }
        }
        out.trace.events.push_back(std::move(e));
    };

    while (std::getline(is, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            if (line.rfind("# dims", 0) == 0) {
                std::istringstream ss(line);
                std::string tok;
                while (ss >> tok) {
                    if (tok.rfind("n_zc=", 0) == 0) d.n_zc = std::stoi(tok.substr(5));
                    if (tok.rfind("n_zd=", 0) == 0) d.n_zd = std::stoi(tok.substr(5));
                    if (tok.rfind("n_x=", 0) == 0) d.n_x = std::stoi(tok.substr(4));
                    if (tok.rfind("n_y=", 0) == 0) d.n_y = std::stoi(tok.substr(4));
                }
            } else if (line.rfind("# event", 0) == 0) {
                parse_event(line);
            } else if (line.rfind("# termination ", 0) == 0) {
                out.trace.termination = termination_from(line.substr(14));
            }
            continue;
        }
        if (!have_header) {
            std::istringstream ss(line);
            std::string col;
            bool first = true;
            while (std::getline(ss, col, ',')) {
                if (!first) out.columns.push_back(col);
                first = false;
            }
            have_header = true;
            continue;
        }
        std::istringstream ss(line);
        std::string cell;
        std::vector<double> vals;
        while (std::getline(ss, cell, ',')) vals.push_back(std::stod(cell));
        const size_t expect = 1 + d.n_zc + d.n_zd + d.n_x + d.n_y;
        if (vals.size() != expect)
            throw ScenarioError({"trace row has " + std::to_string(vals.size()) +
                                 " cells, expected " + std::to_string(expect)});
        TraceSample smp;
        smp.t = vals[0];
        size_t p = 1;
        smp.state.z_c = Eigen::Map<const Vec>(vals.data() + p, d.n_zc), p += d.n_zc;
        smp.state.z_d = Eigen::Map<const Vec>(vals.data() + p, d.n_zd), p += d.n_zd;
        smp.state.x = Eigen::Map<const Vec>(vals.data() + p, d.n_x), p += d.n_x;
        smp.state.y = Eigen::Map<const Vec>(vals.data() + p, d.n_y);
        out.trace.samples.push_back(std::move(smp));
    }
    std::sort(out.trace.events.begin(), out.trace.events.end(),
              [](const TraceEvent& a, const TraceEvent& b) {
                  return a.sample_index < b.sample_index;
              });
    return out;
}

ParsedTrace load_trace_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ScenarioError({"cannot open file: " + path});
    return parse_trace_csv(in);
}

std::string serialize_verdict(const HybridResult& result, const std::string& mode) {
    json j;
    j["mode"] = mode;
    j["verdict"] = to_string(result.verdict);
    j["termination"] = to_string(result.trace.termination);
    j["switched_back"] = result.switched_back;
    j["switch_back_time"] = result.switch_back_time;
    j["trigger_jump_k"] = result.trigger_jump_k;
    j["switch_reason"] = result.switch_reason;
    j["max_deviation"] = result.max_deviation;
    j["jump_count"] = result.jump_count;
    j["t_final"] = result.trace.samples.empty() ? 0.0 : result.trace.samples.back().t;
    j["samples"] = result.trace.samples.size();
    j["timings_s"] = {{"full", result.wall_full_s},
                      {"qss", result.wall_qss_s},
                      {"probe", result.wall_probe_s},
                      {"continuation", result.wall_cont_s}};
    return j.dump(2) + "\n";
}

void write_verdict(const std::string& path, const HybridResult& result,
                   const std::string& mode) {
    write_file(path, serialize_verdict(result, mode));
}

}  // namespace psim
