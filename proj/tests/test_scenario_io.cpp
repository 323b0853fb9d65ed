#include <sstream>

#include "doctest.h"
#include "helpers.hpp"
#include "json.hpp"
#include "psim/dae_engine.hpp"
#include "psim/powerflow.hpp"
#include "psim/scenario_io.hpp"

using namespace psim;
using testers::load_fixture;
using testers::load_sched;

TEST_CASE("case serialization is a fixed point of parse") {
    for (const char* name : {"case14_stable", "case14_case1", "case14_case2"}) {
        const Case c = load_fixture(name);
        const std::string once = serialize_case(c);
        const Case back = parse_case(once);
        CHECK(serialize_case(back) == once);
        CHECK(back.buses.size() == c.buses.size());
        CHECK(back.branches.size() == c.branches.size());
        // numeric fields survive exactly
        for (size_t i = 0; i < c.branches.size(); ++i) {
            CHECK(back.branches[i].x == c.branches[i].x);
            CHECK(back.branches[i].r == c.branches[i].r);
        }
        for (size_t i = 0; i < c.generators.size(); ++i) {
            CHECK(back.generators[i].h == c.generators[i].h);
            CHECK(back.generators[i].d == c.generators[i].d);
        }
    }
}

TEST_CASE("oscillatory-case fixture carries the expected device roster") {
    const Case c = load_fixture("case14_case1");
    CHECK(c.buses.size() == 14);
    REQUIRE(c.generators.size() == 5);
    int with_avr = 0, with_oxl = 0, with_gov = 0;
    for (const auto& g : c.generators) {
        with_avr += g.avr.has_value();
        with_oxl += g.oxl.has_value();
        with_gov += g.governor.has_value();
    }
    CHECK(with_avr == 5);
    CHECK(with_oxl == 5);
    CHECK(with_gov == 2);
    CHECK(c.recovery_loads.size() == 3);
    REQUIRE(c.ltcs.size() == 1);
    CHECK(c.ltcs[0].t_d0 == 20.0);
    // the limiter on the machine at bus 3 is deliberately aggressive; the
    // remaining four keep the standard pickup delay
    int standard_delay = 0;
    for (const auto& g : c.generators) standard_delay += g.oxl->t_delay == 40.0;
    CHECK(standard_delay == 4);
}

TEST_CASE("collapse-case fixture carries the expected device roster") {
    const Case c = load_fixture("case14_case2");
    REQUIRE(c.generators.size() == 5);
    for (const auto& g : c.generators) {
        REQUIRE(g.oxl.has_value());
        CHECK(g.oxl->t_delay == 30.0);
    }
    REQUIRE(c.ltcs.size() == 3);
    for (const auto& t : c.ltcs) {
        CHECK(t.t_d0 == 30.0);
        CHECK(t.t_step == 10.0);
    }
}

TEST_CASE("schedule parsing sorts events and round-trips") {
    const std::string text = R"({"events": [
        {"t": 5.0, "type": "load_step", "bus": 9, "dp": 0.1, "dq": 0.05},
        {"t": 1.0, "type": "branch_trip", "branch": "6-13"}
    ]})";
    const EventSchedule sched = parse_schedule(text);
    REQUIRE(sched.events.size() == 2);
    CHECK(sched.events[0].t == 1.0);
    CHECK(sched.events[0].type == "branch_trip");
    CHECK(sched.events[1].bus == 9);
    const std::string once = serialize_schedule(sched);
    CHECK(serialize_schedule(parse_schedule(once)) == once);
}

TEST_CASE("validation reports every problem at once") {
    // two bad branches and a missing slack: all three must be listed
    const std::string text = R"({
        "name": "broken", "buses": [
            {"id": 1, "kind": "load"}, {"id": 2, "kind": "load"}
        ],
        "branches": [
            {"id": "a", "from": 1, "to": 2, "x": 0.0},
            {"id": "b", "from": 1, "to": 99, "x": 0.1}
        ]
    })";
    try {
        parse_case(text);
        FAIL("expected a validation failure");
    } catch (const ScenarioError& e) {
        CHECK(e.problems().size() >= 3);
        bool zero_x = false, dangling = false, slack = false;
        for (const auto& p : e.problems()) {
            if (p.find("zero reactance") != std::string::npos) zero_x = true;
            if (p.find("unknown bus 99") != std::string::npos) dangling = true;
            if (p.find("slack") != std::string::npos) slack = true;
        }
        CHECK(zero_x);
        CHECK(dangling);
        CHECK(slack);
    }
}

TEST_CASE("malformed JSON and unknown event types are rejected") {
    CHECK_THROWS_AS(parse_case("{nope"), ScenarioError);
    CHECK_THROWS_AS(parse_schedule(R"({"events": [{"t": 1.0, "type": "meteor"}]})"),
                    ScenarioError);
    CHECK_THROWS_AS(load_case("/nonexistent/file.json"), ScenarioError);
}

TEST_CASE("trace CSV writing round-trips byte for byte") {
    PowerSystemModel m(load_fixture("case14_stable"));
    SimState st = initialize_equilibrium(m);
    IntegratorConfig cfg;
    EventSchedule sched = load_sched("sched_stable");
    Trace tr = simulate_full(m, st, sched, 2.0, cfg);
    REQUIRE(tr.samples.size() > 2);

    std::ostringstream first;
    write_trace_csv(first, tr, m);
    std::istringstream in(first.str());
    const ParsedTrace parsed = parse_trace_csv(in);
    std::ostringstream second;
    write_trace_csv(second, parsed.trace, m);
    CHECK(first.str() == second.str());

    REQUIRE(parsed.trace.samples.size() == tr.samples.size());
    for (size_t i = 0; i < tr.samples.size(); ++i) {
        CHECK(parsed.trace.samples[i].t == tr.samples[i].t);
        CHECK(parsed.trace.samples[i].state.x == tr.samples[i].state.x);
        CHECK(parsed.trace.samples[i].state.y == tr.samples[i].state.y);
        CHECK(parsed.trace.samples[i].state.z_c == tr.samples[i].state.z_c);
        CHECK(parsed.trace.samples[i].state.z_d == tr.samples[i].state.z_d);
    }
}

TEST_CASE("a two-sample trace prints one header line and two data rows") {
    PowerSystemModel m(load_fixture("case14_stable"));
    SimState st = initialize_equilibrium(m);
    Trace tr;
    tr.add_sample(0.0, st.part);
    tr.add_sample(0.5, st.part);
    std::ostringstream os;
    write_trace_csv(os, tr, m);
    // '#' rows are annotations; the payload is one header plus two data rows
    std::istringstream lines(os.str());
    std::vector<std::string> payload;
    for (std::string ln; std::getline(lines, ln);)
        if (!ln.empty() && ln[0] != '#') payload.push_back(ln);
    REQUIRE(payload.size() == 3);
    CHECK(payload[0].rfind("t,", 0) == 0);
    const size_t n_cols = 1 + m.names_zc().size() + m.names_zd().size() +
                          m.names_x().size() + m.names_y().size();
    for (const auto& ln : payload) {
        size_t commas = 0;
        for (char ch : ln) commas += ch == ',';
        CHECK(commas + 1 == n_cols);
    }
}

TEST_CASE("verdict serialization is valid JSON with the study outcome") {
    HybridResult r;
    r.verdict = StabilityVerdict::oscillatory;
    r.switched_back = true;
    r.switch_back_time = 25.0;
    r.trigger_jump_k = 5;
    r.switch_reason = "undamped limiter oscillation in terminal probe";
    r.max_deviation = 1.5e-4;
    r.jump_count = 5;
    r.trace.termination = Termination::completed;
    const std::string text = serialize_verdict(r, "hybrid");
    const auto j = nlohmann::json::parse(text);
    CHECK(j.at("mode") == "hybrid");
    CHECK(j.at("verdict") == "oscillatory");
    CHECK(j.at("switched_back") == true);
    CHECK(j.at("trigger_jump_k") == 5);
    CHECK(j.at("max_deviation") == 1.5e-4);
}
