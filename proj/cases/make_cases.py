#!/usr/bin/env python3
"""Regenerates the bundled 14-bus study cases.

The network data is the classic 14-bus test system; machine, limiter,
tap-changer and load-recovery parameters are study choices, tuned so the
three bundled scenarios exercise the stable, oscillatory and unstable
long-term regimes.
"""
import copy
import json
import pathlib

OUT = pathlib.Path(__file__).parent

BRANCHES = [
    ("1-2", 1, 2, 0.01938, 0.05917, 0.0528, 1.0),
    ("1-5", 1, 5, 0.05403, 0.22304, 0.0492, 1.0),
    ("2-3", 2, 3, 0.04699, 0.19797, 0.0438, 1.0),
    ("2-4", 2, 4, 0.05811, 0.17632, 0.0340, 1.0),
    ("2-5", 2, 5, 0.05695, 0.17388, 0.0346, 1.0),
    ("3-4", 3, 4, 0.06701, 0.17103, 0.0128, 1.0),
    ("4-5", 4, 5, 0.01335, 0.04211, 0.0, 1.0),
    ("4-7", 4, 7, 0.0, 0.20912, 0.0, 0.978),
    ("4-9", 4, 9, 0.0, 0.55618, 0.0, 0.969),
    ("5-6", 5, 6, 0.0, 0.25202, 0.0, 0.932),
    ("6-11", 6, 11, 0.09498, 0.19890, 0.0, 1.0),
    ("6-12", 6, 12, 0.12291, 0.25581, 0.0, 1.0),
    ("6-13", 6, 13, 0.06615, 0.13027, 0.0, 1.0),
    ("7-8", 7, 8, 0.0, 0.17615, 0.0, 1.0),
    ("7-9", 7, 9, 0.0, 0.11001, 0.0, 1.0),
    ("9-10", 9, 10, 0.03181, 0.08450, 0.0, 1.0),
    ("9-14", 9, 14, 0.12711, 0.27038, 0.0, 1.0),
    ("10-11", 10, 11, 0.08205, 0.19207, 0.0, 1.0),
    ("12-13", 12, 13, 0.22092, 0.19988, 0.0, 1.0),
    ("13-14", 13, 14, 0.17093, 0.34802, 0.0, 1.0),
]

LOADS = {
    2: (0.217, 0.127), 3: (0.942, 0.19), 4: (0.478, -0.039), 5: (0.076, 0.016),
    6: (0.112, 0.075), 9: (0.295, 0.166), 10: (0.09, 0.058), 11: (0.035, 0.018),
    12: (0.061, 0.016), 13: (0.135, 0.058), 14: (0.149, 0.05),
}

GEN_BUSES = {1: ("slack", 1.06, 0.0), 2: ("generator", 1.045, 0.4),
             3: ("generator", 1.01, 0.0), 6: ("generator", 1.07, 0.0),
             8: ("generator", 1.09, 0.0)}


def base_case(name):
    buses = []
    for b in range(1, 15):
        kind, vset, _ = GEN_BUSES.get(b, ("load", 1.0, 0.0))
        p, q = LOADS.get(b, (0.0, 0.0))
        bus = {"id": b, "kind": kind, "v_set": vset, "p_load": p, "q_load": q}
        if b == 9:
            bus["bs"] = 0.19
        buses.append(bus)
    branches = [dict(zip(("id", "from", "to", "r", "x", "b", "tap"), br))
                for br in BRANCHES]
    return {"name": name, "base_mva": 100.0, "f_hz": 60.0,
            "buses": buses, "branches": branches}


def gen(bus, h, d, p_set, ka, te, if_lim, t_delay, k_oxl, governor=False,
        xd=1.8, xq=1.7, xdp=0.3, xqp=0.55):
    g = {"bus": bus, "h": h, "d": d, "xd": xd, "xq": xq, "xdp": xdp,
         "xqp": xqp, "td0p": 6.0, "tq0p": 1.0, "p_set": p_set,
         "avr": {"ka": ka, "ta": 0.05, "tr": 0.02, "te": te,
                 "efd_min": 0.0, "efd_max": 5.0},
         "oxl": {"if_lim": if_lim, "t_delay": t_delay, "k_oxl": k_oxl,
                 "t_reset": 5.0, "hysteresis_frac": 0.02}}
    if governor:
        g["governor"] = {"droop": 0.05, "tg": 0.5, "ts": 2.0, "p_max": 4.0}
    return g


def recovery(bus, tp=30.0):
    return {"bus": bus, "tp": tp, "tq": tp, "alpha_s": 0.0, "alpha_t": 2.0,
            "beta_s": 0.0, "beta_t": 2.0}


def ltc(branch, bus, t_d0, v_ref=1.0, dn=0.0125):
    return {"branch": branch, "controlled_bus": bus, "v_ref": v_ref,
            "deadband": 0.01, "n_min": 0.85, "n_max": 1.15, "dn": dn,
            "t_d0": t_d0, "t_step": 10.0}


def write(name, case):
    path = OUT / f"{name}.json"
    path.write_text(json.dumps(case, indent=2) + "\n")
    print(path)


def write_schedule(name, events):
    path = OUT / f"{name}.json"
    path.write_text(json.dumps({"events": events}, indent=2) + "\n")
    print(path)


def trips(branches, t=1.0):
    return [{"t": t, "type": "branch_trip", "branch": b} for b in branches]


# Stable study: generous field limits, one mild line trip, no tap changers.
stable = base_case("14-bus stable study")
stable["notes"] = ("standard 14-bus network; machine and load-recovery "
                   "parameters chosen so the post-trip trajectory settles")
stable["generators"] = [
    gen(1, 6.0, 2.0, 0.0, 60.0, 0.4, 5.0, 40.0, 0.5, governor=True),
    gen(2, 5.0, 2.0, 0.4, 60.0, 0.4, 5.0, 40.0, 0.5),
    gen(3, 4.0, 2.0, 0.0, 60.0, 0.4, 5.0, 40.0, 0.5, governor=True),
    gen(6, 3.0, 2.0, 0.0, 60.0, 0.4, 5.0, 40.0, 0.5),
    gen(8, 3.0, 2.0, 0.0, 60.0, 0.4, 5.0, 40.0, 0.5),
]
stable["recovery_loads"] = [recovery(9), recovery(10), recovery(14)]
stable["ltcs"] = []
write("case14_stable", stable)
write_schedule("sched_stable", trips(["10-11"]))

# Oscillatory study: one tap changer, tight field limit and a lightly
# damped machine at bus 3; three trips stress the 9/10/14 load pocket.
case1 = base_case("14-bus oscillatory study")
case1["notes"] = ("tap changer on 4-9; generator 3 runs into its field "
                  "limit after the trips and the aggressive limiter "
                  "integral gain interacts with the field lag into a "
                  "sustained cycle")
case1["generators"] = [
    gen(1, 6.0, 2.0, 0.0, 60.0, 0.4, 5.0, 40.0, 0.5, governor=True),
    gen(2, 5.0, 2.0, 0.4, 60.0, 0.4, 5.0, 40.0, 0.5),
    gen(3, 4.0, 2.0, 0.0, 60.0, 0.4, 1.545, 11.0, 15.0, governor=True),
    gen(6, 3.0, 2.0, 0.0, 60.0, 0.4, 5.0, 40.0, 0.5),
    gen(8, 3.0, 2.0, 0.0, 60.0, 0.4, 5.0, 40.0, 0.5),
]
case1["generators"][2]["oxl"]["t_reset"] = 2.0
case1["generators"][2]["oxl"]["hysteresis_frac"] = 0.06
case1["recovery_loads"] = [recovery(9), recovery(10), recovery(14)]
case1["ltcs"] = [ltc("4-9", 9, 20.0)]
case1["ltcs"][0]["t_step"] = 5.0
write("case14_case1", case1)
write_schedule("sched_case1", trips(["10-11", "7-9", "6-13"]))

# Unstable study: three tap changers and a heavier load pocket. The
# machine at bus 3 is heavily dispatched with a destabilizing damping
# coefficient (standing in for an adverse control interaction), so the
# post-trip operating point keeps a solvable network while its fast
# dynamics grow into a pole slip. The bus-6 limiter engages half a
# minute in and reacts sharply to the tap ladder.
case2 = base_case("14-bus unstable study")
case2["notes"] = ("tap changers on 4-9, 12-13 and 2-4; the machine at "
                  "bus 3 loses synchronism in the full model while the "
                  "quasi-steady manifold stays solvable to the horizon")
case2["generators"] = [
    gen(1, 6.0, 2.0, 0.0, 60.0, 0.4, 5.0, 30.0, 0.5, governor=True),
    gen(2, 5.0, 2.0, 0.4, 60.0, 0.4, 5.0, 30.0, 0.5),
    gen(3, 4.0, -10.0, 1.1, 200.0, 0.4, 5.0, 30.0, 0.5),
    gen(6, 3.0, 2.0, 0.0, 60.0, 0.4, 1.35, 30.0, 30.0),
    gen(8, 3.0, 2.0, 0.0, 60.0, 0.4, 5.0, 30.0, 0.5),
]
for b in case2["buses"]:
    if b["id"] in (9, 13, 14):
        b["p_load"] *= 1.25
        b["q_load"] *= 1.25
case2["generators"][3]["oxl"]["hysteresis_frac"] = 0.05
case2["recovery_loads"] = [recovery(9), recovery(10), recovery(14)]
case2["ltcs"] = [ltc("4-9", 9, 30.0, dn=0.025), ltc("12-13", 13, 30.0, dn=0.025),
                 ltc("2-4", 4, 30.0, dn=0.025)]
write("case14_case2", case2)
write_schedule("sched_case2", trips(["6-13", "7-9", "6-11"]))
