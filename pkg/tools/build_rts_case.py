"""Build the bundled 73-bus benchmark case.

Reconstructs the three-area IEEE reliability test system (RTS-96, the
topology the RTS-GMLC dataset is based on) from the published single-area
tables: bus loads and voltages, branch impedances/ratings, unit reactive
limits, the bus-6 reactors, the five AC inter-area ties and the extra
bus 325.  Units are aggregated per bus; the dispatch is the classic
per-unit-type operating point with the slack at bus 113.

Transformers are carried as ratio-1 branches after the transmission
lines so line ids 0..104 match the per-area line-table order used in
reliability studies (area A 0-32, B 33-65, C 66-98, 99 = 323-325,
100-104 = ties).  The HVDC link of the original three-area system is not
modeled.

Writes src/gridshed/data/rts_gmlc.json and prints a verification summary.
"""

from __future__ import annotations

import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from gridshed.caseio import parse_case, serialize_case
from gridshed.model import Bus, Generator, Line, Load, Network, Shunt, total_load
from gridshed.powerflow import evaluate_safety

# bus local id -> (kind, base_kv, p_mw, q_mvar) for one area
BUS_TABLE = {
    1: ("pv", 138.0, 108.0, 22.0),
    2: ("pv", 138.0, 97.0, 20.0),
    3: ("pq", 138.0, 180.0, 37.0),
    4: ("pq", 138.0, 74.0, 15.0),
    5: ("pq", 138.0, 71.0, 14.0),
    6: ("pq", 138.0, 136.0, 28.0),
    7: ("pv", 138.0, 125.0, 25.0),
    8: ("pq", 138.0, 171.0, 35.0),
    9: ("pq", 138.0, 175.0, 36.0),
    10: ("pq", 138.0, 195.0, 40.0),
    11: ("pq", 230.0, 0.0, 0.0),
    12: ("pq", 230.0, 0.0, 0.0),
    13: ("pv", 230.0, 265.0, 54.0),
    14: ("pv", 230.0, 194.0, 39.0),
    15: ("pv", 230.0, 317.0, 64.0),
    16: ("pv", 230.0, 100.0, 20.0),
    17: ("pq", 230.0, 0.0, 0.0),
    18: ("pv", 230.0, 333.0, 68.0),
    19: ("pq", 230.0, 181.0, 37.0),
    20: ("pq", 230.0, 128.0, 26.0),
    21: ("pv", 230.0, 0.0, 0.0),
    22: ("pv", 230.0, 0.0, 0.0),
    23: ("pv", 230.0, 0.0, 0.0),
    24: ("pq", 230.0, 0.0, 0.0),
}

LOAD_BUSES = [1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 13, 14, 15, 16, 18, 19, 20]

# (from, to, r, x, b, rating_mva) transmission lines, one area
LINES = [
    (1, 2, 0.0026, 0.0139, 0.4611, 175.0),
    (1, 3, 0.0546, 0.2112, 0.0572, 175.0),
    (1, 5, 0.0218, 0.0845, 0.0229, 175.0),
    (2, 4, 0.0328, 0.1267, 0.0343, 175.0),
    (2, 6, 0.0497, 0.1920, 0.0520, 175.0),
    (3, 9, 0.0308, 0.1190, 0.0322, 175.0),
    (4, 9, 0.0268, 0.1037, 0.0281, 175.0),
    (5, 10, 0.0228, 0.0883, 0.0239, 175.0),
    (6, 10, 0.0139, 0.0605, 2.4590, 175.0),
    (7, 8, 0.0159, 0.0614, 0.0166, 175.0),
    (8, 9, 0.0427, 0.1651, 0.0447, 175.0),
    (8, 10, 0.0427, 0.1651, 0.0447, 175.0),
    (11, 13, 0.0061, 0.0476, 0.0999, 500.0),
    (11, 14, 0.0054, 0.0418, 0.0879, 500.0),
    (12, 13, 0.0061, 0.0476, 0.0999, 500.0),
    (12, 23, 0.0124, 0.0966, 0.2030, 500.0),
    (13, 23, 0.0111, 0.0865, 0.1818, 500.0),
    (14, 16, 0.0050, 0.0389, 0.0818, 500.0),
    (15, 16, 0.0022, 0.0173, 0.0364, 500.0),
    (15, 21, 0.0063, 0.0490, 0.1030, 500.0),
    (15, 21, 0.0063, 0.0490, 0.1030, 500.0),
    (15, 24, 0.0067, 0.0519, 0.1091, 500.0),
    (16, 17, 0.0033, 0.0259, 0.0545, 500.0),
    (16, 19, 0.0030, 0.0231, 0.0485, 500.0),
    (17, 18, 0.0018, 0.0144, 0.0303, 500.0),
    (17, 22, 0.0135, 0.1053, 0.2212, 500.0),
    (18, 21, 0.0033, 0.0259, 0.0545, 500.0),
    (18, 21, 0.0033, 0.0259, 0.0545, 500.0),
    (19, 20, 0.0051, 0.0396, 0.0833, 500.0),
    (19, 20, 0.0051, 0.0396, 0.0833, 500.0),
    (20, 23, 0.0028, 0.0216, 0.0455, 500.0),
    (20, 23, 0.0028, 0.0216, 0.0455, 500.0),
    (21, 22, 0.0087, 0.0678, 0.1424, 500.0),
]

# (from, to) transformer branches, one area
TRANSFORMERS = [(3, 24), (9, 11), (9, 12), (10, 11), (10, 12)]
TRAFO_R, TRAFO_X, TRAFO_RATING = 0.0023, 0.0839, 400.0

# inter-area ties: (from, to, r, x, b, rating); impedances use the
# published tie lengths at the per-mile values of the area line tables.
# The GMLC revision keeps four 230 kV AC ties; the original 107-203 tie
# and the HVDC link are retired, which leaves bus 107 radial on 107-108.
TIES = [
    (113, 215, 0.0096, 0.0750, 0.1576, 500.0),
    (123, 217, 0.0078, 0.0606, 0.1273, 500.0),
    (223, 318, 0.0096, 0.0750, 0.1576, 500.0),
    (325, 121, 0.0124, 0.0966, 0.2030, 500.0),
]
EXTRA_LINE = (323, 325, 0.0028, 0.0216, 0.0455, 500.0)

# aggregated per-bus units: local bus -> (p_mw, q_min, q_max)
GENERATORS = {
    1: (172.0, -50.0, 80.0),
    2: (172.0, -50.0, 80.0),
    7: (240.0, 0.0, 180.0),
    13: (285.3, 0.0, 240.0),
    14: (0.0, -50.0, 200.0),
    15: (215.0, -50.0, 110.0),
    16: (155.0, -50.0, 80.0),
    18: (400.0, -50.0, 200.0),
    21: (400.0, -50.0, 200.0),
    22: (150.0, -60.0, 96.0),  # hydro at half output (seasonal schedule)
    23: (660.0, -125.0, 310.0),
}

# Snapshot setpoint schedule: all units hold 1.02 pu.  The shutoff studies
# model a stressed autumn operating point, so voltages are kept near the
# low end of the regulation band rather than at the nominal 1.035 pu.
V_SET = 1.02
SLACK_BUS = 113
AREAS = (1, 2, 3)


def build() -> Network:
    buses = []
    for area in AREAS:
        for local, (kind, kv, _, _) in BUS_TABLE.items():
            bid = 100 * area + local
            buses.append(
                Bus(
                    id=bid,
                    kind="slack" if bid == SLACK_BUS else kind,
                    base_kv=kv,
                    v_setpoint=V_SET if kind in ("pv",) or bid == SLACK_BUS else None,
                )
            )
    buses.append(Bus(id=325, kind="pq", base_kv=230.0))

    lines = []
    for area in AREAS:
        for f, t, r, x, b, rate in LINES:
            lines.append(
                Line(
                    id=len(lines),
                    from_bus=100 * area + f,
                    to_bus=100 * area + t,
                    r=r, x=x, b=b, rating_mva=rate,
                )
            )
    f, t, r, x, b, rate = EXTRA_LINE
    lines.append(Line(id=len(lines), from_bus=f, to_bus=t, r=r, x=x, b=b,
                      rating_mva=rate))
    for f, t, r, x, b, rate in TIES:
        lines.append(Line(id=len(lines), from_bus=f, to_bus=t, r=r, x=x, b=b,
                          rating_mva=rate))
    for area in AREAS:
        for f, t in TRANSFORMERS:
            lines.append(
                Line(
                    id=len(lines),
                    from_bus=100 * area + f,
                    to_bus=100 * area + t,
                    r=TRAFO_R, x=TRAFO_X, b=0.0, rating_mva=TRAFO_RATING,
                )
            )

    loads = []
    for area in AREAS:
        for local in LOAD_BUSES:
            _, _, p, q = BUS_TABLE[local]
            loads.append(Load(id=len(loads), bus=100 * area + local, p_mw=p, q_mvar=q))

    generators = []
    for area in AREAS:
        for local, (p, qmin, qmax) in GENERATORS.items():
            generators.append(
                Generator(
                    id=len(generators),
                    bus=100 * area + local,
                    p_mw=p,
                    v_setpoint=V_SET,
                    q_min_mvar=qmin,
                    q_max_mvar=qmax,
                )
            )

    shunts = [Shunt(bus=100 * area + 6, g_mw=0.0, b_mvar=-100.0) for area in AREAS]

    meta = {
        "name": "rts-gmlc-73",
        "title": "Three-area 73-bus reliability test system (reconstruction)",
        "notes": (
            "Reconstructed from the published IEEE reliability test system "
            "tables: single-area bus/branch/unit data tripled, four AC "
            "inter-area ties, bus 325, bus-6 reactors; units aggregated per "
            "bus, classic dispatch with hydro at half output, slack at 113, "
            f"all generator setpoints {V_SET} pu (stressed autumn snapshot). "
            "The original 107-203 tie and the HVDC link are not modeled, so "
            "the system has 104 transmission lines and 15 transformers."
        ),
        "line_ids": {
            "area_a": [0, 32], "area_b": [33, 65], "area_c": [66, 98],
            "extra_323_325": 99, "ties": [100, 103], "transformers": [104, 118],
        },
    }

    return Network(
        base_mva=100.0,
        buses=tuple(buses),
        lines=tuple(lines),
        generators=tuple(generators),
        loads=tuple(loads),
        shunts=tuple(shunts),
        meta=meta,
    )


def main() -> None:
    net = build()
    text = serialize_case(net, indent=1)
    out = Path(__file__).resolve().parents[1] / "src/gridshed/data/rts_gmlc.json"
    out.write_text(text + "\n")
    round_trip = parse_case(out.read_text())
    p, q = total_load(round_trip)
    print(f"wrote {out}")
    print(f"buses={len(net.buses)} lines={len(net.lines)} "
          f"generators={len(net.generators)} loads={net.n_loads} "
          f"shunts={len(net.shunts)}")
    print(f"total load: {p:.1f} MW {q:.1f} MVAr")
    rep = evaluate_safety(round_trip)
    print(f"intact: converged={rep.converged} safe={rep.safe} "
          f"worst_loading={rep.worst_line_loading:.1f}% "
          f"v_extremes={rep.v_extremes}")
    if rep.line_violations:
        print("line violations:", rep.line_violations)
    if rep.voltage_violations:
        print("voltage violations:", rep.voltage_violations[:10])
    sol = rep.solution
    print(f"slack output: {sol.slack_p_mw:.1f} MW {sol.slack_q_mvar:.1f} MVAr, "
          f"iterations {sol.iterations}")


if __name__ == "__main__":
    main()
