"""Shared network fixtures.

The builders here are deliberately small and hand-checkable; the star
networks exist so that the binding constraint is a single trunk rating,
which makes exhaustive shedding oracles cheap to state.
"""

import numpy as np
import pytest

from gridshed import Bus, Generator, Line, Load, Network, Shunt


def two_bus_net(p_mw=50.0, q_mvar=20.0, rating=float("inf")) -> Network:
    """Slack feeding one load over a single r + jx line.

    The solved voltage has a closed-form answer; see test_powerflow.
    """
    return Network(
        base_mva=100.0,
        buses=(
            Bus(id=0, kind="slack", base_kv=100.0, v_setpoint=1.0),
            Bus(id=1, kind="pq", base_kv=100.0),
        ),
        lines=(Line(id=0, from_bus=0, to_bus=1, r=0.01, x=0.1, b=0.0,
                    rating_mva=rating),),
        generators=(),
        loads=(Load(id=0, bus=1, p_mw=p_mw, q_mvar=q_mvar),),
        shunts=(),
    )


def three_bus_net() -> Network:
    """Chain slack - pq - pq with one charged line and a shunt.

    Chosen so every admittance entry is an exact decimal:
    1/(j0.1) = -10j and 1/(0.03+0.04j) = 12-16j.
    """
    return Network(
        base_mva=100.0,
        buses=(
            Bus(id=0, kind="slack", base_kv=100.0, v_setpoint=1.0),
            Bus(id=1, kind="pq", base_kv=100.0),
            Bus(id=2, kind="pq", base_kv=100.0),
        ),
        lines=(
            Line(id=0, from_bus=0, to_bus=1, r=0.0, x=0.1, b=0.2,
                 rating_mva=200.0),
            Line(id=1, from_bus=1, to_bus=2, r=0.03, x=0.04, b=0.0,
                 rating_mva=100.0),
        ),
        generators=(),
        loads=(
            Load(id=0, bus=1, p_mw=30.0, q_mvar=10.0),
            Load(id=1, bus=2, p_mw=20.0, q_mvar=5.0),
        ),
        shunts=(Shunt(bus=2, g_mw=2.0, b_mvar=5.0),),
    )


def star_net(load_mw, trunk_rating, q_ratio=0.3, v_min=0.85, v_max=1.1,
             importance=None) -> Network:
    """Slack - trunk - hub, with one spoke and load per entry of load_mw.

    Spokes are generously rated, so safety binds on the trunk rating
    alone and the optimal shed is a pure subset-sum question over loads.
    """
    buses = [
        Bus(id=0, kind="slack", base_kv=100.0, v_setpoint=1.0),
        Bus(id=1, kind="pq", base_kv=100.0, v_min=v_min, v_max=v_max),
    ]
    lines = [Line(id=0, from_bus=0, to_bus=1, r=0.002, x=0.02, b=0.0,
                  rating_mva=trunk_rating)]
    loads = []
    for k, p in enumerate(load_mw):
        bus_id = 2 + k
        buses.append(Bus(id=bus_id, kind="pq", base_kv=100.0,
                         v_min=v_min, v_max=v_max))
        lines.append(Line(id=1 + k, from_bus=1, to_bus=bus_id,
                          r=0.001, x=0.01, b=0.0, rating_mva=10 * max(load_mw)))
        imp = 1.0 if importance is None else float(importance[k])
        loads.append(Load(id=k, bus=bus_id, p_mw=float(p),
                          q_mvar=q_ratio * float(p), importance=imp))
    return Network(
        base_mva=100.0,
        buses=tuple(buses),
        lines=tuple(lines),
        generators=(),
        loads=tuple(loads),
        shunts=(),
    )


def shed_instance(seed, n_loads=None, headroom=0.6):
    """A seeded star network where roughly 1 - headroom of the load must
    go; returns the network (all loads importance 1)."""
    rng = np.random.default_rng(seed)
    n = n_loads if n_loads is not None else int(rng.integers(8, 13))
    load_mw = rng.integers(10, 41, size=n).astype(float)
    apparent = float(np.hypot(load_mw.sum(), 0.3 * load_mw.sum()))
    return star_net(load_mw, trunk_rating=round(headroom * apparent, 1))


def random_small_net(rng) -> Network:
    """Random tree-plus-chords network with up to 10 buses, modest loads.

    Built for convergence: short lines, small transfers.
    """
    n = int(rng.integers(3, 11))
    buses = [Bus(id=0, kind="slack", base_kv=100.0, v_setpoint=1.0)]
    lines = []
    for b in range(1, n):
        buses.append(Bus(id=b, kind="pq", base_kv=100.0, v_min=0.8, v_max=1.2))
        parent = int(rng.integers(0, b))
        lines.append(Line(id=len(lines), from_bus=parent, to_bus=b,
                          r=float(rng.uniform(0.001, 0.01)),
                          x=float(rng.uniform(0.01, 0.06)),
                          b=float(rng.uniform(0.0, 0.04))))
    for _ in range(int(rng.integers(0, 3))):
        a, c = rng.integers(0, n, size=2)
        if a != c:
            lines.append(Line(id=len(lines), from_bus=int(a), to_bus=int(c),
                              r=0.005, x=0.03, b=0.0))
    loads = []
    for b in range(1, n):
        if rng.random() < 0.8:
            loads.append(Load(id=len(loads), bus=b,
                              p_mw=float(rng.uniform(2.0, 25.0)),
                              q_mvar=float(rng.uniform(0.0, 8.0))))
    gens = []
    if n > 4 and rng.random() < 0.5:
        gens.append(Generator(id=0, bus=n - 1, p_mw=float(rng.uniform(5, 20)),
                              q_min_mvar=-30.0, q_max_mvar=30.0))
    shunts = []
    if rng.random() < 0.3:
        shunts.append(Shunt(bus=int(rng.integers(1, n)), g_mw=0.0,
                            b_mvar=float(rng.uniform(-5, 10))))
    return Network(base_mva=100.0, buses=tuple(buses), lines=tuple(lines),
                   generators=tuple(gens), loads=tuple(loads),
                   shunts=tuple(shunts))


@pytest.fixture()
def two_bus():
    return two_bus_net()


@pytest.fixture()
def three_bus():
    return three_bus_net()


@pytest.fixture(scope="session")
def rts():
    from gridshed.cli import load_case

    return load_case("rts-gmlc")
