"""Network data model for load-shedding studies.

A :class:`Network` is an immutable snapshot of a transmission grid: buses,
branches ("lines"; transformers are represented as ratio-1 branches),
generators with fixed active dispatch, constant-power loads carrying an
importance weight, and fixed bus shunts.  All per-unit quantities use the
network-wide ``base_mva``.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping


class CaseError(ValueError):
    """A case document or network violates the data contract."""


class SchemaError(CaseError):
    """A case document field is missing, has the wrong type, or is unknown.

    ``path`` locates the offending field, e.g. ``lines[3].rating_mva``.
    """

    def __init__(self, path: str, message: str):
        self.path = path
        self.message = message
        super().__init__(f"{path}: {message}" if path else message)


BUS_KINDS = ("slack", "pv", "pq")


@dataclass(frozen=True)
class Bus:
    id: int
    kind: str = "pq"
    base_kv: float = 1.0
    v_setpoint: float | None = None
    v_min: float = 0.95
    v_max: float = 1.05

    def __post_init__(self):
        if self.kind not in BUS_KINDS:
            raise CaseError(f"bus {self.id}: unknown kind {self.kind!r}")
        if not self.base_kv > 0:
            raise CaseError(f"bus {self.id}: base_kv must be positive")
        if not self.v_min < self.v_max:
            raise CaseError(f"bus {self.id}: v_min must be below v_max")


@dataclass(frozen=True)
class Line:
    """A branch between two buses (pi model, per unit on system base)."""

    id: int
    from_bus: int
    to_bus: int
    r: float
    x: float
    b: float = 0.0
    rating_mva: float = float("inf")
    in_service: bool = True

    def __post_init__(self):
        if self.from_bus == self.to_bus:
            raise CaseError(f"line {self.id}: from and to bus are identical")
        if self.r == 0.0 and self.x == 0.0:
            raise CaseError(f"line {self.id}: zero-impedance branch")
        if not self.rating_mva > 0:
            raise CaseError(f"line {self.id}: rating_mva must be positive")


@dataclass(frozen=True)
class Generator:
    """A dispatched machine: fixed P, voltage setpoint, reactive limits."""

    id: int
    bus: int
    p_mw: float
    v_setpoint: float = 1.0
    q_min_mvar: float = float("-inf")
    q_max_mvar: float = float("inf")
    in_service: bool = True

    def __post_init__(self):
        if self.q_min_mvar > self.q_max_mvar:
            raise CaseError(f"generator {self.id}: q_min above q_max")


@dataclass(frozen=True)
class Load:
    """A constant-power demand with a shedding-importance weight in [0, 1]."""

    id: int
    bus: int
    p_mw: float
    q_mvar: float = 0.0
    importance: float = 1.0

    def __post_init__(self):
        if self.p_mw < 0:
            raise CaseError(f"load {self.id}: p_mw must be non-negative")
        if not 0.0 <= self.importance <= 1.0:
            raise CaseError(f"load {self.id}: importance must lie in [0, 1]")


@dataclass(frozen=True)
class Shunt:
    """Fixed shunt admittance given as MW / MVAr consumed at V = 1 pu."""

    bus: int
    g_mw: float = 0.0
    b_mvar: float = 0.0


@dataclass(frozen=True)
class Network:
    """Immutable grid snapshot.  Collections keep document order;
    loads are always indexed densely 0..n_loads-1 in that order."""

    base_mva: float
    buses: tuple[Bus, ...]
    lines: tuple[Line, ...] = ()
    generators: tuple[Generator, ...] = ()
    loads: tuple[Load, ...] = ()
    shunts: tuple[Shunt, ...] = ()
    meta: Mapping | None = None

    def __post_init__(self):
        if not self.base_mva > 0:
            raise CaseError("base_mva must be positive")
        if not self.buses:
            raise CaseError("network has no buses")
        _reject_duplicates("bus", (b.id for b in self.buses))
        _reject_duplicates("line", (l.id for l in self.lines))
        _reject_duplicates("generator", (g.id for g in self.generators))
        _reject_duplicates("load", (l.id for l in self.loads))
        bus_ids = {b.id for b in self.buses}
        for ln in self.lines:
            for end in (ln.from_bus, ln.to_bus):
                if end not in bus_ids:
                    raise CaseError(f"line {ln.id}: unknown bus {end}")
        for g in self.generators:
            if g.bus not in bus_ids:
                raise CaseError(f"generator {g.id}: unknown bus {g.bus}")
        for ld in self.loads:
            if ld.bus not in bus_ids:
                raise CaseError(f"load {ld.id}: unknown bus {ld.bus}")
        for i, sh in enumerate(self.shunts):
            if sh.bus not in bus_ids:
                raise CaseError(f"shunt {i}: unknown bus {sh.bus}")
        if sum(1 for b in self.buses if b.kind == "slack") != 1:
            raise CaseError("network must have exactly one slack bus")
        expected = tuple(range(len(self.loads)))
        if tuple(l.id for l in self.loads) != expected:
            raise CaseError("load ids must be dense 0..n-1 in document order")

    # -- lookups -------------------------------------------------------

    @cached_property
    def bus_index(self) -> dict[int, int]:
        """Bus id -> position in ``buses``."""
        return {b.id: i for i, b in enumerate(self.buses)}

    @cached_property
    def line_index(self) -> dict[int, int]:
        return {l.id: i for i, l in enumerate(self.lines)}

    @property
    def n_loads(self) -> int:
        return len(self.loads)

    @cached_property
    def slack_bus(self) -> int:
        return next(b.id for b in self.buses if b.kind == "slack")

    @cached_property
    def adjacency(self) -> dict[int, tuple[int, ...]]:
        """Bus id -> neighbour bus ids over in-service lines."""
        nbrs: dict[int, list[int]] = {b.id: [] for b in self.buses}
        for ln in self.lines:
            if ln.in_service:
                nbrs[ln.from_bus].append(ln.to_bus)
                nbrs[ln.to_bus].append(ln.from_bus)
        return {k: tuple(v) for k, v in nbrs.items()}

    def energized_buses(self) -> frozenset[int]:
        """Bus ids connected to the slack through in-service lines."""
        seen = {self.slack_bus}
        stack = [self.slack_bus]
        adj = self.adjacency
        while stack:
            for nb in adj[stack.pop()]:
                if nb not in seen:
                    seen.add(nb)
                    stack.append(nb)
        return frozenset(seen)


def _reject_duplicates(what: str, ids: Iterable[int]) -> None:
    seen: set[int] = set()
    for i in ids:
        if i in seen:
            raise CaseError(f"duplicate {what} id {i}")
        seen.add(i)


# -- operations ---------------------------------------------------------


def apply_outage(net: Network, line_ids: Iterable[int]) -> Network:
    """Return a copy of ``net`` with the given lines switched out.

    Lines already out of service stay out.  Unknown ids raise ValueError.
    """
    out = set(line_ids)
    unknown = out - set(net.line_index)
    if unknown:
        raise ValueError(f"unknown line id {sorted(unknown)[0]}")
    if not out:
        return net
    lines = tuple(
        dataclasses.replace(ln, in_service=False) if ln.id in out else ln
        for ln in net.lines
    )
    return dataclasses.replace(net, lines=lines)


def scale_loads(net: Network, fractions) -> Network:
    """Scale every load by its fraction in [0, 1] (0 = fully shed).

    ``fractions`` is a sequence aligned with load ids: load i keeps
    ``fractions[i]`` of both its active and reactive demand.
    """
    fractions = list(fractions)
    if len(fractions) != net.n_loads:
        raise ValueError(
            f"expected {net.n_loads} fractions, got {len(fractions)}"
        )
    for i, f in enumerate(fractions):
        if not 0.0 <= f <= 1.0:
            raise ValueError(f"fraction for load {i} outside [0, 1]: {f}")
    loads = tuple(
        dataclasses.replace(
            ld,
            p_mw=float(fractions[ld.id]) * ld.p_mw,
            q_mvar=float(fractions[ld.id]) * ld.q_mvar,
        )
        for ld in net.loads
    )
    return dataclasses.replace(net, loads=loads)


def total_load(net: Network) -> tuple[float, float]:
    """Total (P in MW, Q in MVAr) over all loads, summed in id order."""
    p = sum(ld.p_mw for ld in net.loads)
    q = sum(ld.q_mvar for ld in net.loads)
    return float(p), float(q)
