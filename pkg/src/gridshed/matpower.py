"""Reader for MATPOWER-style case files (.m text format).

Only the subset needed for static AC studies is mapped: bus, gen and
branch tables plus baseMVA.  Off-nominal transformer taps and phase
shifters are out of scope and rejected explicitly rather than silently
approximated.
"""

from __future__ import annotations

import math
import re

from .caseio import _check_connectivity
from .model import Bus, CaseError, Generator, Line, Load, Network, Shunt

# MATPOWER bus table columns
_BUS_I, _BUS_TYPE, _PD, _QD, _GS, _BS = 0, 1, 2, 3, 4, 5
_BASE_KV, _VMAX, _VMIN = 9, 11, 12
# gen table columns
_GBUS, _PG, _QG, _QMAX, _QMIN, _VG, _GSTATUS = 0, 1, 2, 3, 4, 5, 7
# branch table columns
_F, _T, _BR_R, _BR_X, _BR_B, _RATE_A, _TAP, _SHIFT, _BR_STATUS = (
    0, 1, 2, 3, 4, 5, 8, 9, 10,
)

_KIND_BY_TYPE = {1: "pq", 2: "pv", 3: "slack"}


def _strip_comments(text: str) -> str:
    return re.sub(r"%.*", "", text)


def _extract_scalar(text: str, name: str) -> float:
    m = re.search(rf"mpc\.{name}\s*=\s*([0-9eE+.\-]+)\s*;", text)
    if m is None:
        raise CaseError(f"missing mpc.{name}")
    return float(m.group(1))


def _extract_matrix(text: str, name: str) -> list[list[float]]:
    m = re.search(rf"mpc\.{name}\s*=\s*\[(.*?)\];", text, re.DOTALL)
    if m is None:
        raise CaseError(f"missing mpc.{name}")
    rows = []
    for chunk in m.group(1).replace("\n", ";").split(";"):
        chunk = chunk.strip()
        if not chunk:
            continue
        try:
            rows.append([float(tok) for tok in chunk.split()])
        except ValueError as exc:
            raise CaseError(f"mpc.{name}: bad row {chunk!r}") from exc
    return rows


def parse_matpower(text: str) -> Network:
    """Parse MATPOWER case text into a :class:`Network`.

    Loads are synthesized from nonzero PD/QD in bus-table order, shunts
    from nonzero GS/BS.  RATE_A = 0 (unlimited in MATPOWER) maps to an
    infinite rating.
    """
    text = _strip_comments(text)
    base_mva = _extract_scalar(text, "baseMVA")
    bus_rows = _extract_matrix(text, "bus")
    gen_rows = _extract_matrix(text, "gen")
    branch_rows = _extract_matrix(text, "branch")

    buses: list[Bus] = []
    loads: list[Load] = []
    shunts: list[Shunt] = []
    for row in bus_rows:
        if len(row) < 13:
            raise CaseError(f"bus row too short: {row}")
        bus_id = int(row[_BUS_I])
        code = int(row[_BUS_TYPE])
        if code not in _KIND_BY_TYPE:
            raise CaseError(f"bus {bus_id}: unsupported bus type code {code}")
        buses.append(
            Bus(
                id=bus_id,
                kind=_KIND_BY_TYPE[code],
                base_kv=row[_BASE_KV],
                v_min=row[_VMIN],
                v_max=row[_VMAX],
            )
        )
        if row[_PD] != 0 or row[_QD] != 0:
            loads.append(
                Load(id=len(loads), bus=bus_id, p_mw=row[_PD], q_mvar=row[_QD])
            )
        if row[_GS] != 0 or row[_BS] != 0:
            shunts.append(Shunt(bus=bus_id, g_mw=row[_GS], b_mvar=row[_BS]))

    generators: list[Generator] = []
    for i, row in enumerate(gen_rows):
        if len(row) < 8:
            raise CaseError(f"gen row too short: {row}")
        generators.append(
            Generator(
                id=i,
                bus=int(row[_GBUS]),
                p_mw=row[_PG],
                v_setpoint=row[_VG],
                q_min_mvar=row[_QMIN],
                q_max_mvar=row[_QMAX],
                in_service=row[_GSTATUS] > 0,
            )
        )

    lines: list[Line] = []
    for i, row in enumerate(branch_rows):
        if len(row) < 11:
            raise CaseError(f"branch row too short: {row}")
        tap, shift = row[_TAP], row[_SHIFT]
        if tap not in (0.0, 1.0):
            raise CaseError(
                f"branch {i}: off-nominal tap ratio {tap} is unsupported"
            )
        if shift != 0.0:
            raise CaseError(f"branch {i}: phase shift {shift} is unsupported")
        rate = row[_RATE_A]
        lines.append(
            Line(
                id=i,
                from_bus=int(row[_F]),
                to_bus=int(row[_T]),
                r=row[_BR_R],
                x=row[_BR_X],
                b=row[_BR_B],
                rating_mva=rate if rate > 0 else math.inf,
                in_service=row[_BR_STATUS] > 0,
            )
        )

    net = Network(
        base_mva=base_mva,
        buses=tuple(buses),
        lines=tuple(lines),
        generators=tuple(generators),
        loads=tuple(loads),
        shunts=tuple(shunts),
    )
    _check_connectivity(net)
    return net
