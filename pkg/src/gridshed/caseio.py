"""Case document (de)serialization.

The case format is a strict JSON document; unknown keys are rejected so
typos fail loudly rather than silently changing the study.  Loads are
re-indexed densely 0..n-1 in document order on parse, which fixes the
chromosome gene order for the optimizer.
"""

from __future__ import annotations

import json
import math
from typing import Any, Mapping

from .model import (
    Bus,
    CaseError,
    Generator,
    Line,
    Load,
    Network,
    SchemaError,
    Shunt,
)

_TOP_KEYS = {"base_mva", "buses", "lines", "generators", "loads", "shunts", "meta"}

_BUS_KEYS = {"id", "kind", "base_kv", "v_setpoint", "v_min", "v_max"}
_LINE_KEYS = {"id", "from", "to", "r", "x", "b", "rating_mva", "in_service"}
_GEN_KEYS = {"id", "bus", "p_mw", "v_setpoint", "q_min", "q_max", "in_service"}
_LOAD_KEYS = {"id", "bus", "p_mw", "q_mvar", "importance"}
_SHUNT_KEYS = {"bus", "g_mw", "b_mvar"}


def _require(obj: Mapping, key: str, path: str) -> Any:
    if key not in obj:
        raise SchemaError(path, f"missing required key {key!r}")
    return obj[key]


def _number(value: Any, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise SchemaError(path, f"expected a number, got {type(value).__name__}")
    if not math.isfinite(value):
        raise SchemaError(path, "expected a finite number")
    return float(value)


def _integer(value: Any, path: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise SchemaError(path, f"expected an integer, got {type(value).__name__}")
    return value


def _boolean(value: Any, path: str) -> bool:
    if not isinstance(value, bool):
        raise SchemaError(path, f"expected a boolean, got {type(value).__name__}")
    return value


def _string(value: Any, path: str) -> str:
    if not isinstance(value, str):
        raise SchemaError(path, f"expected a string, got {type(value).__name__}")
    return value


def _object(value: Any, path: str, allowed: set[str]) -> Mapping:
    if not isinstance(value, Mapping):
        raise SchemaError(path, f"expected an object, got {type(value).__name__}")
    unknown = set(value) - allowed
    if unknown:
        raise SchemaError(f"{path}.{sorted(unknown)[0]}", "unknown key")
    return value


def _array(value: Any, path: str) -> list:
    if not isinstance(value, list):
        raise SchemaError(path, f"expected an array, got {type(value).__name__}")
    return value


def parse_case(text: str | bytes) -> Network:
    """Parse a JSON case document into a validated :class:`Network`.

    Raises :class:`SchemaError` with a field path for malformed input and
    :class:`CaseError` for semantic violations (duplicate ids, dangling
    bus references, missing slack, no in-service path from the slack to a
    nonzero load).
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError("", f"invalid JSON: {exc}") from exc
    if not isinstance(doc, Mapping):
        raise SchemaError("", "top level must be an object")
    unknown = set(doc) - _TOP_KEYS
    if unknown:
        raise SchemaError(sorted(unknown)[0], "unknown key")

    base_mva = _number(_require(doc, "base_mva", "base_mva"), "base_mva")

    buses = []
    for i, raw in enumerate(_array(_require(doc, "buses", "buses"), "buses")):
        path = f"buses[{i}]"
        obj = _object(raw, path, _BUS_KEYS)
        kw: dict[str, Any] = {
            "id": _integer(_require(obj, "id", f"{path}.id"), f"{path}.id"),
            "kind": _string(obj.get("kind", "pq"), f"{path}.kind"),
            "base_kv": _number(obj.get("base_kv", 1.0), f"{path}.base_kv"),
        }
        if obj.get("v_setpoint") is not None:
            kw["v_setpoint"] = _number(obj["v_setpoint"], f"{path}.v_setpoint")
        if "v_min" in obj:
            kw["v_min"] = _number(obj["v_min"], f"{path}.v_min")
        if "v_max" in obj:
            kw["v_max"] = _number(obj["v_max"], f"{path}.v_max")
        buses.append(_build(Bus, kw, path))

    lines = []
    for i, raw in enumerate(_array(doc.get("lines", []), "lines")):
        path = f"lines[{i}]"
        obj = _object(raw, path, _LINE_KEYS)
        kw = {
            "id": _integer(_require(obj, "id", f"{path}.id"), f"{path}.id"),
            "from_bus": _integer(_require(obj, "from", f"{path}.from"), f"{path}.from"),
            "to_bus": _integer(_require(obj, "to", f"{path}.to"), f"{path}.to"),
            "r": _number(_require(obj, "r", f"{path}.r"), f"{path}.r"),
            "x": _number(_require(obj, "x", f"{path}.x"), f"{path}.x"),
            "b": _number(obj.get("b", 0.0), f"{path}.b"),
        }
        if "rating_mva" in obj:
            kw["rating_mva"] = _number(obj["rating_mva"], f"{path}.rating_mva")
        if "in_service" in obj:
            kw["in_service"] = _boolean(obj["in_service"], f"{path}.in_service")
        lines.append(_build(Line, kw, path))

    generators = []
    for i, raw in enumerate(_array(doc.get("generators", []), "generators")):
        path = f"generators[{i}]"
        obj = _object(raw, path, _GEN_KEYS)
        kw = {
            "id": _integer(_require(obj, "id", f"{path}.id"), f"{path}.id"),
            "bus": _integer(_require(obj, "bus", f"{path}.bus"), f"{path}.bus"),
            "p_mw": _number(_require(obj, "p_mw", f"{path}.p_mw"), f"{path}.p_mw"),
        }
        if "v_setpoint" in obj:
            kw["v_setpoint"] = _number(obj["v_setpoint"], f"{path}.v_setpoint")
        if "q_min" in obj:
            kw["q_min_mvar"] = _number(obj["q_min"], f"{path}.q_min")
        if "q_max" in obj:
            kw["q_max_mvar"] = _number(obj["q_max"], f"{path}.q_max")
        if "in_service" in obj:
            kw["in_service"] = _boolean(obj["in_service"], f"{path}.in_service")
        generators.append(_build(Generator, kw, path))

    loads = []
    raw_loads = _array(doc.get("loads", []), "loads")
    seen_load_ids: set[int] = set()
    for i, raw in enumerate(raw_loads):
        path = f"loads[{i}]"
        obj = _object(raw, path, _LOAD_KEYS)
        declared = _integer(_require(obj, "id", f"{path}.id"), f"{path}.id")
        if declared in seen_load_ids:
            raise CaseError(f"duplicate load id {declared}")
        seen_load_ids.add(declared)
        kw = {
            # loads are re-indexed densely in document order
            "id": i,
            "bus": _integer(_require(obj, "bus", f"{path}.bus"), f"{path}.bus"),
            "p_mw": _number(_require(obj, "p_mw", f"{path}.p_mw"), f"{path}.p_mw"),
            "q_mvar": _number(obj.get("q_mvar", 0.0), f"{path}.q_mvar"),
        }
        if "importance" in obj:
            kw["importance"] = _number(obj["importance"], f"{path}.importance")
        loads.append(_build(Load, kw, path))

    shunts = []
    for i, raw in enumerate(_array(doc.get("shunts", []), "shunts")):
        path = f"shunts[{i}]"
        obj = _object(raw, path, _SHUNT_KEYS)
        shunts.append(
            Shunt(
                bus=_integer(_require(obj, "bus", f"{path}.bus"), f"{path}.bus"),
                g_mw=_number(obj.get("g_mw", 0.0), f"{path}.g_mw"),
                b_mvar=_number(obj.get("b_mvar", 0.0), f"{path}.b_mvar"),
            )
        )

    meta = doc.get("meta")
    if meta is not None and not isinstance(meta, Mapping):
        raise SchemaError("meta", "expected an object")

    net = Network(
        base_mva=base_mva,
        buses=tuple(buses),
        lines=tuple(lines),
        generators=tuple(generators),
        loads=tuple(loads),
        shunts=tuple(shunts),
        meta=meta,
    )
    _check_connectivity(net)
    return net


def _build(cls, kw: dict, path: str):
    try:
        return cls(**kw)
    except CaseError as exc:
        raise SchemaError(path, str(exc)) from exc


def _check_connectivity(net: Network) -> None:
    """Nonzero loads must be reachable from the slack at parse time."""
    live = net.energized_buses()
    for ld in net.loads:
        if (ld.p_mw != 0 or ld.q_mvar != 0) and ld.bus not in live:
            raise CaseError(
                f"load {ld.id} at bus {ld.bus} has no in-service path to the slack"
            )


def serialize_case(net: Network, *, indent: int | None = None) -> str:
    """Serialize a network back to the case document format.

    The output parses back to an equal network (canonical field order,
    repr-exact floats).
    """
    for ln in net.lines:
        if not math.isfinite(ln.rating_mva):
            raise CaseError(
                f"line {ln.id}: non-finite rating cannot be serialized"
            )
    doc: dict[str, Any] = {"base_mva": net.base_mva}
    doc["buses"] = [_bus_doc(b) for b in net.buses]
    doc["lines"] = [_line_doc(l) for l in net.lines]
    doc["generators"] = [_gen_doc(g) for g in net.generators]
    doc["loads"] = [_load_doc(l) for l in net.loads]
    doc["shunts"] = [
        {"bus": s.bus, "g_mw": s.g_mw, "b_mvar": s.b_mvar} for s in net.shunts
    ]
    if net.meta is not None:
        doc["meta"] = net.meta
    return json.dumps(doc, indent=indent, allow_nan=False)


def _bus_doc(b: Bus) -> dict:
    out: dict[str, Any] = {"id": b.id, "kind": b.kind, "base_kv": b.base_kv}
    if b.v_setpoint is not None:
        out["v_setpoint"] = b.v_setpoint
    out["v_min"] = b.v_min
    out["v_max"] = b.v_max
    return out


def _line_doc(l: Line) -> dict:
    return {
        "id": l.id,
        "from": l.from_bus,
        "to": l.to_bus,
        "r": l.r,
        "x": l.x,
        "b": l.b,
        "rating_mva": l.rating_mva,
        "in_service": l.in_service,
    }


def _gen_doc(g: Generator) -> dict:
    out: dict[str, Any] = {
        "id": g.id,
        "bus": g.bus,
        "p_mw": g.p_mw,
        "v_setpoint": g.v_setpoint,
    }
    if math.isfinite(g.q_min_mvar):
        out["q_min"] = g.q_min_mvar
    if math.isfinite(g.q_max_mvar):
        out["q_max"] = g.q_max_mvar
    out["in_service"] = g.in_service
    return out


def _load_doc(l: Load) -> dict:
    return {
        "id": l.id,
        "bus": l.bus,
        "p_mw": l.p_mw,
        "q_mvar": l.q_mvar,
        "importance": l.importance,
    }
