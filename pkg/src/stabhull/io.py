"""Instance and result files (JSON, schema "stabhull/1")."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .geom_core import ConvexObject, ConvexPolygon, intersects

SCHEMA = "stabhull/1"

_OBJECT_FIELDS = {
    "point": ("p",),
    "segment": ("a", "b"),
    "ray": ("origin", "direction"),
    "line": ("point", "direction"),
    "polygon": ("vertices",),
}
_TOP_FIELDS = {"schema", "objects", "config", "tour"}
_CONFIG_FIELDS = {"tol", "seed", "eps"}
_TOUR_FIELDS = {"start", "end", "start_dir"}


class ParseError(ValueError):
    def __init__(self, message: str, line: int = 0, column: int = 0):
        super().__init__(f"{message} (line {line}, column {column})" if line else message)
        self.message = message
        self.line = line
        self.column = column


@dataclass
class Instance:
    objects: list
    config: dict = field(default_factory=dict)
    tour: dict = field(default_factory=dict)


def _linecol(text: str, pos: int):
    line = text.count("\n", 0, pos) + 1
    col = pos - (text.rfind("\n", 0, pos) + 1) + 1
    return line, col


def _skip_ws(text, i):
    while i < len(text) and text[i] in " \t\r\n":
        i += 1
    return i


def _positions(text: str) -> dict:
    """Start offsets of top-level values and of each element of "objects"."""
    dec = json.JSONDecoder()
    pos = {}
    i = _skip_ws(text, 0)
    if i >= len(text) or text[i] != "{":
        return pos
    i = _skip_ws(text, i + 1)
    while i < len(text) and text[i] != "}":
        key, i = dec.raw_decode(text, i)
        i = _skip_ws(text, i)
        i = _skip_ws(text, i + 1)  # ':'
        pos[key] = i
        if key == "objects" and text[i] == "[":
            elems = []
            j = _skip_ws(text, i + 1)
            while j < len(text) and text[j] != "]":
                elems.append(j)
                _, j = dec.raw_decode(text, j)
                j = _skip_ws(text, j)
                if text[j] == ",":
                    j = _skip_ws(text, j + 1)
            pos["objects[]"] = elems
            i = j + 1
        else:
            _, i = dec.raw_decode(text, i)
        i = _skip_ws(text, i)
        if i < len(text) and text[i] == ",":
            i = _skip_ws(text, i + 1)
    return pos


def _reject_constant(name):
    raise ValueError(f"non-finite number {name}")


def _point(v, what):
    if (not isinstance(v, list) or len(v) != 2
            or not all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in v)):
        raise ValueError(f"{what} must be a pair of numbers")
    p = np.array(v, dtype=float)
    if not np.all(np.isfinite(p)):
        raise ValueError(f"{what} is not finite")
    return p


def _object(rec) -> ConvexObject:
    if not isinstance(rec, dict):
        raise ValueError("object record must be a JSON object")
    kind = rec.get("kind")
    if kind not in _OBJECT_FIELDS:
        raise ValueError(f"unknown kind {kind!r}")
    want = set(_OBJECT_FIELDS[kind]) | {"kind"}
    extra = set(rec) - want
    if extra:
        raise ValueError(f"unknown field(s) {sorted(extra)} for {kind}")
    missing = want - set(rec)
    if missing:
        raise ValueError(f"missing field(s) {sorted(missing)} for {kind}")
    if kind == "point":
        return ConvexObject.point(_point(rec["p"], "p"))
    if kind == "segment":
        a, b = _point(rec["a"], "a"), _point(rec["b"], "b")
        if np.array_equal(a, b):
            raise ValueError("degenerate segment (equal endpoints); use a point")
        return ConvexObject.segment(a, b)
    if kind in ("ray", "line"):
        base = _point(rec["origin" if kind == "ray" else "point"], "origin" if kind == "ray" else "point")
        d = _point(rec["direction"], "direction")
        if not np.any(d):
            raise ValueError("zero direction")
        return ConvexObject.ray(base, d) if kind == "ray" else ConvexObject.line(base, d)
    verts = rec["vertices"]
    if not isinstance(verts, list):
        raise ValueError("vertices must be a list")
    V = np.array([_point(v, "vertex") for v in verts]).reshape(-1, 2)
    return ConvexObject.polygon(V)


def parse_instance(text: str) -> Instance:
    """Validated Instance from JSON text; ParseError carries line and column."""
    try:
        data = json.loads(text, parse_constant=_reject_constant)
    except json.JSONDecodeError as e:
        raise ParseError(f"malformed JSON: {e.msg}", e.lineno, e.colno) from None
    except ValueError as e:
        raise ParseError(str(e), 1, 1) from None
    pos = _positions(text)

    def fail(msg, key=None, idx=None):
        p = 0
        if idx is not None and "objects[]" in pos and idx < len(pos["objects[]"]):
            p = pos["objects[]"][idx]
        elif key is not None and key in pos:
            p = pos[key]
        line, col = _linecol(text, p)
        raise ParseError(msg, line, col)

    if not isinstance(data, dict):
        fail("top level must be a JSON object")
    extra = set(data) - _TOP_FIELDS
    if extra:
        fail(f"unknown field(s) {sorted(extra)}", sorted(extra)[0])
    if "schema" in data and data["schema"] != SCHEMA:
        fail(f"unsupported schema {data['schema']!r}", "schema")
    objs = data.get("objects")
    if not isinstance(objs, list):
        fail("missing objects list", "objects")
    if not objs:
        fail("empty instance", "objects")
    out = []
    for i, rec in enumerate(objs):
        try:
            out.append(_object(rec))
        except ValueError as e:
            fail(f"object {i}: {e}", idx=i)
    config = data.get("config", {})
    if not isinstance(config, dict) or set(config) - _CONFIG_FIELDS:
        fail("config accepts only tol, seed, eps", "config")
    for k, v in config.items():
        if not isinstance(v, (int, float)) or isinstance(v, bool) or not math.isfinite(v):
            fail(f"config {k} must be a finite number", "config")
    if "seed" in config and int(config["seed"]) != config["seed"]:
        fail("config seed must be an integer", "config")
    tour = data.get("tour", {})
    if not isinstance(tour, dict) or set(tour) - _TOUR_FIELDS:
        fail("tour accepts only start, end, start_dir", "tour")
    tr = {}
    for k, v in tour.items():
        try:
            tr[k] = _point(v, k)
        except ValueError as e:
            fail(f"tour: {e}", "tour")
    return Instance(out, dict(config), tr)


def _pt(p):
    return [float(p[0]), float(p[1])]


def object_record(o: ConvexObject) -> dict:
    if o.kind == "point":
        return {"kind": "point", "p": _pt(o.pts[0])}
    if o.kind == "segment":
        return {"kind": "segment", "a": _pt(o.pts[0]), "b": _pt(o.pts[1])}
    if o.kind == "ray":
        return {"kind": "ray", "origin": _pt(o.pts[0]), "direction": _pt(o.direction)}
    if o.kind == "line":
        return {"kind": "line", "point": _pt(o.pts[0]), "direction": _pt(o.direction)}
    return {"kind": "polygon", "vertices": [_pt(v) for v in o.pts]}


def emit_instance(inst: Instance) -> str:
    data = {"schema": SCHEMA, "objects": [object_record(o) for o in inst.objects]}
    if inst.config:
        data["config"] = dict(inst.config)
    if inst.tour:
        data["tour"] = {k: _pt(v) for k, v in inst.tour.items()}
    return json.dumps(data, sort_keys=True, indent=2) + "\n"


# ----------------------------------------------------------------------
# results


def _plain(x):
    """JSON-safe copy: numpy scalars/arrays to Python, non-finite floats to strings."""
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    if isinstance(x, np.ndarray):
        return _plain(x.tolist())
    if isinstance(x, (np.bool_, bool)):
        return bool(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isfinite(x):
            return x
        return "inf" if x > 0 else ("-inf" if x < 0 else "nan")
    return x


@dataclass
class Result:
    status: str
    objective: str
    value: float
    polygon: Optional[np.ndarray]
    witnesses: dict
    method: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return _plain({
            "schema": SCHEMA,
            "status": self.status,
            "objective": self.objective,
            "value": self.value,
            "polygon": [] if self.polygon is None else np.asarray(self.polygon).reshape(-1, 2),
            "witnesses": {str(k): v for k, v in sorted(self.witnesses.items())},
            "method": self.method,
        })


def verify_result(res: Result, inst: Instance, tol: float = 1e-7) -> bool:
    """Check every witness lies on its object and (for polygons) in the polygon."""
    if res.status != "ok":
        return True
    pts = [o.pts for o in inst.objects]
    V = np.vstack([p for p in pts])
    scale = max(1.0, float(np.abs(V).max()))
    t = tol * scale
    pseudo = bool(res.method.get("pseudo"))
    for k, w in res.witnesses.items():
        o = inst.objects[int(k)]
        w = np.asarray(w, dtype=float)
        if pseudo and o.kind in ("ray", "segment"):
            a, d = o.supporting_line()
            o = ConvexObject.line(a, d)
        if o.distance(w) > t:
            return False
        if res.objective in ("perimeter", "area"):
            poly = ConvexPolygon(np.asarray(res.polygon, dtype=float))
            if not poly.contains(w, t) or not intersects(o, poly, t):
                return False
    if res.objective in ("perimeter", "area") and len(res.witnesses) != len(inst.objects):
        return False
    return True


def dump_result(res: Result) -> str:
    return json.dumps(res.to_dict(), sort_keys=True, indent=2) + "\n"


def load_result(text: str, inst: Optional[Instance] = None) -> Result:
    """Read a result file; with an instance, its witnesses are re-checked."""
    d = json.loads(text)
    if d.get("schema") != SCHEMA:
        raise ValueError("not a stabhull/1 result")
    val = float(d["value"])
    poly = np.array(d["polygon"], dtype=float).reshape(-1, 2) if d["polygon"] else None
    res = Result(d["status"], d["objective"], val, poly,
                 {int(k): np.array(v, dtype=float) for k, v in d["witnesses"].items()}, d["method"])
    if inst is not None and not verify_result(res, inst):
        raise ValueError("result witnesses do not verify against the instance")
    return res
