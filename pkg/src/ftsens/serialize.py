"""JSON/CSV rendering shared by the reports."""

from __future__ import annotations

import csv
import io
import json
import math
from fractions import Fraction

import numpy as np

from .geometry import Dyadic, HilbertPoint, TorusPoint
from .systems import Bounded, CircleCoord


def jsonable(v):
    """Exact values become reduced-fraction strings; floats stay floats."""
    if isinstance(v, (Dyadic, Fraction)):
        return str(v)
    if isinstance(v, bool) or v is None or isinstance(v, (int, str)):
        return v
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if math.isfinite(v) else str(v)
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, Bounded):
        return {"lower": float(v.lower), "upper": float(v.upper)}
    if isinstance(v, HilbertPoint):
        return {"support": {str(i): str(c) for i, c in sorted(v.support.items())},
                "fill": str(v.fill)}
    if isinstance(v, CircleCoord):
        return {"offset": jsonable(v.offset), "turns": v.turns}
    if isinstance(v, np.ndarray):
        return [jsonable(a) for a in v.tolist()]
    if isinstance(v, dict):
        return {str(k): jsonable(a) for k, a in v.items()}
    if isinstance(v, (list, tuple, TorusPoint)):
        return [jsonable(a) for a in v]
    if hasattr(v, "to_dict"):
        return v.to_dict()
    return repr(v)


def dumps(obj) -> str:
    return json.dumps(jsonable(obj), sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def provenance(v, seed=None) -> str:
    if isinstance(v, Bounded):
        return f"bounded({v.upper - v.lower:.3g})"
    if isinstance(v, (Dyadic, Fraction, int)):
        return "exact"
    return f"sampled({seed})"


def cell(v) -> str:
    if isinstance(v, Bounded):
        return repr(float(v.lower))
    if isinstance(v, float):
        return repr(v)
    return str(jsonable(v)) if not isinstance(v, (dict, list)) else json.dumps(jsonable(v), sort_keys=True)


def csv_text(header: list[str], rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(header)
    for row in rows:
        w.writerow([cell(v) for v in row])
    return buf.getvalue()
