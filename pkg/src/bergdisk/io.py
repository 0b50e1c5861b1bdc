"""File formats: point-set files, target values, analytic models.

A point-set file is a JSON array.  Each entry is either a bare pair
[re, im] or an object {"point": [re, im], "multiplicity": k}.  Target files
add a "value" per entry; analytic models add an "expcoeffs" array of [re, im]
pairs.  Non-finite numbers are rejected at parse time, as are points within
1e-12 of the unit circle.
"""

from __future__ import annotations

import json
import math

import numpy as np

from .extremal import AnalyticModel
from .geometry import PointSet
from .interpolation import TargetValues


def _reject_nonfinite(name):
    raise ValueError(f"non-finite number in point-set file: {name}")


def _as_complex(pair) -> complex:
    if isinstance(pair, (int, float)):
        pair = [pair, 0.0]
    if not (isinstance(pair, list) and len(pair) == 2):
        raise ValueError("expected a [re, im] pair")
    re, im = float(pair[0]), float(pair[1])
    if not (math.isfinite(re) and math.isfinite(im)):
        raise ValueError("non-finite coordinate")
    return complex(re, im)


def _load_entries(path):
    with open(path) as fh:
        return json.load(fh, parse_constant=_reject_nonfinite)


def load_pointset(path) -> PointSet:
    entries = _load_entries(path)
    pts, mult = [], []
    for e in entries:
        if isinstance(e, dict):
            pts.append(_as_complex(e["point"]))
            mult.append(int(e.get("multiplicity", 1)))
        else:
            pts.append(_as_complex(e))
            mult.append(1)
    return PointSet(pts, mult)


def save_pointset(Z: PointSet, path) -> None:
    entries = []
    for z, m in zip(Z.points, Z.multiplicities):
        if m == 1:
            entries.append([z.real, z.imag])
        else:
            entries.append({"point": [z.real, z.imag], "multiplicity": int(m)})
    with open(path, "w") as fh:
        json.dump(entries, fh, indent=1)
        fh.write("\n")


def load_targets(path) -> TargetValues:
    entries = _load_entries(path)
    pts, vals = [], []
    for e in entries:
        if not isinstance(e, dict) or "value" not in e:
            raise ValueError("target file entries need 'point' and 'value'")
        pts.append(_as_complex(e["point"]))
        vals.append(_as_complex(e["value"]))
    return TargetValues(pts, vals)


def save_targets(c: TargetValues, path) -> None:
    entries = [
        {"point": [z.real, z.imag], "value": [v.real, v.imag]}
        for z, v in zip(c.Z.points, c.values)
    ]
    with open(path, "w") as fh:
        json.dump(entries, fh, indent=1)
        fh.write("\n")


def load_analytic_model(path) -> AnalyticModel:
    data = _load_entries(path)
    zeros = PointSet([_as_complex(p) for p in data.get("zeros", [])])
    coeffs = np.asarray([_as_complex(p) for p in data["expcoeffs"]], dtype=complex)
    return AnalyticModel(zeros, coeffs)


def save_analytic_model(model: AnalyticModel, path) -> None:
    data = {
        "zeros": [[z.real, z.imag] for z in model.zeros.points],
        "expcoeffs": [[c.real, c.imag] for c in model.expcoeffs],
    }
    with open(path, "w") as fh:
        json.dump(data, fh, indent=1)
        fh.write("\n")
