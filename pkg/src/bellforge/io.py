"""JSON / CSV formats for inequalities, states and reports."""

from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path
from typing import Iterable

import numpy as np

from .inequalities import BellCoefficients
from .lhv import LHVResult
from .quantum import QuantumState, StateError, make_state

__all__ = [
    "inequality_to_dict",
    "inequality_from_dict",
    "state_to_dict",
    "state_from_dict",
    "write_json",
    "read_json",
    "scan_csv",
]


def _number(x):
    if x is None:
        return None
    if isinstance(x, (int, np.integer)):
        return int(x)
    x = float(x)
    return int(x) if x.is_integer() and abs(x) < 2**53 else x


def inequality_to_dict(ineq: BellCoefficients, lhv: LHVResult | None = None) -> dict:
    out = {
        "parties": ineq.parties,
        "settings": list(ineq.settings),
        "coefficients": ineq.coefficients.tolist(),
        "lhv_bound": _number(ineq.lhv_bound),
        "descriptor": dict(ineq.descriptor),
    }
    if ineq.labels != tuple(tuple(range(1, m + 1)) for m in ineq.settings):
        out["labels"] = [list(p) for p in ineq.labels]
    if lhv is not None:
        out["lhv_bound"] = _number(lhv.bound)
        out["witness"] = lhv.witness.to_dict()
    return out


def inequality_from_dict(data: dict) -> BellCoefficients:
    coeffs = np.array(data["coefficients"])
    settings = tuple(int(m) for m in data["settings"])
    if coeffs.shape != settings or int(data["parties"]) != len(settings):
        raise ValueError(f"coefficients shape {coeffs.shape} does not match settings {settings}")
    return BellCoefficients(
        coeffs,
        lhv_bound=data.get("lhv_bound"),
        descriptor=data.get("descriptor") or {},
        labels=data.get("labels"),
    )


def state_to_dict(state: QuantumState) -> dict:
    raw = state.vector if state.vector is not None else state.matrix.reshape(-1)
    return {
        "parties": state.parties,
        "kind": state.kind,
        "data": [[float(z.real), float(z.imag)] for z in raw],
    }


def state_from_dict(data: dict) -> QuantumState:
    """Explicit ``{"kind", "data"}`` or named ``{"name": ..., params}``."""
    if "name" in data:
        params = {k: v for k, v in data.items() if k != "name"}
        return make_state(data["name"], **params)
    n = int(data["parties"])
    values = np.array([complex(re, im) for re, im in data["data"]])
    if data["kind"] == "pure":
        return QuantumState(n, vector=values)
    if data["kind"] == "mixed":
        dim = 1 << n
        return QuantumState(n, matrix=values.reshape(dim, dim))
    raise StateError(f"unknown state kind {data['kind']!r}")


def _default(obj):
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def write_json(path: str | Path, data: dict) -> None:
    Path(path).write_text(json.dumps(data, indent=2, default=_default) + "\n", encoding="utf-8")


def read_json(path: str | Path) -> dict:
    return json.loads(Path(path).read_text(encoding="utf-8"))


def _sig(x: float) -> str:
    if math.isinf(x) or math.isnan(x):
        return str(x)
    return f"{x:.12g}"


def scan_csv(rows: Iterable[tuple[float, float, float]]) -> str:
    """CSV with columns alpha, factor, critical_noise (12 significant digits)."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["alpha", "factor", "critical_noise"])
    for alpha, factor, noise in rows:
        writer.writerow([_sig(alpha), _sig(factor), _sig(noise)])
    return buf.getvalue()
