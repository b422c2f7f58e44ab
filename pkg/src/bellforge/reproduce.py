"""Reference values and the checks that recompute them."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

from .inequalities import (
    BellCoefficients,
    FamilyDescriptor,
    build_composed_442,
    build_standard,
    from_terms,
    reduced_332_expansions,
    composed_442_expansions,
)
from .lhv import lhv_bound, verify_identity
from .optimize import OptimizationConfig, family_violation, optimize_quantum_value
from .quantum import make_state
from .signs import SignFunction

__all__ = [
    "TABLE_TERMS",
    "TABLE_BOUNDS",
    "TABLE_QUANTUM",
    "table_representative",
    "Check",
    "run_checks",
    "format_report",
]

TABLE_TERMS = {
    "2x2x2": {(1, 1, 1): -1, (3, 3, 1): -1, (1, 1, 2): 1, (3, 3, 2): -1},
    "3x3x2": {
        (1, 1, 1): -2, (3, 3, 1): -1, (4, 3, 1): -1, (3, 4, 1): -1, (4, 4, 1): 1,
        (1, 1, 2): 2, (3, 3, 2): -1, (4, 3, 2): -1, (3, 4, 2): -1, (4, 4, 2): 1,
    },
    "4x4x2": {
        (1, 1, 1): -1, (2, 1, 1): -1, (1, 2, 1): -1, (2, 2, 1): 1,
        (3, 3, 1): -1, (4, 3, 1): -1, (3, 4, 1): -1, (4, 4, 1): 1,
        (1, 1, 2): 1, (2, 1, 2): 1, (1, 2, 2): 1, (2, 2, 2): -1,
        (3, 3, 2): -1, (4, 3, 2): -1, (3, 4, 2): -1, (4, 4, 2): 1,
    },
}  # fmt: skip
TABLE_BOUNDS = {"2x2x2": 2, "3x3x2": 4, "4x4x2": 4}
TABLE_QUANTUM = {"2x2x2": 2 * math.sqrt(2), "3x3x2": 4 * math.sqrt(3), "4x4x2": 8.0}


def table_representative(name: str) -> BellCoefficients:
    """The representative inequality of one of the three 3-party families, without bound."""
    return from_terms(TABLE_TERMS[name], descriptor={"kind": "table", "name": name})


@dataclass(frozen=True)
class Check:
    name: str
    computed: float
    expected: float
    tolerance: float
    passed: bool
    relation: str = "=="


def _eq(name, computed, expected, tol) -> Check:
    return Check(name, float(computed), float(expected), tol, abs(computed - expected) <= tol)


def _le(name, computed, limit, tol) -> Check:
    return Check(name, float(computed), float(limit), tol, computed <= limit + tol, "<=")


def run_checks(
    seed: int = 0,
    restarts: int = 64,
    family_restarts: int = 16,
    quick: bool = False,
    progress: Callable[[Check], None] | None = None,
) -> list[Check]:
    checks: list[Check] = []

    def add(check: Check) -> None:
        checks.append(check)
        if progress is not None:
            progress(check)

    for name, bound in TABLE_BOUNDS.items():
        add(_eq(f"lhv bound, table {name}", lhv_bound(table_representative(name)).bound, bound, 0))
    add(_eq("lhv bound, 4x4x2 absolute-value expansions (max)", max(lhv_bound(m).bound for m in composed_442_expansions()), 4, 0))
    add(_eq("lhv bound, reduced 3x3x2 expansions (max)", max(lhv_bound(m).bound for m in reduced_332_expansions()), 8, 0))
    std = build_standard(SignFunction(3, 0b10010110))
    add(_eq("identity |value|, standard N=3", int(verify_identity(std, 8).holds), 1, 0))
    comp = build_composed_442(SignFunction(2, 7), SignFunction(2, 9), SignFunction(2, 7))
    add(_eq("identity |value|, composed 4x4x2", int(verify_identity(comp, 16).holds), 1, 0))

    cfg = OptimizationConfig(restarts=restarts, seed=seed)
    ghz = make_state("ghz")
    for name, target in TABLE_QUANTUM.items():
        rep = table_representative(name).with_bound(TABLE_BOUNDS[name])
        add(_eq(f"quantum max GHZ, table {name}", optimize_quantum_value(rep, ghz, cfg).quantum_max, target, 1e-4))
    if quick:
        return checks

    fcfg = OptimizationConfig(restarts=family_restarts, seed=seed)
    composed = FamilyDescriptor("composed_442")
    reduced = FamilyDescriptor("reduced_332")
    standard = FamilyDescriptor("standard", parties=3)

    alpha = math.pi / 12
    gghz = make_state("generalized_ghz", alpha=alpha)
    target = math.sqrt(1 + math.sin(2 * alpha) ** 2)
    add(_eq("factor gen. GHZ a=pi/12, 4x4x2 family", family_violation(composed, gghz, fcfg).violation_factor, target, 1e-3))
    add(_eq("factor gen. GHZ a=pi/12, 3x3x2 family", family_violation(reduced, gghz, fcfg).violation_factor, target, 1e-3))
    add(_le("factor gen. GHZ a=pi/12, standard family", family_violation(standard, gghz, fcfg).violation_factor, 1.0, 1e-6))

    w = make_state("w")
    wc = family_violation(composed, w, fcfg)
    ws = family_violation(standard, w, fcfg)
    add(_eq("factor W, 4x4x2 family", wc.violation_factor, 1.7449, 2e-3))
    add(_eq("critical noise W, 4x4x2 family", wc.critical_noise, 0.4269, 2e-3))
    add(_eq("factor W, standard family", ws.violation_factor, 1.523, 2e-3))
    add(_eq("critical noise W, standard family", ws.critical_noise, 0.3434, 2e-3))

    add(_eq("critical noise GHZ, standard family", family_violation(standard, ghz, fcfg).critical_noise, 0.5, 1e-3))
    add(_eq("critical noise GHZ, 4x4x2 family", family_violation(composed, ghz, fcfg).critical_noise, 0.5, 1e-3))

    bennett = make_state("bennett_bound_entangled")
    add(_le("factor Bennett state, standard family", family_violation(standard, bennett, fcfg).violation_factor, 1.0, 1e-6))
    add(_le("factor Bennett state, 4x4x2 family", family_violation(composed, bennett, fcfg).violation_factor, 1.0, 1e-6))
    return checks


def format_report(checks: list[Check]) -> str:
    width = max(len(c.name) for c in checks)
    lines = [f"{'check':<{width}}  {'computed':>14}  rel  {'expected':>10}  {'tol':>7}  result"]
    for c in checks:
        lines.append(
            f"{c.name:<{width}}  {c.computed:>14.10f}  {c.relation:>3}  {c.expected:>10.6f}  "
            f"{c.tolerance:>7.0e}  {'PASS' if c.passed else 'FAIL'}"
        )
    failed = sum(not c.passed for c in checks)
    lines.append(f"{len(checks) - failed}/{len(checks)} checks passed")
    return "\n".join(lines) + "\n"
