"""Exact local-realistic bounds by enumerating deterministic strategies.

A deterministic strategy fixes one outcome in {+1, -1} per (party, setting).
Since a correlation Bell expression is linear in the joint outcome
distribution, its local-realistic maximum is attained on one of these
vertices, so exhaustive enumeration gives the exact bound.

Strategy indices: party 1 occupies the most significant block of bits,
party N the least; inside a party's block bit ``k - 1`` describes setting
``k`` and a set bit means outcome -1.  Index 0 is the all-(+1) strategy.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .inequalities import BellCoefficients

__all__ = [
    "DEFAULT_CAP",
    "EvaluationError",
    "EnumerationCapError",
    "DeterministicStrategy",
    "LHVResult",
    "IdentityReport",
    "outcome_table",
    "strategy_value",
    "all_strategy_values",
    "lhv_bound",
    "lhv_bound_recursive",
    "with_lhv_bound",
    "verify_identity",
]

DEFAULT_CAP = 1 << 24


class EvaluationError(ValueError):
    """Shapes of an inequality and a strategy (or tensor) disagree."""


class EnumerationCapError(RuntimeError):
    """The strategy space is larger than the configured enumeration cap."""


@dataclass(frozen=True)
class DeterministicStrategy:
    outcomes: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        outs = tuple(tuple(int(v) for v in party) for party in self.outcomes)
        for party in outs:
            if any(v not in (1, -1) for v in party):
                raise ValueError("outcomes must be +1 or -1")
        object.__setattr__(self, "outcomes", outs)

    @property
    def parties(self) -> int:
        return len(self.outcomes)

    @property
    def settings(self) -> tuple[int, ...]:
        return tuple(len(p) for p in self.outcomes)

    @property
    def index(self) -> int:
        idx = 0
        for party in self.outcomes:
            bits = sum(1 << k for k, v in enumerate(party) if v == -1)
            idx = (idx << len(party)) | bits
        return idx

    @classmethod
    def from_index(cls, index: int, settings: Sequence[int]) -> "DeterministicStrategy":
        total = sum(settings)
        if not 0 <= index < 1 << total:
            raise ValueError(f"strategy index {index} out of range")
        parties = []
        for m in reversed(settings):
            bits = index & ((1 << m) - 1)
            index >>= m
            parties.append(tuple(-1 if (bits >> k) & 1 else 1 for k in range(m)))
        return cls(tuple(reversed(parties)))

    def to_dict(self) -> dict:
        return {"index": self.index, "outcomes": [list(p) for p in self.outcomes]}


def _count(settings: Sequence[int]) -> int:
    return 1 << sum(settings)


def _check_cap(settings: Sequence[int], cap: int) -> None:
    n = _count(settings)
    if n > cap:
        raise EnumerationCapError(
            f"{n} deterministic strategies is too large to enumerate (cap {cap})"
        )


def outcome_table(m: int) -> np.ndarray:
    """All 2**m outcome vectors of one party; row r bit k set means -1."""
    r = np.arange(1 << m)[:, None]
    bits = (r >> np.arange(m)[None, :]) & 1
    return (1 - 2 * bits).astype(np.int64)


def strategy_value(ineq: BellCoefficients, strat: DeterministicStrategy):
    """sum over setting tuples of c(k) * prod_j outcome(j, k_j)."""
    if strat.settings != ineq.settings:
        raise EvaluationError(f"strategy shape {strat.settings} != inequality {ineq.settings}")
    val = ineq.coefficients
    for party in reversed(strat.outcomes):
        val = val @ np.asarray(party, dtype=np.int64)
    return val.item()


def all_strategy_values(ineq: BellCoefficients, cap: int = DEFAULT_CAP) -> np.ndarray:
    """Values of every strategy, as a flat array ordered by strategy index."""
    _check_cap(ineq.settings, cap)
    val = ineq.coefficients
    for j, m in enumerate(ineq.settings):
        val = np.tensordot(val, outcome_table(m), axes=([j], [1]))
        val = np.moveaxis(val, -1, j)
    return val.reshape(-1)


@dataclass(frozen=True)
class LHVResult:
    bound: float | int
    witness: DeterministicStrategy
    strategies: int


def lhv_bound(ineq: BellCoefficients, cap: int = DEFAULT_CAP, chunks: int = 1) -> LHVResult:
    """Max |value| over all deterministic strategies, with a maximising strategy.

    The strategy space is split into ``chunks`` contiguous index ranges along
    party 1 and reduced by max, earliest index winning ties.
    """
    settings = ineq.settings
    _check_cap(settings, cap)
    first = outcome_table(settings[0])
    rest = ineq.coefficients
    for j, m in enumerate(settings[1:], start=1):
        rest = np.tensordot(rest, outcome_table(m), axes=([j], [1]))
        rest = np.moveaxis(rest, -1, j)
    # rest: (m_1, 2**m_2, ..., 2**m_N) flattened to (m_1, tail)
    rest = rest.reshape(settings[0], -1)
    best_val, best_idx = None, -1
    for rows in np.array_split(np.arange(len(first)), max(1, chunks)):
        if len(rows) == 0:
            continue
        vals = np.abs(first[rows] @ rest)
        flat = int(np.argmax(vals))
        v = vals.reshape(-1)[flat]
        if best_val is None or v > best_val:
            r, t = divmod(flat, rest.shape[1])
            best_val, best_idx = v, int(rows[r]) * rest.shape[1] + t
    return LHVResult(
        bound=best_val.item(),
        witness=DeterministicStrategy.from_index(best_idx, settings),
        strategies=_count(settings),
    )


def lhv_bound_recursive(ineq: BellCoefficients, cap: int = DEFAULT_CAP):
    """Independent route: maximise party by party, last party first.

    For one remaining party the optimum of |sum_k c_k A_k| is sum_k |c_k|;
    otherwise try every outcome vector of the last party and recurse on the
    contracted tensor.
    """
    _check_cap(ineq.settings, cap)

    def rec(c):
        if c.ndim == 1:
            return np.abs(c).sum().item()
        best = None
        for o in outcome_table(c.shape[-1]):
            v = rec(c @ o)
            if best is None or v > best:
                best = v
        return best

    return rec(ineq.coefficients)


def with_lhv_bound(ineq: BellCoefficients, cap: int = DEFAULT_CAP) -> BellCoefficients:
    return ineq.with_bound(lhv_bound(ineq, cap).bound)


@dataclass(frozen=True)
class IdentityReport:
    holds: bool
    expected_magnitude: float
    values: dict

    def __bool__(self) -> bool:
        return self.holds


def verify_identity(
    ineq: BellCoefficients, expected_magnitude, cap: int = DEFAULT_CAP
) -> IdentityReport:
    """Check that every deterministic strategy evaluates to +/-expected_magnitude."""
    vals = all_strategy_values(ineq, cap)
    uniq, counts = np.unique(vals, return_counts=True)
    multiset = {u.item(): int(n) for u, n in zip(uniq, counts)}
    holds = bool(np.all(np.abs(vals) == expected_magnitude))
    return IdentityReport(holds, expected_magnitude, multiset)

