"""Multistart Nelder-Mead search for maximal quantum values.

The search runs over spherical angles of the measurement directions.  By
default one party (the one with the most settings in use) is not searched:
for fixed directions of everybody else the Bell value is
``sum_k v_k . n_k`` and its maximum over unit vectors ``n_k`` is
``sum_k |v_k|``, attained at ``n_k = v_k / |v_k|``.  This is exact and
shrinks the simplex dimension (20 -> 12 for a 4x4x2 inequality).
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np
from scipy.optimize import minimize

from .inequalities import BellCoefficients, FamilyDescriptor, canonical_key, enumerate_family
from .lhv import DEFAULT_CAP, EvaluationError, lhv_bound
from .quantum import (
    MeasurementSettings,
    QuantumState,
    bell_value,
    contract_settings,
    correlation_tensor,
    pauli_tensor,
)

__all__ = [
    "OptimizationError",
    "OptimizationConfig",
    "ViolationReport",
    "optimize_quantum_value",
    "family_violation",
    "family_classes",
    "scan_generalized_ghz",
    "critical_noise",
    "resolve_workers",
]

CEILING_SLACK = 1e-9


class OptimizationError(ValueError):
    pass


@dataclass(frozen=True)
class OptimizationConfig:
    restarts: int = 64
    max_iterations: int = 2000
    tolerance: float = 1e-10
    initial_scale: float = 0.3
    seed: int = 0
    # re-inflate the simplex around the best point this many times per restart
    refinements: int = 3
    eliminate: bool = True
    workers: int | None = None

    def __post_init__(self):
        if self.restarts < 1 or self.max_iterations < 1:
            raise OptimizationError("restarts and max_iterations must be positive")
        if self.tolerance <= 0 or self.initial_scale <= 0:
            raise OptimizationError("tolerance and initial_scale must be positive")
        if not 0 <= self.seed < 2**64:
            raise OptimizationError("seed must be an unsigned 64-bit integer")


def resolve_workers(workers: int | None) -> int:
    if workers is not None:
        return max(1, int(workers))
    env = os.environ.get("BELLFORGE_THREADS")
    return max(1, int(env)) if env else 1


@dataclass
class ViolationReport:
    quantum_max: float
    lhv_bound: float
    violation_factor: float
    optimal_settings: MeasurementSettings
    critical_noise: float
    restart_values: tuple[float, ...] = ()
    member: BellCoefficients | None = None
    classes_evaluated: int | None = None
    members_considered: int | None = None
    class_factors: tuple[float, ...] = field(default=())

    def to_dict(self) -> dict:
        out = {
            "quantum_max": self.quantum_max,
            "lhv_bound": self.lhv_bound,
            "violation_factor": self.violation_factor,
            "critical_noise": self.critical_noise,
            "optimal_settings": self.optimal_settings.to_dict(),
            "restart_values": list(self.restart_values),
        }
        if self.member is not None:
            out["member"] = {
                "descriptor": self.member.descriptor,
                "settings": list(self.member.settings),
                "coefficients": self.member.coefficients.tolist(),
                "lhv_bound": self.member.lhv_bound,
            }
        if self.classes_evaluated is not None:
            out["classes_evaluated"] = self.classes_evaluated
            out["members_considered"] = self.members_considered
            out["class_factors"] = list(self.class_factors)
        return out


def critical_noise(report_or_factor) -> float:
    """Largest white-noise fraction that still violates: ``max(0, 1 - 1/factor)``."""
    factor = getattr(report_or_factor, "violation_factor", report_or_factor)
    if factor <= 1:
        return 0.0
    return 1.0 - 1.0 / factor


class _Objective:
    """Bell value as a function of a flat angle vector."""

    def __init__(self, coefficients: np.ndarray, t: np.ndarray, eliminate: bool):
        c = np.asarray(coefficients, dtype=float)
        self.shape = c.shape
        n = c.ndim
        self.active = []
        for j in range(n):
            other = tuple(i for i in range(n) if i != j)
            self.active.append(np.flatnonzero(np.any(c != 0, axis=other)))
        self.c = c[np.ix_(*self.active)]
        self.t = t
        self.eliminated = None
        if eliminate:
            self.eliminated = int(np.argmax([len(a) for a in self.active]))
        self.searched = [j for j in range(n) if j != self.eliminated]
        self.sizes = [len(self.active[j]) for j in self.searched]
        self.dim = 2 * sum(self.sizes)
        if self.eliminated is not None:
            e = self.eliminated
            # move the eliminated party's axis last in both tensors
            self.c_e = np.moveaxis(self.c, e, -1)
            self.t_e = np.moveaxis(t, e, -1)

    def _vectors(self, x: np.ndarray) -> list[np.ndarray]:
        out, pos = [], 0
        for m in self.sizes:
            a = x[pos : pos + 2 * m]
            th, ph = a[0::2], a[1::2]
            st = np.sin(th)
            out.append(np.stack([st * np.cos(ph), st * np.sin(ph), np.cos(th)], axis=1))
            pos += 2 * m
        return out

    def _field(self, vecs: list[np.ndarray]) -> np.ndarray:
        # v[k_e, mu] = sum over other settings of c * T contracted with their directions
        g = self.t_e
        for j, v in enumerate(vecs):
            g = np.tensordot(v, g, axes=([1], [j]))
            g = np.moveaxis(g, 0, j)
        k = self.c_e.ndim - 1
        return np.tensordot(self.c_e, g, axes=(list(range(k)), list(range(k))))

    def value(self, x: np.ndarray) -> float:
        vecs = self._vectors(x)
        if self.eliminated is None:
            return float(np.sum(self.c * contract_settings(self.t, vecs)))
        v = self._field(vecs)
        return float(np.sqrt(np.einsum("km,km->k", v, v)).sum())

    def __call__(self, x: np.ndarray) -> float:
        return -abs(self.value(x))

    def random_start(self, rng: np.random.Generator) -> np.ndarray:
        x = np.empty(self.dim)
        x[0::2] = rng.uniform(0, np.pi, self.dim // 2)
        x[1::2] = rng.uniform(0, 2 * np.pi, self.dim // 2)
        return x

    def encode(self, settings: MeasurementSettings) -> np.ndarray:
        parts = []
        for j in self.searched:
            parts.append(settings.angles[j][self.active[j]].reshape(-1))
        return np.concatenate(parts) if parts else np.zeros(0)

    def settings(self, x: np.ndarray) -> MeasurementSettings:
        vecs = self._vectors(x)
        full = [np.tile([0.0, 0.0, 1.0], (m, 1)) for m in self.shape]
        for j, v in zip(self.searched, vecs):
            full[j][self.active[j]] = v
        if self.eliminated is not None:
            e = self.eliminated
            field_ = self._field(vecs)
            norms = np.linalg.norm(field_, axis=1)
            safe = np.where(norms > 0, norms, 1.0)[:, None]
            dirs = np.where(norms[:, None] > 0, field_ / safe, [0.0, 0.0, 1.0])
            full[e][self.active[e]] = dirs
        for j in range(len(full)):
            full[j] /= np.linalg.norm(full[j], axis=1, keepdims=True)
        return MeasurementSettings.from_vectors(full)


def _nelder_mead(obj: _Objective, x0: np.ndarray, cfg: OptimizationConfig) -> tuple[np.ndarray, float]:
    x, fx = np.asarray(x0, dtype=float), obj(x0)
    if obj.dim == 0:
        return x, fx
    for _ in range(1 + cfg.refinements):
        simplex = np.vstack([x, x + cfg.initial_scale * np.eye(obj.dim)])
        res = minimize(
            obj,
            x,
            method="Nelder-Mead",
            options={
                "maxiter": cfg.max_iterations,
                "maxfev": 4 * cfg.max_iterations,
                "fatol": cfg.tolerance,
                "xatol": 1e-8,
                "initial_simplex": simplex,
                "adaptive": False,
            },
        )
        improved = fx - res.fun
        if res.fun < fx:
            x, fx = res.x, float(res.fun)
        if improved <= cfg.tolerance:
            break
    return x, fx


def _run_restart(args) -> tuple[np.ndarray, float]:
    coefficients, t, cfg, index = args
    obj = _Objective(coefficients, t, cfg.eliminate)
    rng = np.random.default_rng(np.random.SeedSequence(cfg.seed, spawn_key=(index,)))
    return _nelder_mead(obj, obj.random_start(rng), cfg)


def _map(fn, items: list, workers: int) -> list:
    if workers <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def optimize_quantum_value(
    ineq: BellCoefficients,
    state: QuantumState,
    cfg: OptimizationConfig = OptimizationConfig(),
    initial: MeasurementSettings | None = None,
    t: np.ndarray | None = None,
) -> ViolationReport:
    """Best |sum c E| found over measurement directions for a fixed state.

    Restart ``i`` draws its start from ``SeedSequence(seed, spawn_key=(i,))``
    so the first k restarts are the same for any restart count.  ``initial``
    is tried in addition to the random restarts.
    """
    if ineq.lhv_bound is None:
        raise OptimizationError("inequality has no lhv_bound; compute it first")
    if ineq.parties != state.parties:
        raise EvaluationError(f"{ineq.parties}-party inequality vs {state.parties}-qubit state")
    if t is None:
        t = pauli_tensor(state)
    obj = _Objective(ineq.coefficients, t, cfg.eliminate)

    results = _map(
        _run_restart,
        [(ineq.coefficients, t, cfg, i) for i in range(cfg.restarts)],
        resolve_workers(cfg.workers),
    )
    restart_values = tuple(-fx for _, fx in results)
    best = int(np.argmax(restart_values))  # first index wins ties
    best_x, best_val = results[best][0], restart_values[best]

    candidates = [(best_val, obj.settings(best_x))]
    if initial is not None:
        if initial.settings != ineq.settings:
            raise EvaluationError("initial settings do not match the inequality")
        x_init, f_init = _nelder_mead(obj, obj.encode(initial), cfg)
        candidates.append((-f_init, obj.settings(x_init)))
        raw = abs(bell_value(ineq, correlation_tensor(state, initial, t)))
        candidates.append((raw, initial))

    scored = []
    for _, settings in candidates:
        scored.append((abs(bell_value(ineq, correlation_tensor(state, settings, t))), settings))
    quantum_max, settings = max(scored, key=lambda p: p[0])
    settings = _positive_orientation(ineq, state, settings, t)

    ceiling = ineq.algebraic_ceiling()
    if quantum_max > ceiling + CEILING_SLACK:
        raise ArithmeticError(f"quantum value {quantum_max} exceeds algebraic ceiling {ceiling}")
    bound = float(ineq.lhv_bound)
    factor = quantum_max / bound if bound > 0 else math.inf
    return ViolationReport(
        quantum_max=quantum_max,
        lhv_bound=bound,
        violation_factor=factor,
        optimal_settings=settings,
        critical_noise=critical_noise(factor),
        restart_values=restart_values,
    )


def _positive_orientation(ineq, state, settings: MeasurementSettings, t) -> MeasurementSettings:
    """Flip the last party's directions if needed so the Bell value is nonnegative."""
    if bell_value(ineq, correlation_tensor(state, settings, t)) >= 0:
        return settings
    vecs = settings.vectors()
    vecs[-1] = -vecs[-1]
    return MeasurementSettings.from_vectors(vecs)


@lru_cache(maxsize=32)
def family_classes(
    descriptor: FamilyDescriptor, prune: bool = True, cap: int = DEFAULT_CAP
) -> tuple[tuple[BellCoefficients, ...], int]:
    """Representatives (with LHV bounds) of a family's distinct members."""
    members = list(enumerate_family(descriptor))
    return _classes(members, prune, cap), len(members)


def _classes(members: Sequence[BellCoefficients], prune: bool, cap: int) -> tuple:
    reps: dict = {}
    for m in members:
        if not np.any(m.coefficients):
            continue
        if prune:
            try:
                key = canonical_key(m.coefficients)
            except ValueError:
                key = m.coefficients.tobytes()
        else:
            key = m.coefficients.tobytes()
        if key not in reps:
            reps[key] = m if m.lhv_bound is not None else m.with_bound(lhv_bound(m, cap).bound)
    return tuple(reps.values())


def family_violation(
    family: FamilyDescriptor | Iterable[BellCoefficients],
    state: QuantumState,
    cfg: OptimizationConfig = OptimizationConfig(),
    *,
    prune: bool = True,
    cap: int = DEFAULT_CAP,
) -> ViolationReport:
    """Maximum violation factor over all members of a family.

    Members related by per-party setting permutations or outcome
    relabelling share their quantum maximum and LHV bound, so with
    ``prune`` only one representative per class is optimised.
    """
    if isinstance(family, FamilyDescriptor):
        reps, considered = family_classes(family, prune, cap)
    else:
        members = list(family)
        reps, considered = _classes(members, prune, cap), len(members)
    if not reps:
        raise OptimizationError("family has no nonzero members")
    t = pauli_tensor(state)
    best = None
    factors = []
    for rep in reps:
        report = optimize_quantum_value(rep, state, cfg, t=t)
        factors.append(report.violation_factor)
        if best is None or report.violation_factor > best.violation_factor:
            best = report
            best.member = rep
    best.classes_evaluated = len(reps)
    best.members_considered = considered
    best.class_factors = tuple(factors)
    return best


def scan_generalized_ghz(
    family: FamilyDescriptor | Iterable[BellCoefficients],
    alphas: Sequence[float],
    cfg: OptimizationConfig = OptimizationConfig(),
    *,
    prune: bool = True,
) -> list[tuple[float, ViolationReport]]:
    from .quantum import make_state

    if not isinstance(family, FamilyDescriptor):
        family = list(family)
    out = []
    for alpha in alphas:
        if not 0 <= alpha <= math.pi / 4:
            raise OptimizationError(f"alpha={alpha} outside [0, pi/4]")
        state = make_state("generalized_ghz", alpha=alpha)
        out.append((alpha, family_violation(family, state, cfg, prune=prune)))
    return out


def config_dict(cfg: OptimizationConfig) -> dict:
    return asdict(cfg)
