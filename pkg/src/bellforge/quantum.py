"""N-qubit states and full correlation functions for spin measurements.

Conventions: qubit j is the j-th tensor factor and party 1 is the most
significant bit of a basis index, so ``|110>`` is index 6.  ``|0>`` is the
+1 eigenstate of sigma_z.  A setting is a unit Bloch vector ``n`` and the
measured observable is ``n . sigma``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .inequalities import BellCoefficients
from .lhv import EvaluationError

__all__ = [
    "PAULI",
    "StateError",
    "QuantumState",
    "MeasurementSettings",
    "make_state",
    "product_state",
    "mix_with_white_noise",
    "spin_operator",
    "correlation",
    "pauli_tensor",
    "correlation_tensor",
    "bell_value",
    "bloch_vector",
    "contract_settings",
]

PAULI = np.array(
    [
        [[0, 1], [1, 0]],
        [[0, -1j], [1j, 0]],
        [[1, 0], [0, -1]],
    ],
    dtype=complex,
)

NORM_TOL = 1e-12
PSD_TOL = 1e-10
UNIT_TOL = 1e-10
IMAG_TOL = 1e-10


class StateError(ValueError):
    """Invalid state, noise fraction or measurement direction."""


@dataclass(frozen=True, eq=False)
class QuantumState:
    """Pure (``vector``) or mixed (``matrix``) N-qubit state."""

    parties: int
    vector: np.ndarray | None = None
    matrix: np.ndarray | None = None
    name: str = "custom"

    def __post_init__(self):
        dim = 1 << self.parties
        if (self.vector is None) == (self.matrix is None):
            raise StateError("give exactly one of vector or matrix")
        if self.vector is not None:
            v = np.array(self.vector, dtype=complex).reshape(-1)
            if v.shape != (dim,):
                raise StateError(f"state vector must have length {dim}")
            if abs(np.vdot(v, v).real - 1) > NORM_TOL:
                raise StateError("state vector is not normalised")
            v.flags.writeable = False
            object.__setattr__(self, "vector", v)
        else:
            m = np.array(self.matrix, dtype=complex)
            if m.shape != (dim, dim):
                raise StateError(f"density matrix must be {dim}x{dim}")
            m = (m + m.conj().T) / 2
            if abs(np.trace(m).real - 1) > NORM_TOL:
                raise StateError("density matrix trace is not 1")
            if np.linalg.eigvalsh(m)[0] < -PSD_TOL:
                raise StateError("density matrix is not positive semidefinite")
            m.flags.writeable = False
            object.__setattr__(self, "matrix", m)

    @property
    def kind(self) -> str:
        return "pure" if self.vector is not None else "mixed"

    def density_matrix(self) -> np.ndarray:
        if self.matrix is not None:
            return self.matrix
        return np.outer(self.vector, self.vector.conj())


def _ket(bits: str) -> np.ndarray:
    v = np.zeros(1 << len(bits), dtype=complex)
    v[int(bits, 2)] = 1
    return v


def _kron(*vs) -> np.ndarray:
    out = np.ones(1, dtype=complex)
    for v in vs:
        out = np.kron(out, v)
    return out


def make_state(name: str, **params) -> QuantumState:
    """Named states: ghz, generalized_ghz (alpha), w, bennett_bound_entangled, custom.

    ``generalized_ghz`` is ``cos(alpha)|1...1> + sin(alpha)|0...0>``; alpha
    outside [0, pi/4] is accepted with a warning.  ``custom`` takes either
    ``vector`` or ``matrix``.
    """
    n = int(params.get("parties", 3))
    if name == "ghz":
        v = (_ket("0" * n) + _ket("1" * n)) / math.sqrt(2)
        return QuantumState(n, vector=v, name="ghz")
    if name == "generalized_ghz":
        alpha = float(params["alpha"])
        if not 0 <= alpha <= math.pi / 4:
            warnings.warn(f"alpha={alpha} lies outside [0, pi/4]", stacklevel=2)
        v = math.cos(alpha) * _ket("1" * n) + math.sin(alpha) * _ket("0" * n)
        return QuantumState(n, vector=v, name="generalized_ghz")
    if name == "w":
        v = sum(_ket("0" * j + "1" + "0" * (n - j - 1)) for j in range(n)) / math.sqrt(n)
        return QuantumState(n, vector=v, name="w")
    if name == "bennett_bound_entangled":
        zero, one = np.array([1, 0], dtype=complex), np.array([0, 1], dtype=complex)
        plus, minus = (zero + one) / math.sqrt(2), (zero - one) / math.sqrt(2)
        upb = [
            _kron(zero, one, plus),
            _kron(one, plus, zero),
            _kron(plus, zero, one),
            _kron(minus, minus, minus),
        ]
        rho = np.eye(8, dtype=complex) - sum(np.outer(p, p.conj()) for p in upb)
        return QuantumState(3, matrix=rho / 4, name="bennett_bound_entangled")
    if name == "custom":
        if "vector" in params:
            v = np.asarray(params["vector"], dtype=complex)
            return QuantumState(int(math.log2(len(v))), vector=v)
        m = np.asarray(params["matrix"], dtype=complex)
        return QuantumState(int(math.log2(len(m))), matrix=m)
    raise StateError(f"unknown state name {name!r}")


def bloch_vector(theta: float, phi: float) -> np.ndarray:
    return np.array(
        [math.sin(theta) * math.cos(phi), math.sin(theta) * math.sin(phi), math.cos(theta)]
    )


def product_state(directions: Sequence[Sequence[float]]) -> QuantumState:
    """Pure product state whose j-th qubit points along Bloch vector ``directions[j]``."""
    kets = []
    for n in directions:
        x, y, z = np.asarray(n, dtype=float) / np.linalg.norm(n)
        theta, phi = math.acos(max(-1.0, min(1.0, z))), math.atan2(y, x)
        kets.append(np.array([math.cos(theta / 2), np.exp(1j * phi) * math.sin(theta / 2)]))
    return QuantumState(len(kets), vector=_kron(*kets), name="product")


def mix_with_white_noise(state: QuantumState, f: float) -> QuantumState:
    """``(1 - f) rho + f I / 2**N``."""
    if not 0 <= f <= 1:
        raise StateError(f"noise fraction must lie in [0, 1], got {f}")
    if f == 0:
        return state
    dim = 1 << state.parties
    rho = (1 - f) * state.density_matrix() + f * np.eye(dim) / dim
    return QuantumState(state.parties, matrix=rho, name=f"{state.name}+noise")


def _wrap(theta: np.ndarray, phi: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    theta = np.mod(theta, 2 * np.pi)
    flip = theta > np.pi
    theta = np.where(flip, 2 * np.pi - theta, theta)
    phi = np.mod(np.where(flip, phi + np.pi, phi), 2 * np.pi)
    # mod can round up to exactly 2*pi
    phi = np.where(phi >= 2 * np.pi, 0.0, phi)
    return theta, phi


@dataclass(frozen=True, eq=False)
class MeasurementSettings:
    """Per party, an ``(m_j, 2)`` array of (theta, phi) spherical angles."""

    angles: tuple[np.ndarray, ...]

    def __post_init__(self):
        arrs = []
        for a in self.angles:
            a = np.array(a, dtype=float).reshape(-1, 2)
            if np.any(a[:, 0] < 0) or np.any(a[:, 0] > np.pi):
                raise StateError("theta must lie in [0, pi]")
            if np.any(a[:, 1] < 0) or np.any(a[:, 1] >= 2 * np.pi):
                raise StateError("phi must lie in [0, 2 pi)")
            a.flags.writeable = False
            arrs.append(a)
        object.__setattr__(self, "angles", tuple(arrs))

    @classmethod
    def from_raw(cls, angles: Sequence[np.ndarray]) -> "MeasurementSettings":
        """Accept unconstrained angles and wrap them into canonical ranges."""
        out = []
        for a in angles:
            a = np.asarray(a, dtype=float).reshape(-1, 2)
            th, ph = _wrap(a[:, 0], a[:, 1])
            out.append(np.stack([th, ph], axis=1))
        return cls(tuple(out))

    @classmethod
    def from_vectors(cls, vectors: Sequence[np.ndarray]) -> "MeasurementSettings":
        out = []
        for vs in vectors:
            vs = np.asarray(vs, dtype=float).reshape(-1, 3)
            norms = np.linalg.norm(vs, axis=1)
            if np.any(np.abs(norms - 1) > UNIT_TOL):
                raise StateError("measurement directions must be unit vectors")
            th = np.arccos(np.clip(vs[:, 2] / norms, -1, 1))
            ph = np.mod(np.arctan2(vs[:, 1], vs[:, 0]), 2 * np.pi)
            ph = np.where(ph >= 2 * np.pi, 0.0, ph)
            out.append(np.stack([th, ph], axis=1))
        return cls(tuple(out))

    @property
    def settings(self) -> tuple[int, ...]:
        return tuple(len(a) for a in self.angles)

    def vectors(self) -> list[np.ndarray]:
        out = []
        for a in self.angles:
            th, ph = a[:, 0], a[:, 1]
            out.append(
                np.stack([np.sin(th) * np.cos(ph), np.sin(th) * np.sin(ph), np.cos(th)], axis=1)
            )
        return out

    def to_dict(self) -> dict:
        return {
            "angles": [a.tolist() for a in self.angles],
            "vectors": [v.tolist() for v in self.vectors()],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "MeasurementSettings":
        return cls(tuple(np.asarray(a, dtype=float) for a in data["angles"]))


def spin_operator(n: Sequence[float]) -> np.ndarray:
    n = np.asarray(n, dtype=float)
    if n.shape != (3,) or abs(np.linalg.norm(n) - 1) > UNIT_TOL:
        raise StateError(f"measurement direction {n} is not a unit 3-vector")
    return np.tensordot(n, PAULI, axes=1)


def _real(value: complex) -> float:
    if abs(value.imag) > IMAG_TOL:
        raise ArithmeticError(f"expectation has imaginary part {value.imag}")
    return float(value.real)


def correlation(state: QuantumState, directions: Sequence[Sequence[float]]) -> float:
    """``Tr[rho (n_1 . sigma) x ... x (n_N . sigma)]``."""
    if len(directions) != state.parties:
        raise EvaluationError(f"need {state.parties} directions, got {len(directions)}")
    ops = [spin_operator(n) for n in directions]
    n = state.parties
    if state.vector is not None:
        psi = state.vector.reshape((2,) * n)
        phi = psi
        for j, op in enumerate(ops):
            phi = np.moveaxis(np.tensordot(op, phi, axes=([1], [j])), 0, j)
        return _real(np.vdot(psi, phi))
    full = ops[0]
    for op in ops[1:]:
        full = np.kron(full, op)
    return _real(np.trace(state.matrix @ full))


def pauli_tensor(state: QuantumState) -> np.ndarray:
    """``T[mu_1..mu_N] = Tr[rho sigma_mu_1 x ... x sigma_mu_N]`` over x, y, z."""
    n = state.parties
    rho = state.density_matrix().reshape((2,) * (2 * n))
    rows = "abcdefghij"[:n]
    cols = "klmnopqrst"[:n]
    mus = "ABCDEFGHIJ"[:n]
    subs = rows + cols + "," + ",".join(f"{m}{c}{r}" for m, r, c in zip(mus, rows, cols))
    t = np.einsum(subs + "->" + mus, rho, *([PAULI] * n), optimize=True)
    if np.max(np.abs(t.imag)) > IMAG_TOL:
        raise ArithmeticError("Pauli correlation tensor is not real")
    return np.ascontiguousarray(t.real)


def contract_settings(t: np.ndarray, vectors: Sequence[np.ndarray]) -> np.ndarray:
    """Multilinear contraction of a Pauli tensor with per-party direction arrays."""
    out = t
    for j, v in enumerate(vectors):
        out = np.moveaxis(np.tensordot(v, out, axes=([1], [j])), 0, j)
    return out


def correlation_tensor(
    state: QuantumState, settings: MeasurementSettings, t: np.ndarray | None = None
) -> np.ndarray:
    """Dense ``E[k_1, ..., k_N]`` for all setting combinations."""
    if len(settings.settings) != state.parties:
        raise EvaluationError("settings do not match the number of parties")
    if t is None:
        t = pauli_tensor(state)
    e = contract_settings(t, settings.vectors())
    if np.max(np.abs(e)) > 1 + PSD_TOL:
        raise ArithmeticError("correlation outside [-1, 1]")
    return e


def bell_value(ineq: BellCoefficients, tensor: np.ndarray) -> float:
    """``sum_k c_k E_k``."""
    tensor = np.asarray(tensor)
    if tensor.shape != ineq.settings:
        raise EvaluationError(f"tensor shape {tensor.shape} != inequality {ineq.settings}")
    return float(np.sum(ineq.coefficients * tensor))
