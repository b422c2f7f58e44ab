"""Sign functions: total maps from k-tuples of +/-1 onto +/-1.

A sign function of arity ``k`` is stored as a ``2**k``-bit integer mask.
Argument tuples are ordered lexicographically with ``+1`` before ``-1``
(so ``(+1, +1)``, ``(+1, -1)``, ``(-1, +1)``, ``(-1, -1)`` for ``k = 2``);
bit ``t`` of the mask describes the ``t``-th tuple, and a set bit means
the value ``+1``.  Mask ``2**(2**k) - 1`` is therefore the constant ``+1``
function and mask ``0`` the constant ``-1`` function.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable, Iterator, Sequence

import numpy as np

__all__ = ["SignFunction", "ConstructionError", "sign_tuples"]


class ConstructionError(ValueError):
    """Raised when an inequality or one of its generators is malformed."""


def sign_tuples(arity: int) -> list[tuple[int, ...]]:
    """All ``2**arity`` argument tuples in canonical (lexicographic) order."""
    return list(itertools.product((1, -1), repeat=arity))


@dataclass(frozen=True, order=True)
class SignFunction:
    arity: int
    mask: int

    def __post_init__(self):
        if not isinstance(self.arity, (int, np.integer)) or self.arity < 1:
            raise ConstructionError(f"arity must be a positive integer, got {self.arity!r}")
        if not 0 <= self.mask < self.count(self.arity):
            raise ConstructionError(
                f"mask {self.mask} out of range for arity {self.arity}"
            )

    @staticmethod
    def count(arity: int) -> int:
        """Number of distinct sign functions of the given arity."""
        return 1 << (1 << arity)

    @classmethod
    def all(cls, arity: int) -> Iterator["SignFunction"]:
        for mask in range(cls.count(arity)):
            yield cls(arity, mask)

    @classmethod
    def constant(cls, arity: int, value: int = 1) -> "SignFunction":
        return cls(arity, cls.count(arity) - 1 if value > 0 else 0)

    @classmethod
    def from_values(cls, values: Sequence[int]) -> "SignFunction":
        """Build from the list of values in canonical tuple order."""
        n = len(values)
        arity = n.bit_length() - 1
        if n < 2 or 1 << arity != n:
            raise ConstructionError(f"need 2**k values, got {n}")
        mask = 0
        for t, v in enumerate(values):
            if v not in (1, -1):
                raise ConstructionError(f"sign values must be +1 or -1, got {v!r}")
            if v == 1:
                mask |= 1 << t
        return cls(arity, mask)

    @classmethod
    def from_callable(cls, arity: int, fn: Callable[..., int]) -> "SignFunction":
        return cls.from_values([fn(*s) for s in sign_tuples(arity)])

    def values(self) -> list[int]:
        return [1 if (self.mask >> t) & 1 else -1 for t in range(1 << self.arity)]

    def table(self) -> np.ndarray:
        """Values as an integer array of shape ``(2,)*arity``.

        Axis ``j`` is indexed by 0 for ``s_j = +1`` and 1 for ``s_j = -1``.
        """
        return np.array(self.values(), dtype=np.int64).reshape((2,) * self.arity)

    def __call__(self, *s: int) -> int:
        if len(s) != self.arity:
            raise ConstructionError(f"expected {self.arity} arguments, got {len(s)}")
        t = 0
        for x in s:
            if x not in (1, -1):
                raise ConstructionError(f"arguments must be +1 or -1, got {x!r}")
            t = (t << 1) | (x == -1)
        return 1 if (self.mask >> t) & 1 else -1

    def __neg__(self) -> "SignFunction":
        return SignFunction(self.arity, self.mask ^ (self.count(self.arity) - 1))

    def to_dict(self) -> dict:
        return {"arity": int(self.arity), "mask": int(self.mask)}

    @classmethod
    def from_dict(cls, data: dict) -> "SignFunction":
        return cls(int(data["arity"]), int(data["mask"]))
