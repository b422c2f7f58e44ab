"""Correlation Bell inequalities built from sign functions.

Every inequality is a dense coefficient tensor ``c[k_1, ..., k_N]`` over
the full correlation functions ``E_{k_1...k_N}`` together with its local
realistic bound.  Tensors are kept in raw form (not divided by the bound),
so a standard N-party member is bounded by ``2**N`` and a composed
4x4x2 member by 16.

Setting labels are 1-based at every public boundary.  ``labels`` records,
per party, the original setting label of each tensor axis position; it
differs from ``1..m`` only after :func:`reduce_settings`.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field, replace
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np

from .signs import ConstructionError, SignFunction

__all__ = [
    "BellCoefficients",
    "RecursiveSpec",
    "FamilyDescriptor",
    "from_terms",
    "build_standard",
    "compose",
    "build_composed_442",
    "build_recursive",
    "reduce_settings",
    "permute_settings",
    "flip_outcomes",
    "enumerate_family",
    "canonical_key",
    "equivalence_classes",
    "expand_absolute_blocks",
    "composed_442_expansions",
    "reduced_332_expansions",
    "SPLIT_OUTER",
    "REDUCED_332_IDENTIFICATIONS",
]


def _as_tensor(values) -> np.ndarray:
    arr = np.array(values)
    if arr.dtype == object or not np.issubdtype(arr.dtype, np.number):
        raise ConstructionError("coefficients must be numeric")
    if np.iscomplexobj(arr):
        raise ConstructionError("coefficients must be real")
    if np.issubdtype(arr.dtype, np.integer):
        arr = arr.astype(np.int64)
    elif np.all(np.isfinite(arr)) and np.all(arr == np.round(arr)):
        arr = arr.astype(np.int64)
    else:
        arr = arr.astype(np.float64)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True, eq=False)
class BellCoefficients:
    """A linear correlation Bell expression and (optionally) its LHV bound."""

    coefficients: np.ndarray
    lhv_bound: float | int | None = None
    descriptor: dict = field(default_factory=dict)
    labels: tuple[tuple[int, ...], ...] | None = None

    def __post_init__(self):
        arr = _as_tensor(self.coefficients)
        if arr.ndim < 1 or 0 in arr.shape:
            raise ConstructionError(f"bad coefficient tensor shape {arr.shape}")
        object.__setattr__(self, "coefficients", arr)
        if self.labels is None:
            labels = tuple(tuple(range(1, m + 1)) for m in arr.shape)
        else:
            labels = tuple(tuple(int(x) for x in party) for party in self.labels)
            if tuple(len(p) for p in labels) != arr.shape:
                raise ConstructionError("labels do not match tensor shape")
        object.__setattr__(self, "labels", labels)
        if self.lhv_bound is not None and self.lhv_bound < 0:
            raise ConstructionError("lhv_bound must be nonnegative")

    @property
    def parties(self) -> int:
        return self.coefficients.ndim

    @property
    def settings(self) -> tuple[int, ...]:
        return self.coefficients.shape

    @property
    def is_integral(self) -> bool:
        return np.issubdtype(self.coefficients.dtype, np.integer)

    def with_bound(self, bound) -> "BellCoefficients":
        return replace(self, lhv_bound=bound)

    def scaled(self, factor) -> "BellCoefficients":
        bound = None if self.lhv_bound is None else self.lhv_bound * abs(factor)
        return replace(self, coefficients=self.coefficients * factor, lhv_bound=bound)

    def same_tensor(self, other: "BellCoefficients") -> bool:
        return self.settings == other.settings and bool(
            np.array_equal(self.coefficients, other.coefficients)
        )

    def terms(self) -> dict[tuple[int, ...], float]:
        """Nonzero coefficients keyed by 1-based setting labels."""
        out = {}
        for idx in zip(*np.nonzero(self.coefficients)):
            key = tuple(self.labels[j][i] for j, i in enumerate(idx))
            out[key] = self.coefficients[idx].item()
        return out

    def algebraic_ceiling(self) -> float:
        """Sum of absolute coefficients; no assignment of |E| <= 1 exceeds it."""
        return float(np.abs(self.coefficients).sum())

    def __repr__(self) -> str:
        return (
            f"BellCoefficients(settings={self.settings}, terms={len(self.terms())}, "
            f"lhv_bound={self.lhv_bound}, descriptor={self.descriptor})"
        )


def from_terms(
    terms: Mapping[Sequence[int], float],
    settings: Sequence[int] | None = None,
    **kwargs,
) -> BellCoefficients:
    """Build a tensor from ``{(k_1, ..., k_N): coefficient}`` with 1-based labels."""
    keys = [tuple(k) for k in terms]
    if not keys:
        raise ConstructionError("no terms given")
    n = len(keys[0])
    if any(len(k) != n for k in keys):
        raise ConstructionError("inconsistent number of parties in terms")
    if settings is None:
        settings = [max(k[j] for k in keys) for j in range(n)]
    c = np.zeros(tuple(settings), dtype=np.float64)
    for key, value in terms.items():
        idx = tuple(k - 1 for k in key)
        if any(i < 0 or i >= m for i, m in zip(idx, settings)):
            raise ConstructionError(f"setting label out of range in term {key}")
        c[idx] += value
    return BellCoefficients(c, **kwargs)


def _walsh(table: np.ndarray) -> np.ndarray:
    # coefficient(k) = sum_s S(s) prod_j s_j**(k_j - 1); H[k, b] = (+1 or -1)**k
    h = np.array([[1, 1], [1, -1]], dtype=np.int64)
    out = table
    for axis in range(table.ndim):
        out = np.moveaxis(np.tensordot(h, out, axes=([1], [axis])), 0, axis)
    return out


def build_standard(signs: SignFunction, parties: int | None = None) -> BellCoefficients:
    """Two-setting inequality generated by ``signs`` (bound ``2**N``)."""
    n = signs.arity if parties is None else parties
    if signs.arity != n:
        raise ConstructionError(f"sign function arity {signs.arity} != parties {n}")
    if n < 2:
        raise ConstructionError("standard inequalities need at least two parties")
    return BellCoefficients(
        _walsh(signs.table()),
        descriptor={"kind": "standard", "parties": n, "generators": [signs.mask]},
    )


def compose(x: BellCoefficients, y: BellCoefficients, outer: SignFunction) -> BellCoefficients:
    """Combine two identity blocks on disjoint settings with one new two-setting party.

    Expands ``sum_{s'} S''(s') (X + s'_1 Y)(C_1 + s'_2 C_2)``.  The settings of
    ``y`` are appended after those of ``x`` for every existing party.  If X
    and Y are each +/-M on every deterministic strategy, the result is +/-4M.
    """
    if outer.arity != 2:
        raise ConstructionError("outer sign function must have arity 2")
    if x.parties != y.parties:
        raise ConstructionError("blocks must act on the same parties")
    d = _walsh(outer.table())
    shape = tuple(a + b for a, b in zip(x.settings, y.settings)) + (2,)
    c = np.zeros(shape, dtype=np.result_type(x.coefficients, y.coefficients, d))
    xs = tuple(slice(0, m) for m in x.settings)
    ys = tuple(slice(a, a + b) for a, b in zip(x.settings, y.settings))
    for g in range(2):
        c[xs + (g,)] = d[0, g] * x.coefficients
        c[ys + (g,)] = d[1, g] * y.coefficients
    return BellCoefficients(c)


def build_composed_442(
    s_block1: SignFunction, s_block2: SignFunction, s_outer: SignFunction
) -> BellCoefficients:
    """4x4x2 three-party inequality; every deterministic strategy gives +/-16."""
    for s in (s_block1, s_block2, s_outer):
        if s.arity != 2:
            raise ConstructionError("composed 4x4x2 generators must all have arity 2")
    out = compose(build_standard(s_block1), build_standard(s_block2), s_outer)
    return replace(
        out,
        descriptor={
            "kind": "composed_442",
            "parties": 3,
            "generators": [s_block1.mask, s_block2.mask, s_outer.mask],
        },
    )


# Outer sign that splits two blocks into a sum and a difference: S''(-1,-1) = -1, all others +1.
SPLIT_OUTER = SignFunction.from_values([1, 1, 1, -1])

# Identify settings 2 -> 1 for the first two parties (4x4x2 -> 3x3x2).
REDUCED_332_IDENTIFICATIONS = {1: {2: 1}, 2: {2: 1}}


@dataclass(frozen=True)
class RecursiveSpec:
    """Binary composition tree of standard blocks.

    ``blocks`` holds ``2**levels`` sign functions of a common arity ``b``;
    ``outers`` holds ``2**levels - 1`` arity-2 sign functions consumed level
    by level, left to right.  The result has ``b + levels`` parties.
    """

    blocks: tuple[SignFunction, ...]
    outers: tuple[SignFunction, ...]

    def __post_init__(self):
        object.__setattr__(self, "blocks", tuple(self.blocks))
        object.__setattr__(self, "outers", tuple(self.outers))

    @property
    def base_arity(self) -> int:
        return self.blocks[0].arity if self.blocks else 0

    @property
    def levels(self) -> int:
        return max(len(self.blocks), 1).bit_length() - 1

    def validate(self, parties: int) -> None:
        nb = len(self.blocks)
        if nb < 2 or nb & (nb - 1):
            raise ConstructionError("number of blocks must be a power of two >= 2")
        if len({b.arity for b in self.blocks}) != 1 or self.base_arity < 2:
            raise ConstructionError("blocks must share one arity >= 2")
        if len(self.outers) != nb - 1:
            raise ConstructionError(f"expected {nb - 1} outer sign functions")
        if any(o.arity != 2 for o in self.outers):
            raise ConstructionError("outer sign functions must have arity 2")
        if parties != self.base_arity + self.levels:
            raise ConstructionError(
                f"spec describes {self.base_arity + self.levels} parties, not {parties}"
            )

    def identity_magnitude(self) -> int:
        """Constant |value| on deterministic strategies: 2**b * 4**levels."""
        return 2 ** (self.base_arity + 2 * self.levels)


def build_recursive(spec: RecursiveSpec, parties: int) -> BellCoefficients:
    spec.validate(parties)
    layer = [build_standard(s) for s in spec.blocks]
    outers = iter(spec.outers)
    while len(layer) > 1:
        layer = [compose(layer[i], layer[i + 1], next(outers)) for i in range(0, len(layer), 2)]
    return replace(
        layer[0],
        descriptor={
            "kind": "recursive",
            "parties": parties,
            "base_arity": spec.base_arity,
            "levels": spec.levels,
            "generators": [s.mask for s in spec.blocks] + [s.mask for s in spec.outers],
        },
    )


def reduce_settings(
    ineq: BellCoefficients, identifications: Mapping[int, Mapping[int, int]]
) -> BellCoefficients:
    """Identify settings: ``{party: {removed_label: kept_label}}``, all 1-based.

    Coefficients of a removed setting are added onto the kept one and the
    axis shrinks.  Surviving axes keep their original labels.
    """
    c = np.array(ineq.coefficients)
    labels = [list(p) for p in ineq.labels]
    for party, mapping in sorted(identifications.items()):
        j = int(party) - 1
        if not 0 <= j < ineq.parties:
            raise ConstructionError(f"party {party} does not exist")
        pos = {lab: i for i, lab in enumerate(labels[j])}
        removed = set()
        for src, dst in mapping.items():
            if src not in pos or dst not in pos:
                raise ConstructionError(f"party {party}: setting {src}->{dst} does not exist")
            if src == dst:
                continue
            if dst in mapping and mapping[dst] != dst:
                raise ConstructionError(f"party {party}: setting {dst} is both kept and removed")
            removed.add(src)
        c = np.moveaxis(c, j, 0)
        for src in removed:
            c[pos[mapping[src]]] += c[pos[src]]
        keep = [i for i, lab in enumerate(labels[j]) if lab not in removed]
        c = np.moveaxis(c[keep], 0, j)
        labels[j] = [labels[j][i] for i in keep]
    desc = dict(ineq.descriptor)
    if identifications:
        desc["identifications"] = {
            str(p): {str(k): int(v) for k, v in m.items()} for p, m in identifications.items()
        }
    return BellCoefficients(c, descriptor=desc, labels=tuple(tuple(p) for p in labels))


def permute_settings(ineq: BellCoefficients, perms: Sequence[Sequence[int]]) -> BellCoefficients:
    """Reorder each party's axis; ``perms[j]`` lists 0-based source positions."""
    c = ineq.coefficients
    for j, p in enumerate(perms):
        c = np.take(c, list(p), axis=j)
    return replace(ineq, coefficients=c, labels=None)


def flip_outcomes(ineq: BellCoefficients, signs: Sequence[Sequence[int]]) -> BellCoefficients:
    """Relabel outcomes: multiply slice k of party j by ``signs[j][k]``."""
    c = ineq.coefficients
    for j, s in enumerate(signs):
        shape = [1] * ineq.parties
        shape[j] = -1
        c = c * np.asarray(s, dtype=np.int64).reshape(shape)
    return replace(ineq, coefficients=c)


# -- families ---------------------------------------------------------------

_KINDS = ("standard", "composed_442", "reduced_332", "recursive")


@dataclass(frozen=True)
class FamilyDescriptor:
    """Identifies a generator space.

    ``standard`` uses ``parties``; ``recursive`` uses ``base_arity`` and
    ``levels``; the two three-party kinds need nothing else.
    """

    kind: str
    parties: int = 3
    base_arity: int = 2
    levels: int = 1

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ConstructionError(f"unknown family kind {self.kind!r}")
        if self.kind in ("composed_442", "reduced_332"):
            object.__setattr__(self, "parties", 3)
        if self.kind == "recursive":
            object.__setattr__(self, "parties", self.base_arity + self.levels)

    def _radices(self) -> list[int]:
        if self.kind == "standard":
            return [SignFunction.count(self.parties)]
        if self.kind in ("composed_442", "reduced_332"):
            return [16, 16, 16]
        nb = 1 << self.levels
        return [SignFunction.count(self.base_arity)] * nb + [16] * (nb - 1)

    def generator_count(self) -> int:
        return math.prod(self._radices())

    def generators(self, index: int) -> list[int]:
        """Mixed-radix decoding; the first generator is the most significant."""
        out = []
        for r in reversed(self._radices()):
            index, digit = divmod(index, r)
            out.append(digit)
        return out[::-1]

    def build(self, masks: Sequence[int]) -> BellCoefficients:
        if self.kind == "standard":
            return build_standard(SignFunction(self.parties, masks[0]))
        if self.kind == "composed_442":
            return build_composed_442(*(SignFunction(2, m) for m in masks))
        if self.kind == "reduced_332":
            full = build_composed_442(*(SignFunction(2, m) for m in masks))
            out = reduce_settings(full, REDUCED_332_IDENTIFICATIONS)
            return replace(out, descriptor={**out.descriptor, "kind": "reduced_332"})
        nb = 1 << self.levels
        spec = RecursiveSpec(
            tuple(SignFunction(self.base_arity, m) for m in masks[:nb]),
            tuple(SignFunction(2, m) for m in masks[nb:]),
        )
        return build_recursive(spec, self.parties)

    def member(self, index: int) -> BellCoefficients:
        return self.build(self.generators(index))

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "parties": self.parties,
            "base_arity": self.base_arity,
            "levels": self.levels,
        }


def _signed_permutations(m: int, flips: bool) -> tuple[np.ndarray, np.ndarray]:
    perms = np.array(list(itertools.permutations(range(m))), dtype=np.intp)
    if flips:
        signs = np.array(list(itertools.product((1, -1), repeat=m)), dtype=np.int64)
    else:
        signs = np.ones((1, m), dtype=np.int64)
    p = np.repeat(perms, len(signs), axis=0)
    s = np.tile(signs, (len(perms), 1))
    return p, s


def enumerate_family(
    descriptor: FamilyDescriptor | None,
    *,
    start: int = 0,
    stop: int | None = None,
    unique: bool = True,
    permute: bool = False,
    flip: bool = False,
) -> Iterator[BellCoefficients]:
    """Yield family members for generator indices ``[start, stop)``.

    With ``unique`` members equal as tensors are emitted once.  ``permute``
    additionally yields every per-party setting permutation of each member,
    and ``flip`` every per-setting outcome relabelling on top of that.
    """
    if descriptor is None:
        return
    total = descriptor.generator_count()
    stop = total if stop is None else min(stop, total)
    seen: set[bytes] = set()
    group = None
    if permute or flip:
        group = [
            _signed_permutations(m, flip) if permute else _flips_only(m, flip)
            for m in _probe_shape(descriptor)
        ]
    for index in range(start, stop):
        member = descriptor.member(index)
        candidates = [member] if group is None else _orbit(member, group)
        for cand in candidates:
            if unique:
                key = cand.coefficients.tobytes()
                if key in seen:
                    continue
                seen.add(key)
            yield cand


def _probe_shape(descriptor: FamilyDescriptor) -> tuple[int, ...]:
    return descriptor.member(0).settings


def _flips_only(m: int, flip: bool) -> tuple[np.ndarray, np.ndarray]:
    perms = np.arange(m, dtype=np.intp)[None, :]
    if not flip:
        return perms, np.ones((1, m), dtype=np.int64)
    signs = np.array(list(itertools.product((1, -1), repeat=m)), dtype=np.int64)
    return np.repeat(perms, len(signs), axis=0), signs


def _orbit(member: BellCoefficients, group) -> Iterator[BellCoefficients]:
    for choice in itertools.product(*(range(len(p)) for p, _ in group)):
        c = member.coefficients
        for j, g in enumerate(choice):
            perm, sign = group[j][0][g], group[j][1][g]
            shape = [1] * member.parties
            shape[j] = -1
            c = np.take(c, perm, axis=j) * sign.reshape(shape)
        yield replace(member, coefficients=c, labels=None)


def canonical_key(
    coefficients, *, flip: bool = True, max_group: int = 1 << 16
) -> tuple:
    """Orbit representative under per-party setting permutations.

    With ``flip`` the group also contains per-setting outcome relabelling
    (``A_k -> -A_k``), which covers global sign changes.  Quantum maxima and
    LHV bounds are both invariant under this group.  One party (the one with
    most settings) is canonicalised by sorting its slices; the others are
    enumerated, so the cost is the product of their group sizes.
    """
    c = np.asarray(coefficients)
    if not np.issubdtype(c.dtype, np.integer):
        c = np.round(c * 1e9).astype(np.int64)
    shape = c.shape
    sizes = [math.factorial(m) * (2**m if flip else 1) for m in shape]
    q = int(np.argmax(shape))
    enum_size = math.prod(s for i, s in enumerate(sizes) if i != q)
    if enum_size > max_group:
        raise ValueError(f"canonical form needs {enum_size} group elements (> {max_group})")

    batch = c[None]
    for p in range(len(shape)):
        if p == q:
            continue
        perms, signs = _signed_permutations(shape[p], flip)
        moved = np.moveaxis(batch, p + 1, -1)
        taken = moved[..., perms] * signs
        taken = np.moveaxis(taken, -2, 1)
        taken = taken.reshape((-1,) + taken.shape[2:])
        batch = np.moveaxis(taken, -1, p + 1)

    nb, m = batch.shape[0], shape[q]
    slices = np.moveaxis(batch, q + 1, 1).reshape(nb, m, -1)
    if flip:
        first = np.argmax(slices != 0, axis=2)
        lead = np.take_along_axis(slices, first[..., None], axis=2)[..., 0]
        slices = slices * np.where(lead < 0, -1, 1)[..., None]
    rows = slices.reshape(nb * m, -1)
    owner = np.repeat(np.arange(nb), m)
    order = np.lexsort(tuple(rows[:, i] for i in range(rows.shape[1] - 1, -1, -1)) + (owner,))
    flat = rows[order].reshape(nb, -1)
    best = np.lexsort(tuple(flat[:, i] for i in range(flat.shape[1] - 1, -1, -1)))[0]
    return (shape, q, tuple(flat[best].tolist()))


def equivalence_classes(
    members: Iterable[BellCoefficients], *, flip: bool = True
) -> dict[tuple, list[BellCoefficients]]:
    """Group members whose tensors are related by setting permutations (and flips)."""
    classes: dict[tuple, list[BellCoefficients]] = {}
    for member in members:
        classes.setdefault(canonical_key(member.coefficients, flip=flip), []).append(member)
    return classes


# -- absolute-value forms ----------------------------------------------------


def expand_absolute_blocks(
    blocks: Sequence[np.ndarray], bound=None, labels=None, name: str = "absolute"
) -> list[BellCoefficients]:
    """Linear members of ``sum_i |<block_i>| <= bound``: one per sign vector."""
    out = []
    arrs = [np.asarray(b) for b in blocks]
    for eps in itertools.product((1, -1), repeat=len(arrs)):
        c = sum(e * b for e, b in zip(eps, arrs))
        out.append(
            BellCoefficients(
                c, lhv_bound=bound, labels=labels, descriptor={"kind": name, "signs": list(eps)}
            )
        )
    return out


def composed_442_expansions() -> list[BellCoefficients]:
    """The four linear members of the two-block absolute-value 4x4x2 inequality (bound 4)."""
    chsh = np.array([[1, 1], [1, -1]], dtype=np.int64)
    first = np.zeros((4, 4, 2), dtype=np.int64)
    second = np.zeros((4, 4, 2), dtype=np.int64)
    for g in range(2):
        first[:2, :2, g] = chsh
        second[2:, 2:, g] = (-1) ** (g + 1) * chsh
    return expand_absolute_blocks([first, second], name="composed_442_absolute")


def reduced_332_expansions() -> list[BellCoefficients]:
    """The 32 linear members of the 3x3x2 absolute-value inequality (bound 8).

    Axes carry labels (1, 3, 4) for the first two parties and (1, 2) for
    the third; blocks are ``4 sum_k E_11k`` and, for each (s1, s2),
    ``sum_{i,j in 3,4} sum_k s1**(i-1) s2**(j-1) (-1)**(k-1) E_ijk``.
    """
    head = np.zeros((3, 3, 2), dtype=np.int64)
    head[0, 0, :] = 4
    blocks = [head]
    for s1, s2 in itertools.product((1, -1), repeat=2):
        b = np.zeros((3, 3, 2), dtype=np.int64)
        for i, j, k in itertools.product((3, 4), (3, 4), (1, 2)):
            b[i - 2, j - 2, k - 1] = s1 ** (i - 1) * s2 ** (j - 1) * (-1) ** (k - 1)
        blocks.append(b)
    labels = ((1, 3, 4), (1, 3, 4), (1, 2))
    return expand_absolute_blocks(blocks, labels=labels, name="reduced_332_abs")
