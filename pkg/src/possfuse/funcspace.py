"""Bounded non-negative functions on finite state spaces.

A state space is a finite ordered set of labels. Real intervals are
represented by a uniform grid ``(lo, hi, n)`` whose labels are the grid
points; on such spaces a function may also be held in closed Gaussian form
(:class:`GaussShape`), where each grid label stands for its cell
``[x - h/2, x + h/2]`` clipped to ``[lo, hi]``. Suprema of a Gaussian form are
taken over those cells, so the sup over the full grid is the analytic peak.

Everything here is immutable; operations return new objects.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Hashable, Iterable, Mapping

import numpy as np

from .errors import NonTotalMap, SpaceMismatch

TOL = 1e-9


@dataclass(frozen=True, eq=False)
class StateSpace:
    """A finite labelled set, optionally a product or an embedded grid."""

    labels: tuple
    left: StateSpace | None = None
    right: StateSpace | None = None
    grid: tuple[float, float, int] | None = None

    def __post_init__(self):
        if len(self.labels) == 0:
            raise ValueError("a state space needs at least one label")
        if len(set(self.labels)) != len(self.labels):
            raise ValueError("state space labels must be unique")

    @classmethod
    def from_labels(cls, labels: Iterable[Hashable]) -> StateSpace:
        return cls(tuple(labels))

    @classmethod
    def from_grid(cls, lo: float, hi: float, n: int) -> StateSpace:
        if n < 1 or not hi >= lo or (n > 1 and hi == lo):
            raise ValueError(f"invalid grid ({lo}, {hi}, {n})")
        pts = np.linspace(lo, hi, n)
        return cls(tuple(float(x) for x in pts), grid=(float(lo), float(hi), int(n)))

    @classmethod
    def product(cls, left: StateSpace, right: StateSpace) -> StateSpace:
        labels = tuple((a, b) for a in left.labels for b in right.labels)
        return cls(labels, left=left, right=right)

    @property
    def size(self) -> int:
        return len(self.labels)

    @property
    def is_product(self) -> bool:
        return self.left is not None

    @cached_property
    def index(self) -> dict:
        return {lab: i for i, lab in enumerate(self.labels)}

    @cached_property
    def points(self) -> np.ndarray:
        if self.grid is None:
            raise ValueError("space has no grid embedding")
        lo, hi, n = self.grid
        return np.linspace(lo, hi, n)

    @cached_property
    def _hash(self) -> int:
        return hash(self.labels)

    def __hash__(self):
        return self._hash

    def __eq__(self, other):
        if self is other:
            return True
        if not isinstance(other, StateSpace):
            return NotImplemented
        return self._hash == other._hash and self.labels == other.labels

    def __len__(self):
        return self.size

    def __repr__(self):
        if self.grid is not None:
            return "StateSpace(grid=%r)" % (self.grid,)
        if self.size <= 8:
            return "StateSpace(%r)" % (self.labels,)
        return "StateSpace(<%d labels>)" % self.size


def _check_same(a: StateSpace, b: StateSpace):
    if a != b:
        raise SpaceMismatch(f"{a!r} != {b!r}")


@dataclass(frozen=True)
class SubsetMask:
    """A subset of a state space, as one membership flag per label."""

    space: StateSpace
    membership: tuple[bool, ...]

    def __post_init__(self):
        if len(self.membership) != self.space.size:
            raise ValueError("membership length does not match space size")

    @classmethod
    def from_labels(cls, space: StateSpace, labels: Iterable[Hashable]) -> SubsetMask:
        flags = [False] * space.size
        for lab in labels:
            try:
                flags[space.index[lab]] = True
            except KeyError:
                raise KeyError(f"label {lab!r} not in space") from None
        return cls(space, tuple(flags))

    @classmethod
    def from_array(cls, space: StateSpace, arr) -> SubsetMask:
        return cls(space, tuple(bool(v) for v in np.asarray(arr, dtype=bool)))

    @classmethod
    def from_bits(cls, space: StateSpace, bits: int) -> SubsetMask:
        """Subset whose i-th label is present iff bit i of ``bits`` is set."""
        return cls(space, tuple(bool((bits >> i) & 1) for i in range(space.size)))

    @classmethod
    def full(cls, space: StateSpace) -> SubsetMask:
        return cls(space, (True,) * space.size)

    @classmethod
    def empty(cls, space: StateSpace) -> SubsetMask:
        return cls(space, (False,) * space.size)

    @cached_property
    def array(self) -> np.ndarray:
        arr = np.array(self.membership, dtype=bool)
        arr.flags.writeable = False
        return arr

    @property
    def indices(self) -> np.ndarray:
        return np.flatnonzero(self.array)

    @property
    def labels(self) -> tuple:
        return tuple(lab for lab, m in zip(self.space.labels, self.membership) if m)

    @property
    def bits(self) -> int:
        return sum(1 << i for i, m in enumerate(self.membership) if m)

    def is_empty(self) -> bool:
        return not any(self.membership)

    def complement(self) -> SubsetMask:
        return SubsetMask(self.space, tuple(not m for m in self.membership))

    def __and__(self, other: SubsetMask) -> SubsetMask:
        _check_same(self.space, other.space)
        return SubsetMask(self.space, tuple(a and b for a, b in zip(self.membership, other.membership)))

    def __or__(self, other: SubsetMask) -> SubsetMask:
        _check_same(self.space, other.space)
        return SubsetMask(self.space, tuple(a or b for a, b in zip(self.membership, other.membership)))

    def issubset(self, other: SubsetMask) -> bool:
        _check_same(self.space, other.space)
        return all(b or not a for a, b in zip(self.membership, other.membership))

    def __len__(self):
        return sum(self.membership)


class BoundFn:
    """Base class of the two function representations.

    Subclasses provide ``values()`` (the value at every label) and
    ``cell_sups()`` (the supremum attached to every label, which is the value
    itself for tabulated functions).
    """

    space: StateSpace

    def values(self) -> np.ndarray:
        raise NotImplementedError

    def cell_sups(self) -> np.ndarray:
        return self.values()

    def __call__(self, label):
        return float(self.values()[self.space.index[label]])


@dataclass(frozen=True, eq=False)
class Dense(BoundFn):
    space: StateSpace
    data: np.ndarray = field(repr=False)

    def __post_init__(self):
        arr = np.array(self.data, dtype=float)
        if arr.shape != (self.space.size,):
            raise ValueError(f"expected {self.space.size} values, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)) or np.any(arr < 0):
            raise ValueError("bound functions must be finite and non-negative")
        arr.flags.writeable = False
        object.__setattr__(self, "data", arr)

    @classmethod
    def one(cls, space: StateSpace) -> Dense:
        return cls(space, np.ones(space.size))

    @classmethod
    def indicator(cls, mask: SubsetMask) -> Dense:
        return cls(mask.space, mask.array.astype(float))

    @classmethod
    def from_mapping(cls, space: StateSpace, values: Mapping[Hashable, float]) -> Dense:
        arr = np.zeros(space.size)
        for lab, v in values.items():
            arr[space.index[lab]] = v
        return cls(space, arr)

    def values(self) -> np.ndarray:
        return self.data

    def __repr__(self):
        return "Dense(%s)" % np.array2string(self.data, precision=4, threshold=8)


@dataclass(frozen=True, eq=False)
class GaussShape(BoundFn):
    """``x -> scale * exp(-(coeff*x - center)**2 / (2 width**2))`` on a grid space."""

    space: StateSpace
    center: float
    width: float
    scale: float = 1.0
    coeff: float = 1.0

    def __post_init__(self):
        if self.space.grid is None:
            raise ValueError("GaussShape needs a grid-embedded space")
        if not self.width > 0:
            raise ValueError("width must be positive")
        if not 0.0 <= self.scale <= 1.0 + 1e-12:
            raise ValueError("scale must lie in [0, 1]")

    def at(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return self.scale * np.exp(-((self.coeff * x - self.center) ** 2) / (2.0 * self.width**2))

    def values(self) -> np.ndarray:
        return self.at(self.space.points)

    def cell_sups(self) -> np.ndarray:
        lo, hi, n = self.space.grid
        pts = self.space.points
        h = (hi - lo) / (n - 1) if n > 1 else 0.0
        if self.coeff == 0.0:
            return self.at(pts)
        peak = self.center / self.coeff
        left = np.maximum(lo, pts - h / 2)
        right = np.minimum(hi, pts + h / 2)
        return self.at(np.clip(peak, left, right))

    @property
    def peak_in_hull(self) -> bool:
        lo, hi, _ = self.space.grid
        return self.coeff == 0.0 or lo <= self.center / self.coeff <= hi


# -- operations ---------------------------------------------------------------


def sup_norm(f: BoundFn) -> float:
    if isinstance(f, GaussShape):
        lo, hi, _ = f.space.grid
        if f.coeff == 0.0:
            return float(f.at(lo))
        return float(f.at(np.clip(f.center / f.coeff, lo, hi)))
    return float(f.values().max())


def sup_over(f: BoundFn, mask: SubsetMask) -> float:
    """Supremum of ``f`` over ``mask``; 0 for the empty set."""
    _check_same(f.space, mask.space)
    if mask.is_empty():
        return 0.0
    if isinstance(f, GaussShape) and all(mask.membership):
        return sup_norm(f)
    return float(f.cell_sups()[mask.array].max())


def _gauss_product(f: GaussShape, g: GaussShape) -> BoundFn:
    # (k x - c)^2 / w^2 from summing two quadratics A x^2 - 2 B x + C
    pf, pg = 1.0 / f.width**2, 1.0 / g.width**2
    a = f.coeff**2 * pf + g.coeff**2 * pg
    if a == 0.0:
        return Dense(f.space, f.values() * g.values())
    b = f.coeff * f.center * pf + g.coeff * g.center * pg
    c = f.center**2 * pf + g.center**2 * pg
    k = f.coeff if f.coeff == g.coeff else 1.0
    residual = max(c - b * b / a, 0.0)
    return GaussShape(
        f.space,
        center=k * b / a,
        width=abs(k) / math.sqrt(a),
        scale=f.scale * g.scale * math.exp(-residual / 2.0),
        coeff=k,
    )


def pointwise_product(f: BoundFn, g: BoundFn) -> BoundFn:
    _check_same(f.space, g.space)
    if isinstance(f, GaussShape) and isinstance(g, GaussShape):
        return _gauss_product(f, g)
    return Dense(f.space, f.values() * g.values())


def tensor_product(f: BoundFn, g: BoundFn, space: StateSpace | None = None) -> Dense:
    """``(x, y) -> f(x) g(y)`` on the product of the two spaces."""
    if space is None:
        space = StateSpace.product(f.space, g.space)
    elif space.left != f.space or space.right != g.space:
        raise SpaceMismatch("target is not the product of the operand spaces")
    return Dense(space, np.outer(f.values(), g.values()).ravel())


def rescale(f: BoundFn, factor: float) -> BoundFn:
    if isinstance(f, GaussShape) and 0.0 <= f.scale * factor <= 1.0:
        return GaussShape(f.space, f.center, f.width, f.scale * factor, f.coeff)
    return Dense(f.space, f.values() * factor)


def dagger(f: BoundFn, tol: float = 0.0) -> BoundFn:
    """Rescale to unit sup norm; functions with norm <= ``tol`` become constant 1.

    The default ``tol=0`` only treats the exact zero function as null, so
    small but genuine bounds keep their shape.
    """
    n = sup_norm(f)
    if n <= tol:
        return Dense.one(f.space)
    if n == 1.0:
        return f
    if isinstance(f, GaussShape):
        if f.peak_in_hull:
            return GaussShape(f.space, f.center, f.width, 1.0, f.coeff)
        return Dense(f.space, f.values() / n)
    return Dense(f.space, f.values() / n)


def fn_close(f: BoundFn, g: BoundFn, tol: float = TOL) -> bool:
    if f.space != g.space:
        return False
    if f is g:
        return True
    return bool(np.all(np.abs(f.values() - g.values()) <= tol))


# -- maps between spaces ------------------------------------------------------


@dataclass(frozen=True)
class PointMap:
    """A total map between two finite spaces, stored as codomain indices."""

    domain: StateSpace
    codomain: StateSpace
    table: tuple[int, ...]

    def __post_init__(self):
        if len(self.table) != self.domain.size:
            raise NonTotalMap("map table length does not match domain size")
        if any(not 0 <= t < self.codomain.size for t in self.table):
            raise NonTotalMap("map image is not contained in the codomain")

    @classmethod
    def from_pairs(cls, domain: StateSpace, codomain: StateSpace, pairs) -> PointMap:
        if isinstance(pairs, Mapping):
            pairs = pairs.items()
        table: dict[int, int] = {}
        for src, dst in pairs:
            if src not in domain.index:
                raise NonTotalMap(f"unknown domain label {src!r}")
            if dst not in codomain.index:
                raise NonTotalMap(f"{src!r} maps outside the codomain ({dst!r})")
            i = domain.index[src]
            if i in table and table[i] != codomain.index[dst]:
                raise NonTotalMap(f"label {src!r} mapped twice")
            table[i] = codomain.index[dst]
        missing = [domain.labels[i] for i in range(domain.size) if i not in table]
        if missing:
            raise NonTotalMap(f"map is not total, unmapped: {missing[:5]!r}")
        return cls(domain, codomain, tuple(table[i] for i in range(domain.size)))

    @classmethod
    def identity(cls, space: StateSpace) -> PointMap:
        return cls(space, space, tuple(range(space.size)))

    @classmethod
    def projection(cls, space: StateSpace, side: str) -> PointMap:
        """Canonical projection of a product space onto its ``left`` or ``right`` factor."""
        if not space.is_product:
            raise ValueError("projection needs a product space")
        nr = space.right.size
        if side == "left":
            return cls(space, space.left, tuple(i // nr for i in range(space.size)))
        if side == "right":
            return cls(space, space.right, tuple(i % nr for i in range(space.size)))
        raise ValueError(f"side must be 'left' or 'right', got {side!r}")

    @cached_property
    def array(self) -> np.ndarray:
        arr = np.array(self.table, dtype=np.intp)
        arr.flags.writeable = False
        return arr

    @property
    def is_surjective(self) -> bool:
        return len(set(self.table)) == self.codomain.size

    def __call__(self, label):
        return self.codomain.labels[self.table[self.domain.index[label]]]

    def then(self, other: PointMap) -> PointMap:
        """``other ∘ self``."""
        _check_same(self.codomain, other.domain)
        return PointMap(self.domain, other.codomain, tuple(other.table[t] for t in self.table))

    def preimage(self, mask: SubsetMask) -> SubsetMask:
        _check_same(mask.space, self.codomain)
        return SubsetMask(self.domain, tuple(mask.membership[t] for t in self.table))

    def image(self, mask: SubsetMask) -> SubsetMask:
        _check_same(mask.space, self.domain)
        flags = [False] * self.codomain.size
        for t, m in zip(self.table, mask.membership):
            if m:
                flags[t] = True
        return SubsetMask(self.codomain, tuple(flags))

    def fibers(self) -> list[SubsetMask]:
        """Nonempty fibers, in codomain order."""
        out = []
        for j in range(self.codomain.size):
            flags = tuple(t == j for t in self.table)
            if any(flags):
                out.append(SubsetMask(self.domain, flags))
        return out


def fiber_sup(f: BoundFn, xi: PointMap) -> Dense:
    """``y -> sup of f over the fiber of y``; 0 on empty fibers."""
    _check_same(f.space, xi.domain)
    out = np.zeros(xi.codomain.size)
    np.maximum.at(out, xi.array, f.cell_sups())
    return Dense(xi.codomain, out)


def compose(f: BoundFn, xi: PointMap) -> Dense:
    """``x -> f(xi(x))``."""
    _check_same(f.space, xi.codomain)
    return Dense(xi.domain, f.values()[xi.array])

