"""Seeded random generators for spaces, constraints, mass functions and maps."""

from __future__ import annotations

import numpy as np

from .constraint import (
    Constraint,
    DiscreteProbability,
    MassFunction,
    canonicalize,
    from_mass_function,
    from_partition,
    normalize_weights,
)
from .funcspace import Dense, PointMap, StateSpace, SubsetMask

KINDS = ("dense", "indicator", "partition", "plausibility")


def space(n: int, prefix: str = "x") -> StateSpace:
    return StateSpace(tuple(f"{prefix}{i}" for i in range(n)))


def subset(rng: np.random.Generator, sp: StateSpace, nonempty: bool = True) -> SubsetMask:
    while True:
        flags = rng.random(sp.size) < 0.5
        if flags.any() or not nonempty:
            return SubsetMask.from_array(sp, flags)


def dense(rng: np.random.Generator, sp: StateSpace, zero_frac: float = 0.2) -> Dense:
    v = rng.random(sp.size)
    v[rng.random(sp.size) < zero_frac] = 0.0
    if not v.any():
        v[rng.integers(sp.size)] = rng.random() + 0.01
    return Dense(sp, v)


def probability(rng: np.random.Generator, sp: StateSpace, zero_frac: float = 0.0) -> DiscreteProbability:
    w = rng.random(sp.size) + 1e-3
    w[rng.random(sp.size) < zero_frac] = 0.0
    if not w.any():
        w[rng.integers(sp.size)] = 1.0
    return DiscreteProbability(sp, normalize_weights(list(w)))


def partition(rng: np.random.Generator, sp: StateSpace) -> list[SubsetMask]:
    k = int(rng.integers(1, sp.size + 1))
    labels = rng.integers(k, size=sp.size)
    return [SubsetMask.from_array(sp, labels == b) for b in range(k) if (labels == b).any()]


def mass_function(rng: np.random.Generator, sp: StateSpace, max_focal: int = 5) -> MassFunction:
    k = int(rng.integers(1, max_focal + 1))
    sets = {}
    for _ in range(k):
        s = subset(rng, sp)
        sets[s.membership] = s
    masses = normalize_weights(list(rng.random(len(sets)) + 1e-3))
    return MassFunction(sp, tuple(zip(sets.values(), masses)))


def constraint(rng: np.random.Generator, sp: StateSpace, max_components: int = 5, kind: str | None = None) -> Constraint:
    """A random mixture of one of the gallery kinds (weights are not normalized for ``dense``)."""
    kind = kind or KINDS[int(rng.integers(len(KINDS)))]
    k = int(rng.integers(1, max_components + 1))
    if kind == "dense":
        return Constraint(sp, tuple((float(rng.random() * 2), dense(rng, sp)) for _ in range(k)))
    if kind == "indicator":
        w = normalize_weights(list(rng.random(k) + 1e-3))
        return Constraint(sp, tuple((wi, Dense.indicator(subset(rng, sp))) for wi in w))
    if kind == "partition":
        blocks = partition(rng, sp)
        return from_partition(blocks, normalize_weights(list(rng.random(len(blocks)) + 1e-3)))
    if kind == "plausibility":
        return from_mass_function(mass_function(rng, sp, max_components))
    raise ValueError(f"unknown kind {kind!r}")


def canonical(rng: np.random.Generator, sp: StateSpace, max_components: int = 4, zero_frac: float = 0.2) -> Constraint:
    """A random canonical mixture whose weights sum to exactly 1.0."""
    k = int(rng.integers(1, max_components + 1))
    raw = Constraint(sp, tuple((float(rng.random() + 1e-3), dense(rng, sp, zero_frac)) for _ in range(k)))
    c = canonicalize(raw)
    return Constraint(sp, tuple(zip(normalize_weights(list(c.weights)), c.fns)))


def point_map(rng: np.random.Generator, domain: StateSpace, codomain: StateSpace, surjective: bool = False) -> PointMap:
    n, m = domain.size, codomain.size
    if surjective:
        if n < m:
            raise ValueError("no surjection onto a larger space")
        table = np.concatenate([rng.permutation(m), rng.integers(m, size=n - m)])
        table = rng.permutation(table)
    else:
        table = rng.integers(m, size=n)
    return PointMap(domain, codomain, tuple(int(t) for t in table))
