"""Probabilistic constraints held as finite mixtures of bound functions.

A constraint ``M = sum_i a_i * delta_{f_i}`` bounds every measure it
dominates through the outer measure ``A -> sum_i a_i * sup_A f_i``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Hashable, Iterable, Iterator, Mapping, Sequence

import numpy as np

from .errors import SpaceMismatch, SpaceTooLarge, ZeroConstraint
from .funcspace import (
    TOL,
    BoundFn,
    Dense,
    StateSpace,
    SubsetMask,
    _check_same,
    dagger,
    fn_close,
    sup_norm,
    sup_over,
    tensor_product,
)

PRUNE = 1e-12
MAX_EXHAUSTIVE = 20
PAIRWISE_MERGE_MAX = 64


@dataclass(frozen=True, eq=False)
class Constraint:
    space: StateSpace
    components: tuple[tuple[float, BoundFn], ...]

    def __post_init__(self):
        comps = tuple((float(w), f) for w, f in self.components)
        if not comps:
            raise ValueError("a constraint needs at least one component")
        for w, f in comps:
            if not (w >= 0 and math.isfinite(w)):
                raise ValueError(f"component weight must be finite and >= 0, got {w}")
            if f.space != self.space:
                raise SpaceMismatch("component lives on another space")
        object.__setattr__(self, "components", comps)

    @classmethod
    def of(cls, *components: tuple[float, BoundFn]) -> Constraint:
        return cls(components[0][1].space, tuple(components))

    @property
    def weights(self) -> np.ndarray:
        return np.array([w for w, _ in self.components])

    @property
    def fns(self) -> list[BoundFn]:
        return [f for _, f in self.components]

    def __len__(self):
        return len(self.components)

    def __iter__(self) -> Iterator[tuple[float, BoundFn]]:
        return iter(self.components)

    def is_canonical(self, tol: float = TOL) -> bool:
        if abs(math.fsum(self.weights) - 1.0) > tol:
            return False
        return all(abs(sup_norm(f) - 1.0) <= tol for f in self.fns)

    def __repr__(self):
        inner = ", ".join(f"{w:.4g}*{f!r}" for w, f in self.components[:4])
        more = ", ..." if len(self) > 4 else ""
        return f"Constraint([{inner}{more}])"


@dataclass(frozen=True, eq=False)
class DiscreteProbability:
    space: StateSpace
    weights: np.ndarray

    def __post_init__(self):
        arr = np.array(self.weights, dtype=float)
        if arr.shape != (self.space.size,):
            raise ValueError("one weight per label expected")
        if np.any(arr < 0) or not np.all(np.isfinite(arr)):
            raise ValueError("probability weights must be finite and >= 0")
        if abs(math.fsum(arr) - 1.0) > 1e-9:
            raise ValueError(f"probability weights sum to {math.fsum(arr)!r}, not 1")
        arr.flags.writeable = False
        object.__setattr__(self, "weights", arr)

    @classmethod
    def from_mapping(cls, space: StateSpace, probs: Mapping[Hashable, float]) -> DiscreteProbability:
        arr = np.zeros(space.size)
        for lab, v in probs.items():
            arr[space.index[lab]] = v
        return cls(space, arr)

    @classmethod
    def uniform(cls, space: StateSpace) -> DiscreteProbability:
        return cls(space, np.full(space.size, 1.0 / space.size))

    def measure(self, mask: SubsetMask) -> float:
        _check_same(self.space, mask.space)
        return math.fsum(self.weights[mask.array])

    def product(self, other: DiscreteProbability) -> DiscreteProbability:
        space = StateSpace.product(self.space, other.space)
        return DiscreteProbability(space, np.outer(self.weights, other.weights).ravel())


@dataclass(frozen=True, eq=False)
class MassFunction:
    """Dempster-Shafer basic mass assignment over nonempty focal sets."""

    space: StateSpace
    focal: tuple[tuple[SubsetMask, float], ...]

    def __post_init__(self):
        focal = tuple((s, float(m)) for s, m in self.focal)
        seen = set()
        for s, m in focal:
            if s.space != self.space:
                raise SpaceMismatch("focal set lives on another space")
            if s.is_empty():
                raise ValueError("focal sets must be nonempty")
            if not m > 0:
                raise ValueError("focal masses must be positive")
            if s.membership in seen:
                raise ValueError(f"duplicate focal set {s.labels!r}")
            seen.add(s.membership)
        total = math.fsum(m for _, m in focal)
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"masses sum to {total!r}, not 1")
        object.__setattr__(self, "focal", focal)

    @classmethod
    def from_dict(cls, space: StateSpace, masses: Mapping[Iterable[Hashable], float]) -> MassFunction:
        return cls(space, tuple((SubsetMask.from_labels(space, s), m) for s, m in masses.items()))

    def as_dict(self) -> dict[frozenset, float]:
        return {frozenset(s.labels): m for s, m in self.focal}

    def plausibility(self, mask: SubsetMask) -> float:
        return math.fsum(m for s, m in self.focal if not (s & mask).is_empty())

    def belief(self, mask: SubsetMask) -> float:
        return math.fsum(m for s, m in self.focal if s.issubset(mask))


# -- evaluation ---------------------------------------------------------------


def outer_measure(M: Constraint, A: SubsetMask) -> float:
    _check_same(M.space, A.space)
    return math.fsum(w * sup_over(f, A) for w, f in M.components)


def lower_bound(M: Constraint, A: SubsetMask, total: float = 1.0) -> float:
    """Lower bound on ``m(A)`` for any ``m`` dominated by ``M`` with ``m(X) = total``."""
    return max(0.0, total - outer_measure(M, A.complement()))


def norm(M: Constraint) -> float:
    return math.fsum(w * sup_norm(f) for w, f in M.components)


def _subset_table(values: np.ndarray, op) -> np.ndarray:
    """Reduce ``values`` over every subset, indexed by bitmask (bit i = label i)."""
    n = len(values)
    table = np.zeros(1 << n)
    for k in range(n):
        half = 1 << k
        table[half : 2 * half] = op(table[:half], values[k])
    return table


def outer_measure_table(M: Constraint) -> np.ndarray:
    """Outer measure of every subset, indexed by bitmask."""
    n = M.space.size
    if n > MAX_EXHAUSTIVE:
        raise SpaceTooLarge(f"2^{n} subsets is too many to enumerate")
    table = np.zeros(1 << n)
    for w, f in M.components:
        table += w * _subset_table(f.cell_sups(), np.maximum)
    return table


def probability_table(p: DiscreteProbability) -> np.ndarray:
    if p.space.size > MAX_EXHAUSTIVE:
        raise SpaceTooLarge(f"2^{p.space.size} subsets is too many to enumerate")
    return _subset_table(p.weights, np.add)


def axiom_violations(M: Constraint, tol: float = TOL) -> dict[str, int]:
    """Count breaches of the outer-measure axioms over all subsets and subset pairs.

    Monotonicity is checked on every pair ``A ⊆ B`` and sub-additivity on every
    pair ``(A, B)``, so this is limited to spaces of at most 10 labels.
    """
    n = M.space.size
    if n > 10:
        raise SpaceTooLarge("pairwise axiom check is limited to 10 labels")
    mu = outer_measure_table(M)
    idx = np.arange(1 << n)
    a, b = idx[:, None], idx[None, :]
    subset = (a & b) == a
    mono = subset & (mu[:, None] > mu[None, :] + tol)
    union = mu[a | b] > mu[:, None] + mu[None, :] + tol
    return {
        "empty": int(abs(mu[0]) > tol),
        "monotonicity": int(mono.sum()),
        "subadditivity": int(union.sum()),
    }


def dominates(
    M: Constraint,
    p: DiscreteProbability,
    tol: float = TOL,
    samples: int | None = None,
    seed: int | None = None,
) -> bool:
    """Whether ``p(B) <= mu_M(B)`` for every subset and ``p(X) = mu_M(X)``.

    Spaces above 20 labels need ``samples``: that many random subsets are
    checked instead, so ``True`` then only means no counterexample was found.
    """
    _check_same(M.space, p.space)
    full = SubsetMask.full(M.space)
    if abs(outer_measure(M, full) - 1.0) > tol:
        return False
    if M.space.size <= MAX_EXHAUSTIVE:
        return bool(np.all(probability_table(p) <= outer_measure_table(M) + tol))
    if samples is None:
        raise SpaceTooLarge(
            f"{M.space.size} labels: exhaustive check impossible, pass samples= for a sampled check"
        )
    rng = np.random.default_rng(seed)
    for _ in range(samples):
        mask = SubsetMask.from_array(M.space, rng.random(M.space.size) < 0.5)
        if p.measure(mask) > outer_measure(M, mask) + tol:
            return False
    return True


# -- canonical form -----------------------------------------------------------


def merge_duplicates(components: Sequence[tuple[float, BoundFn]], tol: float = TOL) -> list[tuple[float, BoundFn]]:
    """Add up the weights of components whose functions agree within ``tol``.

    The first occurrence keeps its position and its function object. Above
    ``PAIRWISE_MERGE_MAX`` components, functions are bucketed on values
    quantized to ``tol`` instead of compared pairwise.
    """
    if len(components) > PAIRWISE_MERGE_MAX:
        buckets: dict[bytes, list] = {}
        for w, f in components:
            key = np.round(f.values() / tol).astype(np.int64).tobytes()
            buckets.setdefault(key, [[], f])[0].append(w)
        return [(math.fsum(ws), f) for ws, f in buckets.values()]
    merged: list[list] = []
    for w, f in components:
        for slot in merged:
            if fn_close(slot[1], f, tol):
                slot[0].append(w)
                break
        else:
            merged.append([[w], f])
    return [(math.fsum(ws), f) for ws, f in merged]


def normalize_weights(weights: Sequence[float]) -> list[float]:
    """Scale weights to sum to one, so that ``math.fsum`` of the result is exactly 1.0."""
    total = math.fsum(weights)
    out = [w / total for w in weights]
    big = max(range(len(out)), key=out.__getitem__)
    for _ in range(4):
        residual = 1.0 - math.fsum(out)
        if residual == 0.0:
            break
        out[big] += residual
    return out


def canonicalize(M: Constraint, prune: float = PRUNE, tol: float = TOL) -> Constraint:
    """Move each component's sup norm into its weight.

    Components whose new weight falls below ``prune`` are dropped and
    functions equal within ``tol`` are merged. The norm is unchanged, so the
    result is canonical exactly when ``norm(M) == 1``.
    """
    comps = []
    for w, f in M.components:
        n = sup_norm(f)
        if w * n < prune:
            continue
        comps.append((w * n, dagger(f)))
    if not comps:
        raise ZeroConstraint("all components vanished under canonicalization")
    return Constraint(M.space, tuple(merge_duplicates(comps, tol)))


def independent_product(M: Constraint, N: Constraint) -> Constraint:
    space = StateSpace.product(M.space, N.space)
    return Constraint(
        space,
        tuple((a * b, tensor_product(f, g, space)) for a, f in M.components for b, g in N.components),
    )


def sort_key(component: tuple[float, BoundFn]):
    w, f = component
    return (-round(w, 12), tuple(np.round(f.values(), 12)))


def sorted_components(M: Constraint) -> list[tuple[float, BoundFn]]:
    """Components by descending weight, ties broken by function values."""
    return sorted(M.components, key=sort_key)


def equivalent(M: Constraint, N: Constraint, tol: float = TOL) -> bool:
    """Same mixture up to reordering and merging of equal functions."""
    if M.space != N.space:
        return False
    a = merge_duplicates(M.components, tol)
    b = merge_duplicates(N.components, tol)
    if len(a) != len(b):
        return False
    unused = list(b)
    for w, f in a:
        for k, (v, g) in enumerate(unused):
            if fn_close(f, g, tol) and abs(w - v) <= tol:
                del unused[k]
                break
        else:
            return False
    return True


# -- constructors -------------------------------------------------------------


def uninformative(space: StateSpace) -> Constraint:
    return Constraint(space, ((1.0, Dense.one(space)),))


def from_indicator(A: SubsetMask) -> Constraint:
    return Constraint(A.space, ((1.0, Dense.indicator(A)),))


def from_possibility(f: BoundFn) -> Constraint:
    return Constraint(f.space, ((1.0, dagger(f)),))


def from_partition(blocks: Sequence[SubsetMask], q: Sequence[float]) -> Constraint:
    """``sum_B q(B) delta_{1_B}`` over the blocks of a partition."""
    if len(blocks) != len(q) or not blocks:
        raise ValueError("need one weight per block")
    space = blocks[0].space
    cover = np.zeros(space.size, dtype=int)
    for b in blocks:
        if b.is_empty():
            raise ValueError("partition blocks must be nonempty")
        cover += b.array
    if np.any(cover != 1):
        raise ValueError("blocks do not form a partition of the space")
    if abs(math.fsum(q) - 1.0) > 1e-9 or min(q) < 0:
        raise ValueError("block weights must be a probability vector")
    return Constraint(space, tuple((float(w), Dense.indicator(b)) for b, w in zip(blocks, q)))


def from_probability(p: DiscreteProbability) -> Constraint:
    """Constraint supported on singleton indicators, one per label with positive mass."""
    comps = []
    for i, w in enumerate(p.weights):
        if w > 0:
            e = np.zeros(p.space.size)
            e[i] = 1.0
            comps.append((float(w), Dense(p.space, e)))
    return Constraint(p.space, tuple(comps))


def from_mass_function(m: MassFunction) -> Constraint:
    return Constraint(m.space, tuple((w, Dense.indicator(s)) for s, w in m.focal))


# -- read-back ----------------------------------------------------------------


def _indicator_mask(f: BoundFn, tol: float) -> SubsetMask | None:
    v = f.values()
    ones = np.abs(v - 1.0) <= tol
    if np.all(ones | (np.abs(v) <= tol)) and ones.any():
        return SubsetMask.from_array(f.space, ones)
    return None


def as_mass_function(M: Constraint, tol: float = TOL) -> MassFunction:
    """Read back a constraint made only of indicator components."""
    acc: dict[tuple, list[float]] = {}
    masks = {}
    for w, f in M.components:
        mask = _indicator_mask(f, tol)
        if mask is None:
            raise ValueError("constraint has a non-indicator component")
        acc.setdefault(mask.membership, []).append(w)
        masks[mask.membership] = mask
    return MassFunction(M.space, tuple((masks[k], math.fsum(ws)) for k, ws in acc.items()))


def as_probability(M: Constraint, tol: float = TOL) -> DiscreteProbability:
    """Read back a constraint supported on singleton indicators."""
    out = np.zeros(M.space.size)
    for w, f in M.components:
        mask = _indicator_mask(f, tol)
        if mask is None or len(mask) != 1:
            raise ValueError("constraint is not supported on singletons")
        out[mask.indices[0]] += w
    return DiscreteProbability(M.space, out)
