"""Fusion of independent constraints and its Dempster-Shafer special case.

``fuse`` combines two constraints on the same state space by multiplying
component functions pairwise and renormalizing; ``general_fuse`` does the
same over an arbitrary finite set ``Y`` whose elements are combined by a
kernel ``(ell, theta)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Hashable, Mapping, Sequence

import numpy as np

from .constraint import (
    PRUNE,
    Constraint,
    MassFunction,
    equivalent,
    merge_duplicates,
    normalize_weights,
)
from .errors import IncompatibleConstraints, KernelClosureError, KernelNotAssociative
from .funcspace import (
    TOL,
    BoundFn,
    Dense,
    StateSpace,
    _check_same,
    dagger,
    pointwise_product,
    sup_norm,
)

VERIFY_KERNEL_MAX = 64


@dataclass(frozen=True)
class FusionDiagnostics:
    normalizer: float
    conflict: float | None
    component_count_before_prune: int


def _convolve(
    P: Constraint,
    Q: Constraint,
    combine: Callable[[BoundFn, BoundFn], BoundFn],
    prune: float,
    tol: float,
) -> tuple[Constraint, FusionDiagnostics]:
    raw = []
    for a, f in P.components:
        for b, g in Q.components:
            h = combine(f, g)
            n = sup_norm(h)
            if n > 0.0:
                raw.append((a * b * n, h))
    normalizer = math.fsum(w for w, _ in raw)
    if normalizer <= tol:
        raise IncompatibleConstraints(f"incompatible constraints: normalizer {normalizer:.3g} is zero")
    kept = [(w, dagger(h)) for w, h in raw if w / normalizer >= prune]
    merged = merge_duplicates(kept, tol)
    weights = normalize_weights([w for w, _ in merged])
    conflict = None
    if P.is_canonical(tol) and Q.is_canonical(tol):
        conflict = max(0.0, 1.0 - normalizer)
    diag = FusionDiagnostics(normalizer, conflict, len(P) * len(Q))
    return Constraint(P.space, tuple(zip(weights, (f for _, f in merged)))), diag


def fuse(P: Constraint, Q: Constraint, prune: float = PRUNE, tol: float = TOL) -> tuple[Constraint, FusionDiagnostics]:
    """Posterior constraint from two independent sources on the same space.

    Raises :class:`IncompatibleConstraints` when ``||P * Q||`` is zero.
    """
    _check_same(P.space, Q.space)
    return _convolve(P, Q, pointwise_product, prune, tol)


def dempster_combine(m: MassFunction, m2: MassFunction, tol: float = TOL) -> tuple[MassFunction, float]:
    """Dempster's rule, computed directly on the focal sets.

    Returns the combined mass function and the conflict (mass on empty
    intersections).
    """
    _check_same(m.space, m2.space)
    parts: dict[frozenset, list[float]] = {}
    clash = []
    for A, a in m.as_dict().items():
        for B, b in m2.as_dict().items():
            inter = A & B
            if inter:
                parts.setdefault(inter, []).append(a * b)
            else:
                clash.append(a * b)
    normalizer = math.fsum(x for xs in parts.values() for x in xs)
    conflict = math.fsum(clash)
    if normalizer <= tol:
        raise IncompatibleConstraints("incompatible mass functions: total conflict")
    masses = {s: math.fsum(xs) / normalizer for s, xs in parts.items()}
    return MassFunction.from_dict(m.space, masses), conflict


# -- general fusion over a kernel ---------------------------------------------


@dataclass(frozen=True, eq=False)
class FusionKernel:
    """Combination rule on a finite set: potential ``ell`` and partial map ``theta``.

    ``theta[i, j] == -1`` marks pairs outside the domain of ``theta``; ``ell``
    must vanish there.
    """

    space: StateSpace
    ell: np.ndarray
    theta: np.ndarray

    def __post_init__(self):
        n = self.space.size
        ell = np.array(self.ell, dtype=float)
        theta = np.array(self.theta, dtype=np.intp)
        if ell.shape != (n, n) or theta.shape != (n, n):
            raise ValueError(f"kernel tables must be {n}x{n}")
        if np.any(ell < 0) or np.any(ell > 1):
            raise ValueError("ell must take values in [0, 1]")
        if np.any(theta < -1) or np.any(theta >= n):
            raise ValueError("theta refers to an unknown point")
        if np.any(ell[theta < 0] != 0):
            raise ValueError("ell must vanish where theta is undefined")
        if set(theta[theta >= 0].tolist()) != set(range(n)):
            raise ValueError("theta must be surjective")
        ell.flags.writeable = False
        theta.flags.writeable = False
        object.__setattr__(self, "ell", ell)
        object.__setattr__(self, "theta", theta)

    @classmethod
    def diagonal(cls, space: StateSpace) -> FusionKernel:
        """``ell(x, x') = 1{x = x'}`` and ``theta(x, x) = x``."""
        n = space.size
        theta = np.full((n, n), -1)
        np.fill_diagonal(theta, np.arange(n))
        return cls(space, np.eye(n), theta)

    @classmethod
    def from_table(cls, space: StateSpace, entries: Mapping[tuple[Hashable, Hashable], tuple[float, Hashable]]) -> FusionKernel:
        """Build from ``{(y, y2): (ell, theta)}``; pairs not listed are undefined."""
        n = space.size
        ell = np.zeros((n, n))
        theta = np.full((n, n), -1)
        for (y, y2), (l, t) in entries.items():
            i, j = space.index[y], space.index[y2]
            ell[i, j] = l
            theta[i, j] = space.index[t]
        return cls(space, ell, theta)


def odot(f: BoundFn, g: BoundFn, K: FusionKernel) -> Dense:
    """``y -> sup over theta^-1(y) of ell(a, b) f(a) g(b)``; 0 off the range."""
    _check_same(f.space, K.space)
    _check_same(g.space, K.space)
    vals = K.ell * np.outer(f.values(), g.values())
    defined = K.theta >= 0
    out = np.zeros(K.space.size)
    np.maximum.at(out, K.theta[defined], vals[defined])
    return Dense(K.space, out)


def check_kernel_associativity(K: FusionKernel, tol: float = TOL) -> bool:
    """Associativity of theta (extended by an absorbing point) and of the ell cocycle."""
    n = K.space.size
    phi = n
    th = np.full((n + 1, n + 1), phi, dtype=np.intp)
    th[:n, :n] = np.where(K.theta >= 0, K.theta, phi)
    ell = np.zeros((n + 1, n + 1))
    ell[:n, :n] = K.ell

    y = np.arange(n)
    t12 = th[:n, :n]
    left_t = th[t12[:, :, None], y[None, None, :]]
    right_t = th[y[:, None, None], t12[None, :, :]]
    if np.any(left_t != right_t):
        return False
    left_l = K.ell[:, :, None] * ell[t12[:, :, None], y[None, None, :]]
    right_l = ell[y[:, None, None], t12[None, :, :]] * K.ell[None, :, :]
    return bool(np.all(np.abs(left_l - right_l) <= tol))


def general_fuse(
    P: Constraint,
    Q: Constraint,
    K: FusionKernel,
    verify: bool = True,
    prune: float = PRUNE,
    tol: float = TOL,
) -> tuple[Constraint, FusionDiagnostics]:
    """Fuse two constraints on ``Y`` with ``odot`` in place of the pointwise product.

    With ``verify`` the kernel is checked for associativity first (on sets of
    at most 64 points; larger kernels are taken on trust).
    """
    _check_same(P.space, Q.space)
    _check_same(P.space, K.space)
    if verify and K.space.size <= VERIFY_KERNEL_MAX and not check_kernel_associativity(K, tol):
        raise KernelNotAssociative("kernel fails the associativity conditions")
    return _convolve(P, Q, lambda f, g: odot(f, g, K), prune, tol)


def second_order_kernel(points: Sequence[Constraint], tol: float = TOL) -> FusionKernel:
    """Kernel on a finite set of constraints: ``ell = ||P * Q||`` and ``theta = P ⋆ Q``.

    Raises :class:`KernelClosureError` if some fusion lands outside ``points``.
    """
    n = len(points)
    space = StateSpace(tuple(f"P{i}" for i in range(n)))
    ell = np.zeros((n, n))
    theta = np.full((n, n), -1)
    for i, P in enumerate(points):
        for j, Q in enumerate(points):
            try:
                R, diag = fuse(P, Q, tol=tol)
            except IncompatibleConstraints:
                continue
            for k, S in enumerate(points):
                if equivalent(R, S, tol):
                    theta[i, j] = k
                    ell[i, j] = min(diag.normalizer, 1.0)
                    break
            else:
                raise KernelClosureError(f"P{i} ⋆ P{j} is not among the given points")
    try:
        return FusionKernel(space, ell, theta)
    except ValueError as exc:
        raise KernelClosureError(str(exc)) from exc
