"""Pushforward, pullback and marginalization of constraints along point maps."""

from __future__ import annotations

import numpy as np

from .constraint import Constraint, DiscreteProbability
from .funcspace import PointMap, _check_same, compose, fiber_sup

__all__ = ["PointMap", "pushforward", "pullback", "marginalize", "push_probability"]


def pushforward(M: Constraint, xi: PointMap) -> Constraint:
    """Replace every component by its fiber-wise supremum.

    Weights are kept as they are; on a non-surjective map the image
    components are zero off the range and may lose norm, which is left for an
    explicit ``canonicalize``.
    """
    _check_same(M.space, xi.domain)
    return Constraint(xi.codomain, tuple((w, fiber_sup(f, xi)) for w, f in M.components))


def pullback(M: Constraint, xi: PointMap) -> Constraint:
    _check_same(M.space, xi.codomain)
    return Constraint(xi.domain, tuple((w, compose(f, xi)) for w, f in M.components))


def marginalize(M: Constraint, side: str) -> Constraint:
    """Push a constraint on a product space onto the factor named by ``side``."""
    if not M.space.is_product:
        raise ValueError("marginalize needs a constraint on a product space")
    return pushforward(M, PointMap.projection(M.space, side))


def push_probability(p: DiscreteProbability, xi: PointMap) -> DiscreteProbability:
    _check_same(p.space, xi.domain)
    out = np.zeros(xi.codomain.size)
    np.add.at(out, xi.array, p.weights)
    return DiscreteProbability(xi.codomain, out)
