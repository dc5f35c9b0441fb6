import itertools

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from possfuse import sampling
from possfuse.funcspace import StateSpace, SubsetMask

settings.register_profile(
    "default", deadline=None, max_examples=60, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


def all_masks(space: StateSpace):
    """Every subset, built by itertools rather than bit tricks."""
    for r in range(space.size + 1):
        for combo in itertools.combinations(space.labels, r):
            yield SubsetMask.from_labels(space, combo)


def brute_outer(M, mask) -> float:
    """Sum of weight times max over the set, by explicit loops."""
    total = 0.0
    for w, f in M.components:
        vals = [f(lab) for lab in mask.labels]
        total += w * (max(vals) if vals else 0.0)
    return total


def brute_kernel_associative(K) -> bool:
    """Triple loop over Y with None standing for the absorbing point."""
    n = K.space.size
    phi = None

    def th(a, b):
        if a is phi or b is phi:
            return phi
        t = int(K.theta[a, b])
        return phi if t < 0 else t

    def ell(a, b):
        return 0.0 if a is phi or b is phi else float(K.ell[a, b])

    for a, b, c in itertools.product(range(n), repeat=3):
        if th(th(a, b), c) != th(a, th(b, c)):
            return False
        if abs(ell(a, b) * ell(th(a, b), c) - ell(a, th(b, c)) * ell(b, c)) > 1e-9:
            return False
    return True


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def abc():
    return StateSpace.from_labels("abc")


@pytest.fixture
def four():
    return sampling.space(4)
