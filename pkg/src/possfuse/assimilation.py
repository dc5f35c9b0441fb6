"""Scalar Gaussian assimilation with Gaussian-shaped observation bounds.

An observation ``z`` seen through a sensor with coefficient ``H`` is turned
into the bound ``x -> exp(-(H x - z)^2 / (2 sigma^2))``, whose peak is 1.
Fusing it with a Gaussian prior keeps the Kalman recursion; the fusion
normalizer is the association weight ``(sigma/s) exp(-(H m - z)^2 / (2 s^2))``
with ``s^2 = H^2 P + sigma^2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .constraint import Constraint, DiscreteProbability, as_probability, from_probability
from .funcspace import BoundFn, GaussShape, StateSpace
from .fusion import fuse

GRID_POINTS = 2001
GRID_SPAN = 10.0


@dataclass(frozen=True)
class GaussPrior:
    mean: float
    var: float

    def __post_init__(self):
        if not self.var > 0:
            raise ValueError(f"prior variance must be positive, got {self.var}")

    @property
    def std(self) -> float:
        return math.sqrt(self.var)


@dataclass(frozen=True)
class GaussBound:
    z: float
    H: float = 1.0
    sigma: float = 1.0

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError(f"bound width must be positive, got {self.sigma}")

    def __call__(self, x):
        return np.exp(-((self.H * np.asarray(x, dtype=float) - self.z) ** 2) / (2.0 * self.sigma**2))

    def on(self, space: StateSpace) -> GaussShape:
        return GaussShape(space, center=self.z, width=self.sigma, scale=1.0, coeff=self.H)


@dataclass(frozen=True)
class AssimilationResult:
    posterior: GaussPrior
    weight: float


def innovation_var(prior: GaussPrior, bound: GaussBound) -> float:
    return bound.H**2 * prior.var + bound.sigma**2


def assimilate(prior: GaussPrior, bound: GaussBound) -> AssimilationResult:
    s2 = innovation_var(prior, bound)
    resid = bound.z - bound.H * prior.mean
    weight = bound.sigma / math.sqrt(s2) * math.exp(-(resid**2) / (2.0 * s2))
    gain = prior.var * bound.H / s2
    posterior = GaussPrior(prior.mean + gain * resid, (1.0 - gain * bound.H) * prior.var)
    return AssimilationResult(posterior, weight)


def gaussian_likelihood(prior: GaussPrior, bound: GaussBound) -> float:
    """The usual Bayes denominator: density of ``z`` under ``N(H m, s^2)``."""
    s2 = innovation_var(prior, bound)
    return math.exp(-((bound.H * prior.mean - bound.z) ** 2) / (2.0 * s2)) / math.sqrt(2.0 * math.pi * s2)


def prior_grid(prior: GaussPrior, n: int = GRID_POINTS, span: float = GRID_SPAN) -> StateSpace:
    """Uniform grid over ``mean +- span * std``."""
    return StateSpace.from_grid(prior.mean - span * prior.std, prior.mean + span * prior.std, n)


def tabulate(prior: GaussPrior, space: StateSpace) -> DiscreteProbability:
    x = space.points
    w = np.exp(-((x - prior.mean) ** 2) / (2.0 * prior.var))
    return DiscreteProbability(space, w / w.sum())


def quadrature_weight(prior: GaussPrior, bound: GaussBound, n: int = GRID_POINTS, span: float = GRID_SPAN) -> float:
    """Grid evaluation of the integral of the bound against the prior."""
    p = tabulate(prior, prior_grid(prior, n, span))
    return math.fsum(bound(p.space.points) * p.weights)


def assimilate_on_grid(prior: DiscreteProbability, bound: BoundFn) -> tuple[DiscreteProbability, float]:
    """Exact discrete Bayes update, obtained by fusing the prior with ``delta_bound``.

    Raises :class:`~possfuse.errors.IncompatibleConstraints` when the bound
    vanishes on the support of the prior.
    """
    post, diag = fuse(from_probability(prior), Constraint(bound.space, ((1.0, bound),)))
    return as_probability(post), diag.normalizer


def moments(p: DiscreteProbability) -> GaussPrior:
    x = p.space.points
    mean = float(np.dot(x, p.weights))
    return GaussPrior(mean, float(np.dot((x - mean) ** 2, p.weights)))


# -- scenarios ----------------------------------------------------------------


@dataclass
class ScenarioConfig:
    """A scalar linear-Gaussian hidden Markov model and its sensor.

    With ``cell_width`` set, the sensor only reports the cell of width
    ``cell_width`` containing ``H x + noise``; the cell center is then
    assimilated with a bound of width ``bound_sigma`` (default: the standard
    deviation of a uniform law on the cell, ``cell_width / sqrt(12)``).
    """

    steps: int
    init_mean: float = 0.0
    init_var: float = 1.0
    a: float = 1.0
    q: float = 0.0
    H: float = 1.0
    sigma: float = 1.0
    cell_width: float | None = None
    bound_sigma: float | None = None
    observations: list[float] | None = None
    seed: int = 0

    def validate(self) -> None:
        if int(self.steps) != self.steps or self.steps < 1:
            raise ValueError("steps must be a positive integer")
        if not self.init_var > 0:
            raise ValueError("init_var must be positive")
        if not self.q >= 0:
            raise ValueError("process noise q must be >= 0")
        if self.cell_width is not None and not self.cell_width > 0:
            raise ValueError("cell_width must be positive")
        if self.cell_width is None and not self.sigma > 0:
            raise ValueError("sigma must be positive without a cell width")
        if self.sigma < 0:
            raise ValueError("sigma must be >= 0")
        if self.bound_sigma is not None and not self.bound_sigma > 0:
            raise ValueError("bound_sigma must be positive")
        if self.observations is not None and len(self.observations) != self.steps:
            raise ValueError(f"{len(self.observations)} observations for {self.steps} steps")
        for name in ("init_mean", "init_var", "a", "q", "H", "sigma"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")

    @property
    def width(self) -> float:
        if self.bound_sigma is not None:
            return self.bound_sigma
        if self.cell_width is not None:
            return self.cell_width / math.sqrt(12.0)
        return self.sigma


@dataclass(frozen=True)
class StepRecord:
    step: int
    prior: GaussPrior
    raw: float
    cell: tuple[float, float] | None
    bound: GaussBound
    result: AssimilationResult
    oracle_weight: float | None = field(default=None)


def predict(post: GaussPrior, a: float, q: float) -> GaussPrior:
    return GaussPrior(a * post.mean, a * a * post.var + q)


def run_scenario(cfg: ScenarioConfig, oracle: bool = False) -> list[StepRecord]:
    """Alternate prediction and assimilation for ``cfg.steps`` steps.

    Observations come from ``cfg.observations`` or are simulated from the
    model with ``numpy.random.default_rng(cfg.seed)``.
    """
    cfg.validate()
    rng = np.random.default_rng(cfg.seed)
    x = rng.normal(cfg.init_mean, math.sqrt(cfg.init_var))
    post = GaussPrior(cfg.init_mean, cfg.init_var)
    records = []
    for n in range(cfg.steps):
        prior = predict(post, cfg.a, cfg.q)
        if cfg.observations is not None:
            y = float(cfg.observations[n])
        else:
            x = cfg.a * x + (rng.normal(0.0, math.sqrt(cfg.q)) if cfg.q > 0 else 0.0)
            y = cfg.H * x + (rng.normal(0.0, cfg.sigma) if cfg.sigma > 0 else 0.0)
        cell = None
        z = y
        if cfg.cell_width is not None:
            k = math.floor(y / cfg.cell_width)
            cell = (k * cfg.cell_width, (k + 1) * cfg.cell_width)
            z = (k + 0.5) * cfg.cell_width
        bound = GaussBound(z, cfg.H, cfg.width)
        result = assimilate(prior, bound)
        ow = quadrature_weight(prior, bound) if oracle else None
        records.append(StepRecord(n, prior, y, cell, bound, result, ow))
        post = result.posterior
    return records
