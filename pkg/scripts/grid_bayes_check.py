#!/usr/bin/env python3
"""Fuse a tabulated Gaussian prior with a tabulated Gaussian-shaped bound
and compare the posterior moments and normalizer with the closed form."""

import argparse
import sys

from possfuse.assimilation import (
    GaussBound,
    GaussPrior,
    assimilate,
    assimilate_on_grid,
    moments,
    prior_grid,
    tabulate,
)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--mean", type=float, default=0.0)
    ap.add_argument("--var", type=float, default=1.0)
    ap.add_argument("--z", type=float, default=0.8)
    ap.add_argument("--H", type=float, default=1.0)
    ap.add_argument("--sigma", type=float, default=0.5)
    ap.add_argument("--points", type=int, default=2001)
    args = ap.parse_args(argv)

    prior = GaussPrior(args.mean, args.var)
    bound = GaussBound(args.z, args.H, args.sigma)
    grid = prior_grid(prior, args.points)
    post, weight = assimilate_on_grid(tabulate(prior, grid), bound.on(grid))
    got = moments(post)
    ref = assimilate(prior, bound)

    rows = [
        ("posterior mean", got.mean, ref.posterior.mean),
        ("posterior var", got.var, ref.posterior.var),
        ("weight", weight, ref.weight),
    ]
    print(f"{'':16} {'grid':>14} {'closed form':>14} {'diff':>9}")
    worst = 0.0
    for name, a, b in rows:
        print(f"{name:16} {a:14.10f} {b:14.10f} {abs(a - b):9.1e}")
        worst = max(worst, abs(a - b))
    return 0 if worst < 1e-3 else 1


if __name__ == "__main__":
    sys.exit(main())
