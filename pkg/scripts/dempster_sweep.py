#!/usr/bin/env python3
"""Compare fusion of mass-function constraints with Dempster's rule on
random frames and report the worst disagreement per frame size."""

import argparse
import sys
from collections import defaultdict

import numpy as np

from possfuse import sampling
from possfuse.constraint import as_mass_function, from_mass_function
from possfuse.errors import IncompatibleConstraints
from possfuse.fusion import dempster_combine, fuse


def compare(m1, m2):
    out, conflict = dempster_combine(m1, m2)
    R, diag = fuse(from_mass_function(m1), from_mass_function(m2))
    a, b = out.as_dict(), as_mass_function(R).as_dict()
    err = max(abs(a.get(s, 0.0) - b.get(s, 0.0)) for s in set(a) | set(b))
    return err, abs(diag.normalizer - (1.0 - conflict)), conflict


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--pairs", type=int, default=2000)
    ap.add_argument("--max-frame", type=int, default=8)
    ap.add_argument("--max-focal", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    rng = np.random.default_rng(args.seed)
    stats = defaultdict(lambda: {"n": 0, "mass": 0.0, "norm": 0.0, "conflict": 0.0, "total": 0})
    for _ in range(args.pairs):
        n = int(rng.integers(1, args.max_frame + 1))
        sp = sampling.space(n)
        m1 = sampling.mass_function(rng, sp, args.max_focal)
        m2 = sampling.mass_function(rng, sp, args.max_focal)
        s = stats[n]
        s["n"] += 1
        try:
            e_mass, e_norm, k = compare(m1, m2)
        except IncompatibleConstraints:
            s["total"] += 1
            continue
        s["mass"] = max(s["mass"], e_mass)
        s["norm"] = max(s["norm"], e_norm)
        s["conflict"] += k

    print(f"{'|X|':>3} {'pairs':>6} {'total':>6} {'mean K':>7} {'mass err':>9} {'norm err':>9}")
    worst = 0.0
    for n in sorted(stats):
        s = stats[n]
        ok = s["n"] - s["total"]
        print(f"{n:3d} {s['n']:6d} {s['total']:6d} {s['conflict'] / max(ok, 1):7.3f} {s['mass']:9.1e} {s['norm']:9.1e}")
        worst = max(worst, s["mass"], s["norm"])
    print(f"\nworst disagreement {worst:.1e}")
    return 0 if worst < 1e-12 else 1


if __name__ == "__main__":
    sys.exit(main())
