"""JSON documents for spaces, constraints, mass functions, maps and scenarios.

Space::

    {"labels": ["a", "b"]}  |  {"grid": {"lo": -1, "hi": 1, "n": 21}}
    {"product": [<space>, <space>]}

Constraint document::

    {"space": <space>,
     "constraint": [{"weight": 0.5, "fn": "one"},
                    {"weight": 0.5, "fn": {"indicator": ["a"]}}]}

A function is ``"one"``, ``{"dense": [...]}``, ``{"indicator": [labels]}`` or
``{"gauss": {"m": .., "sigma": .., "c": .., "H": ..}}`` (grid spaces only).
"""

from __future__ import annotations

import dataclasses
import json
from pathlib import Path
from typing import Any

import numpy as np

from .assimilation import ScenarioConfig
from .constraint import Constraint, DiscreteProbability, MassFunction, sorted_components
from .errors import DocError, NonTotalMap
from .funcspace import BoundFn, Dense, GaussShape, PointMap, StateSpace, SubsetMask
from .fusion import FusionKernel


def load(path: str | Path) -> tuple[Any, bytes]:
    raw = Path(path).read_bytes()
    try:
        return json.loads(raw), raw
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise DocError(f"{path}: not valid JSON ({exc})") from exc


def dumps(obj: Any) -> str:
    return json.dumps(obj, indent=2, ensure_ascii=False, allow_nan=False) + "\n"


def _label(x):
    if isinstance(x, list):
        return tuple(_label(v) for v in x)
    return x


def _unlabel(x):
    if isinstance(x, tuple):
        return [_unlabel(v) for v in x]
    return x


def _require(doc, key, kind=dict):
    if not isinstance(doc, dict) or key not in doc:
        raise DocError(f"missing field {key!r}")
    val = doc[key]
    if not isinstance(val, kind):
        raise DocError(f"field {key!r} has the wrong type")
    return val


# -- spaces and functions -----------------------------------------------------


def parse_space(doc) -> StateSpace:
    try:
        if isinstance(doc, dict) and "labels" in doc:
            return StateSpace(tuple(_label(x) for x in _require(doc, "labels", list)))
        if isinstance(doc, dict) and "grid" in doc:
            g = _require(doc, "grid")
            return StateSpace.from_grid(float(g["lo"]), float(g["hi"]), int(g["n"]))
        if isinstance(doc, dict) and "product" in doc:
            left, right = _require(doc, "product", list)
            return StateSpace.product(parse_space(left), parse_space(right))
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, DocError):
            raise
        raise DocError(f"bad space: {exc}") from exc
    raise DocError("space must have 'labels', 'grid' or 'product'")


def space_doc(space: StateSpace) -> dict:
    if space.grid is not None:
        lo, hi, n = space.grid
        return {"grid": {"lo": lo, "hi": hi, "n": n}}
    if space.is_product:
        return {"product": [space_doc(space.left), space_doc(space.right)]}
    return {"labels": [_unlabel(x) for x in space.labels]}


def _mask(space: StateSpace, labels) -> SubsetMask:
    if not isinstance(labels, list):
        raise DocError("a set must be a list of labels")
    try:
        return SubsetMask.from_labels(space, (_label(x) for x in labels))
    except KeyError as exc:
        raise DocError(str(exc)) from exc


def parse_fn(space: StateSpace, doc) -> BoundFn:
    try:
        if doc == "one":
            return Dense.one(space)
        if isinstance(doc, dict) and len(doc) == 1:
            (kind, body), = doc.items()
            if kind == "dense":
                return Dense(space, np.asarray(body, dtype=float))
            if kind == "indicator":
                return Dense.indicator(_mask(space, body))
            if kind == "gauss":
                return GaussShape(
                    space,
                    center=float(body["m"]),
                    width=float(body["sigma"]),
                    scale=float(body.get("c", 1.0)),
                    coeff=float(body.get("H", 1.0)),
                )
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, DocError):
            raise
        raise DocError(f"bad function: {exc}") from exc
    raise DocError(f"unrecognised function document {doc!r}")


def fn_doc(f: BoundFn):
    if isinstance(f, GaussShape):
        return {"gauss": {"m": f.center, "sigma": f.width, "c": f.scale, "H": f.coeff}}
    v = f.values()
    if np.all(v == 1.0):
        return "one"
    if np.all((v == 0.0) | (v == 1.0)):
        return {"indicator": [_unlabel(x) for x in SubsetMask.from_array(f.space, v == 1.0).labels]}
    return {"dense": [float(x) for x in v]}


# -- constraints and friends --------------------------------------------------


def parse_constraint(doc, space: StateSpace | None = None) -> Constraint:
    if space is None:
        space = parse_space(_require(doc, "space"))
    comps = _require(doc, "constraint", list)
    out = []
    for c in comps:
        if not isinstance(c, dict) or "fn" not in c:
            raise DocError("each component needs 'weight' and 'fn'")
        try:
            w = float(c.get("weight", 1.0))
        except (TypeError, ValueError) as exc:
            raise DocError(f"bad weight: {exc}") from exc
        out.append((w, parse_fn(space, c["fn"])))
    try:
        return Constraint(space, tuple(out))
    except ValueError as exc:
        raise DocError(str(exc)) from exc


def components_doc(M: Constraint) -> list[dict]:
    return [{"weight": w, "fn": fn_doc(f)} for w, f in sorted_components(M)]


def constraint_doc(M: Constraint) -> dict:
    return {"space": space_doc(M.space), "constraint": components_doc(M)}


def parse_mass(doc, space: StateSpace | None = None) -> MassFunction:
    if space is None:
        space = parse_space(_require(doc, "space"))
    items = _require(doc, "masses", list)
    try:
        focal = tuple((_mask(space, it["set"]), float(it["mass"])) for it in items)
        return MassFunction(space, focal)
    except (KeyError, TypeError) as exc:
        raise DocError(f"bad mass entry: {exc}") from exc
    except DocError:
        raise
    except ValueError as exc:
        raise DocError(str(exc)) from exc


def mass_doc(m: MassFunction) -> list[dict]:
    items = sorted(m.focal, key=lambda sm: (-round(sm[1], 12), sm[0].bits))
    return [{"set": [_unlabel(x) for x in s.labels], "mass": w} for s, w in items]


def parse_probability(doc, space: StateSpace | None = None) -> DiscreteProbability:
    if space is None:
        space = parse_space(_require(doc, "space"))
    p = doc.get("probability") if isinstance(doc, dict) else None
    try:
        if isinstance(p, list):
            return DiscreteProbability(space, np.asarray(p, dtype=float))
        if isinstance(p, dict):
            return DiscreteProbability.from_mapping(space, {_label(k): float(v) for k, v in p.items()})
    except (KeyError, TypeError, ValueError) as exc:
        raise DocError(f"bad probability: {exc}") from exc
    raise DocError("missing field 'probability'")


def parse_map(doc, domain: StateSpace | None = None, codomain: StateSpace | None = None) -> PointMap:
    """``{"domain": <space>?, "codomain": <space>?, "map": [[x, y], ...]}``.

    Missing spaces are taken from the arguments.
    """
    if isinstance(doc, dict) and "domain" in doc:
        domain = parse_space(doc["domain"])
    if isinstance(doc, dict) and "codomain" in doc:
        codomain = parse_space(doc["codomain"])
    if domain is None or codomain is None:
        raise DocError("map document needs 'domain' and 'codomain'")
    pairs = _require(doc, "map", (list, dict))
    if isinstance(pairs, dict):
        pairs = list(pairs.items())
    try:
        return PointMap.from_pairs(domain, codomain, [(_label(a), _label(b)) for a, b in pairs])
    except NonTotalMap:
        raise
    except (TypeError, ValueError) as exc:
        raise DocError(f"bad map: {exc}") from exc


def parse_kernel(doc, space: StateSpace | None = None) -> FusionKernel:
    """``{"space": <space>?, "kernel": [{"pair": [y, y2], "ell": l, "theta": t}, ...]}``."""
    if isinstance(doc, dict) and "space" in doc:
        space = parse_space(doc["space"])
    if space is None:
        raise DocError("kernel document needs a space")
    try:
        entries = {
            (_label(e["pair"][0]), _label(e["pair"][1])): (float(e["ell"]), _label(e["theta"]))
            for e in _require(doc, "kernel", list)
        }
        return FusionKernel.from_table(space, entries)
    except (KeyError, TypeError, ValueError, IndexError) as exc:
        raise DocError(f"bad kernel: {exc}") from exc


def parse_scenario(doc) -> ScenarioConfig:
    if not isinstance(doc, dict):
        raise DocError("scenario must be an object")
    known = {f.name for f in dataclasses.fields(ScenarioConfig)}
    unknown = set(doc) - known
    if unknown:
        raise DocError(f"unknown scenario fields: {sorted(unknown)}")
    try:
        cfg = ScenarioConfig(**doc)
        cfg.validate()
    except (TypeError, ValueError) as exc:
        raise DocError(f"invalid scenario: {exc}") from exc
    return cfg
