import csv
import json
import math

import pytest

from possfuse.cli import main

ABC = {"labels": ["a", "b", "c"]}


def write(tmp_path, name, obj):
    p = tmp_path / name
    p.write_text(json.dumps(obj))
    return str(p)


def run(tmp_path, *argv, out="out.json"):
    path = tmp_path / out
    code = main([*argv, "--out", str(path)])
    report = json.loads(path.read_text()) if path.exists() else None
    return code, report


def indicator_doc(labels, space=ABC):
    return {"space": space, "constraint": [{"weight": 1, "fn": {"indicator": labels}}]}


class TestFuse:
    def test_overlapping_indicators(self, tmp_path):
        a = write(tmp_path, "a.json", indicator_doc(["a", "b"]))
        b = write(tmp_path, "b.json", indicator_doc(["b", "c"]))
        code, rep = run(tmp_path, "fuse", a, b)
        assert code == 0
        assert rep["operation"] == "fuse"
        assert rep["result"]["constraint"] == [{"weight": 1.0, "fn": {"indicator": ["b"]}}]
        assert rep["diagnostics"]["normalizer"] == 1.0
        assert rep["diagnostics"]["conflict"] == 0.0

    def test_identity_is_byte_identical(self, tmp_path):
        doc = {
            "space": ABC,
            "constraint": [
                {"weight": 0.3, "fn": {"dense": [1.0, 0.25, 0.5]}},
                {"weight": 0.7, "fn": {"indicator": ["c"]}},
            ],
        }
        a = write(tmp_path, "a.json", doc)
        one = write(tmp_path, "one.json", {"space": ABC, "constraint": [{"weight": 1, "fn": "one"}]})
        # the fused result is already canonical, so fusing it again must not move a byte
        code, rep = run(tmp_path, "fuse", a, one, out="r1.json")
        assert code == 0
        code, rep2 = run(tmp_path, "fuse", one, a, out="r2.json")
        assert rep["result"] == rep2["result"]
        r = write(tmp_path, "r.json", rep["result"])
        run(tmp_path, "fuse", r, one, out="r3.json")
        t1 = json.dumps(json.loads((tmp_path / "r1.json").read_text())["result"])
        t3 = json.dumps(json.loads((tmp_path / "r3.json").read_text())["result"])
        assert t1 == t3
        assert [c["weight"] for c in rep["result"]["constraint"]] == [0.7, 0.3]

    def test_disjoint_is_incompatible(self, tmp_path, capsys):
        a = write(tmp_path, "a.json", indicator_doc(["a"]))
        b = write(tmp_path, "b.json", indicator_doc(["b", "c"]))
        code, rep = run(tmp_path, "fuse", a, b)
        assert code == 4 and rep is None
        assert "incompatible" in capsys.readouterr().err

    def test_space_mismatch(self, tmp_path):
        a = write(tmp_path, "a.json", indicator_doc(["a"]))
        b = write(tmp_path, "b.json", indicator_doc(["u"], {"labels": ["u", "v"]}))
        assert run(tmp_path, "fuse", a, b)[0] == 3

    @pytest.mark.parametrize(
        "content",
        ["not json", json.dumps({"space": ABC}), json.dumps({"space": ABC, "constraint": [{"weight": 1, "fn": {"dense": [1, 2]}}]})],
    )
    def test_parse_errors(self, tmp_path, content):
        (tmp_path / "bad.json").write_text(content)
        a = write(tmp_path, "a.json", indicator_doc(["a"]))
        assert run(tmp_path, "fuse", a, str(tmp_path / "bad.json"))[0] == 2

    def test_missing_file(self, tmp_path):
        assert run(tmp_path, "fuse", "nope.json", "nope2.json")[0] == 2

    def test_kernel(self, tmp_path):
        Y = {"labels": [0, 1, 2]}
        kern = {"space": Y, "kernel": [{"pair": [i, j], "ell": 1, "theta": (i + j) % 3} for i in range(3) for j in range(3)]}
        bad = {"space": Y, "kernel": [{"pair": [i, j], "ell": 1, "theta": (i - j) % 3} for i in range(3) for j in range(3)]}
        a = write(tmp_path, "a.json", indicator_doc([1], Y))
        b = write(tmp_path, "b.json", indicator_doc([2], Y))
        code, rep = run(tmp_path, "fuse", a, b, "--kernel", write(tmp_path, "k.json", kern))
        assert code == 0 and rep["operation"] == "general_fuse"
        assert rep["result"]["constraint"][0]["fn"] == {"indicator": [0]}
        k2 = write(tmp_path, "k2.json", bad)
        assert run(tmp_path, "fuse", a, b, "--kernel", k2)[0] == 2
        assert run(tmp_path, "fuse", a, b, "--kernel", k2, "--no-verify-kernel")[0] == 0

    def test_gauss_component(self, tmp_path):
        grid = {"grid": {"lo": -5, "hi": 5, "n": 101}}
        g = {"space": grid, "constraint": [{"weight": 1, "fn": {"gauss": {"m": 0.0, "sigma": 1.0, "c": 1.0, "H": 1.0}}}]}
        h = {"space": grid, "constraint": [{"weight": 1, "fn": {"gauss": {"m": 1.0, "sigma": 1.0, "c": 1.0, "H": 1.0}}}]}
        code, rep = run(tmp_path, "fuse", write(tmp_path, "g.json", g), write(tmp_path, "h.json", h))
        assert code == 0
        # product of two unit-width bounds 1 apart peaks at exp(-1/4)
        assert rep["diagnostics"]["normalizer"] == pytest.approx(math.exp(-0.25), abs=1e-12)

    def test_tolerance_env(self, tmp_path, monkeypatch):
        a = write(tmp_path, "a.json", indicator_doc(["a"]))
        monkeypatch.setenv("POSSFUSE_TOLERANCE", "oops")
        assert run(tmp_path, "fuse", a, a)[0] == 2
        monkeypatch.setenv("POSSFUSE_TOLERANCE", "1e-6")
        assert run(tmp_path, "fuse", a, a)[0] == 0


MAP = {"domain": {"labels": [1, 2, 3, 4]}, "codomain": {"labels": ["a", "b"]}, "map": [[1, "a"], [2, "a"], [3, "b"], [4, "b"]]}


class TestTransport:
    def test_push_worked_example(self, tmp_path):
        doc = {"space": MAP["domain"], "constraint": [{"weight": 1, "fn": {"dense": [0.2, 0.9, 0.4, 0.1]}}]}
        code, rep = run(tmp_path, "push", write(tmp_path, "d.json", doc), write(tmp_path, "m.json", MAP))
        assert code == 0
        assert rep["result"]["constraint"] == [{"weight": 0.9, "fn": {"dense": [1.0, 0.4 / 0.9]}}]
        assert rep["result"]["norm"] == 0.9

    def test_identity_map(self, tmp_path):
        doc = {"space": ABC, "constraint": [{"weight": 1, "fn": {"dense": [1.0, 0.5, 0.25]}}]}
        ident = {"domain": ABC, "codomain": ABC, "map": [[x, x] for x in "abc"]}
        d, m = write(tmp_path, "d.json", doc), write(tmp_path, "m.json", ident)
        for op in ("push", "pull"):
            code, rep = run(tmp_path, op, d, m)
            assert code == 0
            assert rep["result"]["constraint"] == doc["constraint"]

    def test_push_pull_push(self, tmp_path):
        doc = {
            "space": MAP["domain"],
            "constraint": [
                {"weight": 0.5, "fn": {"dense": [0.2, 1.0, 0.4, 0.1]}},
                {"weight": 0.5, "fn": {"indicator": [3]}},
            ],
        }
        m = write(tmp_path, "m.json", MAP)
        _, pushed = run(tmp_path, "push", write(tmp_path, "d.json", doc), m, out="p1.json")
        p1 = write(tmp_path, "p1doc.json", pushed["result"])
        _, pulled = run(tmp_path, "pull", p1, m, out="p2.json")
        _, again = run(tmp_path, "push", write(tmp_path, "p2doc.json", pulled["result"]), m, out="p3.json")
        assert again["result"] == pushed["result"]

    def test_non_total_map(self, tmp_path):
        bad = dict(MAP, map=[[1, "a"], [2, "a"], [3, "b"]])
        doc = {"space": MAP["domain"], "constraint": [{"weight": 1, "fn": "one"}]}
        code, _ = run(tmp_path, "push", write(tmp_path, "d.json", doc), write(tmp_path, "m.json", bad))
        assert code == 3

    def test_pull_wrong_codomain(self, tmp_path):
        doc = {"space": ABC, "constraint": [{"weight": 1, "fn": "one"}]}
        code, _ = run(tmp_path, "pull", write(tmp_path, "d.json", doc), write(tmp_path, "m.json", MAP))
        assert code == 3

    def test_marginalize(self, tmp_path):
        prod = {"product": [ABC, {"labels": ["u", "v"]}]}
        doc = {"space": prod, "constraint": [{"weight": 1, "fn": {"indicator": [["a", "v"], ["b", "v"]]}}]}
        d = write(tmp_path, "d.json", doc)
        code, rep = run(tmp_path, "marginalize", d, "--side", "left")
        assert code == 0
        assert rep["result"]["constraint"] == [{"weight": 1.0, "fn": {"indicator": ["a", "b"]}}]
        code, rep = run(tmp_path, "marginalize", d, "--side", "right")
        assert rep["result"]["constraint"] == [{"weight": 1.0, "fn": {"indicator": ["v"]}}]
        flat = write(tmp_path, "f.json", indicator_doc(["a"]))
        assert run(tmp_path, "marginalize", flat)[0] == 3


def mass_doc(masses, space=ABC):
    return {"space": space, "masses": [{"set": list(s), "mass": m} for s, m in masses.items()]}


class TestDempster:
    def test_worked_example(self, tmp_path):
        a = write(tmp_path, "a.json", mass_doc({"ab": 0.6, "c": 0.4}))
        b = write(tmp_path, "b.json", mass_doc({"bc": 0.5, "a": 0.5}))
        code, rep = run(tmp_path, "dempster", a, b)
        assert code == 0
        assert rep["verdict"] == "equal"
        got = {"".join(x["set"]): x["mass"] for x in rep["dempster"]["masses"]}
        assert got == pytest.approx({"a": 0.375, "b": 0.375, "c": 0.25}, abs=1e-15)
        assert rep["dempster"]["conflict"] == pytest.approx(0.2, abs=1e-15)

    def test_vacuous_echoes_first(self, tmp_path):
        masses = {"ab": 0.6, "c": 0.4}
        a = write(tmp_path, "a.json", mass_doc(masses))
        b = write(tmp_path, "b.json", mass_doc({"abc": 1.0}))
        _, rep = run(tmp_path, "dempster", a, b)
        got = {"".join(x["set"]): x["mass"] for x in rep["dempster"]["masses"]}
        assert got == masses and rep["dempster"]["conflict"] == 0.0

    def test_total_conflict(self, tmp_path):
        a = write(tmp_path, "a.json", mass_doc({"a": 1.0}))
        b = write(tmp_path, "b.json", mass_doc({"bc": 1.0}))
        assert run(tmp_path, "dempster", a, b)[0] == 4

    def test_random(self, tmp_path):
        code, rep = run(tmp_path, "dempster", "--random", "25", "--seed", "4")
        assert code == 0 and rep["verdict"] == "equal" and len(rep["cases"]) == 25

    def test_needs_inputs(self, tmp_path):
        assert run(tmp_path, "dempster")[0] == 2


class TestFilter:
    def test_single_step(self, tmp_path):
        sc = write(tmp_path, "s.json", {"steps": 1, "observations": [0.0]})
        code, rep = run(tmp_path, "filter", sc)
        assert code == 0
        rows = list(csv.DictReader((tmp_path / "out.csv").open()))
        assert len(rows) == 1
        assert float(rows[0]["weight"]) == pytest.approx(0.7071068, abs=1e-7)
        assert float(rows[0]["post_var"]) == 0.5
        assert list(rows[0]) == ["step", "prior_mean", "prior_var", "obs", "post_mean", "post_var", "weight"]

    def test_oracle(self, tmp_path):
        sc = write(tmp_path, "s.json", {"steps": 40, "q": 0.1, "sigma": 0.5, "seed": 2})
        code, rep = run(tmp_path, "filter", sc, "--oracle")
        assert code == 0 and rep["max_abs_err"] < 1e-3
        header = (tmp_path / "out.csv").read_text().splitlines()[0]
        assert header.endswith("weight,oracle_weight,abs_err")

    def test_deterministic_csv(self, tmp_path):
        sc = write(tmp_path, "s.json", {"steps": 25, "q": 0.2, "cell_width": 0.5, "sigma": 0.1})
        run(tmp_path, "filter", sc, "--seed", "9", out="a.json")
        run(tmp_path, "filter", sc, "--seed", "9", out="b.json")
        run(tmp_path, "filter", sc, "--seed", "10", out="c.json")
        a, b, c = ((tmp_path / f"{x}.csv").read_bytes() for x in "abc")
        assert a == b and a != c

    @pytest.mark.parametrize("doc", [{"steps": 0}, {"steps": 2, "init_var": -1}, {"steps": 2, "bogus": 1}])
    def test_invalid_scenario(self, tmp_path, doc):
        assert run(tmp_path, "filter", write(tmp_path, "s.json", doc))[0] == 2


class TestCheck:
    def test_valid_constraint(self, tmp_path):
        doc = {"space": ABC, "constraint": [{"weight": 0.5, "fn": {"dense": [1, 0.5, 0]}}, {"weight": 0.5, "fn": "one"}]}
        code, rep = run(tmp_path, "check", write(tmp_path, "d.json", doc))
        assert code == 0 and rep["ok"] and rep["canonical"]
        assert rep["axioms"] == {"empty": 0, "monotonicity": 0, "subadditivity": 0}

    def test_dominance(self, tmp_path):
        d = write(tmp_path, "d.json", indicator_doc(["a", "b"]))
        good = write(tmp_path, "p.json", {"probability": [0.5, 0.5, 0.0]})
        bad = write(tmp_path, "q.json", {"probability": {"a": 0.5, "c": 0.5}})
        code, rep = run(tmp_path, "check", d, "--prob", good)
        assert code == 0 and rep["dominance"]["dominates"]
        code, rep = run(tmp_path, "check", d, "--prob", bad)
        assert code == 1 and not rep["dominance"]["dominates"]

    def test_sampled_dominance(self, tmp_path):
        labels = [f"x{i}" for i in range(22)]
        sp = {"labels": labels}
        d = write(tmp_path, "d.json", {"space": sp, "constraint": [{"weight": 1, "fn": "one"}]})
        p = write(tmp_path, "p.json", {"probability": [1 / 22] * 22})
        code, rep = run(tmp_path, "check", d, "--prob", p, "--samples", "100", "--seed", "1")
        assert code == 0 and rep["dominance"]["mode"] == "sampled"


def test_stdout(tmp_path, capsys):
    a = write(tmp_path, "a.json", indicator_doc(["a"]))
    assert main(["fuse", a, a]) == 0
    assert json.loads(capsys.readouterr().out)["operation"] == "fuse"
