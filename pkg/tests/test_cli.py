"""End-to-end checks of the command line: formats, exit codes, determinism."""
import json
from importlib import resources

import pytest

from steinpoly.cli import main

FIXTURE = str(resources.files("steinpoly").joinpath("data/weight4_depth2.json"))


def run(tmp_path, *argv):
    out = tmp_path / "out.txt"
    code = main([*argv, "--out", str(out)])
    return code, out.read_text() if out.exists() else ""


def run_json(tmp_path, *argv):
    code, text = run(tmp_path, *argv)
    return code, json.loads(text) if text else None


def write(tmp_path, name, obj):
    p = tmp_path / name
    p.write_text(json.dumps(obj))
    return str(p)


class TestReduce:
    def test_boundary_relation_is_zero(self, tmp_path):
        path = write(tmp_path, "rel.json", {
            "dim": 2,
            "terms": [
                {"apartment": [[0, 1], [1, 2]], "coeff": "1"},
                {"apartment": [[1, 0], [1, 2]], "coeff": "-1"},
                {"apartment": [[1, 0], [0, 1]], "coeff": "1"},
            ],
        })
        code, report = run_json(tmp_path, "reduce", path)
        assert code == 0
        assert report["zero"] is True and report["terms"] == []

    def test_two_term_expansion(self, tmp_path):
        path = write(tmp_path, "el.json", {
            "dim": 2,
            "terms": [{"apartment": [[0, 1], [1, 1]], "coeff": "1"}],
        })
        code, report = run_json(tmp_path, "reduce", path)
        assert code == 0
        assert report["zero"] is False
        assert len(report["terms"]) == 2

    def test_malformed_json_exits_2(self, tmp_path):
        p = tmp_path / "bad.json"
        p.write_text('{"dim": 2, "terms": [')
        code, _ = run(tmp_path, "reduce", str(p))
        assert code == 2

    def test_degenerate_apartment_exits_2(self, tmp_path):
        path = write(tmp_path, "deg.json", {
            "dim": 2,
            "terms": [{"apartment": [[1, 1], [2, 2]], "coeff": "1"}],
        })
        code, _ = run(tmp_path, "reduce", path)
        assert code == 2


class TestSymbol:
    def test_L_pair_three_terms(self, tmp_path):
        code, report = run_json(tmp_path, "symbol", "--kind", "L", "1,0", "0,1")
        assert code == 0
        terms = {
            (tuple(tuple(r) for r in t["word"]), t["coeff"]) for t in report["terms"]
        }
        assert terms == {
            ((("1", "1"), ("0", "1")), "1"),
            ((("0", "1"), ("1", "0")), "1"),
            ((("1", "1"), ("1", "0")), "-1"),
        }

    def test_I_triple_term_count(self, tmp_path):
        code, report = run_json(
            tmp_path, "symbol", "--kind", "I", "1,0,0", "0,1,0", "0,0,1"
        )
        assert code == 0
        assert len(report["terms"]) == 15
        assert all(t["coeff"] in ("1", "-1") for t in report["terms"])

    def test_single_vector(self, tmp_path):
        code, report = run_json(tmp_path, "symbol", "--kind", "L", "3,6")
        assert code == 0
        assert report["terms"] == [{"coeff": "1", "exp": [], "word": [["1", "2"]]}]

    def test_mixed_lengths_exit_2(self, tmp_path):
        code, _ = run(tmp_path, "symbol", "--kind", "L", "1,0", "0,1,0")
        assert code == 2


class TestVerify:
    def test_random_suites_pass(self, tmp_path):
        for suite, dim in [("shuffle", 2), ("dihedral", 2), ("cobracket", 2),
                           ("duality", 2), ("ashrudolph", 2)]:
            code, report = run_json(
                tmp_path, "verify", suite, "--dim", str(dim),
                "--cases", "3", "--seed", "7",
            )
            assert code == 0, suite
            assert report["verdict"] == "PASS"
            assert report["seed"] == 7

    def test_corrupted_fixture_reports_witness(self, tmp_path):
        path = write(tmp_path, "fix.json", {
            "cases": [
                {"basis": [[1, 0], [0, 1]]},
                {
                    "basis": [[2, 1], [1, 1]],
                    "perturb": {"vectors": [[1, 0], [1, 1]], "coeff": "1"},
                },
            ]
        })
        code, report = run_json(tmp_path, "verify", "dihedral", path, "--seed", "2")
        assert code == 1
        assert report["verdict"] == "FAIL"
        (fail,) = report["failures"]
        assert fail["case"] == 1
        assert fail["witness"]["relation"]

    def test_fixture_without_cases_exits_2(self, tmp_path):
        path = write(tmp_path, "fix.json", {"wrong": []})
        code, _ = run(tmp_path, "verify", "shuffle", path)
        assert code == 2

    def test_unknown_suite_rejected(self, tmp_path):
        with pytest.raises(SystemExit) as exc:
            main(["verify", "nonsense"])
        assert exc.value.code == 2


class TestSt:
    def test_shipped_fixture_passes(self, tmp_path):
        code, report = run_json(tmp_path, "st", FIXTURE)
        assert code == 0
        assert report["verdict"] == "PASS"
        assert report["weight"] == 4 and report["terms"] == 8

    def test_perturbed_fixture_fails_with_residual(self, tmp_path):
        data = json.load(open(FIXTURE))
        data[2]["coeff"] = "3/2"
        path = write(tmp_path, "bad.json", data)
        code, report = run_json(tmp_path, "st", path)
        assert code == 1
        assert report["verdict"] == "FAIL"
        assert report["residual"]

    def test_empty_identity_passes(self, tmp_path):
        path = write(tmp_path, "empty.json", [])
        code, report = run_json(tmp_path, "st", path)
        assert code == 0 and report["verdict"] == "PASS"

    def test_mixed_weight_file_exits_2(self, tmp_path):
        path = write(tmp_path, "mixed.json", [
            {"coeff": "1", "matrix": [["1"]], "exponents": [2]},
            {"coeff": "1", "matrix": [["1"]], "exponents": [3]},
        ])
        code, _ = run(tmp_path, "st", path)
        assert code == 2


class TestFourier:
    def test_bernoulli_study_format(self, tmp_path):
        path = write(tmp_path, "b.json", {
            "study": "bernoulli", "weights": [1, 2], "points": ["1/3"],
            "m_max": 400, "tolerance": 1e-2,
        })
        code, text = run(tmp_path, "fourier", path, "--seed", "3")
        assert code == 0
        lines = text.splitlines()
        assert lines[0] == "# seed=3"
        assert lines[1].startswith("n,x,m_max,")
        assert len(lines) == 4 and all(r.endswith("pass") for r in lines[2:])

    def test_shuffle_study(self, tmp_path):
        path = write(tmp_path, "s.json", {"study": "shuffle"})
        code, text = run(tmp_path, "fourier", path, "--box", "10")
        assert code == 0
        assert text.splitlines()[-1] == "10,pass"

    def test_cone_study_emits_rows(self, tmp_path):
        path = write(tmp_path, "c.json", {
            "study": "cone",
            "generators": [[1, 0], [1, 1]],
            "forms": [[1, 0], [0, 1]],
            "exponents": [1, 1],
            "points": [["1/3", "1/7"]],
            "m_max": 20,
        })
        code, text = run(tmp_path, "fourier", path)
        assert code == 0
        assert len(text.splitlines()) == 3

    def test_unknown_study_exits_2(self, tmp_path):
        path = write(tmp_path, "u.json", {"study": "sandpile"})
        code, _ = run(tmp_path, "fourier", path)
        assert code == 2


class TestDeterminism:
    def test_verify_byte_identical(self, tmp_path):
        _, a = run(tmp_path, "verify", "shuffle", "--dim", "2", "--cases", "3",
                   "--seed", "5")
        _, b = run(tmp_path, "verify", "shuffle", "--dim", "2", "--cases", "3",
                   "--seed", "5")
        assert a == b

    def test_fourier_byte_identical(self, tmp_path):
        path = write(tmp_path, "b.json", {
            "study": "bernoulli", "weights": [2], "points": ["1/5"], "m_max": 200,
        })
        _, a = run(tmp_path, "fourier", path, "--seed", "1")
        _, b = run(tmp_path, "fourier", path, "--seed", "1")
        assert a == b

    def test_st_byte_identical(self, tmp_path):
        _, a = run(tmp_path, "st", FIXTURE, "--seed", "4")
        _, b = run(tmp_path, "st", FIXTURE, "--seed", "4")
        assert a == b
