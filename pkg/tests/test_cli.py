import json
import os

import pytest

from p1functors.cli import main
from p1functors.corpus import ComposeSpec, compose_functor, corpus_spec
from p1functors.fields import QQ
from p1functors.sheaves import P1Point, TorsionSheaf


def pt(a, b):
    return P1Point.from_coords(QQ, QQ.from_int(a), QQ.from_int(b))


def write_spec(path, torsion=(), h1=(), lo=-6, hi=4, gauge_seed=None):
    data = {
        "field": "Q",
        "lo": lo,
        "hi": hi,
        "torsion": [{"point": [str(a), str(b)], "mult": m}
                    for a, b, m in torsion],
        "h1": [{"i": i, "l": l} for i, l in h1],
    }
    if gauge_seed is not None:
        data["gauge_seed"] = gauge_seed
    path.write_text(json.dumps(data))
    return path


def write_sheaf(path, bundle=(), torsion=()):
    data = {
        "bundle": list(bundle),
        "torsion": [{"point": [str(a), str(b)], "mult": m}
                    for a, b, m in torsion],
    }
    path.write_text(json.dumps(data))
    return path


class TestCompose:
    def test_torsion_only_constant_dims(self, tmp_path):
        spec = write_spec(tmp_path / "s.json", torsion=[(1, 1, 1)])
        out = tmp_path / "f.json"
        assert main(["compose", "--spec", str(spec), "-o", str(out)]) == 0
        data = json.loads(out.read_text())
        assert data["dims"] == [1] * 11

    def test_h1_dims_follow_formula(self, tmp_path):
        spec = write_spec(tmp_path / "s.json", h1=[(0, 1)])
        out = tmp_path / "f.json"
        assert main(["compose", "--spec", str(spec), "-o", str(out)]) == 0
        data = json.loads(out.read_text())
        assert data["dims"] == [max(0, -n - 1) for n in range(-6, 5)]

    def test_byte_identical_with_same_seed(self, tmp_path):
        spec = write_spec(tmp_path / "s.json", torsion=[(0, 1, 2)],
                          h1=[(0, 1)], gauge_seed=7)
        out1, out2 = tmp_path / "f1.json", tmp_path / "f2.json"
        assert main(["compose", "--spec", str(spec), "-o", str(out1)]) == 0
        assert main(["compose", "--spec", str(spec), "-o", str(out2)]) == 0
        assert out1.read_bytes() == out2.read_bytes()

    def test_invalid_window_exits_4(self, tmp_path, capsys):
        spec = write_spec(tmp_path / "s.json", h1=[(0, 1)], lo=-2)
        out = tmp_path / "f.json"
        assert main(["compose", "--spec", str(spec), "-o", str(out)]) == 4
        err = json.loads(capsys.readouterr().err)
        assert err["error"] == "FORMAT_ERROR"
        assert not out.exists()

    def test_missing_file_exits_4(self, tmp_path):
        out = tmp_path / "f.json"
        code = main(["compose", "--spec", str(tmp_path / "nope.json"),
                     "-o", str(out)])
        assert code == 4
        assert not out.exists()


class TestDecomposeCommand:
    def test_round_trip_report(self, tmp_path):
        spec = write_spec(tmp_path / "s.json", torsion=[(1, 1, 1), (0, 1, 2)],
                          h1=[(-1, 1)], lo=-8, gauge_seed=11)
        f = tmp_path / "f.json"
        report = tmp_path / "r.json"
        assert main(["compose", "--spec", str(spec), "-o", str(f)]) == 0
        assert main(["decompose", str(f), "-o", str(report)]) == 0
        data = json.loads(report.read_text())
        assert data["h1"] == [{"i": -1, "l": 1}]
        assert data["certificate"]["checked"] is True
        assert data["certificate"]["window"] == [-8, 4]
        blocks = {(tuple(b["point"]), b["mult"]) for b in data["torsion"]}
        assert blocks == {(("0", "1"), 2), (("1", "1"), 1)}
        assert all(e["pass"] for e in data["properties"])

    def test_inadmissible_exits_1_without_output(self, tmp_path, capsys):
        # valid JSON, valid shapes, but the two actions do not commute
        f = tmp_path / "f.json"
        f.write_text(json.dumps({
            "field": "Q", "lo": -2, "hi": 2, "dims": [1, 1, 1, 1, 1],
            "x0": [[[1]], [[2]], [[1]], [[1]]],
            "x1": [[[1]], [[1]], [[2]], [[1]]],
        }))
        report = tmp_path / "r.json"
        assert main(["decompose", str(f), "-o", str(report)]) == 1
        err = json.loads(capsys.readouterr().err)
        assert err["error"] == "NOT_ADMISSIBLE"
        assert not report.exists()

    def test_window_too_small_exits_2(self, tmp_path, capsys):
        spec = write_spec(tmp_path / "s.json", h1=[(0, 1)], lo=-3, hi=2)
        f = tmp_path / "f.json"
        # compose accepts (window invariant holds) but hi - n_stab < 2
        spec_data = json.loads(spec.read_text())
        spec_data["hi"] = 2
        spec_data["lo"] = -3
        spec.write_text(json.dumps(spec_data))
        assert main(["compose", "--spec", str(spec), "-o", str(f)]) == 0
        data = json.loads(f.read_text())
        data["dims"] = data["dims"][:4]
        data["x0"] = data["x0"][:3]
        data["x1"] = data["x1"][:3]
        data["hi"] = 0
        f.write_text(json.dumps(data))
        report = tmp_path / "r.json"
        assert main(["decompose", str(f), "-o", str(report)]) == 2
        err = json.loads(capsys.readouterr().err)
        assert err["error"] == "WINDOW_TOO_SMALL"

    def test_malformed_functor_exits_4(self, tmp_path):
        f = tmp_path / "f.json"
        f.write_text(json.dumps({"field": "Q", "lo": 0, "hi": 1,
                                 "dims": [1], "x0": [], "x1": []}))
        assert main(["decompose", str(f), "-o", str(tmp_path / "r.json")]) == 4


class TestClassifyCommand:
    def test_pullback_instance(self, tmp_path, capsys):
        spec = write_spec(tmp_path / "s.json", torsion=[(1, 1, 1)],
                          gauge_seed=3)
        f = tmp_path / "f.json"
        assert main(["compose", "--spec", str(spec), "-o", str(f)]) == 0
        assert main(["classify", str(f)]) == 0
        out = capsys.readouterr().out.splitlines()
        assert out[0] == "integral_transform: yes"
        assert out[1] == "pullback: [1:1]"

    def test_mixed_instance(self, tmp_path, capsys):
        spec = write_spec(tmp_path / "s.json", torsion=[(1, 1, 1)],
                          h1=[(0, 1)], gauge_seed=3)
        f = tmp_path / "f.json"
        assert main(["compose", "--spec", str(spec), "-o", str(f)]) == 0
        assert main(["classify", str(f)]) == 0
        out = capsys.readouterr().out.splitlines()
        assert out[0] == "integral_transform: no"
        assert out[1] == "pullback: none"


class TestEvalCommand:
    def test_skyscraper_at_support(self, tmp_path, capsys):
        spec = write_spec(tmp_path / "s.json", torsion=[(1, 1, 1)])
        f = tmp_path / "f.json"
        sheaf = write_sheaf(tmp_path / "sheaf.json", torsion=[(1, 1, 1)])
        assert main(["compose", "--spec", str(spec), "-o", str(f)]) == 0
        assert main(["eval", str(f), "--sheaf", str(sheaf)]) == 0
        assert capsys.readouterr().out.strip() == "1"

    def test_twist_invariance(self, tmp_path, capsys):
        spec = write_spec(tmp_path / "s.json", torsion=[(0, 1, 2)],
                          h1=[(0, 1)], gauge_seed=5)
        f = tmp_path / "f.json"
        sheaf = write_sheaf(tmp_path / "sheaf.json", bundle=[0],
                            torsion=[(0, 1, 1)])
        assert main(["compose", "--spec", str(spec), "-o", str(f)]) == 0
        dims = set()
        for twist in (1, 2, 3):
            assert main(["eval", str(f), "--sheaf", str(sheaf),
                         "--twist", str(twist)]) == 0
            dims.add(capsys.readouterr().out.strip())
        assert len(dims) == 1


class TestCohomologyCommand:
    def test_line_bundle(self, tmp_path, capsys):
        sheaf = write_sheaf(tmp_path / "sheaf.json", bundle=[3])
        assert main(["cohomology", "--sheaf", str(sheaf)]) == 0
        out = capsys.readouterr().out
        assert "h0: 4" in out and "h1: 0" in out

    def test_twisted(self, tmp_path, capsys):
        sheaf = write_sheaf(tmp_path / "sheaf.json", bundle=[-2],
                            torsion=[(0, 1, 2)])
        assert main(["cohomology", "--sheaf", str(sheaf), "--twist",
                     "-3"]) == 0
        out = capsys.readouterr().out
        assert "h0: 2" in out and "h1: 4" in out


class TestVerifyCommand:
    def test_single_file(self, tmp_path, capsys):
        spec = write_spec(tmp_path / "s.json", torsion=[(1, 0, 1)],
                          h1=[(0, 1)], gauge_seed=17)
        f = tmp_path / "f.json"
        assert main(["compose", "--spec", str(spec), "-o", str(f)]) == 0
        assert main(["verify", str(f)]) == 0
        report = json.loads(capsys.readouterr().out)
        assert all(e["pass"] for e in report["properties"])

    def test_corpus_mode(self, tmp_path, capsys):
        assert main(["verify", "--corpus", "424241", "4"]) == 0
        out = capsys.readouterr().out
        assert "corpus: 4/4 passed" in out


class TestCorpusGenerator:
    def test_deterministic(self):
        a = corpus_spec(5, 3)
        b = corpus_spec(5, 3)
        assert a.to_json() == b.to_json()
        assert compose_functor(a) == compose_functor(b)

    def test_respects_bounds(self):
        for k in range(40):
            spec = corpus_spec(99, k)
            assert len(spec.torsion.blocks) <= 3
            assert all(1 <= m <= 3 for _, m in spec.torsion.blocks)
            assert len(spec.h1) <= 3
            assert all(-3 <= i <= 1 and 1 <= l <= 2
                       for i, l in spec.h1.items())
            assert spec.hi == 4
            assert spec.lo == -(8 + max([0] + [-i for i in spec.h1]))
            assert spec.violations() == []

    def test_spec_json_round_trip(self):
        spec = corpus_spec(7, 11)
        again = ComposeSpec.from_json(spec.to_json())
        assert again.to_json() == spec.to_json()
