import json
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from beliefkit import io
from beliefkit.cli import main
from beliefkit.combination import dempster_combine as dempster

DATA = Path(__file__).resolve().parent.parent / "sample_data"


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def doc_of(text):
    return json.loads(text)


class TestCombine:
    def test_matches_library(self, capsys):
        code, out, _ = run(capsys, "combine", "--rule", "dempster", DATA / "a.json", DATA / "b.json")
        assert code == 0
        expected = dempster(io.read_json(DATA / "a.json"), io.read_json(DATA / "b.json"))
        assert io.parse(out).allclose(expected, atol=0)

    def test_to_file(self, capsys, tmp_path):
        dest = tmp_path / "c.json"
        code, out, _ = run(capsys, "combine", DATA / "a.json", DATA / "b.json", "--out", dest)
        assert code == 0 and out == ""
        assert io.read_json(dest).frame.size == 3

    def test_missing_file(self, capsys):
        code, _, err = run(capsys, "combine", DATA / "a.json", DATA / "nope.json")
        assert code == 1 and err

    def test_bad_rule_is_usage_error(self, capsys):
        code, _, _ = run(capsys, "combine", "--rule", "nonsense", DATA / "a.json")
        assert code == 2

    def test_schema_error(self, capsys, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text('{"schema_version": "1.0", "kind": "mass", "frame": ["x"], "focal": [], "extra": 1}')
        code, _, err = run(capsys, "combine", "--strict", bad, bad)
        assert code == 1 and "extra" in err


class TestCommands:
    def test_condition(self, capsys):
        code, out, _ = run(capsys, "condition", "--on", "x,y", DATA / "a.json")
        assert code == 0
        m = io.parse(out)
        assert m.pl(m.frame.mask(["z"])) == 0.0

    def test_likelihood_surface_csv(self, capsys):
        code, out, _ = run(capsys, "likelihood", "--trials", DATA / "trials.csv", "--model", DATA / "bernoulli.json",
                           "--success", "T", "--format", "csv")
        assert code == 0
        lines = out.strip().splitlines()
        assert len(lines) > 50

    def test_fit_logistic(self, capsys):
        code, out, _ = run(capsys, "fit-logistic", DATA / "logistic.csv", "--target", "both")
        assert code == 0
        assert "lower" in out and "upper" in out

    def test_total_belief(self, capsys):
        code, out, _ = run(capsys, "total-belief", DATA / "problem.json", "--enumerate", "--limit", "50")
        assert code == 0
        assert doc_of(out)["kind"] == "report"

    def test_geometry(self, capsys):
        code, _, _ = run(capsys, "geometry", "subspace", DATA / "binary.json", "--rule", "disjunctive")
        assert code == 0
        code, _, _ = run(capsys, "geometry", "condition", DATA / "a.json", "--on", "x,y", "--norm", "L1")
        assert code == 0

    def test_maxent(self, capsys):
        code, out, _ = run(capsys, "maxent-train", DATA / "samples.csv", DATA / "features.json", "--classical")
        assert code == 0 and doc_of(out)["kind"] == "report"

    def test_maxent_ht_fails_cleanly(self, capsys):
        code, _, err = run(capsys, "maxent-train", DATA / "samples.csv", DATA / "features.json", "--entropy", "Ht")
        assert code == 1 and err

    def test_limits(self, capsys):
        code, _, _ = run(capsys, "limits", "lln", DATA / "bernoulli.json", "--n", 1000, "--trials", 100)
        assert code == 0

    def test_pac_bound(self, capsys):
        code, out, _ = run(capsys, "pac", "bound", "--h", 16, "--delta", 0.05, "--epsilon", 0.1)
        assert code == 0

    def test_pac_bound_missing_args(self, capsys):
        code, _, _ = run(capsys, "pac", "bound")
        assert code == 2

    def test_pac_simulate(self, capsys):
        code, _, _ = run(capsys, "pac", "simulate", DATA / "credal.json")
        assert code == 0


class TestVerify:
    def test_factorization_clean(self, capsys):
        code, out, _ = run(capsys, "verify", "--suite", "factorization", "--n", 3, "--seed", 7)
        assert code == 0
        assert doc_of(out)["data"]["violations"] == 0

    def test_reproducible(self, capsys):
        args = ("verify", "--suite", "factorization", "--n", 3, "--seed", 3)
        _, first, _ = run(capsys, *args)
        _, second, _ = run(capsys, *args)
        assert first == second

    def test_seed_changes_output(self, capsys):
        _, a, _ = run(capsys, "verify", "--suite", "factorization", "--n", 3, "--seed", 1)
        _, b, _ = run(capsys, "verify", "--suite", "factorization", "--n", 3, "--seed", 2)
        assert a != b

    def test_csv(self, capsys):
        code, out, _ = run(capsys, "verify", "--suite", "bernoulli", "--format", "csv")
        assert code == 0 and out.splitlines()[0].startswith("suite")

    def test_unknown_suite(self, capsys):
        code, _, _ = run(capsys, "verify", "--suite", "nope")
        assert code == 2


def test_console_entry_point():
    res = subprocess.run([sys.executable, "-m", "beliefkit.cli", "pac", "bound", "--h", "4", "--delta", "0.1", "--n", "100"],
                         capture_output=True, text=True)
    assert res.returncode == 0
    assert np.isfinite(json.loads(res.stdout)["data"]["epsilon"])


def test_oversized_frame_is_reported(capsys):
    code, out, err = run(capsys, "verify", "--suite", "factorization", "--n", 5)
    assert code == 1 and out == "" and "IntractableError" in err
