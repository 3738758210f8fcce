import csv
import json
import os

import numpy as np
import pytest

from bergmod.cli import EXIT_FAILED, EXIT_INPUT, EXIT_OK, main

CONFIGS = os.path.join(os.path.dirname(__file__), os.pardir, "configs")


def config(name):
    return os.path.join(CONFIGS, name)


def run(scenario, name, out, *extra):
    return main([scenario, "--config", config(name), "--out", str(out), *extra])


def report(out, scenario):
    with open(os.path.join(out, f"{scenario}.json"), encoding="utf-8") as fh:
        return json.load(fh)


class TestExitCodes:
    def test_identities_pass(self, tmp_path):
        assert run("identities", "identities.json", tmp_path) == EXIT_OK
        rep = report(tmp_path, "identities")
        assert rep["status"] == {"ok": True, "failures": []}

    def test_tolerance_failure(self, tmp_path, capsys):
        assert run("identities", "identities_strict.json", tmp_path) == EXIT_FAILED
        assert "FAIL" in capsys.readouterr().err
        assert report(tmp_path, "identities")["status"]["ok"] is False

    def test_coincident_lines_are_bad_input(self, tmp_path):
        assert run("boundary-pair", "boundary_pair_slope0.json", tmp_path) == EXIT_INPUT
        assert not os.listdir(tmp_path)

    def test_interior_point_is_bad_input(self, tmp_path, capsys):
        assert run("decompose", "decompose_interior_point.json", tmp_path) == EXIT_INPUT
        assert "unit sphere" in capsys.readouterr().err

    def test_scenario_mismatch(self, tmp_path):
        assert run("carleson", "identities.json", tmp_path) == EXIT_INPUT

    def test_missing_config(self, tmp_path):
        assert main(["identities", "--config", str(tmp_path / "none.json"), "--out", str(tmp_path)]) == EXIT_INPUT

    def test_bad_thread_count(self, tmp_path, monkeypatch):
        monkeypatch.setenv("BERGMOD_THREADS", "many")
        assert run("identities", "identities.json", tmp_path) == EXIT_INPUT

    def test_bad_ladder(self, tmp_path):
        with pytest.raises(SystemExit):
            run("boundary-pair", "boundary_pair.json", tmp_path, "--ladder", "0.9,1.5")

    def test_unexpected_verdict(self, tmp_path):
        path = tmp_path / "c.json"
        with open(config("carleson_lebesgue.json"), encoding="utf-8") as fh:
            cfg = json.load(fh)
        cfg["expected_verdict"] = "not-carleson (heuristic)"
        path.write_text(json.dumps(cfg))
        assert main(["carleson", "--config", str(path), "--out", str(tmp_path)]) == EXIT_FAILED


class TestOutputs:
    def test_defaults_without_config(self, tmp_path):
        assert main(["identities", "--out", str(tmp_path)]) == EXIT_OK
        assert report(tmp_path, "identities")["results"]["config"]["scenario"] == "identities"

    def test_report_embeds_resolved_config(self, tmp_path):
        run("identities", "identities.json", tmp_path, "--seed", "7")
        cfg = report(tmp_path, "identities")["results"]["config"]
        assert cfg["seed"] == 7 and cfg["tolerance"] == 1e-12 and cfg["count"] > 0

    def test_seed_changes_results(self, tmp_path):
        run("identities", "identities.json", tmp_path / "a")
        run("identities", "identities.json", tmp_path / "b", "--seed", "1")
        assert report(tmp_path / "a", "identities")["results"] != report(tmp_path / "b", "identities")["results"]

    def test_ladder_override(self, tmp_path):
        run("boundary-pair", "boundary_pair.json", tmp_path, "--ladder", "0.9,0.99")
        res = report(tmp_path, "boundary-pair")["results"]
        assert [r["rho_max"] for r in res["rungs"]] == [0.9, 0.99]
        assert res["config"]["ladder"] == [0.9, 0.99]

    def test_sweep_csv(self, tmp_path, capsys):
        assert run("linear-pair", "linear_pair_lines.json", tmp_path) == EXIT_OK
        printed = capsys.readouterr().out.split()
        assert [os.path.basename(p) for p in printed] == ["linear-pair.json", "linear-pair_sweep.csv"]
        with open(tmp_path / "linear-pair_sweep.csv", newline="") as fh:
            rows = list(csv.DictReader(fh))
        assert len(rows) == 3
        for row in rows:
            assert abs(float(row["sampled_norm_121"]) - np.cos(float(row["theta"])) ** 2) < 0.02


class TestLinearPair:
    def test_orthogonal(self, tmp_path):
        assert run("linear-pair", "linear_pair_orthogonal.json", tmp_path) == EXIT_OK
        (pair,) = report(tmp_path, "linear-pair")["results"]["pairs"]
        assert pair["report"]["norm_121"] < 0.02

    def test_lines_decrease_with_angle(self, tmp_path):
        run("linear-pair", "linear_pair_lines.json", tmp_path)
        pairs = report(tmp_path, "linear-pair")["results"]["pairs"]
        vals = [p["report"]["norm_121"] for p in pairs]
        assert vals == sorted(vals, reverse=True)
        assert 0.49 <= vals[1] <= 0.51


class TestDecompose:
    def test_positive(self, tmp_path):
        assert run("decompose", "decompose_planes.json", tmp_path) == EXIT_OK
        res = report(tmp_path, "decompose")["results"]
        assert res["verdict"] == "positive"
        assert all(p["localized_intersection"]["gap"] < 1e-8 for p in res["points"])

    def test_negative(self, tmp_path):
        assert run("decompose", "decompose_tangential.json", tmp_path) == EXIT_OK
        res = report(tmp_path, "decompose")["results"]
        assert res["verdict"] == "negative"
        assert res["points"][0]["clean_intersection"]["verdict"] is False


class TestDeterminism:
    @pytest.mark.parametrize("threads", ["1", "2"])
    def test_byte_identical_outside_header(self, tmp_path, monkeypatch, threads):
        monkeypatch.setenv("BERGMOD_THREADS", threads)
        for sub in ("a", "b"):
            run("linear-pair", "linear_pair_lines.json", tmp_path / sub)
        texts = [(tmp_path / sub / "linear-pair.json").read_text() for sub in ("a", "b")]
        strip = lambda t: {k: v for k, v in json.loads(t).items() if k != "header"}
        assert strip(texts[0]) == strip(texts[1])
        body = [t[t.index('"results"'):] for t in texts]
        assert body[0] == body[1]

    def test_thread_count_does_not_change_results(self, tmp_path, monkeypatch):
        for threads in ("1", "3"):
            monkeypatch.setenv("BERGMOD_THREADS", threads)
            run("identities", "identities.json", tmp_path / threads)
        a, b = ((tmp_path / t / "identities.json").read_text() for t in ("1", "3"))
        assert a[a.index('"results"'):] == b[b.index('"results"'):]
