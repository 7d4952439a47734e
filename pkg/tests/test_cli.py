import csv
import json
from pathlib import Path

import pytest

from surjca.cli import main

MODELS = Path(__file__).resolve().parent.parent / "models"


def run(capsys, *args):
    code = main([str(a) for a in args])
    out = capsys.readouterr()
    return code, (json.loads(out.out) if code == 0 and out.out else None), out.err


def test_analyze(capsys):
    code, out, _ = run(capsys, "analyze", "--model", MODELS / "xor.model")
    assert code == 0
    assert (out["surjective"], out["preinjective"], out["injective"]) == (True, True, False)
    assert out["tool_version"] and "wall_time" in out
    assert out["config_echo"] == {"command": "analyze", "model": str(MODELS / "xor.model")}
    code, out, _ = run(capsys, "analyze", "--model", "majority3")
    assert out["surjective"] is False and out["goe_witness"]


def test_conserve(capsys):
    code, out, _ = run(capsys, "conserve", "discover", "--model", MODELS / "xor.model", "--range", 3)
    assert code == 0 and out["quotient_dim"] == 0
    code, out, _ = run(capsys, "conserve", "discover", "--model", "xor-with-walls", "--range", 1)
    assert out["quotient_dim"] >= 1
    assert all("/" in v for f in out["basis"] for _, v in f)
    code, out, _ = run(capsys, "conserve", "check", "--model", "xor-with-walls", "--observable", MODELS / "walls.obs")
    assert out["conserved"] is True
    code, out, err = run(capsys, "conserve", "flux", "--model", "xor01", "--observable", MODELS / "ones.obs")
    assert code == 2 and "not conserved" in err


def test_gibbs_build_matches_a1(capsys, tmp_path):
    dest = tmp_path / "a1.csv"
    code, out, _ = run(capsys, "gibbs", "build", "--sft", MODELS / "y.sft", "--observable", MODELS / "g1.obs",
                       "--out-csv", dest)
    assert code == 0
    rows = list(csv.reader(dest.open()))
    assert rows[0] == ["context", "symbol", "probability"]
    table = {(r[0], r[1]): float(r[2]) for r in rows[1:]}
    expected = {"0": [0.528, 0.194, 0.278], "1": [0.528, 0.194, 0.278], "2": [1, 0, 0]}
    for ctx, probs in expected.items():
        for s, p in zip("012", probs):
            assert table[(ctx, s)] == pytest.approx(p, abs=1e-3)


def test_gibbs_push_and_entropy(capsys, tmp_path):
    dest = tmp_path / "push.csv"
    code, out, _ = run(capsys, "gibbs", "push", "--model", "xor01", "--bernoulli", "0.3", "--length", 4,
                       "--out", dest)
    assert code == 0 and out["max_inconsistency"] < 1e-12
    rows = list(csv.reader(dest.open()))
    assert rows[0] == ["word", "length", "probability"] and len(rows) == 1 + 2 + 4 + 8 + 16
    code, out, _ = run(capsys, "gibbs", "invariance", "--model", "xor01", "--length", 6)
    assert out["equal_up_to_L"] is True
    code, out, _ = run(capsys, "gibbs", "pressure", "--sft", MODELS / "golden-mean.sft",
                       "--observable", MODELS / "zero.obs")
    assert out["pressure"] == pytest.approx(0.48121182505960347)


def test_simulate(capsys, tmp_path):
    dest = tmp_path / "q.csv"
    code, out, _ = run(capsys, "simulate", "q2r", "--width", 16, "--height", 16, "--steps", 20,
                       "--record", "energy,magnetization,blocks:2", "--out", dest)
    assert code == 0 and out["energy_conserved"]
    rows = list(csv.reader(dest.open()))
    assert len(rows) == 22 and len(rows[0]) == 3 + 16
    assert len({r[1] for r in rows[1:]}) == 1
    code, out, _ = run(capsys, "simulate", "contour-map", "--input", MODELS / "spins.txt")
    assert out["valid"]


def test_randomize(capsys, tmp_path):
    dest = tmp_path / "r.csv"
    code, out, _ = run(capsys, "randomize", "exact", "--T", 129, "--n", 4, "--out", dest)
    assert code == 0 and set(out["spike_ratios"]) == {str(k) for k in range(1, 7)}
    rows = list(csv.reader(dest.open()))
    assert rows[0] == ["t", "tv", "cesaro_tv", "density"] and len(rows) == 130
    code, out, _ = run(capsys, "randomize", "sample", "--t", 10, "--width", 500)
    assert code == 0 and 0 <= out["final_density"] <= 1


def test_models(capsys):
    code, out, _ = run(capsys, "models", "list")
    assert len(out["models"]) == 9
    code, out, _ = run(capsys, "models", "show", "xor01")
    assert "[rule]" in out["text"]


def test_config_file(capsys, tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"model": "xor01", "range": 2}))
    code, out, _ = run(capsys, "conserve", "discover", "--model", "xor01", "--config", cfg)
    assert code == 0 and out["config_echo"]["range"] == 2
    cfg.write_text(json.dumps({"model": "xor01", "bogus": 1}))
    code, _, err = run(capsys, "analyze", "--model", "xor01", "--config", cfg)
    assert code == 2 and "bogus" in err


def test_error_codes(capsys, tmp_path):
    code, _, _ = run(capsys, "analyze", "--model", tmp_path / "missing.model")
    assert code == 1
    bad = tmp_path / "bad.model"
    bad.write_text("[nonsense]\n")
    code, _, _ = run(capsys, "analyze", "--model", bad)
    assert code == 1
    code, _, _ = run(capsys, "analyze", "--model", "ternary-collapse")
    assert code == 2


def test_determinism(capsys, tmp_path):
    outs = []
    for i in range(2):
        j, c = tmp_path / f"o{i}.json", tmp_path / f"o{i}.csv"
        assert main(["randomize", "sample", "--t", "15", "--width", "400", "--seed", "3",
                     "--out-json", str(j), "--out-csv", str(c)]) == 0
        data = json.loads(j.read_text())
        data.pop("wall_time")
        outs.append((json.dumps(data), c.read_bytes()))
    assert outs[0] == outs[1]
