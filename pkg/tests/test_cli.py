import json
import os

import pytest

from hdmvl.cli import run

FIXTURES = os.path.join(os.path.dirname(__file__), "fixtures")
FAST = ["--samples-per-class", "15", "--epochs", "3", "--hidden", "6", "--pseudo-hidden", "4"]


def call(capsys, argv):
    code = run(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_divergence_holder_validates(capsys):
    code, out, _ = call(capsys, ["divergence", "--p", "3,2,4", "--q", "2,2,2", "--gamma", "1.7", "--validate"])
    assert code == 0
    r = json.loads(out)
    assert r["kind"] == "holder" and r["agrees"] is True
    assert abs(r["value"] - 0.168567650131) <= 1e-11
    assert r["oracle"]["method"] == "quadrature"
    assert r["oracle"]["abs_diff"] <= r["oracle"]["error_bound"]


def test_divergence_kl_and_cs(capsys):
    code, out, _ = call(capsys, ["divergence", "--kind", "kl", "--p", "2,1", "--q", "1,1", "--validate"])
    assert code == 0 and abs(json.loads(out)["value"] - 0.1931471805599453) <= 1e-12
    code, out, _ = call(capsys, ["divergence", "--kind", "cs", "--p", "2,1", "--q", "1,1"])
    r = json.loads(out)
    assert code == 0 and r["gamma"] == 2.0 and r["agrees"]


def test_divergence_mc_for_larger_k(capsys):
    code, out, _ = call(capsys, ["divergence", "--p", "3,2,4,1,2", "--q", "2,2,2,2,2",
                                 "--budget", "200000", "--validate"])
    r = json.loads(out)
    assert code == 0 and r["oracle"]["method"] == "mc"
    assert r["oracle"]["error_bound"] == pytest.approx(3 * r["oracle"]["stderr"])


def test_divergence_usage_errors(capsys):
    code, _, err = call(capsys, ["divergence", "--p", "1,2"])
    assert code == 2 and "--q" in err
    code, _, _ = call(capsys, ["divergence", "--p", ",".join(["1"] * 17), "--q", ",".join(["1"] * 17)])
    assert code == 2
    code, _, _ = call(capsys, ["no-such-command"])
    assert code == 2


def test_divergence_file_input(capsys, tmp_path):
    (tmp_path / "p.json").write_text(json.dumps([1.5] * 20))
    (tmp_path / "q.json").write_text(json.dumps([1.0] * 20))
    code, out, _ = call(capsys, ["divergence", "--p-file", str(tmp_path / "p.json"),
                                 "--q-file", str(tmp_path / "q.json"), "--budget", "20000"])
    assert code == 0 and json.loads(out)["oracle"]["method"] == "mc"


def test_domain_error_json(capsys):
    code, out, err = call(capsys, ["--json-errors", "divergence", "--p", "0.2,1", "--q", "1,1", "--gamma", "1.5"])
    assert code == 1
    r = json.loads(out)
    assert r["error"] == "DomainError" and "p[0]" in r["detail"]
    assert "error" in err


def test_fuse_vacuous_identity(capsys, tmp_path):
    f = tmp_path / "ops.json"
    f.write_text(json.dumps({"opinions": [
        {"beliefs": [0, 0], "uncertainty": 1},
        {"beliefs": [0.6, 0.2], "uncertainty": 0.2},
    ]}))
    code, out, _ = call(capsys, ["fuse", "--opinions", str(f)])
    r = json.loads(out)
    assert code == 0
    assert r["beliefs"] == pytest.approx([0.6, 0.2], abs=1e-12)
    assert r["uncertainty"] == pytest.approx(0.2, abs=1e-12)


def test_fuse_total_conflict(capsys, tmp_path):
    f = tmp_path / "ops.json"
    f.write_text(json.dumps([{"beliefs": [1, 0], "uncertainty": 0}, {"beliefs": [0, 1], "uncertainty": 0}]))
    code, out, _ = call(capsys, ["--json-errors", "fuse", "--opinions", str(f)])
    assert code == 1 and json.loads(out)["error"] == "TotalConflictError"


def test_sweep_gamma_schema(capsys):
    code, out, _ = call(capsys, ["sweep-gamma", "--grid", "1.5,2.0", *FAST])
    assert code == 0
    rows = json.loads(out)
    assert [r["gamma"] for r in rows] == [1.5, 2.0]
    for r in rows:
        assert set(r) == {"gamma", "fused_accuracy", "mean_uncertainty", "per_view_accuracy",
                          "first_epoch_loss", "final_epoch_loss", "converged"}
        assert 0 <= r["fused_accuracy"] <= 1


def test_sweep_gamma_rejects_bad_grid(capsys):
    code, _, _ = call(capsys, ["sweep-gamma", "--grid", "1.0", *FAST])
    assert code == 2


def test_seed_from_environment(capsys, monkeypatch, tmp_path):
    monkeypatch.setenv("HDMVL_SEED", "5")
    code, out, _ = call(capsys, ["train", "--checkpoint", str(tmp_path / "c.json"), *FAST])
    assert code == 0 and json.loads(out)["config"]["seed"] == 5
    code, out, _ = call(capsys, ["train", "--checkpoint", str(tmp_path / "c.json"), "--seed", "2", *FAST])
    assert json.loads(out)["config"]["seed"] == 2
    monkeypatch.setenv("HDMVL_SEED", "five")
    code, _, _ = call(capsys, ["train", "--checkpoint", str(tmp_path / "c.json"), *FAST])
    assert code == 2


def test_config_file_and_overrides(capsys, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"epochs": 2, "gamma": 1.9, "samples_per_class": 10, "hidden": [5]}))
    code, out, _ = call(capsys, ["train", "--config", str(cfg), "--checkpoint", str(tmp_path / "c.json"),
                                 "--gamma", "1.3"])
    c = json.loads(out)["config"]
    assert code == 0 and c["epochs"] == 2 and c["gamma"] == 1.3 and c["hidden"] == [5]
    cfg.write_text(json.dumps({"epochz": 2}))
    code, _, err = call(capsys, ["train", "--config", str(cfg), "--checkpoint", str(tmp_path / "c.json")])
    assert code == 2 and "epochz" in err


def test_manifest_training(capsys, tmp_path):
    m = os.path.join(FIXTURES, "toy2view", "manifest.json")
    code, out, _ = call(capsys, ["train", "--manifest", m, "--test-fraction", "0.5", "--epochs", "2",
                                 "--batch-size", "2", "--checkpoint", str(tmp_path / "c.json")])
    r = json.loads(out)
    assert code == 0 and r["train_size"] == 3 and r["test_size"] == 3


def test_gen_train_eval_reproducible(capsys, tmp_path):
    code, out, _ = call(capsys, ["gen-data", "--out", str(tmp_path / "d"), "--samples-per-class", "15", "--seed", "3"])
    assert code == 0
    manifest = json.loads(out)["manifest"]
    outs = []
    for i in range(2):
        ck = str(tmp_path / f"c{i}.json")
        args = ["--manifest", manifest, "--epochs", "3", "--hidden", "6", "--pseudo-hidden", "4"]
        assert call(capsys, ["train", "--checkpoint", ck, *args])[0] == 0
        code, out, _ = call(capsys, ["eval", "--checkpoint", ck, *args])
        assert code == 0
        outs.append(out)
    assert outs[0] == outs[1]
    assert open(tmp_path / "c0.json").read() == open(tmp_path / "c1.json").read()
    assert set(json.loads(outs[0])["metrics"]) >= {"accuracy", "f1", "mean_uncertainty", "per_view_accuracy"}


def test_missing_checkpoint(capsys, tmp_path):
    code, _, _ = call(capsys, ["eval", "--checkpoint", str(tmp_path / "none.json"), *FAST])
    assert code == 1
