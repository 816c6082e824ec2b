import json

import pytest

from hingefnn.harness.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_gen_data_and_baseline(tmp_path, capsys):
    code, out, _ = run(capsys, "gen-data", "--scheme", "low_snr", "--per-snr-n", "10", "--seed", "1", "--out", str(tmp_path / "d.csv"))
    assert code == 0 and "80 samples" in out
    code, out, _ = run(capsys, "baseline", "--snr-list", "0,5,10", "--samples", "20000")
    lines = out.strip().splitlines()
    assert code == 0 and lines[0] == "snr_db,optimal_pe,empirical_pe,n" and len(lines) == 4
    assert lines[1].startswith("0,7.86")


def test_train_eval_scatter_validate(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("K = 3\nH = 2\nscheme = all_snr\nper_snr_train_n = 200\nper_snr_test_n = 100\nmax_epochs = 3\n")
    out_dir = tmp_path / "run"
    code, out, _ = run(capsys, "train", "--config", str(cfg), "--seed", "2", "--out-dir", str(out_dir))
    assert code == 0 and "stopped at epoch 3" in out
    for name in ("model.ckpt", "config.txt", "metrics.csv", "eval.csv", "scatter.csv", "scatter.svg", "loss.svg"):
        assert (out_dir / name).exists(), name
    assert "seed = 2" in (out_dir / "config.txt").read_text()

    ckpt = str(out_dir / "model.ckpt")
    code, out, _ = run(capsys, "eval", "--model", ckpt, "--testset", "seed=2,n=100")
    assert code == 0 and out.splitlines()[0] == "snr_db,pe,optimal_pe,n" and len(out.splitlines()) == 10

    run(capsys, "gen-data", "--per-snr-n", "20", "--out", str(tmp_path / "t.csv"))
    code, out, _ = run(capsys, "scatter", "--model", ckpt, "--testset", str(tmp_path / "t.csv"), "--out-dir", str(tmp_path / "sc"))
    assert code == 0 and (tmp_path / "sc" / "scatter.svg").exists()

    code, out, _ = run(capsys, "validate-theory", "--model", ckpt, "--testset", "seed=1,n=50")
    res = json.loads(out)
    assert code == 0 and res["lemma1"]["all_agree"]
    assert set(res["scaling"]["pe"]) == {"x1", "x10000", "x1e+06"}


def test_gradcheck_command(capsys):
    code, out, _ = run(capsys, "gradcheck", "--trials", "4")
    assert code == 0 and out.startswith("PASS")
    code, out, _ = run(capsys, "gradcheck", "--trials", "2", "--tol", "-1")
    assert code == 1 and out.startswith("FAIL")


def test_oracle_pe_command(tmp_path, capsys):
    spec = tmp_path / "spec.json"
    spec.write_text(json.dumps({"H": 1, "alpha_init": 2, "norm_m1": 1, "norm_p1": 1, "s_m1": [-1], "s_p1": [1]}))
    code, out, _ = run(capsys, "oracle-pe", "--spec", str(spec), "--draws", "200000")
    res = json.loads(out)
    assert code == 0 and res["closed_form_pe"] == pytest.approx(0.158655, abs=1e-6)
    assert abs(res["z"]) < 3


def test_errors_exit_nonzero(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("nonsense = 1\n")
    code, _, err = run(capsys, "train", "--config", str(cfg))
    assert code == 2 and "unknown key" in err
    code, _, err = run(capsys, "eval", "--model", str(tmp_path / "missing.ckpt"), "--testset", "seed=1")
    assert code == 2
