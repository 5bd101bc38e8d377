import json
import math
import subprocess
import sys

import numpy as np
import pytest

from hkgl import io
from hkgl.cli import main, resolve_config
from hkgl.errors import ConfigError
from hkgl.geometry import Circle, PointCloud


def run(args, capsys):
    code = main(args)
    out, err = capsys.readouterr()
    return code, out, err


def test_sample_writes_cloud(tmp_path, capsys):
    path = tmp_path / "pc.csv"
    code, _, _ = run(["sample", "--manifold", "circle:1.0", "--n", "1000", "--density", "uniform",
                      "--seed", "42", "--out", str(path)], capsys)
    assert code == 0
    lines = path.read_text().splitlines()
    assert len(lines) == 1001 and lines[0].startswith("#")
    cloud = io.read_point_cloud(path)
    assert cloud.n == 1000 and cloud.seed == 42


def test_sample_to_stdout(capsys):
    code, out, _ = run(["sample", "--n", "3"], capsys)
    assert code == 0 and len(out.splitlines()) == 4


@pytest.mark.parametrize("args,flag", [
    (["sample", "--manifold", "moebius:1"], "--manifold"),
    (["sample", "--n", "1"], "--n"),
    (["converge", "--ns", "500"], "--ns"),
    (["spectrum", "--epsilon", "auto:bogus"], "--epsilon"),
])
def test_config_errors_exit_2(args, flag, capsys):
    code, _, err = run(args, capsys)
    assert code == 2
    assert flag in err and err.startswith("hkgl: error:")


def test_argparse_errors_exit_2(capsys):
    assert run(["spectrum", "--alpha", "3"], capsys)[0] == 2
    assert run(["nonsense"], capsys)[0] == 2


def test_numerical_error_exits_3(tmp_path, capsys):
    # the antipodal oracle entry underflows at t = 1e-4
    theta = np.array([0.0, math.pi])
    path = tmp_path / "pc.csv"
    io.write_point_cloud(path, PointCloud(Circle(1.0).embed(theta), theta, Circle(1.0)))
    code, _, err = run(["varadhan", "--cloud", str(path), "--pairs", "0:1", "--t-list", "0.0001",
                        "--source", "oracle"], capsys)
    assert code == 3 and "floor" in err


def test_config_file_strict_and_merged(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"command": "sample", "nn": 10}))
    code, _, err = run(["sample", "--config", str(bad)], capsys)
    assert code == 2 and "nn" in err
    good = tmp_path / "good.json"
    good.write_text(json.dumps({"command": "sample", "n": 10, "seed": 5}))
    cfg = resolve_config(["sample", "--config", str(good), "--seed", "6"], environ={})
    assert (cfg.n, cfg.seed) == (10, 6)
    code, _, err = run(["spectrum", "--config", str(good)], capsys)
    assert code == 2 and "--config" in err


def test_hk_seed_overrides(capsys):
    assert resolve_config(["sample", "--seed", "3"], environ={"HK_SEED": "9"}).seed == 9
    assert resolve_config(["sample", "--seed", "3"], environ={}).seed == 3
    with pytest.raises(ConfigError, match="HK_SEED"):
        resolve_config(["sample"], environ={"HK_SEED": "x"})


def test_spectrum_oracle_and_header(tmp_path, capsys):
    out, vec, kde_out = tmp_path / "s.csv", tmp_path / "v.bin", tmp_path / "k.csv"
    code, _, _ = run(["spectrum", "--n", "2000", "--k", "5", "--oracle", "--epsilon", "auto:eig",
                      "--epsilon-mult", "0.1", "--out", str(out), "--vectors", str(vec),
                      "--kde-out", str(kde_out)], capsys)
    assert code == 0
    meta, rows, _ = io.read_table(out)
    assert float(meta["epsilon"]) == pytest.approx(0.7205 * 0.1, abs=5e-6)
    assert float(rows[0]["mu"]) == 0 and float(rows[0]["lambda_true"]) == 0
    assert float(rows[0]["abs_err"]) == 0
    dec, norms = io.read_eigenvectors(vec)
    assert dec.k == 5 and np.all(np.isfinite(norms))
    _, krows, _ = io.read_table(kde_out)
    assert len(krows) == 2000 and float(krows[0]["p_true"]) == pytest.approx(1 / (2 * math.pi))


def test_spectrum_alpha_zero(capsys):
    code, out, _ = run(["spectrum", "--n", "300", "--k", "4", "--alpha", "0"], capsys)
    assert code == 0 and "alpha=0" in out.splitlines()[0]


def test_heat_single_pair_positive(tmp_path, capsys):
    code, out, _ = run(["heat", "--n", "300", "--t", "0.5", "--k", "21", "--pairs", "0:0"], capsys)
    lines = [l for l in out.splitlines() if not l.startswith("#")]
    assert code == 0 and len(lines) == 2
    assert float(lines[1].split(",")[2]) > 0


def test_heat_large_time_is_constant(tmp_path, capsys):
    out, mat = tmp_path / "h.csv", tmp_path / "h.bin"
    code, _, _ = run(["heat", "--n", "200", "--t", "100", "--k", "21", "--out", str(out),
                      "--matrix", str(mat)], capsys)
    assert code == 0
    _, rows, _ = io.read_table(out)
    vals = np.array([float(r["H_est"]) for r in rows])
    assert len(vals) == 200 * 201 // 2
    assert np.ptp(vals) < 1e-6
    assert np.max(np.abs(io.read_heat_matrix(mat).H - 1 / (2 * math.pi))) < 0.2


def test_heat_oracle_column(tmp_path, capsys):
    code, out, _ = run(["heat", "--n", "400", "--t", "0.5", "--k", "21", "--pairs", "0:1,2:3",
                        "--oracle", "--epsilon-mult", "0.1"], capsys)
    rows = [l.split(",") for l in out.splitlines()[1:]]
    assert rows[0] == ["i", "j", "H_est", "H_true", "abs_err"]
    assert all(float(r[4]) < 0.05 for r in rows[1:])


def test_heat_suggest_k(capsys):
    code, out, _ = run(["heat", "--n", "200", "--t", "0.5", "--suggest-k", "--pairs", "0:0"], capsys)
    assert code == 0 and "K=2" in out.splitlines()[0]
    code, _, err = run(["heat", "--n", "200", "--t", "1e-12", "--suggest-k"], capsys)
    assert code == 2


def test_converge_csv(tmp_path, capsys):
    path = tmp_path / "c.csv"
    code, _, _ = run(["converge", "--manifold", "circle:1.0", "--ns", "200,300,400", "--alpha", "1",
                      "--k", "5", "--t", "0.5", "--epsilon-mult", "0.1", "--out", str(path)], capsys)
    assert code == 0
    _, rows, comments = io.read_table(path)
    assert sorted({int(r["n"]) for r in rows}) == [200, 300, 400]
    assert {c["metric"] for c in comments} == {"eigenvalue_error", "eigenvector_residual",
                                              "heat_sup_abs"}
    assert all("slope" in c for c in comments)


def test_converge_warns_on_biased_alpha0(capsys, caplog):
    code, _, _ = run(["converge", "--ns", "100,150,200", "--alpha", "0", "--density", "cosine:0.5",
                        "--k", "3", "--epsilon-mult", "0.2"], capsys)
    assert code == 0 and "uniform" in caplog.text


def test_pointwise_rows(capsys):
    code, out, _ = run(["pointwise", "--ns", "300,600", "--epsilon-mult", "0.1"], capsys)
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "n,epsilon,alpha,index,lambda,max_abs_err"
    assert [int(l.split(",")[0]) for l in lines[1:]] == [300, 600]


def test_varadhan_oracle_source(capsys):
    code, out, _ = run(["varadhan", "--n", "50", "--pairs", "0:0,0:1", "--source", "oracle",
                        "--oracle"], capsys)
    lines = out.splitlines()
    assert code == 0 and lines[1] == "i,j,t_used,d2_est,d2_true,abs_err"
    assert float(lines[2].split(",")[4]) == 0.0


def test_threads_flag(capsys):
    assert run(["spectrum", "--n", "100", "--k", "3", "--threads", "1"], capsys)[0] == 0


def test_console_script_entry_point():
    res = subprocess.run([sys.executable, "-m", "hkgl.cli", "sample", "--n", "1"],
                         capture_output=True, text=True)
    assert res.returncode == 2 and "--n" in res.stderr
