import json
import math

from hillmap.cli import run


def read_rows(path, n_cols):
    rows = []
    for line in path.read_text().splitlines():
        if line.startswith("#") or not line:
            continue
        parts = line.split(",")
        if parts[0][0].isalpha():
            continue  # header
        rows.append([float(v) for v in parts[:n_cols]])
    return rows


def test_coeffs_prints_quintic(capsys):
    assert run(["coeffs", "--m", "5"]) == 0
    assert capsys.readouterr().out.strip() == "1 0 -5 0 5 0"


def test_bands_free_edges(tmp_path):
    out = tmp_path / "b.csv"
    code = run([
        "bands", "--potential", "free", "--l", "1", "--lambda-max", "40",
        "--out", str(out), "--no-timestamp", "--k-points", "5",
    ])
    assert code == 0
    rows = read_rows(out, 3)
    by_band = {}
    for idx, k, lam in rows:
        by_band.setdefault(idx, []).append((k, lam))
    # band 1 spans [0, pi^2], band 2 continues to 4 pi^2
    assert abs(by_band[1.0][0][1] - 0.0) < 1e-6
    assert abs(by_band[1.0][-1][1] - math.pi**2) < 1e-6
    assert abs(by_band[2.0][-1][1] - math.pi**2) < 1e-6
    assert abs(by_band[2.0][0][1] - 4 * math.pi**2) < 1e-5


def test_bands_json(tmp_path):
    out = tmp_path / "b.json"
    assert run(["bands", "--l", "1", "--lambda-max", "12", "--out", str(out),
                "--no-timestamp"]) == 0
    doc = json.loads(out.read_text())
    assert doc["config"]["lambda_max"] == 12.0
    assert abs(doc["bands"][0][1] - math.pi**2) < 1e-6


def test_bands_piecewise_potential(tmp_path):
    out = tmp_path / "pw.json"
    assert run([
        "bands", "--potential", "piecewise", "--breakpoints", "0,0.3,0.7",
        "--values", "0,1,-0.5", "--l", "1", "--lambda-max", "15",
        "--out", str(out), "--no-timestamp",
    ]) == 0
    doc = json.loads(out.read_text())
    assert len(doc["bands"]) >= 1
    a, b = doc["bands"][0]
    assert a < b


def test_orbit_csv(tmp_path):
    out = tmp_path / "o.csv"
    assert run(["orbit", "--map", "logistic", "--x0", "0.75", "--n", "4",
                "--out", str(out), "--no-timestamp"]) == 0
    rows = read_rows(out, 2)
    assert [r[1] for r in rows] == [0.75] * 5


def test_density_evolve_json(tmp_path):
    out = tmp_path / "evo.json"
    assert run(["density-evolve", "--m", "2", "--steps", "3",
                "--resolution", "1024", "--out", str(out), "--no-timestamp"]) == 0
    doc = json.loads(out.read_text())
    report = doc["report"]
    assert [r["step"] for r in report] == [0, 1, 2, 3]
    assert all(abs(r["mass"] - 1.0) < 1e-9 for r in report)
    assert report[3]["l1_to_invariant"] < report[1]["l1_to_invariant"]


def test_ensemble_json_and_determinism(tmp_path):
    out1, out2 = tmp_path / "r1.json", tmp_path / "r2.json"
    argv = ["ensemble", "--m", "2", "--samples", "20000", "--iters", "3",
            "--seed", "42", "--no-timestamp"]
    assert run(argv + ["--out", str(out1)]) == 0
    assert run(argv + ["--out", str(out2)]) == 0
    a, b = out1.read_text(), out2.read_text()
    assert a.replace(str(out1), "X") == b.replace(str(out2), "X")
    doc = json.loads(a)
    assert doc["report"]["seed"] == 42
    assert len(doc["report"]["distances"]) == 4


def test_ensemble_csv(tmp_path):
    out = tmp_path / "d.csv"
    assert run(["ensemble", "--m", "2", "--samples", "5000", "--iters", "2",
                "--seed", "1", "--out", str(out), "--no-timestamp"]) == 0
    rows = read_rows(out, 2)
    assert len(rows) == 3
    assert rows[0][1] > rows[2][1]


def test_lyapunov_quadrature(capsys, tmp_path):
    out = tmp_path / "l.json"
    assert run(["lyapunov", "--m", "3", "--out", str(out), "--no-timestamp"]) == 0
    doc = json.loads(out.read_text())
    assert abs(doc["result"]["value"] - math.log(3.0)) < 1e-4
    assert "lyapunov(3)" in capsys.readouterr().out


def test_integral_sweep(tmp_path):
    out = tmp_path / "I.csv"
    assert run(["integral-sweep", "--a-min", "-1", "--a-max", "1",
                "--count", "5", "--out", str(out), "--no-timestamp"]) == 0
    rows = read_rows(out, 2)
    assert len(rows) == 5
    assert all(abs(r[1]) < 1e-6 for r in rows)


def test_mixing_check(tmp_path):
    out = tmp_path / "mix.csv"
    assert run(["mixing-check", "--m", "3", "--a-left", "0", "--a-right", "1/3",
                "--b-left", "1/3", "--b-right", "2/3", "--n-max", "4",
                "--out", str(out), "--no-timestamp"]) == 0
    rows = read_rows(out, 3)
    # resolution-1 m-adic sets decorrelate exactly from n = 1
    assert all(r[2] == 1.0 for r in rows)


def test_mathieu_pipeline(capsys, tmp_path):
    out = tmp_path / "m.csv"
    assert run(["mathieu", "--x0", "0.2", "--n", "2", "--out", str(out),
                "--no-timestamp"]) == 0
    text = capsys.readouterr().out
    assert "lambda0" in text
    lam0 = float(text.splitlines()[0].split("=")[1])
    assert -10.0 < lam0 < -9.0
    rows = read_rows(out, 4)
    assert all(r[3] < 1e-5 for r in rows)


def test_config_file_and_flag_precedence(tmp_path):
    conf = tmp_path / "run.conf"
    conf.write_text("m = 4\nout = ignored.csv\n")
    out = tmp_path / "c.csv"
    assert run(["coeffs", "--config", str(conf), "--out", str(out),
                "--no-timestamp", "--m", "3"]) == 0
    rows = read_rows(out, 2)
    assert [r[1] for r in rows] == [1.0, 0.0, -3.0, 0.0]  # flag m=3 wins


def test_unknown_config_key_rejected(tmp_path):
    conf = tmp_path / "bad.conf"
    conf.write_text("bogus = 1\n")
    assert run(["coeffs", "--config", str(conf)]) == 1


def test_bad_flag_exits_one(capsys):
    assert run(["coeffs", "--bogus"]) == 1
    assert "usage" in capsys.readouterr().err.lower()


def test_domain_error_exits_one(capsys, tmp_path):
    out = tmp_path / "o.csv"
    code = run(["orbit", "--map", "tent", "--m", "2", "--x0", "1.5",
                "--out", str(out)])
    assert code == 1


def test_nonconvergence_exits_two(tmp_path):
    out = tmp_path / "I.csv"
    code = run(["integral-sweep", "--a-min", "2", "--a-max", "2", "--count", "1",
                "--abs-tol", "1e-30", "--out", str(out)])
    assert code == 2


def test_out_dir_env(tmp_path, monkeypatch):
    monkeypatch.setenv("HILLMAP_OUT_DIR", str(tmp_path))
    assert run(["coeffs", "--m", "2", "--out", "sub/c.csv", "--no-timestamp"]) == 0
    assert (tmp_path / "sub" / "c.csv").exists()
