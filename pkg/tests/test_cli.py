import csv
import io
import json
import math

import pytest

from quaddisc.cli import run


def _run(capsys, *argv):
    code = run(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def _rows(text):
    return list(csv.reader(io.StringIO(text)))


def test_invert_chi_square_point(capsys):
    code, out, _ = _run(capsys, "invert", "--gf", "lego", "--m", "5", "--t", "4")
    assert code == 0
    header, row = _rows(out)
    assert header == ["t", "H", "imag_residual"]
    assert float(row[1]) == pytest.approx(math.exp(-2), abs=1e-4)


def test_csv_layout(tmp_path):
    path = tmp_path / "t.csv"
    assert run(["invert", "--gf", "lego", "--m", "5", "--t", "1,2.5", "--out", str(path)]) == 0
    raw = path.read_bytes()
    assert b"\r" not in raw and raw.endswith(b"\n")
    rows = _rows(raw.decode())
    assert len(rows) == 3
    value = rows[1][1]
    mantissa = value.split("e")[0].lstrip("-").replace(".", "").lstrip("0")
    assert len(mantissa) <= 12


def test_usage_errors_exit_two(capsys):
    assert _run(capsys, "gf", "--gf", "lego", "--z", "0.1")[0] == 2
    assert _run(capsys, "gf", "--gf", "lego", "--m", "3", "--z", "0.5")[0] == 2  # pole
    assert _run(capsys, "fig", "--id", "9")[0] == 2
    assert _run(capsys, "nonsense")[0] == 2
    code, _, err = _run(capsys, "invert", "--gf", "lego", "--m", "2", "--t", "1")
    assert code == 2 and err


def test_numerical_failure_exits_one(capsys, monkeypatch):
    import quaddisc.cli as cli
    from quaddisc.errors import ConvergenceError

    def fail(e):
        raise ConvergenceError("quadrature stalled")

    monkeypatch.setattr(cli, "energy_point", fail)
    code, _, err = _run(capsys, "wiener-instanton", "--e-min", "1", "--e-max", "2", "--steps", "2")
    assert code == 1 and "stalled" in err


def test_fig_2(tmp_path):
    path = tmp_path / "fig2.csv"
    assert run(["fig", "--id", "2", "--w-plus", "0.09", "--out", str(path)]) == 0
    rows = _rows(path.read_text())
    assert rows[0] == ["v", "z", "sigma", "wall_threshold"]
    body = [[float(x) for x in r] for r in rows[1:]]
    assert all(r[3] == pytest.approx(0.238, abs=5e-4) for r in body)
    assert min(2 * r[1] for r in body) > 0.09
    assert any(r[2] < 0 for r in body)


def test_fig_4(capsys):
    code, out, _ = _run(capsys, "fig", "--id", "4", "--e-max", "12", "--steps", "24")
    assert code == 0
    rows = _rows(out)
    assert rows[0] == ["E", "T_quad", "T_series", "T_asymp"]
    assert len(rows) == 25
    last = [float(x) for x in rows[-1]]
    assert last[0] == 12.0 and last[1] == pytest.approx(8.31, abs=0.15)


def test_fig_1_3_5_json(capsys):
    for fig in ("1", "3", "5"):
        extra = ["--grid", "41"] if fig == "3" else ["--steps", "5"] if fig == "5" else []
        code, out, _ = _run(capsys, "fig", "--id", fig, "--format", "json", *extra)
        assert code == 0
        payload = json.loads(out)
        assert payload["rows"] and "summary" in payload
    assert payload["columns"] == ["E", "S_quad", "S_series", "S_bound"]


def test_byte_identical_repeats(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for path in (a, b):
        assert run(["mc", "--n", "50", "--reps", "20", "--seed", "4", "--out", str(path)]) == 0
    assert a.read_bytes() == b.read_bytes()
    c = tmp_path / "c.csv"
    run(["mc", "--n", "50", "--reps", "20", "--seed", "5", "--out", str(c)])
    assert c.read_bytes() != a.read_bytes()


def test_config_file_and_override(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"gf": "lego", "m": 5, "t": [4.0]}))
    code, out, _ = _run(capsys, "invert", "--config", str(cfg))
    assert code == 0
    assert float(_rows(out)[1][1]) == pytest.approx(math.exp(-2), abs=1e-4)
    code, out, _ = _run(capsys, "invert", "--config", str(cfg), "--t", "2")
    assert float(_rows(out)[1][0]) == 2.0


def test_unknown_config_key(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"gf": "lego", "bogus": 1}))
    assert _run(capsys, "invert", "--config", str(cfg))[0] == 2
    assert _run(capsys, "invert", "--gf", "lego", "--config", str(tmp_path / "missing.json"))[0] == 2


def test_eigen_json(capsys):
    code, out, _ = _run(capsys, "eigen", "--a", "1,2,3", "--b", "1,1,1")
    assert code == 0
    payload = json.loads(out)
    assert sum(payload["eigenvalues"]) == pytest.approx(9.0)
    assert payload["det"] == pytest.approx(1 * 2 * 3 * (1 + 1 + 1 / 2 + 1 / 3))
    code, out, _ = _run(capsys, "eigen", "--a", "1,2", "--b", "0,0", "--format", "csv")
    assert _rows(out) == [["index", "eigenvalue"], ["0", "1"], ["1", "2"]]


def test_lego_instanton_summary(tmp_path):
    path = tmp_path / "scan.csv"
    assert run(["lego-instanton", "--w-plus", "0.09", "--v-max", "9", "--out", str(path)]) == 0
    summary = json.loads((tmp_path / "scan.csv.summary.json").read_text())
    assert summary["v_c"] == pytest.approx(8.7, abs=0.3)
    assert summary["wall_region_found"] is True
    assert summary["wall_threshold"] == pytest.approx(0.2381, abs=5e-4)


def test_discrepancy_and_gf(capsys, tmp_path):
    pts = tmp_path / "p.csv"
    pts.write_text("0.1\n0.6\n")
    code, out, _ = _run(capsys, "discrepancy", "--kind", "lego", "--m", "2", "--points", str(pts))
    assert code == 0 and float(_rows(out)[1][3]) == pytest.approx(0.0)
    code, out, _ = _run(capsys, "discrepancy", "--kind", "l2star", "--points", str(pts))
    # 1/(12N) + sum (x_(i) - (2i-1)/(2N))^2 with N = 2
    assert float(_rows(out)[1][3]) == pytest.approx(1 / 24 + 0.15 ** 2 + 0.15 ** 2)
    code, out, _ = _run(capsys, "gf", "--gf", "wiener", "--z", "0.01,0.25j")
    rows = _rows(out)
    assert code == 0 and len(rows) == 3
    assert float(rows[1][2]) == pytest.approx(1.0016692, abs=1e-6)


def test_wiener_instanton_commands(capsys):
    code, out, _ = _run(capsys, "wiener-instanton", "--e-min", "1", "--e-max", "2", "--steps", "3")
    assert code == 0 and len(_rows(out)) == 4
    code, out, _ = _run(capsys, "wiener-instanton", "--profile", "5.7,2,33", "--format", "json")
    payload = json.loads(out)
    assert payload["summary"]["residual_max"] < 1e-6
    assert _run(capsys, "wiener-instanton", "--profile", "5.7,x")[0] == 2


def test_global_flags_before_command(capsys):
    before = _run(capsys, "--seed", "7", "--format=json", "mc", "--n", "20", "--reps", "2")
    after = _run(capsys, "mc", "--n", "20", "--reps", "2", "--seed", "7", "--format", "json")
    assert before[0] == after[0] == 0
    assert before[1] == after[1]
    assert json.loads(before[1])["rows"][1][1] == 8
