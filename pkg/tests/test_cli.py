import csv
import io
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from chemolab import cli, pde
from chemolab import hypothesis as hyp
from chemolab.config import parse_config

from conftest import EQ_H4

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


def text(name, **subs):
    t = (CONFIGS / f"{name}.ini").read_text()
    for key, value in subs.items():
        lines = t.splitlines()
        hits = [i for i, ln in enumerate(lines) if ln.split("=")[0].strip() == key]
        if hits:
            lines[hits[0]] = f"{key} = {value}"
        else:
            section = {"t_final": "[time]", "chi1": "[params]", "chi2": "[params]"}.get(key, "[coefficients]")
            lines.insert(lines.index(section) + 1, f"{key} = {value}")
        t = "\n".join(lines) + "\n"
    return t


def write(tmp_path, body, name="cfg.ini"):
    p = tmp_path / name
    p.write_text(body)
    return str(p)


def read_csv(path):
    with open(path) as fh:
        return list(csv.reader(fh))


def test_shipped_configs_parse():
    for p in CONFIGS.glob("*.ini"):
        parse_config(p.read_text())


def test_check_extinction(tmp_path, capsys):
    assert cli.main(["check", write(tmp_path, text("extinction"))]) == 0
    out = capsys.readouterr().out
    assert "h1 = holds" in out
    for name in ("cond_1_12", "cond_1_13", "cond_1_14"):
        assert f"{name} = holds" in out
    assert "alpha = 1.0, beta = 1.0" in out


def test_check_without_chemotaxis_notes_coincidence(tmp_path, capsys):
    assert cli.main(["check", write(tmp_path, text("persistence", chi1="0.0", chi2="0.0"))]) == 0
    out = capsys.readouterr().out
    assert "H4 and H5 coincide" in out
    assert "h4 = holds" in out and "h5 = holds" in out


def test_check_h1_failure(tmp_path, capsys):
    assert cli.main(["check", write(tmp_path, text("persistence", **{"a1.base": "0.05"}))]) == 0
    out = capsys.readouterr().out
    assert "h1 = fails" in out and "A_bar" not in out


def test_simulate_zero_init(tmp_path):
    body = text("persistence", **{"u0.base": "0.0", "u0.amplitude": "", "u0.mode": "", "v0.base": "0.0",
                                  "v0.amplitude": "", "v0.mode": "", "t_final": "2.0"})
    out = tmp_path / "z.csv"
    assert cli.main(["simulate", write(tmp_path, body), "-o", str(out)]) == 0
    rows = read_csv(out)
    assert rows[0] == list(pde.TrajectorySummary.COLUMNS)
    assert len(rows) == 10
    assert all(float(x) == 0 for r in rows[1:] for x in r[1:])


def test_simulate_equilibrium_and_determinism(tmp_path):
    cfg = write(tmp_path, text("persistence", t_final="30.0"))
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert cli.main(["simulate", cfg, "-o", str(a)]) == 0
    assert cli.main(["simulate", cfg, "-o", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    last = dict(zip(pde.TrajectorySummary.COLUMNS, map(float, read_csv(a)[-1])))
    assert last["min_u"] == pytest.approx(EQ_H4, abs=1e-4) and last["max_u"] == pytest.approx(EQ_H4, abs=1e-4)
    # 17 significant digits round-trip exactly
    assert all(len(x.replace(".", "").lstrip("0")) <= 17 for x in read_csv(a)[-1])


def test_simulate_extinction(tmp_path):
    out = tmp_path / "e.csv"
    assert cli.main(["simulate", write(tmp_path, text("extinction", t_final="40.0")), "-o", str(out)]) == 0
    last = dict(zip(pde.TrajectorySummary.COLUMNS, map(float, read_csv(out)[-1])))
    assert last["max_u"] <= 1e-4


def test_simulate_failure_flushes_partial_csv(tmp_path, monkeypatch, capsys):
    real = pde.advance

    def failing(state, model, stepper, t_end):
        if t_end > 1.0:
            raise pde.BlowUpError("blow-up in u", 1.125)
        return real(state, model, stepper, t_end)

    monkeypatch.setattr(pde, "advance", failing)
    out = tmp_path / "f.csv"
    assert cli.main(["simulate", write(tmp_path, text("persistence")), "-o", str(out)]) == 1
    assert "t=1.125" in capsys.readouterr().err
    rows = read_csv(out)
    assert rows[0][0] == "t" and float(rows[-1][0]) == 1.0


def test_classify(tmp_path, capsys):
    assert cli.main(["classify", write(tmp_path, text("persistence", t_final="30.0"))]) == 0
    assert "verdict = Persistence" in capsys.readouterr().out
    assert cli.main(["classify", write(tmp_path, text("extinction", t_final="40.0"))]) == 0
    out = capsys.readouterr().out
    assert "verdict = ExtinctionOfU" in out and "alpha_beta_band = pass" in out


def test_classify_short_horizon(tmp_path, capsys):
    assert cli.main(["classify", write(tmp_path, text("extinction", t_final="1.0"))]) == 2
    assert "Indeterminate" in capsys.readouterr().out
    # long enough for the tail window but u has not died out yet
    body = text("extinction", t_final="6.0").replace("sample_every = 0.5", "sample_every = 0.05")
    assert cli.main(["classify", write(tmp_path, body)]) == 2
    assert "verdict = Indeterminate" in capsys.readouterr().out


def test_poincare_constant(tmp_path, capsys):
    out = tmp_path / "p.csv"
    body = text("persistence", **{"counts": "33"}).replace("[time]", "[analysis]\npoincare_period = 5.0\n[time]")
    assert cli.main(["poincare", write(tmp_path, body), "-o", str(out)]) == 0
    assert "converged = yes" in capsys.readouterr().out
    rows = read_csv(out)
    assert rows[0] == ["x", "u", "v", "w"]
    u = np.array([float(r[1]) for r in rows[1:]])
    assert np.ptp(u) <= 1e-7 and u.mean() == pytest.approx(EQ_H4, abs=1e-7)


def test_poincare_periodic(tmp_path, capsys):
    out = tmp_path / "p.csv"
    assert cli.main(["poincare", write(tmp_path, text("periodic")), "-o", str(out)]) == 0
    report = capsys.readouterr().out
    res = float(report.split("residual = ")[1].split()[0])
    assert res <= 1e-8


def test_poincare_mismatched_periods(tmp_path, capsys):
    body = text("periodic", **{"b0.temporal_amplitude": "0.1", "b0.temporal_period": "3.0"})
    assert cli.main(["poincare", write(tmp_path, body)]) == 1
    assert "periods differ" in capsys.readouterr().err


def test_poincare_nonconvergence(tmp_path, capsys):
    body = text("periodic").replace("[time]", "[analysis]\nmax_iter = 1\n[time]")
    assert cli.main(["poincare", write(tmp_path, body), "-o", str(tmp_path / "p.csv")]) == 3
    assert "converged = no" in capsys.readouterr().out


def test_config_error_exit(tmp_path, capsys):
    assert cli.main(["check", write(tmp_path, text("persistence").replace("chi1", "cih1"))]) == 1
    assert "unknown key 'cih1'" in capsys.readouterr().err


def test_sweep_order_and_parallel(tmp_path):
    cfg = parse_config(text("persistence", t_final="20.0"))
    serial = cli.sweep_rows(cfg, "chi2", ["0", "0.1", "0.2"], workers=1)
    parallel = cli.sweep_rows(cfg, "chi2", ["0", "0.1", "0.2"], workers=3)
    assert serial == parallel
    assert [r[0] for r in serial] == ["0", "0.1", "0.2"]
    assert all(r[1] == "Persistence" and r[-1] == "" for r in serial)


def test_sweep_records_errors_and_empty(tmp_path):
    cfg = parse_config(text("persistence", t_final="20.0"))
    rows = cli.sweep_rows(cfg, "chi2", ["-1", "0.1"], workers=1)
    assert rows[0][1] == "" and "must be >= 0" in rows[0][-1]
    assert rows[1][1] == "Persistence"
    out = tmp_path / "s.csv"
    assert cli.main(["sweep", write(tmp_path, text("persistence")), "--key", "chi2", "--values", "",
                     "-o", str(out)]) == 0
    assert out.read_text() == ",".join(cli.SWEEP_COLUMNS) + "\n"


def test_sweep_across_extinction_boundary(tmp_path, capsys):
    base = text("extinction", t_final="40.0")
    # the checker puts the boundary of the a2 condition at a2 = 1
    for a2, expect in (("0.5", False), ("1.5", True)):
        cfg = parse_config(base.replace("a2.base = 2.0", f"a2.base = {a2}"))
        assert hyp.check_extinction_conditions(cfg.model().extrema, cfg.params)["cond_1_13"].holds == expect
    out = tmp_path / "s.csv"
    assert cli.main(["sweep", write(tmp_path, base), "--key", "a2.base", "--values", "0.5,1.5",
                     "-o", str(out)]) == 0
    rows = read_csv(out)
    assert [r[1] for r in rows[1:]] == ["Persistence", "ExtinctionOfU"]


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "chemolab", "check", write(tmp_path, text("persistence"))],
                          capture_output=True, text=True, check=True)
    assert "h4 = holds" in proc.stdout
