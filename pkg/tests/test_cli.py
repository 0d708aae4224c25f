import json
import subprocess
import sys

import numpy as np
import pytest

from conftest import planted
from vscc.cli import REPORT_COLUMNS, RunConfig, main, read_report, report_rows, run
from vscc.errors import ConfigError
from vscc.gmm import FitConfig
from vscc.workflows import run_clustering


@pytest.fixture
def planted_csv(tmp_path):
    ds, truth = planted(n_per=60, sep=3.0, p_signal=2, p_noise=1, seed=3)
    path = tmp_path / "planted.csv"
    with path.open("w") as fh:
        fh.write(",".join(ds.var_names) + ",cls\n")
        for row, g in zip(ds.values, truth.labels):
            fh.write(",".join(repr(float(v)) for v in row) + f",g{g}\n")
    return path


ARGS = ["--g-max", "3"]


def test_cluster_run_artifacts(planted_csv, tmp_path):
    out = tmp_path / "out"
    assert main(["--input", str(planted_csv), "--labels", "cls", "--out", str(out), *ARGS]) == 0
    rows = read_report(out / "report.csv")
    assert (out / "report.csv").read_text().splitlines()[0] == ",".join(REPORT_COLUMNS)
    assert sum(r.status == "chosen" for r in rows) == 1
    chosen = json.loads((out / "chosen.json").read_text())
    assert chosen["ari"] == pytest.approx(1.0)
    assert chosen["relationship"] in {r.relationship for r in rows}
    if chosen["n_vars"] == 2:
        lines = (out / "chosen_2d.csv").read_text().splitlines()
        assert lines[0] == "x,y,label" and len(lines) == 121


def test_byte_identical_reruns(planted_csv, tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for out in (a, b):
        assert main(["--input", str(planted_csv), "--labels", "cls", "--out", str(out), "--omit-runtime", *ARGS]) == 0
    assert (a / "report.csv").read_bytes() == (b / "report.csv").read_bytes()
    assert (a / "chosen.json").read_bytes() == (b / "chosen.json").read_bytes()


def test_report_round_trip(planted_csv, tmp_path):
    from vscc.io import ingest_csv

    ds, known = ingest_csv(planted_csv, "cls")
    report = run_clustering(ds, FitConfig(g_range=(1, 3)))
    rows = report_rows(report, known.labels)
    from vscc.cli import write_report

    write_report(tmp_path / "r.csv", rows)
    back = read_report(tmp_path / "r.csv")
    assert len(back) == len(report.all_candidates)
    for r, b in zip(rows, back):
        assert (r.relationship, r.n_vars, r.vars, r.G, r.model, r.status) == \
               (b.relationship, b.n_vars, b.vars, b.G, b.model, b.status)
        for f in ("bic", "uncertainty", "ari", "runtime_s"):
            x, y = getattr(r, f), getattr(b, f)
            assert (x is None) == (y is None)
            if x is not None:
                assert y == pytest.approx(x, abs=1e-6)


def test_supervised_mode_with_truth(tmp_path):
    ds, truth = planted(n_per=50, sep=3.0, p_signal=2, p_noise=1, seed=4)
    mask = np.random.default_rng(0).random(ds.n) < 0.5
    path = tmp_path / "semi.csv"
    with path.open("w") as fh:
        fh.write("a,b,c,known,truth\n")
        for row, g, m in zip(ds.values, truth.labels, mask):
            fh.write(",".join(map(repr, row.tolist())) + f",{g if m else ''},{g}\n")
    for mode in ("supervised", "semisupervised"):
        out = tmp_path / mode
        code = main(["--mode", mode, "--input", str(path), "--labels", "known", "--truth", "truth",
                     "--out", str(out), *ARGS])
        assert code == 0
        chosen = json.loads((out / "chosen.json").read_text())
        assert chosen["ari"] == pytest.approx(1.0)


def test_error_exit_codes(tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text("a,b\n1,2\n3\n")
    out = tmp_path / "never"
    assert main(["--input", str(bad), "--out", str(out)]) == 2
    assert not out.exists()
    err = capsys.readouterr().err
    assert "category=data" in err and "kind=ParseError" in err
    assert main(["--mode", "supervised", "--input", str(bad), "--out", str(out)]) == 1
    with pytest.raises(SystemExit) as e:
        main(["--mode", "bogus"])
    assert e.value.code == 1
    assert main(["--input", str(tmp_path / "missing.csv"), "--out", str(out)]) == 2
    assert not out.exists()


def test_one_group_pipeline_error(tmp_path, capsys):
    rng = np.random.default_rng(0)
    path = tmp_path / "blob.csv"
    np.savetxt(path, rng.standard_normal((150, 2)), delimiter=",", header="a,b", comments="")
    assert main(["--input", str(path), "--out", str(tmp_path / "o"), *ARGS]) == 3
    err = capsys.readouterr().err
    assert "InitialSolutionHasOneGroup" in err and "g_min=2" in err


def test_simulate_mode(tmp_path):
    out = tmp_path / "sim"
    code = main(["--mode", "simulate", "--reps", "2", "--signal", "2", "--noise", "1", "--groups", "2",
                 "--n-min", "30", "--n-max", "40", "--out", str(out), *ARGS])
    assert code == 0
    summary = json.loads((out / "summary.json").read_text())
    assert set(summary["arms"]) == {"vscc", "full"}
    assert "surrogate" in summary["note"]
    assert (out / "simulation_vscc.csv").exists() and (out / "simulation_full.csv").exists()


def test_run_config_validation(tmp_path):
    with pytest.raises(ConfigError):
        RunConfig(mode="cluster", out=tmp_path)
    with pytest.raises(ConfigError):
        RunConfig(mode="cluster", out=tmp_path, input=tmp_path, g_min=3, g_max=2)


def test_module_entry_point(planted_csv, tmp_path):
    res = subprocess.run([sys.executable, "-m", "vscc", "--input", str(planted_csv), "--labels", "cls", "--out",
                          str(tmp_path / "m"), *ARGS], capture_output=True, text=True)
    assert res.returncode == 0 and res.stdout.startswith("chosen:")
