"""The figure package consumes the simulator only through its command-line
interface and file formats: the fixture CSVs here are produced by invoking
``linksched`` as a subprocess."""

import json
import subprocess
import sys

import pytest

from linksched_figures import FigureSpec, render
from linksched_figures.render import main


@pytest.fixture(scope="module")
def sweep_csvs(tmp_path_factory):
    root = tmp_path_factory.mktemp("sweep")
    spec = {
        "topology": {"n_links": 40, "area_side": 10.0,
                     "min_length": 1.45, "max_length": 1.45, "seeds": None},
        "gamma_f": [3.0, 4.0, 6.0],
        "alpha": [4.0],
        "sinr_th": [10.0],
        "modes": ["ignore", "clt"],
        "replications": 3,
        "master_seed": 11,
        "max_iter": 80,
    }
    spec_path = root / "spec.json"
    spec_path.write_text(json.dumps(spec))
    rows = root / "rows.csv"
    summary = root / "summary.csv"
    subprocess.run(
        [sys.executable, "-m", "linksched.cli", "sweep", "--spec", str(spec_path),
         "--out", str(rows), "--summary-csv", str(summary)],
        check=True, capture_output=True,
    )
    return rows, summary


@pytest.fixture(scope="module")
def clt_csv(tmp_path_factory):
    root = tmp_path_factory.mktemp("clt")
    out_csv = root / "clt.csv"
    subprocess.run(
        [sys.executable, "-m", "linksched.cli", "clt", "--gamma-f", "4.0",
         "--k", "30", "--out-csv", str(out_csv),
         "--out-json", str(root / "clt.json")],
        check=True, capture_output=True,
    )
    return out_csv


def test_renders_all_five_kinds(sweep_csvs, clt_csv, tmp_path):
    rows, summary = sweep_csvs
    jobs = [
        ("outage_vs_gamma", summary),
        ("outage_vs_alpha", summary),
        ("outage_vs_sinr", summary),
        ("lyapunov", clt_csv),
        ("convergence", rows),
    ]
    for kind, source in jobs:
        out = tmp_path / f"{kind}.png"
        spec = FigureSpec(kind=kind, csv_path=str(source), out_path=str(out))
        assert render(spec) == str(out)
        assert out.stat().st_size > 0


def test_rendering_is_byte_deterministic(sweep_csvs, tmp_path):
    _, summary = sweep_csvs
    a = tmp_path / "a.png"
    b = tmp_path / "b.png"
    for out in (a, b):
        render(FigureSpec(kind="outage_vs_gamma", csv_path=str(summary),
                          out_path=str(out)))
    assert a.read_bytes() == b.read_bytes()


def test_mode_filter_limits_series(sweep_csvs, tmp_path):
    rows, summary = sweep_csvs
    out = tmp_path / "one.png"
    code = main(["--kind", "outage_vs_gamma", "--csv", str(summary),
                 "--out", str(out), "--modes", "clt"])
    assert code == 0 and out.exists()


def test_empty_series_filter_is_an_error(sweep_csvs, tmp_path, capsys):
    _, summary = sweep_csvs
    code = main(["--kind", "outage_vs_gamma", "--csv", str(summary),
                 "--out", str(tmp_path / "x.png"), "--modes", "nosuchmode"])
    assert code == 2
    assert "no series left" in capsys.readouterr().err


def test_schema_mismatch_reports_columns(tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text("a,b\n1,2\n")
    code = main(["--kind", "lyapunov", "--csv", str(bad),
                 "--out", str(tmp_path / "x.png")])
    assert code == 2
    err = capsys.readouterr().err
    assert "missing column" in err and "lyapunov_ratio_at_k" in err


def test_unknown_kind_is_argument_error(tmp_path):
    assert main(["--kind", "pie", "--csv", "x.csv",
                 "--out", str(tmp_path / "x.png")]) == 1


def test_per_replication_csv_rejected_for_outage_kinds(sweep_csvs, tmp_path, capsys):
    rows, _ = sweep_csvs
    code = main(["--kind", "outage_vs_gamma", "--csv", str(rows),
                 "--out", str(tmp_path / "x.png")])
    assert code == 2
    assert "missing column" in capsys.readouterr().err


def test_inputs_left_untouched(sweep_csvs, tmp_path):
    _, summary = sweep_csvs
    before = summary.read_bytes()
    render(FigureSpec(kind="outage_vs_alpha", csv_path=str(summary),
                      out_path=str(tmp_path / "y.png")))
    assert summary.read_bytes() == before
