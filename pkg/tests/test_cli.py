import json

import numpy as np
import pytest

from kgbeams import cli
from kgbeams.cli import (EXIT_IO, EXIT_OK, EXIT_PARAMETER, EXIT_TOLERANCE, EXIT_USAGE, GridError, GridSpec,
                         main, read_header)


@pytest.fixture(autouse=True)
def _workers(monkeypatch):
    monkeypatch.setenv(cli.WORKERS_ENV, "2")


def load_csv(path):
    return np.loadtxt(path, delimiter=",", skiprows=2, ndmin=2)


def test_info(capsys):
    assert main(["info", "lg"]) == EXIT_OK
    out = capsys.readouterr().out
    for name in ("n", "l", "E", "m", "w0"):
        assert f"    {name} " in out
    assert main(["info", "bg"]) == EXIT_OK
    assert "J_l(2 b rho/a)" in capsys.readouterr().out


def test_unknown_family(capsys):
    assert main(["info", "nope"]) == EXIT_USAGE
    assert "valid ids" in capsys.readouterr().err
    assert main(["sample", "nope", "--grid", "x=0:1:2"]) == EXIT_USAGE


def test_sample_lg_center(tmp_path):
    out = tmp_path / "lg.csv"
    code = main(["sample", "lg", "--params", "n=0,l=0,w0=1,E=2", "--grid", "x=-1:1:3,y=-1:1:3",
                 "--t", "0", "--z", "0", "--out", str(out)])
    assert code == EXIT_OK
    rows = load_csv(out)
    assert rows.shape == (9, 6)
    centre = rows[4]
    assert centre[1] == 0 and centre[2] == 0
    assert centre[4] == 1.0 and centre[5] == 0.0


def test_header_round_trip(tmp_path):
    out = tmp_path / "f.csv"
    argv = ["sample", "bessel", "--params", "l=2,p_perp=1.5", "--grid", "x=-2:2:5", "--y", "0.5",
            "--out", str(out)]
    assert main(argv) == EXIT_OK
    cfg = read_header(str(out))
    assert cfg.family == "bessel" and cfg.params["l"] == 2 and cfg.params["p_perp"] == 1.5
    assert cfg.grid.fixed["y"] == 0.5
    again = tmp_path / "g.csv"
    assert cli.run_config(cli.RunConfig(**{**cfg.__dict__, "out": str(again)})) == EXIT_OK
    assert load_csv(out).tobytes() == load_csv(again).tobytes()


def test_binary_output_and_sidecar(tmp_path):
    out = tmp_path / "bg.bin"
    grid = "x=-3:3:7,y=-3:3:5"
    assert main(["sample", "bg", "--params", "l=1,b=1.2", "--grid", grid, "--format", "f64le",
                 "--out", str(out)]) == EXIT_OK
    data = np.fromfile(out, dtype="<f8")
    assert data.size == 2 * 35
    csv = tmp_path / "bg.csv"
    assert main(["sample", "bg", "--params", "l=1,b=1.2", "--grid", grid, "--out", str(csv)]) == EXIT_OK
    rows = load_csv(csv)
    assert np.array_equal(data[0::2], rows[:, 4]) and np.array_equal(data[1::2], rows[:, 5])
    side = json.loads((tmp_path / "bg.bin.json").read_text())
    assert side["shape"] == [1, 7, 5, 1]
    assert read_header(str(out) + ".json").format == "f64le"


def test_binary_needs_out():
    assert main(["sample", "g_lg", "--grid", "x=0:1:2", "--format", "f64le"]) == EXIT_USAGE


def test_bg_b0_l1_is_zero(tmp_path):
    out = tmp_path / "z.csv"
    assert main(["sample", "bg", "--params", "b=0,l=1", "--grid", "x=-2:2:9,y=-2:2:9",
                 "--out", str(out)]) == EXIT_OK
    rows = load_csv(out)
    assert np.all(rows[:, 4:] == 0)


def test_csv_full_precision(tmp_path):
    out = tmp_path / "p.csv"
    assert main(["sample", "g_exp", "--grid", "x=0.1:0.9:5", "--t", "0.3", "--out", str(out)]) == EXIT_OK
    rows = load_csv(out)
    from kgbeams.beams import make_field
    from kgbeams.coords import SpacetimePoint
    ref = make_field("g_exp")(SpacetimePoint(rows[:, 0], rows[:, 1], rows[:, 2], rows[:, 3]))
    assert np.array_equal(rows[:, 4], ref.real) and np.array_equal(rows[:, 5], ref.imag)


@pytest.mark.parametrize("grid", ["x=1:0:3", "x=0:1", "w=0:1:3", "x=0:1:0", "x=0:1:1"])
def test_bad_grid(grid):
    assert main(["sample", "g_lg", "--grid", grid]) == EXIT_USAGE


def test_grid_cap_and_conflict():
    assert main(["sample", "g_lg", "--grid", "x=0:1:100,y=0:1:100", "--cap", "1000"]) == EXIT_USAGE
    assert main(["sample", "g_lg", "--grid", "x=0:1:3", "--x", "0.5"]) == EXIT_USAGE
    with pytest.raises(GridError):
        GridSpec.parse("t=0:1:1e9", {})


def test_parameter_errors():
    assert main(["verify", "lg", "--params", "w0=10"]) == EXIT_PARAMETER
    assert main(["verify", "lg", "--params", "bogus=1"]) == EXIT_PARAMETER
    assert main(["verify", "lg", "--params", "w0=abc"]) == EXIT_PARAMETER
    assert main(["verify", "g_md", "--params", "m=0"]) == EXIT_PARAMETER
    assert main(["verify", "lg", "--params", "w0"]) == EXIT_USAGE


def test_unwritable_path(tmp_path):
    bad = str(tmp_path / "missing" / "out.csv")
    assert main(["sample", "g_lg", "--grid", "x=0:1:3", "--out", bad]) == EXIT_IO
    assert main(["verify", "g_lg", "--points", "2", "--out", bad]) == EXIT_IO


def test_verify_pass_and_fail(tmp_path):
    rep = tmp_path / "r.json"
    assert main(["verify", "g_md", "--params", "m=1,w0=1", "--seed", "7", "--out", str(rep)]) == EXIT_OK
    data = json.loads(rep.read_text())
    assert data["passed"] and data["max_relative"] <= 1e-6
    assert data["config"]["params"] == {"m": 1.0, "w0": 1.0}
    assert set(data["worst_point"]) == {"t", "x", "y", "z"}
    assert main(["verify", "lg", "--threshold", "1e-300", "--out", str(rep)]) == EXIT_TOLERANCE
    assert not json.loads(rep.read_text())["passed"]


def test_verify_matches_library(tmp_path):
    from kgbeams.verify import FDSpec, verify_family
    rep = tmp_path / "r.json"
    assert main(["verify", "hg", "--params", "mx=2,ny=1", "--points", "17", "--seed", "4",
                 "--fd-order", "6", "--fd-step", "0.02", "--out", str(rep)]) == EXIT_OK
    s = verify_family("hg", {"mx": 2, "ny": 1}, n_points=17, seed=4, fd=FDSpec(6, 0.02))
    assert json.loads(rep.read_text())["max_relative"] == s.max_relative


@pytest.mark.parametrize("family,params", [("lg", "n=2,l=1"), ("hg", "mx=2,ny=3"),
                                           ("bessel", "l=3,p_perp=1.8"), ("bg", "l=2,b=1")])
def test_compare(tmp_path, family, params):
    rep = tmp_path / "c.json"
    assert main(["compare", family, "--params", params, "--out", str(rep)]) == EXIT_OK
    data = json.loads(rep.read_text())
    assert data["passed"] and data["max_rel_dev"] <= 1e-9


def test_compare_options():
    assert main(["compare", "g_lg"]) == EXIT_USAGE
    assert main(["compare", "lg", "--mode", "quadrature"]) == EXIT_USAGE
    assert main(["compare", "bg", "--nodes", "8"]) == EXIT_PARAMETER
    assert main(["compare", "bg", "--params", "b=2,l=4", "--nodes", "24", "--threshold", "1e-10"]) == EXIT_TOLERANCE


@pytest.mark.parametrize("workers", ["1", "3", "8"])
def test_parallel_determinism(tmp_path, monkeypatch, workers):
    monkeypatch.chdir(tmp_path)
    argv = ["sample", "hg", "--params", "mx=3,ny=1", "--grid", "x=-4:4:91,y=-4:4:91", "--z", "0.3",
            "--out", "a.csv"]
    monkeypatch.setenv(cli.WORKERS_ENV, "1")
    assert main(argv) == EXIT_OK
    ref = (tmp_path / "a.csv").read_bytes()
    monkeypatch.setenv(cli.WORKERS_ENV, workers)
    assert main(argv) == EXIT_OK
    assert (tmp_path / "a.csv").read_bytes() == ref


def test_bad_worker_env(monkeypatch):
    monkeypatch.setenv(cli.WORKERS_ENV, "many")
    assert main(["sample", "g_lg", "--grid", "x=0:1:3"]) == EXIT_USAGE


def test_empty_points(tmp_path):
    rep = tmp_path / "r.json"
    assert main(["verify", "g_lg", "--points", "0", "--out", str(rep)]) == EXIT_OK
    assert json.loads(rep.read_text())["worst_point"] is None
