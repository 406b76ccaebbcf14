import csv
import filecmp
import os
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kerrtrunc.analysis import SqueezingWindow, VarianceSeries, detect_windows, scan_variances
from kerrtrunc.cli import FIGURES, main, run_figure
from kerrtrunc.dynamics import AnalyticModel, Variant
from kerrtrunc.fileio import (
    ConfigError,
    emit_csv,
    fmt,
    parse_config,
    read_series_csv,
    series_csv,
    windows_csv,
)

GOLDEN = Path(__file__).parent / "golden"

MINIMAL = """
modes = 2
epsilon = 5e5
pumps = [5e5, 5e5]
t_max_us = 10
dt_us = 0.01
"""


def write_config(tmp_path, text, name="run.toml"):
    p = tmp_path / name
    p.write_text(text)
    return p


class TestParseConfig:
    def test_minimal_two_pump(self):
        cfg = parse_config(MINIMAL)
        assert cfg.modes == 2
        assert cfg.pumps == (5e5, 5e5)
        assert cfg.t_max_us == 10 and cfg.dt_us == 0.01
        assert cfg.path == "analytic"
        assert cfg.model().variant is Variant.TWO_MODE_TWO_PUMP

    def test_pumps_length_names_key(self):
        with pytest.raises(ConfigError, match="pumps") as info:
            parse_config(MINIMAL.replace("[5e5, 5e5]", "[5e5, 5e5, 5e5]"))
        assert info.value.key == "pumps"

    @pytest.mark.parametrize("dt", ["-0.01", "0"])
    def test_nonpositive_dt(self, dt):
        with pytest.raises(ConfigError, match="dt_us"):
            parse_config(MINIMAL.replace("dt_us = 0.01", f"dt_us = {dt}"))

    def test_dt_larger_than_horizon(self):
        with pytest.raises(ConfigError, match="t_max_us"):
            parse_config(MINIMAL.replace("t_max_us = 10", "t_max_us = 0.001"))

    def test_unknown_key_rejected(self):
        with pytest.raises(ConfigError, match="kappa"):
            parse_config(MINIMAL + "kappa = 1.0\n")

    @pytest.mark.parametrize("key", ["modes", "epsilon", "pumps", "t_max_us"])
    def test_missing_key(self, key):
        text = "\n".join(l for l in MINIMAL.splitlines() if not l.startswith(key))
        with pytest.raises(ConfigError, match=key):
            parse_config(text)

    @pytest.mark.parametrize(
        "line,key",
        [
            ('epsilon = "fast"', "epsilon"),
            ("modes = 2.5", "modes"),
            ("modes = 4", "modes"),
            ("epsilon = nan", "epsilon"),
            ('path = "magic"', "path"),
            ("tol = 0.1", "tol"),
        ],
    )
    def test_type_and_range_errors(self, line, key):
        name = line.split(" =")[0]
        text = "\n".join(l for l in MINIMAL.splitlines() if not l.startswith(name)) + "\n" + line
        with pytest.raises(ConfigError, match=key):
            parse_config(text)

    def test_full_path_needs_chi(self):
        with pytest.raises(ConfigError, match="chi"):
            parse_config(MINIMAL + 'path = "full"\n')
        cfg = parse_config(MINIMAL + 'path = "full"\nchi = [1e8, 1e8]\ncutoff = 3\n')
        assert cfg.spec().chi == (1e8, 1e8)

    def test_analytic_path_needs_closed_form(self):
        text = MINIMAL.replace("[5e5, 5e5]", "[5e5, 2e5]")
        with pytest.raises(ConfigError, match="path"):
            parse_config(text)
        assert parse_config(text, path="truncated-ode").path == "truncated-ode"

    def test_overrides(self):
        cfg = parse_config(MINIMAL, dt_us=0.05, t_max_us=None)
        assert cfg.dt_us == 0.05 and cfg.t_max_us == 10

    def test_malformed_document(self):
        with pytest.raises(ConfigError):
            parse_config("modes = = 2")


def _series(n=5, modes=2):
    t = np.linspace(0, 1, n)
    traces = 0.25 + 0.01 * np.arange(n * 2 * modes).reshape(n, 2 * modes) / 7
    return VarianceSeries(t, traces, modes, "test")


class TestEmitCsv:
    def test_empty_windows_header_only(self, tmp_path):
        _, windows_path = emit_csv(_series(), [], tmp_path)
        assert windows_path.read_text() == "mode,quadrature,t_start_us,t_end_us,t_min_us,v_min\n"

    @pytest.mark.parametrize("n", [1, 2, 17])
    def test_line_count(self, tmp_path, n):
        series_path, _ = emit_csv(_series(n), [], tmp_path)
        text = series_path.read_text()
        assert text.endswith("\n")
        lines = text.splitlines()
        assert len(lines) == n + 1
        assert lines[0] == "t_us,dX2_1,dX2_2,dY2_1,dY2_2"

    def test_three_mode_header(self):
        assert series_csv(_series(3, 3)).splitlines()[0] == "t_us,dX2_1,dX2_2,dX2_3,dY2_1,dY2_2,dY2_3"

    def test_window_row(self):
        w = SqueezingWindow(2, "X", 0.1, 2.3614, 1.8336, 0.2282307, False, False, True)
        assert windows_csv([w]).splitlines()[1] == "2,X,0.1,2.3614,1.8336,0.2282307"

    @settings(max_examples=50, deadline=None)
    @given(values=st.lists(st.floats(1e-6, 10.0), min_size=4, max_size=4))
    def test_round_trip_nine_digits(self, values):
        series = VarianceSeries(np.array([0.0]), np.array([values]), 2, "x")
        line = series_csv(series).splitlines()[1]
        back = [float(x) for x in line.split(",")[1:]]
        assert np.allclose(back, values, rtol=5e-9, atol=0)
        assert [fmt(v) for v in back] == line.split(",")[1:]

    def test_round_trip_file(self, tmp_path):
        s = scan_variances(AnalyticModel.single_pump(5e5), 1.0)
        path, _ = emit_csv(s, [], tmp_path)
        header, rows = read_series_csv(path)
        assert header[0] == "t_us"
        np.testing.assert_allclose(np.array(rows)[:, 1:], s.traces, rtol=5e-9)

    def test_unwritable_destination(self, tmp_path):
        blocker = tmp_path / "file"
        blocker.write_text("")
        with pytest.raises(OSError):
            emit_csv(_series(), [], blocker / "sub")

    def test_no_temp_files_left(self, tmp_path):
        emit_csv(_series(), [], tmp_path, stem="a")
        assert sorted(os.listdir(tmp_path)) == ["a_series.csv", "a_windows.csv"]


class TestFigures:
    def test_unknown_id(self, tmp_path):
        with pytest.raises(ValueError, match="fig9"):
            run_figure("fig9", tmp_path)

    def test_fig1a_series_and_windows(self, tmp_path):
        series_path, windows_path = run_figure("fig1a", tmp_path)
        header, rows = read_series_csv(series_path)
        assert header == ["t_us", "dX2_1", "dX2_2", "dY2_1", "dY2_2"]
        assert rows[0][0] == 0 and rows[-1][0] == pytest.approx(5.0)
        with open(windows_path) as fh:
            windows = list(csv.DictReader(fh))
        (x2,) = [w for w in windows if (w["mode"], w["quadrature"]) == ("2", "X")]
        assert float(x2["t_end_us"]) == pytest.approx(2.37, abs=0.05)

    def test_fig2a_degeneracy(self, tmp_path):
        header, rows = read_series_csv(run_figure("fig2a", tmp_path)[0])
        a = np.array(rows)
        col = {h: i for i, h in enumerate(header)}
        for q in ("dX2", "dY2"):
            assert np.abs(a[:, col[f"{q}_2"]] - a[:, col[f"{q}_3"]]).max() <= 1e-12

    def test_fig3_two_distinct_traces(self, tmp_path):
        _, rows = read_series_csv(run_figure("fig3", tmp_path)[0])
        a = np.array(rows)[:, 1:]
        assert a.shape[1] == 6
        assert np.unique(a, axis=1).shape[1] == 2
        assert np.array(rows)[-1, 0] == pytest.approx(20.0)

    def test_byte_identical_reruns(self, tmp_path):
        first = run_figure("fig2b", tmp_path / "a")
        second = run_figure("fig2b", tmp_path / "b")
        for p, q in zip(first, second):
            assert filecmp.cmp(p, q, shallow=False)


@pytest.mark.parametrize("fig_id", sorted(FIGURES))
def test_matches_golden(tmp_path, fig_id):
    series_path, windows_path = run_figure(fig_id, tmp_path)
    h_new, new = read_series_csv(series_path)
    h_old, old = read_series_csv(GOLDEN / f"{fig_id}_series.csv")
    assert h_new == h_old
    np.testing.assert_allclose(new, old, rtol=1e-8, atol=1e-12)

    def load(path):
        with open(path) as fh:
            return list(csv.reader(fh))

    w_new, w_old = load(windows_path), load(GOLDEN / f"{fig_id}_windows.csv")
    assert [r[:2] for r in w_new] == [r[:2] for r in w_old]
    nums = lambda rows: np.array([[float(x) for x in r[2:]] for r in rows[1:]]).reshape(-1, 4)
    np.testing.assert_allclose(nums(w_new), nums(w_old), rtol=1e-6, atol=1e-6)


class TestMain:
    def test_figure(self, tmp_path):
        assert main(["figure", "fig1a", "--out", str(tmp_path), "--quiet"]) == 0
        assert (tmp_path / "fig1a_series.csv").exists()

    @pytest.mark.parametrize(
        "command,output",
        [("variances", "series.csv"), ("windows", "windows.csv"), ("evolve", "amplitudes.csv")],
    )
    def test_config_commands(self, tmp_path, command, output):
        cfg = write_config(tmp_path, MINIMAL)
        assert main([command, "--config", str(cfg), "--out", str(tmp_path), "--quiet"]) == 0
        lines = (tmp_path / output).read_text().splitlines()
        # two-pump: Y1 and Y2 squeeze over the same initial window
        assert len(lines) == (3 if command == "windows" else 1002)

    @pytest.mark.parametrize("path", ["truncated-ode", "full"])
    def test_evolve_numeric_paths(self, tmp_path, path):
        cfg = write_config(tmp_path, MINIMAL + "chi = [5e7, 5e7]\ncutoff = 3\n")
        argv = ["evolve", "--config", str(cfg), "--out", str(tmp_path), "--path", path,
                "--t-max-us", "1", "--quiet"]
        assert main(argv) == 0
        header, rows = read_series_csv(tmp_path / "amplitudes.csv")
        assert header[1:3] == ["re_c00", "im_c00"] and header[-1] == "leakage"
        a = np.array(rows)
        norm = (a[:, 1:-1] ** 2).sum(axis=1) + a[:, -1]
        np.testing.assert_allclose(norm, 1.0, atol=1e-7)

    def test_validate_rwa(self, tmp_path):
        cfg = write_config(tmp_path, MINIMAL.replace("t_max_us = 10", "t_max_us = 2"))
        argv = ["validate-rwa", "--config", str(cfg), "--out", str(tmp_path),
                "--chi-ratios", "50,500", "--dt-us", "0.05", "--quiet"]
        assert main(argv) == 0
        with open(tmp_path / "rwa.csv") as fh:
            rows = list(csv.DictReader(fh))
        assert [float(r["chi_ratio"]) for r in rows] == [50, 500]
        assert float(rows[0]["max_leakage"]) > float(rows[1]["max_leakage"])

    def test_config_error_exit_code(self, tmp_path, capsys):
        cfg = write_config(tmp_path, MINIMAL.replace("[5e5, 5e5]", "[5e5]"))
        assert main(["variances", "--config", str(cfg), "--out", str(tmp_path)]) == 1
        assert "pumps" in capsys.readouterr().err

    def test_missing_config_file(self, tmp_path):
        assert main(["variances", "--config", str(tmp_path / "nope.toml")]) == 1

    def test_unknown_figure_is_usage_error(self):
        with pytest.raises(SystemExit) as info:
            main(["figure", "fig9"])
        assert info.value.code == 2
