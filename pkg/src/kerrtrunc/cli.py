"""Batch command line front-end.

    kerrtrunc evolve       --config run.toml   -> amplitudes.csv
    kerrtrunc variances    --config run.toml   -> series.csv
    kerrtrunc windows      --config run.toml   -> windows.csv
    kerrtrunc validate-rwa --config run.toml   -> rwa.csv
    kerrtrunc figure fig1a                     -> fig1a_series.csv, fig1a_windows.csv
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from . import fileio as io
from .analysis import US, detect_windows, rwa_validation, scan_variances, time_grid
from .dynamics import AnalyticModel, IntegrationError, PropagationError, Propagator, integrate_ode
from .fock import FockBasis, StateVector, SystemSpec, build_hamiltonian, project_qubit
from .observables import ObservableError

log = logging.getLogger("kerrtrunc")

REFERENCE_COUPLING = 1e8 / 200  # s^-1

# id -> (source, horizon in us, path)
FIGURES = {
    "fig1a": (AnalyticModel.single_pump(REFERENCE_COUPLING), 5.0, "analytic"),
    "fig1b": (AnalyticModel.two_pump(REFERENCE_COUPLING, REFERENCE_COUPLING), 10.0, "analytic"),
    "fig2a": (
        SystemSpec(3, (0, 0, 0), REFERENCE_COUPLING, (REFERENCE_COUPLING, 0, 0)), 20.0, "truncated-ode",
    ),
    "fig2b": (
        SystemSpec(3, (0, 0, 0), REFERENCE_COUPLING, (REFERENCE_COUPLING, REFERENCE_COUPLING, 0)),
        20.0,
        "truncated-ode",
    ),
    "fig3": (AnalyticModel.three_mode_symmetric(REFERENCE_COUPLING), 20.0, "analytic"),
}


def run_figure(fig_id: str, out_dir, dt_us: float = io.DEFAULT_DT_US, tol: float = io.DEFAULT_TOL):
    """Write the variance series and squeezing windows for one of the published figures."""
    if fig_id not in FIGURES:
        raise ValueError(f"unknown figure id {fig_id!r}; choose from {', '.join(FIGURES)}")
    source, horizon, path = FIGURES[fig_id]
    series = scan_variances(source, horizon, dt_us, path=path, tol=tol)
    windows = detect_windows(series)
    return io.emit_csv(series, windows, out_dir, stem=fig_id)


def _series(cfg: io.RunConfig):
    source = cfg.model() if cfg.path == "analytic" else cfg.spec()
    return scan_variances(source, cfg.t_max_us, cfg.dt_us, path=cfg.path, cutoff=cfg.cutoff, tol=cfg.tol)


def _evolve(cfg: io.RunConfig, out: Path) -> list[Path]:
    times_us = time_grid(cfg.t_max_us, cfg.dt_us)
    times = times_us * US
    labels = FockBasis(cfg.modes, 1).labels()
    if cfg.path == "analytic":
        amps = cfg.model().amplitudes(times)
        leak = np.zeros(len(times))
    elif cfg.path == "truncated-ode":
        basis = FockBasis(cfg.modes, 1)
        states = integrate_ode(cfg.spec(), basis, StateVector.vacuum(basis), times, cfg.tol)
        amps = np.array([s.amplitudes for s in states])
        leak = np.zeros(len(times))
    else:
        basis = FockBasis(cfg.modes, cfg.cutoff)
        prop = Propagator.from_hamiltonian(build_hamiltonian(cfg.spec(), basis))
        rows = prop.evolve(StateVector.vacuum(basis).amplitudes, times)
        projected = [project_qubit(StateVector(basis, r)) for r in rows]
        amps = np.array([p[0] for p in projected])
        leak = np.array([p[1] for p in projected])
    text = io.amplitudes_csv(times_us, labels, amps, leak)
    return [io.write_text(out / "amplitudes.csv", text)]


def _validate_rwa(cfg: io.RunConfig, out: Path, ratios) -> list[Path]:
    reports = rwa_validation(cfg.spec(), cfg.cutoff, cfg.t_max_us, ratios, dt_us=cfg.dt_us)
    return [io.write_text(out / "rwa.csv", io.rwa_csv(reports))]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kerrtrunc", description=__doc__.splitlines()[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="output directory (overrides out_dir)")
    common.add_argument("--dt-us", type=float, help="grid step in microseconds")
    common.add_argument("--t-max-us", type=float, help="horizon in microseconds")
    common.add_argument("--path", choices=["analytic", "truncated-ode", "full"])
    common.add_argument("--quiet", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_ in [
        ("evolve", "qubit-subspace amplitudes (plus leakage for the full path)"),
        ("variances", "quadrature-variance series"),
        ("windows", "squeezing windows"),
        ("validate-rwa", "full-space vs truncated comparison over chi/eps ratios"),
    ]:
        p = sub.add_parser(name, parents=[common], help=help_)
        p.add_argument("--config", required=True, help="TOML run configuration")
        if name == "validate-rwa":
            p.add_argument("--chi-ratios", default="50,200,1000", help="comma-separated chi/eps values")
    p = sub.add_parser("figure", parents=[common], help="reproduce a published figure as CSV")
    p.add_argument("id", choices=sorted(FIGURES))
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.WARNING if args.quiet else logging.INFO, format="%(levelname)s %(message)s"
    )
    try:
        if args.command == "figure":
            out = Path(args.out or ".")
            written = run_figure(args.id, out, dt_us=args.dt_us or io.DEFAULT_DT_US)
        else:
            cfg = io.load_config(
                args.config, dt_us=args.dt_us, t_max_us=args.t_max_us, path=args.path,
            )
            out = Path(args.out or cfg.out_dir)
            if args.command == "evolve":
                written = _evolve(cfg, out)
            elif args.command == "validate-rwa":
                ratios = [float(x) for x in args.chi_ratios.split(",") if x.strip()]
                written = _validate_rwa(cfg, out, ratios)
            else:
                series = _series(cfg)
                if args.command == "variances":
                    written = [io.write_text(out / "series.csv", io.series_csv(series))]
                else:
                    written = [io.write_text(out / "windows.csv", io.windows_csv(detect_windows(series)))]
    except (ValueError, OSError, PropagationError, IntegrationError, ObservableError) as exc:
        print(f"kerrtrunc: error: {exc}", file=sys.stderr)
        return 1
    for path in written:
        log.info("wrote %s", path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
