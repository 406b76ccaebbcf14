"""Variance scans over a time grid, squeezing-window detection, RWA validation.

Times at this layer are in microseconds; everything below it works in seconds.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .dynamics import AnalyticModel, Propagator, _integrate
from .fock import FockBasis, StateVector, SystemSpec, build_hamiltonian
from .observables import VACUUM, _moments, qubit_variances

log = logging.getLogger(__name__)

US = 1e-6
PATHS = ("analytic", "truncated-ode", "full")
GOLDEN = (np.sqrt(5.0) - 1) / 2

Evaluator = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class VarianceSeries:
    """Variance traces on a uniform grid.

    ``traces`` has shape ``(len(times_us), 2M)`` with columns
    ``dX2_1..dX2_M, dY2_1..dY2_M``.  ``evaluator`` recomputes the same columns
    at arbitrary times (in us) along the path that produced the series.
    """

    times_us: np.ndarray
    traces: np.ndarray
    modes: int
    provenance: str
    evaluator: Evaluator | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.traces.shape != (len(self.times_us), 2 * self.modes):
            raise ValueError(f"traces shape {self.traces.shape} does not match grid/modes")
        if np.any(np.diff(self.times_us) <= 0):
            raise ValueError("time grid must be strictly increasing")

    @property
    def columns(self) -> list[str]:
        return [f"dX2_{p}" for p in range(1, self.modes + 1)] + [
            f"dY2_{p}" for p in range(1, self.modes + 1)
        ]

    def column_index(self, mode: int, quadrature: str) -> int:
        offset = {"X": 0, "Y": self.modes}[quadrature.upper()]
        return offset + mode - 1

    def trace(self, mode: int, quadrature: str) -> np.ndarray:
        return self.traces[:, self.column_index(mode, quadrature)]


@dataclass(frozen=True)
class SqueezingWindow:
    mode: int
    quadrature: str
    t_start_us: float
    t_end_us: float
    t_min_us: float
    v_min: float
    open_start: bool = False
    open_end: bool = False
    converged: bool = True
    note: str = ""


@dataclass(frozen=True)
class RwaReport:
    chi_ratio: float
    max_leakage: float
    max_deviation: float
    horizon_us: float
    top_level_population: float
    cutoff_ok: bool


def time_grid(t_max_us: float, dt_us: float) -> np.ndarray:
    if not dt_us > 0:
        raise ValueError(f"dt must be positive, got {dt_us}")
    if t_max_us < dt_us:
        raise ValueError(f"t_max ({t_max_us}) must be >= dt ({dt_us})")
    n = int(np.floor(t_max_us / dt_us + 1e-9)) + 1
    return np.arange(n) * dt_us


# ---------------------------------------------------------------------------
# evaluators for each computation path


def _analytic_evaluator(model: AnalyticModel) -> Evaluator:
    def evaluate(t_us):
        return qubit_variances(model.amplitudes(np.asarray(t_us) * US)).as_columns()

    return evaluate


def _initial(basis: FockBasis, initial) -> StateVector:
    if initial is None:
        return StateVector.vacuum(basis)
    return StateVector.fock(basis, initial)


def _full_evaluator(spec: SystemSpec, cutoff: int, initial) -> Evaluator:
    if cutoff < 2:
        raise ValueError("full-space path needs cutoff >= 2")
    basis = FockBasis(spec.modes, cutoff)
    prop = Propagator.from_hamiltonian(build_hamiltonian(spec, basis))
    psi0 = _initial(basis, initial).amplitudes

    def evaluate(t_us):
        t = np.atleast_1d(np.asarray(t_us, dtype=float))
        return _moments(basis, prop.evolve(psi0, t * US)).as_columns()

    return evaluate


class _OdeTrace:
    """Truncated-ODE states on a grid; off-grid points integrate from the nearest earlier grid state."""

    def __init__(self, spec: SystemSpec, times_us: np.ndarray, tol: float, initial):
        self.basis = FockBasis(spec.modes, 1)
        self.H = build_hamiltonian(spec, self.basis)
        self.tol = tol
        self.times_us = times_us
        psi0 = _initial(self.basis, initial)
        states = _integrate(self.H, self.basis, psi0, times_us * US, tol)
        self.states = np.array([s.amplitudes for s in states])

    def amplitudes(self, t_us: float) -> np.ndarray:
        k = int(np.searchsorted(self.times_us, t_us, side="right")) - 1
        k = max(k, 0)
        t0 = self.times_us[k]
        if t_us == t0:
            return self.states[k]
        start = StateVector(self.basis, self.states[k])
        (state,) = _integrate(self.H, self.basis, start, np.array([t_us * US]), self.tol, t0 * US)
        return state.amplitudes

    def __call__(self, t_us):
        t = np.atleast_1d(np.asarray(t_us, dtype=float))
        amps = np.array([self.amplitudes(float(x)) for x in t])
        # integrator drift is renormalised before taking moments
        amps /= np.linalg.norm(amps, axis=-1, keepdims=True)
        return qubit_variances(amps).as_columns()


def scan_variances(
    source: AnalyticModel | SystemSpec,
    t_max_us: float,
    dt_us: float = 0.01,
    *,
    path: str | None = None,
    cutoff: int = 4,
    tol: float = 1e-10,
    initial=None,
) -> VarianceSeries:
    """Evaluate every quadrature variance on the grid ``0, dt, ..., <= t_max``.

    ``source`` is either a closed-form model or a :class:`SystemSpec` together
    with ``path`` (``"analytic"``, ``"truncated-ode"`` or ``"full"``).
    ``initial`` is an occupation tuple; vacuum by default.
    """
    times = time_grid(t_max_us, dt_us)
    if isinstance(source, AnalyticModel):
        if path not in (None, "analytic"):
            raise ValueError("closed-form models only support the analytic path")
        model, path = source, "analytic"
    else:
        if path not in PATHS:
            raise ValueError(f"path must be one of {PATHS}, got {path!r}")
        model = AnalyticModel.from_spec(source) if path == "analytic" else None

    if path == "analytic":
        evaluator = _analytic_evaluator(model)
        modes, provenance = model.modes, f"analytic:{model.variant.value}"
        traces = evaluator(times)
    elif path == "full":
        evaluator = _full_evaluator(source, cutoff, initial)
        modes, provenance = source.modes, f"full:cutoff={cutoff}"
        traces = evaluator(times)
    else:
        evaluator = _OdeTrace(source, times, tol, initial)
        modes, provenance = source.modes, f"truncated-ode:tol={tol:g}"
        traces = qubit_variances(
            evaluator.states / np.linalg.norm(evaluator.states, axis=-1, keepdims=True)
        ).as_columns()
    return VarianceSeries(times, np.asarray(traces, dtype=float), modes, provenance, evaluator)


# ---------------------------------------------------------------------------
# window detection


def _runs(mask: np.ndarray) -> list[tuple[int, int]]:
    """Inclusive ``(i, j)`` index ranges of maximal True runs."""
    edges = np.diff(np.concatenate([[0], mask.astype(np.int8), [0]]))
    starts = np.flatnonzero(edges == 1)
    ends = np.flatnonzero(edges == -1) - 1
    return list(zip(starts.tolist(), ends.tolist()))


def _bisect_crossing(f, below_t, above_t, threshold, tol, value_tol=1e-7, max_iter=200):
    """Shrink ``[above_t, below_t]`` (either order) around the threshold crossing."""
    lo, hi = above_t, below_t
    v_hi = f(hi)
    for _ in range(max_iter):
        if abs(hi - lo) <= tol and abs(v_hi - threshold) <= value_tol:
            break
        if abs(hi - lo) <= 1e-12:
            break
        mid = 0.5 * (lo + hi)
        v = f(mid)
        if not np.isfinite(v):
            raise FloatingPointError(f"non-finite variance at t = {mid} us")
        if v < threshold:
            hi, v_hi = mid, v
        else:
            lo = mid
    return hi


def _golden_min(f, a, b, tol, max_iter=200):
    c, d = b - GOLDEN * (b - a), a + GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(max_iter):
        if b - a <= tol:
            break
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + GOLDEN * (b - a)
            fd = f(d)
    return (c, fc) if fc < fd else (d, fd)


def detect_windows(
    series: VarianceSeries, threshold: float = VACUUM, refine_tol: float = 1e-4
) -> list[SqueezingWindow]:
    """One window per maximal run of grid points strictly below ``threshold``.

    Boundaries are refined by bisection on the series' evaluator and the
    minimum by golden-section search.  A window that reaches the end of the grid
    is clipped there and flagged open; a failing refinement keeps the grid
    estimate and sets ``converged=False``.
    """
    if not threshold > 0:
        raise ValueError("threshold must be positive")
    t = series.times_us
    windows = []
    for quad in ("X", "Y"):
        for mode in range(1, series.modes + 1):
            col = series.column_index(mode, quad)
            v = series.traces[:, col]

            def f(x, col=col):
                return float(series.evaluator(np.array([x]))[0, col])

            for i, j in _runs(v < threshold):
                k = i + int(np.argmin(v[i : j + 1]))
                t_start, t_end = t[i], t[j]
                t_min, v_min = t[k], float(v[k])
                open_start, open_end = i == 0, j == len(t) - 1
                converged, note = True, ""
                if series.evaluator is None:
                    converged, note = False, "no evaluator; grid resolution only"
                else:
                    try:
                        if not open_start:
                            t_start = _bisect_crossing(f, t[i], t[i - 1], threshold, refine_tol)
                        if not open_end:
                            t_end = _bisect_crossing(f, t[j], t[j + 1], threshold, refine_tol)
                        a = t[k - 1] if k > i else t_start
                        b = t[k + 1] if k < j else t_end
                        if b > a:
                            tg, vg = _golden_min(f, a, b, refine_tol)
                            if vg < v_min:
                                t_min, v_min = tg, vg
                    except (FloatingPointError, ArithmeticError, RuntimeError) as exc:
                        converged, note = False, str(exc)
                        log.warning("window refinement failed for %s%d: %s", quad, mode, exc)
                windows.append(
                    SqueezingWindow(
                        mode, quad, float(t_start), float(t_end), float(t_min), float(v_min),
                        open_start, open_end, converged, note,
                    )
                )
    windows.sort(key=lambda w: (w.t_start_us, w.quadrature, w.mode))
    return windows


# ---------------------------------------------------------------------------
# RWA / truncation validation


def rwa_validation(
    spec: SystemSpec,
    cutoff: int,
    t_max_us: float,
    chi_ratios,
    *,
    dt_us: float = 0.01,
    initial=None,
) -> list[RwaReport]:
    """Compare full-space dynamics at ``chi = ratio * |eps|`` with the qubit-truncated model.

    For each ratio: leakage out of the occupations-<=1 subspace and the max
    deviation between projected full-space amplitudes and the truncated ones,
    both maximised over the grid.
    """
    if cutoff < 3:
        raise ValueError(f"cutoff must be >= 3 to represent leakage, got {cutoff}")
    ratios = [float(r) for r in chi_ratios]
    if any(r <= 0 for r in ratios):
        raise ValueError("chi ratios must be positive")
    scale = abs(spec.epsilon) or spec.max_coupling
    if scale == 0:
        raise ValueError("spec has no couplings to scale chi against")

    times = time_grid(t_max_us, dt_us) * US
    qb = FockBasis(spec.modes, 1)
    trunc = Propagator.from_hamiltonian(build_hamiltonian(spec, qb))
    ref = trunc.evolve(_initial(qb, initial).amplitudes, times)

    basis = FockBasis(spec.modes, cutoff)
    top = np.any(basis.occupations == cutoff, axis=1)
    psi0 = _initial(basis, initial).amplitudes
    reports = []
    for ratio in ratios:
        full_spec = spec.with_chi(ratio * scale)
        prop = Propagator.from_hamiltonian(build_hamiltonian(full_spec, basis))
        states = prop.evolve(psi0, times)
        kept = states[:, basis.qubit_indices]
        leakage = np.clip(1.0 - np.sum(np.abs(kept) ** 2, axis=1), 0.0, 1.0)
        top_pop = float(np.sum(np.abs(states[:, top]) ** 2, axis=1).max())
        report = RwaReport(
            chi_ratio=ratio,
            max_leakage=float(leakage.max()),
            max_deviation=float(np.abs(kept - ref).max()),
            horizon_us=float(times[-1] / US),
            top_level_population=top_pop,
            cutoff_ok=top_pop <= 1e-6,
        )
        if not report.cutoff_ok:
            log.warning(
                "cutoff %d too small at chi/eps=%g: top-level population %.2e", cutoff, ratio, top_pop
            )
        reports.append(report)
    return reports

