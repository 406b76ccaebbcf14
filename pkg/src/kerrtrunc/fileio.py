"""Run configuration parsing and CSV output."""

from __future__ import annotations

import csv
import io
import math
import os
import sys
import tempfile
from dataclasses import dataclass
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .analysis import PATHS, RwaReport, SqueezingWindow, VarianceSeries
from .dynamics import AnalyticModel
from .fock import SystemSpec


class ConfigError(ValueError):
    def __init__(self, key: str, message: str):
        super().__init__(f"{key}: {message}")
        self.key = key


DEFAULT_DT_US = 0.01
DEFAULT_CUTOFF = 4
DEFAULT_TOL = 1e-10

_REQUIRED = ("modes", "epsilon", "pumps", "t_max_us")
_OPTIONAL = ("chi", "cutoff", "path", "dt_us", "tol", "out_dir")


@dataclass(frozen=True)
class RunConfig:
    modes: int
    epsilon: float
    pumps: tuple[float, ...]
    t_max_us: float
    chi: tuple[float, ...] | None = None
    cutoff: int = DEFAULT_CUTOFF
    path: str = "analytic"
    dt_us: float = DEFAULT_DT_US
    tol: float = DEFAULT_TOL
    out_dir: str = "."

    def spec(self) -> SystemSpec:
        chi = self.chi if self.chi is not None else (0.0,) * self.modes
        return SystemSpec(self.modes, chi, self.epsilon, self.pumps)

    def model(self) -> AnalyticModel:
        return AnalyticModel.from_spec(self.spec())


def _number(key, value, *, integer=False):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(key, f"expected a number, got {type(value).__name__}")
    if integer:
        if not isinstance(value, int):
            raise ConfigError(key, f"expected an integer, got {value!r}")
        return value
    if not math.isfinite(value):
        raise ConfigError(key, "must be finite")
    return float(value)


def _number_list(key, value, length):
    if not isinstance(value, list):
        raise ConfigError(key, f"expected a list, got {type(value).__name__}")
    if len(value) != length:
        raise ConfigError(key, f"expected {length} entries (one per mode), got {len(value)}")
    return tuple(_number(f"{key}[{i}]", v) for i, v in enumerate(value))


def config_from_mapping(doc: dict, *, overrides: dict | None = None) -> RunConfig:
    """Validate a parsed key-value document; unknown keys are rejected."""
    doc = dict(doc)
    for key, value in (overrides or {}).items():
        if value is not None:
            doc[key] = value
    unknown = sorted(set(doc) - set(_REQUIRED) - set(_OPTIONAL))
    if unknown:
        raise ConfigError(unknown[0], "unknown key")
    for key in _REQUIRED:
        if key not in doc:
            raise ConfigError(key, "missing required key")

    modes = _number("modes", doc["modes"], integer=True)
    if modes not in (2, 3):
        raise ConfigError("modes", f"must be 2 or 3, got {modes}")
    epsilon = _number("epsilon", doc["epsilon"])
    pumps = _number_list("pumps", doc["pumps"], modes)
    t_max = _number("t_max_us", doc["t_max_us"])
    dt = _number("dt_us", doc.get("dt_us", DEFAULT_DT_US))
    if dt <= 0:
        raise ConfigError("dt_us", f"must be positive, got {dt}")
    if t_max < dt:
        raise ConfigError("t_max_us", f"must be >= dt_us ({dt}), got {t_max}")
    path = doc.get("path", "analytic")
    if path not in PATHS:
        raise ConfigError("path", f"must be one of {', '.join(PATHS)}, got {path!r}")
    cutoff = _number("cutoff", doc.get("cutoff", DEFAULT_CUTOFF), integer=True)
    if cutoff < 1:
        raise ConfigError("cutoff", f"must be >= 1, got {cutoff}")
    tol = _number("tol", doc.get("tol", DEFAULT_TOL))
    if not 0 < tol <= 1e-3:
        raise ConfigError("tol", f"must lie in (0, 1e-3], got {tol}")
    chi = None
    if "chi" in doc:
        chi = _number_list("chi", doc["chi"], modes)
        if any(c < 0 for c in chi):
            raise ConfigError("chi", "Kerr constants must be nonnegative")
    elif path == "full":
        raise ConfigError("chi", "required for the full-space path")
    if path == "full" and cutoff < 2:
        raise ConfigError("cutoff", "full-space path needs cutoff >= 2")
    out_dir = doc.get("out_dir", ".")
    if not isinstance(out_dir, str):
        raise ConfigError("out_dir", "expected a string")

    cfg = RunConfig(modes, epsilon, pumps, t_max, chi, cutoff, path, dt, tol, out_dir)
    if path == "analytic":
        try:
            cfg.model()
        except ValueError as exc:
            raise ConfigError("path", f"analytic path unavailable: {exc}") from exc
    return cfg


def parse_config(text: str, **overrides) -> RunConfig:
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError("<document>", str(exc)) from exc
    return config_from_mapping(doc, overrides=overrides)


def load_config(source: str | os.PathLike, /, **overrides) -> RunConfig:
    return parse_config(Path(source).read_text(encoding="utf-8"), **overrides)


# ---------------------------------------------------------------------------
# CSV


def fmt(x: float) -> str:
    return f"{x:.9g}"


def _atomic_write(path: Path, text: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def series_csv(series: VarianceSeries) -> str:
    rows = (
        [fmt(t), *(fmt(v) for v in row)] for t, row in zip(series.times_us, series.traces)
    )
    return _csv_text(["t_us", *series.columns], rows)


WINDOW_HEADER = ["mode", "quadrature", "t_start_us", "t_end_us", "t_min_us", "v_min"]


def windows_csv(windows: list[SqueezingWindow]) -> str:
    rows = (
        [w.mode, w.quadrature, fmt(w.t_start_us), fmt(w.t_end_us), fmt(w.t_min_us), fmt(w.v_min)]
        for w in windows
    )
    return _csv_text(WINDOW_HEADER, rows)


def rwa_csv(reports: list[RwaReport]) -> str:
    header = [
        "chi_ratio", "max_leakage", "max_amplitude_deviation", "horizon_us",
        "top_level_population", "cutoff_ok",
    ]
    rows = (
        [fmt(r.chi_ratio), fmt(r.max_leakage), fmt(r.max_deviation), fmt(r.horizon_us),
         fmt(r.top_level_population), int(r.cutoff_ok)]
        for r in reports
    )
    return _csv_text(header, rows)


def amplitudes_csv(times_us, labels, amplitudes, leakage) -> str:
    header = ["t_us"]
    for lab in labels:
        header += [f"re_c{lab}", f"im_c{lab}"]
    header.append("leakage")
    rows = []
    for t, amps, leak in zip(times_us, amplitudes, leakage):
        row = [fmt(t)]
        for c in amps:
            row += [fmt(c.real), fmt(c.imag)]
        row.append(fmt(leak))
        rows.append(row)
    return _csv_text(header, rows)


def write_text(path, text: str) -> Path:
    path = Path(path)
    try:
        _atomic_write(path, text)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc
    return path


def emit_csv(series: VarianceSeries, windows: list[SqueezingWindow], destination, stem: str = "") -> tuple[Path, Path]:
    """Write ``<stem>series.csv`` and ``<stem>windows.csv`` into ``destination``."""
    dest = Path(destination)
    prefix = f"{stem}_" if stem else ""
    return (
        write_text(dest / f"{prefix}series.csv", series_csv(series)),
        write_text(dest / f"{prefix}windows.csv", windows_csv(windows)),
    )


def read_series_csv(path) -> tuple[list[str], list[list[float]]]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        return header, [[float(x) for x in row] for row in reader]
