"""Regenerate the variance-series and window CSVs for every published figure.

    python scripts/reproduce_figures.py [out_dir]

With no argument the files land in tests/golden/, which the regression tests
compare against.
"""

import sys
import time
from pathlib import Path

from kerrtrunc.cli import FIGURES, run_figure

ROOT = Path(__file__).resolve().parents[1]


def main(out_dir: Path) -> None:
    for fig_id in FIGURES:
        t0 = time.perf_counter()
        series_path, windows_path = run_figure(fig_id, out_dir)
        elapsed = time.perf_counter() - t0
        print(f"{fig_id}: {series_path.name}, {windows_path.name} ({elapsed:.2f} s)")
        for line in windows_path.read_text().splitlines()[1:]:
            print("   ", line)


if __name__ == "__main__":
    main(Path(sys.argv[1]) if len(sys.argv) > 1 else ROOT / "tests" / "golden")
