"""Compare the printed variance expressions against the amplitude path.

    python scripts/reconcile_formulas.py [out.csv]
"""

import csv
import sys

from kerrtrunc.cli import REFERENCE_COUPLING
from kerrtrunc.observables import reconciliation_report

FIELDS = ["model", "expression", "printed_deviation", "corrected_deviation", "correction", "status"]


def main(out=None) -> None:
    rows = reconciliation_report(REFERENCE_COUPLING)
    fh = open(out, "w", newline="") if out else sys.stdout
    try:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(FIELDS)
        for r in rows:
            writer.writerow([
                r.model, r.expression, f"{r.printed_deviation:.3e}",
                f"{r.corrected_deviation:.3e}", r.correction, r.status,
            ])
    finally:
        if out:
            fh.close()


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else None)
