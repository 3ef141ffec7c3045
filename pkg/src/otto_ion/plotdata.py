"""Two-column text files (gnuplot ``plot 'file' using 1:2``) from experiment CSVs."""

from __future__ import annotations

import math
from pathlib import Path

from .experiments import read_csv

# first CSV column -> [(suffix, x column, y column)]
FIGURE_COLUMNS = {
    "t1": [("fig3_QH", "t1", "Q_H"), ("fig4_eta", "t1", "eta"), ("fig4_work", "t1", "w_net")],
    "tau": [("fig5_eta_ir", "tau", "eta_ir"), ("fig5_W_ir", "tau", "W_ir_entropy"), ("fig5_work", "tau", "w_net")],
    "cycle_index": [("fig6_power", "eta_avg_pairwise", "power")],
}


class SchemaError(ValueError):
    pass


def emit_plotdata(csv_path, out_dir=None):
    """Write the figure column files for ``csv_path`` and return their paths.

    Only rows with ``status == ok`` and finite values are kept.
    """
    csv_path = Path(csv_path)
    header, rows = read_csv(csv_path)
    # a single-cycle table starts with t1, tau and has no figure
    if not header or header[0] not in FIGURE_COLUMNS or header[:2] == ["t1", "tau"]:
        raise SchemaError(f"{csv_path}: no figure layout for columns {header[:3]}")
    out_dir = Path(out_dir) if out_dir else csv_path.parent
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for suffix, xcol, ycol in FIGURE_COLUMNS[header[0]]:
        missing = {xcol, ycol, "status"} - set(header)
        if missing:
            raise SchemaError(f"{csv_path}: missing columns {sorted(missing)}")
        path = out_dir / f"{csv_path.stem}.{suffix}.dat"
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(f"# {xcol} {ycol}\n")
            for row in rows:
                if row["status"] != "ok":
                    continue
                x, y = float(row[xcol]), float(row[ycol])
                if math.isfinite(x) and math.isfinite(y):
                    fh.write(f"{row[xcol]} {row[ycol]}\n")
        written.append(path)
    return written
