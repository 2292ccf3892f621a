"""Report persistence: canonical JSON and full-precision CSV.

Reports must be byte-identical across reruns of the same config, so the
JSON writer fixes key order and layout and embeds no timestamps; floats
serialize through repr, the shortest round-trip form.  CSV cells use repr
floats for the same reason (golden-file regression stability).
"""

import csv
import json

from . import __version__

SCHEMA = "bergman-lab/report/v1"

SAMPLE_COLUMNS = ("k", "sample", "tier", "hs_sq", "w22_sq", "l2_sq", "c", "ratio")


def canonical_json(report: dict) -> str:
    payload = dict(report)
    payload.setdefault("schema", SCHEMA)
    payload.setdefault("version", __version__)
    return json.dumps(payload, sort_keys=True, indent=2) + "\n"


def write_report(path, report: dict):
    with open(path, "w") as fh:
        fh.write(canonical_json(report))


def load_report(path) -> dict:
    with open(path) as fh:
        return json.load(fh)


def _cell(v):
    if isinstance(v, float):
        return repr(v)
    return str(v)


def write_samples_csv(path, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(SAMPLE_COLUMNS)
        for row in rows:
            writer.writerow([_cell(row[c]) for c in SAMPLE_COLUMNS])


def write_field_csv(path, grid, columns: dict):
    """Per-point dump: x, y, weight, then the named field columns."""
    names = list(columns)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["x", "y", "weight"] + names)
        for i in range(grid.size):
            row = [repr(float(grid.z[i].real)), repr(float(grid.z[i].imag)),
                   repr(float(grid.w[i]))]
            row.extend(repr(float(columns[n][i])) for n in names)
            writer.writerow(row)


def write_table_csv(path, rows, columns):
    """Generic small-table writer (per-k diagnostics and the like)."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_cell(row[c]) for c in columns])
