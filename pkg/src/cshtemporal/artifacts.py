"""On-disk formats: trajectory CSV, NDJSON reports, npz data bundles."""

from __future__ import annotations

import csv
import io
import json
from typing import Iterable, Optional, TextIO

import numpy as np

from .integrator import DIAGNOSTIC_COLUMNS, InitialData, Trajectory
from .spectral import Grid, SpectralField

STATUS_PREFIX = "# status="


def fmt(x: float) -> str:
    # 17 significant digits round-trip every double
    return format(float(x), ".17g")


def write_csv(fh: TextIO, header: Iterable[str], rows: Iterable[Iterable[float]], status: Optional[str] = None):
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(list(header))
    for row in rows:
        w.writerow([fmt(v) for v in row])
    if status is not None:
        fh.write(f"{STATUS_PREFIX}{status}\n")


def trajectory_csv(traj: Trajectory, status: str) -> str:
    buf = io.StringIO()
    write_csv(buf, DIAGNOSTIC_COLUMNS, ([r[c] for c in DIAGNOSTIC_COLUMNS] for r in traj.records), status)
    return buf.getvalue()


def read_csv(text: str) -> tuple[list[str], np.ndarray, Optional[str]]:
    """Header, float rows and terminal status (``None`` if the file was cut short)."""
    lines = text.splitlines()
    status = None
    if lines and lines[-1].startswith(STATUS_PREFIX):
        status = lines.pop()[len(STATUS_PREFIX):]
    reader = csv.reader(lines)
    header = next(reader)
    rows = [[float(v) for v in row] for row in reader]
    return header, np.array(rows, dtype=float).reshape(len(rows), len(header)), status


def ndjson(records: Iterable[dict]) -> str:
    return "".join(json.dumps(r, sort_keys=True) + "\n" for r in records)


def save_data(path: str, data: InitialData, **meta):
    acf = data.acf0 if data.acf0 is not None else (data.grid.zeros(), data.grid.zeros())
    np.savez(path, phi0=data.phi0.coeffs, phi1=data.phi1.coeffs,
             acf1=acf[0].coeffs, acf2=acf[1].coeffs, mean0=np.asarray(data.mean0, dtype=complex),
             period=data.grid.period, meta=json.dumps(meta, sort_keys=True))


def load_data(path: str) -> InitialData:
    with np.load(path) as z:
        phi0 = z["phi0"]
        grid = Grid(phi0.shape[0], float(z["period"]))
        f = lambda c: SpectralField(grid, c)
        return InitialData(f(phi0), f(z["phi1"]), (f(z["acf1"]), f(z["acf2"])),
                           tuple(complex(m) for m in z["mean0"]))
