"""File formats: trajectory / budget / diagnostics CSV and audit JSON.

Floats are written with ``repr``, which round-trips binary64 exactly, so
identical runs give byte-identical files.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .audit import AuditReport
from .solvers import Budgets, Model, Scenario, Trajectory

TRAJECTORY_FILE = "trajectory.csv"
BUDGETS_FILE = "budgets.csv"
AUDIT_FILE = "audit.json"
DIAGNOSTICS_FILE = "diagnostics.csv"
CONVERGENCE_FILE = "convergence.csv"
CONFIG_FILE = "run.json"

TRAJECTORY_COLUMNS = ("t", "x", "theta", "alpha", "xi", "q", "h")
DIAGNOSTICS_COLUMNS = ("metric", "value", "reference", "rel_error")


def fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def write_rows(path, columns, rows):
    """Write ``rows`` (sequences, or dicts keyed by column) as CSV."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            values = [row.get(c) for c in columns] if isinstance(row, dict) else row
            w.writerow([fmt(v) for v in values])


def write_trajectory(tr: Trajectory, path):
    x = tr.grid.x

    def rows():
        for k, t in enumerate(tr.times):
            for i in range(tr.grid.n):
                yield (t, x[i], tr.theta[k, i], tr.alpha[k, i], tr.xi[k, i], tr.q[k, i], tr.h[k, i])

    write_rows(path, TRAJECTORY_COLUMNS, rows())


def write_budgets(tr: Trajectory, path):
    b = tr.budgets
    cols = ("t",) + Budgets.COLUMNS
    rows = zip(tr.times, *(getattr(b, c) for c in Budgets.COLUMNS))
    write_rows(path, cols, rows)


def write_audit(report: AuditReport, path):
    Path(path).write_text(report.to_json(indent=2, sort_keys=True) + "\n")


def read_audit(path) -> AuditReport:
    return AuditReport.from_dict(json.loads(Path(path).read_text()))


def _read_columns(path) -> dict[str, np.ndarray]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        data = np.array([[float(v) for v in row] for row in reader], dtype=float)
    if data.size == 0:
        data = data.reshape(0, len(header))
    return {name: data[:, j] for j, name in enumerate(header)}


def read_trajectory(directory, sc: Scenario) -> Trajectory:
    """Rebuild a :class:`Trajectory` from the CSV files written by a run of ``sc``."""
    directory = Path(directory)
    cols = _read_columns(directory / TRAJECTORY_FILE)
    n = sc.grid.n
    m = len(cols["t"]) // n
    if m * n != len(cols["t"]):
        raise ValueError(f"{TRAJECTORY_FILE} row count is not a multiple of the grid size {n}")
    fields = {name: cols[name].reshape(m, n) for name in TRAJECTORY_COLUMNS[2:]}
    bud = _read_columns(directory / BUDGETS_FILE)
    linearized = sc.theory is Model.TYPE3_LINEARIZED or (sc.theory is Model.TYPE3_FULL and sc.pseudolinear)
    return Trajectory(
        theory=sc.theory,
        grid=sc.grid,
        dt=sc.dt,
        steps=sc.steps,
        times=cols["t"].reshape(m, n)[:, 0].copy(),
        budgets=Budgets(**{c: bud[c] for c in Budgets.COLUMNS}),
        integrator_order=2 if sc.theory.second_order else 1,
        budget_model="linearized" if linearized else "exact",
        **fields,
    )


def write_diagnostics(rows, path):
    write_rows(path, DIAGNOSTICS_COLUMNS, rows)


def read_diagnostics(path) -> dict[str, dict]:
    with open(path, newline="") as fh:
        out = {}
        for row in csv.DictReader(fh):
            out[row["metric"]] = {
                k: (float(v) if v not in ("", None) else None) for k, v in row.items() if k != "metric"
            }
    return out


def write_convergence(table, path):
    write_rows(path, ("n", "dx", "dt", "error"), table.rows())
