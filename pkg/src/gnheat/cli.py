"""Command-line entry point.

Subcommands::

    gnheat run CONFIG [--strict-second-law] [--out DIR]
    gnheat sweep CONFIG [--out DIR]
    gnheat report DIR
    gnheat validate CONFIG

Exit statuses: 0 success, 2 invalid configuration, 3 blow-up, 4 second-law
audit failure under ``--strict-second-law``.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import __version__, diagnostics, io
from .audit import AuditReport, audit_trajectory
from .config import MATERIAL_KEYS, RunConfig, load_config, parse_config
from .errors import BlowUpError, ConfigurationError, InsufficientSignalError
from .solvers import Model, Scenario, Trajectory, check_stability, solve

log = logging.getLogger("gnheat")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_BLOWUP = 3
EXIT_AUDIT = 4

SWEEP_INDEX = "sweep_index.csv"


# -- diagnostics table ------------------------------------------------------


def _rel_error(value, reference):
    if value is None or reference is None:
        return None
    if reference == 0:
        return abs(value - reference)
    return abs(value - reference) / abs(reference)


def _row(metric, value, reference=None):
    return {"metric": metric, "value": value, "reference": reference,
            "rel_error": _rel_error(value, reference)}


def reference_mode(sc: Scenario, k: float):
    """Predicted (rate, angular frequency) of Fourier mode ``k`` for the linear(ised) model."""
    p = sc.material
    if not sc.theory.second_order:
        return -p.kappa * k * k / p.lam, None
    if sc.theory is Model.TYPE2_ALPHA:
        kappa, K = 0.0, p.kappa_star
    elif sc.theory is Model.TYPE3_FULL:
        kappa, K = p.kappa, p.kappa_star + p.kappa_2star
    else:
        kappa, K = p.kappa, p.kappa_star
    roots = diagnostics.dispersion_roots(p.replace(kappa=kappa), k, stiffness=K)
    return roots.damping, roots.frequency


def default_probe(sc: Scenario) -> int:
    theta = sc.initial("theta")
    return int(abs(theta - theta.mean()).argmax())


def diagnostics_rows(tr: Trajectory, sc: Scenario, report: AuditReport, probe=None, dispersion=True):
    """Rows for ``diagnostics.csv``.

    ``rel_error`` is relative to ``reference`` unless the reference is zero,
    in which case it is the absolute difference.
    """
    rows = [_row("min_xi", float(tr.xi.min()))]
    for name in ("budget.energy", "budget.entropy"):
        if name in report:
            rows.append(_row(f"worst_{name.replace('.', '_')}_residual", report[name].residual))
    k = diagnostics.dominant_wavenumber(sc)
    if not dispersion or k is None:
        return rows
    rate_ref, freq_ref = reference_mode(sc, k)
    try:
        fit = diagnostics.measure_mode(tr, k)
        rows.append(_row("decay_rate", fit.rate, rate_ref))
        if sc.theory.second_order:
            rows.append(_row("mode_frequency", fit.frequency, freq_ref))
    except InsufficientSignalError as err:
        log.warning("mode fit skipped: %s", err)
    if sc.theory.second_order:
        probe = default_probe(sc) if probe is None else probe
        try:
            rows.append(_row("probe_frequency", diagnostics.measure_frequency(tr, probe), freq_ref))
        except InsufficientSignalError as err:
            log.warning("probe frequency skipped: %s", err)
    return rows


def _metrics(rows):
    return {r["metric"]: r for r in rows}


# -- run --------------------------------------------------------------------


def summary_line(tr: Trajectory, report: AuditReport, out_dir) -> str:
    budget = [report[n].residual for n in ("budget.energy", "budget.entropy") if n in report]
    worst = max(budget) if budget else math.nan
    failed = [c.check for c in report.failures]
    status = "pass" if not failed else "FAIL(" + ",".join(failed) + ")"
    return (
        f"theory={tr.theory.value} steps={tr.steps} min_xi={float(tr.xi.min()):.6g} "
        f"worst_budget_residual={worst:.3g} audit={status} out={out_dir}"
    )


def second_law_failures(report: AuditReport):
    return [c for c in report.failures if c.check.startswith("second_law.")]


def analyse(cfg: RunConfig, sc: Scenario, tr: Trajectory, out_dir: Path):
    """Audit and diagnostics for a finished run; writes ``audit.json`` and ``diagnostics.csv``."""
    report = audit_trajectory(tr, sc) if cfg.reports.audit else AuditReport()
    io.write_audit(report, out_dir / io.AUDIT_FILE)
    rows = diagnostics_rows(tr, sc, report, cfg.reports.probe, cfg.reports.dispersion)
    return report, rows


def execute(cfg: RunConfig, out_dir, strict=False):
    """Run one configuration into ``out_dir``; returns ``(exit status, message, metrics)``."""
    out_dir = Path(out_dir)
    try:
        sc = cfg.to_scenario()
        check_stability(sc)
    except ConfigurationError as err:
        return EXIT_CONFIG, f"invalid configuration: {err}", {}
    try:
        tr = solve(sc)
    except BlowUpError as err:
        return EXIT_BLOWUP, f"blow-up: {err}", {}
    except ConfigurationError as err:
        return EXIT_CONFIG, f"invalid configuration: {err}", {}
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / io.CONFIG_FILE).write_text(cfg.to_json() + "\n")
    if cfg.outputs.trajectory:
        io.write_trajectory(tr, out_dir / io.TRAJECTORY_FILE)
    io.write_budgets(tr, out_dir / io.BUDGETS_FILE)
    report, rows = analyse(cfg, sc, tr, out_dir)
    if cfg.reports.convergence:
        try:
            table = diagnostics.convergence_study(sc, cfg.reports.convergence_levels)
            io.write_convergence(table, out_dir / io.CONVERGENCE_FILE)
            rows.append(_row("convergence_order", table.order, 2.0))
        except ConfigurationError as err:
            log.warning("convergence study skipped: %s", err)
    io.write_diagnostics(rows, out_dir / io.DIAGNOSTICS_FILE)
    for note in tr.notes:
        log.warning("%s", note)
    message = summary_line(tr, report, out_dir)
    if strict and second_law_failures(report):
        return EXIT_AUDIT, message, _metrics(rows)
    return EXIT_OK, message, _metrics(rows)


def cmd_run(args) -> int:
    try:
        cfg = load_config(args.config)
    except ConfigurationError as err:
        print(f"invalid configuration: {err}", file=sys.stderr)
        return EXIT_CONFIG
    out = Path(args.out) if args.out else Path(cfg.outputs.directory)
    status, message, _ = execute(cfg, out, args.strict_second_law)
    print(message, file=sys.stdout if status in (EXIT_OK, EXIT_AUDIT) else sys.stderr)
    return status


def cmd_validate(args) -> int:
    try:
        cfg = load_config(args.config)
        sc = cfg.to_scenario()
        check_stability(sc)
    except ConfigurationError as err:
        print(f"invalid configuration: {err}", file=sys.stderr)
        return EXIT_CONFIG
    print(f"ok: theory={sc.theory.value} n={sc.grid.n} dt={sc.dt!r} steps={sc.steps}")
    return EXIT_OK


def cmd_report(args) -> int:
    directory = Path(args.directory)
    try:
        cfg = parse_config(json.loads((directory / io.CONFIG_FILE).read_text()))
        sc = cfg.to_scenario()
        tr = io.read_trajectory(directory, sc)
    except (OSError, ValueError) as err:
        print(f"cannot read run directory {directory}: {err}", file=sys.stderr)
        return EXIT_CONFIG
    report, rows = analyse(cfg, sc, tr, directory)
    io.write_diagnostics(rows, directory / io.DIAGNOSTICS_FILE)
    print(summary_line(tr, report, directory))
    return EXIT_OK


# -- sweep ------------------------------------------------------------------


def worker_count(default=None) -> int:
    raw = os.environ.get("GN_HEAT_THREADS")
    if raw:
        try:
            value = int(raw)
        except ValueError:
            raise ConfigurationError(f"GN_HEAT_THREADS must be an integer, got {raw!r}") from None
        if value < 1:
            raise ConfigurationError("GN_HEAT_THREADS must be at least 1")
        return value
    return default or os.cpu_count() or 1


def _sweep_point(payload):
    data, overrides, out_dir = payload
    # workers log nothing: failures travel back in the index
    logging.getLogger("gnheat").setLevel(logging.ERROR)
    cfg = parse_config(data).with_material(**overrides)
    status, message, metrics = execute(cfg, out_dir)
    return status, message, {k: v["value"] for k, v in metrics.items()}, {
        k: v["reference"] for k, v in metrics.items()
    }


def sweep_rows(cfg: RunConfig, out_root: Path):
    points = cfg.sweep_points()
    base = cfg.to_dict()
    payloads = [(base, pt, str(out_root / f"point_{i:03d}")) for i, pt in enumerate(points)]
    workers = min(worker_count(), len(payloads))
    if workers == 1:
        results = [_sweep_point(p) for p in payloads]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_sweep_point, payloads))
    material = cfg.material.model_dump(by_alias=True)
    rows = []
    for i, (pt, (status, message, values, refs)) in enumerate(zip(points, results)):
        row = {"point": i, **{k: pt.get(k, material[k]) for k in MATERIAL_KEYS}}
        min_xi = values.get("min_xi")
        row.update(
            status="ok" if status == EXIT_OK else "error",
            exit_status=status,
            decay_rate=values.get("decay_rate"),
            reference_rate=refs.get("decay_rate"),
            frequency=values.get("mode_frequency"),
            reference_frequency=refs.get("mode_frequency"),
            min_xi=min_xi,
            xi_negative="" if min_xi is None else int(min_xi < 0),
            message="" if status == EXIT_OK else message,
        )
        rows.append(row)
    return rows


SWEEP_COLUMNS = (
    ("point",) + MATERIAL_KEYS
    + ("status", "exit_status", "decay_rate", "reference_rate", "frequency",
       "reference_frequency", "min_xi", "xi_negative", "message")
)


def cmd_sweep(args) -> int:
    try:
        cfg = load_config(args.config)
        if not cfg.sweep:
            raise ConfigurationError("the configuration has no sweep grid", "sweep")
        out_root = Path(args.out) if args.out else Path(cfg.outputs.directory)
        out_root.mkdir(parents=True, exist_ok=True)
        rows = sweep_rows(cfg, out_root)
    except ConfigurationError as err:
        print(f"invalid configuration: {err}", file=sys.stderr)
        return EXIT_CONFIG
    index = out_root / SWEEP_INDEX
    io.write_rows(index, SWEEP_COLUMNS, rows)
    failed = sum(r["status"] != "ok" for r in rows)
    negative = sum(r["xi_negative"] == 1 for r in rows)
    print(f"sweep points={len(rows)} failed={failed} xi_negative={negative} index={index}")
    return EXIT_OK


# -- entry ------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gnheat", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one scenario and write CSV/JSON outputs")
    run.add_argument("config")
    run.add_argument("--strict-second-law", action="store_true",
                     help="exit with status 4 when the audit finds negative entropy production")
    run.add_argument("--out", help="output directory (overrides outputs.directory)")
    run.set_defaults(func=cmd_run)

    sweep = sub.add_parser("sweep", help="run the Cartesian product of a material parameter grid")
    sweep.add_argument("config")
    sweep.add_argument("--out", help="root output directory")
    sweep.set_defaults(func=cmd_sweep)

    report = sub.add_parser("report", help="regenerate audit and diagnostics from a run directory")
    report.add_argument("directory")
    report.set_defaults(func=cmd_report)

    validate = sub.add_parser("validate", help="check a configuration without running it")
    validate.add_argument("config")
    validate.set_defaults(func=cmd_validate)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s: %(message)s",
    )
    return args.func(args)


def entry():
    sys.exit(main())


if __name__ == "__main__":
    entry()
