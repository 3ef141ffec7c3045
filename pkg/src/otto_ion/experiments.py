"""Run configured experiments and write CSV data plus a JSON manifest."""

from __future__ import annotations

import csv
import dataclasses
import json
import logging
import math
import os
import platform
import time
from concurrent.futures import ThreadPoolExecutor
from importlib import metadata
from pathlib import Path
from typing import NamedTuple

from .config import SweepKind, write_config
from .engine import StrokeError, StrokeTimes, iter_cycles, pairwise_efficiency, run_cycle
from .integrator import IntegrationError, StepPolicy
from .model import initial_joint_state

logger = logging.getLogger(__name__)

SIM_ERRORS = (IntegrationError, StrokeError)

COLUMNS = {
    SweepKind.SWEEP_T1: (
        "t1", "Q_H", "W1", "W2", "w_net", "eta", "operational",
        "eta_ir", "W_ir_entropy", "Q_L", "meas_cost", "eta_m", "status",
    ),
    SweepKind.SWEEP_TAU: (
        "tau", "W_ir_energy", "W_ir_entropy", "w_net", "eta_ir", "operational",
        "Q_H", "W1", "W2", "eta", "status",
    ),
    SweepKind.MULTI_CYCLE: (
        "cycle_index", "Q_H", "w_net", "W_ir", "eta_avg_pairwise", "power", "cycle_time",
        "work_power", "eta_ir", "meas_cost", "status",
    ),
    SweepKind.SINGLE_CYCLE: (
        "t1", "tau", "Q_H", "W1", "W2", "Q_L", "w_net", "W_ir_entropy", "W_ir_energy",
        "eta", "eta_ir", "meas_cost", "eta_m", "cycle_time", "p_minus", "p_plus", "operational", "status",
    ),
}


class ExperimentResult(NamedTuple):
    csv_path: Path
    manifest_path: Path
    rows: list
    failures: int


def format_value(value):
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        return f"{value:.12g}"
    return str(value)


def tool_version():
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:
        return "unknown"


def worker_count(requested=None):
    n = requested or os.cpu_count() or 1
    cap = os.environ.get("OTTO_ION_THREADS")
    if cap:
        try:
            n = min(n, max(1, int(cap)))
        except ValueError:
            logger.warning("ignoring non-integer OTTO_ION_THREADS=%r", cap)
    return max(1, n)


def _status(exc):
    return "error: " + str(exc).replace(",", ";").replace("\n", " ")


def _cycle_row(rec):
    return {
        "Q_H": rec.q_hot, "W1": rec.w1, "W2": rec.w2, "Q_L": rec.q_low, "w_net": rec.w_net,
        "W_ir_entropy": rec.w_ir_total, "W_ir_energy": rec.w_ir_energy_total,
        "eta": rec.eta, "eta_ir": rec.eta_ir, "meas_cost": rec.meas_cost, "eta_m": rec.eta_m,
        "cycle_time": rec.cycle_time, "p_minus": rec.p_minus, "p_plus": rec.p_plus,
        "operational": rec.operational, "status": "ok",
    }


def _diag(rec):
    return {"trace_drift": rec.max_trace_drift, "min_eigenvalue": rec.min_eigenvalue}


def _run_point(spec, times):
    step = StepPolicy(step_size=spec.step_size)
    try:
        rec = run_cycle(initial_joint_state(spec.params), spec.params, times, spec.policy, step, spec.reference)
    except SIM_ERRORS as exc:
        logger.warning("point t_heat=%g tau=%g failed: %s", times.t_heat, times.tau, exc)
        diag = getattr(exc, "result", None)
        extra = {"trace_drift": diag.trace_drift, "min_eigenvalue": diag.min_eigenvalue_seen} if diag else {}
        return {"status": _status(exc)}, extra
    return _cycle_row(rec), _diag(rec)


def _sweep_rows(spec, workers):
    if spec.kind is SweepKind.SWEEP_T1:
        jobs = [(x, StrokeTimes(x, spec.times.tau)) for x in spec.grid]
        xname = "t1"
    elif spec.kind is SweepKind.SWEEP_TAU:
        jobs = [(x, StrokeTimes(spec.times.t_heat, x)) for x in spec.grid]
        xname = "tau"
    else:
        jobs = [(None, spec.times)]
        xname = None
    with ThreadPoolExecutor(max_workers=worker_count(workers)) as pool:
        results = list(pool.map(lambda job: _run_point(spec, job[1]), jobs))
    rows, points = [], []
    for (x, times), (row, diag) in zip(jobs, results):
        if xname:
            row = {xname: x, **row}
        else:
            row = {"t1": times.t_heat, "tau": times.tau, **row}
        rows.append(row)
        points.append({"x": x if xname else None, "status": row["status"], **diag})
    return rows, points


def _multicycle_rows(spec):
    step = StepPolicy(step_size=spec.step_size)
    rows, points = [], []
    cycles = iter_cycles(spec.cycles, spec.params, spec.times, spec.policy, step, spec.reference)
    prev = None
    for i in range(spec.cycles):
        try:
            rec = next(cycles)
        except SIM_ERRORS as exc:
            # a chained run cannot continue past a failed cycle
            logger.warning("cycle %d failed: %s", i + 1, exc)
            rows.append({"cycle_index": i + 1, "status": _status(exc)})
            rows.extend(
                {"cycle_index": j + 1, "status": f"skipped: cycle {i + 1} failed"} for j in range(i + 1, spec.cycles)
            )
            points.extend({"x": r["cycle_index"], "status": r["status"]} for r in rows[i:])
            break
        eta = math.nan if prev is None else pairwise_efficiency(rec, prev)
        rows.append({
            "cycle_index": i + 1, "Q_H": rec.q_hot, "w_net": rec.w_net, "W_ir": rec.w_ir_total,
            "eta_avg_pairwise": eta, "power": eta / rec.cycle_time, "cycle_time": rec.cycle_time,
            "work_power": rec.w_net / rec.cycle_time, "eta_ir": rec.eta_ir, "meas_cost": rec.meas_cost,
            "status": "ok",
        })
        points.append({"x": i + 1, "status": "ok", **_diag(rec)})
        prev = rec
    return rows, points


def write_csv(path, kind, rows):
    cols = COLUMNS[kind]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(cols)
        for row in rows:
            writer.writerow([format_value(row[c]) if c in row else "" for c in cols])


def read_csv(path):
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        return header, [dict(zip(header, r)) for r in reader]


def manifest_path_for(csv_path):
    csv_path = Path(csv_path)
    return csv_path.with_name(csv_path.name + ".manifest.json")


def run_experiment(spec, out=None, workers=None):
    """Run ``spec`` and write ``<out>`` (CSV) and ``<out>.manifest.json``.

    Failed grid points are recorded in the ``status`` column; the run goes on.
    """
    csv_path = Path(out or spec.default_output())
    csv_path.parent.mkdir(parents=True, exist_ok=True)
    started = time.time()
    if spec.kind is SweepKind.MULTI_CYCLE:
        rows, points = _multicycle_rows(spec)
    else:
        rows, points = _sweep_rows(spec, workers)
    write_csv(csv_path, spec.kind, rows)
    failures = sum(1 for r in rows if r["status"] != "ok")

    manifest = {
        "tool": "otto-ion",
        "version": tool_version(),
        "python": platform.python_version(),
        "kind": spec.kind.value,
        "csv": csv_path.name,
        "config": write_config(spec),
        "params": dataclasses.asdict(spec.params),
        "times": {"t_heat": spec.times.t_heat, "tau": spec.times.tau},
        "grid": list(spec.grid),
        "cycles": spec.cycles,
        "policy": spec.policy.value,
        "ir_reference": spec.reference.value,
        "integrator": dataclasses.asdict(StepPolicy(step_size=spec.step_size)) | {"scheme": "rk4-fixed"},
        "started_unix": started,
        "wall_clock_seconds": time.time() - started,
        "failures": failures,
        "points": points,
    }
    mpath = manifest_path_for(csv_path)
    with open(mpath, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True, default=float)
    logger.info("wrote %s (%d rows, %d failures)", csv_path, len(rows), failures)
    return ExperimentResult(csv_path, mpath, rows, failures)
