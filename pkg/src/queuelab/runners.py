"""Experiment orchestration: replication jobs, deterministic merging,
CSV emission, and the run manifest.

Each replication r draws from RngStream(seed, r) and nothing else, so
results are independent of scheduling; rows are merged in replication
order regardless of which worker finishes first, and floats are
printed with 17 significant digits, which makes re-runs byte-identical
including under worker pools.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import os
import time
import traceback
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import channel, polling, routing, spatial
from .config import ExperimentConfig, load_table_rows
from .distributions import DistributionSpec
from .gg1 import simulate_forward
from .inputs import iid_process
from .multiserver import kw_path
from .rng import RngStream

VERSION = "0.1.0"

_COLUMNS = {
    "gg1": ("rep", "level", "p_exceed", "mean_wait", "customers"),
    "ggm": ("rep", "level", "p_exceed", "mean_wait", "regen_cycles",
            "customers"),
    "jsq": ("rep", "initial_i", "initial_j", "ks_common", "ks_independent"),
    "partial3": ("rep", "initial_id", "horizon", "growth_rate", "verdict"),
    "greedy_circle": ("rep", "arrivals", "served", "mean_wait",
                      "final_count", "verdict", "slope", "slope_lo",
                      "slope_hi"),
    "annihilation": ("rep", "time_avg_count", "final_count", "births",
                     "deletions", "verdict", "slope", "slope_lo",
                     "slope_hi"),
    "polling": ("rep", "time_avg_q1", "time_avg_q2", "final_q1", "final_q2",
                "busy_cycles"),
    "polling_scan": ("cell", "mu11", "mu12", "mu21", "mu22",
                     "mean_log_factor", "ci_lo", "ci_hi", "classification",
                     "cycles_complete", "cycles_capped", "absorbed"),
    "multiaccess": ("rep", "lam", "verdict", "slope", "throughput",
                    "final_backlog", "feedback"),
}


def columns_for(model: str):
    return _COLUMNS[model]


# -- per-replication row producers ------------------------------------


def _rows_gg1(params, seed, rep):
    proc = iid_process(params["service"], params["interarrival"])
    path = simulate_forward(proc, params["x0"], params["customers"],
                            RngStream(seed, rep))
    waits = path.waits
    mean_wait = float(waits.mean())
    rows = []
    for level in params["levels"]:
        p = float(np.mean(waits > level))
        rows.append((rep, level, p, mean_wait, params["customers"]))
    return rows


def _rows_ggm(params, seed, rep):
    proc = iid_process(params["service"], params["interarrival"])
    waits, empty = kw_path(proc, params["m"], params["customers"],
                           RngStream(seed, rep))
    mean_wait = float(waits.mean())
    cycles = int(empty.sum())
    rows = []
    for level in params["levels"]:
        p = float(np.mean(waits > level))
        rows.append((rep, level, p, mean_wait, cycles, params["customers"]))
    return rows


def _rows_jsq(params, seed, rep):
    proc = iid_process(params["service"], params["interarrival"])
    probe = routing.jsq_stationarity_probe(
        proc, params["initials"], params["customers"],
        params["probe_reps"], RngStream(seed, rep),
    )
    rows = []
    n = len(params["initials"])
    for i in range(n):
        for j in range(i + 1, n):
            rows.append((rep, i, j, probe.ks_common[i][j],
                         probe.ks_independent[i][j]))
    return rows


def _rows_partial3(params, seed, rep):
    result = routing.partial_access_experiment(
        params["lam"], params["f_left"], params["f_right"],
        params["initials"], params["arrivals"], 1, RngStream(seed, rep),
    )
    return [(rep, row.initial_id, params["arrivals"], row.growth_rate,
             row.verdict.klass) for row in result.rows]


def _rows_greedy_circle(params, seed, rep):
    cfg = spatial.CircleConfig(
        lam=params["lam"], L=params["L"], v=params["v"],
        policy=params["policy"], lattice_sites=params["lattice_sites"],
    )
    run = spatial.greedy_server_simulate(cfg, params["horizon"],
                                         RngStream(seed, rep))
    verdict = run.verdict()
    mean_wait = float(np.mean(run.waits)) if len(run.waits) else math.nan
    return [(rep, run.arrivals, run.served, mean_wait,
             int(run.counts[-1]), verdict.klass, verdict.slope,
             verdict.slope_ci[0], verdict.slope_ci[1])]


def _rows_annihilation(params, seed, rep):
    cfg = spatial.AnnihilationConfig(lam=params["lam"],
                                     epsilon=params["epsilon"],
                                     L=params["L"])
    run = spatial.annihilation_simulate(cfg, params["horizon"],
                                        RngStream(seed, rep))
    verdict = run.verdict()
    return [(rep, run.time_avg_count, int(run.counts[-1]), run.births,
             run.deletions, verdict.klass, verdict.slope,
             verdict.slope_ci[0], verdict.slope_ci[1])]


def _rows_polling(params, seed, rep):
    mu = params["mu"]
    cfg = polling.PollingConfig(mu=((mu[0], mu[1]), (mu[2], mu[3])))
    run = polling.polling_simulate(cfg, params["horizon"],
                                   RngStream(seed, rep),
                                   q0=tuple(params["q0"]))
    return [(rep, run.time_avg_q[0], run.time_avg_q[1], run.final_q[0],
             run.final_q[1], len(run.cycles))]


def _rows_polling_scan(params, seed, rep):
    scan = polling.recurrence_scan(
        params["resolution"], params["cycles"], RngStream(seed, rep),
        cap_factor=params["cap_factor"],
    )
    rows = []
    for idx, cell in enumerate(scan.cells):
        rows.append((
            idx, cell.mu[0][0], cell.mu[0][1], cell.mu[1][0], cell.mu[1][1],
            cell.mean_log_factor, cell.ci_lo, cell.ci_hi,
            cell.classification, cell.n_cycles, cell.n_capped,
            cell.absorbed,
        ))
    return rows


def _build_protocol(params):
    spec = params["rule"]
    kind = spec[0]
    if kind == "mult":
        return channel.multiplicative_rule(
            spec[1], spec[2], feedback=params["feedback"],
            p0=params["p0"], p_min=params["p_min"])
    if kind == "add":
        return channel.additive_rule(
            spec[1], spec[2], feedback=params["feedback"],
            p0=params["p0"], p_min=params["p_min"])
    return channel.table_rule(
        spec[1], feedback=params["feedback"],
        p0=params["p0"], p_min=params["p_min"])


def _rows_multiaccess(params, seed, rep):
    protocol = _build_protocol(params)
    stream = RngStream(seed, rep)
    rows = []
    for li, lam in enumerate(params["lambdas"]):
        run = channel.run_protocol(lam, protocol, params["slots"],
                                   stream.substream(li), w0=params["w0"])
        verdict = run.verdict()
        rows.append((rep, lam, verdict.klass, verdict.slope,
                     run.throughput, int(run.W[-1]), params["feedback"]))
    return rows


_PRODUCERS = {
    "gg1": _rows_gg1,
    "ggm": _rows_ggm,
    "jsq": _rows_jsq,
    "partial3": _rows_partial3,
    "greedy_circle": _rows_greedy_circle,
    "annihilation": _rows_annihilation,
    "polling": _rows_polling,
    "polling_scan": _rows_polling_scan,
    "multiaccess": _rows_multiaccess,
}


def _replication_job(model, params, seed, rep):
    """Worker entry point; never raises, reports failures as strings."""
    try:
        return rep, _PRODUCERS[model](params, seed, rep), None
    except Exception:
        return rep, [], f"replication {rep}: {traceback.format_exc()}"


# -- formatting and manifest -------------------------------------------


def format_cell(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def _canonical_value(v) -> str:
    if isinstance(v, DistributionSpec):
        return v.to_text()
    if isinstance(v, tuple) and v and isinstance(v[0], tuple):
        if v[0] and isinstance(v[0][0], str):
            pass  # rule spec, handled below
        else:
            return "; ".join(",".join(format_cell(x) for x in g) for g in v)
    if isinstance(v, tuple) and v and isinstance(v[0], str):
        kind = v[0]
        if kind in ("mult", "add"):
            return f"{kind}({format_cell(v[1])},{format_cell(v[2])})"
        if kind == "table_rows":
            return "table_rows=" + ";".join(
                ",".join(format_cell(x) for x in row) for row in v[1])
    if isinstance(v, tuple):
        return ",".join(format_cell(x) for x in v)
    if v is None:
        return "none"
    return format_cell(v)


def config_echo_lines(cfg: ExperimentConfig, params: dict) -> list:
    lines = [
        f"model = {cfg.model}",
        f"seed = {cfg.seed}",
        f"replications = {cfg.replications}",
    ]
    for key in sorted(params):
        lines.append(f"{cfg.model}.{key} = {_canonical_value(params[key])}")
    return lines


def resolve_params(cfg: ExperimentConfig, base_dir: str | None = None) -> dict:
    """Materialize file-backed parameters (the table rule) up front."""
    params = dict(cfg.params)
    rule = params.get("rule")
    if rule and rule[0] == "table":
        path = rule[1]
        if base_dir and not os.path.isabs(path):
            path = os.path.join(base_dir, path)
        params["rule"] = ("table_rows", load_table_rows(path))
    return params


def run_experiment(
    cfg: ExperimentConfig,
    out_path: str,
    threads: int = 1,
    base_dir: str | None = None,
) -> dict:
    """Run every replication, write CSV and manifest, return the manifest.

    Worker failures are collected per replication id; surviving
    replications still produce rows and the manifest lists the errors.
    """
    if threads < 1:
        raise ValueError("threads must be >= 1")
    params = resolve_params(cfg, base_dir)
    reps = 1 if cfg.model == "polling_scan" else cfg.replications
    t0 = time.monotonic()
    results = {}
    if threads == 1 or reps == 1:
        for rep in range(reps):
            results[rep] = _replication_job(cfg.model, params, cfg.seed, rep)
    else:
        with ProcessPoolExecutor(max_workers=min(threads, reps)) as pool:
            futures = [
                pool.submit(_replication_job, cfg.model, params, cfg.seed, rep)
                for rep in range(reps)
            ]
            for fut in futures:
                rep, rows, err = fut.result()
                results[rep] = (rep, rows, err)
    errors = []
    all_rows = []
    for rep in range(reps):
        _, rows, err = results[rep]
        if err:
            errors.append(err)
        all_rows.extend(rows)
    wall = time.monotonic() - t0

    echo = config_echo_lines(cfg, params)
    columns = _COLUMNS[cfg.model]
    body = io.StringIO()
    for line in echo:
        body.write(f"# {line}\n")
    writer = csv.writer(body, lineterminator="\n")
    writer.writerow(columns)
    for row in all_rows:
        writer.writerow([format_cell(v) for v in row])
    data = body.getvalue().encode("utf-8")

    os.makedirs(os.path.dirname(os.path.abspath(out_path)), exist_ok=True)
    with open(out_path, "wb") as fh:
        fh.write(data)
    digest = hashlib.sha256(data).hexdigest()
    manifest = {
        "version": VERSION,
        "model": cfg.model,
        "seed": cfg.seed,
        "replications": reps,
        "stream_ids": list(range(reps)),
        "columns": list(columns),
        "rows": len(all_rows),
        "config_echo": echo,
        "csv_path": os.path.basename(out_path),
        "csv_sha256": digest,
        "wall_clock_s": wall,
        "errors": errors,
    }
    with open(out_path + ".manifest.json", "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return manifest


def verify_manifest(manifest_path: str):
    """Check the recorded digest against the CSV next to the manifest."""
    with open(manifest_path, "r", encoding="utf-8") as fh:
        manifest = json.load(fh)
    csv_path = os.path.join(os.path.dirname(os.path.abspath(manifest_path)),
                            manifest["csv_path"])
    try:
        with open(csv_path, "rb") as fh:
            digest = hashlib.sha256(fh.read()).hexdigest()
    except OSError as e:
        return False, f"cannot read {csv_path}: {e}"
    if digest != manifest["csv_sha256"]:
        return False, (
            f"digest mismatch: manifest {manifest['csv_sha256']}, "
            f"file {digest}"
        )
    return True, "ok"
