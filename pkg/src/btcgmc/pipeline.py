"""Task grid execution behind the command-line front end.

A task is one (command, N, omega0) tuple.  Workers write one file per task
under ``tasks/`` (or a trajectory/element-map file at the top level); the
merged CSVs are concatenations of those files in sorted task order, so the
result does not depend on worker count or completion order.  The manifest
is rewritten after every finished task, which makes interrupted runs
resumable.
"""

from __future__ import annotations

import logging
import re
import traceback
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__, dicke, fits, thermo
from .correlations import correlation_spectrum
from .dynamics import IntegrationControls, evolve, initial_state_minus_x
from .qfi import qfi_gamma
from .records import (
    Manifest, RunConfig, TaskEntry, csv_text, file_digest, inventory, read_csv,
    read_csv_columns, write_csv,
)
from .steady import NessSpec, ness, ness_nullspace_oracle, steady_state_residual, trace_distance

log = logging.getLogger(__name__)

ORACLE_MAX_N = 30
THERMO_MAX_K = 10

SPECTRUM_HEADER = ["N", "omega0", "k", "residual", "genuine"]
THERMO_HEADER = ["omega0", "k", "jmax", "entropy_per_k", "gmc_per_spin", "convergence_flag"]
FITS_HEADER = ["model_id", "omega0", "N", "k", "param", "value", "uncertainty", "residual"]
ELEMENTS_HEADER = ["row", "col", "magnitude"]


def ness_header(k_list):
    return (["omega0", "N", "ltr", "purity", "coherence_l1", "mz"]
            + [f"I{k}" for k in k_list] + ["Fmax", "witnessed_depth"])


@dataclass(frozen=True, order=True)
class Task:
    command: str
    N: int
    omega0: float

    @property
    def task_id(self) -> str:
        if self.command == "thermo":
            return f"thermo:omega0={self.omega0!r}"
        if self.command == "fit":
            return "fit"
        return f"{self.command}:N={self.N}:omega0={self.omega0!r}"

    @property
    def tag(self) -> str:
        if self.command == "thermo":
            return f"w{self.omega0!r}"
        return f"N{self.N}_w{self.omega0!r}"


def build_tasks(cfg: RunConfig, commands) -> list[Task]:
    tasks = []
    for cmd in commands:
        if cmd in ("evolve", "ness"):
            tasks += [Task(cmd, n, w) for n in cfg.N_list for w in cfg.omega0_grid]
        elif cmd == "thermo":
            tasks += [Task(cmd, 0, w) for w in cfg.omega0_grid]
    return sorted(set(tasks))


# --- per-task work -----------------------------------------------------------

def _run_evolve(task: Task, cfg: RunConfig, out: Path):
    params = dicke.ModelParams(task.N, task.omega0, cfg.gamma)
    if cfg.initial_state == "dark":
        rho0 = dicke.dicke_state(task.N, 0)
    else:
        rho0 = initial_state_minus_x(task.N)
    controls = IntegrationControls(cfg.t_max, cfg.dt, cfg.snapshot_stride,
                                   tuple(t for t in cfg.state_snapshot_times if t <= cfg.t_max))
    rec = evolve(rho0, params, controls, cfg.k_list)
    cols = rec.columns()
    files = [f"trajectory_{task.tag}.csv"]
    write_csv(out / files[0], list(cols), zip(*cols.values()))
    for t in sorted(rec.states):
        rel = f"snapshot_{task.tag}_t{t!r}.csv"
        write_csv(out / rel, ELEMENTS_HEADER, _element_rows(rec.states[t]))
        files.append(rel)
    return files, {"rows": len(rec.times)}


def _element_rows(rho):
    mags = dicke.element_magnitudes(rho)
    idx = np.indices(mags.shape).reshape(2, -1)
    return zip(idx[0], idx[1], mags.ravel())


def _run_ness(task: Task, cfg: RunConfig, out: Path):
    params = dicke.ModelParams(task.N, task.omega0, cfg.gamma)
    spec = NessSpec(params, cfg.ltr if cfg.ltr is None else min(cfg.ltr, task.N))
    rho = ness(spec)
    metrics = {"steady_state_residual": steady_state_residual(rho, params)}
    if cfg.oracle_enabled and task.N <= ORACLE_MAX_N and spec.order == task.N:
        metrics["oracle_trace_distance"] = trace_distance(rho, ness_nullspace_oracle(params))

    spec_k = correlation_spectrum(rho)
    genuine = spec_k.genuine_clipped()
    q = qfi_gamma(rho)
    icols = []
    for k in cfg.k_list:
        if k > task.N:
            icols.append(np.nan)
        else:
            icols.append(spec_k.i_total if k == 1 else genuine[k])
    row = [task.omega0, task.N, spec.order, dicke.purity(rho), dicke.l1_coherence(rho),
           dicke.magnetization(rho)[2], *icols, q.f_max, q.witnessed_depth]
    files = [f"tasks/ness_{task.tag}.csv", f"tasks/spectrum_{task.tag}.csv"]
    write_csv(out / files[0], ness_header(cfg.k_list), [row])
    spec_rows = [[task.N, task.omega0, k, spec_k.residual[k],
                  spec_k.i_total if k == 1 else genuine[k]] for k in range(1, task.N + 1)]
    write_csv(out / files[1], SPECTRUM_HEADER, spec_rows)
    if cfg.element_maps:
        rel = f"elements_{task.tag}.csv"
        write_csv(out / rel, ELEMENTS_HEADER, _element_rows(rho))
        files.append(rel)
    return files, metrics


def _convergence_flag(gt, flags):
    mag = abs(gt)
    out = list(flags)
    if abs(mag - 1.0) < 1e-12:
        out.append("power_law")
    return "+".join(dict.fromkeys(out)) or "converged"


def _run_thermo(task: Task, cfg: RunConfig, out: Path):
    gt = thermo.gtilde_of(task.omega0, cfg.gamma)
    ks = sorted(k for k in cfg.k_list if k <= THERMO_MAX_K)
    sizes = sorted(set(ks) | {k - 1 for k in ks if k > 1})
    margs = {k: thermo.thermo_marginal(k, gt, cfg.jmax) for k in sizes}
    ent = {k: m.entropy() for k, m in margs.items()}
    if abs(gt) >= 1:
        jmax_used = thermo.resolve_jmax(gt, cfg.jmax)[0]
    else:
        jmax_used = cfg.jmax if cfg.jmax is not None else thermo.DIVERGENT_JMAX
    rows = []
    for k in ks:
        gmc = ent[1] if k == 1 else ent[k - 1] / (k - 1) - ent[k] / k
        rows.append([task.omega0, k, jmax_used, ent[k] / k, gmc,
                     _convergence_flag(gt, margs[k].flags)])
    files = [f"tasks/thermo_{task.tag}.csv"]
    write_csv(out / files[0], THERMO_HEADER, rows)
    metrics = {"min_eigenvalue": min(m.min_eig for m in margs.values())}

    if cfg.truncation and task.omega0 > 0:
        trows = []
        for k in ks:
            if k > cfg.truncation_n:
                continue
            rep = thermo.truncation_convergence(k, task.omega0, cfg.ltr_list,
                                                cfg.truncation_n, cfg.gamma)
            for fit in (rep.exponential, rep.power):
                for name in ("A", "alpha", "B"):
                    trows.append([f"truncation_{fit.model_id}", task.omega0, cfg.truncation_n, k,
                                  name, fit.params.get(name, np.nan),
                                  fit.uncertainties.get(name, np.nan), fit.residual])
            metrics[f"truncation_k{k}_exponential_preferred"] = int(rep.preferred == "exponential")
        rel = f"tasks/truncation_{task.tag}.csv"
        write_csv(out / rel, FITS_HEADER, trows)
        files.append(rel)
    return files, metrics


_RUNNERS = {"evolve": _run_evolve, "ness": _run_ness, "thermo": _run_thermo}


def run_task(task: Task, cfg: RunConfig) -> TaskEntry:
    """Execute one task; failures are caught and reported with the task id."""
    out = Path(cfg.output_dir)
    try:
        files, metrics = _RUNNERS[task.command](task, cfg, out)
    except Exception as exc:  # isolate per-point failures
        log.debug("task %s failed:\n%s", task.task_id, traceback.format_exc())
        return TaskEntry(task.task_id, "failed", message=f"{type(exc).__name__}: {exc}")
    return TaskEntry(task.task_id, "ok", files, metrics)


# --- merge -------------------------------------------------------------------

MERGED = {
    "ness": [("ness.csv", "tasks/ness_"), ("spectrum.csv", "tasks/spectrum_")],
    "thermo": [("thermo.csv", "tasks/thermo_"), ("truncation_fits.csv", "tasks/truncation_")],
}


def merge_outputs(cfg: RunConfig, tasks, entries) -> list[str]:
    """Concatenate per-task CSV bodies in sorted task order."""
    out = Path(cfg.output_dir)
    written = []
    for cmd, targets in MERGED.items():
        cmd_tasks = [t for t in sorted(tasks) if t.command == cmd]
        if not cmd_tasks:
            continue
        for merged_name, prefix in targets:
            header, body = None, []
            for t in cmd_tasks:
                e = entries.get(t.task_id)
                if e is None or e.status != "ok":
                    continue
                for f in e.files:
                    if f.startswith(prefix):
                        h, rows = read_csv(out / f)
                        header = header or h
                        body += rows
            if header is None:
                continue
            (out / merged_name).write_text(csv_text(header, body))
            written.append(merged_name)
    return written


# --- fits over existing outputs ---------------------------------------------

_TRAJ = re.compile(r"trajectory_N(\d+)_w([0-9.eE+-]+)\.csv$")


def _fit_rows(model_id, omega0, N, k, result: fits.FitResult):
    return [[model_id, omega0, N, k, name, result.params[name],
             result.uncertainties[name], result.residual] for name in result.params]


def _ness_targets(N, omega0, gamma):
    rho = ness(NessSpec(dicke.ModelParams(N, omega0, gamma)))
    spec_k = correlation_spectrum(rho)
    genuine = spec_k.genuine_clipped()
    corr = {1: spec_k.i_total}
    corr.update({k: genuine[k] for k in range(2, N + 1)})
    return corr, qfi_gamma(rho).f_max, dicke.magnetization(rho)[2]


def fit_trajectory(path, gamma=1.0):
    """Fit rows and failure notes for one trajectory file."""
    m = _TRAJ.search(Path(path).name)
    if not m:
        raise ValueError(f"{path} is not named trajectory_N<N>_w<omega0>.csv")
    N, omega0 = int(m.group(1)), float(m.group(2))
    cols = read_csv_columns(path)
    t = cols["t"]
    corr, f_inf, mz_inf = _ness_targets(N, omega0, gamma)
    rows, notes, gammas = [], [], {}
    for name in cols:
        if not re.fullmatch(r"I\d+", name):
            continue
        k = int(name[1:])
        y = cols[name]
        try:
            r = fits.fit_exponential_approach(t, y, corr[k])
            rows += _fit_rows("exp_approach", omega0, N, k, r)
            gammas[k] = r.params["Gamma"]
        except fits.FitError as exc:
            notes.append(f"{name} exp_approach: {exc}")
        try:
            r = fits.fit_damped_oscillation(t, y, corr[k], "growth", detrend=True)
            rows += _fit_rows("damped_growth", omega0, N, k, r)
        except fits.FitError as exc:
            notes.append(f"{name} damped_growth: {exc}")
    try:
        r = fits.fit_damped_oscillation(t, cols["Fmax"] / N, f_inf / N, "decay", detrend=True)
        rows += _fit_rows("damped_decay", omega0, N, "Fmax_per_N", r)
    except fits.FitError as exc:
        notes.append(f"Fmax damped_decay: {exc}")
    sel = t >= fits.TRANSIENT_CUTOFF
    try:
        nu = fits.zero_crossing_frequency(t[sel], cols["mz"][sel] - mz_inf, center=0.0)
        rows.append(["zero_crossing", omega0, N, "mz", "nu", nu, np.nan, np.nan])
    except fits.FitError as exc:
        notes.append(f"mz zero_crossing: {exc}")
    return rows, notes, (omega0, N, gammas)


def critical_exponent(thermo_csv, window=(1.0, 1.3)):
    """Power-law fit of I^1/N against omega0 - 1 over ``window`` (open at the left)."""
    cols = read_csv_columns(thermo_csv)
    w, k, v = cols["omega0"], cols["k"], cols["gmc_per_spin"]
    sel = (k == 1) & (w > window[0]) & (w <= window[1]) & (w > 1.0) & (v > 0)
    if sel.sum() < 2:
        raise fits.FitError(f"need two thermo points with k = 1 in {window}")
    return fits.fit_power_law(w[sel] - 1.0, v[sel])


def run_fit(cfg: RunConfig) -> TaskEntry:
    out = Path(cfg.output_dir)
    if cfg.fit_inputs:
        inputs = [Path(p) for p in cfg.fit_inputs]
        missing = [str(p) for p in inputs if not p.exists()]
        if missing:
            return TaskEntry("fit", "failed", message="missing inputs: " + " ".join(missing))
    else:
        inputs = sorted(out.glob("trajectory_*.csv"))
        if (out / "thermo.csv").exists():
            inputs.append(out / "thermo.csv")
    if not inputs:
        return TaskEntry("fit", "failed", message=f"no trajectory or thermo files in {out}")

    rows, notes, lifetimes = [], [], {}
    try:
        for path in inputs:
            if path.name.startswith("thermo"):
                try:
                    r = critical_exponent(path, cfg.beta_window)
                    rows += _fit_rows("power_law", "critical", "inf", 1, r)
                except fits.FitError as exc:
                    notes.append(f"{path.name} critical exponent: {exc}")
                continue
            r_rows, r_notes, (w, N, gammas) = fit_trajectory(path, cfg.gamma)
            rows += r_rows
            notes += [f"{path.name} {n}" for n in r_notes]
            if 1 in gammas and gammas[1] > 0:
                lifetimes.setdefault(w, []).append((N, gammas[1]))
        for w in sorted(lifetimes):
            pts = sorted(lifetimes[w])
            if len(pts) >= 2:
                n, g = np.array(pts).T
                rows += _fit_rows("power_law", w, "all", "Gamma_N", fits.fit_power_law(n, g))
    except Exception as exc:
        return TaskEntry("fit", "failed", message=f"{type(exc).__name__}: {exc}")
    write_csv(out / "fits.csv", FITS_HEADER, rows)
    metrics = {"fit_rows": len(rows), "skipped_fits": len(notes)}
    for n in notes:
        log.info("fit skipped: %s", n)
    return TaskEntry("fit", "ok", ["fits.csv"], metrics, "; ".join(notes))


# --- orchestration -----------------------------------------------------------

def _now():
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def _resumable(prior: Manifest | None, cfg: RunConfig, out: Path) -> dict:
    """Task entries from a previous run with the same config whose files are intact."""
    if prior is None or prior.keys.get("config_digest") != cfg.digest():
        return {}
    if prior.keys.get("version") != __version__:
        return {}
    keep = {}
    for tid, entry in prior.tasks.items():
        if entry.status != "ok" or tid == "fit":
            continue
        ok = all((out / f).exists() and prior.digests.get(f) == file_digest(out / f)
                 for f in entry.files)
        if ok:
            keep[tid] = entry
    return keep


def run_commands(cfg: RunConfig, command: str, commands) -> tuple[Manifest, bool]:
    """Run every task of ``commands``; returns the manifest and overall success."""
    out = Path(cfg.output_dir)
    tasks = build_tasks(cfg, commands)
    prior = Manifest.load(out)
    done = _resumable(prior, cfg, out)

    manifest = Manifest()
    manifest.keys.update({"version": __version__, "command": command, "state": "running",
                          "started": _now(), "config_digest": cfg.digest()})
    manifest.config = cfg.echo()
    entries = {}
    for t in tasks:
        if t.task_id in done:
            entries[t.task_id] = done[t.task_id]
        else:
            entries[t.task_id] = TaskEntry(t.task_id, "pending")
    manifest.tasks = entries

    def record(entry: TaskEntry):
        entries[entry.task_id] = entry
        for f in entry.files:
            manifest.digests[f] = file_digest(out / f)
        manifest.write(out)

    for tid in done:
        for f in done[tid].files:
            manifest.digests[f] = prior.digests[f]
    manifest.write(out)

    todo = [t for t in tasks if t.task_id not in done]
    if done:
        log.info("resuming: %d of %d tasks already complete", len(done), len(tasks))
    if cfg.worker_count == 1 or len(todo) <= 1:
        for t in todo:
            record(run_task(t, cfg))
    else:
        with ProcessPoolExecutor(max_workers=cfg.worker_count) as pool:
            futures = {pool.submit(run_task, t, cfg): t for t in todo}
            for fut in as_completed(futures):
                record(fut.result())

    merge_outputs(cfg, tasks, entries)
    if "fit" in commands:
        record(run_fit(cfg))

    ok = all(e.status == "ok" for e in entries.values())
    manifest.keys["state"] = "complete" if ok else "partial"
    manifest.keys["finished"] = _now()
    manifest.digests = inventory(out)
    manifest.write(out)
    return manifest, ok
