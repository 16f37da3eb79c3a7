"""Run execution and result persistence.

Every run writes into its own directory::

    traces/<axis>.csv   time_in_inv_J,mean,stderr
    fits.csv            one stretched-exponential record per trace
    manifest.txt        config echo, kappa, version, wall time, file hashes

Files are written to a temporary name and renamed into place, and the
manifest is written last, so a run directory with a manifest whose status is
``ok`` is complete.
"""

import csv
import hashlib
import io
import math
import os
import time
from dataclasses import dataclass, field

import numpy as np

from .. import __version__
from ..analysis.disorder_order import simulate_do_protocol
from ..analysis.fitting import fit_stretched_exponential
from ..analysis.oracle import ising_classical_oracle
from ..dtwa import INFINITE_T, RAMSEY, dtwa_correlator
from ..errors import ConfigError, DXLError, InsufficientDataError, ResourceError
from ..meanfield.cdmft import cdmft_solve
from ..meanfield.dmft import dmft_solve
from ..model import DipolarModel, EnsembleGeometry, coupling_matrix, sample_positions, sample_sy_couplings
from ..parallel import ordered_map
from ..quantum.conventions import kappa as calibrated_kappa
from ..quantum.correlators import (global_ramsey, local_autocorrelator_exact,
                                   local_autocorrelator_typicality)
from ..quantum.hamiltonian import build_hamiltonian
from ..quantum.pair import pair_disorder_average
from ..quantum.propagate import DENSE_MAX_N
from ..traces import CorrelatorTrace, format_trace_csv, uniform_grid
from .config import SweepSpec

FIT_HEADER = ("axis", "g", "tau_inv_J", "nu", "c_min", "n_points", "residual",
              "window_sensitive", "tau_err", "nu_err", "status")
MANIFEST = "manifest.txt"
ERROR_RECORD = "error.txt"
MEANFIELD_AXES = ("X", "Y", "Z")

THETA_LABELS = {-math.pi / 4: "Ising", 0.0: "Heisenberg", math.pi / 4: "XY", math.pi / 2: "dipolar"}
LAMBDA_LABELS = {-1.0: "Ising", 0.0: "Heisenberg", 0.5: "XY"}


@dataclass
class RunResult:
    directory: str
    traces: dict
    fits: dict
    files: list
    wall_time: float
    metadata: dict = field(default_factory=dict)


# ---------------------------------------------------------------- output helpers

def atomic_write(path, text):
    tmp = f"{path}.tmp-{os.getpid()}"
    with open(tmp, "w", newline="") as fh:
        fh.write(text)
        fh.flush()
        os.fsync(fh.fileno())
    os.replace(tmp, path)


def _trace_csv_text(trace):
    return format_trace_csv(trace.times, trace.values, trace.stderr)


def sha256_of(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def _fit_rows(fits, g):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(FIT_HEADER)
    for axis, fit in fits.items():
        if isinstance(fit, Exception):
            w.writerow([axis, str(g), "", "", "", "", "", "", "", "",
                        f"{type(fit).__name__}: {fit}"])
            continue
        rec = fit.to_record(g)
        w.writerow([rec["axis"], rec["g"], repr(rec["tau_inv_J"]), repr(rec["nu"]),
                    repr(rec["c_min"]), rec["n_points"], repr(rec["residual"]),
                    str(rec["window_sensitive"]).lower(), repr(fit.tau_err), repr(fit.nu_err), "ok"])
    return buf.getvalue()


def write_manifest(directory, cfg, files, wall_time, status="ok", extra=None):
    lines = ["# dxl run manifest", f"status = {status}", f"version = {__version__}",
             f"kappa = {calibrated_kappa()!r}", f"wall_time_s = {wall_time:.3f}"]
    for k, v in (extra or {}).items():
        lines.append(f"{k} = {v}")
    lines.append("[config]")
    lines.append(cfg.echo().rstrip("\n"))
    lines.append("[files]")
    for rel in files:
        lines.append(f"{sha256_of(os.path.join(directory, rel))}  {rel}")
    atomic_write(os.path.join(directory, MANIFEST), "\n".join(lines) + "\n")


def read_manifest(directory):
    """``(header dict, {relpath: sha256})`` or None when absent."""
    path = os.path.join(directory, MANIFEST)
    if not os.path.isfile(path):
        return None
    header, files, section = {}, {}, "header"
    with open(path) as fh:
        for line in fh:
            line = line.rstrip("\n")
            if not line or line.startswith("#"):
                continue
            if line in ("[config]", "[files]"):
                section = line
                continue
            if section == "header" and "=" in line:
                k, v = (s.strip() for s in line.split("=", 1))
                header[k] = v
            elif section == "[files]":
                digest, rel = line.split("  ", 1)
                files[rel] = digest
    return header, files


def is_complete(directory):
    """True when the manifest says ok and every listed file matches its hash."""
    m = read_manifest(directory)
    if m is None or m[0].get("status") != "ok":
        return False
    for rel, digest in m[1].items():
        p = os.path.join(directory, rel)
        if not os.path.isfile(p) or sha256_of(p) != digest:
            return False
    return True


# ---------------------------------------------------------------- solvers

def _geometries(cfg):
    model = DipolarModel(r_min=cfg.r_min)
    if cfg.geometry:
        geom = EnsembleGeometry.from_csv(cfg.geometry, box_length=cfg.box_length)
        return [coupling_matrix(geom, model)]
    if cfg.n < 2:
        raise ConfigError("n", "need at least two spins")
    return [coupling_matrix(sample_positions(cfg.n, model, cfg.seed, k), model) for k in range(cfg.m)]


def _average(per_geometry, axis, times, meta):
    """Average traces over realizations; stderr from the spread between them.

    With a single realization the solver's own stderr is kept.
    """
    if len(per_geometry) == 1:
        tr = per_geometry[0]
        return CorrelatorTrace(axis, times, tr.values, tr.stderr, meta)
    vals = np.array([tr.values for tr in per_geometry])
    err = vals.std(axis=0, ddof=1) / math.sqrt(len(per_geometry))
    return CorrelatorTrace(axis, times, vals.mean(axis=0), err, meta)


def _local_axes(cfg):
    return [a for a in cfg.axes if a != "Ramsey"]


def _quantum_traces(cfg, couplings_list, t, estimator):
    g = cfg.g
    local = _local_axes(cfg)
    if any(c.n > 20 for c in couplings_list):
        raise ResourceError("quantum solvers are limited to N <= 20")

    def one(k):
        H = build_hamiltonian(couplings_list[k], g)
        out = {}
        if local:
            if estimator == "trace" and H.n <= DENSE_MAX_N and cfg.method != "krylov":
                out.update(local_autocorrelator_exact(H, local, t))
            else:
                out.update(local_autocorrelator_typicality(H, local, t, cfg.seed, k, cfg.method,
                                                           cfg.max_step))
        if "Ramsey" in cfg.axes:
            out["Ramsey"] = global_ramsey(H, t, cfg.method, cfg.max_step)
        return out

    per = ordered_map(one, range(len(couplings_list)))
    return per


def _solve(cfg):
    t = uniform_grid(cfg.t_max, cfg.n_points)
    g = cfg.g
    meta = {"solver": cfg.solver, "g": g.as_tuple(), "seed": cfg.seed}
    s = cfg.solver
    if s in ("dmft", "cdmft", "pair") and "Ramsey" in cfg.axes:
        raise ConfigError("axes", f"the {s} solver has no Ramsey signal")

    if s in ("exact", "sy"):
        if s == "sy":
            batch = [sample_sy_couplings(cfg.n, cfg.seed, k) for k in range(cfg.m)]
            per = _quantum_traces(cfg, batch, t, "typicality")
        else:
            per = _quantum_traces(cfg, _geometries(cfg), t, "trace")
        return {a: _average([p[a] for p in per], a, t, meta) for a in cfg.axes}

    if s == "dtwa":
        batch = _geometries(cfg)
        out = {}
        local = _local_axes(cfg)
        if local:
            out.update(dtwa_correlator(INFINITE_T, batch, g, cfg.n_t, t, cfg.seed, local))
        if "Ramsey" in cfg.axes:
            out.update(dtwa_correlator(RAMSEY, batch, g, cfg.n_t, t, cfg.seed))
        return {a: out[a] for a in cfg.axes}

    if s in ("dmft", "cdmft"):
        batch = _geometries(cfg)

        def one(k):
            if s == "dmft":
                return dmft_solve(batch[k], g, t, cfg.n_noise, cfg.tol, cfg.max_iter,
                                  seed=cfg.seed + k)
            return cdmft_solve(batch[k], g, t, cfg.j0_cluster, cfg.n_noise, cfg.tol,
                               cfg.max_iter, seed=cfg.seed + k)

        results = ordered_map(one, range(len(batch)))
        meta["iterations"] = [r.iterations for r in results]
        return {a: _average([r.trace(a) for r in results], a, t, meta) for a in cfg.axes}

    if s == "pair":
        return {a: pair_disorder_average(g, a, t, n_samples=cfg.n_samples, seed=cfg.seed)
                for a in cfg.axes}

    if s == "do-protocol":
        batch = _geometries(cfg)
        per = ordered_map(lambda k: simulate_do_protocol(batch[k], g, cfg.w_tau, cfg.plane, t,
                                                         cfg.n_disorder, cfg.seed, k),
                          range(len(batch)))
        return {cfg.plane: _average(per, cfg.plane, t, meta)}

    if s == "oracle-ising":
        return {"X": ising_classical_oracle(_geometries(cfg), t)}

    raise ConfigError("solver", f"unknown solver {s!r}")


def _fit_all(traces, c_min):
    fits = {}
    for axis, tr in traces.items():
        try:
            fits[axis] = fit_stretched_exponential(tr, c_min=c_min, axis=axis)
        except InsufficientDataError as exc:
            fits[axis] = exc
    return fits


def run(cfg, directory=None):
    """Execute one configuration and write its artifacts.

    Solver errors leave an ``error.txt`` record (and a manifest with status
    ``error``) before propagating.
    """
    directory = directory or cfg.output
    os.makedirs(os.path.join(directory, "traces"), exist_ok=True)
    start = time.perf_counter()
    try:
        traces = _solve(cfg)
    except DXLError as exc:
        wall = time.perf_counter() - start
        record = (f"status = error\ntype = {type(exc).__name__}\n"
                  f"exit_code = {exc.exit_code}\nmessage = {exc}\n")
        atomic_write(os.path.join(directory, ERROR_RECORD), record)
        write_manifest(directory, cfg, [ERROR_RECORD], wall, status="error")
        raise
    files = []
    for axis, tr in traces.items():
        rel = os.path.join("traces", f"{axis}.csv")
        atomic_write(os.path.join(directory, rel), _trace_csv_text(tr))
        files.append(rel)
    fits = _fit_all(traces, cfg.c_min)
    atomic_write(os.path.join(directory, "fits.csv"), _fit_rows(fits, cfg.g))
    files.append("fits.csv")
    stale = os.path.join(directory, ERROR_RECORD)
    if os.path.exists(stale):
        os.remove(stale)
    wall = time.perf_counter() - start
    write_manifest(directory, cfg, files, wall)
    return RunResult(directory, traces, fits, files, wall)


# ---------------------------------------------------------------- sweeps

def point_label(parameter, value):
    table = THETA_LABELS if parameter == "theta" else LAMBDA_LABELS
    for v, name in table.items():
        if abs(value - v) < 1e-9:
            return name
    return ""


def run_sweep(spec: SweepSpec, base, directory=None, threads=None):
    """Run every grid point in its own subdirectory, skipping completed ones.

    Failed points are recorded in ``points.csv`` and the campaign goes on;
    ``summary.csv`` lists ``lambda_or_theta,axis,tau,nu,tau_err,nu_err`` for
    every successful fit.  Raises the last error if no point succeeded.
    """
    directory = directory or base.output
    os.makedirs(directory, exist_ok=True)

    def one(k):
        cfg = spec.point_config(base, k)
        sub = os.path.join(directory, f"point_{k:03d}")
        if is_complete(sub):
            return k, cfg, "skipped", None
        try:
            run(cfg, sub)
            return k, cfg, "ok", None
        except DXLError as exc:
            return k, cfg, "failed", exc

    outcomes = ordered_map(one, range(len(spec.values)), threads)

    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["index", "parameter", "value", "label", "status", "message"])
    summary = io.StringIO()
    ws = csv.writer(summary, lineterminator="\n")
    ws.writerow(["lambda_or_theta", "axis", "tau", "nu", "tau_err", "nu_err"])
    errors = []
    for k, cfg, status, exc in outcomes:
        value = spec.values[k]
        w.writerow([k, spec.parameter, repr(value), point_label(spec.parameter, value), status,
                    "" if exc is None else f"{type(exc).__name__}: {exc}"])
        if exc is not None:
            errors.append(exc)
            continue
        with open(os.path.join(directory, f"point_{k:03d}", "fits.csv"), newline="") as fh:
            for row in csv.DictReader(fh):
                if row["status"] == "ok":
                    ws.writerow([repr(value), row["axis"], row["tau_inv_J"], row["nu"],
                                 row["tau_err"], row["nu_err"]])
    atomic_write(os.path.join(directory, "points.csv"), buf.getvalue())
    atomic_write(os.path.join(directory, "summary.csv"), summary.getvalue())
    if len(errors) == len(outcomes):
        raise errors[-1]
    return outcomes
