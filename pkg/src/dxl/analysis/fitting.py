"""Stretched-exponential fits ``C(t) = a exp(-(t/tau)^nu)``.

The amplitude is pinned to the first data point.  The fit runs in
``(ln tau, ln nu)`` so positivity is automatic, starting from a straight
line through ``ln(-ln(C/a))`` versus ``ln t`` and refined by a small
Levenberg-Marquardt loop.
"""

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import InputError, InsufficientDataError
from ..traces import CorrelatorTrace

C_MIN = 0.2
MIN_POINTS = 4
NO_DECAY_TOL = 1e-9

# Levenberg-Marquardt schedule
LM_LAMBDA0 = 1e-3
LM_UP = 10.0
LM_DOWN = 10.0
LM_MAX_ITER = 200
LM_FTOL = 1e-15

SUMMARY_HEADER = ("lambda_or_theta", "axis", "tau", "nu", "tau_err", "nu_err")


@dataclass
class StretchedExpFit:
    amplitude: float
    tau: float
    nu: float
    c_min: float
    truncation_index: int  # first excluded index (window is [0, truncation_index))
    residual: float  # root of the (weighted) sum of squared residuals
    tau_err: float = float("nan")
    nu_err: float = float("nan")
    axis: str = ""
    window_sensitive: bool = False
    cost_history: list = field(default_factory=list)

    @property
    def n_points(self):
        return self.truncation_index

    def model(self, t):
        return self.amplitude * np.exp(-((np.asarray(t, dtype=float) / self.tau) ** self.nu))

    def to_record(self, g=None):
        return {
            "axis": self.axis,
            "g": "" if g is None else str(g),
            "tau_inv_J": self.tau,
            "nu": self.nu,
            "c_min": self.c_min,
            "n_points": self.n_points,
            "residual": self.residual,
            "window_sensitive": self.window_sensitive,
        }


def fit_window(values, c_min=C_MIN):
    """Index of the first point below ``c_min`` (or non-positive); len if none."""
    v = np.asarray(values, dtype=float)
    bad = np.nonzero((v < c_min) | (v <= 0.0))[0]
    return int(bad[0]) if bad.size else v.size


def initial_guess(t, c, a):
    """Regression of ``ln(-ln(C/a))`` on ``ln t``: returns (ln tau, ln nu)."""
    ratio = c / a
    ok = (t > 0) & (ratio > 0) & (ratio < 1)
    if np.count_nonzero(ok) < 2:
        return math.log(t[-1]) if t[-1] > 0 else 0.0, 0.0
    x = np.log(t[ok])
    y = np.log(-np.log(ratio[ok]))
    slope, intercept = np.polyfit(x, y, 1)
    nu = slope if slope > 0.05 else 1.0
    return -intercept / nu, math.log(nu)


def _residuals_and_jacobian(p, t, c, a, w):
    ln_tau, ln_nu = p
    tau, nu = math.exp(ln_tau), math.exp(ln_nu)
    with np.errstate(divide="ignore"):
        log_ratio = np.where(t > 0, np.log(np.where(t > 0, t, 1.0) / tau), 0.0)
    x = np.where(t > 0, np.exp(nu * log_ratio), 0.0)
    f = a * np.exp(-x)
    r = (f - c) * w
    jac = np.empty((t.size, 2))
    jac[:, 0] = f * x * nu * w
    jac[:, 1] = -f * x * nu * log_ratio * w
    return r, jac


def _levenberg_marquardt(p0, t, c, a, w):
    p = np.array(p0, dtype=float)
    r, jac = _residuals_and_jacobian(p, t, c, a, w)
    cost = float(r @ r)
    history = [cost]
    lam = LM_LAMBDA0
    for _ in range(LM_MAX_ITER):
        jtj = jac.T @ jac
        grad = jac.T @ r
        improved = False
        while lam < 1e16:
            step = np.linalg.solve(jtj + lam * np.diag(np.diag(jtj) + 1e-300), -grad)
            trial = p + step
            if not np.all(np.isfinite(trial)):
                lam *= LM_UP
                continue
            r_new, jac_new = _residuals_and_jacobian(trial, t, c, a, w)
            new_cost = float(r_new @ r_new)
            if new_cost < cost:
                improved = True
                break
            lam *= LM_UP
        if not improved:
            break
        gain = cost - new_cost
        p, r, jac, cost = trial, r_new, jac_new, new_cost
        history.append(cost)
        lam = max(lam / LM_DOWN, 1e-12)
        if gain <= LM_FTOL * max(cost, 1e-300) or np.max(np.abs(step)) < 1e-15:
            break
    return p, jac, cost, history


def fit_stretched_exponential(trace, c_min=C_MIN, weighted=False, axis=None):
    """Fit a CorrelatorTrace (or a ``(times, values)`` pair).

    Only points before the first value below ``c_min`` enter the fit.  With
    ``weighted`` the residuals are divided by the trace's standard errors.
    Z-axis fits are flagged as window sensitive.
    """
    if isinstance(trace, CorrelatorTrace):
        t, c, e = trace.times, trace.values, trace.stderr
        axis = trace.axis if axis is None else axis
    else:
        t, c = (np.asarray(x, dtype=float) for x in trace)
        e = np.zeros_like(c)
    if t.size != c.size or t.size == 0:
        raise InputError("times and values must be non-empty and of equal length")
    a = float(c[0])
    if not a > 0:
        raise InsufficientDataError("first trace value must be positive")
    k = fit_window(c, c_min)
    tw, cw = t[:k], c[:k]
    if np.count_nonzero(tw > 0) < MIN_POINTS:
        raise InsufficientDataError(
            f"only {np.count_nonzero(tw > 0)} points above C_min={c_min} (need {MIN_POINTS})"
        )
    if not np.any(cw[tw > 0] < a * (1.0 - NO_DECAY_TOL)):
        raise InsufficientDataError("trace does not decay inside the fit window")
    if weighted:
        ew = e[:k]
        if np.any(ew[tw > 0] <= 0):
            raise InputError("weighted fits need positive standard errors")
        w = np.where(ew > 0, 1.0 / np.where(ew > 0, ew, 1.0), 0.0)
    else:
        w = np.ones_like(tw)
    p0 = initial_guess(tw, cw, a)
    p, jac, cost, history = _levenberg_marquardt(p0, tw, cw, a, w)
    tau, nu = math.exp(p[0]), math.exp(p[1])
    dof = max(1, np.count_nonzero(tw > 0) - 2)
    try:
        cov = np.linalg.inv(jac.T @ jac) * (cost / dof)
        tau_err = tau * math.sqrt(max(cov[0, 0], 0.0))
        nu_err = nu * math.sqrt(max(cov[1, 1], 0.0))
    except np.linalg.LinAlgError:
        tau_err = nu_err = float("nan")
    axis = "" if axis is None else str(axis)
    return StretchedExpFit(a, tau, nu, c_min, k, math.sqrt(cost), tau_err, nu_err, axis,
                           axis.upper() == "Z", history)


def write_fit_summary(path, rows):
    """``rows`` are (parameter value, StretchedExpFit) pairs."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SUMMARY_HEADER)
        for param, fit in rows:
            w.writerow([repr(float(param)), fit.axis, repr(fit.tau), repr(fit.nu),
                        repr(fit.tau_err), repr(fit.nu_err)])
