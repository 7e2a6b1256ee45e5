"""Adaptive explicit Runge-Kutta integration with proximity stops near the
critical set, invariant-drift monitoring, and section-crossing extraction.

One fixed kernel: Dormand-Prince 5(4) with PI step control and 4th-order
dense output.  Near the critical set the flow is stopped at a configurable
|t| threshold rather than regularized: the fields integrated here vanish
transversally at Z, so orbits never reach it in finite time and the
asymptotics are handled by the orbit classifier.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .charts import coords_of
from .errors import ConfigError, DomainError

# Dormand-Prince 5(4) tableau (FSAL), classic coefficients.
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    np.array([]),
    np.array([1 / 5]),
    np.array([3 / 40, 9 / 40]),
    np.array([44 / 45, -56 / 15, 32 / 9]),
    np.array([19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729]),
    np.array([9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656]),
    np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84]),
]
_B = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_E = np.array([71 / 57600, 0.0, -71 / 16695, 71 / 1920,
               -17253 / 339200, 22 / 525, -1 / 40])
# 4th-order continuous extension (Shampine).
_P = np.array([
    [1.0, -8048581381 / 2820520608, 8663915743 / 2820520608, -12715105075 / 11282082432],
    [0.0, 0.0, 0.0, 0.0],
    [0.0, 131558114200 / 32700410799, -68118460800 / 10900136933, 87487479700 / 32700410799],
    [0.0, -1754552775 / 470086768, 14199869525 / 1410260304, -10690763975 / 1880347072],
    [0.0, 127303824393 / 49829197408, -318862633887 / 49829197408, 701980252875 / 199316789632],
    [0.0, -282668133 / 205662961, 2019193451 / 616988883, -1453857185 / 822651844],
    [0.0, 40617522 / 29380423, -110615467 / 29380423, 69997945 / 29380423],
])

_SAFETY = 0.9
_MIN_FACTOR = 0.2
_MAX_FACTOR = 6.0
_PI_ALPHA = 0.17   # ~1/5 - 0.75*beta
_PI_BETA = 0.04


class Termination(str, Enum):
    TIME_LIMIT = "TimeLimit"
    Z_PROXIMITY = "ZProximity"
    STEP_LIMIT = "StepLimit"
    BLOWUP = "Blowup"


@dataclass
class IntegratorOptions:
    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    max_time: float = 100.0
    z_proximity_stop: float = 1e-6
    max_steps: int = 1_000_000
    dense_output: bool = False
    blowup_norm: float = 1e6

    def __post_init__(self):
        if self.rel_tol <= 0 or self.abs_tol <= 0:
            raise ConfigError("tolerances must be positive")
        if self.max_steps <= 0:
            raise ConfigError("max_steps must be positive")
        if self.max_time <= 0:
            raise ConfigError("max_time must be positive")


class DenseOutput:
    """Per-step quartic interpolants; evaluate anywhere in the covered span."""

    def __init__(self, t0s, hs, y0s, qs):
        self.t0s = np.asarray(t0s)
        self.hs = np.asarray(hs)
        self.y0s = np.asarray(y0s)
        self.qs = np.asarray(qs)

    @property
    def t_min(self):
        return float(self.t0s[0])

    @property
    def t_max(self):
        return float(self.t0s[-1] + self.hs[-1])

    def __call__(self, t):
        i = int(np.searchsorted(self.t0s, t, side="right") - 1)
        i = min(max(i, 0), len(self.hs) - 1)
        return _dense_eval(self.y0s[i], self.hs[i], self.qs[i],
                           (t - self.t0s[i]) / self.hs[i])


def _dense_eval(y0, h, q, theta):
    powers = np.array([theta, theta ** 2, theta ** 3, theta ** 4])
    return y0 + h * (q @ powers)


@dataclass
class Trajectory:
    """Accepted states of one integration run.

    ``times`` are elapsed (nonnegative, strictly increasing); ``time_sign``
    records the direction of physical time.
    """

    chart: object
    times: np.ndarray
    states: np.ndarray
    termination: Termination
    time_sign: int = 1
    invariant_drift: dict = field(default_factory=dict)
    events: list = field(default_factory=list)
    dense: object = None

    @property
    def final_state(self):
        return self.states[-1]

    @property
    def final_time(self):
        return float(self.times[-1])

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t"] + list(self.chart.coord_names))
            for t, s in zip(self.times, self.states):
                w.writerow([f"{t:.17g}"] + [f"{v:.17g}" for v in s])

    def meta_dict(self):
        return {
            "chart": self.chart.name,
            "n_states": int(len(self.times)),
            "final_time": self.final_time,
            "time_sign": self.time_sign,
            "termination": self.termination.value,
            "invariant_drift": {k: float(v) for k, v in self.invariant_drift.items()},
            "events": [{"time": float(t), "kind": k, "state": [float(v) for v in s]}
                       for t, k, s in self.events],
        }

    def to_json(self, path):
        with open(path, "w") as fh:
            json.dump(self.meta_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")


def _initial_step(f, y0, f0, rtol, atol, max_time):
    sc = atol + rtol * np.abs(y0)
    d0 = _rms(y0 / sc)
    d1 = _rms(f0 / sc)
    h0 = 1e-6 if (d0 < 1e-5 or d1 < 1e-5) else 0.01 * d0 / d1
    try:
        f1 = f(y0 + h0 * f0)
        if not np.all(np.isfinite(f1)):
            raise DomainError("non-finite trial derivative")
        d2 = _rms((f1 - f0) / sc) / h0
    except (ArithmeticError, DomainError):
        return min(h0, max_time)
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** 0.2
    return min(100 * h0, h1, max_time)


def _rms(v):
    return float(np.sqrt(np.mean(v * v)))


def integrate(vfield, x0, opts=None, time_sign=1, bchart=None, invariants=None):
    """Integrate a vector field from x0 with adaptive Dormand-Prince steps.

    The run stops at the first satisfied condition: elapsed time reaches
    ``max_time``; |t(state)| falls below ``z_proximity_stop`` (when ``bchart``
    is given; the crossing is located on the dense interpolant and recorded as
    a ZProximity event); the step count or step-size floor is hit; or the
    derivative/state becomes non-finite or exceeds ``blowup_norm``.

    ``time_sign=-1`` integrates backward; reported times stay increasing.
    Listed invariants (the field's own plus any extra) are monitored at
    accepted steps.
    """
    opts = opts or IntegratorOptions()
    y = np.array(coords_of(x0), dtype=float)
    fn = vfield.fn
    sign = float(time_sign)

    def f(state):
        out = np.array(fn(*state), dtype=float)
        return sign * out

    inv_fields = list(vfield.invariants) + list(invariants or [])
    inv_names = [g.name or f"I{i}" for i, g in enumerate(inv_fields)]
    inv0 = [g(y) for g in inv_fields]
    drift = {n: 0.0 for n in inv_names}

    tfun = bchart.t if bchart is not None else None
    if tfun is not None and abs(tfun(y)) <= opts.z_proximity_stop:
        raise DomainError("initial state is already within the Z proximity stop")

    times = [0.0]
    states = [y.copy()]
    events = []
    seg_t0, seg_h, seg_y0, seg_q = [], [], [], []

    try:
        f0 = f(y)
    except (ArithmeticError, DomainError):
        return Trajectory(vfield.chart, np.array(times), np.array(states),
                          Termination.BLOWUP, time_sign, drift, events, None)
    if not np.all(np.isfinite(f0)):
        return Trajectory(vfield.chart, np.array(times), np.array(states),
                          Termination.BLOWUP, time_sign, drift, events, None)

    h = _initial_step(f, y, f0, opts.rel_tol, opts.abs_tol, opts.max_time)
    t = 0.0
    err_prev = 1e-4
    termination = None
    nsteps = 0
    k = np.empty((7, y.size))
    k[0] = f0

    while termination is None:
        if nsteps >= opts.max_steps:
            termination = Termination.STEP_LIMIT
            break
        remaining = opts.max_time - t
        if remaining <= 1e-12 * max(1.0, opts.max_time):
            termination = Termination.TIME_LIMIT
            break
        h = min(h, remaining)
        if h < 1e-14 * max(1.0, float(np.linalg.norm(y))):
            termination = Termination.STEP_LIMIT
            break
        nsteps += 1

        bad = False
        try:
            for i in range(1, 6):
                yi = y + h * (k[:i].T @ _A[i])
                k[i] = f(yi)
            y_new = y + h * (k[:6].T @ _A[6])
            k[6] = f(y_new)
        except (ArithmeticError, DomainError):
            bad = True
        if bad or not (np.all(np.isfinite(k)) and np.all(np.isfinite(y_new))):
            termination = Termination.BLOWUP
            break

        sc = opts.abs_tol + opts.rel_tol * np.maximum(np.abs(y), np.abs(y_new))
        err = _rms(h * (k.T @ _E) / sc)

        if err > 1.0:
            h *= max(_MIN_FACTOR, _SAFETY * err ** -0.2)
            continue

        q = k.T @ _P  # dense coefficients for this step
        accept_h = h
        fac = _SAFETY * (err ** -_PI_ALPHA) * (err_prev ** _PI_BETA) if err > 0 else _MAX_FACTOR
        h *= min(_MAX_FACTOR, max(_MIN_FACTOR, fac))
        err_prev = max(err, 1e-10)

        event_cut = None
        if tfun is not None:
            tz = tfun(y_new)
            if abs(tz) <= opts.z_proximity_stop:
                lo, hi = 0.0, 1.0  # |t| crosses the stop threshold inside this step
                for _ in range(60):
                    mid = 0.5 * (lo + hi)
                    if abs(tfun(_dense_eval(y, accept_h, q, mid))) <= opts.z_proximity_stop:
                        hi = mid
                    else:
                        lo = mid
                event_cut = hi

        if event_cut is not None:
            y_new = _dense_eval(y, accept_h, q, event_cut)
            t_new = t + accept_h * event_cut
            termination = Termination.Z_PROXIMITY
            events.append((t_new, "ZProximity", y_new.copy()))
        else:
            t_new = t + accept_h

        if float(np.linalg.norm(y_new)) > opts.blowup_norm:
            termination = Termination.BLOWUP

        times.append(t_new)
        states.append(y_new.copy())
        if opts.dense_output:
            seg_t0.append(t)
            seg_h.append(accept_h * (event_cut if event_cut is not None else 1.0))
            seg_y0.append(y.copy())
            # rescale the interpolant so theta in [0,1] spans the kept piece
            if event_cut is not None and event_cut > 0:
                scale = np.array([event_cut, event_cut ** 2,
                                  event_cut ** 3, event_cut ** 4])
                seg_q.append(q * scale / event_cut)
            else:
                seg_q.append(q.copy())
        for name, g, v0 in zip(inv_names, inv_fields, inv0):
            drift[name] = max(drift[name], abs(g(y_new) - v0))

        if termination is None and t_new >= opts.max_time * (1.0 - 1e-14):
            termination = Termination.TIME_LIMIT
        y = y_new
        t = t_new
        k[0] = k[6]  # FSAL

    dense = None
    if opts.dense_output and seg_t0:
        dense = DenseOutput(seg_t0, seg_h, seg_y0, seg_q)
    return Trajectory(vfield.chart, np.array(times), np.array(states),
                      termination, time_sign, drift, events, dense)


@dataclass(frozen=True)
class Section:
    """Transversal {g = 0} with a crossing direction filter."""

    g: object                 # ScalarField
    direction: str = "Both"   # Up | Down | Both


def section_crossings(traj, section, tol_time=1e-10):
    """Crossing times/states of {g = 0} located by bisection on dense output."""
    if traj.dense is None:
        raise ConfigError("section_crossings requires dense output")
    g = section.g
    out = []
    ts = traj.times
    vals = [g(s) for s in traj.states]
    for i in range(len(ts) - 1):
        a, b = vals[i], vals[i + 1]
        if b == 0.0:
            continue  # knot zero: handled as the next interval's left endpoint
        if a == 0.0:
            if i == 0:
                continue  # starting on the section is not a crossing
            going_up = b > 0.0
            if (section.direction == "Up" and not going_up) \
                    or (section.direction == "Down" and going_up):
                continue
            out.append((float(ts[i]), traj.states[i].copy()))
            continue
        if a * b > 0.0:
            continue
        going_up = b > a
        if section.direction == "Up" and not going_up:
            continue
        if section.direction == "Down" and going_up:
            continue
        lo, hi = float(ts[i]), float(ts[i + 1])
        flo = a
        while hi - lo > tol_time:
            mid = 0.5 * (lo + hi)
            fm = g(traj.dense(mid))
            if (fm > 0) == (flo > 0) and fm != 0.0:
                lo, flo = mid, fm
            else:
                hi = mid
        tc = 0.5 * (lo + hi)
        out.append((tc, traj.dense(tc)))
    return out


def first_integral_drift(traj, field):
    """Max |I(state) - I(x0)| over the accepted states."""
    v0 = field(traj.states[0])
    return max(abs(field(s) - v0) for s in traj.states)
