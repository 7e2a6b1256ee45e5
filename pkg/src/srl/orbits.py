"""Orbit taxonomy as an executable classifier, limit-set estimation near the
critical set, periodic-orbit detection, and Morse/separatrix analysis of the
induced flow on the critical surface.

Asymptotic classes are decided from finite-horizon integrations with explicit
residual thresholds; anything ambiguous is reported Unresolved rather than
guessed.  Discrimination between a point limit and a small limit circle uses
the projected-tail diameter together with the angular-rate test (a circle end
keeps rotating at a rate bounded away from zero while radius and axial
coordinate converge).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .charts import ScalarField, VectorField, coords_of
from .errors import ConfigError
from .flow import IntegratorOptions, Section, Termination, integrate, section_crossings
from .reeb import reeb_on_z


class LimitKind(str, Enum):
    POINT_ON_Z = "PointOnZ"
    CIRCLE_ON_Z = "CircleOnZ"
    OFF_Z_UNKNOWN = "OffZUnknown"
    UNRESOLVED = "Unresolved"


class OrbitKind(str, Enum):
    PERIODIC_OFF_Z = "PeriodicOffZ"
    FIXED_POINT = "FixedPoint"
    ESCAPE = "EscapeOrbit"
    SINGULAR_PERIODIC = "SingularPeriodic"
    GENERALIZED_ESCAPE = "GeneralizedEscape"
    GENERALIZED_SINGULAR_PERIODIC = "GeneralizedSingularPeriodic"
    QUASI_CLOSED = "QuasiClosed"          # predicate-only; never emitted directly
    UNRESOLVED = "Unresolved"


@dataclass(frozen=True)
class LimitSet:
    kind: LimitKind
    confidence: float = 0.0
    point: tuple = None          # PointOnZ
    level: float = None          # CircleOnZ: axial coordinate of the circle
    radius: float = None
    rate_sign: int = 0
    residual: float = math.inf
    termination: str = ""

    @property
    def on_z(self):
        return self.kind in (LimitKind.POINT_ON_Z, LimitKind.CIRCLE_ON_Z)


@dataclass(frozen=True)
class OrbitClassification:
    kind: OrbitKind
    forward: LimitSet
    backward: LimitSet
    seed: tuple
    period: float = None
    horizon: float = None

    @property
    def quasi_closed(self):
        """Closed off Z, or with both limit sets inside Z."""
        return (self.kind == OrbitKind.PERIODIC_OFF_Z
                or (self.forward.on_z and self.backward.on_z))

    def to_dict(self):
        def ls(e):
            return {"kind": e.kind.value, "confidence": e.confidence,
                    "point": list(e.point) if e.point is not None else None,
                    "level": e.level, "radius": e.radius,
                    "rate_sign": e.rate_sign,
                    "residual": None if math.isinf(e.residual) else e.residual,
                    "termination": e.termination}
        return {"seed": list(self.seed), "kind": self.kind.value,
                "quasi_closed": self.quasi_closed, "period": self.period,
                "horizon": self.horizon,
                "forward": ls(self.forward), "backward": ls(self.backward)}


@dataclass
class ClassifierOptions:
    horizon: float = 500.0
    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    z_proximity_stop: float = 1e-6
    tail_len: int = 2000
    tail_t_band: float = 1e-3     # tail = accepted states with |t| below this
    point_diameter: float = 1e-4  # projected-tail diameter for a point end
    point_field_norm: float = 1e-3
    capture_radius: float = 1e-4  # match of an escape end to a stationary point
    circle_residual: float = 1e-3
    rate_min: float = 1e-3
    periodic_tol: float = 1e-6

    def integrator(self, dense=False):
        return IntegratorOptions(rel_tol=self.rel_tol, abs_tol=self.abs_tol,
                                 max_time=self.horizon,
                                 z_proximity_stop=self.z_proximity_stop,
                                 dense_output=dense)


def _tail_selection(traj, bchart, opts, min_states=30):
    """Accepted states with |t| in a trailing band, widened as needed.

    Near a stationary point the field flattens out and the step size grows,
    so few accepted states may fall in the default band; widening is safe
    there because the projection of the approach segment degenerates to the
    limit point anyway.
    """
    tvals = np.array([abs(bchart.t(s)) for s in traj.states])
    band = opts.tail_t_band
    while band <= 0.9:
        idx = np.nonzero(tvals <= band)[0]
        if len(idx) >= min_states:
            break
        band *= 4.0
    else:
        idx = np.arange(max(0, len(traj.states) - 60), len(traj.states))
    if len(idx) > opts.tail_len:
        idx = idx[-opts.tail_len:]
    return traj.times[idx], traj.states[idx]


def limit_set_estimate(vfield, bchart, traj, opts=None):
    """Classify the end of a trajectory that stopped near the critical set.

    Two hypotheses are fitted on the projected tail: convergence to a
    stationary point (tiny diameter, vanishing field) and convergence to a
    circle parallel to Z (converging radius/axial coordinate, monotone angle
    with nonvanishing rate).  Returns Unresolved when neither fits.
    """
    opts = opts or ClassifierOptions()
    if traj.termination == Termination.TIME_LIMIT:
        # bounded horizon without Z contact: the limit set is away from Z
        # as far as the evidence goes
        return LimitSet(LimitKind.OFF_Z_UNKNOWN, confidence=0.5,
                        termination=traj.termination.value)
    if traj.termination != Termination.Z_PROXIMITY:
        # left the chart (blowup) or stagnated: no conclusion at all
        return LimitSet(LimitKind.UNRESOLVED, confidence=0.0,
                        termination=traj.termination.value)
    times, tail = _tail_selection(traj, bchart, opts)
    proj = np.array([bchart.project_to_z(s) for s in tail])
    terminal = proj[-1]

    span = proj.max(axis=0) - proj.min(axis=0)
    diameter = float(np.linalg.norm(span))
    fnorm = float(np.linalg.norm(vfield(terminal)))
    if diameter <= opts.point_diameter and fnorm <= opts.point_field_norm:
        return LimitSet(LimitKind.POINT_ON_Z, confidence=1.0,
                        point=tuple(terminal), residual=diameter,
                        termination=traj.termination.value)

    centroid = proj.mean(axis=0)
    d = proj - centroid
    _, _, vt = np.linalg.svd(d, full_matrices=True)
    e1, e2, normal = vt[0], vt[1], vt[-1]
    axial = d @ normal
    u, v = d @ e1, d @ e2
    # algebraic circle fit in the plane (least squares on |p - c|^2 = r^2)
    A = np.column_stack([2.0 * u, 2.0 * v, np.ones_like(u)])
    try:
        (ca, cb, cc), *_ = np.linalg.lstsq(A, u * u + v * v, rcond=None)
    except np.linalg.LinAlgError:
        ca = cb = cc = 0.0
    radius = float(math.sqrt(max(cc + ca * ca + cb * cb, 0.0)))
    center = centroid + ca * e1 + cb * e2
    radii = np.hypot(u - ca, v - cb)
    residual = float(math.sqrt(np.mean(axial ** 2) + np.var(radii)))
    ang = np.unwrap(np.arctan2(v - cb, u - ca))
    dt = float(times[-1] - times[0])
    rate = (ang[-1] - ang[0]) / dt if dt > 0 else 0.0
    steps = np.diff(ang)
    monotone = np.mean(np.sign(steps) == np.sign(rate)) > 0.95 if rate != 0 else False

    if (radius > opts.point_diameter
            and residual <= opts.circle_residual * (1.0 + radius)
            and monotone and abs(rate) >= opts.rate_min):
        return LimitSet(LimitKind.CIRCLE_ON_Z, confidence=1.0,
                        point=tuple(center), level=float(center[-1]),
                        radius=radius, rate_sign=int(math.copysign(1, rate)),
                        residual=residual, termination=traj.termination.value)
    return LimitSet(LimitKind.UNRESOLVED, confidence=0.0, residual=residual,
                    termination=traj.termination.value)


def detect_periodic(vfield, traj, tol=1e-6, min_period=1e-3, candidate_radius=None):
    """Recurrence detection on a transversal through the seed, confirmed by
    re-integrating one candidate period.  Returns the period or None."""
    if traj.dense is None:
        raise ConfigError("detect_periodic requires dense output")
    x0 = np.asarray(traj.states[0])
    f0 = vfield(x0)
    norm = float(np.linalg.norm(f0))
    if norm == 0.0:
        return None
    n = f0 / norm
    if candidate_radius is None:
        candidate_radius = 1e-2 * (1.0 + float(np.linalg.norm(x0)))

    g = ScalarField(traj.chart, lambda *c: sum(n[i] * (c[i] - x0[i])
                                               for i in range(len(x0))))
    for tc, sc in section_crossings(traj, Section(g, "Up")):
        if tc < min_period:
            continue
        if float(np.linalg.norm(sc - x0)) > candidate_radius:
            continue
        check = integrate(vfield, x0,
                          IntegratorOptions(rel_tol=1e-11, abs_tol=1e-13,
                                            max_time=tc), time_sign=traj.time_sign)
        if check.termination == Termination.TIME_LIMIT \
                and float(np.linalg.norm(check.final_state - x0)) <= tol:
            return float(tc)
    return None


def classify_orbit(vfield, bchart, x0, opts=None):
    """Full two-sided classification of the orbit through x0 (off Z).

    Integrates forward and backward, estimates each end's limit set, checks
    recurrence, and combines per the taxonomy: both point ends give a
    singular-periodic orbit, both ends inside Z a generalized one, a single
    point (circle) end an escape (generalized escape) orbit.  Any ambiguous
    end makes the whole classification Unresolved.
    """
    opts = opts or ClassifierOptions()
    x0 = np.array(coords_of(x0), dtype=float)
    f0 = vfield(x0)
    if float(np.linalg.norm(f0)) <= 1e-12 * (1.0 + float(np.linalg.norm(x0))):
        still = LimitSet(LimitKind.POINT_ON_Z if abs(bchart.t(x0)) < 1e-6
                         else LimitKind.OFF_Z_UNKNOWN, confidence=1.0,
                         point=tuple(x0))
        return OrbitClassification(OrbitKind.FIXED_POINT, still, still, tuple(x0),
                                   horizon=opts.horizon)

    fwd = integrate(vfield, x0, opts.integrator(dense=True), time_sign=1, bchart=bchart)
    period = None
    if fwd.termination == Termination.TIME_LIMIT:
        period = detect_periodic(vfield, fwd, tol=opts.periodic_tol)
        if period is not None:
            ls = LimitSet(LimitKind.OFF_Z_UNKNOWN, confidence=1.0,
                          termination="Periodic")
            return OrbitClassification(OrbitKind.PERIODIC_OFF_Z, ls, ls,
                                       tuple(x0), period=period,
                                       horizon=opts.horizon)
    bwd = integrate(vfield, x0, opts.integrator(dense=False), time_sign=-1, bchart=bchart)

    fls = limit_set_estimate(vfield, bchart, fwd, opts)
    bls = limit_set_estimate(vfield, bchart, bwd, opts)
    kind = _combine(fls, bls)
    return OrbitClassification(kind, fls, bls, tuple(x0), period=period,
                               horizon=opts.horizon)


def _combine(fls, bls):
    kinds = (fls.kind, bls.kind)
    if LimitKind.UNRESOLVED in kinds:
        return OrbitKind.UNRESOLVED
    points = sum(k == LimitKind.POINT_ON_Z for k in kinds)
    on_z = fls.on_z + bls.on_z
    if points == 2:
        return OrbitKind.SINGULAR_PERIODIC
    if on_z == 2:
        return OrbitKind.GENERALIZED_SINGULAR_PERIODIC
    if points == 1:
        return OrbitKind.ESCAPE
    if on_z == 1:
        return OrbitKind.GENERALIZED_ESCAPE
    return OrbitKind.UNRESOLVED


# ---------------------------------------------------------------------------
# critical points and separatrices of the induced flow on the critical surface
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CriticalPointOnZ:
    coords: tuple
    morse_index: int
    value: float
    hessian_eigs: tuple
    grad_norm: float
    morse_ok: bool


class SphereSurface:
    """Critical unit sphere of a singular 3d form; the induced flow is the
    on-Z Reeb solve and the coefficient function is the form's dt/t factor."""

    def __init__(self, form, level=None):
        self.form = form
        self.level = level
        self.hamiltonian = form.f
        self.wrap = None

    def retract(self, p):
        p = np.asarray(p, dtype=float)
        return p / np.linalg.norm(p)

    def shape_correction(self, p, frame, ambient_grad):
        # covariant Hessian on the unit sphere: subtract (grad . n) * I
        n = self.retract(p)
        return float(ambient_grad @ n) * np.eye(frame.shape[1])

    def frame(self, p):
        n = self.retract(p)
        _, _, vt = np.linalg.svd(n[None, :], full_matrices=True)
        return vt[1:].T

    def field(self, p):
        return reeb_on_z(self.form, self.retract(p), level=self.level)

    def seeds(self, n=48):
        # Fibonacci lattice including near-polar points
        out = []
        golden = math.pi * (3.0 - math.sqrt(5.0))
        for i in range(n):
            z = 1.0 - 2.0 * (i + 0.5) / n
            r = math.sqrt(max(0.0, 1.0 - z * z))
            th = golden * i
            out.append(np.array([r * math.cos(th), r * math.sin(th), z]))
        return out

    def distance(self, p, q):
        return float(np.linalg.norm(np.asarray(p) - np.asarray(q)))


class TorusSurface:
    """Flat 2-torus with a Hamiltonian flow; angles live on the plane and are
    compared modulo the periods."""

    def __init__(self, hamiltonian, vfield, periods=(2 * math.pi, 2 * math.pi)):
        self.hamiltonian = hamiltonian
        self._field = vfield
        self.wrap = np.asarray(periods, dtype=float)

    def retract(self, p):
        return np.asarray(p, dtype=float)

    def frame(self, p):
        return np.eye(2)

    def shape_correction(self, p, frame, ambient_grad):
        return np.zeros((2, 2))  # flat

    def field(self, p):
        return self._field(p)

    def seeds(self, n=6):
        vals = np.linspace(0.0, 2.0 * math.pi, n, endpoint=False) + 0.37
        return [np.array([a, b]) for a in vals for b in vals]

    def distance(self, p, q):
        d = np.asarray(p) - np.asarray(q)
        d = (d + 0.5 * self.wrap) % self.wrap - 0.5 * self.wrap
        return float(np.linalg.norm(d))


def surface_for(obj, level=None):
    """Surface wrapper for a singular form (sphere critical set) or a demo."""
    from .bforms import BForm1
    from .constructions import TorusDemo
    if isinstance(obj, BForm1):
        return SphereSurface(obj, level=level)
    if isinstance(obj, TorusDemo):
        return TorusSurface(obj.H, obj.field)
    raise ConfigError(f"no critical-surface model for {type(obj).__name__}")


def _surface_gradient(surface, p, frame=None):
    e = surface.frame(p) if frame is None else frame
    v, g = surface.hamiltonian.value_and_gradient(surface.retract(p))
    return v, e.T @ g, e


def _surface_hessian(surface, p, frame, h=1e-5):
    """Covariant Hessian of the restricted function in a fixed frame.

    Built from central differences of the exact ambient gradient plus the
    surface's shape correction (the fixed-frame differences alone miss the
    curvature term: for the height function on the sphere they would give the
    ambient second derivative instead of the covariant one)."""
    k = frame.shape[1]
    H = np.zeros((k, k))
    for i in range(k):
        dp = h * frame[:, i]
        _, gp, _ = _surface_gradient(surface, np.asarray(p) + dp, frame)
        _, gm, _ = _surface_gradient(surface, np.asarray(p) - dp, frame)
        H[:, i] = (gp - gm) / (2.0 * h)
    H = 0.5 * (H + H.T)
    g_amb = surface.hamiltonian.value_and_gradient(surface.retract(p))[1]
    return H - surface.shape_correction(p, frame, g_amb)


def find_critical_points_on_z(obj, seeds=None, level=None, newton_tol=1e-12,
                              max_iter=60, dedup=1e-5):
    """Newton refinement of the restricted coefficient function's critical
    points from grid seeds; Morse data from a finite-difference Hessian of the
    exact gradient."""
    surface = obj if isinstance(obj, (SphereSurface, TorusSurface)) \
        else surface_for(obj, level=level)
    seeds = surface.seeds() if seeds is None else seeds
    found = []
    for seed in seeds:
        p = surface.retract(np.asarray(seed, dtype=float))
        ok = False
        for _ in range(max_iter):
            _, g, e = _surface_gradient(surface, p)
            gnorm = np.linalg.norm(g)
            if gnorm <= newton_tol:
                ok = True
                break
            H = _surface_hessian(surface, p, e)
            try:
                step = np.linalg.solve(H, -g)
            except np.linalg.LinAlgError:
                step = -g
            step_norm = np.linalg.norm(step)
            if step_norm > 0.5:
                step *= 0.5 / step_norm
            # backtrack on |grad|; fall back to descent on |grad|^2
            improved = False
            for direction in (step, -(H.T @ g)):
                dn = np.linalg.norm(direction)
                if dn == 0.0:
                    continue
                direction = direction / dn * min(dn, 0.5)
                scale = 1.0
                for _ in range(12):
                    cand = surface.retract(p + e @ (scale * direction))
                    if np.linalg.norm(_surface_gradient(surface, cand)[1]) \
                            < gnorm * (1.0 - 1e-4 * scale):
                        p = cand
                        improved = True
                        break
                    scale *= 0.5
                if improved:
                    break
            if not improved:
                break
        if not ok:
            continue
        if any(surface.distance(p, q.coords) < dedup for q in found):
            continue
        frame = surface.frame(p)
        value, g, _ = _surface_gradient(surface, p, frame)
        H = _surface_hessian(surface, p, frame)
        eigs = np.linalg.eigvalsh(H)
        found.append(CriticalPointOnZ(
            coords=tuple(float(c) for c in p),
            morse_index=int(np.sum(eigs < 0.0)),
            value=float(value),
            hessian_eigs=tuple(float(x) for x in eigs),
            grad_norm=float(np.linalg.norm(g)),
            morse_ok=bool(np.min(np.abs(eigs)) > 1e-8)))
    found.sort(key=lambda c: (-c.value, c.coords))
    return found


@dataclass(frozen=True)
class SeparatrixOrbit:
    source: CriticalPointOnZ
    target: CriticalPointOnZ
    label: str                    # "homoclinic" | "heteroclinic"
    states: np.ndarray


@dataclass(frozen=True)
class SeparatrixReport:
    orbits: tuple
    singular_periodic_count: int


def _field_jacobian(surface, p, frame, h=1e-6):
    k = frame.shape[1]
    J = np.zeros((k, k))
    for i in range(k):
        dp = h * frame[:, i]
        fp = frame.T @ surface.field(surface.retract(np.asarray(p) + dp))
        fm = frame.T @ surface.field(surface.retract(np.asarray(p) - dp))
        J[:, i] = (fp - fm) / (2.0 * h)
    return J


def trace_separatrices(obj, saddle, criticals=None, level=None, offset=1e-6,
                       capture_radius=1e-3, max_time=200.0):
    """Trace both unstable semi-orbits of an index-1 critical point of the
    induced surface flow and label them by the critical point they reach."""
    surface = obj if isinstance(obj, (SphereSurface, TorusSurface)) \
        else surface_for(obj, level=level)
    if saddle.morse_index != 1:
        raise ConfigError("separatrices are traced from index-1 points only")
    if criticals is None:
        criticals = find_critical_points_on_z(surface)
    p0 = np.asarray(saddle.coords, dtype=float)
    frame = surface.frame(p0)
    J = _field_jacobian(surface, p0, frame)
    eigvals, eigvecs = np.linalg.eig(J)
    idx = int(np.argmax(eigvals.real))
    if eigvals.real[idx] <= 0.0:
        raise ConfigError("no unstable direction at the given point")
    u = np.real(eigvecs[:, idx])
    u /= np.linalg.norm(u)

    chart = surface.hamiltonian.chart
    wrap = surface.wrap

    def fn(*c):
        return tuple(surface.field(np.array(c, dtype=float)))

    vfield = VectorField(chart, fn=fn, name="on_z_flow")

    orbits = []
    for sign in (1.0, -1.0):
        x0 = surface.retract(p0 + frame @ (sign * offset * u))
        traj = integrate(vfield, x0,
                         IntegratorOptions(rel_tol=1e-10, abs_tol=1e-12,
                                           max_time=max_time))
        states = traj.states
        target = None
        left = False
        for s in states:
            dist_src = surface.distance(s, p0)
            if not left:
                left = dist_src > 2.0 * capture_radius
                continue
            for c in criticals:
                if surface.distance(s, c.coords) <= capture_radius:
                    target = c
                    break
            if target is not None:
                break
        if target is None:
            continue
        label = "homoclinic" if surface.distance(target.coords, p0) <= capture_radius \
            else "heteroclinic"
        orbits.append(SeparatrixOrbit(saddle, target, label, states))
    return SeparatrixReport(tuple(orbits), len(orbits))
