"""Degree-1/2 forms with a first-order pole along a critical hypersurface.

Forms are stored decomposed relative to a defining function t of the critical
set Z = {t = 0}:

    alpha = f * dt/t + sum_i beta_i dx_i          (degree 1)
    omega = sum_i eta_i dx_i ^ dt/t + B           (degree 2, B antisymmetric)

which keeps every coefficient finite across Z and makes the exterior
derivative structural: d(f dt/t + beta) = df ^ dt/t + d(beta).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .charts import ScalarField, const_field, coords_of
from .errors import (ConfigError, DimensionError, DomainError,
                     NotOnCriticalSetError, SingularPairingError)

TOL_Z = 1e-10           # |t| below this counts as "on Z"
CONTACT_THRESHOLD = 1e-6


@dataclass(frozen=True)
class BManifoldChart:
    """Chart together with a defining function of the critical hypersurface.

    ``smooth=True`` marks the trivial case t == 1 (no critical set), used to
    run ordinary contact forms through the same machinery.
    """

    chart: object
    t: ScalarField
    smooth: bool = False

    def t_value(self, p):
        return self.t(p)

    def project_to_z(self, p, tol=1e-12, max_steps=60):
        """Newton retraction onto {t = 0} along grad t."""
        if self.smooth:
            raise DomainError("smooth chart has no critical set")
        x = np.array(coords_of(p), dtype=float)
        for _ in range(max_steps):
            tv, g = self.t.value_and_gradient(x)
            if abs(tv) <= tol:
                return x
            n2 = float(g @ g)
            if n2 < 1e-30:
                raise DomainError("grad t vanished during projection")
            x = x - (tv / n2) * g
        return x


def smooth_chart(chart):
    """BManifoldChart sentinel for ordinary (non-singular) contact charts."""
    return BManifoldChart(chart, const_field(chart, 1.0, "1"), smooth=True)


def check_regular_value(bchart, points, band=1e-3, grad_floor=1e-3):
    """0 is a regular value: |grad t| stays away from 0 where |t| is small."""
    for p in points:
        tv, g = bchart.t.value_and_gradient(p)
        if abs(tv) <= band and np.linalg.norm(g) < grad_floor:
            return False
    return True


@dataclass(frozen=True)
class BForm1:
    """Degree-1 form f * dt/t + beta in decomposed storage."""

    base: BManifoldChart
    f: ScalarField
    beta: tuple
    name: str = ""

    @property
    def dim(self):
        return self.base.chart.dim

    def beta_at(self, p):
        c = coords_of(p)
        return np.array([b(c) for b in self.beta])

    def d(self):
        return exterior_derivative(self)


@dataclass(frozen=True)
class BForm2:
    """Degree-2 form eta ^ dt/t + B; eta and B evaluated by callables."""

    base: BManifoldChart
    eta_at: object            # coords -> (dim,) array
    B_at: object              # coords -> (dim, dim) antisymmetric array
    name: str = ""

    def matrix_at(self, p):
        """Full coefficient matrix of the form at a point off Z."""
        c = coords_of(p)
        tv, tg = self.base.t.value_and_gradient(c)
        if not self.base.smooth and abs(tv) <= TOL_Z:
            raise DomainError("matrix_at is defined off Z; use the on-Z solves")
        eta = np.asarray(self.eta_at(c))
        m = np.asarray(self.B_at(c), dtype=float).copy()
        if not self.base.smooth:
            m += (np.outer(eta, tg) - np.outer(tg, eta)) / tv
        return m

    def pair(self, p, u, v):
        u = np.asarray(u, dtype=float)
        v = np.asarray(v, dtype=float)
        return float(u @ self.matrix_at(p) @ v)


def exterior_derivative(a):
    """d(f dt/t + beta) = df ^ dt/t + d(beta), computed from exact gradients."""
    beta = a.beta
    f = a.f

    def eta_at(c):
        return f.value_and_gradient(c)[1]

    def B_at(c):
        grads = np.array([b.value_and_gradient(c)[1] for b in beta])
        return grads.T - grads  # B[i, j] = d_i beta_j - d_j beta_i

    return BForm2(a.base, eta_at, B_at, name=f"d({a.name})")


def pair_1form(a, p, v, tol_z=TOL_Z):
    """Evaluate alpha(v) at p.

    Off Z this is f * (grad t . v)/t + beta . v.  On Z the pairing is defined
    only for vectors tangent to Z, where the canonical lift has no singular
    component and the value reduces to beta(v); transverse vectors raise.
    """
    c = coords_of(p)
    v = np.asarray(v, dtype=float)
    bval = float(a.beta_at(c) @ v)
    if a.base.smooth:
        return bval
    tv, tg = a.base.t.value_and_gradient(c)
    radial = float(tg @ v)
    if abs(tv) <= tol_z:
        scale = np.linalg.norm(tg) * np.linalg.norm(v)
        if abs(radial) > 1e-9 * (1.0 + scale):
            raise SingularPairingError(
                f"vector transverse to Z at {c}: dt(v) = {radial:.3e}")
        return bval
    return a.f(c) * radial / tv + bval


def _wedge3_coeff(m, u):
    """Coefficient of dx^dy^dz in (2-form with matrix m) ^ (1-form u)."""
    return m[0, 1] * u[2] - m[0, 2] * u[1] + m[1, 2] * u[0]


def contact_volume_coefficient(a, p):
    """C(p) with alpha ^ d(alpha) = C(p) dx^dy^dz / t(p); smooth across Z.

    C = coeff[(f dB + beta ^ df) ^ dt] + t * coeff[beta ^ dB], with B = d(beta).
    For smooth charts (t == 1) this reduces to coeff[beta ^ d(beta)].
    """
    if a.dim != 3:
        raise DimensionError("contact volume coefficient requires a 3d chart")
    c = coords_of(p)
    fval, fgrad = a.f.value_and_gradient(c)
    bvals = a.beta_at(c)
    grads = np.array([b.value_and_gradient(c)[1] for b in a.beta])
    B = grads.T - grads
    if a.base.smooth:
        return _wedge3_coeff(B, bvals)
    tval, tgrad = a.base.t.value_and_gradient(c)
    m_sing = fval * B + (np.outer(bvals, fgrad) - np.outer(fgrad, bvals))
    return _wedge3_coeff(m_sing, tgrad) + tval * _wedge3_coeff(B, bvals)


@dataclass(frozen=True)
class SamplingPlan:
    """Concrete evaluation points for the contact test."""

    points: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "points", np.atleast_2d(np.asarray(self.points, float)))


def grid_plan(bounds, counts):
    axes = [np.linspace(lo, hi, n) for (lo, hi), n in zip(bounds, counts)]
    mesh = np.meshgrid(*axes, indexing="ij")
    return SamplingPlan(np.stack([m.ravel() for m in mesh], axis=1))


def near_z_plan(bchart, base_points, band, rng):
    """Points with |t| < band: project to Z, then offset along the normal."""
    pts = []
    for p in np.atleast_2d(base_points):
        q = bchart.project_to_z(p)
        tv, g = bchart.t.value_and_gradient(q)
        n = g / float(g @ g)
        s = rng.uniform(-band, band)
        pts.append(q + s * n)  # first-order offset: t approx s
    return SamplingPlan(np.array(pts))


def merge_plans(*plans):
    return SamplingPlan(np.vstack([p.points for p in plans]))


@dataclass(frozen=True)
class ContactReport:
    n_samples: int
    min_abs_coeff: float
    worst_point: tuple
    threshold: float
    passed: bool
    sign_consistent: bool = True


def is_b_contact(a, plan, threshold=CONTACT_THRESHOLD):
    """Sampled nonvanishing of the contact volume coefficient.

    Fails when |coefficient| dips below the threshold at a sample, or when the
    coefficient changes sign across the plan (on the connected domains sampled
    here a sign flip means the section vanishes between samples)."""
    pts = plan.points
    if pts.size == 0:
        raise ConfigError("empty sampling plan")
    worst = None
    min_abs = math.inf
    pos = neg = 0
    for p in pts:
        c = contact_volume_coefficient(a, p)
        if c > 0.0:
            pos += 1
        elif c < 0.0:
            neg += 1
        if abs(c) < min_abs:
            min_abs = abs(c)
            worst = tuple(float(x) for x in p)
    consistent = pos == 0 or neg == 0
    return ContactReport(len(pts), min_abs, worst, threshold,
                         min_abs > threshold and consistent, consistent)


def _orthonormal_complement(normals, dim):
    n = np.atleast_2d(np.asarray(normals, dtype=float))
    _, _, vt = np.linalg.svd(n, full_matrices=True)
    return vt[n.shape[0]:].T  # columns span the orthogonal complement


@dataclass(frozen=True)
class ExceptionalData:
    """Induced symplectic data of the flow on the critical set at a point.

    omega_z is the restriction of f d(beta) + beta ^ df to the tangent frame,
    dh the restriction of df; the sign convention solved downstream is
    iota_R omega_z = d(f|_Z).
    """

    point: tuple
    frame: np.ndarray        # (dim, 2), orthonormal tangent basis of Z
    omega_z: np.ndarray      # (2, 2) antisymmetric
    dh: np.ndarray           # (2,)
    degenerate: bool

    @property
    def pfaffian(self):
        return float(self.omega_z[0, 1])


def exceptional_data(a, p, level=None, tol_z=TOL_Z, degeneracy_floor=1e-8):
    """Restrict f d(beta) + beta ^ df and df to the tangent space of Z at p.

    ``level``: additional constraint function for 4d charts where the contact
    manifold is a hypersurface (for example a sphere); the effective critical
    set is then Z intersected with the level set, which is again 2-dimensional.
    """
    c = np.array(coords_of(p), dtype=float)
    tval, tgrad = a.base.t.value_and_gradient(c)
    if abs(tval) > tol_z:
        raise NotOnCriticalSetError(f"|t(p)| = {abs(tval):.3e} exceeds {tol_z}")
    normals = [tgrad / np.linalg.norm(tgrad)]
    if level is not None:
        g = level.value_and_gradient(c)[1]
        g = g - (g @ normals[0]) * normals[0]
        normals.append(g / np.linalg.norm(g))
    dim = a.dim
    if dim - len(normals) != 2:
        raise DimensionError(
            "tangent space of the effective critical set must be 2d; "
            "pass a level constraint for 4d charts")
    frame = _orthonormal_complement(normals, dim)

    fval, fgrad = a.f.value_and_gradient(c)
    bvals = a.beta_at(c)
    grads = np.array([b.value_and_gradient(c)[1] for b in a.beta])
    B = grads.T - grads
    m = fval * B + (np.outer(bvals, fgrad) - np.outer(fgrad, bvals))
    omega_z = frame.T @ m @ frame
    dh = frame.T @ fgrad
    degenerate = abs(omega_z[0, 1]) <= degeneracy_floor
    return ExceptionalData(tuple(c), frame, omega_z, dh, degenerate)
