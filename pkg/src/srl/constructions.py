"""Catalog of the explicit singular contact constructions and their closed
forms, each packaged with oracle checks that run at construction time.

Everything here is expression-built (exact derivatives), and every closed
form carried as an oracle has been verified against the defining equations:
alpha(R) = 1, d(alpha)(R, .) = 0, energy conservation, and the structural
identities of the decomposed representation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field

import numpy as np

from . import ad
from .bforms import (BForm1, BManifoldChart, SamplingPlan,
                     contact_volume_coefficient, is_b_contact, pair_1form,
                     smooth_chart)
from .charts import (LINE, R3, R4, TORUS2, ScalarField, SmoothMap,
                     VectorField, const_field, coords_of)
from .errors import (ConfigError, DomainError, EpsilonTooLargeError,
                     GluingError)
from .reeb import (BSymplectic4, hamiltonian_field, hamiltonian_vector_field,
                   liouville_contract, reeb_at)


# ---------------------------------------------------------------------------
# bump functions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BumpSpec:
    """Flat bump: 1 on [-pf*delta, pf*delta], supported in (-delta, delta)."""

    delta: float
    plateau_fraction: float = 0.5

    def __post_init__(self):
        if self.delta <= 0:
            raise ConfigError("delta must be positive")
        if not 0.0 < self.plateau_fraction < 1.0:
            raise ConfigError("plateau_fraction must lie in (0, 1)")

    def value(self, u):
        return ad.bump_value(u, self.delta, self.plateau_fraction)

    def deriv(self, u):
        return ad.bump_deriv(u, self.delta, self.plateau_fraction)

    def expr(self, u):
        """Bump applied to an expression value (float or Dual)."""
        return ad.bump(u, self.delta, self.plateau_fraction)

    def expr_of_square(self, q):
        """Radial bump as a function of the squared radius (smooth at 0)."""
        return ad.bump_of_square(q, self.delta, self.plateau_fraction)

    def integral(self, a=None, b=None, tol=1e-12):
        a = -self.delta if a is None else a
        b = self.delta if b is None else b
        return ad.integrate_1d(self.value, a, b, tol=tol)


def bump(spec):
    """The bump as a 1d scalar field with exact derivative."""
    return ScalarField(LINE, lambda s: spec.expr(s), name=f"bump(delta={spec.delta})")


# ---------------------------------------------------------------------------
# catalog plumbing
# ---------------------------------------------------------------------------

@dataclass
class CatalogEntry:
    """Named construction plus closed-form oracle checks.

    Each oracle is (name, fn(rng) -> worst residual, tolerance); all oracles
    are evaluated once at construction with a fixed seed and must pass.
    """

    name: str
    objects: dict
    oracles: tuple = ()
    checked: dict = dc_field(default_factory=dict)

    def verify(self, rng=None):
        rng = rng or np.random.default_rng(20240 + len(self.name))
        out = {}
        for oracle_name, fn, tol in self.oracles:
            res = float(fn(rng))
            out[oracle_name] = (res, tol, res <= tol)
        return out

    def check(self):
        self.checked = self.verify()
        bad = [k for k, (_, _, ok) in self.checked.items() if not ok]
        if bad:
            raise ConfigError(f"catalog entry {self.name} failed oracles: {bad}")
        return self


def _rand_box(rng, n, lo, hi, dim=3):
    return rng.uniform(lo, hi, size=(n, dim))


def catalog_listing():
    """Names and oracle residuals of every catalog entry (JSON-exportable)."""
    out = {}
    for entry in (bubble_form(), darboux_form(), twist_form(), bhopf_catalog()):
        out[entry.name] = {
            name: {"residual": res, "tolerance": tol, "passed": ok}
            for name, (res, tol, ok) in entry.verify().items()}
    return out


# ---------------------------------------------------------------------------
# the singular bubble on (R^3, unit sphere)
# ---------------------------------------------------------------------------

def unit_sphere_bchart():
    t = ScalarField(R3, lambda x, y, z: x * x + y * y + z * z - 1.0, name="r2-1")
    return BManifoldChart(R3, t)


def bubble_volume_coefficient(x, y, z):
    """Verified closed form of the bubble's contact volume coefficient."""
    r2 = x * x + y * y + z * z
    return 4.0 * z * z + (1.0 + r2) ** 2


def bubble_reeb_field():
    def fn(x, y, z):
        r2 = x * x + y * y + z * z
        mu = 2.0 * (r2 + 1.0) / (4.0 * z * z + (r2 + 1.0) ** 2)
        return (-mu * y, mu * x, mu * (r2 - 1.0) / (r2 + 1.0))

    rho2 = ScalarField(R3, lambda x, y, z: x * x + y * y, name="x2+y2")
    return VectorField(R3, fn=fn, invariants=(rho2,), name="bubble_reeb")


def bubble_form():
    base = unit_sphere_bchart()
    f = ScalarField(R3, lambda x, y, z: 0.5 * z * (3.0 + x * x + y * y + z * z),
                    name="f_bubble")
    beta = (
        ScalarField(R3, lambda x, y, z: -y, name="-y"),
        ScalarField(R3, lambda x, y, z: x, name="x"),
        ScalarField(R3, lambda x, y, z: -0.5 * (x * x + y * y + z * z + 1.0),
                    name="-(r2+1)/2"),
    )
    form = BForm1(base, f, beta, name="bubble")
    reeb = bubble_reeb_field()

    def oracle_volume(rng):
        pts = _rand_box(rng, 100, -2.0, 2.0)
        return max(abs(contact_volume_coefficient(form, p)
                       - bubble_volume_coefficient(*p)) for p in pts)

    def oracle_reeb(rng):
        worst = 0.0
        for p in _rand_box(rng, 100, -2.0, 2.0):
            if abs(base.t(p)) < 0.05:
                continue
            r, _ = reeb_at(form, p)
            worst = max(worst, float(np.abs(r - reeb(p)).max()))
        return worst

    def oracle_dalpha(rng):
        # pairing of d(alpha) against (d/dz, radial) matches
        # 2(r2+1) (dz ^ r dr)/(r2-1) + 2 dx^dy
        d = form.d()
        worst = 0.0
        for p in _rand_box(rng, 100, -2.0, 2.0):
            x, y, z = p
            r2 = x * x + y * y + z * z
            t = r2 - 1.0
            if abs(t) < 0.05:
                continue
            u = np.array([0.0, 0.0, 1.0])
            v = np.array([x, y, z])
            expected = 2.0 * (r2 + 1.0) * (1.0 * r2 - z * z) / t \
                + 2.0 * (u[0] * v[1] - u[1] * v[0])
            worst = max(worst, abs(d.pair(p, u, v) - expected))
        return worst

    entry = CatalogEntry("bubble", {"form": form, "reeb": reeb,
                                    "volume_coefficient": bubble_volume_coefficient},
                         oracles=(("volume_coefficient", oracle_volume, 1e-9),
                                  ("reeb_closed_form", oracle_reeb, 1e-9),
                                  ("dalpha_pairing", oracle_dalpha, 1e-8)))
    return entry.check()


# ---------------------------------------------------------------------------
# local model forms (cylindrical Darboux chart, written in cartesian)
# ---------------------------------------------------------------------------

def darboux_form():
    base = smooth_chart(R3)
    beta = (
        ScalarField(R3, lambda x, y, z: -y, name="-y"),
        ScalarField(R3, lambda x, y, z: x, name="x"),
        const_field(R3, 0.5, "1/2"),
    )
    form = BForm1(base, const_field(R3, 0.0, "0"), beta, name="darboux")

    def oracle_reeb(rng):
        worst = 0.0
        for p in _rand_box(rng, 100, -1.0, 1.0):
            r, _ = reeb_at(form, p)
            worst = max(worst, float(np.abs(r - np.array([0.0, 0.0, 2.0])).max()))
        return worst

    return CatalogEntry("darboux", {"form": form},
                        oracles=(("reeb_vertical", oracle_reeb, 1e-12),)).check()


def twist_form():
    base = smooth_chart(R3)
    beta = (
        ScalarField(R3, lambda x, y, z: z * x - y, name="zx-y"),
        ScalarField(R3, lambda x, y, z: z * y + x, name="zy+x"),
        ScalarField(R3, lambda x, y, z: 0.5 * (1.0 + z * z - x * x - y * y),
                    name="(1+z2-rho2)/2"),
    )
    form = BForm1(base, const_field(R3, 0.0, "0"), beta, name="twist")

    def oracle_reeb_direction(rng):
        # Reeb parallel to d/dz + d/dphi = (-y, x, 1), positive factor
        worst = 0.0
        for p in _rand_box(rng, 100, -1.0, 1.0):
            r, _ = reeb_at(form, p)
            x, y, z = p
            direction = np.array([-y, x, 1.0])
            factor = r[2]  # third component of direction is 1
            if factor <= 0:
                return math.inf
            worst = max(worst, float(np.abs(r - factor * direction).max()))
        return worst

    return CatalogEntry("twist", {"form": form},
                        oracles=(("reeb_direction", oracle_reeb_direction, 1e-10),)).check()


# ---------------------------------------------------------------------------
# affine frames and the orbit-breaking perturbation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AffineFrame:
    """Translated and axis-scaled cylindrical frame: p = origin + scale * q."""

    origin: np.ndarray
    scale: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "origin", np.asarray(self.origin, dtype=float))
        object.__setattr__(self, "scale", np.asarray(self.scale, dtype=float))

    def to_frame(self, p):
        return (np.asarray(coords_of(p)) - self.origin) / self.scale

    def from_frame(self, q):
        return self.origin + self.scale * np.asarray(q, dtype=float)

    def map(self, chart):
        o, s = self.origin, self.scale

        def fn(*c):
            return tuple((c[i] - o[i]) / s[i] for i in range(len(o)))

        return SmoothMap(chart, chart, fn, name="frame")


def identity_frame(dim=3):
    return AffineFrame(np.zeros(dim), np.ones(dim))


def _frame_exprs(frame):
    o, s = frame.origin, frame.scale

    def xf(x, y, z):
        return (x - o[0]) / s[0]

    def yf(x, y, z):
        return (y - o[1]) / s[1]

    def zf(x, y, z):
        return (z - o[2]) / s[2]

    return xf, yf, zf


def _weight_expr(frame, spec):
    xf, yf, zf = _frame_exprs(frame)

    def w(x, y, z):
        a, b = xf(x, y, z), yf(x, y, z)
        return spec.expr_of_square(a * a + b * b) * spec.expr(zf(x, y, z))

    return w


def _twist_beta_in_frame(frame):
    """Pullback of the twist-form coefficients through the affine frame."""
    xf, yf, zf = _frame_exprs(frame)
    s = frame.scale

    def b0(x, y, z):
        return (zf(x, y, z) * xf(x, y, z) - yf(x, y, z)) / s[0]

    def b1(x, y, z):
        return (zf(x, y, z) * yf(x, y, z) + xf(x, y, z)) / s[1]

    def b2(x, y, z):
        a, b, c = xf(x, y, z), yf(x, y, z), zf(x, y, z)
        return 0.5 * (1.0 + c * c - a * a - b * b) / s[2]

    return (ScalarField(R3, b0), ScalarField(R3, b1), ScalarField(R3, b2))


def _twist_difference_beta_in_frame(frame):
    """Pullback of (twist - vertical model): z r dr + (z^2 - r^2)/2 dz.

    This is the 1-form the breaking perturbation *adds* in the model chart
    (the rotational parts of the two forms cancel exactly), so it is the
    transportable expression of the perturbation on a base that is only
    approximately in model form.
    """
    xf, yf, zf = _frame_exprs(frame)
    s = frame.scale

    def b0(x, y, z):
        return zf(x, y, z) * xf(x, y, z) / s[0]

    def b1(x, y, z):
        return zf(x, y, z) * yf(x, y, z) / s[1]

    def b2(x, y, z):
        a, b, c = xf(x, y, z), yf(x, y, z), zf(x, y, z)
        return 0.5 * (c * c - a * a - b * b) / s[2]

    return (ScalarField(R3, b0), ScalarField(R3, b1), ScalarField(R3, b2))


def compact_plan(frame, spec, n=7):
    """Grid over the frame cylinder D_delta x [-delta, delta], in chart coords."""
    d = spec.delta
    vals = np.linspace(-d, d, n)
    pts = []
    for a in vals:
        for b in vals:
            if a * a + b * b > d * d:
                continue
            for c in vals:
                pts.append(frame.from_frame((a, b, c)))
    return SamplingPlan(np.array(pts))


def breaking_perturbation(base, eps, spec, frame=None, check=True,
                          contact_threshold=1e-6):
    """Convex-type blend (1 - eps*w) * base + eps*w * twist, w = bump(rho_F)bump(z_F).

    The blend equals ``base`` exactly outside the frame cylinder (the bump
    weight vanishes there, and multiplying coefficients by 1.0 is exact in
    floating point).  The contact condition is re-checked on the cylinder and
    failure raises EpsilonTooLargeError.
    """
    if not 0.0 <= eps <= 0.1:
        raise ConfigError("eps must lie in [0, 0.1]")
    frame = frame or identity_frame()
    w = _weight_expr(frame, spec)
    tw_beta = _twist_beta_in_frame(frame)

    def blend(a_field, b_field):
        af, bf = a_field.fn, b_field.fn

        def fn(x, y, z):
            ww = w(x, y, z)
            return (1.0 - eps * ww) * af(x, y, z) + (eps * ww) * bf(x, y, z)

        return ScalarField(R3, fn)

    zero = const_field(R3, 0.0, "0")
    f_new = blend(base.f, zero)
    beta_new = tuple(blend(base.beta[i], tw_beta[i]) for i in range(3))
    out = BForm1(base.base, f_new, beta_new, name=f"{base.name}+twist(eps={eps})")
    if check and eps > 0.0:
        report = is_b_contact(out, compact_plan(frame, spec), threshold=contact_threshold)
        if not report.passed:
            raise EpsilonTooLargeError(
                f"contact test fails on the perturbation support: "
                f"min |coeff| = {report.min_abs_coeff:.3e} at {report.worst_point}")
    return out


def weight_field(frame, spec):
    """The bump weight of a breaking perturbation, for support checks."""
    return ScalarField(R3, _weight_expr(frame, spec), name="w")


# ---------------------------------------------------------------------------
# gluing along shells
# ---------------------------------------------------------------------------

def as_smooth_bform_on(bchart, beta_fields, name=""):
    """Reinterpret an ordinary 1-form as a b-form (zero singular part)."""
    zero = const_field(bchart.chart, 0.0, "0")
    return BForm1(bchart, zero, tuple(beta_fields), name=name)


def glue_forms(base, inserts, check_plan=None, conformal_factors=None,
               contact_threshold=1e-6):
    """Blend base and inserts: (1 - sum g_i) * base + sum g_i * insert_i.

    All forms must share the base chart's decomposition.  When the inserts
    define the same contact structure on the transition shells (insert_i =
    factor_i * base there), the blend is conformal with positive witness
    1 - g + f g; ``conformal_factors`` enables sampling that witness.  The
    glued form is contact-tested on ``check_plan``; failure raises GluingError
    with the worst point.
    """
    chart = base.base.chart
    pairs = list(inserts)
    for form, _ in pairs:
        if form.base is not base.base:
            raise ConfigError("glued forms must share one decomposition chart")

    def blend(extract):
        base_fn = extract(base).fn
        insert_fns = [(extract(f).fn, g.fn) for f, g in pairs]

        def fn(*c):
            gsum = 0.0
            acc = 0.0
            for ffn, gfn in insert_fns:
                gv = gfn(*c)
                gsum = gsum + gv
                acc = acc + gv * ffn(*c)
            return (1.0 - gsum) * base_fn(*c) + acc

        return ScalarField(chart, fn)

    f_new = blend(lambda a: a.f)
    beta_new = tuple(blend(lambda a, i=i: a.beta[i]) for i in range(chart.dim))
    out = BForm1(base.base, f_new, beta_new, name="glued")

    if conformal_factors is not None and check_plan is not None:
        for (form, g), fac in zip(pairs, conformal_factors):
            for p in check_plan.points:
                witness = 1.0 - g(p) + fac(p) * g(p)
                if witness <= 0.0:
                    raise GluingError(
                        f"conformal witness nonpositive: {witness:.3e}",
                        worst_point=tuple(p), min_coeff=witness)
    if check_plan is not None:
        report = is_b_contact(out, check_plan, threshold=contact_threshold)
        if not report.passed:
            raise GluingError(
                f"glued form fails the contact test: min |coeff| = "
                f"{report.min_abs_coeff:.3e}", worst_point=report.worst_point,
                min_coeff=report.min_abs_coeff)
    return out


def radial_step(r_inner, r_outer):
    """g(r): 1 inside r_inner, 0 outside r_outer, smooth monotone between."""

    def fn(x, y, z):
        r = ad.sqrt(x * x + y * y + z * z + 1e-300)
        return 1.0 - ad.step((r - r_inner) / (r_outer - r_inner))

    return ScalarField(R3, fn, name=f"step[{r_inner},{r_outer}]")


# ---------------------------------------------------------------------------
# the 4d double-oscillator catalog (standard singular symplectic chart)
# ---------------------------------------------------------------------------

def standard_b_symplectic():
    """omega = dx1/x1 ^ dy1 + dx2 ^ dy2 on (R^4, {x1 = 0})."""
    t = ScalarField(R4, lambda x1, y1, x2, y2: x1, name="x1")
    base = BManifoldChart(R4, t)
    eta = np.array([0.0, -1.0, 0.0, 0.0])  # dx1/x1 ^ dy1 = (-dy1) ^ dx1/x1
    B = np.zeros((4, 4))
    B[2, 3], B[3, 2] = 1.0, -1.0
    return BSymplectic4(base, eta, B, t_index=0)


def standard_symplectic():
    """Smooth omega = dx1 ^ dy1 + dx2 ^ dy2 on R^4."""
    base = smooth_chart(R4)
    B = np.zeros((4, 4))
    B[0, 1], B[1, 0] = 1.0, -1.0
    B[2, 3], B[3, 2] = 1.0, -1.0
    return BSymplectic4(base, np.zeros(4), B, t_index=None)


def double_oscillator_hamiltonian():
    return ScalarField(
        R4, lambda x1, y1, x2, y2: 0.5 * (x1 * x1 + y1 * y1 + x2 * x2 + y2 * y2),
        name="H_osc")


def oscillator_field_4d():
    """Closed form of the double-oscillator Hamiltonian field on the singular chart."""
    def fn(x1, y1, x2, y2):
        return (-x1 * y1, x1 * x1, -y2, x2)

    rho1 = ScalarField(R4, lambda x1, y1, x2, y2: x1 * x1 + y1 * y1, name="rho1^2")
    rho2 = ScalarField(R4, lambda x1, y1, x2, y2: x2 * x2 + y2 * y2, name="rho2^2")
    return VectorField(R4, fn=fn, invariants=(rho1, rho2), name="XH_osc")


def sphere_reeb_field_4d():
    """Induced Reeb field on the unit 3-sphere: 2/(1+y1^2) * XH."""
    def fn(x1, y1, x2, y2):
        c = 2.0 / (1.0 + y1 * y1)
        return (-c * x1 * y1, c * x1 * x1, -c * y2, c * x2)

    return VectorField(R4, fn=fn, name="sphere_reeb")


def smooth_hopf_field_4d():
    def fn(x1, y1, x2, y2):
        return (-y1, x1, -y2, x2)

    return VectorField(R4, fn=fn, name="hopf_4d")


def stereographic_map():
    """Projection from (1,0,0,0): (x1,y1,x2,y2) -> (x2, y2, y1)/(1 - x1)."""

    def fn(x1, y1, x2, y2):
        d = 1.0 - x1
        if abs(ad.value_of(d)) < 1e-12:
            raise DomainError("projection undefined at x1 = 1")
        return (x2 / d, y2 / d, y1 / d)

    return SmoothMap(R4, R3, fn, name="stereographic")


def stereographic_inverse():
    def fn(x, y, z):
        r2 = x * x + y * y + z * z
        s = 1.0 + r2
        return ((r2 - 1.0) / s, 2.0 * z / s, 2.0 * x / s, 2.0 * y / s)

    return SmoothMap(R3, R4, fn, name="stereographic_inverse")


def projected_smooth_hopf():
    """Projected round flow: -z rho d/drho - (1 - rho^2 + z^2)/2 d/dz + d/dphi."""

    def fn(x, y, z):
        rho2 = x * x + y * y
        return (-z * x - y, -z * y + x, -0.5 * (1.0 - rho2 + z * z))

    return VectorField(R3, fn=fn, name="projected_hopf")


def projected_bhopf_field():
    """Projected singular flow: the radial part is rescaled by (r^2-1)/(r^2+1),
    the rotation d/dphi is not."""

    def fn(x, y, z):
        rho2 = x * x + y * y
        r2 = rho2 + z * z
        k = (r2 - 1.0) / (r2 + 1.0)
        return (-k * z * x - y, -k * z * y + x, -k * 0.5 * (1.0 - rho2 + z * z))

    return VectorField(R3, fn=fn, name="projected_bhopf")


def bhopf_chart_form():
    """The induced contact form written in the projected chart.

    Derived by pulling the 4d form back through the inverse projection; with
    s = 1 + r^2 and t = r^2 - 1:

        f = -z (r^2 + 3) / s^2,   beta = (-2y/s^2, 2x/s^2, 1/s).
    """
    base = unit_sphere_bchart()
    f = ScalarField(
        R3, lambda x, y, z: -z * (x * x + y * y + z * z + 3.0)
        / (1.0 + x * x + y * y + z * z) ** 2, name="f_chart")
    beta = (
        ScalarField(R3, lambda x, y, z: -2.0 * y / (1.0 + x * x + y * y + z * z) ** 2),
        ScalarField(R3, lambda x, y, z: 2.0 * x / (1.0 + x * x + y * y + z * z) ** 2),
        ScalarField(R3, lambda x, y, z: 1.0 / (1.0 + x * x + y * y + z * z)),
    )
    return BForm1(base, f, beta, name="bhopf_chart")


def bhopf_chart_reeb():
    """Reeb field of the projected contact form: a positive multiple of the
    projected flow, c = 2 s^2 / (s^2 + 4 z^2)."""
    proj = projected_bhopf_field().fn

    def fn(x, y, z):
        s = 1.0 + x * x + y * y + z * z
        c = 2.0 * s * s / (s * s + 4.0 * z * z)
        vx, vy, vz = proj(x, y, z)
        return (c * vx, c * vy, c * vz)

    # pullback of the planar oscillator amplitude: invariant of the flow
    rho2 = ScalarField(R3, lambda x, y, z: 4.0 * (x * x + y * y)
                       / (1.0 + x * x + y * y + z * z) ** 2, name="rho2_sq")
    return VectorField(R3, fn=fn, invariants=(rho2,), name="bhopf_chart_reeb")


def liouville_field_4d():
    comps = (
        ScalarField(R4, lambda x1, y1, x2, y2: 0.5 * x1),
        ScalarField(R4, lambda x1, y1, x2, y2: y1),
        ScalarField(R4, lambda x1, y1, x2, y2: 0.5 * x2),
        ScalarField(R4, lambda x1, y1, x2, y2: 0.5 * y2),
    )
    return VectorField(R4, components=comps, name="liouville")


def bhopf_catalog():
    """All pieces of the double-oscillator construction, cross-validated."""
    omega0 = standard_b_symplectic()
    H = double_oscillator_hamiltonian()
    X = liouville_field_4d()
    alpha = liouville_contract(omega0, X, dtX_over_t=const_field(R4, 0.5, "1/2"),
                               name="bhopf_alpha")
    XH = oscillator_field_4d()
    reeb_sphere = sphere_reeb_field_4d()
    psi = stereographic_map()
    psi_inv = stereographic_inverse()
    chart_form = bhopf_chart_form()
    chart_reeb = bhopf_chart_reeb()
    proj_b = projected_bhopf_field()
    proj_smooth = projected_smooth_hopf()

    def rand_sphere(rng, n):
        v = rng.normal(size=(n, 4))
        return v / np.linalg.norm(v, axis=1, keepdims=True)

    def oracle_alpha(rng):
        # contraction reproduces f = -y1, beta = (0, 1/2, -y2/2, x2/2)
        worst = 0.0
        for p in rng.uniform(-2, 2, size=(100, 4)):
            x1, y1, x2, y2 = p
            worst = max(worst, abs(alpha.f(p) - (-y1)))
            expected = np.array([0.0, 0.5, -0.5 * y2, 0.5 * x2])
            worst = max(worst, float(np.abs(alpha.beta_at(p) - expected).max()))
        return worst

    def oracle_xh(rng):
        worst = 0.0
        for p in rng.uniform(-2, 2, size=(100, 4)):
            if abs(p[0]) < 1e-6:
                continue
            xh = hamiltonian_field(omega0, H, p)
            worst = max(worst, float(np.abs(xh - XH(p)).max()))
        return worst

    def oracle_pushforward(rng):
        from .charts import pushforward
        worst = 0.0
        for p in rand_sphere(rng, 100):
            if abs(1.0 - p[0]) < 0.1 or abs(p[0]) < 1e-3:
                continue
            q = psi(p)
            worst = max(worst, float(np.abs(pushforward(psi, XH, p) - proj_b(q)).max()))
        return worst

    def oracle_chart_form(rng):
        # pullback through the inverse projection matches the chart form
        worst = 0.0
        for q in rng.uniform(-1.8, 1.8, size=(200, 3)):
            r2 = float(q @ q)
            if abs(r2 - 1.0) < 0.05:
                continue
            v = rng.normal(size=3)
            p4 = np.array(coords_of(psi_inv(q)))
            jv = psi_inv.jacobian(q) @ v
            worst = max(worst, abs(pair_1form(alpha, p4, jv)
                                   - pair_1form(chart_form, q, v)))
        return worst

    def oracle_chart_reeb(rng):
        worst = 0.0
        for q in rng.uniform(-1.8, 1.8, size=(100, 3)):
            r2 = float(q @ q)
            if abs(r2 - 1.0) < 0.05:
                continue
            r, _ = reeb_at(chart_form, q)
            worst = max(worst, float(np.abs(r - chart_reeb(q)).max()))
        return worst

    def oracle_phi_component(rng):
        # the projected singular and smooth flows differ only radially/vertically
        worst = 0.0
        for q in rng.uniform(-1.8, 1.8, size=(100, 3)):
            x, y, z = q
            vb, vs = proj_b(q), proj_smooth(q)
            # d/dphi component: (x * v_y - y * v_x) / rho^2
            rho2 = x * x + y * y
            if rho2 < 1e-4:
                continue
            worst = max(worst, abs(((x * (vb[1] - vs[1]) - y * (vb[0] - vs[0])) / rho2)))
        return worst

    entry = CatalogEntry(
        "bhopf",
        {"omega0": omega0, "H": H, "liouville": X, "alpha": alpha, "XH": XH,
         "reeb_on_sphere": reeb_sphere, "psi": psi, "psi_inv": psi_inv,
         "chart_form": chart_form, "chart_reeb": chart_reeb,
         "projected_bhopf": proj_b, "projected_smooth_hopf": proj_smooth,
         "bchart3": chart_form.base},
        oracles=(("liouville_contraction", oracle_alpha, 1e-12),
                 ("hamiltonian_field", oracle_xh, 1e-9),
                 ("stereographic_pushforward", oracle_pushforward, 1e-9),
                 ("chart_form_pullback", oracle_chart_form, 1e-9),
                 ("chart_reeb_solve", oracle_chart_reeb, 1e-9),
                 ("rotation_component_equal", oracle_phi_component, 1e-10)))
    return entry.check()


# ---------------------------------------------------------------------------
# breaking the two axis orbits of the projected flow
# ---------------------------------------------------------------------------

def _chart_axis_dz_coefficient(z):
    """alpha_chart(d/dz) on the symmetry axis (closed form)."""
    r2 = z * z
    s = 1.0 + r2
    t = r2 - 1.0
    return -2.0 * z * z * (r2 + 3.0) / (s * s * t) + 1.0 / s


def darboux_scaled_frame(center_z, axis_offset_frame, delta):
    """Frame around an axis point in which the chart form is the local model
    to leading order: z scaled by the dz-coefficient, xy by the rotation
    coefficient, origin displaced so the axis sits at the given frame radius.
    """
    a_c = _chart_axis_dz_coefficient(center_z)
    s = 1.0 + center_z * center_z
    g_c = 2.0 / (s * s)
    z_scale = 1.0 / (2.0 * a_c)
    xy_scale = 1.0 / math.sqrt(g_c)
    x_off = axis_offset_frame * xy_scale
    origin = np.array([x_off, 0.0, center_z])
    return AffineFrame(origin, np.array([xy_scale, xy_scale, z_scale]))


@dataclass
class PerturbedBHopf:
    """Perturbed projected flow: the modified form, its Reeb field, and the
    frames of the two supports."""

    form: BForm1
    field: VectorField
    frames: tuple
    spec: BumpSpec
    eps: float
    base_field: VectorField


def perturbed_bhopf(eps, spec=None, centers=(0.0, 1.5), axis_offset_frame=None,
                    catalog=None):
    """Reeb field of the locally twisted projected form.

    One support sits on each of the two axis orbits (one inside the critical
    sphere, one outside); the perturbation adds eps * w * (twist - vertical
    model) in scaled local frames whose z-axes are parallel to, but offset
    from, the symmetry axis.  On a base that is exactly the local model this
    is the same form as the convex blend; transported here it keeps the
    rotation mechanism free of spurious terms from the base's own coefficient
    gradients.  Outside the two supports the field equals the unperturbed one
    exactly.

    Resolvability: the broken continuation limits to a circle of radius about
    eps * int(bump) * offset / 3, so with the default geometry the classifier
    (point threshold 1e-4) resolves the break for eps >= ~7e-3; below that the
    affected ends degrade to Unresolved, never to a false stationary match.
    """
    spec = spec or BumpSpec(0.2)
    if axis_offset_frame is None:
        axis_offset_frame = 0.4 * spec.delta
    cat = catalog or bhopf_catalog()
    base_form = cat.objects["chart_form"]
    base_field = cat.objects["chart_reeb"]
    frames = tuple(darboux_scaled_frame(zc, axis_offset_frame, spec.delta)
                   for zc in centers)

    weights = [_weight_expr(fr, spec) for fr in frames]
    diffs = [_twist_difference_beta_in_frame(fr) for fr in frames]

    def make_beta(i):
        base_fn = base_form.beta[i].fn
        diff_fns = [dfm[i].fn for dfm in diffs]

        def fn(x, y, z):
            acc = base_fn(x, y, z)
            for w, dfn in zip(weights, diff_fns):
                ww = w(x, y, z)
                if isinstance(ww, ad.Dual) or ww != 0.0:
                    acc = acc + eps * ww * dfn(x, y, z)
            return acc

        return ScalarField(R3, fn)

    form = BForm1(base_form.base, base_form.f,
                  tuple(make_beta(i) for i in range(3)),
                  name=f"bhopf_chart+twists(eps={eps})")

    if eps > 0.0:
        for fr in frames:
            report = is_b_contact(form, compact_plan(fr, spec))
            if not report.passed:
                raise EpsilonTooLargeError(
                    f"perturbed form fails the contact test on a support: "
                    f"min |coeff| = {report.min_abs_coeff:.3e}")

    base_fn = base_field.fn
    boxes = []
    for fr in frames:
        ext = spec.delta * np.abs(fr.scale) * 1.0001
        boxes.append((fr.origin - ext, fr.origin + ext, fr))

    def fn(x, y, z):
        if eps != 0.0:
            for lo, hi, fr in boxes:
                if lo[0] <= x <= hi[0] and lo[1] <= y <= hi[1] and lo[2] <= z <= hi[2]:
                    q = (x - fr.origin[0], y - fr.origin[1], z - fr.origin[2])
                    qf = (q[0] / fr.scale[0], q[1] / fr.scale[1], q[2] / fr.scale[2])
                    if qf[0] ** 2 + qf[1] ** 2 < spec.delta ** 2 and abs(qf[2]) < spec.delta:
                        r, _ = reeb_at(form, (x, y, z))
                        return tuple(r)
        return base_fn(x, y, z)

    field = VectorField(R3, fn=fn, invariants=(), name=f"perturbed_bhopf(eps={eps})")
    return PerturbedBHopf(form, field, frames, spec, eps, base_field)


def measure_twist_rotation(field, frame, spec, opts=None, entry_margin=2.0):
    """Integrate the continuation of the axis orbit through one support and
    return the frame-angle increment picked up between the lids.

    The unperturbed continuation enters the frame cylinder at frame angle pi
    (the symmetry axis is offset along -x_F); the rotation acquired inside is
    measured at the exit lid against the model prediction eps/2 * int f.
    """
    from .flow import IntegratorOptions, Section, integrate, section_crossings

    opts = opts or IntegratorOptions(rel_tol=1e-11, abs_tol=1e-13, max_time=50.0,
                                     dense_output=True)
    d = spec.delta
    z_lid = entry_margin * d
    # start on the chart symmetry axis at the lower lid (frame z = -z_lid)
    start = np.array([0.0, 0.0, frame.origin[2] - frame.scale[2] * z_lid])

    o_z, s_z = float(frame.origin[2]), float(frame.scale[2])
    traj = integrate(field, start, opts, time_sign=1)
    if traj.dense is None:
        raise ConfigError("dense output required")
    crossings = section_crossings(traj, Section(ScalarField(
        R3, lambda x, y, z: (z - o_z) / s_z - z_lid), "Up"))
    if not crossings:
        raise DomainError("orbit did not traverse the support cylinder")
    exit_state = crossings[0][1]
    qf = frame.to_frame(exit_state)
    angle = math.atan2(qf[1], qf[0])
    return _wrap_angle(angle - math.pi)


def _wrap_angle(a):
    while a > math.pi:
        a -= 2.0 * math.pi
    while a < -math.pi:
        a += 2.0 * math.pi
    return a


# ---------------------------------------------------------------------------
# the perturbed-level-set family on smooth symplectic R^4
# ---------------------------------------------------------------------------

@dataclass
class LevelFamily:
    """Perturbed linear Hamiltonian G = x1 + eps f(x1) f(y1) f(r) r^2/2 and the
    closed-form orbit of its flow through the twist region."""

    omega: BSymplectic4
    G: ScalarField
    G_perturbed: ScalarField
    field: VectorField
    spec: BumpSpec
    eps: float

    def closed_form_orbit(self, t, c_star, y1_star, r_star, phi_star):
        """Orbit components from (c*, -y1*, r*, phi*): exact inside the
        plateau region |x1| <= pf*delta, r* <= pf*delta."""
        f = self.spec.value
        eta = 0.5 * r_star * r_star
        y1 = -y1_star + t
        x1 = c_star - self.eps * eta * (f(y1) - f(-y1_star))
        phi = phi_star + self.eps * ad.integrate_1d(f, -y1_star, y1)
        return x1, y1, r_star, phi

    def effective_field(self, p):
        """Closed form of the flow inside the plateau region."""
        x1, y1, x2, y2 = coords_of(p)
        f = self.spec.value
        fd = self.spec.deriv
        eta = 0.5 * (x2 * x2 + y2 * y2)
        return np.array([-self.eps * fd(y1) * eta, 1.0,
                         -self.eps * f(y1) * y2, self.eps * f(y1) * x2])


def seifert_catalog(eps, spec=None):
    spec = spec or BumpSpec(0.2)
    omega = standard_symplectic()
    G = ScalarField(R4, lambda x1, y1, x2, y2: x1, name="G")

    def gt_fn(x1, y1, x2, y2):
        eta = 0.5 * (x2 * x2 + y2 * y2)
        return x1 + eps * spec.expr(x1) * spec.expr(y1) \
            * spec.expr_of_square(x2 * x2 + y2 * y2) * eta

    Gt = ScalarField(R4, gt_fn, name="G_perturbed")
    rho2 = ScalarField(R4, lambda x1, y1, x2, y2: x2 * x2 + y2 * y2, name="rho2^2")
    field = hamiltonian_vector_field(omega, Gt, invariants=(Gt, rho2), name="X_Gt")
    family = LevelFamily(omega, G, Gt, field, spec, eps)

    def oracle_field(rng):
        # pointwise solve matches the closed-form flow in the plateau region
        d = spec.delta * spec.plateau_fraction
        worst = 0.0
        for _ in range(100):
            p = np.array([rng.uniform(-d, d), rng.uniform(-2 * spec.delta, 2 * spec.delta),
                          0.0, 0.0])
            r = rng.uniform(0.1 * d, 0.9 * d)
            phi = rng.uniform(0, 2 * math.pi)
            p[2], p[3] = r * math.cos(phi), r * math.sin(phi)
            worst = max(worst, float(np.abs(field(p) - family.effective_field(p)).max()))
        return worst

    def oracle_linear(rng):
        # eps = 0 flow of G is translation in y1
        worst = 0.0
        for p in rng.uniform(-1, 1, size=(50, 4)):
            x = hamiltonian_field(omega, G, p)
            worst = max(worst, float(np.abs(x - np.array([0.0, 1.0, 0.0, 0.0])).max()))
        return worst

    entry = CatalogEntry("level_family", {"family": family},
                         oracles=(("effective_field", oracle_field, 1e-12),
                                  ("linear_base_flow", oracle_linear, 1e-12)))
    entry.check()
    return family


# ---------------------------------------------------------------------------
# characteristic foliation generators on spheres of radius R
# ---------------------------------------------------------------------------

def char_foliation_generator(kind, R, p):
    """Generator of the surface line field on the sphere of radius R > 1.

    ``kind='standard'`` is for the flat contact form dz + x dy - y dx;
    ``kind='b'`` for the singular bubble structure.  Both satisfy tangency
    x Xx + y Xy + z Xz = 0 and their kernel equation; both vanish exactly at
    the poles.
    """
    x, y, z = coords_of(p)
    r2 = x * x + y * y + z * z
    if abs(math.sqrt(r2) - R) > 1e-10:
        raise DomainError(f"point is not on the sphere of radius {R}")
    if kind == "standard":
        return np.array([x * z - y, y * z + x, -(x * x + y * y)])
    if kind == "b":
        h = 0.5 * (r2 + 1.0)
        return np.array([x * z + h * y, y * z - h * x, -(x * x + y * y)])
    raise ConfigError(f"unknown foliation kind {kind!r}")


def foliation_system_residual(kind, p, v):
    """Residual of the defining linear system (tangency, kernel equation)."""
    x, y, z = coords_of(p)
    r2 = x * x + y * y + z * z
    tangency = x * v[0] + y * v[1] + z * v[2]
    if kind == "standard":
        kernel = v[2] + x * v[1] - y * v[0]
    else:
        kernel = -0.5 * (r2 + 1.0) * v[2] + x * v[1] - y * v[0]
    return max(abs(tangency), abs(kernel))


# ---------------------------------------------------------------------------
# torus demo: Morse coefficient function on a flat 2-torus
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TorusDemo:
    """Flat 2-torus with area form dth1 ^ dth2 and a Morse coefficient
    function whose two saddles take distinct values."""

    chart: object
    H: ScalarField
    field: VectorField

    @property
    def periods(self):
        return (2.0 * math.pi, 2.0 * math.pi)


def torus_demo():
    H = ScalarField(TORUS2, lambda t1, t2: ad.cos(t1) + 0.5 * ad.cos(t2),
                    name="torus_H")

    def fn(t1, t2):
        return (0.5 * ad.sin(t2), -ad.sin(t1))

    field = VectorField(TORUS2, fn=fn, invariants=(H,), name="torus_XH")
    demo = TorusDemo(TORUS2, H, field)

    # flow solves M X = grad H for M = [[0, 1], [-1, 0]]: X = (-g2, g1)
    rng = np.random.default_rng(7)
    for _ in range(50):
        p = rng.uniform(-math.pi, math.pi, size=2)
        g = H.value_and_gradient(p)[1]
        expected = np.array([-g[1], g[0]])
        if np.abs(field(p) - expected).max() > 1e-12:
            raise ConfigError("torus demo field does not match its coefficient function")
    return demo
