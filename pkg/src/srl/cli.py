"""Command-line driver: named desk-scale experiments, each binding a closed
formula or dynamical claim to a measured residual, plus a verification suite
with a claim-to-residual traceability table.

Reports are JSON with a fixed key order and no timestamps, so identical
configurations (including the seed) produce byte-identical files; wall time
goes to the console only.  Exit codes: 0 all checks pass, 1 check failure,
2 configuration error.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
from dataclasses import asdict, dataclass, field as dc_field, fields

import numpy as np

from . import constructions as cons
from .bforms import (SamplingPlan, exceptional_data, grid_plan, is_b_contact,
                     merge_plans, near_z_plan, contact_volume_coefficient)
from .charts import R3, ScalarField, pushforward
from .errors import ConfigError, SrlError
from .flow import IntegratorOptions, Section, Termination, integrate, section_crossings
from .orbits import (ClassifierOptions, LimitKind, OrbitKind, classify_orbit,
                     detect_periodic, find_critical_points_on_z,
                     trace_separatrices)
from .reeb import hamiltonian_field, induced_reeb_on_level, reeb_at
from .svgplot import emit_plot

EXPERIMENT_NAMES = ("verify-forms", "bubble", "foliation", "glue",
                    "break-scaling", "bhopf", "counterexample",
                    "torus-separatrix", "seifert", "taxonomy")


@dataclass
class ExperimentConfig:
    experiment: str = "verify"
    eps: float = 1e-2
    eps_list: tuple = (1e-3, 2e-3, 4e-3)
    delta: float = 0.2
    horizon: float = 500.0
    seeds: int = 100
    seed: int = 12345
    out: str = "out"
    json_output: bool = False
    inject_fault: str = ""
    contact_threshold: float = 1e-6

    def __post_init__(self):
        for key in ("eps", "delta", "horizon"):
            if getattr(self, key) <= 0:
                raise ConfigError(f"{key} must be positive")
        if self.seeds <= 0:
            raise ConfigError("seeds must be positive")
        if any(e <= 0 for e in self.eps_list):
            raise ConfigError("eps_list entries must be positive")

    @classmethod
    def from_json(cls, path, **overrides):
        with open(path) as fh:
            data = json.load(fh)
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        data.update(overrides)
        if "eps_list" in data:
            data["eps_list"] = tuple(data["eps_list"])
        return cls(**data)


@dataclass
class CheckRecord:
    name: str
    claim: str
    measured: float
    expected: float
    tolerance: float
    passed: bool


def check(name, claim, measured, expected, tolerance, relative=False):
    err = abs(measured - expected)
    bound = tolerance * (abs(expected) if relative else 1.0)
    return CheckRecord(name, claim, float(measured), float(expected),
                       float(tolerance), bool(err <= bound))


def check_leq(name, claim, measured, tolerance):
    return CheckRecord(name, claim, float(measured), 0.0, float(tolerance),
                       bool(measured <= tolerance))


def check_true(name, claim, condition, measured=None):
    m = float(measured if measured is not None else (1.0 if condition else 0.0))
    return CheckRecord(name, claim, m, m if condition else math.nan, 0.0,
                       bool(condition))


@dataclass
class ExperimentReport:
    experiment: str
    seed: int
    checks: list
    artifacts: list = dc_field(default_factory=list)
    wall_time: float = 0.0   # console-only; not serialized (byte-stable reports)

    @property
    def passed(self):
        return all(c.passed for c in self.checks)

    def to_dict(self):
        return {
            "experiment": self.experiment,
            "seed": self.seed,
            "passed": self.passed,
            "checks": [asdict(c) for c in self.checks],
            "artifacts": sorted(self.artifacts),
        }

    def write(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")
        return path


# ---------------------------------------------------------------------------
# samplers
# ---------------------------------------------------------------------------

def sample_box_off_z(rng, n, bchart, lo=-2.0, hi=2.0, t_min=0.05, dim=3):
    pts = []
    while len(pts) < n:
        p = rng.uniform(lo, hi, size=dim)
        if abs(bchart.t(p)) >= t_min:
            pts.append(p)
    return np.array(pts)


def sample_sphere_z_points(rng, n):
    """Points of the critical sphere of the 4d oscillator chart (x1 = 0)."""
    v = rng.normal(size=(n, 3))
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    return np.hstack([np.zeros((n, 1)), v])


def sample_bubble_interior(rng, n, rho_lo=0.1, rho_hi=0.85):
    pts = []
    while len(pts) < n:
        rho = rng.uniform(rho_lo, rho_hi)
        zmax = math.sqrt(max(1.0 - rho * rho, 0.0))
        z = rng.uniform(-0.8, 0.8) * zmax
        phi = rng.uniform(0, 2 * math.pi)
        pts.append([rho * math.cos(phi), rho * math.sin(phi), z])
    return np.array(pts)


def sample_bubble_exterior(rng, n):
    pts = []
    while len(pts) < n:
        rho = rng.uniform(0.1, 0.7)
        z = rng.choice([-1.0, 1.0]) * rng.uniform(1.05, 1.5)
        phi = rng.uniform(0, 2 * math.pi)
        pts.append([rho * math.cos(phi), rho * math.sin(phi), z])
    return np.array(pts)


def sample_chart_sphere_seeds(rng, n, rho1_min=0.3, rho1_max=0.95, t_min=0.05):
    """Projected-chart seeds of unit-sphere states, filtered away from the
    critical set and from the projection point (bounded chart excursions)."""
    seeds = []
    psi = cons.stereographic_map()
    while len(seeds) < n:
        v = rng.normal(size=4)
        v /= np.linalg.norm(v)
        rho1 = math.hypot(v[0], v[1])
        if not rho1_min <= rho1 <= rho1_max:
            continue
        q = np.array(psi(v).coords)
        if abs(q @ q - 1.0) < t_min:
            continue
        seeds.append(q)
    return np.array(seeds)


# ---------------------------------------------------------------------------
# experiments
# ---------------------------------------------------------------------------

def exp_verify_forms(cfg, rng, outdir):
    checks = []
    bubble = cons.bubble_form()
    form = bubble.objects["form"]
    bchart = form.base

    box = sample_box_off_z(rng, 700, bchart, t_min=0.0)
    near = near_z_plan(bchart, rng.normal(size=(300, 3)), 1e-2, rng).points
    pts = np.vstack([box, near])
    worst = max(abs(contact_volume_coefficient(form, p)
                    - cons.bubble_volume_coefficient(*p)) for p in pts)
    checks.append(check_leq(
        "bubble_volume_coefficient",
        "volume coefficient of the bubble form equals 4z^2 + (1+r^2)^2",
        worst, 1e-9))

    # analytic gradients against central finite differences
    fields = [("bubble_f", form.f), ("bubble_t", bchart.t),
              ("oscillator_H", cons.double_oscillator_hamiltonian()),
              ("chart_f", cons.bhopf_chart_form().f)]
    worst_fd = 0.0
    h = 1e-5
    for _, fld in fields:
        dim = fld.chart.dim
        for p in rng.uniform(-1.5, 1.5, size=(100, dim)):
            if abs(fld(p)) > 1e3:
                continue
            g = fld.gradient(p)
            for i in range(dim):
                dp = np.zeros(dim)
                dp[i] = h
                fd = (fld(p + dp) - fld(p - dp)) / (2 * h)
                worst_fd = max(worst_fd, abs(fd - g[i]))
    checks.append(check_leq(
        "gradients_vs_finite_differences",
        "exact gradients match central differences (h = 1e-5)", worst_fd, 1e-6))

    # d(d(alpha)) smooth part vanishes: finite differences of the dbeta matrix
    d2 = 0.0
    dform = form.d()
    for p in rng.uniform(-1.5, 1.5, size=(30, 3)):
        for (i, j, k) in ((0, 1, 2),):
            def dB(idx, q):
                m = dform.B_at(q)
                return m[idx]
            hh = 1e-4
            total = 0.0
            for (a, b, c_) in ((i, j, k), (j, k, i), (k, i, j)):
                dp = np.zeros(3)
                dp[c_] = hh
                total += (dB((a, b), p + dp) - dB((a, b), p - dp)) / (2 * hh)
            d2 = max(d2, abs(total))
    checks.append(check_leq(
        "ddbeta_closed", "smooth part of d(d(alpha)) vanishes numerically",
        d2, 1e-8))

    # induced data on the critical sphere: poles are stationary
    data_n = exceptional_data(form, (0.0, 0.0, 1.0))
    data_e = exceptional_data(form, (1.0, 0.0, 0.0))
    checks.append(check_leq(
        "bubble_pole_critical",
        "restricted coefficient has a critical point at the poles",
        float(np.linalg.norm(data_n.dh)), 1e-10))
    checks.append(check_true(
        "bubble_pole_nondegenerate",
        "induced 2-form nondegenerate at the poles",
        not data_n.degenerate, abs(data_n.pfaffian)))
    checks.append(check_true(
        "bubble_equator_regular",
        "equator points are regular for the restricted coefficient",
        float(np.linalg.norm(data_e.dh)) > 1e-3, float(np.linalg.norm(data_e.dh))))

    # on-Z Hamiltonian identity |iota_R omega_z - d(f|_Z)| for both forms
    bub_reeb = bubble.objects["reeb"]
    worst_b = 0.0
    for v in rng.normal(size=(200, 3)):
        p = v / np.linalg.norm(v)
        data = exceptional_data(form, p)
        r_t = data.frame.T @ bub_reeb(p)
        iota = data.omega_z.T @ r_t   # covector components of omega_z(R, .)
        worst_b = max(worst_b, float(np.abs(iota - data.dh).max()))
    checks.append(check_leq(
        "onz_hamiltonian_identity_bubble",
        "tangential Reeb solves iota_R omega_z = d(f|_Z) on the bubble sphere",
        worst_b, 1e-8))

    cat = cons.bhopf_catalog()
    alpha4 = cat.objects["alpha"]
    sphere_reeb = cat.objects["reeb_on_sphere"]
    H = cat.objects["H"]
    worst_h = 0.0
    for p in sample_sphere_z_points(rng, 200):
        data = exceptional_data(alpha4, p, level=H)
        r_t = data.frame.T @ sphere_reeb(p)
        iota = data.omega_z.T @ r_t
        worst_h = max(worst_h, float(np.abs(iota - data.dh).max()))
    checks.append(check_leq(
        "onz_hamiltonian_identity_oscillator",
        "tangential Reeb solves iota_R omega_z = d(f|_Z) on the oscillator sphere",
        worst_h, 1e-8))

    # catalog oracles
    for entry in (bubble, cons.darboux_form(), cons.twist_form(), cat):
        for name, (res, tol, ok) in entry.verify(rng).items():
            checks.append(check_leq(f"oracle_{entry.name}_{name}",
                                    f"closed-form oracle of {entry.name}", res, tol))

    # contact test passes for the catalog forms on their domains
    plan = merge_plans(grid_plan(((-2, 2), (-2, 2), (-2, 2)), (10, 10, 10)),
                       near_z_plan(bchart, rng.normal(size=(1000, 3)), 1e-2, rng))
    rep = is_b_contact(form, plan, threshold=cfg.contact_threshold)
    checks.append(check_true(
        "bubble_contact_everywhere",
        "bubble form passes the contact test on grid and near-Z samples",
        rep.passed, rep.min_abs_coeff))

    fault = cfg.inject_fault == "reeb-sign"
    XH = cat.objects["XH"]
    omega0 = cat.objects["omega0"]
    worst_xh = 0.0
    for p in rng.uniform(-2, 2, size=(100, 4)):
        if abs(p[0]) < 1e-6:
            continue
        xh = hamiltonian_field(omega0, H, p)
        if fault:
            xh = -xh
        worst_xh = max(worst_xh, float(np.abs(xh - XH(p)).max()))
    checks.append(check_leq(
        "oscillator_field_sign",
        "Hamiltonian solve reproduces the oscillator field componentwise",
        worst_xh, 1e-9))
    return checks, []


def exp_bubble(cfg, rng, outdir):
    checks = []
    bubble = cons.bubble_form()
    form = bubble.objects["form"]
    bchart = form.base
    reeb = bubble.objects["reeb"]

    pts = sample_box_off_z(rng, 500, bchart, t_min=0.05)
    worst_match = 0.0
    worst_alpha = 0.0
    worst_dalpha = 0.0
    for p in pts:
        r, diag = reeb_at(form, p)
        worst_match = max(worst_match, float(np.abs(r - reeb(p)).max()))
        worst_alpha = max(worst_alpha, diag.residual_alpha)
        worst_dalpha = max(worst_dalpha, diag.residual_dalpha)
    checks.append(check_leq("reeb_matches_closed_form",
                            "pointwise Reeb solve matches the closed-form field",
                            worst_match, 1e-9))
    checks.append(check_leq("reeb_residual_alpha", "|alpha(R) - 1| residual",
                            worst_alpha, 1e-9))
    checks.append(check_leq("reeb_residual_dalpha", "|d(alpha)(R, .)| residual",
                            worst_dalpha, 1e-9))

    # conservation of x^2 + y^2 along the flow, horizon 100
    drift = 0.0
    opts = IntegratorOptions(max_time=100.0)
    for p in sample_bubble_interior(rng, 5):
        traj = integrate(reeb, p, opts, bchart=bchart)
        drift = max(drift, traj.invariant_drift["x2+y2"])
    checks.append(check_leq("first_integral_drift",
                            "x^2 + y^2 conserved along the flow (horizon 100)",
                            drift, 1e-8))

    # proximity stop is the generic interior termination
    terms = []
    for p in sample_bubble_interior(rng, 5):
        traj = integrate(reeb, p, IntegratorOptions(max_time=200.0), bchart=bchart)
        terms.append(traj.termination)
    checks.append(check_true(
        "interior_orbits_reach_z",
        "interior orbits stop on Z proximity, not the time limit",
        all(t == Termination.Z_PROXIMITY for t in terms)))

    # orbit taxonomy: axis / interior / exterior seeds
    copts = ClassifierOptions(horizon=cfg.horizon)
    axis = classify_orbit(reeb, bchart, (0.0, 0.0, 0.0), copts)
    checks.append(check_true(
        "axis_seed_singular_periodic",
        "axis orbit connects the two stationary poles",
        axis.kind == OrbitKind.SINGULAR_PERIODIC))
    interior = [classify_orbit(reeb, bchart, p, copts)
                for p in sample_bubble_interior(rng, 20)]
    checks.append(check_true(
        "interior_seeds_generalized",
        "interior seeds limit to parallel circles on both ends",
        all(c.kind == OrbitKind.GENERALIZED_SINGULAR_PERIODIC for c in interior),
        float(sum(c.kind == OrbitKind.GENERALIZED_SINGULAR_PERIODIC
                  for c in interior))))
    ext_seeds = list(sample_bubble_exterior(rng, 8)) + \
        [np.array([0.0, 0.0, 1.3]), np.array([0.0, 0.0, -1.3])]
    exterior = [classify_orbit(reeb, bchart, p, copts) for p in ext_seeds]
    checks.append(check_true(
        "exterior_seeds_escape",
        "exterior seeds classify as escape or generalized escape orbits",
        all(c.kind in (OrbitKind.ESCAPE, OrbitKind.GENERALIZED_ESCAPE)
            for c in exterior),
        float(sum(c.kind in (OrbitKind.ESCAPE, OrbitKind.GENERALIZED_ESCAPE)
                  for c in exterior))))
    all_classified = [axis] + interior + exterior
    checks.append(check_true(
        "no_periodic_orbits", "no closed orbits away from the critical set",
        not any(c.kind == OrbitKind.PERIODIC_OFF_Z for c in all_classified)))

    artifacts = []
    trajs = []
    opts = IntegratorOptions(max_time=80.0, dense_output=False)
    for p, style in [((0.0, 0.0, 0.0), "SingularPeriodic"),
                     ((0.3, 0.0, 0.0), "GeneralizedSingularPeriodic"),
                     ((0.55, 0.0, 0.3), "GeneralizedSingularPeriodic"),
                     ((0.2, 0.0, 1.1), "GeneralizedEscape"),
                     ((0.0, 0.0, 1.3), "EscapeOrbit")]:
        for sign in (1, -1):
            traj = integrate(reeb, p, opts, time_sign=sign, bchart=bchart)
            trajs.append((traj.states, style))
    csv_path = os.path.join(outdir, "bubble_axis_orbit.csv")
    axis_traj = integrate(reeb, (0.0, 0.0, 0.0), opts, bchart=bchart)
    axis_traj.to_csv(csv_path)
    artifacts.append("bubble_axis_orbit.csv")
    axis_traj.to_json(os.path.join(outdir, "bubble_axis_orbit.json"))
    artifacts.append("bubble_axis_orbit.json")
    svg_path = os.path.join(outdir, "bubble_portrait.svg")
    emit_plot(trajs, (0, 2), svg_path, bchart=bchart,
              bounds=((-1.7, 1.7), (-1.7, 1.7)), title="bubble flow, (x,z) plane")
    artifacts.append("bubble_portrait.svg")
    return checks, artifacts


def exp_foliation(cfg, rng, outdir):
    checks = []
    for radius in (1.2, 2.0):
        for kind in ("standard", "b"):
            worst = 0.0
            min_down = math.inf
            for v in rng.normal(size=(200, 3)):
                p = radius * v / np.linalg.norm(v)
                gen = cons.char_foliation_generator(kind, radius, p)
                worst = max(worst, cons.foliation_system_residual(kind, p, gen))
                rho2 = p[0] ** 2 + p[1] ** 2
                if rho2 > 1e-2:
                    min_down = min(min_down, -gen[2])
            checks.append(check_leq(
                f"system_{kind}_R{radius}",
                f"{kind} surface generator solves its defining linear system",
                worst, 1e-10))
            checks.append(check_true(
                f"transverse_{kind}_R{radius}",
                "generator crosses the horizontal levels downward off the poles",
                min_down > 0.0, min_down))
        pole = cons.char_foliation_generator("b", radius, (0.0, 0.0, radius))
        checks.append(check_leq(
            f"pole_zero_R{radius}", "generators vanish at the poles",
            float(np.abs(pole).max()), 1e-14))
    return checks, []


def exp_glue(cfg, rng, outdir):
    checks = []
    bubble = cons.bubble_form().objects["form"]
    lam = ScalarField(R3, lambda x, y, z: 0.5 * (1.0 + x * x + y * y + z * z),
                      name="lambda")
    insert = type(bubble)(bubble.base, lam * bubble.f,
                          tuple(lam * b for b in bubble.beta), name="insert")
    g = cons.radial_step(1.5, 2.0)

    shell_dirs = rng.normal(size=(2500, 3))
    shell_dirs /= np.linalg.norm(shell_dirs, axis=1, keepdims=True)
    radii = rng.uniform(1.45, 2.05, size=(2500, 1))
    plan = SamplingPlan(shell_dirs * radii)

    glued = cons.glue_forms(bubble, [(insert, g)], check_plan=plan,
                            conformal_factors=[lam])
    rep = is_b_contact(glued, plan, threshold=cfg.contact_threshold)
    checks.append(check_true(
        "glued_contact_on_shell",
        "blended form passes the contact test on the transition shell",
        rep.passed, rep.min_abs_coeff))

    worst_wit = math.inf
    for p in plan.points[:2000]:
        worst_wit = min(worst_wit, 1.0 - g(p) + lam(p) * g(p))
    checks.append(check_true(
        "conformal_witness_positive",
        "blend witness 1 - g + f g stays positive on the shell",
        worst_wit > 0.0, worst_wit))

    # locality: bitwise equal to base outside, to insert inside
    outside = rng.normal(size=(50, 3))
    outside = outside / np.linalg.norm(outside, axis=1, keepdims=True) * 2.3
    inside = rng.normal(size=(50, 3))
    inside = inside / np.linalg.norm(inside, axis=1, keepdims=True) * 1.3
    same_out = all(glued.f(p) == bubble.f(p)
                   and all(glued.beta[i](p) == bubble.beta[i](p) for i in range(3))
                   for p in outside)
    same_in = all(glued.f(p) == insert.f(p)
                  and all(glued.beta[i](p) == insert.beta[i](p) for i in range(3))
                  for p in inside)
    checks.append(check_true("locality_outside",
                             "glued form evaluates bit-identically to the base outside",
                             same_out))
    checks.append(check_true("locality_inside",
                             "glued form evaluates bit-identically to the insert inside",
                             same_in))
    return checks, []


def exp_break_scaling(cfg, rng, outdir):
    checks = []
    spec = cons.BumpSpec(cfg.delta)
    darboux = cons.darboux_form().objects["form"]
    frame = cons.identity_frame()
    integral_f = spec.integral()
    r0 = 0.25 * spec.delta

    measured = []
    for eps in cfg.eps_list:
        form = cons.breaking_perturbation(darboux, eps, spec, frame)
        field_fn = _reeb_field_of(form)
        phi = _measure_offaxis_rotation(field_fn, frame, spec, r0)
        predicted = 0.5 * eps * integral_f
        measured.append((eps, phi))
        checks.append(check(
            f"rotation_eps_{eps:g}",
            "rotation per passage matches eps/2 * int f within 10 percent",
            phi, predicted, 0.10, relative=True))

    es = np.array([m[0] for m in measured])
    ps = np.array([m[1] for m in measured])
    slope = float(np.polyfit(es, ps, 1)[0])
    checks.append(check(
        "rotation_slope",
        "least-squares slope of rotation vs eps matches int f / 2 within 5 percent",
        slope, 0.5 * integral_f, 0.05, relative=True))

    # locality and the eps = 0 identity
    form0 = cons.breaking_perturbation(darboux, 0.0, spec, frame, check=False)
    pts = rng.uniform(-1.0, 1.0, size=(50, 3))
    ident = all(form0.beta[i](p) == darboux.beta[i](p)
                for p in pts for i in range(3))
    checks.append(check_true("eps_zero_identity",
                             "zero amplitude returns the base form exactly", ident))
    form1 = cons.breaking_perturbation(darboux, cfg.eps_list[-1], spec, frame)
    far = [p for p in pts if p[0] ** 2 + p[1] ** 2 > spec.delta ** 2
           or abs(p[2]) > spec.delta]
    loc = all(form1.beta[i](p) == darboux.beta[i](p) for p in far for i in range(3))
    checks.append(check_true("support_locality",
                             "perturbed form equals the base outside the support", loc))
    return checks, []


def _reeb_field_of(form):
    from .charts import VectorField

    def fn(x, y, z):
        r, _ = reeb_at(form, (x, y, z))
        return tuple(r)

    return VectorField(form.base.chart, fn=fn, name=f"reeb({form.name})")


def _measure_offaxis_rotation(field, frame, spec, r0):
    """Rotation gathered by the vertical model orbit at radius r0 while it
    traverses the support cylinder."""
    d = spec.delta
    start = frame.from_frame((r0, 0.0, -2.0 * d))
    opts = IntegratorOptions(rel_tol=1e-11, abs_tol=1e-13, max_time=10.0,
                             dense_output=True)
    traj = integrate(field, start, opts)
    o_z, s_z = float(frame.origin[2]), float(frame.scale[2])
    sec = Section(ScalarField(R3, lambda x, y, z: (z - o_z) / s_z - 2.0 * d), "Up")
    crossings = section_crossings(traj, sec)
    if not crossings:
        raise ConfigError("model orbit did not traverse the support")
    qf = frame.to_frame(crossings[0][1])
    return math.atan2(qf[1], qf[0])


def exp_bhopf(cfg, rng, outdir):
    checks = []
    cat = cons.bhopf_catalog()
    alpha4 = cat.objects["alpha"]
    XH = cat.objects["XH"]
    H = cat.objects["H"]
    psi = cat.objects["psi"]
    proj_b = cat.objects["projected_bhopf"]
    proj_s = cat.objects["projected_smooth_hopf"]
    sphere_reeb = cat.objects["reeb_on_sphere"]
    chart_reeb = cat.objects["chart_reeb"]
    bchart3 = cat.objects["bchart3"]

    # induced Reeb field on the unit sphere vs the closed form
    worst = 0.0
    count = 0
    while count < 500:
        v = rng.normal(size=4)
        v /= np.linalg.norm(v)
        if abs(v[0]) < 0.05:
            continue
        r = induced_reeb_on_level(alpha4, XH, v, level=H, level_value=0.5)
        worst = max(worst, float(np.abs(r - sphere_reeb(v)).max()))
        count += 1
    checks.append(check_leq(
        "sphere_reeb_closed_form",
        "induced field on the unit sphere matches 2/(1+y1^2) XH", worst, 1e-9))

    # stereographic pushforward consistency
    worst = 0.0
    count = 0
    while count < 200:
        v = rng.normal(size=4)
        v /= np.linalg.norm(v)
        if abs(1.0 - v[0]) < 0.1 or abs(v[0]) < 1e-3:
            continue
        q = np.array(psi(v).coords)
        worst = max(worst, float(np.abs(pushforward(psi, XH, v) - proj_b(q)).max()))
        count += 1
    checks.append(check_leq(
        "stereographic_consistency",
        "pushforward of the oscillator field matches the projected closed form",
        worst, 1e-8))

    # rotation component equality and pure rotation on the critical sphere
    worst_phi = 0.0
    worst_r1 = 0.0
    for v in rng.normal(size=(200, 3)):
        q = v / np.linalg.norm(v)
        vb, vs = proj_b(q), proj_s(q)
        x, y, _ = q
        rho2 = x * x + y * y
        if rho2 > 1e-4:
            worst_phi = max(worst_phi, abs((x * (vb[1] - vs[1]) - y * (vb[0] - vs[0]))
                                           / rho2))
        radial = (x * vb[0] + y * vb[1])
        worst_r1 = max(worst_r1, abs(radial), abs(vb[2]))
    checks.append(check_leq(
        "rotation_component_shared",
        "projected singular and smooth flows have the same rotation component",
        worst_phi, 1e-10))
    checks.append(check_leq(
        "pure_rotation_on_critical_sphere",
        "radial and vertical components vanish on the critical sphere",
        worst_r1, 1e-12))

    # oscillator energy conservation along the flow
    opts = IntegratorOptions(max_time=100.0)
    traj = integrate(XH, (0.6, 0.0, 0.8, 0.0), opts)
    drift = max(abs(H(s) - H(traj.states[0])) for s in traj.states)
    checks.append(check_leq("energy_drift",
                            "oscillator energy conserved over horizon 100",
                            drift, 1e-8))

    # no recurrence for the projected singular flow; recurrence for the smooth one
    smooth4 = cons.smooth_hopf_field_4d()
    traj_s = integrate(smooth4, (0.5, 0.5, 0.5, 0.5),
                       IntegratorOptions(max_time=20.0, dense_output=True))
    period = detect_periodic(smooth4, traj_s)
    checks.append(check(
        "round_flow_period", "round flow closes up with period 2 pi",
        period if period is not None else math.nan, 2 * math.pi, 1e-8))

    copts = ClassifierOptions(horizon=cfg.horizon)
    kinds = {}
    seeds = sample_chart_sphere_seeds(rng, min(cfg.seeds, 100))
    for s in seeds:
        c = classify_orbit(chart_reeb, bchart3, s, copts)
        kinds[c.kind] = kinds.get(c.kind, 0) + 1
    axis = classify_orbit(chart_reeb, bchart3, (0.0, 0.0, 0.0), copts)
    checks.append(check_true(
        "axis_singular_periodic",
        "projected axis orbit connects the two poles",
        axis.kind == OrbitKind.SINGULAR_PERIODIC))
    checks.append(check_true(
        "batch_generalized_singular",
        "generic sphere seeds are generalized singular periodic orbits",
        kinds.get(OrbitKind.GENERALIZED_SINGULAR_PERIODIC, 0) == len(seeds),
        float(kinds.get(OrbitKind.GENERALIZED_SINGULAR_PERIODIC, 0))))
    checks.append(check_true(
        "batch_no_periodic", "no closed orbits away from the critical set",
        kinds.get(OrbitKind.PERIODIC_OFF_Z, 0) == 0))

    artifacts = []
    trajs = []
    opts = IntegratorOptions(max_time=60.0)
    for p, style in [((0.0, 0.0, 0.0), "SingularPeriodic"),
                     ((0.45, 0.0, 0.2), "GeneralizedSingularPeriodic"),
                     ((0.0, 0.0, 1.4), "EscapeOrbit")]:
        for sign in (1, -1):
            traj = integrate(chart_reeb, p, opts, time_sign=sign, bchart=bchart3)
            trajs.append((traj.states, style))
    svg = os.path.join(outdir, "bhopf_portrait.svg")
    emit_plot(trajs, (0, 2), svg, bchart=bchart3,
              bounds=((-2.0, 2.0), (-2.0, 2.0)),
              title="projected oscillator flow, (x,z) plane")
    artifacts.append("bhopf_portrait.svg")
    return checks, artifacts


def exp_counterexample(cfg, rng, outdir):
    checks = []
    spec = cons.BumpSpec(cfg.delta)
    perturbed = cons.perturbed_bhopf(cfg.eps, spec)
    field = perturbed.field
    bchart3 = perturbed.form.base
    base_field = perturbed.base_field

    # locality of the perturbation
    worst_far = 0.0
    for q in rng.uniform(-2.0, 2.0, size=(200, 3)):
        inside = False
        for fr in perturbed.frames:
            qf = fr.to_frame(q)
            if qf[0] ** 2 + qf[1] ** 2 < spec.delta ** 2 and abs(qf[2]) < spec.delta:
                inside = True
        if inside:
            continue
        worst_far = max(worst_far, float(np.abs(field(q) - base_field(q)).max()))
    checks.append(check_leq(
        "perturbation_local",
        "perturbed field equals the unperturbed one outside the two supports",
        worst_far, 0.0))

    # rotation acquired per passage vs the model prediction
    predicted = 0.5 * cfg.eps * spec.integral()
    for label, fr in zip(("interior", "exterior"), perturbed.frames):
        phi = cons.measure_twist_rotation(field, fr, spec)
        checks.append(check_true(
            f"twist_rotation_{label}",
            "axis continuation rotates by roughly eps/2 * int f per passage",
            0.5 * abs(predicted) <= abs(phi) <= 2.0 * abs(predicted), phi))

    copts = ClassifierOptions(horizon=cfg.horizon)
    results = []
    seeds = sample_chart_sphere_seeds(rng, cfg.seeds)
    for s in seeds:
        results.append(classify_orbit(field, bchart3, s, copts))
    former_axis = [classify_orbit(field, bchart3, (0.0, 0.0, -0.5), copts),
                   classify_orbit(field, bchart3, (0.0, 0.0, 2.2), copts)]
    results += former_axis

    n_spo = sum(c.kind == OrbitKind.SINGULAR_PERIODIC for c in results)
    n_per = sum(c.kind == OrbitKind.PERIODIC_OFF_Z for c in results)
    checks.append(check_true("no_singular_periodic",
                             "no singular periodic orbits after the perturbation",
                             n_spo == 0, float(n_spo)))
    checks.append(check_true("no_periodic_off_z",
                             "no closed orbits away from the critical set",
                             n_per == 0, float(n_per)))
    reclassified = all(
        c.kind != OrbitKind.SINGULAR_PERIODIC and
        (c.forward.kind == LimitKind.CIRCLE_ON_Z
         or c.backward.kind == LimitKind.CIRCLE_ON_Z)
        for c in former_axis)
    checks.append(check_true(
        "former_axis_reclassified",
        "former axis orbits acquire a circle limit end",
        reclassified))
    qc = sum(1 for c in results
             if c.quasi_closed or c.kind == OrbitKind.UNRESOLVED)
    checks.append(check_true(
        "quasi_closed_tally",
        "every classified orbit is quasi-closed or reported unresolved",
        qc == len(results), float(qc)))

    artifacts = []
    path = os.path.join(outdir, "counterexample_classes.json")
    with open(path, "w") as fh:
        json.dump([c.to_dict() for c in results], fh, indent=2, sort_keys=True)
        fh.write("\n")
    artifacts.append("counterexample_classes.json")

    trajs = []
    opts = IntegratorOptions(max_time=60.0)
    for p, style in [((0.0, 0.0, -0.5), "GeneralizedEscape"),
                     ((0.45, 0.0, 0.2), "GeneralizedSingularPeriodic")]:
        for sign in (1, -1):
            traj = integrate(field, p, opts, time_sign=sign, bchart=bchart3)
            trajs.append((traj.states, style))
    svg = os.path.join(outdir, "counterexample_portrait.svg")
    emit_plot(trajs, (0, 2), svg, bchart=bchart3,
              bounds=((-2.0, 2.0), (-2.0, 2.0)),
              title="perturbed projected flow, (x,z) plane")
    artifacts.append("counterexample_portrait.svg")
    return checks, artifacts


def exp_torus(cfg, rng, outdir):
    checks = []
    demo = cons.torus_demo()
    crit = find_critical_points_on_z(demo)
    checks.append(check_true("four_critical_points",
                             "the demo coefficient function has four critical points",
                             len(crit) == 4, float(len(crit))))
    indices = sorted(c.morse_index for c in crit)
    checks.append(check_true("morse_indices",
                             "indices are 0, 1, 1, 2", indices == [0, 1, 1, 2]))
    checks.append(check_true("all_morse",
                             "all critical points are nondegenerate",
                             all(c.morse_ok for c in crit)))
    saddles = [c for c in crit if c.morse_index == 1]
    vals = sorted(c.value for c in saddles)
    checks.append(check_leq("saddle_values",
                            "saddle values are -1/2 and 1/2",
                            abs(vals[0] + 0.5) + abs(vals[1] - 0.5), 1e-9))

    orbits = []
    for s in saddles:
        rep = trace_separatrices(demo, s, criticals=crit)
        orbits.extend(rep.orbits)
    checks.append(check_true(
        "separatrix_count",
        "two homoclinic loops per saddle: four in total (2 b_1 of the torus)",
        len(orbits) == 4, float(len(orbits))))
    checks.append(check_true(
        "all_homoclinic",
        "distinct saddle values force homoclinic connections only",
        all(o.label == "homoclinic" for o in orbits)))

    artifacts = []
    trajs = [(np.mod(o.states, 2 * math.pi), "separatrix") for o in orbits]
    svg = os.path.join(outdir, "torus_separatrices.svg")
    emit_plot(trajs, (0, 1), svg, bounds=((0.0, 2 * math.pi), (0.0, 2 * math.pi)),
              title="torus demo separatrices")
    artifacts.append("torus_separatrices.svg")
    return checks, artifacts


def exp_seifert(cfg, rng, outdir):
    checks = []
    eps = min(cfg.eps, 1e-3)
    spec = cons.BumpSpec(cfg.delta)
    family = cons.seifert_catalog(eps, spec)
    field = family.field
    d = spec.delta
    y1_star = 1.5 * d
    r_star = 0.25 * d
    phi_star = 0.3
    T = 2.0 * y1_star
    int_f = spec.integral()

    energies = np.linspace(-0.25 * d, 0.25 * d, 5)
    worst_comp = 0.0
    worst_final = 0.0
    worst_c = 0.0
    for c_star in energies:
        x0 = np.array([c_star, -y1_star, r_star * math.cos(phi_star),
                       r_star * math.sin(phi_star)])
        opts = IntegratorOptions(rel_tol=1e-11, abs_tol=1e-13, max_time=T,
                                 dense_output=True)
        traj = integrate(field, x0, opts)
        for t in np.linspace(0.05 * T, T, 20):
            s = traj.dense(min(t, traj.final_time))
            x1e, y1e, re, phie = family.closed_form_orbit(t, c_star, y1_star,
                                                          r_star, phi_star)
            r_num = math.hypot(s[2], s[3])
            phi_num = math.atan2(s[3], s[2])
            dphi = (phi_num - phie + math.pi) % (2 * math.pi) - math.pi
            worst_comp = max(worst_comp, abs(s[0] - x1e), abs(s[1] - y1e),
                             abs(r_num - re), abs(dphi))
        final = traj.final_state
        worst_final = max(worst_final, abs(final[0] - c_star))
        phi_T = math.atan2(final[3], final[2])
        C = ((phi_T - phi_star + math.pi) % (2 * math.pi) - math.pi) / eps
        worst_c = max(worst_c, abs(C - int_f))
        if C <= 0:
            worst_c = math.inf
    checks.append(check_leq(
        "orbit_components",
        "numeric orbits match the four closed-form components", worst_comp, 1e-6))
    checks.append(check_leq(
        "energy_coordinate_returns",
        "x1 returns to its starting energy after the passage", worst_final, 1e-8))
    checks.append(check_leq(
        "rotation_constant",
        "rotation offset equals eps * int f with the fixed bump, within 1 percent",
        worst_c, 0.01 * int_f))

    # eps = 0: straight translation in y1
    family0 = cons.seifert_catalog(0.0, spec)
    traj0 = integrate(family0.field, (0.01, -y1_star, r_star, 0.0),
                      IntegratorOptions(max_time=T))
    drift0 = max(abs(traj0.final_state[0] - 0.01),
                 abs(traj0.final_state[2] - r_star), abs(traj0.final_state[3]))
    checks.append(check_leq("unperturbed_translation",
                            "zero amplitude gives a straight line in y1",
                            drift0, 1e-10))
    return checks, []


def exp_taxonomy(cfg, rng, outdir):
    checks = []
    bubble = cons.bubble_form()
    reeb = bubble.objects["reeb"]
    bchart = bubble.objects["form"].base
    cat = cons.bhopf_catalog()
    chart_reeb = cat.objects["chart_reeb"]
    bchart3 = cat.objects["bchart3"]
    perturbed = cons.perturbed_bhopf(cfg.eps, cons.BumpSpec(cfg.delta), catalog=cat)

    copts = ClassifierOptions(horizon=cfg.horizon)
    tally = {}
    consistent = True
    quasi_all = True

    def record(c, quasi_required):
        nonlocal consistent, quasi_all
        tally[c.kind.value] = tally.get(c.kind.value, 0) + 1
        consistent = consistent and _taxonomy_consistent(c)
        if quasi_required:
            quasi_all = quasi_all and (c.quasi_closed
                                       or c.kind == OrbitKind.UNRESOLVED)

    for p in [(0.0, 0.0, 0.0)] + list(sample_bubble_interior(rng, 8)) \
            + list(sample_bubble_exterior(rng, 4)):
        record(classify_orbit(reeb, bchart, p, copts), quasi_required=False)
    for p in sample_chart_sphere_seeds(rng, 8):
        record(classify_orbit(chart_reeb, bchart3, p, copts), quasi_required=True)
    for p in list(sample_chart_sphere_seeds(rng, 8)) + [np.array([0.0, 0.0, -0.5])]:
        record(classify_orbit(perturbed.field, bchart3, p, copts),
               quasi_required=True)

    checks.append(check_true(
        "taxonomy_consistent",
        "per-end limit sets match the reported orbit class for every orbit",
        consistent))
    checks.append(check_true(
        "sphere_flows_quasi_closed",
        "orbits of the level-sphere flows are quasi-closed or unresolved",
        quasi_all))

    path = os.path.join(outdir, "taxonomy_tally.json")
    with open(path, "w") as fh:
        json.dump(dict(sorted(tally.items())), fh, indent=2, sort_keys=True)
        fh.write("\n")
    return checks, ["taxonomy_tally.json"]


def _taxonomy_consistent(c):
    f, b = c.forward, c.backward
    points = (f.kind == LimitKind.POINT_ON_Z) + (b.kind == LimitKind.POINT_ON_Z)
    on_z = f.on_z + b.on_z
    if c.kind == OrbitKind.SINGULAR_PERIODIC:
        return points == 2
    if c.kind == OrbitKind.GENERALIZED_SINGULAR_PERIODIC:
        return on_z == 2
    if c.kind == OrbitKind.ESCAPE:
        return points >= 1
    if c.kind == OrbitKind.GENERALIZED_ESCAPE:
        return on_z >= 1
    return True


EXPERIMENTS = {
    "verify-forms": exp_verify_forms,
    "bubble": exp_bubble,
    "foliation": exp_foliation,
    "glue": exp_glue,
    "break-scaling": exp_break_scaling,
    "bhopf": exp_bhopf,
    "counterexample": exp_counterexample,
    "torus-separatrix": exp_torus,
    "seifert": exp_seifert,
    "taxonomy": exp_taxonomy,
}


def run(experiment, cfg):
    """Run one named experiment; returns the report and writes artifacts."""
    if experiment not in EXPERIMENTS:
        raise ConfigError(f"unknown experiment {experiment!r}; "
                          f"choose from {', '.join(EXPERIMENT_NAMES)}")
    rng = np.random.default_rng(cfg.seed)
    outdir = cfg.out
    os.makedirs(outdir, exist_ok=True)
    t0 = time.perf_counter()
    checks, artifacts = EXPERIMENTS[experiment](cfg, rng, outdir)
    report = ExperimentReport(experiment, cfg.seed, checks, artifacts,
                              wall_time=time.perf_counter() - t0)
    report.write(os.path.join(outdir, f"report-{experiment}.json"))
    return report


def verify_suite(cfg):
    """Quick verification pass: every closed-form oracle and algebraic module
    invariant, aggregated into one traceability report."""
    rng = np.random.default_rng(cfg.seed)
    outdir = cfg.out
    os.makedirs(outdir, exist_ok=True)
    t0 = time.perf_counter()
    checks = []
    artifacts = []
    for name in ("verify-forms", "foliation", "glue", "break-scaling", "seifert"):
        sub_checks, sub_art = EXPERIMENTS[name](cfg, rng, outdir)
        for c in sub_checks:
            checks.append(CheckRecord(f"{name}:{c.name}", c.claim, c.measured,
                                      c.expected, c.tolerance, c.passed))
        artifacts.extend(sub_art)
    listing = cons.catalog_listing()
    with open(os.path.join(outdir, "catalog.json"), "w") as fh:
        json.dump(listing, fh, indent=2, sort_keys=True)
        fh.write("\n")
    artifacts.append("catalog.json")
    checks.append(check_true(
        "catalog_oracles",
        "every catalog entry passes its closed-form oracles",
        all(rec["passed"] for entry in listing.values() for rec in entry.values()),
        float(sum(len(v) for v in listing.values()))))
    report = ExperimentReport("verify", cfg.seed, checks, artifacts,
                              wall_time=time.perf_counter() - t0)
    report.write(os.path.join(outdir, "report-verify.json"))
    return report


def _print_report(report, as_json=False):
    if as_json:
        print(json.dumps(report.to_dict(), indent=2, sort_keys=True))
        return
    print(f"experiment: {report.experiment}  seed: {report.seed}")
    width = max(len(c.name) for c in report.checks)
    for c in report.checks:
        status = "PASS" if c.passed else "FAIL"
        print(f"  [{status}] {c.name:<{width}}  measured={c.measured:.6g} "
              f"expected={c.expected:.6g} tol={c.tolerance:.2g}  :: {c.claim}")
    print(f"overall: {'PASS' if report.passed else 'FAIL'} "
          f"({sum(c.passed for c in report.checks)}/{len(report.checks)} checks, "
          f"{report.wall_time:.1f}s)", file=sys.stderr)


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="srl",
        description="Desk-scale numerical experiments for singular contact flows")
    parser.add_argument("experiment",
                        help=f"one of: verify, {', '.join(EXPERIMENT_NAMES)}")
    parser.add_argument("--config", help="JSON config file")
    parser.add_argument("--eps", type=float)
    parser.add_argument("--eps-list", type=str,
                        help="comma-separated amplitudes for break-scaling")
    parser.add_argument("--delta", type=float)
    parser.add_argument("--horizon", type=float)
    parser.add_argument("--seeds", type=int)
    parser.add_argument("--seed", type=int)
    parser.add_argument("--out", type=str)
    parser.add_argument("--json", action="store_true", dest="json_output")
    parser.add_argument("--inject-fault", type=str, default=None,
                        help="intentional fault for anti-tests (reeb-sign)")
    args = parser.parse_args(argv)

    overrides = {}
    for key in ("eps", "delta", "horizon", "seeds", "seed", "out"):
        v = getattr(args, key)
        if v is not None:
            overrides[key] = v
    if args.eps_list:
        overrides["eps_list"] = tuple(float(x) for x in args.eps_list.split(","))
    if args.json_output:
        overrides["json_output"] = True
    if args.inject_fault:
        overrides["inject_fault"] = args.inject_fault

    try:
        if args.config:
            cfg = ExperimentConfig.from_json(args.config,
                                             experiment=args.experiment, **overrides)
        else:
            cfg = ExperimentConfig(experiment=args.experiment, **overrides)
        if args.experiment == "verify":
            report = verify_suite(cfg)
        else:
            report = run(args.experiment, cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except SrlError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    _print_report(report, as_json=cfg.json_output)
    return 0 if report.passed else 1


if __name__ == "__main__":
    sys.exit(main())
