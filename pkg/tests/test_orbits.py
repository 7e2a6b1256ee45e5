"""Orbit classifier, limit sets, critical points, separatrices."""

import math

import numpy as np
import pytest

from srl import constructions as cons
from srl.bforms import BManifoldChart
from srl.charts import PLANE, R3, ScalarField, VectorField
from srl.errors import ConfigError
from srl.flow import IntegratorOptions, Termination, integrate
from srl.orbits import (ClassifierOptions, LimitKind, OrbitKind,
                        classify_orbit, detect_periodic,
                        find_critical_points_on_z, limit_set_estimate,
                        trace_separatrices)

RNG = np.random.default_rng(23)
COPTS = ClassifierOptions()


def test_detect_periodic_circle():
    circ = VectorField(PLANE, fn=lambda x, y: (-y, x))
    traj = integrate(circ, (1.0, 0.0),
                     IntegratorOptions(max_time=20.0, dense_output=True))
    period = detect_periodic(circ, traj)
    assert period == pytest.approx(2 * math.pi, abs=1e-8)


def test_detect_periodic_round_flow_4d():
    hopf = cons.smooth_hopf_field_4d()
    traj = integrate(hopf, (0.5, 0.5, 0.5, 0.5),
                     IntegratorOptions(max_time=20.0, dense_output=True))
    assert detect_periodic(hopf, traj) == pytest.approx(2 * math.pi, abs=1e-8)


def test_detect_periodic_none_for_projected_flow(bhopf):
    field = bhopf.objects["chart_reeb"]
    traj = integrate(field, (0.45, 0.0, 0.2),
                     IntegratorOptions(max_time=30.0, dense_output=True))
    assert detect_periodic(field, traj) is None


def test_classify_fixed_point():
    circ = VectorField(PLANE, fn=lambda x, y: (-y, x))
    t = ScalarField(PLANE, lambda x, y: x * x + y * y - 4.0)
    out = classify_orbit(circ, BManifoldChart(PLANE, t), (0.0, 0.0), COPTS)
    assert out.kind == OrbitKind.FIXED_POINT


def test_classify_periodic_off_z():
    circ = VectorField(PLANE, fn=lambda x, y: (-y, x))
    t = ScalarField(PLANE, lambda x, y: x * x + y * y - 4.0)
    out = classify_orbit(circ, BManifoldChart(PLANE, t), (1.0, 0.0),
                         ClassifierOptions(horizon=30.0))
    assert out.kind == OrbitKind.PERIODIC_OFF_Z
    assert out.period == pytest.approx(2 * math.pi, abs=1e-6)
    assert out.quasi_closed


def test_classify_bubble_taxonomy(bubble):
    reeb = bubble.objects["reeb"]
    bchart = bubble.objects["form"].base

    axis = classify_orbit(reeb, bchart, (0.0, 0.0, 0.0), COPTS)
    assert axis.kind == OrbitKind.SINGULAR_PERIODIC
    assert np.allclose(axis.forward.point, [0, 0, -1], atol=1e-4)
    assert np.allclose(axis.backward.point, [0, 0, 1], atol=1e-4)
    assert axis.quasi_closed

    helix = classify_orbit(reeb, bchart, (0.3, 0.0, 0.0), COPTS)
    assert helix.kind == OrbitKind.GENERALIZED_SINGULAR_PERIODIC
    z_star = math.sqrt(1 - 0.09)
    assert helix.forward.level == pytest.approx(-z_star, abs=1e-3)
    assert helix.forward.radius == pytest.approx(0.3, abs=1e-3)
    assert helix.backward.level == pytest.approx(z_star, abs=1e-3)
    assert helix.quasi_closed

    exterior = classify_orbit(reeb, bchart, (0.2, 0.0, 1.1), COPTS)
    assert exterior.kind == OrbitKind.GENERALIZED_ESCAPE
    assert exterior.backward.kind == LimitKind.CIRCLE_ON_Z
    assert exterior.forward.kind == LimitKind.OFF_Z_UNKNOWN
    assert not exterior.quasi_closed

    ext_axis = classify_orbit(reeb, bchart, (0.0, 0.0, 1.3), COPTS)
    assert ext_axis.kind == OrbitKind.ESCAPE
    assert ext_axis.backward.kind == LimitKind.POINT_ON_Z


def test_limit_set_estimate_axis_and_helix(bubble):
    reeb = bubble.objects["reeb"]
    bchart = bubble.objects["form"].base
    opts = COPTS
    traj = integrate(reeb, (0.0, 0.0, 0.5), opts.integrator(dense=False),
                     bchart=bchart)
    ls = limit_set_estimate(reeb, bchart, traj, opts)
    assert ls.kind == LimitKind.POINT_ON_Z
    assert np.allclose(ls.point, [0, 0, -1], atol=1e-4)

    traj2 = integrate(reeb, (0.3, 0.0, 0.0), opts.integrator(dense=False),
                      bchart=bchart)
    ls2 = limit_set_estimate(reeb, bchart, traj2, opts)
    assert ls2.kind == LimitKind.CIRCLE_ON_Z
    assert ls2.radius == pytest.approx(0.3, abs=1e-3)
    assert ls2.residual < 1e-3
    assert ls2.rate_sign != 0


def test_limit_set_off_z_for_time_limit():
    drift = VectorField(R3, fn=lambda x, y, z: (0.0, 0.0, 1.0))
    t = ScalarField(R3, lambda x, y, z: x * x + y * y + z * z - 1e6)
    traj = integrate(drift, (0.0, 0.0, 0.0), IntegratorOptions(max_time=1.0))
    ls = limit_set_estimate(drift, BManifoldChart(R3, t), traj)
    assert ls.kind == LimitKind.OFF_Z_UNKNOWN


def test_classify_projected_flow(bhopf):
    field = bhopf.objects["chart_reeb"]
    bchart = bhopf.objects["bchart3"]
    axis = classify_orbit(field, bchart, (0.0, 0.0, 0.0), COPTS)
    assert axis.kind == OrbitKind.SINGULAR_PERIODIC
    generic = classify_orbit(field, bchart, (0.45, 0.0, 0.2), COPTS)
    assert generic.kind == OrbitKind.GENERALIZED_SINGULAR_PERIODIC
    assert generic.quasi_closed


def test_find_critical_points_bubble_poles(bubble):
    crit = find_critical_points_on_z(bubble.objects["form"])
    assert len(crit) == 2
    indices = sorted(c.morse_index for c in crit)
    assert indices == [0, 2]
    for c in crit:
        assert abs(abs(c.coords[2]) - 1.0) < 1e-9
        assert c.grad_norm < 1e-10
        assert c.morse_ok
    assert not [c for c in crit if c.morse_index == 1]  # no saddles: no separatrices


def test_find_critical_points_torus():
    demo = cons.torus_demo()
    crit = find_critical_points_on_z(demo)
    assert len(crit) == 4
    assert sorted(c.morse_index for c in crit) == [0, 1, 1, 2]
    vals = sorted(c.value for c in crit)
    assert np.allclose(vals, [-1.5, -0.5, 0.5, 1.5], atol=1e-9)
    for c in crit:
        signs = sorted(np.sign(c.hessian_eigs))
        expected = {0: [1, 1], 1: [-1, 1], 2: [-1, -1]}[c.morse_index]
        assert signs == expected


def test_constant_hamiltonian_non_morse():
    demo = cons.torus_demo()
    from srl.orbits import TorusSurface
    flat = TorusSurface(ScalarField(demo.chart, lambda a, b: 1.0), demo.field)
    crit = find_critical_points_on_z(flat)
    assert crit and all(not c.morse_ok for c in crit)


def test_trace_separatrices_torus():
    demo = cons.torus_demo()
    crit = find_critical_points_on_z(demo)
    saddles = [c for c in crit if c.morse_index == 1]
    assert len(saddles) == 2
    total = []
    for s in saddles:
        rep = trace_separatrices(demo, s, criticals=crit)
        assert rep.singular_periodic_count == 2
        assert all(o.label == "homoclinic" for o in rep.orbits)
        total.extend(rep.orbits)
    assert len(total) == 4

    with pytest.raises(ConfigError):
        trace_separatrices(demo, crit[0] if crit[0].morse_index != 1 else crit[-1],
                           criticals=crit)


def test_taxonomy_implication_consistency(bubble):
    # point ends imply escape-type membership; both-in-Z implies generalized
    from srl.cli import _taxonomy_consistent
    reeb = bubble.objects["reeb"]
    bchart = bubble.objects["form"].base
    for seed in ((0.0, 0.0, 0.0), (0.3, 0.0, 0.0), (0.2, 0.0, 1.1),
                 (0.0, 0.0, 1.3)):
        c = classify_orbit(reeb, bchart, seed, COPTS)
        assert _taxonomy_consistent(c)
        if c.kind == OrbitKind.SINGULAR_PERIODIC:
            assert c.quasi_closed


def test_classification_serialization(bubble):
    c = classify_orbit(bubble.objects["reeb"], bubble.objects["form"].base,
                       (0.3, 0.0, 0.0), COPTS)
    d = c.to_dict()
    assert d["kind"] == "GeneralizedSingularPeriodic"
    assert d["quasi_closed"] is True
    assert d["forward"]["kind"] == "CircleOnZ"
    assert isinstance(d["forward"]["radius"], float)
    assert d["horizon"] == COPTS.horizon


def test_on_z_parallels_are_periodic(bubble):
    # the induced flow on the critical sphere closes up along the parallels
    from srl.orbits import SphereSurface
    surf = SphereSurface(bubble.objects["form"])
    vf = VectorField(R3, fn=lambda x, y, z: tuple(surf.field((x, y, z))))
    traj = integrate(vf, (1.0, 0.0, 0.0),
                     IntegratorOptions(max_time=20.0, dense_output=True))
    period = detect_periodic(vf, traj)
    # equator rotation rate is 1 for this flow
    assert period == pytest.approx(2 * math.pi, abs=1e-6)
