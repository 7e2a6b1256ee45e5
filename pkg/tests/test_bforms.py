"""Decomposed singular forms: structural exterior derivative, pairings,
contact volume coefficient, contact test, induced on-Z data."""

import math

import numpy as np
import pytest

from srl import constructions as cons
from srl.bforms import (BForm1, SamplingPlan, check_regular_value,
                        contact_volume_coefficient, exceptional_data,
                        exterior_derivative, grid_plan, is_b_contact,
                        merge_plans, near_z_plan, pair_1form, smooth_chart)
from srl.charts import R3, ScalarField, const_field
from srl.errors import (ConfigError, DimensionError, NotOnCriticalSetError,
                        SingularPairingError)

RNG = np.random.default_rng(5)


def area_form_example():
    base = smooth_chart(R3)
    beta = (ScalarField(R3, lambda x, y, z: -y),
            ScalarField(R3, lambda x, y, z: x),
            const_field(R3, 0.0))
    return BForm1(base, const_field(R3, 0.0), beta, name="xdy-ydx")


def test_exterior_derivative_area_form():
    d = exterior_derivative(area_form_example())
    for _ in range(20):
        p = RNG.uniform(-2, 2, size=3)
        assert np.allclose(d.eta_at(p), 0.0)
        B = d.B_at(p)
        assert B[0, 1] == pytest.approx(2.0)  # 2 dx^dy
        assert B[0, 2] == 0.0 and B[1, 2] == 0.0
        assert np.allclose(B, -B.T)


def test_exterior_derivative_bubble_pairing(bubble):
    # pairing with (d/dz, radial) matches 2(r^2+1) dz^(r dr)/(r^2-1) + 2 dx^dy
    d = bubble.objects["form"].d()
    for _ in range(100):
        p = RNG.uniform(-2, 2, size=3)
        x, y, z = p
        r2 = float(p @ p)
        if abs(r2 - 1.0) < 0.05:
            continue
        u = np.array([0.0, 0.0, 1.0])
        v = p.copy()
        expected = 2.0 * (r2 + 1.0) * (r2 - z * z) / (r2 - 1.0)
        assert d.pair(p, u, v) == pytest.approx(expected, abs=1e-8)


def test_dd_smooth_part_closed(bubble):
    d = bubble.objects["form"].d()
    h = 1e-4
    for _ in range(20):
        p = RNG.uniform(-1.5, 1.5, size=3)
        total = 0.0
        for (a, b, c) in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
            dp = np.zeros(3)
            dp[c] = h
            total += (d.B_at(p + dp)[a, b] - d.B_at(p - dp)[a, b]) / (2 * h)
        assert abs(total) < 1e-8


def test_pair_darboux_reeb():
    darboux = cons.darboux_form().objects["form"]
    assert pair_1form(darboux, (1.0, 0.0, 0.0), (0.0, 0.0, 2.0)) == pytest.approx(1.0)


def test_pair_linearity_zero_vector(bubble):
    form = bubble.objects["form"]
    p = (0.4, 0.1, -0.2)
    assert pair_1form(form, p, (0.0, 0.0, 0.0)) == 0.0
    u = np.array([0.1, 0.2, 0.3])
    v = np.array([-0.5, 0.4, 0.2])
    assert pair_1form(form, p, 2.0 * u + v) == pytest.approx(
        2.0 * pair_1form(form, p, u) + pair_1form(form, p, v))


def test_pair_bubble_origin(bubble):
    assert pair_1form(bubble.objects["form"], (0.0, 0.0, 0.0),
                      (0.0, 0.0, -2.0)) == pytest.approx(1.0)


def test_pair_on_z_convention(bubble):
    form = bubble.objects["form"]
    p = (0.0, 0.0, 1.0)
    # tangent vector: fine, returns beta(v)
    assert pair_1form(form, p, (1.0, 0.0, 0.0)) == pytest.approx(0.0)
    with pytest.raises(SingularPairingError):
        pair_1form(form, p, (0.0, 0.0, 1.0))


def test_volume_coefficient_values(bubble):
    form = bubble.objects["form"]
    assert contact_volume_coefficient(form, (0, 0, 0)) == pytest.approx(1.0)
    assert contact_volume_coefficient(form, (0, 0, 1)) == pytest.approx(8.0)
    # exactly on the critical set: smooth, finite values
    assert contact_volume_coefficient(form, (1, 0, 0)) == pytest.approx(4.0)
    for _ in range(50):
        v = RNG.normal(size=3)
        p = v / np.linalg.norm(v)
        assert contact_volume_coefficient(form, p) == pytest.approx(
            cons.bubble_volume_coefficient(*p), abs=1e-9)
    std = cons.as_smooth_bform_on(
        smooth_chart(R3),
        (ScalarField(R3, lambda x, y, z: -y),
         ScalarField(R3, lambda x, y, z: x),
         const_field(R3, 1.0)))
    for _ in range(20):
        p = RNG.uniform(-2, 2, size=3)
        assert contact_volume_coefficient(std, p) == pytest.approx(2.0)


def test_volume_coefficient_closed_form(bubble):
    form = bubble.objects["form"]
    bchart = form.base
    pts = list(RNG.uniform(-2, 2, size=(700, 3)))
    dirs = RNG.normal(size=(300, 3))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    pts += list(near_z_plan(bchart, dirs, 1e-2, RNG).points)
    worst = max(abs(contact_volume_coefficient(form, p)
                    - cons.bubble_volume_coefficient(*p)) for p in pts)
    assert worst < 1e-9


def test_volume_coefficient_dimension_error(bhopf):
    with pytest.raises(DimensionError):
        contact_volume_coefficient(bhopf.objects["alpha"], (0.5, 0, 0, 0))


def test_is_b_contact_bubble(bubble):
    form = bubble.objects["form"]
    dirs = RNG.normal(size=(1000, 3))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    plan = merge_plans(grid_plan(((-2, 2), (-2, 2), (-2, 2)), (10, 10, 10)),
                       near_z_plan(form.base, dirs, 1e-2, RNG))
    rep = is_b_contact(form, plan)
    assert rep.passed
    assert rep.min_abs_coeff >= 1.0 - 1e-9  # minimum of 4z^2+(1+r^2)^2 on the box
    assert rep.n_samples == 2000


def test_is_b_contact_zero_form_fails():
    base = smooth_chart(R3)
    zero = BForm1(base, const_field(R3, 0.0),
                  tuple(const_field(R3, 0.0) for _ in range(3)))
    rep = is_b_contact(zero, grid_plan(((-1, 1),) * 3, (4, 4, 4)))
    assert not rep.passed
    assert rep.min_abs_coeff == 0.0


def test_is_b_contact_empty_plan(bubble):
    with pytest.raises(ConfigError):
        is_b_contact(bubble.objects["form"], SamplingPlan(np.zeros((0, 3))))


def test_exceptional_data_poles_and_equator(bubble):
    form = bubble.objects["form"]
    north = exceptional_data(form, (0.0, 0.0, 1.0))
    assert not north.degenerate
    assert np.linalg.norm(north.dh) < 1e-12
    equator = exceptional_data(form, (1.0, 0.0, 0.0))
    assert np.linalg.norm(equator.dh) > 1e-2
    assert north.frame.shape == (3, 2)
    assert np.allclose(north.omega_z, -north.omega_z.T)


def test_exceptional_data_off_z_raises(bubble):
    with pytest.raises(NotOnCriticalSetError):
        exceptional_data(bubble.objects["form"], (0.0, 0.0, 0.5))


def test_exceptional_data_degenerate_reported():
    # zero coefficient function: induced form degenerates, flagged not raised
    t = ScalarField(R3, lambda x, y, z: x * x + y * y + z * z - 1.0)
    from srl.bforms import BManifoldChart
    base = BManifoldChart(R3, t)
    zero = const_field(R3, 0.0)
    form = BForm1(base, zero, (zero, zero, zero))
    data = exceptional_data(form, (0.0, 0.0, 1.0))
    assert data.degenerate


def test_exceptional_data_level_constraint(bhopf):
    alpha, H = bhopf.objects["alpha"], bhopf.objects["H"]
    with pytest.raises(DimensionError):
        exceptional_data(alpha, (0.0, 0.6, 0.8, 0.0))  # 4d chart needs a level
    data = exceptional_data(alpha, (0.0, 0.6, 0.8, 0.0), level=H)
    assert data.omega_z.shape == (2, 2)


def test_regular_value_check(bubble):
    dirs = RNG.normal(size=(50, 3))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    assert check_regular_value(bubble.objects["form"].base, dirs)
    bad = ScalarField(R3, lambda x, y, z: (x * x + y * y + z * z - 1.0) ** 2)
    from srl.bforms import BManifoldChart
    assert not check_regular_value(BManifoldChart(R3, bad), dirs)


def test_near_z_plan_band(bubble):
    bchart = bubble.objects["form"].base
    dirs = RNG.normal(size=(100, 3))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    plan = near_z_plan(bchart, dirs, 1e-2, RNG)
    ts = [abs(bchart.t(p)) for p in plan.points]
    assert max(ts) < 2.5e-2
