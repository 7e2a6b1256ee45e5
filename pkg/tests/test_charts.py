"""Charts, fields, maps: exact derivatives, conversions, pushforwards."""

import math

import numpy as np
import pytest

from srl import constructions as cons
from srl.charts import (CYL3, R3, R4, Chart, Point, ScalarField, SmoothMap,
                        VectorField, change_chart, eval_with_gradient,
                        identity_map, linear_map, pushforward)
from srl.errors import ConfigError, DomainError

RNG = np.random.default_rng(7)


def test_chart_validation():
    with pytest.raises(ConfigError):
        Chart("bad", ("x", "x"))
    assert R4.dim == 4


def test_point_validation():
    with pytest.raises(DomainError):
        Point(R3, (1.0, math.inf, 0.0))
    with pytest.raises(DomainError):
        Point(R3, (1.0, 2.0))


def test_eval_with_gradient_quadratic():
    H = ScalarField(R4, lambda x1, y1, x2, y2: 0.5 * (x1 ** 2 + y1 ** 2 + x2 ** 2 + y2 ** 2))
    v, g = eval_with_gradient(H, (1.0, 0.0, 0.0, 0.0))
    assert v == 0.5
    assert np.allclose(g, [1, 0, 0, 0])


def test_eval_with_gradient_sphere_function():
    t = ScalarField(R3, lambda x, y, z: x * x + y * y + z * z - 1.0)
    v, g = eval_with_gradient(t, (0.0, 0.0, 0.0))
    assert v == -1.0
    assert np.allclose(g, 0.0)


def test_eval_with_gradient_fd_oracle():
    f = ScalarField(R3, lambda x, y, z: 0.5 * z * (3.0 + x * x + y * y + z * z))
    p = np.array([1.0, 0.0, 1.0])
    v, g = eval_with_gradient(f, p)
    assert v == pytest.approx(2.5)
    h = 1e-5
    for i in range(3):
        dp = np.zeros(3)
        dp[i] = h
        assert g[i] == pytest.approx((f(p + dp) - f(p - dp)) / (2 * h), abs=1e-6)


def test_gradients_match_fd_at_random_points(bubble, bhopf):
    fields = [bubble.objects["form"].f, bubble.objects["form"].base.t,
              bhopf.objects["H"], bhopf.objects["alpha"].f]
    h = 1e-5
    for fld in fields:
        dim = fld.chart.dim
        for p in RNG.uniform(-1.5, 1.5, size=(100, dim)):
            if abs(fld(p)) > 1e3:
                continue
            g = fld.gradient(p)
            for i in range(dim):
                dp = np.zeros(dim)
                dp[i] = h
                assert abs((fld(p + dp) - fld(p - dp)) / (2 * h) - g[i]) < 1e-6


def test_field_algebra():
    f = ScalarField(R3, lambda x, y, z: x + y)
    g = ScalarField(R3, lambda x, y, z: z)
    combo = 2.0 * f - g / 2.0 + 1.0
    p = (1.0, 2.0, 4.0)
    assert combo(p) == pytest.approx(2 * 3 - 2 + 1)
    assert np.allclose(combo.gradient(p), [2, 2, -0.5])
    assert (-f)(p) == -3.0


def test_non_finite_evaluation_raises():
    f = ScalarField(R3, lambda x, y, z: 1.0 / x)
    with pytest.raises(DomainError):
        eval_with_gradient(f, (0.0, 1.0, 1.0))


def test_smoothmap_jacobian_fd(bhopf):
    psi = bhopf.objects["psi"]
    h = 1e-6
    for _ in range(100):
        v = RNG.normal(size=4)
        v /= np.linalg.norm(v)
        if abs(1.0 - v[0]) < 0.2:
            continue
        jac = psi.jacobian(v)
        for j in range(4):
            dp = np.zeros(4)
            dp[j] = h
            fd = (np.array(psi(v + dp).coords) - np.array(psi(v - dp).coords)) / (2 * h)
            assert np.abs(jac[:, j] - fd).max() < 1e-6


def test_stereographic_projection_domain(bhopf):
    psi = bhopf.objects["psi"]
    with pytest.raises(DomainError):
        psi((1.0, 0.0, 0.0, 0.0))
    with pytest.raises(DomainError):
        pushforward(psi, bhopf.objects["XH"], (1.0, 0.0, 0.0, 0.0))


def test_pushforward_identity_and_linear():
    field = VectorField(R3, fn=lambda x, y, z: (y, -x, 1.0))
    p = (0.3, -0.7, 0.2)
    assert np.allclose(pushforward(identity_map(R3), field, p), field(p))
    m = RNG.normal(size=(3, 3))
    lin = linear_map(R3, R3, m)
    const = VectorField(R3, fn=lambda x, y, z: (1.0, 2.0, 3.0))
    assert np.allclose(pushforward(lin, const, p), m @ np.array([1, 2, 3]))


def test_pushforward_linear_in_field(bhopf):
    psi = bhopf.objects["psi"]
    f1 = bhopf.objects["XH"]
    f2 = VectorField(R4, fn=lambda *c: (c[1], -c[0], c[3], -c[2]))
    both = VectorField(R4, fn=lambda *c: tuple(a + 2.0 * b for a, b in
                                               zip(f1.fn(*c), f2.fn(*c))))
    p = np.array([0.2, 0.3, 0.5, -0.4])
    lhs = pushforward(psi, both, p)
    rhs = pushforward(psi, f1, p) + 2.0 * pushforward(psi, f2, p)
    assert np.abs(lhs - rhs).max() < 1e-12


def test_stereographic_pushforward_example(bhopf):
    # projected value at the image (0, 1, 0) of (0,0,0,1)
    psi, XH = bhopf.objects["psi"], bhopf.objects["XH"]
    out = pushforward(psi, XH, (0.0, 0.0, 0.0, 1.0))
    expected = bhopf.objects["projected_bhopf"]((0.0, 1.0, 0.0))
    assert np.abs(out - expected).max() < 1e-9
    assert np.allclose(out, [-1.0, 0.0, 0.0])


def test_change_chart_examples():
    p = change_chart(Point(R3, (1.0, 0.0, 0.0)), CYL3)
    assert np.allclose(p.coords, [1.0, 0.0, 0.0])
    q = change_chart(Point(R3, (0.0, 1.0, 0.0)), CYL3)
    assert np.allclose(q.coords, [1.0, math.pi / 2, 0.0])


def test_change_chart_round_trip():
    for _ in range(200):
        c = RNG.uniform(-2, 2, size=3)
        if math.hypot(c[0], c[1]) < 1e-6:
            continue
        p = Point(R3, c)
        back = change_chart(change_chart(p, CYL3), R3)
        assert np.abs(np.array(back.coords) - c).max() < 1e-12


def test_change_chart_axis_convention_and_errors():
    p = change_chart(Point(R3, (0.0, 0.0, 0.7)), CYL3)
    assert p.coords[1] == 0.0  # angle convention on the axis
    with pytest.raises(ConfigError):
        change_chart(Point(R3, (1.0, 0.0, 0.0)), R4)
    with pytest.raises(DomainError):
        change_chart(Point(CYL3, (-1.0, 0.0, 0.0)), R3)


def test_vector_field_known_invariants(bubble, bhopf):
    # each listed first integral is orthogonal to the field
    for vf in (bubble.objects["reeb"], bhopf.objects["XH"],
               bhopf.objects["chart_reeb"]):
        for _ in range(100):
            p = RNG.uniform(-1.5, 1.5, size=vf.chart.dim)
            v = vf(p)
            for inv in vf.invariants:
                g = inv.gradient(p)
                bound = 1e-8 * (1.0 + np.linalg.norm(v) * np.linalg.norm(g))
                assert abs(g @ v) <= bound


def test_stereographic_inverse_round_trip(bhopf):
    psi, psi_inv = bhopf.objects["psi"], bhopf.objects["psi_inv"]
    for _ in range(50):
        q = RNG.uniform(-2, 2, size=3)
        p4 = psi_inv(q)
        assert np.allclose(np.array(p4.coords) @ np.array(p4.coords), 1.0)
        back = psi(p4.coords)
        assert np.abs(np.array(back.coords) - q).max() < 1e-12
