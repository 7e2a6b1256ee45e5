"""Dual-number arithmetic and the bump primitives against finite differences."""

import math

import numpy as np
import pytest

from srl import ad

RNG = np.random.default_rng(11)
FD_H = 1e-6


def fd(fn, x, h=FD_H):
    return (fn(x + h) - fn(x - h)) / (2 * h)


def expr(x):
    return ad.exp(ad.sin(x) * 0.3) / (1.0 + x * x) + ad.sqrt(x * x + 2.0) - x ** 3


def test_dual_matches_finite_differences():
    for x0 in RNG.uniform(-2, 2, size=50):
        d = expr(ad.Dual(x0, np.array([1.0])))
        assert d.val == pytest.approx(expr(float(x0)))
        assert d.eps[0] == pytest.approx(fd(expr, float(x0)), abs=1e-7)


def test_dual_division_and_rops():
    x = ad.Dual(0.7, np.array([1.0]))
    y = 2.0 / (1.0 - x)
    assert y.val == pytest.approx(2.0 / 0.3)
    assert y.eps[0] == pytest.approx(2.0 / 0.3 ** 2, rel=1e-12)
    z = (3.0 - x) * x - x / 2.0
    assert z.val == pytest.approx((3.0 - 0.7) * 0.7 - 0.35)


def test_dual_abs_and_log():
    x = ad.Dual(-1.5, np.array([1.0]))
    assert abs(x).val == 1.5
    assert abs(x).eps[0] == -1.0
    y = ad.log(ad.Dual(2.0, np.array([1.0])))
    assert y.eps[0] == pytest.approx(0.5)


def test_seed_gradient_vector():
    duals = ad.seed((1.0, 2.0, 3.0))
    out = duals[0] * duals[1] + duals[2] ** 2
    assert out.val == 2.0 + 9.0
    assert np.allclose(out.eps, [2.0, 1.0, 6.0])


# -- bump ------------------------------------------------------------------

DELTA = 0.2


def test_bump_plateau_support_range():
    assert ad.bump_value(0.0, DELTA) == 1.0
    assert ad.bump_value(0.05, DELTA) == 1.0
    assert ad.bump_value(-0.05, DELTA) == 1.0
    assert ad.bump_value(0.2, DELTA) == 0.0
    assert ad.bump_value(-0.2, DELTA) == 0.0
    assert ad.bump_value(0.5, DELTA) == 0.0
    mid = ad.bump_value(0.15, DELTA)
    assert 0.0 < mid < 1.0
    assert ad.bump_value(-0.15, DELTA) == mid  # even
    for u in RNG.uniform(-0.3, 0.3, size=200):
        v = ad.bump_value(u, DELTA)
        assert 0.0 <= v <= 1.0


def test_bump_derivative_exact():
    for u in RNG.uniform(-0.25, 0.25, size=200):
        d = ad.bump_deriv(float(u), DELTA)
        assert d == pytest.approx(fd(lambda s: ad.bump_value(s, DELTA), float(u)),
                                  abs=2e-6)


def test_bump_smooth_at_joins():
    # flat transitions: derivative tends to 0 at plateau edge and support edge
    for u in (0.1 - 1e-9, 0.1 + 1e-9, 0.2 - 1e-9, 0.2 + 1e-9):
        assert abs(ad.bump_deriv(u, DELTA)) < 1e-4


def test_bump_of_square_no_singularity_at_axis():
    q = ad.Dual(0.0, np.array([1.0]))
    out = ad.bump_of_square(q, DELTA)
    assert out.val == 1.0
    assert out.eps[0] == 0.0
    # off-plateau chain rule matches bump(sqrt(q))
    for qv in RNG.uniform(0.012, 0.039, size=100):  # radius in (0.11, 0.198)
        out = ad.bump_of_square(ad.Dual(qv, np.array([1.0])), DELTA)
        assert out.val == pytest.approx(ad.bump_value(math.sqrt(qv), DELTA))
        assert out.eps[0] == pytest.approx(
            fd(lambda s: ad.bump_value(math.sqrt(s), DELTA), float(qv)), abs=2e-5)


def test_integrate_1d_known_values():
    assert ad.integrate_1d(lambda x: x * x, 0.0, 1.0) == pytest.approx(1 / 3, abs=1e-12)
    assert ad.integrate_1d(math.sin, 0.0, math.pi) == pytest.approx(2.0, abs=1e-11)
    assert ad.integrate_1d(math.cos, 0.0, 0.0) == 0.0


def test_bump_integral_bracket():
    val = ad.integrate_1d(lambda s: ad.bump_value(s, DELTA), -DELTA, DELTA)
    assert DELTA < val < 2 * DELTA


def test_smoothstep_monotone():
    qs = np.linspace(-0.2, 1.2, 200)
    vals = [ad.smoothstep(q) for q in qs]
    assert vals[0] == 0.0 and vals[-1] == 1.0
    assert all(b >= a for a, b in zip(vals, vals[1:]))
