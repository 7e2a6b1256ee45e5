"""Forward-mode dual numbers and the smooth expression primitives built on them.

Every scalar field in the package is an expression over these primitives
(arithmetic, integer/real powers, exp, trig, sqrt, and the flat bump), so
first derivatives are exact.  Finite differences appear only as test oracles
and in the two spots that need derivatives *of* a gradient (Newton/Hessian
refinement of critical points).
"""

from __future__ import annotations

import math

import numpy as np


class Dual:
    """Value plus gradient: a + b*eps with eps^2 = 0 and vector-valued b."""

    __slots__ = ("val", "eps")

    def __init__(self, val, eps):
        self.val = float(val)
        self.eps = eps  # numpy array, never aliased after construction

    def __add__(self, other):
        if isinstance(other, Dual):
            return Dual(self.val + other.val, self.eps + other.eps)
        return Dual(self.val + other, self.eps)

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, Dual):
            return Dual(self.val - other.val, self.eps - other.eps)
        return Dual(self.val - other, self.eps)

    def __rsub__(self, other):
        return Dual(other - self.val, -self.eps)

    def __mul__(self, other):
        if isinstance(other, Dual):
            return Dual(self.val * other.val,
                        self.val * other.eps + other.val * self.eps)
        return Dual(self.val * other, self.eps * other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Dual):
            inv = 1.0 / other.val
            return Dual(self.val * inv,
                        (self.eps - (self.val * inv) * other.eps) * inv)
        return Dual(self.val / other, self.eps / other)

    def __rtruediv__(self, other):
        inv = 1.0 / self.val
        return Dual(other * inv, (-other * inv * inv) * self.eps)

    def __pow__(self, n):
        if isinstance(n, Dual):
            raise TypeError("dual exponents are not supported")
        if n == 2:
            return Dual(self.val * self.val, (2.0 * self.val) * self.eps)
        return Dual(self.val ** n, (n * self.val ** (n - 1)) * self.eps)

    def __neg__(self):
        return Dual(-self.val, -self.eps)

    def __abs__(self):
        s = math.copysign(1.0, self.val) if self.val != 0.0 else 0.0
        return Dual(abs(self.val), s * self.eps)

    def __lt__(self, other):
        return self.val < value_of(other)

    def __le__(self, other):
        return self.val <= value_of(other)

    def __gt__(self, other):
        return self.val > value_of(other)

    def __ge__(self, other):
        return self.val >= value_of(other)

    def __float__(self):
        return self.val

    def __repr__(self):
        return f"Dual({self.val}, {self.eps})"


def value_of(x):
    """Real part of a float or Dual."""
    return x.val if isinstance(x, Dual) else float(x)


def seed(coords):
    """Lift coordinates to Duals seeded with the identity (one pass gradient)."""
    n = len(coords)
    out = []
    for i, c in enumerate(coords):
        e = np.zeros(n)
        e[i] = 1.0
        out.append(Dual(c, e))
    return out


def split(x, n):
    """Return (value, gradient) of an expression result; constants get zeros."""
    if isinstance(x, Dual):
        return x.val, np.asarray(x.eps, dtype=float)
    return float(x), np.zeros(n)


# -- unary primitives ----------------------------------------------------

def exp(x):
    if isinstance(x, Dual):
        v = math.exp(x.val)
        return Dual(v, v * x.eps)
    return math.exp(x)


def sin(x):
    if isinstance(x, Dual):
        return Dual(math.sin(x.val), math.cos(x.val) * x.eps)
    return math.sin(x)


def cos(x):
    if isinstance(x, Dual):
        return Dual(math.cos(x.val), -math.sin(x.val) * x.eps)
    return math.cos(x)


def sqrt(x):
    if isinstance(x, Dual):
        v = math.sqrt(x.val)
        return Dual(v, (0.5 / v) * x.eps)
    return math.sqrt(x)


def log(x):
    if isinstance(x, Dual):
        return Dual(math.log(x.val), x.eps / x.val)
    return math.log(x)


# -- smoothstep / bump primitives ----------------------------------------
#
# h(u) = exp(-1/u) for u > 0 (flat at 0), smoothstep s(q) = h(q)/(h(q)+h(1-q))
# clipped to [0, 1].  The bump of half-width ``delta`` is 1 on the plateau
# [-pf*delta, pf*delta], 0 outside (-delta, delta), and C-infinity everywhere.

def _h(u):
    return math.exp(-1.0 / u) if u > 0.0 else 0.0


def _h_d(u):
    if u <= 0.0:
        return 0.0
    return math.exp(-1.0 / u) / (u * u)


def smoothstep(q):
    """Monotone C-infinity step: 0 for q <= 0, 1 for q >= 1."""
    if q <= 0.0:
        return 0.0
    if q >= 1.0:
        return 1.0
    a = _h(q)
    return a / (a + _h(1.0 - q))


def smoothstep_deriv(q):
    if q <= 0.0 or q >= 1.0:
        return 0.0
    a, b = _h(q), _h(1.0 - q)
    da, db = _h_d(q), _h_d(1.0 - q)
    denom = a + b
    return (da * b + a * db) / (denom * denom)


def bump_value(u, delta, plateau_fraction=0.5):
    q = (delta - abs(u)) / (delta * (1.0 - plateau_fraction))
    return smoothstep(q)


def bump_deriv(u, delta, plateau_fraction=0.5):
    width = delta * (1.0 - plateau_fraction)
    q = (delta - abs(u)) / width
    s = math.copysign(1.0, u) if u != 0.0 else 0.0
    return smoothstep_deriv(q) * (-s / width)


def bump(x, delta, plateau_fraction=0.5):
    """Flat bump as an expression primitive (float or Dual argument)."""
    if isinstance(x, Dual):
        return Dual(bump_value(x.val, delta, plateau_fraction),
                    bump_deriv(x.val, delta, plateau_fraction) * x.eps)
    return bump_value(x, delta, plateau_fraction)


def step(x):
    """Smoothstep as an expression primitive (float or Dual argument)."""
    if isinstance(x, Dual):
        return Dual(smoothstep(x.val), smoothstep_deriv(x.val) * x.eps)
    return smoothstep(x)


def bump_of_square(q, delta, plateau_fraction=0.5):
    """bump(sqrt(q)) as a smooth function of q >= 0.

    Used for radial bumps bump(rho) with rho^2 = x^2 + y^2: the chain rule
    through sqrt is singular at rho = 0, but the composition is smooth in q
    because the bump is flat on its plateau.  The derivative is therefore
    written directly, with the plateau handled exactly.
    """
    qv = value_of(q)
    r = math.sqrt(qv) if qv > 0.0 else 0.0
    val = bump_value(r, delta, plateau_fraction)
    if not isinstance(q, Dual):
        return val
    if r <= delta * plateau_fraction or r >= delta:
        d = 0.0
    else:
        d = bump_deriv(r, delta, plateau_fraction) / (2.0 * r)
    return Dual(val, d * q.eps)


def integrate_1d(fn, a, b, tol=1e-12, max_depth=40):
    """Adaptive Simpson quadrature (sufficient for the smooth bumps used here)."""

    def simpson(x0, x2, f0, f1, f2):
        return (x2 - x0) * (f0 + 4.0 * f1 + f2) / 6.0

    def recurse(x0, x2, f0, f1, f2, whole, eps, depth):
        xm = 0.5 * (x0 + x2)
        lm = 0.5 * (x0 + xm)
        rm = 0.5 * (xm + x2)
        fl, fr = fn(lm), fn(rm)
        left = simpson(x0, xm, f0, fl, f1)
        right = simpson(xm, x2, f1, fr, f2)
        if depth <= 0 or abs(left + right - whole) <= 15.0 * eps:
            return left + right + (left + right - whole) / 15.0
        return (recurse(x0, xm, f0, fl, f1, left, eps / 2.0, depth - 1)
                + recurse(xm, x2, f1, fr, f2, right, eps / 2.0, depth - 1))

    if a == b:
        return 0.0
    f0, f1, f2 = fn(a), fn(0.5 * (a + b)), fn(b)
    whole = simpson(a, b, f0, f1, f2)
    return recurse(a, b, f0, f1, f2, whole, tol, max_depth)
