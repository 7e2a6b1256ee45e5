"""Charts, points, scalar/vector fields with exact gradients, and smooth maps.

Scalar fields wrap plain Python expressions evaluated over floats or Duals,
so values and first derivatives come from a single code path.  Charts are
fixed small dimensions (2, 3, 4); nothing here is general-n machinery.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import ad
from .errors import ConfigError, DomainError


@dataclass(frozen=True)
class Chart:
    """Named coordinate system of fixed small dimension."""

    name: str
    coord_names: tuple

    def __post_init__(self):
        if len(set(self.coord_names)) != len(self.coord_names):
            raise ConfigError(f"duplicate coordinate names in chart {self.name}")
        if not 1 <= len(self.coord_names) <= 4:
            raise ConfigError("charts are limited to dimensions 1..4")

    @property
    def dim(self):
        return len(self.coord_names)


LINE = Chart("line", ("s",))
TORUS2 = Chart("torus2", ("th1", "th2"))
PLANE = Chart("plane", ("x", "y"))
R3 = Chart("cart3", ("x", "y", "z"))
CYL3 = Chart("cyl3", ("rho", "phi", "z"))
R4 = Chart("cart4", ("x1", "y1", "x2", "y2"))


@dataclass(frozen=True)
class Point:
    """Point of a chart; coordinates are finite floats."""

    chart: Chart
    coords: tuple

    def __post_init__(self):
        object.__setattr__(self, "coords", tuple(float(c) for c in self.coords))
        if len(self.coords) != self.chart.dim:
            raise DomainError(f"expected {self.chart.dim} coordinates")
        if not all(math.isfinite(c) for c in self.coords):
            raise DomainError("non-finite coordinates")

    def array(self):
        return np.array(self.coords)


def coords_of(p):
    """Coordinates of a Point, array, or sequence as a plain tuple of floats."""
    if isinstance(p, Point):
        return p.coords
    return tuple(float(c) for c in p)


class ScalarField:
    """Differentiable scalar function on a chart.

    ``fn`` takes the chart coordinates (floats or Duals) and returns a scalar;
    the gradient is obtained by evaluating the same expression on seeded Duals.
    """

    __slots__ = ("chart", "fn", "name")

    def __init__(self, chart, fn, name=""):
        self.chart = chart
        self.fn = fn
        self.name = name

    def __call__(self, p):
        return float(ad.value_of(self.fn(*coords_of(p))))

    def value_and_gradient(self, p):
        duals = ad.seed(coords_of(p))
        v, g = ad.split(self.fn(*duals), self.chart.dim)
        return v, g

    def gradient(self, p):
        return self.value_and_gradient(p)[1]

    # -- field algebra (closes over expressions, keeping derivatives exact) --

    def _binary(self, other, op, sym):
        if isinstance(other, ScalarField):
            f, g = self.fn, other.fn
            return ScalarField(self.chart, lambda *c: op(f(*c), g(*c)),
                               f"({self.name}{sym}{other.name})")
        f, k = self.fn, float(other)
        return ScalarField(self.chart, lambda *c: op(f(*c), k),
                           f"({self.name}{sym}{other})")

    def __add__(self, other):
        return self._binary(other, lambda a, b: a + b, "+")

    __radd__ = __add__

    def __sub__(self, other):
        return self._binary(other, lambda a, b: a - b, "-")

    def __rsub__(self, other):
        return self._binary(other, lambda a, b: b - a, "-r")

    def __mul__(self, other):
        return self._binary(other, lambda a, b: a * b, "*")

    __rmul__ = __mul__

    def __truediv__(self, other):
        return self._binary(other, lambda a, b: a / b, "/")

    def __neg__(self):
        f = self.fn
        return ScalarField(self.chart, lambda *c: -f(*c), f"(-{self.name})")


def const_field(chart, value, name=None):
    v = float(value)
    return ScalarField(chart, lambda *c: v, name or str(value))


def coordinate_field(chart, index, name=None):
    return ScalarField(chart, lambda *c: c[index],
                       name or chart.coord_names[index])


def eval_with_gradient(field, p):
    """Value and exact gradient in one pass; non-finite results are an error."""
    try:
        v, g = field.value_and_gradient(p)
    except ArithmeticError as exc:
        raise DomainError(f"evaluation of {field.name or 'field'} failed at "
                          f"{coords_of(p)}: {exc}") from exc
    if not (math.isfinite(v) and np.all(np.isfinite(g))):
        raise DomainError(f"non-finite evaluation of {field.name or 'field'} at {coords_of(p)}")
    return v, g


class VectorField:
    """Evaluatable vector field, optionally with known first integrals.

    ``fn`` maps chart coordinates to a coordinate tuple (plain floats: this is
    the hot path for integration).  ``components`` may supply the same data as
    ScalarFields when the field participates in exact-derivative algebra.
    """

    __slots__ = ("chart", "fn", "components", "invariants", "name")

    def __init__(self, chart, fn=None, components=None, invariants=(), name=""):
        if fn is None:
            if components is None:
                raise ConfigError("VectorField needs fn or components")
            comps = tuple(components)
            fn = lambda *c: tuple(f.fn(*c) for f in comps)  # noqa: E731
        self.chart = chart
        self.fn = fn
        self.components = tuple(components) if components is not None else None
        self.invariants = tuple(invariants)
        self.name = name

    def __call__(self, p):
        return np.array([ad.value_of(v) for v in self.fn(*coords_of(p))])


class SmoothMap:
    """Map between charts with exact Jacobian (same dual-number pass)."""

    __slots__ = ("source", "target", "fn", "name")

    def __init__(self, source, target, fn, name=""):
        self.source = source
        self.target = target
        self.fn = fn
        self.name = name

    def __call__(self, p):
        out = self.fn(*coords_of(p))
        vals = tuple(ad.value_of(v) for v in out)
        if not all(math.isfinite(v) for v in vals):
            raise DomainError(f"map {self.name or 'map'} undefined at {coords_of(p)}")
        return Point(self.target, vals)

    def jacobian(self, p):
        duals = ad.seed(coords_of(p))
        out = self.fn(*duals)
        n = self.source.dim
        rows = [ad.split(v, n)[1] for v in out]
        jac = np.array(rows)
        if not np.all(np.isfinite(jac)):
            raise DomainError(f"map {self.name or 'map'} has no Jacobian at {coords_of(p)}")
        return jac


def identity_map(chart):
    return SmoothMap(chart, chart, lambda *c: c, name=f"id_{chart.name}")


def linear_map(source, target, matrix):
    m = np.asarray(matrix, dtype=float)

    def fn(*c):
        return tuple(sum(m[i, j] * c[j] for j in range(len(c)))
                     for i in range(m.shape[0]))

    return SmoothMap(source, target, fn, name="linear")


def pushforward(smooth_map, field, p):
    """Jacobian-vector product J(p) . field(p), attached at smooth_map(p)."""
    jac = smooth_map.jacobian(p)
    v = field(p)
    out = jac @ v
    if not np.all(np.isfinite(out)):
        raise DomainError("pushforward produced non-finite components")
    return out


# -- chart conversions -----------------------------------------------------

_CONVERSIONS = {}


def register_conversion(source, target, fn):
    _CONVERSIONS[(source.name, target.name)] = fn


def change_chart(p, target):
    """Convert a point to a registered target chart."""
    key = (p.chart.name, target.name)
    if key not in _CONVERSIONS:
        raise ConfigError(f"no conversion registered for {key[0]} -> {key[1]}")
    return Point(target, _CONVERSIONS[key](*p.coords))


def _cart3_to_cyl3(x, y, z):
    rho = math.hypot(x, y)
    phi = math.atan2(y, x) if rho > 0.0 else 0.0  # angle convention on the axis
    return (rho, phi, z)


def _cyl3_to_cart3(rho, phi, z):
    if rho < 0.0:
        raise DomainError("cylindrical radius must be nonnegative")
    return (rho * math.cos(phi), rho * math.sin(phi), z)


register_conversion(R3, CYL3, _cart3_to_cyl3)
register_conversion(CYL3, R3, _cyl3_to_cart3)
