"""Reeb solves for singular contact forms and Hamiltonian fields on
(b-)symplectic charts.

Conventions fixed here and used everywhere:

* Hamiltonian fields solve  iota_X omega = -dH  (equivalently M X = grad H
  where M[i,j] = omega(e_i, e_j)).
* The on-Z Reeb field solves  iota_R omega_z = d(f|_Z)  on the induced
  symplectic data of the critical set.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import ad
from .bforms import TOL_Z, BForm1, exceptional_data, pair_1form
from .charts import ScalarField, VectorField, coords_of
from .errors import (DegeneracyError, DegenerateContactError,
                     DegenerateSymplecticError, DimensionError, DomainError)


@dataclass(frozen=True)
class BSymplectic4:
    """Symplectic 4d chart omega = eta ^ dt/t + B.

    ``t_index`` is the coordinate index of the defining function (the
    critical set is a coordinate hyperplane), or None for an ordinary smooth
    symplectic chart.  ``eta`` is a constant coefficient vector and ``B`` a
    constant antisymmetric matrix; this covers every chart used here.
    """

    base: object            # BManifoldChart, dim 4
    eta: np.ndarray
    B: np.ndarray
    t_index: object = None  # int | None

    def __post_init__(self):
        object.__setattr__(self, "eta", np.asarray(self.eta, dtype=float))
        object.__setattr__(self, "B", np.asarray(self.B, dtype=float))
        if self.base.chart.dim != 4:
            raise DimensionError("BSymplectic4 requires a 4d chart")

    def matrix_at(self, p):
        c = coords_of(p)
        if self.t_index is None:
            return self.B.copy()
        t = c[self.t_index]
        e = np.zeros(4)
        e[self.t_index] = 1.0
        return (np.outer(self.eta, e) - np.outer(e, self.eta)) / t + self.B

    def b_frame_matrix_at(self, p):
        """Coefficient matrix in the frame {t d/dt, d/dx_j}: finite across Z.

        The singular block has entries only in row/column of the defining
        coordinate, where the frame scaling cancels 1/t exactly.
        """
        if self.t_index is None:
            return self.B.copy()
        c = coords_of(p)
        k = self.t_index
        e = np.zeros(4)
        e[k] = 1.0
        sing = np.outer(self.eta, e) - np.outer(e, self.eta)
        r = np.zeros((4, 4))
        r[k, :] = sing[k, :]
        r[:, k] = sing[:, k]
        s = np.ones(4)
        s[k] = c[k]
        return r + self.B * np.outer(s, s)


@dataclass(frozen=True)
class ReebSolveDiagnostics:
    residual_alpha: float
    residual_dalpha: float
    condition: float


def reeb_at(a, p, tol_z=TOL_Z):
    """Pointwise Reeb solve off Z for a 3d singular contact form.

    The 2-form d(alpha) at p is a 3x3 antisymmetric matrix whose kernel is
    spanned by the axial vector m = (-M12, M02, -M01); normalizing by
    alpha(m) gives the unique field with alpha(R) = 1, d(alpha)(R, .) = 0.
    """
    if a.dim != 3:
        raise DimensionError("pointwise Reeb solve requires a 3d chart")
    c = coords_of(p)
    if not a.base.smooth and abs(a.base.t(c)) <= tol_z:
        raise DomainError("point lies on Z; use reeb_on_z")
    m = a.d().matrix_at(c)
    kernel = np.array([-m[1, 2], m[0, 2], -m[0, 1]])
    scale = float(np.abs(m).max())
    knorm = float(np.linalg.norm(kernel))
    denom = pair_1form(a, c, kernel)
    if abs(denom) < 1e-12 * (1.0 + knorm):
        raise DegenerateContactError(f"contact condition fails at {c}")
    r = kernel / denom
    res_alpha = abs(pair_1form(a, c, r) - 1.0)
    res_dalpha = float(np.abs(m @ r).max() / (1.0 + scale * np.linalg.norm(r)))
    cond = knorm / (1.0 + scale)
    return r, ReebSolveDiagnostics(res_alpha, res_dalpha, cond)


def reeb_on_z(a, p, level=None, tol_z=TOL_Z, critical_floor=1e-10):
    """On-Z Reeb value from the induced 2x2 solve iota_R omega_z = d(f|_Z).

    Returns the tangent vector in ambient coordinates; the zero vector at
    critical points of the restricted coefficient function.
    """
    data = exceptional_data(a, p, level=level, tol_z=tol_z)
    if data.degenerate:
        raise DegenerateSymplecticError(
            f"induced symplectic form degenerate at {data.point}")
    w = data.omega_z[0, 1]
    h = data.dh
    if np.linalg.norm(h) <= critical_floor:
        return np.zeros(a.dim)
    r_t = np.array([h[1] / w, -h[0] / w])
    return data.frame @ r_t


def _solve_sym(m, rhs):
    det = float(np.linalg.det(m))
    if abs(det) < 1e-12 * (1.0 + float(np.abs(m).max()) ** 4):
        raise DegenerateSymplecticError("symplectic matrix is degenerate")
    return np.linalg.solve(m, rhs)


def hamiltonian_field(w, H, p, tol_z=TOL_Z):
    """Solve iota_X omega = -dH on a (b-)symplectic 4d chart.

    Off Z this is the direct solve M X = grad H.  On Z the solve runs in the
    frame {t d/dt, d/dx_j} where the matrix stays finite; rescaling back makes
    the transverse component vanish on Z (the field is tangent).
    """
    c = coords_of(p)
    g = H.value_and_gradient(c)[1]
    if w.t_index is None:
        return _solve_sym(w.B, g)
    t = c[w.t_index]
    if abs(t) > tol_z:
        return _solve_sym(w.matrix_at(c), g)
    s = np.ones(4)
    s[w.t_index] = t
    xb = _solve_sym(w.b_frame_matrix_at(c), s * g)
    return s * xb


def hamiltonian_vector_field(w, H, invariants=(), name=""):
    """Hamiltonian field packaged as a VectorField (pointwise solves)."""

    def fn(*c):
        return tuple(hamiltonian_field(w, H, c))

    return VectorField(w.base.chart, fn=fn, invariants=invariants, name=name)


def liouville_contract(w, X, dtX_over_t=None, name=""):
    """Structural contraction iota_X omega of a vector field into the form.

    For omega = eta ^ dt/t + B:

        f_new    = eta . X
        beta_new = iota_X B - (dt(X)/t) * eta

    The result is again a decomposed 1-form exactly when dt(X)/t is smooth,
    i.e. when X is tangent to Z; for singular charts the smooth quotient
    should be supplied (for the Liouville fields used here it is a constant).
    Without it, the quotient is formed numerically and refuses points on Z.
    """
    chart = w.base.chart
    if X.components is None:
        raise DomainError("liouville_contract needs a field with expression components")
    comps = X.components
    eta, B = w.eta, w.B

    if w.t_index is not None and dtX_over_t is None:
        k = w.t_index
        tcomp = comps[k]

        def q_fn(*c):
            t = c[k]
            if abs(ad.value_of(t)) < 1e-12:
                raise DomainError("dt(X)/t needed on Z; supply the smooth quotient")
            return tcomp.fn(*c) / t

        dtX_over_t = ScalarField(chart, q_fn, name="dt(X)/t")

    def f_fn(*c):
        acc = 0.0
        for i in range(4):
            if eta[i] != 0.0:
                acc = acc + eta[i] * comps[i].fn(*c)
        return acc

    f_new = ScalarField(chart, f_fn, name="f")

    def make_beta(j):
        col = B[:, j].copy()
        ej = eta[j]

        def fn(*c):
            acc = 0.0
            for i in range(4):
                if col[i] != 0.0:
                    acc = acc + col[i] * comps[i].fn(*c)
            if w.t_index is not None and ej != 0.0:
                acc = acc - ej * dtX_over_t.fn(*c)
            return acc

        return ScalarField(chart, fn, name=f"beta[{j}]")

    beta_new = tuple(make_beta(j) for j in range(4))
    return BForm1(w.base, f_new, beta_new, name=name or "iota_X omega")


def induced_reeb_on_level(a, XH, p, level=None, level_value=None, tol_level=1e-10):
    """Reeb field of the level-set restriction: XH / alpha(XH).

    Valid wherever alpha(XH) is computable and nonzero; on Z itself the raw
    vector pairing convention applies, so prefer off-Z points or reeb_on_z.
    Invariant under positive rescaling of XH.
    """
    c = coords_of(p)
    if level is not None and level_value is not None:
        if abs(level(c) - level_value) > tol_level:
            raise DomainError("point is not on the declared level set")
    v = XH(c)
    denom = pair_1form(a, c, v)
    if abs(denom) < 1e-12 * (1.0 + np.linalg.norm(v)):
        raise DegeneracyError("alpha(XH) vanishes; induced field undefined")
    return v / denom
