"""The compactification of W by the space of C-lines through 0: point
model, involutive charts, the Hopf fibration and closures of affine
C-subspaces."""

import numpy as np

from . import core
from .core import DimensionError, c_inverse, j_apply, unit_c
from .wspace import (CLine, CSubspace, WPoint, cline_through, lines_equal,
                     standard_v_basis)

INF_TOL = 1e-10


class CPWPoint:
    """A point of the compactified space: either a finite point of W or a
    point at infinity, stored as the C-line through 0 it corresponds to."""

    def __init__(self, finite=None, line=None):
        if (finite is None) == (line is None):
            raise ValueError("exactly one of finite/line must be given")
        self.finite = finite
        self.line = line

    @classmethod
    def from_w(cls, w):
        return cls(finite=w)

    @classmethod
    def at_infinity(cls, spec, w):
        return cls(line=cline_through(spec, w))

    @property
    def is_finite(self):
        return self.finite is not None

    def to_json_dict(self):
        if self.is_finite:
            return {"finite": {"v": self.finite.v.tolist(),
                               "zeta": self.finite.zeta.tolist()}}
        return {"infinity": {"frame": self.line.frame.tolist()}}

    @classmethod
    def from_json_dict(cls, data):
        if "finite" in data:
            return cls(finite=WPoint(data["finite"]["zeta"],
                                     data["finite"]["v"]))
        return cls(line=CLine.from_json_dict(data["infinity"]))

    def __repr__(self):
        if self.is_finite:
            return "CPWPoint(finite=%r)" % self.finite
        return "CPWPoint(line=...)"


def infinity_split(spec, p):
    """Display form of an infinity point: ('one', v) when the line is not
    inside V, so that (1, v) is its unique such element, else ('zero', v)
    with v a unit representative."""
    if p.is_finite:
        raise ValueError("finite point has no infinity form")
    frame = p.line.frame
    cblock = frame[:, :spec.d]
    if np.linalg.norm(cblock) > INF_TOL:
        coeff = np.linalg.solve(cblock.T, unit_c(spec.d))
        x = frame.T @ coeff
        return "one", x[spec.d:]
    return "zero", frame[0, spec.d:]


def points_equal(spec, p, q, tol=1e-8):
    if p.is_finite != q.is_finite:
        return False
    if p.is_finite:
        return np.linalg.norm(p.finite.to_vector()
                              - q.finite.to_vector()) < tol
    return lines_equal(p.line, q.line, tol)


def phi0(spec, p):
    """The involutive chart inverting the scalar part."""
    if p.is_finite:
        zeta, v = p.finite.zeta, p.finite.v
        if np.linalg.norm(zeta) > 1e-12:
            zi = c_inverse(zeta)
            return CPWPoint(finite=WPoint(zi, j_apply(spec, zi, v)))
        return CPWPoint.at_infinity(spec, WPoint(unit_c(spec.d), v))
    kind, v = infinity_split(spec, p)
    if kind == "one":
        return CPWPoint(finite=WPoint(np.zeros(spec.d), v))
    return p


def psi_swap(spec, j, p):
    """The linear involution of W interchanging the scalar factor with the
    j-th standard line of V, extended to infinity points."""
    if not 1 <= j <= spec.n:
        raise DimensionError("swap index out of range")
    vj = standard_v_basis(spec)[j - 1]
    frame_v = core.line_frame_v(spec, vj)
    d = spec.d
    mat = np.zeros((spec.dim_w, spec.dim_w))
    for i in range(d):
        e = np.zeros(d)
        e[i] = 1.0
        mat[d:, i] = j_apply(spec, e, vj)
    for i, b in enumerate(np.eye(spec.dim_v)):
        eta = frame_v @ b
        vperp = b - frame_v.T @ eta
        mat[:d, d + i] = eta
        mat[d:, d + i] = vperp
    if p.is_finite:
        x = mat @ p.finite.to_vector()
        return CPWPoint(finite=WPoint.from_vector(spec, x))
    return CPWPoint(line=CLine(p.line.frame @ mat.T))


def phi_j(spec, j, p):
    """The involutive chart attached to index j: index 0 inverts the
    scalar, index n+1 is the identity, the rest conjugate the swap by
    the scalar inversion."""
    if j == spec.n + 1:
        return p
    if j == 0:
        return phi0(spec, p)
    return phi0(spec, psi_swap(spec, j, phi0(spec, p)))


def chart_cover_index(spec, p):
    """The smallest chart index whose image contains p."""
    if p.is_finite:
        return spec.n + 1
    frame = p.line.frame
    if np.linalg.norm(frame[:, :spec.d]) > INF_TOL:
        return 0
    for j in range(1, spec.n + 1):
        block = frame[:, spec.d + (j - 1) * spec.d:spec.d + j * spec.d]
        if np.linalg.norm(block) > INF_TOL:
            return j
    raise core.ResidualError("line escapes the covering")


def hopf(spec, w):
    """Quotient map of the unit sphere onto the space of lines."""
    if abs(w.norm() - 1.0) > 1e-9:
        raise ValueError("base point must be unit")
    return CPWPoint(line=cline_through(spec, w))


class AffineClosure:
    """The closure of w0 + E: the affine part plus the lines of E at
    infinity."""

    def __init__(self, w0, subspace):
        self.w0 = w0
        self.subspace = subspace

    def infinity_points(self):
        return [CPWPoint(line=line) for line in self.subspace.clines]

    def contains(self, spec, p, tol=1e-8):
        proj = self.subspace.projector()
        if p.is_finite:
            delta = p.finite.to_vector() - self.w0.to_vector()
            return np.linalg.norm(delta - proj @ delta) < tol
        frame = p.line.frame
        return np.abs(frame - frame @ proj).max() < tol


def closure_of_affine(spec, w0, subspace):
    if not isinstance(subspace, CSubspace):
        raise ValueError("subspace must be a sum of C-lines")
    return AffineClosure(w0, subspace)
