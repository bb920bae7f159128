"""The space W = C + V: points, C-lines and their frames, angles between
lines, and constructive generators of the group K of line-preserving
orthogonal maps."""

import numpy as np

from . import core
from .core import (ALG_TOL, DimensionError, ZeroDivisorError, c_inverse,
                   conj, j_apply, j_matrix, unit_c)

LINE_TOL = 1e-8
FRAME_TOL = 1e-10


class WPoint:
    """A point of W = C + V, stored as the pair (zeta, v)."""

    def __init__(self, zeta, v):
        self.zeta = np.asarray(zeta, dtype=float)
        self.v = np.asarray(v, dtype=float)

    @classmethod
    def from_vector(cls, spec, x):
        x = np.asarray(x, dtype=float)
        return cls(x[:spec.d], x[spec.d:])

    @classmethod
    def zero(cls, spec):
        return cls(np.zeros(spec.d), np.zeros(spec.dim_v))

    def to_vector(self):
        return np.concatenate([self.zeta, self.v])

    def norm(self):
        return np.linalg.norm(self.to_vector())

    def __repr__(self):
        return "WPoint(%r, %r)" % (self.zeta, self.v)


class CLine:
    """A d-dimensional line through 0 in W, stored as an orthonormal frame
    (d rows of length dim W)."""

    def __init__(self, frame):
        self.frame = np.asarray(frame, dtype=float)

    def projector(self):
        return self.frame.T @ self.frame

    def to_json_dict(self):
        return {"frame": self.frame.tolist()}

    @classmethod
    def from_json_dict(cls, data):
        return cls(np.asarray(data["frame"], dtype=float))


class CSubspace:
    """An orthogonal sum of C-lines through 0."""

    def __init__(self, clines):
        self.clines = list(clines)

    def projector(self):
        return sum(line.projector() for line in self.clines)


class KMatrix:
    """An orthogonal matrix on W mapping C-lines to C-lines."""

    def __init__(self, mat):
        self.mat = np.asarray(mat, dtype=float)

    def apply(self, w):
        if isinstance(w, WPoint):
            x = self.mat @ w.to_vector()
            return WPoint(x[:len(w.zeta)], x[len(w.zeta):])
        return self.mat @ np.asarray(w, dtype=float)

    def inverse(self):
        return KMatrix(self.mat.T)

    def to_json_dict(self):
        return {"mat": self.mat.tolist()}


def standard_v_basis(spec):
    """The standard orthonormal C-basis of V (one unit vector per block)."""
    out = []
    for j in range(spec.n):
        v = np.zeros(spec.dim_v)
        v[j * spec.d] = 1.0
        out.append(v)
    return out


def cline_through(spec, w):
    """The line through w: frame rows (e_i, e_i (zeta^-1 v)) normalized when
    the C-part is nonzero, else (0, gens[i] v / |v|)."""
    nz = np.linalg.norm(w.zeta)
    if w.norm() <= ALG_TOL:
        raise ZeroDivisorError("zero vector spans no line")
    rows = []
    if nz > ALG_TOL:
        if spec.n >= 1:
            u = j_apply(spec, c_inverse(w.zeta), w.v)
        else:
            u = np.zeros(0)
        scale = 1.0 / np.sqrt(1.0 + u @ u)
        for i in range(spec.d):
            e = np.zeros(spec.d)
            e[i] = 1.0
            tail = j_apply(spec, e, u) if spec.n >= 1 else np.zeros(0)
            rows.append(np.concatenate([e, tail]) * scale)
    else:
        frame_v = core.line_frame_v(spec, w.v)
        for i in range(spec.d):
            rows.append(np.concatenate([np.zeros(spec.d), frame_v[i]]))
    return CLine(np.stack(rows))


def lines_equal(l1, l2, tol=LINE_TOL):
    return np.abs(l1.projector() - l2.projector()).max() < tol


def cline_angle(spec, w, wp, samples=8, seed=0, tol=1e-10):
    """Angle between the lines through w and wp, as arccos of the constant
    ratio |P_{Cw} w''| / |w''| over w'' in the second line."""
    line = cline_through(spec, w)
    proj = line.projector()
    other = cline_through(spec, wp)
    rng = np.random.default_rng(seed)
    ratios = []
    for _ in range(samples):
        coeff = core.sample_sphere(rng, spec.d)
        x = other.frame.T @ coeff
        ratios.append(np.linalg.norm(proj @ x) / np.linalg.norm(x))
    ratios = np.array(ratios)
    if ratios.max() - ratios.min() > tol:
        raise core.ResidualError(
            "projection ratio is not constant on the line (spread %.3e)"
            % (ratios.max() - ratios.min()))
    return float(np.arccos(np.clip(ratios.mean(), 0.0, 1.0)))


def sigma_rot(spec, v0, theta):
    """Rotation by theta in the 'plane' spanned by the C-factor and the
    line through v0, extended by the identity on the rest of V."""
    if spec.n < 1:
        raise DimensionError("needs a nontrivial V")
    v0 = np.asarray(v0, dtype=float)
    if abs(np.linalg.norm(v0) - 1.0) > 1e-10:
        raise ValueError("base vector must be unit")
    c, s = np.cos(theta), np.sin(theta)
    frame_v = core.line_frame_v(spec, v0)
    dim_w = spec.d + spec.dim_v
    cols = []
    for i in range(spec.d):
        e = np.zeros(spec.d)
        e[i] = 1.0
        cols.append(np.concatenate([c * e, s * frame_v[i]]))
    for b in np.eye(spec.dim_v):
        eta = frame_v @ b
        vperp = b - frame_v.T @ eta
        head = -s * eta
        tail = c * (frame_v.T @ eta) + vperp
        cols.append(np.concatenate([head, tail]))
    mat = np.column_stack(cols)
    assert mat.shape == (dim_w, dim_w)
    return KMatrix(mat)


def _reflection_on_c(z):
    """eta -> z eta z^-1 on C for a unit z in C': fixes 1 and z, negates
    the rest of C'."""
    d = len(z)
    e0 = unit_c(d)
    return 2.0 * (np.outer(e0, e0) + np.outer(z, z)) - np.eye(d)


def m_alpha(spec, word):
    """The automorphism pair attached to a product of unit imaginary
    scalars: composed reflections on C, composed generator actions on V.
    Fixes the point (1, 0); the empty word gives the identity."""
    if spec.d < 2:
        raise DimensionError("needs imaginary directions")
    dim_w = spec.d + spec.dim_v
    total = np.eye(dim_w)
    for z in word:
        z = np.asarray(z, dtype=float)
        if abs(np.linalg.norm(z) - 1.0) > 1e-10 or abs(z[0]) > 1e-12:
            raise ValueError("word entries must be unit imaginary scalars")
        block = np.zeros((dim_w, dim_w))
        block[:spec.d, :spec.d] = _reflection_on_c(z)
        if spec.n >= 1:
            block[spec.d:, spec.d:] = j_matrix(spec, z)
        total = total @ block
    return KMatrix(total)


def conj_automorphism(spec):
    """For d = 2 only: complex conjugation on C and blockwise conjugation
    on V, an automorphism not reachable from imaginary words."""
    if spec.d != 2:
        raise DimensionError("defined for d = 2")
    dim_w = spec.d + spec.dim_v
    mat = np.zeros((dim_w, dim_w))
    mat[:2, :2] = np.diag([1.0, -1.0])
    for j in range(spec.n):
        k = spec.d + 2 * j
        mat[k:k + 2, k:k + 2] = np.diag([1.0, -1.0])
    return KMatrix(mat)


def k_to_point(spec, w, tol=1e-10):
    """An element of K mapping (1, 0) to the given unit point, built from
    two sigma rotations (a Givens rotation of C when V = 0)."""
    x = w.to_vector()
    if abs(np.linalg.norm(x) - 1.0) > 1e-9:
        raise ValueError("target must be unit")
    if spec.n == 0:
        mat = _rotation_to(unit_c(spec.d), w.zeta)
        k = KMatrix(mat)
    else:
        c = np.linalg.norm(w.zeta)
        s = np.linalg.norm(w.v)
        theta = np.arctan2(s, c)
        zeta1 = w.zeta / c if c > ALG_TOL else unit_c(spec.d)
        v1 = w.v / s if s > ALG_TOL else standard_v_basis(spec)[0]
        u0 = j_apply(spec, c_inverse(zeta1), v1)
        k = KMatrix(sigma_rot(spec, u0, theta - np.pi / 2).mat
                    @ sigma_rot(spec, v1, np.pi / 2).mat)
    image = k.apply(WPoint(unit_c(spec.d), np.zeros(spec.dim_v)))
    if np.linalg.norm(image.to_vector() - x) > tol:
        raise core.ResidualError("transitive construction failed")
    return k


def _rotation_to(a, b):
    """Orthogonal map rotating unit a to unit b in their common plane and
    fixing the orthogonal complement."""
    a = a / np.linalg.norm(a)
    b = b / np.linalg.norm(b)
    c = b - (a @ b) * a
    nc = np.linalg.norm(c)
    if nc < 1e-14:
        if a @ b > 0:
            return np.eye(len(a))
        if len(a) == 1:
            return -np.eye(1)
        # antipodal: rotate by pi in a plane containing a
        q = np.zeros(len(a))
        q[int(np.argmin(np.abs(a)))] = 1.0
        q = q - (a @ q) * a
        q /= np.linalg.norm(q)
        return np.eye(len(a)) - 2.0 * np.outer(a, a) - 2.0 * np.outer(q, q)
    c /= nc
    cos, sin = a @ b, nc
    rot = np.eye(len(a)) + (cos - 1.0) * (np.outer(a, a) + np.outer(c, c)) \
        + sin * (np.outer(c, a) - np.outer(a, c))
    return rot


def is_k_member(spec, mat, samples=20, seed=0, tol=LINE_TOL):
    """Orthogonality plus line preservation on sampled lines."""
    mat = np.asarray(mat, dtype=float)
    dim_w = spec.d + spec.dim_v
    if mat.shape != (dim_w, dim_w):
        raise DimensionError("matrix size does not match W")
    if np.abs(mat.T @ mat - np.eye(dim_w)).max() > 1e-10:
        return False
    rng = np.random.default_rng(seed)
    for i in range(samples):
        x = core.sample_sphere(rng, dim_w)
        if i % 4 == 0 and spec.n >= 1:
            x[:spec.d] = 0.0
            x /= np.linalg.norm(x)
        w = WPoint(x[:spec.d], x[spec.d:])
        line = cline_through(spec, w)
        mapped = line.frame @ mat.T
        p1 = mapped.T @ mapped
        p2 = cline_through(spec, WPoint.from_vector(spec, mat @ x)).projector()
        if np.abs(p1 - p2).max() > tol:
            return False
    return True


def _is_c_closed(spec, basis, tol=1e-9):
    proj = basis.T @ basis
    for row in basis:
        frame = cline_through(spec, WPoint.from_vector(spec, row)).frame
        if np.abs(frame - frame @ proj).max() > tol:
            return False
    return True


def onb_cbasis(spec, subspace=None):
    """Greedy orthonormal C-basis of a C-closed subspace (all of W when
    omitted): peel off one line at a time, always picking the direction of
    largest residual norm."""
    dim_w = spec.d + spec.dim_v
    if subspace is None:
        basis = np.eye(dim_w)
    elif isinstance(subspace, CSubspace):
        frames = [line.frame for line in subspace.clines]
        basis = np.vstack(frames)
    else:
        basis = np.asarray(subspace, dtype=float)
        u, sv, vt = np.linalg.svd(basis, full_matrices=False)
        basis = vt[sv > 1e-10]
    if not _is_c_closed(spec, basis):
        raise ValueError("subspace is not C-closed")
    remaining = basis.T @ basis
    reps = []
    while np.trace(remaining) > 0.5:
        vals, vecs = np.linalg.eigh(remaining)
        cand = vecs[:, -1]
        w = WPoint.from_vector(spec, cand)
        reps.append(w)
        remaining = remaining - cline_through(spec, w).projector()
    return reps


def onb_cbasis_v(spec, first=None):
    """Orthonormal C-basis of V, optionally starting at a given unit
    vector."""
    reps = []
    remaining = np.eye(spec.dim_v)
    if first is not None:
        first = np.asarray(first, dtype=float)
        reps.append(first)
        frame = core.line_frame_v(spec, first)
        remaining = remaining - frame.T @ frame
    while np.trace(remaining) > 0.5:
        vals, vecs = np.linalg.eigh(remaining)
        cand = vecs[:, -1]
        reps.append(cand)
        frame = core.line_frame_v(spec, cand)
        remaining = remaining - frame.T @ frame
    return reps


def _m1_basis_map(spec, src_basis, dst_basis):
    """The automorphism fixing C pointwise that maps one orthonormal
    C-basis of V to another (associative case)."""
    psi = np.zeros((spec.dim_v, spec.dim_v))
    for vs, vd in zip(src_basis, dst_basis):
        fs = core.line_frame_v(spec, vs)
        fd = core.line_frame_v(spec, vd)
        psi += fd.T @ fs
    dim_w = spec.d + spec.dim_v
    mat = np.eye(dim_w)
    mat[spec.d:, spec.d:] = psi
    return KMatrix(mat)


def _pin_map_fixing(spec, z0, v_from, v_to, rng):
    """A word element fixing the unit imaginary z0 and mapping v_from to
    v_to (non-associative case): beta = z2 z1^{-1} with v_j = z_j v for a
    base point v orthogonal to both vectors and their z0-images."""
    constraints = [v_from, v_to]
    if z0 is not None:
        constraints += [j_apply(spec, z0, v_from), j_apply(spec, z0, v_to)]
    cmat = np.stack(constraints)
    for _ in range(50):
        v = core.sample_sphere(rng, spec.dim_v)
        v = v - cmat.T @ np.linalg.lstsq(cmat.T, v, rcond=None)[0]
        nv = np.linalg.norm(v)
        if nv > 1e-3:
            v /= nv
            break
    else:
        raise core.ResidualError("no base point orthogonal to constraints")
    frame = core.line_frame_v(spec, v)
    z1 = frame @ v_from
    z2 = frame @ v_to
    if abs(z1[0]) > 1e-9 or abs(z2[0]) > 1e-9:
        raise core.ResidualError("coordinates not imaginary as expected")
    z1[0] = z2[0] = 0.0
    return m_alpha(spec, [z2 / np.linalg.norm(z2), -z1 / np.linalg.norm(z1)])


def m_mapping_pair(spec, z1, v1, z2, v2, seed=0, tol=1e-9):
    """An automorphism (element of K fixing (1,0)) mapping the unit pair
    (z1, v1) in C' x V to (z2, v2), built from reflections and basis
    remaps."""
    rng = np.random.default_rng(seed)
    z1 = np.asarray(z1, dtype=float)
    z2 = np.asarray(z2, dtype=float)
    v1 = np.asarray(v1, dtype=float)
    v2 = np.asarray(v2, dtype=float)
    dim_w = spec.d + spec.dim_v
    if np.linalg.norm(z1 - z2) < 1e-12:
        first = KMatrix(np.eye(dim_w))
    elif np.linalg.norm(z1 + z2) < 1e-12:
        if spec.d >= 3:
            b = core.sample_sphere(rng, spec.d)
            b[0] = 0.0
            b -= (b @ z1) / (z1 @ z1) * z1
            b /= np.linalg.norm(b)
            first = m_alpha(spec, [b])
        else:
            first = conj_automorphism(spec)
    else:
        b = z1 + z2
        first = m_alpha(spec, [b / np.linalg.norm(b)])
    v1m = first.apply(WPoint(np.zeros(spec.d), v1)).v
    if spec.d <= 4:
        src = onb_cbasis_v(spec, first=v1m)
        dst = onb_cbasis_v(spec, first=v2)
        second = _m1_basis_map(spec, src, dst)
    else:
        second = _pin_map_fixing(spec, z2, v1m, v2, rng)
    m = KMatrix(second.mat @ first.mat)
    got = m.apply(WPoint(z1, v1))
    err = max(np.linalg.norm(got.zeta - z2), np.linalg.norm(got.v - v2))
    if err > tol:
        raise core.ResidualError("pair transitivity failed (error %.3e)" % err)
    return m


def k_to_frame(spec, targets, tol=1e-9):
    """An element of K mapping the standard orthonormal C-basis of W
    ((1,0) followed by the standard V representatives) to the given one."""
    k1 = k_to_point(spec, targets[0])
    if spec.n == 0:
        return k1
    inv = k1.inverse()
    pulled = [inv.apply(t) for t in targets[1:]]
    for p in pulled:
        if np.linalg.norm(p.zeta) > 1e-8:
            raise core.ResidualError("frame is not orthonormal as a C-basis")
    std = standard_v_basis(spec)
    if spec.d <= 4:
        m = _m1_basis_map(spec, std, [p.v for p in pulled])
    else:
        rng = np.random.default_rng(7)
        m = _pin_map_fixing(spec, None, std[0], pulled[0].v, rng)
    k = KMatrix(k1.mat @ m.mat)
    for j, t in enumerate(targets):
        src = unit_c(spec.d) if j == 0 else np.zeros(spec.d)
        srcv = np.zeros(spec.dim_v)
        if j >= 1:
            srcv = std[j - 1]
        got = k.apply(WPoint(src if j == 0 else np.zeros(spec.d), srcv))
        if np.linalg.norm(got.to_vector() - t.to_vector()) > tol:
            raise core.ResidualError("frame construction failed at entry %d" % j)
    return k


def m_t_family(spec, z, t):
    """The automorphism acting on scalars as conjugation by
    (cos t) 1 + (sin t) z.  For d = 2 the scalar part is trivial and the
    vector part is the scalar action itself; for d >= 3 it is the two-letter
    word [y, -(cos t) y + (sin t) (z . y)] with y a unit imaginary
    orthogonal to z, which reproduces the conjugation on C and sends v1 to
    ((cos t) 1 + (sin t) z) v1."""
    if spec.n < 1:
        raise DimensionError("needs a nontrivial V")
    if spec.d < 2:
        raise DimensionError("needs imaginary directions")
    z = np.asarray(z, dtype=float)
    if abs(np.linalg.norm(z) - 1.0) > 1e-10 or abs(z[0]) > 1e-12:
        raise ValueError("z must be unit imaginary")
    if spec.d == 2:
        eta = np.cos(t) * unit_c(spec.d) + np.sin(t) * z
        dim_w = spec.d + spec.dim_v
        mat = np.eye(dim_w)
        mat[spec.d:, spec.d:] = j_matrix(spec, eta)
        return KMatrix(mat)
    y = np.zeros(spec.d)
    y[1 + int(np.argmin(np.abs(z[1:])))] = 1.0
    y = y - (y @ z) * z
    y /= np.linalg.norm(y)
    v1 = standard_v_basis(spec)[0]
    p = core.mult_v(spec, z, y, v1)
    u2 = -np.cos(t) * y + np.sin(t) * p
    u2 /= np.linalg.norm(u2)
    return m_alpha(spec, [y, u2])


def rho_t(spec, z, t):
    """Conjugate of the one-parameter automorphism family by the first
    sigma rotation; maps (1,0) to ((cos t) 1 + (sin t) z, 0)."""
    v1 = standard_v_basis(spec)[0]
    sig = sigma_rot(spec, v1, np.pi / 2)
    inner = m_t_family(spec, z, t)
    return KMatrix(sig.inverse().mat @ inner.mat @ sig.mat)
