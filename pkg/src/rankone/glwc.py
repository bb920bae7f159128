"""The group of invertible line-preserving maps of W: membership test,
the triangular normal form for flag-preserving elements, the unipotent
subgroup N, and the KAN / KAK decompositions."""

import numpy as np

from . import core
from .core import (DimensionError, ResidualError, c_inverse, j_apply,
                   j_matrix, mult_v, unit_c)
from .wspace import (KMatrix, WPoint, cline_through, is_k_member, k_to_frame,
                     onb_cbasis, standard_v_basis)

COND_LIMIT = 1e12


class GLWCElem:
    """An invertible matrix on W mapping C-lines to C-lines."""

    def __init__(self, mat):
        self.mat = np.asarray(mat, dtype=float)

    def apply(self, w):
        if isinstance(w, WPoint):
            x = self.mat @ w.to_vector()
            return WPoint(x[:len(w.zeta)], x[len(w.zeta):])
        return self.mat @ np.asarray(w, dtype=float)

    def inverse(self):
        return GLWCElem(np.linalg.inv(self.mat))

    def to_json_dict(self):
        return {"mat": self.mat.tolist()}


class LambdaMatrix:
    """Strictly lower triangular (n+1) x (n+1) array of scalar entries
    (unit diagonal implicit), parametrizing the unipotent group N."""

    def __init__(self, entries):
        self.entries = np.asarray(entries, dtype=float)
        m, m2, d = self.entries.shape
        if m != m2:
            raise DimensionError("entries must be square in the block index")
        for j in range(m):
            for k in range(j, m):
                if np.linalg.norm(self.entries[j, k]) > 0:
                    raise ValueError("entries must be strictly lower"
                                     " triangular")

    @classmethod
    def zero(cls, spec):
        return cls(np.zeros((spec.n + 1, spec.n + 1, spec.d)))

    def to_json_dict(self):
        return {"lambda": self.entries.tolist()}

    @classmethod
    def from_json_dict(cls, data):
        return cls(np.asarray(data["lambda"], dtype=float))


class ADiag:
    """Positive scalar dilation per standard C-line of W."""

    def __init__(self, t):
        self.t = np.asarray(t, dtype=float)
        if np.any(self.t <= 0):
            raise ValueError("dilation factors must be positive")

    def as_matrix(self, spec):
        scales = np.repeat(self.t, spec.d)
        return np.diag(scales)

    def inverse(self):
        return ADiag(1.0 / self.t)

    def to_json_dict(self):
        return {"t": self.t.tolist()}


def _line_image_projector(mat, frame):
    """Projector onto the image of the line with the given frame."""
    image = frame @ mat.T
    u, sv, vt = np.linalg.svd(image, full_matrices=False)
    return vt.T @ vt


def is_glwc(spec, mat, samples=20, seed=0, tol=1e-8):
    """True iff the matrix is invertible and maps sampled C-lines to
    C-lines (its adjoint is tested as well)."""
    mat = np.asarray(mat, dtype=float)
    dim_w = spec.dim_w
    if mat.shape != (dim_w, dim_w):
        raise DimensionError("matrix size does not match W")
    if np.linalg.cond(mat) > COND_LIMIT:
        raise np.linalg.LinAlgError("matrix is numerically singular")
    rng = np.random.default_rng(seed)
    for cand in (mat, mat.T):
        for i in range(samples):
            x = core.sample_sphere(rng, dim_w)
            if i % 4 == 0 and spec.n >= 1:
                x[:spec.d] = 0.0
                x /= np.linalg.norm(x)
            frame = cline_through(spec, WPoint.from_vector(spec, x)).frame
            p1 = _line_image_projector(cand, frame)
            y = cand @ x
            p2 = cline_through(spec, WPoint.from_vector(spec, y)).projector()
            if np.abs(p1 - p2).max() > tol:
                return False
    return True


def triple_form(spec, h, samples=20, seed=0, tol=1e-9):
    """Split a V-preserving element into (alpha, phi, v0): its scalar
    block, its V block and the shift h(1,0) = (alpha(1), alpha(1) v0).
    Validates that alpha is a scalar multiple of an orthogonal map and
    that phi intertwines the scalar actions."""
    mat = h.mat if isinstance(h, GLWCElem) else np.asarray(h, dtype=float)
    d = spec.d
    if np.abs(mat[:d, d:]).max() > 1e-10:
        raise ValueError("element does not preserve V")
    alpha = mat[:d, :d]
    phi = mat[d:, d:]
    alpha1 = alpha[:, 0]
    scale = np.linalg.norm(alpha1)
    if scale <= core.ALG_TOL:
        raise ResidualError("degenerate scalar block")
    ortho = alpha / scale
    if np.abs(ortho.T @ ortho - np.eye(d)).max() > tol:
        raise ResidualError("scalar block is not conformal")
    v0 = j_apply(spec, c_inverse(alpha1), mat[d:, 0])
    rng = np.random.default_rng(seed)
    inv1 = c_inverse(alpha1)
    for _ in range(samples):
        zeta = rng.standard_normal(d)
        v = core.sample_sphere(rng, spec.dim_v)
        phiv = phi @ v
        beta = mult_v(spec, alpha @ zeta, inv1, phiv)
        lhs = phi @ j_apply(spec, zeta, v)
        if np.linalg.norm(lhs - j_apply(spec, beta, phiv)) > tol * scale:
            raise ResidualError("V block does not intertwine the scalars")
    return alpha, phi, v0


def n_from_lambda(spec, lam):
    """The unipotent element attached to a strictly lower triangular
    scalar matrix: the block-j output of block-k input zeta is
    zeta . lambda_{jk} at the base point u_j."""
    if spec.n < 1:
        raise DimensionError("needs a nontrivial V")
    entries = lam.entries
    d = spec.d
    basis = standard_v_basis(spec)
    dim_w = spec.dim_w
    mat = np.eye(dim_w)
    for k in range(spec.n + 1):
        for j in range(k + 1, spec.n + 1):
            lamjk = entries[j, k]
            if np.linalg.norm(lamjk) == 0.0:
                continue
            uj = basis[j - 1]
            for i in range(d):
                e = np.zeros(d)
                e[i] = 1.0
                coeff = mult_v(spec, e, lamjk, uj)
                col = k * d + i
                mat[d * j:d * (j + 1), col] += j_apply(spec, coeff,
                                                       uj)[(j - 1) * d:j * d]
    return GLWCElem(mat)


def lambda_from_n(spec, mat, tol=1e-8):
    """Read the triangular data back off a unipotent matrix: the images
    of the standard basis points carry the entries directly."""
    mat = np.asarray(mat, dtype=float)
    d = spec.d
    basis = standard_v_basis(spec)
    entries = np.zeros((spec.n + 1, spec.n + 1, d))
    for k in range(spec.n + 1):
        col = mat[:, k * d]
        for j in range(k + 1, spec.n + 1):
            frame = core.line_frame_v(spec, basis[j - 1])
            entries[j, k] = frame @ col[d:]
    lam = LambdaMatrix(entries)
    rebuilt = n_from_lambda(spec, lam)
    if np.abs(rebuilt.mat - mat).max() > tol:
        raise ResidualError("matrix is not unipotent of the expected form")
    return lam


def _flag_adapted_reps(spec, mat):
    """One unit representative per line of the frame adapted to the image
    of the standard decreasing flag."""
    d = spec.d
    dim_w = spec.dim_w
    projectors = []
    for j in range(spec.n + 1):
        cols = mat[:, j * d:]
        u, sv, vt = np.linalg.svd(cols, full_matrices=False)
        projectors.append(u @ u.T)
    projectors.append(np.zeros((dim_w, dim_w)))
    reps = []
    for j in range(spec.n + 1):
        diff = projectors[j] - projectors[j + 1]
        vals, vecs = np.linalg.eigh(diff)
        rows = vecs[:, vals > 0.5].T
        if rows.shape[0] != d:
            raise ResidualError("flag step does not have scalar dimension")
        line_reps = onb_cbasis(spec, rows)
        if len(line_reps) != 1:
            raise ResidualError("flag step is not a single line")
        reps.append(line_reps[0])
    return reps


def iwasawa(spec, g, tol=1e-9):
    """Factor g = k a n with k line-preserving orthogonal, a a positive
    dilation per standard line and n unipotent."""
    if spec.n < 1:
        raise DimensionError("needs a nontrivial V")
    mat = g.mat if isinstance(g, GLWCElem) else np.asarray(g, dtype=float)
    if not is_glwc(spec, mat):
        raise ValueError("matrix does not preserve C-lines")
    d = spec.d
    reps = _flag_adapted_reps(spec, mat)
    k = k_to_frame(spec, reps)
    h = k.mat.T @ mat
    alpha, phi, v0 = triple_form(spec, h)
    basis = standard_v_basis(spec)
    entries = np.zeros((spec.n + 1, spec.n + 1, d))
    frames = [core.line_frame_v(spec, u) for u in basis]
    etas = []
    for j in range(1, spec.n + 1):
        phi_uj = phi @ basis[j - 1]
        etas.append(frames[j - 1] @ phi_uj)
    for j in range(1, spec.n + 1):
        entries[j, 0] = frames[j - 1] @ v0
        for k_idx in range(1, j):
            xi = frames[j - 1] @ (phi @ basis[k_idx - 1])
            entries[j, k_idx] = core.divide(spec, xi, etas[k_idx - 1],
                                            basis[j - 1], side="right")
    lam = LambdaMatrix(entries)
    nmat = n_from_lambda(spec, lam).mat
    # n^-1 h is scalar-times-orthogonal on each standard line
    t = np.empty(spec.n + 1)
    t[0] = np.linalg.norm(alpha[:, 0])
    for j in range(1, spec.n + 1):
        t[j] = np.linalg.norm(etas[j - 1])
    a = ADiag(t)
    amat = a.as_matrix(spec)
    ainv = a.inverse().as_matrix(spec)
    mmat = ainv @ np.linalg.solve(nmat, h)
    if not is_k_member(spec, mmat):
        raise ResidualError("residual factor is not line-orthogonal")
    k_final = KMatrix(k.mat @ mmat)
    n_final = ainv @ (mmat.T @ nmat @ mmat) @ amat
    lam_final = lambda_from_n(spec, n_final)
    recomposed = k_final.mat @ amat @ n_final
    if np.abs(recomposed - mat).max() > tol * max(1.0, np.abs(mat).max()):
        raise ResidualError("factorization residual too large")
    return k_final, a, n_from_lambda(spec, lam_final)


def cartan(spec, g, gap=1e-8, tol=1e-9):
    """Factor g = k1 a k2 with orthogonal line-preserving k1, k2 and a a
    positive dilation, via the eigenspaces of g^T g (these are sums of
    C-lines); dilation entries are returned in descending order."""
    if spec.n < 1:
        raise DimensionError("needs a nontrivial V")
    mat = g.mat if isinstance(g, GLWCElem) else np.asarray(g, dtype=float)
    if not is_glwc(spec, mat):
        raise ValueError("matrix does not preserve C-lines")
    vals, vecs = np.linalg.eigh(mat.T @ mat)
    order = np.argsort(vals)[::-1]
    vals = vals[order]
    vecs = vecs[:, order]
    reps = []
    t = []
    start = 0
    for stop in range(1, len(vals) + 1):
        if stop < len(vals) and abs(vals[stop] - vals[start]) \
                <= gap * max(vals[start], 1e-30):
            continue
        group = vecs[:, start:stop].T
        group_reps = onb_cbasis(spec, group)
        reps.extend(group_reps)
        t.extend([np.sqrt(vals[start])] * len(group_reps))
        start = stop
    a = ADiag(np.asarray(t))
    kf = k_to_frame(spec, reps)
    k2 = KMatrix(kf.mat.T)
    k1mat = mat @ kf.mat @ a.inverse().as_matrix(spec)
    if not is_k_member(spec, k1mat):
        raise ResidualError("left factor is not line-orthogonal")
    k1 = KMatrix(k1mat)
    recomposed = k1.mat @ a.as_matrix(spec) @ k2.mat
    if np.abs(recomposed - mat).max() > tol * max(1.0, np.abs(mat).max()):
        raise ResidualError("factorization residual too large")
    return k1, a, k2


def decomposition_json(k, a, n_or_k2, spec, kind="kan"):
    if kind == "kan":
        lam = lambda_from_n(spec, n_or_k2.mat)
        return {"a": a.t.tolist(), "k": k.mat.tolist(),
                "n": lam.to_json_dict()}
    return {"a": a.t.tolist(), "k1": k.mat.tolist(),
            "k2": n_or_k2.mat.tolist()}
