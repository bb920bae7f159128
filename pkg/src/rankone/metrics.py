"""Riemannian structure of the compact model and of the unit-ball
model: metric tensors, geodesics, distance, curvature, volume, Jacobi
field profiles, totally geodesic submanifolds and the sphere double
cover of the real projective case."""

import math

import numpy as np
from scipy.special import roots_jacobi

from . import core, transforms
from .core import DimensionError, ResidualError, j_apply, j_matrix, unit_c
from .cpw import CPWPoint
from .wspace import (KMatrix, WPoint, cline_through, is_k_member,
                     k_to_point, standard_v_basis)

ORIGIN_TOL = 1e-12


class BallBoundaryError(ValueError):
    """A ball-model operation was requested at or beyond the unit
    sphere."""


class NoClosedSubalgebraError(ValueError):
    """The requested scalar sub-dimension does not span a closed
    subalgebra."""


class MetricModel:
    """A choice of model: 'compact' for the closed space, 'ball' for
    the open unit ball with the dual metric."""

    KINDS = ("compact", "ball")

    def __init__(self, kind, spec):
        if kind not in self.KINDS:
            raise ValueError("unknown model kind %r" % kind)
        self.kind = kind
        self.spec = spec

    @property
    def sign(self):
        return 1.0 if self.kind == "compact" else -1.0


class TangentVec:
    """A tangent vector: a base point together with a direction in the
    ambient coordinates."""

    def __init__(self, base, direction):
        self.base = base
        self.dir = np.asarray(direction, dtype=float)


def metric_inner(model, w, x, y):
    """The model metric at w applied to ambient vectors x, y: the
    component along the C-line of w is scaled by (1 +/- |w|^2)^-2, the
    orthogonal component by (1 +/- |w|^2)^-1."""
    spec = model.spec
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    r2 = w.norm() ** 2
    if model.kind == "ball" and r2 >= 1.0:
        raise BallBoundaryError("metric undefined outside the open ball")
    if r2 < ORIGIN_TOL:
        return float(x @ y)
    f = 1.0 + model.sign * r2
    proj = cline_through(spec, w).projector()
    xp, yp = proj @ x, proj @ y
    return float((xp @ yp) / f ** 2 + ((x - xp) @ (y - yp)) / f)


def metric_norm(model, w, x):
    return math.sqrt(metric_inner(model, w, x, x))


def exp0(model, x, t):
    """Geodesic from the origin with unit initial vector x, evaluated
    at time t."""
    spec = model.spec
    x = np.asarray(x, dtype=float)
    if abs(np.linalg.norm(x) - 1.0) > 1e-9:
        raise ValueError("initial vector must be unit")
    if model.kind == "ball":
        return CPWPoint(finite=WPoint.from_vector(spec, np.tanh(t) * x))
    if abs(math.cos(t)) < ORIGIN_TOL:
        return CPWPoint.at_infinity(spec, WPoint.from_vector(spec, x))
    return CPWPoint(finite=WPoint.from_vector(spec, math.tan(t) * x))


def _as_cpw(spec, p):
    if isinstance(p, WPoint):
        return CPWPoint(finite=p)
    return p


def distance(model, p, q):
    """Geodesic distance, computed by transporting p to the origin with
    an explicit isometry word."""
    spec = model.spec
    p = _as_cpw(spec, p)
    q = _as_cpw(spec, q)
    if model.kind == "ball":
        if not (p.is_finite and q.is_finite):
            raise BallBoundaryError("ball distance needs finite points")
        rp, rq = p.finite.norm(), q.finite.norm()
        if rp >= 1.0 or rq >= 1.0:
            raise BallBoundaryError("points must lie in the open ball")
        if rp < ORIGIN_TOL:
            word = []
        else:
            k = k_to_point(
                spec, WPoint(p.finite.zeta / rp, p.finite.v / rp))
            word = [transforms.a_prim(np.arctanh(rp)), transforms.k_prim(k)]
        moved = transforms.apply_word(
            spec, transforms.word_inverse(spec, word), q)
        return float(np.arctanh(moved.finite.norm()))
    word = transforms.isometry_from_0_to(spec, p)
    moved = transforms.apply_word(
        spec, transforms.word_inverse(spec, word), q)
    if not moved.is_finite:
        return math.pi / 2.0
    return float(np.arctan(moved.finite.norm()))


def _check_orthonormal(x, y, tol=1e-8):
    if abs(np.linalg.norm(x) - 1.0) > tol or \
            abs(np.linalg.norm(y) - 1.0) > tol or abs(x @ y) > tol:
        raise ValueError("vectors must be orthonormal")


def sectional_curvature(model, x, y):
    """Sectional curvature at the origin of the plane spanned by the
    orthonormal pair (x, y): 1 + 3 p^2 with p the component of y along
    the C-line of x; the ball model gives the negative."""
    spec = model.spec
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    _check_orthonormal(x, y)
    proj = cline_through(spec, WPoint.from_vector(spec, x)).projector()
    p2 = float(y @ proj @ y)
    return model.sign * (1.0 + 3.0 * p2)


def circle_length_closed(spec, x, y, r):
    """Closed form for the length of the geodesic circle of radius r in
    the plane of the orthonormal pair (x, y), compact model."""
    proj = cline_through(spec, WPoint.from_vector(spec, x)).projector()
    p2 = float(y @ proj @ y)
    tr = math.tan(r)
    return 2.0 * math.pi * tr / (1.0 + tr ** 2) * \
        math.sqrt(1.0 + (1.0 - p2) * tr ** 2)


def circle_length_numeric(spec, x, y, r, samples=64):
    """Arc length of theta -> tan(r)(cos theta x + sin theta y) under
    the compact metric, by the trapezoidal rule on the periodic
    integrand."""
    model = MetricModel("compact", spec)
    tr = math.tan(r)
    thetas = np.linspace(0.0, 2.0 * math.pi, samples, endpoint=False)
    speeds = np.empty(samples)
    for i, th in enumerate(thetas):
        pt = WPoint.from_vector(
            spec, tr * (math.cos(th) * x + math.sin(th) * y))
        vel = tr * (-math.sin(th) * x + math.cos(th) * y)
        speeds[i] = metric_norm(model, pt, vel)
    return float(speeds.sum() * 2.0 * math.pi / samples)


def curvature_circle_estimate(spec, x, y, r, agree_tol=1e-8):
    """Curvature estimate from the circumference deficit of small
    geodesic circles, Richardson-extrapolated over radii r and r/2.

    The closed-form and numerically integrated circle lengths must
    agree; their mismatch raises an error rather than being averaged.
    """
    if not 0.0 < r < 0.5:
        raise ValueError("radius out of the supported range")
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    _check_orthonormal(x, y)

    def estimate(rad):
        la = circle_length_closed(spec, x, y, rad)
        lb = circle_length_numeric(spec, x, y, rad)
        if abs(la - lb) > agree_tol:
            raise ResidualError("circle length routes disagree")
        return 3.0 / math.pi * (2.0 * math.pi * rad - la) / rad ** 3

    coarse = estimate(r)
    fine = estimate(r / 2.0)
    return (4.0 * fine - coarse) / 3.0


def volume(spec):
    """Closed-form total volume of the compact model."""
    m = spec.n + 1
    return math.gamma(spec.d / 2.0) / math.gamma((m + 1) * spec.d / 2.0) \
        * math.pi ** (m * spec.d / 2.0)


def volume_quadrature(spec, nodes=60):
    """Total volume by Gauss-Jacobi quadrature of the radial density
    after the rational substitution mapping the half line to (0, 1)."""
    m = spec.n + 1
    md = m * spec.d
    alpha = spec.d / 2.0 - 1.0
    beta = md / 2.0 - 1.0
    sphere = 2.0 * math.pi ** (md / 2.0) / math.gamma(md / 2.0)
    ts, ws = roots_jacobi(nodes, alpha, beta)
    total = 0.0
    for t, wgt in zip(ts, ws):
        u = (1.0 + t) / 2.0
        xval = u / (1.0 - u)
        density = xval ** (md / 2.0 - 1.0) * (1.0 + xval) ** (-(m + 1) * spec.d / 2.0)
        jac = 0.5 / (1.0 - u) ** 2
        weightless = density * jac / \
            ((1.0 - t) / 2.0) ** alpha / ((1.0 + t) / 2.0) ** beta
        total += wgt * weightless
    return sphere * total / 2.0 ** (alpha + beta + 1.0)


def _line_projector_of(spec, x):
    return cline_through(spec, WPoint.from_vector(spec, x)).projector()


def jacobi_profile(spec, x, y, t):
    """Metric norm at the geodesic point of the variation field tan(t) y
    along the geodesic of x; equals sin(2t)/2 when y lies in the C-line
    of x and sin(t) when the two C-lines are orthogonal."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    _check_orthonormal(x, y)
    proj = _line_projector_of(spec, x)
    inline = np.linalg.norm(proj @ y - y) < 1e-9
    if not inline:
        projy = _line_projector_of(spec, y)
        if np.abs(proj @ projy).max() > 1e-9:
            raise ValueError("direction mixes the two profile types")
    model = MetricModel("compact", spec)
    if t == 0.0:
        return 0.0
    pt = WPoint.from_vector(spec, math.tan(t) * x)
    return metric_norm(model, pt, math.tan(t) * y)


class TotallyGeodesicSpec:
    """A totally geodesic submanifold datum: the scalar and module
    sub-dimensions, an orthonormal frame of the subspace, the two
    isometric involutions fixing it, and the induced module."""

    def __init__(self, d0, n0, frame, reflection1, reflection2, submodule):
        self.d0 = d0
        self.n0 = n0
        self.frame = frame
        self.reflection1 = reflection1
        self.reflection2 = reflection2
        self.submodule = submodule


def totally_geodesic(spec, d0, n0):
    """The standard totally geodesic submanifold with scalar dimension
    d0 and module multiplicity n0, realized as the joint fixed set of a
    module-block reflection and a subalgebra-conjugation reflection."""
    d, n = spec.d, spec.n
    if not 0 <= n0 <= n:
        raise DimensionError("module multiplicity out of range")
    if n0 >= 1 and d0 not in (1, 2, 4, 8):
        raise NoClosedSubalgebraError("scalar sub-dimension must carry a "
                                      "division algebra")
    if not 1 <= d0 <= d:
        raise DimensionError("scalar sub-dimension out of range")
    if n0 >= 1 and d0 < d and 2 * d0 != d:
        raise NoClosedSubalgebraError("only index-two subalgebra "
                                      "reflections are realizable")
    basis_v = standard_v_basis(spec)
    # subalgebra closure of the leading d0 coordinates
    if n >= 1 and d0 < d:
        v1 = basis_v[0]
        eye = np.eye(d)
        for i in range(d0):
            for j in range(d0):
                prod = core.mult_v(spec, eye[i], eye[j], v1)
                if np.linalg.norm(prod[d0:]) > 1e-9:
                    raise NoClosedSubalgebraError(
                        "leading coordinates are not closed")
    # block reflection fixing the scalar factor and the first n0 blocks
    refl1 = np.eye(spec.dim_w)
    for j in range(n0, n):
        sl = slice(spec.d * (j + 1), spec.d * (j + 2))
        refl1[sl, sl] = -np.eye(spec.d)
    # subalgebra conjugation on the scalar factor, extended blockwise
    alpha_c = np.diag(np.concatenate([np.ones(d0), -np.ones(d - d0)]))
    refl2 = np.eye(spec.dim_w)
    refl2[:d, :d] = alpha_c
    for j in range(n):
        fj = core.line_frame_v(spec, basis_v[j])[:, j * d:(j + 1) * d]
        block = fj.T @ alpha_c @ fj
        sl = slice(spec.d * (j + 1), spec.d * (j + 2))
        refl2[sl, sl] = block
    for mat in (refl1, refl2):
        if not is_k_member(spec, mat):
            raise ResidualError("constructed reflection left the "
                                "isometry stabilizer")
    # orthonormal frame of the fixed subspace
    rows = []
    for i in range(d0):
        e = np.zeros(spec.dim_w)
        e[i] = 1.0
        rows.append(e)
    for j in range(n0):
        for i in range(d0):
            e = np.zeros(spec.dim_w)
            ei = np.zeros(d)
            ei[i] = 1.0
            e[d:] = j_apply(spec, ei, basis_v[j])
            rows.append(e)
    frame = np.array(rows)
    # induced module on the fixed subspace
    if n0 >= 1:
        vframe = frame[d0:, d:]
        gens = np.array([vframe @ j_matrix(spec, np.eye(d)[i]) @ vframe.T
                         for i in range(d0)])
        submodule = core.ModuleSpec(d0, n0, gens, j2_expected=True)
    else:
        submodule = core.ModuleSpec(
            d0, 0, np.zeros((d0, 0, 0)), j2_expected=False)
    return TotallyGeodesicSpec(d0, n0, frame, KMatrix(refl1),
                               KMatrix(refl2), submodule)


def double_cover(spec, w):
    """The two-to-one map from the sphere model onto the real projective
    model: w -> 2w/(1-|w|^2), an isometry up to the factor two."""
    if spec.d != 1 or spec.n < 1:
        raise DimensionError("target must be the real projective model")
    x = w.to_vector()
    if x.shape != (spec.dim_w,):
        raise DimensionError("source point has the wrong dimension")
    r2 = float(x @ x)
    if abs(r2 - 1.0) < 1e-12:
        raise ValueError("the unit sphere of the chart is excluded")
    y = 2.0 * x / (1.0 - r2)
    return WPoint.from_vector(spec, y)


def metric_pullback_error(model_src, model_dst, fmap, w, factor=1.0,
                          step=None):
    """Maximum absolute deviation between factor times the source metric
    at w and the pull-back of the destination metric through fmap,
    using central finite differences."""
    spec = model_src.spec
    x0 = w.to_vector()
    if step is None:
        step = 1e-5 * (1.0 + np.linalg.norm(x0))
    dim = len(x0)
    img0 = fmap(w)
    jac = np.zeros((len(img0.to_vector()), dim))
    for i in range(dim):
        e = np.zeros(dim)
        e[i] = step
        plus = fmap(WPoint.from_vector(spec, x0 + e)).to_vector()
        minus = fmap(WPoint.from_vector(spec, x0 - e)).to_vector()
        jac[:, i] = (plus - minus) / (2.0 * step)
    err = 0.0
    basis = np.eye(dim)
    for i in range(dim):
        for j in range(i, dim):
            src = factor * metric_inner(model_src, w, basis[i], basis[j])
            dst = metric_inner(model_dst, img0, jac[:, i], jac[:, j])
            err = max(err, abs(src - dst))
    return err


def curvature_report(spec, seed=0, samples=10, radius=0.02):
    """Curvature samples comparing the closed form with the circle
    estimate, as plain data for reports."""
    rng = np.random.default_rng(seed)
    model = MetricModel("compact", spec)
    out = []
    for _ in range(samples):
        x = core.sample_sphere(rng, spec.dim_w)
        y = rng.standard_normal(spec.dim_w)
        y -= (y @ x) * x
        y /= np.linalg.norm(y)
        exact = sectional_curvature(model, x, y)
        est = curvature_circle_estimate(spec, x, y, radius)
        out.append({"exact": exact, "estimate": est,
                    "gap": abs(exact - est)})
    return out
