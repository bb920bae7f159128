"""Isometries and collineations of the compactified space: the rotation
family b_theta, the hyperbolic family a_t, translations, transformation
words, the Cartan-type involution with its polarity, and the Cayley
picture of the ball model."""

import numpy as np

from . import core, glwc
from .core import DimensionError, ResidualError, c_inverse, j_apply, unit_c
from .cpw import CPWPoint, infinity_split, points_equal
from .glwc import ADiag, GLWCElem, LambdaMatrix, iwasawa, lambda_from_n
from .wspace import KMatrix, WPoint, cline_through, k_to_point

BRANCH_TOL = 1e-12
COND_LIMIT = 1e10


class ChartSingularityError(ArithmeticError):
    """The requested point falls in the excluded set of every usable
    chart for this computation."""


def _subalg_eval(zeta, func):
    """Evaluate a complex-rational function inside the commutative
    subalgebra spanned by the unit and zeta.

    The subalgebra is isomorphic to the complex numbers (the imaginary
    part squares to minus its norm), so the value is computed in C and
    mapped back along the imaginary direction of zeta.
    """
    re = zeta[0]
    xi = np.array(zeta, dtype=float)
    xi[0] = 0.0
    b = np.linalg.norm(xi)
    val = func(complex(re, b))
    out = np.zeros_like(xi)
    out[0] = val.real
    if b > 0.0:
        out += (val.imag / b) * xi
    return out


class Primitive:
    """One building block of a transformation word.

    kind is one of kmat, btheta, atime, translate, glmat, theta (a
    formal marker applying the involution to the rest of the word) and
    ttranslate (the involution image of a translation).
    """

    KINDS = ("kmat", "btheta", "atime", "translate", "glmat", "theta",
             "ttranslate")

    def __init__(self, kind, payload=None):
        if kind not in self.KINDS:
            raise ValueError("unknown primitive kind %r" % kind)
        self.kind = kind
        self.payload = payload

    def act(self, spec, p):
        if self.kind == "kmat":
            return _linear_act(spec, self.payload.mat, p)
        if self.kind == "glmat":
            return _linear_act(spec, self.payload.mat, p)
        if self.kind == "btheta":
            return b_theta_apply(spec, self.payload, p)
        if self.kind == "atime":
            return a_t_apply(spec, self.payload, p)
        if self.kind == "translate":
            if p.is_finite:
                x = p.finite.to_vector() + self.payload.to_vector()
                return CPWPoint(finite=WPoint.from_vector(spec, x))
            return p
        if self.kind == "ttranslate":
            return _theta_translate_apply(spec, self.payload, p)
        raise ValueError("the involution marker has no pointwise action")

    def inverse(self):
        if self.kind == "kmat":
            return Primitive("kmat", KMatrix(self.payload.mat.T))
        if self.kind == "glmat":
            return Primitive("glmat", self.payload.inverse())
        if self.kind == "btheta":
            return Primitive("btheta", -self.payload)
        if self.kind == "atime":
            return Primitive("atime", -self.payload)
        if self.kind == "translate":
            w = self.payload
            return Primitive("translate", WPoint(-w.zeta, -w.v))
        if self.kind == "ttranslate":
            w = self.payload
            return Primitive("ttranslate", WPoint(-w.zeta, -w.v))
        raise ValueError("cannot invert an involution marker in place")

    def to_json_dict(self):
        if self.kind in ("kmat", "glmat"):
            return {"kind": self.kind, "mat": self.payload.mat.tolist()}
        if self.kind == "btheta":
            return {"kind": "btheta", "theta": float(self.payload)}
        if self.kind == "atime":
            return {"kind": "atime", "t": float(self.payload)}
        if self.kind in ("translate", "ttranslate"):
            return {"kind": self.kind, "w": {"zeta": self.payload.zeta.tolist(),
                                             "v": self.payload.v.tolist()}}
        return {"kind": "theta"}

    @classmethod
    def from_json_dict(cls, data):
        kind = data["kind"]
        if kind == "kmat":
            return cls("kmat", KMatrix(np.array(data["mat"], dtype=float)))
        if kind == "glmat":
            return cls("glmat", GLWCElem(np.array(data["mat"], dtype=float)))
        if kind == "btheta":
            return cls("btheta", float(data["theta"]))
        if kind == "atime":
            return cls("atime", float(data["t"]))
        if kind in ("translate", "ttranslate"):
            return cls(kind, WPoint(np.array(data["w"]["zeta"], dtype=float),
                                    np.array(data["w"]["v"], dtype=float)))
        if kind == "theta":
            return cls("theta")
        raise ValueError("unknown primitive kind %r" % kind)


def k_prim(k):
    return Primitive("kmat", k)


def b_prim(theta):
    return Primitive("btheta", float(theta))


def a_prim(t):
    return Primitive("atime", float(t))


def translate_prim(w0):
    return Primitive("translate", w0)


def gl_prim(g):
    if isinstance(g, np.ndarray):
        g = GLWCElem(g)
    return Primitive("glmat", g)


def theta_prim():
    return Primitive("theta")


def _linear_act(spec, mat, p):
    if p.is_finite:
        return CPWPoint(finite=WPoint.from_vector(
            spec, mat @ p.finite.to_vector()))
    rep = mat @ p.line.frame[0]
    return CPWPoint.at_infinity(spec, WPoint.from_vector(spec, rep))


def b_theta_apply(spec, theta, p):
    """The rotation-type isometry family of the compact model, total on
    the compactification via the standard branch extensions."""
    s, c = np.sin(theta), np.cos(theta)
    if p.is_finite:
        zeta, v = p.finite.zeta, p.finite.v
        den = c * unit_c(spec.d) - s * zeta
        if np.linalg.norm(den) < BRANCH_TOL * (1.0 + np.linalg.norm(zeta)):
            return CPWPoint.at_infinity(spec,
                                        WPoint(unit_c(spec.d), s * v))
        new_zeta = _subalg_eval(zeta, lambda z: (s + c * z) / (c - s * z))
        return CPWPoint(finite=WPoint(new_zeta,
                                      j_apply(spec, c_inverse(den), v)))
    kind, v = infinity_split(spec, p)
    if kind == "zero":
        return p
    if abs(s) < BRANCH_TOL:
        return CPWPoint.at_infinity(spec, WPoint(unit_c(spec.d), c * v))
    return CPWPoint(finite=WPoint(-(c / s) * unit_c(spec.d), -(1.0 / s) * v))


def a_t_apply(spec, t, p):
    """The hyperbolic isometry family of the ball model, extended to the
    whole compactification."""
    s, c = np.sinh(t), np.cosh(t)
    if p.is_finite:
        zeta, v = p.finite.zeta, p.finite.v
        den = s * zeta + c * unit_c(spec.d)
        if np.linalg.norm(den) < BRANCH_TOL * (1.0 + np.linalg.norm(zeta)):
            return CPWPoint.at_infinity(spec,
                                        WPoint(unit_c(spec.d), -s * v))
        new_zeta = _subalg_eval(zeta, lambda z: (c * z + s) / (s * z + c))
        return CPWPoint(finite=WPoint(new_zeta,
                                      j_apply(spec, c_inverse(den), v)))
    kind, v = infinity_split(spec, p)
    if kind == "zero":
        return p
    if abs(s) < BRANCH_TOL:
        return p
    return CPWPoint(finite=WPoint((c / s) * unit_c(spec.d), (1.0 / s) * v))


def _theta_translate_apply(spec, w0, p):
    """Action of the involution image of the translation by w0.

    The map sends a nonzero finite w to the point w' on the same C-line
    with w'/|w'|^2 = w/|w|^2 - P_{Cw} w0, with the matching extension at
    infinity; this reproduces the explicit rational formula for scalar
    translations.
    """
    w0vec = w0.to_vector()
    if p.is_finite:
        x = p.finite.to_vector()
        nx2 = x @ x
        if nx2 < BRANCH_TOL:
            return p
        proj = cline_through(spec, p.finite).projector()
        y = x / nx2 - proj @ w0vec
        ny2 = y @ y
        if ny2 < BRANCH_TOL ** 2:
            return CPWPoint.at_infinity(spec, p.finite)
        return CPWPoint(finite=WPoint.from_vector(spec, y / ny2))
    cpart = p.line.projector() @ w0vec
    nc2 = cpart @ cpart
    if nc2 < BRANCH_TOL ** 2:
        return p
    return CPWPoint(finite=WPoint.from_vector(spec, -cpart / nc2))


def apply_word(spec, word, p):
    """Apply a transformation word to a point; primitives act in list
    order and the involution marker transforms the remaining suffix."""
    for i, prim in enumerate(word):
        if prim.kind == "theta":
            return apply_word(spec, theta_word(spec, list(word[i + 1:])), p)
        p = prim.act(spec, p)
    return p


def word_inverse(spec, word):
    return [prim.inverse() for prim in reversed(word)]


def theta_word(spec, word):
    """The Cartan-type involution, applied primitive-wise: isometry
    primitives are fixed, linear parts go to the inverse transpose and
    translations swap with their rational counterparts."""
    out = []
    for i, prim in enumerate(word):
        if prim.kind == "theta":
            out.extend(word[i + 1:])
            return out
        out.append(_theta_primitive(prim))
    return out


def _theta_primitive(prim):
    if prim.kind in ("kmat", "btheta", "atime"):
        return prim
    if prim.kind == "glmat":
        return Primitive("glmat", GLWCElem(np.linalg.inv(prim.payload.mat.T)))
    if prim.kind == "translate":
        return Primitive("ttranslate", prim.payload)
    if prim.kind == "ttranslate":
        return Primitive("translate", prim.payload)
    raise ValueError("unexpected primitive kind %r" % prim.kind)


def word_to_json(word):
    return [prim.to_json_dict() for prim in word]


def word_from_json(data):
    return [Primitive.from_json_dict(item) for item in data]


def isometry_from_0_to(spec, p, tol=1e-10):
    """A transformation word in the isometry group moving the origin to
    the given point."""
    if p.is_finite:
        r = p.finite.norm()
        if r < tol:
            return []
        k = k_to_point(spec, WPoint(p.finite.zeta / r, p.finite.v / r))
        word = [b_prim(np.arctan(r)), k_prim(k)]
    else:
        rep = WPoint.from_vector(spec, p.line.frame[0])
        k = k_to_point(spec, rep)
        word = [b_prim(np.pi / 2),
                k_prim(KMatrix(-np.eye(spec.dim_w))),
                k_prim(k)]
    image = apply_word(spec, word,
                       CPWPoint(finite=WPoint.zero(spec)))
    if not points_equal(spec, image, p, tol=1e-8):
        raise ResidualError("origin transport word failed to verify")
    return word


class PolarHyperplane:
    """The cut locus of a point: a projective C-hyperplane with an
    explicit membership test."""

    def __init__(self, spec, center):
        self.spec = spec
        self.center = center

    def contains(self, q, tol=1e-9):
        spec = self.spec
        p = self.center
        if p.is_finite and p.finite.norm() < tol:
            return not q.is_finite
        if p.is_finite:
            x = p.finite.to_vector()
            proj = cline_through(spec, p.finite).projector()
            if q.is_finite:
                shifted = q.finite.to_vector() + x / (x @ x)
                return np.linalg.norm(proj @ shifted) < tol
            return np.abs(q.line.frame @ proj).max() < tol
        proj = p.line.projector()
        if q.is_finite:
            return np.linalg.norm(proj @ q.finite.to_vector()) < tol
        return np.abs(q.line.frame @ proj).max() < tol

    def sample(self, rng):
        """A random point of the hyperplane, for validation."""
        spec = self.spec
        p = self.center
        if p.is_finite and p.finite.norm() < 1e-12:
            x = core.sample_sphere(rng, spec.dim_w)
            return CPWPoint.at_infinity(spec, WPoint.from_vector(spec, x))
        if p.is_finite:
            x = p.finite.to_vector()
            proj = cline_through(spec, p.finite).projector()
            y = rng.standard_normal(spec.dim_w)
            y -= proj @ y
            return CPWPoint(finite=WPoint.from_vector(
                spec, y - x / (x @ x)))
        proj = p.line.projector()
        y = rng.standard_normal(spec.dim_w)
        y -= proj @ y
        return CPWPoint(finite=WPoint.from_vector(spec, y))


def polar(spec, p):
    return PolarHyperplane(spec, p)


def factor_collineation(spec, word, tol=1e-8):
    """Factor a collineation word as (isometry word, dilation, nilpotent
    part), the nilpotent part being a unipotent matrix datum together
    with a translation vector."""
    if spec.n == 0:
        raise DimensionError("collineation factorization needs a nonzero "
                             "module part")
    origin = CPWPoint(finite=WPoint.zero(spec))
    center = apply_word(spec, theta_word(spec, list(word)), origin)
    u_word = isometry_from_0_to(spec, center)
    u_inv = word_inverse(spec, u_word)

    def reduced(point):
        return apply_word(spec, list(word) + u_inv, point)

    img0 = reduced(origin)
    if not img0.is_finite:
        raise np.linalg.LinAlgError("hyperplane recovery is degenerate")
    b = img0.finite.to_vector()
    amat = np.zeros((spec.dim_w, spec.dim_w))
    for i in range(spec.dim_w):
        e = np.zeros(spec.dim_w)
        e[i] = 1.0
        img = reduced(CPWPoint(finite=WPoint.from_vector(spec, e)))
        if not img.is_finite:
            raise np.linalg.LinAlgError("hyperplane recovery is degenerate")
        amat[:, i] = img.finite.to_vector() - b
    if np.linalg.cond(amat) > COND_LIMIT:
        raise np.linalg.LinAlgError("linear part is ill-conditioned")
    # affinity spot check: the factored action must reproduce the word
    probe = 0.37 * np.ones(spec.dim_w)
    img = reduced(CPWPoint(finite=WPoint.from_vector(spec, probe)))
    if not img.is_finite or \
            np.linalg.norm(img.finite.to_vector() - (amat @ probe + b)) > \
            1e-6 * (1.0 + np.linalg.norm(b)):
        raise np.linalg.LinAlgError("reduced word is not affine")
    k2, adiag, nelem = iwasawa(spec, amat)
    lam = lambda_from_n(spec, nelem.mat)
    w0 = WPoint.from_vector(spec, np.linalg.solve(amat, b))
    u_total = [k_prim(k2)] + list(u_word)
    return u_total, adiag, (lam, w0)


def recompose_collineation(spec, u_word, adiag, npart):
    """The word form of a factored collineation, for round trips."""
    lam, w0 = npart
    nelem = glwc.n_from_lambda(spec, lam)
    return [translate_prim(w0), gl_prim(nelem.mat),
            gl_prim(adiag.as_matrix(spec))] + list(u_word)


def conformal_check(spec, word, line, pt, step=None):
    """Singular-value spread of the word's Jacobian restricted to an
    affine C-line; conformality means a spread near zero.

    line is a pair (base point, direction C-line through 0); pt is a
    finite point on it.
    """
    if spec.d < 2:
        raise DimensionError("conformality needs line dimension >= 2")
    base, cline = line
    frame = cline.frame
    x0 = pt.to_vector()
    c0 = frame @ (x0 - base.to_vector())
    if step is None:
        step = 1e-5 * (1.0 + np.linalg.norm(x0))

    def image_vec(coeff):
        x = base.to_vector() + frame.T @ coeff
        img = apply_word(spec, word,
                         CPWPoint(finite=WPoint.from_vector(spec, x)))
        if not img.is_finite:
            raise ChartSingularityError("image point left the chart")
        return img.finite.to_vector()

    image_vec(c0)
    jac = np.zeros((spec.dim_w, spec.d))
    for i in range(spec.d):
        e = np.zeros(spec.d)
        e[i] = step
        jac[:, i] = (image_vec(c0 + e) - image_vec(c0 - e)) / (2.0 * step)
    sv = np.linalg.svd(jac, compute_uv=False)
    if sv.min() < 1e-14:
        raise ChartSingularityError("restricted Jacobian is singular")
    return sv.max() / sv.min() - 1.0


def cayley(spec, p, tol=BRANCH_TOL):
    """The Cayley transform of the unit ball onto the height domain."""
    if p.norm() >= 1.0:
        raise ValueError("the Cayley transform acts on the open ball")
    den = unit_c(spec.d) - p.zeta
    if np.linalg.norm(den) < tol:
        raise ValueError("the unit scalar is excluded")
    new_zeta = _subalg_eval(p.zeta, lambda z: (1.0 + z) / (1.0 - z))
    out = WPoint(new_zeta, 2.0 * j_apply(spec, c_inverse(den), p.v))
    if height(spec, out) <= 0.0:
        raise ResidualError("image escaped the height domain")
    return out


def cayley_inv(spec, q, tol=BRANCH_TOL):
    den = q.zeta + unit_c(spec.d)
    if np.linalg.norm(den) < tol:
        raise ValueError("singular point of the inverse transform")
    zeta = _subalg_eval(q.zeta, lambda z: (z - 1.0) / (z + 1.0))
    v = 0.5 * j_apply(spec, unit_c(spec.d) - zeta, q.v)
    return WPoint(zeta, v)


def height(spec, p):
    return float(p.zeta[0]) - 0.25 * float(p.v @ p.v)


def bmap(spec, v, vp):
    """The C-valued bilinear pairing dual to the module action."""
    out = np.zeros(spec.d)
    for i in range(spec.d):
        e = np.zeros(spec.d)
        e[i] = 1.0
        out[i] = j_apply(spec, e, v) @ vp
    return out


def ntilde_apply(spec, z, u, p, tol=1e-12):
    """The nilpotent translation of the height domain."""
    z = np.asarray(z, dtype=float)
    if abs(z[0]) > tol:
        raise ValueError("the scalar shift must be imaginary")
    shift = z + 0.5 * bmap(spec, p.v, u)
    shift[0] += 0.25 * float(u @ u)
    return WPoint(p.zeta + shift, p.v + u)


def atilde_apply(spec, t, p):
    """The dilation of the height domain conjugate to the hyperbolic
    family."""
    return WPoint(np.exp(2.0 * t) * p.zeta, np.exp(t) * p.v)
