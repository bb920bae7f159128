"""Normed module structures: a Euclidean space C with unit element acting
on a vector space V by norm-composing bilinear maps.

Elements of C ("scalars") are length-d real vectors whose coordinate 0 is
the real part; elements of V are length-(n*d) real vectors.  The action is
stored as d generator matrices: gens[0] is the identity, and the remaining
generators are orthogonal, skew-symmetric and pairwise anticommuting.
"""

import numpy as np

ALG_TOL = 1e-12
SOLVE_TOL = 1e-9


class DimensionError(ValueError):
    pass


class ZeroDivisorError(ZeroDivisionError):
    pass


class ResidualError(ArithmeticError):
    """Raised when a frame expansion fails, signalling a module whose
    iterated action leaves the line C*v."""
    pass


def unit_c(d):
    e = np.zeros(d)
    e[0] = 1.0
    return e


def conj(zeta):
    out = np.array(zeta, dtype=float)
    out[1:] = -out[1:]
    return out


def c_inverse(zeta, tol=ALG_TOL):
    zeta = np.asarray(zeta, dtype=float)
    nsq = zeta @ zeta
    if nsq <= tol:
        raise ZeroDivisorError("cannot invert a zero scalar")
    return conj(zeta) / nsq


def _quaternion_left(z):
    """4x4 matrix of left multiplication by the quaternion z."""
    a, b, c, d = z
    return np.array([
        [a, -b, -c, -d],
        [b,  a, -d,  c],
        [c,  d,  a, -b],
        [d, -c,  b,  a],
    ])


def _cd_multiply(a, b):
    # Cayley-Dickson doubling: (a1,a2)(b1,b2) = (a1 b1 - conj(b2) a2, b2 a1 + a2 conj(b1))
    n = len(a)
    if n == 1:
        return a * b
    h = n // 2
    a1, a2 = a[:h], a[h:]
    b1, b2 = b[:h], b[h:]
    c1 = _cd_multiply(a1, b1) - _cd_multiply(_cd_conj(b2), a2)
    c2 = _cd_multiply(b2, a1) + _cd_multiply(a2, _cd_conj(b1))
    return np.concatenate([c1, c2])


def _cd_conj(a):
    out = np.array(a, dtype=float)
    out[1:] = -out[1:]
    return out


def _cd_left(z, dim):
    """Left multiplication matrix in the dimension-dim doubling algebra."""
    cols = []
    for j in range(dim):
        e = np.zeros(dim)
        e[j] = 1.0
        cols.append(_cd_multiply(z, e))
    return np.column_stack(cols)


class ModuleSpec:
    """A concrete module: dimensions (d, n), the d generator matrices of
    the action on V, and the flag recording whether C(Cv) = Cv is claimed
    to hold."""

    def __init__(self, d, n, gens, j2_expected, dim_v=None, validate=True):
        self.d = int(d)
        self.n = int(n)
        self.gens = np.asarray(gens, dtype=float)
        if self.n == 0:
            self.gens = self.gens.reshape(self.d, 0, 0)
        self.j2_expected = bool(j2_expected)
        # dim V is n*d for valid modules; negative fixtures may differ.
        self.dim_v = self.n * self.d if dim_v is None else int(dim_v)
        if validate:
            self._validate()

    @property
    def dim_w(self):
        return (self.n + 1) * self.d

    def _validate(self, tol=ALG_TOL):
        if self.d < 1 or self.n < 0:
            raise DimensionError("need d >= 1 and n >= 0")
        if self.n == 0:
            return
        nd = self.dim_v
        if self.gens.shape != (self.d, nd, nd):
            raise DimensionError("generator array has wrong shape")
        ident = np.eye(nd)
        if np.abs(self.gens[0] - ident).max() > tol:
            raise DimensionError("generator 0 must be the identity")
        for i in range(1, self.d):
            g = self.gens[i]
            if np.abs(g.T @ g - ident).max() > tol:
                raise DimensionError("generator %d is not orthogonal" % i)
            if np.abs(g + g.T).max() > tol:
                raise DimensionError("generator %d is not skew-symmetric" % i)
        for i in range(1, self.d):
            for j in range(i, self.d):
                anti = self.gens[i] @ self.gens[j] + self.gens[j] @ self.gens[i]
                target = -2.0 * ident if i == j else 0.0
                if np.abs(anti - target).max() > tol:
                    raise DimensionError(
                        "generators %d,%d violate the anticommutation relations" % (i, j))

    def to_json_dict(self):
        return {
            "d": self.d,
            "n": self.n,
            "gens": self.gens.tolist(),
            "j2_expected": self.j2_expected,
        }

    @classmethod
    def from_json_dict(cls, data):
        gens = np.asarray(data["gens"], dtype=float)
        dim_v = gens.shape[1] if data["n"] >= 1 else 0
        return cls(data["d"], data["n"], gens, data["j2_expected"], dim_v=dim_v)


def make_module(d, n):
    """Build the standard module of dimensions (d, n).

    Valid shapes: n = 0 with any d >= 1; n >= 1 with d in {1, 2, 4};
    n = 1 with d = 8.  The d = 4 module is built isotypic (the same
    4-dimensional block repeated n times).
    """
    if d < 1 or n < 0:
        raise DimensionError("need d >= 1 and n >= 0")
    if n == 0:
        return ModuleSpec(d, 0, np.zeros((d, 0, 0)), True)
    if d not in (1, 2, 4, 8):
        raise DimensionError("no valid module with d = %d and n >= 1" % d)
    if d == 8 and n != 1:
        raise DimensionError("d = 8 only acts on a single 8-dimensional block")
    if d == 1:
        gens = np.eye(n).reshape(1, n, n)
        return ModuleSpec(1, n, gens, True)
    if d == 2:
        base = [np.eye(2), np.array([[0.0, -1.0], [1.0, 0.0]])]
    elif d == 4:
        base = [_quaternion_left(e) for e in np.eye(4)]
    else:
        base = [_cd_left(e, 8) for e in np.eye(8)]
    gens = np.stack([block_diag_repeat(b, n) for b in base])
    return ModuleSpec(d, n, gens, True)


def block_diag_repeat(block, n):
    k = block.shape[0]
    out = np.zeros((n * k, n * k))
    for j in range(n):
        out[j * k:(j + 1) * k, j * k:(j + 1) * k] = block
    return out


def make_non_j2_module(kind):
    """Negative fixtures: genuine modules whose iterated action escapes
    the line C*v.

    'd3' restricts the quaternion left action to a 3-dimensional C;
    'd4_mixed' glues the two inequivalent 4-dimensional blocks (left
    multiplication and its negative on imaginary generators).
    """
    quat = [_quaternion_left(e) for e in np.eye(4)]
    if kind == "d3":
        gens = np.stack(quat[:3])
        return ModuleSpec(3, 1, gens.reshape(3, 4, 4), False, dim_v=4)
    if kind == "d4_mixed":
        gens = [np.eye(8)]
        for i in range(1, 4):
            g = np.zeros((8, 8))
            g[:4, :4] = quat[i]
            g[4:, 4:] = -quat[i]
            gens.append(g)
        spec = ModuleSpec(4, 2, np.stack(gens), False, validate=True)
        return spec
    raise ValueError("unknown kind %r" % kind)


def j_apply(spec, zeta, v):
    zeta = np.asarray(zeta, dtype=float)
    v = np.asarray(v, dtype=float)
    if spec.n < 1:
        if v.shape == (0,):
            return v
        raise DimensionError("module has no V to act on")
    if zeta.shape != (spec.d,) or v.shape != (spec.dim_v,):
        raise DimensionError("argument dimensions do not match the module")
    return np.einsum("i,ijk,k->j", zeta, spec.gens, v)


def j_matrix(spec, zeta):
    """The matrix of the action of a fixed scalar on V."""
    return np.einsum("i,ijk->jk", np.asarray(zeta, dtype=float), spec.gens)


def line_frame_v(spec, v):
    """Orthonormal basis {gens[i] v / |v|} of the line C*v inside V."""
    nv = np.linalg.norm(v)
    if nv <= ALG_TOL:
        raise ZeroDivisorError("zero vector spans no line")
    return np.stack([spec.gens[i] @ v for i in range(spec.d)]) / nv


def mult_v(spec, zeta, eta, v, tol=SOLVE_TOL):
    """The product of two scalars induced at the base point v, i.e. the
    unique lam with lam v = zeta (eta v).  Computed by expanding in the
    orthonormal frame {gens[i] v / |v|}; a large expansion residual means
    the iterated action left the line and the module is invalid."""
    zeta = np.asarray(zeta, dtype=float)
    eta = np.asarray(eta, dtype=float)
    v = np.asarray(v, dtype=float)
    nv = np.linalg.norm(v)
    frame = line_frame_v(spec, v)
    target = j_apply(spec, zeta, j_apply(spec, eta, v))
    lam = frame @ target / nv
    residual = np.linalg.norm(target - j_apply(spec, lam, v))
    scale = np.linalg.norm(zeta) * np.linalg.norm(eta) * nv
    if residual > tol * max(scale, 1e-30):
        raise ResidualError(
            "frame expansion residual %.3e exceeds tolerance" % residual)
    return lam


def divide(spec, zeta, eta, v, side="left", tol=SOLVE_TOL):
    """Solve for the missing factor in the product at v.

    side='left' returns xi with (xi . eta) = zeta at v; side='right'
    returns xi with (eta . xi) = zeta at v, via xi = (conj(eta)/|eta|^2) . zeta.
    Both answers are verified by back-substitution.
    """
    zeta = np.asarray(zeta, dtype=float)
    eta = np.asarray(eta, dtype=float)
    if np.linalg.norm(eta) <= ALG_TOL:
        raise ZeroDivisorError("division by zero scalar")
    if side == "left":
        cols = [mult_v(spec, e, eta, v) for e in np.eye(spec.d)]
        mat = np.column_stack(cols)
        try:
            xi = np.linalg.solve(mat, zeta)
        except np.linalg.LinAlgError as exc:
            raise ResidualError("singular division system: %s" % exc)
        check = mult_v(spec, xi, eta, v)
    elif side == "right":
        xi = mult_v(spec, conj(eta) / (eta @ eta), zeta, v)
        check = mult_v(spec, eta, xi, v)
    else:
        raise ValueError("side must be 'left' or 'right'")
    scale = max(np.linalg.norm(zeta), 1.0)
    if np.linalg.norm(check - zeta) > tol * scale:
        raise ResidualError("division back-substitution failed")
    return xi


def sample_sphere(rng, dim):
    if dim == 0:
        return np.zeros(0)
    while True:
        x = rng.standard_normal(dim)
        nx = np.linalg.norm(x)
        if nx > 1e-6:
            return x / nx


def verify_composition(spec, sample_count=1000, seed=0):
    """Max violation of the defining identities over seeded random samples:
    unit action, norm composition, the polarized inner-product identity,
    conj-action inversion and generator anticommutation."""
    report = {
        "unit_action": 0.0,
        "norm_composition": 0.0,
        "polarized": 0.0,
        "conj_inverse": 0.0,
        "anticommutation": 0.0,
    }
    if spec.n == 0:
        report["vacuous"] = True
        return report
    ident = np.eye(spec.dim_v)
    for i in range(1, spec.d):
        for j in range(i, spec.d):
            anti = spec.gens[i] @ spec.gens[j] + spec.gens[j] @ spec.gens[i]
            target = -2.0 * ident if i == j else 0.0
            report["anticommutation"] = max(report["anticommutation"],
                                            np.abs(anti - target).max())
    rng = np.random.default_rng(seed)
    for _ in range(sample_count):
        zeta = rng.standard_normal(spec.d)
        eta = rng.standard_normal(spec.d)
        v = rng.standard_normal(spec.dim_v)
        u = rng.standard_normal(spec.dim_v)
        report["unit_action"] = max(
            report["unit_action"],
            np.abs(j_apply(spec, unit_c(spec.d), v) - v).max())
        report["norm_composition"] = max(
            report["norm_composition"],
            abs(np.linalg.norm(j_apply(spec, zeta, v))
                - np.linalg.norm(zeta) * np.linalg.norm(v)))
        lhs = (j_apply(spec, zeta, u) @ j_apply(spec, eta, v)
               + j_apply(spec, eta, u) @ j_apply(spec, zeta, v))
        report["polarized"] = max(
            report["polarized"], abs(lhs - 2.0 * (zeta @ eta) * (u @ v)))
        back = j_apply(spec, conj(zeta), j_apply(spec, zeta, v))
        report["conj_inverse"] = max(
            report["conj_inverse"],
            np.abs(back - (zeta @ zeta) * v).max())
    return report


def verify_j2(spec, sample_count=50, seed=0, tol=SOLVE_TOL):
    """Whether the iterated action of basis generators stays inside the
    line C*v, for every sampled v and every generator pair."""
    if spec.n < 1:
        raise DimensionError("J^2 test needs a nontrivial V")
    rng = np.random.default_rng(seed)
    for _ in range(sample_count):
        v = sample_sphere(rng, spec.dim_v)
        frame = line_frame_v(spec, v)
        for i in range(spec.d):
            for j in range(spec.d):
                target = spec.gens[i] @ (spec.gens[j] @ v)
                residual = target - frame.T @ (frame @ target)
                if np.linalg.norm(residual) > tol:
                    return False
    return True


def mult_v_discrepancy(spec, sample_count=50, seed=0):
    """Largest observed base-point dependence of the induced product, and
    a witness (zeta, eta, v, v') achieving it."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    witness = None
    for _ in range(sample_count):
        zeta = sample_sphere(rng, spec.d)
        eta = sample_sphere(rng, spec.d)
        v = sample_sphere(rng, spec.dim_v)
        vp = sample_sphere(rng, spec.dim_v)
        gap = np.linalg.norm(mult_v(spec, zeta, eta, v)
                             - mult_v(spec, zeta, eta, vp))
        if gap > worst:
            worst = gap
            witness = (zeta, eta, v, vp)
    return worst, witness


def is_associative(spec, sample_count=50, seed=0):
    """True iff the induced product does not depend on the base point,
    which happens exactly for d <= 4.  The dimension answer is
    cross-checked numerically and an inconsistency raises."""
    if not spec.j2_expected:
        raise ValueError("associativity is only defined for valid modules")
    answer = spec.d <= 4
    if spec.n >= 1:
        worst, _ = mult_v_discrepancy(spec, sample_count, seed)
        if answer and worst > 1e-10:
            raise ResidualError("claimed associative but products differ by %.3e" % worst)
        if not answer and worst <= 0.1:
            raise ResidualError("no base-point discrepancy found for d = 8")
    return answer


def htype_bracket(spec, v, u):
    """The imaginary scalar dual to the action: coordinate i (i >= 1) is
    <gens[i] v, u>.  Antisymmetric in (v, u); the real part is zero."""
    if spec.n < 1 or spec.d < 2:
        raise DimensionError("bracket needs n >= 1 and d >= 2")
    v = np.asarray(v, dtype=float)
    u = np.asarray(u, dtype=float)
    out = np.zeros(spec.d)
    for i in range(1, spec.d):
        out[i] = (spec.gens[i] @ v) @ u
    return out
