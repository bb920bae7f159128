import numpy as np
import pytest

from rankone import core
from rankone.core import make_module, mult_v, sample_sphere, unit_c
from rankone.glwc import (ADiag, GLWCElem, LambdaMatrix, cartan, is_glwc,
                          iwasawa, lambda_from_n, n_from_lambda, triple_form)
from rankone.wspace import (WPoint, cline_through, is_k_member, k_to_point,
                            standard_v_basis)

from conftest import MODULE_SPACES


def random_lambda(spec, rng):
    entries = np.zeros((spec.n + 1, spec.n + 1, spec.d))
    for j in range(spec.n + 1):
        for k in range(j):
            entries[j, k] = rng.standard_normal(spec.d)
    return LambdaMatrix(entries)


def random_k(spec, rng):
    w = WPoint.from_vector(spec, sample_sphere(rng, spec.dim_w))
    return k_to_point(spec, w)


def random_glwc(spec, rng):
    t = ADiag(0.5 + 2.0 * rng.random(spec.n + 1))
    n = n_from_lambda(spec, random_lambda(spec, rng))
    return random_k(spec, rng).mat @ t.as_matrix(spec) @ n.mat, t, n


@pytest.mark.parametrize("d,n", MODULE_SPACES)
def test_n_from_lambda_unipotent(d, n, rng):
    spec = make_module(d, n)
    assert np.abs(n_from_lambda(spec, LambdaMatrix.zero(spec)).mat
                  - np.eye(spec.dim_w)).max() == 0.0
    lam = random_lambda(spec, rng)
    nmat = n_from_lambda(spec, lam).mat
    np.testing.assert_allclose(np.linalg.eigvals(nmat),
                               np.ones(spec.dim_w), atol=1e-8)
    assert is_glwc(spec, nmat)
    back = lambda_from_n(spec, nmat)
    np.testing.assert_allclose(back.entries, lam.entries, atol=1e-9)


def test_single_entry_action():
    spec = make_module(2, 1)
    entries = np.zeros((2, 2, 2))
    entries[1, 0] = unit_c(2)
    nmat = n_from_lambda(spec, LambdaMatrix(entries)).mat
    zeta = np.array([0.3, -0.7])
    img = nmat @ np.concatenate([zeta, np.zeros(2)])
    np.testing.assert_allclose(img[:2], zeta, atol=1e-14)
    np.testing.assert_allclose(img[2:],
                               core.j_apply(spec, zeta,
                                            standard_v_basis(spec)[0]),
                               atol=1e-14)


@pytest.mark.parametrize("d,n", [(1, 2), (2, 2), (4, 2)])
def test_lambda_product_convention(d, n, rng):
    # n(L1) n(L2) corresponds to the double-transposed product, with
    # entry products lambda2 . lambda1 (associative scalars only)
    spec = make_module(d, n)
    l1 = random_lambda(spec, rng)
    l2 = random_lambda(spec, rng)
    prod = n_from_lambda(spec, l1).mat @ n_from_lambda(spec, l2).mat
    got = lambda_from_n(spec, prod).entries
    v1 = standard_v_basis(spec)[0]

    def full(lam):
        out = lam.entries.copy()
        for j in range(n + 1):
            out[j, j] = unit_c(d)
        return out

    a, b = full(l1), full(l2)
    for i in range(n + 1):
        for j in range(i):
            expect = np.zeros(d)
            for k in range(n + 1):
                if np.linalg.norm(a[i, k]) and np.linalg.norm(b[k, j]):
                    expect += mult_v(spec, b[k, j], a[i, k], v1)
            np.testing.assert_allclose(got[i, j], expect, atol=1e-9)


@pytest.mark.parametrize("d,n", MODULE_SPACES)
def test_is_glwc(d, n, rng):
    spec = make_module(d, n)
    g, _, _ = random_glwc(spec, rng)
    assert is_glwc(spec, g)
    assert is_glwc(spec, g.T)
    assert is_glwc(spec, random_k(spec, rng).mat)
    if d >= 2:
        bad = np.eye(spec.dim_w)
        bad += 0.3 * rng.standard_normal(bad.shape)
        assert not is_glwc(spec, bad)
    with pytest.raises(np.linalg.LinAlgError):
        is_glwc(spec, np.zeros((spec.dim_w, spec.dim_w)))


@pytest.mark.parametrize("d,n", MODULE_SPACES)
def test_line_restriction_conformal(d, n, rng):
    spec = make_module(d, n)
    g, _, _ = random_glwc(spec, rng)
    for _ in range(5):
        x = sample_sphere(rng, spec.dim_w)
        frame = cline_through(spec, WPoint.from_vector(spec, x)).frame
        sv = np.linalg.svd(frame @ g.T, compute_uv=False)
        assert sv.max() - sv.min() < 1e-9 * sv.max()


@pytest.mark.parametrize("d,n", MODULE_SPACES)
def test_triple_form(d, n, rng):
    spec = make_module(d, n)
    alpha, phi, v0 = triple_form(spec, np.eye(spec.dim_w))
    np.testing.assert_allclose(alpha, np.eye(d), atol=1e-14)
    assert np.linalg.norm(v0) < 1e-12
    t = ADiag(1.0 + rng.random(spec.n + 1))
    alpha, phi, v0 = triple_form(spec, t.as_matrix(spec))
    np.testing.assert_allclose(alpha, t.t[0] * np.eye(d), atol=1e-13)
    # composed n . a recovers the column-0 entries as v0
    lam = random_lambda(spec, rng)
    h = n_from_lambda(spec, lam).mat @ t.as_matrix(spec)
    alpha, phi, v0 = triple_form(spec, h)
    expect = sum(core.j_apply(spec, lam.entries[j, 0],
                              standard_v_basis(spec)[j - 1])
                 for j in range(1, n + 1))
    np.testing.assert_allclose(v0, expect, atol=1e-10)
    with pytest.raises(ValueError):
        triple_form(spec, sigma_like(spec))


def sigma_like(spec):
    from rankone.wspace import sigma_rot
    return sigma_rot(spec, standard_v_basis(spec)[0], 0.7).mat


@pytest.mark.parametrize("d,n", MODULE_SPACES)
def test_iwasawa_round_trip_and_uniqueness(d, n, rng):
    spec = make_module(d, n)
    k0, a0, n0 = iwasawa(spec, np.eye(spec.dim_w))
    np.testing.assert_allclose(a0.t, np.ones(spec.n + 1), atol=1e-12)
    for _ in range(3):
        g, t, nelem = random_glwc(spec, rng)
        k1, a1, n1 = iwasawa(spec, g)
        rec = k1.mat @ a1.as_matrix(spec) @ n1.mat
        assert np.abs(rec - g).max() < 1e-9 * max(1.0, np.abs(g).max())
        assert is_k_member(spec, k1.mat)
        np.testing.assert_allclose(a1.t, t.t, atol=1e-8)
        np.testing.assert_allclose(n1.mat, nelem.mat, atol=1e-8)


@pytest.mark.parametrize("d,n", MODULE_SPACES)
def test_cartan_round_trip(d, n, rng):
    spec = make_module(d, n)
    # orthogonal input: trivial dilation
    kmat = random_k(spec, rng).mat
    k1, a, k2 = cartan(spec, kmat)
    np.testing.assert_allclose(a.t, np.ones(spec.n + 1), atol=1e-9)
    for _ in range(3):
        t = ADiag(0.5 + 2.0 * rng.random(spec.n + 1))
        g = random_k(spec, rng).mat @ t.as_matrix(spec) \
            @ random_k(spec, rng).mat
        k1, a, k2 = cartan(spec, g)
        rec = k1.mat @ a.as_matrix(spec) @ k2.mat
        assert np.abs(rec - g).max() < 1e-9 * max(1.0, np.abs(g).max())
        assert is_k_member(spec, k1.mat) and is_k_member(spec, k2.mat)
        sv = np.linalg.svd(g, compute_uv=False)
        np.testing.assert_allclose(np.repeat(a.t, d), sv,
                                   atol=1e-10 * sv.max())
        np.testing.assert_allclose(np.sort(a.t)[::-1], a.t, atol=0)
