import numpy as np
import pytest

from rankone import core
from rankone.core import (ModuleSpec, c_inverse, conj, divide, htype_bracket,
                          is_associative, j_apply, make_module,
                          make_non_j2_module, mult_v, mult_v_discrepancy,
                          sample_sphere, unit_c, verify_composition,
                          verify_j2)

from conftest import MODULE_SPACES, SPACES


@pytest.mark.parametrize("d,n", SPACES)
def test_make_module_shapes(d, n):
    spec = make_module(d, n)
    assert spec.gens.shape == (d, n * d, n * d)
    assert spec.dim_w == (n + 1) * d
    np.testing.assert_allclose(spec.gens[0], np.eye(n * d))


@pytest.mark.parametrize("d", [0, -1, 9])
def test_make_module_rejects_bad_d(d):
    with pytest.raises((ValueError, core.DimensionError)):
        make_module(d, 1)


def test_json_round_trip():
    spec = make_module(4, 2)
    again = ModuleSpec.from_json_dict(spec.to_json_dict())
    assert again.d == 4 and again.n == 2
    np.testing.assert_allclose(again.gens, spec.gens)


def test_conj_and_inverse():
    z = np.array([3.0, -1.0, 2.0, 0.5])
    np.testing.assert_allclose(conj(conj(z)), z)
    zi = c_inverse(z)
    # conjugation fixes the real part and negates the rest
    assert conj(z)[0] == z[0]
    np.testing.assert_allclose(conj(z)[1:], -z[1:])
    np.testing.assert_allclose(zi, conj(z) / (z @ z), atol=1e-15)
    with pytest.raises(core.ZeroDivisorError):
        c_inverse(np.zeros(4))


@pytest.mark.parametrize("d,n", SPACES)
def test_identities(d, n):
    spec = make_module(d, n)
    report = verify_composition(spec, sample_count=200, seed=3)
    for key, value in report.items():
        if key == "vacuous":
            continue
        assert value < 1e-12, (key, value)


@pytest.mark.parametrize("d,n", MODULE_SPACES)
def test_unit_acts_trivially(d, n, rng):
    spec = make_module(d, n)
    v = rng.standard_normal(spec.dim_v)
    np.testing.assert_allclose(j_apply(spec, unit_c(d), v), v, atol=1e-14)


@pytest.mark.parametrize("d,n", MODULE_SPACES)
def test_j2_positive(d, n):
    assert verify_j2(make_module(d, n), sample_count=20, seed=1)


@pytest.mark.parametrize("kind", ["d3", "d4_mixed"])
def test_j2_negative(kind):
    assert not verify_j2(make_non_j2_module(kind), sample_count=20, seed=1)


@pytest.mark.parametrize("d,n", MODULE_SPACES)
def test_mult_v_unit_and_inverse(d, n, rng):
    spec = make_module(d, n)
    for _ in range(5):
        z = rng.standard_normal(d)
        v = sample_sphere(rng, spec.dim_v)
        np.testing.assert_allclose(mult_v(spec, z, unit_c(d), v), z,
                                   atol=1e-10)
        np.testing.assert_allclose(mult_v(spec, unit_c(d), z, v), z,
                                   atol=1e-10)
        # real part of z . conj(w) is the inner product
        w = rng.standard_normal(d)
        prod = mult_v(spec, z, conj(w), v)
        assert abs(prod[0] - z @ w) < 1e-10


@pytest.mark.parametrize("d,n", MODULE_SPACES)
@pytest.mark.parametrize("side", ["left", "right"])
def test_divide_round_trip(d, n, side, rng):
    spec = make_module(d, n)
    for _ in range(5):
        z = rng.standard_normal(d)
        w = rng.standard_normal(d) + 2.0 * unit_c(d)
        v = sample_sphere(rng, spec.dim_v)
        q = divide(spec, z, w, v, side=side)
        back = mult_v(spec, q, w, v) if side == "left" \
            else mult_v(spec, w, q, v)
        np.testing.assert_allclose(back, z, atol=1e-9)


def test_divide_by_zero():
    spec = make_module(2, 1)
    with pytest.raises(core.ZeroDivisorError):
        divide(spec, unit_c(2), np.zeros(2), np.array([1.0, 0.0]))


@pytest.mark.parametrize("d,n", MODULE_SPACES)
def test_associativity_flag(d, n):
    spec = make_module(d, n)
    assert is_associative(spec) == (d <= 4)
    worst, _ = mult_v_discrepancy(spec)
    if d <= 4:
        assert worst < 1e-10
    else:
        assert worst > 0.1


def test_htype_bracket_antisymmetry(rng):
    spec = make_module(4, 2)
    v = rng.standard_normal(spec.dim_v)
    u = rng.standard_normal(spec.dim_v)
    b1 = htype_bracket(spec, v, u)
    b2 = htype_bracket(spec, u, v)
    np.testing.assert_allclose(b1, -b2, atol=1e-12)
    assert b1[0] == 0.0
    np.testing.assert_allclose(htype_bracket(spec, v, v), np.zeros(4),
                               atol=1e-12)
