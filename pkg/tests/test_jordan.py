import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rpconic import jordan
from rpconic.jordan import (
    AlgebraElement,
    ConeSpec,
    Lorentz,
    Orthant,
    Psd,
    SpecMismatchError,
    cone_project,
    element_from_blocks,
    identity_element,
    inner_product,
    jordan_product,
    lambda_max,
    lambda_min,
    smat,
    spectral_decompose,
    svec,
)

from .conftest import SPECS, cone_specs, elements


def psd(*rows):
    X = np.array(rows, dtype=float)
    return element_from_blocks(ConeSpec.of(Psd(X.shape[0])), [X])


def test_spec_dimensions_and_degree():
    spec = ConeSpec.of(Orthant(3), Lorentz(4), Psd(3))
    assert spec.n == 3 + 4 + 6
    assert spec.degree == 3 + 2 + 3


def test_invalid_blocks_rejected():
    with pytest.raises(ValueError):
        Lorentz(1)
    with pytest.raises(ValueError):
        Orthant(0)
    with pytest.raises(ValueError):
        ConeSpec(())


def test_description_round_trip():
    spec = ConeSpec.of(Orthant(3), Lorentz(4), Psd(3))
    assert ConeSpec.from_description(spec.describe()) == spec


def test_svec_scales_off_diagonals_and_inverts():
    X = np.array([[1.0, 2.0], [2.0, 3.0]])
    v = svec(X)
    assert np.allclose(v, [1.0, 2.0 * math.sqrt(2), 3.0])
    assert np.array_equal(smat(v, 2), smat(v, 2).T)
    assert np.allclose(smat(v, 2), X)
    Y = np.array([[0.5, -1.0], [-1.0, 4.0]])
    assert svec(X) @ svec(Y) == pytest.approx(np.trace(X @ Y))


def test_orthant_product():
    spec = ConeSpec.of(Orthant(2))
    x = AlgebraElement(spec, np.array([1.0, 2.0]))
    y = AlgebraElement(spec, np.array([3.0, 4.0]))
    assert np.allclose(jordan_product(x, y).data, [3.0, 8.0])


def test_psd_product_is_symmetrized():
    out = jordan_product(psd([1, 0], [0, 2]), psd([0, 1], [1, 0]))
    assert np.allclose(out.block_matrix(0), [[0, 1.5], [1.5, 0]])


def test_lorentz_product():
    spec = ConeSpec.of(Lorentz(3))
    x = AlgebraElement(spec, np.array([1.0, 2.0, 3.0]))
    y = AlgebraElement(spec, np.array([4.0, 5.0, 6.0]))
    assert np.allclose(jordan_product(x, y).data, [4 + 10 + 18, 1 * 5 + 4 * 2, 1 * 6 + 4 * 3])


def test_spec_mismatch_raises():
    x = identity_element(ConeSpec.of(Orthant(2)))
    y = identity_element(ConeSpec.of(Lorentz(2)))
    with pytest.raises(SpecMismatchError):
        jordan_product(x, y)
    with pytest.raises(SpecMismatchError):
        inner_product(x, y)


def test_inner_product_of_identity_is_degree():
    for spec in SPECS:
        e = identity_element(spec)
        assert inner_product(e, e) == pytest.approx(spec.degree)
    e = identity_element(ConeSpec.of(Psd(5)))
    assert inner_product(e, e) == pytest.approx(5.0)
    e = identity_element(ConeSpec.of(Lorentz(2)))
    assert inner_product(e, e) == pytest.approx(2.0)


def test_identity_elements():
    assert np.array_equal(identity_element(ConeSpec.of(Orthant(3))).data, [1, 1, 1])
    assert np.allclose(identity_element(ConeSpec.of(Psd(2))).block_matrix(0), np.eye(2))
    assert np.array_equal(identity_element(ConeSpec.of(Lorentz(3))).data, [1, 0, 0])


@pytest.mark.parametrize("spec", SPECS)
def test_identity_is_multiplicative_unit(spec, rng):
    x = jordan.random_element(spec, rng)
    assert jordan_product(identity_element(spec), x).allclose(x, 1e-12)


def test_spectral_decompose_diagonal_psd():
    sd = spectral_decompose(psd([3, 0], [0, 1]))
    assert np.allclose(sd.eigenvalues, [1, 3])
    assert np.allclose(sd.idempotents[0].block_matrix(0), [[0, 0], [0, 1]])
    assert np.allclose(sd.idempotents[1].block_matrix(0), [[1, 0], [0, 0]])


def test_spectral_decompose_lorentz_boundary_point():
    spec = ConeSpec.of(Lorentz(3))
    x = AlgebraElement(spec, np.array([1.0, 0.6, 0.8]))
    sd = spectral_decompose(x)
    assert np.allclose(sd.eigenvalues, [0.0, 2.0], atol=1e-14)
    assert np.allclose(sd.idempotents[0].data, [0.5, -0.3, -0.4])
    assert np.allclose(sd.idempotents[1].data, [0.5, 0.3, 0.4])
    for c in sd.idempotents:
        assert jordan.square(c).allclose(c, 1e-12)
    assert (sd.idempotents[0] + sd.idempotents[1]).allclose(identity_element(spec), 1e-12)
    assert sd.reconstruct().allclose(x, 1e-12)
    assert lambda_min(x) == pytest.approx(0.0, abs=1e-14)


def test_lorentz_degenerate_axis_is_deterministic():
    x = AlgebraElement(ConeSpec.of(Lorentz(3)), np.array([2.0, 0.0, 0.0]))
    sd = spectral_decompose(x)
    assert np.allclose(sd.eigenvalues, [2.0, 2.0])
    assert np.allclose(sd.idempotents[0].data, [0.5, -0.5, 0.0])
    assert sd.reconstruct().allclose(x, 1e-14)


def test_orthant_eigenvalues_are_sorted_coordinates():
    x = AlgebraElement(ConeSpec.of(Orthant(2)), np.array([5.0, -2.0]))
    assert np.array_equal(spectral_decompose(x).eigenvalues, [-2.0, 5.0])
    assert lambda_min(x) == -2.0 and lambda_max(x) == 5.0


@pytest.mark.parametrize("spec", SPECS)
def test_lambda_min_of_identity(spec):
    assert lambda_min(identity_element(spec)) == pytest.approx(1.0)


@pytest.mark.parametrize("spec", SPECS)
def test_lambda_min_matches_rayleigh_quotient(spec, rng):
    # min over unit u of <u, x o u> / <u, u> is lambda_min (oracle: random sampling plus the frame itself)
    x = jordan.random_element(spec, rng)
    lam = lambda_min(x)
    quotients = []
    for _ in range(3000):
        u = jordan.random_element(spec, rng)
        quotients.append(inner_product(u, jordan_product(x, u)) / inner_product(u, u))
    assert min(quotients) >= lam - 1e-9
    c = spectral_decompose(x).idempotents[0]
    assert inner_product(c, jordan_product(x, c)) / inner_product(c, c) == pytest.approx(lam, abs=1e-9)


def test_cone_project_examples():
    x = AlgebraElement(ConeSpec.of(Orthant(2)), np.array([-1.0, 2.0]))
    assert np.array_equal(cone_project(x).data, [0.0, 2.0])
    assert np.allclose(cone_project(psd([-1, 0], [0, 3])).block_matrix(0), [[0, 0], [0, 3]])
    inside = psd([2, 1], [1, 2])
    assert cone_project(inside).allclose(inside, 1e-12)


def test_lorentz_projection_matches_spectral_clipping(rng):
    spec = ConeSpec.of(Lorentz(4))
    for _ in range(50):
        x = jordan.random_element(spec, rng)
        sd = spectral_decompose(x)
        clipped = sum((max(l, 0.0) * c.data for l, c in zip(sd.eigenvalues, sd.idempotents)), np.zeros(spec.n))
        assert np.allclose(cone_project(x).data, clipped, atol=1e-12)


# --- properties -------------------------------------------------------------

TOL = 1e-8


def _scale(*xs):
    return 1.0 + max(x.norm() for x in xs)


@settings(max_examples=60, deadline=None)
@given(st.data())
def test_commutativity(data):
    spec = data.draw(cone_specs())
    x, y = data.draw(elements(spec, 2))
    assert (jordan_product(x, y) - jordan_product(y, x)).norm() <= 1e-10 * _scale(x, y) ** 2


@settings(max_examples=60, deadline=None)
@given(st.data())
def test_jordan_identity(data):
    spec = data.draw(cone_specs())
    x, y = data.draw(elements(spec, 2))
    x2 = jordan.square(x)
    lhs = jordan_product(x2, jordan_product(x, y))
    rhs = jordan_product(x, jordan_product(x2, y))
    assert (lhs - rhs).norm() <= TOL * _scale(x, y) ** 4


@settings(max_examples=60, deadline=None)
@given(st.data())
def test_bilinear_and_symmetric_inner_product(data):
    spec = data.draw(cone_specs())
    x, y, z = data.draw(elements(spec, 3))
    a = data.draw(st.floats(-2, 2))
    assert inner_product(x, y) == pytest.approx(inner_product(y, x), abs=1e-12)
    lhs = inner_product(x * a + y, z)
    assert lhs == pytest.approx(a * inner_product(x, z) + inner_product(y, z), abs=1e-9 * _scale(x, y, z) ** 2)
    if x.norm() > 0:
        assert inner_product(x, x) > 0


@settings(max_examples=60, deadline=None)
@given(st.data())
def test_spectral_axioms(data):
    spec = data.draw(cone_specs())
    (x,) = data.draw(elements(spec, 1))
    sd = spectral_decompose(x)
    assert len(sd.eigenvalues) == spec.degree
    assert np.all(np.diff(sd.eigenvalues) >= 0)
    assert (x - sd.reconstruct()).norm() <= TOL * (1 + x.norm())
    total = jordan.zeros(spec)
    for i, ci in enumerate(sd.idempotents):
        assert (jordan.square(ci) - ci).norm() <= TOL
        for cj in sd.idempotents[i + 1 :]:
            assert jordan_product(ci, cj).norm() <= TOL
        total = total + ci
    assert total.allclose(identity_element(spec), TOL)


@settings(max_examples=60, deadline=None)
@given(st.data())
def test_sums_of_squares_lie_in_cone(data):
    spec = data.draw(cone_specs())
    xs = data.draw(elements(spec, 3))
    s = sum((jordan.square(x) for x in xs[1:]), jordan.square(xs[0]))
    assert lambda_min(s) >= -TOL * (1 + s.norm())


@settings(max_examples=60, deadline=None)
@given(st.data())
def test_lambda_min_is_superadditive(data):
    spec = data.draw(cone_specs())
    a, b = data.draw(elements(spec, 2))
    assert lambda_min(a + b) >= lambda_min(a) + lambda_min(b) - TOL


@settings(max_examples=60, deadline=None)
@given(st.data())
def test_cone_projection_properties(data):
    spec = data.draw(cone_specs())
    (x,) = data.draw(elements(spec, 1))
    px = cone_project(x)
    assert lambda_min(px) >= -TOL
    assert inner_product(x - px, px) <= TOL * (1 + x.norm() ** 2)
    assert cone_project(px).allclose(px, TOL * (1 + x.norm()))
    assert lambda_max(x - px) <= TOL * (1 + x.norm())
