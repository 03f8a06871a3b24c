import numpy as np
import pytest

from rpconic import jordan
from rpconic.jordan import AlgebraElement, ConeSpec, Lorentz, Orthant, Psd, element_from_blocks
from rpconic.model import ConicProgram, DualProgram, build_operator, dual_slack, primal_residuals

from .conftest import SPECS


def lp(A, b, c, theta=10.0):
    A = np.atleast_2d(np.asarray(A, dtype=float))
    spec = ConeSpec.of(Orthant(A.shape[1]))
    return ConicProgram(spec, A, b, AlgebraElement(spec, np.asarray(c, dtype=float)), theta)


def random_program(spec, m, rng, theta=10.0):
    A = rng.standard_normal((m, spec.n))
    return ConicProgram(spec, A, rng.standard_normal(m), jordan.random_element(spec, rng), theta)


def test_invalid_programs_rejected():
    spec = ConeSpec.of(Orthant(2))
    c = jordan.identity_element(spec)
    with pytest.raises(ValueError):
        ConicProgram(spec, np.ones((1, 3)), [1.0], c, 1.0)
    with pytest.raises(ValueError):
        ConicProgram(spec, np.ones((1, 2)), [1.0, 2.0], c, 1.0)
    with pytest.raises(ValueError):
        ConicProgram(spec, np.ones((1, 2)), [1.0], c, 0.0)
    with pytest.raises(jordan.SpecMismatchError):
        ConicProgram(spec, np.ones((1, 2)), [1.0], jordan.identity_element(ConeSpec.of(Orthant(3))), 1.0)


def test_operator_of_single_coordinate_row():
    op = build_operator(lp([1.0, 0.0], [1.0], [1.0, 1.0]))
    assert np.array_equal(op.matrix, [[1.0, 0.0]])
    assert op.sigma_min == pytest.approx(1.0) and op.sigma_max == pytest.approx(1.0)
    assert op.condition_number == pytest.approx(1.0)


def test_psd_identity_row_is_trace(rng):
    spec = ConeSpec.of(Psd(2))
    e = jordan.identity_element(spec)
    p = ConicProgram.from_elements([e], [1.0], e, 10.0)
    assert np.allclose(p.operator.matrix, [[1.0, 0.0, 1.0]])
    for _ in range(20):
        X = jordan.random_element(spec, rng)
        assert p.operator.apply(X)[0] == pytest.approx(np.trace(X.block_matrix(0)))


@pytest.mark.parametrize("spec", SPECS)
def test_operator_applies_inner_products(spec, rng):
    p = random_program(spec, 5, rng)
    for _ in range(100):
        x = jordan.random_element(spec, rng)
        direct = np.array([jordan.inner_product(a, x) for a in p.constraints])
        assert np.max(np.abs(p.operator.apply(x) - direct)) <= 1e-10 * (1 + np.max(np.abs(direct)))


@pytest.mark.parametrize("spec", SPECS)
def test_operator_adjoint_is_combination(spec, rng):
    p = random_program(spec, 4, rng)
    for _ in range(20):
        x = jordan.random_element(spec, rng)
        y = rng.standard_normal(p.m)
        lhs = p.operator.apply(x) @ y
        rhs = jordan.inner_product(x, p.combine(y))
        assert lhs == pytest.approx(rhs, rel=1e-10, abs=1e-10)


def test_rank_and_pseudoinverse():
    p = lp([[1.0, 0.0, 0.0], [2.0, 0.0, 0.0]], [1.0, 2.0], [1.0, 1.0, 1.0])
    op = p.operator
    assert op.rank == 1 and not op.full_row_rank
    assert op.sigma_min == pytest.approx(np.sqrt(5.0))
    r = op.pinv_apply(np.array([1.0, 2.0]))
    assert np.allclose(r, [1.0, 0.0, 0.0])


def test_primal_residuals():
    p = lp([1.0, 1.0], [1.0], [1.0, 0.0], theta=5.0)
    spec = p.spec
    eq, slack, viol = primal_residuals(p, AlgebraElement(spec, np.array([0.25, 0.75])))
    assert eq <= 1e-12 and slack == pytest.approx(4.0) and viol == 0.0
    assert primal_residuals(p, jordan.zeros(spec))[0] == pytest.approx(1.0)
    assert primal_residuals(p, AlgebraElement(spec, np.array([-1.0, 0.0])))[2] == pytest.approx(1.0)


def test_dual_slack():
    p = lp([1.0, 0.0], [1.0], [1.0, 1.0])
    assert np.array_equal(dual_slack(p, [0.0], 0.0).data, p.c.data)
    assert np.allclose(dual_slack(p, [1.0], 0.0).data, [0.0, 1.0])
    assert np.allclose(dual_slack(p, [1.0], 0.5, mu=0.25).data, [0.75, 1.75])


def test_dual_program_relaxation_cost():
    p = lp([1.0, 0.0], [1.0], [1.0, 1.0])
    d = DualProgram(p, 0.5)
    assert np.allclose(d.primal().c.data, [1.5, 1.5])
    assert d.objective(np.array([2.0]), 0.1) == pytest.approx(2.0 - 10.0 * 0.1)
    assert d.is_feasible(np.array([1.0]), 0.0)


def test_weak_duality_on_random_pairs(rng):
    spec = ConeSpec.of(Orthant(2), Lorentz(3), Psd(3))
    for _ in range(50):
        x = jordan.square(jordan.random_element(spec, rng))
        A = rng.standard_normal((3, spec.n))
        p = ConicProgram(spec, A, A * spec.q_diagonal() @ x.data, jordan.zeros(spec), theta=jordan.inner_product(jordan.identity_element(spec), x) + 1.0)
        y = rng.standard_normal(3)
        nu = rng.random()
        # choose c so that (y, nu) is dual feasible with a random PSD-like slack
        c = p.combine(y) - nu * jordan.identity_element(spec) + jordan.square(jordan.random_element(spec, rng))
        p = p.with_cost(c)
        assert jordan.lambda_min(dual_slack(p, y, nu)) >= -1e-10
        assert p.objective(x) >= p.b @ y - p.theta * nu - 1e-6


def test_lorentz_rows_carry_the_metric():
    spec = ConeSpec.of(Lorentz(2))
    a = AlgebraElement(spec, np.array([1.0, 0.5]))
    p = ConicProgram.from_elements([a], [1.0], jordan.identity_element(spec), 1.0)
    x = AlgebraElement(spec, np.array([0.3, -0.2]))
    assert p.operator.apply(x)[0] == pytest.approx(jordan.inner_product(a, x))
    assert element_from_blocks(spec, [np.array([1.0, 0.5])]).allclose(a)
