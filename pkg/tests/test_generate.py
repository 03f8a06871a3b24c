import numpy as np
import pytest

from rpconic import jordan
from rpconic.generate import (
    CostKind,
    Feasibility,
    GenSpec,
    generate,
    generate_feasible,
    generate_infeasible,
    psd_side_for,
)
from rpconic.jordan import ConeSpec, Lorentz, Orthant, Psd, smat
from rpconic.solver import Status, solve, verify_certificate


def test_feasible_witness():
    p, x0 = generate_feasible(GenSpec.psd(10, 40, seed=1))
    assert np.linalg.norm(p.operator.apply(x0) - p.b) <= 1e-12 * (1 + np.linalg.norm(p.b))
    assert jordan.lambda_min(x0) > 0
    assert jordan.inner_product(jordan.identity_element(p.spec), x0) <= p.theta
    assert p.theta == pytest.approx(2 * jordan.inner_product(jordan.identity_element(p.spec), x0))


def test_mixed_cone_witness():
    spec = ConeSpec.of(Orthant(3), Lorentz(4), Psd(3))
    p, x0 = generate_feasible(GenSpec(spec, 8, seed=2))
    assert jordan.lambda_min(x0) > 0
    assert np.allclose(p.operator.apply(x0), p.b, rtol=1e-12)


def test_side_from_vectorized_size():
    assert psd_side_for(1540) == 55
    assert psd_side_for(1830) == 60
    assert psd_side_for(820) == 40
    with pytest.raises(ValueError):
        psd_side_for(1000)


def test_generation_is_deterministic():
    gs = GenSpec.psd(6, 20, seed=11)
    p, _ = generate(gs)
    q, _ = generate(gs)
    assert np.array_equal(p.A, q.A) and np.array_equal(p.b, q.b) and p.theta == q.theta
    r, _ = generate(GenSpec.psd(6, 20, seed=12))
    assert not np.array_equal(p.A, r.A)


@pytest.mark.parametrize("density", [0.1, 0.2, 0.5, 1.0])
def test_constraint_density(density):
    side = 20
    p, _ = generate_feasible(GenSpec.psd(side, 10, density=density, seed=0))
    iu = np.triu_indices(side)
    for a in p.constraints:
        frac = np.mean(a.block_matrix(0)[iu] != 0)
        assert abs(frac - density) <= 0.05
        M = a.block_matrix(0)
        assert np.array_equal(M, M.T)
        assert M.min() >= 0 and M.max() <= 1


def test_cost_kinds():
    p, _ = generate_feasible(GenSpec.psd(5, 5, seed=0))
    assert np.allclose(p.c.data, jordan.identity_element(p.spec).data)
    q, _ = generate_feasible(GenSpec.psd(5, 5, seed=0, cost_kind=CostKind.RANDOM))
    C = q.c.block_matrix(0)
    assert np.array_equal(C, C.T) and not np.allclose(C, np.eye(5))


def test_infeasible_certificate_margin():
    gs = GenSpec.psd(8, 40, seed=3, feasibility=Feasibility.INFEASIBLE, margin=0.1)
    p, cert = generate_infeasible(gs)
    assert verify_certificate(p, cert)
    assert cert.normalization == pytest.approx(1.0, abs=1e-10)
    N = p.combine(cert.y_hat) - cert.nu_hat * jordan.identity_element(p.spec)
    if jordan.lambda_max(p.combine(cert.y_hat)) > 0:
        assert jordan.lambda_max(N) == pytest.approx(-0.1, abs=1e-10)
    assert cert.nu_hat >= 0.1


def test_generated_infeasible_instances_are_detected():
    detected = 0
    for seed in range(20):
        p, cert = generate_infeasible(GenSpec.psd(5, 12, seed=seed, feasibility=Feasibility.INFEASIBLE))
        assert verify_certificate(p, cert)
        r = solve(p)
        detected += r.status is Status.PRIMAL_INFEASIBLE and verify_certificate(p, r.certificate)
    assert detected == 20


def test_generated_feasible_instances_are_solved():
    for seed in range(5):
        p, _ = generate_feasible(GenSpec.psd(6, 25, seed=seed))
        assert solve(p).status is Status.OPTIMAL


def test_wrong_feasibility_flag_rejected():
    with pytest.raises(ValueError):
        generate_feasible(GenSpec.psd(3, 2, feasibility=Feasibility.INFEASIBLE))
    with pytest.raises(ValueError):
        generate_infeasible(GenSpec.psd(3, 2))


def test_genspec_validation_and_round_trip():
    with pytest.raises(ValueError):
        GenSpec.psd(3, 0)
    with pytest.raises(ValueError):
        GenSpec.psd(3, 2, density=0.0)
    with pytest.raises(ValueError):
        GenSpec.psd(3, 2, theta_factor=1.0)
    gs = GenSpec(ConeSpec.of(Orthant(2), Psd(3)), 4, density=0.3, cost_kind=CostKind.RANDOM, seed=5)
    assert GenSpec.from_dict(gs.to_dict()) == gs


def test_witness_is_scaled_gram_matrix():
    p, x0 = generate_feasible(GenSpec.psd(6, 4, seed=0, witness_shift=0.1))
    X = x0.block_matrix(0)
    assert np.linalg.eigvalsh(X)[0] >= 0.1 - 1e-12
    assert np.array_equal(smat(x0.data, 6), X)
