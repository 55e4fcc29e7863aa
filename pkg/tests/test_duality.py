import numpy as np
import pytest

import oracles
from schurweyl.algebra import algebra_from_basis, commutant, diagonal_algebra, full_algebra, scalars
from schurweyl.duality import (build_lpm, compare_algebras, lambda2_counterexample, left_right_algebras,
                               nongauge_counterexample, noiseless_operators, verify_duality,
                               verify_restricted_duality)
from schurweyl.tensorrep import TensorSpace, collective_algebra, perm_op, tensor_power_expectation


@pytest.mark.parametrize("alg, n, dim", [(scalars(2), 2, 2), (diagonal_algebra(2), 2, 6), (scalars(2), 3, 5)])
def test_verify_duality_examples(alg, n, dim):
    rep = verify_duality(alg, n)
    assert (rep.lhs_dim, rep.rhs_dim, rep.verdict) == (dim, dim, "equal")
    assert rep.mutual_containment


def test_verify_duality_cap():
    with pytest.raises(ValueError):
        verify_duality(scalars(2), 7)


def test_compare_algebras_verdicts():
    small, big = scalars(2), diagonal_algebra(2)
    assert compare_algebras(big, small).verdict == "lhs_strictly_larger"
    assert compare_algebras(small, big).verdict == "rhs_strictly_larger"
    assert compare_algebras(big, big).verdict == "equal"
    x = np.array([[[0, 1], [1, 0]]]) / np.sqrt(2)
    assert compare_algebras(big, algebra_from_basis(np.concatenate([scalars(2).basis, x]), 2)).verdict == "incomparable"


@pytest.mark.parametrize("alg, n, sign", [
    (diagonal_algebra(2), 2, 1), (full_algebra(3), 2, -1), (left_right_algebras()[0], 2, 1),
    (scalars(2), 3, 1), (diagonal_algebra(3), 2, -1),
])
def test_restricted_duality_equal(alg, n, sign):
    assert verify_restricted_duality(alg, n, sign).verdict == "equal"


def test_restricted_duality_empty_subspace():
    with pytest.raises(ValueError):
        verify_restricted_duality(scalars(2), 3, -1)


def test_nongauge_counterexample_locked():
    rep = nongauge_counterexample()
    assert (rep.lhs_dim, rep.rhs_dim, rep.verdict) == (3, 2, "lhs_strictly_larger")
    assert rep.details["site_is_gauge"] is False


def test_lambda2_counterexample_against_brute_force():
    """Independent construction with random unitaries, dense commutator systems
    and product closure; this is where the locked integers came from."""
    rep = lambda2_counterexample()
    rng = np.random.default_rng(1)
    proj = np.eye(64) - oracles.sym_projector(4, 3, 1) - oracles.sym_projector(4, 3, -1)
    w = oracles.isometry(proj)
    us = [oracles.haar_unitary(2, rng) for _ in range(3)]
    q_g = [w.conj().T @ oracles.power(np.kron(u, np.eye(2)), 3) @ w for u in us]
    q_gp = [w.conj().T @ oracles.power(np.kron(np.eye(2), u), 3) @ w for u in us]
    perms = [w.conj().T @ oracles.perm_matrix(p, 4, 3) @ w for p in ((1, 0, 2), (0, 2, 1))]
    rhs = oracles.vec_commutant(q_g + perms, 40)
    lhs = oracles.closure_span(q_gp, 40)
    assert (rep.lhs_dim, rep.rhs_dim) == (len(lhs), len(rhs)) == (20, 40)
    assert oracles.contained(lhs, rhs.reshape(len(rhs), -1)) < 1e-8
    assert rep.verdict == "rhs_strictly_larger"
    sym = rep.details["symmetric_component"]
    assert (sym["lhs_dim"], sym["rhs_dim"], sym["verdict"]) == (20, 20, "equal")


def test_lpm_full_algebra_is_compression():
    lpm = build_lpm(full_algebra(2), 2, 1)
    pi = lpm.projector
    rng = np.random.default_rng(0)
    x = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    assert np.allclose(lpm.phi(x), pi @ x @ pi)
    assert sum(lpm.included) == 1


def test_lpm_diagonal_coefficients():
    lpm = build_lpm(diagonal_algebra(2), 2, 1)
    assert np.allclose(lpm.coefficients, [1, 1, 0.5])
    assert lpm.details["choi_min_eigenvalue"] >= -1e-8


@pytest.mark.parametrize("alg, n, sign", [(diagonal_algebra(2), 2, 1), (diagonal_algebra(2), 2, -1),
                                          (diagonal_algebra(3), 2, 1), (left_right_algebras()[1], 2, -1)])
def test_lpm_properties(alg, n, sign):
    lpm = build_lpm(alg, n, sign)
    space = TensorSpace(alg.ambient_dim, n)
    dim = space.total_dim
    assert np.allclose(lpm(np.eye(dim)), np.eye(dim))
    assert np.linalg.eigvalsh(lpm.choi)[0] >= -1e-8
    symmetric = commutant(collective_algebra(commutant(alg), n))
    swap = perm_op(space, (1, 0)).matrix
    rng = np.random.default_rng(3)
    pi = lpm.projector
    for _ in range(50):
        x = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
        y = lpm(x)
        assert np.abs(tensor_power_expectation(alg, y, n) - y).max() < 1e-8
        assert np.abs(swap @ y - y @ swap).max() < 1e-8
        g = symmetric.project(x)
        assert np.abs(pi @ lpm(g) @ pi - pi @ g @ pi).max() < 1e-8


def test_lpm_choi_matches_oracle_definition():
    lpm = build_lpm(diagonal_algebra(2), 2, 1)
    ref = np.zeros((16, 16), dtype=complex)
    for i in range(4):
        for j in range(4):
            unit = np.zeros((4, 4))
            unit[i, j] = 1
            ref += np.kron(unit, lpm(unit))
    assert np.allclose(lpm.choi, ref)


def test_lpm_empty_subspace():
    with pytest.raises(ValueError):
        build_lpm(diagonal_algebra(2), 3, -1)


def test_noiseless_operators():
    assert noiseless_operators(scalars(2), 3).dim == 5
    assert noiseless_operators(diagonal_algebra(2), 1).dim == 2
    right, left = left_right_algebras()
    alg = noiseless_operators(right, 2)
    # every noiseless operator commutes with collective noise V (x) I on each pair
    u = oracles.haar_unitary(2, np.random.default_rng(0))
    q = oracles.power(np.kron(u, np.eye(2)), 2)
    assert max(np.abs(b @ q - q @ b).max() for b in alg.basis) < 1e-8
    noise = [oracles.power(np.kron(oracles.haar_unitary(2, np.random.default_rng(k)), np.eye(2)), 2) for k in range(3)]
    assert alg.dim == len(oracles.vec_commutant(noise, 16))
