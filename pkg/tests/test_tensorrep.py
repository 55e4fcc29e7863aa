import itertools

import numpy as np
import pytest

import oracles
from schurweyl.algebra import diagonal_algebra, full_algebra, scalars
from schurweyl.tensorrep import (TensorSpace, all_perms, collective_algebra, embed_site, gl_irrep_dim,
                                 isotypic_projector, joint_algebra, partitions, perm_op, perm_parity,
                                 permute_factors, sn_irrep_dim, sn_isotypic_projectors, sym_projector,
                                 symmetrize, tensor_power_algebra, tensor_power_expectation)


def test_tensor_space_cap():
    TensorSpace(4, 3).check_cap()
    with pytest.raises(ValueError):
        TensorSpace(2, 7).check_cap()
    with pytest.raises(ValueError):
        TensorSpace(0, 2)


@pytest.mark.parametrize("d, n", [(2, 2), (2, 3), (3, 3)])
def test_perm_op_matches_index_loop(d, n):
    space = TensorSpace(d, n)
    for s in all_perms(n):
        assert np.array_equal(perm_op(space, s).matrix.real, oracles.perm_matrix(s, d, n))


def test_perm_op_is_a_representation():
    space = TensorSpace(2, 3)
    for s, t in itertools.product(all_perms(3), repeat=2):
        st = tuple(s[t[j]] for j in range(3))
        assert np.allclose(perm_op(space, s).matrix @ perm_op(space, t).matrix, perm_op(space, st).matrix)


def test_perm_op_rejects_non_permutation():
    with pytest.raises(ValueError):
        perm_op(TensorSpace(2, 2), (0, 0))


def test_permute_factors_is_conjugation():
    rng = np.random.default_rng(0)
    x = rng.normal(size=(8, 8))
    space = TensorSpace(2, 3)
    for s in all_perms(3):
        p = perm_op(space, s).matrix
        assert np.allclose(permute_factors(x, s, 2, 3), p @ x @ p.conj().T)


def test_parity():
    assert perm_parity((0, 1, 2)) == 1
    assert perm_parity((1, 0, 2)) == -1
    assert perm_parity((1, 2, 0)) == 1
    for s in all_perms(4):
        assert perm_parity(s) == oracles.parity(s)


@pytest.mark.parametrize("d, n", [(2, 2), (3, 2), (2, 3), (3, 3)])
def test_sym_projectors(d, n):
    space = TensorSpace(d, n)
    for sign in (1, -1):
        p = sym_projector(space, sign)
        assert np.allclose(p.matrix, oracles.sym_projector(d, n, sign))
        assert np.allclose(p.matrix @ p.matrix, p.matrix)
    assert sym_projector(space, 1).rank == len(list(itertools.combinations_with_replacement(range(d), n)))
    assert sym_projector(space, -1).rank == len(list(itertools.combinations(range(d), n)))


def test_antisymmetric_empty_for_qubits_three_copies():
    assert sym_projector(TensorSpace(2, 3), -1).rank == 0


def test_partition_dimension_formulas():
    assert partitions(4) == [(4,), (3, 1), (2, 2), (2, 1, 1), (1, 1, 1, 1)]
    assert [sn_irrep_dim(p) for p in partitions(4)] == [1, 3, 2, 3, 1]
    # sum over partitions of dim(S_n irrep) * dim(U(d) irrep) is d^n
    for d, n in [(2, 3), (3, 3), (4, 3), (2, 4)]:
        assert sum(sn_irrep_dim(p) * gl_irrep_dim(p, d) for p in partitions(n, d)) == d ** n


@pytest.mark.parametrize("d, n", [(2, 3), (3, 3), (4, 3)])
def test_isotypic_projectors(d, n):
    space = TensorSpace(d, n)
    projs = sn_isotypic_projectors(space)
    assert np.allclose(sum(p.matrix for p in projs), np.eye(d ** n))
    labels = {p.label for p in projs}
    assert "symmetric" in labels and "isotypic(2,1)" in labels
    mixed = isotypic_projector(space, (2, 1)).matrix
    ref = np.eye(d ** n) - oracles.sym_projector(d, n, 1) - oracles.sym_projector(d, n, -1)
    assert np.allclose(mixed, ref)
    assert round(np.trace(mixed).real) == 2 * gl_irrep_dim((2, 1), d)


def test_isotypic_projector_missing_partition():
    with pytest.raises(ValueError):
        isotypic_projector(TensorSpace(2, 3), (1, 1, 1))


def test_symmetrize_commutes_with_perms():
    rng = np.random.default_rng(1)
    space = TensorSpace(2, 3)
    y = symmetrize(space, rng.normal(size=(8, 8)))
    for s in all_perms(3):
        p = perm_op(space, s).matrix
        assert np.allclose(p @ y, y @ p)


def test_tensor_power_expectation_matches_algebra_projection():
    rng = np.random.default_rng(2)
    for alg, n in [(diagonal_algebra(2), 3), (scalars(2), 2), (diagonal_algebra(3), 2)]:
        power = tensor_power_algebra(alg, n)
        x = rng.normal(size=(power.ambient_dim,) * 2) + 1j * rng.normal(size=(power.ambient_dim,) * 2)
        assert np.allclose(tensor_power_expectation(alg, x, n), power.project(x))


def test_embed_site():
    z = np.diag([1, -1])
    assert np.allclose(embed_site(z, 1, 2, 2), np.kron(np.eye(2), z))


@pytest.mark.parametrize("alg, n, expected", [
    (full_algebra(2), 2, 10),       # symmetric square of M_2
    (diagonal_algebra(2), 2, 3),
    (diagonal_algebra(2), 3, 4),
    (scalars(3), 3, 1),
])
def test_collective_algebra_dims(alg, n, expected):
    coll = collective_algebra(alg, n)
    assert coll.dim == expected
    # oracle: the span of U^{(x) n} over random unitaries U of the site algebra
    rng = np.random.default_rng(0)
    samples = []
    for _ in range(3 * expected + 5):
        h = np.tensordot(rng.normal(size=alg.dim) + 1j * rng.normal(size=alg.dim), alg.basis, axes=1)
        h = (h + h.conj().T) / 2
        w, v = np.linalg.eigh(h)
        u = (v * np.exp(1j * w)) @ v.conj().T
        samples.append(oracles.power(u, n))
    assert oracles.span_dim(samples) == expected


@pytest.mark.parametrize("alg, n, expected", [
    (scalars(2), 2, 2), (scalars(2), 3, 5), (diagonal_algebra(2), 2, 6), (full_algebra(2), 2, 16),
])
def test_joint_algebra_dims(alg, n, expected):
    joint = joint_algebra(alg, n)
    assert joint.dim == expected
    gens = [embed_site(b, k, alg.ambient_dim, n) for k in range(n) for b in alg.basis]
    gens += [oracles.perm_matrix((1, 0) + tuple(range(2, n)), alg.ambient_dim, n)]
    if n > 2:
        gens.append(oracles.perm_matrix(tuple(range(1, n)) + (0,), alg.ambient_dim, n))
    assert len(oracles.closure_span(gens, alg.ambient_dim ** n)) == expected
