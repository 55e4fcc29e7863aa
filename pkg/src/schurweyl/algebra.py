"""Finite-dimensional von Neumann algebras held as HS-orthonormal operator bases.

Besides generation and commutants this module computes the center, the
minimal central projectors and the Wedderburn form
``U^dagger A U = sum_J M_{m_J} (x) I_{n_J}`` of an algebra, and the
trace-preserving conditional expectation onto it (the Haar twirl over the
algebra's gauge group).
"""
from __future__ import annotations

import dataclasses

import numpy as np
import scipy.linalg

from .matcore import (DEFAULT_TOL, Tolerance, as_matrix, as_stack, commuting_space,
                      fixed_point_space, group_eigenvalues, hermitian_parts, herm_eig,
                      matrix_from_json, matrix_to_json, null_space, orthonormal_span,
                      random_hermitian_combination, span_residual)

# random elements used to stand in for a whole algebra when imposing commutation
NUM_PROBES = 3


@dataclasses.dataclass(frozen=True, eq=False)
class MatrixAlgebra:
    """Unital *-subalgebra of End(C^d) given by an HS-orthonormal basis.

    ``generators`` keeps whatever the caller built the algebra from, for
    provenance and JSON output.
    """
    ambient_dim: int
    basis: np.ndarray
    generators: tuple = ()

    @property
    def dim(self) -> int:
        return int(self.basis.shape[0])

    def __len__(self):
        return self.dim

    def project(self, x: np.ndarray) -> np.ndarray:
        flat = self.basis.reshape(self.dim, -1)
        coeff = flat.conj() @ np.asarray(x).reshape(-1)
        return (coeff @ flat).reshape(self.ambient_dim, self.ambient_dim)

    def residual(self, mats) -> float:
        """Largest distance from an element of ``mats`` to this algebra."""
        return span_residual(as_stack(mats, self.ambient_dim), self.basis)

    def random_hermitian(self, rng) -> np.ndarray:
        return random_hermitian_combination(self.basis, rng)


def algebra_from_basis(basis, d: int, generators=(), tol: Tolerance = DEFAULT_TOL) -> MatrixAlgebra:
    """Wrap the span of ``basis`` without checking closure (re-orthonormalized)."""
    basis = orthonormal_span(as_stack(basis, d), tol, dim=d)
    return MatrixAlgebra(d, basis, tuple(generators))


def scalars(d: int) -> MatrixAlgebra:
    return MatrixAlgebra(d, np.eye(d, dtype=np.complex128)[None] / np.sqrt(d), ())


def full_algebra(d: int) -> MatrixAlgebra:
    return MatrixAlgebra(d, np.eye(d * d, dtype=np.complex128).reshape(d * d, d, d), ())


def diagonal_algebra(d: int) -> MatrixAlgebra:
    basis = np.zeros((d, d, d), dtype=np.complex128)
    basis[np.arange(d), np.arange(d), np.arange(d)] = 1
    return MatrixAlgebra(d, basis, ())


def block_algebra(blocks) -> MatrixAlgebra:
    """Direct sum of algebras ``M_m (x) I_n`` for a list of (m, n) pairs."""
    d = sum(m * n for m, n in blocks)
    basis = []
    offset = 0
    for m, n in blocks:
        for i in range(m):
            for j in range(m):
                x = np.zeros((d, d), dtype=np.complex128)
                unit = np.zeros((m, m))
                unit[i, j] = 1
                x[offset:offset + m * n, offset:offset + m * n] = np.kron(unit, np.eye(n)) / np.sqrt(n)
                basis.append(x)
        offset += m * n
    return MatrixAlgebra(d, np.stack(basis), ())


def check_algebra(alg: MatrixAlgebra, tol: Tolerance = DEFAULT_TOL, seed=0, num_pairs: int = 64) -> dict:
    """Residuals of the unital *-algebra axioms (products are sampled)."""
    rng = np.random.default_rng(seed)
    d = alg.ambient_dim
    ret = {
        "identity": alg.residual([np.eye(d)]),
        "adjoint": alg.residual(np.conj(np.swapaxes(alg.basis, 1, 2))),
    }
    k = alg.dim
    if k * k <= num_pairs:
        pairs = [(i, j) for i in range(k) for j in range(k)]
    else:
        pairs = [tuple(x) for x in rng.integers(0, k, size=(num_pairs, 2))]
    ret["product"] = alg.residual([alg.basis[i] @ alg.basis[j] for i, j in pairs])
    return ret


def _random_hermitians(mats, rng, count: int) -> list[np.ndarray]:
    """Hermitian and anti-Hermitian parts of random complex combinations."""
    ret = []
    for _ in range(count):
        coeff = rng.normal(size=len(mats)) + 1j * rng.normal(size=len(mats))
        x = np.tensordot(coeff, mats, axes=1)
        for h in ((x + x.conj().T) / 2, (x - x.conj().T) / 2j):
            ret.append(h / max(np.linalg.norm(h, 2), 1e-300))
    return ret


def _commutant_basis(mats, d: int, tol: Tolerance, seed) -> np.ndarray:
    """Commutant of a family of matrices together with their adjoints.

    Large families are replaced by a few random unitaries exp(i h), h a random
    Hermitian element of their span; the answer is accepted once it also
    commutes with fresh random elements, otherwise the full family is used.
    """
    mats = as_stack(mats, d)
    rng = np.random.default_rng(seed)
    if mats.shape[0] <= NUM_PROBES:
        return commuting_space(hermitian_parts(mats), d, tol, seed)
    # unit spectral norm keeps exp injective on the spectrum of h
    unitaries = [scipy.linalg.expm(1j * h) for h in _random_hermitians(mats, rng, NUM_PROBES)]
    ret = fixed_point_space([(u, u.conj().T) for u in unitaries], tol, seed)
    checks = _random_hermitians(mats, rng, 1)
    worst = max((np.abs(x @ h - h @ x).max() for x in ret for h in checks), default=0.0)
    if worst > tol.match_eps:
        ret = commuting_space(hermitian_parts(mats), d, tol, seed)
    return ret


def commutant(alg: MatrixAlgebra, tol: Tolerance = DEFAULT_TOL, seed=0) -> MatrixAlgebra:
    """All operators commuting with every basis element of ``alg``."""
    basis = _commutant_basis(alg.basis, alg.ambient_dim, tol, seed)
    return MatrixAlgebra(alg.ambient_dim, basis, ())


def commutant_of(mats, d: int, tol: Tolerance = DEFAULT_TOL, seed=0) -> MatrixAlgebra:
    """Commutant of a family of d x d matrices (a von Neumann algebra)."""
    mats = as_stack(mats, d)
    return MatrixAlgebra(d, _commutant_basis(mats, d, tol, seed), ())


def closure_algebra(gens, d: int, tol: Tolerance = DEFAULT_TOL, max_rounds: int = 64) -> MatrixAlgebra:
    """Generated algebra by explicit closure under products.

    The span of {I} and the generators with their adjoints is multiplied by
    the seed set until its rank stops growing; every word in the generators
    is then in the span.  Slow but transparent, used as a cross-check.
    """
    gens = list(as_stack(gens, d)) if len(gens) else []
    seed_set = [np.eye(d, dtype=np.complex128)] + gens + [g.conj().T for g in gens]
    basis = orthonormal_span(seed_set, tol, dim=d)
    for _ in range(max_rounds):
        words = [b @ g for b in basis for g in seed_set[1:]]
        new = orthonormal_span(list(basis) + words, tol, dim=d)
        if new.shape[0] > d * d:
            raise RuntimeError("closure produced more than d^2 independent elements")
        if new.shape[0] == basis.shape[0]:
            return MatrixAlgebra(d, new, tuple(gens))
        basis = new
    raise RuntimeError(f"closure did not stabilize after {max_rounds} rounds")


def generate_algebra(gens, d: int, tol: Tolerance = DEFAULT_TOL, seed=0, method: str = "bicommutant") -> MatrixAlgebra:
    """Smallest unital *-algebra containing ``gens``.

    The default computes it as the bicommutant (equal to the generated
    algebra in finite dimension), which never materializes the pairwise
    products; ``method="closure"`` runs the product-closure loop instead.
    """
    gens = list(as_stack(gens, d)) if len(gens) else []
    if method == "closure":
        return closure_algebra(gens, d, tol)
    if method != "bicommutant":
        raise ValueError(f"unknown method {method!r}")
    if len(gens) == 0:
        return MatrixAlgebra(d, scalars(d).basis, ())
    first = _commutant_basis(gens, d, tol, seed)
    basis = _commutant_basis(first, d, tol, seed)
    if span_residual(np.stack(gens), basis) > tol.match_eps * max(1.0, max(np.linalg.norm(g) for g in gens)):
        raise RuntimeError("generated algebra does not contain its generators")
    return MatrixAlgebra(d, basis, tuple(gens))


@dataclasses.dataclass(frozen=True)
class GaugeReport:
    is_gauge: bool
    dim: int
    bicommutant_dim: int
    residual: float


def is_gauge_pair(alg: MatrixAlgebra, tol: Tolerance = DEFAULT_TOL, seed=0) -> GaugeReport:
    """Check alg = Comm{Comm{alg}}; false for spans that are not closed algebras."""
    bic = commutant(commutant(alg, tol, seed), tol, seed)
    resid = max(span_residual(bic.basis, alg.basis), span_residual(alg.basis, bic.basis))
    ok = bic.dim == alg.dim and resid <= tol.match_eps
    return GaugeReport(bool(ok), alg.dim, bic.dim, resid)


def same_span(a: MatrixAlgebra, b: MatrixAlgebra, tol: Tolerance = DEFAULT_TOL) -> bool:
    if a.dim != b.dim:
        return False
    return max(span_residual(a.basis, b.basis), span_residual(b.basis, a.basis)) <= tol.match_eps


def center(alg: MatrixAlgebra, tol: Tolerance = DEFAULT_TOL, seed=0, comm: MatrixAlgebra | None = None) -> MatrixAlgebra:
    """alg intersected with its commutant.

    The center of A is also the center of A', so the search runs inside
    whichever of the two is smaller.
    """
    d = alg.ambient_dim
    small = alg
    if alg.dim > 64:
        comm = commutant(alg, tol, seed) if comm is None else comm
        if comm.dim < alg.dim:
            small = comm
    rng = np.random.default_rng(seed)
    k = small.dim
    if k == 1:
        return MatrixAlgebra(d, small.basis.copy(), ())
    probes = [small.random_hermitian(rng) for _ in range(NUM_PROBES)] if k > 2 * NUM_PROBES else list(small.basis)
    # columns: vec([b_i, probe]) for each probe, stacked
    cols = []
    for h in probes:
        cols.append(((small.basis @ h) - (h @ small.basis)).reshape(k, -1).T)
    system = np.concatenate(cols, axis=0)
    coeff = null_space(system, tol.rank_eps, scale=max(np.linalg.norm(system, 2), 1.0))
    basis = np.tensordot(coeff.T, small.basis, axes=1)
    check = small.random_hermitian(rng)
    if max(np.abs(z @ check - check @ z).max() for z in basis) > tol.match_eps:
        raise RuntimeError("center computation failed the commutation check")
    return MatrixAlgebra(d, basis, ())


def _projector_key(p: np.ndarray):
    # rank first, then the mean basis index of the support (deterministic)
    diag = np.real(np.diag(p))
    return (int(round(diag.sum())), float(np.dot(diag, np.arange(len(diag)))))


def minimal_central_projectors(alg: MatrixAlgebra, tol: Tolerance = DEFAULT_TOL, seed=0,
                               cent: MatrixAlgebra | None = None) -> list[np.ndarray]:
    """Projectors onto the simple summands of ``alg``, sorted by (rank, support)."""
    d = alg.ambient_dim
    cent = center(alg, tol, seed) if cent is None else cent
    if cent.dim == 1:
        return [np.eye(d, dtype=np.complex128)]
    for attempt in range(5):
        rng = np.random.default_rng([seed, attempt])
        z = cent.random_hermitian(rng)
        w, u = herm_eig(z, tol)
        w = w / max(w[-1] - w[0], 1e-300)
        groups = group_eigenvalues(w, tol.gap_eps)
        if len(groups) == cent.dim:
            ret = [u[:, g] @ u[:, g].conj().T for g in groups]
            return sorted(ret, key=_projector_key)
    raise RuntimeError(f"could not separate {cent.dim} central eigenvalues (seed {seed}, 5 attempts)")


@dataclasses.dataclass(frozen=True, eq=False)
class BlockStructure:
    """Wedderburn data: ``basis_change^dagger a basis_change`` is block diagonal
    with blocks ``a_J (x) I_{n_J}`` of size ``m_J * n_J``."""
    blocks: tuple
    basis_change: np.ndarray
    central_projectors: tuple = ()


def _block_isometry(p: np.ndarray) -> np.ndarray:
    w, u = np.linalg.eigh(p)
    return u[:, w > 0.5]


def block_decompose(alg: MatrixAlgebra, tol: Tolerance = DEFAULT_TOL, seed=0) -> BlockStructure:
    """Unitary bringing ``alg`` to the form sum_J M_{m_J} (x) I_{n_J}.

    Within each central block a random Hermitian element of the commutant
    has n_J distinct eigenvalues of multiplicity m_J; its eigenspaces carry
    copies of the irreducible block, aligned with intertwiners taken from a
    second random commutant element.
    """
    d = alg.ambient_dim
    comm = commutant(alg, tol, seed)
    projectors = minimal_central_projectors(alg, tol, seed, cent=center(alg, tol, seed, comm=comm))
    probe = np.diag(np.arange(d, dtype=np.float64))
    found = []
    for p in projectors:
        iso = _block_isometry(p)
        rank = iso.shape[1]
        for attempt in range(5):
            rng = np.random.default_rng([seed, attempt, rank])
            c1 = iso.conj().T @ comm.random_hermitian(rng) @ iso
            c2 = iso.conj().T @ comm.project(rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))) @ iso
            w, u = herm_eig(c1, tol)
            w = w / max(w[-1] - w[0], 1.0)
            groups = group_eigenvalues(w, tol.gap_eps)
            n = len(groups)
            if rank % n or any(len(g) != rank // n for g in groups):
                continue
            m = rank // n
            first = u[:, groups[0]]
            copies = [first]
            for g in groups[1:]:
                e = u[:, g]
                t = e.conj().T @ c2 @ first
                # t is a multiple of a unitary (Schur); its polar factor aligns the copy
                polar, _ = scipy.linalg.polar(t)
                if np.linalg.norm(t) < 1e-6 or np.abs(t.conj().T @ t - np.eye(m) * np.trace(t.conj().T @ t) / m).max() > 1e-6 * np.linalg.norm(t) ** 2:
                    break
                copies.append(e @ polar)
            else:
                cols = np.stack(copies, axis=2).reshape(rank, m * n)
                found.append(((n, m, float(np.real(np.trace(p @ probe)))), iso @ cols, p))
                break
        else:
            raise RuntimeError(f"could not split a central block of rank {rank} (seed {seed})")
    found.sort(key=lambda x: x[0])
    u = np.concatenate([x[1] for x in found], axis=1)
    blocks = tuple((x[0][1], x[0][0]) for x in found)
    ret = BlockStructure(blocks, u, tuple(x[2] for x in found))
    if block_residual(alg, ret) > tol.match_eps * 10:
        raise RuntimeError("block decomposition failed the block-form check")
    return ret


def block_residual(alg: MatrixAlgebra, bs: BlockStructure) -> float:
    """Distance of the conjugated basis from the required block form."""
    u = bs.basis_change
    conj = u.conj().T @ alg.basis @ u
    target = np.zeros_like(conj)
    offset = 0
    for m, n in bs.blocks:
        sl = slice(offset, offset + m * n)
        blk = conj[:, sl, sl]
        top = blk[:, ::n, ::n]
        target[:, sl, sl] = np.einsum("kij,ab->kiajb", top, np.eye(n)).reshape(-1, m * n, m * n)
        offset += m * n
    return float(np.abs(conj - target).max()) if alg.dim else 0.0


def conditional_expectation(alg: MatrixAlgebra, x, tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    """HS-orthogonal projection onto ``alg``: the twirl over its gauge group."""
    x = as_matrix(x, alg.ambient_dim)
    return alg.project(x)


def algebra_to_json(alg: MatrixAlgebra) -> dict:
    return {"ambient_dim": alg.ambient_dim, "generators": [matrix_to_json(b) for b in alg.basis]}


def algebra_from_json(obj, tol: Tolerance = DEFAULT_TOL, seed=0, closed: bool = True) -> MatrixAlgebra:
    """Parse {"ambient_dim", "generators"}; the algebra they generate unless
    ``closed=False``, in which case the raw span is kept (for gauge checks)."""
    try:
        d = int(obj["ambient_dim"])
        gens = [matrix_from_json(g) for g in obj["generators"]]
    except (KeyError, TypeError) as err:
        raise ValueError("algebra JSON needs 'ambient_dim' and 'generators'") from err
    if closed:
        return generate_algebra(gens, d, tol, seed)
    return algebra_from_basis(gens or [np.eye(d)], d, gens, tol)
