"""Operators on (C^d)^{(x) n}: tensor-factor permutations, symmetric and
antisymmetric projectors, S_n isotypic projectors, tensor-power algebras and
their permutation-invariant (collective) subalgebras.

Permutations are tuples ``s`` of 0-based images, ``s[j]`` being where tensor
factor ``j`` is sent, so that ``P(s) P(t) = P(s o t)``.
"""
from __future__ import annotations

import dataclasses
import itertools
import math

import numpy as np

from .algebra import MatrixAlgebra, generate_algebra, minimal_central_projectors
from .matcore import DEFAULT_TOL, Tolerance, as_matrix, kron_all, orthonormal_span

# largest total dimension d^n handled; operator space dimension is its square
DEFAULT_CAP = 64


@dataclasses.dataclass(frozen=True)
class TensorSpace:
    site_dim: int
    copies: int

    def __post_init__(self):
        if self.site_dim < 1 or self.copies < 1:
            raise ValueError(f"invalid tensor space d={self.site_dim}, n={self.copies}")

    @property
    def total_dim(self) -> int:
        return self.site_dim ** self.copies

    def check_cap(self, cap: int = DEFAULT_CAP):
        if self.total_dim > cap:
            raise ValueError(f"total dimension {self.site_dim}^{self.copies} = {self.total_dim} exceeds the cap {cap}")


@dataclasses.dataclass(frozen=True, eq=False)
class PermOperator:
    perm: tuple
    matrix: np.ndarray


@dataclasses.dataclass(frozen=True, eq=False)
class SubspaceProjector:
    label: str
    matrix: np.ndarray
    partition: tuple | None = None

    @property
    def rank(self) -> int:
        return int(round(np.trace(self.matrix).real))


def _check_perm(s, n: int) -> tuple:
    s = tuple(int(x) for x in s)
    if sorted(s) != list(range(n)):
        raise ValueError(f"{s} is not a permutation of 0..{n - 1}")
    return s


def perm_parity(s) -> int:
    """+1 for even permutations, -1 for odd ones."""
    s = list(s)
    sign = 1
    for i in range(len(s)):
        while s[i] != i:
            j = s[i]
            s[i], s[j] = s[j], s[i]
            sign = -sign
    return sign


def permute_factors(x: np.ndarray, s, d: int, n: int) -> np.ndarray:
    """P(s) x P(s)^dagger by relabelling tensor legs (no matrix products)."""
    inv = list(np.argsort(s))
    axes = inv + [n + k for k in inv]
    return np.asarray(x).reshape([d] * (2 * n)).transpose(axes).reshape(d ** n, d ** n)


def perm_op(space: TensorSpace, s) -> PermOperator:
    """P(s)|i_1 ... i_n> = |i_{s^-1(1)} ... i_{s^-1(n)}>."""
    d, n = space.site_dim, space.copies
    s = _check_perm(s, n)
    dim = space.total_dim
    inv = list(np.argsort(s))
    mat = np.eye(dim, dtype=np.complex128).reshape([d] * n + [dim]).transpose(inv + [n]).reshape(dim, dim)
    return PermOperator(s, mat)


def all_perms(n: int):
    return list(itertools.permutations(range(n)))


def sym_projector(space: TensorSpace, sign: int) -> SubspaceProjector:
    """(1/n!) sum_s (+-1)^{parity(s)} P(s)."""
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    n = space.copies
    ret = np.zeros((space.total_dim, space.total_dim), dtype=np.complex128)
    for s in all_perms(n):
        ret += (perm_parity(s) if sign < 0 else 1) * perm_op(space, s).matrix
    ret /= math.factorial(n)
    label = "symmetric" if sign > 0 else "antisymmetric"
    return SubspaceProjector(label, ret, (n,) if sign > 0 else (1,) * n)


def symmetrize(space: TensorSpace, x) -> np.ndarray:
    """Average of P(s) x P(s)^dagger over S_n."""
    d, n = space.site_dim, space.copies
    x = as_matrix(x, space.total_dim)
    perms = all_perms(n)
    return sum(permute_factors(x, s, d, n) for s in perms) / len(perms)


def partitions(n: int, max_rows: int | None = None):
    """Partitions of n in decreasing lexicographic order."""
    def rec(rest, largest):
        if rest == 0:
            yield ()
            return
        for k in range(min(rest, largest), 0, -1):
            for tail in rec(rest - k, k):
                yield (k,) + tail
    return [p for p in rec(n, n) if max_rows is None or len(p) <= max_rows]


def _cells(lam):
    return [(i, j) for i, row in enumerate(lam) for j in range(row)]


def _hook(lam, i, j):
    conj = [sum(1 for row in lam if row > c) for c in range(lam[0])]
    return lam[i] - j + conj[j] - i - 1


def sn_irrep_dim(lam) -> int:
    """Hook-length formula."""
    n = sum(lam)
    return math.factorial(n) // math.prod(_hook(lam, i, j) for i, j in _cells(lam))


def gl_irrep_dim(lam, d: int) -> int:
    """Hook-content formula for the U(d) irrep paired with lam."""
    num = math.prod(d + j - i for i, j in _cells(lam))
    den = math.prod(_hook(lam, i, j) for i, j in _cells(lam))
    return num // den


def transposition_ratio(lam) -> float:
    """chi_lam(transposition) / dim(lam) = 2 * (sum of contents) / (n(n-1))."""
    n = sum(lam)
    if n < 2:
        return 1.0
    return 2 * sum(j - i for i, j in _cells(lam)) / (n * (n - 1))


def partition_label(lam) -> str:
    n = sum(lam)
    if lam == (n,):
        return "symmetric"
    if lam == (1,) * n:
        return "antisymmetric"
    return "isotypic(" + ",".join(str(k) for k in lam) + ")"


def sn_isotypic_projectors(space: TensorSpace, tol: Tolerance = DEFAULT_TOL, seed=0) -> list[SubspaceProjector]:
    """Minimal central projectors of Alg{P(S_n)}, labelled by partitions for n <= 4.

    A projector is matched to the partition whose trace (dim of the S_n irrep
    times dim of the paired U(d) irrep) and normalized transposition
    character agree with it; both are distinct across partitions for n <= 4.
    """
    d, n = space.site_dim, space.copies
    if n == 1:
        return [SubspaceProjector("symmetric", np.eye(d, dtype=np.complex128), (1,))]
    gens = [perm_op(space, s).matrix for s in _adjacent_transpositions(n)]
    alg = generate_algebra(gens, space.total_dim, tol, seed)
    projectors = minimal_central_projectors(alg, tol, seed)
    swap = gens[0]
    ret = []
    for p in projectors:
        trace = np.trace(p).real
        ratio = np.trace(p @ swap).real / trace
        label, part = "unlabelled", None
        if n <= 4:
            for lam in partitions(n, d):
                expected = sn_irrep_dim(lam) * gl_irrep_dim(lam, d)
                if abs(trace - expected) < 0.5 and abs(ratio - transposition_ratio(lam)) < 1e-6:
                    label, part = partition_label(lam), lam
                    break
        ret.append(SubspaceProjector(label, p, part))
    return ret


def _adjacent_transpositions(n: int):
    ret = []
    for k in range(n - 1):
        s = list(range(n))
        s[k], s[k + 1] = s[k + 1], s[k]
        ret.append(tuple(s))
    return ret


def isotypic_projector(space: TensorSpace, lam, tol: Tolerance = DEFAULT_TOL, seed=0) -> SubspaceProjector:
    for p in sn_isotypic_projectors(space, tol, seed):
        if p.partition == tuple(lam):
            return p
    raise ValueError(f"partition {tuple(lam)} does not occur for d={space.site_dim}, n={space.copies}")


def embed_site(x: np.ndarray, site: int, d: int, n: int) -> np.ndarray:
    """x acting on tensor factor ``site``, identity elsewhere."""
    eye = np.eye(d)
    return kron_all([x if k == site else eye for k in range(n)])


def tensor_power_algebra(alg: MatrixAlgebra, n: int, cap: int = DEFAULT_CAP) -> MatrixAlgebra:
    """A^{(x) n} with basis the n-fold products of basis elements."""
    space = TensorSpace(alg.ambient_dim, n)
    space.check_cap(cap)
    basis = alg.basis
    for _ in range(n - 1):
        k, m = basis.shape[0], basis.shape[1]
        basis = np.einsum("aij,bkl->abikjl", basis, alg.basis).reshape(
            k * alg.dim, m * alg.ambient_dim, m * alg.ambient_dim)
    return MatrixAlgebra(space.total_dim, basis, ())


def tensor_power_expectation(alg: MatrixAlgebra, x, n: int) -> np.ndarray:
    """Conditional expectation onto A^{(x) n}, applied one tensor factor at a time."""
    d = alg.ambient_dim
    flat = alg.basis.reshape(alg.dim, d * d)
    # projector on the d^2-dim operator space of a single factor
    proj = flat.T @ flat.conj()
    t = as_matrix(x, d ** n).reshape([d] * (2 * n))
    # pair row and column legs of each factor
    order = [a for k in range(n) for a in (k, n + k)]
    t = t.transpose(order).reshape([d * d] * n)
    for k in range(n):
        t = np.moveaxis(np.tensordot(proj, t, axes=([1], [k])), 0, k)
    t = t.reshape([d] * (2 * n))
    back = [2 * k for k in range(n)] + [2 * k + 1 for k in range(n)]
    return t.transpose(back).reshape(d ** n, d ** n)


def collective_algebra(alg: MatrixAlgebra, n: int, tol: Tolerance = DEFAULT_TOL, cap: int = DEFAULT_CAP) -> MatrixAlgebra:
    """Alg{Q(G)} for the group G spanning ``alg``: the symmetrized part of A^{(x) n}.

    Symmetrized products depend only on the multiset of basis indices, so
    one representative per multiset is enough to span.
    """
    space = TensorSpace(alg.ambient_dim, n)
    space.check_cap(cap)
    words = []
    for idx in itertools.combinations_with_replacement(range(alg.dim), n):
        words.append(symmetrize(space, kron_all([alg.basis[i] for i in idx])))
    basis = orthonormal_span(words, tol, dim=space.total_dim)
    return MatrixAlgebra(space.total_dim, basis, ())


def joint_algebra(alg: MatrixAlgebra, n: int, tol: Tolerance = DEFAULT_TOL, seed=0, cap: int = DEFAULT_CAP) -> MatrixAlgebra:
    """Alg{A^{(x) n}, P(S_n)}.

    A^{(x) n} is generated by copies of A on single factors, so those plus
    the adjacent transpositions generate the same algebra.
    """
    d = alg.ambient_dim
    space = TensorSpace(d, n)
    space.check_cap(cap)
    gens = [embed_site(b, k, d, n) for k in range(n) for b in alg.basis]
    gens += [perm_op(space, s).matrix for s in _adjacent_transpositions(n)]
    return generate_algebra(gens, space.total_dim, tol, seed)
