"""Dense complex matrix helpers: tensor products, Hilbert-Schmidt geometry,
spectral routines and the tolerance policy shared by the rest of the package.

Operators are plain ``numpy`` arrays of dtype ``complex128``.  Families of
operators (bases, spanning sets) are stacked into arrays of shape
``(k, d, d)`` so they can be iterated like lists and fed to BLAS in one go.
"""
from __future__ import annotations

import dataclasses
import functools

import numpy as np
import scipy.sparse


@dataclasses.dataclass(frozen=True)
class Tolerance:
    """Numerical cutoffs.

    :param rank_eps: singular values below ``rank_eps * s_max`` count as zero
    :param match_eps: cutoff for operator comparisons (residual norms)
    """
    rank_eps: float = 1e-9
    match_eps: float = 1e-8

    def __post_init__(self):
        for name in ("rank_eps", "match_eps"):
            value = getattr(self, name)
            if not (0 < value < 1):
                raise ValueError(f"{name} must lie in (0, 1), got {value}")

    @property
    def gap_eps(self) -> float:
        # eigenvalue grouping threshold for spectral projectors
        return 1e3 * self.match_eps


DEFAULT_TOL = Tolerance()


def as_matrix(x, dim: int | None = None) -> np.ndarray:
    """Validate ``x`` as a finite square complex matrix."""
    x = np.asarray(x, dtype=np.complex128)
    if x.ndim != 2 or x.shape[0] != x.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {x.shape}")
    if dim is not None and x.shape[0] != dim:
        raise ValueError(f"expected dimension {dim}, got {x.shape[0]}")
    if not np.all(np.isfinite(x)):
        raise ValueError("matrix has non-finite entries")
    return x


def as_stack(mats, dim: int | None = None) -> np.ndarray:
    """Stack a sequence of square matrices into an array of shape (k, d, d)."""
    if isinstance(mats, np.ndarray) and mats.ndim == 3:
        ret = mats.astype(np.complex128, copy=False)
    else:
        mats = list(mats)
        if len(mats) == 0:
            if dim is None:
                raise ValueError("cannot infer the dimension of an empty family")
            return np.zeros((0, dim, dim), dtype=np.complex128)
        ret = np.stack([as_matrix(m) for m in mats])
    if ret.shape[1] != ret.shape[2] or (dim is not None and ret.shape[1] != dim):
        raise ValueError(f"inconsistent matrix family of shape {ret.shape}")
    return ret


def dagger(x: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(x, -1, -2))


def kron(a, b) -> np.ndarray:
    return np.kron(as_matrix(a), as_matrix(b))


def kron_all(mats) -> np.ndarray:
    return functools.reduce(np.kron, mats, np.ones((1, 1), dtype=np.complex128))


def hs_inner(a, b) -> complex:
    """Hilbert-Schmidt inner product tr(a^dagger b)."""
    a = as_matrix(a)
    b = as_matrix(b)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape[0]} vs {b.shape[0]}")
    return complex(np.vdot(a, b))


def orthonormal_span(mats, tol: Tolerance = DEFAULT_TOL, dim: int | None = None) -> np.ndarray:
    """HS-orthonormal basis of span(mats), one element per unit of numerical rank."""
    if len(mats) == 0:
        d = dim or 0
        return np.zeros((0, d, d), dtype=np.complex128)
    mats = as_stack(mats, dim)
    k, d, _ = mats.shape
    if k == 0:
        return mats
    flat = mats.reshape(k, d * d)
    _, s, vh = np.linalg.svd(flat, full_matrices=False)
    if s[0] == 0:
        return np.zeros((0, d, d), dtype=np.complex128)
    rank = int(np.sum(s > tol.rank_eps * s[0]))
    return vh[:rank].reshape(rank, d, d)


def herm_eig(h, tol: Tolerance = DEFAULT_TOL):
    """Eigen-decomposition of a Hermitian matrix, eigenvalues ascending."""
    h = as_matrix(h)
    scale = max(np.abs(h).max(), 1.0)
    if np.abs(h - h.conj().T).max() > tol.match_eps * scale:
        raise ValueError("matrix is not Hermitian")
    w, u = np.linalg.eigh((h + h.conj().T) / 2)
    return w, u


def group_eigenvalues(w: np.ndarray, gap: float) -> list[np.ndarray]:
    """Split ascending eigenvalues into clusters separated by more than ``gap``."""
    if len(w) == 0:
        return []
    breaks = np.nonzero(np.diff(w) > gap)[0] + 1
    return np.split(np.arange(len(w)), breaks)


def is_unitary(u: np.ndarray, tol: Tolerance = DEFAULT_TOL) -> bool:
    u = as_matrix(u)
    return bool(np.abs(u @ u.conj().T - np.eye(u.shape[0])).max() <= tol.match_eps)


def hermitian_parts(mats) -> list[np.ndarray]:
    """Hermitian and anti-Hermitian parts, skipping the ones that vanish.

    The commutant of a family equals the commutant of these parts.
    """
    ret = []
    for m in mats:
        norm = np.linalg.norm(m)
        x = (m + m.conj().T) / 2
        y = (m - m.conj().T) / 2j
        for z in (x, y):
            # roundoff-sized parts would turn into random constraints once normalized
            if np.linalg.norm(z) > 1e-10 * norm:
                ret.append(z)
    return ret


def commuting_space(hermitians, dim: int, tol: Tolerance = DEFAULT_TOL, seed=0) -> np.ndarray:
    """HS-orthonormal basis of {X : [X, h] = 0 for every h in ``hermitians``}.

    Any such X is block diagonal in the eigenbasis of a random combination of
    the h's, so the unknowns shrink from dim^2 to the sum of squared
    eigenspace dimensions before the remaining commutators are imposed.
    """
    rng = np.random.default_rng(seed)
    eye = np.eye(dim)
    hs = []
    for h in hermitians:
        h = as_matrix(h, dim)
        full = np.linalg.norm(h)
        h = h - (np.trace(h).real / dim) * eye
        norm = np.linalg.norm(h)
        if norm > 1e-10 * full:
            hs.append(h / norm)
    if len(hs) == 0:
        return np.eye(dim * dim, dtype=np.complex128).reshape(dim * dim, dim, dim)
    probe = sum(c * h for c, h in zip(rng.normal(size=len(hs)), hs))
    w, v = np.linalg.eigh(probe)
    spread = max(w[-1] - w[0], 1e-300)
    groups = group_eigenvalues(w, 100 * tol.match_eps * spread)
    rows, cols = [], []
    for g in groups:
        rows.append(np.repeat(g, len(g)))
        cols.append(np.tile(g, len(g)))
    rows = np.concatenate(rows)
    cols = np.concatenate(cols)
    num = len(rows)
    hs_eig = [v.conj().T @ h @ v for h in hs]

    def constraint(g):
        # column k holds vec([E_{rows[k], cols[k]}, g]): one row of g and one column
        k = np.repeat(np.arange(num), dim)
        j = np.tile(np.arange(dim), num)
        r = np.repeat(rows, dim)
        c = np.repeat(cols, dim)
        data = np.concatenate([g[c, j], -g[j, r]])
        flat = np.concatenate([r * dim + j, j * dim + c])
        return scipy.sparse.csc_matrix((data, (flat, np.concatenate([k, k]))), shape=(dim * dim, num))

    mats = [constraint(g) for g in hs_eig]
    gram = sum((m.conj().T @ m) for m in mats).toarray()
    lam, vec = np.linalg.eigh(gram)
    # each h has unit norm, so the constraint map has norm of order one
    scale = max(lam[-1], 1.0)
    null = lam <= 1e-12 * scale
    ambiguous = (lam > 1e-12 * scale) & (lam <= 1e-7 * scale)
    if np.any(ambiguous):
        # badly conditioned constraints: decide ranks on the unsquared system
        coeff = null_space(scipy.sparse.vstack(mats).toarray(), tol.rank_eps, np.sqrt(scale))
    else:
        coeff = vec[:, null]
    ret = np.zeros((coeff.shape[1], dim, dim), dtype=np.complex128)
    ret[:, rows, cols] = coeff.T
    return v @ ret @ v.conj().T


def null_space(system: np.ndarray, rank_eps: float, scale: float | None = None) -> np.ndarray:
    """Orthonormal columns spanning the kernel of ``system``.

    Singular values below ``rank_eps * scale`` (default: the largest one)
    count as zero.  Only the right singular vectors are formed.
    """
    rows, cols = system.shape
    _, s, vh = np.linalg.svd(system, full_matrices=rows < cols)
    s_full = np.zeros(cols)
    s_full[:len(s)] = s
    scale = (s_full[0] if cols else 0.0) if scale is None else scale
    return vh[s_full <= rank_eps * scale].conj().T


def fixed_point_space(pairs, tol: Tolerance = DEFAULT_TOL, seed=0) -> np.ndarray:
    """HS-orthonormal basis of {X : B X B^dagger = X for every pair (B, B^dagger)}.

    For unitary B the fixed points of conjugation are exactly the operators
    commuting with B, i.e. the eigenvalue-1 eigenspace of the averaging map.
    """
    pairs = list(pairs)
    if len(pairs) == 0:
        raise ValueError("fixed_point_space needs at least one conjugation pair")
    dim = as_matrix(pairs[0][0]).shape[0]
    for i, (b, b_dag) in enumerate(pairs):
        b = as_matrix(b, dim)
        b_dag = as_matrix(b_dag, dim)
        if np.abs(b.conj().T - b_dag).max() > tol.match_eps:
            raise ValueError(f"pair {i}: second entry is not the adjoint of the first")
        err = np.abs(b @ b_dag - np.eye(dim)).max()
        if err > tol.match_eps:
            raise ValueError(f"pair {i}: generator is not unitary (|B B^dagger - I| = {err:.3g})")
    return commuting_space(hermitian_parts([b for b, _ in pairs]), dim, tol, seed)


def span_residual(mats, basis) -> float:
    """Largest Frobenius distance from an element of ``mats`` to span(basis).

    ``basis`` must be HS-orthonormal.
    """
    mats = np.asarray(mats)
    if mats.shape[0] == 0:
        return 0.0
    k, d, _ = mats.shape
    basis = np.asarray(basis)
    if basis.shape[0] == d * d:
        return 0.0
    flat = mats.reshape(k, -1)
    if basis.shape[0] == 0:
        return float(np.linalg.norm(flat, axis=1).max())
    b = basis.reshape(basis.shape[0], -1)
    resid = flat - (flat @ b.conj().T) @ b
    return float(np.linalg.norm(resid, axis=1).max())


def random_hermitian_combination(basis, rng, unit=True) -> np.ndarray:
    """Random Hermitian element of span(basis), assuming the span is adjoint-closed."""
    basis = np.asarray(basis)
    k = basis.shape[0]
    coeff = rng.normal(size=k) + 1j * rng.normal(size=k)
    x = np.tensordot(coeff, basis, axes=1)
    x = (x + x.conj().T) / 2
    if unit:
        x = x / max(np.linalg.norm(x, 2), 1e-300)
    return x


def rand_unitary(dim: int, rng) -> np.ndarray:
    z = (rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def rand_density_matrix(dim: int, rng, rank: int | None = None) -> np.ndarray:
    rank = dim if rank is None else rank
    z = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    rho = z @ z.conj().T
    return rho / np.trace(rho).real


def matrix_to_json(m) -> dict:
    m = as_matrix(m)
    entries = [[[float(z.real), float(z.imag)] for z in row] for row in m]
    return {"dim": int(m.shape[0]), "entries": entries}


def matrix_from_json(obj) -> np.ndarray:
    try:
        dim = int(obj["dim"])
        entries = obj["entries"]
    except (KeyError, TypeError) as err:
        raise ValueError("matrix JSON needs 'dim' and 'entries'") from err
    if len(entries) != dim or any(len(row) != dim for row in entries):
        raise ValueError(f"matrix JSON entries do not form a {dim}x{dim} array")
    arr = np.array(entries, dtype=np.float64)
    if arr.shape != (dim, dim, 2):
        raise ValueError("each matrix entry must be a [re, im] pair")
    return as_matrix(arr[..., 0] + 1j * arr[..., 1])
