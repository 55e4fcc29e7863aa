"""Numerical checks of the generalized Schur-Weyl duality, its restriction to
the symmetric and antisymmetric subspaces, the two counterexamples, and the
unital CP maps L+- that turn global gauge symmetry into local symmetry.
"""
from __future__ import annotations

import dataclasses
import functools

import numpy as np

from .algebra import (MatrixAlgebra, algebra_from_basis, commutant, commutant_of, full_algebra,
                      generate_algebra, is_gauge_pair, minimal_central_projectors, scalars)
from .matcore import DEFAULT_TOL, Tolerance, as_matrix, span_residual
from .tensorrep import (DEFAULT_CAP, TensorSpace, collective_algebra, isotypic_projector, joint_algebra,
                        perm_op, sym_projector, tensor_power_expectation)

VERDICTS = ("equal", "lhs_strictly_larger", "rhs_strictly_larger", "incomparable")


@dataclasses.dataclass(frozen=True)
class DualityReport:
    lhs_dim: int
    rhs_dim: int
    mutual_containment: bool
    max_residual: float
    verdict: str
    details: dict = dataclasses.field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "lhs_dim": self.lhs_dim,
            "rhs_dim": self.rhs_dim,
            "mutual_containment": self.mutual_containment,
            "max_residual": self.max_residual,
            "verdict": self.verdict,
            "details": self.details,
        }


def compare_algebras(lhs: MatrixAlgebra, rhs: MatrixAlgebra, tol: Tolerance = DEFAULT_TOL,
                     details: dict | None = None) -> DualityReport:
    """Span comparison by mutual projection residuals and dimensions."""
    lhs_in_rhs = span_residual(lhs.basis, rhs.basis)
    rhs_in_lhs = span_residual(rhs.basis, lhs.basis)
    eps = tol.match_eps
    details = dict(details or {})
    details.update({"lhs_in_rhs": lhs_in_rhs, "rhs_in_lhs": rhs_in_lhs})
    mutual = lhs_in_rhs <= eps and rhs_in_lhs <= eps
    if mutual and lhs.dim == rhs.dim:
        verdict, resid = "equal", max(lhs_in_rhs, rhs_in_lhs)
    elif rhs_in_lhs <= eps and lhs.dim > rhs.dim:
        verdict, resid = "lhs_strictly_larger", rhs_in_lhs
    elif lhs_in_rhs <= eps and rhs.dim > lhs.dim:
        verdict, resid = "rhs_strictly_larger", lhs_in_rhs
    else:
        verdict, resid = "incomparable", max(lhs_in_rhs, rhs_in_lhs)
    return DualityReport(lhs.dim, rhs.dim, bool(mutual), float(resid), verdict, details)


def verify_duality(alg: MatrixAlgebra, n: int, tol: Tolerance = DEFAULT_TOL, seed=0,
                   cap: int = DEFAULT_CAP) -> DualityReport:
    """Compare Comm{Q(G_A)} with Alg{A^{(x) n}, P(S_n)}.

    Q(G_A) spans the symmetrized tensor power of the commutant of A, whose
    commutant is the left-hand side.
    """
    TensorSpace(alg.ambient_dim, n).check_cap(cap)
    comm = commutant(alg, tol, seed)
    collective = collective_algebra(comm, n, tol, cap)
    lhs = commutant(collective, tol, seed)
    rhs = joint_algebra(alg, n, tol, seed, cap)
    details = {"site_dim": alg.ambient_dim, "copies": n, "algebra_dim": alg.dim,
               "commutant_dim": comm.dim, "collective_dim": collective.dim}
    return compare_algebras(lhs, rhs, tol, details)


def subspace_isometry(projector: np.ndarray) -> np.ndarray:
    """Orthonormal columns spanning the range of a projector."""
    w, u = np.linalg.eigh(as_matrix(projector))
    return u[:, w > 0.5]


def compress(mats, iso: np.ndarray) -> np.ndarray:
    """W^dagger x W for each x (W an isometry)."""
    return iso.conj().T @ np.asarray(mats) @ iso


def _compressed_algebra(alg: MatrixAlgebra, iso: np.ndarray, tol: Tolerance, seed) -> MatrixAlgebra:
    r = iso.shape[1]
    span = algebra_from_basis(compress(alg.basis, iso), r, (), tol)
    if span.dim == r * r:
        return full_algebra(r)
    return generate_algebra(list(span.basis), r, tol, seed)


def verify_restricted_duality(alg: MatrixAlgebra, n: int, sign: int, tol: Tolerance = DEFAULT_TOL,
                              seed=0, cap: int = DEFAULT_CAP) -> DualityReport:
    """On the (anti)symmetric subspace: is Alg{Q(G'_A)} the commutant of Alg{Q(G_A)}?

    lhs is the compressed Alg{Q(G'_A)}, rhs the commutant (inside the
    compressed space) of the compressed Alg{Q(G_A)}; the reverse comparison
    goes into the details.
    """
    d = alg.ambient_dim
    space = TensorSpace(d, n)
    space.check_cap(cap)
    proj = sym_projector(space, sign)
    if proj.rank == 0:
        raise ValueError(f"the {proj.label} subspace of ({d})^{n} is empty")
    iso = subspace_isometry(proj.matrix)
    comm = commutant(alg, tol, seed)
    q_g = _compressed_algebra(collective_algebra(comm, n, tol, cap), iso, tol, seed)
    q_gp = _compressed_algebra(collective_algebra(alg, n, tol, cap), iso, tol, seed)
    rhs = commutant(q_g, tol, seed)
    reverse = compare_algebras(q_g, commutant(q_gp, tol, seed), tol)
    details = {"subspace": proj.label, "subspace_dim": proj.rank,
               "reverse": {"lhs_dim": reverse.lhs_dim, "rhs_dim": reverse.rhs_dim,
                           "verdict": reverse.verdict, "max_residual": reverse.max_residual}}
    return compare_algebras(q_gp, rhs, tol, details)


def left_right_algebras():
    """A = I (x) End(C^2) on C^4 = C^2 (x) C^2 and its commutant End(C^2) (x) I."""
    eye = np.eye(2)
    units = full_algebra(2).basis
    right = MatrixAlgebra(4, np.stack([np.kron(eye, u) for u in units]) / np.sqrt(2), ())
    left = MatrixAlgebra(4, np.stack([np.kron(u, eye) for u in units]) / np.sqrt(2), ())
    return right, left


def lambda2_counterexample(tol: Tolerance = DEFAULT_TOL, seed=0) -> DualityReport:
    """The d=4, n=3 instance where the two-sided duality fails on the mixed S_3 component.

    G = {V (x) I} acts on the left tensor factor of C^4 = C^2 (x) C^2, its
    commutant G' = {I (x) V} on the right one.  On the isotypic component
    of the two-dimensional S_3 irrep, lhs = Alg{Pi Q(G') Pi} and
    rhs = Comm{Pi Q(G) Pi} intersected with Comm{Pi P(S_3) Pi}.
    The symmetric component of the same setup goes into the details.
    """
    n = 3
    space = TensorSpace(4, n)
    alg_gp, alg_g = left_right_algebras()
    q_gp = collective_algebra(alg_gp, n, tol)
    q_g = collective_algebra(alg_g, n, tol)
    perms = [perm_op(space, s).matrix for s in ((1, 0, 2), (0, 2, 1))]
    reports = {}
    for name, proj in (("mixed", isotypic_projector(space, (2, 1), tol, seed).matrix),
                       ("symmetric", sym_projector(space, 1).matrix)):
        iso = subspace_isometry(proj)
        r = iso.shape[1]
        lhs = _compressed_algebra(q_gp, iso, tol, seed)
        rhs = commutant_of(np.concatenate([compress(q_g.basis, iso), compress(perms, iso)]), r, tol, seed)
        reports[name] = compare_algebras(lhs, rhs, tol, {"subspace_dim": r})
    sym = reports["symmetric"]
    ret = reports["mixed"]
    details = dict(ret.details)
    details["symmetric_component"] = {"lhs_dim": sym.lhs_dim, "rhs_dim": sym.rhs_dim,
                                      "verdict": sym.verdict, "max_residual": sym.max_residual}
    return dataclasses.replace(ret, details=details)


def spin1_generators() -> list[np.ndarray]:
    """J_x, J_y, J_z of the spin-1 representation on C^3."""
    s = 1 / np.sqrt(2)
    jx = s * np.array([[0, 1, 0], [1, 0, 1], [0, 1, 0]], dtype=np.complex128)
    jy = s * np.array([[0, -1j, 0], [1j, 0, -1j], [0, 1j, 0]], dtype=np.complex128)
    jz = np.diag([1.0, 0.0, -1.0]).astype(np.complex128)
    return [jx, jy, jz]


def nongauge_counterexample(tol: Tolerance = DEFAULT_TOL, seed=0) -> DualityReport:
    """Spin-1 SU(2) on C^3 with n = 2: Comm{Q(H)} is larger than Alg{(H')^2, P(S_2)}.

    Q(H) is represented by the algebra of the collective generators
    J^(1) + J^(2); H' consists of phases only.
    """
    gens = spin1_generators()
    eye = np.eye(3)
    collective = [np.kron(j, eye) + np.kron(eye, j) for j in gens]
    lhs = commutant(generate_algebra(collective, 9, tol, seed), tol, seed)
    rhs = joint_algebra(scalars(3), 2, tol, seed)
    gauge = is_gauge_pair(algebra_from_basis([eye] + gens, 3, (), tol), tol, seed)
    details = {"site_span_dim": gauge.dim, "site_bicommutant_dim": gauge.bicommutant_dim,
               "site_is_gauge": gauge.is_gauge}
    return compare_algebras(lhs, rhs, tol, details)


@dataclasses.dataclass(frozen=True, eq=False)
class LpmChannel:
    """L(X) = Phi(X) + tr(X)/d^n (I - Phi(I)), with
    Phi(X) = sum_mu p_mu^{-1} P_mu T(Pi X Pi) P_mu over the included mu and
    T the conditional expectation onto A^{(x) n}.
    """
    sign: int
    site_algebra: MatrixAlgebra
    copies: int
    central_projectors: tuple
    coefficients: tuple
    included: tuple
    projector: np.ndarray
    choi: np.ndarray | None = None
    details: dict = dataclasses.field(default_factory=dict)

    @functools.cached_property
    def phi_identity(self) -> np.ndarray:
        return self.phi(np.eye(self.total_dim))

    @property
    def total_dim(self) -> int:
        return self.site_algebra.ambient_dim ** self.copies

    def phi(self, x) -> np.ndarray:
        pi = self.projector
        t = tensor_power_expectation(self.site_algebra, pi @ as_matrix(x, self.total_dim) @ pi, self.copies)
        ret = np.zeros_like(t)
        for p, c, keep in zip(self.central_projectors, self.coefficients, self.included):
            if keep:
                ret += (p @ t @ p) / c
        return ret

    def __call__(self, x) -> np.ndarray:
        x = as_matrix(x, self.total_dim)
        dim = self.total_dim
        return self.phi(x) + (np.trace(x) / dim) * (np.eye(dim) - self.phi_identity)


def lpm_choi(channel: LpmChannel) -> np.ndarray:
    """sum_ij |i><j| (x) L(|i><j|)."""
    dim = channel.total_dim
    images = np.empty((dim, dim, dim, dim), dtype=np.complex128)
    for i in range(dim):
        for j in range(dim):
            unit = np.zeros((dim, dim), dtype=np.complex128)
            unit[i, j] = 1
            images[i, j] = channel(unit)
    return images.transpose(0, 2, 1, 3).reshape(dim * dim, dim * dim)


def build_lpm(alg: MatrixAlgebra, n: int, sign: int, tol: Tolerance = DEFAULT_TOL, seed=0,
              with_choi: bool = True) -> LpmChannel:
    """Construct L+ (sign=+1) or L- (sign=-1) for the algebra A on n copies.

    T(Pi) is expanded on the minimal central projectors P_mu of Alg{Q(G'_A)}
    (the collective algebra of A); p_mu is the expansion coefficient
    tr(P_mu T(Pi)) / tr(P_mu), and only p_mu above 1e3 * match_eps enter Phi.
    """
    d = alg.ambient_dim
    space = TensorSpace(d, n)
    space.check_cap()
    proj = sym_projector(space, sign)
    if proj.rank == 0:
        raise ValueError(f"the {proj.label} subspace of ({d})^{n} is empty")
    collective = collective_algebra(alg, n, tol)
    projectors = minimal_central_projectors(collective, tol, seed)
    t_pi = tensor_power_expectation(alg, proj.matrix, n)
    coeff = [float(np.real(np.trace(p @ t_pi)) / np.real(np.trace(p))) for p in projectors]
    if min(coeff) < -tol.match_eps:
        raise ValueError(f"negative expansion coefficient {min(coeff):.3g}: is the input a von Neumann algebra?")
    coeff = [max(c, 0.0) for c in coeff]
    expansion = sum(c * p for c, p in zip(coeff, projectors))
    included = tuple(c > tol.gap_eps for c in coeff)
    details = {"expansion_residual": float(np.abs(t_pi - expansion).max()),
               "num_irreps": len(projectors), "num_included": int(sum(included))}
    ret = LpmChannel(sign, alg, n, tuple(projectors), tuple(coeff), included, proj.matrix, None, details)
    unit = float(np.abs(ret(np.eye(space.total_dim)) - np.eye(space.total_dim)).max())
    details["unitality_residual"] = unit
    if not with_choi:
        return ret
    choi = lpm_choi(ret)
    min_eig = float(np.linalg.eigvalsh((choi + choi.conj().T) / 2)[0])
    details["choi_min_eigenvalue"] = min_eig
    details["choi_hermitian_residual"] = float(np.abs(choi - choi.conj().T).max())
    if min_eig < -tol.match_eps:
        raise ValueError(f"L map is not completely positive (Choi eigenvalue {min_eig:.3g})")
    return dataclasses.replace(ret, choi=choi)


def noiseless_operators(invariant_alg: MatrixAlgebra, n: int, tol: Tolerance = DEFAULT_TOL, seed=0,
                        cap: int = DEFAULT_CAP) -> MatrixAlgebra:
    """Alg{A^{(x) n}, P(S_n)}: everything left invariant by collective noise from G_A."""
    return joint_algebra(invariant_alg, n, tol, seed, cap)
