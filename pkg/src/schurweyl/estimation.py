"""Multi-copy estimation: discrete priors, channels, POVMs, outcome
statistics q(B|rho) = tr(M(B) E(rho^{(x) n})), figures of merit, and the
symmetry-based reductions of a global measurement to a local one.

The worked examples at the bottom (qubit phase-blind decision, left/right
qubit pairs, the unambiguous-detection witness, the single-observable
estimation problem and the independent qubit pair) return plain dict reports.
"""
from __future__ import annotations

import dataclasses
import functools
import itertools
import math
from collections.abc import Callable

import numpy as np
import scipy.linalg
import scipy.special
import scipy.stats

from .algebra import (MatrixAlgebra, commutant, conditional_expectation, diagonal_algebra, full_algebra)
from .duality import build_lpm, left_right_algebras
from .matcore import (DEFAULT_TOL, Tolerance, as_matrix, as_stack, group_eigenvalues, herm_eig, kron_all,
                      matrix_from_json, matrix_to_json)
from .tensorrep import (TensorSpace, collective_algebra, sym_projector, symmetrize, tensor_power_expectation)

SIGMA_Z = np.diag([1.0, -1.0]).astype(np.complex128)


def _check_psd(x: np.ndarray, tol: Tolerance, what: str):
    scale = max(1.0, np.abs(x).max())
    if np.abs(x - x.conj().T).max() > tol.match_eps * scale:
        raise ValueError(f"{what} is not Hermitian")
    w = np.linalg.eigvalsh((x + x.conj().T) / 2)
    if w[0] < -tol.match_eps * scale:
        raise ValueError(f"{what} is not positive semidefinite (eigenvalue {w[0]:.3g})")


@dataclasses.dataclass(frozen=True, eq=False)
class Atom:
    weight: float
    rho: np.ndarray
    labels: dict


@dataclasses.dataclass(frozen=True, eq=False)
class Ensemble:
    """Finite prior over density operators, each carrying parameter labels."""
    atoms: tuple
    tol: Tolerance = DEFAULT_TOL

    def __post_init__(self):
        if len(self.atoms) == 0:
            raise ValueError("empty ensemble")
        total = sum(a.weight for a in self.atoms)
        if abs(total - 1) > self.tol.match_eps:
            raise ValueError(f"prior weights sum to {total}, not 1")
        dim = self.atoms[0].rho.shape[0]
        for k, a in enumerate(self.atoms):
            if a.weight < 0:
                raise ValueError(f"negative prior weight at atom {k}")
            rho = as_matrix(a.rho, dim)
            _check_psd(rho, self.tol, f"state {k}")
            if abs(np.trace(rho).real - 1) > self.tol.match_eps:
                raise ValueError(f"state {k} does not have unit trace")

    @property
    def site_dim(self) -> int:
        return self.atoms[0].rho.shape[0]

    @property
    def weights(self) -> np.ndarray:
        return np.array([a.weight for a in self.atoms])


@dataclasses.dataclass(frozen=True, eq=False)
class Povm:
    """Finite-outcome POVM; ``ops[i]`` is the element for ``labels[i]``.

    ``report`` carries validator output from operations that attach one.
    """
    labels: tuple
    ops: np.ndarray
    report: dict | None = None
    tol: Tolerance = DEFAULT_TOL

    def __post_init__(self):
        object.__setattr__(self, "ops", as_stack(self.ops))
        if len(self.labels) != len(self.ops) or len(set(self.labels)) != len(self.labels):
            raise ValueError("POVM labels must be distinct and match the elements")
        dim = self.ops.shape[1]
        for label, op in zip(self.labels, self.ops):
            _check_psd(op, self.tol, f"POVM element {label!r}")
        if np.abs(self.ops.sum(axis=0) - np.eye(dim)).max() > self.tol.match_eps:
            raise ValueError("POVM elements do not sum to the identity")

    @classmethod
    def from_pairs(cls, outcomes, tol: Tolerance = DEFAULT_TOL) -> "Povm":
        outcomes = list(outcomes)
        labels = tuple(str(label) for label, _ in outcomes)
        return cls(labels, as_stack([op for _, op in outcomes]), None, tol)

    @property
    def dim(self) -> int:
        return self.ops.shape[1]

    @property
    def outcomes(self):
        return list(zip(self.labels, self.ops))

    def map(self, fn, report: dict | None = None) -> "Povm":
        """Apply a unital positive map to every element."""
        return Povm(self.labels, np.stack([fn(op) for op in self.ops]), report, self.tol)


@dataclasses.dataclass(frozen=True, eq=False)
class QuantumChannel:
    """Channel in Kraus form rho -> sum_k K rho K^dagger."""
    kraus: np.ndarray
    tol: Tolerance = DEFAULT_TOL

    def __post_init__(self):
        k = np.asarray(self.kraus)
        if k.ndim != 3:
            raise ValueError("Kraus operators must be stacked as (k, d_out, d_in)")
        tp = np.einsum("kij,kil->jl", k.conj(), k)
        if np.abs(tp - np.eye(k.shape[2])).max() > self.tol.match_eps:
            raise ValueError("channel is not trace preserving")

    @classmethod
    def identity(cls, dim: int) -> "QuantumChannel":
        return cls(np.eye(dim, dtype=np.complex128)[None])

    @property
    def dim_in(self) -> int:
        return self.kraus.shape[2]

    @functools.cached_property
    def choi(self) -> np.ndarray:
        """sum_ij |i><j| (x) E(|i><j|)."""
        d = self.dim_in
        vec = self.kraus.transpose(0, 2, 1)  # [k, i, a] = K[a, i]
        return np.einsum("kia,kjb->iajb", vec, vec.conj()).reshape(d * self.kraus.shape[1], -1)

    def __call__(self, rho) -> np.ndarray:
        return np.einsum("kij,jl,kml->im", self.kraus, rho, self.kraus.conj())

    def adjoint(self, x) -> np.ndarray:
        return np.einsum("kji,jl,klm->im", self.kraus.conj(), x, self.kraus)

    def tensor_power(self, n: int) -> "QuantumChannel":
        kraus = [kron_all(ks) for ks in itertools.product(self.kraus, repeat=n)]
        return QuantumChannel(np.stack(kraus), self.tol)


def dephasing(r: float) -> QuantumChannel:
    """rho -> (1 - r) rho + r sigma_z rho sigma_z."""
    if not 0 <= r <= 1:
        raise ValueError("dephasing strength must lie in [0, 1]")
    return QuantumChannel(np.stack([np.sqrt(1 - r) * np.eye(2), np.sqrt(r) * SIGMA_Z]).astype(np.complex128))


@dataclasses.dataclass(frozen=True, eq=False)
class EstimationProblem:
    prior: Ensemble
    copies: int
    channel: QuantumChannel
    parameter_names: tuple

    def __post_init__(self):
        if self.channel.dim_in != self.prior.site_dim ** self.copies:
            raise ValueError("channel does not act on the n-copy space")

    @property
    def site_dim(self) -> int:
        return self.prior.site_dim

    @functools.cached_property
    def output_states(self) -> np.ndarray:
        """E(rho_k^{(x) n}) for every prior atom, shape (K, D, D)."""
        return np.stack([self.channel(kron_all([a.rho] * self.copies)) for a in self.prior.atoms])


def simple_problem(atoms, copies: int, channel: QuantumChannel | None = None) -> EstimationProblem:
    """Build a problem from (weight, rho, labels) triples; identity channel by default."""
    prior = Ensemble(tuple(Atom(float(w), as_matrix(rho), dict(labels)) for w, rho, labels in atoms))
    names = tuple(sorted({name for a in prior.atoms for name in a.labels}))
    channel = QuantumChannel.identity(prior.site_dim ** copies) if channel is None else channel
    return EstimationProblem(prior, copies, channel, names)


def conditionals(problem: EstimationProblem, povm: Povm) -> np.ndarray:
    """Table q(B|rho_k): rows follow the prior atoms, columns ``povm.labels``."""
    states = problem.output_states
    if povm.dim != states.shape[1]:
        raise ValueError(f"POVM acts on dimension {povm.dim}, states on {states.shape[1]}")
    return np.einsum("bij,kji->kb", povm.ops, states).real


def conditionals_given_parameter(problem: EstimationProblem, povm: Povm, predicate: Callable[[dict], bool]) -> np.ndarray:
    """Outcome distribution conditioned on the labels satisfying ``predicate``."""
    mask = np.array([bool(predicate(a.labels)) for a in problem.prior.atoms])
    weights = problem.prior.weights * mask
    total = weights.sum()
    if total <= 0:
        raise ValueError("predicate selects zero prior probability")
    return weights @ conditionals(problem, povm) / total


def parameter_values(problem: EstimationProblem, name: str, digits: int = 12) -> list[float]:
    return sorted({round(float(a.labels[name]), digits) for a in problem.prior.atoms})


def conditionals_by_value(problem: EstimationProblem, povm: Povm, name: str, digits: int = 12) -> np.ndarray:
    """One row of conditionals per distinct value of parameter ``name``."""
    rows = []
    for v in parameter_values(problem, name, digits):
        rows.append(conditionals_given_parameter(
            problem, povm, lambda labels, v=v: round(float(labels[name]), digits) == v))
    return np.stack(rows)


def twirl_povm(povm: Povm, symmetry_alg: MatrixAlgebra) -> Povm:
    """Replace each element by its conditional expectation onto ``symmetry_alg``."""
    return povm.map(lambda op: conditional_expectation(symmetry_alg, op))


def localize_povm(povm: Povm, alg: MatrixAlgebra, n: int, tol: Tolerance = DEFAULT_TOL, seed=0) -> Povm:
    """Apply L+ element-wise; the result lies in A^{(x) n}."""
    lpm = build_lpm(alg, n, 1, tol, seed, with_choi=False)
    return povm.map(lpm)


def check_localization_assumptions(alg: MatrixAlgebra, n: int, channel: QuantumChannel,
                                   distortion: QuantumChannel, tol: Tolerance = DEFAULT_TOL,
                                   seed=0, num_probes: int = 8) -> dict:
    """Is E noiseless on A^{(x) n}, and is N noiseless on A and covariant under G_A?"""
    rng = np.random.default_rng(seed)
    d = alg.ambient_dim
    dim = d ** n
    probes = [rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim)) for _ in range(num_probes)]
    channel_resid = max(np.abs(tensor_power_expectation(alg, channel(x), n)
                               - tensor_power_expectation(alg, x, n)).max() for x in probes)
    distortion_resid = max(np.abs(distortion.adjoint(b) - b).max() for b in alg.basis)
    comm = commutant(alg, tol, seed)
    cov = 0.0
    for _ in range(num_probes):
        v = scipy.linalg.expm(1j * comm.random_hermitian(rng) * 3)
        x = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        cov = max(cov, np.abs(distortion(v @ x @ v.conj().T) - v @ distortion(x) @ v.conj().T).max())
    return {
        "channel_noiseless": bool(channel_resid <= tol.match_eps),
        "channel_residual": float(channel_resid),
        "distortion_noiseless": bool(distortion_resid <= tol.match_eps),
        "distortion_residual": float(distortion_resid),
        "distortion_covariant": bool(cov <= tol.match_eps),
        "covariance_residual": float(cov),
    }


def generalized_localize(povm: Povm, alg: MatrixAlgebra, n: int, channel: QuantumChannel,
                         distortion: QuantumChannel, tol: Tolerance = DEFAULT_TOL, seed=0) -> Povm:
    """M -> L+((N^dagger)^{(x) n}(E^dagger(M))), with the assumption check attached.

    Violations are reported, not raised, so the map can be tried on
    problems outside its guarantees.
    """
    report = check_localization_assumptions(alg, n, channel, distortion, tol, seed)
    lpm = build_lpm(alg, n, 1, tol, seed, with_choi=False)
    noise = distortion.tensor_power(n)
    return povm.map(lambda op: lpm(noise.adjoint(channel.adjoint(op))), report)


def expected_cost(problem: EstimationProblem, povm: Povm, cost: Callable[[str, dict], float]) -> float:
    """sum_k w_k sum_B cost(B, labels_k) q(B|rho_k)."""
    q = conditionals(problem, povm)
    total = 0.0
    for w, row, atom in zip(problem.prior.weights, q, problem.prior.atoms):
        total += w * sum(cost(label, atom.labels) * p for label, p in zip(povm.labels, row))
    return float(total)


def posterior_mean_estimates(problem: EstimationProblem, povm: Povm, name: str) -> dict:
    """Posterior mean of parameter ``name`` for every outcome (0 for null outcomes)."""
    q = conditionals(problem, povm)
    joint = problem.prior.weights[:, None] * q
    values = np.array([float(a.labels[name]) for a in problem.prior.atoms])
    marg = joint.sum(axis=0)
    ret = {}
    for b, label in enumerate(povm.labels):
        ret[label] = float(values @ joint[:, b] / marg[b]) if marg[b] > 0 else 0.0
    return ret


def squared_error(name: str, estimates: dict) -> Callable[[str, dict], float]:
    return lambda label, labels: (estimates[label] - float(labels[name])) ** 2


def mutual_information(problem: EstimationProblem, povm: Povm, name: str, digits: int = 12) -> float:
    """I(outcome : parameter) in bits."""
    q = conditionals(problem, povm)
    values = parameter_values(problem, name, digits)
    index = {v: i for i, v in enumerate(values)}
    joint = np.zeros((len(values), len(povm.labels)))
    for w, row, atom in zip(problem.prior.weights, q, problem.prior.atoms):
        joint[index[round(float(atom.labels[name]), digits)]] += w * row
    joint = np.clip(joint, 0, None)
    p_s = joint.sum(axis=1, keepdims=True)
    p_b = joint.sum(axis=0, keepdims=True)
    mask = joint > 0
    return float(np.sum(joint[mask] * np.log2(joint[mask] / (p_s @ p_b)[mask])))


def helstrom(rho0, rho1, q0: float = 0.5, q1: float = 0.5, tol: Tolerance = DEFAULT_TOL):
    """Minimum-error measurement for rho0 vs rho1 with priors q0, q1.

    Outcome "1" is the projector on the positive part of q1 rho1 - q0 rho0;
    eigenvalues within match_eps of zero go to outcome "0".
    """
    rho0 = as_matrix(rho0)
    rho1 = as_matrix(rho1, rho0.shape[0])
    gamma = q1 * rho1 - q0 * rho0
    w, u = herm_eig(gamma, tol)
    pos = u[:, w > tol.match_eps]
    p1 = pos @ pos.conj().T
    povm = Povm(("0", "1"), np.stack([np.eye(rho0.shape[0]) - p1, p1]))
    error = (1 - np.abs(w).sum()) / 2
    return povm, float(error)


def spectral_projectors(observable, tol: Tolerance = DEFAULT_TOL) -> list[np.ndarray]:
    """Eigenprojectors of a Hermitian matrix, largest eigenvalue first."""
    w, u = herm_eig(observable, tol)
    groups = group_eigenvalues(w, tol.gap_eps * max(1.0, np.abs(w).max()))
    return [u[:, g] @ u[:, g].conj().T for g in reversed(groups)]


def local_observable_strategy(observable, n: int, post_process: Callable | None = None,
                              tol: Tolerance = DEFAULT_TOL) -> Povm:
    """Measure ``observable`` on every copy and coarse-grain the outcome tuple.

    Site outcomes are eigenvalue indices, 0 for the largest eigenvalue, so
    sigma_z gives 0 for |0>.  The default post-processing joins the indices
    into a string.
    """
    projs = spectral_projectors(observable, tol)
    post_process = post_process or (lambda t: "".join(str(i) for i in t))
    grouped = {}
    for outcome in itertools.product(range(len(projs)), repeat=n):
        label = str(post_process(outcome))
        op = kron_all([projs[i] for i in outcome])
        grouped[label] = grouped[label] + op if label in grouped else op
    return Povm(tuple(grouped), np.stack(list(grouped.values())), None, tol)


def rand_povm(dim: int, num_outcomes: int, rng, rank: int | None = None) -> Povm:
    """Random POVM G_i -> S^{-1/2} G_i S^{-1/2} from Wishart-like G_i."""
    rank = dim if rank is None else rank
    g = rng.normal(size=(num_outcomes, dim, rank)) + 1j * rng.normal(size=(num_outcomes, dim, rank))
    g = g @ np.conj(np.swapaxes(g, 1, 2))
    s = g.sum(axis=0)
    w, u = np.linalg.eigh(s)
    s_inv = (u / np.sqrt(w)) @ u.conj().T
    ops = s_inv @ g @ s_inv
    ops = (ops + np.conj(np.swapaxes(ops, 1, 2))) / 2
    return Povm(tuple(str(i) for i in range(num_outcomes)), ops)


def bipartite_decompose(povm: Povm, alg: MatrixAlgebra, tol: Tolerance = DEFAULT_TOL, seed=0):
    """Split a two-copy POVM into symmetric and antisymmetric local parts.

    The POVM is twirled onto Comm{Q(G_A)} intersected with Comm{Swap}, then
    M+- = L+-(twirled) and the assembled POVM is Pi+ M+ Pi+ + Pi- M- Pi-.
    Returns (M_plus, M_minus, assembled); M_minus is None when the
    antisymmetric subspace is empty.
    """
    d = alg.ambient_dim
    space = TensorSpace(d, 2)
    if povm.dim != space.total_dim:
        raise ValueError("bipartite_decompose needs a POVM on two copies of the site space")
    symmetry = commutant(collective_algebra(commutant(alg, tol, seed), 2, tol), tol, seed)
    twirled = povm.map(lambda op: symmetrize(space, conditional_expectation(symmetry, op)))
    parts = {}
    for sign in (1, -1):
        proj = sym_projector(space, sign).matrix
        if np.trace(proj).real < 0.5:
            parts[sign] = (None, proj)
            continue
        lpm = build_lpm(alg, 2, sign, tol, seed, with_choi=False)
        parts[sign] = (twirled.map(lpm), proj)
    assembled = np.zeros_like(povm.ops)
    for m, proj in parts.values():
        if m is not None:
            assembled += proj @ m.ops @ proj
    return parts[1][0], parts[-1][0], Povm(povm.labels, assembled, None, povm.tol)


# ---- worked examples ----------------------------------------------------

def qubit_state(alpha: float, theta: float) -> np.ndarray:
    psi = np.array([np.cos(alpha), np.exp(1j * theta) * np.sin(alpha)])
    return np.outer(psi, psi.conj())


def bloch_state(x: float, y: float, z: float) -> np.ndarray:
    return (np.eye(2) + x * np.array([[0, 1], [1, 0]]) + y * np.array([[0, -1j], [1j, 0]]) + z * SIGMA_Z) / 2


def qubit_decision_problem(alpha0: float, alpha1: float, n: int, theta_points: int = 64,
                           r0: float = 0.0, r1: float = 0.0) -> EstimationProblem:
    """b uniform on {0, 1}, theta uniform on a K-point grid, states
    cos(a_b)|0> + e^{i theta} sin(a_b)|1>, dephased with strength r_b."""
    atoms = []
    for b, (alpha, r) in enumerate(((alpha0, r0), (alpha1, r1))):
        noise = dephasing(r)
        for k in range(theta_points):
            theta = 2 * np.pi * k / theta_points
            atoms.append((0.5 / theta_points, noise(qubit_state(alpha, theta)), {"b": b, "theta": theta}))
    return simple_problem(atoms, n)


@functools.lru_cache(maxsize=None)
def _phase_symmetry(n: int) -> MatrixAlgebra:
    # Comm{Q(G)} for G the diagonal qubit unitaries: the collective phase twirl
    return commutant(collective_algebra(diagonal_algebra(2), n))


def binomial_error(alpha0: float, alpha1: float, n: int, q0: float = 0.5, q1: float = 0.5) -> float:
    """Optimal error from the number of 0 outcomes of sigma_z on each copy."""
    j = np.arange(n + 1)
    like0 = scipy.stats.binom.pmf(j, n, np.cos(alpha0) ** 2)
    like1 = scipy.stats.binom.pmf(j, n, np.cos(alpha1) ** 2)
    return float(np.minimum(q0 * like0, q1 * like1).sum())


def example_qubit_decision(alpha0: float, alpha1: float, n: int, theta_points: int = 64, r: float = 0.0) -> dict:
    """Helstrom error on the theta-averaged n-copy states vs local sigma_z counting.

    The averaged states are formed twice: from the K-point grid and by the
    exact collective phase twirl.
    """
    if n > 6 or theta_points < 1:
        raise ValueError("need n <= 6 and at least one theta point")
    problem = qubit_decision_problem(alpha0, alpha1, n, theta_points, r, r)
    states = problem.output_states
    half = len(states) // 2
    avg = [states[:half].mean(axis=0), states[half:].mean(axis=0)]
    _, err_grid = helstrom(avg[0], avg[1])
    noise = dephasing(r)
    exact = [conditional_expectation(_phase_symmetry(n), kron_all([noise(qubit_state(a, 0.0))] * n))
             for a in (alpha0, alpha1)]
    _, err_exact = helstrom(exact[0], exact[1])
    local = binomial_error(alpha0, alpha1, n)
    return {
        "alpha0": alpha0, "alpha1": alpha1, "copies": n, "theta_points": theta_points, "r": r,
        "helstrom_error": err_grid,
        "helstrom_error_exact": err_exact,
        "local_error": local,
        "difference": abs(err_grid - local),
        "difference_exact": abs(err_exact - local),
        "pipeline_difference": abs(err_grid - err_exact),
    }


def unambiguous_problem(alpha0: float, alpha1: float, r: float, n: int, theta_points: int = 64) -> EstimationProblem:
    """Pure b=0 branch, dephased b=1 branch."""
    return qubit_decision_problem(alpha0, alpha1, n, theta_points, 0.0, r)


def symmetric_subspace_witness(problem: EstimationProblem, tol: Tolerance = DEFAULT_TOL) -> dict:
    """Unambiguous detection of b=1 by leaving the symmetric subspace.

    u is the probability, given b=1, of the outcome "not symmetric", which
    never occurs for the pure b=0 branch; local sigma_z outcomes all have
    nonzero likelihood under both hypotheses, so they never identify b.
    """
    n, d = problem.copies, problem.site_dim
    sym = sym_projector(TensorSpace(d, n), 1).matrix
    proj = Povm(("symmetric", "other"), np.stack([sym, np.eye(d ** n) - sym]))
    given = {b: conditionals_given_parameter(problem, proj, lambda labels, b=b: labels["b"] == b) for b in (0, 1)}
    local = local_observable_strategy(SIGMA_Z, n)
    table = {b: conditionals_given_parameter(problem, local, lambda labels, b=b: labels["b"] == b) for b in (0, 1)}
    min_like = float(np.minimum(table[0], table[1]).min())
    u = float(given[1][1])
    return {
        "u": u,
        "false_detection": float(given[0][1]),
        "local_labels": list(local.labels),
        "local_likelihood_b0": [float(x) for x in table[0]],
        "local_likelihood_b1": [float(x) for x in table[1]],
        "local_min_likelihood": min_like,
        "local_unambiguous_success": 0.0 if min_like > 0 else None,
        "advantage": bool(u > tol.match_eps and abs(given[0][1]) <= tol.match_eps and min_like > 0),
    }


def _partial_trace(rho: np.ndarray, dims: list[int], keep: list[int]) -> np.ndarray:
    n = len(dims)
    t = rho.reshape(dims + dims)
    letters = "abcdefghijklmnopqrstuvwxyz"
    rows = [letters[k] for k in range(n)]
    cols = [letters[k] if k not in keep else letters[n + k].upper() for k in range(n)]
    out = "".join(rows[k] for k in keep) + "".join(cols[k] for k in keep)
    size = math.prod(dims[k] for k in keep)
    return np.einsum("".join(rows) + "".join(cols) + "->" + out, t).reshape(size, size)


@functools.lru_cache(maxsize=None)
def _right_rotation_symmetry(n: int) -> MatrixAlgebra:
    # the collective twirl over I (x) U(2): project onto Comm{Q(G_A)}, A = End(C^2) (x) I
    _, left = left_right_algebras()
    return commutant(collective_algebra(commutant(left), n))


def example_leftright(n: int) -> dict:
    """Left-only vs global discrimination of |00> and (|01> + |10>)/sqrt(2)
    with a Haar-random unitary on the right qubit, n copies."""
    if not 1 <= n <= 3:
        raise ValueError("need 1 <= n <= 3")
    psi0 = np.array([1, 0, 0, 0], dtype=np.complex128)
    psi1 = np.array([0, 1, 1, 0], dtype=np.complex128) / np.sqrt(2)
    sym = _right_rotation_symmetry(n)
    dims = [2] * (2 * n)
    left_sites = [2 * k for k in range(n)]
    right_sites = [2 * k + 1 for k in range(n)]
    glob, left, right = [], [], []
    for psi in (psi0, psi1):
        rho = kron_all([np.outer(psi, psi.conj())] * n)
        twirled = conditional_expectation(sym, rho)
        glob.append(twirled)
        left.append(_partial_trace(rho, dims, left_sites))
        right.append(_partial_trace(twirled, dims, right_sites))
    _, err_global = helstrom(*glob)
    _, err_left = helstrom(*left)
    _, err_right = helstrom(*right)
    return {
        "copies": n,
        "global_error": err_global,
        "left_error": err_left,
        "right_error": err_right,
        "difference": abs(err_global - err_left),
    }


def single_observable_problem(n: int = 2, polar_points: int = 4, theta_points: int = 8) -> EstimationProblem:
    """Uniform prior over pure qubit states, parameter s = tr(sigma_z rho).

    cos(polar angle) sits on Gauss-Legendre nodes, the azimuth on a uniform
    grid with more points than copies so the phase average is exact.
    """
    nodes, weights = scipy.special.roots_legendre(polar_points)
    atoms = []
    for z, wz in zip(nodes, weights):
        rxy = np.sqrt(1 - z * z)
        for k in range(theta_points):
            theta = 2 * np.pi * k / theta_points
            rho = bloch_state(rxy * np.cos(theta), rxy * np.sin(theta), z)
            atoms.append((wz / 2 / theta_points, rho, {"s": float(z), "theta": theta}))
    return simple_problem(atoms, n)


def count_post_process(outcome) -> str:
    return str(sum(1 for x in outcome if x == 0))


def qubit_pair_problem(polar_points: int = 2, theta_points: int = 3, radii=(1.0, 0.5)) -> EstimationProblem:
    """Two independent qubits from the same rotation-invariant prior; the
    parameter is delta = |tr(sigma_z rho_1) - tr(sigma_z rho_2)|."""
    nodes, weights = scipy.special.roots_legendre(polar_points)
    singles = []
    for radius in radii:
        for z, wz in zip(nodes, weights):
            rxy = np.sqrt(1 - z * z)
            for k in range(theta_points):
                theta = 2 * np.pi * k / theta_points
                rho = bloch_state(radius * rxy * np.cos(theta), radius * rxy * np.sin(theta), radius * z)
                singles.append((wz / 2 / theta_points / len(radii), rho, radius * z))
    atoms = []
    for (w1, rho1, z1), (w2, rho2, z2) in itertools.product(singles, repeat=2):
        atoms.append((w1 * w2, np.kron(rho1, rho2), {"delta": abs(z1 - z2), "z1": z1, "z2": z2}))
    return simple_problem(atoms, 1)


def problem_to_json(problem: EstimationProblem) -> dict:
    return {
        "site_dim": problem.site_dim,
        "copies": problem.copies,
        "prior": [{"weight": a.weight, "rho": matrix_to_json(a.rho), "labels": a.labels} for a in problem.prior.atoms],
        "channel": {"kraus": [matrix_to_json(k) for k in problem.channel.kraus]},
    }


def problem_from_json(obj) -> EstimationProblem:
    try:
        copies = int(obj["copies"])
        site_dim = int(obj["site_dim"])
        atoms = [(float(a["weight"]), matrix_from_json(a["rho"]), a.get("labels", {})) for a in obj["prior"]]
        channel = None
        if obj.get("channel") is not None:
            channel = QuantumChannel(np.stack([matrix_from_json(k) for k in obj["channel"]["kraus"]]))
    except (KeyError, TypeError) as err:
        raise ValueError(f"malformed problem JSON: missing {err}") from err
    problem = simple_problem(atoms, copies, channel)
    if problem.site_dim != site_dim:
        raise ValueError(f"site_dim {site_dim} does not match the states ({problem.site_dim})")
    return problem
