"""Acceptance criteria 1-10; one PASS/FAIL line each.

Run under pytest (lines appear in the terminal summary) or directly with
``python tests/test_acceptance.py``.
"""
import math
import time

import numpy as np
import pytest

import oracles
from conftest import ACCEPTANCE_LINES
from schurweyl.algebra import (block_algebra, commutant, diagonal_algebra, full_algebra, generate_algebra,
                               scalars)
from schurweyl.duality import (build_lpm, lambda2_counterexample, left_right_algebras, nongauge_counterexample,
                               verify_duality)
from schurweyl.estimation import (bipartite_decompose, conditionals_by_value, conditionals_given_parameter,
                                  dephasing, example_leftright, example_qubit_decision, generalized_localize,
                                  single_observable_problem, localize_povm, qubit_decision_problem, qubit_pair_problem,
                                  rand_povm, symmetric_subspace_witness, twirl_povm, unambiguous_problem)
from schurweyl.matcore import span_residual
from schurweyl.tensorrep import (TensorSpace, collective_algebra, perm_op, sym_projector, tensor_power_expectation)

EPS = 1e-8
NUM_POVMS = 20

# regression lock, first recorded against the brute-force oracle in test_duality
LAMBDA2_DIMS = (20, 40)
SYMMETRIC_DIMS = (20, 20)


def _report(number, ok, detail):
    line = f"{'PASS' if ok else 'FAIL'} criterion {number}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


def criterion_1():
    t0 = time.time()
    expected = {(2, 2): 2, (2, 3): 5, (3, 2): 2, (3, 3): 6}
    worst, ok = 0.0, True
    for (d, n), dim in expected.items():
        space = TensorSpace(d, n)
        lhs = commutant(collective_algebra(full_algebra(d), n))
        gens = [perm_op(space, s).matrix for s in ((1, 0) + tuple(range(2, n)), tuple(range(n))[1:] + (0,))]
        rhs = generate_algebra(gens, space.total_dim)
        oracle = oracles.closure_span([oracles.perm_matrix(p, d, n) for p in ((1, 0) + tuple(range(2, n)),
                                                                                tuple(range(n))[1:] + (0,))], d ** n)
        resid = max(span_residual(lhs.basis, rhs.basis), span_residual(rhs.basis, lhs.basis))
        worst = max(worst, resid)
        ok &= lhs.dim == rhs.dim == len(oracle) == dim and resid <= EPS
    elapsed = time.time() - t0
    ok &= elapsed < 30
    return ok, f"Comm{{Q(U(d))}} = Alg{{P(S_n)}} for d,n in {{2,3}}, residual {worst:.1e}, {elapsed:.1f}s"


def _duality_cases():
    _, left = left_right_algebras()
    cases = [(f"{name}({d})", make(d)) for d in (2, 3, 4)
             for name, make in (("scalars", scalars), ("diagonal", diagonal_algebra), ("full", full_algebra))]
    cases += [("End(C2)xI2", left), ("diag(1)+End(C2)", block_algebra([(1, 1), (2, 1)]))]
    return cases


def criterion_2():
    bad, worst, count = [], 0.0, 0
    for name, alg in _duality_cases():
        for n in (1, 2, 3):
            rep = verify_duality(alg, n)
            count += 1
            worst = max(worst, rep.max_residual)
            if rep.verdict != "equal" or rep.max_residual > EPS:
                bad.append(f"{name} n={n}: {rep.verdict}")
            if name.startswith("diagonal") and rep.lhs_dim != oracles.weight_sector_dim(alg.ambient_dim, n):
                bad.append(f"{name} n={n}: dim {rep.lhs_dim} vs weight-sector oracle")
    return not bad, f"{count} cases equal, worst residual {worst:.1e}" + (f"; failing {bad}" if bad else "")


def criterion_3():
    rep = nongauge_counterexample()
    ok = (rep.lhs_dim, rep.rhs_dim) == (3, 2) and rep.verdict == "lhs_strictly_larger" \
        and rep.details["rhs_in_lhs"] <= EPS
    return ok, f"spin-1 pair: lhs {rep.lhs_dim}, rhs {rep.rhs_dim}, {rep.verdict}"


def criterion_4():
    t0 = time.time()
    rep = lambda2_counterexample()
    sym = rep.details["symmetric_component"]
    ok = ((rep.lhs_dim, rep.rhs_dim) == LAMBDA2_DIMS and rep.verdict == "rhs_strictly_larger"
          and rep.details["lhs_in_rhs"] <= EPS
          and (sym["lhs_dim"], sym["rhs_dim"]) == SYMMETRIC_DIMS and sym["verdict"] == "equal")
    elapsed = time.time() - t0
    ok &= elapsed < 300
    return ok, (f"mixed component lhs {rep.lhs_dim} < rhs {rep.rhs_dim} ({rep.verdict}); "
                f"symmetric component {sym['lhs_dim']} = {sym['rhs_dim']} ({sym['verdict']}), {elapsed:.1f}s")


def _transpositions(n):
    return [tuple(range(k)) + (k + 1, k) + tuple(range(k + 2, n)) for k in range(n - 1)]


def criterion_5():
    rng = np.random.default_rng(5)
    _, left = left_right_algebras()
    worst = {"unital": 0.0, "choi": 0.0, "image": 0.0, "reconstruction": 0.0}
    runs = 0
    for alg in (diagonal_algebra(2), left):
        d = alg.ambient_dim
        for n in (2, 3):
            space = TensorSpace(d, n)
            dim = space.total_dim
            symmetric = commutant(collective_algebra(commutant(alg), n))
            for sign in (1, -1):
                if sym_projector(space, sign).rank == 0:
                    continue
                lpm = build_lpm(alg, n, sign)
                runs += 1
                pi = lpm.projector
                worst["unital"] = max(worst["unital"], np.abs(lpm(np.eye(dim)) - np.eye(dim)).max())
                worst["choi"] = max(worst["choi"], -lpm.details["choi_min_eigenvalue"])
                for _ in range(100):
                    x = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
                    y = lpm(x)
                    image = max(np.abs(tensor_power_expectation(alg, y, n) - y).max(),
                                max(np.abs(perm_op(space, s).matrix @ y - y @ perm_op(space, s).matrix).max()
                                    for s in _transpositions(n)))
                    worst["image"] = max(worst["image"], image)
                    g = symmetric.project(x)
                    worst["reconstruction"] = max(worst["reconstruction"],
                                                  np.abs(pi @ lpm(g) @ pi - pi @ g @ pi).max())
    ok = runs == 7 and all(v <= EPS for v in worst.values())
    return ok, f"{runs} maps; worst " + ", ".join(f"{k} {v:.1e}" for k, v in worst.items())


def _max_gap(problem, before, after, predicates):
    return max(np.abs(conditionals_given_parameter(problem, before, p)
                      - conditionals_given_parameter(problem, after, p)).max() for p in predicates)


def criterion_6():
    alg = diagonal_algebra(2)
    worst = {}
    n = 3
    by_b = [lambda labels, b=b: labels["b"] == b for b in (0, 1)]
    symmetry = commutant(collective_algebra(commutant(alg), n))
    pure = qubit_decision_problem(0.4, 1.1, n, 8)
    r = 0.3
    mixed = qubit_decision_problem(0.4, 1.1, n, 8, r, r)
    single = single_observable_problem(2, 4, 8)
    by_s = [lambda labels, s=s: abs(labels["s"] - s) < 1e-12 for s in sorted({a.labels["s"] for a in single.prior.atoms})]
    identity = mixed.channel
    for seed in range(NUM_POVMS):
        rng = np.random.default_rng(seed)
        m = rand_povm(2 ** n, 3, rng)
        worst["twirl"] = max(worst.get("twirl", 0), _max_gap(pure, m, twirl_povm(m, symmetry), by_b))
        worst["localize"] = max(worst.get("localize", 0), _max_gap(pure, m, localize_povm(m, alg, n), by_b))
        g = generalized_localize(m, alg, n, identity, dephasing(r))
        assert all(g.report[k] for k in ("channel_noiseless", "distortion_noiseless", "distortion_covariant"))
        worst["distorted"] = max(worst.get("distorted", 0), _max_gap(mixed, m, g, by_b))
        h = rand_povm(4, 4, rng)
        worst["single_observable"] = max(worst.get("single_observable", 0), _max_gap(single, h, localize_povm(h, alg, 2), by_s))
    ok = all(v <= EPS for v in worst.values())
    return ok, f"{NUM_POVMS} POVMs per setup; worst " + ", ".join(f"{k} {v:.1e}" for k, v in worst.items())


def criterion_7():
    worst_diff, worst_pipe = 0.0, 0.0
    for a0, a1 in ((math.pi / 6, math.pi / 3), (0.3, 1.1)):
        for n in range(1, 7):
            rep = example_qubit_decision(a0, a1, n, 64)
            worst_diff = max(worst_diff, rep["difference"], rep["difference_exact"])
            worst_pipe = max(worst_pipe, rep["pipeline_difference"])
    ok = worst_diff <= EPS and worst_pipe <= 1e-6
    return ok, f"Helstrom vs binomial worst {worst_diff:.1e}, twirl vs K=64 worst {worst_pipe:.1e}"


def criterion_8():
    problem = unambiguous_problem(math.pi / 4, math.pi / 4, 0.25, 2)
    rep = symmetric_subspace_witness(problem)
    rho1 = dephasing(0.25)(np.full((2, 2), 0.5))
    u_direct = 1 - np.trace(oracles.sym_projector(2, 2) @ np.kron(rho1, rho1)).real
    ok = rep["u"] > 0.01 and abs(rep["u"] - u_direct) <= EPS and rep["local_min_likelihood"] > 0 \
        and rep["local_unambiguous_success"] == 0.0
    return ok, f"u = {rep['u']:.4f}, local min likelihood {rep['local_min_likelihood']:.4f}, local success 0"


def criterion_9():
    reps = [example_leftright(n) for n in (1, 2)]
    ok = all(r["difference"] <= EPS for r in reps) and abs(reps[0]["left_error"] - 0.25) <= 1e-12
    return ok, (f"n=1 left {reps[0]['left_error']:.6f} global {reps[0]['global_error']:.6f}; "
                f"n=2 left {reps[1]['left_error']:.6f} global {reps[1]['global_error']:.6f}")


def criterion_10():
    alg = diagonal_algebra(2)
    problem = qubit_pair_problem()
    gap, membership = 0.0, 0.0
    for seed in range(NUM_POVMS):
        m = rand_povm(4, 3, np.random.default_rng(100 + seed))
        plus, minus, assembled = bipartite_decompose(m, alg)
        gap = max(gap, np.abs(conditionals_by_value(problem, m, "delta")
                              - conditionals_by_value(problem, assembled, "delta")).max())
        for part in (plus, minus):
            membership = max(membership, max(np.abs(tensor_power_expectation(alg, op, 2) - op).max() for op in part.ops))
    ok = gap <= EPS and membership <= EPS
    return ok, f"{NUM_POVMS} POVMs; conditionals gap {gap:.1e}, M+- outside A(x)A {membership:.1e}"


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5,
            criterion_6, criterion_7, criterion_8, criterion_9, criterion_10]


@pytest.mark.parametrize("number", range(1, 11))
def test_acceptance_criterion(number):
    ok, detail = CRITERIA[number - 1]()
    assert _report(number, ok, detail), detail


if __name__ == "__main__":
    results = []
    for k, check in enumerate(CRITERIA, start=1):
        ok, detail = check()
        results.append(_report(k, ok, detail))
    raise SystemExit(0 if all(results) else 1)
