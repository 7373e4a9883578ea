"""Acceptance checks. Each test records one PASS/FAIL line (see conftest.py).

Run with ``pytest tests/test_acceptance.py -v`` and read the
"acceptance criteria" section at the end of the report.
"""
import math

import numpy as np

from mroot.anderson import anderson_iterate, least_squares_gamma, monomial_system, scalar_problem
from mroot.bench import get_suite, run_suite
from mroot.diagnostics import convergence_orders, noise_floor
from mroot.expr import eval_jet, parse
from mroot.solvers import Method, Problem, SolverConfig, newton_update, run, secant_step

from oracles import decimal_central, normal_equations_gamma, random_expression

X0S = (0.8, 2.0, 10.0)
Q2 = "(x^2-1)^2*log(x)"
Q6 = "(x^2-1)^6*log(x)"


def solve(text, method, x0, p=None, **kw):
    return run(Problem.from_text(text, known_multiplicity=p), SolverConfig(method, x0, **kw))


def counts(text, method, p=None):
    return tuple(solve(text, method, x0, p).iterations_to_converge for x0 in X0S)


def table_check(text, p, expected):
    got = {
        "modified": counts(text, "modified_newton", p),
        "NA": counts(text, "newton_anderson"),
        "newton": counts(text, "newton"),
        "secant": counts(text, "secant"),
    }
    ok = got == expected
    return ok, " ".join(f"{k}={v}" for k, v in got.items())


def test_table1_counts_and_multiplicity(acceptance):
    ok, detail = table_check(
        Q2,
        3.0,
        {"modified": (4, 5, 7), "NA": (6, 7, 8), "newton": (51, 56, 63), "secant": (72, 79, 89)},
    )
    pk = [solve(Q2, "newton_anderson", x0).final_p for x0 in X0S]
    ok_p = all(abs(p - 3.0) <= 1e-4 for p in pk) and all(abs(p - 3.0) <= 1e-6 for p in pk[:2])
    detail += " pk=" + ",".join(f"{p:.9f}" for p in pk)
    assert acceptance.record("1 q=2 iteration counts and NA p_k", ok and ok_p, detail)


def test_table2_counts_and_multiplicity(acceptance):
    ok, detail = table_check(
        Q6,
        7.0,
        {"modified": (5, 6, 8), "NA": (7, 8, 10), "newton": (127, 140, 162), "secant": (179, 198, 229)},
    )
    pk = [solve(Q6, "newton_anderson", x0).final_p for x0 in X0S]
    ok_p = all(abs(p - 7.0) <= 1e-4 for p in pk)
    detail += " pk=" + ",".join(f"{p:.7f}" for p in pk)
    assert acceptance.record("2 q=6 iteration counts and NA p_k", ok and ok_p, detail)


def test_adaptive_newton(acceptance):
    ok = True
    parts = []
    for text, target, slack in ((Q2, (13, 17, 30), 3), (Q6, (18, 29, 80), 5)):
        traces = [solve(text, "adaptive_newton", x0) for x0 in X0S]
        got = tuple(t.iterations_to_converge for t in traces)
        ok &= all(t.converged for t in traces)
        ok &= all(g is not None and abs(g - e) <= slack for g, e in zip(got, target))
        parts.append(f"{got} vs {target}±{slack}")
    p = solve(Q2, "adaptive_newton", 0.8).final_p
    ok &= abs(p - 2.9860) <= 0.1
    parts.append(f"p(q=2,x0=0.8)={p:.4f}")
    assert acceptance.record("3 adaptive Newton", ok, " ".join(parts))


REFERENCE_ORDERS = {
    "orders-q2": [2.1027, 2.4792, 1.8078, 1.7729, 1.6879],
    "orders-q4": [1.4009, 3.2797, 1.9022, 1.7976, 1.7032, 1.6737],
    "orders-q6": [0.7489, 5.3648, 2.0311, 1.8145, 1.7161, 1.6802, 1.6531],
    "orders-p6": [5.6924, 2.3193, 2.3055, 2.0713],
    "orders-p8": [21.221, 2.9109, 2.3625, 2.1500, 2.0728],
    "orders-p10": [12.3187, 3.0433, 2.3309, 2.1592, 2.0688],
}


def test_table3_orders(acceptance):
    manifest = get_suite("orders")
    roots = {case.id: case.known_root for case in manifest}
    worst = 0.0
    ok = True
    compared = short = 0
    for r in run_suite(manifest):
        c = roots[r.case]
        got = convergence_orders(r.trace, c, noise_floor(c)).as_dict()
        expected = dict(enumerate(REFERENCE_ORDERS[r.case], start=3))
        # our rounding cutoff may end a row one entry early, never earlier
        missing = sorted(set(expected) - set(got))
        ok &= missing == [] or missing == [max(expected)]
        short += len(missing)
        for k in set(expected) & set(got):
            worst = max(worst, abs(got[k] - expected[k]))
            compared += 1
    ok &= worst <= 5e-2
    detail = f"max |q_k - reference| = {worst:.2e} over {compared} entries, {short} trailing entry below noise floor"
    assert acceptance.record("4 empirical orders q_k", ok, detail)


def test_gaussian_power_qualitative(acceptance):
    by = {(r.method, r.x0): r for r in run_suite(get_suite("exp-p6"))}
    mn0 = by[(Method.MODIFIED_NEWTON, 0.0)]
    mn1 = by[(Method.MODIFIED_NEWTON, 1.0)]
    na = {x0: by[(Method.NEWTON_ANDERSON, x0)] for x0 in (0.0, 1.0)}
    ok = not mn0.converged
    ok &= mn1.converged and mn1.iterations == na[1.0].iterations - 2
    ok &= all(r.converged and abs(r.final_x - 2.0) <= 1e-6 for r in na.values())
    slower = []
    for m in (Method.NEWTON, Method.SECANT):
        for x0 in (0.0, 1.0):
            r = by[(m, x0)]
            ok &= r.converged and r.iterations > na[x0].iterations
            slower.append(f"{m.value}@{x0:g}={r.iterations}")
    detail = (
        f"MN@0={mn0.status} MN@1={mn1.iterations} NA={na[0.0].iterations},{na[1.0].iterations} "
        + " ".join(slower)
    )
    assert acceptance.record("5 (x-2)^6 exp(-(x-2)^2/2) claims", ok, detail)


A = np.array([[2.0, 1.0], [1.0, 3.0]])
B = np.array([1.0, 2.0])


def test_exactness(acceptance):
    na_err = mn_err = 0.0
    for p in (2, 3, 7):
        text = f"(x-2)^{p}"
        na_err = max(na_err, abs(solve(text, "newton_anderson", 3.0).xs[2] - 2.0))
        mn_err = max(mn_err, abs(solve(text, "modified_newton", 3.0, p=float(p)).xs[1] - 2.0))
    exact = np.linalg.solve(A, B)
    vec_err = 0.0
    for exponents, m in (((2, 3), 2), ((2, 2), 1), ((4, 4), 1), ((2, 5), 2)):
        trace = anderson_iterate(monomial_system(A, B, exponents), [1.3, 0.2], m=m)
        # the first step with m_k = m produces x_{m+1}
        vec_err = max(vec_err, float(np.max(np.abs(trace.iterates[m + 1] - exact))))
    ok = na_err <= 1e-12 and mn_err <= 1e-14 and vec_err <= 1e-10
    detail = f"NA x_2 {na_err:.1e}, modified x_1 {mn_err:.1e}, vector {vec_err:.1e}"
    assert acceptance.record("6 exactness", ok, detail)


def test_na_equals_secant_on_newton_update(acceptance):
    problem = Problem.from_text(Q2)
    w = lambda x: newton_update(problem.jet(x))
    worst = 0
    ok = True
    for x0 in X0S:
        na = run(problem, SolverConfig("newton_anderson", x0)).xs
        sec = [x0, x0 + w(x0)]
        for _ in range(5):
            sec.append(secant_step(sec[-1], sec[-2], w(sec[-1]), w(sec[-2])))
        for k in range(2, 7):
            ulps = abs(na[k] - sec[k]) / math.ulp(na[k])
            worst = max(worst, ulps)
            # one ulp of drift allowed per step taken after the shared Newton step
            ok &= ulps <= k - 1
    assert acceptance.record("7a NA vs secant on w", ok, f"worst {worst:g} ulp over 5 steps")


def test_vector_depth_one_is_bitwise_scalar_na(acceptance):
    ok = True
    shortest = None
    for q in (6, 8, 10):
        e = parse(f"(x^2-1)^{q}*log(x)")
        for x0 in (10.0, 40.0):
            na = run(Problem(e), SolverConfig("newton_anderson", x0)).xs
            vec = [float(x[0]) for x in anderson_iterate(scalar_problem(e), [x0], m=1).iterates]
            steps = len(na) - 1
            shortest = steps if shortest is None else min(shortest, steps)
            ok &= steps >= 10 and na == vec
    detail = f"6 runs of at least {shortest} steps, full traces bitwise equal"
    assert acceptance.record("7b n=1 depth-1 Anderson == scalar NA", ok, detail)


def test_qr_gamma_matches_normal_equations(acceptance):
    rng = np.random.default_rng(11)
    worst = 0.0
    done = 0
    while done < 100:
        n = int(rng.integers(2, 12))
        m = int(rng.integers(1, min(n, 5) + 1))
        F = rng.standard_normal((n, m))
        if np.linalg.cond(F) > 1e2:
            continue
        w = rng.standard_normal(n)
        g, ref = least_squares_gamma(w, F), normal_equations_gamma(F, w)
        worst = max(worst, float(np.max(np.abs(g - ref)) / np.max(np.abs(ref))))
        done += 1
    assert acceptance.record("7c QR gamma vs normal equations", worst <= 1e-10, f"worst rel {worst:.1e} over 100")


def test_ad_matches_central_differences(acceptance):
    rng = np.random.default_rng(2024)
    worst = 0.0
    used = 0
    while used < 200:
        text, g = random_expression(rng)
        x = float(rng.uniform(0.5, 2.0))
        d1, d2 = decimal_central(g, x, 1e-5)
        c1, c2 = decimal_central(g, x, 2e-5)
        # keep pairs where the oracle is trustworthy: nonzero and stable under h -> 2h
        if not all(abs(a) > 1e-200 and abs(a - b) <= 1e-6 * abs(a) for a, b in ((d1, c1), (d2, c2))):
            continue
        jet = eval_jet(parse(text), x)
        worst = max(worst, abs(jet.d1 - d1) / abs(d1), abs(jet.d2 - d2) / abs(d2))
        used += 1
    assert acceptance.record("7d AD vs central differences", worst <= 1e-5, f"worst rel {worst:.1e} over 200")


def test_newton_rate_law(acceptance):
    ok = True
    parts = []
    for p in (2, 3, 6):
        trace = solve(f"(x-1)^{p}", "newton", 1.5, max_iter=20)
        e = [abs(x - 1.0) for x in trace.xs]
        ratio = e[20] / e[19]
        ok &= abs(ratio - (1 - 1 / p)) <= 1e-3
        parts.append(f"p={p}: {ratio:.6f}")
    assert acceptance.record("8 Newton linear rate 1 - 1/p", ok, " ".join(parts))
