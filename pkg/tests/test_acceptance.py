"""The eleven acceptance criteria, each at its stated tolerance and time
budget.  Every test records one PASS/FAIL line, printed in the terminal
summary under "acceptance criteria"."""

import math
import time
from fractions import Fraction

import numpy as np
import pytest

from shadowlab.product import build_product, check_semiconjugacy, explicit_semi_horseshoe, \
    min_period_truncated
from shadowlab.seqcore import distance, glue
from shadowlab.sft import (SftSystem, TransitionGraph, chain_classes, count_periodic,
                           diagonal_bound, is_admissible, is_mixing, power_graph, random_pseudo_orbit,
                           shadow_sft, spectral_decompose, two_loop_sft)
from shadowlab.toral import (SphereSystem, ToralSystem, make_anosov, semiconjugacy_defect,
                             shadow_sphere)
from shadowlab.verify import (check_l_shadowing, check_local_product_char, check_shadowing,
                              entropy_bound, extract_semi_horseshoe, geometric_schedule,
                              horseshoe_semiconjugacy_violations, positive_expansivity_probe,
                              torus_orbit_defect, trial_rng, two_loop_fixture)

CAT = ((2, 1), (1, 1))


def test_criterion_01_sft_shadowing(acceptance):
    sys = SftSystem(two_loop_sft(3, 4))
    t0 = time.perf_counter()
    rep = check_shadowing(sys, Fraction(1, 64), Fraction(1, 16), window=(-64, 64), trials=1000,
                          seed=1)
    dt = time.perf_counter() - t0
    worst = rep.margins["worst_sup"]
    ok = rep.failure_count == 0 and rep.trials == 1000 and worst <= Fraction(1, 16) and dt < 10
    assert acceptance(1, "SFT shadowing bound", ok,
                      f"{rep.failure_count}/1000 failures, worst sup {float(worst):.6f} "
                      f"<= 1/16 (exact comparison)", dt)


def _window_oracle(g, po):
    """min over all admissible words on the window of the windowed sup."""
    first, last = po.points[0].shift(-po.start), po.points[-1].shift(-po.stop)
    n = len(po.points)
    succ = g.successors
    after = last[po.stop + 1]
    best = None
    stack = [[v] for v in succ[first[po.start - 1]]]
    while stack:
        w = stack.pop()
        if len(w) < n:
            stack.extend(w + [v] for v in succ[w[-1]])
            continue
        if after not in succ[w[-1]]:
            continue
        z = glue(first, po.start, w, last, g.vertex_count)
        sup = max(distance(z.shift(k), x) for k, x in zip(po.indices, po.points))
        best = sup if best is None else min(best, sup)
    return best


def test_criterion_02_oracle_equivalence(acceptance):
    t0 = time.perf_counter()
    bad, runs, tight, attained = [], 0, 0, 0
    for pq in ((2, 3), (3, 4)):
        g = two_loop_sft(*pq)
        for length in range(1, 11):
            for seed in range(25):
                rng = np.random.default_rng([pq[0], length, seed])
                delta = Fraction(1, 1 << int(rng.integers(3, 8)))
                po = random_pseudo_orbit(g, rng, -(length // 2), length, delta, 0.8)
                cert = shadow_sft(g, po, pad=0)
                best = _window_oracle(g, po)
                runs += 1
                tight += best == cert.window_sup
                attained += cert.window_sup == 4 * delta
                if not (is_admissible(g, cert.shadow_point) and best is not None
                        and best <= cert.window_sup <= 4 * delta == diagonal_bound(delta)):
                    bad.append((pq, length, seed))
    dt = time.perf_counter() - t0
    ok = not bad and dt < 60
    assert acceptance(2, "oracle equivalence", ok,
                      f"{runs} windows, {len(bad)} discrepancies, solver optimal on {tight}, "
                      f"4 delta attained on {attained}", dt)


def test_criterion_03_periodic_counts(acceptance):
    g = two_loop_sft(3, 4)
    A = np.zeros((g.vertex_count, g.vertex_count), dtype=np.int64)
    for u, v in g.edges:
        A[u, v] = 1
    t0 = time.perf_counter()
    counts = [count_periodic(g, n) for n in range(1, 13)]
    dt = time.perf_counter() - t0
    oracle = [int(np.trace(np.linalg.matrix_power(A, n))) for n in range(1, 13)]
    ok = counts == oracle and counts[:2] == [0, 0] and counts[2] == 3 and counts[6] == 7 and dt < 1
    assert acceptance(3, "periodic-point counts", ok, f"counts {counts}", dt)


def test_criterion_04_aperiodic_mechanism(acceptance):
    t0 = time.perf_counter()
    mp = min_period_truncated((2, 3, 5, 7), 3)
    sys = build_product((2, 3, 5, 7), 3)
    # periodic points of the truncation: products of coordinate counts
    joint = [math.prod(count_periodic(g, n) for g in sys.graphs) for n in range(1, 6)]
    dt = time.perf_counter() - t0
    ok = mp == 5 and joint[0] == 0 and joint[:4] == [0] * 4 and joint[4] > 0 and dt < 5
    assert acceptance(4, "aperiodic mechanism", ok,
                      f"min period {mp}, joint counts n=1..5 {joint}", dt)


def test_criterion_05_product_horseshoe(acceptance):
    t0 = time.perf_counter()
    sys = build_product((2, 3, 5), 2)
    hs = explicit_semi_horseshoe(sys, 1, 8)
    rng = np.random.default_rng(5)
    words = ["".join(rng.choice(["a", "b"], 101)) for _ in range(200)]
    bad = check_semiconjugacy(sys, hs, words, -50, 50)
    dt = time.perf_counter() - t0
    distinct = len(hs.points) == 256 and hs.separation_floor > 0
    series = Fraction(1, 2)
    ok = distinct and hs.diameter_ceiling <= series and not bad and dt < 30
    acceptance(5, "product horseshoe", ok,
               f"k_1={hs.extras['k']}, {len(hs.points)} points, "
               f"floor {float(hs.separation_floor):.6f}, "
               f"ceiling {hs.diameter_ceiling} vs required {series} "
               f"(observed diameter {hs.extras['observed_diameter']}), {len(bad)} violations", dt)
    assert distinct and not bad and dt < 30
    ceiling = hs.diameter_ceiling
    assert ceiling <= series, "diameter ceiling exceeds the series bound 1/2"


def test_criterion_06_extraction(acceptance):
    t0 = time.perf_counter()
    sys = SftSystem(two_loop_sft(3, 4))
    x, y, n = two_loop_fixture(3, 4, 12, 36)
    eps = Fraction(1)
    hs = extract_semi_horseshoe(sys, x, y, n, eps, word_length=8)
    seps = hs.extras["separations"]
    gamma = hs.extras["gamma"]
    m = len(hs.points)
    off = [seps[i, j] for i in range(m) for j in range(i + 1, m)]
    in_band = all(eps / 2 <= s < 2 * gamma for s in off)
    viol = horseshoe_semiconjugacy_violations(hs)
    dt = time.perf_counter() - t0
    ok = m == 256 and in_band and hs.extras["entropy_bound"] == math.log(2) / hs.period \
        and not viol and dt < 60
    assert acceptance(6, "horseshoe extraction", ok,
                      f"{m} points, N={hs.period}, exact separations in "
                      f"[{float(min(off)):.6f}, {float(max(off)):.6f}] "
                      f"vs [eps/2, 2 gamma) = [{eps / 2}, {2 * gamma}), "
                      f"entropy bound {hs.extras['entropy_bound']:.6g}", dt)


def test_criterion_07_toral_solver(acceptance):
    an = make_anosov(CAT)
    sys = ToralSystem(an)
    delta = 1e-3
    bound = an.basis_condition * delta * (1 / (1 - abs(an.lam_s)) + 1 / (an.lam_u - 1))
    t0 = time.perf_counter()
    worst_res = worst_c = worst_def = 0.0
    fails = 0
    for t in range(500):
        po = sys.random_pseudo_orbit(trial_rng(7, t), -100, 201, delta)
        cert = sys.shadow(po)
        res = cert.extras["residual"]
        c = float(np.abs(cert.extras["corrections"]).max())
        d = torus_orbit_defect(CAT, cert.extras["orbit"])
        worst_res, worst_c, worst_def = max(worst_res, res), max(worst_c, c), max(worst_def, d)
        fails += not (res <= 1e-10 and c <= bound and d <= 1e-9)
    dt = time.perf_counter() - t0
    ok = fails == 0 and dt < 10
    assert acceptance(7, "toral solver", ok,
                      f"{fails}/500 failures, residual {worst_res:.2e}, sup|c| {worst_c:.3e} "
                      f"<= {bound:.3e}, orbit defect {worst_def:.2e}", dt)


def test_criterion_08_local_product(acceptance):
    sys = ToralSystem(make_anosov(CAT))
    t0 = time.perf_counter()
    rep = check_local_product_char(sys, 1e-3, 0.01, trials=1000, seed=8, window=60, gamma=1e-9)
    dt = time.perf_counter() - t0
    m = rep.margins
    ok = rep.failure_count == 0 and m["line_residual"] <= 1e-12 and m["final_forward"] < 1e-9 \
        and m["final_backward"] < 1e-9 and dt < 5
    assert acceptance(8, "local product on the cat map", ok,
                      f"{rep.failure_count}/1000 failures, line residual {m['line_residual']:.1e}, "
                      f"decay {max(m['final_forward'], m['final_backward']):.1e}", dt)


def test_criterion_09_sphere_pipeline(acceptance):
    an = make_anosov(CAT)
    S = SphereSystem(an)
    delta, W, seed = 0.05, 60, 9
    eps = an.shadow_constant * delta
    sched = geometric_schedule(delta, 2 ** (-1 / 2))
    gammas = (1e-2, 1e-4, 1e-6)
    t0 = time.perf_counter()
    rep = check_l_shadowing(S, delta, eps, schedule=sched, window=(-W, W), trials=200, seed=seed,
                            gammas=gammas, p_perturb=1.0)
    semi = 0.0
    for t in range(200):
        spo = S.random_pseudo_orbit(trial_rng(seed, t), -W, 2 * W + 1, sched, 1.0)
        cert = shadow_sphere(S, spo)
        touched = list(cert.extras["torus_orbit"]) + list(cert.extras["lifted"].points)
        semi = max(semi, max(semiconjugacy_defect(an, p) for p in touched))
    dt = time.perf_counter() - t0
    ok = rep.failure_count == 0 and semi <= 1e-12 and dt < 30
    idx = {g: rep.margins.get(f"predicted_index[{g}]") for g in gammas}
    assert acceptance(9, "sphere lift-shadow-project", ok,
                      f"{rep.failure_count}/200 failures, worst sup "
                      f"{rep.margins.get('worst_window_sup', float('nan')):.3e} <= {eps:.3e}, "
                      f"predicted indices {idx}, semiconjugacy defect {semi:.1e}", dt)


def test_criterion_10_decomposition(acceptance):
    t0 = time.perf_counter()
    g = TransitionGraph.from_edges([(0, 1), (1, 0), (1, 2), (2, 3), (3, 0)])
    (cls,) = chain_classes(g)
    n, comps = spectral_decompose(g, cls)
    mixing = [is_mixing(power_graph(g, n, c)) for c in comps]
    g34 = two_loop_sft(3, 4)
    n34, comps34 = spectral_decompose(g34, chain_classes(g34)[0])
    dt = time.perf_counter() - t0
    ok = n == 2 and len(comps) == 2 and all(mixing) and n34 == 1 and len(comps34) == 1 and dt < 1
    assert acceptance(10, "cyclic decomposition", ok,
                      f"{{2,4}} graph: n={n}, components {[sorted(c) for c in comps]}, "
                      f"mixing {mixing}; X_(3,4): n={n34}", dt)


def test_criterion_11_expansivity_probe(acceptance):
    t0 = time.perf_counter()
    cyc = SftSystem(TransitionGraph(5, [(i, (i + 1) % 5) for i in range(5)]))
    finite = positive_expansivity_probe(cyc, Fraction(1, 2), Fraction(1, 4), samples=5)
    sft = positive_expansivity_probe(SftSystem(two_loop_sft(3, 4)), Fraction(1, 2), Fraction(1, 4),
                                     samples=5, window=10, seed=1)
    cat = positive_expansivity_probe(ToralSystem(make_anosov(CAT)), 0.1, 1e-3, samples=5)
    dt = time.perf_counter() - t0
    ok = finite.failure_count == 0 and sft.failure_count > 0 and cat.failure_count > 0 \
        and all("k" in f for f in sft.failures + cat.failures) and dt < 10
    w = sft.failures[0] if sft.failures else {}
    assert acceptance(11, "positive-expansivity probe", ok,
                      f"cycle {finite.failure_count} failures; X_(3,4) {sft.failure_count} "
                      f"witnesses (first at k={w.get('k')}); cat map {cat.failure_count} witnesses",
                      dt)
