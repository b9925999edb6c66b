import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from shadowlab.orbits import PseudoOrbit
from shadowlab.product import build_product
from shadowlab.seqcore import distance, same_left_tail, same_right_tail
from shadowlab.sft import SftSystem, TransitionGraph, periodic_point, random_point, two_loop_sft
from shadowlab.toral import ToralSystem, TorusPoint, make_anosov
from shadowlab.verify import (asymptotic_ball_probe, check_l_shadowing, check_local_product_char,
                              check_shadowing, dyadic_schedule, entropy_bound,
                              extract_semi_horseshoe, horseshoe_semiconjugacy_violations,
                              positive_expansivity_probe, predicted_index, recheck_profile,
                              sft_bound_profile, solver_delta, stable_inclusion_check,
                              torus_orbit_defect, two_loop_fixture, window_variants)

CAT = ((2, 1), (1, 1))


@pytest.fixture(scope="module")
def cat_sys():
    return ToralSystem(make_anosov(CAT))


def cycle_sft(n):
    return SftSystem(TransitionGraph(n, [(i, (i + 1) % n) for i in range(n)]))


# --- shadowing ---------------------------------------------------------------------

def test_shadowing_sft(sft34):
    rep = check_shadowing(sft34, Fraction(1, 64), Fraction(1, 16), trials=100, seed=7)
    assert rep.ok and rep.failure_count == 0 and rep.trials == 100
    assert rep.margins["worst_sup"] <= Fraction(1, 16)
    assert isinstance(rep.margins["worst_sup"], Fraction)


def test_shadowing_delta_zero(sft34):
    po = sft34.random_pseudo_orbit(np.random.default_rng(0), -20, 41, Fraction(0), 1.0)
    cert = sft34.shadow(po)
    assert all(d == 0 for d in recheck_profile(sft34, cert, po, -20, 20))


def test_shadowing_fails_when_eps_too_small(sft34):
    rep = check_shadowing(sft34, Fraction(1, 64), Fraction(1, 1 << 30), trials=20, seed=1,
                          p_perturb=1.0)
    assert rep.failure_count > 0 and not rep.ok
    w = rep.failures[0]
    replay = check_shadowing(sft34, Fraction(1, 64), Fraction(1, 1 << 30), seed=w["seed"],
                             p_perturb=1.0, trial_ids=[w["trial"]])
    assert replay.failures[0]["sup"] == w["sup"]


def test_shadowing_cat(cat_sys):
    an = cat_sys.anosov
    eps = an.basis_condition * 1e-3 * (1 / (1 - abs(an.lam_s)) + 1 / (an.lam_u - 1))
    rep = check_shadowing(cat_sys, 1e-3, eps, window=(-100, 100), trials=30, seed=3)
    assert rep.ok, rep.failures[:1]
    assert rep.margins["residual"] <= 1e-10 and rep.margins["orbit_defect"] <= 1e-9


def test_shadowing_product():
    sys = build_product((2, 3, 5, 7), 3)
    rep = check_shadowing(sys, Fraction(1, 256), Fraction(1, 4), window=(-30, 30), trials=20,
                          seed=2)
    assert rep.ok, rep.failures[:1]


# --- L-shadowing ----------------------------------------------------------------------

def test_l_shadowing_true_orbits(sft34):
    rep = check_l_shadowing(sft34, Fraction(0), Fraction(1, 16), schedule=lambda k: Fraction(0),
                            trials=10, seed=0)
    assert rep.ok


def test_l_shadowing_sft(sft34):
    rep = check_l_shadowing(sft34, Fraction(1, 64), Fraction(1, 16), trials=30, seed=4)
    assert rep.ok, rep.failures[:1]


def test_l_shadowing_product():
    sys = build_product((2, 3, 5, 7), 3)
    rep = check_l_shadowing(sys, Fraction(1, 256), Fraction(1, 2), window=(-30, 30), trials=10,
                            seed=5, gammas=(Fraction(1, 2 ** 10),))
    assert rep.ok, rep.failures[:1]


def test_l_shadowing_cat(cat_sys):
    an = cat_sys.anosov
    eps = an.shadow_constant * 1e-3
    rep = check_l_shadowing(cat_sys, 1e-3, eps, window=(-60, 60), trials=10, seed=6, c=2)
    assert rep.ok, rep.failures[:1]


def test_sft_bound_profile_single_defect():
    # one step bound 1/64 forces agreement on [-5, 5] around the junction
    prof = sft_bound_profile([Fraction(0)] * 5 + [Fraction(1, 64)] + [Fraction(0)] * 5, -5,
                             range(-5, 7))
    assert prof[0] == Fraction(1, 64) and prof[1] == Fraction(1, 32)
    assert prof[6] == Fraction(1, 1024)
    assert prof[-5] == Fraction(1, 2048)


@settings(max_examples=30)
@given(st.integers(0, 10 ** 6))
def test_sft_bound_profile_dominates(seed):
    sys = SftSystem(two_loop_sft(3, 4))
    rng = np.random.default_rng(seed)
    po = sys.random_pseudo_orbit(rng, -8, 17, dyadic_schedule(Fraction(1, 16), 2), 1.0)
    cert = sys.shadow(po)
    ks = list(cert.indices)
    bound = sft_bound_profile(po.bounds[:len(po.points) - 1], po.start, ks)
    prof = recheck_profile(sys, cert, po, ks[0], ks[-1])
    assert all(d <= bound[k] for k, d in zip(ks, prof))


def test_predicted_index():
    b = {k: Fraction(1, 1 << abs(k)) for k in range(-20, 21)}
    assert predicted_index(b, Fraction(1, 1000)) == 10
    assert predicted_index(b, Fraction(1, 1 << 30)) is None


# --- local product ---------------------------------------------------------------------

def test_local_product_sft(sft34):
    rep = check_local_product_char(sft34, Fraction(1, 256), Fraction(1, 16), trials=50, seed=8)
    assert rep.ok, rep.failures[:1]


def test_local_product_sft_identical(sft34, x34):
    from shadowlab.verify import junction_pseudo_orbit
    x = random_point(x34, np.random.default_rng(1))
    z = sft34.shadow(junction_pseudo_orbit(sft34, x, x), pad=0).shadow_point
    assert z == x


def test_local_product_cat(cat_sys):
    rep = check_local_product_char(cat_sys, 1e-3, 0.01, trials=50, seed=9)
    assert rep.ok, rep.failures[:1]
    assert rep.margins["line_residual"] <= 1e-12
    assert rep.margins["final_forward"] < 1e-9 and rep.margins["final_backward"] < 1e-9


# --- asymptotic ball -------------------------------------------------------------------

def test_ball_probe_sft_nontrivial(sft34, x34):
    x = periodic_point(x34, (0, 1, 2))
    # a 12-step stretch lets four 3-loops trade places with three 4-loops
    r = asymptotic_ball_probe(sft34, x, Fraction(1, 2), Fraction(3), window=7)
    assert r.found and r.point != x and r.merges
    assert same_right_tail(r.point, x) and same_left_tail(r.point, x)
    mid = len(r.profile) // 2
    assert r.profile[0] < Fraction(1, 256) and r.profile[-1] < Fraction(1, 256)
    assert max(r.profile) == max(r.profile[mid - 7:mid + 8])


def test_ball_probe_delta_zero(sft34, x34):
    x = periodic_point(x34, (0, 1, 2))
    assert not asymptotic_ball_probe(sft34, x, Fraction(1, 2), Fraction(0), window=4).found


def test_ball_probe_small_delta(sft34, x34):
    x = periodic_point(x34, (0, 1, 2))
    assert not asymptotic_ball_probe(sft34, x, Fraction(1, 2), Fraction(1, 4), window=6).found


def test_ball_probe_too_large(sft34, x34):
    with pytest.raises(ValueError):
        asymptotic_ball_probe(sft34, periodic_point(x34, (0, 1, 2)), 1, 3, window=20)


def test_ball_probe_cat_shrinks(cat_sys):
    x = TorusPoint(0.3, 0.4)
    rs = [asymptotic_ball_probe(cat_sys, x, 0.1, 0.01, w) for w in (5, 20, 40)]
    radii = [r.radius_bound for r in rs]
    assert radii[0] > radii[1] > radii[2]
    assert rs[0].found and not rs[-1].found


def test_window_variants_counts(x34):
    x = periodic_point(x34, (0, 1, 2))
    vs = list(window_variants(x34, x, 0, 5))
    assert vs[0] == x and len(set(vs)) == len(vs)
    # brute: all 6-words w with x[-1] w x[6] a path
    succ = x34.successors
    import itertools
    n = 0
    for w in itertools.product(range(x34.vertex_count), repeat=6):
        path = (x[-1],) + w + (x[6],)
        n += all(b in succ[a] for a, b in zip(path, path[1:]))
    assert len(vs) == n


# --- stable inclusion and expansivity ---------------------------------------------------

def test_stable_inclusion_sft(sft34):
    rep = stable_inclusion_check(sft34, Fraction(1, 2), window=40, trials=100, seed=10)
    assert rep.ok
    assert rep.margins["skipped"] < 100


def test_stable_inclusion_identical(sft34, x34):
    x = random_point(x34, np.random.default_rng(3))
    assert all(distance(x.shift(k), x.shift(k)) == 0 for k in range(41))


def test_stable_inclusion_cat(cat_sys):
    rep = stable_inclusion_check(cat_sys, 0.1, window=40, trials=40, seed=11)
    assert rep.ok and rep.margins["skipped"] < 40
    an = cat_sys.anosov
    assert rep.margins["final_ratio"] <= abs(an.lam_s) ** 40 + 1


def test_pos_expansivity_cycle():
    rep = positive_expansivity_probe(cycle_sft(5), Fraction(1, 2), Fraction(1, 4), samples=5)
    assert rep.ok and rep.failure_count == 0 and not rep.expected_failure


def test_pos_expansivity_sft(sft34):
    rep = positive_expansivity_probe(sft34, Fraction(1, 2), Fraction(1, 4), samples=5,
                                     window=10, seed=1)
    assert rep.expected_failure and rep.failure_count > 0 and rep.ok
    w = rep.failures[0]
    assert w["distance"] > Fraction(1, 2)


def test_pos_expansivity_cat(cat_sys):
    rep = positive_expansivity_probe(cat_sys, 0.1, 1e-3, samples=5)
    assert rep.failure_count == 5 and rep.ok
    assert all(f["direction"] == "stable" for f in rep.failures)


# --- horseshoe extraction ---------------------------------------------------------------

def test_entropy_bound():
    assert entropy_bound(7) == math.log(2) / 7


def test_solver_delta():
    assert solver_delta(1) == Fraction(1, 32)
    assert solver_delta(Fraction(1, 4)) == Fraction(1, 128)


@pytest.fixture(scope="module")
def fixture34():
    g = two_loop_sft(3, 4)
    x, y, n = two_loop_fixture(3, 4, 12, 36)
    return SftSystem(g), x, y, n


def test_extraction_l1(fixture34):
    sys, x, y, n = fixture34
    hs = extract_semi_horseshoe(sys, x, y, n, 1, word_length=1)
    assert len(hs.points) == 2
    gamma = hs.extras["gamma"]
    assert Fraction(1, 2) <= hs.separation_floor == hs.diameter_ceiling < 2 * gamma
    assert hs.extras["entropy_bound"] == entropy_bound(hs.period)


def test_extraction_sandwich(fixture34):
    sys, x, y, n = fixture34
    hs = extract_semi_horseshoe(sys, x, y, n, 1, word_length=4)
    assert len(hs.points) == 16
    seps = hs.extras["separations"]
    off = [seps[i, j] for i in range(16) for j in range(16) if i != j]
    assert all(Fraction(1, 2) <= s < 2 * hs.extras["gamma"] for s in off)
    # independent oracle: orbit sup over one period of each pair
    pts = list(hs.points.values())
    L = hs.word_length * hs.period
    for a, b in [(0, 1), (3, 12), (5, 10)]:
        brute = max(distance(pts[a].shift(k), pts[b].shift(k)) for k in range(L))
        assert brute == seps[a, b]
    assert horseshoe_semiconjugacy_violations(hs) == []


def test_extraction_rejects_non_separating(fixture34):
    sys, x, y, n = fixture34
    with pytest.raises(ValueError):
        extract_semi_horseshoe(sys, x, x, n, 1, word_length=1)
    with pytest.raises(ValueError):
        extract_semi_horseshoe(sys, x, y, n, 3, word_length=1)


# --- invariants -------------------------------------------------------------------------

@settings(max_examples=15)
@given(st.integers(0, 10 ** 6), st.integers(0, 50))
def test_replay_is_deterministic(seed, trial):
    sys = SftSystem(two_loop_sft(3, 4))
    a = check_shadowing(sys, Fraction(1, 64), Fraction(1, 1 << 12), window=(-10, 10),
                        seed=seed, trial_ids=[trial], p_perturb=1.0)
    b = check_shadowing(sys, Fraction(1, 64), Fraction(1, 1 << 12), window=(-10, 10),
                        seed=seed, trial_ids=[trial], p_perturb=1.0)
    assert a.failures == b.failures and a.margins == b.margins


def test_torus_orbit_defect_oracle():
    pts = [TorusPoint(0.1, 0.2), TorusPoint(0.4, 0.3)]
    assert torus_orbit_defect(CAT, pts) < 1e-15
    pts[1] = TorusPoint(0.41, 0.3)
    assert torus_orbit_defect(CAT, pts) == pytest.approx(0.01, abs=1e-12)
