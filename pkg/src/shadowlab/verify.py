"""
Property checkers that turn the shadowing-type statements into falsifiable
finite experiments.

Every randomized checker draws trial ``t`` from
``np.random.default_rng([seed, t])`` so that any failure replays from its
(seed, trial) pair alone.  Certificates are re-verified by recomputing the
distance profile from the shadow point and the pseudo-orbit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product as cartesian
from typing import Callable, Iterable, Iterator, Sequence

import mpmath
import numpy as np

from .orbits import PseudoOrbit, SemiHorseshoe, ShadowCertificate
from .product import ProductSystem
from .seqcore import (EventuallyPeriodicSeq, agreement_radius, distance, distance_profile, glue,
                      periodic_sup_distances, same_left_tail, same_right_tail)
from .sft import (SftSystem, TransitionGraph, chain_classes, diagonal_bound, dyadic_radius,
                  is_admissible, random_point, reroute, shadow_sft, validate_point)
from .toral import (SphereSystem, ToralSystem, TorusPoint, correction_bound_profile,
                    local_product_parameters, local_product_point, torus_distance)


@dataclass
class PropertyReport:
    """Outcome of a property check.

    ``failures`` holds one witness dict per failing trial (always with
    ``seed`` and ``trial`` when randomized).  ``expected_failure`` marks
    probes built to fail on the given system; ``ok`` is True when the
    outcome matches that expectation.
    """

    name: str
    trials: int = 0
    failures: list = field(default_factory=list)
    params: dict = field(default_factory=dict)
    margins: dict = field(default_factory=dict)
    expected_failure: bool = False

    @property
    def failure_count(self) -> int:
        return len(self.failures)

    @property
    def ok(self) -> bool:
        return (self.failure_count > 0) == self.expected_failure

    def fail(self, **witness) -> None:
        self.failures.append(witness)

    def track_max(self, key: str, value) -> None:
        if key not in self.margins or value > self.margins[key]:
            self.margins[key] = value

    def track_min(self, key: str, value) -> None:
        if key not in self.margins or value < self.margins[key]:
            self.margins[key] = value

    def summary(self) -> str:
        verdict = "PASS" if self.ok else "FAIL"
        exp = " (failure expected)" if self.expected_failure else ""
        return f"{self.name}: {verdict}{exp}, {self.failure_count}/{self.trials} failing trials"


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    return np.random.default_rng([seed, trial])


def _trial_ids(trials: int, trial_ids: Iterable[int] | None) -> list[int]:
    return list(range(trials)) if trial_ids is None else list(trial_ids)


def _as_number(sys, v):
    return Fraction(v) if getattr(sys, "exact", False) else float(v)


# ---------------------------------------------------------------------------
# independent re-verification


def recheck_profile(sys, cert: ShadowCertificate, po: PseudoOrbit, lo: int, hi: int) -> list:
    """d(f^k z, x_k) for k in [lo, hi], recomputed from the shadow point."""
    if isinstance(sys, (ToralSystem, SphereSystem)):
        orbit = cert.extras["orbit"]
        base = cert.extras["anchor"]
        return [sys.distance(orbit[k - base], po.point_at(sys, k)) for k in range(lo, hi + 1)]
    z = cert.shadow_point
    return [sys.distance(sys.iterate(z, k), po.point_at(sys, k)) for k in range(lo, hi + 1)]


def torus_orbit_defect(matrix, orbit: Sequence[TorusPoint]) -> float:
    """max_k |A z_k - z_{k+1}| (mod 1) in exact rational arithmetic on the
    stored floats."""
    (a, b), (c, d) = matrix
    worst = Fraction(0)
    prev = None
    for p in orbit:
        cur = (Fraction(p.x), Fraction(p.y))
        if prev is not None:
            ix = a * prev[0] + b * prev[1] - cur[0]
            iy = c * prev[0] + d * prev[1] - cur[1]
            ex = abs(ix - round(ix))
            ey = abs(iy - round(iy))
            worst = max(worst, ex, ey)
        prev = cur
    return float(worst)


def _validate_shadow(sys, cert: ShadowCertificate) -> str | None:
    z = cert.shadow_point
    try:
        if isinstance(sys, SftSystem):
            validate_point(sys.graph, z)
        elif isinstance(sys, ProductSystem):
            sys.validate(z)
    except ValueError as exc:
        return str(exc)
    return None


# ---------------------------------------------------------------------------
# shadowing


def check_shadowing(sys, delta, eps, window: tuple[int, int] = (-64, 64), trials: int = 100,
                    seed: int = 0, p_perturb: float = 0.5,
                    trial_ids: Iterable[int] | None = None) -> PropertyReport:
    """Random delta-pseudo-orbits on ``window`` must be eps-shadowed."""
    lo, hi = window
    delta = _as_number(sys, delta)
    eps = _as_number(sys, eps)
    rep = PropertyReport("shadowing", params={"system": repr(sys), "delta": delta, "eps": eps,
                                              "window": window, "seed": seed,
                                              "p_perturb": p_perturb})
    exact = getattr(sys, "exact", False)
    toral = isinstance(sys, (ToralSystem, SphereSystem))
    for t in _trial_ids(trials, trial_ids):
        rep.trials += 1
        rng = trial_rng(seed, t)
        po = sys.random_pseudo_orbit(rng, lo, hi - lo + 1, delta, p_perturb)
        try:
            # only the window matters here, so symbolic solvers skip their padding
            cert = sys.shadow(po, pad=0) if exact else sys.shadow(po)
        except ValueError as exc:
            rep.fail(seed=seed, trial=t, reason=f"solver rejected: {exc}")
            continue
        bad = _validate_shadow(sys, cert)
        if bad:
            rep.fail(seed=seed, trial=t, reason=f"inadmissible shadow: {bad}")
            continue
        prof = recheck_profile(sys, cert, po, lo, hi)
        sup = max(prof)
        claimed = cert.window_sup
        if exact and sup != claimed:
            rep.fail(seed=seed, trial=t, reason="certificate profile does not re-verify",
                     claimed=claimed, recomputed=sup)
            continue
        if not exact and abs(sup - claimed) > 1e-12:
            rep.fail(seed=seed, trial=t, reason="certificate profile does not re-verify",
                     claimed=claimed, recomputed=sup)
            continue
        rep.track_max("worst_sup", sup)
        if toral:
            rep.track_max("residual", cert.extras["residual"])
            orbit = cert.extras.get("torus_orbit", cert.extras["orbit"])
            rep.track_max("orbit_defect", torus_orbit_defect(sys.anosov.matrix, orbit))
        if sup > eps:
            rep.fail(seed=seed, trial=t, reason="sup distance above eps", sup=sup)
    if "worst_sup" in rep.margins:
        rep.margins["eps_minus_worst"] = eps - rep.margins["worst_sup"]
    return rep


# ---------------------------------------------------------------------------
# schedule-predicted tail bounds


def dyadic_schedule(delta, c: int) -> Callable[[int], Fraction]:
    """k -> delta * 2^-floor(|k| / c)."""
    delta = Fraction(delta)
    return lambda k: delta / (1 << (abs(k) // c))


def geometric_schedule(delta: float, rate: float) -> Callable[[int], float]:
    """k -> delta * rate^|k| (float systems)."""
    return lambda k: float(delta) * rate ** abs(k)


def _agreement_lengths(bounds: Sequence) -> list:
    # a_j: the step j error bound forces agreement at every |i| <= a_j; None = exact step
    out = []
    for b in bounds:
        c = dyadic_radius(b)
        out.append(None if c is None else c - 1)
    return out


def sft_bound_profile(bounds: Sequence, start: int, ks: Iterable[int]) -> dict[int, Fraction]:
    """Upper bound on d(sigma^k z, x_k) for the diagonal shadow z of any
    pseudo-orbit on ``[start, start + len(bounds)]`` obeying the step
    bounds (true-orbit extension outside).

    z and x_k agree at relative indices -g^- <= i <= g^+ with
    g^+ = min_t (a_{k+t} + t + 1), g^- = min_t (a_{k-1-t} + t).
    """
    a = _agreement_lengths(bounds)
    n = len(a)
    out = {}
    for k in ks:
        gp = None
        for j in range(max(k, start), start + n):
            if a[j - start] is None:
                continue
            v = a[j - start] + (j - k) + 1
            gp = v if gp is None else min(gp, v)
        gm = None
        for j in range(min(k - 1, start + n - 1), start - 1, -1):
            if a[j - start] is None:
                continue
            v = a[j - start] + (k - 1 - j)
            gm = v if gm is None else min(gm, v)
        b = Fraction(0)
        if gp is not None:
            b += Fraction(1, 1 << gp) if gp >= 0 else Fraction(1 << -gp)
        if gm is not None:
            b += Fraction(1, 1 << gm) if gm >= 0 else Fraction(1 << -gm)
        out[k] = min(b, Fraction(3))
    return out


def predicted_bound_profile(sys, po: PseudoOrbit, ks: Sequence[int], cert: ShadowCertificate | None = None) -> dict:
    """Schedule-only upper bound on d(f^k z, x_k) at the indices ``ks``."""
    bounds = po.bounds[:len(po.points) - 1]
    if isinstance(sys, SftSystem):
        return sft_bound_profile(bounds, po.start, ks)
    if isinstance(sys, ProductSystem):
        total = {k: Fraction(0) for k in ks}
        from_r = set(cert.extras.get("from_r", [])) if cert is not None else set()
        for n in range(1, sys.depth + 1):
            w = Fraction(1, 1 << n)
            if n in from_r:
                for k in ks:
                    total[k] += 3 * w
                continue
            coord = sft_bound_profile([Fraction(b) * (1 << n) for b in bounds], po.start, ks)
            for k in ks:
                total[k] += w * coord[k]
        return total
    if isinstance(sys, (ToralSystem, SphereSystem)):
        prof = correction_bound_profile(sys.anosov, [float(b) for b in bounds])
        return {k: float(prof[k - po.start]) for k in ks}
    raise TypeError(f"no schedule bound for {sys!r}")


def predicted_index(bound: dict, gamma) -> int | None:
    """Least K >= 0 such that bound[k] < gamma for every inspected |k| >= K;
    None when the inspected range never gets there."""
    worst = max((abs(k) for k, b in bound.items() if not b < gamma), default=-1)
    K = worst + 1
    if any(abs(k) >= K for k in bound):
        return K
    return None


def check_l_shadowing(sys, delta, eps, schedule: Callable[[int], object] | None = None,
                      window: tuple[int, int] = (-40, 40), trials: int = 50, seed: int = 0,
                      gammas: Sequence = (), p_perturb: float = 0.5, c: int = 1,
                      trial_ids: Iterable[int] | None = None) -> PropertyReport:
    """Both L-shadowing clauses on random pseudo-orbits with decaying errors:
    windowed sup <= eps, and for each gamma the profile stays below gamma
    from the schedule-predicted index on.  The predicted bound itself is
    also checked at every inspected index."""
    exact = getattr(sys, "exact", False)
    if schedule is None:
        schedule = dyadic_schedule(delta, c) if exact else geometric_schedule(delta, 2 ** (-1 / c))
    if not gammas:
        gammas = (Fraction(1, 1 << 10), Fraction(1, 1 << 20)) if exact else (1e-2, 1e-4, 1e-6)
    eps = _as_number(sys, eps)
    gammas = [_as_number(sys, g) for g in gammas]
    lo, hi = window
    rep = PropertyReport("l-shadowing", params={"system": repr(sys), "delta": _as_number(sys, delta),
                                                "eps": eps, "window": window, "seed": seed,
                                                "gammas": gammas, "schedule_c": c})
    for t in _trial_ids(trials, trial_ids):
        rep.trials += 1
        rng = trial_rng(seed, t)
        po = sys.random_pseudo_orbit(rng, lo, hi - lo + 1, schedule, p_perturb)
        try:
            cert = sys.shadow(po)
        except ValueError as exc:
            rep.fail(seed=seed, trial=t, reason=f"solver rejected: {exc}")
            continue
        bad = _validate_shadow(sys, cert)
        if bad:
            rep.fail(seed=seed, trial=t, reason=f"inadmissible shadow: {bad}")
            continue
        ks = list(cert.indices)
        prof = dict(zip(ks, recheck_profile(sys, cert, po, ks[0], ks[-1])))
        wsup = max(prof[k] for k in range(lo, hi + 1))
        rep.track_max("worst_window_sup", wsup)
        if wsup > eps:
            rep.fail(seed=seed, trial=t, reason="windowed sup above eps", sup=wsup)
            continue
        bound = predicted_bound_profile(sys, po, ks, cert)
        tol = 0 if exact else 1e-12
        over = [k for k in ks if prof[k] > bound[k] + tol]
        if over:
            rep.fail(seed=seed, trial=t, reason="distance above schedule bound", index=over[0],
                     distance=prof[over[0]], bound=bound[over[0]])
            continue
        for g in gammas:
            K = predicted_index(bound, g)
            if K is None:
                rep.fail(seed=seed, trial=t, reason="gamma not reached inside the inspected range",
                         gamma=g)
                break
            rep.track_max(f"predicted_index[{g}]", K)
            late = [k for k in ks if abs(k) >= K and not prof[k] < g]
            if late:
                rep.fail(seed=seed, trial=t, reason="tail above gamma past predicted index",
                         gamma=g, index=late[0], distance=prof[late[0]])
                break
    return rep


# ---------------------------------------------------------------------------
# local product characterization


def _close_pair_sft(g: TransitionGraph, rng, delta) -> tuple:
    x = random_point(g, rng)
    c = dyadic_radius(Fraction(delta)) + 1
    y = reroute(g, x, c, 1 if rng.random() < 0.5 else -1, rng)
    if rng.random() < 0.5:
        y = reroute(g, y, c, -1 if rng.random() < 0.5 else 1, rng)
    return x, y


def check_local_product_char(sys, delta, eps, trials: int = 100, seed: int = 0,
                             window: int = 60, gamma=None,
                             trial_ids: Iterable[int] | None = None) -> PropertyReport:
    """For pairs with d(x, y) < delta, a point z within eps of x forward and
    of y backward, asymptotic to both.

    Symbolic systems shadow the junction pseudo-orbit (past of y, future of
    x) and require exactly merging tails; toral systems use the local
    product point and require decay below ``gamma`` after ``window``
    steps, checked in high precision.
    """
    rep = PropertyReport("local-product", params={"system": repr(sys), "delta": delta, "eps": eps,
                                                  "window": window, "seed": seed})
    for t in _trial_ids(trials, trial_ids):
        rep.trials += 1
        rng = trial_rng(seed, t)
        if isinstance(sys, SftSystem):
            _local_product_sft(sys, rep, rng, Fraction(delta), Fraction(eps), window, seed, t)
        elif isinstance(sys, ToralSystem):
            _local_product_toral(sys, rep, rng, float(delta), float(eps), window,
                                 1e-9 if gamma is None else float(gamma), seed, t)
        else:
            raise TypeError(f"local product check not available for {sys!r}")
    return rep


def junction_pseudo_orbit(sys: SftSystem, x, y) -> PseudoOrbit:
    """Past of y up to index -1, then x from index 0 on."""
    return PseudoOrbit.build(sys, -1, [y.shift(-1), x])


def _local_product_sft(sys, rep, rng, delta, eps, window, seed, t):
    x, y = _close_pair_sft(sys.graph, rng, delta)
    d0 = distance(x, y)
    if not d0 < delta:
        rep.fail(seed=seed, trial=t, reason="sampler produced a pair at distance >= delta", d=d0)
        return
    cert = shadow_sft(sys.graph, junction_pseudo_orbit(sys, x, y), pad=0)
    z = cert.shadow_point
    fwd = max(distance(z.shift(k), x.shift(k)) for k in range(0, window + 1))
    bwd = max(distance(z.shift(-k), y.shift(-k)) for k in range(0, window + 1))
    rep.track_max("worst_forward", fwd)
    rep.track_max("worst_backward", bwd)
    if fwd > eps or bwd > eps:
        rep.fail(seed=seed, trial=t, reason="z leaves the eps-ball", forward=fwd, backward=bwd)
    elif not (same_right_tail(z, x) and same_left_tail(z, y)):
        rep.fail(seed=seed, trial=t, reason="tails do not merge", z=str(z))


def _hp_iterate(matrix, p, n):
    (a, b), (c, d) = matrix
    x, y = p
    for _ in range(n):
        x, y = a * x + b * y, c * x + d * y
    return x, y


def _hp_dist(p, q):
    dx = p[0] - q[0]
    dy = p[1] - q[1]
    dx -= mpmath.floor(dx + 0.5)
    dy -= mpmath.floor(dy + 0.5)
    return max(abs(dx), abs(dy))


def decay_profile(anosov, z: TorusPoint, x: TorusPoint, steps: int, backward: bool = False,
                  dps: int = 60) -> list:
    """d(A^k z, A^k x) (or A^-k) for k = 0..steps, iterating the integer
    matrix in high precision."""
    (a, b), (c, d) = anosov.matrix
    s = anosov.det
    m = ((d * s, -b * s), (-c * s, a * s)) if backward else anosov.matrix
    out = []
    with mpmath.workdps(dps):
        p = (mpmath.mpf(z.x), mpmath.mpf(z.y))
        q = (mpmath.mpf(x.x), mpmath.mpf(x.y))
        for _ in range(steps + 1):
            out.append(_hp_dist(p, q))
            p = _hp_iterate(m, p, 1)
            q = _hp_iterate(m, q, 1)
    return out


def _local_product_toral(sys, rep, rng, delta, eps, window, gamma, seed, t):
    an = sys.anosov
    x = TorusPoint(*rng.random(2))
    r = delta * rng.random()
    ang = rng.random() * 2 * math.pi
    y = TorusPoint(x.x + r * math.cos(ang) / math.sqrt(2), x.y + r * math.sin(ang) / math.sqrt(2))
    try:
        z = local_product_point(an, x, y, eps)
    except ValueError as exc:
        rep.fail(seed=seed, trial=t, reason=str(exc))
        return
    _, _, (rx, ry) = local_product_parameters(an, x, y, z)
    line = float(max(rx, ry))
    rep.track_max("line_residual", line)
    fwd = decay_profile(an, z, x, window)
    bwd = decay_profile(an, z, y, window, backward=True)
    rep.track_max("worst_forward", float(max(fwd)))
    rep.track_max("worst_backward", float(max(bwd)))
    rep.track_max("final_forward", float(fwd[-1]))
    rep.track_max("final_backward", float(bwd[-1]))
    if line > 1e-12:
        rep.fail(seed=seed, trial=t, reason="line equations not satisfied", residual=line)
    elif max(fwd) > eps or max(bwd) > eps:
        rep.fail(seed=seed, trial=t, reason="z leaves the eps-ball")
    elif not (fwd[-1] < gamma and bwd[-1] < gamma):
        rep.fail(seed=seed, trial=t, reason="no decay below gamma", forward=float(fwd[-1]),
                 backward=float(bwd[-1]))


# ---------------------------------------------------------------------------
# finite-window enumeration for symbolic systems


def window_variants(g: TransitionGraph, x: EventuallyPeriodicSeq, lo: int, hi: int,
                    limit: int = 200_000) -> Iterator[EventuallyPeriodicSeq]:
    """Every admissible point equal to x outside ``[lo, hi]``, x first."""
    if hi - lo + 1 > 24:
        raise ValueError("window too large for exhaustive enumeration")
    n = hi - lo + 1
    left, right = x[lo - 1], x[hi + 1]
    pred = g.predecessors
    # can[i]: vertices at position lo + i from which x[hi + 1] is reachable
    can = [set() for _ in range(n)]
    can[n - 1] = set(pred[right])
    for i in range(n - 2, -1, -1):
        can[i] = {u for u in range(g.vertex_count) if any(v in can[i + 1] for v in g.successors[u])}
    base = x.window(lo, hi + 1)
    yield x
    count = 0
    succ = g.successors
    stack = [(left, [])]
    while stack:
        u, word = stack.pop()
        i = len(word)
        if i == n:
            if word != base:
                count += 1
                if count > limit:
                    raise ValueError("enumeration limit exceeded")
                yield glue(x, lo, word, x, g.vertex_count)
            continue
        for v in sorted(succ[u], reverse=True):
            if v in can[i]:
                stack.append((v, word + [v]))


@dataclass
class BallProbeReport:
    """Outcome of the windowed dynamical-ball probe."""

    found: bool
    window: int
    delta: object
    witness: object = None
    point: object = None
    profile: tuple = ()
    merges: bool = False
    radius_bound: float | None = None
    notes: str = ""


def asymptotic_ball_probe(sys, x, eps, delta, window: int, pad: int = 8) -> BallProbeReport:
    """Look for y != x with sup_{|k|<=W} d(f^k y, f^k x) <= delta and turn it
    into a point z != x asymptotic to x in both time directions.

    Symbolic systems enumerate the windowed ball exhaustively over points
    differing from x on [-W, W] only.  Toral systems report the radius bound
    2 * basis_condition * delta / lambda_u^W of the windowed ball; the ball is
    reported empty once that bound is below the float resolution of the
    coordinates.
    """
    if isinstance(sys, SftSystem):
        delta = Fraction(delta)
        if delta == 0:
            return BallProbeReport(False, window, delta, notes="delta = 0: the ball is {x}")
        g = sys.graph
        for y in window_variants(g, x, -window, window):
            if y == x:
                continue
            if all(distance(y.shift(k), x.shift(k)) <= delta for k in range(-window, window + 1)):
                # junction pseudo-orbit: past of x, the orbit of y, future of x
                pts = [x.shift(-window - 1)] + [y.shift(k) for k in range(-window, window + 1)] \
                    + [x.shift(window + 1)]
                po = PseudoOrbit.build(sys, -window - 1, pts)
                if po.delta < 1:
                    z = shadow_sft(g, po, pad=0).shadow_point
                else:
                    diag = [p[0] for p in pts]
                    z = glue(x, -window - 1, diag, x, g.vertex_count)
                    validate_point(g, z)
                prof = tuple(distance(z.shift(k), x.shift(k))
                             for k in range(-window - pad, window + pad + 1))
                merges = agreement_radius(z, x) is not None and z != x
                return BallProbeReport(True, window, delta, y, z, prof, merges,
                                       notes=f"eps={eps}")
        return BallProbeReport(False, window, delta, notes="windowed ball is {x}")
    if isinstance(sys, ToralSystem):
        an = sys.anosov
        delta = float(delta)
        r = 2 * an.basis_condition * delta / abs(an.lam_u) ** window
        found = delta > 0 and r >= 2.0 ** -52
        return BallProbeReport(found, window, delta, radius_bound=r,
                               notes="windowed ball radius bound from the eigen-expansion")
    raise TypeError(f"asymptotic ball probe not available for {sys!r}")


# ---------------------------------------------------------------------------
# stable sets and positive expansivity


def check_stable_inclusion(sys, c, window: int = 40, trials: int = 100, seed: int = 0,
                           trial_ids: Iterable[int] | None = None) -> PropertyReport:
    return stable_inclusion_check(sys, c, window, trials, seed, trial_ids)


def stable_inclusion_check(sys, c, window: int = 40, trials: int = 100, seed: int = 0,
                           trial_ids: Iterable[int] | None = None) -> PropertyReport:
    """Pairs that stay c-close for 0 <= k <= W must be forward asymptotic.

    Symbolic rendering: c < 1 forces agreement on [0, W], so the profile
    must obey d_k <= 2^(1-k) + 2^(1-(W-k)); pairs with equal right tails are
    also required to merge exactly.  Toral rendering: with the eigenbasis
    constant b, d_k <= b * c * (|lambda_s|^k + lambda_u^-(W-k)), evaluated in
    high precision.  Pairs that are not c-close on the window are skipped
    (counted in ``margins["skipped"]``).
    """
    rep = PropertyReport("stable-inclusion", params={"system": repr(sys), "c": c,
                                                     "window": window, "seed": seed})
    rep.margins["skipped"] = 0
    for t in _trial_ids(trials, trial_ids):
        rep.trials += 1
        rng = trial_rng(seed, t)
        if isinstance(sys, SftSystem):
            _stable_sft(sys, rep, rng, Fraction(c), window, seed, t)
        elif isinstance(sys, ToralSystem):
            _stable_toral(sys, rep, rng, float(c), window, seed, t)
        else:
            raise TypeError(f"stable inclusion check not available for {sys!r}")
    return rep


def _stable_sft(sys, rep, rng, c, W, seed, t):
    g = sys.graph
    x = random_point(g, rng)
    if rng.random() < 0.5:
        y = reroute(g, x, int(rng.integers(0, W + 1)), -1, rng)
    else:
        y = reroute(g, x, int(rng.integers(0, 2 * W + 1)), 1, rng)
    prof = [distance(x.shift(k), y.shift(k)) for k in range(W + 1)]
    if any(d > c for d in prof):
        rep.margins["skipped"] += 1
        return
    for k, d in enumerate(prof):
        b = Fraction(2, 1 << k) + Fraction(2, 1 << (W - k))
        if d > b:
            rep.fail(seed=seed, trial=t, reason="c-close pair not contracting", index=k,
                     distance=d, bound=b)
            return
    if not same_right_tail(x, y):
        # c-close on the whole window yet not asymptotic: beyond what W can decide
        rep.margins["window_limited"] = rep.margins.get("window_limited", 0) + 1
        return
    far = W + 200
    if not distance(x.shift(far), y.shift(far)) < Fraction(1, 1 << 100):
        rep.fail(seed=seed, trial=t, reason="equal right tails but no exact merge")


def _stable_toral(sys, rep, rng, c, W, seed, t):
    an = sys.anosov
    with mpmath.workdps(60):
        _, _, vu, vs = an.hp(60)
        x = (mpmath.mpf(rng.random()), mpmath.mpf(rng.random()))
        b = mpmath.mpf(c) * (rng.random() - 0.5) / 2
        # unstable offset small enough to stay below c/4 through step W
        a = mpmath.mpf(c) * (rng.random() - 0.5) / (2 * mpmath.mpf(abs(an.lam_u)) ** (W + 3 * rng.random()))
        y = (x[0] + a * vu[0] + b * vs[0], x[1] + a * vu[1] + b * vs[1])
        prof = []
        p, q = x, y
        for _ in range(W + 1):
            prof.append(_hp_dist(p, q))
            p = _hp_iterate(an.matrix, p, 1)
            q = _hp_iterate(an.matrix, q, 1)
        if any(d > c for d in prof):
            rep.margins["skipped"] += 1
            return
        ls, lu = abs(mpmath.mpf(an.hp(60)[1])), abs(mpmath.mpf(an.hp(60)[0]))
        for k, d in enumerate(prof):
            bound = an.basis_condition * c * (ls ** k + lu ** (-(W - k)))
            if d > bound * (1 + 1e-9):
                rep.fail(seed=seed, trial=t, reason="c-close pair not contracting", index=k,
                         distance=float(d), bound=float(bound))
                return
        rep.track_max("final_ratio", float(prof[-1] / (an.basis_condition * c)))


def _is_finite_sft(g: TransitionGraph) -> bool:
    ess = g.essential
    succ = g.essential_successors
    return all(len(succ[v]) == 1 for v in ess) and \
        all(sum(1 for u in ess if v in succ[u]) == 1 for v in ess)


def _ball_variants(g: TransitionGraph, x: EventuallyPeriodicSeq, r: int, window: int):
    """Admissible points equal to x on [-r, r] and outside [-W, W]."""
    if window <= r:
        yield x
        return
    futures = list(window_variants(g, x, r + 1, window))
    for past in window_variants(g, x, -window, -r - 1):
        for fut in futures:
            yield glue(past, r + 1, [], fut, g.vertex_count)


def positive_expansivity_probe(sys, c, delta, samples: int = 20, window: int = 16,
                               seed: int = 0, points: Sequence | None = None) -> PropertyReport:
    """Does every y in B(x, delta) stay c-close to x backward over the window?

    On a finite space the answer is yes; an infinite expansive system must
    produce a witness y.  The report's ``expected_failure`` is set from
    whether the space is infinite.
    """
    rep = PropertyReport("pos-expansivity", params={"system": repr(sys), "c": c, "delta": delta,
                                                    "window": window, "seed": seed})
    if isinstance(sys, SftSystem):
        g = sys.graph
        rep.expected_failure = not _is_finite_sft(g)
        c, delta = Fraction(c), Fraction(delta)
        xs = list(points) if points is not None else \
            [random_point(g, trial_rng(seed, i)) for i in range(samples)]
        # points of B(x, delta) differ from x only outside [-r, r]
        r = dyadic_radius(delta)
        for i, x in enumerate(xs):
            rep.trials += 1
            for y in _ball_variants(g, x, r, window):
                if y == x or not distance(x, y) < delta:
                    continue
                bad = next((k for k in range(window + 1)
                            if distance(x.shift(-k), y.shift(-k)) > c), None)
                if bad is not None:
                    rep.fail(seed=seed, trial=i, x=str(x), y=str(y), k=-bad,
                             distance=distance(x.shift(-bad), y.shift(-bad)))
                    break
        return rep
    if isinstance(sys, ToralSystem):
        an = sys.anosov
        rep.expected_failure = True
        c, delta = float(c), float(delta)
        for i in range(samples):
            rep.trials += 1
            rng = trial_rng(seed, i)
            x = TorusPoint(*rng.random(2))
            s = delta * (0.5 + 0.4 * rng.random())
            y = TorusPoint(x.x + s * an.v_s[0] / 2, x.y + s * an.v_s[1] / 2)
            if not torus_distance(x, y) < delta:
                continue
            prof = decay_profile(an, y, x, window, backward=True, dps=40)
            bad = next((k for k, d in enumerate(prof) if d > c), None)
            if bad is not None:
                rep.fail(seed=seed, trial=i, x=str(x), y=str(y), k=-bad, distance=float(prof[bad]),
                         direction="stable")
        return rep
    raise TypeError(f"positive expansivity probe not available for {sys!r}")


# ---------------------------------------------------------------------------
# semi-horseshoe extraction


def entropy_bound(N: int) -> float:
    """log(2) / N."""
    return math.log(2) / N


def solver_delta(eps) -> Fraction:
    """Largest dyadic delta whose 2*delta-pseudo-orbits the diagonal solver
    shadows within eps/4."""
    eps = Fraction(eps)
    d = Fraction(1, 4)
    while True:
        b = diagonal_bound(2 * d)
        if b is not None and b <= eps / 4:
            return d
        d /= 2


def _in_recurrent_class(g: TransitionGraph, x: EventuallyPeriodicSeq) -> bool:
    syms = set(x.left) | set(x.center) | set(x.right)
    return any(syms <= cls for cls in chain_classes(g))


def find_return_bridge(g: TransitionGraph, x: EventuallyPeriodicSeq, n: int, delta: Fraction,
                       budget: int | None = None) -> tuple[int, EventuallyPeriodicSeq] | None:
    """(j, z) with d(z, f^n x) < delta and d(f^j z, x) < delta, smallest j."""
    c = dyadic_radius(delta) + 1
    if budget is None:
        budget = g.vertex_count ** 2 + 2 * c + 2
    xn = x.shift(n)
    for j in range(budget + 1):
        cand = None
        later = x.shift(-j)
        if j <= 2 * c:
            if all(xn[i] == later[i] for i in range(j - c, c + 1)):
                cand = glue(xn, c + 1, [], later, g.vertex_count)
        else:
            from .product import _bridge
            mid = _bridge(g, xn[c], later[j - c], j - 2 * c)
            if mid is not None:
                cand = glue(xn, c + 1, mid, later, g.vertex_count)
        if cand is None or not is_admissible(g, cand):
            continue
        if distance(cand, xn) < delta and distance(cand.shift(j), x) < delta:
            return j, cand
    return None


def horseshoe_pseudo_orbit(sys: SftSystem, x, y, z, n: int, j: int, word: str,
                           bound) -> PseudoOrbit:
    """Cyclic pseudo-orbit: block q follows x or y (per ``word[q]``) for n
    steps, then z for j steps."""
    pts = []
    for ch in word:
        w = x if ch == "x" else y
        pts.extend(w.shift(r) for r in range(n))
        pts.extend(z.shift(r) for r in range(j))
    return PseudoOrbit.build(sys, 0, pts, [bound] * len(pts), cyclic=True)


def extract_semi_horseshoe(sys, x, y, n: int, eps, word_length: int = 8,
                           budget: int | None = None) -> SemiHorseshoe:
    """Semi-horseshoe for f^N built from a pair (x, y) that separates by more
    than eps within n steps and is delta-close at times 0 and n.

    Each {x, y}-word of length L gives a cyclic 2*delta-pseudo-orbit whose
    periodic shadow is the word's point.  Separations are exact orbit sup
    distances of the periodic points.
    """
    if not isinstance(sys, SftSystem):
        raise TypeError("semi-horseshoe extraction is implemented for symbolic systems")
    g = sys.graph
    eps = Fraction(eps)
    if not 1 <= word_length <= 12:
        raise ValueError("word_length must be in 1..12")
    validate_point(g, x)
    validate_point(g, y)
    if not _in_recurrent_class(g, x):
        raise ValueError("x is not in a recurrent class")
    delta = solver_delta(eps)
    gamma = max(distance(x.shift(k), y.shift(k)) for k in range(n))
    if not eps < gamma:
        raise ValueError(f"pair does not separate: gamma = {gamma} <= eps = {eps}")
    d0, dn = distance(x, y), distance(x.shift(n), y.shift(n))
    if not max(d0, dn) < delta:
        raise ValueError(f"pair not delta-close at times 0 and n (delta = {delta})")
    found = find_return_bridge(g, x, n, delta, budget)
    if found is None:
        raise ValueError("no return bridge within the search budget")
    j, z = found
    N = n + j
    words = ["".join(w) for w in cartesian("xy", repeat=word_length)]
    points, cycles, sups = {}, [], []
    for w in words:
        po = horseshoe_pseudo_orbit(sys, x, y, z, n, j, w, 2 * delta)
        cert = shadow_sft(g, po)
        sups.append(cert.sup_distance)
        points[w] = cert.shadow_point
        cycles.append(cert.shadow_point.window(0, word_length * N))
    seps = periodic_sup_distances(cycles)
    m = len(words)
    off = [seps[i, k] for i in range(m) for k in range(i + 1, m)]
    floor = min(off) if off else Fraction(0)
    diam = max(off) if off else Fraction(0)
    quarter = eps / 4

    def h(p: EventuallyPeriodicSeq, lo: int = -3, hi: int = 3) -> dict[int, str]:
        out = {}
        for q in range(lo, hi + 1):
            pq = p.shift(q * N)
            for ch, w in (("x", x), ("y", y)):
                if max(distance_profile(pq, w, (0, n - 1))) <= quarter:
                    out[q] = ch
                    break
            else:
                raise ValueError(f"block {q} follows neither orbit segment")
        return out

    return SemiHorseshoe(
        source="pair extraction",
        period=N,
        word_length=word_length,
        points=points,
        separation_floor=floor,
        diameter_ceiling=diam,
        semiconjugacy=h,
        shift_power=1,
        extras={
            "n": n,
            "j": j,
            "bridge": z,
            "delta": delta,
            "eps": eps,
            "gamma": gamma,
            "entropy_bound": entropy_bound(N),
            "worst_shadow_sup": max(sups),
            "separations": seps,
            "words": words,
        },
    )


def horseshoe_semiconjugacy_violations(hs: SemiHorseshoe, words: Sequence[str] | None = None,
                                       lo: int = -3, hi: int = 3) -> list[tuple[str, int]]:
    """(word, block) pairs where h(f^N p) != sigma(h(p))."""
    bad = []
    for w in words or list(hs.points):
        p = hs.points[w]
        left = hs.semiconjugacy(p.shift(hs.period), lo, hi)
        right = hs.semiconjugacy(p, lo + hs.shift_power, hi + hs.shift_power)
        for q in range(lo, hi + 1):
            if left[q] != right[q + hs.shift_power]:
                bad.append((w, q))
    return bad


def two_loop_fixture(p: int = 3, q: int = 4, segment_start: int = 12, n: int = 36):
    """(x, y, n): x repeats the p-loop; y swaps q traversals of it for p
    traversals of the q-loop starting at ``segment_start``."""
    from .sft import loop_word
    pw, qw = loop_word(p, q, "p"), loop_word(p, q, "q")
    alphabet = p + q - 1
    x = EventuallyPeriodicSeq.periodic(pw, 0, alphabet)
    if segment_start % p:
        raise ValueError("segment must start at a visit to vertex 0")
    # p traversals of the q-loop span as many steps as q traversals of the p-loop
    y = glue(x, segment_start, list(qw * p), x, alphabet)
    return x, y, n
