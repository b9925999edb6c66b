"""
Countable products of two-loop shifts over a ladder of primes, truncated at
a finite depth D.

Coordinate n lives in X_n = X_(p_n, p_{n+1}) and the metric is

    d(x, y) = sum_n d_n(x_n, y_n) / 2^n.

Only coordinates 1..D are represented.  Every d_n is at most 3, so the
unrepresented coordinates add at most 3 * 2^-D; distances are reported as an
exact interval ``(lower, lower + 3 * 2^-D)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import product as cartesian
from math import isqrt
from typing import Sequence

import numpy as np

from .orbits import PseudoOrbit, SemiHorseshoe, ShadowCertificate
from .seqcore import (EventuallyPeriodicSeq, agreement_radius, distance, glue,
                      periodic_sup_distances)
from .sft import (TransitionGraph, count_periodic, dyadic_radius,
                  loop_word, periodic_point, random_point, reroute, shadow_sft,
                  two_loop_sft, validate_point)


def isprime(n: int) -> bool:
    if n < 2:
        return False
    for d in range(2, isqrt(n) + 1):
        if n % d == 0:
            return False
    return True


@dataclass(frozen=True)
class PrimeLadder:
    primes: tuple[int, ...]

    def __post_init__(self):
        ps = tuple(int(p) for p in self.primes)
        if not ps:
            raise ValueError("empty ladder")
        for p in ps:
            if not isprime(p):
                raise ValueError(f"{p} is not prime")
        if any(a >= b for a, b in zip(ps, ps[1:])):
            raise ValueError(f"ladder {ps} is not strictly increasing")
        object.__setattr__(self, "primes", ps)

    def __len__(self):
        return len(self.primes)

    def pair(self, n: int) -> tuple[int, int]:
        """(p_n, p_{n+1}) for the 1-based coordinate n."""
        return self.primes[n - 1], self.primes[n]


@dataclass(frozen=True)
class ProductPoint:
    """Coordinates 1..D of a point of the product."""

    coords: tuple[EventuallyPeriodicSeq, ...]

    @property
    def depth(self) -> int:
        return len(self.coords)

    @property
    def tail_bound(self) -> Fraction:
        return Fraction(3, 1 << self.depth)

    def shift(self, k: int) -> "ProductPoint":
        if k == 0:
            return self
        return ProductPoint(tuple(c.shift(k) for c in self.coords))

    def __getitem__(self, n: int) -> EventuallyPeriodicSeq:
        """1-based coordinate access."""
        if not 1 <= n <= self.depth:
            raise IndexError(n)
        return self.coords[n - 1]

    def __str__(self):
        return " ; ".join(str(c) for c in self.coords)


def product_distance(a: ProductPoint, b: ProductPoint) -> tuple[Fraction, Fraction]:
    """Exact ``(lower, upper)`` enclosing the distance of every extension of
    the two truncations."""
    if a.depth != b.depth:
        raise ValueError(f"depth mismatch: {a.depth} vs {b.depth}")
    lower = sum((distance(x, y) / (1 << n) for n, (x, y) in enumerate(zip(a.coords, b.coords), 1)),
                Fraction(0))
    return lower, lower + a.tail_bound


class ProductSystem:
    """F = sigma_1 x ... x sigma_D on X_1 x ... x X_D."""

    exact = True

    def __init__(self, ladder: PrimeLadder, depth: int):
        if depth < 1:
            raise ValueError("depth must be >= 1")
        if len(ladder) < depth + 1:
            raise ValueError(f"depth {depth} needs {depth + 1} primes, ladder has {len(ladder)}")
        self.ladder = ladder
        self.depth = depth
        self.graphs = tuple(two_loop_sft(*ladder.pair(n)) for n in range(1, depth + 1))

    def __repr__(self):
        return f"ProductSystem(ladder={self.ladder.primes}, depth={self.depth})"

    @property
    def tail_bound(self) -> Fraction:
        return Fraction(3, 1 << self.depth)

    def validate(self, x: ProductPoint) -> ProductPoint:
        if x.depth != self.depth:
            raise ValueError(f"point has depth {x.depth}, system has {self.depth}")
        for g, c in zip(self.graphs, x.coords):
            validate_point(g, c)
        return x

    def apply(self, x: ProductPoint) -> ProductPoint:
        return x.shift(1)

    def apply_inverse(self, x: ProductPoint) -> ProductPoint:
        return x.shift(-1)

    def iterate(self, x: ProductPoint, n: int) -> ProductPoint:
        return x.shift(n)

    def distance(self, x: ProductPoint, y: ProductPoint) -> Fraction:
        """Truncated (lower) distance."""
        return product_distance(x, y)[0]

    def distance_interval(self, x: ProductPoint, y: ProductPoint) -> tuple[Fraction, Fraction]:
        return product_distance(x, y)

    def shadow(self, po: PseudoOrbit, pad: int = 16) -> ShadowCertificate:
        return l_shadow_product(self, po, pad)

    def random_point(self, rng: np.random.Generator) -> ProductPoint:
        return ProductPoint(tuple(random_point(g, rng) for g in self.graphs))

    def reference_point(self, n: int) -> EventuallyPeriodicSeq:
        """Periodic point of coordinate n repeating its shorter loop."""
        p, q = self.ladder.pair(n)
        return periodic_point(self.graphs[n - 1], loop_word(p, q, "p"))

    def random_pseudo_orbit(self, rng, start, length, schedule, p_perturb=0.5, x0=None) -> PseudoOrbit:
        """Each coordinate is re-routed independently within ``schedule(k)``;
        the weights 2^-n keep the product step error below it as well."""
        sched = schedule if callable(schedule) else (lambda k, d=Fraction(schedule): d)
        x = self.random_point(rng) if x0 is None else x0
        pts = [x]
        for k in range(start, start + length - 1):
            c = dyadic_radius(sched(k))
            coords = []
            for g, xc in zip(self.graphs, x.coords):
                y = xc.shift(1)
                if c is not None and rng.random() < p_perturb:
                    y = reroute(g, y, c, 1 if rng.random() < 0.5 else -1, rng)
                coords.append(y)
            x = ProductPoint(tuple(coords))
            pts.append(x)
        return PseudoOrbit.build(self, start, pts, sched)


def build_product(ladder: PrimeLadder | Sequence[int], depth: int) -> ProductSystem:
    if not isinstance(ladder, PrimeLadder):
        ladder = PrimeLadder(tuple(ladder))
    return ProductSystem(ladder, depth)


def min_period_truncated(ladder: PrimeLadder | Sequence[int], depth: int) -> int:
    """Least P such that every coordinate X_1..X_D has a point of period
    dividing P, i.e. the least period of a periodic point of the truncation."""
    sys = build_product(ladder, depth)
    P = 1
    while True:
        if all(count_periodic(g, P) > 0 for g in sys.graphs):
            return P
        P += 1


def splice(r: ProductPoint, s: ProductPoint, agreement_window: int | None = None) -> ProductPoint:
    """Coordinate n of the result is s_n when s_n and r_n agree at every
    index |k| > n_0 for some n_0 <= ``agreement_window`` (any n_0 when None),
    and r_n otherwise."""
    if r.depth != s.depth:
        raise ValueError(f"depth mismatch: {r.depth} vs {s.depth}")
    out = []
    for rn, sn in zip(r.coords, s.coords):
        n0 = agreement_radius(sn, rn)
        keep = n0 is not None and (agreement_window is None or n0 <= agreement_window)
        out.append(sn if keep else rn)
    return ProductPoint(tuple(out))


def _bridge(g: TransitionGraph, u: int, v: int, length: int) -> list[int] | None:
    """Vertices w_1..w_{length-1} of a walk u -> w_1 -> ... -> v with exactly
    ``length`` edges, or None."""
    if length < 1:
        return None
    succ = g.successors
    reach = [{u}]
    for _ in range(length):
        reach.append({w for x in reach[-1] for w in succ[x]})
    if v not in reach[length]:
        return None
    pred = g.predecessors
    path = [v]
    for i in range(length - 1, 0, -1):
        path.append(min(w for w in pred[path[-1]] if w in reach[i]))
    return path[:0:-1]


def tail_matching_point(g: TransitionGraph, first: EventuallyPeriodicSeq, last: EventuallyPeriodicSeq,
                        start: int, stop: int) -> EventuallyPeriodicSeq | None:
    """A point equal to ``first`` shifted to index ``start`` below the window
    and to ``last`` shifted to ``stop`` above it, joined by any walk of the
    exact length: it limit-shadows every pseudo-orbit with these ends."""
    left = first.shift(-start)
    right = last.shift(-stop)
    mid = _bridge(g, left[start - 1], right[stop + 1], stop - start + 2)
    if mid is None:
        return None
    return glue(left, start, mid, right, g.vertex_count)


def l_shadow_product(sys: ProductSystem, po: PseudoOrbit, pad: int = 16) -> ShadowCertificate:
    """Splice of a coordinatewise diagonal shadow s with a tail-matching
    point r.

    The profile holds truncated (lower) distances.  ``extras`` records the
    per-coordinate accuracies ``eps_by_coordinate``, their weighted sum
    ``eps``, a windowed ``bound`` that also charges coordinates taken from r
    at full diameter, those coordinates ``from_r`` and the tail bound to add
    for the untruncated product.
    """
    if po.cyclic:
        raise ValueError("cyclic pseudo-orbits are not supported by the splice solver")
    for x in po.points:
        sys.validate(x)
    s_coords, r_coords, eps_n = [], [], []
    for n, g in enumerate(sys.graphs, 1):
        pts = tuple(x.coords[n - 1] for x in po.points)
        errs = tuple(distance(a.shift(1), b) for a, b in zip(pts, pts[1:]))
        cpo = PseudoOrbit(po.start, pts, errs, errs)
        r = tail_matching_point(g, pts[0], pts[-1], po.start, po.stop)
        bound = None
        if cpo.delta < 1:
            cert = shadow_sft(g, cpo, pad=0)
            sn, bound = cert.shadow_point, cert.extras["bound"]
        elif r is not None:
            # coarse coordinate: no diagonal shadow, the tail-matching point stands in
            sn = r
        else:
            raise ValueError(f"coordinate {n}: step error {cpo.delta} and no tail-matching walk")
        s_coords.append(sn)
        r_coords.append(sn if r is None else r)
        eps_n.append(Fraction(3) if bound is None else bound)
    s = ProductPoint(tuple(s_coords))
    r = ProductPoint(tuple(r_coords))
    w = splice(r, s)
    lo, hi = po.start - pad, po.stop + pad
    profile = tuple(sys.distance(w.shift(k), po.point_at(sys, k)) for k in range(lo, hi + 1))
    from_r = [n for n, (wn, sn) in enumerate(zip(w.coords, s.coords), 1) if wn != sn]
    # windowed accuracy of s in the truncated metric, then the cost of coordinates taken from r
    eps = sum((e / (1 << n) for n, e in enumerate(eps_n, 1)), Fraction(0))
    bound = eps + sum((Fraction(3, 1 << n) - eps_n[n - 1] / (1 << n) for n in from_r), Fraction(0))
    radii = [agreement_radius(wn, rn) for wn, rn in zip(w.coords, r.coords)]
    return ShadowCertificate(w, lo, profile, (po.start, po.stop), True, {
        "eps": eps,
        "eps_by_coordinate": eps_n,
        "bound": bound,
        "delta": po.delta,
        "from_r": from_r,
        "tail_bound": sys.tail_bound,
        "r_agreement_radii": radii,
    })


# ---------------------------------------------------------------------------
# explicit semi-horseshoes


def _blocks(p: int, q: int) -> dict[str, tuple[int, ...]]:
    # 'a': q traversals of the p-loop; 'b': p traversals of the q-loop
    return {"a": loop_word(p, q, "p") * q, "b": loop_word(p, q, "q") * p}


def horseshoe_word_point(sys: ProductSystem, level: int, word: str) -> ProductPoint:
    """Point of K_level whose level-th coordinate repeats the blocks of
    ``word`` with block 0 starting at index 0."""
    p, q = sys.ladder.pair(level)
    blocks = _blocks(p, q)
    cycle = tuple(s for ch in word for s in blocks[ch])
    coords = []
    for n in range(1, sys.depth + 1):
        if n == level:
            coords.append(periodic_point(sys.graphs[n - 1], cycle))
        else:
            coords.append(sys.reference_point(n))
    return ProductPoint(tuple(coords))


def block_decode(sys: ProductSystem, level: int, x: ProductPoint, lo: int, hi: int) -> dict[int, str]:
    """Block symbols of the level-th coordinate at block indices lo..hi.

    Block 0 is the block containing index 0; block boundaries are tried at
    every phase and the first phase that parses the whole range wins.
    """
    p, q = sys.ladder.pair(level)
    k = p * q
    blocks = {bytes(w): ch for ch, w in _blocks(p, q).items()}
    y = x[level]
    for phase in range(k):
        start = -phase
        data = y.window_bytes(start + lo * k, start + (hi + 1) * k)
        out = {}
        for j in range(hi - lo + 1):
            ch = blocks.get(data[j * k:(j + 1) * k])
            if ch is None:
                break
            out[lo + j] = ch
        else:
            return out
    raise ValueError("coordinate is not a concatenation of horseshoe blocks")


def explicit_semi_horseshoe(sys: ProductSystem, level: int, word_length: int) -> SemiHorseshoe:
    """All 2^L word points of K_level with exact separations.

    N = p_1 * ... * p_{level-1} * k_level and M = N / k_level, so that
    h o F^N = sigma^M o h for h = decode of the level-th coordinate.
    """
    if not 1 <= level <= sys.depth:
        raise ValueError(f"level {level} outside 1..{sys.depth}")
    if not 1 <= word_length <= 12:
        raise ValueError("word_length must be in 1..12")
    p, q = sys.ladder.pair(level)
    k = p * q
    N = k
    for i in range(1, level):
        N *= sys.ladder.primes[i - 1]
    words = ["".join(w) for w in cartesian("ab", repeat=word_length)]
    points = {w: horseshoe_word_point(sys, level, w) for w in words}
    cycles = [points[w][level].window(0, word_length * k) for w in words]
    seps = periodic_sup_distances(cycles)
    scale = Fraction(1, 1 << level)
    n = len(words)
    off = [seps[i, j] for i in range(n) for j in range(i + 1, n)]
    floor = min(off) * scale if off else Fraction(0)
    observed = max(off) * scale if off else Fraction(0)
    ceiling = Fraction(3) * scale

    def h(x: ProductPoint, lo: int = -50, hi: int = 50) -> dict[int, str]:
        return block_decode(sys, level, x, lo, hi)

    return SemiHorseshoe(
        source=f"product level {level}",
        period=N,
        word_length=word_length,
        points=points,
        separation_floor=floor,
        diameter_ceiling=ceiling,
        semiconjugacy=h,
        shift_power=N // k,
        extras={
            "k": k,
            "level": level,
            "observed_diameter": observed,
            "series_bound": Fraction(1, 1 << level),
            "separations": seps,
            "words": words,
        },
    )


def check_semiconjugacy(sys: ProductSystem, hs: SemiHorseshoe, words: Sequence[str],
                        lo: int = -50, hi: int = 50) -> list[tuple[str, int]]:
    """Violations (word, block index) of h(F^N x) = sigma^M h(x)."""
    M = hs.shift_power
    bad = []
    for w in words:
        x = hs.points.get(w) or horseshoe_word_point(sys, hs.extras["level"], w)
        left = hs.semiconjugacy(x.shift(hs.period), lo, hi)
        right = hs.semiconjugacy(x, lo + M, hi + M)
        for j in range(lo, hi + 1):
            if left[j] != right[j + M]:
                bad.append((w, j))
    return bad
