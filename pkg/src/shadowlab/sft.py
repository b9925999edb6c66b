"""
Subshifts of finite type given by vertex-shifts on directed graphs.

A point of the shift is an :class:`EventuallyPeriodicSeq` whose symbols are
vertices and whose consecutive symbols are edges.  The shift map is
``s -> s.shift(1)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, lru_cache
from math import gcd
from typing import Callable, Iterable, Sequence

import networkx as nx
import numpy as np

from .orbits import PseudoOrbit, ShadowCertificate
from .seqcore import EventuallyPeriodicSeq, distance, glue


@dataclass(frozen=True)
class TransitionGraph:
    vertex_count: int
    edges: frozenset

    def __post_init__(self):
        if self.vertex_count < 1:
            raise ValueError("vertex_count must be positive")
        edges = frozenset((int(u), int(v)) for u, v in self.edges)
        for u, v in edges:
            if not (0 <= u < self.vertex_count and 0 <= v < self.vertex_count):
                raise ValueError(f"edge ({u}, {v}) outside vertex range")
        object.__setattr__(self, "edges", edges)

    @classmethod
    def from_edges(cls, edges: Iterable[tuple[int, int]], vertex_count: int | None = None):
        edges = list(edges)
        if vertex_count is None:
            vertex_count = 1 + max((max(e) for e in edges), default=0)
        return cls(vertex_count, frozenset(edges))

    @cached_property
    def _admissible(self) -> dict:
        # memo of is_admissible keyed by the shift-invariant presentation
        return {}

    @cached_property
    def successors(self) -> dict[int, tuple[int, ...]]:
        out = {v: [] for v in range(self.vertex_count)}
        for u, v in sorted(self.edges):
            out[u].append(v)
        return {u: tuple(vs) for u, vs in out.items()}

    @cached_property
    def predecessors(self) -> dict[int, tuple[int, ...]]:
        out = {v: [] for v in range(self.vertex_count)}
        for u, v in sorted(self.edges):
            out[v].append(u)
        return {v: tuple(us) for v, us in out.items()}

    @cached_property
    def adjacency(self) -> np.ndarray:
        A = np.zeros((self.vertex_count, self.vertex_count), dtype=object)
        A[:] = 0
        for u, v in self.edges:
            A[u, v] = 1
        return A

    @cached_property
    def essential(self) -> frozenset:
        """Vertices lying on some bi-infinite walk."""
        alive = set(range(self.vertex_count))
        changed = True
        while changed:
            changed = False
            for v in list(alive):
                if not any(w in alive for w in self.successors[v]) or \
                        not any(u in alive for u in self.predecessors[v]):
                    alive.discard(v)
                    changed = True
        return frozenset(alive)

    @cached_property
    def essential_successors(self) -> dict[int, tuple[int, ...]]:
        ess = self.essential
        return {v: tuple(w for w in self.successors[v] if w in ess) for v in ess}

    @cached_property
    def reversed(self) -> "TransitionGraph":
        return TransitionGraph(self.vertex_count, frozenset((v, u) for u, v in self.edges))

    def digraph(self) -> nx.DiGraph:
        G = nx.DiGraph()
        G.add_nodes_from(range(self.vertex_count))
        G.add_edges_from(self.edges)
        return G


def two_loop_sft(p: int, q: int) -> TransitionGraph:
    """Graph with a p-loop and a q-loop through the shared vertex 0.

    Vertices: 0; p-loop 0 -> 1 -> ... -> p-1 -> 0; q-loop 0 -> p -> ... ->
    p+q-2 -> 0.
    """
    if p < 1 or q < 1:
        raise ValueError("loop lengths must be positive")
    if gcd(p, q) != 1:
        raise ValueError(f"loop lengths must be coprime, gcd({p}, {q}) = {gcd(p, q)}")
    if p == q:
        raise ValueError("two loops of length 1 coincide in a vertex shift")
    edges = set()
    p_loop = [0] + list(range(1, p))
    q_loop = [0] + list(range(p, p + q - 1))
    for loop in (p_loop, q_loop):
        for a, b in zip(loop, loop[1:] + [0]):
            edges.add((a, b))
    return TransitionGraph(p + q - 1, frozenset(edges))


def loop_word(p: int, q: int, which: str) -> tuple[int, ...]:
    """Vertex word of one traversal of the p-loop (``"p"``) or q-loop."""
    if which == "p":
        return (0,) + tuple(range(1, p))
    return (0,) + tuple(range(p, p + q - 1))


def parse_graph(text: str) -> TransitionGraph:
    """Edge-list text (``u v`` per line) or ``two-loop p q``."""
    edges = []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tok = line.split()
        if tok[0] == "two-loop":
            if edges or len(tok) != 3:
                raise ValueError("two-loop shorthand must be the only entry: 'two-loop p q'")
            return two_loop_sft(int(tok[1]), int(tok[2]))
        if len(tok) != 2:
            raise ValueError(f"bad edge line {raw!r}")
        edges.append((int(tok[0]), int(tok[1])))
    if not edges:
        raise ValueError("graph has no edges")
    return TransitionGraph.from_edges(edges)


def count_periodic(g: TransitionGraph, n: int) -> int:
    """Number of points fixed by the n-th power of the shift (trace of A^n)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    A = g.adjacency
    M = A.copy()
    for _ in range(n - 1):
        M = M.dot(A)
    return int(sum(M[i, i] for i in range(g.vertex_count)))


def chain_classes(g: TransitionGraph) -> list[frozenset]:
    """Vertex supports of the chain recurrent classes: strongly connected
    components containing a cycle."""
    G = g.digraph()
    out = []
    for comp in nx.strongly_connected_components(G):
        if len(comp) > 1 or any(G.has_edge(v, v) for v in comp):
            out.append(frozenset(comp))
    return sorted(out, key=min)


def _levels(g: TransitionGraph, cls: frozenset) -> dict[int, int]:
    root = min(cls)
    level = {root: 0}
    frontier = [root]
    while frontier:
        nxt = []
        for u in frontier:
            for v in g.successors[u]:
                if v in cls and v not in level:
                    level[v] = level[u] + 1
                    nxt.append(v)
        frontier = nxt
    return level


def class_period(g: TransitionGraph, cls: Iterable[int]) -> int:
    cls = frozenset(cls)
    level = _levels(g, cls)
    n = 0
    for u, v in g.edges:
        if u in cls and v in cls:
            n = gcd(n, level[u] + 1 - level[v])
    return abs(n)


def spectral_decompose(g: TransitionGraph, cls: Iterable[int]) -> tuple[int, list[frozenset]]:
    """Cyclic decomposition of a chain recurrent class.

    Returns ``(n, [C_0, ..., C_{n-1}])`` with every edge inside the class
    going from ``C_i`` to ``C_{(i+1) mod n}``; ``C_0`` holds the smallest
    vertex.
    """
    cls = frozenset(cls)
    if not cls:
        raise ValueError("empty class")
    G = g.digraph().subgraph(cls)
    if not nx.is_strongly_connected(G) or not any(True for _ in G.edges):
        raise ValueError("class is not strongly connected")
    level = _levels(g, cls)
    n = class_period(g, cls)
    comps = [frozenset(v for v in cls if level[v] % n == i) for i in range(n)]
    return n, comps


def _bool_power_positive(M: np.ndarray, e: int) -> bool:
    B = M.astype(bool)
    R = np.eye(len(M), dtype=bool)
    while e:
        if e & 1:
            R = (R.astype(np.int64) @ B.astype(np.int64)) > 0
        B = (B.astype(np.int64) @ B.astype(np.int64)) > 0
        e >>= 1
    return bool(R.all())


def is_mixing(g: TransitionGraph) -> bool:
    """True iff the essential adjacency matrix is primitive."""
    ess = sorted(g.essential)
    if not ess:
        return False
    A = np.array(g.adjacency[np.ix_(ess, ess)], dtype=np.int64)
    r = len(ess)
    return _bool_power_positive(A, (r - 1) ** 2 + 1)


def power_graph(g: TransitionGraph, n: int, vertices: Iterable[int] | None = None) -> TransitionGraph:
    """Graph of walks of length n, restricted to ``vertices``."""
    vs = sorted(vertices) if vertices is not None else list(range(g.vertex_count))
    A = np.array(g.adjacency, dtype=np.int64)
    M = np.linalg.matrix_power(A, n)
    index = {v: i for i, v in enumerate(vs)}
    edges = {(index[u], index[v]) for u in vs for v in vs if M[u, v] > 0}
    return TransitionGraph(len(vs), frozenset(edges))


# ---------------------------------------------------------------------------
# points

def is_admissible(g: TransitionGraph, s: EventuallyPeriodicSeq) -> bool:
    key = (s.left, s.center, s.right)
    cache = g._admissible
    hit = cache.get(key)
    if hit is None:
        lo = s.start - len(s.left) - 1
        hi = s.rstart + len(s.right) + 1
        w = s.window(lo, hi)
        E = g.edges
        hit = max(w) < g.vertex_count and all((a, b) in E for a, b in zip(w, w[1:]))
        if len(cache) > 100_000:
            cache.clear()
        cache[key] = hit
    return hit


def validate_point(g: TransitionGraph, s: EventuallyPeriodicSeq) -> EventuallyPeriodicSeq:
    if s.alphabet != g.vertex_count:
        raise ValueError(f"alphabet {s.alphabet} does not match {g.vertex_count} vertices")
    if not is_admissible(g, s):
        raise ValueError(f"point {s} is not admissible")
    return s


def periodic_point(g: TransitionGraph, cycle, phase: int = 0) -> EventuallyPeriodicSeq:
    return validate_point(g, EventuallyPeriodicSeq.periodic(cycle, phase, g.vertex_count))


def _pick(rng: np.random.Generator, n: int) -> int:
    # uniform on range(n); scalar rng.random() is much cheaper than rng.integers()
    return min(int(rng.random() * n), n - 1)


def _choice(rng: np.random.Generator, options: Sequence):
    return options[0] if len(options) == 1 else options[_pick(rng, len(options))]


def random_future(g: TransitionGraph, u: int, rng: np.random.Generator,
                  extra: int = 6) -> tuple[list[int], tuple[int, ...]]:
    """Random eventually periodic continuation after vertex u.

    Returns ``(path, cycle)``: the walk visits ``path`` then repeats
    ``cycle`` forever.
    """
    succ = g.essential_successors
    if u not in succ:
        raise ValueError(f"vertex {u} is not essential")
    seq = [u]
    cur = u
    for _ in range(_pick(rng, extra + 1)):
        cur = _choice(rng, succ[cur])
        seq.append(cur)
    seen = {cur: len(seq) - 1}
    while True:
        cur = _choice(rng, succ[cur])
        if cur in seen:
            return seq[1:], tuple(seq[seen[cur]:])
        seen[cur] = len(seq)
        seq.append(cur)


def random_past(g: TransitionGraph, v: int, rng: np.random.Generator,
                extra: int = 6) -> tuple[list[int], tuple[int, ...]]:
    """Random eventually periodic history before vertex v, in forward
    orientation: ``(path, left_word)`` with ``path`` ending just before v."""
    path_b, cyc_b = random_future(g.reversed, v, rng, extra)
    return path_b[::-1], tuple(cyc_b[::-1])


def random_point(g: TransitionGraph, rng: np.random.Generator, extra: int = 6) -> EventuallyPeriodicSeq:
    ess = sorted(g.essential)
    v = _choice(rng, ess)
    fpath, fcyc = random_future(g, v, rng, extra)
    bpath, bcyc = random_past(g, v, rng, extra)
    return EventuallyPeriodicSeq(bcyc, bpath + [v] + fpath, fcyc, -len(bpath), g.vertex_count)


def reroute(g: TransitionGraph, s: EventuallyPeriodicSeq, radius: int, side: int,
            rng: np.random.Generator, extra: int = 6) -> EventuallyPeriodicSeq:
    """Keep ``s`` on indices ``<= radius`` (side=+1) or ``>= -radius``
    (side=-1) and replace the rest by a random admissible continuation."""
    if side > 0:
        L, c1, st = s.left_part(radius + 1)
        path, cyc = random_future(g, s[radius], rng, extra)
        return EventuallyPeriodicSeq(L, c1 + path, cyc, st, s.alphabet)
    c2, R = s.right_part(-radius)
    path, left = random_past(g, s[-radius], rng, extra)
    return EventuallyPeriodicSeq(left, path + c2, R, -radius - len(path), s.alphabet)


@lru_cache(maxsize=4096)
def dyadic_radius(delta) -> int | None:
    """Smallest c >= 0 with 2^-c <= delta (None for delta == 0)."""
    delta = Fraction(delta)
    if delta <= 0:
        return None
    c = 0
    while Fraction(1, 1 << c) > delta:
        c += 1
    return c


def diagonal_bound(delta) -> Fraction | None:
    """2^-(m-1) for the largest m >= 1 with delta <= 2^-(m+1); None when
    delta > 1/4."""
    delta = Fraction(delta)
    if delta == 0:
        return Fraction(0)
    if delta > Fraction(1, 4):
        return None
    m = 1
    while delta <= Fraction(1, 1 << (m + 2)):
        m += 1
    return Fraction(1, 1 << (m - 1))


class SftSystem:
    """The shift on the points of a transition graph."""

    exact = True

    def __init__(self, graph: TransitionGraph):
        self.graph = graph

    def __repr__(self):
        return f"SftSystem({self.graph.vertex_count} vertices, {len(self.graph.edges)} edges)"

    def apply(self, x):
        return x.shift(1)

    def apply_inverse(self, x):
        return x.shift(-1)

    def iterate(self, x, n):
        return x.shift(n)

    def distance(self, x, y):
        return distance(x, y)

    def shadow(self, po: PseudoOrbit, pad: int = 16) -> ShadowCertificate:
        return shadow_sft(self.graph, po, pad)

    def random_point(self, rng):
        return random_point(self.graph, rng)

    def random_pseudo_orbit(self, rng, start, length, schedule, p_perturb=0.5, x0=None):
        return random_pseudo_orbit(self.graph, rng, start, length, schedule, p_perturb, x0)


def random_pseudo_orbit(g: TransitionGraph, rng: np.random.Generator, start: int, length: int,
                        schedule: Callable[[int], Fraction] | Fraction,
                        p_perturb: float = 0.5, x0: EventuallyPeriodicSeq | None = None) -> PseudoOrbit:
    """True-orbit steps interleaved with random admissible re-routings.

    A perturbed step keeps f(x_k) on a one-sided index range long enough
    that the step error stays within ``schedule(k)``.
    """
    sched = schedule if callable(schedule) else (lambda k, d=Fraction(schedule): d)
    x = random_point(g, rng) if x0 is None else x0
    pts = [x]
    for k in range(start, start + length - 1):
        y = x.shift(1)
        c = dyadic_radius(sched(k))
        if c is not None and rng.random() < p_perturb:
            y = reroute(g, y, c, 1 if rng.random() < 0.5 else -1, rng)
        pts.append(y)
        x = y
    return PseudoOrbit.build(SftSystem(g), start, pts, sched)


def shadow_sft(g: TransitionGraph, po: PseudoOrbit, pad: int = 16) -> ShadowCertificate:
    """Diagonal shadow: z_k = (x_k)_0 on the window, continued by the tails
    of the first and last points.

    For a cyclic pseudo-orbit the shadow is the periodic point with one
    period ``[(x_k)_0 for k in window]`` and the inspection covers one period.
    """
    delta = po.delta
    if delta >= 1:
        raise ValueError(f"step bound {delta} >= 1: index-0 symbols are not pinned")
    for x in po.points:
        validate_point(g, x)
    sys = SftSystem(g)
    diag = [x[0] for x in po.points]
    if po.cyclic:
        z = EventuallyPeriodicSeq.periodic(diag, po.start, g.vertex_count)
        lo, hi = po.start, po.stop
    else:
        left = po.points[0].shift(-po.start)
        right = po.points[-1].shift(-po.stop)
        z = glue(left, po.start, diag, right, g.vertex_count)
        lo, hi = po.start - pad, po.stop + pad
    validate_point(g, z.shift(0))
    z0 = z
    profile = tuple(distance(z0.shift(k), po.point_at(sys, k)) for k in range(lo, hi + 1))
    return ShadowCertificate(z0, lo, profile, (po.start, po.stop), True,
                             {"bound": diagonal_bound(delta), "delta": delta})
