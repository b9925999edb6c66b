"""
Eventually periodic points of bi-infinite symbol spaces and the exact metric

    d(a, b) = sum_k rho(a_k, b_k) / 2^|k|

shared by every symbolic system in the package.  Distances are returned as
``fractions.Fraction``; periodic tails are summed in closed form.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import lcm
from typing import Iterable, Sequence

import numpy as np

Word = tuple[int, ...]


def primitive_root(word: Sequence[int]) -> Word:
    """Shortest word u with word == u * (len(word) // len(u))."""
    w = tuple(word)
    n = len(w)
    if n < 2:
        return w
    # the least period p of a primitive power is where w reappears inside w + w
    if max(w) < 256 and min(w) >= 0:
        b = bytes(w)
        p = (b + b).find(b, 1)
    else:
        p = _least_rotation_match(w)
    return w[:p] if n % p == 0 else w


def _least_rotation_match(w: Word) -> int:
    # prefix function of w; least period n - pi[-1] is a rotation match iff it divides n
    n = len(w)
    pi = [0] * n
    k = 0
    for i in range(1, n):
        while k and w[i] != w[k]:
            k = pi[k - 1]
        if w[i] == w[k]:
            k += 1
        pi[i] = k
    p = n - pi[-1]
    return p if n % p == 0 else n


def _rotate(word: Word, r: int) -> Word:
    r %= len(word)
    return word[r:] + word[:r]


@dataclass(frozen=True, init=False)
class EventuallyPeriodicSeq:
    """The bi-infinite sequence ...LLL C RRR... over ``range(alphabet)``.

    ``start`` is the index of ``center[0]`` (equivalently, the index just
    after the last symbol of the left tail).  Values are canonical on
    construction, so ``==`` is equality of the denoted sequences.
    """

    left: Word
    center: Word
    right: Word
    start: int
    alphabet: int

    def __init__(self, left, center, right, start=0, alphabet=None):
        left, center, right = tuple(left), tuple(center), tuple(right)
        if not left or not right:
            raise ValueError("periodic tails must be nonempty")
        symbols = left + center + right
        if min(symbols) < 0:
            raise ValueError("symbols must be non-negative")
        if alphabet is None:
            alphabet = max(symbols) + 1
        elif max(symbols) >= alphabet:
            raise ValueError(f"symbol {max(symbols)} outside alphabet of size {alphabet}")
        left, center, right, start = _canonical(left, center, right, int(start))
        object.__setattr__(self, "left", left)
        object.__setattr__(self, "center", center)
        object.__setattr__(self, "right", right)
        object.__setattr__(self, "start", start)
        object.__setattr__(self, "alphabet", int(alphabet))

    @classmethod
    def periodic(cls, word, phase=0, alphabet=None):
        """Purely periodic sequence with ``s[phase + i] = word[i mod len]``."""
        word = tuple(word)
        return cls(word, (), word, phase, alphabet)

    @classmethod
    def constant(cls, symbol, alphabet=None):
        return cls((symbol,), (), (symbol,), 0, alphabet)

    @property
    def rstart(self) -> int:
        """First index of the right periodic tail."""
        return self.start + len(self.center)

    @property
    def is_periodic(self) -> bool:
        return not self.center and self.left == self.right

    @property
    def origin_offset(self) -> int:
        return -self.start

    def __getitem__(self, i: int) -> int:
        if i < self.start:
            return self.left[(i - self.start) % len(self.left)]
        if i < self.rstart:
            return self.center[i - self.start]
        return self.right[(i - self.rstart) % len(self.right)]

    def window(self, lo: int, hi: int) -> list[int]:
        """Symbols at indices ``lo <= i < hi``."""
        out: list[int] = []
        if hi <= lo:
            return out
        a, b = self.start, self.rstart
        if lo < a:
            L = self.left
            n = len(L)
            stop = min(hi, a)
            r = (lo - a) % n
            out.extend((L * ((stop - lo) // n + 2))[r:r + stop - lo])
        c0, c1 = max(lo, a), min(hi, b)
        if c0 < c1:
            out.extend(self.center[c0 - a:c1 - a])
        if hi > b:
            R = self.right
            n = len(R)
            first = max(lo, b)
            r = (first - b) % n
            out.extend((R * ((hi - first) // n + 2))[r:r + hi - first])
        return out

    def window_bytes(self, lo: int, hi: int) -> bytes:
        """``bytes(self.window(lo, hi))`` for alphabets of at most 256 symbols."""
        if hi <= lo:
            return b""
        try:
            Lb, Cb, Rb = self._bytes
        except AttributeError:
            if self.alphabet > 256:
                raise ValueError("byte windows need an alphabet of at most 256 symbols")
            Lb, Cb, Rb = bytes(self.left), bytes(self.center), bytes(self.right)
            object.__setattr__(self, "_bytes", (Lb, Cb, Rb))
        a, b = self.start, self.rstart
        parts = []
        if lo < a:
            n = len(Lb)
            stop = min(hi, a)
            r = (lo - a) % n
            parts.append((Lb * ((stop - lo) // n + 2))[r:r + stop - lo])
        c0, c1 = max(lo, a), min(hi, b)
        if c0 < c1:
            parts.append(Cb[c0 - a:c1 - a])
        if hi > b:
            n = len(Rb)
            first = max(lo, b)
            r = (first - b) % n
            parts.append((Rb * ((hi - first) // n + 2))[r:r + hi - first])
        return b"".join(parts)

    def shift(self, n: int) -> "EventuallyPeriodicSeq":
        """The sequence k -> self[k + n]."""
        if n == 0:
            return self
        if self.is_periodic:
            # canonical periodic form has start 0 and is already primitive
            w = _rotate(self.right, n)
            out = _raw(w, (), w, 0, self.alphabet)
            return out
        out = _raw(self.left, self.center, self.right, self.start - n, self.alphabet)
        cache = self.__dict__.get("_bytes")
        if cache is not None:
            object.__setattr__(out, "_bytes", cache)
        return out

    def left_part(self, cut: int) -> tuple[Word, list[int], int]:
        """(left word, center prefix, start) reproducing indices < cut."""
        a0 = min(cut, self.start)
        n = len(self.left)
        return tuple(self.window(a0 - n, a0)), self.window(a0, cut), a0

    def right_part(self, cut: int) -> tuple[list[int], Word]:
        """(center suffix, right word) reproducing indices >= cut."""
        b0 = max(cut, self.rstart)
        n = len(self.right)
        return self.window(cut, b0), tuple(self.window(b0, b0 + n))

    def __str__(self) -> str:
        return format_seq(self)

    def __repr__(self) -> str:
        return f"EventuallyPeriodicSeq({format_seq(self)!r}, alphabet={self.alphabet})"


def _raw(left, center, right, start, alphabet) -> EventuallyPeriodicSeq:
    # bypasses canonicalization; caller guarantees canonical input
    s = object.__new__(EventuallyPeriodicSeq)
    object.__setattr__(s, "left", left)
    object.__setattr__(s, "center", center)
    object.__setattr__(s, "right", right)
    object.__setattr__(s, "start", start)
    object.__setattr__(s, "alphabet", alphabet)
    return s


def _canonical(left: Word, center: Word, right: Word, start: int):
    left, right = primitive_root(left), primitive_root(right)
    c = list(center)
    # extend the right tail leftwards as far as it goes
    steps = 0
    limit = len(left) + len(right) + 1
    while True:
        if c:
            if c[-1] != right[-1]:
                break
            c.pop()
            right = _rotate(right, -1)
        else:
            if left == right:
                # purely periodic: pin the split at index 0
                r = (-start) % len(right)
                w = _rotate(right, r)
                return w, (), w, 0
            if left[-1] != right[-1] or steps > limit:
                break
            left = _rotate(left, -1)
            right = _rotate(right, -1)
            start -= 1
            steps += 1
    # then the left tail rightwards into what remains of the center
    i = 0
    while i < len(c) and c[i] == left[0]:
        left = _rotate(left, 1)
        i += 1
    return left, tuple(c[i:]), right, start + i


def glue(left_src: EventuallyPeriodicSeq, lo: int, middle: Sequence[int],
         right_src: EventuallyPeriodicSeq, alphabet: int | None = None) -> EventuallyPeriodicSeq:
    """Sequence equal to ``left_src`` below ``lo``, ``middle`` on
    ``[lo, lo + len(middle))`` and ``right_src`` from there on."""
    L, c1, st = left_src.left_part(lo)
    c2, R = right_src.right_part(lo + len(middle))
    if alphabet is None:
        alphabet = max(left_src.alphabet, right_src.alphabet)
    return EventuallyPeriodicSeq(L, c1 + list(middle) + c2, R, st, alphabet)


def _check_alphabet(a: EventuallyPeriodicSeq, b: EventuallyPeriodicSeq) -> None:
    if a.alphabet != b.alphabet:
        raise ValueError(f"alphabet mismatch: {a.alphabet} vs {b.alphabet}")


_DIFF = bytes([48] + [49] * 255)


def _bits(a: EventuallyPeriodicSeq, b: EventuallyPeriodicSeq, lo: int, hi: int) -> bytes:
    """ASCII bit string over [lo, hi), b"1" where a and b differ; empty
    when they agree everywhere there."""
    if a.alphabet > 256:
        wa, wb = a.window(lo, hi), b.window(lo, hi)
        if wa == wb:
            return b""
        return bytes(48 + (x != y) for x, y in zip(wa, wb))
    wa, wb = a.window_bytes(lo, hi), b.window_bytes(lo, hi)
    if wa == wb:
        return b""
    x = int.from_bytes(wa, "big") ^ int.from_bytes(wb, "big")
    return x.to_bytes(len(wa), "big").translate(_DIFF)


class _Layout:
    """Disagreement pattern of a pair, laid out so that every shifted
    distance is a handful of integer operations."""

    __slots__ = ("lo", "hi", "A", "B", "TRn", "TRd", "TLn", "TLd")

    def __init__(self, a: EventuallyPeriodicSeq, b: EventuallyPeriodicSeq, lo: int, hi: int):
        lo = min(lo, a.start, b.start)
        hi = max(hi, a.rstart, b.rstart)
        self.lo, self.hi = lo, hi
        P = lcm(len(a.right), len(b.right))
        Q = lcm(len(a.left), len(b.left))
        # one pass over [lo - Q, hi + P): left tail period, core, right tail period
        s = _bits(a, b, lo - Q, hi + P)
        if not s:
            self.A = self.B = self.TRn = self.TLn = 0
            self.TRd = self.TLd = 1
            return
        core = s[Q:Q + hi - lo]
        # B: bit for index j sits at 2^(hi-1-j); A: bit for index j sits at 2^(j-lo)
        self.B = int(core, 2)
        self.A = int(core[::-1], 2)
        # sum_{i>=1} rho_{hi-1+i} 2^-i = TRn / TRd
        self.TRn, self.TRd = int(s[Q + hi - lo:], 2), (1 << P) - 1
        # sum_{i>=1} rho_{lo-i} 2^-i = TLn / TLd
        self.TLn, self.TLd = int(s[Q - 1::-1], 2), (1 << Q) - 1

    def at(self, k: int) -> Fraction:
        lo, hi = self.lo, self.hi
        if not lo <= k < hi:
            raise IndexError(k)
        e_r = hi - 1 - k
        e_l = k - lo
        right = (self.B & ((2 << e_r) - 1)) * self.TRd + self.TRn
        left = (self.A & ((1 << e_l) - 1)) * self.TLd + self.TLn
        num = right * self.TLd << e_l
        num += left * self.TRd << e_r
        if not num:
            return Fraction(0)
        return Fraction(num, (self.TRd * self.TLd) << (e_r + e_l))


def distance(a: EventuallyPeriodicSeq, b: EventuallyPeriodicSeq) -> Fraction:
    """Exact value of sum_k rho(a_k, b_k) 2^-|k|."""
    _check_alphabet(a, b)
    if a == b:
        return Fraction(0)
    return _Layout(a, b, 0, 1).at(0)


def distance_profile(a: EventuallyPeriodicSeq, b: EventuallyPeriodicSeq,
                     window: Iterable[int] | tuple[int, int]) -> list[Fraction]:
    """``[distance(a.shift(k), b.shift(k)) for k in window]``.

    ``window`` is an iterable of indices or an inclusive ``(lo, hi)`` pair.
    """
    _check_alphabet(a, b)
    ks = _window_indices(window)
    if not ks:
        return []
    if a == b:
        return [Fraction(0)] * len(ks)
    lay = _Layout(a, b, min(ks), max(ks) + 1)
    return [lay.at(k) for k in ks]


def _window_indices(window) -> list[int]:
    if isinstance(window, tuple) and len(window) == 2:
        return list(range(window[0], window[1] + 1))
    return list(window)


def agreement_radius(a: EventuallyPeriodicSeq, b: EventuallyPeriodicSeq) -> int | None:
    """Smallest n0 >= 0 with a_k == b_k whenever |k| > n0, or None when the
    sequences disagree at infinitely many indices."""
    _check_alphabet(a, b)
    lo = min(a.start, b.start, 0)
    hi = max(a.rstart, b.rstart, 1)
    P = lcm(len(a.right), len(b.right))
    if a.window(hi, hi + P) != b.window(hi, hi + P):
        return None
    Q = lcm(len(a.left), len(b.left))
    if a.window(lo - Q, lo) != b.window(lo - Q, lo):
        return None
    wa, wb = a.window(lo, hi), b.window(lo, hi)
    worst = -1
    for i, (x, y) in enumerate(zip(wa, wb)):
        if x != y:
            worst = max(worst, abs(lo + i))
    return max(worst, 0)


def same_right_tail(a: EventuallyPeriodicSeq, b: EventuallyPeriodicSeq) -> bool:
    """a_k == b_k for all sufficiently large k."""
    hi = max(a.rstart, b.rstart)
    P = lcm(len(a.right), len(b.right))
    return a.window(hi, hi + P) == b.window(hi, hi + P)


def same_left_tail(a: EventuallyPeriodicSeq, b: EventuallyPeriodicSeq) -> bool:
    """a_k == b_k for all sufficiently negative k."""
    lo = min(a.start, b.start)
    Q = lcm(len(a.left), len(b.left))
    return a.window(lo - Q, lo) == b.window(lo - Q, lo)


# ---------------------------------------------------------------------------
# purely periodic families

def cyclic_weights(P: int) -> list[int]:
    """Numerators n_i with sum_{j = i mod P} 2^-|j| = n_i / (2^P - 1)."""
    return [(1 << (P - i)) + (1 << i) for i in range(P)]


def periodic_sup_distances(words: Sequence[Sequence[int]]) -> np.ndarray:
    """Exact ``sup_k d(shift(u, k), shift(v, k))`` for every pair of
    periodic points with common period ``P`` (each given by one period
    starting at index 0).

    Returns an object array of Fractions, shape (n, n).  A float screen
    picks candidate maximizers; the maximum is then evaluated exactly on
    every candidate within a safety margin of the float maximum.
    """
    W = np.asarray(words)
    n, P = W.shape
    weights = cyclic_weights(P)
    denom = (1 << P) - 1
    wf = np.array([w / denom for w in weights])
    # circulant: C[j, k] = weight of offset (j - k) mod P
    idx = (np.arange(P)[:, None] - np.arange(P)[None, :]) % P
    C = wf[idx]
    out = np.empty((n, n), dtype=object)
    for i in range(n):
        out[i, i] = Fraction(0)
        if i + 1 == n:
            break
        rho = (W[i + 1:] != W[i]).astype(float)  # (m, P)
        approx = rho @ C  # approx[m, k] = d_k
        best = approx.max(axis=1)
        for off, row in enumerate(approx):
            j = i + 1 + off
            if best[off] == 0.0:
                out[i, j] = out[j, i] = Fraction(0)
                continue
            cand = np.nonzero(row >= best[off] - 1e-9)[0]
            bits = (rho[off].astype(np.uint8) + 48).tobytes().decode()
            exact = 0
            for k in cand:
                r = bits[k:] + bits[:k]  # r[i] = rho at index i + k
                # sum_i r_i (2^(P-i) + 2^i)
                exact = max(exact, 2 * int(r, 2) + int(r[::-1], 2))
            out[i, j] = out[j, i] = Fraction(exact, denom)
    return out


# ---------------------------------------------------------------------------
# text form  L:<word>|C:<word>|R:<word>@<offset>

def _fmt_word(w: Iterable[int]) -> str:
    return ",".join(str(x) for x in w)


def format_seq(s: EventuallyPeriodicSeq) -> str:
    return f"L:{_fmt_word(s.left)}|C:{_fmt_word(s.center)}|R:{_fmt_word(s.right)}@{s.origin_offset}"


def parse_seq(text: str, alphabet: int | None = None) -> EventuallyPeriodicSeq:
    try:
        body, offset = text.strip().rsplit("@", 1)
        parts = dict(p.split(":", 1) for p in body.split("|"))
        if set(parts) != {"L", "C", "R"}:
            raise ValueError
        words = {k: tuple(int(x) for x in v.split(",") if x.strip() != "") for k, v in parts.items()}
        return EventuallyPeriodicSeq(words["L"], words["C"], words["R"], -int(offset), alphabet)
    except ValueError as exc:
        raise ValueError(f"malformed sequence text {text!r}") from exc
