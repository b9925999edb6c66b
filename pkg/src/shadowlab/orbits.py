"""Pseudo-orbits, shadowing certificates and semi-horseshoes.

These are shared by every system.  A system is any object implementing
:class:`DynSystem`; exact systems return ``Fraction`` distances, the toral
ones return floats.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Protocol, Sequence, runtime_checkable

Number = Fraction | float


@runtime_checkable
class DynSystem(Protocol):
    exact: bool

    def apply(self, x): ...

    def apply_inverse(self, x): ...

    def iterate(self, x, n: int): ...

    def distance(self, x, y) -> Number: ...

    def shadow(self, po: "PseudoOrbit") -> "ShadowCertificate": ...


@dataclass(frozen=True)
class PseudoOrbit:
    """Points ``x_k`` for ``k`` in ``[start, start + len(points))``.

    Outside the window the sequence continues along the true orbits of the
    first and last points (``cyclic=False``), or repeats with period
    ``len(points)`` (``cyclic=True``; the wrap-around step is then the last
    entry of ``errors``).

    ``errors[i]`` is the measured step error d(f(x_k), x_{k+1}) for
    ``k = start + i``; ``bounds[i]`` the declared schedule it obeys.
    """

    start: int
    points: tuple
    errors: tuple
    bounds: tuple
    cyclic: bool = False

    @property
    def stop(self) -> int:
        """Last window index (inclusive)."""
        return self.start + len(self.points) - 1

    @property
    def indices(self) -> range:
        return range(self.start, self.stop + 1)

    @property
    def delta(self) -> Number:
        return max(self.bounds, default=0)

    @classmethod
    def build(cls, system: DynSystem, start: int, points: Sequence,
              bounds: Sequence | Callable[[int], Number] | None = None,
              cyclic: bool = False, tol: float = 0.0) -> "PseudoOrbit":
        """Measure the step errors and check them against ``bounds``.

        ``bounds`` may be a sequence (one per step), a function of the step
        index ``k`` or None (bounds are then the measured errors).
        """
        pts = tuple(points)
        if not pts:
            raise ValueError("empty pseudo-orbit")
        pairs = list(zip(pts[:-1], pts[1:]))
        if cyclic:
            pairs.append((pts[-1], pts[0]))
        errors = tuple(system.distance(system.apply(a), b) for a, b in pairs)
        if bounds is None:
            bnds = errors
        elif callable(bounds):
            bnds = tuple(bounds(start + i) for i in range(len(errors)))
        else:
            bnds = tuple(bounds)
            if len(bnds) != len(errors):
                raise ValueError(f"expected {len(errors)} step bounds, got {len(bnds)}")
        for i, (e, b) in enumerate(zip(errors, bnds)):
            if (e > b + tol) if tol else (e > b):
                raise ValueError(f"step {start + i}: error {e} exceeds bound {b}")
        return cls(start, pts, errors, bnds, cyclic)

    def point_at(self, system: DynSystem, k: int):
        """``x_k`` under the extension convention."""
        if self.start <= k <= self.stop:
            return self.points[k - self.start]
        if self.cyclic:
            return self.points[(k - self.start) % len(self.points)]
        if k < self.start:
            return system.iterate(self.points[0], k - self.start)
        return system.iterate(self.points[-1], k - self.stop)

    def step_bound(self, k: int) -> Number:
        """Declared bound on d(f(x_k), x_{k+1}); zero outside the window."""
        if self.cyclic:
            return self.bounds[(k - self.start) % len(self.bounds)]
        i = k - self.start
        if 0 <= i < len(self.bounds):
            return self.bounds[i]
        return 0 if not self.bounds or isinstance(self.bounds[0], Fraction) else 0.0


@dataclass(frozen=True)
class ShadowCertificate:
    """Shadow point ``z`` with the profile d(f^k(z), x_k) over ``k`` in
    ``[inspect_start, inspect_start + len(profile))``."""

    shadow_point: Any
    inspect_start: int
    profile: tuple
    window: tuple[int, int]
    exact: bool = True
    extras: dict = field(default_factory=dict, compare=False)

    @property
    def sup_distance(self) -> Number:
        return max(self.profile)

    @property
    def indices(self) -> range:
        return range(self.inspect_start, self.inspect_start + len(self.profile))

    def distance_at(self, k: int) -> Number:
        return self.profile[k - self.inspect_start]

    @property
    def window_sup(self) -> Number:
        lo, hi = self.window
        return max(self.profile[lo - self.inspect_start:hi - self.inspect_start + 1])

    @property
    def tail_profile(self) -> dict[int, Number]:
        """Distances at inspected indices outside the pseudo-orbit window."""
        lo, hi = self.window
        return {k: d for k, d in zip(self.indices, self.profile) if k < lo or k > hi}

    def first_index_below(self, gamma: Number, side: int = 1) -> int | None:
        """Smallest |k| from which every inspected distance on the given
        side (+1 future, -1 past) stays below ``gamma``."""
        ks = [k for k in self.indices if (k >= 0 if side > 0 else k <= 0)]
        ks.sort(key=abs, reverse=True)
        last_ok = None
        for k in ks:
            if self.distance_at(k) < gamma:
                last_ok = abs(k)
            else:
                break
        return last_ok


@dataclass(frozen=True)
class SemiHorseshoe:
    """Word-indexed points of a semi-horseshoe for the ``period``-th iterate.

    ``semiconjugacy`` maps a point to its symbol word over block indices
    ``[-W, W]`` (a dict index -> symbol); ``shift_power`` is the power of the
    two-symbol shift matched by ``f^period``.
    """

    source: str
    period: int
    word_length: int
    points: dict
    separation_floor: Number
    diameter_ceiling: Number
    semiconjugacy: Callable
    shift_power: int = 1
    extras: dict = field(default_factory=dict, compare=False)
