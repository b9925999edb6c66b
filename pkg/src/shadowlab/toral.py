"""
Hyperbolic automorphisms of the 2-torus and their quotient by x -> -x.

Torus distances use the sup norm of the nearest lift.  Shadowing is solved
in closed form in the eigenbasis: a pseudo-orbit x_k with step errors
e_k = x_{k+1} - A x_k (nearest lift) is corrected by c_k with

    c^s_k = -sum_{j<k}  lambda_s^(k-1-j) e^s_j
    c^u_k =  sum_{j>=k} lambda_u^(k-1-j) e^u_j

so that z_k = x_k + c_k is a true orbit (c_{k+1} = A c_k - e_k).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import mpmath
import numpy as np

from .orbits import PseudoOrbit, ShadowCertificate

LIFT_LIMIT = 0.25
HP_DPS = 50


def _unit(x):
    # map a real to [0, 1); float rounding of tiny negatives can produce 1.0
    r = x % 1
    return r if r < 1 else r - 1


@dataclass(frozen=True, slots=True)
class TorusPoint:
    """Point of R^2 / Z^2; coordinates are floats or mpmath reals."""

    x: float
    y: float

    def __post_init__(self):
        object.__setattr__(self, "x", _unit(self.x))
        object.__setattr__(self, "y", _unit(self.y))

    def __iter__(self):
        yield self.x
        yield self.y

    def neg(self) -> "TorusPoint":
        return TorusPoint(-self.x, -self.y)

    def as_float(self) -> "TorusPoint":
        return TorusPoint(float(self.x), float(self.y))

    def __str__(self):
        return f"({float(self.x)!r}, {float(self.y)!r})"


def _wrap(d):
    """Nearest representative of d mod 1 in [-1/2, 1/2)."""
    return d - math.floor(d + 0.5) if isinstance(d, float) else d - mpmath.floor(d + 0.5)


def lift_difference(a: TorusPoint, b: TorusPoint) -> tuple:
    """Nearest lift of b - a."""
    return _wrap(b.x - a.x), _wrap(b.y - a.y)


def torus_distance(a: TorusPoint, b: TorusPoint):
    dx, dy = lift_difference(a, b)
    return max(abs(dx), abs(dy))


@dataclass(frozen=True, slots=True)
class SpherePoint:
    """The pair {x, -x}; ``rep`` is the lexicographically smaller lift."""

    rep: TorusPoint

    def __post_init__(self):
        r, m = self.rep, self.rep.neg()
        if (float(m.x), float(m.y)) < (float(r.x), float(r.y)):
            object.__setattr__(self, "rep", m)

    def __str__(self):
        return f"{{±{self.rep}}}"


def antipodal_project(x: TorusPoint) -> SpherePoint:
    return SpherePoint(x)


def antipodal_lift(s: SpherePoint) -> tuple[TorusPoint, TorusPoint]:
    return s.rep, s.rep.neg()


def sphere_distance(a: SpherePoint, b: SpherePoint):
    return min(torus_distance(a.rep, b.rep), torus_distance(a.rep, b.rep.neg()))


# ---------------------------------------------------------------------------
# eigen-data


def _eigvec(m, lam):
    (a, b), (c, d) = m
    u = (b, lam - a)
    v = (lam - d, c)
    w = u if abs(u[0]) + abs(u[1]) >= abs(v[0]) + abs(v[1]) else v
    n = math.hypot(*w) if isinstance(lam, float) else mpmath.sqrt(w[0] ** 2 + w[1] ** 2)
    w = (w[0] / n, w[1] / n)
    first = w[0] if w[0] != 0 else w[1]
    return (-w[0], -w[1]) if first < 0 else w


def _eigen(m, sqrt):
    (a, b), (c, d) = m
    t, det = a + d, a * d - b * c
    disc = sqrt(t * t - 4 * det)
    l1, l2 = (t + disc) / 2, (t - disc) / 2
    lu, ls = (l1, l2) if abs(l1) > abs(l2) else (l2, l1)
    return lu, ls, _eigvec(m, lu), _eigvec(m, ls)


@dataclass(frozen=True)
class AnosovSystem:
    matrix: tuple[tuple[int, int], tuple[int, int]]
    lam_u: float
    lam_s: float
    v_u: tuple[float, float]
    v_s: tuple[float, float]
    basis_condition: float
    det: int
    orientation_reversing: bool = False
    _hp: dict = field(default_factory=dict, compare=False, repr=False)

    @property
    def A(self) -> np.ndarray:
        return np.array(self.matrix, dtype=float)

    @property
    def A_inv(self) -> np.ndarray:
        (a, b), (c, d) = self.matrix
        return np.array([[d, -b], [-c, a]], dtype=float) * self.det

    @property
    def shadow_constant(self) -> float:
        """basis_condition * (1/(1-|lambda_s|) + 1/(|lambda_u|-1))."""
        return self.basis_condition * (1 / (1 - abs(self.lam_s)) + 1 / (abs(self.lam_u) - 1))

    def hp(self, dps: int = HP_DPS):
        """(lambda_u, lambda_s, v_u, v_s) as mpmath reals at ``dps`` digits."""
        if dps not in self._hp:
            with mpmath.workdps(dps):
                m = tuple(tuple(mpmath.mpf(v) for v in row) for row in self.matrix)
                self._hp[dps] = _eigen(m, mpmath.sqrt)
        return self._hp[dps]


def make_anosov(m) -> AnosovSystem:
    """Validate a hyperbolic integer 2x2 matrix with |det| = 1."""
    (a, b), (c, d) = ((int(v) for v in row) for row in m)
    mat = ((a, b), (c, d))
    det = a * d - b * c
    if abs(det) != 1:
        raise ValueError(f"|det| = {abs(det)} != 1")
    t = a + d
    disc = t * t - 4 * det
    # eigenvalues on the unit circle: complex pair (disc < 0) or +-1
    if disc <= 0 or (det == 1 and abs(t) <= 2) or (det == -1 and t == 0):
        raise ValueError(f"matrix {mat} is not hyperbolic")
    lu, ls, vu, vs = _eigen(mat, math.sqrt)
    B = np.array([vu, vs]).T
    Binv = np.linalg.inv(B)
    bc = float(np.abs(B).max() * np.abs(Binv).sum(axis=1).max())
    return AnosovSystem(mat, lu, ls, vu, vs, bc, det, det == -1)


def _apply(m, x: TorusPoint) -> TorusPoint:
    (a, b), (c, d) = m
    return TorusPoint(a * x.x + b * x.y, c * x.x + d * x.y)


class ToralSystem:
    exact = False

    def __init__(self, anosov: AnosovSystem):
        self.anosov = anosov
        (a, b), (c, d) = anosov.matrix
        s = anosov.det
        self._inv = ((d * s, -b * s), (-c * s, a * s))

    def __repr__(self):
        return f"ToralSystem({self.anosov.matrix})"

    def apply(self, x: TorusPoint) -> TorusPoint:
        return _apply(self.anosov.matrix, x)

    def apply_inverse(self, x: TorusPoint) -> TorusPoint:
        return _apply(self._inv, x)

    def iterate(self, x: TorusPoint, n: int) -> TorusPoint:
        m = self.anosov.matrix if n >= 0 else self._inv
        for _ in range(abs(n)):
            x = _apply(m, x)
        return x

    def distance(self, x: TorusPoint, y: TorusPoint):
        return torus_distance(x, y)

    def shadow(self, po: PseudoOrbit) -> ShadowCertificate:
        return shadow_toral(self.anosov, po)

    def random_point(self, rng: np.random.Generator) -> TorusPoint:
        return TorusPoint(*rng.random(2))

    def random_pseudo_orbit(self, rng, start, length, schedule, p_perturb=1.0, x0=None) -> PseudoOrbit:
        """True orbit steps plus perturbations uniform in the sup-ball of
        radius ``schedule(k)``."""
        sched = schedule if callable(schedule) else (lambda k, d=float(schedule): d)
        x = self.random_point(rng) if x0 is None else x0
        pts = [x]
        for k in range(start, start + length - 1):
            y = self.apply(x)
            r = float(sched(k))
            if r > 0 and rng.random() < p_perturb:
                ex, ey = rng.uniform(-r, r, 2)
                y = TorusPoint(y.x + ex, y.y + ey)
            pts.append(y)
            x = y
        return PseudoOrbit.build(self, start, pts, lambda k: float(sched(k)), tol=1e-15)


def _step_errors(anosov: AnosovSystem, pts: Sequence[TorusPoint], cyclic: bool) -> np.ndarray:
    X = np.array([(p.x, p.y) for p in pts], dtype=float)
    nxt = np.roll(X, -1, axis=0) if cyclic else X[1:]
    cur = X if cyclic else X[:-1]
    E = nxt - cur @ anosov.A.T
    return E - np.floor(E + 0.5)


def shadow_toral(anosov: AnosovSystem, po: PseudoOrbit) -> ShadowCertificate:
    """Closed-form shadow of a torus pseudo-orbit.

    The certificate inspects the window only; ``shadow_point`` is z at the
    first window index (``extras["anchor"]``).  ``extras`` also carries the
    corrections, the step errors, the recurrence residual and the a priori
    correction bound.
    """
    if po.cyclic:
        raise ValueError("cyclic torus pseudo-orbits are not supported")
    E = _step_errors(anosov, po.points, False)
    delta = float(np.abs(E).max()) if len(E) else 0.0
    if delta >= LIFT_LIMIT:
        raise ValueError(f"step error {delta} too large for an unambiguous lift")
    n = len(po.points)
    B = np.array([anosov.v_u, anosov.v_s]).T
    coef = np.linalg.solve(B, E.T).T if len(E) else np.zeros((0, 2))  # (e^u, e^s)
    lu, ls = anosov.lam_u, anosov.lam_s
    cs = np.zeros(n)
    for i in range(1, n):
        cs[i] = ls * cs[i - 1] - coef[i - 1, 1]
    cu = np.zeros(n)
    for i in range(n - 2, -1, -1):
        cu[i] = (cu[i + 1] + coef[i, 0]) / lu
    C = np.outer(cu, anosov.v_u) + np.outer(cs, anosov.v_s)
    resid = C[1:] - (C[:-1] @ anosov.A.T - E)
    residual = float(np.abs(resid).max()) if len(E) else 0.0
    X = np.array([(p.x, p.y) for p in po.points], dtype=float)
    Z = X + C
    orbit = tuple(TorusPoint(a, b) for a, b in Z)
    profile = tuple(float(v) for v in np.abs(C).max(axis=1))
    return ShadowCertificate(orbit[0], po.start, profile, (po.start, po.stop), False, {
        "anchor": po.start,
        "orbit": orbit,
        "corrections": C,
        "errors": E,
        "residual": residual,
        "delta": delta,
        "bound": anosov.shadow_constant * delta,
    })


def correction_bound_profile(anosov: AnosovSystem, errors: Sequence[float]) -> np.ndarray:
    """Per-index a priori bound on |c_k| from the step error sizes alone."""
    e = np.asarray(errors, dtype=float)
    n = len(e) + 1
    B = np.array([anosov.v_u, anosov.v_s]).T
    ninv = float(np.abs(np.linalg.inv(B)).sum(axis=1).max())
    scale = float(np.abs(B).max()) * ninv
    ls, lu = abs(anosov.lam_s), abs(anosov.lam_u)
    s = np.zeros(n)
    for i in range(1, n):
        s[i] = ls * s[i - 1] + e[i - 1]
    u = np.zeros(n)
    for i in range(n - 2, -1, -1):
        u[i] = (u[i + 1] + e[i]) / lu
    return scale * (s + u)


def local_product_point(anosov: AnosovSystem, x: TorusPoint, y: TorusPoint, eps: float,
                        dps: int = HP_DPS) -> TorusPoint:
    """The point z = x + t v_s = y + s v_u (nearest lifts), at ``dps`` digits.

    z lies on the stable line of x and the unstable line of y, within ``eps``
    of both.
    """
    with mpmath.workdps(dps):
        xm = TorusPoint(mpmath.mpf(x.x), mpmath.mpf(x.y))
        ym = TorusPoint(mpmath.mpf(y.x), mpmath.mpf(y.y))
        dx, dy = lift_difference(xm, ym)
        if max(abs(dx), abs(dy)) * anosov.basis_condition >= eps:
            raise ValueError("points too far apart for the requested eps")
        _, _, vu, vs = anosov.hp(dps)
        # t vs - s vu = d
        det = vs[0] * (-vu[1]) - (-vu[0]) * vs[1]
        t = (dx * (-vu[1]) - (-vu[0]) * dy) / det
        return TorusPoint(xm.x + t * vs[0], xm.y + t * vs[1])


def local_product_parameters(anosov: AnosovSystem, x: TorusPoint, y: TorusPoint, z: TorusPoint,
                             dps: int = HP_DPS) -> tuple:
    """(t, s, line residuals) with z - x = t v_s and z - y = s v_u."""
    with mpmath.workdps(dps):
        _, _, vu, vs = anosov.hp(dps)
        ax, ay = lift_difference(TorusPoint(mpmath.mpf(x.x), mpmath.mpf(x.y)), z)
        bx, by = lift_difference(TorusPoint(mpmath.mpf(y.x), mpmath.mpf(y.y)), z)
        t = ax * vs[0] + ay * vs[1]
        s = bx * vu[0] + by * vu[1]
        rx = abs(ax * vs[1] - ay * vs[0])
        ry = abs(bx * vu[1] - by * vu[0])
        return t, s, (rx, ry)


# ---------------------------------------------------------------------------
# sphere quotient


class SphereSystem:
    """The map induced on the quotient by x -> -x."""

    exact = False

    def __init__(self, anosov: AnosovSystem):
        self.anosov = anosov
        self.torus = ToralSystem(anosov)

    def __repr__(self):
        return f"SphereSystem({self.anosov.matrix})"

    def apply(self, s: SpherePoint) -> SpherePoint:
        return SpherePoint(self.torus.apply(s.rep))

    def apply_inverse(self, s: SpherePoint) -> SpherePoint:
        return SpherePoint(self.torus.apply_inverse(s.rep))

    def iterate(self, s: SpherePoint, n: int) -> SpherePoint:
        return SpherePoint(self.torus.iterate(s.rep, n))

    def distance(self, a: SpherePoint, b: SpherePoint):
        return sphere_distance(a, b)

    def shadow(self, po: PseudoOrbit, delta_prime: float = 0.125) -> ShadowCertificate:
        return shadow_sphere(self, po, delta_prime)

    def random_point(self, rng) -> SpherePoint:
        return SpherePoint(self.torus.random_point(rng))

    def random_pseudo_orbit(self, rng, start, length, schedule, p_perturb=1.0, x0=None) -> PseudoOrbit:
        tpo = self.torus.random_pseudo_orbit(rng, start, length, schedule, p_perturb,
                                             None if x0 is None else x0.rep)
        sched = schedule if callable(schedule) else (lambda k, d=float(schedule): d)
        return PseudoOrbit.build(self, start, [SpherePoint(p) for p in tpo.points],
                                 lambda k: float(sched(k)), tol=1e-15)


def semiconjugacy_defect(anosov: AnosovSystem, x: TorusPoint) -> float:
    """d_S(q(A x), g(q(x)))."""
    t = ToralSystem(anosov)
    return sphere_distance(SpherePoint(t.apply(x)), SpherePoint(t.apply(SpherePoint(x).rep)))


def _nearer(target: TorusPoint, s: SpherePoint) -> TorusPoint:
    a, b = s.rep, s.rep.neg()
    return a if torus_distance(target, a) <= torus_distance(target, b) else b


def block_schedule(errors: Sequence[float], delta_prime: float, max_blocks: int = 64) -> list[int]:
    """Block boundaries k_1 <= k_2 <= ...: k_j is the first step from which
    every later error is below delta'/(j+1) (indices into ``errors``).
    Equal boundaries mean empty blocks."""
    e = list(errors)
    tail = [0.0] * (len(e) + 1)
    for i in range(len(e) - 1, -1, -1):
        tail[i] = max(e[i], tail[i + 1])
    out = []
    k = 0
    for j in range(1, max_blocks + 1):
        eps_j = delta_prime / (j + 1)
        while k < len(e) and tail[k] >= eps_j:
            k += 1
        if k >= len(e):
            break
        out.append(k)
    return out


def _schedule_bounds(errors: list[float], delta_prime: float) -> tuple[list[float], list[int]]:
    bounds_ = [delta_prime] * len(errors)
    ks = block_schedule(errors, delta_prime)
    for j, k in enumerate(ks, 1):
        for i in range(k, len(errors)):
            bounds_[i] = delta_prime / (j + 1)
    return bounds_, ks


def lift_pseudo_orbit(anosov: AnosovSystem, spo: PseudoOrbit, delta_prime: float = 0.125) -> tuple[PseudoOrbit, dict]:
    """Lift a sphere pseudo-orbit to the torus.

    y_0 is the canonical representative at index 0 (or at the first window
    index when 0 is outside); later points take the lift nearest to A y_k,
    earlier ones the lift whose image is nearest to y_{k+1}, so each lifted
    step error equals the sphere step error.  Returns the torus
    pseudo-orbit, whose bounds follow the block schedule delta'/(j+1) run
    outward from the base index, and the block boundaries on each side.
    """
    sphere = SphereSystem(anosov)
    pts = spo.points
    if any(e >= delta_prime for e in spo.errors):
        raise ValueError(f"sphere step error exceeds the lifting threshold {delta_prime}")
    base = min(max(0, spo.start), spo.stop) - spo.start
    ys: list = [None] * len(pts)
    ys[base] = pts[base].rep
    t = sphere.torus
    for i in range(base, len(pts) - 1):
        ys[i + 1] = _nearer(t.apply(ys[i]), pts[i + 1])
    for i in range(base, 0, -1):
        # pick the sign that makes the forward step error equal the sphere error
        a = pts[i - 1].rep
        b = a.neg()
        ys[i - 1] = a if torus_distance(t.apply(a), ys[i]) <= torus_distance(t.apply(b), ys[i]) else b
    errs = [torus_distance(t.apply(a), b) for a, b in zip(ys, ys[1:])]
    fwd, kf = _schedule_bounds(errs[base:], delta_prime)
    bwd, kb = _schedule_bounds(errs[:base][::-1], delta_prime)
    bnds = bwd[::-1] + fwd
    tpo = PseudoOrbit(spo.start, tuple(ys), tuple(errs), tuple(bnds))
    for e, b in zip(errs, bnds):
        if e > b:
            raise AssertionError("lifted error above its block bound")
    return tpo, {"base": spo.start + base,
                 "forward_blocks": [spo.start + base + k for k in kf],
                 "backward_blocks": [spo.start + base - 1 - k for k in kb]}


def shadow_sphere(sphere: SphereSystem, spo: PseudoOrbit, delta_prime: float = 0.125) -> ShadowCertificate:
    """Lift, shadow on the torus, project."""
    tpo, info = lift_pseudo_orbit(sphere.anosov, spo, delta_prime)
    tc = shadow_toral(sphere.anosov, tpo)
    proj = tuple(SpherePoint(z) for z in tc.extras["orbit"])
    profile = tuple(sphere_distance(a, b) for a, b in zip(proj, spo.points))
    extras = dict(tc.extras)
    extras.update(info)
    extras["orbit"] = proj
    extras["torus_orbit"] = tc.extras["orbit"]
    extras["lifted"] = tpo
    return ShadowCertificate(proj[0], spo.start, profile, (spo.start, spo.stop), False, extras)
