"""
Command-line experiment runner.

    shadowlab verify shadowing --system two-loop:3,4 --delta 1/64 --eps 1/16 --trials 1000 --seed 7
    shadowlab horseshoe --system two-loop:3,4 --words 8 --out hs.txt
    shadowlab decompose --system graph:edges.txt
    shadowlab lift-sphere --delta 0.05 --window 40 --seed 1
    shadowlab min-period --ladder 2,3,5,7 --depth 3

Exit status: 0 on success, 1 when a property fails beyond its declared
expectation, 2 on an invalid configuration.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import asdict, dataclass, fields
from fractions import Fraction
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from . import report
from .product import build_product, check_semiconjugacy, explicit_semi_horseshoe, min_period_truncated
from .seqcore import format_seq
from .sft import (SftSystem, TransitionGraph, chain_classes, is_mixing, parse_graph, power_graph,
                  spectral_decompose, two_loop_sft)
from .toral import SphereSystem, ToralSystem, lift_pseudo_orbit, make_anosov, shadow_sphere
from .verify import (check_l_shadowing, check_local_product_char, check_shadowing,
                     extract_semi_horseshoe, horseshoe_semiconjugacy_violations,
                     positive_expansivity_probe, stable_inclusion_check, trial_rng,
                     two_loop_fixture)

PROPERTIES = ("shadowing", "l-shadowing", "local-product", "stable-inclusion", "pos-expansivity")
COMMANDS = ("verify", "horseshoe", "decompose", "lift-sphere", "min-period")


class ConfigError(ValueError):
    """Invalid experiment configuration (exit status 2)."""


@dataclass
class ExperimentConfig:
    """One experiment: a system, a command, and its parameters."""

    command: str
    system: str = "two-loop:3,4"
    prop: str | None = None
    ladder: tuple[int, ...] = (2, 3, 5, 7)
    depth: int = 3
    matrix: tuple[tuple[int, int], tuple[int, int]] = ((2, 1), (1, 1))
    delta: str | None = None
    eps: str | None = None
    window: int | None = None
    trials: int = 100
    seed: int | None = None
    c: str | None = None
    gamma: tuple[str, ...] = ()
    words: int = 8
    level: int = 1
    check_words: int = 0
    out: str | None = None

    @classmethod
    def from_mapping(cls, data: dict) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(f"unknown config fields: {', '.join(unknown)}")
        if "command" not in data:
            raise ConfigError("config needs a command")
        return cls(**data).validated()

    def validated(self) -> "ExperimentConfig":
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command {self.command!r}")
        if self.command == "verify":
            if self.prop not in PROPERTIES:
                raise ConfigError(f"unknown property {self.prop!r}")
            if self.seed is None:
                raise ConfigError("--seed is required for randomized runs")
        if self.command == "lift-sphere" and self.seed is None:
            raise ConfigError("--seed is required for randomized runs")
        if self.check_words and self.seed is None:
            raise ConfigError("--seed is required when sampling words")
        if self.trials < 0:
            raise ConfigError("trials must be non-negative")
        if self.words < 1:
            raise ConfigError("words must be positive")
        return self


# ---------------------------------------------------------------------------
# parsing helpers


def _number(text: str | None, exact: bool, name: str):
    if text is None:
        return None
    try:
        return Fraction(text) if exact else float(Fraction(text))
    except (ValueError, ZeroDivisionError) as exc:
        raise ConfigError(f"bad {name}: {text!r}") from exc


def _int_list(text: str, name: str) -> tuple[int, ...]:
    try:
        return tuple(int(t) for t in text.split(","))
    except ValueError as exc:
        raise ConfigError(f"bad {name}: {text!r}") from exc


def _matrix(text: str):
    """``a,b,c,d`` or ``a,b;c,d`` (row-major)."""
    flat = _int_list(text.replace(";", ","), "matrix")
    if len(flat) != 4:
        raise ConfigError("matrix needs four entries, e.g. 2,1,1,1")
    return (flat[0], flat[1]), (flat[2], flat[3])


def cycle_graph(n: int) -> TransitionGraph:
    """A single periodic orbit of length n as a vertex shift."""
    return TransitionGraph(n, frozenset((i, (i + 1) % n) for i in range(n)))


def build_system(cfg: ExperimentConfig):
    """System object named by ``cfg.system``."""
    kind, _, arg = cfg.system.partition(":")
    try:
        if kind == "two-loop":
            p, q = _int_list(arg, "two-loop")
            return SftSystem(two_loop_sft(p, q))
        if kind == "graph":
            return SftSystem(parse_graph(Path(arg).read_text()))
        if kind == "cycle":
            return SftSystem(cycle_graph(int(arg)))
        if kind == "product":
            return build_product(cfg.ladder, cfg.depth)
        if kind == "torus":
            return ToralSystem(make_anosov(cfg.matrix))
        if kind == "sphere":
            return SphereSystem(make_anosov(cfg.matrix))
    except (OSError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
    raise ConfigError(f"unknown system {cfg.system!r}")


# ---------------------------------------------------------------------------
# commands


def _defaults(sysobj) -> dict:
    if getattr(sysobj, "exact", False):
        return {"delta": "1/64", "eps": "1/16", "c": "1/2"}
    return {"delta": "0.001", "eps": None, "c": "0.1"}


def _toral_eps(sysobj, delta: float) -> float:
    an = sysobj.anosov
    return an.basis_condition * delta * (1 / (1 - abs(an.lam_s)) + 1 / (abs(an.lam_u) - 1))


def run_verify(cfg: ExperimentConfig, sysobj) -> tuple[dict, bool]:
    exact = getattr(sysobj, "exact", False)
    dflt = _defaults(sysobj)
    delta = _number(cfg.delta or dflt["delta"], exact, "delta")
    eps = _number(cfg.eps or dflt["eps"], exact, "eps") if (cfg.eps or dflt["eps"]) else None
    if eps is None:
        eps = _toral_eps(sysobj, delta)
    c = _number(cfg.c or dflt["c"], exact, "c")
    gammas = tuple(_number(g, exact, "gamma") for g in cfg.gamma)
    prop = cfg.prop
    try:
        if prop == "shadowing":
            W = cfg.window or 64
            rep = check_shadowing(sysobj, delta, eps, (-W, W), cfg.trials, cfg.seed)
        elif prop == "l-shadowing":
            W = cfg.window or 40
            rep = check_l_shadowing(sysobj, delta, eps, window=(-W, W), trials=cfg.trials,
                                    seed=cfg.seed, gammas=gammas)
        elif prop == "local-product":
            rep = check_local_product_char(sysobj, delta, eps, cfg.trials, cfg.seed,
                                           window=cfg.window or 60)
        elif prop == "stable-inclusion":
            rep = stable_inclusion_check(sysobj, c, cfg.window or 40, cfg.trials, cfg.seed)
        else:
            rep = positive_expansivity_probe(sysobj, c, delta, samples=cfg.trials,
                                             window=cfg.window or 16, seed=cfg.seed)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc
    rep.params["system"] = cfg.system
    return report.report_records(rep), rep.ok


def run_horseshoe(cfg: ExperimentConfig, sysobj) -> tuple[dict, bool]:
    rec: dict[str, Any] = {}
    ok = True
    if isinstance(sysobj, SftSystem) and cfg.system.startswith("two-loop:"):
        p, q = _int_list(cfg.system.split(":", 1)[1], "two-loop")
        x, y, n = two_loop_fixture(p, q, p * q, 3 * p * q)
        eps = _number(cfg.eps or "1", True, "eps")
        try:
            hs = extract_semi_horseshoe(sysobj, x, y, n, eps, cfg.words)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        words = list(hs.points)
        bad = horseshoe_semiconjugacy_violations(hs, _sample_words(cfg, words))
        rec["extras"] = {k: hs.extras[k] for k in ("n", "j", "delta", "eps", "gamma",
                                                   "entropy_bound", "worst_shadow_sup")}
        rec["extras"]["x"] = format_seq(x)
        rec["extras"]["y"] = format_seq(y)
        ok = not bad and hs.separation_floor >= eps / 2 and hs.diameter_ceiling < 2 * hs.extras["gamma"]
    elif hasattr(sysobj, "ladder"):
        hs = explicit_semi_horseshoe(sysobj, cfg.level, cfg.words)
        words = list(hs.points)
        bad = check_semiconjugacy(sysobj, hs, _sample_words(cfg, words))
        rec["extras"] = {k: hs.extras[k] for k in ("k", "level", "observed_diameter",
                                                   "series_bound")}
        ok = not bad
    else:
        raise ConfigError(f"horseshoe extraction not available for {cfg.system!r}")
    rec.update({
        "source": hs.source,
        "period": hs.period,
        "shift_power": hs.shift_power,
        "word_length": hs.word_length,
        "point_count": len(hs.points),
        "separation_floor": hs.separation_floor,
        "diameter_ceiling": hs.diameter_ceiling,
        "semiconjugacy_violations": len(bad),
        "ok": ok,
        "points": {w: str(hs.points[w]) for w in words},
    })
    return rec, ok


def _sample_words(cfg: ExperimentConfig, words: list[str]) -> list[str]:
    if not cfg.check_words:
        return words
    letters = sorted({ch for w in words for ch in w})
    rng = np.random.default_rng(cfg.seed)
    return ["".join(rng.choice(letters, cfg.words)) for _ in range(cfg.check_words)]


def run_decompose(cfg: ExperimentConfig, sysobj) -> tuple[dict, bool]:
    if not isinstance(sysobj, SftSystem):
        raise ConfigError("decompose needs a graph system")
    g = sysobj.graph
    classes = []
    for cls in chain_classes(g):
        n, comps = spectral_decompose(g, cls)
        mixing = [is_mixing(power_graph(g, n, comp)) for comp in comps]
        classes.append({"vertices": sorted(cls), "period": n,
                        "components": [sorted(c) for c in comps], "component_mixing": mixing})
    return {"class_count": len(classes), "classes": classes}, True


def run_lift_sphere(cfg: ExperimentConfig, sysobj) -> tuple[dict, bool]:
    if not isinstance(sysobj, SphereSystem):
        raise ConfigError("lift-sphere needs --system sphere")
    delta = _number(cfg.delta or "0.05", False, "delta")
    W = cfg.window or 40
    sched = lambda k: delta * 2.0 ** (-abs(k) / 4)  # noqa: E731
    spo = sysobj.random_pseudo_orbit(trial_rng(cfg.seed, 0), -W, 2 * W + 1, sched)
    tpo, info = lift_pseudo_orbit(sysobj.anosov, spo)
    cert = shadow_sphere(sysobj, spo)
    rec = {
        "delta": delta,
        "window": W,
        "lift_max_error": max(tpo.errors) if len(tpo.points) > 1 else 0.0,
        "forward_blocks": info["forward_blocks"],
        "backward_blocks": info["backward_blocks"],
        "window_sup": cert.window_sup,
        "shadow_point": str(cert.shadow_point),
    }
    return rec, True


def run_min_period(cfg: ExperimentConfig, sysobj) -> tuple[dict, bool]:
    return {"ladder": list(cfg.ladder), "depth": cfg.depth,
            "min_period": min_period_truncated(cfg.ladder, cfg.depth)}, True


RUNNERS = {"verify": run_verify, "horseshoe": run_horseshoe, "decompose": run_decompose,
           "lift-sphere": run_lift_sphere, "min-period": run_min_period}


def run(cfg: ExperimentConfig) -> tuple[int, str]:
    """Execute ``cfg``; returns (exit status, report text)."""
    cfg.validated()
    if cfg.command == "min-period":
        sysobj = None
    else:
        sysobj = build_system(cfg)
    body, ok = RUNNERS[cfg.command](cfg, sysobj)
    conf = {k: v for k, v in asdict(cfg).items() if k != "out"}
    # numeric inputs are decimal or rational literals, hence exact
    for k in ("delta", "eps", "c"):
        if conf[k] is not None:
            conf[k] = Fraction(conf[k])
    conf["gamma"] = [Fraction(g) for g in conf["gamma"]]
    rec = {"config": conf}
    rec["result"] = body
    rec["status"] = 0 if ok else 1
    return rec["status"], report.render(rec)


# ---------------------------------------------------------------------------
# argparse front end


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="shadowlab", description="Shadowing experiments.")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, randomized=True):
        p.add_argument("--system", default="two-loop:3,4",
                       help="two-loop:P,Q | graph:FILE | cycle:N | product | torus | sphere")
        p.add_argument("--ladder", default="2,3,5,7", help="comma-separated primes")
        p.add_argument("--depth", type=int, default=3)
        p.add_argument("--matrix", default="2,1,1,1", help="2x2 integer matrix a,b,c,d (row-major)")
        p.add_argument("--out", help="report path (stdout when omitted)")
        if randomized:
            p.add_argument("--seed", type=int)

    v = sub.add_parser("verify", help="run a property checker")
    v.add_argument("prop", choices=PROPERTIES)
    common(v)
    v.add_argument("--delta")
    v.add_argument("--eps")
    v.add_argument("--c", help="closeness constant for stable-inclusion / pos-expansivity")
    v.add_argument("--window", type=int)
    v.add_argument("--trials", type=int, default=100)
    v.add_argument("--gamma", action="append", default=[], help="tail target (repeatable)")

    h = sub.add_parser("horseshoe", help="build a semi-horseshoe")
    common(h)
    h.add_argument("--words", type=int, default=8, help="word length L (2^L points)")
    h.add_argument("--level", type=int, default=1, help="product coordinate carrying the shift")
    h.add_argument("--eps")
    h.add_argument("--check-words", type=int, default=0,
                   help="check the semiconjugacy on this many random words (needs --seed)")

    d = sub.add_parser("decompose", help="cyclic decomposition of chain recurrent classes")
    common(d, randomized=False)

    s = sub.add_parser("lift-sphere", help="lift, shadow and project one sphere pseudo-orbit")
    common(s)
    s.set_defaults(system="sphere")
    s.add_argument("--delta")
    s.add_argument("--window", type=int)

    m = sub.add_parser("min-period", help="least period of the truncated product")
    common(m, randomized=False)
    return ap


def config_from_args(ns: argparse.Namespace) -> ExperimentConfig:
    data = {k: v for k, v in vars(ns).items() if v is not None}
    data["ladder"] = _int_list(data["ladder"], "ladder")
    data["matrix"] = _matrix(data["matrix"])
    if "gamma" in data:
        data["gamma"] = tuple(data["gamma"])
    return ExperimentConfig.from_mapping(data)


def main(argv: Sequence[str] | None = None) -> int:
    ns = _parser().parse_args(argv)
    try:
        cfg = config_from_args(ns)
        status, text = run(cfg)
    except ConfigError as exc:
        print(f"shadowlab: invalid configuration: {exc}", file=sys.stderr)
        return 2
    if cfg.out:
        Path(cfg.out).write_text(text)
        print(f"status {status}; report written to {cfg.out}")
    else:
        sys.stdout.write(text)
    return status


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
