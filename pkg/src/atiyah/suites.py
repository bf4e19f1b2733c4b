"""Seeded property suites over random symbolic instances.

Each suite draws small random rational functions (integer data, degree at
most two, at most three variables) and checks an exact identity on every
trial.  Failures are collected, not raised.
"""

from __future__ import annotations

import random
import time
from dataclasses import dataclass, field
from itertools import combinations
from typing import Callable, Dict, Optional

from .cech import Cochain, Cover, cup, dbar_cech
from .connections import (ConnectionChart, MatrixForm, atiyah_form, chern_form,
                          difference_form)
from .forms import ChartMap, Form, d, dbar, del_, wedge
from .runner import CheckResult, RunReport
from .symcore import Poly, RationalFn, Scalar, VarSet

SUITES = ("vanishing", "difference", "cech", "algebra")


@dataclass
class SuiteConfig:
    trials: int = 25
    seed: int = 0
    max_degree: int = 2
    coeff_range: int = 2
    max_vars: int = 3
    max_rank: int = 3


@dataclass
class SuiteStats:
    name: str
    trials: int = 0
    checks: int = 0
    failures: int = 0
    first_counterexample: Optional[str] = None
    extra: Dict[str, int] = field(default_factory=dict)

    def record(self, ok: bool, payload: Callable[[], str]):
        self.checks += 1
        if not ok:
            self.failures += 1
            if self.first_counterexample is None:
                self.first_counterexample = payload()


# -- random instances -----------------------------------------------------------------

class RandomForms:
    """Random polynomials, rational functions and forms over a fixed varset."""

    def __init__(self, rng: random.Random, varset: VarSet, cfg: SuiteConfig):
        self.rng, self.vs, self.cfg = rng, varset, cfg

    def coeff(self) -> int:
        c = 0
        while c == 0:
            c = self.rng.randint(-self.cfg.coeff_range, self.cfg.coeff_range)
        return c

    def poly(self, holomorphic: bool = False, terms: int = 3, degree: Optional[int] = None) -> Poly:
        vs = self.vs
        deg = self.cfg.max_degree if degree is None else degree
        slots = list(range(vs.n)) if holomorphic else list(range(2 * vs.n))
        acc = Poly(vs)
        for _ in range(self.rng.randint(1, terms)):
            exps = [0] * vs.size
            for _ in range(self.rng.randint(0, deg)):
                exps[self.rng.choice(slots)] += 1
            acc = acc + Poly.monomial(vs, exps, self.coeff())
        return acc

    def function(self, holomorphic: bool = False, rational: bool = True) -> RationalFn:
        num = self.poly(holomorphic)
        if rational and self.rng.random() < 0.4:
            # denominator 1 + monomial or a single variable
            den = Poly.const(self.vs, 1) + self.poly(True, terms=1, degree=1)
            if den.is_zero():
                den = Poly.const(self.vs, 1)
            return RationalFn.make(num, [(den, 1)])
        return RationalFn(num)

    def form(self, p: int, q: int, holomorphic: bool = False, terms: int = 2) -> Form:
        vs = self.vs
        n = vs.n
        out = Form(vs)
        if p > n or q > n:
            return out
        for _ in range(self.rng.randint(1, terms)):
            hol = sorted(self.rng.sample(range(n), p))
            anti = sorted(self.rng.sample(range(n, 2 * n), q))
            out = out + Form(vs, {tuple(hol + anti): self.function(holomorphic)})
        return out

    def one_form_10(self, holomorphic: bool = False) -> Form:
        return self.form(1, 0, holomorphic, terms=self.vs.n)


def _varset(rng: random.Random, cfg: SuiteConfig, min_vars: int = 1) -> VarSet:
    n = rng.randint(min_vars, cfg.max_vars)
    return VarSet(["z1", "z2", "z3"][:n])


# -- vanishing --------------------------------------------------------------------------

def f_connection(rng: random.Random, n: int, r: int, rank: int, cfg: SuiteConfig,
                 holomorphic_normal: bool = False) -> ConnectionChart:
    """θ = Σ_{j≤r} a^j dz_j + Σ_k b^k dz_{r+k}: holomorphic along F = <∂/∂z_1..∂/∂z_r>,
    arbitrary (z̄-dependent) in the remaining directions."""
    vs = VarSet([f"z{i + 1}" for i in range(n)])
    gen = RandomForms(rng, vs, cfg)
    rows = []
    for _ in range(rank):
        row = []
        for _ in range(rank):
            e = Form(vs)
            for j in range(n):
                if rng.random() < 0.3:
                    continue
                holo = j < r or holomorphic_normal
                e = e + Form.dvar(vs, vs.holo[j]).scale(gen.function(holomorphic=holo, rational=False))
            row.append(e)
        rows.append(row)
    return ConnectionChart(vs, MatrixForm(vs, rows))


def _vanishing(cfg: SuiteConfig, stats: SuiteStats):
    rng = random.Random(cfg.seed)
    shapes = [(2, 1), (3, 1), (3, 2)]
    contrast = 0
    for t in range(cfg.trials):
        n, r = shapes[t % len(shapes)]
        lo = n - r + 1
        rank = rng.randint(lo, max(lo, cfg.max_rank))
        holo_normal = t % 5 == 0
        c = f_connection(rng, n, r, rank, cfg, holo_normal)
        stats.trials += 1
        for p in range(n - r + 1, rank + 1):
            a = atiyah_form(c, p)
            stats.record(a.is_zero(), lambda c=c, p=p, a=a: f"n={n} r={r} p={p} theta={c.theta} a^p={a}")
        if holo_normal:
            a1, c1 = atiyah_form(c, 1), chern_form(c, 1)
            if a1.is_zero() and not c1.is_zero():
                contrast += 1
    stats.extra["contrast (a1 = 0, c1 != 0)"] = contrast


# -- difference -------------------------------------------------------------------------

def random_connection(rng: random.Random, vs: VarSet, rank: int, cfg: SuiteConfig) -> ConnectionChart:
    gen = RandomForms(rng, vs, cfg)
    rows = [[gen.one_form_10() for _ in range(rank)] for _ in range(rank)]
    return ConnectionChart(vs, MatrixForm(vs, rows))


def _difference(cfg: SuiteConfig, stats: SuiteStats):
    rng = random.Random(cfg.seed)
    for _ in range(cfg.trials):
        vs = _varset(rng, cfg)
        rank = rng.randint(1, 2)
        c0, c1 = random_connection(rng, vs, rank, cfg), random_connection(rng, vs, rank, cfg)
        stats.trials += 1
        for p in range(1, min(rank, vs.n) + 1):
            a01 = difference_form(c0, c1, p)
            lhs = dbar(a01)
            rhs = atiyah_form(c1, p) - atiyah_form(c0, p)
            stats.record(lhs == rhs, lambda: f"p={p} theta0={c0.theta} theta1={c1.theta}")
            a10 = difference_form(c1, c0, p)
            stats.record(a10 == -a01, lambda: f"antisymmetry p={p} theta0={c0.theta} theta1={c1.theta}")


# -- cech -------------------------------------------------------------------------------

def single_chart_cover(vs: VarSet, sets: int = 3) -> Cover:
    common = {idx: "U" for k in (2, 3) for idx in combinations(range(sets), k)}
    return Cover({"U": vs}, ["U"] * sets, common, set(), {})


def two_chart_cover() -> Cover:
    """P^1 with charts z and w = 1/z; three sets, the third on the w chart."""
    a, b = VarSet(["z"]), VarSet(["w"])
    maps = {("A", "B"): ChartMap(a, b, {"w": RationalFn.var(a, "z").inv()}),
            ("B", "A"): ChartMap(b, a, {"z": RationalFn.var(b, "w").inv()})}
    common = {(0, 1): "A", (0, 2): "B", (1, 2): "B", (0, 1, 2): "B"}
    return Cover({"A": a, "B": b}, ["A", "A", "B"], common, set(), maps)


def random_cochain(rng: random.Random, cover: Cover, p: int, q: int, cfg: SuiteConfig) -> Cochain:
    comps = {}
    for depth in (1, 2, 3):
        for idx in cover.indices(depth):
            qq = q - (depth - 1)
            if qq < 0 or rng.random() < 0.2:
                continue
            comps[idx] = RandomForms(rng, cover.varset_of(idx), cfg).form(p, qq)
    return Cochain(cover, (p, q), comps)


def _cech(cfg: SuiteConfig, stats: SuiteStats):
    rng = random.Random(cfg.seed)
    for t in range(cfg.trials):
        if t % 2:
            cover = two_chart_cover()
        else:
            cover = single_chart_cover(_varset(rng, cfg, min_vars=2))
        n = cover.varset_of((0,)).n
        p, q = rng.randint(0, n), rng.randint(0, n)
        p2, q2 = rng.randint(0, n - p) if n > p else 0, rng.randint(0, 1)
        s = random_cochain(rng, cover, p, q, cfg)
        u = random_cochain(rng, cover, p2, q2, cfg)
        stats.trials += 1
        stats.record(dbar_cech(dbar_cech(s)).is_zero(), lambda: f"D̄²≠0 on {s}")
        lhs = dbar_cech(cup(s, u))
        rhs = cup(dbar_cech(s), u)
        tail = cup(s, dbar_cech(u))
        rhs = rhs + tail if (p + q) % 2 == 0 else rhs - tail
        stats.record(lhs == rhs, lambda: f"cup Leibniz fails for σ={s} τ={u}")


# -- algebra ----------------------------------------------------------------------------

def _algebra(cfg: SuiteConfig, stats: SuiteStats):
    rng = random.Random(cfg.seed)
    for _ in range(cfg.trials):
        vs = _varset(rng, cfg)
        gen = RandomForms(rng, vs, cfg)
        n = vs.n
        a = gen.form(rng.randint(0, n), rng.randint(0, n))
        b = gen.form(rng.randint(0, 1), rng.randint(0, 1))
        stats.trials += 1
        for name, op in (("d", d), ("∂", del_), ("∂̄", dbar)):
            stats.record(op(op(a)).is_zero(), lambda name=name: f"{name}² ≠ 0 on {a}")
        k = a.degree() or 0
        sign = -1 if k % 2 else 1
        for name, op in (("d", d), ("∂̄", dbar)):
            lhs = op(wedge(a, b))
            rhs = wedge(op(a), b) + wedge(a, op(b)).scale(Scalar(sign))
            stats.record(lhs == rhs, lambda name=name: f"{name} Leibniz fails for a={a} b={b}")
        kb = b.degree() or 0
        swap = wedge(b, a).scale(Scalar(-1 if (k * kb) % 2 else 1))
        stats.record(wedge(a, b) == swap, lambda: f"graded commutativity fails for a={a} b={b}")


_RUNNERS = {"vanishing": _vanishing, "difference": _difference, "cech": _cech, "algebra": _algebra}


def run_property_suite(suite: str, trials: int = 25, seed: int = 0,
                       config: Optional[SuiteConfig] = None) -> RunReport:
    if suite not in _RUNNERS:
        raise ValueError(f"unknown suite {suite!r}; choose from {', '.join(SUITES)}")
    if trials < 1:
        raise ValueError("trials must be at least 1")
    cfg = config or SuiteConfig()
    cfg = SuiteConfig(trials, seed, cfg.max_degree, cfg.coeff_range, cfg.max_vars, cfg.max_rank)
    t0 = time.perf_counter()
    stats = SuiteStats(suite)
    _RUNNERS[suite](cfg, stats)
    report = RunReport(f"suite {suite}", seed)
    report.suite = {"trials": stats.trials, "checks": stats.checks, "failures": stats.failures,
                    "first_counterexample": stats.first_counterexample, **stats.extra}
    report.checks.append(CheckResult(f"{suite}: {stats.checks} checks over {stats.trials} trials",
                                     "DERIVED", stats.failures == 0,
                                     computed=f"{stats.failures} failures",
                                     expected="0 failures",
                                     note=stats.first_counterexample or ""))
    if suite == "vanishing":
        ok = stats.extra.get("contrast (a1 = 0, c1 != 0)", 0) > 0
        report.checks.append(CheckResult("vanishing: some instance has a1 = 0 with c1 != 0", "PAPER", ok,
                                         computed=str(stats.extra.get("contrast (a1 = 0, c1 != 0)", 0)),
                                         expected=">= 1"))
    report.seconds = time.perf_counter() - t0
    return report
