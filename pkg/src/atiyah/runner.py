"""End-to-end execution of a scenario and the report it produces."""

from __future__ import annotations

import json
import time
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, List, Optional

from .cech import (LocalConnection, dbar_cech, express_in_frame, is_relative,
                   localized_atiyah_cocycle, stein_reduction)
from .connections import (ConnectionChart, MatrixForm, atiyah_form, chern_form, curvature,
                          normal_partial_connection)
from .errors import AtiyahError
from .residues import ResidueReport, point_residue, residue_pairing
from .scenario import Expectation, Scenario


@dataclass
class StepResult:
    name: str
    ok: bool
    outputs: Dict[str, str] = field(default_factory=dict)
    error: str = ""
    seconds: float = 0.0


@dataclass
class CheckResult:
    label: str
    tag: str
    passed: bool
    computed: str = ""
    expected: str = ""
    note: str = ""


@dataclass
class RunReport:
    name: str
    seed: int
    steps: List[StepResult] = field(default_factory=list)
    checks: List[CheckResult] = field(default_factory=list)
    residue_exact: Optional[str] = None
    residue_numeric: Optional[complex] = None
    residue_agrees: Optional[bool] = None
    residue_terms: List[Dict[str, Any]] = field(default_factory=list)
    suite: Optional[Dict[str, Any]] = None
    diagnostics: List[str] = field(default_factory=list)
    seconds: float = 0.0

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_dict(self, timing: bool = True) -> Dict[str, Any]:
        out = asdict(self)
        out["passed"] = self.passed
        z = self.residue_numeric
        out["residue_numeric"] = None if z is None else [z.real, z.imag]
        if not timing:
            out.pop("seconds")
            for s in out["steps"]:
                s.pop("seconds")
        return out

    def to_json(self, timing: bool = True) -> str:
        return json.dumps(self.to_dict(timing), indent=2, default=str)

    def to_text(self) -> str:
        head = self.name if self.suite is not None else f"scenario {self.name}"
        lines = [f"{head} (seed {self.seed})"]
        for s in self.steps:
            status = "ok" if s.ok else "ERROR"
            lines.append(f"  step {s.name}: {status} ({s.seconds:.3f}s)" + (f" {s.error}" if s.error else ""))
            for k, v in s.outputs.items():
                lines.append(f"    {k} = {v}")
        if self.suite is not None:
            for k, v in self.suite.items():
                lines.append(f"  {k}: {v}")
        if self.residue_exact is not None or self.residue_numeric is not None:
            lines.append(f"  residue exact = {self.residue_exact}, numeric = {self.residue_numeric}, "
                         f"agree = {self.residue_agrees}")
            for t in self.residue_terms:
                lines.append(f"    {t['label']}: {t['method']} exact={t['exact']} numeric={t['numeric']}"
                             + (f" ({t['note']})" if t["note"] else ""))
        for d in self.diagnostics:
            lines.append(f"  note: {d}")
        for c in self.checks:
            mark = "PASS" if c.passed else "FAIL"
            lines.append(f"  [{mark}] {c.label} [{c.tag}]" + (f" {c.note}" if c.note else ""))
            if not c.passed:
                lines.append(f"      computed: {c.computed}")
                lines.append(f"      expected: {c.expected}")
        lines.append(f"  {'PASSED' if self.passed else 'FAILED'} "
                     f"{sum(c.passed for c in self.checks)}/{len(self.checks)} checks in {self.seconds:.2f}s")
        return "\n".join(lines)


class _Steps:
    """Runs named steps, recording timing and capturing module errors."""

    def __init__(self, report: RunReport):
        self.report = report

    def run(self, name, fn):
        t0 = time.perf_counter()
        step = StepResult(name, True)
        try:
            value, outputs = fn()
            step.outputs = {k: str(v) for k, v in outputs.items()}
        except (AtiyahError, ZeroDivisionError, ValueError, KeyError) as exc:
            value = None
            step.ok = False
            step.error = f"{type(exc).__name__}: {exc}"
        step.seconds = time.perf_counter() - t0
        self.report.steps.append(step)
        return value


def _build_connection(sc: Scenario, i: int) -> ConnectionChart:
    spec = sc.connections[i]
    vs = sc.charts[sc.home[i]]
    if spec.kind == "trivial":
        return ConnectionChart.trivial(vs, spec.rank)
    if spec.kind == "theta":
        return ConnectionChart(vs, spec.theta)
    c = normal_partial_connection(sc.distributions[spec.distribution].data())
    return ConnectionChart(vs, MatrixForm(vs, c.theta.entries), c.note)


def run_scenario(sc: Scenario, seed: int = 0, numeric_only: bool = False,
                 tolerance: float = 1e-9) -> RunReport:
    """Connections, localized cocycle, relative check, Stein reduction and the
    residue pairing, followed by comparison against every expectation."""
    t_start = time.perf_counter()
    report = RunReport(sc.name, seed)
    steps = _Steps(report)
    cover = sc.cover()
    state: Dict[str, Any] = {}

    def consistency():
        problems = cover.check_consistency(seed=seed)
        if problems:
            raise ValueError("; ".join(problems))
        return True, {"transition maps": "consistent"}
    steps.run("cover", consistency)

    def distributions():
        out = {name: normal_partial_connection(d.data()) for name, d in sc.distributions.items()}
        return out, {name: c.theta for name, c in out.items()}
    state["distributions"] = steps.run("distributions", distributions) if sc.distributions else {}

    conns: Dict[int, ConnectionChart] = {}
    for i in sorted(sc.connections):
        c = steps.run(f"connection {i}", lambda i=i: (lambda c: (c, {"theta": c.theta}))(_build_connection(sc, i)))
        if c is not None:
            conns[i] = c
            if c.note:
                report.diagnostics.append(f"connection {i}: {c.note}")
    state["connections"] = conns

    sigma = None
    if len(conns) == cover.size:
        locals_ = [LocalConnection(conns[i], sc.connections[i].frame) for i in range(cover.size)]

        def cocycle():
            s = localized_atiyah_cocycle(cover, locals_, sc.degree, sc.frames)
            return s, {"σ_" + "".join(map(str, k)): v for k, v in s.components.items()}
        sigma = steps.run("cocycle", cocycle)
    state["sigma"] = sigma

    relative = closed = None
    if sigma is not None:
        closed = steps.run("closed", lambda: (lambda z: (z, {"D̄σ = 0": z}))(dbar_cech(sigma).is_zero()))
        relative = steps.run("relative", lambda: (lambda r: (r, {"relative": r}))(is_relative(sigma, sc.special)))
    state["closed"], state["relative"] = closed, relative

    xi = None
    if sc.potentials:
        def stein():
            x = stein_reduction(cover, sc.potentials, sc.tau_pairs)
            return x, {"ξ_" + "".join(map(str, k)): v for k, v in x.items()}
        xi = steps.run("stein", stein)
    state["xi"] = xi

    rep: Optional[ResidueReport] = None
    if sigma is not None and sc.cycles:
        if not relative:
            report.diagnostics.append(
                f"residue skipped: cocycle is not relative to set {sc.special} "
                f"(component σ_{sc.special} = {sigma[(sc.special,)]})")
        else:
            tau: Dict = {(i,): f for i, f in sc.tau_sets.items()}
            if xi is not None:
                tau.update(xi)
            else:
                tau.update(sc.tau_pairs)

            def residue():
                r = residue_pairing(sigma, tau, sc.cycles, sc.special, numeric_only=numeric_only,
                                    tolerance=tolerance)
                return r, {"exact": r.exact, "numeric": r.numeric}
            rep = steps.run("residue", residue)
    if rep is not None:
        report.residue_exact = None if rep.exact is None else str(rep.exact)
        report.residue_numeric = rep.numeric
        report.residue_agrees = rep.agrees
        for t in rep.terms:
            report.residue_terms.append({"label": t.label, "method": t.method, "sign": t.sign,
                                         "exact": None if t.exact is None else str(t.exact),
                                         "numeric": None if t.numeric is None else [t.numeric.real, t.numeric.imag],
                                         "note": t.note})
        if not rep.complete:
            report.diagnostics.append("residue incomplete: some terms are unsupported")
    state["residue"] = rep

    for e in sc.expectations:
        report.checks.append(_check(sc, cover, state, e, tolerance))
    report.seconds = time.perf_counter() - t_start
    return report


def _options(args):
    pos, frame, chart = [], None, None
    it = iter(args)
    for a in it:
        if a == "frame":
            frame = next(it)
        elif a == "in":
            chart = next(it)
        else:
            pos.append(a)
    return pos, frame, chart


def _compare(computed, expected) -> bool:
    if isinstance(expected, str) and expected == "nonzero":
        return not computed.is_zero()
    return computed == expected


def _check(sc: Scenario, cover, state, e: Expectation, tol: float) -> CheckResult:
    res = CheckResult(e.label(), e.tag, False, expected=str(e.value[2] if e.kind == "order" else e.value))
    try:
        computed = _computed(sc, cover, state, e)
    except (AtiyahError, ZeroDivisionError, ValueError, KeyError, IndexError) as exc:
        res.note = f"not computed: {type(exc).__name__}: {exc}"
        return res
    if computed is None:
        res.note = "not computed (upstream step failed or was skipped)"
        return res
    if e.kind == "residue":
        exact, numeric = computed
        res.computed = f"{exact} (numeric {numeric})"
        if exact is not None:
            res.passed = exact == e.value
            if numeric is not None and abs(numeric - e.value.to_complex()) > tol:
                res.passed = False
                res.note = "numeric path disagrees"
        else:
            res.passed = numeric is not None and abs(numeric - e.value.to_complex()) <= tol
            res.note = "numeric comparison only"
        return res
    res.computed = str(computed)
    res.passed = _compare(computed, e.value)
    return res


def _computed(sc: Scenario, cover, state, e: Expectation):
    pos, frame, chart = _options(e.args)
    kind = e.kind
    if kind in ("relative", "closed"):
        return state[kind]
    if kind == "residue":
        rep = state["residue"]
        return None if rep is None else (rep.exact, rep.numeric)
    if kind == "order":
        fn, point, _ = e.value
        k = point_residue(fn, point)
        # compared as integers
        return _IntBox(k, e.value[2])
    if kind == "distribution":
        c = state["distributions"].get(pos[0]) if state["distributions"] else None
        return None if c is None else c.theta
    if kind == "xi":
        if state["xi"] is None:
            return None
        idx = tuple(int(ch) for ch in pos[0])
        form = state["xi"][idx]
        return cover.move(form, cover.chart_of(idx), chart) if chart else form
    if kind == "diff":
        if state["sigma"] is None:
            return None
        idx = tuple(int(ch) for ch in pos[0])
        form = state["sigma"][idx]
        return cover.move(form, cover.chart_of(idx), chart) if chart else form
    i = int(pos[0])
    c = state["connections"].get(i)
    if c is None:
        return None
    home = sc.home[i]
    if frame is not None:
        theta = express_in_frame(c.theta, sc.connections[i].frame, frame, sc.frames, cover, home)
        c = ConnectionChart(c.varset, theta)
    p = int(pos[1]) if len(pos) > 1 else 1
    if kind == "theta":
        value = c.theta
    elif kind == "curvature":
        value = curvature(c.theta)
    elif kind == "atiyah":
        value = atiyah_form(c, p)
    else:
        value = chern_form(c, p)
    if chart and chart != home:
        if isinstance(value, MatrixForm):
            return value.map(lambda f: cover.move(f, home, chart))
        return cover.move(value, home, chart)
    return value


class _IntBox:
    """Integer result that compares against the expected order."""

    def __init__(self, k: int, want: int):
        self.k, self.want = k, want

    def __eq__(self, other):
        return self.k == other[2] if isinstance(other, tuple) else self.k == other

    def is_zero(self):
        return self.k == 0

    def __str__(self):
        return str(self.k)
