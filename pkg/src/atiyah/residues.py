"""Integration over products of circles and assembly of residue pairings.

Exact integrals are (2πi)^k times an iterated Laurent coefficient.  Whether
to expand a denominator factor about 0 or about ∞ is decided per circled
variable with a Rouché-type comparison against the rational radius: the
factor must be dominated by its constant term (no roots inside) or by its
leading term (all roots inside) on the circle.  Anything else raises
UnsupportedDenominator and callers fall back to quadrature.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from math import isqrt
from typing import Dict, List, Mapping, Optional, Tuple

import numpy as np

from .cech import Cochain, Cover, Index, _label
from .errors import (DegreeError, NonConvergent, NumericPole, UnsupportedDenominator,
                     VarSetMismatch, ZeroFunction)
from .forms import Form, _perm_sign, wedge
from .symcore import I, PI, Poly, RationalFn, Scalar, VarSet, _split_in

TWO_PI_I = Scalar(2) * PI * I


@dataclass(frozen=True)
class TorusCycle:
    """{|v_j| = r_j} in a chart, circled variables listed innermost first.

    ``orientation`` +1 means arg v_1 ∧ arg v_2 ∧ ... in the listed order.  Radii
    are rational proxies; non-circled variables are pinned to ``fixed``."""

    varset: VarSet
    radii: Tuple[Tuple[str, Fraction], ...]
    orientation: int = 1
    fixed: Tuple[Tuple[str, Scalar], ...] = ()
    chart: str = ""

    def __post_init__(self):
        if self.orientation not in (1, -1):
            raise ValueError("orientation must be +1 or -1")
        names = [v for v, _ in self.radii]
        if len(set(names)) != len(names):
            raise ValueError("circled variables repeat")
        for v, r in self.radii:
            if v not in self.varset.holo:
                raise VarSetMismatch(f"{v!r} is not a holomorphic variable of the chart")
            if Fraction(r) <= 0:
                raise ValueError("radii must be positive")
        for v, _ in self.fixed:
            if v not in self.varset.holo or v in names:
                raise ValueError(f"bad fixed variable {v!r}")

    @property
    def dim(self) -> int:
        return len(self.radii)

    @property
    def circled(self) -> Tuple[str, ...]:
        return tuple(v for v, _ in self.radii)

    def flipped(self) -> "TorusCycle":
        return TorusCycle(self.varset, self.radii, -self.orientation, self.fixed, self.chart)


# -- exact path --------------------------------------------------------------------

def _sqrt_bounds(a: Fraction, bits: int = 48):
    """Rational lower/upper bounds of sqrt(a)."""
    scale = 1 << bits
    s = isqrt(math.floor(a * scale * scale))
    return Fraction(s, scale), Fraction(s + 1, scale)


def _abs_bounds(c: Scalar):
    if not c.is_gaussian():
        raise UnsupportedDenominator("denominator coefficient involves pi")
    a2 = c.abs2_gaussian()
    lo, hi = _sqrt_bounds(a2)
    return (lo if a2 else Fraction(0)), (hi if a2 else Fraction(0))


def root_region(q: Poly, slot: int, radius: Fraction) -> str:
    """'outside' if q has no roots in |v| <= r, 'inside' if all roots lie in
    |v| < r; q must depend on slot only."""
    parts = _split_in(q, slot)
    coeffs = {}
    for j, p in parts.items():
        if not p.is_const():
            raise UnsupportedDenominator("denominator factor couples circled variables")
        coeffs[j] = p.const_value()
    deg = max(coeffs)
    r = Fraction(radius)
    bounds = {j: _abs_bounds(c) for j, c in coeffs.items()}
    lo0 = bounds.get(0, (Fraction(0), Fraction(0)))[0]
    rest = sum(bounds[j][1] * r ** j for j in coeffs if j != 0)
    if lo0 > rest:
        return "outside"
    lod = bounds[deg][0] * r ** deg
    rest = sum(bounds[j][1] * r ** j for j in coeffs if j != deg)
    if lod > rest:
        return "inside"
    raise UnsupportedDenominator(f"cannot place the roots of {q} relative to |v| = {r}")


def _substitute_fixed(f: RationalFn, cycle: TorusCycle) -> RationalFn:
    if not cycle.fixed:
        return f
    vs = f.varset
    mapping = {nm: RationalFn.var(vs, nm) for nm in vs.holo}
    for nm, val in cycle.fixed:
        mapping[nm] = RationalFn.const(vs, val)
    return f.substitute(mapping, vs)


def _torus_coefficient(a: Form, cycle: TorusCycle, allow_conj: bool) -> Tuple[Dict, int]:
    """Terms of ``a`` that survive on the torus, as {(slots...): coef} in cycle order."""
    vs = a.varset
    if vs != cycle.varset:
        raise VarSetMismatch("form and cycle live on different charts")
    n = vs.n
    circ = {vs.index(v): i for i, v in enumerate(cycle.circled)}
    out = {}
    for key, c in a.terms.items():
        if any(s >= 2 * n for s in key):
            raise DegreeError("form contains a real-parameter differential")
        base = [s if s < n else s - n for s in key]
        if any(b not in circ for b in base):
            continue  # differential of a pinned variable vanishes on the cycle
        if any(s >= n for s in key) and not allow_conj:
            raise DegreeError("exact torus integration needs a pure (k,0) form")
        if len(key) != cycle.dim:
            raise DegreeError(f"{len(key)}-form on a {cycle.dim}-dimensional torus")
        if len(set(base)) != len(base):
            continue  # dv ∧ dv̄ restricts to zero on a circle
        out[key] = c
    return out, circ


def integrate_torus_exact(a: Form, cycle: TorusCycle) -> Scalar:
    terms, circ = _torus_coefficient(a, cycle, allow_conj=False)
    vs = a.varset
    if not terms:
        return Scalar(0)
    names = cycle.circled
    coef = a.coefficient(*names)
    coef = _substitute_fixed(coef, cycle)
    n = vs.n
    if any(coef.depends_on(s) for s in range(n, vs.size)):
        raise UnsupportedDenominator("coefficient depends on conjugate variables")
    for v, r in cycle.radii:
        slot = vs.index(v)
        regions = set()
        for q in coef.den:
            if q.depends_on(slot):
                regions.add(root_region(q, slot, r))
        if len(regions) > 1:
            raise UnsupportedDenominator(f"poles on both sides of |{v}| = {r}")
        coef = coef.laurent_coefficient(v, -1, at_infinity=(regions == {"inside"}))
        if coef.is_zero():
            return Scalar(0)
    if not coef.is_const():
        raise DegreeError("integrand depends on variables that are neither circled nor fixed")
    return Scalar(cycle.orientation) * TWO_PI_I ** cycle.dim * coef.const_value()


# -- numeric path ------------------------------------------------------------------

def _numeric_once(terms, circ, cycle: TorusCycle, n_points: int, vs: VarSet) -> complex:
    k = cycle.dim
    n = vs.n
    phis = np.arange(n_points) * (2 * np.pi / n_points)
    grids = np.meshgrid(*([phis] * k), indexing="ij")
    point = {}
    vals = []
    for (v, r), g in zip(cycle.radii, grids):
        z = float(r) * np.exp(1j * g)
        point[v] = z
        vals.append(z)
    for nm, c in cycle.fixed:
        point[nm] = complex(c.to_complex())
    total = 0j
    for key, c in terms.items():
        f = c.eval_numeric(point)
        factor = np.ones_like(vals[0])
        order = []
        for s in key:
            if s < n:
                i = circ[s]
                factor = factor * (1j * vals[i])
            else:
                i = circ[s - n]
                factor = factor * (-1j * np.conj(vals[i]))
            order.append(i)
        sign = _perm_sign(order)
        total += sign * np.mean(f * factor)
    return complex(cycle.orientation * total * (2 * np.pi) ** k)


def integrate_torus_numeric(a: Form, cycle: TorusCycle, n_points: int = 64,
                            tol: float = 1e-12, max_total: int = 1 << 22) -> complex:
    """Product trapezoid rule, doubling the per-circle count until two successive
    estimates agree to ``tol`` (relative to max(1, |value|))."""
    terms, circ = _torus_coefficient(a, cycle, allow_conj=True)
    if not terms:
        return 0j
    vs = a.varset
    prev = _numeric_once(terms, circ, cycle, n_points, vs)
    n = n_points
    while True:
        n *= 2
        if n ** cycle.dim > max_total:
            raise NonConvergent(f"trapezoid rule did not settle (last estimate {prev})")
        cur = _numeric_once(terms, circ, cycle, n, vs)
        if abs(cur - prev) <= tol * max(1.0, abs(cur)):
            return cur
        prev = cur


# -- residue pairing -----------------------------------------------------------------

@dataclass
class TermResult:
    label: str
    cell: Index
    sign: int
    exact: Optional[Scalar] = None
    numeric: Optional[complex] = None
    method: str = ""
    note: str = ""


@dataclass
class ResidueReport:
    exact: Optional[Scalar]
    numeric: Optional[complex]
    terms: List[TermResult] = field(default_factory=list)
    tolerance: float = 1e-9

    @property
    def agrees(self) -> Optional[bool]:
        if self.exact is None or self.numeric is None:
            return None
        return abs(self.exact.to_complex() - self.numeric) <= self.tolerance

    @property
    def complete(self) -> bool:
        return all(t.method != "unsupported" for t in self.terms)


def _tau_component(tau, cover: Cover, idx: Index) -> Optional[Form]:
    if isinstance(tau, Cochain):
        return tau.components.get(idx)
    return tau.get(idx)


def _product(cover: Cover, chart: str, pieces) -> Form:
    """Wedge of (form, source index) pieces moved into ``chart``; zero if any piece is absent."""
    out = None
    for f, idx in pieces:
        if f is None or f.is_zero():
            return Form(cover.charts[chart])
        g = cover.move(f, cover.chart_of(idx), chart)
        out = g if out is None else wedge(out, g)
    return out


def residue_pairing(sigma: Cochain, tau, cells: Mapping[Index, Optional[TorusCycle]],
                    special: int = 0, numeric_only: bool = False,
                    cross_check: bool = True, tolerance: float = 1e-9) -> ResidueReport:
    """∫σ⌣τ over a honeycomb system, for σ relative to ``special``:

        Σ_i ∫_{R_i} σ_i∧τ_i + Σ_i ∫_{R_0i} σ_0i∧τ_i
          + Σ_{i<j} (∫_{R_ij} (σ_i∧τ_ij + σ_ij∧τ_j) − ∫_{R_0ij} σ_0i∧τ_ij)

    ``tau`` is a cochain on the cover or a mapping index -> form (a Stein-reduced
    ξ has only pair components).  Cells R_i and R_ij are not tori; their terms
    are accepted only when the integrand vanishes identically.  ``cells`` maps
    cell indices (with the special set written as its own index) to torus
    cycles; a None value declares the cell empty."""
    cover = sigma.cover
    if sigma.components.get((special,)) is not None:
        raise ValueError("sigma is not relative to the special set")
    others = [i for i in range(cover.size) if i != special]

    def s_(idx):
        return sigma.components.get(tuple(sorted(idx)))

    def t_(idx):
        return _tau_component(tau, cover, tuple(sorted(idx)))

    def key(*idx):
        return tuple(sorted(idx))

    plan = []  # (label, cell, sign, [(form pieces)...], is_torus_cell)
    for i in others:
        plan.append((f"R_{i}", (i,), 1, [[(s_((i,)), (i,)), (t_((i,)), (i,))]], False))
    for i in others:
        plan.append((f"R_{_label(key(special, i))}", key(special, i), 1,
                     [[(s_((special, i)), key(special, i)), (t_((i,)), (i,))]], True))
    for i, j in combinations(others, 2):
        if cover.is_empty((i, j)):
            continue
        plan.append((f"R_{i}{j}", (i, j), 1,
                     [[(s_((i,)), (i,)), (t_((i, j)), (i, j))],
                      [(s_((i, j)), (i, j)), (t_((j,)), (j,))]], False))
        plan.append((f"R_{_label(key(special, i, j))}", key(special, i, j), -1,
                     [[(s_((special, i)), key(special, i)), (t_((i, j)), (i, j))]], True))

    report = ResidueReport(exact=Scalar(0), numeric=0j, tolerance=tolerance)
    for label, cell, sign, products, torus_cell in plan:
        tr = TermResult(label, cell, sign)
        report.terms.append(tr)
        declared = cell in cells
        cycle = cells.get(cell)
        if (declared and cycle is None) or (len(cell) > 1 and cover.is_empty(cell)):
            tr.method, tr.exact, tr.numeric = "empty", Scalar(0), 0j
            continue
        if cycle is not None:
            chart = cycle.chart or _chart_for(cover, cycle.varset)
        else:
            chart = cover.chart_of(cell)
        integrand = None
        for pieces in products:
            if any(f is None or f.is_zero() for f, _ in pieces):
                continue
            part = _product(cover, chart, pieces)
            integrand = part if integrand is None else integrand + part
        if integrand is None or integrand.is_zero():
            tr.method, tr.exact, tr.numeric = "zero integrand", Scalar(0), 0j
            continue
        if cycle is None:
            tr.method = "unsupported"
            tr.note = ("no torus declared for this cell" if torus_cell
                       else "integration over higher-dimensional cells is not supported")
            report.exact = None
            report.numeric = None
            continue
        if sign < 0:
            integrand = -integrand
        if not numeric_only:
            try:
                tr.exact = integrate_torus_exact(integrand, cycle)
                tr.method = "exact"
            except (UnsupportedDenominator, DegreeError) as exc:
                tr.note = f"exact path unavailable: {exc}"
        if numeric_only or cross_check or tr.exact is None:
            try:
                tr.numeric = integrate_torus_numeric(integrand, cycle)
                if tr.exact is None:
                    tr.method = "numeric"
            except (NumericPole, NonConvergent) as exc:
                tr.note = (tr.note + "; " if tr.note else "") + f"numeric path failed: {exc}"
        if tr.exact is None and tr.numeric is None:
            tr.method = "failed"
    terms = report.terms
    if any(t.method in ("unsupported", "failed") for t in terms):
        report.exact = None
        report.numeric = None
        return report
    if all(t.exact is not None for t in terms):
        total = Scalar(0)
        for t in terms:
            total = total + t.exact
        report.exact = total
    else:
        report.exact = None
    if all(t.numeric is not None for t in terms):
        report.numeric = complex(sum(t.numeric for t in terms))
    elif report.exact is not None:
        report.numeric = None
    return report


def _chart_for(cover: Cover, vs: VarSet) -> str:
    for name, v in cover.charts.items():
        if v == vs:
            return name
    raise VarSetMismatch("cycle chart is not a chart of the cover")


# -- point residues --------------------------------------------------------------------

def _multiplicity(p: Poly, root: Poly) -> int:
    k = 0
    while True:
        q = p.divide_exact(root)
        if q is None:
            return k
        p = q
        k += 1


def point_residue(f: RationalFn, point=0) -> int:
    """ord_p(f) = (1/2πi) Res_p(df/f) for a univariate rational function."""
    vs = f.varset
    if vs.n != 1 or vs.real:
        raise VarSetMismatch("point_residue needs a univariate function")
    if f.is_zero():
        raise ZeroFunction("f vanishes identically")
    if any(f.depends_on(s) for s in range(1, vs.size)):
        raise ValueError("f must be holomorphic in its variable")
    p = Scalar.coerce(point)
    z = Poly.var(vs, vs.holo[0])
    num = f.num
    lo = num.min_exps()[0]
    if p.is_zero():
        order = lo
        for q, m in f.den.items():
            order -= m * q.min_exps()[0]
        return order
    root = z - Poly.const(vs, p)
    if lo:
        num = num.shift((-lo,) + (0,) * (vs.size - 1))
    order = _multiplicity(num, root)
    for q, m in f.den.items():
        order -= m * _multiplicity(q, root)
    return order
