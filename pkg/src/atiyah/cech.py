"""Čech–Dolbeault cochains on a finite cover, truncated at triple overlaps.

Every set and every nonempty intersection is assigned a chart by name;
forms on a sub-intersection are moved to the chart of a deeper one by
pulling back along declared transition maps.  Geometry beyond that (point
sets, emptiness) is declared, not computed.
"""

from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass, field
from itertools import combinations
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from .connections import ConnectionChart, MatrixForm, difference_form, atiyah_form, frame_change
from .connections import inverse_functions
from .errors import CoverMismatch, MissingTransition, NumericPole, VarSetMismatch
from .forms import ChartMap, Form, dbar, pullback, wedge
from .symcore import RationalFn, VarSet

Index = Tuple[int, ...]


@dataclass
class Cover:
    """Open sets 0..N-1, each hosted by a named chart, with declared
    intersections and chart transition maps.

    ``maps[(a, b)]`` expresses the coordinates of chart ``b`` in those of
    chart ``a``; it pulls forms on ``b`` back to ``a``.
    """

    charts: Dict[str, VarSet]
    home: List[str]
    common: Dict[Index, str] = field(default_factory=dict)
    empty: set = field(default_factory=set)
    maps: Dict[Tuple[str, str], ChartMap] = field(default_factory=dict)

    def __post_init__(self):
        for name in self.home:
            if name not in self.charts:
                raise MissingTransition(f"unknown chart {name!r}")
        for idx, name in self.common.items():
            if name not in self.charts:
                raise MissingTransition(f"unknown chart {name!r} for U_{_label(idx)}")
            if tuple(sorted(set(idx))) != tuple(idx) or len(idx) < 2 or len(idx) > 3:
                raise ValueError(f"bad intersection index {idx}")
        for (a, b), m in self.maps.items():
            if m.source != self.charts[a] or m.target != self.charts[b]:
                raise VarSetMismatch(f"map {a}->{b} does not match the chart varsets")

    @property
    def size(self) -> int:
        return len(self.home)

    def indices(self, depth: int) -> List[Index]:
        """Nonempty intersections of ``depth`` sets, in lexicographic order."""
        out = []
        for idx in combinations(range(self.size), depth):
            if self.is_empty(idx):
                continue
            out.append(idx)
        return out

    def is_empty(self, idx: Index) -> bool:
        idx = tuple(idx)
        if len(idx) == 1:
            return False
        if any(tuple(sub) in self.empty for r in range(2, len(idx) + 1)
               for sub in combinations(idx, r)):
            return True
        return idx not in self.common

    def chart_of(self, idx: Index) -> str:
        idx = tuple(idx)
        if len(idx) == 1:
            return self.home[idx[0]]
        if self.is_empty(idx):
            raise MissingTransition(f"U_{_label(idx)} is declared empty")
        return self.common[idx]

    def varset_of(self, idx: Index) -> VarSet:
        return self.charts[self.chart_of(idx)]

    def chart_map(self, source: str, target: str) -> Optional[ChartMap]:
        """Map pulling forms on ``target`` back to ``source``, composing declared
        maps along a shortest path; None when source == target."""
        if source == target:
            return None
        if (source, target) in self.maps:
            return self.maps[(source, target)]
        prev = {source: None}
        queue = deque([source])
        while queue:
            a = queue.popleft()
            for (x, y) in self.maps:
                if x == a and y not in prev:
                    prev[y] = a
                    queue.append(y)
        if target not in prev:
            raise MissingTransition(f"no transition from chart {source!r} to {target!r}")
        path = [target]
        while prev[path[-1]] is not None:
            path.append(prev[path[-1]])
        path.reverse()
        m = self.maps[(path[0], path[1])]
        for a, b in zip(path[1:], path[2:]):
            m = m.compose(self.maps[(a, b)])
        self.maps[(source, target)] = m
        return m

    def move(self, a: Form, from_chart: str, to_chart: str) -> Form:
        m = self.chart_map(to_chart, from_chart)
        if m is None:
            return a
        return pullback(m, a)

    def move_function(self, f: RationalFn, from_chart: str, to_chart: str) -> RationalFn:
        m = self.chart_map(to_chart, from_chart)
        if m is None:
            return f
        return f.substitute(m.components, m.source)

    def restrict(self, a: Form, from_idx: Index, to_idx: Index) -> Form:
        return self.move(a, self.chart_of(from_idx), self.chart_of(to_idx))

    def check_consistency(self, samples: int = 3, seed: int = 0, tol: float = 1e-9) -> List[str]:
        """Spot-check that declared maps commute (a->b->c agrees with a->c)
        at random points.  Returns a list of problems (empty when consistent)."""
        rng = random.Random(seed)
        problems = []
        names = list(self.charts)
        for a in names:
            for b in names:
                for c in names:
                    if len({a, b, c}) < 3:
                        continue
                    if (a, b) in self.maps and (b, c) in self.maps and (a, c) in self.maps:
                        direct = self.maps[(a, c)]
                        via = self.maps[(a, b)].compose(self.maps[(b, c)])
                        for _ in range(samples):
                            pt = {nm: complex(rng.uniform(0.3, 2.0), rng.uniform(0.3, 2.0))
                                  for nm in self.charts[a].holo}
                            for nm in self.charts[c].holo:
                                try:
                                    u = direct.components[nm].eval_numeric(pt)
                                    v = via.components[nm].eval_numeric(pt)
                                except NumericPole:
                                    continue
                                if abs(u - v) > tol * max(1.0, abs(u)):
                                    problems.append(f"{a}->{b}->{c} disagrees with {a}->{c} on {nm}")
        return problems


def _label(idx: Index) -> str:
    return "".join(str(i) for i in idx)


class Cochain:
    """Element of A^{p,q}(U): forms on sets (bidegree (p,q)), pairs ((p,q-1))
    and triples ((p,q-2)), each in the chart declared for that intersection."""

    __hash__ = None

    def __init__(self, cover: Cover, bidegree: Tuple[int, int], components: Optional[Mapping[Index, Form]] = None):
        self.cover = cover
        self.bidegree = tuple(bidegree)
        self.components: Dict[Index, Form] = {}
        for idx, f in (components or {}).items():
            idx = tuple(idx)
            if not 1 <= len(idx) <= 3:
                raise ValueError(f"component index {idx} out of range")
            if cover.is_empty(idx):
                continue
            if f.varset != cover.varset_of(idx):
                raise VarSetMismatch(f"component U_{_label(idx)} lives on the wrong chart")
            if not f.is_zero():
                self.components[idx] = f

    def __getitem__(self, idx) -> Form:
        idx = tuple(idx)
        f = self.components.get(idx)
        return f if f is not None else Form(self.cover.varset_of(idx))

    def _check(self, other: "Cochain"):
        if other.cover is not self.cover:
            raise CoverMismatch("cochains live on different covers")

    def __add__(self, other: "Cochain") -> "Cochain":
        self._check(other)
        if other.bidegree != self.bidegree:
            raise CoverMismatch("bidegrees differ")
        keys = set(self.components) | set(other.components)
        return Cochain(self.cover, self.bidegree, {k: self[k] + other[k] for k in keys})

    def __neg__(self):
        return Cochain(self.cover, self.bidegree, {k: -v for k, v in self.components.items()})

    def __sub__(self, other):
        return self + (-other)

    def is_zero(self) -> bool:
        return not self.components

    def __eq__(self, other):
        if not isinstance(other, Cochain):
            return NotImplemented
        if other.cover is not self.cover:
            return False
        keys = set(self.components) | set(other.components)
        return all(self[k] == other[k] for k in keys)

    def all_indices(self) -> List[Index]:
        cov = self.cover
        return [idx for depth in (1, 2, 3) for idx in cov.indices(depth)]

    def __str__(self):
        lines = [f"Cochain{self.bidegree}"]
        for idx in self.all_indices():
            if idx in self.components:
                lines.append(f"  [{_label(idx)}] {self.components[idx]}")
        return "\n".join(lines)


def dbar_cech(s: Cochain) -> Cochain:
    """(D̄σ)_{i0..ik} = Σ_ν (−1)^ν σ_{i0..î_ν..ik} + (−1)^k ∂̄σ_{i0..ik}."""
    cov = s.cover
    p, q = s.bidegree
    out = {}
    for idx in s.all_indices():
        k = len(idx) - 1
        acc = Form(cov.varset_of(idx))
        for nu in range(len(idx)):
            face = idx[:nu] + idx[nu + 1:]
            if not face or face not in s.components:
                continue
            term = cov.restrict(s.components[face], face, idx)
            acc = acc + term if nu % 2 == 0 else acc - term
        if idx in s.components:
            db = dbar(s.components[idx])
            acc = acc + db if k % 2 == 0 else acc - db
        out[idx] = acc
    return Cochain(cov, (p, q + 1), out)


def cup(s: Cochain, t: Cochain) -> Cochain:
    """(σ⌣τ)_{i0..ik} = Σ_m (−1)^{(p+q−m)(k−m)} σ_{i0..im} ∧ τ_{im..ik}."""
    s._check(t)
    cov = s.cover
    p, q = s.bidegree
    p2, q2 = t.bidegree
    out = {}
    for idx in s.all_indices():
        k = len(idx) - 1
        acc = Form(cov.varset_of(idx))
        for m in range(k + 1):
            left, right = idx[: m + 1], idx[m:]
            if left not in s.components or right not in t.components:
                continue
            a = cov.restrict(s.components[left], left, idx)
            b = cov.restrict(t.components[right], right, idx)
            term = wedge(a, b)
            if ((p + q - m) * (k - m)) % 2:
                term = -term
            acc = acc + term
        out[idx] = acc
    return Cochain(cov, (p + p2, q + q2), out)


def is_relative(s: Cochain, special: int = 0) -> bool:
    return (special,) not in s.components


# -- frames ----------------------------------------------------------------------

@dataclass(frozen=True)
class FrameRelation:
    """``new = old · matrix`` on ``chart`` (for rank 1: new = f · old)."""

    old: str
    new: str
    chart: str
    matrix: Tuple[Tuple[RationalFn, ...], ...]


def _frame_path(relations: Sequence[FrameRelation], start: str, goal: str):
    """Steps (relation, forward?) leading from frame ``start`` to ``goal``."""
    if start == goal:
        return []
    prev = {start: None}
    queue = deque([start])
    while queue:
        f = queue.popleft()
        for rel in relations:
            for a, b, fwd in ((rel.old, rel.new, True), (rel.new, rel.old, False)):
                if a == f and b not in prev:
                    prev[b] = (f, rel, fwd)
                    queue.append(b)
    if goal not in prev:
        raise MissingTransition(f"no frame relation links {start!r} to {goal!r}")
    steps = []
    cur = goal
    while prev[cur] is not None:
        f, rel, fwd = prev[cur]
        steps.append((rel, fwd))
        cur = f
    steps.reverse()
    return steps


def express_in_frame(theta: MatrixForm, frame: str, target_frame: str,
                     relations: Sequence[FrameRelation], cover: Cover, chart: str) -> MatrixForm:
    """Connection matrix given in ``frame`` rewritten in ``target_frame`` on ``chart``."""
    for rel, fwd in _frame_path(relations, frame, target_frame):
        a = [[cover.move_function(f, rel.chart, chart) for f in row] for row in rel.matrix]
        # fwd: current frame is rel.old and we move to rel.new = old·A
        mat = a if fwd else inverse_functions(a)
        theta = frame_change(theta, MatrixForm.from_functions(mat))
    return theta


@dataclass(frozen=True)
class LocalConnection:
    """A connection on one cover set: its matrix on the set's home chart in a named frame."""

    connection: ConnectionChart
    frame: str


def localized_atiyah_cocycle(cover: Cover, connections: Sequence[LocalConnection], p: int = 1,
                             relations: Sequence[FrameRelation] = ()) -> Cochain:
    """(a^p(∇_i), a^p(∇_i, ∇_j)) with difference forms computed in the common
    chart of each pair and in the frame of the lower index.  Triple components
    would need three-connection difference forms; they vanish for p = 1 and are
    left out otherwise."""
    if len(connections) != cover.size:
        raise CoverMismatch("need one connection per cover set")
    comps: Dict[Index, Form] = {}
    for i, lc in enumerate(connections):
        if lc.connection.varset != cover.charts[cover.home[i]]:
            raise VarSetMismatch(f"connection {i} is not on its home chart")
        comps[(i,)] = atiyah_form(lc.connection, p)
    for (i, j) in cover.indices(2):
        chart = cover.chart_of((i, j))
        vs = cover.charts[chart]
        thetas = []
        for k in (i, j):
            lc = connections[k]
            th = lc.connection.theta.map(lambda e, k=k: cover.move(e, cover.home[k], chart))
            th = express_in_frame(th, lc.frame, connections[i].frame, relations, cover, chart)
            thetas.append(ConnectionChart(vs, th))
        comps[(i, j)] = difference_form(thetas[0], thetas[1], p, "atiyah")
    return Cochain(cover, (p, p), comps)


def stein_reduction(cover: Cover, rho: Mapping[int, Form],
                    tau_pair: Optional[Mapping[Index, Form]] = None,
                    sets: Optional[Iterable[int]] = None) -> Dict[Index, Form]:
    """ξ_ij = τ_ij + ρ_i − ρ_j in the common chart of U_ij, for pairs inside ``sets``
    (default: the sets carrying a potential)."""
    tau_pair = tau_pair or {}
    members = sorted(set(sets) if sets is not None else set(rho))
    out = {}
    for (i, j) in cover.indices(2):
        if i not in members or j not in members:
            continue
        vs = cover.varset_of((i, j))
        acc = tau_pair.get((i, j), Form(vs))
        for k, sign in ((i, 1), (j, -1)):
            if k in rho:
                r = cover.restrict(rho[k], (k,), (i, j))
                acc = acc + r if sign > 0 else acc - r
        out[(i, j)] = acc
    return out
