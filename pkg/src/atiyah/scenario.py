"""Scenario files: a line-oriented, versioned text format.

A document starts with ``atiyah-scenario 1`` and a ``name`` line, followed by
``[section args]`` blocks.  Blank lines and ``#`` comments are ignored.
Expressions use the grammar of :mod:`atiyah.expr`.  Sections::

    [chart A]            vars x y
    [map A -> C]         x1 = 1/x          (target coordinates in source ones)
    [distribution W0]    ambient x y z / dim 2 / chart A / gen <vector field>
    [cover]              sets A A B C / common 01 A / empty 12
    [frames]             nu2 = nu1 * 1/y2 on B
    [connection 0]       frame nu1 / distribution W0 | trivial [rank] | theta <matrix>
    [pairing]            potential 1 = <form> / set 1 = <form> / pair 13 = <form>
    [cycle 013]          chart A / circle x 9/4 / orientation -1 / fix y 2 / empty
    [run]                degree 1 / special 0
    [expect]             <kind> <args> = <value> [PAPER|TRIVIAL|DERIVED]
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Tuple

from .cech import Cover, FrameRelation
from .connections import MatrixForm, PartialConnectionData
from .errors import ScenarioSyntaxError, SchemaError, UnresolvedReference
from .expr import (parse_field, parse_form, parse_function, parse_matrix, parse_scalar)
from .forms import ChartMap, Form, VectorField
from .residues import TorusCycle
from .symcore import Scalar, VarSet

SCHEMA_VERSION = 1
TAGS = ("PAPER", "TRIVIAL", "DERIVED")
EXPECT_KINDS = ("theta", "curvature", "atiyah", "chern", "diff", "distribution", "xi",
                "relative", "closed", "residue", "order")

_SECTION = re.compile(r"^\[\s*([A-Za-z_-]+)\s*(.*?)\s*\]$")
_FRAME = re.compile(r"^(\w+)\s*=\s*(\w+)\s*\*\s*(.+?)\s+on\s+(\w+)$")
_TAG = re.compile(r"\[\s*(\w+)\s*\]\s*$")


@dataclass
class Distribution:
    ambient: VarSet
    dim: int
    chart: str
    generators: Tuple[VectorField, ...]

    def data(self) -> PartialConnectionData:
        return PartialConnectionData(self.ambient, self.dim, self.generators)


@dataclass
class ConnectionSpec:
    """How the connection on one cover set is built."""

    frame: str
    kind: str  # trivial | distribution | theta
    rank: int = 1
    distribution: str = ""
    theta: Optional[MatrixForm] = None


@dataclass
class Expectation:
    kind: str
    args: Tuple[str, ...]
    value: object
    tag: str
    line: int = 0
    source: str = ""

    def label(self) -> str:
        text = " ".join((self.kind,) + tuple(self.args))
        if self.kind == "order":
            text += f" : {self.value[0]}"
        return text


@dataclass
class Scenario:
    name: str
    charts: Dict[str, VarSet]
    maps: Dict[Tuple[str, str], ChartMap]
    distributions: Dict[str, Distribution]
    home: List[str]
    common: Dict[Tuple[int, ...], str]
    empty: List[Tuple[int, ...]]
    frames: List[FrameRelation]
    connections: Dict[int, ConnectionSpec]
    potentials: Dict[int, Form] = field(default_factory=dict)
    tau_sets: Dict[int, Form] = field(default_factory=dict)
    tau_pairs: Dict[Tuple[int, ...], Form] = field(default_factory=dict)
    cycles: Dict[Tuple[int, ...], Optional[TorusCycle]] = field(default_factory=dict)
    cycle_notes: Dict[Tuple[int, ...], str] = field(default_factory=dict)
    degree: int = 1
    special: int = 0
    expectations: List[Expectation] = field(default_factory=list)
    description: str = ""

    def cover(self) -> Cover:
        return Cover(dict(self.charts), list(self.home), dict(self.common), set(self.empty), dict(self.maps))

    def nonempty_cycles(self) -> List[Tuple[int, ...]]:
        return [k for k, v in self.cycles.items() if v is not None]


# -- parsing --------------------------------------------------------------------------

def _index(text: str, line: int, col: int) -> Tuple[int, ...]:
    text = text.strip()
    if not text.isdigit():
        raise ScenarioSyntaxError(f"expected a set index like 013, got {text!r}", line, col)
    idx = tuple(int(ch) for ch in text)
    if list(idx) != sorted(set(idx)):
        raise ScenarioSyntaxError("set indices must be strictly increasing", line, col)
    return idx


class _Reader:
    def __init__(self, text: str):
        self.lines = []
        for no, raw in enumerate(text.splitlines(), start=1):
            stripped = raw.split("#", 1)[0].rstrip()
            if stripped.strip():
                indent = len(stripped) - len(stripped.lstrip())
                self.lines.append((no, stripped.strip(), indent))


def parse_scenario(text: str) -> Scenario:
    reader = _Reader(text)
    if not reader.lines:
        raise SchemaError("empty scenario document")
    no, first, _ = reader.lines[0]
    m = re.match(r"^atiyah-scenario\s+(\d+)$", first)
    if not m:
        raise SchemaError(f"line {no}: document must start with 'atiyah-scenario <version>'")
    if int(m.group(1)) != SCHEMA_VERSION:
        raise SchemaError(f"schema version {m.group(1)} is not supported (expected {SCHEMA_VERSION})")

    header: Dict[str, str] = {}
    sections: List[Tuple[str, str, int, list]] = []
    for no, line, ind in reader.lines[1:]:
        sm = _SECTION.match(line)
        if sm:
            sections.append((sm.group(1), sm.group(2), no, []))
        elif not sections:
            key, _, rest = line.partition(" ")
            if key not in ("name", "description"):
                raise ScenarioSyntaxError(f"unknown header field {key!r}", no, 1 + ind)
            header[key] = rest.strip()
        else:
            sections[-1][3].append((no, line, ind))
    if "name" not in header:
        raise SchemaError("scenario has no name")

    sc = Scenario(name=header["name"], charts={}, maps={}, distributions={}, home=[], common={},
                  empty=[], frames=[], connections={}, description=header.get("description", ""))
    deferred = []
    for kind, arg, no, body in sections:
        if kind == "chart":
            _parse_chart(sc, arg, no, body)
        elif kind in ("map", "distribution", "cover", "frames", "connection", "pairing",
                      "cycle", "run", "expect"):
            deferred.append((kind, arg, no, body))
        else:
            raise ScenarioSyntaxError(f"unknown section {kind!r}", no, 2)
    order = ["map", "distribution", "cover", "frames", "connection", "pairing", "cycle", "run", "expect"]
    deferred.sort(key=lambda s: order.index(s[0]))
    for kind, arg, no, body in deferred:
        globals()["_parse_" + kind](sc, arg, no, body)
    if not sc.home:
        raise SchemaError("scenario has no [cover] section")
    for i in range(len(sc.home)):
        if i not in sc.connections:
            raise SchemaError(f"no [connection {i}] section")
    for i, spec in sc.connections.items():
        if spec.kind == "distribution":
            dist = sc.distributions[spec.distribution]
            if dist.chart != sc.home[i]:
                raise SchemaError(f"distribution {spec.distribution} lives on chart {dist.chart}, "
                                  f"set {i} on {sc.home[i]}")
    return sc


def _chart(sc: Scenario, name: str, no: int) -> VarSet:
    if name not in sc.charts:
        raise UnresolvedReference(name, f"line {no}: chart")
    return sc.charts[name]


def _kv(line: str):
    key, _, rest = line.partition(" ")
    return key, rest.strip(), len(key) + 1 + (len(rest) - len(rest.lstrip()))


def _parse_chart(sc, arg, no, body):
    if not arg:
        raise ScenarioSyntaxError("chart needs a name", no, 2)
    names = None
    for lno, line, ind in body:
        key, rest, off = _kv(line)
        if key != "vars":
            raise ScenarioSyntaxError(f"unknown chart field {key!r}", lno, ind + 1)
        names = rest.split()
    if not names:
        raise SchemaError(f"chart {arg} declares no variables")
    sc.charts[arg] = VarSet(names)


def _parse_map(sc, arg, no, body):
    m = re.match(r"^(\w+)\s*->\s*(\w+)$", arg)
    if not m:
        raise ScenarioSyntaxError("map header must read [map SRC -> DST]", no, 2)
    src, dst = _chart(sc, m.group(1), no), _chart(sc, m.group(2), no)
    comps = {}
    for lno, line, ind in body:
        name, eq, expr = line.partition("=")
        name = name.strip()
        if not eq:
            raise ScenarioSyntaxError("expected '<coordinate> = <expression>'", lno, ind + 1)
        if name not in dst.holo:
            raise UnresolvedReference(name, f"line {lno}: coordinate of chart {m.group(2)}")
        col = ind + line.index("=") + 1 + (len(expr) - len(expr.lstrip()))
        comps[name] = parse_function(expr.strip(), src, lno, col)
    sc.maps[(m.group(1), m.group(2))] = ChartMap(src, dst, comps)


def _parse_distribution(sc, arg, no, body):
    ambient, dim, chart, gens = None, None, None, []
    for lno, line, ind in body:
        key, rest, off = _kv(line)
        if key == "ambient":
            ambient = VarSet(rest.split())
        elif key == "dim":
            dim = int(rest)
        elif key == "chart":
            chart = rest
            _chart(sc, rest, lno)
        elif key == "gen":
            if ambient is None:
                raise SchemaError(f"line {lno}: declare 'ambient' before generators")
            gens.append(parse_field(rest, ambient, lno, ind + off))
        else:
            raise ScenarioSyntaxError(f"unknown distribution field {key!r}", lno, ind + 1)
    if ambient is None or dim is None or chart is None or not gens:
        raise SchemaError(f"distribution {arg} needs ambient, dim, chart and gen lines")
    if tuple(sc.charts[chart].holo) != tuple(ambient.holo[:dim]):
        raise SchemaError(f"chart {chart} must carry the first {dim} ambient coordinates")
    sc.distributions[arg] = Distribution(ambient, dim, chart, tuple(gens))


def _parse_cover(sc, arg, no, body):
    for lno, line, ind in body:
        key, rest, off = _kv(line)
        if key == "sets":
            for name in rest.split():
                _chart(sc, name, lno)
            sc.home = rest.split()
        elif key == "common":
            parts = rest.split()
            if len(parts) != 2:
                raise ScenarioSyntaxError("expected 'common <index> <chart>'", lno, ind + 1)
            _chart(sc, parts[1], lno)
            sc.common[_index(parts[0], lno, ind + off + 1)] = parts[1]
        elif key == "empty":
            for p in rest.split():
                sc.empty.append(_index(p, lno, ind + off + 1))
        else:
            raise ScenarioSyntaxError(f"unknown cover field {key!r}", lno, ind + 1)
    n = len(sc.home)
    for idx in list(sc.common) + sc.empty:
        if idx[-1] >= n:
            raise UnresolvedReference(str(idx[-1]), "cover set index")


def _parse_frames(sc, arg, no, body):
    for lno, line, ind in body:
        m = _FRAME.match(line)
        if not m:
            raise ScenarioSyntaxError("expected '<new> = <old> * <matrix> on <chart>'", lno, ind + 1)
        vs = _chart(sc, m.group(4), lno)
        col = ind + m.start(3)
        mat = parse_matrix(m.group(3), "function", vs, lno, col)
        sc.frames.append(FrameRelation(m.group(2), m.group(1), m.group(4),
                                       tuple(tuple(r) for r in mat)))


def _parse_connection(sc, arg, no, body):
    if not arg.isdigit():
        raise ScenarioSyntaxError("connection header must name a cover set index", no, 2)
    i = int(arg)
    if i >= len(sc.home):
        raise UnresolvedReference(arg, f"line {no}: cover set")
    vs = sc.charts[sc.home[i]]
    frame, spec = None, None
    for lno, line, ind in body:
        key, rest, off = _kv(line)
        if key == "frame":
            frame = rest
        elif key == "trivial":
            spec = ("trivial", int(rest) if rest else 1, "", None)
        elif key == "distribution":
            if rest not in sc.distributions:
                raise UnresolvedReference(rest, f"line {lno}: distribution")
            spec = ("distribution", 1, rest, None)
        elif key == "theta":
            mat = parse_matrix(rest, "form", vs, lno, ind + off)
            spec = ("theta", len(mat), "", MatrixForm(vs, mat))
        else:
            raise ScenarioSyntaxError(f"unknown connection field {key!r}", lno, ind + 1)
    if frame is None or spec is None:
        raise SchemaError(f"[connection {i}] needs a frame and a construction")
    known = {r.old for r in sc.frames} | {r.new for r in sc.frames}
    if sc.frames and frame not in known:
        raise UnresolvedReference(frame, f"[connection {i}] frame")
    sc.connections[i] = ConnectionSpec(frame, spec[0], spec[1], spec[2], spec[3])


def _split_eq(line: str, lno: int, ind: int):
    head, eq, expr = line.partition("=")
    if not eq:
        raise ScenarioSyntaxError("expected '<key> = <value>'", lno, ind + 1)
    col = ind + len(head) + 1 + (len(expr) - len(expr.lstrip()))
    return head.split(), expr.strip(), col


def _parse_pairing(sc, arg, no, body):
    cover_idx = lambda s, lno, ind: _index(s, lno, ind + 1)
    for lno, line, ind in body:
        head, expr, col = _split_eq(line, lno, ind)
        if len(head) != 2:
            raise ScenarioSyntaxError("expected '<potential|set|pair> <index> = <form>'", lno, ind + 1)
        key, idx = head[0], cover_idx(head[1], lno, ind)
        vs = sc.cover().varset_of(idx)
        form = parse_form(expr, vs, lno, col)
        if key == "potential" and len(idx) == 1:
            sc.potentials[idx[0]] = form
        elif key == "set" and len(idx) == 1:
            sc.tau_sets[idx[0]] = form
        elif key == "pair" and len(idx) == 2:
            sc.tau_pairs[idx] = form
        else:
            raise ScenarioSyntaxError(f"bad pairing entry {key!r}", lno, ind + 1)


def _parse_cycle(sc, arg, no, body):
    idx = _index(arg, no, 8)
    chart, radii, orient, fixed, empty, note = None, [], 1, [], False, ""
    for lno, line, ind in body:
        key, rest, off = _kv(line)
        if key == "empty":
            empty = True
        elif key == "chart":
            chart = rest
            _chart(sc, rest, lno)
        elif key == "circle":
            parts = rest.split(None, 1)
            if len(parts) != 2:
                raise ScenarioSyntaxError("expected 'circle <var> <radius>'", lno, ind + 1)
            r = parse_scalar(parts[1], lno, ind + off + len(parts[0]) + 1)
            if not r.is_rational() or r.as_fraction() <= 0:
                raise ScenarioSyntaxError("radius must be a positive rational", lno, ind + off + 1)
            radii.append((parts[0], r.as_fraction()))
        elif key == "orientation":
            orient = int(rest)
        elif key == "fix":
            parts = rest.split(None, 1)
            fixed.append((parts[0], parse_scalar(parts[1], lno, ind + off + len(parts[0]) + 1)))
        elif key == "note":
            note = rest
        else:
            raise ScenarioSyntaxError(f"unknown cycle field {key!r}", lno, ind + 1)
    if empty:
        sc.cycles[idx] = None
    else:
        if chart is None or not radii:
            raise SchemaError(f"[cycle {arg}] needs a chart and at least one circle")
        vs = sc.charts[chart]
        for v, _ in radii + fixed:
            if v not in vs.holo:
                raise UnresolvedReference(v, f"[cycle {arg}] variable of chart {chart}")
        sc.cycles[idx] = TorusCycle(vs, tuple(radii), orient, tuple(fixed), chart)
    if note:
        sc.cycle_notes[idx] = note


def _parse_run(sc, arg, no, body):
    for lno, line, ind in body:
        key, rest, off = _kv(line)
        if key == "degree":
            sc.degree = int(rest)
        elif key == "special":
            sc.special = int(rest)
        else:
            raise ScenarioSyntaxError(f"unknown run field {key!r}", lno, ind + 1)


def _expect_chart(sc: Scenario, kind: str, args: List[str], lno: int) -> Optional[VarSet]:
    """Varset in which an expected form is written."""
    if "in" in args:
        return _chart(sc, args[args.index("in") + 1], lno)
    cov = sc.cover()
    if kind in ("theta", "curvature", "atiyah", "chern"):
        return cov.varset_of((int(args[0]),))
    if kind in ("diff", "xi"):
        return cov.varset_of(_index(args[0], lno, 1))
    if kind == "distribution":
        if args[0] not in sc.distributions:
            raise UnresolvedReference(args[0], f"line {lno}: distribution")
        return sc.charts[sc.distributions[args[0]].chart]
    return None


def _parse_expect(sc, arg, no, body):
    for lno, line, ind in body:
        tm = _TAG.search(line)
        if not tm:
            raise ScenarioSyntaxError("expectation needs a provenance tag [PAPER|TRIVIAL|DERIVED]",
                                      lno, ind + len(line))
        tag = tm.group(1)
        if tag not in TAGS:
            raise ScenarioSyntaxError(f"unknown provenance tag {tag!r}", lno, ind + tm.start(1) + 1)
        body_text = line[: tm.start()].rstrip()
        head, expr, col = _split_eq(body_text, lno, ind)
        if not head or head[0] not in EXPECT_KINDS:
            raise ScenarioSyntaxError(f"unknown expectation kind {head[0] if head else ''!r}", lno, ind + 1)
        kind, args = head[0], head[1:]
        if kind == "order":
            # order <chart> <point> : <function> = <int>
            rest = body_text.split("=", 1)[0]
            m = re.match(r"^order\s+(\w+)\s+(.+?)\s*:\s*(.+)$", rest.strip())
            if not m:
                raise ScenarioSyntaxError("expected 'order <chart> <point> : <function> = <int>'", lno, ind + 1)
            vs = _chart(sc, m.group(1), lno)
            point = parse_scalar(m.group(2), lno, ind + m.start(2))
            fn = parse_function(m.group(3), vs, lno, ind + m.start(3))
            value = (fn, point, int(expr))
            args = [m.group(1), m.group(2)]
        elif kind in ("relative", "closed"):
            if expr not in ("true", "false"):
                raise ScenarioSyntaxError("expected true or false", lno, col)
            value = expr == "true"
        elif kind == "residue":
            value = parse_scalar(expr, lno, col)
        elif expr == "nonzero":
            value = "nonzero"
        else:
            vs = _expect_chart(sc, kind, args, lno)
            if kind in ("theta", "curvature", "distribution"):
                mat = parse_matrix(expr, "form", vs, lno, col)
                value = MatrixForm(vs, mat)
            else:
                value = parse_form(expr, vs, lno, col)
        sc.expectations.append(Expectation(kind, tuple(args), value, tag, lno, expr))


def load_scenario(path) -> Scenario:
    return parse_scenario(Path(path).read_text())


# -- serialization -------------------------------------------------------------------

def _idx(idx) -> str:
    return "".join(str(i) for i in idx)


def _fmt_scalar(s: Scalar) -> str:
    return str(s)


def _fmt_matrix(m: MatrixForm) -> str:
    if m.size == 1:
        return str(m.entries[0][0])
    return "[" + ", ".join("[" + ", ".join(str(e) for e in r) + "]" for r in m.entries) + "]"


def _fmt_fn_matrix(rows) -> str:
    if len(rows) == 1 and len(rows[0]) == 1:
        return f"({rows[0][0]})"
    return "[" + ", ".join("[" + ", ".join(str(e) for e in r) + "]" for r in rows) + "]"


def serialize_scenario(sc: Scenario) -> str:
    out = [f"atiyah-scenario {SCHEMA_VERSION}", f"name {sc.name}"]
    if sc.description:
        out.append(f"description {sc.description}")
    for name, vs in sc.charts.items():
        out += ["", f"[chart {name}]", "vars " + " ".join(vs.holo)]
    for (a, b), m in sc.maps.items():
        out += ["", f"[map {a} -> {b}]"]
        out += [f"{k} = {m.components[k]}" for k in m.target.holo]
    for name, dist in sc.distributions.items():
        out += ["", f"[distribution {name}]", "ambient " + " ".join(dist.ambient.holo),
                f"dim {dist.dim}", f"chart {dist.chart}"]
        out += [f"gen {g}" for g in dist.generators]
    out += ["", "[cover]", "sets " + " ".join(sc.home)]
    out += [f"common {_idx(k)} {v}" for k, v in sc.common.items()]
    if sc.empty:
        out.append("empty " + " ".join(_idx(k) for k in sc.empty))
    if sc.frames:
        out += ["", "[frames]"]
        out += [f"{r.new} = {r.old} * {_fmt_fn_matrix(r.matrix)} on {r.chart}" for r in sc.frames]
    for i in sorted(sc.connections):
        spec = sc.connections[i]
        out += ["", f"[connection {i}]", f"frame {spec.frame}"]
        if spec.kind == "trivial":
            out.append(f"trivial {spec.rank}")
        elif spec.kind == "distribution":
            out.append(f"distribution {spec.distribution}")
        else:
            out.append(f"theta {_fmt_matrix(spec.theta)}")
    if sc.potentials or sc.tau_sets or sc.tau_pairs:
        out += ["", "[pairing]"]
        out += [f"potential {i} = {f}" for i, f in sc.potentials.items()]
        out += [f"set {i} = {f}" for i, f in sc.tau_sets.items()]
        out += [f"pair {_idx(k)} = {f}" for k, f in sc.tau_pairs.items()]
    for idx, cyc in sc.cycles.items():
        out += ["", f"[cycle {_idx(idx)}]"]
        if cyc is None:
            out.append("empty")
        else:
            out.append(f"chart {cyc.chart}")
            out += [f"circle {v} {r}" for v, r in cyc.radii]
            out.append(f"orientation {cyc.orientation}")
            out += [f"fix {v} {_fmt_scalar(c)}" for v, c in cyc.fixed]
        if idx in sc.cycle_notes:
            out.append(f"note {sc.cycle_notes[idx]}")
    out += ["", "[run]", f"degree {sc.degree}", f"special {sc.special}"]
    if sc.expectations:
        out += ["", "[expect]"]
        for e in sc.expectations:
            out.append(f"{_fmt_expect(e)} [{e.tag}]")
    return "\n".join(out) + "\n"


def _fmt_expect(e: Expectation) -> str:
    if e.kind == "order":
        fn, point, k = e.value
        return f"order {e.args[0]} {point} : {fn} = {k}"
    head = " ".join((e.kind,) + tuple(e.args))
    v = e.value
    if isinstance(v, bool):
        return f"{head} = {'true' if v else 'false'}"
    if isinstance(v, MatrixForm):
        return f"{head} = {_fmt_matrix(v)}"
    return f"{head} = {v}"


def same_content(a: Scenario, b: Scenario) -> bool:
    """Exact equality of everything a scenario carries (line numbers and source text aside)."""
    def strip(sc):
        return [(e.kind, e.args, e.value, e.tag) for e in sc.expectations]

    fields = ("name", "charts", "maps", "distributions", "home", "common", "frames",
              "potentials", "tau_sets", "tau_pairs", "cycles", "cycle_notes", "degree",
              "special", "description")
    for f in fields:
        if getattr(a, f) != getattr(b, f):
            return False
    if set(a.empty) != set(b.empty) or a.connections.keys() != b.connections.keys():
        return False
    for i in a.connections:
        x, y = a.connections[i], b.connections[i]
        if (x.frame, x.kind, x.rank, x.distribution) != (y.frame, y.kind, y.rank, y.distribution):
            return False
        if (x.theta is None) != (y.theta is None) or (x.theta is not None and x.theta != y.theta):
            return False
    ea, eb = strip(a), strip(b)
    if len(ea) != len(eb):
        return False
    for (k1, a1, v1, t1), (k2, a2, v2, t2) in zip(ea, eb):
        if (k1, a1, t1) != (k2, a2, t2):
            return False
        if k1 == "order":
            if not (v1[0] == v2[0] and v1[1] == v2[1] and v1[2] == v2[2]):
                return False
        elif not v1 == v2:
            return False
    return True
