"""Differential forms with rational coefficients on a single chart.

A term is keyed by the sorted tuple of generator slots it contains.  Slots
follow the VarSet layout: ``dz_i`` is slot ``i``, ``dz̄_i`` is slot ``n+i`` and
the differential of the j-th real parameter (``dt``) is slot ``2n+j``.  Signs
are absorbed into coefficients, so two forms are equal iff their
coefficients agree key by key.
"""

from __future__ import annotations

from bisect import bisect_left
from dataclasses import dataclass
from typing import Dict, Iterable, Mapping, Optional, Tuple

from .errors import DegreeError, VarSetMismatch
from .symcore import Poly, RationalFn, Scalar, VarSet

Key = Tuple[int, ...]


def _merge_sign(a: Key, b: Key):
    """Sorted concatenation of two generator tuples and the sign of the shuffle."""
    if not a:
        return b, 1
    if not b:
        return a, 1
    inversions = 0
    for y in b:
        pos = bisect_left(a, y)
        if pos < len(a) and a[pos] == y:
            return None, 0
        inversions += len(a) - pos
    return tuple(sorted(a + b)), (-1 if inversions & 1 else 1)


class Form:
    """Finite sum ``coef * d(slot_1) ∧ ... ∧ d(slot_k)``."""

    __slots__ = ("varset", "terms")
    __hash__ = None

    def __init__(self, varset: VarSet, terms: Optional[Mapping[Key, RationalFn]] = None):
        self.varset = varset
        self.terms: Dict[Key, RationalFn] = {}
        if terms:
            for k, c in terms.items():
                if not c.is_zero():
                    self.terms[tuple(k)] = c

    # -- constructors ---------------------------------------------------
    @classmethod
    def zero(cls, varset: VarSet) -> "Form":
        return cls(varset)

    @classmethod
    def function(cls, f) -> "Form":
        """A 0-form."""
        return cls(f.varset, {(): f})

    @classmethod
    def const(cls, varset: VarSet, c) -> "Form":
        return cls(varset, {(): RationalFn.const(varset, c)})

    @classmethod
    def dvar(cls, varset: VarSet, name: str) -> "Form":
        """``dz`` for a holomorphic name, ``dz̄`` for ``conj(z)``, ``dt`` for a real parameter."""
        return cls(varset, {(varset.index(name),): RationalFn.one(varset)})

    # -- structure ------------------------------------------------------
    def is_zero(self) -> bool:
        return not self.terms

    def bidegree_of(self, key: Key):
        n = self.varset.n
        p = sum(1 for s in key if s < n)
        q = sum(1 for s in key if n <= s < 2 * n)
        return p, q, len(key) - p - q

    def degrees(self):
        return {len(k) for k in self.terms}

    def degree(self) -> Optional[int]:
        """Total degree of a homogeneous form (None for the zero form)."""
        ds = self.degrees()
        if not ds:
            return None
        if len(ds) > 1:
            raise DegreeError(f"form is not homogeneous (degrees {sorted(ds)})")
        return ds.pop()

    def bidegrees(self):
        return {self.bidegree_of(k) for k in self.terms}

    def coefficient(self, *names: str) -> RationalFn:
        """Coefficient of ``d(names[0]) ∧ ...`` including the reordering sign."""
        slots = [self.varset.index(nm) for nm in names]
        key = tuple(sorted(slots))
        if len(set(slots)) != len(slots):
            return RationalFn.zero(self.varset)
        sign = _perm_sign(slots)
        c = self.terms.get(key)
        if c is None:
            return RationalFn.zero(self.varset)
        return c if sign > 0 else -c

    def is_antiholomorphic_free(self) -> bool:
        """No dz̄ and no z̄ anywhere."""
        n = self.varset.n
        return all(all(s < n or s >= 2 * n for s in k) and c.is_antiholomorphic_free()
                   for k, c in self.terms.items())

    # -- linear structure -------------------------------------------------
    def _check(self, other: "Form"):
        if other.varset != self.varset:
            raise VarSetMismatch(f"{self.varset!r} vs {other.varset!r}")

    def __add__(self, other):
        if not isinstance(other, Form):
            return NotImplemented
        self._check(other)
        if not other.terms:
            return self
        if not self.terms:
            return other
        out = dict(self.terms)
        for k, c in other.terms.items():
            out[k] = out[k] + c if k in out else c
        return Form(self.varset, out)

    def __neg__(self):
        return Form(self.varset, {k: -c for k, c in self.terms.items()})

    def __sub__(self, other):
        if not isinstance(other, Form):
            return NotImplemented
        return self + (-other)

    def scale(self, f) -> "Form":
        """Multiply by a function (RationalFn) or a Scalar."""
        if isinstance(f, Form):
            raise TypeError("use wedge for form products")
        if not isinstance(f, RationalFn):
            f = Scalar.coerce(f)
            if f.is_zero():
                return Form(self.varset)
            return Form(self.varset, {k: c * f for k, c in self.terms.items()})
        if f.varset != self.varset:
            raise VarSetMismatch(f"{f.varset!r} vs {self.varset!r}")
        if f.is_zero():
            return Form(self.varset)
        return Form(self.varset, {k: c * f for k, c in self.terms.items()})

    def __mul__(self, other):
        if isinstance(other, Form):
            return wedge(self, other)
        return self.scale(other)

    def __rmul__(self, other):
        return self.scale(other)

    def __truediv__(self, f):
        if isinstance(f, RationalFn):
            return self.scale(f.inv())
        return self.scale(Scalar.coerce(f).inv())

    def __eq__(self, other):
        if not isinstance(other, Form):
            if isinstance(other, int) and other == 0:
                return self.is_zero()
            return NotImplemented
        if other.varset != self.varset:
            return False
        keys = set(self.terms) | set(other.terms)
        for k in keys:
            a = self.terms.get(k)
            b = other.terms.get(k)
            if a is None:
                if not b.is_zero():
                    return False
            elif b is None:
                if not a.is_zero():
                    return False
            elif not a == b:
                return False
        return True

    def map_coefficients(self, fn) -> "Form":
        return Form(self.varset, {k: fn(c) for k, c in self.terms.items()})

    def __str__(self):
        return format_form(self)

    def __repr__(self):
        return f"Form({self})"


def _perm_sign(seq) -> int:
    seq = list(seq)
    sign = 1
    for i in range(len(seq)):
        for j in range(i + 1, len(seq)):
            if seq[i] > seq[j]:
                sign = -sign
    return sign


def wedge(a: Form, b: Form) -> Form:
    a._check(b)
    out: Dict[Key, RationalFn] = {}
    for ka, ca in a.terms.items():
        for kb, cb in b.terms.items():
            key, sign = _merge_sign(ka, kb)
            if key is None:
                continue
            c = ca * cb
            if sign < 0:
                c = -c
            out[key] = out[key] + c if key in out else c
    return Form(a.varset, out)


def _apply_d(a: Form, slots: Iterable[int]) -> Form:
    slots = list(slots)
    out: Dict[Key, RationalFn] = {}
    for key, c in a.terms.items():
        for s in slots:
            if s in key:
                continue
            dc = c.diff(s)
            if dc.is_zero():
                continue
            pos = bisect_left(key, s)
            if pos & 1:
                dc = -dc
            nk = key[:pos] + (s,) + key[pos:]
            out[nk] = out[nk] + dc if nk in out else dc
    return Form(a.varset, out)


def dbar(a: Form) -> Form:
    n = a.varset.n
    return _apply_d(a, range(n, 2 * n))


def del_(a: Form) -> Form:
    return _apply_d(a, range(a.varset.n))


def d(a: Form) -> Form:
    """Full exterior derivative, including dt∧∂/∂t for real parameters."""
    return _apply_d(a, range(a.varset.size))


def type_component(a: Form, p: int, q: int) -> Form:
    """Terms with exactly p dz's, q dz̄'s and no real-parameter differential."""
    return Form(a.varset, {k: c for k, c in a.terms.items() if a.bidegree_of(k) == (p, q, 0)})


def real_part_component(a: Form) -> Form:
    """Terms containing a real-parameter differential (the dt-part)."""
    return Form(a.varset, {k: c for k, c in a.terms.items() if a.bidegree_of(k)[2]})


@dataclass(frozen=True)
class ChartMap:
    """Holomorphic map ``source -> target`` given by target coordinates as
    rational functions of the source holomorphic coordinates.  Pulls forms
    on the target back to the source."""

    source: VarSet
    target: VarSet
    components: Mapping[str, RationalFn]

    def __post_init__(self):
        for name in self.target.holo:
            if name not in self.components:
                raise ValueError(f"chart map does not define target coordinate {name!r}")
        for name, f in self.components.items():
            if name not in self.target.holo:
                raise ValueError(f"{name!r} is not a holomorphic coordinate of the target")
            if f.varset != self.source:
                raise VarSetMismatch(f"component {name!r} not over the source chart")
            n = self.source.n
            if any(f.depends_on(s) for s in range(n, self.source.size)):
                raise ValueError(f"component {name!r} is not holomorphic in the source coordinates")

    def with_real(self, name: str) -> "ChartMap":
        src = self.source.with_real(name)
        tgt = self.target.with_real(name)
        comps = {k: _extend(f, src) for k, f in self.components.items()}
        return ChartMap(src, tgt, comps)

    def compose(self, after: "ChartMap") -> "ChartMap":
        """``after ∘ self``: source of self -> target of after."""
        if after.source != self.target:
            raise VarSetMismatch("chart maps do not compose")
        comps = {k: f.substitute(self.components, self.source) for k, f in after.components.items()}
        return ChartMap(self.source, after.target, comps)


def _extend(f: RationalFn, vs: VarSet) -> RationalFn:
    """Re-home a rational function into a VarSet that has extra real parameters."""
    if f.varset == vs:
        return f
    old = f.varset
    slot_map = [vs.index(name) for name in old.names]

    def lift(p: Poly) -> Poly:
        terms = {}
        for e, c in p.terms.items():
            e2 = [0] * vs.size
            for i, k in enumerate(e):
                e2[slot_map[i]] = k
            terms[tuple(e2)] = c
        return Poly(vs, terms)

    return RationalFn(lift(f.num), {lift(q): m for q, m in f.den.items()})


def extend_form(a: Form, vs: VarSet) -> Form:
    if a.varset == vs:
        return a
    old = a.varset
    slot_map = [vs.index(name) for name in old.names]
    return Form(vs, {tuple(sorted(slot_map[s] for s in k)): _extend(c, vs) for k, c in a.terms.items()})


def restrict_form(a: Form, vs: VarSet) -> Form:
    """Inverse of :func:`extend_form`; the form must not involve the dropped variables."""
    if a.varset == vs:
        return a
    old = a.varset
    slot_map = {}
    for i, name in enumerate(old.names):
        if name in vs:
            slot_map[i] = vs.index(name)

    def drop(p: Poly) -> Poly:
        terms = {}
        for e, c in p.terms.items():
            e2 = [0] * vs.size
            for i, k in enumerate(e):
                if k:
                    if i not in slot_map:
                        raise DegreeError(f"form still depends on {old.names[i]!r}")
                    e2[slot_map[i]] = k
            terms[tuple(e2)] = c
        return Poly(vs, terms)

    out = {}
    for k, c in a.terms.items():
        if any(s not in slot_map for s in k):
            raise DegreeError("form still contains a dropped differential")
        out[tuple(slot_map[s] for s in k)] = RationalFn(drop(c.num), {drop(q): m for q, m in c.den.items()})
    return Form(vs, out)


def pullback(m: ChartMap, a: Form) -> Form:
    if a.varset != m.target:
        if a.varset.without_real() == m.target and a.varset.real:
            for r in a.varset.real:
                m = m.with_real(r)
        else:
            raise VarSetMismatch(f"form lives on {a.varset!r}, map targets {m.target!r}")
    src, tgt = m.source, m.target
    n_t, n_s = tgt.n, src.n
    images: Dict[int, Form] = {}

    def image(slot: int) -> Form:
        if slot in images:
            return images[slot]
        if slot < n_t:
            phi = m.components[tgt.holo[slot]]
            terms = {(j,): phi.diff(j) for j in range(n_s)}
        elif slot < 2 * n_t:
            phi = m.components[tgt.holo[slot - n_t]]
            terms = {(n_s + j,): phi.diff(j).conjugate() for j in range(n_s)}
        else:
            name = tgt.real[slot - 2 * n_t]
            terms = {(src.index(name),): RationalFn.one(src)}
        images[slot] = Form(src, terms)
        return images[slot]

    out = Form(src)
    for key, c in a.terms.items():
        term = Form.function(c.substitute(m.components, src))
        for s in key:
            term = wedge(term, image(s))
            if term.is_zero():
                break
        out = out + term
    return out


def format_form(a: Form) -> str:
    """Canonical text in the scenario expression grammar."""
    if not a.terms:
        return "0"
    vs = a.varset
    n = vs.n
    parts = []
    for key in sorted(a.terms, key=lambda k: (len(k), k)):
        gens = []
        for s in key:
            if s < n:
                gens.append(f"d{vs.holo[s]}")
            elif s < 2 * n:
                gens.append(f"conj(d{vs.holo[s - n]})")
            else:
                gens.append(f"d{vs.real[s - 2 * n]}")
        coef = str(a.terms[key])
        if gens:
            parts.append(f"({coef})*" + "*".join(gens))
        else:
            parts.append(f"({coef})")
    return " + ".join(parts)


def conjugate_form(a: Form) -> Form:
    """Complex conjugate: swaps dz_i and dz̄_i and conjugates coefficients."""
    n = a.varset.n
    out: Dict[Key, RationalFn] = {}
    for key, c in a.terms.items():
        img = [s + n if s < n else s - n if s < 2 * n else s for s in key]
        c = c.conjugate()
        out[tuple(sorted(img))] = c if _perm_sign(img) > 0 else -c
    return Form(a.varset, out)


class VectorField:
    """Holomorphic vector field: holomorphic coordinate name -> coefficient."""

    __hash__ = None

    def __init__(self, varset: VarSet, components: Optional[Dict[str, RationalFn]] = None):
        self.varset = varset
        self.components = {k: v for k, v in (components or {}).items() if not v.is_zero()}

    def __getitem__(self, name) -> RationalFn:
        return self.components.get(name, RationalFn.zero(self.varset))

    def __add__(self, other: "VectorField"):
        out = dict(self.components)
        for k, v in other.components.items():
            out[k] = out[k] + v if k in out else v
        return VectorField(self.varset, out)

    def __neg__(self):
        return VectorField(self.varset, {k: -v for k, v in self.components.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, f) -> "VectorField":
        return VectorField(self.varset, {k: v * f for k, v in self.components.items()})

    def __eq__(self, other):
        if not isinstance(other, VectorField):
            return NotImplemented
        return all(self[k] == other[k] for k in set(self.components) | set(other.components))

    def __str__(self):
        if not self.components:
            return "0"
        return " + ".join(f"({self.components[k]})*D[{k}]" for k in self.varset.holo if k in self.components)

    def __repr__(self):
        return f"VectorField({self})"
