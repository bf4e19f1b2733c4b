"""Exact scalar, polynomial and rational-function arithmetic.

Scalars live in Q(i)[pi, 1/pi]: pi is a formal symbol that is only ever
turned into a float by :meth:`Scalar.to_complex`.  Polynomials are Laurent
polynomials in the variables of a :class:`VarSet` (holomorphic names, their
formal conjugates, and real parameters such as ``t``).  Rational functions
keep their denominators as a product of normalised factors; there is no
multivariate gcd, equality is decided by cross-multiplication.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Dict, Iterable, Mapping, Optional, Sequence, Tuple

from .errors import (
    DivByZero,
    NotInvertible,
    NumericPole,
    SingularSubstitution,
    UnknownVariable,
    VarSetMismatch,
)

_ZERO = Fraction(0)
_ONE = Fraction(1)


def _to_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    raise TypeError(f"cannot convert {x!r} to an exact rational")


class Scalar:
    """Gaussian-rational Laurent polynomial in the formal symbol pi.

    ``terms`` maps a pi-exponent to a pair ``(re, im)`` of Fractions; zero
    coefficients are never stored.
    """

    __slots__ = ("terms",)

    def __init__(self, value=0):
        if isinstance(value, Scalar):
            self.terms = value.terms
        elif isinstance(value, Mapping):
            self.terms = {k: (re, im) for k, (re, im) in value.items() if re or im}
        else:
            q = _to_fraction(value)
            self.terms = {0: (q, _ZERO)} if q else {}

    @classmethod
    def _raw(cls, terms: dict) -> "Scalar":
        s = object.__new__(cls)
        s.terms = terms
        return s

    @classmethod
    def coerce(cls, x) -> "Scalar":
        return x if isinstance(x, Scalar) else cls(x)

    @classmethod
    def gaussian(cls, re=0, im=0, pi_power: int = 0) -> "Scalar":
        re, im = _to_fraction(re), _to_fraction(im)
        return cls._raw({pi_power: (re, im)} if (re or im) else {})

    # -- predicates -----------------------------------------------------
    def is_zero(self) -> bool:
        return not self.terms

    def is_one(self) -> bool:
        return self.terms == {0: (_ONE, _ZERO)}

    def is_rational(self) -> bool:
        return not self.terms or (list(self.terms) == [0] and self.terms[0][1] == 0)

    def as_fraction(self) -> Fraction:
        if not self.is_rational():
            raise ValueError(f"{self} is not a rational number")
        return self.terms[0][0] if self.terms else _ZERO

    def is_gaussian(self) -> bool:
        """True when no power of pi appears."""
        return not self.terms or list(self.terms) == [0]

    def is_monomial(self) -> bool:
        return len(self.terms) == 1

    # -- arithmetic -----------------------------------------------------
    def __add__(self, other):
        if not isinstance(other, Scalar):
            try:
                other = Scalar(other)
            except TypeError:
                return NotImplemented
        if not other.terms:
            return self
        if not self.terms:
            return other
        out = dict(self.terms)
        for k, (re, im) in other.terms.items():
            if k in out:
                a, b = out[k]
                a, b = a + re, b + im
                if a or b:
                    out[k] = (a, b)
                else:
                    del out[k]
            else:
                out[k] = (re, im)
        return Scalar._raw(out)

    __radd__ = __add__

    def __neg__(self):
        return Scalar._raw({k: (-re, -im) for k, (re, im) in self.terms.items()})

    def __sub__(self, other):
        if not isinstance(other, Scalar):
            try:
                other = Scalar(other)
            except TypeError:
                return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return Scalar(other) - self

    def __mul__(self, other):
        if not isinstance(other, Scalar):
            try:
                other = Scalar(other)
            except TypeError:
                return NotImplemented
        if not self.terms or not other.terms:
            return ZERO
        if len(self.terms) == 1 and len(other.terms) == 1:
            (k1, (a, b)), = self.terms.items()
            (k2, (c, d)), = other.terms.items()
            return Scalar._raw({k1 + k2: (a * c - b * d, a * d + b * c)})
        out: dict = {}
        for k1, (a, b) in self.terms.items():
            for k2, (c, d) in other.terms.items():
                k = k1 + k2
                re, im = a * c - b * d, a * d + b * c
                if k in out:
                    e, f = out[k]
                    out[k] = (e + re, f + im)
                else:
                    out[k] = (re, im)
        return Scalar._raw({k: v for k, v in out.items() if v[0] or v[1]})

    __rmul__ = __mul__

    def inv(self) -> "Scalar":
        if not self.terms:
            raise NotInvertible("cannot invert the zero scalar")
        if len(self.terms) != 1:
            raise NotInvertible(f"{self} has several pi-graded terms; no inverse in Q(i)[pi, 1/pi]")
        (k, (a, b)), = self.terms.items()
        n = a * a + b * b
        return Scalar._raw({-k: (a / n, -b / n)})

    def __truediv__(self, other):
        return self * Scalar.coerce(other).inv()

    def __rtruediv__(self, other):
        return Scalar(other) * self.inv()

    def __pow__(self, n: int):
        if n < 0:
            return self.inv() ** (-n)
        out = ONE
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def conjugate(self) -> "Scalar":
        return Scalar._raw({k: (re, -im) for k, (re, im) in self.terms.items()})

    def abs2_gaussian(self) -> Fraction:
        """|s|^2 for a pi-free scalar."""
        if not self.is_gaussian():
            raise ValueError("modulus of a pi-dependent scalar is not rational")
        if not self.terms:
            return _ZERO
        re, im = self.terms[0]
        return re * re + im * im

    def to_complex(self) -> complex:
        total = 0j
        for k, (re, im) in self.terms.items():
            total += complex(float(re), float(im)) * math.pi ** k
        return total

    # -- comparison -----------------------------------------------------
    def __eq__(self, other):
        if isinstance(other, Scalar):
            return self.terms == other.terms
        try:
            return self.terms == Scalar(other).terms
        except TypeError:
            return NotImplemented

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __bool__(self):
        return bool(self.terms)

    # -- text -----------------------------------------------------------
    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for k in sorted(self.terms):
            re, im = self.terms[k]
            if im == 0:
                coef = str(re)
            elif re == 0:
                coef = "i" if im == 1 else ("-i" if im == -1 else f"{im}*i")
            else:
                coef = f"({re}+{im}*i)" if im > 0 else f"({re}-{-im}*i)"
            if k == 0:
                parts.append(coef)
            else:
                pk = "pi" if k == 1 else f"pi^{k}" if k > 0 else f"pi^({k})"
                if coef == "1":
                    parts.append(pk)
                elif coef == "-1":
                    parts.append(f"-{pk}")
                else:
                    parts.append(f"{coef}*{pk}")
        out = parts[0]
        for p in parts[1:]:
            out += p if p.startswith("-") else "+" + p
        return out

    def __repr__(self):
        return f"Scalar({self})"


ZERO = Scalar()
ONE = Scalar(1)
I = Scalar.gaussian(0, 1)
PI = Scalar.gaussian(1, 0, 1)
#: the ubiquitous normalisation sqrt(-1)/(2 pi)
I_OVER_2PI = Scalar.gaussian(0, Fraction(1, 2), -1)


def scalar_arith(a, b, op: str) -> Scalar:
    """Dispatch helper: ``op`` in {add, mul, neg, inv}; ``b`` unused for unary ops."""
    a = Scalar.coerce(a)
    if op == "add":
        return a + Scalar.coerce(b)
    if op == "mul":
        return a * Scalar.coerce(b)
    if op == "neg":
        return -a
    if op == "inv":
        return a.inv()
    raise ValueError(f"unknown scalar op {op!r}")


class VarSet:
    """Ordered chart variables: holomorphic names, paired conjugates, real parameters.

    Variable slots are laid out as ``holo + conj + real``; the conjugate of
    slot ``i < n`` is ``n + i``.
    """

    __slots__ = ("holo", "conj", "real", "_index", "_hash")

    def __init__(self, holo: Sequence[str], real: Sequence[str] = (), conj: Optional[Sequence[str]] = None):
        self.holo = tuple(holo)
        self.conj = tuple(conj) if conj is not None else tuple(f"conj({h})" for h in self.holo)
        self.real = tuple(real)
        if len(self.conj) != len(self.holo):
            raise ValueError("conjugate names must pair 1:1 with holomorphic names")
        names = self.holo + self.conj + self.real
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate variable names in {names}")
        self._index = {name: i for i, name in enumerate(names)}
        self._hash = hash((self.holo, self.conj, self.real))

    @property
    def n(self) -> int:
        return len(self.holo)

    @property
    def size(self) -> int:
        return 2 * len(self.holo) + len(self.real)

    @property
    def names(self) -> Tuple[str, ...]:
        return self.holo + self.conj + self.real

    def index(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise UnknownVariable(f"unknown variable {name!r} (known: {', '.join(self.names)})") from None

    def __contains__(self, name):
        return name in self._index

    def conj_slot(self, i: int) -> int:
        n = self.n
        if i < n:
            return i + n
        if i < 2 * n:
            return i - n
        return i

    def with_real(self, name: str) -> "VarSet":
        if name in self.real:
            return self
        return VarSet(self.holo, self.real + (name,), self.conj)

    def without_real(self) -> "VarSet":
        return VarSet(self.holo, (), self.conj)

    def __eq__(self, other):
        return isinstance(other, VarSet) and self._hash == other._hash and (
            self.holo, self.conj, self.real) == (other.holo, other.conj, other.real)

    def __hash__(self):
        return self._hash

    def __repr__(self):
        extra = f", real={list(self.real)}" if self.real else ""
        return f"VarSet({list(self.holo)}{extra})"


def _check_same(a, b):
    if a.varset is not b.varset and a.varset != b.varset:
        raise VarSetMismatch(f"{a.varset!r} vs {b.varset!r}")


class Poly:
    """Laurent polynomial: exponent tuple (one slot per VarSet variable) -> Scalar."""

    __slots__ = ("varset", "terms")

    def __init__(self, varset: VarSet, terms: Optional[Mapping[tuple, Scalar]] = None):
        self.varset = varset
        self.terms = {} if terms is None else {e: c for e, c in terms.items() if c.terms}

    @classmethod
    def _raw(cls, varset, terms):
        p = object.__new__(cls)
        p.varset = varset
        p.terms = terms
        return p

    @classmethod
    def const(cls, varset: VarSet, c) -> "Poly":
        c = Scalar.coerce(c)
        return cls._raw(varset, {(0,) * varset.size: c} if c.terms else {})

    @classmethod
    def var(cls, varset: VarSet, name: str, power: int = 1) -> "Poly":
        e = [0] * varset.size
        e[varset.index(name)] = power
        return cls._raw(varset, {tuple(e): ONE})

    @classmethod
    def monomial(cls, varset: VarSet, exps: Sequence[int], c=1) -> "Poly":
        c = Scalar.coerce(c)
        return cls._raw(varset, {tuple(exps): c} if c.terms else {})

    # -- queries --------------------------------------------------------
    def is_zero(self) -> bool:
        return not self.terms

    def is_const(self) -> bool:
        return not self.terms or (len(self.terms) == 1 and not any(next(iter(self.terms))))

    def const_value(self) -> Scalar:
        if not self.terms:
            return ZERO
        if not self.is_const():
            raise ValueError("polynomial is not constant")
        return next(iter(self.terms.values()))

    def min_exps(self) -> tuple:
        it = iter(self.terms)
        lo = list(next(it))
        for e in it:
            for i, x in enumerate(e):
                if x < lo[i]:
                    lo[i] = x
        return tuple(lo)

    def max_exps(self) -> tuple:
        it = iter(self.terms)
        hi = list(next(it))
        for e in it:
            for i, x in enumerate(e):
                if x > hi[i]:
                    hi[i] = x
        return tuple(hi)

    def depends_on(self, slot: int) -> bool:
        return any(e[slot] for e in self.terms)

    def lead(self) -> tuple:
        return max(self.terms)

    # -- arithmetic -----------------------------------------------------
    def __add__(self, other: "Poly") -> "Poly":
        if not other.terms:
            return self
        if not self.terms:
            return other
        out = dict(self.terms)
        for e, c in other.terms.items():
            if e in out:
                s = out[e] + c
                if s.terms:
                    out[e] = s
                else:
                    del out[e]
            else:
                out[e] = c
        return Poly._raw(self.varset, out)

    def __neg__(self):
        return Poly._raw(self.varset, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other: "Poly") -> "Poly":
        if not self.terms or not other.terms:
            return Poly._raw(self.varset, {})
        out: dict = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                c = c1 * c2
                if e in out:
                    out[e] = out[e] + c
                else:
                    out[e] = c
        return Poly._raw(self.varset, {e: c for e, c in out.items() if c.terms})

    def scale(self, c: Scalar) -> "Poly":
        if not c.terms:
            return Poly._raw(self.varset, {})
        if c.is_one():
            return self
        return Poly._raw(self.varset, {e: v * c for e, v in self.terms.items()})

    def shift(self, exps: Sequence[int]) -> "Poly":
        """Multiply by the monomial with exponent vector ``exps``."""
        if not any(exps):
            return self
        return Poly._raw(self.varset, {tuple(a + b for a, b in zip(e, exps)): c for e, c in self.terms.items()})

    def __pow__(self, n: int) -> "Poly":
        if n < 0:
            raise ValueError("negative power of a Poly; use RationalFn")
        out = Poly.const(self.varset, 1)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def diff(self, slot: int) -> "Poly":
        out = {}
        for e, c in self.terms.items():
            k = e[slot]
            if k:
                e2 = list(e)
                e2[slot] = k - 1
                out[tuple(e2)] = c * k
        return Poly._raw(self.varset, out)

    def conjugate(self) -> "Poly":
        vs = self.varset
        perm = [vs.conj_slot(i) for i in range(vs.size)]
        out = {}
        for e, c in self.terms.items():
            e2 = [0] * len(e)
            for i, x in enumerate(e):
                e2[perm[i]] = x
            out[tuple(e2)] = c.conjugate()
        return Poly._raw(vs, out)

    def divide_exact(self, divisor: "Poly") -> Optional["Poly"]:
        """Quotient if ``divisor`` divides ``self`` exactly, else None.

        ``divisor`` must be an honest polynomial (no negative exponents);
        ``self`` may be Laurent.  Lex-order long division that aborts on the
        first non-divisible leading term.
        """
        if not self.terms:
            return self
        lo = self.min_exps()
        offset = tuple(min(0, x) for x in lo)
        rem = self.shift(tuple(-x for x in offset)) if any(offset) else self
        dmax = divisor.max_exps()
        rmax = rem.max_exps()
        if any(a > b for a, b in zip(dmax, rmax)):
            return None
        lt = divisor.lead()
        lc_inv = divisor.terms[lt]
        if not lc_inv.is_monomial():
            return None
        lc_inv = lc_inv.inv()
        quot: dict = {}
        rem_terms = dict(rem.terms)
        dterms = list(divisor.terms.items())
        while rem_terms:
            e = max(rem_terms)
            q = tuple(a - b for a, b in zip(e, lt))
            if any(x < 0 for x in q):
                return None
            c = rem_terms[e] * lc_inv
            quot[q] = c
            for de, dc in dterms:
                k = tuple(a + b for a, b in zip(q, de))
                v = rem_terms.get(k)
                v = -(dc * c) if v is None else v - dc * c
                if v.terms:
                    rem_terms[k] = v
                else:
                    rem_terms.pop(k, None)
        result = Poly._raw(self.varset, quot)
        return result.shift(offset) if any(offset) else result

    def eval(self, values: Sequence):
        """Numeric evaluation; ``values`` holds one number (or ndarray) per slot."""
        total = 0
        for e, c in self.terms.items():
            term = c.to_complex()
            for v, k in zip(values, e):
                if k:
                    term = term * v ** k
            total = total + term
        return total

    # -- comparison -----------------------------------------------------
    def __eq__(self, other):
        return isinstance(other, Poly) and self.varset == other.varset and self.terms == other.terms

    def __hash__(self):
        return hash((self.varset, frozenset(self.terms.items())))

    def sort_key(self):
        return tuple(sorted((e, str(c)) for e, c in self.terms.items()))

    # -- text -----------------------------------------------------------
    def __str__(self):
        if not self.terms:
            return "0"
        names = self.varset.names
        parts = []
        for e in sorted(self.terms, reverse=True):
            c = self.terms[e]
            mono = []
            for name, k in zip(names, e):
                if k == 1:
                    mono.append(name)
                elif k:
                    mono.append(f"{name}^{k}" if k > 0 else f"{name}^({k})")
            cs = str(c)
            if not mono:
                parts.append(cs)
                continue
            m = "*".join(mono)
            if cs == "1":
                parts.append(m)
            elif cs == "-1":
                parts.append("-" + m)
            elif len(c.terms) > 1 or ("+" in cs[1:] or "-" in cs[1:]) and not cs.startswith("("):
                parts.append(f"({cs})*{m}")
            else:
                parts.append(f"{cs}*{m}")
        out = parts[0]
        for p in parts[1:]:
            out += p if p.startswith("-") else "+" + p
        return out

    def __repr__(self):
        return f"Poly({self})"


def _normalize_factor(p: Poly):
    """Split ``p`` as ``c * x^e * q`` with ``q`` free of monomial content.

    ``q`` is made monic in its lex-leading term when that coefficient is
    invertible.  Returns ``(c, e, q)`` with ``q`` None when ``p`` is a monomial.
    """
    lo = p.min_exps()
    q = p.shift(tuple(-x for x in lo)) if any(lo) else p
    if q.is_const():
        return q.const_value(), lo, None
    lc = q.terms[q.lead()]
    if lc.is_monomial():
        q = q.scale(lc.inv())
        return lc, lo, q
    return ONE, lo, q


def _factor_product(vs: VarSet, factors: Mapping[Poly, int]) -> Poly:
    out = Poly.const(vs, 1)
    for q, m in factors.items():
        out = out * q ** m
    return out


class RationalFn:
    """``num / prod(q**m)`` with a Laurent-polynomial numerator.

    Denominator factors are honest polynomials without monomial content
    (monomials are absorbed into the numerator as negative exponents).
    Normalisation is best-effort: trial division of the numerator by the
    stored factors.  Equality is decided by cross-multiplication.
    """

    __slots__ = ("varset", "num", "den")
    __hash__ = None  # no canonical form, so no hash

    def __init__(self, num: Poly, den: Optional[Mapping[Poly, int]] = None):
        self.varset = num.varset
        self.num = num
        self.den = dict(den) if den else {}

    # -- constructors ---------------------------------------------------
    @classmethod
    def const(cls, varset: VarSet, c) -> "RationalFn":
        return cls(Poly.const(varset, c))

    @classmethod
    def var(cls, varset: VarSet, name: str) -> "RationalFn":
        return cls(Poly.var(varset, name))

    @classmethod
    def zero(cls, varset: VarSet) -> "RationalFn":
        return cls(Poly(varset))

    @classmethod
    def one(cls, varset: VarSet) -> "RationalFn":
        return cls.const(varset, 1)

    @classmethod
    def make(cls, num: Poly, dens: Iterable[Tuple[Poly, int]] = ()) -> "RationalFn":
        """Build ``num / prod(p**m)`` from arbitrary polynomials, normalising factors."""
        factors: Dict[Poly, int] = {}
        vs = num.varset
        for p, m in dens:
            if p.is_zero():
                raise DivByZero("zero denominator")
            c, e, q = _normalize_factor(p)
            num = num.shift(tuple(-m * x for x in e))
            num = num.scale(c.inv() ** m) if c.is_monomial() else num
            if not c.is_monomial():
                # non-invertible constant content stays as its own factor
                cq = Poly.const(vs, c)
                factors[cq] = factors.get(cq, 0) + m
            if q is not None:
                factors[q] = factors.get(q, 0) + m
        return cls._cancel(num, factors)

    @classmethod
    def _cancel(cls, num: Poly, factors: Dict[Poly, int]) -> "RationalFn":
        if num.is_zero():
            return cls(num)
        out = {}
        for q, m in factors.items():
            while m:
                quot = num.divide_exact(q)
                if quot is None:
                    break
                num = quot
                m -= 1
            if m:
                out[q] = m
        return cls(num, out)

    @classmethod
    def coerce(cls, varset: VarSet, x) -> "RationalFn":
        if isinstance(x, RationalFn):
            return x
        if isinstance(x, Poly):
            return cls(x)
        return cls.const(varset, x)

    # -- queries --------------------------------------------------------
    def is_zero(self) -> bool:
        return self.num.is_zero()

    def is_const(self) -> bool:
        return not self.den and self.num.is_const()

    def const_value(self) -> Scalar:
        return self.num.const_value()

    def den_poly(self) -> Poly:
        return _factor_product(self.varset, self.den)

    def depends_on(self, slot: int) -> bool:
        return self.num.depends_on(slot) or any(q.depends_on(slot) for q in self.den)

    def is_antiholomorphic_free(self) -> bool:
        """True when no conjugate variable appears."""
        n = self.varset.n
        return not any(self.depends_on(n + i) for i in range(n))

    # -- arithmetic -----------------------------------------------------
    def _lift(self, other):
        if isinstance(other, RationalFn):
            _check_same(self, other)
            return other
        if isinstance(other, Poly):
            return RationalFn(other)
        return RationalFn.const(self.varset, other)

    def __add__(self, other):
        other = self._lift(other)
        if other.num.is_zero():
            return self
        if self.num.is_zero():
            return other
        if not self.den and not other.den:
            return RationalFn(self.num + other.num)
        lcm = dict(self.den)
        for q, m in other.den.items():
            if lcm.get(q, 0) < m:
                lcm[q] = m
        a = self.num
        for q, m in lcm.items():
            k = m - self.den.get(q, 0)
            if k:
                a = a * q ** k
        b = other.num
        for q, m in lcm.items():
            k = m - other.den.get(q, 0)
            if k:
                b = b * q ** k
        return RationalFn._cancel(a + b, lcm)

    __radd__ = __add__

    def __neg__(self):
        return RationalFn(-self.num, self.den)

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) - self

    def __mul__(self, other):
        if isinstance(other, Scalar) or isinstance(other, (int, Fraction)):
            c = Scalar.coerce(other)
            return RationalFn(self.num.scale(c), self.den) if c.terms else RationalFn.zero(self.varset)
        other = self._lift(other)
        if self.num.is_zero() or other.num.is_zero():
            return RationalFn.zero(self.varset)
        num = self.num * other.num
        if not self.den and not other.den:
            return RationalFn(num)
        den = dict(self.den)
        for q, m in other.den.items():
            den[q] = den.get(q, 0) + m
        # only factors that one side brought can cancel against the other numerator
        return RationalFn._cancel(num, den)

    __rmul__ = __mul__

    def inv(self) -> "RationalFn":
        if self.num.is_zero():
            raise DivByZero("division by the zero rational function")
        num = self.den_poly()
        return RationalFn.make(num, [(self.num, 1)])

    def __truediv__(self, other):
        other = self._lift(other)
        if other.num.is_zero():
            raise DivByZero("division by the zero rational function")
        if other.is_const():
            c = other.const_value()
            if c.is_monomial():
                return self * c.inv()
        return self * other.inv()

    def __rtruediv__(self, other):
        return self._lift(other) / self

    def __pow__(self, n: int) -> "RationalFn":
        if n < 0:
            return self.inv() ** (-n)
        out = RationalFn.one(self.varset)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    # -- comparison -----------------------------------------------------
    def __eq__(self, other):
        if not isinstance(other, RationalFn):
            try:
                other = self._lift(other)
            except (TypeError, VarSetMismatch):
                return NotImplemented
        elif other.varset != self.varset:
            return False
        if self.den == other.den:
            return self.num == other.num
        return (self - other).num.is_zero()

    # -- calculus -------------------------------------------------------
    def diff(self, var) -> "RationalFn":
        """Exact partial derivative by name or slot index."""
        slot = var if isinstance(var, int) else self.varset.index(var)
        if not 0 <= slot < self.varset.size:
            raise UnknownVariable(f"slot {slot} out of range")
        dn = self.num.diff(slot)
        if not self.den:
            return RationalFn(dn)
        # (N/D)' = (N' * prod q  -  N * sum m q' prod_{q2 != q} q2) / (D * prod q)
        qs = [q for q in self.den if q.depends_on(slot)]
        if not qs:
            return RationalFn(dn, self.den)
        prod_q = _factor_product(self.varset, {q: 1 for q in qs})
        total = dn * prod_q
        for q in qs:
            rest = _factor_product(self.varset, {q2: 1 for q2 in qs if q2 is not q})
            total = total - (self.num * q.diff(slot) * rest).scale(Scalar(self.den[q]))
        den = dict(self.den)
        for q in qs:
            den[q] += 1
        return RationalFn._cancel(total, den)

    def conjugate(self) -> "RationalFn":
        return RationalFn.make(self.num.conjugate(), [(q.conjugate(), m) for q, m in self.den.items()])

    def substitute(self, mapping: Mapping[str, "RationalFn"], target: Optional[VarSet] = None) -> "RationalFn":
        """Compose with ``mapping`` (holomorphic name -> RationalFn over ``target``).

        Conjugate variables substitute through ``conjugate(mapping)``; real
        parameters map to the same-named parameter of ``target`` unless mapped.
        """
        vs = self.varset
        if target is None:
            target = next(iter(mapping.values())).varset if mapping else vs
        values = _slot_values(vs, mapping, target)
        return _substitute_slots(self, values, target)

    def laurent_coefficient(self, var, k: int, at_infinity: bool = False) -> "RationalFn":
        """Coefficient of ``var**k`` in the Laurent expansion about 0 (or infinity)."""
        slot = var if isinstance(var, int) else self.varset.index(var)
        return _laurent_coefficient(self, slot, k, at_infinity)

    def eval_numeric(self, point: Mapping[str, complex]):
        """Float evaluation; conjugates are evaluated as complex conjugates."""
        vs = self.varset
        values = _numeric_slots(vs, point)
        num, den = self.num, self.den_poly()
        lo = num.min_exps() if num.terms else (0,) * vs.size
        neg = tuple(min(0, x) for x in lo)
        if any(neg):
            num = num.shift(tuple(-x for x in neg))
            den = den.shift(tuple(-x for x in neg))
        d = den.eval(values)
        import numpy as np

        if np.any(np.abs(d) <= 1e-12):
            raise NumericPole(f"denominator vanishes numerically at {dict(point)}")
        return num.eval(values) / d

    # -- text -----------------------------------------------------------
    def __str__(self):
        if not self.den:
            return str(self.num)
        lo = self.num.min_exps() if self.num.terms else ()
        num = self.num
        denmono = ""
        if lo and any(x < 0 for x in lo):
            neg = tuple(min(0, x) for x in lo)
            num = num.shift(tuple(-x for x in neg))
            denmono = "*".join(
                (n if x == -1 else f"{n}^{-x}") for n, x in zip(self.varset.names, neg) if x)
        dens = [f"({q})" + (f"^{m}" if m > 1 else "") for q, m in
                sorted(self.den.items(), key=lambda qm: qm[0].sort_key())]
        if denmono:
            dens.insert(0, denmono)
        return f"({num})/({'*'.join(dens)})"

    def __repr__(self):
        return f"RationalFn({self})"


def _slot_values(vs: VarSet, mapping: Mapping[str, RationalFn], target: VarSet):
    values = [None] * vs.size
    for i, name in enumerate(vs.holo):
        if name not in mapping:
            raise UnknownVariable(f"substitution does not define {name!r}")
        val = RationalFn.coerce(target, mapping[name])
        if val.varset != target:
            raise VarSetMismatch(f"substitution value for {name!r} lives in {val.varset!r}")
        values[i] = val
        values[vs.n + i] = val.conjugate()
    for j, name in enumerate(vs.real):
        slot = 2 * vs.n + j
        if name in mapping:
            values[slot] = RationalFn.coerce(target, mapping[name])
        elif name in target.real:
            values[slot] = RationalFn.var(target, name)
        else:
            raise UnknownVariable(f"real parameter {name!r} has no image in {target!r}")
    return values


def _eval_poly_in(p: Poly, values: Sequence[RationalFn], target: VarSet, cache: dict) -> RationalFn:
    total = RationalFn.zero(target)
    for e, c in p.terms.items():
        term = RationalFn.const(target, c)
        for slot, k in enumerate(e):
            if k:
                key = (slot, k)
                pw = cache.get(key)
                if pw is None:
                    pw = values[slot] ** k
                    cache[key] = pw
                term = term * pw
        total = total + term
    return total


def _substitute_slots(f: RationalFn, values, target: VarSet) -> RationalFn:
    cache: dict = {}
    out = _eval_poly_in(f.num, values, target, cache)
    for q, m in f.den.items():
        qv = _eval_poly_in(q, values, target, cache)
        if qv.is_zero():
            raise SingularSubstitution(f"denominator factor {q} vanishes identically after substitution")
        out = out / (qv ** m)
    return out


def substitute(f: RationalFn, mapping: Mapping[str, RationalFn], target: Optional[VarSet] = None) -> RationalFn:
    return f.substitute(mapping, target)


def _numeric_slots(vs: VarSet, point: Mapping[str, complex]):
    values = [None] * vs.size
    for i, name in enumerate(vs.holo):
        if name in point:
            v = point[name]
            values[i] = v
            values[vs.n + i] = v.conjugate() if hasattr(v, "conjugate") else v
    for j, name in enumerate(vs.real):
        if name in point:
            values[2 * vs.n + j] = point[name]
    return _FillMissing(values, vs)


class _FillMissing(list):
    """Slot values; touching an unassigned slot raises UnknownVariable."""

    def __init__(self, values, vs):
        super().__init__(values)
        self._vs = vs

    def __iter__(self):
        for i, v in enumerate(list.__iter__(self)):
            yield _Missing(self._vs.names[i]) if v is None else v


class _Missing:
    def __init__(self, name):
        self.name = name

    def __pow__(self, k):
        raise UnknownVariable(f"no numeric value given for {self.name!r}")


# -- Laurent expansion --------------------------------------------------

def _split_in(p: Poly, slot: int) -> Dict[int, Poly]:
    """Coefficients of ``p`` viewed as a Laurent polynomial in one slot."""
    out: Dict[int, dict] = {}
    for e, c in p.terms.items():
        k = e[slot]
        e2 = list(e)
        e2[slot] = 0
        out.setdefault(k, {})[tuple(e2)] = c
    return {k: Poly._raw(p.varset, t) for k, t in out.items()}


def _inverse_series(coeffs: Dict[int, RationalFn], order: int, vs: VarSet):
    """Power-series coefficients c_0..c_order of 1/sum(coeffs[j] w^j), coeffs[0] != 0."""
    c0 = coeffs[0].inv()
    out = [c0]
    deg = max(coeffs)
    for n in range(1, order + 1):
        acc = RationalFn.zero(vs)
        for j in range(1, min(n, deg) + 1):
            if j in coeffs:
                acc = acc + coeffs[j] * out[n - j]
        out.append(-(c0 * acc))
    return out


def _series_mul(a, b, order, vs):
    out = []
    for n in range(order + 1):
        acc = RationalFn.zero(vs)
        for j in range(n + 1):
            if j < len(a) and n - j < len(b):
                if not a[j].is_zero() and not b[n - j].is_zero():
                    acc = acc + a[j] * b[n - j]
        out.append(acc)
    return out


def _laurent_coefficient(f: RationalFn, slot: int, k: int, at_infinity: bool) -> RationalFn:
    vs = f.varset
    num_parts = {e: RationalFn(p) for e, p in _split_in(f.num, slot).items()} if f.num.terms else {}
    if not num_parts:
        return RationalFn.zero(vs)
    const_den = {}
    series_factors = []  # (coeff dict in w, multiplicity, degree)
    for q, m in f.den.items():
        parts = _split_in(q, slot)
        if list(parts) == [0]:
            const_den[q] = m
            continue
        deg = max(parts)
        if at_infinity:
            coeffs = {deg - j: RationalFn(p) for j, p in parts.items()}
        else:
            # no monomial content means the v^0 part is nonzero
            coeffs = {j: RationalFn(p) for j, p in parts.items()}
        series_factors.append((coeffs, m, deg))
    shift = sum(m * deg for _, m, deg in series_factors) if at_infinity else 0
    if at_infinity:
        # f = v^-shift * N(v) * S(1/v);  coefficient of v^k needs s_n with n = e - shift - k
        needed = [e - shift - k for e in num_parts]
    else:
        needed = [k - e for e in num_parts]
    order = max(needed)
    if order < 0:
        return RationalFn.zero(vs)
    series = [RationalFn.one(vs)] + [RationalFn.zero(vs)] * order
    for coeffs, m, _ in series_factors:
        inv = _inverse_series(coeffs, order, vs)
        for _ in range(m):
            series = _series_mul(series, inv, order, vs)
    total = RationalFn.zero(vs)
    for (e, part), n in zip(num_parts.items(), needed):
        if 0 <= n <= order and not series[n].is_zero():
            total = total + part * series[n]
    if const_den:
        total = total * RationalFn(Poly.const(vs, 1), const_den)
    return total


def laurent_coefficient(f: RationalFn, var, k: int) -> RationalFn:
    return f.laurent_coefficient(var, k)


def partial_derivative(f: RationalFn, var) -> RationalFn:
    return f.diff(var)


def conjugate(f: RationalFn) -> RationalFn:
    return f.conjugate()


def eval_numeric(f: RationalFn, point: Mapping[str, complex]):
    return f.eval_numeric(point)


def ratfn_arith(f: RationalFn, g: Optional[RationalFn], op: str) -> RationalFn:
    if op == "add":
        return f + g
    if op == "mul":
        return f * g
    if op == "neg":
        return -f
    if op == "div":
        return f / g
    raise ValueError(f"unknown op {op!r}")
