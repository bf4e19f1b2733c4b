"""Small expression grammar for scalars, rational functions, forms, vector
fields and matrices.

    expr    := term (('+' | '-') term)*
    term    := unary (('*' | '/') unary)*
    unary   := ('+' | '-') unary | power
    power   := atom ('^' int)?            int may be negative: x^-2 or x^(-2)
    atom    := NUMBER | 'i' | 'pi' | NAME | 'd'NAME | 'conj' '(' expr ')'
             | 'D' '[' NAME ']' | '(' expr ')' | '[' '[' expr, ... ']' , ... ']'

``*`` between forms is the wedge product, ``dx`` is the differential of the
chart variable ``x``, ``conj(dx)`` its conjugate, ``D[x]`` the vector field
∂/∂x.  Only exact literals are accepted.
"""

from __future__ import annotations

import re
from fractions import Fraction
from typing import List, Optional

from .errors import ScenarioSyntaxError, UnresolvedReference
from .forms import Form, VectorField, conjugate_form
from .symcore import I, PI, RationalFn, Scalar, VarSet

_TOKEN = re.compile(r"\s*(?:(\d+)|([A-Za-z_][A-Za-z_0-9]*)|(\S))")


class _Parser:
    def __init__(self, text: str, varset: Optional[VarSet], line: Optional[int], col0: int):
        self.text = text
        self.varset = varset
        self.line = line
        self.col0 = col0
        self.tokens = []
        pos = 0
        while pos < len(text):
            m = _TOKEN.match(text, pos)
            if not m:
                break
            if m.group(0).strip() == "":
                break
            kind = "num" if m.group(1) else "name" if m.group(2) else "op"
            self.tokens.append((kind, m.group(m.lastindex), m.start(m.lastindex)))
            pos = m.end()
        self.i = 0

    def error(self, msg, tok=None):
        if tok is None:
            tok = self.tokens[self.i] if self.i < len(self.tokens) else ("end", "", len(self.text))
        raise ScenarioSyntaxError(msg, self.line, self.col0 + tok[2] + 1)

    def peek(self):
        return self.tokens[self.i] if self.i < len(self.tokens) else ("end", "", len(self.text))

    def take(self, value=None):
        tok = self.peek()
        if value is not None and tok[1] != value:
            self.error(f"expected {value!r}, found {tok[1] or 'end of input'!r}")
        if tok[0] == "end":
            self.error("unexpected end of input")
        self.i += 1
        return tok

    # -- grammar --------------------------------------------------------
    def parse(self):
        if not self.tokens:
            self.error("empty expression")
        v = self.expr()
        if self.peek()[0] != "end":
            self.error(f"unexpected {self.peek()[1]!r}")
        return v

    def expr(self):
        v = self.term()
        while self.peek()[1] in ("+", "-"):
            op = self.take()
            w = self.term()
            v = self.binary(v, w, op)
        return v

    def term(self):
        v = self.unary()
        while self.peek()[1] in ("*", "/"):
            op = self.take()
            w = self.unary()
            v = self.binary(v, w, op)
        return v

    def unary(self):
        tok = self.peek()
        if tok[1] == "-":
            self.take()
            return self.negate(self.unary(), tok)
        if tok[1] == "+":
            self.take()
            return self.unary()
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek()[1] == "^":
            tok = self.take()
            k = self.int_exponent()
            if isinstance(base, (Form, VectorField, list)):
                self.error("only scalars and functions can be raised to a power", tok)
            try:
                return base ** k
            except ZeroDivisionError as exc:
                self.error(str(exc), tok)
        return base

    def int_exponent(self):
        paren = False
        if self.peek()[1] == "(":
            self.take()
            paren = True
        sign = 1
        if self.peek()[1] == "-":
            self.take()
            sign = -1
        tok = self.take()
        if tok[0] != "num":
            self.error("exponent must be an integer literal", tok)
        if paren:
            self.take(")")
        return sign * int(tok[1])

    def atom(self):
        tok = self.take()
        kind, val, _ = tok
        if kind == "num":
            return Scalar(Fraction(int(val)))
        if val == "(":
            v = self.expr()
            self.take(")")
            return v
        if val == "[":
            return self.matrix(tok)
        if kind != "name":
            self.error(f"unexpected {val!r}", tok)
        if val == "i":
            return I
        if val == "pi":
            return PI
        if val == "conj" and self.peek()[1] == "(":
            self.take("(")
            v = self.expr()
            self.take(")")
            return _conjugate(v)
        if val == "D" and self.peek()[1] == "[":
            self.take("[")
            name_tok = self.take()
            self.take("]")
            vs = self.need_varset(tok)
            if name_tok[1] not in vs.holo:
                raise UnresolvedReference(name_tok[1], f"line {self.line}" if self.line else "vector field")
            return VectorField(vs, {name_tok[1]: RationalFn.one(vs)})
        vs = self.varset
        if vs is not None and val in vs.holo + vs.real:
            return RationalFn.var(vs, val)
        if vs is not None and val.startswith("d") and val[1:] in vs.holo + vs.real:
            return Form.dvar(vs, val[1:])
        raise UnresolvedReference(val, f"line {self.line}" if self.line else "")

    def matrix(self, tok):
        rows = []
        while True:
            self.take("[")
            row = [self.expr()]
            while self.peek()[1] == ",":
                self.take()
                row.append(self.expr())
            self.take("]")
            rows.append(row)
            if self.peek()[1] == ",":
                self.take()
                continue
            break
        self.take("]")
        if len({len(r) for r in rows}) != 1:
            self.error("ragged matrix", tok)
        return rows

    def need_varset(self, tok):
        if self.varset is None:
            self.error("variables are not allowed here", tok)
        return self.varset

    # -- typing ---------------------------------------------------------
    def lift(self, v, rank):
        vs = self.varset
        if rank == 0:
            return v
        if rank == 1:
            return v if isinstance(v, RationalFn) else RationalFn.const(vs, v)
        if rank == 2:
            if isinstance(v, Form):
                return v
            return Form.function(self.lift(v, 1))
        return v

    @staticmethod
    def rank(v):
        if isinstance(v, Scalar):
            return 0
        if isinstance(v, RationalFn):
            return 1
        if isinstance(v, Form):
            return 2
        if isinstance(v, VectorField):
            return 3
        return 4

    def negate(self, v, tok):
        if isinstance(v, list):
            self.error("cannot negate a matrix", tok)
        return -v

    def binary(self, a, b, tok):
        op = tok[1]
        ra, rb = self.rank(a), self.rank(b)
        if 4 in (ra, rb):
            self.error("matrices cannot be combined arithmetically", tok)
        if op in "+-":
            if (ra == 3) != (rb == 3):
                self.error("cannot add a vector field and a non-vector-field", tok)
            if ra == 3:
                return a + b if op == "+" else a - b
            r = max(ra, rb)
            a, b = self.lift(a, r), self.lift(b, r)
            return a + b if op == "+" else a - b
        if op == "*":
            if ra == 3 and rb == 3:
                self.error("cannot multiply two vector fields", tok)
            if ra == 3 or rb == 3:
                field, f = (a, b) if ra == 3 else (b, a)
                if self.rank(f) == 2:
                    self.error("cannot multiply a vector field by a form", tok)
                return field.scale(self.lift(f, 1))
            r = max(ra, rb)
            if r == 2:
                return self.lift(a, 2) * self.lift(b, 2)
            return self.lift(a, r) * self.lift(b, r)
        # division
        if rb >= 2:
            self.error("can only divide by scalars or functions", tok)
        try:
            if ra == 3:
                return a.scale(self.lift(b, 1).inv())
            if ra == 2:
                return a / b
            r = max(ra, rb)
            return self.lift(a, r) / self.lift(b, r)
        except ZeroDivisionError as exc:
            self.error(str(exc), tok)


def _conjugate(v):
    if isinstance(v, (Scalar, RationalFn)):
        return v.conjugate()
    if isinstance(v, Form):
        return conjugate_form(v)
    raise TypeError("conj() applies to scalars, functions and forms")


def parse_expr(text: str, varset: Optional[VarSet] = None, line: Optional[int] = None, col0: int = 0):
    """Parse ``text``; returns a Scalar, RationalFn, Form, VectorField or list-of-lists."""
    return _Parser(text, varset, line, col0).parse()


def parse_scalar(text: str, line=None, col0=0) -> Scalar:
    v = parse_expr(text, None, line, col0)
    if not isinstance(v, Scalar):
        raise ScenarioSyntaxError("expected an exact scalar", line, col0 + 1)
    return v


def parse_function(text: str, varset: VarSet, line=None, col0=0) -> RationalFn:
    v = parse_expr(text, varset, line, col0)
    if isinstance(v, Scalar):
        return RationalFn.const(varset, v)
    if isinstance(v, Form):
        if set(v.terms) <= {()}:
            return v.terms.get((), RationalFn.zero(varset))
    if not isinstance(v, RationalFn):
        raise ScenarioSyntaxError("expected a function", line, col0 + 1)
    return v


def parse_form(text: str, varset: VarSet, line=None, col0=0) -> Form:
    v = parse_expr(text, varset, line, col0)
    if isinstance(v, Scalar):
        return Form.const(varset, v)
    if isinstance(v, RationalFn):
        return Form.function(v)
    if not isinstance(v, Form):
        raise ScenarioSyntaxError("expected a differential form", line, col0 + 1)
    return v


def parse_field(text: str, varset: VarSet, line=None, col0=0) -> VectorField:
    v = parse_expr(text, varset, line, col0)
    if isinstance(v, Scalar) and v.is_zero():
        return VectorField(varset)
    if not isinstance(v, VectorField):
        raise ScenarioSyntaxError("expected a vector field (use D[x] for the coordinate field)", line, col0 + 1)
    return v


def parse_matrix(text: str, kind: str, varset: Optional[VarSet], line=None, col0=0) -> List[list]:
    """Matrix ``[[..],[..]]`` or a bare entry (read as 1x1) of forms/functions."""
    v = parse_expr(text, varset, line, col0)
    rows = v if isinstance(v, list) else [[v]]
    conv = {"form": _to_form, "function": _to_function}[kind]
    return [[conv(e, varset) for e in row] for row in rows]


def _to_form(e, vs):
    if isinstance(e, Form):
        return e
    if isinstance(e, RationalFn):
        return Form.function(e)
    return Form.const(vs, e)


def _to_function(e, vs):
    if isinstance(e, RationalFn):
        return e
    if isinstance(e, Scalar):
        return RationalFn.const(vs, e)
    if isinstance(e, Form) and set(e.terms) <= {()}:
        return e.terms.get((), RationalFn.zero(vs))
    raise TypeError("expected a function entry")
