"""Connection and curvature matrices, Atiyah/Chern forms, difference forms
and partial connections induced by brackets.

Matrix convention: ``theta[j][i]`` is θ^j_i, so ∇ s_i = Σ_j θ^j_i s_j and a
frame change s' = s·A acts as θ' = A⁻¹dA + A⁻¹θA.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations, permutations
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union

from .errors import (DegenerateFrame, DegreeError, NotTangent, SingularFrameChange,
                     VarSetMismatch)
from .forms import (Form, VectorField, d, dbar, del_, restrict_form, type_component,
                    wedge, _perm_sign)
from .symcore import I_OVER_2PI, ONE, Poly, RationalFn, Scalar, VarSet


class MatrixForm:
    """Square matrix of forms over one varset."""

    __hash__ = None

    def __init__(self, varset: VarSet, entries: Sequence[Sequence[Form]]):
        rows = [list(r) for r in entries]
        size = len(rows)
        if any(len(r) != size for r in rows):
            raise ValueError("matrix must be square")
        for r in rows:
            for e in r:
                if e.varset != varset:
                    raise VarSetMismatch("matrix entries live on different varsets")
        self.varset = varset
        self.entries = rows

    @property
    def size(self) -> int:
        return len(self.entries)

    @classmethod
    def zero(cls, varset: VarSet, size: int) -> "MatrixForm":
        return cls(varset, [[Form(varset) for _ in range(size)] for _ in range(size)])

    @classmethod
    def identity(cls, varset: VarSet, size: int) -> "MatrixForm":
        return cls(varset, [[Form.const(varset, 1) if i == j else Form(varset)
                             for j in range(size)] for i in range(size)])

    @classmethod
    def from_functions(cls, rows: Sequence[Sequence[RationalFn]]) -> "MatrixForm":
        vs = rows[0][0].varset
        return cls(vs, [[Form.function(f) for f in r] for r in rows])

    def __getitem__(self, idx):
        j, i = idx
        return self.entries[j][i]

    def map(self, fn) -> "MatrixForm":
        rows = [[fn(e) for e in r] for r in self.entries]
        return MatrixForm(rows[0][0].varset if rows else self.varset, rows)

    def functions(self) -> List[List[RationalFn]]:
        """Entries as functions; raises DegreeError unless all entries are 0-forms."""
        out = []
        for r in self.entries:
            row = []
            for e in r:
                if set(e.terms) - {()}:
                    raise DegreeError("matrix entries are not functions")
                row.append(e.terms.get((), RationalFn.zero(self.varset)))
            out.append(row)
        return out

    def __add__(self, other: "MatrixForm") -> "MatrixForm":
        return MatrixForm(self.varset, [[a + b for a, b in zip(r, s)]
                                        for r, s in zip(self.entries, other.entries)])

    def __neg__(self):
        return self.map(lambda e: -e)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c) -> "MatrixForm":
        return self.map(lambda e: e.scale(c))

    def __matmul__(self, other: "MatrixForm") -> "MatrixForm":
        n = self.size
        if other.size != n:
            raise ValueError("matrix sizes differ")
        out = []
        for j in range(n):
            row = []
            for i in range(n):
                acc = Form(self.varset)
                for k in range(n):
                    acc = acc + wedge(self.entries[j][k], other.entries[k][i])
                row.append(acc)
            out.append(row)
        return MatrixForm(self.varset, out)

    def trace(self) -> Form:
        acc = Form(self.varset)
        for k in range(self.size):
            acc = acc + self.entries[k][k]
        return acc

    def is_zero(self) -> bool:
        return all(e.is_zero() for r in self.entries for e in r)

    def __eq__(self, other):
        if not isinstance(other, MatrixForm):
            return NotImplemented
        return self.size == other.size and all(
            a == b for r, s in zip(self.entries, other.entries) for a, b in zip(r, s))

    def __str__(self):
        if self.size == 1:
            return str(self.entries[0][0])
        return "[" + ", ".join("[" + ", ".join(str(e) for e in r) + "]" for r in self.entries) + "]"

    def __repr__(self):
        return f"MatrixForm({self})"


@dataclass(frozen=True)
class ConnectionChart:
    """Connection matrix of 1-forms in a fixed frame on one chart."""

    varset: VarSet
    theta: MatrixForm
    note: str = ""

    def __post_init__(self):
        if self.theta.varset != self.varset:
            raise VarSetMismatch("theta does not live on the chart varset")
        for r in self.theta.entries:
            for e in r:
                if e.degrees() - {1}:
                    raise DegreeError("connection entries must be 1-forms")

    @property
    def rank(self) -> int:
        return self.theta.size

    @classmethod
    def trivial(cls, varset: VarSet, rank: int = 1) -> "ConnectionChart":
        return cls(varset, MatrixForm.zero(varset, rank))

    def is_type_10(self) -> bool:
        return all(all(b == (1, 0, 0) for b in e.bidegrees()) for r in self.theta.entries for e in r)


# -- function matrices --------------------------------------------------------

def det_functions(m: Sequence[Sequence[RationalFn]]) -> RationalFn:
    n = len(m)
    vs = m[0][0].varset
    if n == 1:
        return m[0][0]
    if n == 2:
        return m[0][0] * m[1][1] - m[0][1] * m[1][0]
    acc = RationalFn.zero(vs)
    for c in range(n):
        if m[0][c].is_zero():
            continue
        minor = [row[:c] + row[c + 1:] for row in m[1:]]
        term = m[0][c] * det_functions(minor)
        acc = acc + term if c % 2 == 0 else acc - term
    return acc


def inverse_functions(m: Sequence[Sequence[RationalFn]]) -> List[List[RationalFn]]:
    """Adjugate / determinant; SingularFrameChange if the determinant is identically zero."""
    n = len(m)
    det = det_functions(m)
    if det.is_zero():
        raise SingularFrameChange("matrix is singular over the function field")
    if n == 1:
        return [[det.inv()]]
    inv_det = det.inv()
    out = [[None] * n for _ in range(n)]
    for r in range(n):
        for c in range(n):
            minor = [row[:c] + row[c + 1:] for k, row in enumerate(m) if k != r]
            cof = det_functions(minor)
            if (r + c) % 2:
                cof = -cof
            out[c][r] = cof * inv_det
    return out


def matrix_inverse(a: MatrixForm) -> MatrixForm:
    return MatrixForm.from_functions(inverse_functions(a.functions()))


# -- curvature and characteristic forms ------------------------------------------

def _check_one_forms(theta: MatrixForm):
    for r in theta.entries:
        for e in r:
            if e.degrees() - {1}:
                raise DegreeError("connection matrix entries must be 1-forms")


def curvature(theta: MatrixForm) -> MatrixForm:
    """κ = dθ + θ∧θ."""
    _check_one_forms(theta)
    return theta.map(d) + (theta @ theta)


def frame_change(theta: MatrixForm, a: MatrixForm) -> MatrixForm:
    """Connection matrix in the frame s·A: A⁻¹dA + A⁻¹θA."""
    if a.size != theta.size:
        raise ValueError("frame change has the wrong size")
    a_inv = matrix_inverse(a)
    return (a_inv @ a.map(d)) + (a_inv @ theta @ a)


def _det_forms(m: List[List[Form]], vs: VarSet) -> Form:
    """Leibniz expansion; entries are even so the order of the wedge factors is irrelevant."""
    n = len(m)
    acc = Form(vs)
    for perm in permutations(range(n)):
        term = None
        for row, col in enumerate(perm):
            e = m[row][col]
            if e.is_zero():
                term = None
                break
            term = e if term is None else wedge(term, e)
        if term is None or term.is_zero():
            continue
        acc = acc + term if _perm_sign(perm) > 0 else acc - term
    return acc


def sigma_p(kappa: MatrixForm, p: int) -> Form:
    """Coefficient of t^p in det(I + tκ): the sum of the p×p principal minors."""
    vs = kappa.varset
    if p == 0:
        return Form.const(vs, 1)
    if p < 0 or p > kappa.size:
        return Form(vs)
    for r in kappa.entries:
        for e in r:
            if any(k % 2 for k in e.degrees()):
                raise DegreeError("sigma_p needs entries of even degree")
    acc = Form(vs)
    for idx in combinations(range(kappa.size), p):
        minor = [[kappa.entries[j][i] for i in idx] for j in idx]
        acc = acc + _det_forms(minor, vs)
    return acc


def atiyah_curvature(c: ConnectionChart) -> MatrixForm:
    """κ^{1,1} = ∂̄θ for a (1,0)-connection."""
    return c.theta.map(dbar)


def atiyah_form(c: ConnectionChart, p: int) -> Form:
    return sigma_p(atiyah_curvature(c), p).scale(I_OVER_2PI ** p)


def chern_form(c: ConnectionChart, p: int) -> Form:
    return sigma_p(curvature(c.theta), p).scale(I_OVER_2PI ** p)


# A symmetric polynomial in σ_1..σ_ℓ: exponent tuple (e_1, .., e_ℓ) -> coefficient.
SymPoly = Mapping[Tuple[int, ...], object]


def sym_degree(phi: SymPoly) -> int:
    """Weighted degree Σ k·e_k; raises DegreeError if phi is not homogeneous."""
    degs = {sum((k + 1) * e for k, e in enumerate(exps)) for exps, c in phi.items()
            if not Scalar.coerce(c).is_zero()}
    if len(degs) != 1:
        raise DegreeError("symmetric polynomial must be homogeneous and nonzero")
    return degs.pop()


def as_sympoly(phi: Union[int, SymPoly]) -> Dict[Tuple[int, ...], Scalar]:
    """An int p stands for σ_p."""
    if isinstance(phi, int):
        if phi < 1:
            raise DegreeError("degree must be positive")
        exps = [0] * phi
        exps[phi - 1] = 1
        return {tuple(exps): ONE}
    return {tuple(k): Scalar.coerce(v) for k, v in phi.items()}


def _eval_sympoly(phi: Dict[Tuple[int, ...], Scalar], classes: Dict[int, Form], vs: VarSet) -> Form:
    acc = Form(vs)
    for exps, coef in phi.items():
        term = Form.const(vs, coef)
        for k, e in enumerate(exps):
            for _ in range(e):
                term = wedge(term, classes[k + 1])
        acc = acc + term
    return acc


def _sigma_classes(kappa: MatrixForm, phi, scale=True) -> Dict[int, Form]:
    top = max((len(k) for k in phi), default=0)
    out = {}
    for p in range(1, top + 1):
        s = sigma_p(kappa, p)
        out[p] = s.scale(I_OVER_2PI ** p) if scale else s
    return out


def phi_form(c: ConnectionChart, phi: Union[int, SymPoly], flavor: str = "atiyah") -> Form:
    """P(a^1, a^2, ..) (flavor 'atiyah') or P(c^1, c^2, ..) (flavor 'chern')."""
    phi = as_sympoly(phi)
    kappa = atiyah_curvature(c) if flavor == "atiyah" else curvature(c.theta)
    if flavor not in ("atiyah", "chern"):
        raise ValueError(f"unknown flavor {flavor!r}")
    return _eval_sympoly(phi, _sigma_classes(kappa, phi), c.varset)


# -- difference forms ----------------------------------------------------------

def _fresh_param(vs: VarSet, base: str = "t") -> str:
    name = base
    while name in vs:
        name += "_"
    return name


def _lift_form(a: Form, big: VarSet) -> Form:
    from .forms import extend_form
    return extend_form(a, big)


def _integrate_unit_interval(c: RationalFn, slot: int) -> RationalFn:
    """∫₀¹ c dt for c polynomial in the slot variable (t-free denominators)."""
    if any(q.depends_on(slot) for q in c.den):
        raise DegreeError("integrand is not polynomial in the deformation parameter")
    vs = c.varset
    if any(e[slot] < 0 for e in c.num.terms):
        raise DegreeError("integrand has negative powers of the deformation parameter")
    terms = {}
    for e, coef in c.num.terms.items():
        k = e[slot]
        e2 = list(e)
        e2[slot] = 0
        e2 = tuple(e2)
        val = coef * Scalar(Fraction(1, k + 1))
        terms[e2] = terms[e2] + val if e2 in terms else val
    return RationalFn(Poly(vs, terms), dict(c.den))


def fiber_integral(a: Form, param: str) -> Form:
    """π_* over t ∈ [0,1] with π_*(dt∧η) = ∫₀¹ η dt; terms without dt drop out."""
    vs = a.varset
    slot = vs.index(param)
    out = {}
    for key, c in a.terms.items():
        if slot not in key:
            continue
        rest = tuple(s for s in key if s != slot)
        # dt sorts last: η∧dt = (-1)^{deg η} dt∧η
        val = _integrate_unit_interval(c, slot)
        if len(rest) % 2:
            val = -val
        out[rest] = out[rest] + val if rest in out else val
    return restrict_form(Form(vs, out), vs.without_real() if vs.real == (param,) else
                         VarSet(vs.holo, tuple(r for r in vs.real if r != param), vs.conj))


def difference_form(c0: ConnectionChart, c1: ConnectionChart, phi: Union[int, SymPoly] = 1,
                    flavor: str = "atiyah") -> Form:
    """Bott difference form π_*(φ(κ̃)) of θ̃ = (1−t)θ₀ + tθ₁; the Atiyah flavor keeps
    the (d, d−1) part, d the degree of φ."""
    if c0.varset != c1.varset:
        raise VarSetMismatch("connections live on different charts")
    if c0.rank != c1.rank:
        raise ValueError("connections have different ranks")
    phi = as_sympoly(phi)
    deg = sym_degree(phi)
    vs = c0.varset
    t = _fresh_param(vs)
    big = vs.with_real(t)
    tf = RationalFn.var(big, t)
    th0 = c0.theta.map(lambda e: _lift_form(e, big))
    th1 = c1.theta.map(lambda e: _lift_form(e, big))
    theta_t = th0.scale(RationalFn.one(big) - tf) + th1.scale(tf)
    kappa_t = theta_t.map(d) + (theta_t @ theta_t)
    total = _eval_sympoly(phi, _sigma_classes(kappa_t, phi), big)
    out = fiber_integral(total, t)
    if flavor == "chern":
        return out
    if flavor != "atiyah":
        raise ValueError(f"unknown flavor {flavor!r}")
    return type_component(out, deg, deg - 1)


def transition_atiyah_cocycle(h: MatrixForm) -> MatrixForm:
    """∂h·h⁻¹ for a holomorphic transition matrix h."""
    fns = h.functions()
    n = h.varset.n
    for row in fns:
        for f in row:
            if any(f.depends_on(s) for s in range(n, 2 * n)):
                raise ValueError("transition functions must be holomorphic")
    h_inv = MatrixForm.from_functions(inverse_functions(fns))
    return h.map(del_) @ h_inv


# -- vector fields and partial connections ---------------------------------------

def apply_field(v: VectorField, f: RationalFn) -> RationalFn:
    acc = RationalFn.zero(f.varset)
    for name, coef in v.components.items():
        acc = acc + coef * f.diff(name)
    return acc


def lie_bracket(v: VectorField, w: VectorField) -> VectorField:
    """[v,w]^k = Σ_j (v^j ∂_j w^k − w^j ∂_j v^k)."""
    if v.varset != w.varset:
        raise VarSetMismatch("vector fields live on different charts")
    out = {}
    for k in v.varset.holo:
        val = apply_field(v, w[k]) - apply_field(w, v[k])
        if not val.is_zero():
            out[k] = val
    return VectorField(v.varset, out)


@dataclass(frozen=True)
class PartialConnectionData:
    """V = {z_{m+1} = .. = z_n = 0} in an ambient chart, a frame of the distribution
    and the normal frame π(∂/∂z_{m+1}), .., π(∂/∂z_n)."""

    ambient: VarSet
    dim_v: int
    generators: Tuple[VectorField, ...]
    # coordinate slots on V used for the zero extension when r < dim V
    complement: Optional[Tuple[int, ...]] = None

    def __post_init__(self):
        if not 0 < self.dim_v <= self.ambient.n:
            raise ValueError("dimension of V out of range")
        if len(self.generators) > self.dim_v:
            raise DegenerateFrame("more generators than dim V")
        for u in self.generators:
            if u.varset != self.ambient:
                raise VarSetMismatch("generator not on the ambient chart")

    @property
    def v_varset(self) -> VarSet:
        return VarSet(self.ambient.holo[: self.dim_v])

    def restrict(self, f: RationalFn) -> RationalFn:
        vv = self.v_varset
        mapping = {nm: RationalFn.var(vv, nm) for nm in vv.holo}
        for nm in self.ambient.holo[self.dim_v:]:
            mapping[nm] = RationalFn.zero(vv)
        return f.substitute(mapping, vv)


def bracket_matrices(data: PartialConnectionData) -> List[List[List[RationalFn]]]:
    """D[j][l][k]: ν_l-component of δ(ν_k)(u_j) = π([ũ_j, ∂/∂z_{m+k}]|_V)."""
    amb, m = data.ambient, data.dim_v
    normals = amb.holo[m:]
    out = []
    for j, u in enumerate(data.generators):
        for nm in normals:
            if not data.restrict(u[nm]).is_zero():
                raise NotTangent(f"generator {j} has a {nm}-component along V")
        mat = []
        for nl in normals:
            row = []
            for nk in normals:
                br = lie_bracket(u, VectorField(amb, {nk: RationalFn.one(amb)}))
                row.append(data.restrict(br[nl]))
            mat.append(row)
        out.append(mat)
    return out


def normal_partial_connection(data: PartialConnectionData) -> ConnectionChart:
    """(1,0) connection on N_V in the frame π(∂/∂z_{m+k}) with θ(u_j) = δ(·)(u_j).

    For r = dim V the solution is unique.  For r < dim V the coefficients on a
    complementary set of coordinate differentials are set to zero and the chart
    carries a note saying so."""
    vv = data.v_varset
    m, r = data.dim_v, len(data.generators)
    if r == 0:
        raise DegenerateFrame("no generators")
    dmats = bracket_matrices(data)
    u = [[data.restrict(g[nm]) for nm in vv.holo] for g in data.generators]
    if data.complement is not None:
        cols = [i for i in range(m) if i not in data.complement]
        choices = [tuple(cols)]
    else:
        choices = list(combinations(range(m), r))
    for cols in choices:
        sub = [[row[i] for i in cols] for row in u]
        if not det_functions(sub).is_zero():
            break
    else:
        raise DegenerateFrame("generators are dependent over the function field")
    inv = inverse_functions(sub)
    rank = len(dmats[0])
    theta = []
    for lrow in range(rank):
        row = []
        for k in range(rank):
            rhs = [dmats[j][lrow][k] for j in range(r)]
            form = Form(vv)
            for a, slot in enumerate(cols):
                coef = RationalFn.zero(vv)
                for j in range(r):
                    coef = coef + inv[a][j] * rhs[j]
                form = form + Form.dvar(vv, vv.holo[slot]).scale(coef)
            row.append(form)
        theta.append(row)
    note = ""
    if r < m:
        dropped = [vv.holo[i] for i in range(m) if i not in cols]
        note = "extended by zero along " + ", ".join("d" + x for x in dropped)
    return ConnectionChart(vv, MatrixForm(vv, theta), note)
