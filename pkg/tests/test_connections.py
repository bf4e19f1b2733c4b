import random
import time

import pytest
import sympy as sp
from hypothesis import given, settings, strategies as st

from atiyah.connections import (ConnectionChart, MatrixForm, PartialConnectionData, atiyah_form,
                                chern_form, curvature, difference_form, frame_change,
                                lie_bracket, matrix_inverse, normal_partial_connection, phi_form,
                                sigma_p, transition_atiyah_cocycle)
from atiyah.errors import NotTangent, SingularFrameChange
from atiyah.expr import parse_expr, parse_field, parse_form
from atiyah.forms import d, wedge
from atiyah.suites import RandomForms, SuiteConfig, f_connection, random_connection
from atiyah.symcore import I_OVER_2PI, RationalFn, VarSet
from conftest import sp_equal, to_sympy

XY = VarSet(["x", "y"])


def M(rows, vs=XY):
    return MatrixForm(vs, [[parse_form(e, vs) for e in r] for r in rows])


def G(rows, vs=XY):
    return MatrixForm.from_functions([[parse_expr(e, vs) if not e.lstrip("-").isdigit()
                                       else RationalFn.const(vs, int(e)) for e in r] for r in rows])


def test_martinet_connection_on_each_chart():
    cases = [
        (["x", "y", "z"], ["y*D[y] + z*D[z]", "D[x] - D[y]"], "-(dx + dy)/y"),
        (["x1", "z1", "y1"], ["y1*D[y1] + z1*D[z1]", "-x1^2*D[x1] - x1*y1*D[y1] - x1*(1 + z1)*D[z1]"],
         "dx1/(x1*z1) - dz1/z1"),
        (["y2", "z2", "x2"], ["-y2*D[y2] - z2*D[z2]", "x2*y2*D[x2] + y2^2*D[y2] + y2*(1 + z2)*D[z2]"],
         "z2*dy2/y2 - dz2"),
    ]
    for names, gens, want in cases:
        amb = VarSet(names)
        data = PartialConnectionData(amb, 2, tuple(parse_field(g, amb) for g in gens))
        t0 = time.perf_counter()
        c = normal_partial_connection(data)
        assert time.perf_counter() - t0 < 1.0
        assert c.theta[0, 0] == parse_form(want, data.v_varset)


def test_zero_extension_note_and_tangency():
    amb = VarSet(["x", "y", "z"])
    c = normal_partial_connection(PartialConnectionData(amb, 2, (parse_field("y*D[y] + z*D[z]", amb),)))
    assert "extended by zero" in c.note
    # the dx coefficient is dropped, leaving θ(y∂y) = -1
    assert c.theta[0, 0] == parse_form("-dy/y", c.varset)
    with pytest.raises(NotTangent):
        normal_partial_connection(PartialConnectionData(amb, 2, (parse_field("D[x] + D[z]", amb),)))


def test_curvature_split_for_the_distribution_connection():
    c = ConnectionChart(XY, M([["-(dx + dy)/y"]]))
    assert curvature(c.theta)[0, 0] == parse_form("-dx*dy/y^2", XY)
    assert atiyah_form(c, 1).is_zero()
    assert chern_form(c, 1) == parse_form("(i/(2*pi))*(-dx*dy/y^2)", XY)


def test_sigma_p_against_sympy_determinant():
    vs = XY
    rng = random.Random(5)
    gen = RandomForms(rng, vs, SuiteConfig())
    w1, w2 = parse_form("dx*conj(dx)", vs), parse_form("dy*conj(dy)", vs)
    m = [[gen.function(rational=False) for _ in range(2)] for _ in range(2)]
    n = [[gen.function(rational=False) for _ in range(2)] for _ in range(2)]
    kappa = MatrixForm(vs, [[w1.scale(m[i][j]) + w2.scale(n[i][j]) for j in range(2)] for i in range(2)])
    s, t = sp.symbols("s t")
    det = sp.expand(sp.Matrix(2, 2, lambda i, j: s * to_sympy(m[i][j]) + t * to_sympy(n[i][j])).det())
    want2 = det.coeff(s, 1).coeff(t, 1)
    got2 = sigma_p(kappa, 2).coefficient("x", "conj(x)", "y", "conj(y)")
    # dx∧dx̄∧dy∧dȳ is the order of w1∧w2 and also the sorted key order
    assert sp_equal(to_sympy(got2), want2)
    trace = to_sympy(m[0][0]) + to_sympy(m[1][1])
    assert sp_equal(to_sympy(sigma_p(kappa, 1).coefficient("x", "conj(x)")), trace)


def test_frame_change_is_a_gauge_transformation():
    rng = random.Random(11)
    c = random_connection(rng, XY, 2, SuiteConfig())
    a = G([["1", "x"], ["0", "1 + y"]])
    new = frame_change(c.theta, a)
    kappa, kappa2 = curvature(c.theta), curvature(new)
    assert kappa2 == matrix_inverse(a) @ kappa @ a
    c2 = ConnectionChart(XY, new)
    for p in (1, 2):
        assert atiyah_form(c2, p) == atiyah_form(c, p)
        assert chern_form(c2, p) == chern_form(c, p)
    with pytest.raises(SingularFrameChange):
        frame_change(c.theta, G([["x", "x"], ["y", "y"]]))


def test_rank_one_frame_change_adds_dlog():
    b = VarSet(["y2", "z2"])
    assert frame_change(MatrixForm.zero(b, 1), G([["1/y2"]], b))[0, 0] == parse_form("-dy2/y2", b)
    assert transition_atiyah_cocycle(G([["y2"]], b))[0, 0] == parse_form("dy2/y2", b)


def test_transition_cocycle_rejects_antiholomorphic():
    with pytest.raises(ValueError):
        transition_atiyah_cocycle(G([["conj(x)"]]))


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10**6))
def test_rank_one_difference_is_theta_difference(seed):
    rng = random.Random(seed)
    c0 = random_connection(rng, XY, 1, SuiteConfig())
    c1 = random_connection(rng, XY, 1, SuiteConfig())
    assert difference_form(c0, c1, 1) == (c1.theta[0, 0] - c0.theta[0, 0]).scale(I_OVER_2PI)


@settings(max_examples=8, deadline=None)
@given(st.integers(0, 10**6))
def test_chern_difference_is_a_d_antiderivative(seed):
    rng = random.Random(seed)
    vs = VarSet(["z1", "z2"])
    c0, c1 = random_connection(rng, vs, 2, SuiteConfig()), random_connection(rng, vs, 2, SuiteConfig())
    for p in (1, 2):
        diff = difference_form(c0, c1, p, flavor="chern")
        assert d(diff) == chern_form(c1, p) - chern_form(c0, p)


def test_symmetric_polynomial_argument():
    rng = random.Random(3)
    c = random_connection(rng, XY, 2, SuiteConfig())
    a1 = atiyah_form(c, 1)
    assert phi_form(c, {(2, 0): 1}) == wedge(a1, a1)
    assert phi_form(c, 2) == atiyah_form(c, 2)


def test_bott_vanishing_example():
    rng = random.Random(0)
    c = f_connection(rng, 3, 2, 2, SuiteConfig())
    assert atiyah_form(c, 2).is_zero()


def test_lie_bracket_identities():
    vs = VarSet(["x", "y", "z"])
    u = parse_field("y*D[x] + x*z*D[z]", vs)
    v = parse_field("D[y] - z^2*D[x]", vs)
    w = parse_field("x*D[y] + D[z]", vs)
    assert lie_bracket(u, v) == -lie_bracket(v, u)
    jac = lie_bracket(u, lie_bracket(v, w)) + lie_bracket(v, lie_bracket(w, u)) + lie_bracket(w, lie_bracket(u, v))
    assert jac == parse_field("0", vs)
