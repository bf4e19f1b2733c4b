import random
from importlib import resources

import pytest
import sympy as sp

from atiyah.scenario import parse_scenario
from atiyah.symcore import RationalFn


def bundled_text(name: str) -> str:
    return (resources.files("atiyah") / "scenarios" / name).read_text()


@pytest.fixture(scope="session")
def martinet():
    return parse_scenario(bundled_text("p3_martinet.scn"))


@pytest.fixture(scope="session")
def curve():
    return parse_scenario(bundled_text("curve_line_bundle.scn"))


def sym_vars(varset):
    """Independent sympy symbols for each holomorphic variable and its conjugate."""
    out = {}
    for name in varset.holo:
        out[name] = sp.Symbol(name)
        out["conj_" + name] = sp.Symbol("c_" + name)
    for name in varset.real:
        out[name] = sp.Symbol(name)
    return out


def to_sympy(f: RationalFn):
    """Re-read the printed form of ``f`` with sympy (an independent parser)."""
    syms = sym_vars(f.varset)
    text = str(f).replace("^", "**")
    local = dict(syms)
    local["conj"] = lambda s: syms["conj_" + s.name]
    local["i"] = sp.I
    local["pi"] = sp.pi
    return sp.sympify(text, locals=local)


def sp_equal(a, b) -> bool:
    return sp.simplify(sp.together(a - b)) == 0


@pytest.fixture
def rng():
    return random.Random(1234)
