"""Acceptance gate: one printed PASS/FAIL line per criterion.

Run with ``pytest tests/test_acceptance.py -v -s`` or ``python3 tests/test_acceptance.py``.
Items whose reference value is known to carry a sign error are compared against
that literal value and left failing; the corrected value is checked alongside.
"""

import random
import sys
import time
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from atiyah.cech import LocalConnection, localized_atiyah_cocycle, stein_reduction  # noqa: E402
from atiyah.connections import PartialConnectionData, atiyah_form, chern_form, curvature  # noqa: E402
from atiyah.connections import normal_partial_connection  # noqa: E402
from atiyah.expr import parse_field, parse_form, parse_function  # noqa: E402
from atiyah.forms import ChartMap, pullback  # noqa: E402
from atiyah.residues import TorusCycle, integrate_torus_exact, integrate_torus_numeric, point_residue  # noqa: E402
from atiyah.runner import _build_connection, run_scenario  # noqa: E402
from atiyah.scenario import parse_scenario  # noqa: E402
from atiyah.suites import run_property_suite  # noqa: E402
from atiyah.symcore import RationalFn, Scalar, VarSet  # noqa: E402
from conftest import bundled_text  # noqa: E402


def _report(n, ok, detail):
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'} {detail}"
    print(line, flush=True)
    return ok


def _emit(capsys, n, ok, detail):
    if capsys is None:
        return _report(n, ok, detail)
    with capsys.disabled():
        print()
        return _report(n, ok, detail)


def _martinet():
    return parse_scenario(bundled_text("p3_martinet.scn"))


# -- criterion bodies return (ok, detail) ------------------------------------------------

DISTRIBUTIONS = [
    ("W0", ["x", "y", "z"], ["y*D[y] + z*D[z]", "D[x] - D[y]"], "-(dx + dy)/y"),
    # literal reference value; the bracket construction gives the opposite sign
    ("W2", ["y2", "z2", "x2"], ["-y2*D[y2] - z2*D[z2]", "x2*y2*D[x2] + y2^2*D[y2] + y2*(1 + z2)*D[z2]"],
     "-z2*dy2/y2 + dz2"),
    ("W1", ["x1", "z1", "y1"], ["y1*D[y1] + z1*D[z1]", "-x1^2*D[x1] - x1*y1*D[y1] - x1*(1 + z1)*D[z1]"],
     "dx1/(x1*z1) - dz1/z1"),
]


def criterion_1():
    bad, worst = [], 0.0
    for name, amb, gens, want in DISTRIBUTIONS:
        vs = VarSet(amb)
        data = PartialConnectionData(vs, 2, tuple(parse_field(g, vs) for g in gens))
        t0 = time.perf_counter()
        theta = normal_partial_connection(data).theta[0, 0]
        worst = max(worst, time.perf_counter() - t0)
        if theta != parse_form(want, data.v_varset):
            bad.append(f"{name} computed {theta} vs reference {want}")
    ok = not bad and worst < 1.0
    return ok, f"connection forms ({worst:.3f}s max)" + ("; " + "; ".join(bad) if bad else "")


DIFFERENCES = {
    (0, 1): "(i/(2*pi))*(dx + dy)/y",
    # literal reference value; D̄-closedness of the cocycle forces the opposite sign
    (0, 2): "(i/(2*pi))*(z2*dy2/y2 - dz2)",
    (0, 3): "-(i/(2*pi))*(dx1/(x1*z1) - dz1/z1)",
    (1, 2): "(i/(2*pi))*dy2/y2",
    (1, 3): "(i/(2*pi))*dx1/x1",
    (2, 3): "(i/(2*pi))*dz1/z1",
}


def _cocycle(sc):
    cov = sc.cover()
    conns = [LocalConnection(_build_connection(sc, i), sc.connections[i].frame) for i in range(cov.size)]
    return cov, localized_atiyah_cocycle(cov, conns, 1, sc.frames)


def criterion_2():
    sc = _martinet()
    t0 = time.perf_counter()
    cov, sigma = _cocycle(sc)
    dt = time.perf_counter() - t0
    bad = []
    for idx, want in DIFFERENCES.items():
        got = sigma[idx]
        if got != parse_form(want, cov.varset_of(idx)):
            bad.append(f"a({idx[0]},{idx[1]}) computed {got} vs reference {want}")
    ok = not bad and dt < 5.0
    return ok, f"six difference forms ({dt:.3f}s)" + ("; " + "; ".join(bad) if bad else "")


def criterion_3():
    sc = _martinet()
    c = _build_connection(sc, 0)
    vs = c.varset
    k = curvature(c.theta)[0, 0]
    ok_k = k == parse_form("-dx*dy/y^2", vs)
    a1, c1 = atiyah_form(c, 1), chern_form(c, 1)
    ok = ok_k and a1.is_zero() and not c1.is_zero()
    return ok, f"kappa0 = {k}, a1 = {a1}, c1 = {c1}"


def criterion_4():
    sc = _martinet()
    cov = sc.cover()
    xi = stein_reduction(cov, sc.potentials)
    want = {(1, 3): ("A", "-(i/(2*pi))*dx/x"), (2, 3): ("B", "-(i/(2*pi))*dz2/z2")}
    bad = []
    for idx, (chart, text) in want.items():
        got = cov.move(xi[idx], cov.chart_of(idx), chart)
        if got != parse_form(text, sc.charts[chart]):
            bad.append(f"xi{idx} = {got}")
    return not bad, "xi13 and xi23 after pullback" + ("; " + "; ".join(bad) if bad else "")


def criterion_5():
    sc = _martinet()
    t0 = time.perf_counter()
    rep = run_scenario(sc)
    dt = time.perf_counter() - t0
    exact_ok = rep.residue_exact == "1"
    num = rep.residue_numeric
    num_ok = num is not None and abs(num - 1) < 1e-9
    ok = exact_ok and num_ok and dt < 10.0
    return ok, f"residue exact = {rep.residue_exact}, numeric = {num}, {dt:.2f}s"


def criterion_6():
    w0, w1 = VarSet(["x", "y", "z"]), VarSet(["x1", "z1", "y1"])
    m = ChartMap(w0, w1, {k: parse_function(v, w0) for k, v in {"x1": "1/x", "y1": "z/x", "z1": "y/x"}.items()})
    omega0 = parse_form("z*dx + z*dy - y*dz", w0)
    omega1 = parse_form("-y1*dx1 - x1*z1*dy1 + x1*y1*dz1", w1)
    ok = omega0 == pullback(m, omega1).scale(RationalFn.var(w0, "x") ** 3)
    return ok, "omega0 = x^3 * pullback(omega1)"


def _curve_text(k):
    frame = f"z^{k}" if k > 0 else f"1/z^{-k}"
    text = bundled_text("curve_line_bundle.scn")
    head = text.split("[expect]")[0].replace("s = e * z^3 on Z", f"s = e * {frame} on Z")
    return head + f"[expect]\nresidue = {k} [DERIVED]\n"


def criterion_7():
    z_vs = VarSet(["z"])
    z = RationalFn.var(z_vs, "z")
    rng = random.Random(7)
    bad = []
    for _ in range(10):
        roots = rng.sample([Fraction(a, b) for a in range(-4, 5) for b in (1, 2, 3)], 3)
        f = RationalFn.one(z_vs)
        for a in roots:
            f = f * (z - RationalFn.const(z_vs, a)) ** rng.choice([-2, -1, 1, 2, 3])
        at_inf = point_residue(f.substitute({"z": 1 / z}), 0)
        total = sum(point_residue(f, a) for a in set(roots)) + at_inf
        if total != 0:
            bad.append(f"sum {total} for {f}")
    phi = np.linspace(0, 2 * np.pi, 256, endpoint=False)
    zs = 0.5 * np.exp(1j * phi)
    for k in (1, 2, 3, -1):
        rep = run_scenario(parse_scenario(_curve_text(k)))
        if rep.residue_exact != str(k) or abs(rep.residue_numeric - k) > 1e-9:
            bad.append(f"localized residue of z^{k}: {rep.residue_exact} / {rep.residue_numeric}")
        f = z ** k
        contour = np.mean((f.diff("z") / f).eval_numeric({"z": zs}) * zs)
        if point_residue(f, 0) != k or abs(contour - k) > 1e-9:
            bad.append(f"point residue of z^{k}")
    return not bad, "sphere sums vanish, localized residue k for z^k, k in 1 2 3 -1" + (
        "; " + "; ".join(bad) if bad else "")


def _suite_line(name, trials):
    rep = run_property_suite(name, trials, 0)
    s = rep.suite
    return rep, f"{name}: {s['trials']} trials, {s['checks']} checks, {s['failures']} failures ({rep.seconds:.2f}s)"


def criterion_8():
    rep, line = _suite_line("vanishing", 50)
    contrast = rep.suite["contrast (a1 = 0, c1 != 0)"]
    ok = rep.passed and rep.suite["trials"] >= 50 and contrast >= 1
    return ok, f"{line}, {contrast} instances with a1 = 0 and c1 != 0"


def criterion_9():
    rep, line = _suite_line("difference", 25)
    return rep.passed and rep.suite["trials"] >= 25, line


def criterion_10():
    reps = [_suite_line(n, 25) for n in ("cech", "algebra")]
    ok = all(r.passed and r.suite["trials"] >= 25 for r, _ in reps)
    return ok, "; ".join(line for _, line in reps)


def _monomial_denominator_integrand(rng, vs):
    num = RationalFn.zero(vs)
    for _ in range(rng.randint(1, 4)):
        term = RationalFn.const(vs, Scalar.gaussian(rng.randint(-3, 3), rng.randint(-3, 3)))
        for nm in vs.holo:
            term = term * RationalFn.var(vs, nm) ** rng.randint(0, 3)
        num = num + term
    den, residue_term = RationalFn.one(vs), RationalFn.const(vs, Scalar.gaussian(rng.randint(1, 3), rng.randint(-3, 3)))
    for nm in vs.holo:
        k = rng.randint(1, 4)
        den = den * RationalFn.var(vs, nm) ** k
        residue_term = residue_term * RationalFn.var(vs, nm) ** (k - 1)
    # the last term contributes the coefficient the torus integral picks out
    return (num + residue_term) / den


def criterion_11():
    worst, hits = 0.0, 0
    for seed in range(20):
        rng = random.Random(seed)
        n = 1 + seed % 2
        vs = VarSet(["u", "v"][:n])
        f = _monomial_denominator_integrand(rng, vs)
        a = parse_form("du" if n == 1 else "du*dv", vs).scale(f)
        radii = tuple((nm, Fraction(rng.randint(1, 5), rng.randint(1, 5))) for nm in vs.holo)
        cyc = TorusCycle(vs, radii, rng.choice((1, -1)))
        ex = integrate_torus_exact(a, cyc).to_complex()
        hits += ex != 0
        worst = max(worst, abs(ex - integrate_torus_numeric(a, cyc)))
    return worst < 1e-9, f"20 integrands ({hits} nonzero), max |exact - numeric| = {worst:.2e}"


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6,
            criterion_7, criterion_8, criterion_9, criterion_10, criterion_11]


@pytest.mark.parametrize("n", range(1, len(CRITERIA) + 1))
def test_criterion(n, capsys):
    ok, detail = CRITERIA[n - 1]()
    assert _emit(capsys, n, ok, detail), detail


def test_corrected_sign_values():
    """The values the engine produces where the reference carries a sign error."""
    sc = _martinet()
    cov, sigma = _cocycle(sc)
    assert sigma[(0, 2)] == parse_form("-(i/(2*pi))*(z2*dy2/y2 - dz2)", cov.varset_of((0, 2)))
    name, amb, gens, _ = DISTRIBUTIONS[1]
    vs = VarSet(amb)
    data = PartialConnectionData(vs, 2, tuple(parse_field(g, vs) for g in gens))
    assert normal_partial_connection(data).theta[0, 0] == parse_form("z2*dy2/y2 - dz2", data.v_varset)


if __name__ == "__main__":
    t0 = time.perf_counter()
    results = [_report(i + 1, *fn()) for i, fn in enumerate(CRITERIA)]
    print(f"{sum(results)}/{len(results)} criteria pass in {time.perf_counter() - t0:.1f}s")
