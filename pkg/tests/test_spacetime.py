import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from shearfree import catalog
from shearfree import invariants as inv
from shearfree import spacetime as S

from oracles import metric_fd_christoffel


def beta_cong(beta):
    return catalog.catalog_get("beta_family", {"beta": beta}).obj


def metric_value(g):
    return lambda x: np.real(np.asarray(g.metric_at(tuple(x), 0).value))


# ----------------------------------------------------------------------
# curvature machinery


@pytest.mark.parametrize(
    "g",
    [
        S.metric_kerr(S.KerrParams(1.0, 0.3, 0.0, 1.0)),
        S.metric_pp(1.0, 0.4),
        S.metric_g_t(beta_cong(-1.0), 0.7),
    ],
    ids=["kerr", "pp", "g_t"],
)
def test_christoffel_against_finite_differences(g):
    for p in g.sample(2, seed=1):
        got = np.real(np.asarray(S.curvature(g, p, 0).christoffel.value))
        want = metric_fd_christoffel(metric_value(g), p, h=1e-3)
        assert np.max(np.abs(got - want)) < 1e-7 * max(1.0, np.max(np.abs(want)))


@pytest.mark.parametrize(
    "g",
    [
        S.metric_kerr(S.KerrParams(0.5, 0.2, 0.4, 0.7)),
        S.metric_pp(2.0, -0.3),
        S.metric_g_t(beta_cong(1.3), 0.4),
        S.metric_leroy(),
    ],
    ids=["kerr", "pp", "g_t", "leroy"],
)
def test_riemann_symmetries(g):
    for p in g.sample(3, seed=2):
        assert max(S.curvature(g, p, 0).symmetry_residuals().values()) < 1e-8


def test_metric_validation():
    ch = S._four_chart(("u", "x", "y", "r"), ((-1, 1),) * 4)
    with pytest.raises(ValueError):
        S.Metric4(ch, ())
    with pytest.raises(ValueError):
        S.curvature(S.metric_pp(1.0, 0.0), (0, 0, 0, 0), order=-1)


# ----------------------------------------------------------------------
# Kerr family


@pytest.mark.parametrize(
    "kp",
    [
        S.KerrParams(1.0, 0.0, 0.0, 1.0),  # Schwarzschild
        S.KerrParams(1.0, 0.3, 0.0, 1.0),
        S.KerrParams(0.5, 0.2, 0.0, 0.7),
        S.KerrParams(1.0, 0.3, 0.4, 1.0),
    ],
    ids=["schwarzschild", "kerr", "M0_K07", "K1_M04"],
)
def test_kerr_family_is_vacuum_type_d(kp):
    g = S.metric_kerr(kp)
    for p in g.sample(4, seed=3):
        cb = S.curvature(g, p, 0)
        assert cb.ricci_norm() < 1e-7
        assert S.petrov(S.weyl_spinors(g, p, cb)).type == "D"
        assert g.signature(p) == (3, 1)


def test_kerr_null_congruence_is_geodesic():
    g = S.metric_kerr(S.KerrParams(1.0, 0.3, 0.0, 1.0))
    kk, perp = S.null_geodesic_residual(g, g.sample(1, seed=0)[0])
    assert kk < 1e-12 and perp < 1e-10


# ----------------------------------------------------------------------
# pp-waves


@pytest.mark.parametrize("alpha", [0.0, 0.5, 1.0, 2.0])
@pytest.mark.parametrize("cw", [-1.0, 0.0, 0.7])
def test_pp_wave_psi4(alpha, cw):
    g = S.metric_pp(alpha, cw)
    for p in g.sample(3, seed=4):
        ws = S.weyl_spinors(g, p)
        want = 2 * (1j * alpha - cw - 1)
        assert abs(ws.psi[4] - want) < 1e-6 * max(1.0, abs(want))
        assert max(abs(x) for x in ws.psi[:4]) < 1e-8
        assert S.petrov(ws).type == ("O" if want == 0 else "N")


@pytest.mark.parametrize("alpha,t", [(1.0, 1.0), (0.5, 0.3), (2.0, 4.0)])
def test_pp_wave_rescaling_is_ricci_flat(alpha, t):
    g = S.metric_pp_ricci_flat(alpha, t)
    for p in g.sample(3, seed=5):
        assert S.curvature(g, p, 0).ricci_norm() < 1e-6


def test_pp_roots_and_h():
    k1, k2 = S.pp_roots(0.5)
    for k in (k1, k2):
        assert abs(k * k + 2 * k + 0.25) < 1e-14
    h, hp = S.pp_h(1.0)  # repeated root
    from shearfree.expr import eval_value

    assert eval_value(h, (0.0,), variables=("u",)) == pytest.approx(1.0)
    assert eval_value(hp, (0.0,), variables=("u",)) == pytest.approx(0.5j)


# ----------------------------------------------------------------------
# the metrics g_t


@pytest.mark.parametrize("t", [-1 / 3, 0.25, 1 / 3, 1.0])
@pytest.mark.parametrize("beta", [-1.0, S.BETA_K])
def test_g_t_weyl_spinors(t, beta):
    c = beta_cong(beta)
    g = S.metric_g_t(c, t)
    for p in g.sample(3, seed=6):
        ws = S.weyl_spinors(g, p)
        K1 = inv.ts_invariants(c, p[:3], phi=p[3]).K1
        assert abs(ws.psi[0]) < 1e-6 and abs(ws.psi[1]) < 1e-6
        assert abs(ws.psi[2] - (1 - 4 * t) * K1 / 6) < 1e-6 * max(1.0, abs(K1))
        expected = S.g_t_expected_spinors(c, p, t)
        assert max(abs(a - b) for a, b in zip(ws.psi, expected)) < 1e-6
        ptype = S.petrov(ws).type
        if beta == S.BETA_K:
            assert ptype == ("N" if t == 1 / 3 else "III")
        elif t == 0.25:
            assert ptype == "III"


def test_g_t_rejects_zero_t_and_shear():
    with pytest.raises(ValueError):
        S.metric_g_t(beta_cong(1.0), 0.0)
    g = S.metric_g_t(catalog.catalog_get("st_4sym").obj, 1.0)
    with pytest.raises(Exception):
        g.metric_at((0.1, 0.2, 0.3, 0.0), 0)


@pytest.mark.parametrize("name,params", [("beta_family", {"beta": 1.3}), ("rigid", {"c": 1.0}), ("bianchi_vih", {})])
def test_g_t_lives_on_the_bundle(name, params):
    c = catalog.catalog_get(name, params).obj
    r = S.g_t_lie_check(c, c.sample(1, seed=7)[0], 0.6)
    assert r["degenerate"] < 1e-12 and r["lie_scaling"] < 1e-10


@pytest.mark.parametrize("beta,t", [(-1.0, 0.25), (S.BETA_K, 1.0), (1.3, -0.6)])
def test_g_t_closed_form(beta, t):
    c = beta_cong(beta)
    h = S.g_t_beta_closed_form(beta, t)
    for p in h.sample(3, seed=8):
        assert S.g_t_beta_closed_form_residual(c, beta, t, p) < 1e-10


# ----------------------------------------------------------------------
# Bach tensor


def _bach_frame(g, p):
    cb = S.curvature(g, p, 2)
    B = S.bach(g, p, cb)
    B2 = S.bach_via_cotton(g, p, cb)
    return S.frame_components(g, p, B), B, B2, cb.scale()


@pytest.mark.parametrize("t", [-1 / 3, 1.0])
def test_bach_vanishes_at_beta_k(t):
    g = S.metric_g_t(beta_cong(S.BETA_K), t)
    for p in g.sample(2, seed=9):
        Bf, B, B2, sc = _bach_frame(g, p)
        assert np.max(np.abs(B)) < 1e-6 * sc**2


def test_bach_routes_agree():
    g = S.metric_g_t(beta_cong(1.3), 0.6)
    for p in g.sample(2, seed=10):
        _, B, B2, sc = _bach_frame(g, p)
        assert np.max(np.abs(B)) > 1e-3
        assert np.max(np.abs(B - B2)) < 1e-8 * sc**2


@pytest.mark.parametrize("beta", [S.BETA_S1, S.BETA_S2])
def test_quarter_bach_zeros(beta):
    g = S.metric_g_t(beta_cong(beta), 0.25)
    for p in g.sample(2, seed=11):
        Bf, B, _, sc = _bach_frame(g, p)
        assert np.max(np.abs(Bf)) < 1e-6 * sc**2


def test_quarter_bach_beta_dependence():
    ratios = []
    for beta in (-1.0, 0.7, 1.3, 2.0, -2.5):
        g = S.metric_g_t(beta_cong(beta), 0.25)
        p = g.sample(1, seed=12)[0]
        Bf, _, _, sc = _bach_frame(g, p)
        off = Bf.copy()
        off[2, 2] = 0
        assert np.max(np.abs(off)) < 1e-8 * sc**2
        ratios.append(Bf[2, 2] / S.bach_beta_prediction(beta, 0.25))
    ratios = np.array(ratios)
    assert np.max(np.abs(ratios / ratios[0] - 1)) < 1e-4
    assert ratios[0] == pytest.approx(1.0, rel=1e-6)


@pytest.mark.parametrize("t", [0.5, -1.0])
def test_beta_k_bach_prediction(t):
    g = S.metric_g_t(beta_cong(S.BETA_K), t)
    p = g.sample(1, seed=13)[0]
    Bf, *_ = _bach_frame(g, p)
    want = S.bach_beta_prediction(S.BETA_K, t)
    assert abs(Bf[2, 2] - want) < 1e-6 * abs(want)
    assert S.bach_beta_prediction(1.3, 0.7) is None


# ----------------------------------------------------------------------
# conformal invariance

ups = st.tuples(st.floats(-0.4, 0.4), st.floats(-0.4, 0.4), st.floats(-0.4, 0.4))


def _weight(a, b, c):
    return f"({a!r})*u + ({b!r})*sin(x) + ({c!r})*x*y"


@settings(max_examples=8, deadline=None)
@given(ups)
def test_petrov_type_is_conformally_invariant(abc):
    for g in (S.metric_pp(1.0, 0.3), S.metric_g_t(beta_cong(S.BETA_K), 1 / 3), S.metric_g_t(beta_cong(S.BETA_K), 1.0)):
        p = g.sample(1, seed=14)[0]
        h = g.rescaled(_weight(*abc))
        assert S.petrov(S.weyl_spinors(h, p)).type == S.petrov(S.weyl_spinors(g, p)).type


@settings(max_examples=4, deadline=None)
@given(ups)
def test_bach_vanishing_is_conformally_invariant(abc):
    g = S.metric_g_t(beta_cong(S.BETA_K), 1.0).rescaled(_weight(*abc))
    p = g.sample(1, seed=15)[0]
    _, B, _, sc = _bach_frame(g, p)
    assert np.max(np.abs(B)) < 1e-6 * sc**2


def test_bach_has_conformal_weight_minus_two():
    g = S.metric_g_t(beta_cong(1.3), 0.6)
    h = g.rescaled("0.3")
    p = g.sample(1, seed=16)[0]
    assert np.allclose(S.bach(h, p), math.exp(-0.6) * S.bach(g, p), rtol=1e-8, atol=1e-10)


# ----------------------------------------------------------------------
# reduced Einstein system


def _residuals(tau, p="1", c="0", m="0", sign=1, n=4, seed=17):
    st_ = S.ReducedStructure(tau, sign)
    ans = S.EinsteinAnsatz(p=p, c=c, m=m)
    pts = st_.chart().sample(n, seed=seed)
    return max(max(S.reduced_einstein_residuals(ans, st_, q)) for q in pts)


@pytest.mark.parametrize("pval,M", [(1.0, 0.0), (1.3, 0.2), (0.7, -0.5)])
def test_vacuum_constant_solution(pval, M):
    tau = 1 / math.sqrt(2)
    m = f"{pval**4 / 4!r} + i*{pval**4 * M!r}"
    assert _residuals(tau, repr(pval), "0", m) < 1e-8
    st_ = S.ReducedStructure(tau, 1)
    ans = S.EinsteinAnsatz(p=repr(pval), c="0", m=m)
    g = S.metric_reduced(ans, st_)
    for q in g.sample(3, seed=18):
        assert S.curvature(g, q, 0).ricci_norm() < 1e-6
        f = S.reduced_functions(ans, st_, q)
        r = q[3]
        want = -2 * math.cos(r / 2) ** 2 * (math.cos(r) + 4 * M * math.sin(r))
        assert f["H"] == pytest.approx(want, abs=1e-10)


@pytest.mark.parametrize("e1", [1, -1])
@pytest.mark.parametrize("e2", [1, -1])
def test_m_zero_constant_families(e1, e2):
    q = 5 + e2 * math.sqrt(17)
    tau = e1 / 4 * math.sqrt(q)
    assert _residuals(tau, "1.2", repr(-e1 / math.sqrt(q))) < 1e-8
    w = 0.5 * (7 + e2 * math.sqrt(17))
    tau = e1 / 2 * math.sqrt(w)
    c = e1 * (3 + e2 * math.sqrt(17)) / (4 * math.sqrt(w))
    assert _residuals(tau, "0.8", repr(c)) < 1e-8
    ans = S.EinsteinAnsatz(p="0.8", c=repr(c))
    g = S.metric_reduced(ans, S.ReducedStructure(tau, 1))
    q_ = g.sample(1, seed=19)[0]
    assert S.einstein_residual(g, 0.0, q_).Phi < 0


@pytest.mark.parametrize("t", [0.0, 0.3, -0.7])
def test_c_family_solves_first_equation(t):
    tau = 0.8
    st_ = S.ReducedStructure(tau, 1)
    ans = S.EinsteinAnsatz(c=S._c_constant_expr(tau, t))
    for q in st_.chart().sample(4, seed=20):
        if abs(1 - t * q[2] ** (4 * tau * tau - 1)) < 0.05:
            continue
        assert S.reduced_einstein_residuals(ans, st_, q)[0] < 1e-8


@pytest.mark.parametrize("eps", [1, -1])
@pytest.mark.parametrize("s1,s2", [(1.0, 0.0), (0.7, 0.4)])
def test_tau_eps_closed_forms(eps, s1, s2):
    tau = 0.5 * math.sqrt((11 + eps * math.sqrt(13)) / 6)
    k = (1 - eps * math.sqrt(13)) / 12
    p = f"exp({k!r}*log(y))*({s2!r} + {s1!r}*y)"
    assert _residuals(tau, p, S._c_constant_expr(tau, 0.0)) < 1e-8
    for y in (0.4, 1.0, 1.7):
        assert S.p_equation_residual(p, tau, 0.0, y) < 1e-10
    g = S.metric_tau_eps(eps, s1, s2)
    q = g.sample(1, seed=21)[0]
    cb = S.curvature(g, q, 0)
    if s2 == 0:
        assert cb.ricci_norm() < 1e-8
        assert S.petrov(S.weyl_spinors(g, q, cb)).type == "III"
    else:
        assert cb.ricci_norm() > 1e-4


FLAT = [
    (0.5 * math.sqrt(1.5), "0.6*sqrt(y) + 0.9*y"),
    (0.5 * math.sqrt(5 / 3), "exp(2/3*log(y))*1.1"),
    (0.5 * math.sqrt(2), "1.4*sqrt(y)"),
    (0.5 * math.sqrt(3), "0.8*y"),
]


@pytest.mark.parametrize("tau,p", FLAT, ids=["3/2", "5/3", "2", "3"])
def test_flat_branches(tau, p):
    c = S._c_constant_expr(tau, 0.0)
    assert _residuals(tau, p, c) < 1e-8
    assert S.p_equation_residual(p, tau, 0.0, 0.9) < 1e-10
    g = S.metric_reduced(S.EinsteinAnsatz(p=p, c=c), S.ReducedStructure(tau, 1))
    for q in g.sample(2, seed=22):
        assert np.max(np.abs(S.curvature(g, q, 0).riemann.value)) < 1e-8


def test_p_equation_detects_wrong_solutions():
    assert S.p_equation_residual("1.4*sqrt(y) + 0.3*y", 0.5 * math.sqrt(2), 0.0, 0.9) > 1e-3
    with pytest.raises(ValueError):
        S.p_equation_residual("y", 0.7, 0.0, -1.0)


@pytest.mark.parametrize("s", [1.0, 0.5])
def test_leroy_metric(s):
    lp = S.leroy_parameters(s)
    assert lp["Lambda"] == pytest.approx(-s * s)
    g = S.metric_leroy(s)
    for q in g.sample(3, seed=23):
        er = S.einstein_residual(g, lp["Lambda"], q)
        assert er.relative < 1e-8
        assert S.petrov(S.weyl_spinors(g, q)).type == "N"
        assert g.signature(q) == (3, 1)


def test_reduced_structure_validation():
    with pytest.raises(ValueError):
        S.ReducedStructure(0.5, 1)
    with pytest.raises(ValueError):
        S.ReducedStructure(0.3, 2)
    with pytest.raises(ValueError):
        S.p_equation_residual("y", 0.7, 0.0, 0.0)


# ----------------------------------------------------------------------
# CR helpers


def test_c_from_cr_functions():
    st_ = S.ReducedStructure(0.8, 1)
    q = (0.1, 0.2, 0.9)
    sol = S.c_from_cr("z", st_, q)
    assert sol.ok
    assert sol.c == pytest.approx(-st_.A1)
    sol = S.c_from_cr(st_.cr_function(), st_, q)
    assert sol.ok

    def c_field(point, order):
        sd = S._structure_data(st_, point, order + 1)
        return S._c_jet_from_eta(sd, st_.cr_function(), point, order + 1, None)[0].truncate(order)

    assert S.reduced_einstein_residuals(S.EinsteinAnsatz(c=c_field), st_, q)[0] < 1e-8
    assert S.c_from_cr("z + u*zb", st_, q).cr_residual > 0.1
    with pytest.raises(S.DegenerateCR):
        S.c_from_cr("1", st_, q)


def test_m_from_xi():
    st_ = S.ReducedStructure(0.8, 1)
    q = (0.1, 0.2, 0.9)
    c = repr(-st_.A1)
    assert S.m_from_xi("z", c, st_, q).residual < 1e-10
    assert S.m_from_xi("u*zb", c, st_, q).residual > 1e-3
