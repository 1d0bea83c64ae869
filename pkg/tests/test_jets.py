import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from shearfree import jets
from shearfree.expr import eval_jet
from shearfree.jets import Jet, JetError, OrderExhausted, SingularConstantTerm

from oracles import partial

coord = st.floats(-0.8, 0.8)


def xy(point, order=5):
    return jets.coordinate_jets(point, order)


def test_n_coeffs_and_graded_truncation():
    assert jets.n_coeffs(3, 0) == 1
    assert jets.n_coeffs(3, 2) == 10
    assert jets.n_coeffs(4, 4) == math.comb(8, 4)
    x, y = xy([0.2, 0.3], 4)
    f = jets.exp(x * y)
    g = f.truncate(2)
    assert g.order == 2
    np.testing.assert_allclose(g.coeffs, f.coeffs[: jets.n_coeffs(2, 2)])


def test_extract_returns_derivatives_not_taylor_coefficients():
    x, y = xy([0.0, 0.0], 4)
    f = x * x * x * y
    assert jets.jet_extract(f, (3, 1)) == pytest.approx(6.0)
    assert jets.jet_extract(f, (2, 1)) == pytest.approx(0.0)


def test_extract_beyond_order_raises():
    x, _ = xy([0.1, 0.1], 2)
    with pytest.raises(OrderExhausted):
        jets.jet_extract(x * x, (2, 1))
    with pytest.raises(OrderExhausted):
        x.truncate(3)


def test_mismatched_dimensions_rejected():
    a = jets.jet_variable(0, 0.1, 2, 3)
    b = jets.jet_variable(0, 0.1, 3, 3)
    with pytest.raises(JetError):
        a + b


def test_log_of_zero_constant_term_is_singular():
    x, _ = xy([0.0, 0.5], 3)
    with pytest.raises(SingularConstantTerm):
        jets.log(x)
    with pytest.raises(SingularConstantTerm):
        jets.reciprocal(x)


FUNCS = [
    ("exp(x0*x1) + sin(x0 - 2*x1)", lambda v: np.exp(v[0] * v[1]) + np.sin(v[0] - 2 * v[1])),
    ("log(2 + x0*x0) / (3 + cos(x1))", lambda v: np.log(2 + v[0] ** 2) / (3 + np.cos(v[1]))),
    ("sqrt(4 + x0 + x1*x1)*tan(x0/3)", lambda v: np.sqrt(4 + v[0] + v[1] ** 2) * np.tan(v[0] / 3)),
    ("(1 + x0)^(1/3) * exp(i*x1)", lambda v: (1 + v[0]) ** (1 / 3) * np.exp(1j * v[1])),
]


@pytest.mark.parametrize("text,fn", FUNCS, ids=[f[0] for f in FUNCS])
@pytest.mark.parametrize("idx", [(1, 0), (0, 1), (1, 1), (2, 0), (2, 1), (0, 3)])
def test_jet_derivatives_match_finite_differences(text, fn, idx):
    p = (0.31, -0.22)
    J = eval_jet(text, p, order=4)
    want = partial(fn, p, idx, h=1e-2 if sum(idx) > 1 else 1e-3)
    got = jets.jet_extract(J, idx)
    assert abs(got - want) < 1e-7 * max(1.0, abs(want))


@settings(max_examples=40, deadline=None)
@given(coord, coord)
def test_product_rule_and_exp_log_inverse(a, b):
    x, y = xy([a, b], 4)
    f = jets.exp(x - 0.5 * y)
    g = 2.0 + jets.sin(x * y)
    lhs = (f * g).grad()
    rhs = jets.jeinsum("...,...j->...j", f, g.grad()) + jets.jeinsum("...,...j->...j", g, f.grad())
    assert (lhs - rhs).max_abs() < 1e-12
    assert (jets.log(jets.exp(x + y)) - (x + y)).max_abs() < 1e-12


@settings(max_examples=40, deadline=None)
@given(coord, coord, st.floats(-2.5, 2.5))
def test_power_laws(a, b, r):
    x, y = xy([a, b], 4)
    u = 2.0 + x * x + y
    lhs = jets.power(u, r) * jets.power(u, 1.0 - r)
    assert (lhs - u).max_abs() < 1e-10 * max(1.0, u.max_abs())


@settings(max_examples=25, deadline=None)
@given(coord, coord, st.integers(0, 2**31 - 1))
def test_solve_inverts_matrix(a, b, seed):
    rng = np.random.default_rng(seed)
    x, y = xy([a, b], 3)
    M0 = rng.normal(size=(3, 3)) + 3 * np.eye(3)
    M1 = rng.normal(size=(3, 3))
    A = jets.jet_const(M0, 2, 3) + jets.jet_const(M1, 2, 3) * jets.sin(x + 2 * y)
    rhs = jets.stack([x, y * y, jets.exp(x)])
    sol = jets.jet_solve(A, rhs)
    back = jets.jeinsum("ij,j->i", A, sol)
    assert (back - rhs).max_abs() < 1e-10


def test_singular_matrix_detected():
    A = jets.jet_const(np.array([[1.0, 2.0], [2.0, 4.0]]), 2, 2)
    with pytest.raises(SingularConstantTerm):
        jets.jet_inv(A)


def test_embed_and_restrict_roundtrip():
    J = eval_jet("exp(x0)*cos(x1)", (0.2, 0.4), order=3)
    E = jets.embed(J, 4, (1, 3))
    assert jets.jet_extract(E, (0, 2, 0, 1)) == pytest.approx(jets.jet_extract(J, (2, 1)))
    assert jets.jet_extract(E, (1, 0, 0, 0)) == 0
    R = jets.restrict(E, (1, 3))
    np.testing.assert_allclose(R.coeffs, J.coeffs)


def test_taylor_eval_approximates_function():
    J = eval_jet("exp(x0)*sin(x1)", (0.1, 0.2), order=6)
    h = (1e-2, -2e-2)
    want = math.exp(0.11) * math.sin(0.18)
    assert abs(jets.taylor_eval(J, h) - want) < 1e-12


def test_real_imag_conj():
    J = eval_jet("exp(i*x0)", (0.3,), order=3)
    assert J.real.value == pytest.approx(math.cos(0.3))
    assert J.imag.value == pytest.approx(math.sin(0.3))
    assert (J * J.conj() - 1.0).max_abs() < 1e-14


def test_bad_coefficient_shape():
    with pytest.raises(JetError):
        Jet(np.zeros(5), 2, 2)
