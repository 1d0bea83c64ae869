import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from shearfree import jets
from shearfree.expr import (
    Add,
    Call,
    Imag,
    Mul,
    Num,
    ParseError,
    UnboundIdentifier,
    Var,
    conj_expr,
    denominators,
    eval_jet,
    eval_value,
    free_names,
    parse,
    pretty,
    substitute,
)

from oracles import partial


def test_ast_shapes():
    assert parse("x + i*y") == Add(Var("x"), Mul(Imag(), Var("y")))
    assert parse("exp(2*x)") == Call("exp", Mul(Num(2.0), Var("x")))


def test_unclosed_paren_offset():
    with pytest.raises(ParseError) as ei:
        parse("x + (y")
    assert ei.value.offset == 6
    assert ")" in ei.value.expected


@pytest.mark.parametrize(
    "text", ["--x", "x^y", "x**2", "foo(x)", "x +", "(x", "2 x", "x $ y", "", "exp x", "x^"]
)
def test_malformed_input_raises_with_offset(text):
    with pytest.raises(ParseError) as ei:
        parse(text)
    assert 0 <= ei.value.offset <= len(text)


def test_unary_minus_binds_tighter_than_power():
    assert eval_value("-x^2", (3.0,), variables=("x",)) == pytest.approx(9.0)
    assert eval_value("-(x^2)", (3.0,), variables=("x",)) == pytest.approx(-9.0)


def test_eval_square_jet():
    J = eval_jet("x*x", (3.0,), order=2, variables=("x",))
    assert J.value == pytest.approx(9)
    assert jets.jet_extract(J, (1,)) == pytest.approx(6)
    assert J.coeffs[2] == pytest.approx(1)


def test_conj_rule():
    assert eval_value("conj(x + i*y)", (1.0, 2.0), variables=("x", "y")) == pytest.approx(1 - 2j)


def test_cross_derivative_against_finite_differences():
    J = eval_jet("exp(x*y)", (0.3, 0.7), order=3, variables=("x", "y"))
    want = partial(lambda v: math.exp(v[0] * v[1]), (0.3, 0.7), (1, 1))
    assert abs(jets.jet_extract(J, (1, 1)) - want) < 1e-7 * abs(want)


def test_unbound_identifier():
    with pytest.raises(UnboundIdentifier):
        eval_value("x + q", (1.0,), variables=("x",))


def test_params_and_constants():
    v = eval_value("a*pi + sqrt(4)", (0.0,), {"a": 2.0}, ("x",))
    assert v == pytest.approx(2 * math.pi + 2)


def test_free_names_substitute_denominators():
    e = parse("z*zb/(1 - a*x)")
    assert free_names(e) == {"z", "zb", "a", "x"}
    s = substitute(e, {"z": parse("x + i*y"), "zb": parse("x - i*y")})
    assert free_names(s) == {"x", "y", "a"}
    dens = sorted(pretty(d) for d in denominators(parse("log(x)/(y - 1) + x^(-1/2)")))
    assert dens == ["x", "x", "y - 1"]


# ----------------------------------------------------------------------
# property tests

NAMES = ("x", "y", "a")
leaf = st.one_of(
    st.sampled_from([Var(n) for n in NAMES]),
    st.floats(0.1, 5.0).map(lambda v: Num(round(v, 3))),
    st.just(Imag()),
)


def _tree(children):
    binop = st.tuples(st.sampled_from(["+", "-", "*", "/"]), children, children).map(
        lambda t: parse(f"({pretty(t[1])}) {t[0]} ({pretty(t[2])})")
    )
    fn = st.tuples(st.sampled_from(["exp", "sin", "cos", "conj"]), children).map(
        lambda t: Call(t[0], t[1])
    )
    power = st.tuples(children, st.sampled_from([2.0, 3.0, -1.0])).map(
        lambda t: parse(f"({pretty(t[0])})^{t[1]:g}" if t[1] > 0 else f"({pretty(t[0])})^({t[1]:g})")
    )
    neg = children.map(lambda e: parse(f"-({pretty(e)})"))
    return st.one_of(binop, fn, power, neg)


exprs = st.recursive(leaf, _tree, max_leaves=8)
POINT = (0.37, -0.61)
ENV = {"a": 0.83}


def _value(e):
    return eval_value(e, POINT, ENV, ("x", "y"))


@settings(max_examples=150, deadline=None)
@given(exprs)
def test_pretty_parse_roundtrip(e):
    assert parse(pretty(e)) == e
    assert pretty(parse(pretty(e))) == pretty(e)


@settings(max_examples=150, deadline=None)
@given(exprs)
def test_conj_is_an_involution(e):
    try:
        v = _value(e)
    except (ArithmeticError, OverflowError, ValueError):
        return
    if not np.isfinite(v):
        return
    assert _value(conj_expr(conj_expr(e))) == v
    w = _value(conj_expr(e))
    assert abs(w - v.conjugate()) <= 1e-9 * max(1.0, abs(v))


real_exprs = st.recursive(
    st.one_of(st.sampled_from([Var(n) for n in NAMES]), st.floats(0.1, 5.0).map(lambda v: Num(round(v, 3)))),
    lambda ch: st.one_of(
        st.tuples(st.sampled_from(["+", "-", "*"]), ch, ch).map(
            lambda t: parse(f"({pretty(t[1])}) {t[0]} ({pretty(t[2])})")
        ),
        st.tuples(st.sampled_from(["exp", "sin", "cos"]), ch).map(lambda t: Call(t[0], t[1])),
    ),
    max_leaves=8,
)


@settings(max_examples=100, deadline=None)
@given(real_exprs)
def test_real_expressions_have_real_jets(e):
    try:
        J = eval_jet(e, POINT, ENV, order=3, variables=("x", "y"))
    except (ArithmeticError, OverflowError):
        return
    if not np.all(np.isfinite(J.coeffs)):
        return
    assert np.max(np.abs(J.coeffs.imag)) < 1e-14 * max(1.0, float(np.max(np.abs(J.coeffs))))
