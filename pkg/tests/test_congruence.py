import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from shearfree import catalog
from shearfree.congruence import (
    Branch,
    OrientedCongruence,
    classical_decomposition,
    classify_branch,
    commutator_residuals,
    cr_residual,
    structure_functions,
)
from shearfree.forms import Chart, OneForm, complex_shorthands

CONGRUENCE_ENTRIES = [n for n in catalog.catalog_names() if catalog.ENTRIES[n].kind == "congruence"]


def heis():
    return catalog.catalog_get("heisenberg_standard").obj


def test_heisenberg_structure_functions():
    sf = structure_functions(heis(), (0.1, 0.2, -0.3), 3)
    assert complex(sf.a.value) == pytest.approx(2.0)
    for f in (sf.b, sf.p, sf.q, sf.s):
        assert abs(complex(f.value)) < 1e-14
    assert sf.residual < 1e-14


@pytest.mark.parametrize("name", CONGRUENCE_ENTRIES)
def test_branch_matches_catalog(name):
    item = catalog.catalog_get(name)
    bc = classify_branch(item.obj, n_points=8, seed=1)
    assert bc.branch.value == item.expected["branch"]


def test_twist_free_shear_free_branch():
    ch = Chart(("u", "x", "y"), ((-1, 1),) * 3)
    c = OrientedCongruence(ch, OneForm.of("1", "0", "0"), OneForm.of("0", "1", "i"))
    bc = classify_branch(c, n_points=8)
    assert bc.branch == Branch.TwistFreeShearFree
    assert bc.witness["max_abs_a"] == 0


def test_classification_needs_enough_points():
    with pytest.raises(ValueError):
        classify_branch(heis(), n_points=3)


def test_construction_validation():
    ch = Chart(("x", "y"), ((0, 1), (0, 1)))
    with pytest.raises(ValueError):
        OrientedCongruence(ch, OneForm.of("1", "0"), OneForm.of("0", "1"))


def test_classical_decomposition_rotation_and_strain():
    rot = classical_decomposition(("-y", "x", "1"), (0.2, 0.1, 0.0))
    assert rot.alpha_norm == pytest.approx(math.sqrt(2))
    assert rot.sigma_norm == pytest.approx(0.0, abs=1e-14)
    assert rot.theta == pytest.approx(0.0, abs=1e-14)
    strain = classical_decomposition(("x", "-y", "0"), (0.2, 0.1, 0.0))
    assert strain.alpha_norm == pytest.approx(0.0, abs=1e-14)
    assert strain.sigma_norm == pytest.approx(math.sqrt(2))
    assert strain.reconstruction_residual() < 1e-14


def test_cr_functions_of_heisenberg():
    c = heis()
    p = (0.3, -0.2, 0.5)
    assert cr_residual("z", c, p) < 1e-14
    assert cr_residual("u + i*z*zb", c, p) < 1e-14
    assert cr_residual("zb", c, p) > 0.1


@pytest.mark.parametrize(
    "name,params",
    [
        ("heisenberg_standard", {}),
        ("beta_family", {"beta": 1.3}),
        ("bianchi_vih", {"tau": 0.8}),
        ("st_4sym", {"alpha": 2.0}),
        ("st_h0_example", {}),
        ("kappa_ix", {"kappa": 2.0}),
        ("bianchi_iv_generic", {}),
    ],
)
def test_commutator_identities(name, params):
    c = catalog.catalog_get(name, params).obj
    for p in c.sample(4, seed=2):
        sf = structure_functions(c, p, 4)
        for test_fn in ("u*x + y*y", "exp(x - u)*sin(y)", "x*y*u"):
            u = c.scalar(test_fn, p, 4)
            assert max(commutator_residuals(sf, u)) < 1e-8


gauge_coef = st.floats(-0.5, 0.5)


@settings(max_examples=20, deadline=None)
@given(gauge_coef, gauge_coef, gauge_coef, gauge_coef)
def test_branch_is_gauge_invariant(a, b, c, d):
    for name in ("heisenberg_standard", "st_4sym", "kappa_ix"):
        cong = catalog.catalog_get(name).obj
        g = cong.gauge(f"exp(({a!r})*u + ({b!r})*x)", f"(1.5 + ({c!r})*sin(y))*exp(i*({d!r})*u)")
        assert classify_branch(g, n_points=8).branch == classify_branch(cong, n_points=8).branch


@settings(max_examples=20, deadline=None)
@given(gauge_coef, gauge_coef)
def test_structure_functions_transform_under_gauge(a, b):
    # λ → fλ rescales the twist by f/|h|²
    c = heis()
    p = (0.1, 0.2, 0.3)
    g = c.gauge(f"exp(({a!r})*x)", f"exp(({b!r})*y)")
    sf0, sf1 = structure_functions(c, p, 2), structure_functions(g, p, 2)
    f = math.exp(a * p[1])
    h2 = math.exp(2 * b * p[2])
    assert complex(sf1.a.value) == pytest.approx(complex(sf0.a.value) * f / h2)
    assert abs(complex(sf1.s.value)) < 1e-13
