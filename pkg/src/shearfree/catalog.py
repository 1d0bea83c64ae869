"""Named example structures and metrics with their expected invariants.

Every entry builds either an :class:`OrientedCongruence` or a
:class:`~shearfree.spacetime.Metric4` from a few real parameters and carries
a table of expected values.  Expected values are DSL expressions in the
parameters and, where the invariant is a function on the chart, in the chart
variables as well, so parameter sweeps need no extra data.  A leading
``±`` marks a value fixed only up to the overall sign of the ω₁
normalization (the square-root branch in the generic case).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np
from scipy.integrate import solve_ivp

from . import jets
from .congruence import Branch, OrientedCongruence, classify_branch
from .expr import eval_value, parse
from .forms import Chart, OneForm, complex_shorthands
from .jets import Jet

__all__ = [
    "ParamSpec",
    "CatalogEntry",
    "CatalogItem",
    "CatalogError",
    "ENTRIES",
    "catalog_get",
    "catalog_names",
    "catalog_json",
    "catalog_verify",
    "VerifyReport",
]


class CatalogError(ValueError):
    """Unknown entry or parameters outside the declared ranges."""


@dataclass(frozen=True)
class ParamSpec:
    name: str
    default: float
    lo: float = -math.inf
    hi: float = math.inf
    choices: tuple[float, ...] = ()
    exclude: tuple[float, ...] = ()
    doc: str = ""

    def check(self, v: float) -> float:
        v = float(v)
        if self.choices and v not in self.choices:
            raise CatalogError(f"parameter {self.name}={v} not in {self.choices}")
        if not self.lo <= v <= self.hi:
            raise CatalogError(f"parameter {self.name}={v} outside [{self.lo}, {self.hi}]")
        if any(abs(v - e) < 1e-12 for e in self.exclude):
            raise CatalogError(f"parameter {self.name}={v} is excluded")
        return v

    def to_dict(self) -> dict:
        d: dict = {"name": self.name, "default": self.default}
        if self.choices:
            d["choices"] = list(self.choices)
        else:
            d["range"] = [_jnum(self.lo), _jnum(self.hi)]
        if self.exclude:
            d["exclude"] = list(self.exclude)
        if self.doc:
            d["doc"] = self.doc
        return d


def _jnum(x: float):
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return x


@dataclass(frozen=True)
class CatalogEntry:
    name: str
    kind: str  # "congruence" or "metric4"
    params: tuple[ParamSpec, ...]
    builder: Callable[[dict], object]
    expected: Callable[[dict], dict[str, str]]
    anchor: str
    pipelines: tuple[str, ...]
    sweep: tuple[dict, ...] = ()
    points: int = 16
    tol: float = 1e-6

    def resolve(self, params: Mapping[str, float] | None) -> dict[str, float]:
        params = dict(params or {})
        known = {p.name for p in self.params}
        extra = set(params) - known
        if extra:
            raise CatalogError(f"{self.name}: unknown parameters {sorted(extra)}")
        return {p.name: p.check(params.get(p.name, p.default)) for p in self.params}

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "kind": self.kind,
            "anchor": self.anchor,
            "params": [p.to_dict() for p in self.params],
            "pipelines": list(self.pipelines),
            "expected": sorted(self.expected(self.resolve(None))),
        }


@dataclass
class CatalogItem:
    entry: CatalogEntry
    params: dict[str, float]
    obj: object
    expected: dict[str, str]

    @property
    def name(self) -> str:
        return self.entry.name


# ----------------------------------------------------------------------
# construction helpers

UXY = ("u", "x", "y")


def _chart(bounds=((-1, 1), (-1, 1), (-1, 1)), domain: str = "", seed: int = 0) -> Chart:
    return Chart(UXY, bounds, domain=domain, seed=seed, defs=complex_shorthands())


def _cform(du: str, dz: str, dzb: str) -> tuple[str, str, str]:
    """Real components of ``du·du + dz·dz + dzb·dz̄`` on the chart (u, x, y)."""
    return (du, f"({dz}) + ({dzb})", f"i*(({dz}) - ({dzb}))")


def _add(f1: Sequence[str], f2: Sequence[str], c2: str = "1") -> tuple[str, ...]:
    return tuple(f"({a}) + ({c2})*({b})" for a, b in zip(f1, f2))


def _cong(chart, lam, mu, params, name, fields=None) -> OrientedCongruence:
    return OrientedCongruence(
        chart, OneForm.of(*lam), OneForm.of(*mu), dict(params), name, dict(fields or {})
    )


HEIS_LAM = _cform("1", "-i*zb", "i*z")


def _heisenberg(p):
    return _cong(_chart(), HEIS_LAM, _cform("0", "1", "0"), p, "heisenberg_standard")


def _rigid(p):
    # H = z zb + c (z zb)^2 / 4
    Hz = "zb + c*z*zb*zb/2"
    Hzb = "z + c*z*z*zb/2"
    lam = _cform("1", f"-i/2*({Hz})", f"i/2*({Hzb})")
    dom = "1 + c*(x*x + y*y) > 0.05"
    return _cong(_chart(domain=dom), lam, _cform("0", "1", "0"), p, "rigid")


def _epsilon(p):
    if p["e1"] == 0 and p["e2"] == 0:
        raise CatalogError("epsilon_family: e1 and e2 cannot both vanish")
    mu = _cform("e2", "e1 + i*e2*zb", "i*e2*z")
    # K1 blows up where 2 e2 z + i e1 = 0
    dom = "4*e2*e2*x*x + (2*e2*y + e1)^2 > 0.09"
    return _cong(_chart(domain=dom), HEIS_LAM, mu, p, "epsilon_family")


def _taub(p):
    den = "(1 - s/2*z*zb)"
    lam = _cform("1", f"-i/2*zb/{den}", f"i/2*z/{den}")
    dom = "x*x + y*y < 1.8" if p["s"] > 0 else ""
    name = "poincare_disc" if p["s"] > 0 else "spherical"
    return _cong(_chart(((-1, 1), (-0.9, 0.9), (-0.9, 0.9)), dom), lam, _cform("0", "1", "0"), p, name)


def _bianchi_vih(p):
    lam = ("exp(b*log(y))", "-1/y", "0")
    mu = ("0", "1/y", "i/y")
    if abs(1 - 4 * p["s"] * p["tau"] ** 2) < 1e-12:
        raise CatalogError("bianchi_vih: 1 - 4 s tau^2 = 0 gives a twist-free structure")
    if abs(1 - 2 * p["s"] * p["tau"] ** 2) < 1e-12:
        raise CatalogError("bianchi_vih: 1 - 2 s tau^2 = 0 gives A1 = 0 (flat model, use the taub entries)")
    q = dict(p)
    q["b"] = -2 * (1 - 2 * p["s"] * p["tau"] ** 2)
    return _cong(_chart(((-1, 1), (-1, 1), (0.3, 2.0))), lam, mu, q, "bianchi_vih")


def _bianchi_vih_expected(p):
    # tau and -tau give the same structure; the normalization A1 > 0 picks the sign
    t = p["s"] * math.copysign(abs(p["tau"]), 1 - 2 * p["s"] * p["tau"] ** 2)
    tt = f"({t!r})"
    return {
        "branch": "TwistOnly",
        "ts.k2": "0",
        "k1b.A1": f"-(-s + 2*{tt}*{tt})/(2*{tt})",
        "k1b.B1": f"i*{tt}",
    }


def _bianchi_iv(p):
    lam = ("1/y", "log(y)/y", "0")
    mu = ("0", "1/y", "i/y")
    return _cong(_chart(((-1, 1), (-1, 1), (0.3, 2.0))), lam, mu, p, "bianchi_iv")


def _beta(p):
    D = "(z*zb - 2*beta*beta*(2 + beta*beta*beta))"
    lam = _cform(
        "1",
        f"(2*beta*exp(-i*beta*u) + i*zb)/(beta*{D})",
        f"(2*beta*exp(i*beta*u) - i*z)/(beta*{D})",
    )
    mu = _cform("0", f"-2*beta*beta*exp(-i*beta*u)/{D}", "0")
    bd = 2 * p["beta"] ** 2 * (2 + p["beta"] ** 3)
    dom = f"(x*x + y*y - ({bd}))^2 > 0.01"
    return _cong(_chart(domain=dom), lam, mu, p, "beta_family")


def _st_4sym(p):
    a = p["alpha"]
    if a < 1:
        r = math.sqrt(1 - a * a)
        mu = ("0", "1", f"exp(2*u*{r!r})*(alpha + i*{r!r})")
    elif a == 1:
        mu = ("0", "1", "i + 2*u")
    else:
        r = math.sqrt(a * a - 1)
        mu = (
            "0",
            f"(i + alpha)*cos(u*{r!r}) - i*{r!r}*sin(u*{r!r})",
            f"(i + alpha)*sin(u*{r!r}) + i*{r!r}*cos(u*{r!r})",
        )
    return _cong(_chart(), ("1", "0", "0"), mu, p, "st_4sym")


def _st_h0(p):
    mu = ("0", "1", "i*exp(2*(u + x*y))")
    return _cong(_chart(), ("1", "0", "0"), mu, p, "st_h0_example")


def _alu_series(alpha_jet_coeffs, h0: complex, h1: complex, order: int) -> np.ndarray:
    """Taylor coefficients of h solving h'' + 2h' + (α² + iα')h = 0 in one variable."""
    al = alpha_jet_coeffs
    n = order + 3
    a = np.zeros(n, complex)
    a[: len(al)] = al
    # coefficient series of α² + iα'
    a2 = np.convolve(a, a)[:n]
    ad = np.array([(k + 1) * a[k + 1] for k in range(n - 1)] + [0.0])
    c = a2 + 1j * ad
    h = np.zeros(n, complex)
    h[0], h[1] = h0, h1
    for k in range(n - 2):
        conv = sum(c[j] * h[k - j] for j in range(k + 1))
        h[k + 2] = -(2 * (k + 1) * h[k + 1] + conv) / ((k + 2) * (k + 1))
    return h[: order + 1]


def _st_alu(p):
    # α(u) = a0 + a1 u; initial data h(0) = 1, h'(0) = 1/2 keeps |coefficient of dz̄| > 1
    a0, a1 = p["a0"], p["a1"]

    def rhs(u, Y):
        h, hp = Y[0] + 1j * Y[1], Y[2] + 1j * Y[3]
        al = a0 + a1 * u
        hpp = -2 * hp - (al * al + 1j * a1) * h
        return [hp.real, hp.imag, hpp.real, hpp.imag]

    cache: dict[float, tuple[complex, complex]] = {}

    def initial(u0: float) -> tuple[complex, complex]:
        if u0 not in cache:
            sol = solve_ivp(rhs, (0.0, u0), [1.0, 0.0, 0.5, 0.0], rtol=1e-12, atol=1e-14, method="DOP853")
            Y = sol.y[:, -1]
            cache[u0] = (Y[0] + 1j * Y[1], Y[2] + 1j * Y[3])
        return cache[u0]

    def field_fn(part: str, deriv: bool):
        def fn(point, order):
            u0 = float(point[0])
            h0, h1 = initial(u0)
            ser = _alu_series(np.array([a0 + a1 * u0, a1]), h0, h1, order + 1)
            if deriv:
                ser = np.array([(k + 1) * ser[k + 1] for k in range(order + 1)])
            else:
                ser = ser[: order + 1]
            vals = ser.real if part == "re" else ser.imag
            one = Jet(np.asarray(vals, complex), 1, order)
            return jets.embed(one, 3, (0,))

        return fn

    fields = {
        "hr": field_fn("re", False),
        "hi": field_fn("im", False),
        "hpr": field_fn("re", True),
        "hpi": field_fn("im", True),
    }
    h = "(hr + i*hi)"
    hb = "(hr - i*hi)"
    hpb = "(hpr - i*hpi)"
    al = "(a0 + a1*u)"
    mu = _cform("0", "1", f"-({hpb}/{h} + {hb}/{h} - i*{al}*{hb}/{h})")
    return _cong(_chart(((-0.8, 0.8), (-1, 1), (-1, 1))), ("1", "0", "0"), mu, p, "st_alu", fields)


def _st_t1_homogeneous(p):
    # homogeneous realization of the T1 = ±1 system with 3-dimensional symmetry
    T = p["T0"]
    G = f"((y - y*y)/{T!r} + ({T!r} - 1/{T!r})/4)"
    w = ("exp(2*x)", "0", "0")
    th1 = ("y*exp(2*x)", "1", "0")
    th2 = (f"{G}*exp(2*x)", f"(1 - 2*y)/{T!r}", f"-1/{T!r}")
    mu = tuple(f"s*(({a}) + i*({b}))" for a, b in zip(th1, th2))
    return _cong(_chart(), w, mu, p, "st_t1_homogeneous")


def _generic_flat_like(kappa: str, sgn: str, p, name):
    D = f"(z*zb {sgn} 1)"
    lam = _cform("1", f"({kappa}*exp(i*u) - i*zb)/{D}", f"({kappa}*exp(-i*u) + i*z)/{D}")
    kk = f"({kappa}*{kappa} {sgn} 1)" if name != "generic_flat" else "1"
    mu0 = _cform("0", f"{kk}*2*exp(i*u)/{D}", "0")
    mu = _add(mu0, lam, f"-{kappa}")
    dom = "x*x + y*y < 0.8" if sgn == "-" else ""
    return _cong(_chart(((-1, 1), (-0.7, 0.7), (-0.7, 0.7)), dom), lam, mu, p, name)


def _generic_flat(p):
    return _generic_flat_like("sqrt(2)", "-", p, "generic_flat")


def _kappa_viii(p):
    return _generic_flat_like("kappa", "-", p, "kappa_viii")


def _kappa_ix(p):
    return _generic_flat_like("kappa", "+", p, "kappa_ix")


def _bianchi_ii(p):
    lam = _cform("1", "-i/2*zb", "i/2*z")
    mu = _add(_cform("0", "1", "0"), lam, "s*sqrt(2)*(1 - i)")
    return _cong(_chart(), lam, mu, p, "bianchi_ii")


def _bianchi_iv_generic(p):
    lam = ("1/y", "-log(y)/y", "0")
    mu = _add(("0", "1/y", "i/y"), lam, "s*sqrt(2)*(1 - i)*(wr + i*wi)")
    return _cong(_chart(((-1, 1), (-1, 1), (0.3, 2.0))), lam, mu, p, "bianchi_iv_generic")


SIGN = ParamSpec("s", 1.0, choices=(1.0, -1.0), doc="upper (+1) or lower (-1) sign")

_CONGRUENCES: list[CatalogEntry] = [
    CatalogEntry(
        "heisenberg_standard",
        "congruence",
        (),
        _heisenberg,
        lambda p: {"branch": "TwistOnly", "ts.k1": "0", "ts.k2": "0"},
        "Heisenberg group with the standard splitting",
        ("ts",),
    ),
    CatalogEntry(
        "rigid",
        "congruence",
        (ParamSpec("c", 0.0, -2.0, 2.0, doc="H = z zb + c (z zb)^2/4"),),
        _rigid,
        lambda p: {"branch": "TwistOnly", "ts.k1": "c/(1 + c*z*zb)^2", "ts.k2": "0"},
        "rigid CR structure with potential H",
        ("ts",),
        sweep=({"c": 0.0}, {"c": 1.0}, {"c": -0.5}),
    ),
    CatalogEntry(
        "epsilon_family",
        "congruence",
        (ParamSpec("e1", 0.0, -3, 3), ParamSpec("e2", 1.0, -3, 3)),
        _epsilon,
        lambda p: {
            "branch": "TwistOnly",
            "ts.k1": "8*e2*e2/((2*e2*z + i*e1)*(2*e2*zb - i*e1))^2",
            "ts.k2": "0",
        },
        "Heisenberg group split by the CR function e1 z + e2 (u + i|z|^2)",
        ("ts",),
        sweep=({"e1": 1.0, "e2": 0.0}, {"e1": 0.0, "e2": 1.0}, {"e1": 1.0, "e2": 1.0}),
    ),
    CatalogEntry(
        "poincare_disc",
        "congruence",
        (),
        lambda p: _taub({"s": 1.0}),
        lambda p: {
            "branch": "TwistOnly",
            "ts.k2": "0",
            "k1b.A1": "0",
            "k1b.sign": "1",
            "gauss.kappa": "-1",
        },
        "flat model with K1 = +1; leaves carry constant curvature -1",
        ("ts", "k1b", "gauss"),
    ),
    CatalogEntry(
        "spherical",
        "congruence",
        (),
        lambda p: _taub({"s": -1.0}),
        lambda p: {
            "branch": "TwistOnly",
            "ts.k2": "0",
            "k1b.A1": "0",
            "k1b.sign": "-1",
            "gauss.kappa": "1",
        },
        "flat model with K1 = -1; leaves carry constant curvature +1",
        ("ts", "k1b", "gauss"),
    ),
    CatalogEntry(
        "bianchi_vih",
        "congruence",
        (ParamSpec("tau", 0.8, -3, 3, exclude=(0.0,)), SIGN),
        _bianchi_vih,
        _bianchi_vih_expected,
        "homogeneous structures of Bianchi type VI_h",
        ("ts", "k1b"),
        sweep=(
            {"tau": -0.5, "s": -1.0},
            {"tau": -1.5, "s": -1.0},
            {"tau": 0.3, "s": 1.0},
            {"tau": -1.0, "s": 1.0},
        ),
    ),
    CatalogEntry(
        "bianchi_iv",
        "congruence",
        (),
        _bianchi_iv,
        lambda p: {"branch": "TwistOnly", "ts.k2": "0", "k1b.A1": "0.5", "k1b.B1": "0.5*i"},
        "homogeneous structure of Bianchi type IV",
        ("ts", "k1b"),
    ),
    CatalogEntry(
        "beta_family",
        "congruence",
        (ParamSpec("beta", -1.0, -4, 4, exclude=(0.0,)),),
        _beta,
        lambda p: {
            "branch": "TwistOnly",
            "k2b.K1": "(beta*beta*beta + 3)/(beta*beta)",
            "k2b.Z1": "-2*i/beta",
            "k2b.Z2": "-i/beta",
            "k2b.Z0": "-i*beta",
        },
        "homogeneous structures with K2 ≠ 0 and real parameter beta",
        ("ts", "k2b"),
        sweep=({"beta": -1.0}, {"beta": -(2 ** (1 / 3))}, {"beta": -(3 ** (1 / 3))}, {"beta": 0.5}, {"beta": 2.0}),
    ),
    CatalogEntry(
        "st_4sym",
        "congruence",
        (ParamSpec("alpha", 0.5, 0, 10),),
        _st_4sym,
        lambda p: {"branch": "ShearOnly", "st.T0": "alpha", "st.t1": "0", "st.k0": "0", "st.k1": "0"},
        "shear-only structures with a 4-dimensional symmetry group",
        ("st",),
        sweep=({"alpha": 0.0}, {"alpha": 0.5}, {"alpha": 1.0}, {"alpha": 2.0}),
    ),
    CatalogEntry(
        "st_h0_example",
        "congruence",
        (),
        _st_h0,
        lambda p: {
            "branch": "ShearOnly",
            "st.T0": "0",
            "st.t1": "0",
            "st.k1": "0",
            "st.K0": "-exp(-2*(u + x*y))",
            "str.A": "0.5*y*exp(u + x*y)",
            "str.B": "0.5*x*exp(-u - x*y)",
            "str.sign": "-1",
        },
        "shear-only example with f = x y",
        ("st", "str"),
    ),
    CatalogEntry(
        "st_alu",
        "congruence",
        (ParamSpec("a0", 0.0, -3, 3), ParamSpec("a1", 1.0, -3, 3)),
        _st_alu,
        lambda p: {"branch": "ShearOnly", "st.T0": "a0 + a1*u", "st.t1": "0", "st.k0": "0", "st.k1": "0"},
        "shear-only structures with T0 = alpha(u) = a0 + a1 u (h integrated numerically)",
        ("st",),
    ),
    CatalogEntry(
        "st_t1_homogeneous",
        "congruence",
        (ParamSpec("T0", 0.5, -5, 5, exclude=(0.0,)), SIGN),
        _st_t1_homogeneous,
        lambda p: {
            "branch": "ShearOnly",
            "str.variant_T1pm1": "1",
            "str.T0": "T0",
            "str.A": "-s",
            "str.B": "0",
            "str.C": "1",
            "str.sign": "s",
        },
        "homogeneous shear-only structures with T1 = ±1",
        ("st", "str"),
        sweep=({"T0": 0.5, "s": 1.0}, {"T0": 2.0, "s": -1.0}),
    ),
    CatalogEntry(
        "generic_flat",
        "congruence",
        (),
        _generic_flat,
        lambda p: {"branch": "Generic", "gen.k1": "0", "gen.k2": "0", "gen.k3": "0"},
        "flat structure with twist and shear (Bianchi VIII symmetry)",
        ("gen",),
    ),
    CatalogEntry(
        "kappa_viii",
        "congruence",
        (ParamSpec("kappa", 2.0, 0, 10, exclude=(0.0, 1.0)),),
        _kappa_viii,
        lambda p: {"branch": "Generic", "gen.k1": "0", "gen.k2": "0", "gen.k3": "-i*(1 - 2/(kappa*kappa))"},
        "one-parameter deformation of the flat generic structure (Bianchi VIII)",
        ("gen",),
        sweep=({"kappa": 0.5}, {"kappa": 2.0}, {"kappa": 3.0}),
    ),
    CatalogEntry(
        "kappa_ix",
        "congruence",
        (ParamSpec("kappa", 2.0, 0, 10, exclude=(0.0,)),),
        _kappa_ix,
        lambda p: {"branch": "Generic", "gen.k1": "0", "gen.k2": "0", "gen.k3": "-i*(1 + 2/(kappa*kappa))"},
        "one-parameter family with twist and shear (Bianchi IX)",
        ("gen",),
        sweep=({"kappa": 0.5}, {"kappa": 2.0}, {"kappa": 3.0}),
    ),
    CatalogEntry(
        "bianchi_ii",
        "congruence",
        (SIGN,),
        _bianchi_ii,
        lambda p: {
            "branch": "Generic",
            "gen.k1": "s*(1 - i)/sqrt(2)",
            "gen.k2": "s*(1 + i)/sqrt(2)",
            "gen.k3": "-i",
        },
        "the two generic structures with Bianchi II symmetry",
        ("gen",),
        sweep=({"s": 1.0}, {"s": -1.0}),
    ),
    CatalogEntry(
        "bianchi_iv_generic",
        "congruence",
        (ParamSpec("wr", 1.0, -5, 5), ParamSpec("wi", 0.5, -5, 5), SIGN),
        _bianchi_iv_generic,
        lambda p: {
            "branch": "Generic",
            "gen.k1": "±(s*(1 - i)/sqrt(2) + i/(2*(wr - i*wi)))",
            "gen.k2": "±(s*(1 + i)/sqrt(2) + i/(2*(wr + i*wi)))",
            "gen.k3": "-i + s*((1 + i)/(wr - i*wi) + (1 - i)/(wr + i*wi))/(2*sqrt(2))",
        },
        "two-parameter generic families with Bianchi IV symmetry",
        ("gen",),
        sweep=({"wr": 1.0, "wi": 0.5, "s": 1.0}, {"wr": -0.7, "wi": 2.0, "s": -1.0}),
    ),
]

ENTRIES: dict[str, CatalogEntry] = {e.name: e for e in _CONGRUENCES}


def register(entry: CatalogEntry) -> None:
    ENTRIES[entry.name] = entry


def catalog_names() -> list[str]:
    return sorted(ENTRIES)


def catalog_get(name: str, params: Mapping[str, float] | None = None) -> CatalogItem:
    _load_metric_entries()
    try:
        entry = ENTRIES[name]
    except KeyError:
        raise CatalogError(f"unknown catalog entry {name!r}") from None
    p = entry.resolve(params)
    return CatalogItem(entry, p, entry.builder(p), entry.expected(p))


def catalog_json() -> str:
    _load_metric_entries()
    return json.dumps([ENTRIES[n].to_dict() for n in catalog_names()], indent=2, sort_keys=True)


RESIDUAL_TOL = 1e-6
_METRICS_LOADED = False


def _load_metric_entries() -> None:
    global _METRICS_LOADED
    if not _METRICS_LOADED:
        _METRICS_LOADED = True
        from . import spacetime  # noqa: F401  (registers metric entries)

        for e in spacetime.catalog_entries():
            register(e)


# ----------------------------------------------------------------------
# verification


@dataclass
class Check:
    key: str
    expected: str
    max_error: float
    n: int
    ok: bool
    note: str = ""

    def to_dict(self) -> dict:
        d = {"key": self.key, "expected": self.expected, "max_error": self.max_error, "n": self.n, "ok": self.ok}
        if self.note:
            d["note"] = self.note
        return d


@dataclass
class VerifyReport:
    name: str
    params: dict[str, float]
    checks: list[Check] = field(default_factory=list)
    error: str = ""

    @property
    def ok(self) -> bool:
        return not self.error and all(c.ok for c in self.checks)

    def to_dict(self) -> dict:
        d = {
            "name": self.name,
            "params": dict(sorted(self.params.items())),
            "ok": self.ok,
            "checks": [c.to_dict() for c in self.checks],
        }
        if self.error:
            d["error"] = self.error
        return d


def compute_quantities(item: CatalogItem, point: Sequence[float], pipelines: Sequence[str]) -> dict[str, object]:
    """Run the named pipelines at one point; keys are ``pipeline.quantity``."""
    from . import invariants as inv

    c = item.obj
    out: dict[str, object] = {}
    res: dict[str, float] = {}
    for pl in pipelines:
        if pl == "ts":
            r = inv.ts_invariants(c, point)
            out.update({"ts.k1": r.k1, "ts.k2": r.k2})
            res[pl] = r.max_residual
        elif pl == "k1b":
            r = inv.ts_reduce_k1_branch(c, point)
            out.update({"k1b.A1": r.A1, "k1b.sign": r.sign})
            if r.B1 is not None:
                out["k1b.B1"] = r.B1
            res[pl] = r.max_residual
        elif pl == "k2b":
            r = inv.ts_reduce_k2_branch(c, point)
            out.update({"k2b.K1": r.K1, "k2b.Z0": r.Z0, "k2b.Z1": r.Z1, "k2b.Z2": r.Z2})
            res[pl] = r.max_residual
        elif pl == "gauss":
            kappa, expected, rr = inv.gauss_curvature_check(c, point)
            out["gauss.kappa"] = kappa
            out["gauss.relation"] = kappa - expected
            res[pl] = max(rr.values())
        elif pl == "st":
            r = inv.st_invariants(c, point)
            out.update({"st.T0": r.T0, "st.t1": r.t1, "st.k0": r.k0, "st.k1": r.k1, "st.K0": r.K0})
            res[pl] = r.max_residual
        elif pl == "str":
            r = inv.st_reduce(c, point)
            out.update({"str.T0": r.T0, "str.A": r.A, "str.B": r.B, "str.C": r.C, "str.K0": r.K0, "str.sign": r.sign})
            out[f"str.variant_{r.variant}"] = 1.0
            res[pl] = r.max_residual
        elif pl == "gen":
            r = inv.generic_invariants(c, point)
            out.update({"gen.k1": r.k1, "gen.k2": r.k2, "gen.k3": r.k3})
            res[pl] = r.max_residual
        else:
            from . import spacetime

            out.update(spacetime.catalog_quantities(item, point, pl, res))
    for k, v in res.items():
        out[f"residual.{k}"] = v
    return out


def catalog_verify(
    name: str,
    params: Mapping[str, float] | None = None,
    n_points: int | None = None,
    seed: int = 0,
    tol: float | None = None,
) -> VerifyReport:
    """Compare computed invariants with the entry's expected table."""
    try:
        item = catalog_get(name, params)
    except CatalogError as exc:
        return VerifyReport(name, dict(params or {}), error=str(exc))
    entry = item.entry
    tol = entry.tol if tol is None else tol
    n_points = entry.points if n_points is None else n_points
    rep = VerifyReport(name, item.params)
    try:
        if entry.kind == "congruence":
            _verify_congruence(item, n_points, seed, tol, rep)
        else:
            from . import spacetime

            spacetime.verify_metric_item(item, n_points, seed, tol, rep)
    except (ArithmeticError, ValueError) as exc:
        rep.error = f"{type(exc).__name__}: {exc}"
    return rep


def _verify_congruence(item: CatalogItem, n_points: int, seed: int, tol: float, rep: VerifyReport) -> None:
    c: OrientedCongruence = item.obj
    expected = dict(item.expected)
    want_branch = expected.pop("branch", None)
    if want_branch is not None:
        bc = classify_branch(c, n_points=max(8, n_points), seed=seed)
        rep.checks.append(
            Check("branch", want_branch, 0.0 if bc.branch.value == want_branch else 1.0, 1, bc.branch.value == want_branch,
                  note=bc.branch.value)
        )
    points = c.sample(n_points, seed=seed)
    errs = {k: 0.0 for k in expected}
    resid: dict[str, float] = {}
    for pt in points:
        q = compute_quantities(item, pt, item.entry.pipelines)
        env = dict(item.params)
        for k, ex in expected.items():
            if k not in q:
                errs[k] = math.inf
                continue
            either_sign = ex.startswith("±")
            want = eval_value(c.chart.expr(parse(ex.lstrip("±"))), pt, env, c.chart.names)
            got = complex(q[k])
            diff = min(abs(got - want), abs(got + want)) if either_sign else abs(got - want)
            errs[k] = max(errs[k], diff / max(1.0, abs(want)))
        for k, v in q.items():
            if k.startswith("residual."):
                resid[k] = max(resid.get(k, 0.0), float(v))
    for k, e in errs.items():
        rep.checks.append(Check(k, expected[k], e, len(points), e < tol))
    for k, e in sorted(resid.items()):
        rep.checks.append(Check(k, "0", e, len(points), e < RESIDUAL_TOL))
