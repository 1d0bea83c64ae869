"""Cartan reductions for the four branches of oriented congruences.

Every routine works at a single chart point.  Invariants are computed as
jets, so the structural systems they are supposed to satisfy can be checked
as identities between Taylor polynomials, not only between values.  Indices
of reduced coframes are ``0 = ω``, ``1 = ω₁``, ``2 = ω̄₁`` and, on the
5-dimensional bundle of the twisting branch, ``3 = Ω``, ``4 = Ω̄``.

Residuals are relative: ``max|lhs - rhs| / max(1, max|lhs|, max|rhs|)``
over every Taylor coefficient that survives the derivatives involved.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from . import jets
from ._geometry import gaussian_curvature
from .congruence import (
    LAM,
    MU,
    MUB,
    Branch,
    BranchMismatch,
    OrientedCongruence,
    StructureFunctions,
    classify_branch,
    structure_functions,
)
from .expr import Expr, eval_jet, parse, substitute
from .forms import Chart, Coframe, complex_shorthands, exterior_d
from .jets import Jet

__all__ = [
    "A1Zero",
    "AmbiguousVariant",
    "DerivedCoefficients",
    "TSInvariants",
    "TSReducedK1",
    "TSReducedK2",
    "STInvariants",
    "STReduced",
    "GenericInvariants",
    "ts_invariants",
    "ts_reduce_k1_branch",
    "ts_reduce_k2_branch",
    "gauss_curvature_check",
    "st_invariants",
    "st_reduce",
    "st_variant",
    "generic_invariants",
    "liouville_residual",
    "invariants",
]

W, W1, W1B, OM, OMB = 0, 1, 2, 3, 4
REDUCTION_ORDER = 8


class A1Zero(ArithmeticError):
    """``A₁`` vanishes, so the phase normalization that fixes ``B₁`` is unavailable."""


class AmbiguousVariant(ValueError):
    """Sampled relative invariants straddle the vanishing threshold."""


# ----------------------------------------------------------------------
# small helpers


def _val(j: Jet | complex) -> complex:
    return complex(j.value) if isinstance(j, Jet) else complex(j)


def _real(j: Jet | float) -> float:
    return float(np.real(_val(j)))


def _max_abs(x) -> float:
    return x.max_abs() if isinstance(x, Jet) else float(abs(x))


def residual(lhs, rhs) -> float:
    """Relative mismatch of two jets (or a jet and a constant)."""
    if not isinstance(lhs, Jet) and not isinstance(rhs, Jet):
        diff = abs(complex(lhs) - complex(rhs))
        return diff / max(1.0, abs(complex(lhs)), abs(complex(rhs)))
    diff = lhs - rhs
    scale = max(1.0, _max_abs(lhs), _max_abs(rhs))
    return _max_abs(diff) / scale


def _terms_two_form(terms, n: int, like: Jet) -> Jet:
    """Frame components of ``Σ coef θ^b∧θ^c``; ``coef`` jets or constants."""
    order = like.order
    for coef, _, _ in terms:
        if isinstance(coef, Jet):
            order = min(order, coef.order)
    out = jets.jet_zeros((n, n), like.dim, order)
    c = out.coeffs
    for coef, b, cc in terms:
        if isinstance(coef, Jet):
            cj = coef.truncate(order).coeffs
            c[b, cc] += cj
            c[cc, b] -= cj
        else:
            c[b, cc, 0] += coef
            c[cc, b, 0] -= coef
    return out


def _system(cf: Coframe, expected: Mapping[str, tuple[int, list]]) -> dict[str, float]:
    """Check ``dθ^a`` against term lists; ``expected[name] = (a, terms)``."""
    C = cf.structure()
    out = {}
    for name, (a, terms) in expected.items():
        E = _terms_two_form(terms, cf.n, C)
        out[name] = residual(C[a], E)
    return out


def _two_form_check(F: Jet, terms, n: int) -> float:
    return residual(F, _terms_two_form(terms, n, F))


def _pad(form: Jet, n: int) -> Jet:
    """Extend the components of a 1-form by zeros to ``n`` slots."""
    c = np.zeros(form.shape[:-1] + (n,) + form.coeffs.shape[-1:], complex)
    c[..., : form.shape[-1], :] = form.coeffs
    return Jet(c, form.dim, form.order)


def _embed(j: Jet, dim: int) -> Jet:
    return jets.embed(j, dim, tuple(range(j.dim)))


def _unit_form(k: int, n: int, dim: int, order: int) -> Jet:
    c = np.zeros((n, jets.n_coeffs(dim, order)), complex)
    c[k, 0] = 1.0
    return Jet(c, dim, order)


@dataclass
class DerivedCoefficients:
    """Higher-order invariants named after the decompositions that define them.

    ``values`` holds the numbers at the point; ``checks`` holds residuals of
    the identities these coefficients take part in.
    """

    values: dict[str, complex] = field(default_factory=dict)
    checks: dict[str, float] = field(default_factory=dict)

    def __getitem__(self, key: str) -> complex:
        return self.values[key]

    def __contains__(self, key: str) -> bool:
        return key in self.values

    def max_check(self) -> float:
        return max(self.checks.values(), default=0.0)

    def to_dict(self) -> dict:
        return {
            "values": {k: _cplx(v) for k, v in sorted(self.values.items())},
            "checks": dict(sorted(self.checks.items())),
        }


def _cplx(v) -> object:
    v = complex(v)
    if v.imag == 0.0:
        return v.real
    return [v.real, v.imag]


def _report_dict(obj, fields: Sequence[str]) -> dict:
    out = {}
    for f in fields:
        v = getattr(obj, f)
        if isinstance(v, DerivedCoefficients):
            out[f] = v.to_dict()
        elif isinstance(v, dict):
            out[f] = {k: float(x) for k, x in sorted(v.items())}
        elif isinstance(v, (complex, np.complexfloating)):
            out[f] = _cplx(v)
        elif isinstance(v, (float, int, np.floating, np.integer)) and not isinstance(v, bool):
            out[f] = float(v) if isinstance(v, (float, np.floating)) else int(v)
        else:
            out[f] = v
    return out


# ----------------------------------------------------------------------
# twisting, shear-free branch: relative invariants


@dataclass
class _TSData:
    sf: StructureFunctions
    log_a: Jet
    la_mu: Jet
    la_mub: Jet
    k1: Jet
    k1_bracket: Jet
    k2: Jet
    omega_m: Jet  # the part of Ω that lives on M, as a 1-form


def _ts_data(sf: StructureFunctions) -> _TSData:
    a, b, p, q = sf.a, sf.b, sf.p, sf.q
    pb, bb, qb = p.conj(), b.conj(), q.conj()
    la = jets.log(a)
    la_mu, la_mub = sf.d_mu(la), sf.d_mub(la)
    bracket = (
        sf.d_mub(la_mu)
        - la_mu * p
        - 1j * q * a
        - sf.d_mub(b)
        + b * p
        - 2 * sf.d_mub(pb)
        + 2 * p * pb
    )
    a_mu = sf.d_mu(a)
    k2 = (
        sf.d_lam(a_mu)
        - a * sf.d_lam(b)
        + 1j * la_mu * (sf.d_mub(b) - sf.d_mu(bb) - b * p + bb * pb)
        - 2 * a_mu * q
        - a * sf.d_mu(q)
        - sf.d_mu(a * qb)
        - a * b * qb
    )
    M = sf.mu
    omega_m = (pb + b - la_mu) * M - p * M.conj() - q * sf.lam
    return _TSData(sf, la, la_mu, la_mub, bracket.real, bracket, k2, omega_m)


@dataclass
class TSInvariants:
    """Relative invariants ``k₁, k₂`` and their values on the bundle."""

    k1: float
    k2: complex
    rho: float
    phi: float
    K1: float
    K2: complex
    k1_imag: float
    residuals: dict[str, float]
    scale: float

    @property
    def max_residual(self) -> float:
        return max(self.residuals.values(), default=0.0)

    def to_dict(self) -> dict:
        return _report_dict(
            self, ["k1", "k2", "rho", "phi", "K1", "K2", "k1_imag", "residuals", "scale"]
        )


def ts_invariants(
    c: OrientedCongruence,
    point: Sequence[float],
    rho: float = 1.0,
    phi: float = 0.0,
    order: int = 6,
    check: bool = True,
) -> TSInvariants:
    """``k₁, k₂`` at ``point`` and ``K₁ = k₁/ρ², K₂ = e^{-iφ} k₂/ρ³``.

    With ``check`` the normalized coframe is rebuilt on the 5-dimensional
    bundle (coordinates: the chart plus ``ρ``, ``φ``) and all five
    structure equations are verified there.
    """
    sf = structure_functions(c, point, order)
    if abs(sf.s.value) > 1e-8 * max(1.0, sf.scale()):
        raise BranchMismatch("the shear s does not vanish at this point")
    if abs(sf.a.value) < 1e-12 * max(1.0, sf.scale()):
        raise BranchMismatch("the twist a vanishes at this point")
    d = _ts_data(sf)
    k1 = _real(d.k1)
    k2 = _val(d.k2)
    res: dict[str, float] = {}
    if check:
        res = _ts_bundle_check(d, rho, phi)
    imag = abs(_val(d.k1_bracket).imag) / max(1.0, abs(_val(d.k1_bracket)))
    return TSInvariants(
        k1=k1,
        k2=k2,
        rho=rho,
        phi=phi,
        K1=k1 / rho**2,
        K2=np.exp(-1j * phi) * k2 / rho**3,
        k1_imag=imag,
        residuals=res,
        scale=sf.scale(),
    )


def _ts_bundle_check(d: _TSData, rho: float, phi: float) -> dict[str, float]:
    sf = d.sf
    order = d.omega_m.order
    dim = 5
    R = jets.jet_variable(3, rho, dim, order)
    F = jets.jet_variable(4, phi, dim, order)
    a = _embed(sf.a, dim)
    L = _pad(_embed(sf.lam, dim), dim)
    M = _pad(_embed(sf.mu, dim), dim)
    Om = _pad(_embed(d.omega_m, dim), dim)
    drho = _unit_form(3, dim, dim, order)
    dphi = _unit_form(4, dim, dim, order)
    w = (R * R / a) * L
    w1 = R * jets.exp(1j * F) * M
    Omega = drho / R + 1j * dphi + Om
    theta = jets.stack([w, w1, w1.conj(), Omega, Omega.conj()])
    cf = Coframe(theta)
    K1 = _embed(d.k1, dim) / (R * R)
    K2 = jets.exp(-1j * F) * _embed(d.k2, dim) / (R * R * R)
    expected = {
        "d_omega": (W, [(1j, W1, W1B), (1.0, OM, W), (1.0, OMB, W)]),
        "d_omega1": (W1, [(1.0, OM, W1)]),
        "d_omega1_bar": (W1B, [(1.0, OMB, W1B)]),
        "d_Omega": (OM, [(K1, W1, W1B), (K2, W1, W)]),
        "d_Omega_bar": (OMB, [(-K1, W1, W1B), (K2.conj(), W1B, W)]),
    }
    return _system(cf, expected)


# ----------------------------------------------------------------------
# twisting branch with k2 ≡ 0: the K1 normalization


@dataclass
class TSReducedK1:
    """Scalar invariants after normalizing ``K₁ = ±1``.

    ``A1`` follows the normalization of the reduced system in which
    ``dω = iω₁∧ω̄₁ + 2A₁(ω₁+ω̄₁)∧ω``; ``B1`` is ``None`` when ``A1`` vanishes.
    """

    A1: float
    B1: complex | None
    sign: int
    a1_zero: bool
    k1: float
    B0: complex
    residuals: dict[str, float]
    derived: DerivedCoefficients

    @property
    def max_residual(self) -> float:
        return max([*self.residuals.values(), self.derived.max_check()], default=0.0)

    def to_dict(self) -> dict:
        return _report_dict(
            self, ["A1", "B1", "sign", "a1_zero", "k1", "B0", "residuals", "derived"]
        )


@dataclass
class _K1Frame:
    sf: StructureFunctions
    data: _TSData
    sign: int
    r2: Jet  # ρ² = |k1|
    X: Jet
    a1_zero: bool
    phi: Jet
    A1: Jet
    cf: Coframe
    sigma: Jet
    plus: Jet  # pullback of Ω + Ω̄


def _k1_frame(c: OrientedCongruence, point, order: int, zero_tol: float = 1e-9) -> _K1Frame:
    sf = structure_functions(c, point, order)
    if abs(sf.s.value) > 1e-8 * max(1.0, sf.scale()):
        raise BranchMismatch("the shear s does not vanish at this point")
    d = _ts_data(sf)
    k1v = _real(d.k1)
    scale = max(1.0, abs(k1v))
    if abs(k1v) < 1e-10:
        raise BranchMismatch("k1 vanishes; the K1 normalization is unavailable")
    if abs(_val(d.k2)) > 1e-6 * scale**1.5:
        raise BranchMismatch("k2 does not vanish; use the K2 reduction")
    sign = 1 if k1v > 0 else -1
    r2 = d.k1 * sign
    X = sf.d_mu(jets.log(r2 / sf.a)) + sf.b
    xs = abs(_val(X)) / max(1.0, math.sqrt(abs(k1v)))
    a1_zero = xs < zero_tol
    if a1_zero:
        phi = jets.jet_zeros((), X.dim, X.order)
        A1 = jets.jet_zeros((), X.dim, X.order)
    else:
        phi = jets.arg(X)
        A1 = 0.5 * jets.cabs(X) / jets.sqrt(r2)
    L, M = sf.lam, sf.mu
    w = (r2 / sf.a) * L
    w1 = jets.sqrt(r2) * jets.exp(1j * phi) * M
    cf = Coframe(jets.stack([w, w1, w1.conj()]))
    la_mu, la_mub = d.la_mu, d.la_mub
    b, p, q = sf.b, sf.p, sf.q
    sigma = phi.grad() + (
        (2 * p.conj() + b - la_mu) * M
        - (2 * p + b.conj() - la_mub) * M.conj()
        + (q.conj() - q) * L
    ) * (-0.5j)
    plus = jets.log(r2).grad() + (b - la_mu) * M + (b.conj() - la_mub) * M.conj() - (q + q.conj()) * L
    return _K1Frame(sf, d, sign, r2, X, a1_zero, phi, A1, cf, sigma, plus)


def ts_reduce_k1_branch(
    c: OrientedCongruence, point: Sequence[float], order: int = REDUCTION_ORDER
) -> TSReducedK1:
    """Normalize ``ρ² = |k₁|`` and fix the phase so that ``A₁`` is real and positive."""
    fr = _k1_frame(c, point, order)
    cf, A1, sg = fr.cf, fr.A1, fr.sign
    Bc = cf.components1(fr.sigma)
    B0, B1, B1b = Bc[W], Bc[W1], Bc[W1B]
    res = _system(
        cf,
        {
            "k1branch_d_omega": (W, [(1j, W1, W1B), (2 * A1, W1, W), (2 * A1, W1B, W)]),
            "k1branch_d_omega1": (W1, [(-(A1 + 1j * B1.conj()), W1, W1B)]),
            "k1branch_d_omega1_bar": (W1B, [(A1 - 1j * B1, W1, W1B)]),
        },
    )
    dS = cf.d(fr.sigma)
    res["k1branch_d_sigma"] = _two_form_check(dS, [(-1j * sg, W1, W1B)], 3)
    res["B0"] = residual(B0, 0.0)
    res["sigma_real"] = residual(B1b, B1.conj())
    pc = cf.components1(fr.plus)
    res["da"] = max(residual(pc[W], 0.0), residual(pc[W1], 2 * A1), residual(pc[W1B], 2 * A1))
    derived = DerivedCoefficients()
    if not fr.a1_zero:
        dA = cf.derivatives(A1)
        dB = cf.derivatives(B1)
        a11 = dA[W1].real
        derived.values["a11"] = _val(a11)
        derived.values["B11"] = _val(dB[W1])
        coef = dB[W1B]
        derived.values["b12"] = _val(coef.real)
        derived.checks["k1branch_integrability_dA_omega"] = residual(dA[W], 0.0)
        derived.checks["k1branch_integrability_dA_omega1"] = residual(dA[W1].imag, 0.5 * A1 * (B1 + B1.conj()).real)
        derived.checks["k1branch_integrability_dB_omega"] = residual(dB[W], 0.0)
        rhs = (0.5 * A1 * (B1.conj() - B1)).imag + (0.5 * sg - B1 * B1.conj()).real
        derived.checks["k1branch_integrability_dB_omega1_bar"] = residual(coef.imag, rhs)
    return TSReducedK1(
        A1=_real(A1),
        B1=None if fr.a1_zero else _val(B1),
        sign=sg,
        a1_zero=fr.a1_zero,
        k1=_real(fr.data.k1),
        B0=_val(B0),
        residuals=res,
        derived=derived,
    )


def gauss_curvature_check(
    c: OrientedCongruence,
    point: Sequence[float],
    t: float = 0.0,
    A: Expr | str | None = None,
    leaf: Sequence[int] = (1, 2),
    order: int = REDUCTION_ORDER,
) -> tuple[float, float, dict[str, float]]:
    """Gaussian curvature of ``2 e^{-2(A+t)} ω₁ω̄₁`` on the leaf space.

    The congruence must be tangent to the remaining chart direction, and the
    leaf space is parametrized by the variables listed in ``leaf``.  ``A`` is
    a potential with ``2dA`` equal to the pullback of ``Ω + Ω̄``; by default
    ``½ log(|k₁|/a)``, which is such a potential whenever ``b`` and ``q``
    vanish (rigid representatives).  Returns ``(κ, ∓e^{2(A+t)}, residuals)``.
    """
    fr = _k1_frame(c, point, order)
    if A is None:
        Aj = 0.5 * jets.log(fr.r2 / fr.sf.a).real
    else:
        Aj = c.chart.scalar(A, point, order, c.params)
    w1 = fr.cf.forms[W1]
    res = {"potential": residual(2 * Aj.grad(), fr.plus)}
    fib = [k for k in range(3) if k not in leaf]
    if len(fib) != 1:
        raise ValueError("leaf must name two of the three chart variables")
    f = fib[0]
    res["transverse"] = residual(w1[f], 0.0)
    conf = jets.exp(-2 * (Aj + t))
    g = jets.jeinsum("i,j->ij", w1, w1.conj())
    g = (g + g.T) * conf
    g = g.real
    res["fiber_invariance"] = residual(g.deriv(f), 0.0)
    g2 = jets.stack([jets.stack([g[i, j] for j in leaf]) for i in leaf])
    g2 = jets.restrict(g2, leaf)
    kappa = _real(gaussian_curvature(g2))
    expected = -fr.sign * math.exp(2 * (_real(Aj) + t))
    return kappa, expected, res


# ----------------------------------------------------------------------
# twisting branch with k2 ≠ 0


@dataclass
class TSReducedK2:
    Z0: complex
    Z1: complex
    Z2: complex
    K1: float
    residuals: dict[str, float]
    derived: DerivedCoefficients

    @property
    def max_residual(self) -> float:
        return max([*self.residuals.values(), self.derived.max_check()], default=0.0)

    def to_dict(self) -> dict:
        return _report_dict(self, ["Z0", "Z1", "Z2", "K1", "residuals", "derived"])


def ts_reduce_k2_branch(
    c: OrientedCongruence, point: Sequence[float], order: int = REDUCTION_ORDER
) -> TSReducedK2:
    """Normalize ``K₂ = 1`` (``ρ = |k₂|^{1/3}``, ``φ = Arg k₂``) and reduce to M."""
    sf = structure_functions(c, point, order)
    if abs(sf.s.value) > 1e-8 * max(1.0, sf.scale()):
        raise BranchMismatch("the shear s does not vanish at this point")
    d = _ts_data(sf)
    if abs(_val(d.k2)) < 1e-10:
        raise BranchMismatch("k2 vanishes at this point")
    rho = jets.power(jets.cabs(d.k2), 1.0 / 3.0)
    phi = jets.arg(d.k2)
    L, M = sf.lam, sf.mu
    w = (rho * rho / sf.a) * L
    w1 = rho * jets.exp(1j * phi) * M
    Omega = jets.log(rho).grad() + 1j * phi.grad() + d.omega_m
    cf = Coframe(jets.stack([w, w1, w1.conj()]))
    Zc = cf.components1(Omega)
    Z0, Z1, Z2 = Zc[W], Zc[W1], Zc[W1B]
    K1 = d.k1 / (rho * rho)
    res = _system(
        cf,
        {
            "k2branch_d_omega": (
                W,
                [(1j, W1, W1B), (Z1 + Z2.conj(), W1, W), (Z2 + Z1.conj(), W1B, W)],
            ),
            "k2branch_d_omega1": (W1, [(-Z2, W1, W1B), (-Z0, W1, W)]),
            "k2branch_d_omega1_bar": (W1B, [(Z2.conj(), W1, W1B), (-Z0.conj(), W1B, W)]),
        },
    )
    res["d_Omega"] = _two_form_check(cf.d(Omega), [(K1, W1, W1B), (1.0, W1, W)], 3)
    dZ0, dZ1, dZ2, dK = (cf.derivatives(z) for z in (Z0, Z1, Z2, K1))
    der = DerivedCoefficients()
    v = der.values
    v["Z00"], v["Z01"], v["Z02"] = _val(dZ0[W]), _val(dZ0[W1]), _val(dZ0[W1B])
    v["Z11"], v["Z21"], v["Z22"] = _val(dZ1[W1]), _val(dZ2[W1]), _val(dZ2[W1B])
    v["K11"], v["K10"] = _val(dK[W1]), _val(dK[W])
    Z0b, Z1b, Z2b = Z0.conj(), Z1.conj(), Z2.conj()
    ck = der.checks
    ck["k2branch_derived_dZ1_omega1_bar"] = residual(
        dZ1[W1B], -K1 + 1j * Z0 - Z1 * Z2 + Z2 * Z2b + dZ2[W1]
    )
    ck["k2branch_derived_dZ1_omega"] = residual(dZ1[W], Z0 * Z2b + dZ0[W1] - 1.0)
    ck["k2branch_derived_dZ2_omega"] = residual(dZ2[W], dZ0[W1B] + Z0 * Z1b + Z0 * Z2 - Z0b * Z2)
    ck["k2branch_derived_dK1_real"] = residual(dK[W1B], dK[W1].conj())
    return TSReducedK2(
        Z0=_val(Z0),
        Z1=_val(Z1),
        Z2=_val(Z2),
        K1=_real(K1),
        residuals=res,
        derived=der,
    )


# ----------------------------------------------------------------------
# shear-only branch


@dataclass
class _STData:
    sf: StructureFunctions
    eps: int
    sgn: float
    abs_s: Jet
    psi: Jet
    phase: Jet  # e^{i(ψ - επ)/2}
    T0: Jet
    T0_imag: Jet
    t1: Jet
    k0: Jet
    k1: Jet
    omega_rest: Jet  # Ω minus d log ρ, as a 1-form on M


def _st_data(sf: StructureFunctions, eps: int = 0) -> _STData:
    if eps not in (0, 1):
        raise ValueError("epsilon is 0 or 1")
    b, p, q, s = sf.b, sf.p, sf.q, sf.s
    pb, qb = p.conj(), q.conj()
    sgn = -1.0 if eps else 1.0
    abs_s = jets.cabs(s)
    psi = jets.arg(s)
    phase = jets.exp(0.5j * (psi - eps * math.pi))
    psi_l, psi_m, psi_mb = sf.d(psi)
    T0c = (psi_l + 1j * (qb - q)) / (2 * abs_s) * sgn
    t1 = (b * abs_s + sf.d_mu(abs_s)) * phase / abs_s
    k0 = (
        -sf.d_mub(psi_m)
        - sf.d_mu(psi_mb)
        + p * psi_m
        + pb * psi_mb
        + 2j * (sf.d_mu(p) - sf.d_mub(pb))
    )
    half = jets.exp(0.5j * psi)
    k1 = 2 * (t1 - t1.conj()) + np.exp(0.5j * eps * math.pi) * (
        (b * qb - b * q - sf.d_mu(q) + sf.d_mu(qb) + 1j * q * psi_m - 1j * sf.d_lam(psi_m)) * half
        + 1j * psi_mb * abs_s / half
    ) / abs_s
    L, M = sf.lam, sf.mu
    rest = (
        (1j * psi_m - 2 * pb) * 0.5 * M
        + (-1j * psi_mb - 2 * p) * 0.5 * M.conj()
        + (1 - sgn * (q + qb) / (2 * abs_s)) * (sgn * abs_s) * L
    )
    return _STData(sf, eps, sgn, abs_s, psi, phase, T0c.real, T0c.imag, t1, k0, k1, rest)


def _require_st(sf: StructureFunctions) -> None:
    if abs(sf.a.value) > 1e-8 * max(1.0, sf.scale()):
        raise BranchMismatch("the twist a does not vanish at this point")
    if abs(sf.s.value) < 1e-12 * max(1.0, sf.scale()):
        raise BranchMismatch("the shear s vanishes at this point")


@dataclass
class STInvariants:
    """``T₀`` and the relative invariants ``t₁, k₀, k₁`` of the shear-only branch."""

    T0: float
    t1: complex
    k0: float
    k1: complex
    epsilon: int
    rho: float
    T1: complex
    K0: float
    K1: complex
    T0_imag: float
    residuals: dict[str, float]
    scale: float

    @property
    def max_residual(self) -> float:
        return max(self.residuals.values(), default=0.0)

    def to_dict(self) -> dict:
        return _report_dict(
            self,
            ["T0", "t1", "k0", "k1", "epsilon", "rho", "T1", "K0", "K1", "T0_imag", "residuals", "scale"],
        )


def st_invariants(
    c: OrientedCongruence,
    point: Sequence[float],
    rho: float = 1.0,
    epsilon: int = 0,
    order: int = 6,
    check: bool = True,
) -> STInvariants:
    sf = structure_functions(c, point, order)
    _require_st(sf)
    d = _st_data(sf, epsilon)
    res = _st_bundle_check(d, rho) if check else {}
    t1, k0, k1 = _val(d.t1), _real(d.k0), _val(d.k1)
    T0 = _real(d.T0)
    return STInvariants(
        T0=T0,
        t1=t1,
        k0=k0,
        k1=k1,
        epsilon=epsilon,
        rho=rho,
        T1=t1 / rho,
        K0=k0 / (2 * rho**2),
        K1=k1 / (2 * rho),
        T0_imag=abs(_real(d.T0_imag)) / max(1.0, abs(T0)),
        residuals=res,
        scale=sf.scale(),
    )


def _st_bundle_check(d: _STData, rho: float) -> dict[str, float]:
    sf = d.sf
    order = d.omega_rest.order
    dim = 4
    R = jets.jet_variable(3, rho, dim, order)
    L = _pad(_embed(sf.lam, dim), dim)
    M = _pad(_embed(sf.mu, dim), dim)
    rest = _pad(_embed(d.omega_rest, dim), dim)
    w = _embed(d.abs_s, dim) * d.sgn * L
    w1 = R * _embed(d.phase, dim).conj() * M
    Omega = _unit_form(3, dim, dim, order) / R + rest
    cf = Coframe(jets.stack([w, w1, w1.conj(), Omega]))
    T0 = _embed(d.T0, dim)
    T1 = _embed(d.t1, dim) / R
    K0 = _embed(d.k0, dim) / (2 * R * R)
    K1 = _embed(d.k1, dim) / (2 * R)
    return _system(
        cf,
        {
            "d_omega": (W, [(T1, W1, W), (T1.conj(), W1B, W)]),
            "d_omega1": (W1, [(1.0, 3, W1), (1.0 + 1j * T0, W1, W), (1.0, W1B, W)]),
            "d_omega1_bar": (W1B, [(1.0, 3, W1B), (1.0, W1, W), (1.0 - 1j * T0, W1B, W)]),
            "d_Omega": (3, [(1j * K0, W1, W1B), (K1, W1, W), (K1.conj(), W1B, W)]),
        },
    )


ST_VARIANTS = ("K0norm", "K1circle", "K1pm1", "T1circle", "T1pm1")


def st_variant(
    c: OrientedCongruence,
    n_points: int = 32,
    tol: float = 1e-8,
    seed: int | None = None,
    points: Sequence[Sequence[float]] | None = None,
    order: int = 4,
) -> str:
    """Select the reduction variant from the vanishing pattern of ``t₁, k₁, k₀``."""
    if points is None:
        points = c.sample(n_points, seed=seed)
    mags = {"t1": [], "t1_im": [], "k1": [], "k1_im": [], "k0": []}
    for pt in points:
        sf = structure_functions(c, pt, order)
        _require_st(sf)
        d = _st_data(sf)
        scale = max(1.0, sf.scale())
        t1, k1 = _val(d.t1), _val(d.k1)
        mags["t1"].append(abs(t1) / scale)
        mags["t1_im"].append(abs(t1.imag) / scale)
        mags["k1"].append(abs(k1) / scale)
        mags["k1_im"].append(abs(k1.imag) / scale)
        mags["k0"].append(abs(_real(d.k0)) / scale)

    def vanishes(key: str) -> bool:
        vals = np.array(mags[key])
        small = vals < tol
        if small.all():
            return True
        if not small.any():
            return False
        raise AmbiguousVariant(f"{key} vanishes at some sampled points but not at others")

    if not vanishes("t1"):
        return "T1pm1" if vanishes("t1_im") else "T1circle"
    if not vanishes("k1"):
        return "K1pm1" if vanishes("k1_im") else "K1circle"
    if not vanishes("k0"):
        return "K0norm"
    raise BranchMismatch("t1, k1 and k0 all vanish: no reduction to M (4-dimensional symmetry case)")


@dataclass
class STReduced:
    """Scalar invariants of the shear-only branch after the reduction to M."""

    variant: str
    T0: float
    A: float
    B: float
    C: float
    K0: float
    gamma: float | None
    delta: float | None
    sign: int
    residuals: dict[str, float]
    derived: DerivedCoefficients

    @property
    def max_residual(self) -> float:
        return max([*self.residuals.values(), self.derived.max_check()], default=0.0)

    def to_dict(self) -> dict:
        return _report_dict(
            self,
            ["variant", "T0", "A", "B", "C", "K0", "gamma", "delta", "sign", "residuals", "derived"],
        )


def st_reduce(
    c: OrientedCongruence,
    point: Sequence[float],
    variant: str | None = None,
    order: int = REDUCTION_ORDER,
    epsilon: int = 0,
) -> STReduced:
    """Fix ``ρ`` by the variant's normalization and pull the system back to M."""
    if variant is None:
        variant = st_variant(c)
    if variant not in ST_VARIANTS:
        raise ValueError(f"unknown variant {variant!r}; expected one of {ST_VARIANTS}")
    sf = structure_functions(c, point, order)
    _require_st(sf)
    d = _st_data(sf, epsilon)
    gamma = delta = None
    sign = 0
    if variant == "K0norm":
        if abs(_real(d.k0)) < 1e-12:
            raise BranchMismatch("k0 vanishes at this point")
        sign = 1 if _real(d.k0) > 0 else -1
        rho = jets.sqrt(d.k0 * sign * 0.5)
    elif variant in ("K1circle", "K1pm1"):
        rho = 0.5 * jets.cabs(d.k1)
        g = jets.arg(d.k1)
    else:
        rho = jets.cabs(d.t1)
        g = jets.arg(d.t1)
    L, M = sf.lam, sf.mu
    w = d.sgn * d.abs_s * L
    w1 = rho * d.phase.conj() * M
    Omega = jets.log(rho).grad() + d.omega_rest
    cf = Coframe(jets.stack([w, w1, w1.conj()]))
    comps = cf.components1(Omega)
    Cj, Z = comps[W], comps[W1]
    Aj, Bj = Z.real, Z.imag
    T0 = d.T0
    K0 = d.k0 / (2 * rho * rho)
    K1 = d.k1 / (2 * rho)
    T1 = d.t1 / rho
    res: dict[str, float] = {"Omega_real": residual(comps[W1B], Z.conj())}
    d_w1 = [(1j * Bj - Aj, W1, W1B), (1.0 - Cj + 1j * T0, W1, W), (1.0, W1B, W)]
    d_w1b = [(1j * Bj + Aj, W1, W1B), (1.0, W1, W), (1.0 - Cj - 1j * T0, W1B, W)]
    dOm = cf.d(Omega)
    der = DerivedCoefficients()
    ck = der.checks
    v = der.values
    dT0 = cf.derivatives(T0)
    dA, dB, dC = cf.derivatives(Aj), cf.derivatives(Bj), cf.derivatives(Cj)
    if variant == "K0norm":
        res.update(_system(cf, {"k0norm_d_omega": (W, []), "k0norm_d_omega1": (W1, d_w1), "k0norm_d_omega1_bar": (W1B, d_w1b)}))
        res["k0norm_C"] = residual(Cj, 1.0)
        res["k0norm_d_Omega"] = _two_form_check(dOm, [(1j * sign, W1, W1B)], 3)
        A1 = dA[W1].real
        B1 = dB[W1]
        v["A1"], v["B1"] = _val(A1), _val(B1)
        ck["k0norm_derived_dA_omega1"] = residual(dA[W1].imag, (B1.real * 2 + sign) * 0.5)
        ck["k0norm_derived_dA_omega"] = residual(dA[W], Aj - Bj * T0)
        ck["k0norm_derived_dB_omega"] = residual(dB[W], Aj * T0 - Bj)
        ck["k0norm_derived_dT0_wedge_omega"] = max(residual(dT0[W1], 0.0), residual(dT0[W1B], 0.0))
    elif variant in ("K1circle", "K1pm1"):
        gamma = _real(g)
        e = jets.exp(1j * g)
        res.update(_system(cf, {"k1_d_omega": (W, []), "k1_d_omega1": (W1, d_w1), "k1_d_omega1_bar": (W1B, d_w1b)}))
        res["k1_d_Omega"] = _two_form_check(
            dOm, [(1j * K0, W1, W1B), (e, W1, W), (e.conj(), W1B, W)], 3
        )
        res["k1_K1_unit"] = residual(K1, e)
        res["K0_formula"] = residual(K0, 2 * d.k0 / (d.k1 * d.k1.conj()).real)
        dK0 = cf.derivatives(K0)
        v["T00"] = _val(dT0[W])
        v["K01"] = _val(dK0[W1])
        v["B0"], v["C0"] = _val(dB[W]), _val(dC[W])
        if variant == "K1pm1":
            s = 1 if math.cos(gamma) > 0 else -1
            sign = s
            res["A_vanishes"] = residual(Aj, 0.0)
            ck["k1pm1_dT0_omega1"] = residual(dT0[W1], 1j * s)
            ck["k1pm1_dB_omega1_real"] = residual(dB[W1].real, -0.5 * K0)
            B1 = dB[W1].imag
            v["B1"] = _val(B1)
            B0 = dB[W]
            ck["k1pm1_dC_omega1"] = residual(dC[W1], Bj * T0 + 1j * (Bj * Cj + B0) + s)
            ck["k1pm1_dK0_omega"] = residual(dK0[W], 2 * (-s * Bj + (1 - Cj) * K0))
        else:
            ck["k1circle_dT0_omega1"] = residual(dT0[W1], 1j * e)
            A2 = 2 * dA[W1].real
            A1 = 2 * dA[W1].imag - 0.5 * K0
            A0 = dA[W]
            B1 = 2 * dB[W1].imag
            B0 = dB[W]
            dg = cf.derivatives(g)
            g1 = dg[W1].imag
            v.update(A0=_val(A0), A1=_val(A1), A2=_val(A2), B1=_val(B1), gamma0=_val(dg[W]), gamma1=_val(g1))
            ck["k1circle_dB_omega1_real"] = residual(2 * dB[W1].real, -0.5 * K0 + A1)
            ck["k1circle_dC_omega1"] = residual(
                dC[W1],
                -2 * Aj + Aj * Cj + A0 + Bj * T0 + 1j * (Bj * Cj - Aj * T0 + B0) + e,
            )
            cot = jets.cos(g) / jets.sin(g)
            ck["k1circle_dgamma_omega1_real"] = residual(dg[W1].real, Bj + (Aj + g1) * cot)
            ck["k1circle_dK0_omega"] = residual(dK0[W], 2 * ((Aj + g1) / jets.sin(g) + (1 - Cj) * K0))
    else:
        delta = _real(g)
        e = jets.exp(1j * g)
        res.update(
            _system(
                cf,
                {
                    "t1_d_omega": (W, [(e, W1, W), (e.conj(), W1B, W)]),
                    "t1_d_omega1": (W1, d_w1),
                    "t1_d_omega1_bar": (W1B, d_w1b),
                },
            )
        )
        res["T1_unit"] = residual(T1, e)
        res["d_Omega"] = _two_form_check(
            dOm, [(1j * K0, W1, W1B), (K1, W1, W), (K1.conj(), W1B, W)], 3
        )
        v["T00"] = _val(dT0[W])
        v["C0"] = _val(dC[W])
        if variant == "T1pm1":
            s = 1 if math.cos(delta) > 0 else -1
            sign = s
            res["B_vanishes"] = residual(Bj, 0.0)
            ck["t1pm1_dT0_omega1_real"] = residual(dT0[W1].real, (-s - Aj) * T0)
        else:
            dd = cf.derivatives(g)
            d1 = dd[W1].real
            v["delta0"], v["delta1"] = _val(dd[W]), _val(d1)
            cot = jets.cos(g) / jets.sin(g)
            ck["t1circle_ddelta_omega1_imag"] = residual(dd[W1].imag, (Bj - d1) * cot - Aj)
    return STReduced(
        variant=variant,
        T0=_real(T0),
        A=_real(Aj),
        B=_real(Bj),
        C=_real(Cj),
        K0=_real(K0),
        gamma=gamma,
        delta=delta,
        sign=sign,
        residuals=res,
        derived=der,
    )


# ----------------------------------------------------------------------
# generic branch


@dataclass
class GenericInvariants:
    k1: complex
    k2: complex
    k3: complex
    epsilon: int
    residuals: dict[str, float]
    from_structure: tuple[complex, complex, complex]

    @property
    def max_residual(self) -> float:
        return max(self.residuals.values(), default=0.0)

    def to_dict(self) -> dict:
        d = _report_dict(self, ["k1", "k2", "k3", "epsilon", "residuals"])
        d["from_structure"] = [_cplx(x) for x in self.from_structure]
        return d


def generic_invariants(
    c: OrientedCongruence, point: Sequence[float], order: int = 6
) -> GenericInvariants:
    sf = structure_functions(c, point, order)
    scale = max(1.0, sf.scale())
    if abs(sf.a.value) < 1e-12 * scale or abs(sf.s.value) < 1e-12 * scale:
        raise BranchMismatch("the generic branch needs a ≠ 0 and s ≠ 0")
    a, b, p, q, s = sf.a, sf.b, sf.p, sf.q, sf.s
    sgn = 1.0 if _real(a) > 0 else -1.0
    eps = 0 if sgn > 0 else 1
    abs_a = a * sgn
    abs_s = jets.cabs(s)
    psi = jets.arg(s)
    phase = jets.exp(0.5j * (psi - eps * math.pi))
    sa, ss = jets.sqrt(abs_a), jets.sqrt(abs_s)
    lsa, lss = jets.log(abs_a), jets.log(abs_s)
    k1 = (b * abs_s + sf.d_mu(abs_s)) / (sa * ss * abs_s) * phase
    k2 = (-sf.d_mub(lsa) + 2 * p - sf.d_mub(lss) + 1j * sf.d_mub(psi)) / (2 * sa * ss) / phase
    bb, pb, qb = b.conj(), p.conj(), q.conj()
    k3 = (
        1j * sf.d_mub(b)
        - 1j * sf.d_mu(bb)
        - 1j * b * p
        + 1j * bb * pb
        + sgn * abs_a * (q - qb - sf.d_lam(lss) + 1j * sf.d_lam(psi))
    ) / (2 * abs_a * abs_s)
    w = sgn * abs_s * sf.lam
    w1 = sa * ss / phase * sf.mu
    cf = Coframe(jets.stack([w, w1, w1.conj()]))
    C = cf.structure()
    res = _system(
        cf,
        {
            "generic_d_omega": (W, [(1j, W1, W1B), (k1, W1, W), (k1.conj(), W1B, W)]),
            "generic_d_omega1": (W1, [(k2, W1, W1B), (k3, W1, W), (1.0, W1B, W)]),
            "generic_d_omega1_bar": (W1B, [(-k2.conj(), W1, W1B), (1.0, W1, W), (k3.conj(), W1B, W)]),
        },
    )
    from_structure = (_val(C[W][W1, W]), _val(C[W1][W1, W1B]), _val(C[W1][W1, W]))
    return GenericInvariants(
        k1=_val(k1),
        k2=_val(k2),
        k3=_val(k3),
        epsilon=eps,
        residuals=res,
        from_structure=from_structure,
    )


# ----------------------------------------------------------------------
# Liouville-type system for rigid potentials


def liouville_residual(
    A: Expr | str,
    h: Expr | str,
    H: Expr | str,
    sign: int,
    point: Sequence[float],
    params: Mapping[str, float] | None = None,
    order: int = 2,
) -> tuple[float, float]:
    """Residuals of ``h_{zz̄} = ∓e^{2A}e^{-h}`` and ``H_{zz̄} = e^{-h}`` on the (x, y) plane.

    ``sign = +1`` selects the upper sign.
    """
    if sign not in (1, -1):
        raise ValueError("sign is +1 or -1")
    chart = Chart(("x", "y"), ((-1, 1), (-1, 1)), defs=complex_shorthands())
    Aj, hj, Hj = (chart.scalar(e, point, order, params) for e in (A, h, H))

    def lap4(f: Jet) -> complex:
        # f_{zz̄} = ¼ (f_xx + f_yy)
        return 0.25 * (jets.jet_extract(f, (2, 0)) + jets.jet_extract(f, (0, 2)))

    rhs = complex(jets.exp(2 * Aj - hj).value)
    r1 = abs(lap4(hj) + sign * rhs)
    r2 = abs(lap4(Hj) - complex(jets.exp(-hj).value))
    return float(r1), float(r2)


# ----------------------------------------------------------------------
# dispatcher


def invariants(c: OrientedCongruence, point: Sequence[float], branch: Branch, order: int | None = None):
    """Branch-appropriate invariant report at one point."""
    if branch == Branch.TwistOnly:
        return ts_invariants(c, point, order=order or 6)
    if branch == Branch.ShearOnly:
        return st_invariants(c, point, order=order or 6)
    if branch == Branch.Generic:
        return generic_invariants(c, point, order=order or 6)
    raise BranchMismatch("twist-free shear-free structures have no local invariants")
