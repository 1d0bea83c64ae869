"""Oriented congruences: structure functions, branch classification, CR test.

An oriented congruence on a 3-dimensional chart is given by a real 1-form
``λ`` and a complex 1-form ``μ`` with ``λ∧μ∧μ̄ ≠ 0``.  Its structure
functions are read off from

    dλ = i a μ∧μ̄ + (b μ + b̄ μ̄)∧λ
    dμ = p μ∧μ̄ + q μ∧λ + s μ̄∧λ

and the frame derivatives ``u_λ, u_μ, u_μ̄`` come from the frame dual to
``(λ, μ, μ̄)``.  Double subscripts apply left to right: ``u_{μλ} = (u_μ)_λ``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from . import jets
from .expr import Expr, Mul, free_names, parse
from .forms import Chart, Coframe, OneForm, exterior_d, wedge
from .jets import Jet

__all__ = [
    "DEFAULT_ORDER",
    "OrientedCongruence",
    "StructureFunctions",
    "Branch",
    "BranchClass",
    "BranchMismatch",
    "ClassicalDecomposition",
    "structure_functions",
    "classify_branch",
    "classical_decomposition",
    "cr_residual",
    "commutator_residuals",
]

DEFAULT_ORDER = 6
LAM, MU, MUB = 0, 1, 2


class BranchMismatch(ValueError):
    """The structure is not in the branch an operation requires."""


@dataclass(frozen=True)
class OrientedCongruence:
    """A chart plus the pair ``(λ, μ)`` of component expressions."""

    chart: Chart
    lam: OneForm
    mu: OneForm
    params: Mapping[str, float] = field(default_factory=dict)
    name: str = ""
    fields: Mapping[str, Callable[[Sequence[float], int], Jet]] = field(default_factory=dict)

    def __post_init__(self):
        if self.chart.dim != 3:
            raise ValueError("oriented congruences live on 3-dimensional charts")
        if len(self.lam) != 3 or len(self.mu) != 3:
            raise ValueError("λ and μ need three components each")

    def guards(self) -> list[Expr]:
        return self.lam.guards() + self.mu.guards()

    def sample(self, n: int, seed: int | None = None) -> list[tuple[float, ...]]:
        guards = self.guards()
        if self.fields:
            names = set(self.fields)
            guards = [g for g in guards if not (free_names(self.chart.expr(g)) & names)]
        return self.chart.sample(n, self.params, guards, seed=seed)

    def bindings(self, point: Sequence[float], order: int) -> dict:
        """Parameters plus the jets of any numerically supplied fields."""
        env = dict(self.params)
        for name, fn in self.fields.items():
            env[name] = fn(point, order)
        return env

    def forms_at(self, point: Sequence[float], order: int = DEFAULT_ORDER) -> tuple[Jet, Jet]:
        coords = self.chart.coords(point, order)
        env = self.bindings(point, order)
        L = self.lam.jet(self.chart, point, order, env, coords)
        M = self.mu.jet(self.chart, point, order, env, coords)
        return L, M

    def scalar(self, e: Expr | str, point: Sequence[float], order: int = DEFAULT_ORDER) -> Jet:
        return self.chart.scalar(e, point, order, self.bindings(point, order))

    def gauge(self, f: Expr | str, h: Expr | str) -> "OrientedCongruence":
        """The representative ``(f λ, h μ)`` of the same structure (f real)."""
        f = parse(f) if isinstance(f, str) else f
        h = parse(h) if isinstance(h, str) else h
        lam = OneForm(tuple(Mul(f, c) for c in self.lam.components))
        mu = OneForm(tuple(Mul(h, c) for c in self.mu.components))
        return OrientedCongruence(self.chart, lam, mu, self.params, self.name, self.fields)


@dataclass
class StructureFunctions:
    """Structure functions at a point, with the coframe ``(λ, μ, μ̄)``."""

    a: Jet
    b: Jet
    p: Jet
    q: Jet
    s: Jet
    coframe: Coframe
    lam: Jet
    mu: Jet
    residual: float = 0.0

    @property
    def psi(self) -> Jet:
        """``Arg s`` (principal branch); requires ``s ≠ 0`` at the point."""
        return jets.arg(self.s)

    @property
    def order(self) -> int:
        return self.a.order

    def d(self, f: Jet) -> tuple[Jet, Jet, Jet]:
        """``(f_λ, f_μ, f_μ̄)``."""
        D = self.coframe.derivatives(f)
        return _last(D, LAM), _last(D, MU), _last(D, MUB)

    def d_lam(self, f: Jet) -> Jet:
        return self.coframe.deriv(f, LAM)

    def d_mu(self, f: Jet) -> Jet:
        return self.coframe.deriv(f, MU)

    def d_mub(self, f: Jet) -> Jet:
        return self.coframe.deriv(f, MUB)

    def scale(self) -> float:
        vals = np.concatenate([np.abs(np.atleast_1d(self.lam.value)), np.abs(np.atleast_1d(self.mu.value))])
        return float(vals.max())


def _last(J: Jet, k: int) -> Jet:
    return Jet(J.coeffs[..., k, :], J.dim, J.order)


def structure_functions(
    c: OrientedCongruence, point: Sequence[float], order: int = DEFAULT_ORDER
) -> StructureFunctions:
    """Compute ``(a, b, p, q, s)`` at ``point`` (usable order ``order - 1``)."""
    L, M = c.forms_at(point, order)
    return structure_from_forms(L, M)


def structure_from_forms(L: Jet, M: Jet) -> StructureFunctions:
    cf = Coframe(jets.stack([L, M, M.conj()]))
    dL = cf.d(L)
    dM = cf.d(M)
    a = dL[MU, MUB] * (-1j)
    b = dL[MU, LAM]
    p = dM[MU, MUB]
    q = dM[MU, LAM]
    s = dM[MUB, LAM]
    # reconstruction residual of the structure equations
    scale = max(1.0, dL.max_abs())
    res = max((dL[MUB, LAM] - b.conj()).max_abs(), a.imag.max_abs()) / scale
    return StructureFunctions(a=a, b=b, p=p, q=q, s=s, coframe=cf, lam=L, mu=M, residual=res)


class Branch(str, enum.Enum):
    TwistFreeShearFree = "TwistFreeShearFree"
    TwistOnly = "TwistOnly"
    ShearOnly = "ShearOnly"
    Generic = "Generic"


@dataclass
class BranchClass:
    branch: Branch
    witness: dict

    def to_dict(self) -> dict:
        return {"branch": self.branch.value, "witness": dict(self.witness)}


def classify_branch(
    c: OrientedCongruence,
    n_points: int = 32,
    tol: float = 1e-8,
    seed: int | None = None,
    points: Sequence[Sequence[float]] | None = None,
) -> BranchClass:
    """Decide which of ``a``, ``s`` vanish identically by sampling."""
    if points is None:
        if n_points < 8:
            raise ValueError("classification needs at least 8 sample points")
        points = c.sample(n_points, seed=seed)
    amax = smax = scale = 0.0
    for pt in points:
        sf = structure_functions(c, pt, order=1)
        amax = max(amax, abs(sf.a.value))
        smax = max(smax, abs(sf.s.value))
        scale = max(scale, sf.scale())
    twist = amax >= tol * scale
    shear = smax >= tol * scale
    branch = {
        (False, False): Branch.TwistFreeShearFree,
        (True, False): Branch.TwistOnly,
        (False, True): Branch.ShearOnly,
        (True, True): Branch.Generic,
    }[(twist, shear)]
    witness = {
        "n_points": len(points),
        "max_abs_a": amax,
        "max_abs_s": smax,
        "scale": scale,
        "tol": tol,
        "threshold": tol * scale,
    }
    return BranchClass(branch, witness)


def require_branch(c: OrientedCongruence, *allowed: Branch, n_points: int = 32, tol: float = 1e-8) -> BranchClass:
    bc = classify_branch(c, n_points=n_points, tol=tol)
    if bc.branch not in allowed:
        raise BranchMismatch(
            f"structure is {bc.branch.value}, expected one of "
            + ", ".join(b.value for b in allowed)
        )
    return bc


# ----------------------------------------------------------------------
# classical decomposition of a vector field in Euclidean 3-space


@dataclass
class ClassicalDecomposition:
    theta: float
    alpha_matrix: np.ndarray
    sigma_matrix: np.ndarray
    alpha_norm: float
    sigma_norm: float
    gradient: np.ndarray

    def reconstruction_residual(self) -> float:
        recon = self.alpha_matrix + self.sigma_matrix + self.theta / 3 * np.eye(3)
        return float(np.max(np.abs(recon - self.gradient)))


def classical_decomposition(
    v: Sequence[Expr | str],
    point: Sequence[float],
    names: Sequence[str] = ("x", "y", "z"),
    params: Mapping[str, float] | None = None,
) -> ClassicalDecomposition:
    """Expansion, twist and shear of a vector field for the flat metric."""
    chart = Chart(tuple(names), ((-1, 1),) * 3)
    grads = []
    for comp in v:
        f = chart.scalar(comp, point, 1, params)
        grads.append([jets.jet_extract(f, tuple(int(k == j) for k in range(3))) for j in range(3)])
    # G[i, j] = ∂_i v_j
    G = np.array(grads, dtype=complex).T.real
    theta = float(np.trace(G))
    alpha = 0.5 * (G - G.T)
    sigma = 0.5 * (G + G.T) - theta / 3 * np.eye(3)
    return ClassicalDecomposition(
        theta=theta,
        alpha_matrix=alpha,
        sigma_matrix=sigma,
        alpha_norm=float(np.sqrt(np.sum(alpha**2))),
        sigma_norm=float(np.sqrt(np.sum(sigma**2))),
        gradient=G,
    )


# ----------------------------------------------------------------------
# CR functions and commutators


def cr_residual(zeta: Expr | str, c: OrientedCongruence, point: Sequence[float]) -> float:
    """Normalized magnitude of ``dζ∧λ∧μ`` at ``point``."""
    L, M = c.forms_at(point, 1)
    Z = c.scalar(zeta, point, 1).grad()
    vals = np.array([Z.value, L.value, M.value])
    coeff = np.linalg.det(vals)
    norm = np.prod([np.linalg.norm(r) for r in vals])
    if norm == 0:
        return 0.0
    return float(abs(coeff) / norm)


def commutator_residuals(sf: StructureFunctions, u: Jet) -> tuple[float, float, float]:
    """Residuals of the three commutation relations for a test function ``u``.

    Each is normalized by the magnitude of the largest term involved.
    """
    ul, um, umb = sf.d_lam(u), sf.d_mu(u), sf.d_mub(u)
    a, b, p, q, s = sf.a, sf.b, sf.p, sf.q, sf.s
    pb, qb, sb, bb = p.conj(), q.conj(), s.conj(), b.conj()
    # (u_μ̄)_μ - (u_μ)_μ̄ + i a u_λ + p u_μ - p̄ u_μ̄ = 0
    r1 = [sf.d_mu(umb), -sf.d_mub(um), 1j * a * ul, p * um, -pb * umb]
    # (u_λ)_μ - (u_μ)_λ + b u_λ + q u_μ + s̄ u_μ̄ = 0
    r2 = [sf.d_mu(ul), -sf.d_lam(um), b * ul, q * um, sb * umb]
    # (u_λ)_μ̄ - (u_μ̄)_λ + b̄ u_λ + s u_μ + q̄ u_μ̄ = 0
    r3 = [sf.d_mub(ul), -sf.d_lam(umb), bb * ul, s * um, qb * umb]
    out = []
    for terms in (r1, r2, r3):
        total = terms[0]
        for t in terms[1:]:
            total = total + t
        scale = max(max(abs(t.value) for t in terms), 1e-300)
        out.append(abs(total.value) / max(scale, 1.0))
    return tuple(out)
