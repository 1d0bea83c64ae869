"""Charts, 1-forms and frame calculus with jet-valued components.

Forms are evaluated at a point into jets: a 1-form becomes a jet array of
shape ``(n,)`` holding its coordinate components, and a 2-form a jet array of
shape ``(n, n)`` with ``F[j, k] = F(∂_j, ∂_k)``.  A coframe is a stack of 1-forms
(rows) and its dual frame is the jet inverse, stored with one vector per row.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np
from scipy.stats import qmc

from . import jets
from .expr import Expr, denominators, eval_jet, eval_value, parse, substitute
from .jets import Jet, OrderExhausted, SingularConstantTerm

__all__ = [
    "Chart",
    "OneForm",
    "Coframe",
    "SamplingError",
    "exterior_d",
    "wedge",
    "decompose_two_form",
    "dual_frame",
    "frame_derivative",
    "frame_components",
    "complex_shorthands",
]

DENOMINATOR_FLOOR = 1e-6


class SamplingError(RuntimeError):
    """The sampler could not find enough admissible points."""


def complex_shorthands(x: str = "x", y: str = "y") -> dict[str, Expr]:
    """``z -> x + i*y`` and ``zb -> x - i*y``."""
    return {"z": parse(f"{x} + i*{y}"), "zb": parse(f"{x} - i*{y}")}


_CMP = re.compile(r"(<=|>=|!=|<|>)")


def _parse_predicate(text: str) -> list[tuple[Expr, str, Expr]]:
    clauses = []
    if not text or not text.strip():
        return clauses
    for part in re.split(r"\band\b|&&", text):
        pieces = _CMP.split(part)
        if len(pieces) != 3:
            raise ValueError(f"domain clause {part.strip()!r} needs exactly one comparison")
        lhs, op, rhs = pieces
        clauses.append((parse(lhs), op, parse(rhs)))
    return clauses


@dataclass(frozen=True)
class Chart:
    """Local coordinates with a sampling domain.

    ``domain`` is a conjunction of comparisons (``"y > 0 and x*x + y*y < 2"``)
    between DSL expressions, compared on real parts.  ``defs`` holds
    shorthands such as ``z`` and ``zb`` that are substituted into every
    expression evaluated on the chart.
    """

    names: tuple[str, ...]
    bounds: tuple[tuple[float, float], ...]
    domain: str = ""
    seed: int = 0
    defs: Mapping[str, Expr] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "names", tuple(self.names))
        object.__setattr__(self, "bounds", tuple(tuple(map(float, b)) for b in self.bounds))
        if len(set(self.names)) != len(self.names):
            raise ValueError(f"chart variable names must be unique: {self.names}")
        if not 1 <= len(self.names) <= jets.MAX_DIM:
            raise ValueError("charts have between 1 and 6 variables")
        if len(self.bounds) != len(self.names):
            raise ValueError("one bounding interval per chart variable")
        for lo, hi in self.bounds:
            if not lo < hi:
                raise ValueError(f"empty bounding interval ({lo}, {hi})")
        object.__setattr__(self, "_clauses", _parse_predicate(self.domain))

    @property
    def dim(self) -> int:
        return len(self.names)

    def expr(self, e: Expr | str) -> Expr:
        e = parse(e) if isinstance(e, str) else e
        return substitute(e, self.defs) if self.defs else e

    def contains(self, point: Sequence[float], params: Mapping[str, float] | None = None) -> bool:
        for lhs, op, rhs in self._clauses:
            a = eval_value(self.expr(lhs), point, params, self.names).real
            b = eval_value(self.expr(rhs), point, params, self.names).real
            ok = {
                "<": a < b,
                "<=": a <= b,
                ">": a > b,
                ">=": a >= b,
                "!=": a != b,
            }[op]
            if not ok:
                return False
        return True

    def sample(
        self,
        n: int,
        params: Mapping[str, float] | None = None,
        guards: Sequence[Expr] = (),
        seed: int | None = None,
        floor: float = DENOMINATOR_FLOOR,
    ) -> list[tuple[float, ...]]:
        """Deterministic low-discrepancy points inside the domain.

        Points where any guard expression has magnitude below ``floor`` (or
        fails to evaluate) are rejected.
        """
        seed = self.seed if seed is None else seed
        engine = qmc.Halton(self.dim, scramble=True, seed=seed)
        lo = np.array([b[0] for b in self.bounds])
        hi = np.array([b[1] for b in self.bounds])
        guards = [self.expr(g) for g in guards]
        out: list[tuple[float, ...]] = []
        drawn = 0
        while len(out) < n:
            if drawn > 200 * n + 1000:
                raise SamplingError(
                    f"only {len(out)} of {n} admissible points after {drawn} draws"
                )
            batch = qmc.scale(engine.random(64), lo, hi)
            drawn += 64
            for row in batch:
                pt = tuple(float(v) for v in row)
                if not self.contains(pt, params):
                    continue
                try:
                    if any(abs(eval_value(g, pt, params, self.names)) < floor for g in guards):
                        continue
                except (ArithmeticError, ValueError, OverflowError):
                    continue
                out.append(pt)
                if len(out) == n:
                    break
        return out

    def coords(self, point: Sequence[float], order: int) -> list[Jet]:
        if len(point) != self.dim:
            raise ValueError(f"point has {len(point)} coordinates, chart has {self.dim}")
        return jets.coordinate_jets([float(p) for p in point], order)

    def scalar(
        self,
        e: Expr | str,
        point: Sequence[float],
        order: int,
        params: Mapping[str, float] | None = None,
        coords: Sequence[Jet] | None = None,
    ) -> Jet:
        """Jet of a scalar expression at ``point``."""
        coords = self.coords(point, order) if coords is None else coords
        return eval_jet(self.expr(e), point, params, variables=self.names, coords=coords)


@dataclass(frozen=True)
class OneForm:
    """A 1-form given by one expression per chart variable."""

    components: tuple[Expr, ...]

    @classmethod
    def of(cls, *components: Expr | str) -> "OneForm":
        if len(components) == 1 and isinstance(components[0], (list, tuple)):
            components = tuple(components[0])
        return cls(tuple(parse(c) if isinstance(c, str) else c for c in components))

    def __len__(self) -> int:
        return len(self.components)

    def guards(self) -> list[Expr]:
        out: list[Expr] = []
        for c in self.components:
            out.extend(denominators(c))
        return out

    def jet(
        self,
        chart: Chart,
        point: Sequence[float],
        order: int,
        params: Mapping[str, float] | None = None,
        coords: Sequence[Jet] | None = None,
    ) -> Jet:
        if len(self.components) != chart.dim:
            raise ValueError(
                f"1-form has {len(self.components)} components, chart has {chart.dim}"
            )
        coords = chart.coords(point, order) if coords is None else coords
        return jets.stack([chart.scalar(c, point, order, params, coords) for c in self.components])


# ----------------------------------------------------------------------
# exterior calculus on jet arrays


def exterior_d(omega: Jet) -> Jet:
    """``(dω)_{jk} = ∂_j ω_k - ∂_k ω_j`` for a 1-form jet of shape ``(..., n)``."""
    g = omega.grad()  # g[..., k, j] = ∂_j ω_k
    c = g.coeffs
    return Jet(np.swapaxes(c, -2, -3) - c, g.dim, g.order)


def d_function(f: Jet) -> Jet:
    """Differential of a scalar jet as a 1-form jet."""
    return f.grad()


def wedge(alpha: Jet, beta: Jet) -> Jet:
    """``(α∧β)_{jk} = α_j β_k - α_k β_j``."""
    ab = jets.jeinsum("...j,...k->...jk", alpha, beta)
    return Jet(ab.coeffs - np.swapaxes(ab.coeffs, -2, -3), ab.dim, ab.order)


def wedge3(alpha: Jet, beta: Jet, gamma: Jet) -> Jet:
    """Coefficient of ``α∧β∧γ`` on ``dx^0∧dx^1∧dx^2`` (3-dimensional charts)."""
    M = jets.stack([alpha, beta, gamma])
    return jets.jet_det(M)


def two_form_wedge_one(F: Jet, gamma: Jet) -> Jet:
    """Components ``(F∧γ)_{jkl}`` summed over cyclic order; returns (n,n,n) jet."""
    out = jets.jeinsum("jk,l->jkl", F, gamma)
    c = out.coeffs
    c = c + np.transpose(c, (1, 2, 0, 3)) + np.transpose(c, (2, 0, 1, 3))
    return Jet(c, out.dim, out.order)


def decompose_two_form(F: Jet, basis: Sequence[Jet]) -> list[Jet]:
    """Coefficients ``x`` with ``Σ x_i basis_i = F`` on a 3-dimensional chart."""
    n = F.shape[-1]
    pairs = [(j, k) for j in range(n) for k in range(j + 1, n)]
    if len(basis) != len(pairs):
        raise ValueError(f"need {len(pairs)} basis 2-forms on a {n}-dimensional chart")
    A = jets.stack([jets.stack([B[j, k] for (j, k) in pairs]) for B in basis], axis=1)
    rhs = jets.stack([F[j, k] for (j, k) in pairs])
    x = jets.jet_solve(A, rhs)
    return [x[i] for i in range(len(basis))]


def dual_frame(coframe: Jet) -> Jet:
    """Frame vectors (one per row) dual to a coframe matrix (one form per row)."""
    return jets.jet_inv(coframe).T


def frame_derivative(f: Jet, V: Jet) -> Jet:
    """``V(f) = Σ_j V^j ∂_j f``."""
    return jets.jeinsum("j,j->", V, f.grad())


def frame_components(F: Jet, frame: Jet) -> Jet:
    """``F(E_a, E_b)`` for a 2-form jet and a frame."""
    return _pair(frame, F)


def _pair(frame: Jet, F: Jet) -> Jet:
    tmp = jets.jeinsum("aj,jk->ak", frame, F)
    return jets.jeinsum("ak,bk->ab", tmp, frame)


class Coframe:
    """A coframe at a point together with its dual frame.

    ``forms`` is a jet array of shape ``(n, n)`` whose row ``a`` holds the
    coordinate components of ``θ^a``.
    """

    def __init__(self, forms: Jet):
        if forms.ndim != 2 or forms.shape[0] != forms.shape[1]:
            raise ValueError(f"coframe must be square, got shape {forms.shape}")
        self.forms = forms
        self.frame = dual_frame(forms)
        self.n = forms.shape[0]

    @property
    def order(self) -> int:
        return self.forms.order

    def derivatives(self, f: Jet) -> Jet:
        """Frame derivatives ``E_a(f)`` stacked on a trailing axis."""
        return jets.jeinsum("aj,...j->...a", self.frame, f.grad())

    def deriv(self, f: Jet, a: int) -> Jet:
        return frame_derivative(f, self.frame[a])

    def components1(self, alpha: Jet) -> Jet:
        """``α(E_a)`` for a 1-form jet ``α``."""
        return jets.jeinsum("aj,...j->...a", self.frame, alpha)

    def components2(self, F: Jet) -> Jet:
        """``F(E_a, E_b)`` for a 2-form jet ``F``."""
        return _pair(self.frame, F)

    def d(self, alpha: Jet) -> Jet:
        """Frame components of ``dα``."""
        return self.components2(exterior_d(alpha))

    def structure(self) -> Jet:
        """``C[a, b, c] = dθ^a(E_b, E_c)``."""
        dth = exterior_d(self.forms)  # (n, n, n)
        tmp = jets.jeinsum("bj,ajk->abk", self.frame, dth)
        return jets.jeinsum("abk,ck->abc", tmp, self.frame)

    def residual(self) -> float:
        """Max deviation of ``θ^a(E_b)`` from the identity (all coefficients)."""
        P = jets.jeinsum("aj,bj->ab", self.forms, self.frame)
        eye = jets.jet_const(np.eye(self.n), P.dim, P.order)
        return (P - eye).max_abs()


def two_form_from_terms(terms, n: int, dim: int, order: int) -> Jet:
    """Frame-component array of ``Σ coef · θ^b∧θ^c`` from ``(coef, b, c)`` terms."""
    out = jets.jet_zeros((n, n), dim, order)
    c = out.coeffs
    for coef, b, cc in terms:
        cj = coef.truncate(order).coeffs if isinstance(coef, Jet) else None
        if cj is None:
            c[b, cc, 0] += coef
            c[cc, b, 0] -= coef
        else:
            c[b, cc] += cj
            c[cc, b] -= cj
    return out
