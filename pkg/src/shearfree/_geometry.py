"""Levi-Civita curvature of a jet-valued metric in any dimension.

Conventions: ``Γ^a_{bc}`` symmetric in ``bc``;
``R^a_{bcd} = ∂_c Γ^a_{db} - ∂_d Γ^a_{cb} + Γ^a_{ce} Γ^e_{db} - Γ^a_{de} Γ^e_{cb}``;
``R_{bd} = R^a_{bad}``.  With these choices a round sphere has positive
sectional curvature and ``R_{abab} = K (g_aa g_bb - g_ab^2)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import jets
from .jets import Jet


def christoffel(g: Jet) -> Jet:
    """``Γ[a, b, c] = Γ^a_{bc}`` (usable order one less than ``g``)."""
    gi = jets.jet_inv(g)
    dg = g.grad()  # dg[i, j, k] = ∂_k g_ij
    c = dg.coeffs
    first = 0.5 * (np.transpose(c, (0, 2, 1, 3)) + c - np.transpose(c, (2, 0, 1, 3)))
    # first[k, i, j] = ½(∂_i g_kj + ∂_j g_ki - ∂_k g_ij)
    first = Jet(first, dg.dim, dg.order)
    return jets.jeinsum("ak,kij->aij", gi, first)


def riemann_up(gamma: Jet) -> Jet:
    """``R[a, b, c, d] = R^a_{bcd}`` from the connection coefficients."""
    dG = gamma.grad()  # dG[a, i, j, c] = ∂_c Γ^a_{ij}
    c = dG.coeffs
    # ∂_c Γ^a_{db} is dG[a, d, b, c]
    lin = np.einsum("adbcZ->abcdZ", c) - np.einsum("acbdZ->abcdZ", c)
    quad = jets.jeinsum("ace,edb->abcd", gamma, gamma)
    quad2 = Jet(np.transpose(quad.coeffs, (0, 1, 3, 2, 4)), quad.dim, quad.order)
    return Jet(lin, dG.dim, dG.order) + quad - quad2


@dataclass
class Curvature:
    metric: Jet
    inverse: Jet
    christoffel: Jet
    riemann_up: Jet
    riemann: Jet  # all indices down, R_{abcd} = g_{ae} R^e_{bcd}
    ricci: Jet
    scalar: Jet

    @property
    def n(self) -> int:
        return self.metric.shape[0]


def curvature(g: Jet) -> Curvature:
    gi = jets.jet_inv(g)
    G = christoffel(g)
    Ru = riemann_up(G)
    Rd = jets.jeinsum("ae,ebcd->abcd", g, Ru)
    Ric = Jet(np.einsum("abadZ->bdZ", Ru.coeffs), Ru.dim, Ru.order)
    R = jets.jeinsum("bd,bd->", gi, Ric)
    return Curvature(g, gi, G, Ru, Rd, Ric, R)


def gaussian_curvature(g: Jet) -> Jet:
    """Gaussian curvature of a 2-dimensional metric jet."""
    if g.shape != (2, 2):
        raise ValueError("gaussian_curvature needs a 2x2 metric")
    cv = curvature(g)
    det = jets.jet_det(g)
    return cv.riemann[0, 1, 0, 1] / det


def weyl(cv: Curvature) -> Jet:
    """Weyl tensor, all indices down (dimension ``n >= 3``)."""
    n = cv.n
    g = cv.metric.truncate(cv.ricci.order)
    P = (cv.ricci - g * (cv.scalar / (2 * (n - 1)))) / (n - 2)  # Schouten tensor
    # Kulkarni-Nomizu product (g ∧ P)_{abcd}
    t1 = jets.jeinsum("ac,bd->abcd", g, P)
    t2 = jets.jeinsum("ad,bc->abcd", g, P)
    t3 = jets.jeinsum("bd,ac->abcd", g, P)
    t4 = jets.jeinsum("bc,ad->abcd", g, P)
    return cv.riemann - (t1 - t2 + t3 - t4)


def schouten(cv: Curvature) -> Jet:
    n = cv.n
    g = cv.metric.truncate(cv.ricci.order)
    return (cv.ricci - g * (cv.scalar / (2 * (n - 1)))) / (n - 2)


def covariant_derivative(T: Jet, gamma: Jet, kinds: str) -> Jet:
    """``∇_e T`` appended as a trailing index.

    ``kinds`` has one letter per index of ``T``: ``'d'`` (down) or ``'u'`` (up).
    """
    dT = T.grad()
    out = dT
    r = len(kinds)
    letters = "abcdfghijk"[:r]
    for pos, kind in enumerate(kinds):
        src = list(letters)
        if kind == "d":
            # - Γ^m_{e i_pos} T_{... m ...}
            src[pos] = "m"
            spec = f"me{letters[pos]},{''.join(src)}->{letters}e"
            out = out - jets.jeinsum(spec, gamma, T)
        else:
            src[pos] = "m"
            spec = f"{letters[pos]}em,{''.join(src)}->{letters}e"
            out = out + jets.jeinsum(spec, gamma, T)
    return out
