"""Independent numerical oracles used by the test suite.

Nothing here touches the jet machinery: derivatives come from central finite
differences of plain numpy/complex callables.
"""

from __future__ import annotations

import itertools
import math

import numpy as np

# fourth-order central stencils
_D1 = ((-2, 1 / 12), (-1, -8 / 12), (1, 8 / 12), (2, -1 / 12))
_D2 = ((-2, -1 / 12), (-1, 16 / 12), (0, -30 / 12), (1, 16 / 12), (2, -1 / 12))


def partial(f, x, idx, h=1e-2):
    """``∂^idx f(x)`` by nested fourth-order central differences.

    ``idx`` is a multi-index; each variable's derivatives are taken with the
    first- or second-derivative stencil, repeated as needed.
    """
    x = np.asarray(x, dtype=float)
    steps = []
    for var, k in enumerate(idx):
        while k >= 2:
            steps.append((var, _D2, 2))
            k -= 2
        if k == 1:
            steps.append((var, _D1, 1))
    total = 0.0
    for combo in itertools.product(*[st[1] for st in steps]):
        dx = np.zeros_like(x)
        w = 1.0
        for (var, _, power), (off, c) in zip(steps, combo):
            dx[var] += off * h
            w *= c / h**power
        total = total + w * f(x + dx)
    return total


def laplacian2(f, x, y, h=1e-2):
    """``f_xx + f_yy`` at ``(x, y)`` with the fourth-order stencil."""
    out = 0.0
    for off, c in _D2:
        out += c * (f(x + off * h, y) + f(x, y + off * h))
    return out / h**2


def wirtinger_zzbar(f, x, y, h=1e-2):
    """``∂_z ∂_z̄ f = Δf / 4``."""
    return laplacian2(f, x, y, h) / 4


def rigid_k1(H, x, y, h_inner=1e-2, h_outer=2e-2):
    """``[log H_{zz̄}]_{zz̄}`` for a real potential ``H(x, y)``."""

    def log_hzz(a, b):
        return math.log(wirtinger_zzbar(H, a, b, h_inner))

    return wirtinger_zzbar(log_hzz, x, y, h_outer)


def metric_fd_christoffel(gfun, x, h=1e-4):
    """Christoffel symbols ``Γ^a_{bc}`` from finite differences of ``g(x)``."""
    x = np.asarray(x, float)
    n = len(x)
    g = gfun(x)
    dg = np.zeros((n, n, n))  # dg[c, a, b] = ∂_c g_ab
    for c in range(n):
        e = np.zeros(n)
        e[c] = h
        dg[c] = (-gfun(x + 2 * e) + 8 * gfun(x + e) - 8 * gfun(x - e) + gfun(x - 2 * e)) / (12 * h)
    gi = np.linalg.inv(g)
    low = 0.5 * (np.einsum("cab->abc", dg) + np.einsum("bac->abc", dg) - dg)
    # low[a, b, c] = ½(∂_c g_ab + ∂_b g_ac − ∂_a g_bc)
    return np.einsum("da,abc->dbc", gi, low)
