"""Truncated multivariate Taylor arithmetic ("jets") over complex coefficients.

A :class:`Jet` stores, for every multi-index of total degree at most ``order``,
the Taylor coefficient ``∂^α f / α!`` of a function of ``dim`` real variables
at a fixed expansion point.  Coefficients live in a dense numpy array whose
last axis is indexed by graded-lexicographic rank, so the leading axes can
hold a whole tensor of jets (a 4x4 metric, a 3x3 coframe, ...) and the tensor
algebra vectorizes.

Because the ranking is graded, the coefficients of degree ``<= k`` are always
the first ``N(dim, k)`` entries; truncation is a slice.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from numbers import Number
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "Jet",
    "JetError",
    "OrderExhausted",
    "SingularConstantTerm",
    "n_coeffs",
    "monomials",
    "jet_const",
    "jet_variable",
    "jet_zeros",
    "jet_mul",
    "jet_elementary",
    "jet_solve",
    "jet_inv",
    "jet_extract",
    "jeinsum",
    "stack",
    "exp",
    "log",
    "sqrt",
    "sin",
    "cos",
    "tan",
    "power",
    "reciprocal",
    "cabs",
    "embed",
    "restrict",
]

MAX_DIM = 6
MAX_ORDER = 10
PIVOT_RTOL = 1e-10


class JetError(ValueError):
    """Incompatible jets (dimension mismatch, bad index, bad shape)."""


class OrderExhausted(ArithmeticError):
    """A derivative or coefficient was requested beyond the usable order."""


class SingularConstantTerm(ArithmeticError):
    """The constant term is outside the domain of the requested operation."""


def n_coeffs(dim: int, order: int) -> int:
    """Number of monomials of degree ``<= order`` in ``dim`` variables."""
    return math.comb(dim + order, order)


def _degree_block(dim: int, d: int) -> list[tuple[int, ...]]:
    # exponent tuples of total degree d, lexicographically descending
    if dim == 1:
        return [(d,)]
    out = []
    for first in range(d, -1, -1):
        for rest in _degree_block(dim - 1, d - first):
            out.append((first,) + rest)
    return out


@functools.lru_cache(maxsize=None)
def monomials(dim: int, order: int) -> tuple[tuple[int, ...], ...]:
    """All exponent tuples of degree ``<= order`` in graded-lex rank order."""
    out: list[tuple[int, ...]] = []
    for d in range(order + 1):
        out.extend(_degree_block(dim, d))
    return tuple(out)


@dataclass(frozen=True)
class _Space:
    dim: int
    order: int
    exps: np.ndarray  # (N, dim)
    deg: np.ndarray  # (N,)
    base: int
    codes: np.ndarray  # (N,) integer encodings, base = order + 1
    lookup: np.ndarray  # code -> rank (or -1)
    mfact: np.ndarray  # multi-factorials α!

    @property
    def n(self) -> int:
        return self.exps.shape[0]

    def encode(self, exps: np.ndarray) -> np.ndarray:
        weights = self.base ** np.arange(self.dim)
        return exps @ weights


@functools.lru_cache(maxsize=None)
def _space(dim: int, order: int) -> _Space:
    if not 1 <= dim <= MAX_DIM:
        raise JetError(f"jet dimension must be in 1..{MAX_DIM}, got {dim}")
    if not 0 <= order <= MAX_ORDER:
        raise JetError(f"jet order must be in 0..{MAX_ORDER}, got {order}")
    exps = np.array(monomials(dim, order), dtype=np.int64).reshape(-1, dim)
    base = order + 1
    codes = exps @ (base ** np.arange(dim))
    lookup = np.full(base**dim, -1, dtype=np.int64)
    lookup[codes] = np.arange(len(codes))
    mfact = np.array(
        [math.prod(math.factorial(e) for e in row) for row in exps], dtype=float
    )
    return _Space(dim, order, exps, exps.sum(axis=1), base, codes, lookup, mfact)


@functools.lru_cache(maxsize=None)
def _mul_table(dim: int, order: int):
    """Pair indices (I, J) sorted by product rank, with reduceat offsets."""
    sp = _space(dim, order)
    prefix = [n_coeffs(dim, k) for k in range(order + 1)]
    I_parts, J_parts = [], []
    for i in range(sp.n):
        m = prefix[order - sp.deg[i]]
        I_parts.append(np.full(m, i, dtype=np.int64))
        J_parts.append(np.arange(m, dtype=np.int64))
    I = np.concatenate(I_parts)
    J = np.concatenate(J_parts)
    K = sp.lookup[sp.codes[I] + sp.codes[J]]
    perm = np.argsort(K, kind="stable")
    I, J, K = I[perm], J[perm], K[perm]
    starts = np.flatnonzero(np.r_[True, K[1:] != K[:-1]])
    return I, J, starts


@functools.lru_cache(maxsize=None)
def _deriv_table(dim: int, order: int, var: int):
    """Source ranks and factors for ∂/∂x_var mapping order -> order - 1."""
    big = _space(dim, order)
    small = _space(dim, order - 1)
    shifted = small.exps.copy()
    shifted[:, var] += 1
    src = big.lookup[big.encode(shifted)]
    fac = shifted[:, var].astype(float)
    return src, fac


def _as_array(x) -> np.ndarray:
    return np.asarray(x, dtype=complex)


class Jet:
    """Array of truncated Taylor expansions sharing dimension and order.

    ``coeffs`` has shape ``shape + (N,)`` with ``N = n_coeffs(dim, order)``.
    Jets are treated as immutable values.
    """

    __slots__ = ("coeffs", "dim", "order")
    __array_priority__ = 1000

    def __init__(self, coeffs, dim: int, order: int):
        c = np.asarray(coeffs, dtype=complex)
        n = n_coeffs(dim, order)
        if c.ndim == 0 or c.shape[-1] != n:
            raise JetError(
                f"coefficient array last axis must have length {n} for "
                f"dim={dim}, order={order}; got shape {c.shape}"
            )
        self.coeffs = c
        self.dim = dim
        self.order = order

    # ------------------------------------------------------------------
    # basic properties
    @property
    def shape(self) -> tuple[int, ...]:
        return self.coeffs.shape[:-1]

    @property
    def ndim(self) -> int:
        return self.coeffs.ndim - 1

    @property
    def value(self) -> np.ndarray | complex:
        v = self.coeffs[..., 0]
        return v if v.ndim else complex(v)

    def __repr__(self) -> str:
        return f"Jet(shape={self.shape}, dim={self.dim}, order={self.order})"

    def __len__(self) -> int:
        return self.shape[0]

    def __iter__(self):
        for k in range(len(self)):
            yield self[k]

    def __getitem__(self, key) -> "Jet":
        if not isinstance(key, tuple):
            key = (key,)
        if any(k is Ellipsis for k in key):
            raise JetError("Ellipsis indexing is not supported on jets")
        return Jet(self.coeffs[key + (slice(None),)], self.dim, self.order)

    def truncate(self, order: int) -> "Jet":
        if order > self.order:
            raise OrderExhausted(
                f"cannot raise jet order from {self.order} to {order}"
            )
        if order == self.order:
            return self
        return Jet(self.coeffs[..., : n_coeffs(self.dim, order)], self.dim, order)

    @property
    def T(self) -> "Jet":
        return self.transpose()

    def transpose(self, *axes) -> "Jet":
        nd = self.ndim
        if not axes:
            axes = tuple(reversed(range(nd)))
        elif len(axes) == 1 and isinstance(axes[0], (tuple, list)):
            axes = tuple(axes[0])
        return Jet(self.coeffs.transpose(*axes, nd), self.dim, self.order)

    def reshape(self, *shape) -> "Jet":
        if len(shape) == 1 and isinstance(shape[0], (tuple, list)):
            shape = tuple(shape[0])
        return Jet(
            self.coeffs.reshape(*shape, self.coeffs.shape[-1]), self.dim, self.order
        )

    def sum(self, axis=None) -> "Jet":
        nd = self.ndim
        if axis is None:
            axis = tuple(range(nd))
        elif isinstance(axis, int):
            axis = (axis,)
        axis = tuple(a % nd for a in axis) if nd else ()
        return Jet(self.coeffs.sum(axis=axis), self.dim, self.order)

    def conj(self) -> "Jet":
        # chart variables are real, so conjugation acts on coefficients only
        return Jet(np.conj(self.coeffs), self.dim, self.order)

    @property
    def real(self) -> "Jet":
        return Jet(self.coeffs.real, self.dim, self.order)

    @property
    def imag(self) -> "Jet":
        return Jet(self.coeffs.imag, self.dim, self.order)

    def copy(self) -> "Jet":
        return Jet(self.coeffs.copy(), self.dim, self.order)

    def max_abs(self) -> float:
        """Largest coefficient magnitude (0 for empty jets)."""
        return float(np.max(np.abs(self.coeffs))) if self.coeffs.size else 0.0

    # ------------------------------------------------------------------
    # differentiation
    def deriv(self, var: int) -> "Jet":
        """Partial derivative; the result has order ``self.order - 1``."""
        if not 0 <= var < self.dim:
            raise JetError(f"variable index {var} out of range for dim {self.dim}")
        if self.order == 0:
            raise OrderExhausted("derivative of an order-0 jet")
        src, fac = _deriv_table(self.dim, self.order, var)
        return Jet(self.coeffs[..., src] * fac, self.dim, self.order - 1)

    def grad(self) -> "Jet":
        """Stack of all first partials on a new trailing shape axis."""
        parts = [self.deriv(v).coeffs for v in range(self.dim)]
        return Jet(np.stack(parts, axis=-2), self.dim, self.order - 1)

    def extract(self, idx: Sequence[int]) -> np.ndarray | complex:
        return jet_extract(self, idx)

    # ------------------------------------------------------------------
    # arithmetic
    def _coerce(self, other):
        if isinstance(other, Jet):
            if other.dim != self.dim:
                raise JetError(
                    f"dimension mismatch: {self.dim} vs {other.dim}"
                )
            order = min(self.order, other.order)
            return self.truncate(order), other.truncate(order)
        return None

    def __add__(self, other):
        pair = self._coerce(other)
        if pair is not None:
            a, b = pair
            return Jet(a.coeffs + b.coeffs, a.dim, a.order)
        c = np.array(np.broadcast_to(self.coeffs, np.broadcast_shapes(
            self.coeffs.shape, np.shape(other) + (1,))), dtype=complex)
        c[..., 0] += _as_array(other)
        return Jet(c, self.dim, self.order)

    __radd__ = __add__

    def __neg__(self):
        return Jet(-self.coeffs, self.dim, self.order)

    def __pos__(self):
        return self

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        pair = self._coerce(other)
        if pair is not None:
            return jet_mul(*pair)
        o = _as_array(other)
        return Jet(self.coeffs * o[..., None], self.dim, self.order)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Jet):
            return self * reciprocal(other)
        o = _as_array(other)
        return Jet(self.coeffs / o[..., None], self.dim, self.order)

    def __rtruediv__(self, other):
        return reciprocal(self) * other

    def __pow__(self, r):
        return power(self, r)

    def __matmul__(self, other):
        return matmul(self, other)


# ----------------------------------------------------------------------
# constructors


def jet_zeros(shape, dim: int, order: int) -> Jet:
    if isinstance(shape, int):
        shape = (shape,)
    return Jet(np.zeros(tuple(shape) + (n_coeffs(dim, order),), complex), dim, order)


def jet_const(value, dim: int, order: int) -> Jet:
    """Constant jet(s); ``value`` may be a scalar or an array of constants."""
    v = _as_array(value)
    c = np.zeros(v.shape + (n_coeffs(dim, order),), complex)
    c[..., 0] = v
    return Jet(c, dim, order)


def jet_variable(index: int, value, dim: int, order: int) -> Jet:
    """Jet of the coordinate function ``x_index`` at a point."""
    if not 0 <= index < dim:
        raise JetError(f"variable index {index} out of range for dim {dim}")
    j = jet_const(value, dim, order)
    if order >= 1:
        j.coeffs[..., 1 + index] = 1.0
    return j


def coordinate_jets(point: Sequence[float], order: int) -> list[Jet]:
    """Coordinate jets for every chart variable at ``point``."""
    dim = len(point)
    return [jet_variable(k, point[k], dim, order) for k in range(dim)]


def stack(jets: Sequence[Jet], axis: int = 0) -> Jet:
    """Stack jets of equal shape along a new shape axis."""
    jets = list(jets)
    if not jets:
        raise JetError("cannot stack an empty sequence")
    dim = jets[0].dim
    if any(j.dim != dim for j in jets):
        raise JetError("dimension mismatch in stack")
    order = min(j.order for j in jets)
    arrays = [j.truncate(order).coeffs for j in jets]
    nd = arrays[0].ndim - 1
    axis = axis % (nd + 1)
    return Jet(np.stack(arrays, axis=axis), dim, order)


def as_jet(x, dim: int, order: int) -> Jet:
    return x if isinstance(x, Jet) else jet_const(x, dim, order)


# ----------------------------------------------------------------------
# products


def _mul_coeffs(a: np.ndarray, b: np.ndarray, dim: int, order: int) -> np.ndarray:
    I, J, starts = _mul_table(dim, order)
    prod = a[..., I] * b[..., J]
    return np.add.reduceat(prod, starts, axis=-1)


def jet_mul(a: Jet, b: Jet) -> Jet:
    """Truncated Cauchy product (elementwise over the jet arrays)."""
    if a.dim != b.dim:
        raise JetError(f"dimension mismatch: {a.dim} vs {b.dim}")
    order = min(a.order, b.order)
    a, b = a.truncate(order), b.truncate(order)
    return Jet(_mul_coeffs(a.coeffs, b.coeffs, a.dim, order), a.dim, order)


_LETTERS = "abcdefghijklmnopqrstuvwxyABCDEFGHIJKLMNOPQRSTUVWXY"


def jeinsum(spec: str, a, b) -> Jet:
    """Einstein summation of two jet arrays (or a jet array and a constant array).

    ``jeinsum("ij,jk->ik", A, B)`` is the jet matrix product.
    """
    ins, out = spec.replace(" ", "").split("->")
    sa, sb = ins.split(",")
    if not isinstance(a, Jet) and not isinstance(b, Jet):
        raise JetError("jeinsum needs at least one jet operand")
    if not isinstance(a, Jet):
        return Jet(np.einsum(f"{sa},{sb}Z->{out}Z", _as_array(a), b.coeffs), b.dim, b.order)
    if not isinstance(b, Jet):
        return Jet(np.einsum(f"{sa}Z,{sb}->{out}Z", a.coeffs, _as_array(b)), a.dim, a.order)
    if a.dim != b.dim:
        raise JetError(f"dimension mismatch: {a.dim} vs {b.dim}")
    order = min(a.order, b.order)
    a, b = a.truncate(order), b.truncate(order)
    I, J, starts = _mul_table(a.dim, order)
    prod = np.einsum(f"{sa}Z,{sb}Z->{out}Z", a.coeffs[..., I], b.coeffs[..., J])
    return Jet(np.add.reduceat(prod, starts, axis=-1), a.dim, order)


def matmul(a: Jet, b) -> Jet:
    if isinstance(b, Jet) and b.ndim == 1:
        return jeinsum("ij,j->i", a, b)
    if a.ndim == 1:
        return jeinsum("i,ij->j", a, b)
    return jeinsum("ij,jk->ik", a, b)


# ----------------------------------------------------------------------
# elementary functions by Taylor composition


def _compose(a: Jet, series: list[np.ndarray]) -> Jet:
    """Evaluate ``Σ_k series[k] · (a - a0)^k`` by Horner's scheme."""
    h = a.copy()
    h.coeffs[..., 0] = 0.0
    res = jet_const(series[a.order], a.dim, a.order)
    for k in range(a.order - 1, -1, -1):
        res = jet_mul(res, h)
        res.coeffs[..., 0] += series[k]
    return res


def _require_nonzero(a0: np.ndarray, what: str) -> None:
    if np.any(a0 == 0) or not np.all(np.isfinite(a0)):
        raise SingularConstantTerm(f"{what}: constant term is zero or not finite")


def exp(a: Jet) -> Jet:
    a0 = _as_array(a.coeffs[..., 0])
    e = np.exp(a0)
    return _compose(a, [e / math.factorial(k) for k in range(a.order + 1)])


def log(a: Jet) -> Jet:
    """Principal-branch logarithm."""
    a0 = _as_array(a.coeffs[..., 0])
    _require_nonzero(a0, "log")
    series = [np.log(a0)]
    for k in range(1, a.order + 1):
        series.append((-1) ** (k + 1) / (k * a0**k))
    return _compose(a, series)


def _int_power(a: Jet, n: int) -> Jet:
    if n < 0:
        return _int_power(reciprocal(a), -n)
    result = jet_const(np.ones(a.shape), a.dim, a.order)
    base = a
    while n:
        if n & 1:
            result = jet_mul(result, base)
        n >>= 1
        if n:
            base = jet_mul(base, base)
    return result


def power(a: Jet, r) -> Jet:
    """``a ** r`` for a real exponent (principal branch for non-integers)."""
    r = float(r)
    if r.is_integer() and abs(r) <= 64:
        return _int_power(a, int(r))
    a0 = _as_array(a.coeffs[..., 0])
    _require_nonzero(a0, "power")
    base = np.exp(r * np.log(a0))
    series = []
    binom = 1.0
    for k in range(a.order + 1):
        series.append(base * binom / a0**k)
        binom *= (r - k) / (k + 1)
    return _compose(a, series)


def reciprocal(a: Jet) -> Jet:
    a0 = _as_array(a.coeffs[..., 0])
    _require_nonzero(a0, "reciprocal")
    return _compose(a, [(-1) ** k / a0 ** (k + 1) for k in range(a.order + 1)])


def sqrt(a: Jet) -> Jet:
    return power(a, 0.5)


def sin(a: Jet) -> Jet:
    a0 = _as_array(a.coeffs[..., 0])
    cyc = [np.sin(a0), np.cos(a0), -np.sin(a0), -np.cos(a0)]
    return _compose(a, [cyc[k % 4] / math.factorial(k) for k in range(a.order + 1)])


def cos(a: Jet) -> Jet:
    a0 = _as_array(a.coeffs[..., 0])
    cyc = [np.cos(a0), -np.sin(a0), -np.cos(a0), np.sin(a0)]
    return _compose(a, [cyc[k % 4] / math.factorial(k) for k in range(a.order + 1)])


def tan(a: Jet) -> Jet:
    return sin(a) * reciprocal(cos(a))


def cabs(a: Jet) -> Jet:
    """Modulus ``sqrt(a · conj(a))`` (requires a nonzero constant term)."""
    return sqrt((a * a.conj()).real)


def arg(a: Jet) -> Jet:
    """Principal argument ``Im log a``, as a real jet."""
    return log(a).imag


_ELEMENTARY = {
    "exp": exp,
    "log": log,
    "sqrt": sqrt,
    "sin": sin,
    "cos": cos,
    "tan": tan,
}


def jet_elementary(f: str, a: Jet, r: float | None = None) -> Jet:
    """Apply a named elementary function (``power`` needs ``r``)."""
    if f == "power":
        if r is None:
            raise JetError("power needs a real exponent")
        return power(a, r)
    if f == "reciprocal":
        return reciprocal(a)
    try:
        return _ELEMENTARY[f](a)
    except KeyError:
        raise JetError(f"unknown elementary function {f!r}") from None


# ----------------------------------------------------------------------
# linear algebra


def jet_solve(A: Jet, b: Jet) -> Jet:
    """Solve ``A x = b`` over the jet ring.

    Gauss-Jordan elimination with partial pivoting on the magnitude of the
    constant terms.  ``b`` may have shape ``(n,)`` or ``(n, m)``.
    """
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise JetError(f"jet_solve needs a square jet matrix, got shape {A.shape}")
    n = A.shape[0]
    if not isinstance(b, Jet):
        b = jet_const(b, A.dim, A.order)
    if b.dim != A.dim:
        raise JetError("dimension mismatch in jet_solve")
    vector = b.ndim == 1
    if vector:
        b = b.reshape(n, 1)
    if b.shape[0] != n:
        raise JetError(f"right-hand side has {b.shape[0]} rows, expected {n}")
    order = min(A.order, b.order)
    dim = A.dim
    M = np.concatenate(
        [A.truncate(order).coeffs, b.truncate(order).coeffs], axis=1
    ).copy()
    scale = np.max(np.abs(M[:, :n, 0])) if n else 0.0
    if scale == 0.0:
        raise SingularConstantTerm("constant-term matrix is zero")
    for k in range(n):
        col = np.abs(M[k:, k, 0])
        p = int(np.argmax(col)) + k
        if col[p - k] < PIVOT_RTOL * scale:
            raise SingularConstantTerm(
                f"pivot {col[p - k]:.3e} below {PIVOT_RTOL:g} x matrix scale {scale:.3e}"
            )
        if p != k:
            M[[k, p]] = M[[p, k]]
        inv = reciprocal(Jet(M[k, k], dim, order)).coeffs
        M[k] = _mul_coeffs(M[k], inv[None, :], dim, order)
        factors = M[:, k : k + 1].copy()
        factors[k] = 0.0
        M -= _mul_coeffs(factors, M[k][None, :, :], dim, order)
    x = Jet(M[:, n:], dim, order)
    return x.reshape(n) if vector else x


def jet_inv(A: Jet) -> Jet:
    """Inverse of a square jet matrix."""
    n = A.shape[0]
    return jet_solve(A, jet_const(np.eye(n), A.dim, A.order))


def jet_det(A: Jet) -> Jet:
    """Determinant by cofactor expansion (intended for n <= 4)."""
    n = A.shape[0]
    if n == 1:
        return A[0, 0]
    total = None
    for j in range(n):
        rows = [r for r in range(1, n)]
        cols = [c for c in range(n) if c != j]
        minor = Jet(A.coeffs[np.ix_(rows, cols)], A.dim, A.order)
        term = A[0, j] * jet_det(minor)
        term = term if j % 2 == 0 else -term
        total = term if total is None else total + term
    return total


# ----------------------------------------------------------------------
# extraction and re-embedding


def jet_extract(a: Jet, idx: Sequence[int]):
    """Partial derivative ``∂^idx f`` at the expansion point."""
    idx = tuple(int(i) for i in idx)
    if len(idx) != a.dim or any(i < 0 for i in idx):
        raise JetError(f"multi-index {idx} invalid for dim {a.dim}")
    if sum(idx) > a.order:
        raise OrderExhausted(
            f"multi-index of degree {sum(idx)} exceeds usable order {a.order}"
        )
    sp = _space(a.dim, a.order)
    r = sp.lookup[sp.encode(np.array(idx))]
    v = a.coeffs[..., r] * sp.mfact[r]
    return v if np.ndim(v) else complex(v)


def embed(a: Jet, new_dim: int, positions: Sequence[int]) -> Jet:
    """View a jet in ``dim`` variables as a jet in ``new_dim`` variables.

    Old variable ``j`` becomes new variable ``positions[j]``; the result does
    not depend on the remaining variables.
    """
    if len(positions) != a.dim or len(set(positions)) != a.dim:
        raise JetError("positions must list distinct targets for every variable")
    if any(not 0 <= p < new_dim for p in positions):
        raise JetError("embedding position out of range")
    old = _space(a.dim, a.order)
    new = _space(new_dim, a.order)
    exps = np.zeros((old.n, new_dim), dtype=np.int64)
    exps[:, list(positions)] = old.exps
    target = new.lookup[new.encode(exps)]
    c = np.zeros(a.shape + (new.n,), complex)
    c[..., target] = a.coeffs
    return Jet(c, new_dim, a.order)


def restrict(a: Jet, keep: Sequence[int]) -> Jet:
    """Restrict to the slice through the expansion point spanned by ``keep``.

    The other variables are frozen at their expansion values, so the result
    is a jet in ``len(keep)`` variables.
    """
    keep = [int(k) for k in keep]
    if len(set(keep)) != len(keep) or any(not 0 <= k < a.dim for k in keep):
        raise JetError("restrict needs distinct variable indices within range")
    old = _space(a.dim, a.order)
    new = _space(len(keep), a.order)
    frozen = [j for j in range(a.dim) if j not in keep]
    rows = np.nonzero(old.exps[:, frozen].sum(axis=1) == 0)[0] if frozen else np.arange(old.n)
    target = new.lookup[new.encode(old.exps[rows][:, keep])]
    c = np.zeros(a.shape + (new.n,), complex)
    c[..., target] = a.coeffs[..., rows]
    return Jet(c, len(keep), a.order)


def taylor_eval(a: Jet, h: Sequence[float]) -> np.ndarray:
    """Evaluate the truncated polynomial at displacement ``h``."""
    sp = _space(a.dim, a.order)
    h = np.asarray(h, dtype=complex)
    mono = np.prod(h[None, :] ** sp.exps, axis=1)
    return a.coeffs @ mono
