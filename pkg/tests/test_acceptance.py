"""Acceptance criteria 1-13, one check per criterion.

Each test prints a single ``criterion N: PASS|FAIL`` line with the worst
observed error, then asserts.  Running this file directly prints the same
thirteen lines without pytest.
"""

import io
import json
import math
import sys
import time
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from oracles import partial, rigid_k1  # noqa: E402

from shearfree import catalog, cli, jets  # noqa: E402
from shearfree import invariants as inv  # noqa: E402
from shearfree import spacetime as S  # noqa: E402
from shearfree.congruence import commutator_residuals, structure_functions  # noqa: E402
from shearfree.expr import eval_jet  # noqa: E402

N = 16  # default number of sample points


def get(name, **params):
    return catalog.catalog_get(name, params).obj


def rel(a, b):
    return abs(complex(a) - complex(b)) / max(1.0, abs(complex(b)))


class Worst:
    """Tracks the largest ratio error/tolerance seen for a criterion."""

    def __init__(self):
        self.items = {}

    def add(self, label, err, tol):
        err = float(err)
        prev = self.items.get(label)
        if prev is None or err > prev[0]:
            self.items[label] = (err, tol)

    def flag(self, label, ok):
        self.add(label, 0.0 if ok else math.inf, 1.0)

    @property
    def ok(self):
        return all(e < t for e, t in self.items.values())

    def summary(self):
        bad = [k for k, (e, t) in self.items.items() if not e < t]
        if bad:
            return "failed: " + ", ".join(bad)
        k, (e, t) = max(self.items.items(), key=lambda kv: kv[1][0] / kv[1][1])
        return f"{len(self.items)} checks, tightest {k}: {e:.2e} < {t:.0e}"


# ----------------------------------------------------------------------


def c1():
    w = Worst()
    c = get("heisenberg_standard")
    for p in c.sample(N, seed=0):
        r = inv.ts_invariants(c, p)
        w.add("max|K1|,|K2|", max(abs(r.K1), abs(r.K2)), 1e-8 * r.scale)
    return w


def c2():
    w = Worst()
    for e1, e2 in ((1, 0), (0, 1), (1, 1)):
        c = get("epsilon_family", e1=e1, e2=e2)
        for u, x, y in c.sample(N, seed=0):
            rho = 1.0
            want = 8 * e2**2 / (rho**2 * abs(2 * e2 * complex(x, y) + 1j * e1) ** 4)
            r = inv.ts_invariants(c, (u, x, y), rho=rho)
            w.add(f"K1({e1},{e2})", rel(r.K1, want), 1e-6)
            w.add(f"K2({e1},{e2})", abs(r.K2), 1e-6)
    return w


def c3():
    w = Worst()
    for cval in (0.0, 1.0):
        c = get("rigid", c=cval)

        def H(x, y, cval=cval):
            r2 = x * x + y * y
            return r2 + cval * r2 * r2 / 4

        for u, x, y in c.sample(N, seed=0):
            want = rigid_k1(H, x, y)
            w.add(f"rigid c={cval}", rel(inv.ts_invariants(c, (u, x, y)).K1, want), 1e-5)
    return w


def c4():
    w = Worst()
    for beta in (-1.0, -(2 ** (1 / 3)), -(3 ** (1 / 3)), 0.5):
        c = get("beta_family", beta=beta)
        for p in c.sample(N, seed=0):
            r = inv.ts_reduce_k2_branch(c, p)
            for k, want in (("K1", (beta**3 + 3) / beta**2), ("Z0", -1j * beta), ("Z1", -2j / beta), ("Z2", -1j / beta)):
                w.add(f"{k}(beta={beta:.4g})", rel(getattr(r, k), want), 1e-6)
    c = get("beta_family", beta=S.BETA_K)
    for p in c.sample(N, seed=0):
        w.add("K1(beta_K)", abs(inv.ts_reduce_k2_branch(c, p).K1), 1e-8)
    return w


def c5():
    w = Worst()
    for s in (1.0, -1.0):
        for tau in (-1.5, -0.8, 0.3, 0.6, 2.0):
            c = get("bianchi_vih", tau=tau, s=s)
            t = s * math.copysign(abs(tau), 1 - 2 * s * tau * tau)
            for p in c.sample(N, seed=0):
                r = inv.ts_reduce_k1_branch(c, p)
                w.add(f"A1(s={s:g})", rel(r.A1, -(-s + 2 * t * t) / (2 * t)), 1e-6)
                w.add(f"B1(s={s:g})", rel(r.B1, 1j * t), 1e-6)
    c = get("bianchi_iv")
    for p in c.sample(N, seed=0):
        r = inv.ts_reduce_k1_branch(c, p)
        w.add("bianchi_iv A1", rel(r.A1, 0.5), 1e-6)
        w.add("bianchi_iv B1", rel(r.B1, 0.5j), 1e-6)
    return w


def c6():
    w = Worst()
    c = get("generic_flat")
    for p in c.sample(N, seed=0):
        r = inv.generic_invariants(c, p)
        w.add("flat", max(abs(r.k1), abs(r.k2), abs(r.k3)), 1e-6)
    for kappa in (0.5, 2.0, 3.0):
        for name, sgn in (("kappa_viii", -1), ("kappa_ix", 1)):
            c = get(name, kappa=kappa)
            for p in c.sample(N, seed=0):
                r = inv.generic_invariants(c, p)
                w.add(f"{name} k3", rel(r.k3, -1j * (1 + sgn * 2 / kappa**2)), 1e-6)
    for s in (1, -1):
        c = get("bianchi_ii", s=s)
        for p in c.sample(N, seed=0):
            r = inv.generic_invariants(c, p)
            w.add("bianchi_ii k1", rel(r.k1, s * (1 - 1j) / math.sqrt(2)), 1e-6)
            w.add("bianchi_ii k2", rel(r.k2, s * (1 + 1j) / math.sqrt(2)), 1e-6)
            w.add("bianchi_ii k3", rel(r.k3, -1j), 1e-6)
    return w


def c7():
    w = Worst()
    for alpha in (0.0, 0.5, 1.0, 2.0):
        c = get("st_4sym", alpha=alpha)
        for p in c.sample(N, seed=0):
            r = inv.st_invariants(c, p)
            w.add("T0", rel(r.T0, alpha), 1e-6)
            w.add("t1,k0,k1", max(abs(r.t1), abs(r.k0), abs(r.k1)), 1e-8)
    c = get("st_h0_example")
    for u, x, y in c.sample(N, seed=0):
        w.add("K0 (f=xy)", rel(inv.st_invariants(c, (u, x, y)).K0, -math.exp(-2 * (u + x * y))), 1e-6)
    return w


def c8():
    w = Worst()
    for beta in (-1.0, S.BETA_K):
        c = get("beta_family", beta=beta)
        K1 = (beta**3 + 3) / beta**2
        for t in (-1 / 3, 0.25, 1 / 3, 1.0):
            g = S.metric_g_t(c, t)
            for p in g.sample(N, seed=0):
                ws = S.weyl_spinors(g, p)
                w.add("Psi0,Psi1", max(abs(ws.psi[0]), abs(ws.psi[1])), 1e-6)
                w.add("Psi2", rel(ws.psi[2], (1 - 4 * t) * K1 / 6), 1e-6)
                kind = S.petrov(ws).type
                if beta == S.BETA_K:
                    w.flag("Petrov(K1=0)", kind == ("N" if t == 1 / 3 else "III"))
                elif t == 0.25:
                    w.flag("Petrov(t=1/4)", kind == "III")
    return w


def _bach(g, p):
    cb = S.curvature(g, p, 2)
    B = S.bach(g, p, cb)
    return B, S.frame_components(g, p, B), cb.scale() ** 2


def c9():
    w = Worst()
    for t in (-1 / 3, 1.0):
        g = S.metric_g_t(get("beta_family", beta=S.BETA_K), t)
        for p in g.sample(4, seed=0):
            B, _, sc = _bach(g, p)
            w.add(f"Bach(beta_K, t={t:.3g})", np.max(np.abs(B)) / sc, 1e-6)
    for label, beta in (("beta_S1", S.BETA_S1), ("beta_S2", S.BETA_S2)):
        g = S.metric_g_t(get("beta_family", beta=beta), 0.25)
        for p in g.sample(4, seed=0):
            _, Bf, sc = _bach(g, p)
            w.add(f"B_1/4({label})", np.max(np.abs(Bf)) / sc, 1e-6)
    ratios = []
    for beta in (-1.0, -0.6, 0.7, 1.3, 2.0, -2.5):
        g = S.metric_g_t(get("beta_family", beta=beta), 0.25)
        for p in g.sample(2, seed=0):
            _, Bf, sc = _bach(g, p)
            off = Bf.copy()
            off[2, 2] = 0
            w.add("off-diagonal", np.max(np.abs(off)) / sc, 1e-6)
            ratios.append(Bf[2, 2] / S.bach_beta_prediction(beta, 0.25))
    ratios = np.array(ratios)
    w.add("ratio spread", np.max(np.abs(ratios / ratios.mean() - 1)), 1e-4)
    return w


def c10():
    w = Worst()
    for alpha in (0.0, 0.5, 1.0, 2.0):
        for cw in (-1.0, 0.0, 0.5):
            g = S.metric_pp(alpha, cw)
            for p in g.sample(4, seed=0):
                ws = S.weyl_spinors(g, p)
                w.add("Psi4", rel(ws.psi[4], 2 * (1j * alpha - cw - 1)), 1e-6)
        g = S.metric_pp_ricci_flat(alpha, 1.0)
        for p in g.sample(4, seed=0):
            w.add("Ricci(g_-1 rescaled)", S.curvature(g, p, 0).ricci_norm(), 1e-6)
    return w


def c11():
    w = Worst()
    for kp in (
        S.KerrParams(1.0, 0.0, 0.0, 1.0),
        S.KerrParams(1.0, 0.3, 0.0, 1.0),
        S.KerrParams(0.5, 0.2, 0.0, 0.7),
        S.KerrParams(0.8, 0.4, 0.0, 0.0),
    ):
        g = S.metric_kerr(kp)
        for p in g.sample(8, seed=0):
            cb = S.curvature(g, p, 0)
            w.add("Ricci", cb.ricci_norm(), 1e-7)
            w.flag("Petrov D", S.petrov(S.weyl_spinors(g, p, cb)).type == "D")
    return w


def c12():
    w = Worst()

    def system(label, tau, p="1", c="0", m="0"):
        st_ = S.ReducedStructure(tau, 1)
        ans = S.EinsteinAnsatz(p=p, c=c, m=m)
        for q in st_.chart().sample(4, seed=0):
            w.add(label, max(S.reduced_einstein_residuals(ans, st_, q)), 1e-8)
        return st_, ans

    tau = 1 / math.sqrt(2)
    st_, ans = system("vacuum", tau, "1.3", "0", f"{1.3**4 / 4!r} + i*0.2")
    g = S.metric_reduced(ans, st_)
    for q in g.sample(4, seed=0):
        w.add("Ric(tau=1/sqrt2)", S.curvature(g, q, 0).ricci_norm(), 1e-6)
    for e1 in (1, -1):
        for e2 in (1, -1):
            qa = 5 + e2 * math.sqrt(17)
            system("m=0 family A", e1 / 4 * math.sqrt(qa), "1.2", repr(-e1 / math.sqrt(qa)))
            qb = 0.5 * (7 + e2 * math.sqrt(17))
            system("m=0 family B", e1 / 2 * math.sqrt(qb), "0.8", repr(e1 * (3 + e2 * math.sqrt(17)) / (4 * math.sqrt(qb))))
    for eps in (1, -1):
        tau = 0.5 * math.sqrt((11 + eps * math.sqrt(13)) / 6)
        k = (1 - eps * math.sqrt(13)) / 12
        system("p_eps", tau, f"exp({k!r}*log(y))*(0.4 + 0.9*y)", S._c_constant_expr(tau, 0.0))
    for tau, p in (
        (0.5 * math.sqrt(1.5), "0.6*sqrt(y) + 0.9*y"),
        (0.5 * math.sqrt(5 / 3), "exp(2/3*log(y))*1.1"),
        (0.5 * math.sqrt(2), "1.4*sqrt(y)"),
        (0.5 * math.sqrt(3), "0.8*y"),
    ):
        system("flat branches", tau, p, S._c_constant_expr(tau, 0.0))
    for s in (1.0, 0.5):
        lp = S.leroy_parameters(s)
        w.add("Leroy Lambda", abs(lp["Lambda"] - lp["epsilon"] * s * s), 1e-12)
        g = S.metric_leroy(s)
        for q in g.sample(4, seed=0):
            w.add("Leroy Einstein", S.einstein_residual(g, lp["Lambda"], q).relative, 1e-6)
            w.flag("Leroy N", S.petrov(S.weyl_spinors(g, q)).type == "N")
    return w


def c13():
    w = Worst()
    rng = np.random.default_rng(13)
    # jets against finite differences
    for _ in range(4):
        p = tuple(rng.uniform(-0.5, 0.5, 2))
        J = eval_jet("exp(x0*x1) + sin(x0 - 2*x1)", p, order=3)
        for idx in ((1, 0), (1, 1), (0, 2)):
            want = partial(lambda v: math.exp(v[0] * v[1]) + math.sin(v[0] - 2 * v[1]), p, idx)
            w.add("jet vs FD", rel(jets.jet_extract(J, idx), want), 1e-7)
    # commutator identities
    for name in ("beta_family", "bianchi_vih", "st_4sym", "kappa_ix"):
        c = get(name)
        for p in c.sample(2, seed=1):
            sf = structure_functions(c, p, 4)
            w.add("commutators", max(commutator_residuals(sf, c.scalar("x*u + exp(y)", p, 4))), 1e-8)
    # gauge invariance
    cases = [
        ("beta_family", inv.ts_reduce_k2_branch, ("K1", "Z0", "Z1", "Z2")),
        ("bianchi_vih", inv.ts_reduce_k1_branch, ("A1", "B1")),
        ("st_h0_example", inv.st_reduce, ("T0", "A", "B", "C", "K0")),
        ("kappa_ix", inv.generic_invariants, ("k1", "k2", "k3")),
    ]
    for name, fn, keys in cases:
        c = get(name)
        for _ in range(3):
            a, b, d, e = (float(v) for v in rng.uniform(-0.5, 0.5, 4))
            g = c.gauge(f"exp(({a!r})*u + ({b!r})*x*y)", f"(1.3 + ({d!r})*sin(x))*exp(i*({e!r})*u)")
            p = c.sample(1, seed=2)[0]
            r0, r1 = fn(c, p), fn(g, p)
            for k in keys:
                w.add("gauge invariance", rel(getattr(r1, k), getattr(r0, k)), 1e-7)
    # Riemann symmetries
    for g in (S.metric_kerr(S.KerrParams(1.0, 0.3, 0.0, 1.0)), S.metric_leroy()):
        for p in g.sample(2, seed=3):
            w.add("Riemann symmetries", max(S.curvature(g, p, 0).symmetry_residuals().values()), 1e-8)
    # conformal invariance
    base = S.metric_g_t(get("beta_family", beta=S.BETA_K), 1.0)
    for _ in range(2):
        a, b = (float(v) for v in rng.uniform(-0.4, 0.4, 2))
        h = base.rescaled(f"({a!r})*u + ({b!r})*x*y")
        p = base.sample(1, seed=4)[0]
        w.flag("Petrov conformal", S.petrov(S.weyl_spinors(h, p)).type == S.petrov(S.weyl_spinors(base, p)).type)
        B, _, sc = _bach(h, p)
        w.add("Bach vanishing conformal", np.max(np.abs(B)) / sc, 1e-6)
    # CLI determinism
    argv = ["invariants", "--catalog", "beta_family", "--points", "3", "--seed", "5"]
    outs = []
    for _ in range(2):
        buf = io.StringIO()
        cli.run(argv, buf, io.StringIO())
        outs.append(buf.getvalue())
    json.loads(outs[0])
    w.flag("CLI determinism", outs[0] == outs[1])
    return w


CRITERIA = [c1, c2, c3, c4, c5, c6, c7, c8, c9, c10, c11, c12, c13]


def run_criterion(k):
    t0 = time.perf_counter()
    w = CRITERIA[k - 1]()
    dt = time.perf_counter() - t0
    line = f"criterion {k:2d}: {'PASS' if w.ok else 'FAIL'}  ({w.summary()}; {dt:.1f} s)"
    return w.ok, line


@pytest.mark.parametrize("k", range(1, 14))
def test_criterion(k, capsys):
    ok, line = run_criterion(k)
    with capsys.disabled():
        print("\n" + line)
    assert ok, line


if __name__ == "__main__":
    results = [run_criterion(k) for k in range(1, 14)]
    for _, line in results:
        print(line)
    sys.exit(0 if all(ok for ok, _ in results) else 1)
