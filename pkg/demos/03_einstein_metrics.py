"""Einstein and pure-radiation metrics built on shear-free congruences."""

import math

from shearfree import spacetime as S

print("Kerr family (vacuum, type D)")
for kp in (S.KerrParams(1, 0, 0, 1), S.KerrParams(1, 0.3, 0, 1), S.KerrParams(0.5, 0.2, 0, 0.7)):
    g = S.metric_kerr(kp)
    p = g.sample(1, seed=0)[0]
    cb = S.curvature(g, p, 0)
    print(f"  {g.name:32s} Ricci/Riemann = {cb.ricci_norm():.1e}  type {S.petrov(S.weyl_spinors(g, p, cb)).type}")

print("\nTwisting type N Einstein metric")
lp = S.leroy_parameters(1.0)
g = S.metric_leroy(1.0)
for p in g.sample(3, seed=0):
    er = S.einstein_residual(g, lp["Lambda"], p)
    print(f"  Lambda = {lp['Lambda']:+.1f}  |Ric - Lambda g| = {er.relative:.1e}  type {S.petrov(S.weyl_spinors(g, p)).type}")

print("\nRicci-flat type III metrics with m = 0")
for eps in (1, -1):
    tau = 0.5 * math.sqrt((11 + eps * math.sqrt(13)) / 6)
    for s2 in (0.0, 0.5):
        g = S.metric_tau_eps(eps, 1.0, s2)
        p = g.sample(1, seed=0)[0]
        cb = S.curvature(g, p, 0)
        kind = S.petrov(S.weyl_spinors(g, p, cb)).type
        print(f"  eps = {eps:+d} (tau = {tau:.4f}), s2 = {s2}:  Ricci = {cb.ricci_norm():.1e}  type {kind}")

print("\npp-waves: Psi4 = 2(i alpha - c - 1)")
for alpha, c in ((1.0, 0.0), (0.5, -1.0), (0.0, -1.0)):
    g = S.metric_pp(alpha, c)
    ws = S.weyl_spinors(g, g.sample(1, seed=0)[0])
    print(f"  alpha = {alpha}, c = {c}:  Psi4 = {ws.psi[4]:.6f}  type {S.petrov(ws).type}")
