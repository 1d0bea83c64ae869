"""Weyl spinors, Petrov types and the Bach tensor of the metrics g_t.

The metrics live on the circle bundle over a twisting shear-free structure;
here the structure is a member of the beta family.
"""

import numpy as np

from shearfree import catalog
from shearfree import spacetime as S


def cong(beta):
    return catalog.catalog_get("beta_family", {"beta": beta}).obj


print("Petrov type of g_t")
print("  beta      " + "".join(f"t={t:<8.3g}" for t in (-1 / 3, 0.25, 1 / 3, 1.0)))
for beta in (-1.0, S.BETA_K):
    types = []
    for t in (-1 / 3, 0.25, 1 / 3, 1.0):
        g = S.metric_g_t(cong(beta), t)
        types.append(S.petrov(S.weyl_spinors(g, g.sample(1, seed=0)[0])).type)
    print(f"  {beta:+.4f}  " + "".join(f"{x:<10s}" for x in types))

print("\nBach tensor at t = 1/4: only the theta^3 theta^3 frame component survives")
for beta in (-3.0, S.BETA_S1, -2.0, -1.0, S.BETA_S2, 0.5, 1.5):
    g = S.metric_g_t(cong(beta), 0.25)
    p = g.sample(1, seed=0)[0]
    Bf = S.frame_components(g, p, S.bach(g, p))
    pred = S.bach_beta_prediction(beta, 0.25)
    print(f"  beta = {beta:+.4f}  B33 = {Bf[2, 2].real:+.6e}  predicted {pred:+.6e}")

print("\nBach-flat members at beta = -3^(1/3)")
for t in (-1 / 3, 1.0, 0.5):
    g = S.metric_g_t(cong(S.BETA_K), t)
    p = g.sample(1, seed=0)[0]
    print(f"  t = {t:+.3f}   max |Bach| = {np.max(np.abs(S.bach(g, p))):.2e}")
