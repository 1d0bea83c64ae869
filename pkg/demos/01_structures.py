"""Classify a few catalog structures and print their normalized invariants.

Run with ``python demos/01_structures.py``.
"""

from shearfree import catalog
from shearfree import invariants as inv
from shearfree.congruence import classify_branch
from shearfree.spacetime import BETA_K

print("branch of each congruence entry")
for name in catalog.catalog_names():
    item = catalog.catalog_get(name)
    if item.entry.kind == "congruence":
        print(f"  {name:22s} {classify_branch(item.obj, n_points=8).branch.value}")

print("\nbeta family: K1 = (beta^3 + 3)/beta^2 vanishes at beta = -3^(1/3)")
for beta in (-2.0, -1.5, BETA_K, -1.0, 0.5, 2.0):
    c = catalog.catalog_get("beta_family", {"beta": beta}).obj
    r = inv.ts_reduce_k2_branch(c, c.sample(1, seed=0)[0])
    print(f"  beta = {beta:+.5f}   K1 = {r.K1:+.3e}   Z1 = {r.Z1:.4f}")

print("\nhomogeneous K2 = 0 structures: A1 and B1 are constant")
for tau in (0.3, 0.8, 1.5):
    c = catalog.catalog_get("bianchi_vih", {"tau": tau}).obj
    vals = {complex(inv.ts_reduce_k1_branch(c, p).B1) for p in c.sample(3, seed=1)}
    r = inv.ts_reduce_k1_branch(c, c.sample(1, seed=1)[0])
    print(f"  tau = {tau}:  A1 = {r.A1:.6f}  B1 = {r.B1:.6f}  ({len({round(v.imag, 10) for v in vals})} distinct B1 over 3 points)")
