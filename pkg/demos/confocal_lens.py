#!/usr/bin/env python3
"""A 4-reflective pair: two confocal parabolas.

P1: y = (x^2 - 1)/2 and P2: y = (1 - x^2)/2 share the focus at the origin.
Bouncing P1, P2, P1, P2 the complex 4-periodic orbits fill a 2-dimensional
set, which the probe reports as reflective evidence. The same probe on the
circle triple finds only a 1-dimensional family.

    python3 demos/confocal_lens.py
"""
import time

from cbilliards.catalog import circle_triple, lens_billiard
from cbilliards.orbits import classify_edges
from cbilliards.reflectivity import chain_orbit, find_isotropic_edge_orbit, reflectivity_probe

for name, b, k in (("confocal lens", lens_billiard(), 4), ("circle triple", circle_triple(), 3)):
    t0 = time.perf_counter()
    rep = reflectivity_probe(b, k, 50, rng=0)
    sv = ", ".join(f"{s:.1e}" for s in rep.singular_values)
    print(f"{name:14s} local_dim={rep.local_dim} samples={rep.sample_successes} "
          f"verdict={rep.verdict}  sv=[{sv}]  ({time.perf_counter() - t0:.1f}s)")

# orbits with all edges isotropic alternate between the two circular points
lens = lens_billiard()
chains = [c for c in find_isotropic_edge_orbit(lens, 4, 2, rng=0) if c.closed]
print(f"\n{len(chains)} closed isotropic quadrilaterals on the lens; first one:")
o = chain_orbit(lens, chains[0])
for v, tag in zip(o.vertices, classify_edges(o)):
    print(f"  {v.mirror.label}: {v.affine.round(4)}  next edge {tag.value}")
