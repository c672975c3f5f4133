#!/usr/bin/env python3
"""Triangular orbits in the complexified circle.

Solves for 3-periodic orbits from a few seeds, shows they are all
equilateral, and measures the dimension of the family through one of them.
The only nearby deformation is rotation, so the local dimension is 1.

    python3 demos/circle_triangles.py
"""
import numpy as np

from cbilliards.catalog import circle_triple
from cbilliards.mirrors import CurvePoint
from cbilliards.orbits import OrbitNotFound, solve_periodic
from cbilliards.reflectivity import family_dimension

b = circle_triple()
circle = b.mirrors[0]
rng = np.random.default_rng(0)

print("seed angles (deg)            -> solved angles (deg)")
orbits = []
for _ in range(6):
    ang = rng.uniform(0, 2 * np.pi) + 2 * np.pi / 3 * np.arange(3) + rng.uniform(-0.3, 0.3, 3)
    init = [CurvePoint.from_param(circle, np.tan(a / 2)) for a in ang]
    try:
        o = solve_periodic(b, 3, init)
    except OrbitNotFound as exc:
        print("  no convergence:", exc)
        continue
    P = o.points()
    solved = np.degrees(np.angle(P[:, 0] + 1j * P[:, 1]).real) % 360
    print(f"  {np.round(np.degrees(ang) % 360, 1)} -> {np.round(solved, 4)}  "
          f"({o.iterations} GN steps, residual {o.max_residual():.1e})")
    orbits.append(o)

rep = family_dimension(b, orbits[0])
print()
print("singular values of the residual Jacobian:", np.array(rep.singular_values))
print(f"local dimension {rep.local_dim}, perturbation successes {rep.sample_successes}")
print("verdict:", rep.verdict)
