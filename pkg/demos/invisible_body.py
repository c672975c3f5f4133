#!/usr/bin/env python3
"""A body invisible in the vertical direction, built from confocal parabolas.

Each downward ray through the aperture reflects four times and leaves on
the line it came in on. The script traces a handful of rays, prints the
bounce points and writes a picture to invisible_body.svg.

    python3 demos/invisible_body.py [out.svg]
"""
import sys

from cbilliards.invisibility import build_two_parabola_body, check_invisible
from cbilliards.io import OutputBundle, render_svg
from cbilliards.reflectivity import family_dimension

ib = build_two_parabola_body()
lo, hi = ib.aperture()
print(f"aperture: {lo:.2f} < |x| < {hi:.2f}, gap between units {ib.gap}")

verdicts = [check_invisible(ib.body, ray) for ray in ib.sample_rays(6)]
for v in verdicts:
    tr = v.trajectory
    pts = " -> ".join(f"({p[0]:.3f}, {p[1]:.3f})" for p in tr.points)
    print(f"x0={tr.input.o[0]:+.3f}: {v.reflections} reflections, deviation {v.deviation:.1e}")
    print(f"    {pts}")

out = sys.argv[1] if len(sys.argv) > 1 else "invisible_body.svg"
bundle = OutputBundle(command="trace-invisible", body=ib.body.to_json(),
                      trajectories=[v.to_json() for v in verdicts])
with open(out, "w") as fh:
    fh.write(render_svg(bundle))
print("wrote", out)

# the same 4-gon, complexified, is a periodic orbit of the 4-mirror billiard
o = ib.complexified_orbit(1.5 + 0.2j)
rep = family_dimension(o.billiard, o)
print(f"complexified 4-gon at x0 = 1.5+0.2i: local_dim {rep.local_dim} "
      f"(the body is invisible in one direction only)")
