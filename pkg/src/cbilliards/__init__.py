"""Complex projective billiards.

Reflections through the complexified Euclidean form, algebraic mirrors,
periodic orbit solving, numerical reflectivity probes and real invisible
bodies built from confocal parabolas.
"""

from .projective import I1, I2, INFINITY_LINE, Dir2, PLine, PPoint, bilinear_form, chordal, join, meet
from .reflection import Involution, reflect_direction, reflect_line_at, reflect_point, reflect_vector
from .mirrors import CurvePoint, Mirror, RationalParam, contains_isotropic_infinity, find_special_points
from .orbits import Billiard, EdgeTag, Orbit, check_intermittency, orbit_residual, solve_periodic, validate_orbit
from .reflectivity import ReflectivityReport, family_dimension, find_isotropic_edge_orbit, reflectivity_probe
from .invisibility import ORay, build_two_parabola_body, check_invisible, trace
from .io import Config, OutputBundle, parse_config, render_svg

__version__ = "0.1.0"
