"""Equivariant quiver representations and their hyperkähler quotients."""
from .family import KronheimerFamily, harmonic_slope_space
from .quotient import (ChartDimensionError, ConvergenceError, DecayFit, QuotientChart, SolveResult, ale_decay_fit,
                       distance_linearity, fiber_distance, kahler_triple, moment_solve, nearest_point,
                       pullback_deviation, quotient_metric, tangent_chart, triple_pairing)
from .rep import (MomentValue, QuiverRepPoint, RepSpace, constellation_residual, moment_components, rep_space_basis,
                  scaling_transport)
