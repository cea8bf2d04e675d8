"""Linear algebra of Cayley forms, fibred assembly and finite-difference torsion."""
from .assemble import (FibredFrameData, FrameDataError, assemble, assemble_codim4, assemble_codim6,
                       assemble_codim7, g2_metric, g2_star, standard_triple, validate_su3, validate_triple)
from .linear import (CayleyCheck, DecompositionReport, Metric8, MixedForm, NotCayleyError, OrbitProjector,
                     Projector, ThetaProjectionError, cayley_check, clifford_act, decomposition_report, hodge_star,
                     isotypic_projectors, metric_from_cayley, orbit_dimension, orbit_factor, pi_tau, projector,
                     q_remainder, stabilizer_algebra, theta_project)
from .torsion import CallableField, ConstantField, FibredField, TorsionComponents, finite_diff_torsion, raw_torsion
