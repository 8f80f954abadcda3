"""Numerical experiments on linear hyperbolic torus models and annulus maps."""

from .flip import (CircleLift, FixedPointReport, FlipAnnulusMap, FlipReport, PinchMap,
                   boundary_rotations, find_fixed_points, flip_annulus_experiment,
                   random_flip_maps)
from .linear import (CAT_MAP, DomainError, ExpansionReport, LinearModel, PeriodicPoints,
                     ShadowingParams, d_components, linear_periodic_points, matrix_power,
                     periodic_point_count, shadowing_constant, verify_expansion)
from .matching import (MatchedPairs, MatchReport, OrbitNotClosed, PerturbedMap,
                       SemiconjugacyReport, TrigField, TwoSidedReport, match_periodic_points,
                       measure_R, pairs_table, semiconjugacy_check, shadowing_experiment,
                       two_sided_bound_check)
from .winding import (CoarseSampling, VanishingField, branched_lift_model, planar, sector_model,
                      winding_index)
