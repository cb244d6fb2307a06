"""Fractal interpolation for countable systems of data.

Given countably many nodes (x_n, y_n) with strictly increasing bounded x and
convergent y, the package builds a family of contracting maps whose unique
self-referential fixed-point curve passes through every node, computes that
curve by fixed-point iteration of a function-space operator, iterates the
corresponding set operator toward the attractor, and verifies that the two
constructions agree.  Two vertical-map families are provided: an affine one
(plain Banach contractions) and a hyperbolic one whose y-contraction ratio
approaches 1, exercising the strictly weaker Rakotch contraction class.
"""

from .attractor import (AttractorApprox, CommutationReport, GraphDistanceReport,
                        IterationConfig, chord_sample, commutation_check,
                        fractal_step, graph_vs_attractor, hausdorff_fast,
                        iterate_attractor, sample_graph_adaptive)
from .config import RunConfig, apply_overrides, build_from_config, load_config
from .datasys import (TAIL, CountableDataSystem, SequenceSpec, build_system,
                      tail_bound)
from .errors import (ConfigError, CountableFifError, DomainError,
                     InvalidInputError, RangeViolationError, ValidationError)
from .interpolation import (GridInterpolant, GridOperator, InterpolationReport,
                            ResidualReport, apply_T, bump_seed, chord_seed,
                            evaluate_recursive, evaluate_recursive_vec,
                            make_grid, picard_iterate, ramp_seed,
                            t_contraction_check, verify_interpolation)
from .maps import (MapContractionReport, MapSystem, NonBanachWitness,
                   SubintervalMap, VerticalMapFamily, build_map_system,
                   compute_theta, f_eval, l_eval, l_inverse,
                   non_banach_witness, rakotch_certificate,
                   sample_point_pairs, w_eval)
from .metrics import (ComparisonFunction, Point2, PointSet, RakotchCertificate,
                      ThetaMetric, certify_rakotch, d_theta, hausdorff,
                      phi_eval)

__version__ = "0.1.0"
