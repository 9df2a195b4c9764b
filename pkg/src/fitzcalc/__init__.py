"""fitzcalc: grid-based convex analysis of maximal monotone operators on R.

The engine samples extended-real functions on uniform boxes, conjugates
and hulls them exactly as discrete objects, and verifies the identities
tying monotone operators, their representative functions and saddle
bifunctions together.  Hot per-slice kernels run on a compiled backend
when available (``fitzcalc.BACKEND`` says which one is active).
"""

from ._backend import BACKEND, get_kernels
from .convex import (EnvelopeResult, biconjugate1, concave_hull1, conjugate1,
                     convex_hull1, default_dual_grid, full_conjugate2,
                     partial_conjugate, saddle_cl1, saddle_cl2)
from .exact import (ABS_VALUE, THREE_STEP_FN, PLConvexFn, StaircaseOracle,
                    affine_fitz_exact, fenchel_young_exact,
                    oracle_for_operator, pl_conjugate_exact)
from .extreal import NEG_INF, POS_INF, ExtReal, InfSumError
from .grids import (Grid1, GridFn1, GridFn2, PropertyReport, approx_eq,
                    load_csv, load_json, make_grid, negate1, negate2,
                    pi_grid, sample1, sample2, save_csv, save_json,
                    transpose2)
from .operators import (GraphSet, OperatorSpec, diagonal_subdifferential,
                        diagonal_subdifferential_flipped, divergence_flags,
                        fitzpatrick, graph_bifunction, graphs_match,
                        is_representative, operator_from_dict,
                        projected_domain, sample_graph, sigma)
from .saddles import (SaddlePair, equivalent_saddles, fitzpatrick_transform,
                      is_monotone_bifunction, is_saddle,
                      monotonicity_criterion, saddle_from_representative,
                      saddle_graph_bifunction, saddle_pair, sandwich_check,
                      saddle_domains, upper_fitzpatrick_transform,
                      upper_saddle_from_representative)

__version__ = "0.1.0"
