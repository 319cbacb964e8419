"""Rate-equivocation regions of the generalized MAC with confidential messages."""
from .bounds import (ExplicitEquivocationSet, MacPreconditionError, UnionFormEquivocationSet,
                     equivocation_set_explicit, equivocation_set_union_form, geometry_case, in_mac,
                     inner_generators, inner_polygon, inner_slice, mac_vertices, membership_axes,
                     membership_grid, one_message_constants, outer_generators, outer_polygon,
                     outer_slice, polytope_vertices, secrecy_generators, secrecy_two_caps,
                     secrecy_two_generators, widened_index_set)
from .bundles import (OneMessageBundle, TwoMessageBundle, mi_bundle_one_message,
                      mi_bundle_two_message, one_message_terms, two_message_terms)
from .distributions import (GridBudgetError, LatticeGrid, OneMessageDist, TwoMessageDist,
                            degraded_grid, one_message_grid, simplex_lattice, two_message_grid)
from .hull import (COORDS, RatePoint, RatePointError, RegionTrace, contains, convexify,
                   merge_traces, prune_trace, slice_max)
from .search import (DegradednessWarning, case_witnesses, default_grid, default_rate_grid,
                     degraded_region, inner_bound_one, inner_region_one, inner_region_two,
                     outer_bound_one, outer_evaluations, pareto_indices, positive_secrecy_possible,
                     recheck, secrecy_capacity_at_R0, secrecy_capacity_region_one,
                     secrecy_rate_region_two, superposition_dist, two_message_inner_bound,
                     two_message_points)

__all__ = [n for n in dir() if not n.startswith("_")]
