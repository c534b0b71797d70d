"""Numerical laboratory for R-boundedness of multiplier operators.

Modules:

* :mod:`rboundlab.spaces` -- normed spaces, operator norms, Schauder decompositions
* :mod:`rboundlab.rademacher` -- Rademacher averages and R-bound witness search
* :mod:`rboundlab.multipliers` -- multiplier symbols, sectorial and Ritt multipliers
* :mod:`rboundlab.counterexample` -- the factorial semigroup construction
* :mod:`rboundlab.cli` -- the ``rboundlab`` command
"""

from .counterexample import (CounterexampleReport, FactorialSchedule, counterexample_report,
                             mc_minus_qn_bound, measure_norm_diff, norm_diff_rhs,
                             proof_families, rademacher_inequality, semigroup_symbol,
                             telescoping_check)
from .multipliers import (MultiplierSymbol, SectorGrid, SpectrumError, aco_coefficients,
                          apply_multiplier, inverse_resolvent_check, k_theta, multiplier_matrix,
                          multiplier_norm, nested_grids, resolvent_symbol, ritt_power_symbol,
                          ritt_set_bounds, sectorial_sup, var)
from .rademacher import (RademacherConfig, RBoundWitness, SearchConfig, rademacher_norm,
                         rademacher_norm_exact, rademacher_norm_mc, rbound_curve,
                         rbound_lower_search, rbound_ratio)
from .spaces import (DecompositionModel, SpaceModel, build_coordinate_decomposition,
                     build_haar_l1, build_trig_lp, load_decomposition, norm, operator_norm,
                     partial_sum, save_decomposition, tail_projection, validate_decomposition)

__version__ = "0.1.0"
