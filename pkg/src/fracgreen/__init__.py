"""Green's functions for boundary value problems with conformable derivatives."""

from .bounds import (check_rf3_monotone, check_strict_lower_bound, check_two_sided_bound,
                     envelope_g2, envelope_g3, g3_positivity_threshold, k_lidstone)
from .errors import (DivergenceError, DomainError, FracGreenError, NumericError,
                     ParameterError, SingularPointError, StencilError, UnsupportedFamilyError)
from .fraccalc import (GridFunction, QuadratureRule, conf_diff_closed, conf_diff_limit,
                       conf_integral, iterated_conf_diff)
from .greens import BcCoeffs, Family, KernelSpec, OrderSet
from .report import VerifyReport
from .solver import (RhsFn, SolveReport, ThreePointParams, ThreePointSpec, oracle_direct,
                     solve_linear, solve_nonlinear_picard, solve_threepoint)
from .verify import (check_classical_reduction, check_positivity, check_seams,
                     check_symmetry_lidstone, run_suite, verify_bcs, verify_residual)

__version__ = "0.1.0"
