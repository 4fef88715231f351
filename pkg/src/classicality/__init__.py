"""Quantitative classicality and consistency criteria for finite-dimensional
quantum systems, with direct numerical verification by grid evolution.

The package compares two descriptions of the same initial configuration:
classical data (values with error margins for all canonical variables)
and a wave function on a grid. Consistency criteria score the agreement
at one instant; classicality criteria bound error-ket norms built from
the classical flow and guarantee that the agreement survives time
evolution, which the evolution module then verifies by split-step
propagation.
"""

from .classical import (ClassicalData, PolynomialSystem, SequenceSpec, Trajectory,
                        builtin_trajectory, default_sample_times,
                        enumerate_fundamental_sequences, flow_points, get_system,
                        lie_series_trajectory, monte_carlo_margin_check,
                        propagate_all_margins, propagate_error_margin)
from .config import RunConfig, parse_config
from .criteria import (classicality_first, classicality_second, composite_sequences,
                       consistency_first, consistency_second, gaussian_fastpath,
                       sufficient_consistency_order)
from .errors import AccuracyWarning, ConfigError, GridCoverageError, SequenceBudgetError
from .error_kets import (ErrorKet, apply_error_factor, error_ket_norm_sq, ket_overlap,
                         mixed_error_ket, nth_order_spread,
                         spread_probability_guarantee_check)
from .evolution import evolved_moment, split_step_evolve, verify_consistency_over_time
from .grids import (GridAxis, GridState, inner_product, interval_probability,
                    load_tabulated, make_gaussian, product_state, quadrature_moment,
                    to_rep)
from .phase_space import CanonicalVariable, PhaseSpace, PolynomialObservable, poisson_bracket
from .reports import CriterionReport, CriterionRow, EvolutionRecord, EvolutionRow

__version__ = "0.1.0"

__all__ = [
    "AccuracyWarning", "CanonicalVariable", "ClassicalData", "ConfigError",
    "CriterionReport", "CriterionRow", "ErrorKet", "EvolutionRecord", "EvolutionRow",
    "GridAxis", "GridCoverageError", "GridState", "PhaseSpace", "PolynomialObservable",
    "PolynomialSystem", "RunConfig", "SequenceBudgetError", "SequenceSpec", "Trajectory",
    "apply_error_factor", "builtin_trajectory", "classicality_first",
    "classicality_second", "composite_sequences", "consistency_first",
    "consistency_second", "default_sample_times", "enumerate_fundamental_sequences",
    "error_ket_norm_sq", "evolved_moment", "flow_points", "gaussian_fastpath",
    "get_system", "inner_product", "interval_probability", "ket_overlap",
    "lie_series_trajectory", "load_tabulated", "make_gaussian",
    "mixed_error_ket", "monte_carlo_margin_check", "nth_order_spread", "parse_config",
    "poisson_bracket", "product_state", "propagate_all_margins",
    "propagate_error_margin", "quadrature_moment", "split_step_evolve",
    "spread_probability_guarantee_check", "sufficient_consistency_order", "to_rep",
    "verify_consistency_over_time",
]
