"""Value of information: closed forms, estimators, structural audits and bounds."""
from .bounds import kg_guarantee_bound, lp_bound
from .closed_form import (
    TwoArmSetup,
    finite_difference_gradient,
    finite_difference_hessian,
    submodular_region_check,
    variance_reduction,
    voi_two_alt_closed,
    voi_two_alt_derivatives,
)
from .counterexample import (
    CounterexampleReport,
    adaptive_submodularity_counterexample,
    counterexample_sweep,
    counterexample_window,
)
from .estimators import (
    Allocation,
    PairedIncrement,
    marginal_benefit_mc,
    posterior_value_estimate,
    prior_value_estimate,
    voi_increment,
    voi_monte_carlo,
)
from .submodular import MultisetFunctionTable, SubmodularityReport, multiset_submodularity_check

__all__ = [
    "Allocation",
    "CounterexampleReport",
    "MultisetFunctionTable",
    "PairedIncrement",
    "SubmodularityReport",
    "TwoArmSetup",
    "adaptive_submodularity_counterexample",
    "counterexample_sweep",
    "counterexample_window",
    "finite_difference_gradient",
    "finite_difference_hessian",
    "kg_guarantee_bound",
    "lp_bound",
    "marginal_benefit_mc",
    "multiset_submodularity_check",
    "posterior_value_estimate",
    "prior_value_estimate",
    "submodular_region_check",
    "variance_reduction",
    "voi_increment",
    "voi_monte_carlo",
    "voi_two_alt_closed",
    "voi_two_alt_derivatives",
]
