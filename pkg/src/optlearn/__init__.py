"""Sequential Bayesian ranking and selection with knowledge-gradient policies."""
from .belief import (
    CorrelatedBelief,
    IndependentBelief,
    kg_f_factor,
    predictive_sd_vector,
    update,
    update_correlated,
    update_independent,
)
from .errors import (
    ConfigError,
    FittingError,
    InputError,
    NumericalDegeneracyError,
    OptLearnError,
    UsageError,
)
from .policies import PolicyConfig, PolicyKind, PolicyState, decide, kg_scores

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "CorrelatedBelief",
    "FittingError",
    "IndependentBelief",
    "InputError",
    "NumericalDegeneracyError",
    "OptLearnError",
    "PolicyConfig",
    "PolicyKind",
    "PolicyState",
    "UsageError",
    "decide",
    "kg_f_factor",
    "kg_scores",
    "predictive_sd_vector",
    "update",
    "update_correlated",
    "update_independent",
]
