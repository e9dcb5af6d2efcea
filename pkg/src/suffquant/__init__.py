"""Sufficiency-based data reduction and quantizer design for two-sensor inference."""
from .errors import (
    AlphabetMismatch,
    BudgetExceeded,
    DegenerateModel,
    EmptySubset,
    FactorizationFails,
    HciInvalid,
    InsufficientSamples,
    MissingHiddenAxis,
    ModelError,
    NegativeProbability,
    NullConditioningEvent,
    RowNotNormalized,
    SingularCovariance,
    SuffQuantError,
)
from .model import (
    Alphabet,
    CostMatrix,
    DiscreteModel,
    PmfTable,
    Statistic,
    build_model,
    conditional,
    from_joint,
    induced_model,
    marginal,
    pushforward,
    validate,
)
from .modelfile import load_model, model_to_dict, parse_model
from .pbpo import DesignResult, pbpo, pbpo_best
from .quantizer import Estimator, Quantizer, RiskReport, bayes_estimator, bayes_risk, exhaustive_search, risk
from .sufficiency import (
    CheckReport,
    HciReport,
    check_hci,
    conditional_independence,
    factorization_check,
    hci_from_factorization,
    is_global_sufficient,
    minimal_sufficient,
    mutual_information_gap,
    posterior_match,
    validate_hci,
)
from .verify import ModelRecipe, SuiteReport, random_model, theorem_suite, verify_equivalence

__version__ = "0.1.0"
