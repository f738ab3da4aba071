"""Quantum state tomography with finite-sample confidence levels."""

__version__ = "0.1.0"

from ._accel import BACKEND
from .bloch import (
    GeneratorBasis,
    from_bloch,
    ghz_state,
    is_physical,
    make_basis,
    maximally_mixed,
    preset_state,
    random_density_matrix,
    to_bloch,
    zero_state,
)
from .confidence import (
    ConfidenceReport,
    ErrorBudget,
    c_alpha,
    closed_form_cl_k,
    cls_confidence_level,
    confidence_level,
    infidelity_preparation_bound,
    preparation_bound,
    required_samples,
)
from .estimators import EstimateRecord, cls_estimate, enm_estimate, estimate, lls_estimate
from .loss import LossKind, hs_distance, infidelity, linf_distance, trace_distance
from .measurement import (
    ExperimentDesign,
    FrequencyVector,
    Povm,
    born_probabilities,
    is_informationally_complete,
    pauli_design,
    pauli_loss_povm,
    sample,
)
from .validation import TrialBatchResult, coverage_sweep, run_batch

__all__ = [
    "__version__",
    "BACKEND",
    "GeneratorBasis",
    "from_bloch",
    "ghz_state",
    "is_physical",
    "make_basis",
    "maximally_mixed",
    "preset_state",
    "random_density_matrix",
    "to_bloch",
    "zero_state",
    "ConfidenceReport",
    "ErrorBudget",
    "c_alpha",
    "closed_form_cl_k",
    "cls_confidence_level",
    "confidence_level",
    "infidelity_preparation_bound",
    "preparation_bound",
    "required_samples",
    "EstimateRecord",
    "cls_estimate",
    "enm_estimate",
    "estimate",
    "lls_estimate",
    "LossKind",
    "hs_distance",
    "infidelity",
    "linf_distance",
    "trace_distance",
    "ExperimentDesign",
    "FrequencyVector",
    "Povm",
    "born_probabilities",
    "is_informationally_complete",
    "pauli_design",
    "pauli_loss_povm",
    "sample",
    "TrialBatchResult",
    "coverage_sweep",
    "run_batch",
]
