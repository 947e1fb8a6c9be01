"""Classical and quantum correlation measures of two-qubit states."""

from .bures import BELL_NORMALIZATION, bures_gqd, cq_state, max_cq_fidelity
from .discord import classical_correlation, information_gain, quantum_discord
from .entanglement import geometric_entanglement, is_ppt, partial_transpose, ree
from .entropy import mutual_information, partial_trace, von_neumann_entropy
from .fidelity import uhlmann_fidelity
from .result import MeasureResult
from .suite import MEASURES, CorrelationSuite, evaluate_suite

__all__ = [
    "BELL_NORMALIZATION", "CorrelationSuite", "MEASURES", "MeasureResult",
    "bures_gqd", "classical_correlation", "cq_state", "evaluate_suite",
    "geometric_entanglement", "information_gain", "is_ppt", "max_cq_fidelity",
    "mutual_information", "partial_trace", "partial_transpose", "quantum_discord",
    "ree", "uhlmann_fidelity", "von_neumann_entropy",
]
