"""Skill assessment with noisy logical gates.

Models are bipartite: binary skill variables feed question gates that
behave as noisy AND/OR with optional leak.  Evidence on gate outputs
yields exact skill posteriors in closed form where the evidence
factorizes and by small joint enumeration where it does not, with an
exhaustive oracle for certification.
"""

from .errors import (
    ContractViolation,
    ImpossibleEventError,
    InconsistentEvidenceError,
    OracleSizeError,
    ParseError,
    SkillgateError,
    UnknownStudentError,
)
from .gates import (
    CptTable,
    ExplicitGateNetwork,
    construct_explicit_network,
    gate_success_prob,
    marginalize_explicit,
    materialize_cpt,
)
from .inference import (
    BRUTE_FORCE_SKILL_CAP,
    Observation,
    SkillPosterior,
    answer_marginal,
    brute_force_posteriors,
    evidence_probability,
    infer_posteriors,
    observations_from_answers,
    posterior_given_distinguished,
    posterior_given_non_distinguished,
    suggest_next_question,
)
from .model import (
    AssessmentModel,
    GateInput,
    GateKind,
    NoisyGate,
    SkillVariable,
    Violation,
    validate_model,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # model
    "AssessmentModel", "GateKind", "GateInput", "NoisyGate", "SkillVariable",
    "Violation", "validate_model",
    # gates
    "CptTable", "ExplicitGateNetwork", "construct_explicit_network",
    "gate_success_prob", "marginalize_explicit", "materialize_cpt",
    # inference
    "BRUTE_FORCE_SKILL_CAP", "Observation", "SkillPosterior",
    "answer_marginal", "brute_force_posteriors", "evidence_probability",
    "infer_posteriors", "observations_from_answers",
    "posterior_given_distinguished", "posterior_given_non_distinguished",
    "suggest_next_question",
    # errors
    "SkillgateError", "ContractViolation", "ImpossibleEventError",
    "InconsistentEvidenceError", "OracleSizeError", "ParseError",
    "UnknownStudentError",
]
