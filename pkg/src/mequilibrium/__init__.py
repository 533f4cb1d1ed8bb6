"""M-equilibrium sets, mu-equilibria and reference solutions for normal-form games."""
from .errors import (CapabilityError, ContinuationError, DomainError, FormatError,
                     MEquilibriumError, ShapeError, ValidationError)
from .game import (CorrespondenceValue, Game, best_response, expected_payoffs, mu_generator,
                   rank, rank_assignment_of, rank_mu)
from .numeric import EPS_TIE
from .msets import (MEquilibrium, RankAssignment, behavioral_stability, enumerate_m_equilibria,
                    membership)
from .mu import MuEquilibrium, mu_equilibria, sweep_correspondence, verify_meta_inclusion
from .nash import all_nash_points, beaune
from .qre import logit_dominated_bound_check, logit_qre_trace, luce_amp_closed_form
from .elicitation import simulate_mechanism, verify_incentive_compatibility, win_probability
from .analysis import (Observation, best_response_rate, classify_into_sets, elbow, ingest,
                       kmeans)
from . import fixtures

__version__ = "0.1.0"

__all__ = [
    "CapabilityError", "ContinuationError", "DomainError", "FormatError", "MEquilibriumError",
    "ShapeError", "ValidationError", "CorrespondenceValue", "Game", "best_response",
    "expected_payoffs", "mu_generator", "rank", "rank_assignment_of", "rank_mu", "EPS_TIE",
    "MEquilibrium", "RankAssignment", "behavioral_stability", "enumerate_m_equilibria",
    "membership", "MuEquilibrium", "mu_equilibria", "sweep_correspondence",
    "verify_meta_inclusion", "all_nash_points", "beaune", "logit_dominated_bound_check",
    "logit_qre_trace", "luce_amp_closed_form", "simulate_mechanism",
    "verify_incentive_compatibility", "win_probability", "Observation", "best_response_rate",
    "classify_into_sets", "elbow", "ingest", "kmeans", "fixtures",
]
