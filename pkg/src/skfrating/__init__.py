"""Kalman-filter style rating of players from pairwise game outcomes."""
from .engines import (
    Algorithm,
    Covariance,
    EngineConfig,
    RatingState,
    init,
    iterate,
    predict_proba,
    predict_z,
    reset_players,
    step,
)
from .models import ModelKind, ModelSpec, derivatives, log_likelihood, outcome_probabilities
from .schedule import DynamicsParams, GameBatch, GameRecord

__version__ = "0.1.0"

__all__ = [
    "Algorithm", "Covariance", "DynamicsParams", "EngineConfig", "GameBatch", "GameRecord",
    "ModelKind", "ModelSpec", "RatingState", "derivatives", "init", "iterate",
    "log_likelihood", "outcome_probabilities", "predict_proba", "predict_z",
    "reset_players", "step", "__version__",
]
