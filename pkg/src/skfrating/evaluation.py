"""Forecast scoring and frequency-based parameter estimates for league data."""
from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .engines import iterate
from .models import ModelSpec, log_likelihood

#: Forecast probabilities are clipped to [PROB_CLIP, 1 - PROB_CLIP] before logs.
PROB_CLIP = 1e-12


def log_score(model: ModelSpec, z_pred, y):
    """Negative natural log of the forecast probability of the realized outcome."""
    ll = np.asarray(log_likelihood(model, z_pred, y), dtype=float)
    ls = -np.clip(ll, math.log(PROB_CLIP), math.log1p(-PROB_CLIP))
    return ls[()] if ls.ndim == 0 else ls


@dataclass(frozen=True)
class OutcomeFrequencies:
    """Relative frequencies of each outcome symbol, indexed by symbol."""

    values: tuple[float, ...]

    def __post_init__(self):
        values = tuple(float(f) for f in self.values)
        if len(values) < 2:
            raise ValueError("need at least two outcome symbols")
        if any(f < 0 for f in values):
            raise ValueError("frequencies must be nonnegative")
        if abs(sum(values) - 1.0) > 1e-9:
            raise ValueError(f"frequencies must sum to 1, got {sum(values)}")
        object.__setattr__(self, "values", values)

    @classmethod
    def from_counts(cls, counts: Sequence[float]) -> "OutcomeFrequencies":
        total = float(sum(counts))
        if total <= 0:
            raise ValueError("no outcomes to count")
        return cls(tuple(c / total for c in counts))

    @classmethod
    def from_outcomes(cls, outcomes: Iterable[int], n_outcomes: int) -> "OutcomeFrequencies":
        counts = np.bincount(np.asarray(list(outcomes), dtype=int), minlength=n_outcomes)
        if len(counts) > n_outcomes:
            raise ValueError(f"outcome symbols exceed the alphabet of size {n_outcomes}")
        return cls.from_counts(counts)

    def __getitem__(self, y):
        return self.values[y]

    def __len__(self):
        return len(self.values)


def _as_freqs(freqs) -> OutcomeFrequencies:
    return freqs if isinstance(freqs, OutcomeFrequencies) else OutcomeFrequencies(tuple(freqs))


def entropy(freqs) -> float:
    """Entropy (nats) of the outcome frequencies; the constant-forecast log-score."""
    f = np.array(_as_freqs(freqs).values)
    nz = f[f > 0]
    return float(-(nz * np.log(nz)).sum())


def estimate_hfa_binary(freqs) -> float:
    """Home boost ``log10(f1 / f0)`` matching the observed home-win rate.

    Accepts frequencies or raw counts; only their ratio matters.
    """
    f0, f1 = (float(f) for f in freqs)
    if f0 <= 0 or f1 <= 0:
        raise ValueError("both outcomes must have been observed")
    return math.log10(f1 / f0)


def estimate_davidson_params(freqs) -> tuple[float, float]:
    """``(eta, kappa)`` with ``eta = log10(f2/f0)/2`` and ``kappa = f1/sqrt(f0 f2)``."""
    f0, f1, f2 = (float(f) for f in freqs)
    if f0 <= 0 or f2 <= 0 or f1 < 0:
        raise ValueError("home and away wins must both have been observed")
    return 0.5 * math.log10(f2 / f0), f1 / math.sqrt(f0 * f2)


@dataclass(frozen=True)
class ScoreWindows:
    ls_init: float
    ls_final: float
    t_init: int
    truncated: bool = False


def score_windows(scores: Sequence[float], M: int, T: int | None = None) -> ScoreWindows:
    """Mean score over the first ``4 M`` games and over the second half.

    The second half is games ``T//2 + 1 .. T`` (1-based). If the season is
    shorter than ``4 M`` the first window is cut to the whole season and
    ``truncated`` is set.
    """
    scores = np.asarray(scores, dtype=float)
    T = len(scores) if T is None else T
    if T != len(scores):
        raise ValueError(f"expected {T} scores, got {len(scores)}")
    if T < 2:
        raise ValueError("need at least two games")
    t_init = 4 * M
    truncated = t_init > T
    if truncated:
        warnings.warn(f"season of {T} games is shorter than the {t_init}-game initial window", stacklevel=2)
        t_init = T
    return ScoreWindows(float(scores[:t_init].mean()), float(scores[T // 2:].mean()), t_init, truncated)


def mean_windows(windows: Sequence[ScoreWindows]) -> tuple[float, float]:
    """Unweighted mean of per-season windows."""
    if not windows:
        raise ValueError("no seasons")
    return (float(np.mean([w.ls_init for w in windows])),
            float(np.mean([w.ls_final for w in windows])))


def constant_forecast_scores(outcomes: Sequence[int], freqs) -> np.ndarray:
    """Log-scores of forecasting every game with the fixed frequencies."""
    f = np.clip(np.array(_as_freqs(freqs).values), PROB_CLIP, 1.0)
    return -np.log(f[np.asarray(outcomes, dtype=int)])


def season_log_scores(config, games, M: int) -> np.ndarray:
    """Per-game log-scores of an engine run from its prior over one season."""
    return np.array([float(log_score(config.model, z, game.outcome))
                     for game, z, _ in iterate(config, games, M)])


def evaluate_seasons(config, seasons) -> tuple[float, float]:
    """Cross-season mean of the initial and final log-score windows.

    ``seasons`` are objects with ``games`` and ``M`` (e.g. ingested seasons).
    """
    windows = [score_windows(season_log_scores(config, s.games, s.M), s.M) for s in seasons]
    return mean_windows(windows)


REPORT_COLUMNS = ("league", "model", "algorithm", "params", "ls_init", "ls_final", "entropy")


def write_report(path, rows: Iterable[dict]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=REPORT_COLUMNS)
        writer.writeheader()
        for row in rows:
            writer.writerow(row)
