"""Synthetic seasons and Monte Carlo comparison of rating engines.

A season has ``M`` players and ``D`` days; every day the players are paired
by a uniformly random perfect matching (``M/2`` games). Skills follow a
damped Gaussian random walk from one day to the next, optionally with a
"switch" where the first few players are replaced by newcomers. Binary
outcomes are drawn from ``Phi(z / sigma)``.

Each replicate draws from its own counter-based stream derived from
``(seed, replicate)``, so any subset of replicates can be regenerated in
isolation and in parallel.
"""
from __future__ import annotations

import csv
import hashlib
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np
from scipy import special

from .engines import EngineConfig, init, predict_z, reset_players, step
from .evaluation import PROB_CLIP, log_score
from .models import ModelSpec, outcome_probabilities
from .schedule import GameBatch, GameRecord

#: Pseudo-engine forecasting with the true outcome probabilities.
ORACLE = "oracle"

METRICS = ("kl", "log_score")


@dataclass(frozen=True)
class SyntheticConfig:
    M: int = 20
    D: int = 100
    beta_hat: float = 0.998
    epsilon_hat: float | None = None
    sigma_obs: float = 1.0
    switch_day: int | None = None
    switch_count: int = 0
    replicates: int = 5000
    seed: int = 0

    def __post_init__(self):
        if self.M < 2 or self.M % 2:
            raise ValueError("M must be an even number >= 2")
        if self.D < 1:
            raise ValueError("D must be positive")
        if not 0 < self.beta_hat <= 1:
            raise ValueError("beta_hat must be in (0, 1]")
        if self.epsilon_hat is None:
            object.__setattr__(self, "epsilon_hat", 1.0 - self.beta_hat ** 2)
        if self.epsilon_hat < 0:
            raise ValueError("epsilon_hat must be nonnegative")
        if not self.sigma_obs > 0:
            raise ValueError("sigma_obs must be positive")
        if self.switch_day is not None:
            if not 0 < self.switch_day < self.D:
                raise ValueError("switch_day must fall inside the season")
            if not 0 < self.switch_count <= self.M:
                raise ValueError("switch_count must be in 1..M")
        if self.replicates < 1:
            raise ValueError("need at least one replicate")

    @property
    def games_per_day(self) -> int:
        return self.M // 2

    @property
    def T(self) -> int:
        return self.D * self.games_per_day

    @property
    def switch_game(self) -> int | None:
        """0-based index of the first game played with the switched players."""
        if self.switch_day is None:
            return None
        return self.switch_day * self.games_per_day


@dataclass(frozen=True)
class SyntheticSeason:
    """One simulated season; per-game arrays have length ``T``."""

    skills: np.ndarray      # (T, M) true skills at each game
    tau: np.ndarray         # (T,) day stamps
    home: np.ndarray        # (T,) home player
    away: np.ndarray        # (T,) away player
    outcome: np.ndarray     # (T,) 1 = home win
    true_probs: np.ndarray  # (T,) probability of a home win

    @property
    def T(self) -> int:
        return len(self.tau)

    @property
    def games(self) -> list[GameRecord]:
        return [
            GameRecord(t + 1, int(self.tau[t]), (int(self.home[t]),), (int(self.away[t]),),
                       int(self.outcome[t]))
            for t in range(self.T)
        ]

    def checksum(self) -> str:
        h = hashlib.sha256()
        for a in (self.tau, self.home, self.away, self.outcome):
            h.update(np.ascontiguousarray(a, dtype=np.int64).tobytes())
        return h.hexdigest()


def replicate_rng(seed: int, replicate: int) -> np.random.Generator:
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=(int(replicate),))
    return np.random.Generator(np.random.Philox(ss))


def generate_season(config: SyntheticConfig, seed: int | None = None, replicate: int = 0) -> SyntheticSeason:
    seed = config.seed if seed is None else seed
    rng = replicate_rng(seed, replicate)
    M, D, J = config.M, config.D, config.games_per_day

    theta0 = rng.standard_normal(M)
    noise = rng.standard_normal((D, M))
    fresh = rng.standard_normal(config.switch_count) if config.switch_day is not None else None
    keys = rng.random((D, M))
    uniforms = rng.random(D * J)

    day_skills = np.empty((D, M))
    day_skills[0] = theta0
    sd = np.sqrt(config.epsilon_hat)
    for d in range(1, D):
        day_skills[d] = config.beta_hat * day_skills[d - 1] + sd * noise[d]
        if d == config.switch_day:
            day_skills[d, :config.switch_count] = fresh

    perm = np.argsort(keys, axis=1, kind="stable")
    home = perm[:, 0::2].ravel()
    away = perm[:, 1::2].ravel()
    tau = np.repeat(np.arange(D), J)
    skills = day_skills[tau]
    diff = skills[np.arange(D * J), home] - skills[np.arange(D * J), away]
    p = special.ndtr(diff / config.sigma_obs)
    y = (uniforms < p).astype(np.int64)
    return SyntheticSeason(skills, tau, home, away, y, p)


def kl_metric(p_true, model: ModelSpec, z_pred):
    """KL divergence from the true binary outcome law to the forecast one."""
    if model.n_outcomes != 2:
        raise ValueError("the KL metric is defined for binary models")
    p = np.asarray(p_true, dtype=float)
    if np.any((p <= 0) | (p >= 1)):
        raise ValueError("true probability must lie strictly inside (0, 1)")
    q = np.clip(outcome_probabilities(model, z_pred)[..., 1], PROB_CLIP, 1 - PROB_CLIP)
    d = p * np.log(p / q) + (1 - p) * np.log((1 - p) / (1 - q))
    d = np.maximum(d, 0.0)
    return d[()] if d.ndim == 0 else d


@dataclass
class MetricSeries:
    """Per-day statistics of a per-game metric pooled over replicates."""

    day: np.ndarray
    mean: np.ndarray
    median: np.ndarray
    q3: np.ndarray
    n: np.ndarray

    COLUMNS = ("day", "mean", "median", "q3", "n")

    @classmethod
    def from_per_game(cls, values: np.ndarray, games_per_day: int) -> "MetricSeries":
        R, T = values.shape
        D = T // games_per_day
        per_day = values[:, :D * games_per_day].reshape(R, D, games_per_day)
        pooled = per_day.transpose(1, 0, 2).reshape(D, R * games_per_day)
        return cls(
            day=np.arange(1, D + 1),
            mean=pooled.mean(axis=1),
            median=np.median(pooled, axis=1),
            q3=np.percentile(pooled, 75, axis=1),
            n=np.full(D, R * games_per_day),
        )

    def to_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(self.COLUMNS)
            for d, m, med, q, n in zip(self.day, self.mean, self.median, self.q3, self.n):
                writer.writerow((int(d), repr(float(m)), repr(float(med)), repr(float(q)), int(n)))


@dataclass
class ExperimentResult:
    series: dict[str, MetricSeries]
    checksums: list[str]
    stream_checksums: dict[str, list[str]] = field(default_factory=dict)
    per_game: dict[str, np.ndarray] | None = None


def _stream_digest(tau, home, away, outcome, r) -> str:
    h = hashlib.sha256()
    for a in (tau, home[r], away[r], outcome[r]):
        h.update(np.ascontiguousarray(a, dtype=np.int64).tobytes())
    return h.hexdigest()


def _run_chunk(config: SyntheticConfig, engines: Sequence[tuple[str, object]], metric: str,
               seed: int, replicates: Sequence[int]):
    seasons = [generate_season(config, seed, r) for r in replicates]
    R, T = len(seasons), config.T
    tau = seasons[0].tau
    home = np.stack([s.home for s in seasons])
    away = np.stack([s.away for s in seasons])
    y = np.stack([s.outcome for s in seasons])
    p = np.stack([s.true_probs for s in seasons])
    checksums = [s.checksum() for s in seasons]

    out, streams = {}, {}
    for label, cfg in engines:
        values = np.empty((R, T))
        streams[label] = [_stream_digest(tau, home, away, y, r) for r in range(R)]
        if cfg == ORACLE:
            if metric == "kl":
                values[:] = 0.0
            else:
                values[:] = -np.log(np.clip(np.where(y == 1, p, 1 - p), PROB_CLIP, 1.0))
            out[label] = values
            continue
        state = init(cfg, config.M, replicates=R)
        for t in range(T):
            if t == config.switch_game:
                state = reset_players(state, range(config.switch_count), cfg)
            game = GameBatch(np.full(R, tau[t]), home[:, t:t + 1], away[:, t:t + 1], y[:, t])
            z = predict_z(state, game, cfg)
            if metric == "kl":
                values[:, t] = kl_metric(p[:, t], cfg.model, z)
            else:
                values[:, t] = log_score(cfg.model, z, y[:, t])
            state = step(state, game, cfg)
        out[label] = values
    return out, checksums, streams


def run_experiment(config: SyntheticConfig, engines: Mapping[str, EngineConfig | str],
                   metric: str = "kl", seed: int | None = None, workers: int | None = None,
                   chunk_size: int = 500, keep_per_game: bool = False) -> ExperimentResult:
    """Run every engine over the same simulated seasons and aggregate per day.

    ``engines`` maps a label to an :class:`EngineConfig` (or :data:`ORACLE`).
    All engines see the identical game stream of each replicate. Replicates
    are processed in chunks, optionally across ``workers`` processes; the
    result does not depend on either setting.
    """
    if metric not in METRICS:
        raise ValueError(f"metric must be one of {METRICS}")
    if not engines:
        raise ValueError("no engines to run")
    seed = config.seed if seed is None else seed
    items = list(engines.items())
    for label, cfg in items:
        if cfg != ORACLE and not isinstance(cfg, EngineConfig):
            raise TypeError(f"engine {label!r} is not an EngineConfig")
        if cfg != ORACLE and cfg.model.n_outcomes != 2:
            raise ValueError(f"engine {label!r}: synthetic games are binary")
    reps = np.arange(config.replicates)
    chunks = [reps[i:i + chunk_size] for i in range(0, len(reps), chunk_size)]
    if workers is None:
        workers = int(os.environ.get("SKFRATING_WORKERS", "1"))
    if workers > 1 and len(chunks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_run_chunk, [config] * len(chunks), [items] * len(chunks),
                                  [metric] * len(chunks), [seed] * len(chunks), chunks))
    else:
        parts = [_run_chunk(config, items, metric, seed, c) for c in chunks]

    per_game = {label: np.concatenate([part[0][label] for part in parts]) for label, _ in items}
    checksums = [c for part in parts for c in part[1]]
    streams = {label: [c for part in parts for c in part[2][label]] for label, _ in items}
    series = {label: MetricSeries.from_per_game(v, config.games_per_day) for label, v in per_game.items()}
    return ExperimentResult(series, checksums, streams, per_game if keep_per_game else None)
