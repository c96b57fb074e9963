"""Games, scheduling vectors and the time-dependent dynamics coefficients."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np


@dataclass(frozen=True)
class GameRecord:
    """One game between two disjoint groups of players (0-based indices).

    ``tau`` is the day stamp; ``outcome`` is the ordinal result from the
    home side's point of view (0 = away win; top symbol = home win).
    """

    t: int
    tau: int
    home: tuple[int, ...]
    away: tuple[int, ...]
    outcome: int

    def __post_init__(self):
        object.__setattr__(self, "home", tuple(int(i) for i in self.home))
        object.__setattr__(self, "away", tuple(int(i) for i in self.away))
        if not self.home or not self.away:
            raise ValueError("both home and away groups must be nonempty")
        if set(self.home) & set(self.away):
            raise ValueError(f"home {self.home} and away {self.away} overlap")
        if len(set(self.home)) != len(self.home) or len(set(self.away)) != len(self.away):
            raise ValueError("a player appears twice in the same group")
        if self.tau < 0:
            raise ValueError("tau must be nonnegative")

    @property
    def players(self) -> tuple[int, ...]:
        return self.home + self.away


@dataclass(frozen=True)
class GameBatch:
    """One game per replicate, all with the same group sizes.

    Arrays have a leading replicate axis of length R: ``home`` is (R, Fh),
    ``away`` is (R, Fa), ``outcome`` and ``tau`` are (R,).
    """

    tau: np.ndarray
    home: np.ndarray
    away: np.ndarray
    outcome: np.ndarray

    @classmethod
    def from_record(cls, game: GameRecord) -> "GameBatch":
        return cls(
            tau=np.array([game.tau]),
            home=np.array([game.home], dtype=np.intp),
            away=np.array([game.away], dtype=np.intp),
            outcome=np.array([game.outcome]),
        )

    @classmethod
    def from_records(cls, games: Sequence[GameRecord]) -> "GameBatch":
        return cls(
            tau=np.array([g.tau for g in games]),
            home=np.array([g.home for g in games], dtype=np.intp),
            away=np.array([g.away for g in games], dtype=np.intp),
            outcome=np.array([g.outcome for g in games]),
        )

    def __len__(self):
        return len(self.outcome)

    @property
    def group_sizes(self) -> tuple[int, int]:
        return self.home.shape[1], self.away.shape[1]


@dataclass(frozen=True)
class ScheduleVector:
    """Sparse combined scheduling vector: +1 on home players, -1 on away."""

    home: tuple[int, ...]
    away: tuple[int, ...]
    size: int

    def dense(self) -> np.ndarray:
        x = np.zeros(self.size)
        x[list(self.home)] = 1.0
        x[list(self.away)] = -1.0
        return x

    def items(self) -> Iterable[tuple[int, float]]:
        for i in self.home:
            yield i, 1.0
        for j in self.away:
            yield j, -1.0


def make_schedule_vector(home: Iterable[int], away: Iterable[int], M: int) -> ScheduleVector:
    home, away = tuple(int(i) for i in home), tuple(int(j) for j in away)
    if not home or not away:
        raise ValueError("home and away groups must be nonempty")
    if set(home) & set(away):
        raise ValueError(f"home {home} and away {away} overlap")
    bad = [i for i in home + away if not 0 <= i < M]
    if bad:
        raise ValueError(f"player indices {bad} out of range for M={M}")
    return ScheduleVector(home, away, M)


def skill_difference(x: ScheduleVector, mu) -> float:
    """Sum of home means minus sum of away means."""
    return float(sum(mu[i] for i in x.home) - sum(mu[j] for j in x.away))


@dataclass(frozen=True)
class DynamicsParams:
    """Per-day skill damping ``beta`` and per-day variance increase ``epsilon``."""

    beta: float = 1.0
    epsilon: float = 0.0

    def __post_init__(self):
        if not 0 < self.beta <= 1:
            raise ValueError(f"beta must be in (0, 1], got {self.beta}")
        if not self.epsilon >= 0:
            raise ValueError(f"epsilon must be nonnegative, got {self.epsilon}")


def step_coefficients(params: DynamicsParams, tau_now, tau_prev):
    """``(beta**dtau, dtau * epsilon)`` for the gap between two games.

    Works elementwise on arrays of day stamps.
    """
    dtau = np.asarray(tau_now) - np.asarray(tau_prev)
    if np.any(dtau < 0):
        raise ValueError("day stamps must be nondecreasing")
    dtau = dtau.astype(float)
    beta_t = np.power(params.beta, dtau)
    eps_t = dtau * params.epsilon
    if beta_t.ndim == 0:
        return float(beta_t), float(eps_t)
    return beta_t, eps_t
