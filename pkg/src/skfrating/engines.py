"""Online rating engines.

Every engine consumes a posterior summary (means plus a covariance
representation) and one game, and returns the next posterior summary:

========== ==================================================
kf         full covariance matrix
vskf       per-player variances (diagonal covariance)
sskf       one variance shared by all players
fskf       fixed, known variance; only means move
sg         stochastic gradient on the means
trueskill  diagonal covariance, TrueSkill's two-player rule
glicko     diagonal covariance, Glicko's two-player rule
elo        means only; classic ``K * (score - expected)`` rule
========== ==================================================

All engines linearize the log-likelihood once around the predicted means
``beta_t * mu_{t-1}`` (a single Newton step, no inner iteration).

States may carry a leading replicate axis: a state with ``mu`` of shape
``(R, M)`` is stepped with a :class:`~skfrating.schedule.GameBatch` holding
one game per replicate. A plain :class:`~skfrating.schedule.GameRecord`
steps an unbatched state with ``mu`` of shape ``(M,)``.
"""
from __future__ import annotations

import csv
import dataclasses
import enum
import math
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

import numpy as np
from scipy import special

from .models import LN10, ModelKind, ModelSpec, derivatives, logistic10, outcome_probabilities
from .schedule import DynamicsParams, GameBatch, GameRecord, step_coefficients

#: Variance ratio matching the base-10 logistic to a unit Gaussian.
GLICKO_A = 3.0 * LN10 ** 2 / math.pi ** 2

_DEN_FLOOR = 1e-12


class Algorithm(str, enum.Enum):
    KF = "kf"
    VSKF = "vskf"
    SSKF = "sskf"
    FSKF = "fskf"
    SG = "sg"
    TRUESKILL = "trueskill"
    GLICKO = "glicko"
    ELO = "elo"


class Covariance(str, enum.Enum):
    MATRIX = "matrix"
    VECTOR = "vector"
    SCALAR = "scalar"
    FIXED = "fixed"
    NONE = "none"


COVARIANCE_OF = {
    Algorithm.KF: Covariance.MATRIX,
    Algorithm.VSKF: Covariance.VECTOR,
    Algorithm.TRUESKILL: Covariance.VECTOR,
    Algorithm.GLICKO: Covariance.VECTOR,
    Algorithm.SSKF: Covariance.SCALAR,
    Algorithm.FSKF: Covariance.FIXED,
    Algorithm.SG: Covariance.NONE,
    Algorithm.ELO: Covariance.NONE,
}

_REQUIRED = {
    Algorithm.KF: {"v0"},
    Algorithm.VSKF: {"v0"},
    Algorithm.SSKF: {"v0"},
    Algorithm.FSKF: {"v_bar"},
    Algorithm.SG: {"step_K"},
    Algorithm.ELO: {"step_K"},
    Algorithm.TRUESKILL: {"v0", "sigma"},
    Algorithm.GLICKO: {"v0", "sigma"},
}
_HYPER = ("v0", "v_bar", "step_K", "sigma")


@dataclass(frozen=True)
class EngineConfig:
    """Algorithm choice plus the hyperparameters it needs, and nothing else.

    TrueSkill and Glicko use ``sigma`` as their scale; ``model.scale`` is not
    consulted by them.
    """

    algorithm: Algorithm
    model: ModelSpec = ModelSpec()
    dynamics: DynamicsParams = DynamicsParams()
    v0: float | None = None
    v_bar: float | None = None
    step_K: float | None = None
    sigma: float | None = None

    def __post_init__(self):
        alg = Algorithm(self.algorithm)
        object.__setattr__(self, "algorithm", alg)
        need = _REQUIRED[alg]
        for name in _HYPER:
            value = getattr(self, name)
            if name in need:
                if value is None:
                    raise ValueError(f"{alg.value} requires {name}")
                if not value > 0:
                    raise ValueError(f"{name} must be positive, got {value}")
            elif value is not None:
                raise ValueError(f"{name} is not used by {alg.value}")
        kind = self.model.kind
        if alg is Algorithm.TRUESKILL and kind is not ModelKind.THURSTON:
            raise ValueError("TrueSkill requires the Thurston model")
        if alg is Algorithm.GLICKO and kind is not ModelKind.BRADLEY_TERRY:
            raise ValueError("Glicko requires the Bradley-Terry model")
        if alg is Algorithm.ELO and kind not in (ModelKind.BRADLEY_TERRY, ModelKind.ORIGINAL_ELO):
            raise ValueError("Elo requires the Bradley-Terry or original-Elo model")
        if kind is ModelKind.ORIGINAL_ELO and alg not in (Algorithm.SG, Algorithm.ELO):
            raise ValueError("the original-Elo model has no likelihood curvature; use sg or elo")

    @property
    def scale(self) -> float:
        if self.algorithm in (Algorithm.TRUESKILL, Algorithm.GLICKO):
            return self.sigma
        return self.model.scale

    @property
    def covariance(self) -> Covariance:
        return COVARIANCE_OF[self.algorithm]

    def hyperparameters(self) -> dict:
        out = {name: getattr(self, name) for name in _HYPER if getattr(self, name) is not None}
        out["beta"] = self.dynamics.beta
        out["epsilon"] = self.dynamics.epsilon
        return out


@dataclass(frozen=True)
class RatingState:
    """Posterior summary after ``t`` games.

    ``cov`` holds, by representation: an (..., M, M) matrix, an (..., M)
    variance vector, an (...) shared variance, an (...) fixed variance, or
    ``None`` for mean-only engines. ``tau`` is the day stamp of the last
    processed game.
    """

    algorithm: Algorithm
    mu: np.ndarray
    cov: np.ndarray | None
    tau: np.ndarray
    t: int = 0

    @property
    def M(self) -> int:
        return self.mu.shape[-1]

    @property
    def batched(self) -> bool:
        return self.mu.ndim == 2

    @property
    def representation(self) -> Covariance:
        return COVARIANCE_OF[self.algorithm]

    def variances(self) -> np.ndarray | None:
        """Per-player posterior variances, or ``None`` for mean-only engines."""
        rep = self.representation
        if rep is Covariance.MATRIX:
            return np.diagonal(self.cov, axis1=-2, axis2=-1).copy()
        if rep is Covariance.VECTOR:
            return self.cov.copy()
        if rep in (Covariance.SCALAR, Covariance.FIXED):
            return np.repeat(np.asarray(self.cov)[..., None], self.M, axis=-1)
        return None


def init(config: EngineConfig, M: int, replicates: int | None = None, tau0: int = 0) -> RatingState:
    """Prior state: zero means and ``v0`` variances (``v_bar`` for fskf)."""
    if M < 2:
        raise ValueError("need at least two players")
    batch = () if replicates is None else (int(replicates),)
    mu = np.zeros(batch + (M,))
    rep = config.covariance
    if rep is Covariance.MATRIX:
        cov = np.broadcast_to(config.v0 * np.eye(M), batch + (M, M)).copy()
    elif rep is Covariance.VECTOR:
        cov = np.full(batch + (M,), float(config.v0))
    elif rep is Covariance.SCALAR:
        cov = np.full(batch, float(config.v0))
    elif rep is Covariance.FIXED:
        cov = np.full(batch, float(config.v_bar))
    else:
        cov = None
    return RatingState(config.algorithm, mu, cov, np.full(batch, tau0), 0)


# --- batched kernels ----------------------------------------------------------
# Each kernel takes (R, M) means, the covariance with the same leading axis,
# a GameBatch of length R and per-replicate (beta_t, eps_t); returns (mu, cov).

def _gather(a, idx):
    return np.take_along_axis(a, idx, axis=1)


def _raw_difference(mu, game: GameBatch):
    return _gather(mu, game.home).sum(axis=1) - _gather(mu, game.away).sum(axis=1)


def _signed_add(mu, game: GameBatch, home_delta, away_delta):
    rows = np.arange(mu.shape[0])[:, None]
    mu[rows, game.home] += home_delta
    mu[rows, game.away] -= away_delta


def _model_derivs(config: EngineConfig, mu, game, beta_t):
    z = config.model.argument(beta_t * _raw_difference(mu, game))
    d = derivatives(config.model, z, game.outcome)
    return np.asarray(d.gradient), np.asarray(d.hessian_neg)


def _denominator(s, h, omega):
    return np.maximum(s * s + h * omega, s * s * _DEN_FLOOR)


def _balanced_size(game: GameBatch, alg: Algorithm) -> int:
    fh, fa = game.group_sizes
    if fh != fa:
        raise ValueError(f"{alg.value} needs equal group sizes, got {fh} vs {fa}")
    return fh


def _kf(mu, V, game, beta_t, eps_t, config):
    s = config.scale
    M = mu.shape[1]
    Vbar = beta_t[:, None, None] ** 2 * V
    Vbar += eps_t[:, None, None] * np.eye(M)
    rows = np.arange(mu.shape[0])[:, None]
    # V symmetric: columns of the involved players give Vbar @ x
    Vx = Vbar[rows, :, game.home].sum(axis=1) - Vbar[rows, :, game.away].sum(axis=1)
    omega = _gather(Vx, game.home).sum(axis=1) - _gather(Vx, game.away).sum(axis=1)
    g, h = _model_derivs(config, mu, game, beta_t)
    den = _denominator(s, h, omega)
    mu_new = beta_t[:, None] * mu + Vx * (s * g / den)[:, None]
    V_new = Vbar - Vx[:, :, None] * Vx[:, None, :] * (h / den)[:, None, None]
    return mu_new, V_new


def _vskf(mu, v, game, beta_t, eps_t, config):
    s = config.scale
    vbar = beta_t[:, None] ** 2 * v + eps_t[:, None]
    vh, va = _gather(vbar, game.home), _gather(vbar, game.away)
    omega = vh.sum(axis=1) + va.sum(axis=1)
    g, h = _model_derivs(config, mu, game, beta_t)
    den = _denominator(s, h, omega)
    step = (s * g / den)[:, None]
    shrink = (h / den)[:, None]
    mu_new = beta_t[:, None] * mu
    _signed_add(mu_new, game, vh * step, va * step)
    rows = np.arange(mu.shape[0])[:, None]
    vbar[rows, game.home] = vh * (1.0 - vh * shrink)
    vbar[rows, game.away] = va * (1.0 - va * shrink)
    return mu_new, vbar


def _sskf(mu, v, game, beta_t, eps_t, config):
    s = config.scale
    M = mu.shape[1]
    F = _balanced_size(game, Algorithm.SSKF)
    vbar = beta_t ** 2 * v + eps_t
    omega = 2 * F * vbar
    g, h = _model_derivs(config, mu, game, beta_t)
    den = _denominator(s, h, omega)
    step = (vbar * s * g / den)[:, None]
    mu_new = beta_t[:, None] * mu
    _signed_add(mu_new, game, step, step)
    v_new = vbar * (1.0 - omega / M * h / den)
    return mu_new, v_new


def _fskf(mu, vfix, game, beta_t, eps_t, config):
    s = config.scale
    F = _balanced_size(game, Algorithm.FSKF)
    g, h = _model_derivs(config, mu, game, beta_t)
    den = _denominator(s, h, 2 * F * vfix)
    step = (vfix * s * g / den)[:, None]
    mu_new = beta_t[:, None] * mu
    _signed_add(mu_new, game, step, step)
    return mu_new, vfix


def _sg(mu, _, game, beta_t, eps_t, config):
    g, _h = _model_derivs(config, mu, game, beta_t)
    step = (config.step_K * config.scale * g)[:, None]
    mu_new = beta_t[:, None] * mu
    _signed_add(mu_new, game, step, step)
    return mu_new, None


def _elo(mu, _, game, beta_t, eps_t, config):
    z = config.model.argument(beta_t * _raw_difference(mu, game))
    if config.model.kind is ModelKind.ORIGINAL_ELO:
        expected = special.ndtr(z)
    else:
        expected = logistic10(z)
    residual = game.outcome - expected
    step = (config.step_K * config.scale * residual)[:, None]
    mu_new = beta_t[:, None] * mu
    _signed_add(mu_new, game, step, step)
    return mu_new, None


def _trueskill(mu, v, game, beta_t, eps_t, config):
    sigma = config.sigma
    vbar = beta_t[:, None] ** 2 * v + eps_t[:, None]
    vh, va = _gather(vbar, game.home), _gather(vbar, game.away)
    omega = vh.sum(axis=1) + va.sum(axis=1)
    root = np.sqrt(1.0 + omega / sigma ** 2)
    sigma_t = sigma * root
    z = beta_t * _raw_difference(mu, game) / sigma_t + config.model.hfa
    d = derivatives(config.model, z, game.outcome)
    g, h = np.asarray(d.gradient), np.asarray(d.hessian_neg)
    step = (g * sigma / (sigma ** 2 * root))[:, None]
    shrink = (h / (sigma ** 2 + omega))[:, None]
    mu_new = beta_t[:, None] * mu
    _signed_add(mu_new, game, vh * step, va * step)
    rows = np.arange(mu.shape[0])[:, None]
    vbar[rows, game.home] = vh * (1.0 - vh * shrink)
    vbar[rows, game.away] = va * (1.0 - va * shrink)
    return mu_new, vbar


def _glicko_r(v, sigma):
    return np.sqrt(1.0 + v * GLICKO_A / sigma ** 2)


def _glicko(mu, v, game, beta_t, eps_t, config):
    if game.group_sizes != (1, 1):
        raise ValueError("Glicko is defined for two-player games only")
    sigma = config.sigma
    vbar = beta_t[:, None] ** 2 * v + eps_t[:, None]
    i, j = game.home[:, 0], game.away[:, 0]
    rows = np.arange(mu.shape[0])
    vi, vj = vbar[rows, i], vbar[rows, j]
    omega = vi + vj
    zraw = beta_t * _raw_difference(mu, game)
    mu_new = beta_t[:, None] * mu
    for idx, v_m, sign in ((i, vi, 1.0), (j, vj, -1.0)):
        sigma_m = sigma * _glicko_r(omega - v_m, sigma)
        d = derivatives(config.model, zraw / sigma_m + config.model.hfa, game.outcome)
        g, h = np.asarray(d.gradient), np.asarray(d.hessian_neg)
        den = sigma_m ** 2 + v_m * h
        mu_new[rows, idx] += sign * v_m * sigma_m * g / den
        vbar[rows, idx] = v_m * sigma_m ** 2 / den
    return mu_new, vbar


_KERNELS = {
    Algorithm.KF: _kf,
    Algorithm.VSKF: _vskf,
    Algorithm.SSKF: _sskf,
    Algorithm.FSKF: _fskf,
    Algorithm.SG: _sg,
    Algorithm.ELO: _elo,
    Algorithm.TRUESKILL: _trueskill,
    Algorithm.GLICKO: _glicko,
}


# --- public stepping API ------------------------------------------------------

def _as_batch(state: RatingState, game) -> GameBatch:
    if isinstance(game, GameRecord):
        if state.batched:
            raise ValueError("a batched state needs a GameBatch")
        batch = GameBatch.from_record(game)
    else:
        batch = game
        if not state.batched or len(batch) != state.mu.shape[0]:
            raise ValueError("GameBatch length must match the state's replicate axis")
    M = state.M
    for idx in (batch.home, batch.away):
        if idx.size and (idx.min() < 0 or idx.max() >= M):
            raise ValueError(f"player index out of range for M={M}")
    return batch


def _lift(state: RatingState):
    if state.batched:
        cov = None if state.cov is None else state.cov
        return state.mu, cov, np.asarray(state.tau)
    cov = None if state.cov is None else np.asarray(state.cov)[None]
    return state.mu[None], cov, np.asarray(state.tau)[None]


def _lower(state: RatingState, mu, cov, tau):
    if not state.batched:
        mu = mu[0]
        cov = None if cov is None else cov[0]
        tau = tau[0]
    return RatingState(state.algorithm, mu, cov, np.asarray(tau), state.t + 1)


def step(state: RatingState, game: GameRecord | GameBatch, config: EngineConfig) -> RatingState:
    """Absorb one game (or one game per replicate) and return the new state."""
    if state.algorithm is not config.algorithm:
        raise ValueError(f"state is {state.algorithm.value}, config is {config.algorithm.value}")
    batch = _as_batch(state, game)
    mu, cov, tau = _lift(state)
    beta_t, eps_t = step_coefficients(config.dynamics, batch.tau, tau)
    if cov is not None and config.covariance is not Covariance.FIXED:
        cov = cov.copy()
    mu_new, cov_new = _KERNELS[config.algorithm](mu, cov, batch, beta_t, eps_t, config)
    return _lower(state, mu_new, cov_new, batch.tau)


def _stepper(algorithm: Algorithm):
    def run(state, game, config):
        if config.algorithm is not algorithm:
            raise ValueError(f"expected a {algorithm.value} config")
        return step(state, game, config)

    run.__name__ = f"{algorithm.value}_step"
    run.__doc__ = f"One {algorithm.value} update; see :func:`step`."
    return run


kf_step = _stepper(Algorithm.KF)
vskf_step = _stepper(Algorithm.VSKF)
sskf_step = _stepper(Algorithm.SSKF)
fskf_step = _stepper(Algorithm.FSKF)
sg_step = _stepper(Algorithm.SG)
elo_step = _stepper(Algorithm.ELO)
trueskill_step = _stepper(Algorithm.TRUESKILL)
glicko_step = _stepper(Algorithm.GLICKO)


def predict_z(state: RatingState, game: GameRecord | GameBatch, config: EngineConfig):
    """Model argument used to forecast ``game`` before it is played.

    This is ``beta_t * (home sum - away sum) / scale + hfa`` evaluated on the
    current means.
    """
    batch = _as_batch(state, game)
    mu, _, tau = _lift(state)
    beta_t, _ = step_coefficients(config.dynamics, batch.tau, tau)
    z = beta_t * _raw_difference(mu, batch) / config.scale + config.model.hfa
    return z if state.batched else float(z[0])


def predict_proba(state: RatingState, game: GameRecord | GameBatch, config: EngineConfig):
    """Forecast probabilities of every outcome symbol (last axis)."""
    return outcome_probabilities(config.model, predict_z(state, game, config))


def reset_players(state: RatingState, player_ids: Iterable[int], config: EngineConfig) -> RatingState:
    """Replace players with fresh, unknown-skill newcomers.

    Means go to zero; matrix and vector representations put ``v0`` back on
    the players (the matrix also loses their covariances); the shared scalar
    variance is blended towards ``v0`` by the fraction of players replaced.
    """
    ids = np.array(sorted(set(int(i) for i in player_ids)), dtype=np.intp)
    if ids.size and (ids.min() < 0 or ids.max() >= state.M):
        raise ValueError(f"player ids out of range for M={state.M}")
    mu = state.mu.copy()
    mu[..., ids] = 0.0
    cov = state.cov
    rep = state.representation
    if rep is Covariance.MATRIX:
        cov = cov.copy()
        cov[..., ids, :] = 0.0
        cov[..., :, ids] = 0.0
        cov[..., ids, ids] = config.v0
    elif rep is Covariance.VECTOR:
        cov = cov.copy()
        cov[..., ids] = config.v0
    elif rep is Covariance.SCALAR:
        cov = cov + (config.v0 - cov) * ids.size / state.M
    return dataclasses.replace(state, mu=mu, cov=cov)


def iterate(config: EngineConfig, games: Sequence[GameRecord], M: int,
            state: RatingState | None = None) -> Iterator[tuple[GameRecord, float, RatingState]]:
    """Run an engine over a game sequence.

    Yields ``(game, z_pred, state_after)`` where ``z_pred`` is the forecast
    argument computed before the game was absorbed.
    """
    if state is None:
        tau0 = games[0].tau if len(games) else 0
        state = init(config, M, tau0=tau0)
    for game in games:
        z = predict_z(state, game, config)
        state = step(state, game, config)
        yield game, z, state


# --- snapshot export ----------------------------------------------------------

SNAPSHOT_COLUMNS = ("t", "tau", "player_id", "mu", "variance")


def snapshot_rows(state: RatingState) -> list[tuple]:
    """Rows ``(t, tau, player_id, mu, variance)``; variance is blank for mean-only engines."""
    if state.batched:
        raise ValueError("snapshots are exported for a single rating sequence")
    var = state.variances()
    tau = int(state.tau)
    return [
        (state.t, tau, m, repr(float(state.mu[m])), "" if var is None else repr(float(var[m])))
        for m in range(state.M)
    ]


def write_snapshots(path, states: Iterable[RatingState]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(SNAPSHOT_COLUMNS)
        for state in states:
            writer.writerows(snapshot_rows(state))


def write_covariance(path, state: RatingState) -> None:
    """Dense covariance matrix for kf; ``player_id, variance`` rows otherwise."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        if state.representation is Covariance.MATRIX:
            writer.writerow([f"p{m}" for m in range(state.M)])
            for row in state.cov:
                writer.writerow([repr(float(x)) for x in row])
            return
        var = state.variances()
        if var is None:
            raise ValueError(f"{state.algorithm.value} keeps no variances")
        writer.writerow(("player_id", "variance"))
        for m, value in enumerate(var):
            writer.writerow((m, repr(float(value))))
