"""Skills-outcome models.

Each model maps the (scaled, home-boosted) skill difference ``z`` to a
probability over an ordinal outcome alphabet and exposes the first
derivative ``g`` and the negated second derivative ``h`` of the
log-likelihood with respect to ``z``. Those two numbers are all a rating
engine needs from a model.

All functions are vectorized over ``z`` and ``y`` (numpy broadcasting) and
return numpy scalars for scalar input.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy import special

LN10 = math.log(10.0)
_SQRT2 = math.sqrt(2.0)
_SQRT_2_OVER_PI = math.sqrt(2.0 / math.pi)


class ModelKind(str, enum.Enum):
    THURSTON = "thurston"
    BRADLEY_TERRY = "bradley_terry"
    DAVIDSON = "davidson"
    ORIGINAL_ELO = "original_elo"


_ALIASES = {
    "thurston": ModelKind.THURSTON,
    "bt": ModelKind.BRADLEY_TERRY,
    "bradley_terry": ModelKind.BRADLEY_TERRY,
    "bradley-terry": ModelKind.BRADLEY_TERRY,
    "logistic": ModelKind.BRADLEY_TERRY,
    "davidson": ModelKind.DAVIDSON,
    "original_elo": ModelKind.ORIGINAL_ELO,
    "elo-original": ModelKind.ORIGINAL_ELO,
    "original-elo": ModelKind.ORIGINAL_ELO,
}


def parse_model_kind(name: str | ModelKind) -> ModelKind:
    if isinstance(name, ModelKind):
        return name
    try:
        return _ALIASES[name.strip().lower()]
    except KeyError:
        raise ValueError(f"unknown model {name!r}") from None


@dataclass(frozen=True)
class ModelSpec:
    """Which skills-outcome model, and its parameters.

    ``scale`` divides the raw skill difference; ``hfa`` is added to the
    scaled difference for the home side; ``kappa`` is the Davidson draw
    parameter and must be given for (and only for) that model.
    """

    kind: ModelKind = ModelKind.THURSTON
    scale: float = 1.0
    kappa: float | None = None
    hfa: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "kind", parse_model_kind(self.kind))
        if not self.scale > 0:
            raise ValueError(f"scale must be positive, got {self.scale}")
        if self.kind is ModelKind.DAVIDSON:
            if self.kappa is None or not self.kappa >= 0:
                raise ValueError("Davidson model requires kappa >= 0")
        elif self.kappa is not None:
            raise ValueError(f"kappa is only used by the Davidson model, not {self.kind.value}")

    @property
    def n_outcomes(self) -> int:
        return 3 if self.kind is ModelKind.DAVIDSON else 2

    @property
    def alphabet(self) -> tuple[int, ...]:
        return tuple(range(self.n_outcomes))

    def with_scale(self, scale: float) -> "ModelSpec":
        return ModelSpec(self.kind, scale, self.kappa, self.hfa)

    def argument(self, z_raw):
        """Model argument ``z_raw / scale + hfa``."""
        return np.asarray(z_raw, dtype=float) / self.scale + self.hfa


@dataclass(frozen=True)
class OutcomeDerivatives:
    log_likelihood: np.ndarray | float
    gradient: np.ndarray | float
    hessian_neg: np.ndarray | float


def _scalarize(a):
    a = np.asarray(a)
    return a[()] if a.ndim == 0 else a


def _check_outcome(model: ModelSpec, y):
    y = np.asarray(y)
    if np.any((y < 0) | (y >= model.n_outcomes) | (y != np.floor(y))):
        raise ValueError(
            f"outcome outside the {model.kind.value} alphabet {model.alphabet}: {y!r}")
    return y.astype(int)


# --- Thurston (Gaussian CDF) ------------------------------------------------

def mills_ratio(z):
    """phi(z) / Phi(z), stable for very negative z (uses erfcx)."""
    z = np.asarray(z, dtype=float)
    return _SQRT_2_OVER_PI / special.erfcx(-z / _SQRT2)


def _mills_w(z):
    v = mills_ratio(z)
    # z + V(z) > 0 analytically; cancellation can make it round to <= 0
    return v * np.maximum(z + v, 0.0)


def _thurston(z, y):
    sign = np.where(y == 1, 1.0, -1.0)
    u = sign * z
    ll = special.log_ndtr(u)
    g = sign * mills_ratio(u)
    h = _mills_w(u)
    return ll, g, h


# --- Bradley-Terry (base-10 logistic) ---------------------------------------

def logistic10(z):
    """1 / (1 + 10**-z)."""
    return special.expit(LN10 * np.asarray(z, dtype=float))


def _bradley_terry(z, y):
    sign = np.where(y == 1, 1.0, -1.0)
    ll = special.log_expit(LN10 * sign * z)
    f = logistic10(z)
    g = LN10 * (y - f)
    h = LN10 ** 2 * f * logistic10(-z)
    return ll, g, h


# --- Davidson (ternary with draws) ------------------------------------------

def _davidson_parts(z, kappa):
    # everything is normalized by 10**|z| so nothing overflows
    a = np.abs(z)
    e1 = np.power(10.0, -a)
    den = 1.0 + kappa * e1 + e1 * e1
    log_den = np.log1p(kappa * e1 + e1 * e1)
    return a, e1, den, log_den


def davidson_expected_score(z, kappa: float):
    """G_D(z) = (10**z + kappa/2) / (10**-z + kappa + 10**z)."""
    z = np.asarray(z, dtype=float)
    _, e1, den, _ = _davidson_parts(z, kappa)
    upper = (1.0 + 0.5 * kappa * e1) / den
    return np.where(z >= 0, upper, 1.0 - upper)


def _davidson_log_probs(z, kappa):
    a, _, _, log_den = _davidson_parts(z, kappa)
    strong = -log_den
    weak = -2.0 * a * LN10 - log_den
    with np.errstate(divide="ignore"):
        draw = np.log(kappa) - a * LN10 - log_den
    home = np.where(z >= 0, strong, weak)
    away = np.where(z >= 0, weak, strong)
    return away, draw, home


def _davidson(z, y, kappa):
    away, draw, home = _davidson_log_probs(z, kappa)
    ll = np.choose(y, [away, draw, home])
    g = 2.0 * LN10 * (0.5 * y - davidson_expected_score(z, kappa))
    _, e1, den, _ = _davidson_parts(z, kappa)
    h = LN10 ** 2 * (kappa * e1 + 4.0 * e1 * e1 + kappa * e1 ** 3) / den ** 2
    return ll, g, h


# --- public API -------------------------------------------------------------

def original_elo_expected_score(z):
    """Gaussian-CDF expected score used by Elo's original rating rule."""
    return _scalarize(special.ndtr(np.asarray(z, dtype=float)))


def _evaluate(model: ModelSpec, z, y):
    z = np.asarray(z, dtype=float)
    y = _check_outcome(model, y)
    z, y = np.broadcast_arrays(z, y)
    kind = model.kind
    if kind is ModelKind.THURSTON:
        return _thurston(z, y)
    if kind is ModelKind.BRADLEY_TERRY:
        return _bradley_terry(z, y)
    if kind is ModelKind.DAVIDSON:
        return _davidson(z, y, model.kappa)
    # Elo's original rule: Gaussian expected score, gradient is the plain residual
    ll, _, _ = _thurston(z, y)
    g = y - special.ndtr(z)
    return ll, g, np.zeros_like(z)


def log_likelihood(model: ModelSpec, z, y):
    """Natural log of :func:`likelihood`."""
    return _scalarize(_evaluate(model, z, y)[0])


def likelihood(model: ModelSpec, z, y):
    """Probability of outcome ``y`` given the model argument ``z``.

    ``z`` is already scaled and boosted; no further transformation happens
    here.
    """
    return _scalarize(np.exp(_evaluate(model, z, y)[0]))


def derivatives(model: ModelSpec, z, y) -> OutcomeDerivatives:
    """Log-likelihood, its derivative ``g`` and negated second derivative ``h``.

    For ``ORIGINAL_ELO`` this is a gradient-only pseudo-model:
    ``g = y - Phi(z)`` and ``h = 0``.
    """
    ll, g, h = _evaluate(model, z, y)
    return OutcomeDerivatives(_scalarize(ll), _scalarize(g), _scalarize(h))


def outcome_probabilities(model: ModelSpec, z):
    """Probabilities of every outcome, stacked on the last axis."""
    z = np.asarray(z, dtype=float)
    probs = [np.exp(_evaluate(model, z, np.full(z.shape, y))[0]) for y in model.alphabet]
    return np.stack(probs, axis=-1)
