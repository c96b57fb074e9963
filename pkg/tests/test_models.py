import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from skfrating.models import (
    LN10,
    ModelKind,
    ModelSpec,
    davidson_expected_score,
    derivatives,
    likelihood,
    log_likelihood,
    logistic10,
    mills_ratio,
    original_elo_expected_score,
    outcome_probabilities,
    parse_model_kind,
)

TH = ModelSpec(ModelKind.THURSTON)
BT = ModelSpec(ModelKind.BRADLEY_TERRY)


def dav(kappa):
    return ModelSpec(ModelKind.DAVIDSON, kappa=kappa)


ALL_MODELS = [TH, BT, dav(0.5), dav(1.0), dav(2.0)]


# --- examples -----------------------------------------------------------------

def test_likelihood_examples():
    assert likelihood(BT, 0.0, 1) == pytest.approx(0.5, abs=1e-15)
    assert likelihood(BT, 1.0, 1) == pytest.approx(10 / 11, abs=1e-15)
    assert likelihood(dav(1.0), 0.0, 1) == pytest.approx(1 / 3, abs=1e-15)
    assert likelihood(TH, 0.0, 0) == pytest.approx(0.5, abs=1e-15)


def test_derivative_examples():
    d = derivatives(BT, 0.0, 1)
    assert d.gradient == pytest.approx(LN10 / 2, abs=1e-12)
    assert d.gradient == pytest.approx(1.15129, abs=1e-5)
    assert d.hessian_neg == pytest.approx(1.32547, abs=1e-5)
    for kappa in (0.1, 0.67, 3.0):
        assert derivatives(dav(kappa), 0.0, 1).gradient == pytest.approx(0.0, abs=1e-15)
    d = derivatives(TH, 0.0, 1)
    assert d.gradient == pytest.approx(math.sqrt(2 / math.pi), abs=1e-12)
    assert d.hessian_neg == pytest.approx(2 / math.pi, abs=1e-12)


def test_original_elo_expected_score():
    assert original_elo_expected_score(0.0) == 0.5
    assert original_elo_expected_score(40.0) == 1.0
    assert original_elo_expected_score(1.0) == pytest.approx(0.5 * (1 + math.erf(1 / math.sqrt(2))), abs=1e-12)
    assert original_elo_expected_score(1.0) == pytest.approx(0.841345, abs=1e-6)
    d = derivatives(ModelSpec(ModelKind.ORIGINAL_ELO), 0.0, 1)
    assert d.gradient == 0.5 and d.hessian_neg == 0.0


def test_bad_outcome_rejected():
    with pytest.raises(ValueError):
        likelihood(BT, 0.0, 2)
    with pytest.raises(ValueError):
        derivatives(dav(1.0), 0.0, 3)
    with pytest.raises(ValueError):
        likelihood(TH, 0.0, -1)
    with pytest.raises(ValueError):
        likelihood(BT, 0.0, 0.5)


def test_model_spec_validation():
    with pytest.raises(ValueError):
        ModelSpec(ModelKind.BRADLEY_TERRY, scale=0.0)
    with pytest.raises(ValueError):
        ModelSpec(ModelKind.DAVIDSON)
    with pytest.raises(ValueError):
        ModelSpec(ModelKind.DAVIDSON, kappa=-0.1)
    with pytest.raises(ValueError):
        ModelSpec(ModelKind.THURSTON, kappa=1.0)
    assert ModelSpec(ModelKind.DAVIDSON, kappa=0.5).n_outcomes == 3
    assert BT.alphabet == (0, 1)
    assert BT.with_scale(400.0).argument(400.0) == pytest.approx(1.0)
    assert ModelSpec(ModelKind.BRADLEY_TERRY, hfa=0.08).argument(0.0) == pytest.approx(0.08)


@pytest.mark.parametrize("name,kind", [
    ("thurston", ModelKind.THURSTON), ("bt", ModelKind.BRADLEY_TERRY),
    ("Bradley-Terry", ModelKind.BRADLEY_TERRY), ("davidson", ModelKind.DAVIDSON),
    ("original_elo", ModelKind.ORIGINAL_ELO),
])
def test_parse_model_kind(name, kind):
    assert parse_model_kind(name) is kind


def test_parse_model_kind_unknown():
    with pytest.raises(ValueError):
        parse_model_kind("poisson")


# --- finite-difference oracle -------------------------------------------------

def _fd(model, z, y):
    def ll(x):
        return float(log_likelihood(model, x, y))
    h1, h2 = 1e-5, 1e-4
    g = (ll(z + h1) - ll(z - h1)) / (2 * h1)
    d2 = (ll(z + h2) - 2 * ll(z) + ll(z - h2)) / h2 ** 2
    return g, d2


@pytest.mark.parametrize("model", ALL_MODELS, ids=lambda m: f"{m.kind.value}-{m.kappa}")
def test_derivatives_match_finite_differences(model):
    rng = np.random.default_rng(3)
    for _ in range(200):
        z = rng.uniform(-3, 3)
        y = int(rng.integers(model.n_outcomes))
        d = derivatives(model, z, y)
        g_fd, d2_fd = _fd(model, z, y)
        assert abs(d.gradient - g_fd) <= 1e-6
        assert abs(d.hessian_neg + d2_fd) <= 1e-4


def test_vectorized_matches_scalar():
    z = np.linspace(-4, 4, 17)
    y = (np.arange(17) % 3)
    m = dav(0.7)
    d = derivatives(m, z, y)
    for k in range(17):
        s = derivatives(m, z[k], int(y[k]))
        assert d.gradient[k] == s.gradient and d.hessian_neg[k] == s.hessian_neg


# --- numerics at extremes -----------------------------------------------------

def test_thurston_stable_far_tail():
    # phi/Phi ~ -z for z << 0; a naive ratio would give 0/0
    for z in (-10.0, -40.0, -300.0):
        v = mills_ratio(z)
        assert np.isfinite(v) and v == pytest.approx(-z, rel=1 / z ** 2 * 2)
        d = derivatives(TH, z, 1)
        assert np.isfinite(d.log_likelihood) and d.hessian_neg >= 0
        assert d.hessian_neg <= 1.0


def test_bt_hessian_vanishes_in_tails():
    for z in (-20.0, 20.0):
        for y in (0, 1):
            assert derivatives(BT, z, y).hessian_neg < 1e-15


def test_davidson_no_overflow():
    for z in (-400.0, 400.0):
        for y in (0, 1, 2):
            d = derivatives(dav(1.0), z, y)
            assert np.isfinite(d.gradient) and np.isfinite(d.hessian_neg)
    p = outcome_probabilities(dav(1.0), np.array([-400.0, 400.0]))
    assert np.allclose(p.sum(axis=-1), 1.0)


def test_davidson_zero_kappa_draw_impossible():
    assert likelihood(dav(0.0), 0.3, 1) == 0.0


# --- properties ---------------------------------------------------------------

zs = st.floats(-30, 30, allow_nan=False)
kappas = st.floats(0.0, 5.0, allow_nan=False)


@given(zs)
def test_binary_symmetry(z):
    for m in (TH, BT):
        assert likelihood(m, z, 1) == pytest.approx(likelihood(m, -z, 0), rel=1e-12, abs=1e-300)
        assert likelihood(m, z, 1) + likelihood(m, z, 0) == pytest.approx(1.0, abs=1e-12)


@given(zs, kappas)
def test_davidson_normalized(z, kappa):
    total = sum(likelihood(dav(kappa), z, y) for y in (0, 1, 2))
    assert abs(total - 1.0) <= 1e-12


@given(zs, kappas, st.integers(0, 2))
def test_hessian_nonnegative(z, kappa, y):
    assert derivatives(dav(kappa), z, y).hessian_neg >= 0
    assert derivatives(TH, z, y % 2).hessian_neg >= 0
    assert derivatives(BT, z, y % 2).hessian_neg >= 0


@given(st.floats(-5, 5))
def test_davidson_reduces_to_logistic(z):
    assert abs(davidson_expected_score(z / 2, 0.0) - logistic10(z)) <= 1e-12
    assert abs(davidson_expected_score(z, 2.0) - logistic10(z)) <= 1e-12
    g_bt = derivatives(BT, z, 1).gradient
    g_d = derivatives(dav(2.0), z, 2).gradient
    assert g_d == pytest.approx(2 * g_bt, rel=1e-10, abs=1e-12)


@settings(max_examples=50)
@given(st.floats(-3, 3), st.integers(0, 1))
def test_fd_property_thurston(z, y):
    d = derivatives(TH, z, y)
    g_fd, d2_fd = _fd(TH, z, y)
    assert abs(d.gradient - g_fd) <= 1e-6
    assert abs(d.hessian_neg + d2_fd) <= 1e-4
