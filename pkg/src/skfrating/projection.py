"""KL-optimal reduction of a Gaussian covariance to simpler families.

Given a Gaussian with covariance ``V``, the closest (in KL divergence
``D(N(mu, V) || N(mu, C))``) Gaussian with diagonal ``C`` keeps the
diagonal of ``V``; the closest one with ``C = v I`` uses the average of
that diagonal. The mean is untouched in both cases.
"""
from __future__ import annotations

import numpy as np

PSD_TOL = 1e-10


def validate_covariance(V, tol: float = PSD_TOL) -> np.ndarray:
    """Check ``V`` is a symmetric positive semidefinite matrix; return it as an array."""
    V = np.asarray(V, dtype=float)
    if V.ndim != 2 or V.shape[0] != V.shape[1]:
        raise ValueError(f"covariance must be square, got shape {V.shape}")
    if not np.allclose(V, V.T, rtol=0, atol=1e-12):
        raise ValueError("covariance is not symmetric")
    try:
        np.linalg.cholesky(V + tol * np.eye(len(V)))
    except np.linalg.LinAlgError:
        raise ValueError("covariance is not positive semidefinite") from None
    return V


def project_to_diagonal(V) -> np.ndarray:
    return np.diag(validate_covariance(V)).copy()


def project_to_scalar(v) -> float:
    v = np.asarray(v, dtype=float)
    if v.size == 0:
        raise ValueError("cannot project an empty variance vector")
    if np.any(v < 0):
        raise ValueError("variances must be nonnegative")
    return float(v.mean())


def gaussian_kl(V, C) -> float:
    """``D(N(0, V) || N(0, C))`` for equal means."""
    V = np.asarray(V, dtype=float)
    C = np.asarray(C, dtype=float)
    M = len(V)
    C_inv_V = np.linalg.solve(C, V)
    _, logdet_c = np.linalg.slogdet(C)
    _, logdet_v = np.linalg.slogdet(V)
    return 0.5 * (np.trace(C_inv_V) - M + logdet_c - logdet_v)
