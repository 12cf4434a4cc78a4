"""Cramer-Rao lower bounds for R-D damped complex exponentials in white noise.

Parameter vector layout (length ``2RF + 2F``)::

    [omega_{1,1..R}, ..., omega_{F,1..R}, alpha_{1,1..R}, ..., alpha_{F,1..R},
     lambda_1..lambda_F, phi_1..phi_F]

with ``omega = 2 pi nu`` and ``c_f = lambda_f exp(j phi_f)``. Bounds are
variances. The mean vector uses the tensor's C-order flattening.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.linalg

from .signal import RdMode, SignalSpec

COND_MAX = 1e12


class SingularFisherError(ValueError):
    """Fisher information is singular or too ill-conditioned to invert."""


@dataclass
class CrlbReport:
    omega: np.ndarray  # F x R
    alpha: np.ndarray  # F x R
    lam: np.ndarray  # F
    phi: np.ndarray  # F
    fisher_cond: float

    @property
    def freq(self) -> np.ndarray:
        """Bounds on the normalized frequencies ``nu = omega / 2 pi``."""
        return self.omega / (2 * np.pi) ** 2

    def total_sqrt(self, which: str = "frequency") -> float:
        """``sqrt(mean_{f,r} CRLB)``, comparable to the total RMSE."""
        b = self.freq if which == "frequency" else self.alpha
        return math.sqrt(float(np.mean(b)))


def theta_from_modes(modes: Sequence[RdMode]) -> np.ndarray:
    omega = [2 * np.pi * v for m in modes for v in m.freqs]
    alpha = [d for m in modes for d in m.damps]
    lam = [abs(m.amplitude) for m in modes]
    phi = [np.angle(m.amplitude) for m in modes]
    return np.array(omega + alpha + lam + phi, dtype=float)


def split_theta(theta, n_dims: int):
    """``(omega FxR, alpha FxR, lambda F, phi F)`` from a flat parameter vector."""
    theta = np.asarray(theta, dtype=float)
    n = theta.size
    if n % (2 * n_dims + 2):
        raise ValueError(f"theta of length {n} does not fit R = {n_dims}")
    F = n // (2 * n_dims + 2)
    rf = n_dims * F
    omega = theta[:rf].reshape(F, n_dims)
    alpha = theta[rf : 2 * rf].reshape(F, n_dims)
    lam = theta[2 * rf : 2 * rf + F]
    phi = theta[2 * rf + F :]
    if np.any(lam <= 0):
        raise ValueError("magnitudes must be positive")
    return omega, alpha, lam, phi


def index_map(i: int, r: int, sizes: Sequence[int]) -> int:
    """Exponent of dimension ``r`` at flat sample ``i`` (both 0-based)."""
    stride = int(np.prod(sizes[r + 1 :], dtype=int))
    return (i // stride) % sizes[r]


def exponents(sizes: Sequence[int]) -> np.ndarray:
    """``M x R`` matrix of exponents ``t_{i,r}`` for every flat index."""
    idx = np.indices(tuple(sizes)).reshape(len(sizes), -1)
    return idx.T.astype(float)


def _z_matrix(omega, alpha, t) -> np.ndarray:
    # z_f(i) = prod_r a_{f,r}^{t_{i,r}}
    log_a = alpha + 1j * omega  # F x R
    return np.exp(t @ log_a.T)  # M x F


def model_mean(theta, sizes: Sequence[int]) -> np.ndarray:
    """Noise-free data vector for parameters ``theta``."""
    omega, alpha, lam, phi = split_theta(theta, len(sizes))
    z = _z_matrix(omega, alpha, exponents(sizes))
    return z @ (lam * np.exp(1j * phi))


def v_and_s(theta, sizes: Sequence[int]) -> tuple[np.ndarray, np.ndarray]:
    """Factorization ``d mu / d theta = V S``.

    ``V = [j Z' Phi, Z' Phi, Z phi, j Z phi]``, ``S = blkdiag(Lambda, Lambda, I, lambda)``.
    """
    R = len(sizes)
    omega, alpha, lam, phi = split_theta(theta, R)
    F = lam.size
    t = exponents(sizes)
    z = _z_matrix(omega, alpha, t)
    # Z'_f(i, l) = t_{i,l} z_f(i), blocks ordered f-major
    zp = (t[:, None, :] * z[:, :, None]).reshape(t.shape[0], F * R)
    ph = np.exp(1j * phi)
    big_phi = np.repeat(ph, R)
    v = np.hstack([1j * zp * big_phi, zp * big_phi, z * ph, 1j * z * ph])
    s = np.concatenate([np.repeat(lam, R), np.repeat(lam, R), np.ones(F), lam])
    return v, np.diag(s)


def jacobian(theta, sizes: Sequence[int]) -> np.ndarray:
    """Complex Jacobian of :func:`model_mean`, ``M x (2RF + 2F)``."""
    v, s = v_and_s(theta, sizes)
    return v @ s


def fisher_information(theta, sigma2: float, sizes: Sequence[int]) -> np.ndarray:
    j = jacobian(theta, sizes)
    return 2.0 / sigma2 * np.real(j.conj().T @ j)


def crlb_general(theta, sigma2: float, sizes: Sequence[int]) -> CrlbReport:
    """Per-parameter bounds from ``F^-1 = (sigma2/2) S^-1 Re{V^H V}^-1 S^-1``."""
    if sigma2 <= 0:
        raise ValueError("sigma2 must be positive")
    R = len(sizes)
    omega, _, lam, _ = split_theta(theta, R)
    F = lam.size
    v, s = v_and_s(theta, sizes)
    gram = np.real(v.conj().T @ v)
    gram = 0.5 * (gram + gram.T)
    # Jacobi scaling before the condition check so units do not dominate
    d = 1.0 / np.sqrt(np.diag(gram))
    scaled = gram * d[:, None] * d[None, :]
    cond = float(np.linalg.cond(scaled))
    if not np.isfinite(cond) or cond > COND_MAX:
        raise SingularFisherError(f"Fisher matrix condition {cond:.3g} exceeds {COND_MAX:g}")
    w = scipy.linalg.cho_solve(scipy.linalg.cho_factor(scaled), np.eye(scaled.shape[0]))
    w = w * d[:, None] * d[None, :]
    sd = np.diag(s)
    bounds = sigma2 / 2.0 * np.diag(w) / sd**2
    rf = R * F
    return CrlbReport(
        omega=bounds[:rf].reshape(F, R),
        alpha=bounds[rf : 2 * rf].reshape(F, R),
        lam=bounds[2 * rf : 2 * rf + F],
        phi=bounds[2 * rf + F :],
        fisher_cond=cond,
    )


def crlb_for_signal(spec: SignalSpec, sigma2: float) -> CrlbReport:
    return crlb_general(theta_from_modes(spec.modes), sigma2, spec.sizes)


def _moments(alpha: float, length: int) -> tuple[float, float, float]:
    """``(sum_m x^m, q1, centered second moment)`` for ``x = exp(2 alpha)``.

    Finite m-sums: exact at ``alpha = 0`` and free of the cancellation the
    geometric closed forms suffer near zero damping.
    """
    m = np.arange(length, dtype=float)
    w = np.exp(2.0 * alpha * m)
    total = math.fsum(w)
    q1 = math.fsum(m * w) / total
    var = math.fsum((m - q1) ** 2 * w) / total
    return total, q1, var


def omega_factor_closed(alpha: float, length: int) -> float:
    """``(1-x)^2 (1-x^M)^2 / (x (1-x^M)^2 - M^2 x^M (1-x)^2)``, ``x = |a|^2``.

    Equals ``1 / (q2 - q1^2)``. Loses accuracy as ``alpha -> 0`` (the
    denominator cancels to fourth order); the undamped limit is ``12 / (M^2 - 1)``.
    """
    if alpha == 0:
        return 12.0 / (length**2 - 1)
    M = length
    x = math.exp(2 * alpha)
    one_x = -math.expm1(2 * alpha)
    one_xm = -math.expm1(2 * alpha * M)
    return one_x**2 * one_xm**2 / (x * one_xm**2 - M**2 * x**M * one_x**2)


@dataclass
class SingleModeBounds:
    omega: np.ndarray  # R, equal to the damping bounds
    alpha: np.ndarray
    lam: float
    phi: float


def crlb_single_mode(
    alpha: Sequence[float], sizes: Sequence[int], lam: float, sigma2: float
) -> SingleModeBounds:
    """Closed-form bounds for one R-D mode (they do not depend on the frequencies)."""
    alpha = [float(a) for a in alpha]
    if len(alpha) != len(sizes):
        raise ValueError("one damping factor per dimension")
    mom = [_moments(a, n) for a, n in zip(alpha, sizes)]
    m_alpha = math.prod(s for s, _, _ in mom)
    base = sigma2 / (2.0 * lam**2 * m_alpha)
    omega = np.array([base / var for _, _, var in mom])
    phi = base * (1.0 + sum(q1**2 / var for _, q1, var in mom))
    return SingleModeBounds(omega, omega.copy(), lam**2 * phi, phi)


def crlb_undamped_limit(sizes: Sequence[int], lam: float, sigma2: float) -> SingleModeBounds:
    """``alpha -> 0`` limits: ``6 sigma2 / (lam^2 M (M_r^2 - 1))`` etc."""
    M = math.prod(sizes)
    omega = np.array([6.0 * sigma2 / (lam**2 * M * (n**2 - 1)) for n in sizes])
    phi = sigma2 / (2.0 * lam**2 * M) * (1.0 + 3.0 * sum((n - 1) / (n + 1) for n in sizes))
    return SingleModeBounds(omega, omega.copy(), lam**2 * phi, phi)
