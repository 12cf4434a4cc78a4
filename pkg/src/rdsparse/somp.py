"""Simultaneous orthogonal matching pursuit and single-tone objectives."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .dictionary import Dictionary


@dataclass(frozen=True)
class SompConfig:
    """Halting rule: stop after ``max_iter`` atoms or once ``||R||_F <= epsilon``."""

    max_iter: int = 1
    epsilon: float = 0.0
    aggregate: str = "l1"

    def __post_init__(self):
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")
        if self.epsilon < 0:
            raise ValueError("epsilon must be >= 0")
        if self.aggregate not in ("l1", "l2"):
            raise ValueError("aggregate must be 'l1' or 'l2'")


@dataclass
class SparseSolution:
    omega: list[int]
    coeffs: np.ndarray
    residual_norm: float
    residual_history: list[float] = field(default_factory=list)

    def active_coeffs(self) -> np.ndarray:
        return self.coeffs[self.omega]


def _score(corr: np.ndarray, aggregate: str) -> np.ndarray:
    mag = np.abs(corr)
    if aggregate == "l1":
        return mag.sum(axis=1)
    return np.sqrt((mag**2).sum(axis=1))


def somp(y, dictionary, cfg: SompConfig | None = None) -> SparseSolution:
    """Greedy simultaneous sparse approximation of the columns of ``y``.

    Each iteration picks the atom maximizing the aggregated correlation
    ``sum_k |<R e_k, q_n>|`` over the residual columns, then refits all
    selected atoms by least squares. Ties go to the lowest index. An atom that
    would make the selected set rank deficient is skipped in favour of the
    next best one.

    Args:
        y: ``M x M'`` data matrix (a vector is treated as one column).
        dictionary: :class:`Dictionary` or ``M x N`` matrix of unit-norm atoms.
        cfg: halting rule and aggregation; defaults to one atom.
    """
    cfg = cfg or SompConfig()
    q = dictionary.atoms if isinstance(dictionary, Dictionary) else np.asarray(dictionary)
    y = np.asarray(y, dtype=np.complex128)
    if y.ndim == 1:
        y = y[:, None]
    if q.shape[0] != y.shape[0]:
        raise ValueError(f"dictionary has {q.shape[0]} rows, data has {y.shape[0]}")
    n_atoms = q.shape[1]
    coeffs = np.zeros((n_atoms, y.shape[1]), dtype=np.complex128)
    omega: list[int] = []
    resid = y
    rnorm = float(np.linalg.norm(y))
    history = [rnorm]
    banned = np.zeros(n_atoms, dtype=bool)
    x = np.zeros((0, y.shape[1]), dtype=np.complex128)

    while len(omega) < min(cfg.max_iter, n_atoms) and rnorm > cfg.epsilon:
        score = _score(q.conj().T @ resid, cfg.aggregate)
        score[banned] = -np.inf
        chosen = None
        for n in np.argsort(-score, kind="stable"):
            if not np.isfinite(score[n]):
                break
            if not omega and np.linalg.norm(q[:, n]) > 0:
                chosen = int(n)
                break
            # rank test on the candidate support
            s = np.linalg.svd(q[:, omega + [int(n)]], compute_uv=False)
            if s[-1] > 1e-10 * s[0]:
                chosen = int(n)
                break
            banned[n] = True
        if chosen is None:
            break
        omega.append(chosen)
        banned[chosen] = True
        qs = q[:, omega]
        qmat, rmat = np.linalg.qr(qs)
        x = np.linalg.solve(rmat, qmat.conj().T @ y)
        resid = y - qs @ x
        rnorm = float(np.linalg.norm(resid))
        history.append(rnorm)

    if omega:
        coeffs[omega] = x
    return SparseSolution(omega, coeffs, rnorm, history)


def freq_objective(mu, nu1: float, alpha1: float, c1_mag: float, length: int):
    """Correlation energy ``|q(mu, 0)^H y|^2`` for a single-tone ``y``.

    ``(|c|^2/M) |(1 - e^{alpha M + j2pi(nu-mu)M}) / (1 - e^{alpha + j2pi(nu-mu)})|^2``,
    with the removable singularity at ``mu = nu, alpha = 0`` filled by ``|c|^2 M``.
    """
    mu = np.asarray(mu, dtype=float)
    M = length
    z = alpha1 + 2j * np.pi * (nu1 - mu)
    num = -np.expm1(M * z)
    den = -np.expm1(z)
    with np.errstate(invalid="ignore", divide="ignore"):
        ratio = np.abs(num / den) ** 2
    # at z -> 0 the geometric sum tends to M
    ratio = np.where(np.abs(den) < 1e-300, float(M) ** 2, ratio)
    return c1_mag**2 / M * ratio


def _geom_energy(s: float, length: int) -> float:
    """``sum_{m<M} e^{s m}`` for real ``s``, exact at ``s = 0``."""
    if abs(s) < 1e-300:
        return float(length)
    return math.expm1(s * length) / math.expm1(s)


def damp_objective(beta, alpha1: float, c1_mag: float, length: int):
    """Correlation energy ``|q(nu, beta)^H y|^2`` with the frequency matched.

    ``|c|^2 (1 - e^{2 beta}) / (1 - e^{2 beta M}) ((1 - e^{(alpha+beta)M}) / (1 - e^{alpha+beta}))^2``
    """
    beta_arr = np.atleast_1d(np.asarray(beta, dtype=float))
    out = np.array(
        [
            c1_mag**2 * _geom_energy(alpha1 + b, length) ** 2 / _geom_energy(2.0 * b, length)
            for b in beta_arr
        ]
    )
    return out if np.ndim(beta) else float(out[0])
