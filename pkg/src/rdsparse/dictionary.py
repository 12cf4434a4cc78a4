"""Modal dictionaries on (frequency, damping) grids and multigrid refinement."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable

import numpy as np
from scipy.optimize import bisect, minimize_scalar

DUPLICATE_TOL = 1e-14


@dataclass(frozen=True)
class Grid1D:
    """Sorted 1-D grid of frequencies (on the unit circle) or damping factors.

    ``lower`` is the damping interval bound ``beta_min``; unused for frequencies.
    """

    points: np.ndarray
    kind: str = "frequency"
    lower: float = 0.0

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float).ravel()
        object.__setattr__(self, "points", pts)
        if self.kind not in ("frequency", "damping"):
            raise ValueError(f"unknown grid kind {self.kind!r}")
        if pts.size == 0:
            raise ValueError("empty grid")
        if np.any(np.diff(pts) <= 0):
            raise ValueError("grid points must be strictly increasing")
        if self.kind == "frequency" and (pts[0] < 0 or pts[-1] >= 1):
            raise ValueError("frequency grid points must lie in [0, 1)")
        if self.kind == "damping" and (pts[0] < self.lower or pts[-1] > 0):
            raise ValueError("damping grid points must lie in [beta_min, 0]")

    def __len__(self) -> int:
        return self.points.size

    def spacing(self) -> float:
        """Largest gap between consecutive points (circular for frequencies)."""
        gaps = np.diff(self.points)
        if self.kind == "frequency":
            gaps = np.append(gaps, self.points[0] + 1.0 - self.points[-1])
        return float(gaps.max()) if gaps.size else 0.0

    def local_spacing(self, index: int) -> tuple[float, float]:
        """Distances from point ``index`` to its left and right neighbours."""
        lo, hi = _neighbours(self, index)
        p = self.points[index]
        return p - lo, hi - p


@dataclass(frozen=True)
class Dictionary:
    """Unit-norm atoms (columns) with their (mu, beta) labels."""

    atoms: np.ndarray
    mu: np.ndarray
    beta: np.ndarray

    @property
    def n_atoms(self) -> int:
        return self.atoms.shape[1]


def uniform_freq_grid(n_mu: int) -> Grid1D:
    """``{0, 1/n_mu, ..., (n_mu-1)/n_mu}``."""
    if n_mu < 2:
        raise ValueError("a frequency grid needs at least 2 points")
    return Grid1D(np.arange(n_mu) / n_mu, "frequency")


def uniform_damp_grid(n_beta: int, beta_min: float) -> Grid1D:
    """``n_beta`` equispaced damping factors from ``beta_min`` to 0 inclusive."""
    if n_beta < 2:
        raise ValueError("a damping grid needs at least 2 points")
    if not beta_min < 0:
        raise ValueError("beta_min must be negative")
    pts = np.linspace(beta_min, 0.0, n_beta)
    pts[-1] = 0.0
    return Grid1D(pts, "damping", lower=beta_min)


def perturbed_freq_grid(n_mu: int, rng: np.random.Generator, amount: float = 0.25) -> Grid1D:
    """Uniform frequency grid with each point jittered by U(-amount, amount) spacings."""
    if not 0 <= amount < 0.5:
        raise ValueError("jitter must be below half a grid spacing")
    base = uniform_freq_grid(n_mu).points
    jitter = rng.uniform(-amount, amount, size=n_mu) / n_mu
    return Grid1D(np.sort((base + jitter) % 1.0), "frequency")


def atom_matrix(mu, beta, length: int) -> np.ndarray:
    """Normalized atoms ``a(mu, beta) / ||a(mu, beta)||`` as columns."""
    mu = np.atleast_1d(np.asarray(mu, dtype=float))
    beta = np.atleast_1d(np.asarray(beta, dtype=float))
    m = np.arange(length)[:, None]
    atoms = np.exp(m * (beta[None, :] + 2j * np.pi * mu[None, :]))
    # closed-form geometric sum sum_m e^{2 beta m}; beta = 0 gives length
    with np.errstate(invalid="ignore", divide="ignore"):
        energy = np.where(
            np.abs(beta) < 1e-12,
            float(length),
            np.expm1(2.0 * beta * length) / np.expm1(2.0 * beta),
        )
    return atoms / np.sqrt(energy)[None, :]


def build_dictionary(freqs: Grid1D, damps: Grid1D, length: int) -> Dictionary:
    """One atom per (mu, beta) pair; damping-major order (all mu for beta_1, then beta_2, ...)."""
    mu = np.tile(freqs.points, len(damps))
    beta = np.repeat(damps.points, len(freqs))
    return Dictionary(atom_matrix(mu, beta, length), mu, beta)


def harmonic_dictionary(freqs: Grid1D, length: int) -> Dictionary:
    mu = freqs.points
    beta = np.zeros_like(mu)
    return Dictionary(atom_matrix(mu, beta, length), mu, beta)


def modal_dictionary(nu: float, damps: Grid1D, length: int) -> Dictionary:
    """Atoms with frequency fixed at ``nu`` over a damping grid."""
    beta = damps.points
    mu = np.full_like(beta, nu)
    return Dictionary(atom_matrix(mu, beta, length), mu, beta)


def _neighbours(grid: Grid1D, index: int) -> tuple[float, float]:
    pts = grid.points
    n = pts.size
    if grid.kind == "frequency":
        lo = pts[index - 1] - 1.0 if index == 0 else pts[index - 1]
        hi = pts[0] + 1.0 if index == n - 1 else pts[index + 1]
        if n == 1:
            lo, hi = pts[0] - 1.0, pts[0] + 1.0
    else:
        lo = pts[index - 1] if index > 0 else pts[index]
        hi = pts[index + 1] if index < n - 1 else pts[index]
    return lo, hi


def _merge(points: np.ndarray) -> np.ndarray:
    points = np.sort(points)
    keep = np.concatenate(([True], np.diff(points) > DUPLICATE_TOL))
    return points[keep]


def dicref(grid: Grid1D, active: Iterable[int], eta: int) -> Grid1D:
    """Refine ``grid`` around the activated indices.

    ``eta`` new points are inserted strictly inside each interval between an
    active point and its neighbours, so the local spacing shrinks by a factor
    ``eta + 1``. Frequency grids wrap modulo 1; damping grids stop at their
    end points. All original points are kept.
    """
    active = sorted(set(int(i) for i in active))
    if not active:
        raise ValueError("no activated atoms to refine around")
    if eta < 1:
        raise ValueError("eta must be >= 1")
    n = len(grid)
    if active[0] < 0 or active[-1] >= n:
        raise IndexError("activated index out of range")
    frac = np.arange(1, eta + 1) / (eta + 1)
    new = [grid.points]
    for i in active:
        p = grid.points[i]
        lo, hi = _neighbours(grid, i)
        if lo < p:
            new.append(lo + frac * (p - lo))
        if hi > p:
            new.append(p + frac * (hi - p))
    pts = np.concatenate(new)
    if grid.kind == "frequency":
        pts = pts % 1.0
        pts[pts >= 1.0] = 0.0
        pts = _merge(pts)
        if pts.size > 1 and pts[-1] - 1.0 >= pts[0] - DUPLICATE_TOL:
            pts = pts[:-1]
        return Grid1D(pts, grid.kind, grid.lower)
    pts = np.clip(pts, grid.lower, 0.0)
    return Grid1D(_merge(pts), grid.kind, grid.lower)


def fejer(mu, length: int) -> np.ndarray:
    """Undamped single-tone objective with ``nu = 0``, ``|c| = 1``.

    Equals ``|sin(pi M mu) / sin(pi mu)|**2 / M`` with the limit ``M`` at integers.
    """
    mu = np.asarray(mu, dtype=float)
    s = np.sin(np.pi * mu)
    with np.errstate(invalid="ignore", divide="ignore"):
        val = (np.sin(np.pi * length * mu) / s) ** 2 / length
    return np.where(np.abs(s) < 1e-15, float(length), val)


@lru_cache(maxsize=None)
def compute_zeta(length: int, xtol: float = 1e-12) -> float:
    """Half-width of the capture zone of the Fejer main lobe.

    ``zeta`` solves ``J(zeta) = J_1`` on the main lobe ``(0, 1/M)`` where
    ``J_1`` is the height of the first sidelobe (max over ``[1/M, 2/M]``).
    A uniform initial grid with spacing below ``2 * zeta`` guarantees the
    single-tone refinement converges.
    """
    if length < 3:
        raise ValueError("zeta is only defined for M >= 3 (use 1/2 for smaller M)")
    M = length
    res = minimize_scalar(
        lambda x: -float(fejer(x, M)),
        bounds=(1.0 / M, 2.0 / M),
        method="bounded",
        options={"xatol": 1e-14},
    )
    side = -res.fun
    return float(bisect(lambda x: float(fejer(x, M)) - side, 1e-15, 1.0 / M, xtol=xtol))
