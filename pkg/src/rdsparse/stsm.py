"""Single-tone estimation with sparse approximation on refined 1-D grids.

For each requested dimension the frequency is found first with a harmonic
dictionary (zero damping) refined level by level around the selected atom;
the damping factor is then found the same way with a modal dictionary whose
frequency is pinned to the estimate.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .dictionary import (
    Grid1D,
    compute_zeta,
    dicref,
    harmonic_dictionary,
    modal_dictionary,
    uniform_damp_grid,
    uniform_freq_grid,
)
from .signal import RdMode, mode_vector
from .somp import SompConfig, somp
from .tensor import rank1, unfold


@dataclass(frozen=True)
class MultigridConfig:
    """Grid and refinement settings.

    ``levels`` is the number of refinements L; sparse approximation runs on
    levels 0..L. ``initial_freqs`` replaces the uniform ``n_freq0`` grid, e.g.
    with a randomly jittered one.
    """

    n_freq0: int = 50
    n_damp0: int = 10
    beta_min: float = -0.05
    eta_nu: int = 21
    eta_alpha: int = 11
    levels: int = 2
    freq_tol: float | None = None
    damp_tol: float | None = None
    initial_freqs: tuple[float, ...] | None = None
    aggregate: str = "l1"

    def __post_init__(self):
        if self.levels < 0:
            raise ValueError("levels must be >= 0")
        if self.eta_nu < 1 or self.eta_alpha < 1:
            raise ValueError("eta values must be >= 1")
        if not self.beta_min < 0:
            raise ValueError("beta_min must be negative")
        if self.initial_freqs is not None:
            object.__setattr__(self, "initial_freqs", tuple(float(v) for v in self.initial_freqs))

    def freq_grid(self) -> Grid1D:
        if self.initial_freqs is not None:
            return Grid1D(np.sort(np.asarray(self.initial_freqs)), "frequency")
        return uniform_freq_grid(self.n_freq0)

    def damp_grid(self) -> Grid1D:
        return uniform_damp_grid(self.n_damp0, self.beta_min)


@dataclass
class DimEstimate:
    freq: float
    damp: float
    freq_path: list[float] = field(default_factory=list)
    damp_path: list[float] = field(default_factory=list)
    flags: tuple[str, ...] = ()

    @property
    def pole(self) -> complex:
        return complex(np.exp(self.damp + 2j * np.pi * self.freq))


@dataclass
class StsmResult:
    dims: dict[int, DimEstimate]

    @property
    def freqs(self) -> tuple[float, ...]:
        return tuple(self.dims[r].freq for r in sorted(self.dims))

    @property
    def damps(self) -> tuple[float, ...]:
        return tuple(self.dims[r].damp for r in sorted(self.dims))

    @property
    def flags(self) -> tuple[str, ...]:
        return tuple(sorted({f for d in self.dims.values() for f in d.flags}))


def _select(y_r: np.ndarray, dictionary, aggregate: str) -> int:
    sol = somp(y_r, dictionary, SompConfig(max_iter=1, aggregate=aggregate))
    if not sol.omega:
        raise ValueError("data carry no energy; nothing to estimate")
    return sol.omega[0]


def estimate_frequency(
    y_r: np.ndarray, cfg: MultigridConfig
) -> tuple[float, list[float]]:
    """Multigrid frequency search on the columns of ``y_r`` (harmonic atoms)."""
    grid = cfg.freq_grid()
    length = y_r.shape[0]
    path = []
    for level in range(cfg.levels + 1):
        idx = _select(y_r, harmonic_dictionary(grid, length), cfg.aggregate)
        path.append(float(grid.points[idx]))
        if level == cfg.levels:
            break
        if cfg.freq_tol is not None and max(grid.local_spacing(idx)) <= cfg.freq_tol:
            break
        grid = dicref(grid, [idx], cfg.eta_nu)
    return path[-1], path


def estimate_damping(
    y_r: np.ndarray, nu: float, cfg: MultigridConfig
) -> tuple[float, list[float]]:
    """Multigrid damping search with the frequency pinned at ``nu``."""
    grid = cfg.damp_grid()
    length = y_r.shape[0]
    path = []
    for level in range(cfg.levels + 1):
        idx = _select(y_r, modal_dictionary(nu, grid, length), cfg.aggregate)
        path.append(float(grid.points[idx]))
        if level == cfg.levels:
            break
        if cfg.damp_tol is not None and max(grid.local_spacing(idx)) <= cfg.damp_tol:
            break
        grid = dicref(grid, [idx], cfg.eta_alpha)
    return path[-1], path


def estimate_dimension(y_r: np.ndarray, cfg: MultigridConfig) -> DimEstimate:
    """Frequency then damping of the single mode shared by the columns of ``y_r``."""
    y_r = np.asarray(y_r, dtype=np.complex128)
    if y_r.ndim == 1:
        y_r = y_r[:, None]
    length = y_r.shape[0]
    if length < 2:
        raise ValueError("a dimension of size 1 carries no frequency information")
    flags = []
    zeta = 0.5 if length < 3 else compute_zeta(length)
    if cfg.freq_grid().spacing() >= 2 * zeta:
        flags.append("coarse_initial_grid")
    nu, fpath = estimate_frequency(y_r, cfg)
    if length < 3:
        flags.append("damping_skipped")
        return DimEstimate(nu, 0.0, fpath, [], tuple(flags))
    alpha, apath = estimate_damping(y_r, nu, cfg)
    return DimEstimate(nu, alpha, fpath, apath, tuple(flags))


def stsm(
    y: np.ndarray, cfg: MultigridConfig | None = None, dims: Iterable[int] | None = None
) -> StsmResult:
    """Estimate the single R-D mode of ``y`` along each axis in ``dims`` (default: all)."""
    cfg = cfg or MultigridConfig()
    y = np.asarray(y, dtype=np.complex128)
    dims = list(range(y.ndim)) if dims is None else list(dims)
    if not dims:
        raise ValueError("no dimensions requested")
    return StsmResult({r: estimate_dimension(unfold(y, r), cfg) for r in dims})


def fit_amplitude(y: np.ndarray, poles: Sequence[complex]) -> complex:
    """Least-squares amplitude of the unit-amplitude rank-1 mode with ``poles``."""
    basis = rank1(1.0, [mode_vector(a, n) for a, n in zip(poles, y.shape)])
    return complex(np.vdot(basis, y) / np.vdot(basis, basis))


def stsm_mode(y: np.ndarray, cfg: MultigridConfig | None = None) -> RdMode:
    """Full single-mode estimate (all dimensions plus amplitude) as an :class:`RdMode`."""
    res = stsm(y, cfg)
    est = [res.dims[r] for r in range(np.ndim(y))]
    amp = fit_amplitude(np.asarray(y), [d.pole for d in est])
    return RdMode([d.freq for d in est], [d.damp for d in est], amp)
