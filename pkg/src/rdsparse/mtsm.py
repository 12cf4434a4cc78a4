"""Multiple-mode estimation by subspace separation and per-mode multigrid fits.

The first dimension must hold distinct mode coordinates. Its signal subspace
(truncated SVD of the first unfolding) and shift invariance give the
dimension-1 factor matrix up to scaling; projecting the data on it splits the
tensor into F single-mode components. Each component is then fitted with the
single-tone estimator along dimensions 2..R plus a least-squares solve for the
dimension-1 vector, and the fits are refined with chained residual sweeps.
Modes in all dimensions come out of the same component, so no pairing step is
needed.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .signal import RdMode, mode_vector
from .stsm import DimEstimate, MultigridConfig, estimate_dimension, stsm
from .tensor import contract_mode, frob_norm, kron, rank1, unfold


class IdentifiabilityError(ValueError):
    """The data or configuration violate the conditions MTSM relies on."""


@dataclass(frozen=True)
class MtsmConfig:
    f_modes: int
    k_iters: int = 2
    stsm: MultigridConfig = field(default_factory=MultigridConfig)
    keep_best: bool = True

    def __post_init__(self):
        if self.f_modes < 1:
            raise ValueError("f_modes must be >= 1")
        if self.k_iters < 0:
            raise ValueError("k_iters must be >= 0")


@dataclass
class ComponentState:
    """One separated component.

    ``y_bar`` is the working target, ``y_hat`` its rank-1 modal fit built from
    ``dim1`` (the vector ``c_f a_{f,1}``) and the mode vectors of ``poles``
    (dimensions 2..R).
    """

    y_bar: np.ndarray
    y_hat: np.ndarray | None = None
    dim1: np.ndarray | None = None
    poles: tuple[complex, ...] | None = None
    estimates: dict[int, DimEstimate] = field(default_factory=dict)
    kept_previous: bool = False


@dataclass
class MtsmResult:
    modes: list[RdMode]
    residual_norms: list[float]
    sweep_residuals: list[list[float]]
    components: list[ComponentState]
    dim1_eigenvalues: np.ndarray
    flags: tuple[str, ...] = ()


def subspace_basis(y1: np.ndarray, n_modes: int, rtol: float = 1e-12) -> np.ndarray:
    """Left singular vectors of the ``n_modes`` largest singular values of ``y1``."""
    y1 = np.asarray(y1)
    if n_modes >= y1.shape[0]:
        raise IdentifiabilityError(
            f"need fewer modes ({n_modes}) than samples in dimension 1 ({y1.shape[0]})"
        )
    u, s, _ = np.linalg.svd(y1, full_matrices=False)
    if s.size < n_modes or s[n_modes - 1] <= rtol * s[0]:
        raise IdentifiabilityError(f"data have rank below {n_modes}")
    return u[:, :n_modes]


def estimate_a1(u_f: np.ndarray, cond_max: float = 1e8) -> tuple[np.ndarray, np.ndarray]:
    """Dimension-1 factor matrix from a signal-subspace basis.

    Solves the shift-invariance pencil ``pinv(U[:-1]) U[1:] = T D T^-1``; the
    eigenvectors ``T`` map the basis onto the Vandermonde columns, ``U T``,
    which are rescaled to a leading entry of 1. Columns are ordered by the
    angle of the eigenvalues.

    Returns:
        ``(A1, eigenvalues)``.
    """
    u_f = np.asarray(u_f)
    if u_f.shape[0] < 2:
        raise IdentifiabilityError("dimension 1 needs at least 2 samples")
    psi = np.linalg.pinv(u_f[:-1]) @ u_f[1:]
    evals, t = np.linalg.eig(psi)
    if np.linalg.cond(t) > cond_max:
        raise IdentifiabilityError(
            "shift-invariance eigenproblem is near defective (repeated dimension-1 modes?)"
        )
    order = np.argsort(np.angle(evals) % (2 * np.pi), kind="stable")
    evals, t = evals[order], t[:, order]
    a1 = u_f @ t
    lead = a1[0]
    if np.any(np.abs(lead) < 1e-12 * np.linalg.norm(a1, axis=0)):
        raise IdentifiabilityError("factor column with vanishing leading entry")
    return a1 / lead, evals


def separate(y: np.ndarray, a1: np.ndarray) -> list[np.ndarray]:
    """Split ``y`` into one single-mode tensor per column of ``a1``."""
    a1 = np.asarray(a1)
    if np.linalg.matrix_rank(a1) < a1.shape[1]:
        raise IdentifiabilityError("dimension-1 factor matrix is rank deficient")
    s = contract_mode(y, 0, np.linalg.pinv(a1))
    return [contract_mode(s[f : f + 1], 0, a1[:, f : f + 1]) for f in range(a1.shape[1])]


def _fit_dim1(y_bar: np.ndarray, poles) -> tuple[np.ndarray, np.ndarray]:
    sizes = y_bar.shape
    vecs = [mode_vector(a, n) for a, n in zip(poles, sizes[1:])]
    # column index of unfold(., 0) runs over kron(a_R, ..., a_2)
    k = kron(*vecs[::-1]) if vecs else np.ones(1, dtype=np.complex128)
    b = unfold(y_bar, 0) @ k.conj() / np.vdot(k, k).real
    return b, rank1(1.0, [b, *vecs])


def component_update(
    state: ComponentState, cfg: MultigridConfig, keep_best: bool = True
) -> ComponentState:
    """Refit one component.

    Runs the single-tone estimator on dimensions 2..R of ``state.y_bar``,
    solves the least-squares problem for the dimension-1 vector, and rebuilds
    the rank-1 fit. With ``keep_best`` the previous mode estimates are refitted
    too and kept when they explain ``y_bar`` better.
    """
    y_bar = np.asarray(state.y_bar)
    dims = range(1, y_bar.ndim)
    est = stsm(y_bar, cfg, dims=dims).dims if y_bar.ndim > 1 else {}
    poles = tuple(est[r].pole for r in dims)
    b, y_hat = _fit_dim1(y_bar, poles)
    new = ComponentState(y_bar, y_hat, b, poles, est)
    if keep_best and state.poles is not None:
        b_old, y_old = _fit_dim1(y_bar, state.poles)
        if frob_norm(y_bar - y_old) < frob_norm(y_bar - y_hat):
            new = ComponentState(y_bar, y_old, b_old, state.poles, state.estimates, True)
    return new


def _check_preconditions(y: np.ndarray, n_modes: int) -> None:
    if n_modes >= y.shape[0]:
        raise IdentifiabilityError(
            f"need fewer modes ({n_modes}) than samples in dimension 1 ({y.shape[0]})"
        )
    if any(m < 2 for m in y.shape[1:]):
        raise IdentifiabilityError("dimensions 2..R need at least 2 samples each")


def mtsm(y: np.ndarray, cfg: MtsmConfig) -> MtsmResult:
    """Estimate ``cfg.f_modes`` paired R-D modes from ``y``.

    ``residual_norms[i]`` is ``||y - sum_f y_hat_f||`` after sweep ``i``
    (``i = 0`` is the initialization); ``sweep_residuals[i-1]`` lists the
    chained residual norms within sweep ``i``.
    """
    y = np.asarray(y, dtype=np.complex128)
    n_modes = cfg.f_modes
    _check_preconditions(y, n_modes)
    flags: set[str] = set()

    u_f = subspace_basis(unfold(y, 0), n_modes)
    a1, evals = estimate_a1(u_f)
    if n_modes > 1:
        gaps = np.abs(evals[:, None] - evals[None, :])[np.triu_indices(n_modes, 1)]
        if gaps.min() < 1e-6:
            flags.add("close_dim1_modes")

    states = [
        component_update(ComponentState(y_bar), cfg.stsm, cfg.keep_best)
        for y_bar in separate(y, a1)
    ]
    resid = y - sum(s.y_hat for s in states)
    residual_norms = [frob_norm(resid)]
    sweep_residuals = []
    for _ in range(cfg.k_iters):
        sweep = [frob_norm(resid)]
        for f, state in enumerate(states):
            y_bar = state.y_hat + resid
            states[f] = component_update(replace(state, y_bar=y_bar), cfg.stsm, cfg.keep_best)
            resid = y_bar - states[f].y_hat
            sweep.append(frob_norm(resid))
        sweep_residuals.append(sweep)
        residual_norms.append(frob_norm(resid))

    modes = []
    for state in states:
        first = estimate_dimension(unfold(state.y_hat + resid, 0), cfg.stsm)
        rest = [state.estimates[r] for r in range(1, y.ndim)] if state.estimates else []
        est = [first, *rest]
        for e in est:
            flags.update(e.flags)
        modes.append(RdMode([e.freq for e in est], [e.damp for e in est], complex(state.dim1[0])))
    return MtsmResult(modes, residual_norms, sweep_residuals, states, evals, tuple(sorted(flags)))
