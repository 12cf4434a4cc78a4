"""R-D modal signal synthesis, noise, SNR and the total-RMSE metric."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

from .tensor import frob_norm, rank1


@dataclass(frozen=True)
class RdMode:
    """One R-D damped complex exponential.

    Attributes:
        freqs: normalized frequencies, one per dimension, in [0, 1).
        damps: damping factors (<= 0), one per dimension.
        amplitude: complex amplitude ``c = lambda * exp(j*phi)``.
    """

    freqs: tuple[float, ...]
    damps: tuple[float, ...]
    amplitude: complex = 1.0 + 0j

    def __post_init__(self):
        object.__setattr__(self, "freqs", tuple(float(v) for v in self.freqs))
        object.__setattr__(self, "damps", tuple(float(v) for v in self.damps))
        object.__setattr__(self, "amplitude", complex(self.amplitude))
        if len(self.freqs) != len(self.damps):
            raise ValueError("freqs and damps must have the same length")
        if len(self.freqs) == 0:
            raise ValueError("a mode needs at least one dimension")

    @property
    def ndim(self) -> int:
        return len(self.freqs)

    @property
    def poles(self) -> np.ndarray:
        """Mode coordinates ``a_r = exp(alpha_r + 2j*pi*nu_r)``."""
        return np.exp(np.asarray(self.damps) + 2j * np.pi * np.asarray(self.freqs))

    def validate(self) -> None:
        """Raise if the mode violates the model's parameter domain."""
        if any(not 0.0 <= v < 1.0 for v in self.freqs):
            raise ValueError(f"frequencies must lie in [0, 1): {self.freqs}")
        if any(d > 0.0 for d in self.damps):
            raise ValueError(f"damping factors must be <= 0: {self.damps}")
        if abs(self.amplitude) == 0.0:
            raise ValueError("mode amplitude must be nonzero")


@dataclass(frozen=True)
class SignalSpec:
    sizes: tuple[int, ...]
    modes: tuple[RdMode, ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "sizes", tuple(int(s) for s in self.sizes))
        object.__setattr__(self, "modes", tuple(self.modes))
        if any(s < 1 for s in self.sizes):
            raise ValueError(f"sizes must be positive: {self.sizes}")
        if len(self.modes) < 1:
            raise ValueError("a signal needs at least one mode")
        for m in self.modes:
            if m.ndim != len(self.sizes):
                raise ValueError("every mode must have one coordinate per dimension")
            m.validate()

    @property
    def ndim(self) -> int:
        return len(self.sizes)

    @property
    def n_modes(self) -> int:
        return len(self.modes)

    def permuted(self, order: Sequence[int]) -> "SignalSpec":
        """Return the same signal with its dimensions reordered."""
        order = list(order)
        if sorted(order) != list(range(self.ndim)):
            raise ValueError(f"{order} is not a permutation of {self.ndim} dimensions")
        modes = tuple(
            RdMode(
                [m.freqs[k] for k in order], [m.damps[k] for k in order], m.amplitude
            )
            for m in self.modes
        )
        return SignalSpec([self.sizes[k] for k in order], modes)

    def to_dict(self) -> dict:
        return {
            "sizes": list(self.sizes),
            "modes": [
                {
                    "freqs": list(m.freqs),
                    "damps": list(m.damps),
                    "amplitude": [m.amplitude.real, m.amplitude.imag],
                }
                for m in self.modes
            ],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SignalSpec":
        modes = []
        for m in d["modes"]:
            amp = m.get("amplitude", 1.0)
            if isinstance(amp, (list, tuple)):
                amp = complex(amp[0], amp[1])
            modes.append(RdMode(m["freqs"], m["damps"], amp))
        return cls(d["sizes"], modes)


def mode_vector(a: complex, length: int) -> np.ndarray:
    """Vandermonde vector ``[1, a, a**2, ..., a**(length-1)]``."""
    if length < 1:
        raise ValueError("length must be >= 1")
    return np.power(complex(a), np.arange(length))


def synthesize(spec: SignalSpec) -> np.ndarray:
    """Noise-free tensor ``sum_f c_f a_{f,1} o ... o a_{f,R}``."""
    out = np.zeros(spec.sizes, dtype=np.complex128)
    for m in spec.modes:
        vecs = [mode_vector(a, n) for a, n in zip(m.poles, spec.sizes)]
        out += rank1(m.amplitude, vecs)
    return out


def make_rng(seed) -> np.random.Generator:
    """Seedable PCG64 generator; ``seed`` may be an int or a SeedSequence."""
    return np.random.Generator(np.random.PCG64(seed))


def trial_seed(master_seed: int, *keys: int) -> np.random.SeedSequence:
    """Independent stream for a (master seed, key...) tuple, e.g. one trial."""
    return np.random.SeedSequence([int(master_seed), *(int(k) for k in keys)])


def add_noise(t: np.ndarray, sigma2: float, seed=None) -> np.ndarray:
    """Add circular complex white Gaussian noise of variance ``sigma2``.

    Real and imaginary parts each have variance ``sigma2 / 2``. With
    ``sigma2 == 0`` the input is returned unchanged (as a copy).
    """
    if sigma2 < 0:
        raise ValueError(f"noise variance must be >= 0, got {sigma2}")
    t = np.asarray(t, dtype=np.complex128)
    if sigma2 == 0:
        return t.copy()
    rng = seed if isinstance(seed, np.random.Generator) else make_rng(seed)
    noise = rng.standard_normal(t.shape) + 1j * rng.standard_normal(t.shape)
    return t + math.sqrt(sigma2 / 2.0) * noise


def sigma_for_snr(t: np.ndarray, snr_db: float) -> float:
    """Noise variance giving ``snr_db`` relative to the mean per-sample power of ``t``."""
    t = np.asarray(t)
    power = frob_norm(t) ** 2 / t.size
    if power == 0.0:
        raise ValueError("cannot set an SNR for an all-zero signal")
    return power * 10.0 ** (-snr_db / 10.0)


def wrap_freq(d):
    """Map frequency differences to [-0.5, 0.5)."""
    return (np.asarray(d) + 0.5) % 1.0 - 0.5


def match_modes(truth: Sequence[RdMode], estimate: Sequence[RdMode]) -> np.ndarray:
    """Index into ``estimate`` paired with each true mode.

    Uses a minimum-cost assignment on the total squared (wrapped) frequency
    distance over all dimensions.
    """
    if len(truth) != len(estimate):
        raise ValueError(f"expected {len(truth)} estimated modes, got {len(estimate)}")
    tf = np.array([m.freqs for m in truth])
    ef = np.array([m.freqs for m in estimate])
    cost = (wrap_freq(tf[:, None, :] - ef[None, :, :]) ** 2).sum(axis=2)
    rows, cols = linear_sum_assignment(cost)
    perm = np.empty(len(truth), dtype=int)
    perm[rows] = cols
    return perm


def squared_errors(
    truth: Sequence[RdMode], estimate: Sequence[RdMode], which: str = "frequency"
) -> float:
    """Sum over modes and dimensions of squared errors after mode matching."""
    perm = match_modes(truth, estimate)
    total = 0.0
    for f, m in enumerate(truth):
        e = estimate[perm[f]]
        if which == "frequency":
            d = wrap_freq(np.subtract(e.freqs, m.freqs))
        elif which == "damping":
            d = np.subtract(e.damps, m.damps)
        else:
            raise ValueError(f"unknown parameter kind {which!r}")
        total += float(np.sum(d**2))
    return total


def total_rmse(
    truth: SignalSpec | Sequence[RdMode],
    estimates: Sequence[Sequence[RdMode]],
    which: str = "frequency",
) -> float:
    """Total RMSE over all modes, dimensions and trials.

    ``sqrt( mean_p sum_{f,r} (xi - xi_hat)^2 / (R F) )`` where ``xi`` is a
    frequency or a damping factor.
    """
    modes = truth.modes if isinstance(truth, SignalSpec) else tuple(truth)
    if len(estimates) == 0:
        raise ValueError("need at least one trial")
    ndim, nmodes = modes[0].ndim, len(modes)
    per_trial = [squared_errors(modes, est, which) for est in estimates]
    return math.sqrt(math.fsum(per_trial) / len(per_trial) / (ndim * nmodes))
