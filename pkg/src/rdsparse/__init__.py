"""Sparse multigrid estimation of multidimensional damped modal signals."""

from .crlb import (
    CrlbReport,
    SingularFisherError,
    crlb_for_signal,
    crlb_general,
    crlb_single_mode,
    fisher_information,
    jacobian,
)
from .dictionary import (
    Dictionary,
    Grid1D,
    build_dictionary,
    compute_zeta,
    dicref,
    harmonic_dictionary,
    modal_dictionary,
    uniform_damp_grid,
    uniform_freq_grid,
)
from .harness import ExperimentConfig, ResultRow, preset, run_experiment, run_scaling
from .mtsm import IdentifiabilityError, MtsmConfig, MtsmResult, mtsm
from .signal import RdMode, SignalSpec, add_noise, sigma_for_snr, synthesize, total_rmse
from .somp import SompConfig, SparseSolution, somp
from .stsm import MultigridConfig, StsmResult, stsm, stsm_mode

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
