"""Monte-Carlo experiments: preset signals, RMSE vs CRLB tables, timing runs."""

from __future__ import annotations

import csv
import io
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Sequence

import numpy as np
import yaml

from .crlb import crlb_for_signal
from .dictionary import perturbed_freq_grid
from .mtsm import MtsmConfig, mtsm
from .signal import (
    RdMode,
    SignalSpec,
    add_noise,
    make_rng,
    match_modes,
    sigma_for_snr,
    squared_errors,
    synthesize,
    trial_seed,
    wrap_freq,
)
from .stsm import MultigridConfig, stsm_mode

RESULTS_SCHEMA = "rdsparse-results/1"
SCALING_SCHEMA = "rdsparse-scaling/1"

RESULT_COLUMNS = (
    "snr_db",
    "rmse_freq_total",
    "rmse_damp_total",
    "sqrt_crlb_freq_total",
    "sqrt_crlb_damp_total",
    "trials",
    "failures",
    "pairing_mistakes",
)


def _modes(rows) -> tuple[RdMode, ...]:
    return tuple(RdMode(f, d, c) for f, d, c in rows)


PRESETS: dict[str, SignalSpec] = {
    "signal1": SignalSpec((10, 10), _modes([((0.22, 0.34), (-0.011, -0.015), 1)])),
    "signal2": SignalSpec(
        (8, 8, 8),
        _modes(
            [
                ((0.40, 0.1, 0.1), (-0.01, -0.01, -0.01), 1),
                ((0.20, 0.3, 0.25), (-0.01, -0.15, -0.01), 1),
            ]
        ),
    ),
    "signal3": SignalSpec(
        (10, 10, 10),
        _modes(
            [
                ((0.30, 0.31, 0.22), (-0.01, -0.01, -0.01), 1),
                ((0.10, 0.45, 0.11), (-0.01, -0.015, -0.01), 1),
                ((0.20, 0.31, 0.11), (-0.01, -0.01, -0.01), 1),
            ]
        ),
    ),
    "signal4": SignalSpec(
        (10, 10, 10),
        _modes(
            [
                ((0.28, 0.31, 0.22), (-0.01, -0.01, -0.01), 1),
                ((0.12, 0.45, 0.11), (-0.01, -0.015, -0.01), 1),
                ((0.20, 0.31, 0.11), (-0.01, -0.01, -0.01), 1),
            ]
        ),
    ),
    "signal5": SignalSpec(
        (10, 3, 3),
        _modes(
            [
                ((0.30, 0.1, 0.1), (-0.01, -0.01, -0.01), 1),
                ((0.13, 0.45, 0.4), (-0.01, -0.015, -0.01), 1),
                ((0.20, 0.31, 0.1), (-0.01, -0.01, -0.01), 1),
                ((0.42, 0.22, 0.32), (-0.012, -0.01, -0.01), 1),
            ]
        ),
    ),
}


def preset(name: str) -> SignalSpec:
    try:
        return PRESETS[name]
    except KeyError:
        raise KeyError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None


def parse_snr(text: str) -> tuple[float, ...]:
    """``"a:b:step"`` (inclusive), ``"a,b,c"`` or a single value."""
    text = str(text).strip()
    if ":" in text:
        a, b, step = (float(v) for v in text.split(":"))
        if step <= 0:
            raise ValueError("SNR step must be positive")
        n = int(math.floor((b - a) / step + 1e-9)) + 1
        return tuple(round(a + k * step, 10) for k in range(n))
    return tuple(float(v) for v in text.split(","))


@dataclass(frozen=True)
class ExperimentConfig:
    signal: str | SignalSpec = "signal1"
    snr_db: tuple[float, ...] = (0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0)
    trials: int = 200
    estimator: str | None = None
    multigrid: MultigridConfig = field(default_factory=MultigridConfig)
    k_iters: int = 2
    master_seed: int = 0
    dim_permutation: tuple[int, ...] | None = None
    grid_jitter: float = 0.25
    output: str | None = None
    workers: int = 1

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        object.__setattr__(self, "snr_db", tuple(float(s) for s in self.snr_db))
        if self.dim_permutation is not None:
            object.__setattr__(self, "dim_permutation", tuple(self.dim_permutation))
        if self.estimator not in (None, "stsm", "mtsm"):
            raise ValueError(f"unknown estimator {self.estimator!r}")

    def spec(self) -> SignalSpec:
        sig = preset(self.signal) if isinstance(self.signal, str) else self.signal
        if self.dim_permutation is not None:
            sig = sig.permuted(self.dim_permutation)
        return sig

    def resolved_estimator(self) -> str:
        if self.estimator is not None:
            return self.estimator
        return "stsm" if self.spec().n_modes == 1 else "mtsm"

    def to_dict(self) -> dict:
        sig = self.signal if isinstance(self.signal, str) else self.signal.to_dict()
        mg = asdict(self.multigrid)
        mg.pop("initial_freqs")
        return {
            "signal": sig,
            "snr_db": list(self.snr_db),
            "trials": self.trials,
            "estimator": self.resolved_estimator(),
            "multigrid": mg,
            "k_iters": self.k_iters,
            "master_seed": self.master_seed,
            "dim_permutation": list(self.dim_permutation) if self.dim_permutation else None,
            "grid_jitter": self.grid_jitter,
            "output": self.output,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        d = dict(d)
        kw = {}
        if "signal" in d:
            sig = d.pop("signal")
            kw["signal"] = sig if isinstance(sig, str) else SignalSpec.from_dict(sig)
        if "snr_db" in d:
            snr = d.pop("snr_db")
            kw["snr_db"] = parse_snr(snr) if isinstance(snr, str) else tuple(np.atleast_1d(snr))
        if "multigrid" in d:
            kw["multigrid"] = MultigridConfig(**(d.pop("multigrid") or {}))
        if "seed" in d:
            kw["master_seed"] = d.pop("seed")
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        kw.update(d)
        return cls(**kw)


def load_config(path) -> ExperimentConfig:
    with open(path) as fh:
        return ExperimentConfig.from_dict(yaml.safe_load(fh) or {})


@dataclass
class TrialOutcome:
    sq_freq: float = 0.0
    sq_damp: float = 0.0
    runtime_ms: float = 0.0
    ok: bool = True
    pairing_mistake: bool = False
    error: str = ""
    modes: tuple[RdMode, ...] = ()
    residual_norms: tuple[float, ...] = ()


@dataclass
class ResultRow:
    snr_db: float
    rmse_freq_total: float
    rmse_damp_total: float
    sqrt_crlb_freq_total: float
    sqrt_crlb_damp_total: float
    mean_runtime_ms: float
    trials: int
    failures: int
    pairing_mistakes: int = 0


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    rows: list[ResultRow]
    outcomes: dict[float, list[TrialOutcome]]


def pairing_mistake(truth: Sequence[RdMode], estimate: Sequence[RdMode]) -> bool:
    """True when some estimated coordinate is nearer another mode's value than its own.

    Modes are first matched on their full frequency vectors; coordinates that
    two true modes share are never counted as mistakes.
    """
    perm = match_modes(truth, estimate)
    for f, m in enumerate(truth):
        e = estimate[perm[f]]
        for r in range(m.ndim):
            own = abs(wrap_freq(e.freqs[r] - m.freqs[r]))
            for g, other in enumerate(truth):
                if g == f or abs(wrap_freq(other.freqs[r] - m.freqs[r])) < 1e-12:
                    continue
                if abs(wrap_freq(e.freqs[r] - other.freqs[r])) < own:
                    return True
    return False


def estimate(y: np.ndarray, n_modes: int, estimator: str, mg: MultigridConfig, k_iters: int):
    """Run the chosen estimator; returns ``(modes, residual_norms)``."""
    if estimator == "stsm":
        if n_modes != 1:
            raise ValueError("the single-tone estimator handles exactly one mode")
        return (stsm_mode(y, mg),), ()
    res = mtsm(y, MtsmConfig(n_modes, k_iters, mg))
    return tuple(res.modes), tuple(res.residual_norms)


def run_trial(
    cfg: ExperimentConfig, snr_index: int, trial: int, clean: np.ndarray | None = None
) -> TrialOutcome:
    spec = cfg.spec()
    clean = synthesize(spec) if clean is None else clean
    sigma2 = sigma_for_snr(clean, cfg.snr_db[snr_index])
    rng = make_rng(trial_seed(cfg.master_seed, snr_index, trial))
    noisy = add_noise(clean, sigma2, rng)
    mg = cfg.multigrid
    if cfg.grid_jitter > 0:
        grid = perturbed_freq_grid(mg.n_freq0, rng, cfg.grid_jitter)
        mg = replace(mg, initial_freqs=tuple(grid.points))
    t0 = time.perf_counter()
    try:
        modes, norms = estimate(noisy, spec.n_modes, cfg.resolved_estimator(), mg, cfg.k_iters)
    except (ValueError, np.linalg.LinAlgError) as exc:
        return TrialOutcome(ok=False, error=f"{type(exc).__name__}: {exc}")
    runtime = (time.perf_counter() - t0) * 1e3
    return TrialOutcome(
        sq_freq=squared_errors(spec.modes, modes, "frequency"),
        sq_damp=squared_errors(spec.modes, modes, "damping"),
        runtime_ms=runtime,
        pairing_mistake=spec.n_modes > 1 and pairing_mistake(spec.modes, modes),
        modes=modes,
        residual_norms=norms,
    )


def _trial_job(args):
    cfg, snr_index, trial = args
    return run_trial(cfg, snr_index, trial)


def _aggregate(spec: SignalSpec, snr: float, sigma2: float, outs: list[TrialOutcome]) -> ResultRow:
    good = [o for o in outs if o.ok]
    scale = spec.ndim * spec.n_modes
    if good:
        rmse_f = math.sqrt(math.fsum(o.sq_freq for o in good) / len(good) / scale)
        rmse_d = math.sqrt(math.fsum(o.sq_damp for o in good) / len(good) / scale)
        runtime = math.fsum(o.runtime_ms for o in good) / len(good)
    else:
        rmse_f = rmse_d = runtime = float("nan")
    bound = crlb_for_signal(spec, sigma2)
    return ResultRow(
        snr_db=snr,
        rmse_freq_total=rmse_f,
        rmse_damp_total=rmse_d,
        sqrt_crlb_freq_total=bound.total_sqrt("frequency"),
        sqrt_crlb_damp_total=bound.total_sqrt("damping"),
        mean_runtime_ms=runtime,
        trials=len(outs),
        failures=len(outs) - len(good),
        pairing_mistakes=sum(o.pairing_mistake for o in good),
    )


def run_experiment(cfg: ExperimentConfig, write: bool = True) -> ExperimentResult:
    """Seeded Monte-Carlo RMSE sweep over ``cfg.snr_db``.

    Every trial draws its noise and grid jitter from a stream derived from
    ``(master_seed, snr index, trial index)``, so results do not depend on
    the worker count. When ``cfg.output`` is set and ``write`` is true the
    result, timing, meta and curve files are written with that prefix.
    """
    spec = cfg.spec()
    clean = synthesize(spec)
    rows, outcomes = [], {}
    pool = ProcessPoolExecutor(cfg.workers) if cfg.workers > 1 else None
    try:
        for k, snr in enumerate(cfg.snr_db):
            jobs = [(cfg, k, p) for p in range(cfg.trials)]
            if pool is None:
                outs = [run_trial(cfg, k, p, clean) for p in range(cfg.trials)]
            else:
                outs = list(pool.map(_trial_job, jobs, chunksize=max(1, cfg.trials // (4 * cfg.workers))))
            outcomes[snr] = outs
            rows.append(_aggregate(spec, snr, sigma_for_snr(clean, snr), outs))
    finally:
        if pool is not None:
            pool.shutdown()
    result = ExperimentResult(cfg, rows, outcomes)
    if write and cfg.output:
        write_outputs(result, cfg.output)
    return result


def _fmt(x: float) -> str:
    return "nan" if not math.isfinite(x) else format(x, ".12g")


def results_csv(rows: Sequence[ResultRow]) -> str:
    buf = io.StringIO()
    buf.write(f"# schema: {RESULTS_SCHEMA}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(RESULT_COLUMNS)
    for r in rows:
        w.writerow(
            [
                _fmt(r.snr_db),
                _fmt(r.rmse_freq_total),
                _fmt(r.rmse_damp_total),
                _fmt(r.sqrt_crlb_freq_total),
                _fmt(r.sqrt_crlb_damp_total),
                r.trials,
                r.failures,
                r.pairing_mistakes,
            ]
        )
    return buf.getvalue()


def curves_dat(rows: Sequence[ResultRow]) -> str:
    """Plot data: one ``# curve: name`` block of ``x y`` lines per series."""
    names = ("rmse_freq_total", "sqrt_crlb_freq_total", "rmse_damp_total", "sqrt_crlb_damp_total")
    blocks = []
    for name in names:
        lines = [f"# curve: {name}"]
        lines += [f"{_fmt(r.snr_db)} {_fmt(getattr(r, name))}" for r in rows]
        blocks.append("\n".join(lines))
    return "\n\n\n".join(blocks) + "\n"


def write_outputs(result: ExperimentResult, prefix: str) -> dict[str, Path]:
    prefix_path = Path(prefix)
    prefix_path.parent.mkdir(parents=True, exist_ok=True)
    paths = {
        "results": Path(f"{prefix}_results.csv"),
        "timing": Path(f"{prefix}_timing.csv"),
        "meta": Path(f"{prefix}_meta.txt"),
        "curves": Path(f"{prefix}_curves.dat"),
    }
    paths["results"].write_text(results_csv(result.rows))
    with paths["timing"].open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("snr_db", "mean_runtime_ms"))
        for r in result.rows:
            w.writerow((_fmt(r.snr_db), _fmt(r.mean_runtime_ms)))
    meta = {
        "schema": RESULTS_SCHEMA,
        "config": result.config.to_dict(),
        "notes": {
            "snr": "mean per-sample signal power over noise variance",
            "grid_perturbation": f"uniform in +/-{result.config.grid_jitter} initial frequency spacings, per trial",
            "crlb_columns": "sqrt of the mean CRLB over modes and dimensions (frequency in cycles/sample)",
        },
    }
    paths["meta"].write_text(yaml.safe_dump(meta, sort_keys=True))
    paths["curves"].write_text(curves_dat(result.rows))
    return paths


# --- scaling -----------------------------------------------------------------


@dataclass
class ScalingResult:
    m1: list[int]
    mean_ms: list[float]
    std_ms: list[float]
    exponent: float

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(f"# schema: {SCALING_SCHEMA}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(("M1", "mean_ms", "std_ms"))
        for row in zip(self.m1, self.mean_ms, self.std_ms):
            w.writerow((row[0], _fmt(row[1]), _fmt(row[2])))
        buf.write(f"# fit exponent: {_fmt(self.exponent)}\n")
        return buf.getvalue()


def scaling_signal(m1: int, n_modes: int = 2, other: int = 4) -> SignalSpec:
    """3-D test signal of size ``m1 x other x other`` reusing preset mode parameters."""
    source = PRESETS["signal2"].modes if n_modes <= 2 else PRESETS["signal5"].modes
    if n_modes > len(source):
        raise ValueError(f"at most {len(source)} modes available")
    return SignalSpec((m1, other, other), source[:n_modes])


def fit_exponent(m1: Sequence[float], times: Sequence[float]) -> float:
    """Slope of the least-squares line through ``log time`` vs ``log M1``."""
    return float(np.polyfit(np.log(m1), np.log(times), 1)[0])


def run_scaling(
    m1_values: Sequence[int],
    n_modes: int = 2,
    trials: int = 5,
    snr_db: float = 20.0,
    master_seed: int = 0,
    multigrid: MultigridConfig | None = None,
    estimator: str = "mtsm",
    output: str | None = None,
) -> ScalingResult:
    """Mean wall time of one estimator run versus the first dimension size."""
    m1_values = [int(m) for m in m1_values]
    if any(b <= a for a, b in zip(m1_values, m1_values[1:])):
        raise ValueError("sizes must be increasing")
    mg = multigrid or MultigridConfig()
    means, stds = [], []
    for k, m1 in enumerate(m1_values):
        spec = scaling_signal(m1, n_modes) if estimator == "mtsm" else SignalSpec(
            (m1, 4, 4), PRESETS["signal2"].modes[:1]
        )
        clean = synthesize(spec)
        sigma2 = sigma_for_snr(clean, snr_db)
        times = []
        # one warm-up run keeps first-call overhead out of the timings
        for p in range(-1, trials):
            noisy = add_noise(clean, sigma2, make_rng(trial_seed(master_seed, k, p + 1)))
            t0 = time.perf_counter()
            estimate(noisy, spec.n_modes, estimator, mg, 2)
            if p >= 0:
                times.append((time.perf_counter() - t0) * 1e3)
        means.append(float(np.mean(times)))
        stds.append(float(np.std(times)))
    result = ScalingResult(m1_values, means, stds, fit_exponent(m1_values, means))
    if output:
        path = Path(f"{output}_scaling.csv")
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(result.to_csv())
    return result
