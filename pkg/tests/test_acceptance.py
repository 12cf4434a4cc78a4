"""Acceptance suite: one test per criterion, each at its stated tolerance.

Every test records a one-line PASS/FAIL summary; the lines are printed at the
end of the pytest run (see ``conftest.py``) and by ``python3 tests/test_acceptance.py``.
"""

from __future__ import annotations

import filecmp
import math
import sys
import time
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from oracles import central_difference, exhaustive_support, random_somp_case  # noqa: E402

from rdsparse.crlb import crlb_general, crlb_single_mode, jacobian, model_mean, split_theta  # noqa: E402
from rdsparse.harness import ExperimentConfig, run_experiment, run_scaling, preset  # noqa: E402
from rdsparse.mtsm import MtsmConfig, mtsm  # noqa: E402
from rdsparse.signal import add_noise, make_rng, mode_vector, sigma_for_snr, synthesize, trial_seed  # noqa: E402
from rdsparse.somp import SompConfig, somp  # noqa: E402
from rdsparse.stsm import MultigridConfig, estimate_damping, estimate_frequency  # noqa: E402

SUMMARY: dict[int, str] = {}


def record(number: int, ok: bool, detail: str) -> None:
    SUMMARY[number] = f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    print(SUMMARY[number])
    assert ok, SUMMARY[number]


def _rel(a, b):
    return float(np.max(np.abs(np.asarray(a) - np.asarray(b)) / np.abs(np.asarray(b))))


def _random_theta(rng, n_dims, n_modes):
    return np.concatenate(
        [
            rng.uniform(0, 2 * np.pi, n_dims * n_modes),
            rng.uniform(-0.1, 0, n_dims * n_modes),
            rng.uniform(0.5, 2, n_modes),
            rng.uniform(-np.pi, np.pi, n_modes),
        ]
    )


def _random_config(rng):
    # redraw until there are clearly more real observations than parameters
    while True:
        n_dims, n_modes = int(rng.integers(1, 4)), int(rng.integers(1, 4))
        sizes = tuple(int(s) for s in rng.integers(3, 7, n_dims))
        if math.prod(sizes) >= 2 * (n_dims + 1) * n_modes + 4:
            return sizes, _random_theta(rng, n_dims, n_modes)


def test_criterion_01_crlb_values():
    t0 = time.perf_counter()
    rep = crlb_general([2 * np.pi * 0.22, 2 * np.pi * 0.34, 0.0, 0.0, 1.0, 0.0], 1.0, (10, 10))
    target = 6.0 / (100 * (10**2 - 1))
    err_ref = _rel(rep.omega[0], target)
    errs = []
    for alpha in (-1e-8, 0.0, -0.01, -0.1):
        gen = crlb_general([1.1, 2.3, alpha, alpha, 1.0, 0.0], 1.0, (10, 10))
        closed = crlb_single_mode([alpha, alpha], (10, 10), 1.0, 1.0)
        errs.append(
            max(
                _rel(closed.omega, gen.omega[0]),
                _rel(closed.alpha, gen.alpha[0]),
                _rel(closed.phi, gen.phi[0]),
                _rel(closed.lam, gen.lam[0]),
            )
        )
    elapsed = time.perf_counter() - t0
    ok = err_ref <= 1e-8 and max(errs) <= 1e-8 and elapsed < 1.0
    record(
        1,
        ok,
        f"CRLB(w)={rep.omega[0][0]:.6e} (target {target:.6e}, rel {err_ref:.1e}); "
        f"closed vs general max rel {max(errs):.1e}; {elapsed * 1e3:.0f} ms",
    )


def test_criterion_02_bound_identities():
    rng = np.random.default_rng(2)
    worst = 0.0
    for _ in range(10):
        sizes, theta = _random_config(rng)
        rep = crlb_general(theta, float(rng.uniform(0.1, 2)), sizes)
        _, _, lam, _ = split_theta(theta, len(sizes))
        worst = max(worst, _rel(rep.omega, rep.alpha), _rel(rep.lam, lam**2 * rep.phi))
    record(2, worst <= 1e-10, f"max relative deviation {worst:.1e} over 10 configurations")


def test_criterion_03_jacobian_fd():
    rng = np.random.default_rng(3)
    worst = 0.0
    for _ in range(10):
        sizes, theta = _random_config(rng)
        an = jacobian(theta, sizes)
        fd = central_difference(lambda th: model_mean(th, sizes), theta)
        worst = max(worst, float(np.max(np.linalg.norm(an - fd, axis=0) / np.linalg.norm(an, axis=0))))
    record(3, worst <= 1e-5, f"max column relative error {worst:.1e} over 10 draws")


def test_criterion_04_noiseless_frequency_convergence():
    rng = np.random.default_rng(4)
    worst_ratio, monotone_fail = 0.0, 0
    for M in (5, 10, 16):
        cfg = MultigridConfig(n_freq0=M, eta_nu=3, levels=3)
        bound = (1.0 / M) / 4**3
        for _ in range(200):
            nu, alpha = rng.uniform(0, 1), -rng.uniform(0, 0.2)
            y = mode_vector(np.exp(alpha + 2j * np.pi * nu), M)
            est, path = estimate_frequency(y[:, None], cfg)
            dist = [abs((p - nu + 0.5) % 1 - 0.5) for p in path]
            worst_ratio = max(worst_ratio, dist[-1] / bound)
            monotone_fail += any(b > a + 1e-15 for a, b in zip(dist, dist[1:]))
    ok = worst_ratio <= 1.0 and monotone_fail == 0
    record(4, ok, f"max error / bound {worst_ratio:.3f}; non-monotone paths {monotone_fail}/600")


def test_criterion_05_damping_convergence():
    rng = np.random.default_rng(5)
    M, nu = 10, 0.3
    worst = {}
    for eta, levels in ((11, 2), (3, 4)):
        cfg = MultigridConfig(n_damp0=2, beta_min=-2.0, eta_alpha=eta, levels=levels)
        bound = 2.0 / (eta + 1) ** levels
        ratio = 0.0
        for _ in range(100):
            alpha = -rng.uniform(0, 2)
            y = mode_vector(np.exp(alpha + 2j * np.pi * nu), M)
            est, _ = estimate_damping(y[:, None], nu, cfg)
            ratio = max(ratio, abs(est - alpha) / bound)
        worst[(eta, levels)] = ratio
    ok = all(r <= 1.0 for r in worst.values())
    detail = "; ".join(f"eta={e} L={l}: max error / bound {r:.3f}" for (e, l), r in worst.items())
    record(5, ok, detail)


def test_criterion_06_somp_exhaustive():
    rng = np.random.default_rng(6)
    agree = 0
    for _ in range(100):
        k = int(rng.integers(1, 3))
        n = int(rng.integers(max(k, 3), 13))
        q, y, _ = random_somp_case(rng, m=16, n=n, k=k, cols=int(rng.integers(1, 4)))
        sol = somp(y, q, SompConfig(max_iter=k))
        best, _ = exhaustive_support(y, q, k)
        agree += set(sol.omega) == best
    record(6, agree == 100, f"SOMP support equals exhaustive optimum in {agree}/100 cases")


def test_criterion_07_residual_monotonicity():
    spec = preset("signal3")
    clean = synthesize(spec)
    sigma2 = sigma_for_snr(clean, 10)
    bad, worst = 0, -np.inf
    for p in range(100):
        y = add_noise(clean, sigma2, make_rng(trial_seed(7, p)))
        r = mtsm(y, MtsmConfig(3)).residual_norms
        steps = [b - a for a, b in zip(r, r[1:])]
        worst = max(worst, max(steps))
        bad += any(s > 1e-12 * r[0] for s in steps)
    record(7, bad == 0, f"runs with a residual increase: {bad}/100 (largest step {worst:.2e})")


def test_criterion_08_signal2_crlb_trend():
    cfg = ExperimentConfig(signal="signal2", snr_db=(10, 20, 30), trials=100, master_seed=8)
    rows = run_experiment(cfg).rows
    ratios = [r.rmse_freq_total / r.sqrt_crlb_freq_total for r in rows]
    rmse = [r.rmse_freq_total for r in rows]
    decreasing = all(b < a for a, b in zip(rmse, rmse[1:]))
    ok = all(x <= 3 for x in ratios) and decreasing and all(r.failures == 0 for r in rows)
    detail = ", ".join(f"{r.snr_db:g} dB: {x:.2f}x" for r, x in zip(rows, ratios))
    record(8, ok, f"RMSE / sqrt-CRLB {detail}; decreasing={decreasing}")


def test_criterion_09_signal1_near_crlb():
    mg = MultigridConfig(n_freq0=20, eta_nu=21, levels=2)
    cfg = ExperimentConfig(
        signal="signal1", snr_db=tuple(range(5, 45, 5)), trials=200, multigrid=mg, master_seed=9
    )
    rows = run_experiment(cfg).rows
    ratios = [r.rmse_freq_total / r.sqrt_crlb_freq_total for r in rows]
    detail = ", ".join(f"{r.snr_db:g}:{x:.2f}" for r, x in zip(rows, ratios))
    record(9, all(x <= 2 for x in ratios), f"RMSE / sqrt-CRLB by SNR dB {detail}")


def test_criterion_10_pairing():
    parts, ok = [], True
    for name in ("signal3", "signal4"):
        cfg = ExperimentConfig(signal=name, snr_db=(20,), trials=100, master_seed=10)
        row = run_experiment(cfg).rows[0]
        clean_runs = row.trials - row.failures - row.pairing_mistakes
        ok &= clean_runs >= 95
        parts.append(f"{name}: {clean_runs}/100 without pairing mistakes")
    record(10, ok, "; ".join(parts))


def test_criterion_11_scaling():
    res = run_scaling([64, 128, 256, 512], n_modes=2, trials=7, master_seed=11)
    times = ", ".join(f"{m}:{t:.1f}ms" for m, t in zip(res.m1, res.mean_ms))
    record(11, res.exponent <= 1.3, f"fit exponent {res.exponent:.3f} ({times})")


def test_criterion_12_determinism(tmp_path):
    base = dict(signal="signal2", snr_db=(10, 20), trials=10, master_seed=12)
    a = ExperimentConfig(output=str(tmp_path / "a"), **base)
    b = ExperimentConfig(output=str(tmp_path / "b"), **base)
    run_experiment(a)
    run_experiment(b)
    same = filecmp.cmp(tmp_path / "a_results.csv", tmp_path / "b_results.csv", shallow=False)
    same_curves = filecmp.cmp(tmp_path / "a_curves.dat", tmp_path / "b_curves.dat", shallow=False)
    record(12, same and same_curves, f"results CSV identical={same}, curves identical={same_curves}")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
