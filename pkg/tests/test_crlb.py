import math

import numpy as np
import pytest

from rdsparse.crlb import (
    SingularFisherError,
    crlb_for_signal,
    crlb_general,
    crlb_single_mode,
    crlb_undamped_limit,
    exponents,
    index_map,
    jacobian,
    model_mean,
    omega_factor_closed,
    split_theta,
    theta_from_modes,
    v_and_s,
)
from rdsparse.harness import preset
from rdsparse.signal import RdMode, SignalSpec, synthesize

from oracles import central_difference


def random_theta(rng, n_dims, n_modes):
    omega = rng.uniform(0, 2 * np.pi, n_dims * n_modes)
    alpha = rng.uniform(-0.1, 0, n_dims * n_modes)
    lam = rng.uniform(0.5, 2, n_modes)
    phi = rng.uniform(-np.pi, np.pi, n_modes)
    return np.concatenate([omega, alpha, lam, phi])


def test_index_map():
    assert [index_map(0, r, (3, 4)) for r in range(2)] == [0, 0]
    assert [index_map(4, r, (3, 4)) for r in range(2)] == [1, 0]
    assert [index_map(5, r, (3, 4)) for r in range(2)] == [1, 1]
    sizes = (2, 3, 4)
    assert [index_map(23, r, sizes) for r in range(3)] == [1, 2, 3]
    t = exponents(sizes)
    for i in range(24):
        assert list(t[i]) == [index_map(i, r, sizes) for r in range(3)]
        assert np.unravel_index(i, sizes) == tuple(int(v) for v in t[i])


def test_model_mean():
    ones = model_mean([0, 0, 0, 0, 1, 0], (3, 4))
    np.testing.assert_allclose(ones, 1)
    spec = preset("signal1")
    theta = theta_from_modes(spec.modes)
    np.testing.assert_allclose(model_mean(theta, spec.sizes), synthesize(spec).ravel(), atol=1e-14)
    flipped = theta.copy()
    flipped[-1] = np.pi
    np.testing.assert_allclose(model_mean(flipped, spec.sizes), -model_mean(theta, spec.sizes), atol=1e-14)
    spec = preset("signal5")
    np.testing.assert_allclose(
        model_mean(theta_from_modes(spec.modes), spec.sizes), synthesize(spec).ravel(), atol=1e-13
    )


def test_split_theta_errors():
    with pytest.raises(ValueError):
        split_theta(np.ones(7), 2)
    with pytest.raises(ValueError):
        split_theta([0, 0, 0, 0, -1, 0], 2)


def test_jacobian_structure(rng):
    theta = random_theta(rng, 2, 2)
    sizes = (4, 5)
    j = jacobian(theta, sizes)
    rf = 4
    np.testing.assert_allclose(j[:, :rf], 1j * j[:, rf : 2 * rf], rtol=1e-14)
    # magnitude column: mode contribution divided by its magnitude
    _, _, lam, phi = split_theta(theta, 2)
    one = theta.copy()
    one[2 * rf] = 1e-300  # switch mode 1 off, keeping lambda positive
    contrib = model_mean(theta, sizes) - model_mean(one, sizes)
    np.testing.assert_allclose(j[:, 2 * rf], contrib / lam[0], rtol=1e-12, atol=1e-14)


def test_jacobian_finite_differences(rng):
    for _ in range(5):
        n_dims, n_modes = int(rng.integers(1, 4)), int(rng.integers(1, 4))
        sizes = tuple(int(s) for s in rng.integers(2, 7, n_dims))
        theta = random_theta(rng, n_dims, n_modes)
        fd = central_difference(lambda th: model_mean(th, sizes), theta)
        an = jacobian(theta, sizes)
        err = np.linalg.norm(an - fd, axis=0) / np.linalg.norm(an, axis=0)
        assert err.max() <= 1e-5


def test_gram_symmetric_psd(rng):
    v, _ = v_and_s(random_theta(rng, 2, 2), (4, 4))
    g = np.real(v.conj().T @ v)
    np.testing.assert_allclose(g, g.T, atol=1e-12)
    assert np.linalg.eigvalsh(g).min() > -1e-10


def test_undamped_closed_value():
    rep = crlb_general([0.2 * 2 * np.pi, 0.3 * 2 * np.pi, 0, 0, 1, 0], 1.0, (10, 10))
    np.testing.assert_allclose(rep.omega[0], 6 / (100 * 99), rtol=1e-8)
    assert 6 / 9900 == pytest.approx(6.0606e-4, rel=1e-4)


def test_bound_identities_and_sigma_scaling(rng):
    for _ in range(5):
        n_dims, n_modes = int(rng.integers(1, 4)), int(rng.integers(1, 4))
        # enough real observations for 2(R+1)F parameters
        sizes = tuple(int(s) for s in rng.integers(6, 9, n_dims))
        theta = random_theta(rng, n_dims, n_modes)
        rep = crlb_general(theta, 0.3, sizes)
        np.testing.assert_allclose(rep.omega, rep.alpha, rtol=1e-10)
        _, _, lam, _ = split_theta(theta, n_dims)
        np.testing.assert_allclose(rep.lam, lam**2 * rep.phi, rtol=1e-10)
        doubled = crlb_general(theta, 0.6, sizes)
        np.testing.assert_allclose(doubled.omega, 2 * rep.omega, rtol=1e-12)


@pytest.mark.parametrize("alpha", [-0.01, -0.1])
def test_single_mode_matches_general(alpha):
    sizes = (8, 8)
    theta = [1.0, 2.0, alpha, alpha, 1.3, 0.4]
    gen = crlb_general(theta, 0.5, sizes)
    closed = crlb_single_mode([alpha, alpha], sizes, 1.3, 0.5)
    np.testing.assert_allclose(closed.omega, gen.omega[0], rtol=1e-8)
    np.testing.assert_allclose(closed.alpha, gen.alpha[0], rtol=1e-8)
    assert closed.phi == pytest.approx(gen.phi[0], rel=1e-8)
    assert closed.lam == pytest.approx(gen.lam[0], rel=1e-8)


def test_single_mode_limits():
    sizes = (10, 12, 5)
    lim = crlb_undamped_limit(sizes, 1.7, 0.3)
    near = crlb_single_mode([-1e-8] * 3, sizes, 1.7, 0.3)
    np.testing.assert_allclose(near.omega, lim.omega, rtol=1e-4)
    assert near.phi == pytest.approx(lim.phi, rel=1e-4)
    zero = crlb_single_mode([0.0] * 3, sizes, 1.7, 0.3)
    np.testing.assert_allclose(zero.omega, lim.omega, rtol=1e-12)
    assert zero.phi == pytest.approx(lim.phi, rel=1e-12)


def test_closed_fraction_cross_check():
    for alpha in (-0.3, -0.1, -0.01):
        for M in (4, 10, 25):
            m = np.arange(M)
            w = np.exp(2 * alpha * m)
            q1 = (m * w).sum() / w.sum()
            var = ((m - q1) ** 2 * w).sum() / w.sum()
            assert omega_factor_closed(alpha, M) == pytest.approx(1 / var, rel=1e-9)
    assert omega_factor_closed(0.0, 10) == pytest.approx(12 / 99)


def test_mixed_damping_closed_form():
    sizes = (6, 9)
    alpha = [-0.04, -0.002]
    gen = crlb_general([0.5, 1.5, *alpha, 0.8, -1.0], 2.0, sizes)
    closed = crlb_single_mode(alpha, sizes, 0.8, 2.0)
    np.testing.assert_allclose(closed.omega, gen.omega[0], rtol=1e-8)


def test_singular_fisher():
    spec = SignalSpec((6, 6), [RdMode((0.2, 0.3), (0, 0)), RdMode((0.2, 0.3), (0, 0))])
    with pytest.raises(SingularFisherError):
        crlb_for_signal(spec, 1.0)
    with pytest.raises(ValueError):
        crlb_general([0, 0, 1, 0], 0.0, (4,))


def test_report_helpers():
    rep = crlb_for_signal(preset("signal1"), 0.01)
    np.testing.assert_allclose(rep.freq, rep.omega / (4 * math.pi**2))
    assert rep.total_sqrt() == pytest.approx(math.sqrt(rep.freq.mean()))
    assert np.all(rep.omega > 0) and np.all(rep.lam > 0)
    assert rep.fisher_cond >= 1
