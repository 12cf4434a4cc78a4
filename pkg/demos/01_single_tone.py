"""Single 2-D damped tone: how the multigrid search closes in on the truth.

Run with ``python3 demos/01_single_tone.py``.
"""

import numpy as np

from rdsparse import MultigridConfig, add_noise, sigma_for_snr, stsm, synthesize
from rdsparse.crlb import crlb_for_signal
from rdsparse.harness import preset

spec = preset("signal1")
clean = synthesize(spec)
truth = spec.modes[0]
print("true frequencies:", truth.freqs, " dampings:", truth.damps)

# Noiseless first. Each level inserts eta_nu points on both sides of the
# selected atom, so the local spacing shrinks by a factor 22 per level.
cfg = MultigridConfig(n_freq0=20, eta_nu=21, levels=2)
res = stsm(clean, cfg)
for r, est in res.dims.items():
    path = ", ".join(f"{p:.6f}" for p in est.freq_path)
    print(f"dim {r}: frequency path {path} -> error {abs(est.freq - truth.freqs[r]):.2e}")
print("grid bound per dimension:", (1 / 20) / 22**2)

# Now at 10 dB, averaged over a few noise draws.
sigma2 = sigma_for_snr(clean, 10)
errs = []
for seed in range(50):
    est = stsm(add_noise(clean, sigma2, seed), cfg)
    errs.append(np.subtract(est.freqs, truth.freqs))
rmse = float(np.sqrt(np.mean(np.square(errs))))
bound = crlb_for_signal(spec, sigma2).total_sqrt("frequency")
print(f"10 dB: frequency RMSE {rmse:.2e}, sqrt CRLB {bound:.2e}")
