"""Small Monte-Carlo sweep comparing the two-mode estimator with the CRLB.

Writes ``demo_sig2_results.csv`` and friends into the current directory.
"""

from rdsparse.harness import ExperimentConfig, run_experiment

cfg = ExperimentConfig(signal="signal2", snr_db=(0, 10, 20, 30), trials=50, master_seed=1, output="demo_sig2")
result = run_experiment(cfg)

print(f"{'SNR':>5} {'RMSE freq':>11} {'sqrt CRLB':>11} {'ratio':>6}")
for row in result.rows:
    ratio = row.rmse_freq_total / row.sqrt_crlb_freq_total
    print(f"{row.snr_db:5.0f} {row.rmse_freq_total:11.3e} {row.sqrt_crlb_freq_total:11.3e} {ratio:6.2f}")

# Mode 2 of this signal decays with -0.15 per sample in dimension 2, below
# the default damping interval [-0.05, 0]; its damping estimate saturates at
# the interval edge, which shows up in the damping RMSE column.
print("damping RMSE:", [f"{r.rmse_damp_total:.3f}" for r in result.rows])
