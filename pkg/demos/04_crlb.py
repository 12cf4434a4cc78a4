"""Cramer-Rao bounds: general Fisher machinery against the single-mode closed form."""

import numpy as np

from rdsparse.crlb import crlb_general, crlb_single_mode, crlb_undamped_limit

sizes = (10, 10)
for alpha in (0.0, -0.01, -0.1):
    theta = [1.0, 2.0, alpha, alpha, 1.0, 0.0]
    gen = crlb_general(theta, 1.0, sizes)
    closed = crlb_single_mode([alpha, alpha], sizes, 1.0, 1.0)
    print(f"alpha={alpha:6.2f}  omega bound {gen.omega[0][0]:.6e}  closed form {closed.omega[0]:.6e}")

lim = crlb_undamped_limit(sizes, 1.0, 1.0)
print("undamped limit 6/(M (M_r^2 - 1)):", lim.omega[0])

# Frequency and damping bounds coincide for every mode and dimension.
two = [1.0, 2.0, 2.5, 0.4, -0.01, -0.02, -0.03, -0.01, 1.0, 0.5, 0.0, 1.0]
rep = crlb_general(two, 0.1, sizes)
print("omega == alpha bounds:", np.allclose(rep.omega, rep.alpha, rtol=1e-12))
