#!/usr/bin/env python
r"""
Four roots against their half-size copy
=======================================

Two spectra in M_4: the points e^{i pi k/4}, k = 0..3, and
the same points scaled by 1/2. Every transport metric agrees here, which
makes it a good first sanity check.
"""
import numpy as np

from orbit_metrics import compute_metrics, from_spectrum

x = np.exp(1j * np.pi * np.arange(4) / 4)
phi = from_spectrum(x, [1, 1, 1, 1])
psi = from_spectrum(0.5 * x, [1, 1, 1, 1])

# Grid pitch 0.01; the disc metrics are lower bounds within 2h.
report = compute_metrics(phi, psi, pitch=0.01)

for name in ("D_T", "D_c", "d_T", "d_c", "D_upper", "hausdorff"):
    print("%-10s %.6f" % (name, getattr(report, name)))

# The strict-Hall metric is larger: a lone atom needs a second partner
# before the inequality becomes strict.
print("D_upper closed form:", np.sqrt(1.25 - np.sqrt(2) / 2))
print("violations:", report.violations())
