#!/usr/bin/env python
r"""
A circle that transport cannot see
==================================

The same 64-point circle carries both spectra, so D_c = 0. If the inside
of the circle is labelled differently for x and y, no unitary can move
one onto the other cheaply: the obstruction radius rho_1 is about 2.
"""
import numpy as np

from orbit_metrics import (
    K1Labeling,
    complement_components,
    compute_metrics,
    from_spectrum,
    mt3_interval,
    rho,
)

X = np.exp(2j * np.pi * np.arange(64) / 64)
phi = from_spectrum(X, [1] * 64)
report = compute_metrics(phi, phi, pitch=0.05)
print("D_c =", report.D_c)

cm = complement_components(X, X, h=0.05)
print("bounded components:", cm.bounded_ids())
print("origin lies in:", cm.component_of(0j))

# Labels are user input: winding 1 for x, 0 for y inside the circle.
lab = K1Labeling({"component-1": (1,)}, {"component-1": (0,)})
r = rho(cm, lab, X, X)
print("rho_x=%.3f rho_y=%.3f rho_1=%.3f (grid error <= %.2f)" % (r.rho_x, r.rho_y, r.rho_1, r.error_bound))

iv = mt3_interval(report, r)
print("orbit distance lies in [%.3f, %.3f]" % (iv.lower, iv.upper))
