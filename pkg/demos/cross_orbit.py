#!/usr/bin/env python
r"""
Horizontal cross vs vertical cross
==================================

diag(-1, 0, 1) against diag(-i, 0, i). Transport metrics give sqrt(2)
while the disc metrics see distance 1. We realise the upper bound with an
explicit unitary and then try to beat it by local descent on U(3).
"""
import numpy as np

from orbit_metrics import audit_bounds, construct_unitary

x = np.diag([-1, 0, 1]).astype(complex)
y = np.diag([-1j, 0, 1j])

cert = construct_unitary(x, y)
print("bottleneck of the plan:", cert.plan_bottleneck)
print("achieved |U*xU - y|:   ", cert.achieved)

# The audit compares the best achieved value with every lower bound.
audit = audit_bounds(x, y, budget=6, pitch=0.01)
print("estimate:", audit["estimate"])
for check in audit["checks"]:
    print("  %-22s %.4f vs %.4f  %s" % (check["name"], check["lhs"], check["rhs"], check["passed"]))
