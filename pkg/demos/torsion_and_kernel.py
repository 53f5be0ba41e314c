#!/usr/bin/env python
r"""
When traces are not enough
==========================

Two small models where the trace metric D_T misses something the group
metric D_c sees: a pairing with a kernel, and a torsion class.
"""
from fractions import Fraction

from orbit_metrics import ModelSpec, make_atomic, metric_Dc, metric_DT
from orbit_metrics.errors import TorsionObstruction
from orbit_metrics.groups import Simplicial, TorsionExtended
from orbit_metrics.transport import PairRelation, hall_check, refine

# Z^2 with a single trace that cannot tell e1 from e2.
g = Simplicial(2)
half = Fraction(1, 2)
model = ModelSpec(g, g.element([1, 1]), ((half, half),))
e1, e2 = g.element([1, 0]), g.element([0, 1])
phi = make_atomic([0, 1], [e1, e2], model)
psi = make_atomic([0, 1], [e2, e1], model)
print("D_T =", metric_DT(phi, psi), " D_c =", metric_Dc(phi, psi))

# Z + Z/2: free parts balance, torsion parts do not split along the relation.
t = TorsionExtended(1, (2,))
a = [t.element([1], [1]), t.element([1], [1])]
b = [t.element([1], [0]), t.element([1], [0])]
R = PairRelation.full(2, 2)
print("Hall holds:", hall_check(a, b, R, t).feasible)
try:
    refine(a, b, R, t)
except TorsionObstruction as exc:
    print("no refinement:", exc)
