"""The C(T)-valued trace and the Hilbert-Schmidt inner product.

Run: python demos/trace_identities.py
"""
import numpy as np

from opfield import ParameterSpace, VectorField, hs_inner, lp_norm, rank_one, trace
from opfield.fieldcore import random_operator_field, random_scalar_field

space = ParameterSpace(("t1", "t2"), [(0, 1)])
xi, eta = VectorField(space, [3, 4]), VectorField(space, [0, 1])
print("tr(xi <., eta>) for xi=(3,4), eta=(0,1):", trace(rank_one(xi, eta)).values)

u = rank_one(xi, eta)
print("<u, u>_HS =", hs_inner(u, u).values, "(|xi|^2 |eta|^2 = 25)")

rng = np.random.default_rng(2)
space = ParameterSpace.path(5)
a, b = random_operator_field(space, 4, rng), random_operator_field(space, 4, rng)
x = random_scalar_field(space, rng)
print("\n|tr(ab) - tr(ba)|  :", (trace(a @ b) - trace(b @ a)).sup_norm())
print("|tr(ax) - tr(a) x| :", (trace(a * x) - trace(a) * x).sup_norm())
pos = a.H @ a
print("||tr(a^*a)|| vs ||a^*a||_1:", trace(pos).sup_norm(), lp_norm(pos, 1).norm)
