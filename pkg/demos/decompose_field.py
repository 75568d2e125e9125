"""Singular value fields and the Schatten decomposition of a small operator field.

Run: python demos/decompose_field.py
"""
import numpy as np

from opfield import OperatorField, ParameterSpace, schatten_decompose
from opfield.fieldcore import random_operator_field
from opfield.schatten import projection_jumps, truncate_tail, truncation_bound
from opfield.traceclass import lp_norm

np.set_printoptions(precision=4, suppress=True)

# Two points, diagonal fibers: the singular values can be read off directly.
space = ParameterSpace(("t1", "t2"), [(0, 1)])
u = OperatorField(space, [np.diag([3.0, 1.0]), np.diag([2.0, 2.0])])
s = schatten_decompose(u)
print("theta_n(t) for diag(3,1) / diag(2,2):")
print(s.theta_values)
print("reconstruction residual:", s.residual(u))

# A nilpotent fiber: theta_1 = 2 and the left and right vectors differ.
nil = schatten_decompose(OperatorField(space, [[0, 2], [0, 0]]))
print("\nnilpotent [[0,2],[0,0]]: theta_1 =", nil.theta_values[0])
print("xi_1(t1) =", nil.xi_values[0, 0], " eta_1(t1) =", nil.eta_values[0, 0])

# A random field on a path of 12 points.
rng = np.random.default_rng(0)
path = ParameterSpace.path(12)
u = random_operator_field(path, 5, rng)
s = schatten_decompose(u)
print("\nrandom 5x5 field on 12 points")
print("  relative residual     :", s.residual(u) / u.op_norm())
print("  orthonormality defect :", s.orthonormality_defect())
print("  re-anchor events      :", len(s.events))
# Random fibers are independent, so projections jump between neighbours.
print("  projection jumps      :", projection_jumps(s))

# Cutting the tail: terms with theta_n(t) <= 1/(k n^2) are dropped.
small = OperatorField(path, 0.03 * u.matrices)
ss = schatten_decompose(small)
for k in (1, 5, 10):
    tail = lp_norm(small - truncate_tail(small, ss, k), 1).norm
    print(f"  k={k:2d}: ||u - u_k||_1 = {tail:.4f} <= {truncation_bound(k, 1):.4f}")
