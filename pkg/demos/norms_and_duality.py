"""Schatten p-norms, Hoelder's inequality and norming elements.

Run: python demos/norms_and_duality.py
"""
import numpy as np

from opfield import ParameterSpace, lp_norm, norming_element, schatten_decompose
from opfield.fieldcore import random_operator_field
from opfield.traceclass import DualFunctional, conjugate_exponent, functional_to_operator

rng = np.random.default_rng(1)
space = ParameterSpace.path(6)
u = random_operator_field(space, 4, rng)
v = random_operator_field(space, 4, rng)

print("p      ||u||_p   ||u+v||_p <= ||u||_p + ||v||_p")
for p in (1.0, 1.5, 2.0, 3.0, np.inf):
    a, b, c = lp_norm(u, p).norm, lp_norm(v, p).norm, lp_norm(u + v, p).norm
    print(f"{p:<6} {a:8.4f}  {c:8.4f} <= {a + b:8.4f}")

# The norming element turns Hoelder's inequality into an equality.
s = schatten_decompose(u)
print("\np    q     ||uv||_1   ||u||_p ||v||_q")
for p in (0.0, 1.0, 2.0, 3.0):
    q = conjugate_exponent(p)
    w = norming_element(u, s, p)
    print(f"{p:<4} {q:<5.3g} {lp_norm(u @ w, 1).norm:9.5f}  {lp_norm(u, p).norm * lp_norm(w, q).norm:9.5f}")

# Every module-linear functional is tr(. v) for one operator field v.
phi = DualFunctional.from_operator(v)
back = functional_to_operator(phi)
print("\nround trip v -> tr(. v) -> v, error:", (back - v).op_norm())
