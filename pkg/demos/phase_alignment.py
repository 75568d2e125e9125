"""Making eigenvector fields continuous by aligning phases along a path.

Run: python demos/phase_alignment.py
"""
import numpy as np

from opfield import OperatorField, ParameterSpace, VectorField, phase_align, schatten_decompose
from opfield.fieldcore import neighbor_jump

rng = np.random.default_rng(3)
space = ParameterSpace.path(32)
v = np.array([1.0, 1j, -0.5])
v /= np.linalg.norm(v)
eta = VectorField(space, np.exp(2j * np.pi * rng.random(32))[:, None] * v)
xi = phase_align(eta)
print("largest jump before alignment:", neighbor_jump(eta))
print("largest jump after alignment :", neighbor_jump(xi))

# A smoothly rotating positive field: the decomposition follows the rotation.
ang = np.linspace(0, np.pi / 3, 32)
rot = np.stack([[[np.cos(a), -np.sin(a)], [np.sin(a), np.cos(a)]] for a in ang])
u = OperatorField(space, rot @ np.diag([2.0, 1.0]) @ np.transpose(rot, (0, 2, 1)))
s = schatten_decompose(u)
xi1 = VectorField(space, s.xi_values[0])
print("\nrotating field: jump of xi_1 =", neighbor_jump(xi1), "(rotation step", ang[1], ")")

# A zero crossing of the overlap forces a fresh phase; the event is logged.
events = []
phase_align(VectorField(ParameterSpace.range(4), np.array([[1, 0], [0, 1j], [0, 1], [1, 0]])), events=events)
for ev in events:
    print("re-anchor:", ev.as_dict())
