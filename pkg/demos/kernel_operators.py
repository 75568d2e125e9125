"""Integral operators with field-valued kernels and separable approximation.

Run: python demos/kernel_operators.py
"""
import numpy as np

from opfield import KernelField, L2Basis, ParameterSpace, QuadratureSpace, kernel_apply, kernel_to_operator
from opfield.kernelop import adjoint_kernel, separable_approx, separable_kernel
from opfield.schatten import theta_array

space = ParameterSpace(("t1", "t2"), [(0, 1)])
quad = QuadratureSpace(("r1", "r2"), [0.5, 0.5])
w = separable_kernel(quad, space, [1, 2], [1, 1])
print("w(r,s) = a(r) b(s), a=(1,2), b=(1,1), mu=(1/2,1/2)")
print("apply to f=(1,0):", kernel_apply(w, [1, 0])[:, 0].real)
op = kernel_to_operator(w, L2Basis.nodal(quad))
print("theta_1^2 =", theta_array(op)[0] ** 2, "(sum |w|^2 mu mu = 2.5)")

# A Gaussian kernel whose width depends on t.
n = 24
x = (np.arange(n) + 0.5) / n
quad = QuadratureSpace(tuple(range(n)), np.full(n, 1 / n))
space = ParameterSpace.path(3)
width = np.array([0.05, 0.1, 0.3])
vals = np.exp(-((x[:, None, None] - x[None, :, None]) ** 2) / width)
w = KernelField(quad, space, vals)
op = kernel_to_operator(w, L2Basis.nodal(quad))
adj = kernel_to_operator(adjoint_kernel(w), L2Basis.nodal(quad))
print("\nGaussian kernel, adjoint-kernel residual:", (adj - op.H).op_norm())
print("leading theta_n at each t:\n", np.round(theta_array(op)[:4], 4))

print("\ncells  error     sample dev  bound")
for cells in (1, 2, 4, 8):
    r = separable_approx(w, np.array_split(np.arange(n), cells))
    print(f"{cells:<6} {r.error:.4f}    {r.sample_deviation:.4f}      {r.error_bound:.4f}")
