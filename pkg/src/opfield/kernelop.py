"""Integral operators with C(T)-valued kernels on a quadrature space.

The measure space ``S`` is a finite node set with positive weights, so
``L^2(mu)`` is ``C^|S|`` with the weighted inner product
``<f, g> = sum_j f_j conj(g_j) mu_j``. Choosing an orthonormal basis
``h_1..h_d`` (``d = |S|``) identifies ``L^2(mu) (x) C(T)`` with the standard
module, and a kernel ``w(r, s)`` in ``C(T)`` becomes an operator field.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fieldcore import ContractError, OperatorField, ParameterSpace, ScalarField, VectorField

__all__ = [
    "QuadratureSpace",
    "L2Basis",
    "KernelField",
    "SeparableApprox",
    "l2_inner",
    "tensor_to_module",
    "integrate_field",
    "kernel_apply",
    "kernel_to_operator",
    "adjoint_kernel",
    "separable_kernel",
    "separable_approx",
    "kernel_bound",
]


@dataclass(frozen=True, eq=False)
class QuadratureSpace:
    nodes: tuple
    weights: np.ndarray

    def __post_init__(self):
        nodes = tuple(self.nodes)
        w = np.array(self.weights, dtype=float)
        if w.shape != (len(nodes),):
            raise ContractError("need exactly one weight per node")
        if len(nodes) < 1 or not np.all(np.isfinite(w)) or np.any(w <= 0):
            raise ContractError("quadrature weights must be finite and strictly positive")
        w.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", w)

    def __len__(self):
        return len(self.nodes)

    @property
    def mass(self) -> float:
        return float(np.sum(self.weights))


def l2_inner(quad: QuadratureSpace, f, g) -> complex:
    """``<f, g> = sum_j f(s_j) conj(g(s_j)) mu_j``."""
    return complex(np.sum(np.asarray(f) * np.conj(g) * quad.weights))


class L2Basis:
    """Orthonormal basis of ``L^2(mu)``; ``values[iota, j] = h_iota(s_j)``."""

    def __init__(self, quad: QuadratureSpace, values, tol=1e-10):
        vals = np.array(values, dtype=complex)
        if vals.ndim != 2 or vals.shape[1] != len(quad):
            raise ContractError("basis functions must be sampled at every node")
        gram = (vals * quad.weights) @ np.conj(vals).T
        if np.max(np.abs(gram - np.eye(vals.shape[0]))) > tol:
            raise ContractError("basis is not orthonormal in L2(mu)")
        vals.setflags(write=False)
        self.quad = quad
        self.values = vals

    def __len__(self):
        return self.values.shape[0]

    @classmethod
    def nodal(cls, quad: QuadratureSpace):
        """Node indicators scaled by ``mu_j^{-1/2}``."""
        return cls(quad, np.diag(1.0 / np.sqrt(quad.weights)))

    @classmethod
    def gram_schmidt(cls, quad: QuadratureSpace, functions):
        """Weighted Gram-Schmidt (with one reorthogonalisation pass) of ``functions``."""
        f = np.array(functions, dtype=complex)
        w = quad.weights
        out = []
        for v in f:
            v = v.copy()
            for _ in range(2):
                for h in out:
                    v = v - np.sum(v * np.conj(h) * w) * h
            nrm = np.sqrt(np.sum(np.abs(v) ** 2 * w))
            if nrm < 1e-12:
                raise ContractError("functions are linearly dependent")
            out.append(v / nrm)
        return cls(quad, np.array(out))


class KernelField:
    """Kernel values ``w(r, s)(t)`` stored as ``values[r, s, t]``."""

    def __init__(self, quad: QuadratureSpace, space: ParameterSpace, values):
        vals = np.array(values, dtype=complex)
        n = len(quad)
        if vals.shape != (n, n, len(space)):
            raise ContractError(f"kernel needs shape {(n, n, len(space))}, got {vals.shape}")
        if not np.all(np.isfinite(vals)):
            raise ContractError("kernel has non-finite values")
        vals.setflags(write=False)
        self.quad = quad
        self.space = space
        self.values = vals

    def sup_norm(self) -> float:
        """``sup_{r,s} ||w(r, s)||``."""
        return float(np.max(np.abs(self.values)))


def separable_kernel(quad, space, a, b) -> KernelField:
    """``w(r, s) = a(r) b(s)``; ``a`` is ``(|S|,)`` or ``(|S|, |T|)``, ``b`` is ``(|S|,)``."""
    a = np.asarray(a, dtype=complex)
    if a.ndim == 1:
        a = np.broadcast_to(a[:, None], (len(quad), len(space)))
    b = np.asarray(b, dtype=complex)
    return KernelField(quad, space, a[:, None, :] * b[None, :, None])


def _basis_check(basis: L2Basis, d):
    if len(basis) != d:
        raise ContractError(f"basis has {len(basis)} functions but dimension is {d}")


def tensor_to_module(f, x: ScalarField, basis: L2Basis) -> VectorField:
    """Image of ``f (x) x`` in the standard module: components ``<f, h_iota> x``."""
    f = np.asarray(f, dtype=complex)
    if f.shape != (len(basis.quad),):
        raise ContractError("L2 vector must have one value per node")
    coeff = (basis.values.conj() * basis.quad.weights) @ f  # <f, h_iota>
    return VectorField(x.space, coeff[None, :] * x.values[:, None])


def integrate_field(g, quad: QuadratureSpace, space=None) -> ScalarField:
    """``sum_j g(s_j) mu_j`` for a map node -> scalar field.

    ``g`` is either a sequence of :class:`ScalarField` (one per node) or an
    array of shape ``(|S|, |T|)`` together with ``space``.
    """
    if isinstance(g, np.ndarray):
        if space is None:
            raise ContractError("pass the parameter space with an array integrand")
        vals = np.asarray(g, dtype=complex)
    else:
        g = list(g)
        space = g[0].space
        vals = np.stack([x.values for x in g])
    if vals.shape != (len(quad), len(space)):
        raise ContractError("integrand needs one scalar field per node")
    return ScalarField(space, np.einsum("jt,j->t", vals, quad.weights))


def kernel_apply(w: KernelField, f) -> np.ndarray:
    """``r -> sum_s w(r, s) f(s) mu_s`` as an array ``[r, t]``."""
    f = np.asarray(f, dtype=complex)
    if f.shape != (len(w.quad),):
        raise ContractError("L2 vector must have one value per node")
    return np.einsum("rst,s->rt", w.values, f * w.quad.weights)


def kernel_to_operator(w: KernelField, basis: L2Basis) -> OperatorField:
    """Matrix of the integral operator in the basis ``h``.

    Entry ``(iota, lambda)`` at ``t`` is
    ``sum_{r,s} conj(h_iota(r)) mu_r w(r, s)(t) h_lambda(s) mu_s``.
    """
    _basis_check(basis, len(w.quad))
    mu = w.quad.weights
    left = basis.values.conj() * mu  # [iota, r]
    right = basis.values * mu  # [lambda, s]
    mats = np.einsum("ir,rst,ls->til", left, w.values, right)
    return OperatorField(w.space, mats)


def adjoint_kernel(w: KernelField) -> KernelField:
    """``w'(r, s) = w(s, r)^*``; its operator is the adjoint of ``w``'s."""
    return KernelField(w.quad, w.space, np.conj(np.swapaxes(w.values, 0, 1)))


def kernel_bound(w: KernelField) -> float:
    """``||w|| mu(S)^{1/2}``, bounding the integral operator on tensors."""
    return w.sup_norm() * np.sqrt(w.quad.mass)


@dataclass(frozen=True)
class SeparableApprox:
    """``w(r, s) ~ sum_k u_k(r) v_k(s)`` from a cell partition of the nodes.

    ``error_bound`` is the largest oscillation of ``w`` over a product of
    supports, ``sample_deviation`` the largest distance to the sampled value
    and ``error`` the attained sup error; ``error <= sample_deviation <=
    error_bound``.
    """

    u_terms: np.ndarray  # [k, r, t]
    v_terms: np.ndarray  # [k, s]
    samples: tuple
    error_bound: float
    sample_deviation: float
    error: float

    def kernel_values(self) -> np.ndarray:
        return np.einsum("krt,ks->rst", self.u_terms, self.v_terms)


def _partition_of_unity(cells, n, pou):
    if pou is None:
        pou = np.zeros((len(cells), n))
        for j, c in enumerate(cells):
            pou[j, c] = 1.0
    pou = np.asarray(pou, dtype=float)
    if pou.shape != (len(cells), n) or np.any(pou < 0):
        raise ContractError("partition of unity must be nonnegative, one row per cell")
    if np.max(np.abs(pou.sum(axis=0) - 1.0)) > 1e-12:
        raise ContractError("partition of unity does not sum to one")
    return pou


def separable_approx(w: KernelField, cells, col_cells=None, pou=None, col_pou=None) -> SeparableApprox:
    """Separable approximation of a kernel from a partition of the nodes into cells.

    For row cells ``U_j`` and column cells ``V_k`` with sample nodes
    ``r_j``, ``s_k`` (the middle node of each cell) and partitions of unity
    ``f_j``, ``g_k`` (cell indicators unless given), the approximation is
    ``sum_k u_k(r) g_k(s)`` with ``u_k(r) = sum_j f_j(r) w(r_j, s_k)``.
    """
    n = len(w.quad)
    cells = [np.asarray(c, dtype=int) for c in cells]
    if col_cells is None:
        col_cells = cells
        col_pou = pou if col_pou is None else col_pou
    else:
        col_cells = [np.asarray(c, dtype=int) for c in col_cells]
    for c in list(cells) + list(col_cells):
        if c.size == 0:
            raise ContractError("empty cell in partition")
    f = _partition_of_unity(cells, n, pou)
    g = _partition_of_unity(col_cells, n, col_pou)
    r_samp = [int(c[len(c) // 2]) for c in cells]
    s_samp = [int(c[len(c) // 2]) for c in col_cells]
    sampled = w.values[np.ix_(r_samp, s_samp)]  # [j, k, t]
    u_terms = np.einsum("jr,jkt->krt", f, sampled)
    approx = np.einsum("krt,ks->rst", u_terms, g)
    bound = 0.0
    dev = 0.0
    for j in range(len(cells)):
        rs = np.nonzero(f[j] > 0)[0]
        for k in range(len(col_cells)):
            ss = np.nonzero(g[k] > 0)[0]
            block = w.values[np.ix_(rs, ss)].reshape(-1, len(w.space))
            diffs = np.abs(block[:, None, :] - block[None, :, :])
            bound = max(bound, float(diffs.max()))
            dev = max(dev, float(np.abs(block - sampled[j, k]).max()))
    err = float(np.max(np.abs(w.values - approx)))
    return SeparableApprox(u_terms, g, (tuple(r_samp), tuple(s_samp)), bound, dev, err)
