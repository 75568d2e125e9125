"""Dense kernels for single fibers (and stacks of fibers).

Every function accepts either one ``(d, d)`` matrix or a stack of shape
``(..., d, d)``; stacks are processed in lock-step so that a whole
operator field is handled with one call.
"""
from __future__ import annotations

from typing import NamedTuple

import numpy as np

EPS = np.finfo(float).eps

__all__ = [
    "EigSystem",
    "SvdSystem",
    "LinAlgContractError",
    "hermitian_eig",
    "svd",
    "singular_values",
    "polar",
    "default_rank_tol",
    "jacobi_svd",
]


class LinAlgContractError(ValueError):
    """Raised when an input violates a kernel's precondition."""


class EigSystem(NamedTuple):
    values: np.ndarray  # (..., d) real, descending
    vectors: np.ndarray  # (..., d, d) columns


class SvdSystem(NamedTuple):
    sigma: np.ndarray  # (..., d) nonnegative, descending
    left: np.ndarray  # (..., d, d)
    right: np.ndarray  # (..., d, d); A = left @ diag(sigma) @ right^H


def _as_stack(a):
    a = np.asarray(a, dtype=complex)
    if a.ndim < 2 or a.shape[-1] != a.shape[-2]:
        raise LinAlgContractError(f"expected square matrices, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise LinAlgContractError("matrix has non-finite entries")
    return a


def _fro(a):
    return np.sqrt(np.sum(np.abs(a) ** 2, axis=(-2, -1)))


def hermitian_eig(a, tol=1e-10):
    """Eigendecomposition of Hermitian matrices, eigenvalues descending.

    Parameters
    ----------
    a : (..., d, d) array_like
        Hermitian matrix or stack.
    tol : float
        Allowed relative deviation ``||A - A^H|| <= tol * ||A||``.

    Returns
    -------
    EigSystem
        ``values`` sorted in descending order along the last axis and
        ``vectors`` whose columns are the matching orthonormal eigenvectors.
    """
    a = _as_stack(a)
    scale = _fro(a)
    skew = _fro(a - np.conj(np.swapaxes(a, -1, -2)))
    if np.any(skew > tol * np.maximum(scale, np.finfo(float).tiny)):
        raise LinAlgContractError("matrix is not Hermitian within tolerance")
    h = 0.5 * (a + np.conj(np.swapaxes(a, -1, -2)))
    w, v = np.linalg.eigh(h)
    return EigSystem(w[..., ::-1].copy(), v[..., ::-1].copy())


def default_rank_tol(sigma):
    """``d * eps * sigma_1`` for each matrix in a stack."""
    sigma = np.asarray(sigma)
    return sigma.shape[-1] * EPS * sigma[..., 0]


def jacobi_svd(a, tol=None, max_sweeps=60):
    """One-sided (Hestenes) Jacobi SVD of a stack of complex square matrices.

    Columns of a working copy of ``A`` are rotated pairwise until they are
    mutually orthogonal; the column norms are then the singular values.
    All matrices of the stack are rotated simultaneously.

    Returns ``(sigma, work, right)`` sorted by descending ``sigma``, where
    ``work = A @ right`` holds the unnormalised left vectors. The public
    entry point is :func:`svd`.
    """
    a = _as_stack(a)
    shape = a.shape
    d = shape[-1]
    work = a.reshape(-1, d, d).copy()
    nb = work.shape[0]
    v = np.broadcast_to(np.eye(d, dtype=complex), (nb, d, d)).copy()
    if tol is None:
        tol = d * EPS
    if d == 1:
        return _finish(work, v, shape)

    tiny = np.finfo(float).tiny
    for _ in range(max_sweeps):
        rotated = False
        for i in range(d - 1):
            for j in range(i + 1, d):
                ai = work[:, :, i]
                aj = work[:, :, j]
                alpha = np.einsum("bk,bk->b", ai.conj(), ai).real
                beta = np.einsum("bk,bk->b", aj.conj(), aj).real
                gamma = np.einsum("bk,bk->b", ai.conj(), aj)
                g = np.abs(gamma)
                active = g > tol * np.sqrt(alpha * beta)
                active &= g > tiny
                if not np.any(active):
                    continue
                rotated = True
                idx = np.nonzero(active)[0]
                g = g[idx]
                phase = gamma[idx] / g
                zeta = (beta[idx] - alpha[idx]) / (2.0 * g)
                sgn = np.where(zeta >= 0, 1.0, -1.0)
                t = sgn / (np.abs(zeta) + np.sqrt(1.0 + zeta * zeta))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = c * t
                # rotate in the plane after removing the phase of gamma
                for m in (work, v):
                    ci = m[idx, :, i]
                    cj = m[idx, :, j] * np.conj(phase)[:, None]
                    m[idx, :, i] = c[:, None] * ci - s[:, None] * cj
                    m[idx, :, j] = (s[:, None] * ci + c[:, None] * cj) * phase[:, None]
        if not rotated:
            break
    return _finish(work, v, shape)


def _finish(work, v, shape):
    sigma = np.sqrt(np.einsum("bki,bki->bi", work.conj(), work).real)
    order = np.argsort(-sigma, axis=-1, kind="stable")
    sigma = np.take_along_axis(sigma, order, axis=-1)
    work = np.take_along_axis(work, order[:, None, :], axis=-1)
    v = np.take_along_axis(v, order[:, None, :], axis=-1)
    return sigma.reshape(shape[:-1]), work.reshape(shape), v.reshape(shape)


def svd(a, tol=None):
    """Singular value decomposition ``A = U diag(sigma) V^H``.

    Backed by :func:`jacobi_svd`. Left singular vectors belonging to
    singular values at or below ``d * eps * sigma_1`` are replaced by an
    orthonormal completion, so ``U`` is always unitary.

    Examples
    --------
    >>> s = svd(np.array([[0, 2], [0, 0]]))
    >>> s.sigma
    array([2., 0.])
    """
    a = _as_stack(a)
    shape = a.shape
    d = shape[-1]
    sigma, work, v = jacobi_svd(a, tol=tol)
    sigma = sigma.reshape(-1, d)
    work = work.reshape(-1, d, d)
    v = v.reshape(-1, d, d)
    cut = default_rank_tol(sigma)
    good = sigma > np.maximum(cut, np.finfo(float).tiny)[:, None]
    safe = np.where(good, sigma, 1.0)
    u = np.where(good[:, None, :], work / safe[:, None, :], 0.0)
    for b in np.nonzero(~np.all(good, axis=-1))[0]:
        r = int(good[b].sum())
        q, _ = np.linalg.qr(np.hstack([u[b, :, :r], np.eye(d)]))
        u[b, :, r:] = q[:, r:d]
    return SvdSystem(sigma.reshape(shape[:-1]), u.reshape(shape), v.reshape(shape))


def singular_values(a):
    """Descending singular values of a matrix or stack."""
    return jacobi_svd(a)[0]


def polar(a, rank_tol=None):
    """Polar decomposition ``A = w |A|`` with ``w`` a partial isometry.

    Parameters
    ----------
    a : (..., d, d) array_like
    rank_tol : float or array, optional
        Singular values at or below this are treated as zero; ``w``
        annihilates the corresponding right singular directions.
        Defaults to ``d * eps * sigma_1`` per matrix.

    Returns
    -------
    w : ndarray
        Partial isometry whose initial space is the range of ``|A|``.
    abs_a : ndarray
        ``(A^H A)^{1/2}``, Hermitian positive semidefinite.
    """
    s = svd(a)
    vh = np.conj(np.swapaxes(s.right, -1, -2))
    abs_a = (s.right * s.sigma[..., None, :]) @ vh
    abs_a = 0.5 * (abs_a + np.conj(np.swapaxes(abs_a, -1, -2)))
    if rank_tol is None:
        rank_tol = default_rank_tol(s.sigma)
    keep = s.sigma > np.asarray(rank_tol)[..., None]
    w = (s.left * keep[..., None, :]) @ vh
    return w, abs_a
