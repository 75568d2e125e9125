"""Singular-value fields and Schatten decompositions of operator fields."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import zeta as _riemann_zeta

from . import denselin
from .fieldcore import (
    ContractError,
    OperatorField,
    ScalarField,
    VectorField,
    is_positive,
)

__all__ = [
    "AnchorEvent",
    "SingularSystem",
    "OmegaFamily",
    "theta_array",
    "singular_value_fields",
    "support_indicator",
    "phase_align",
    "schatten_decompose_positive",
    "schatten_decompose",
    "truncate_tail",
    "truncation_bound",
    "omega_sum",
    "random_omega_family",
    "singular_omega_pair",
    "projection_jumps",
]

OVERLAP_TOL = 1e-8
ZERO_TOL_REL = 1e-12


@dataclass(frozen=True)
class AnchorEvent:
    """A point where the phase of a vector field was chosen afresh."""

    term: int | None
    point: object
    parent: object
    overlap: float

    def as_dict(self):
        return {"term": self.term, "point": self.point, "parent": self.parent,
                "overlap": self.overlap}


@dataclass(frozen=True, eq=False)
class SingularSystem:
    """Terms ``theta_n, xi_n, eta_n, e_n`` of ``u = sum theta_n xi_n <., eta_n>``.

    Arrays are indexed ``[n, t]`` (``[n, t, i]`` for the vector fields);
    ``n`` runs over ``0..N-1`` with ``theta`` pointwise descending.
    """

    space: object
    theta_values: np.ndarray
    xi_values: np.ndarray
    eta_values: np.ndarray
    e_values: np.ndarray
    mask: np.ndarray | None = None
    events: tuple = field(default=())

    def __len__(self):
        return self.theta_values.shape[0]

    @property
    def dim(self):
        return self.xi_values.shape[2]

    @property
    def theta(self):
        return tuple(ScalarField(self.space, th) for th in self.theta_values)

    @property
    def e(self):
        return tuple(ScalarField(self.space, en) for en in self.e_values)

    @property
    def xi(self):
        return tuple(VectorField(self.space, v, self.mask) for v in self.xi_values)

    @property
    def eta(self):
        return tuple(VectorField(self.space, v, self.mask) for v in self.eta_values)

    def reconstruct(self, select=None) -> OperatorField:
        """``sum_n theta_n xi_n <., eta_n>``, summed from the largest term down.

        ``select`` optionally restricts the sum to a subset of term indices.
        """
        idx = range(len(self)) if select is None else sorted(select)
        d = self.dim
        out = np.zeros((len(self.space), d, d), dtype=complex)
        for n in idx:
            out += self.theta_values[n][:, None, None] * (
                self.xi_values[n][:, :, None] * np.conj(self.eta_values[n])[:, None, :])
        return OperatorField(self.space, out, self.mask)

    def adjoint(self) -> "SingularSystem":
        """The system ``sum theta_n eta_n <., xi_n>`` of the adjoint operator."""
        return SingularSystem(self.space, self.theta_values, self.eta_values,
                              self.xi_values, self.e_values, self.mask, self.events)

    def residual(self, u: OperatorField) -> float:
        """``||u - reconstruct()||`` in the module operator norm."""
        return (u - self.reconstruct()).op_norm()

    def orthonormality_defect(self) -> float:
        """Largest deviation of ``<xi_m, xi_n>`` and ``<eta_m, eta_n>`` from ``delta_mn e_n``."""
        worst = 0.0
        target = np.einsum("mn,nt->mnt", np.eye(len(self)), self.e_values)
        for vecs in (self.xi_values, self.eta_values):
            gram = np.einsum("nti,mti->mnt", vecs, np.conj(vecs))
            worst = max(worst, float(np.max(np.abs(gram - target), initial=0.0)))
        return worst


def theta_array(u: OperatorField) -> np.ndarray:
    """Singular values of every fiber, shape ``(d, |T|)``, descending in the first axis."""
    return denselin.singular_values(u.matrices).T.copy()


def singular_value_fields(u: OperatorField, count=None):
    """The fields ``t -> theta_n(u(t))`` for ``n = 1..count``."""
    d = u.dim
    count = d if count is None else int(count)
    if count > d or count < 0:
        raise ContractError(f"requested {count} singular value fields but d = {d}")
    th = theta_array(u)
    return [ScalarField(u.space, th[n]) for n in range(count)]


def support_indicator(theta_n: ScalarField, zero_tol=0.0) -> ScalarField:
    """Indicator of ``{t : theta_n(t) > zero_tol}``."""
    return ScalarField(theta_n.space, (theta_n.values.real > zero_tol).astype(float))


def _fresh_phase(v):
    k = int(np.argmax(np.abs(v)))
    return v * (np.abs(v[k]) / v[k])


def _align_components(space, comps, anchor_index, overlap_tol, term, events):
    comps = np.array(comps, dtype=complex)
    norms = np.linalg.norm(comps, axis=1)
    order, parents = space.traversal(anchor_index)
    ref = [None] * len(space)
    out = np.zeros_like(comps)
    out[anchor_index] = comps[anchor_index]
    ref[anchor_index] = anchor_index
    for i in order[1:]:
        p = parents[i]
        r = p if norms[p] > 0 else ref[p]
        ref[i] = i if norms[i] > 0 else r
        if norms[i] == 0:
            continue
        if r is None:
            out[i] = _fresh_phase(comps[i])
            events.append(AnchorEvent(term, space.points[i], None, 0.0))
            continue
        ov = np.vdot(comps[i], out[r])  # <ref, eta(t)>
        rel = abs(ov) / (np.linalg.norm(out[r]) * norms[i])
        if rel < overlap_tol:
            out[i] = _fresh_phase(comps[i])
            events.append(AnchorEvent(term, space.points[i], space.points[r], float(rel)))
        else:
            out[i] = (ov / abs(ov)) * comps[i]
    return out


def phase_align(eta: VectorField, anchor=None, overlap_tol=OVERLAP_TOL, events=None) -> VectorField:
    """Multiply ``eta(t)`` by unit phases so that neighbouring vectors overlap positively.

    Starting from ``anchor`` (default: the first point), each point is
    aligned against the nearest already aligned nonzero vector on its
    traversal path: ``xi(t) = <ref, eta(t)> / |<ref, eta(t)>| * eta(t)``.
    The rank-one projections ``xi(t) xi(t)^H`` equal ``eta(t) eta(t)^H``.
    Where the relative overlap drops below ``overlap_tol`` the point gets a
    fresh phase and an :class:`AnchorEvent` is appended to ``events``.
    """
    space = eta.space
    a = 0 if anchor is None else space.index(anchor)
    if not np.any(eta.components[a] != 0):
        raise ContractError(f"cannot align from anchor {space.points[a]!r}: vector vanishes there")
    log = [] if events is None else events
    out = _align_components(space, eta.components, a, overlap_tol, None, log)
    return VectorField(space, out, eta.mask)


def _align_terms(space, vecs, e_values, anchor, overlap_tol, events):
    out = np.array(vecs)
    for n in range(vecs.shape[0]):
        support = np.nonzero(e_values[n] > 0)[0]
        if support.size == 0:
            continue
        a = space.index(anchor) if anchor is not None else int(support[0])
        if e_values[n][a] == 0:
            a = int(support[0])
        out[n] = _align_components(space, vecs[n], a, overlap_tol, n, events)
    return out


def _zero_tol(u, zero_tol):
    return ZERO_TOL_REL * u.op_norm() if zero_tol is None else float(zero_tol)


def schatten_decompose_positive(u: OperatorField, tol=1e-10, zero_tol=None, anchor=None,
                                align=True, overlap_tol=OVERLAP_TOL) -> SingularSystem:
    """Schatten decomposition ``u = sum theta_n xi_n <., xi_n>`` of a positive field.

    The eigenvectors of each fiber are computed independently, truncated to
    the support ``e_n`` of ``theta_n`` and then phase-aligned across the
    parameter space. Returns a system with ``eta = xi``.
    """
    if not is_positive(u, tol):
        raise ContractError("operator field is not positive")
    zt = _zero_tol(u, zero_tol)
    eig = denselin.hermitian_eig(u.matrices, tol=max(tol, 1e-10))
    theta = np.clip(eig.values, 0.0, None).T  # (d, T)
    e = (theta > zt).astype(float)
    vecs = np.transpose(eig.vectors, (2, 0, 1)) * e[:, :, None]  # (n, T, i)
    if u.mask is not None:
        vecs = vecs * u.mask[None, :, :]
    events = []
    if align:
        vecs = _align_terms(u.space, vecs, e, anchor, overlap_tol, events)
    return SingularSystem(u.space, theta.copy(), vecs, vecs, e, u.mask, tuple(events))


def schatten_decompose(u: OperatorField, tol=1e-10, zero_tol=None, anchor=None,
                       align=True, overlap_tol=OVERLAP_TOL) -> SingularSystem:
    """Schatten decomposition ``u = sum theta_n xi_n <., eta_n>`` of any field.

    ``|u|`` is decomposed as a positive field giving ``theta_n`` and
    ``eta_n``; with the polar decomposition ``u = w |u|`` the left vectors
    are ``xi_n = w eta_n``.
    """
    w, absu = denselin.polar(u.matrices)
    mask = u.mask
    if mask is not None:
        allowed = mask[:, :, None] & mask[:, None, :]
        w = w * allowed
        absu = absu * allowed
    zt = _zero_tol(u, zero_tol)
    pos = schatten_decompose_positive(OperatorField(u.space, absu, mask), tol=tol,
                                      zero_tol=zt, anchor=anchor, align=align,
                                      overlap_tol=overlap_tol)
    eta = pos.eta_values
    xi = np.einsum("tij,ntj->nti", w, eta)
    return SingularSystem(u.space, pos.theta_values, xi, eta, pos.e_values, mask, pos.events)


def truncation_bound(k, p) -> float:
    """``(1/k) (sum_n n^{-2p})^{1/p}``, the guaranteed p-norm of the cut tail."""
    p = float(p)
    if not (p >= 1 and np.isfinite(p)):
        raise ContractError(f"truncation needs p in [1, inf), got {p}")
    return float(_riemann_zeta(2 * p)) ** (1 / p) / k


def truncate_tail(u: OperatorField, sys: SingularSystem, k, p=1.0) -> OperatorField:
    """Drop every term where ``theta_n(t) <= 1/(k n^2)``.

    Returns ``u_k = sum theta_n xi_n <., eta_n e_{n,k}>``. The remainder
    satisfies ``theta_n(u - u_k) <= 1/(k n^2)`` pointwise, hence
    ``||u - u_k||_p <= truncation_bound(k, p)``.
    """
    if k < 1:
        raise ContractError("k must be at least 1")
    truncation_bound(k, p)  # validates p
    n = np.arange(1, len(sys) + 1)[:, None]
    keep = sys.theta_values > 1.0 / (k * n * n)
    sel = SingularSystem(sys.space, sys.theta_values, sys.xi_values,
                         sys.eta_values * keep[:, :, None], sys.e_values * keep, sys.mask)
    out = sel.reconstruct()
    return OperatorField(u.space, out.matrices, u.mask)


class OmegaFamily:
    """Sequence of vector fields that is orthonormal at every point once zeros are dropped."""

    def __init__(self, zeta, tol=1e-9):
        if isinstance(zeta, np.ndarray):
            raise ContractError("pass a sequence of VectorField")
        zeta = tuple(zeta)
        if not zeta:
            raise ContractError("empty family")
        self.space = zeta[0].space
        self.values = np.stack([z.components for z in zeta])  # (n, T, i)
        norms = np.linalg.norm(self.values, axis=2)
        self.support = norms > 0.5
        if np.any((norms > tol) & ~self.support):
            raise ContractError("family member is neither zero nor a unit vector")
        gram = np.einsum("nti,mti->tmn", self.values, np.conj(self.values))
        target = np.einsum("mn,nt->tmn", np.eye(len(zeta)), self.support.astype(float))
        defect = float(np.max(np.abs(gram - target)))
        if defect > tol:
            raise ContractError(f"family is not orthonormal at every point (defect {defect:.3g})")
        self.zeta = zeta

    def __len__(self):
        return len(self.zeta)

    def support_sets(self):
        """``N_t`` for every point, as sorted index lists."""
        return [list(np.nonzero(self.support[:, t])[0]) for t in range(len(self.space))]


def omega_sum(u: OperatorField, fam: OmegaFamily, fam2: OmegaFamily, p) -> ScalarField:
    """``t -> sum_n |<u zeta_n, zeta'_n>(t)|^p``; bounded by ``sum_n theta_n(u)^p``."""
    p = float(p)
    if p < 1:
        raise ContractError("p must be at least 1")
    m = min(len(fam), len(fam2))
    uz = np.einsum("tij,ntj->nti", u.matrices, fam.values[:m])
    vals = np.einsum("nti,nti->nt", uz, np.conj(fam2.values[:m]))
    return ScalarField(u.space, np.sum(np.abs(vals) ** p, axis=0))


def random_omega_family(space, d, rng, size=None, keep=0.75) -> OmegaFamily:
    """Columns of random unitaries, each member switched off at random points."""
    size = d if size is None else size
    z = rng.standard_normal((len(space), d, d)) + 1j * rng.standard_normal((len(space), d, d))
    q, _ = np.linalg.qr(z)
    on = rng.random((len(space), size)) < keep
    vals = np.transpose(q[:, :, :size], (2, 0, 1)) * on.T[:, :, None]
    return OmegaFamily([VectorField(space, v) for v in vals])


def singular_omega_pair(sys: SingularSystem):
    """``(eta, xi)`` of a decomposition as families; they attain ``sum theta_n^p``."""
    return (OmegaFamily(sys.eta, tol=1e-8), OmegaFamily(sys.xi, tol=1e-8))


def projection_jumps(sys: SingularSystem) -> np.ndarray:
    """For each term, the largest jump of ``xi_n(t) xi_n(t)^H`` across adjacency edges."""
    edges = sys.space.edges()
    if not edges:
        return np.zeros(len(sys))
    i, j = np.array(edges).T
    out = []
    for v in sys.xi_values:
        proj = v[:, :, None] * np.conj(v)[:, None, :]
        out.append(float(np.max(np.linalg.norm(proj[i] - proj[j], ord=2, axis=(1, 2)))))
    return np.array(out)
