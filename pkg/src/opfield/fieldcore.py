"""Fields over a finite parameter space.

A compact operator on the standard module over ``C(T)`` is stored through
its fibers: one ``d x d`` complex matrix per point of ``T``. Vectors of the
module are stored the same way (one ``d``-vector per point) and elements of
the coefficient algebra are scalar fields.

All containers are immutable; their arrays are read-only views.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from numbers import Number
from typing import Hashable

import numpy as np

__all__ = [
    "ContractError",
    "ParameterSpace",
    "ScalarField",
    "VectorField",
    "OperatorField",
    "inner_product",
    "fiber_eval",
    "rank_one",
    "module_scale",
    "is_positive",
    "neighbor_jump",
    "standard_generator",
    "random_operator_field",
    "random_vector_field",
    "random_scalar_field",
    "TOL_POS",
]

TOL_POS = 1e-10


class ContractError(ValueError):
    """An argument violates the documented precondition of an operation."""


def _frozen(a, dtype=complex):
    a = np.array(a, dtype=dtype, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class ParameterSpace:
    """Finite ordered point set with optional adjacency.

    ``adjacency`` holds unordered index pairs. When given, the graph must be
    connected; it is used for continuity diagnostics and to choose the order
    in which singular vectors are phase-aligned.
    """

    points: tuple
    adjacency: frozenset | None = None

    def __post_init__(self):
        pts = tuple(self.points)
        if len(pts) < 1:
            raise ContractError("parameter space needs at least one point")
        if len(set(pts)) != len(pts):
            raise ContractError("parameter space points must be distinct")
        object.__setattr__(self, "points", pts)
        if self.adjacency is not None:
            n = len(pts)
            edges = set()
            for pair in self.adjacency:
                i, j = (int(k) for k in pair)
                if not (0 <= i < n and 0 <= j < n):
                    raise ContractError(f"adjacency edge {pair} references a missing point")
                if i != j:
                    edges.add((min(i, j), max(i, j)))
            object.__setattr__(self, "adjacency", frozenset(edges))
            if len(self._bfs(0)[0]) != n:
                raise ContractError("adjacency graph is not connected")

    @classmethod
    def range(cls, n, adjacency=None):
        return cls(tuple(range(n)), adjacency)

    @classmethod
    def path(cls, n):
        """Points ``0..n-1`` joined in a chain."""
        return cls(tuple(range(n)), frozenset((i, i + 1) for i in range(n - 1)))

    def __len__(self):
        return len(self.points)

    def index(self, label: Hashable) -> int:
        try:
            return self.points.index(label)
        except ValueError:
            raise KeyError(f"unknown point label {label!r}") from None

    def edges(self):
        return sorted(self.adjacency) if self.adjacency is not None else []

    def _neighbours(self):
        nbrs = [[] for _ in self.points]
        for i, j in sorted(self.adjacency or ()):
            nbrs[i].append(j)
            nbrs[j].append(i)
        return nbrs

    def _bfs(self, root):
        nbrs = self._neighbours()
        order, parent = [root], {root: None}
        queue = deque([root])
        while queue:
            i = queue.popleft()
            for j in nbrs[i]:
                if j not in parent:
                    parent[j] = i
                    order.append(j)
                    queue.append(j)
        return order, parent

    def traversal(self, anchor=0):
        """Visiting order and parent index for each point, starting at ``anchor``.

        Breadth-first along the adjacency graph when present; otherwise the
        anchor followed by the remaining points in declared order, each with
        the previously visited point as parent.
        """
        root = int(anchor)
        if self.adjacency is not None:
            order, parent = self._bfs(root)
            return order, [parent[i] for i in range(len(self))]
        order = [root] + [i for i in range(len(self)) if i != root]
        parents = [None] * len(self)
        for prev, cur in zip(order, order[1:]):
            parents[cur] = prev
        return order, parents


def _check_space(a, b):
    if a.space is b.space:
        return
    if a.space.points != b.space.points or a.space.adjacency != b.space.adjacency:
        raise ContractError("fields live on different parameter spaces")


def _merge_masks(*masks):
    present = [m for m in masks if m is not None]
    if not present:
        return None
    first = present[0]
    for m in present[1:]:
        if m.shape != first.shape or not np.array_equal(m, first):
            raise ContractError("fields carry different index masks")
    return first


class ScalarField:
    """Element of ``C(T)``: one complex value per point."""

    __slots__ = ("space", "values")
    __array_priority__ = 20

    def __init__(self, space: ParameterSpace, values):
        values = _frozen(np.broadcast_to(np.asarray(values, dtype=complex), (len(space),)))
        if not np.all(np.isfinite(values)):
            raise ContractError("scalar field has non-finite values")
        self.space = space
        self.values = values

    @classmethod
    def constant(cls, space, c):
        return cls(space, np.full(len(space), c, dtype=complex))

    @classmethod
    def one(cls, space):
        return cls.constant(space, 1.0)

    def __repr__(self):
        return f"ScalarField({np.array2string(self.values, precision=6)})"

    def __getitem__(self, label):
        return self.values[self.space.index(label)]

    def _coerce(self, other):
        if isinstance(other, ScalarField):
            _check_space(self, other)
            return other.values
        if isinstance(other, Number):
            return other
        return NotImplemented

    def __add__(self, other):
        o = self._coerce(other)
        return NotImplemented if o is NotImplemented else ScalarField(self.space, self.values + o)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        return NotImplemented if o is NotImplemented else ScalarField(self.space, self.values - o)

    def __rsub__(self, other):
        o = self._coerce(other)
        return NotImplemented if o is NotImplemented else ScalarField(self.space, o - self.values)

    def __mul__(self, other):
        o = self._coerce(other)
        return NotImplemented if o is NotImplemented else ScalarField(self.space, self.values * o)

    __rmul__ = __mul__

    def __neg__(self):
        return ScalarField(self.space, -self.values)

    def __pow__(self, p):
        return ScalarField(self.space, self.values ** p)

    def conj(self):
        """The involution ``x -> x*`` of ``C(T)``."""
        return ScalarField(self.space, np.conj(self.values))

    def abs(self):
        return ScalarField(self.space, np.abs(self.values))

    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.values)))

    def is_positive(self, tol=TOL_POS) -> bool:
        """Real-valued and nonnegative up to ``tol`` times the sup norm."""
        scale = max(self.sup_norm(), 1.0)
        v = self.values
        return bool(np.all(np.abs(v.imag) <= tol * scale) and np.all(v.real >= -tol * scale))

    def allclose(self, other, atol=1e-12):
        o = self._coerce(other)
        return bool(np.all(np.abs(self.values - o) <= atol))


class VectorField:
    """Element of ``H``: ``d`` complex components per point.

    ``mask`` is an optional ``(|T|, d)`` 0/1 array of index projections; a
    masked vector field must vanish wherever its mask does.
    """

    __slots__ = ("space", "components", "mask")
    __array_priority__ = 20

    def __init__(self, space: ParameterSpace, components, mask=None):
        comps = np.asarray(components, dtype=complex)
        if comps.ndim == 1:
            comps = np.broadcast_to(comps, (len(space), comps.shape[0]))
        if comps.ndim != 2 or comps.shape[0] != len(space) or comps.shape[1] < 1:
            raise ContractError(f"vector field needs shape (|T|, d), got {comps.shape}")
        if not np.all(np.isfinite(comps)):
            raise ContractError("vector field has non-finite components")
        if mask is not None:
            mask = _frozen(np.broadcast_to(np.asarray(mask, dtype=bool), comps.shape), bool)
            if np.any(comps[~mask] != 0):
                raise ContractError("vector field does not vanish on masked indices")
        self.space = space
        self.components = _frozen(comps)
        self.mask = mask

    @property
    def dim(self) -> int:
        return self.components.shape[1]

    def __repr__(self):
        return f"VectorField(|T|={len(self.space)}, d={self.dim})"

    def at(self, label):
        return self.components[self.space.index(label)]

    def norms(self) -> ScalarField:
        """Pointwise l2 norm ``t -> ||xi(t)||``."""
        return ScalarField(self.space, np.linalg.norm(self.components, axis=1))

    def sup_norm(self) -> float:
        return float(np.max(np.linalg.norm(self.components, axis=1)))

    def _like(self, comps, mask=None):
        return VectorField(self.space, comps, self.mask if mask is None else mask)

    def __add__(self, other):
        if not isinstance(other, VectorField):
            return NotImplemented
        _check_space(self, other)
        m = _merge_masks(self.mask, other.mask)
        return VectorField(self.space, self.components + other.components, m)

    def __sub__(self, other):
        if not isinstance(other, VectorField):
            return NotImplemented
        _check_space(self, other)
        m = _merge_masks(self.mask, other.mask)
        return VectorField(self.space, self.components - other.components, m)

    def __neg__(self):
        return self._like(-self.components)

    def __mul__(self, x):
        """Right module action ``xi * x`` by a scalar field (or a number)."""
        if isinstance(x, ScalarField):
            _check_space(self, x)
            return self._like(self.components * x.values[:, None])
        if isinstance(x, Number):
            return self._like(self.components * x)
        return NotImplemented

    def __rmul__(self, x):
        if isinstance(x, Number):
            return self._like(self.components * x)
        return NotImplemented


class OperatorField:
    """Compact module operator stored through its fibers ``(|T|, d, d)``."""

    __slots__ = ("space", "matrices", "mask")
    __array_priority__ = 20

    def __init__(self, space: ParameterSpace, matrices, mask=None):
        mats = np.asarray(matrices, dtype=complex)
        if mats.ndim == 2:
            mats = np.broadcast_to(mats, (len(space),) + mats.shape)
        if mats.ndim != 3 or mats.shape[0] != len(space) or mats.shape[1] != mats.shape[2]:
            raise ContractError(f"operator field needs shape (|T|, d, d), got {mats.shape}")
        if not np.all(np.isfinite(mats)):
            raise ContractError("operator field has non-finite entries")
        if mask is not None:
            mask = _frozen(np.broadcast_to(np.asarray(mask, dtype=bool), mats.shape[:2]), bool)
            allowed = mask[:, :, None] & mask[:, None, :]
            if np.any(mats[~allowed] != 0):
                raise ContractError("operator field has entries outside its index mask")
        self.space = space
        self.matrices = _frozen(mats)
        self.mask = mask

    @classmethod
    def identity(cls, space, d, mask=None):
        mats = np.broadcast_to(np.eye(d, dtype=complex), (len(space), d, d)).copy()
        if mask is not None:
            m = np.broadcast_to(np.asarray(mask, dtype=bool), (len(space), d))
            mats = mats * (m[:, :, None] & m[:, None, :])
        return cls(space, mats, mask)

    @classmethod
    def zeros(cls, space, d, mask=None):
        return cls(space, np.zeros((len(space), d, d), dtype=complex), mask)

    @property
    def dim(self) -> int:
        return self.matrices.shape[1]

    def __repr__(self):
        return f"OperatorField(|T|={len(self.space)}, d={self.dim})"

    def _like(self, mats):
        return OperatorField(self.space, mats, self.mask)

    @property
    def H(self) -> "OperatorField":
        """Adjoint, fiberwise conjugate transpose."""
        return self._like(np.conj(np.swapaxes(self.matrices, 1, 2)))

    def adjoint(self):
        return self.H

    def fiber_norms(self) -> np.ndarray:
        """Spectral norm of each fiber."""
        return np.linalg.norm(self.matrices, ord=2, axis=(1, 2))

    def op_norm(self) -> float:
        """Module operator norm ``sup_t ||u(t)||``."""
        return float(np.max(self.fiber_norms()))

    def __add__(self, other):
        if not isinstance(other, OperatorField):
            return NotImplemented
        _check_space(self, other)
        m = _merge_masks(self.mask, other.mask)
        return OperatorField(self.space, self.matrices + other.matrices, m)

    def __sub__(self, other):
        if not isinstance(other, OperatorField):
            return NotImplemented
        _check_space(self, other)
        m = _merge_masks(self.mask, other.mask)
        return OperatorField(self.space, self.matrices - other.matrices, m)

    def __neg__(self):
        return self._like(-self.matrices)

    def __mul__(self, x):
        if isinstance(x, ScalarField):
            return module_scale(self, x)
        if isinstance(x, Number):
            return self._like(self.matrices * x)
        return NotImplemented

    def __rmul__(self, x):
        if isinstance(x, Number):
            return self._like(self.matrices * x)
        return NotImplemented

    def __matmul__(self, other):
        if isinstance(other, OperatorField):
            _check_space(self, other)
            m = _merge_masks(self.mask, other.mask)
            return OperatorField(self.space, self.matrices @ other.matrices, m)
        if isinstance(other, VectorField):
            _check_space(self, other)
            m = _merge_masks(self.mask, other.mask)
            comps = np.einsum("tij,tj->ti", self.matrices, other.components)
            return VectorField(self.space, comps, m)
        return NotImplemented


def inner_product(xi: VectorField, eta: VectorField) -> ScalarField:
    """Module inner product ``<xi, eta>(t) = sum_i conj(eta_i(t)) xi_i(t)``.

    Linear in the first argument.
    """
    _check_space(xi, eta)
    if xi.dim != eta.dim:
        raise ContractError(f"dimension mismatch: {xi.dim} vs {eta.dim}")
    return ScalarField(xi.space, np.einsum("ti,ti->t", xi.components, np.conj(eta.components)))


def fiber_eval(u, t) -> np.ndarray:
    """The fiber ``u(t)`` of an operator field (or ``xi(t)`` of a vector field)."""
    i = u.space.index(t)
    if isinstance(u, OperatorField):
        return u.matrices[i]
    return u.components[i]


def rank_one(xi: VectorField, eta: VectorField) -> OperatorField:
    """The operator ``zeta -> xi <zeta, eta>``; fiber ``xi(t) eta(t)^H``."""
    _check_space(xi, eta)
    if xi.dim != eta.dim:
        raise ContractError(f"dimension mismatch: {xi.dim} vs {eta.dim}")
    m = _merge_masks(xi.mask, eta.mask)
    mats = xi.components[:, :, None] * np.conj(eta.components)[:, None, :]
    return OperatorField(xi.space, mats, m)


def module_scale(u: OperatorField, x: ScalarField) -> OperatorField:
    """Right multiplication ``u x`` by an element of ``C(T)``."""
    _check_space(u, x)
    return OperatorField(u.space, u.matrices * x.values[:, None, None], u.mask)


def is_positive(u: OperatorField, tol=TOL_POS) -> bool:
    """True iff every fiber is positive semidefinite.

    ``tol`` is relative to the operator norm of ``u``. A non-selfadjoint
    field raises :class:`ContractError`.
    """
    m = u.matrices
    scale = max(u.op_norm(), np.finfo(float).tiny)
    skew = np.abs(m - np.conj(np.swapaxes(m, 1, 2))).max()
    if skew > tol * scale:
        raise ContractError("positivity test needs a selfadjoint operator field")
    lo = np.linalg.eigvalsh(0.5 * (m + np.conj(np.swapaxes(m, 1, 2))))[:, 0]
    return bool(np.all(lo >= -tol * scale))


def neighbor_jump(field) -> float:
    """Largest change of a field across an adjacency edge.

    Uses the sup norm for scalar fields, the l2 norm for vector fields and the
    spectral norm for operator fields. Returns 0 when no adjacency is declared.
    """
    edges = field.space.edges()
    if not edges:
        return 0.0
    i, j = np.array(edges).T
    if isinstance(field, ScalarField):
        return float(np.max(np.abs(field.values[i] - field.values[j])))
    if isinstance(field, VectorField):
        return float(np.max(np.linalg.norm(field.components[i] - field.components[j], axis=1)))
    diff = field.matrices[i] - field.matrices[j]
    return float(np.max(np.linalg.norm(diff, ord=2, axis=(1, 2))))


def standard_generator(space, d, iota, mask=None) -> VectorField:
    """The generator ``e_iota = (delta_{iota,lambda} 1)_lambda`` (times ``p_iota``)."""
    comps = np.zeros((len(space), d), dtype=complex)
    comps[:, iota] = 1.0
    if mask is not None:
        comps = comps * np.broadcast_to(np.asarray(mask, dtype=bool), comps.shape)
    return VectorField(space, comps, mask)


def _cnormal(rng, shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def random_operator_field(space, d, rng, positive=False) -> OperatorField:
    """Entries with independent standard normal real and imaginary parts.

    With ``positive=True`` the field ``u^* u`` is returned instead.
    """
    u = OperatorField(space, _cnormal(rng, (len(space), d, d)))
    return u.H @ u if positive else u


def random_vector_field(space, d, rng) -> VectorField:
    return VectorField(space, _cnormal(rng, (len(space), d)))


def random_scalar_field(space, rng) -> ScalarField:
    return ScalarField(space, _cnormal(rng, (len(space),)))
