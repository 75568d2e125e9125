"""Schatten p-norms, the C(T)-valued trace, Hilbert-Schmidt structure and duality."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .fieldcore import (
    ContractError,
    OperatorField,
    ScalarField,
    random_scalar_field,
    rank_one,
    standard_generator,
)
from .schatten import SingularSystem, schatten_decompose, theta_array

__all__ = [
    "LpReport",
    "conjugate_exponent",
    "lp_norm",
    "trace",
    "trace_via_fourier_basis",
    "fiber_trace",
    "hs_inner",
    "norming_element",
    "dual_pair",
    "DualFunctional",
    "FunctionalConditionError",
    "functional_to_operator",
]


def _check_p(p, allow_inf=True):
    p = float(p)
    if p == 0 or p >= 1 and (allow_inf or np.isfinite(p)):
        return p
    raise ContractError(f"exponent must lie in {{0}} U [1, inf{']' if allow_inf else ')'}, got {p}")


def conjugate_exponent(p) -> float:
    """``q`` with ``1/p + 1/q = 1``; ``0`` (compact operators) pairs with ``1``."""
    p = _check_p(p)
    if p == 0 or np.isinf(p):
        return 1.0
    if p == 1:
        return np.inf
    return p / (p - 1)


@dataclass(frozen=True)
class LpReport:
    p: float
    norm: float
    power_sum_field: ScalarField | None
    tail_term: float

    def as_dict(self):
        ps = None
        if self.power_sum_field is not None:
            ps = [float(v) for v in self.power_sum_field.values.real]
        return {"p": _json_p(self.p), "norm": self.norm, "power_sum_field": ps,
                "tail_term": self.tail_term}


def _json_p(p):
    return "inf" if np.isinf(p) else p


def _lp_from_theta(theta, p):
    """Norm from singular values ``theta`` of shape ``(d, T)``."""
    if p == 0 or np.isinf(p):
        return float(np.max(theta[0])), None
    ps = np.sum(theta ** p, axis=0)
    return float(np.max(ps)) ** (1.0 / p), ps


def lp_norm(u: OperatorField, p) -> LpReport:
    """Schatten p-norm ``|| sum_n theta_n(u)^p ||^{1/p}`` (sup norm over ``T``).

    ``p = 0`` and ``p = inf`` both give the operator norm ``||theta_1(u)||``.
    ``tail_term`` is the largest value of the last term ``theta_d^p`` and
    serves as a summability diagnostic.
    """
    p = _check_p(p)
    th = theta_array(u)
    norm, ps = _lp_from_theta(th, p)
    if ps is None:
        return LpReport(p, norm, None, float(np.max(th[-1])))
    return LpReport(p, norm, ScalarField(u.space, ps), float(np.max(th[-1] ** p)))


def fiber_trace(u: OperatorField) -> ScalarField:
    """Matrix trace of every fiber."""
    return ScalarField(u.space, np.einsum("tii->t", u.matrices))


def trace(u: OperatorField, sys: SingularSystem | None = None, tol=1e-9) -> ScalarField:
    """C(T)-valued trace ``sum_n theta_n <xi_n, eta_n>``.

    A decomposition is computed when ``sys`` is omitted. A supplied system
    must reconstruct ``u`` to within ``tol * ||u||``.
    """
    if sys is None:
        sys = schatten_decompose(u)
    else:
        scale = max(u.op_norm(), 1.0)
        if sys.residual(u) > tol * scale:
            raise ContractError("singular system does not reconstruct the operator")
    ip = np.einsum("nti,nti->nt", sys.xi_values, np.conj(sys.eta_values))
    return ScalarField(u.space, np.sum(sys.theta_values * ip, axis=0))


def trace_via_fourier_basis(u: OperatorField, basis, tol=1e-9, mask=None) -> ScalarField:
    """``sum_zeta <u zeta, zeta>`` over a Fourier basis of the module.

    ``basis`` must be pairwise orthogonal with ``<zeta, zeta>`` a 0/1 field
    and must resolve the identity of the (masked) module within ``tol``.
    """
    basis = list(basis)
    if not basis:
        raise ContractError("empty basis")
    z = np.stack([b.components for b in basis])  # (n, T, i)
    d = u.dim
    if z.shape[2] != d:
        raise ContractError("basis dimension does not match the operator")
    gram = np.einsum("nti,mti->tmn", z, np.conj(z))
    diag = np.real(np.einsum("tnn->tn", gram))
    if np.any(np.minimum(np.abs(diag), np.abs(diag - 1)) > tol):
        raise ContractError("basis vectors are not normalised to indicator fields")
    off = gram - np.einsum("tn,nm->tnm", diag, np.eye(len(basis)))
    if np.max(np.abs(off)) > tol:
        raise ContractError("basis vectors are not pairwise orthogonal")
    if mask is None:
        mask = u.mask if u.mask is not None else basis[0].mask
    proj = np.einsum("nti,ntj->tij", z, np.conj(z))
    target = np.broadcast_to(np.eye(d), proj.shape).astype(complex)
    if mask is not None:
        m = np.asarray(mask, dtype=bool)
        target = target * (m[:, :, None] & m[:, None, :])
    if np.max(np.abs(proj - target)) > tol:
        raise ContractError("basis does not span the module")
    vals = np.einsum("nti,tij,ntj->t", np.conj(z), u.matrices, z)
    return ScalarField(u.space, vals)


def _standard_basis(space, d, mask=None):
    return [standard_generator(space, d, i, mask) for i in range(d)]


def _tr(u):
    return trace_via_fourier_basis(u, _standard_basis(u.space, u.dim, u.mask), mask=u.mask)


def hs_inner(u: OperatorField, v: OperatorField) -> ScalarField:
    """Hilbert-Schmidt inner product ``<u, v> = tr(v^* u)``."""
    if u.dim != v.dim:
        raise ContractError("shape mismatch")
    return _tr(v.H @ u)


def dual_pair(v: OperatorField, u: OperatorField) -> ScalarField:
    """``tr(u v)``, the value of the functional induced by ``v`` at ``u``."""
    return _tr(u @ v)


def norming_element(u: OperatorField, sys: SingularSystem, p) -> OperatorField:
    """Operator ``v`` with ``||u v||_1 = ||v u||_1 = ||u||_p ||v||_q``.

    * ``p = 1``: the identity.
    * ``p = 0``: ``eta_1 <., xi_1>``.
    * ``1 < p < inf``: ``sum_n theta_n^{p/q} eta_n <., xi_n>``, ``q`` conjugate to ``p``.
    """
    p = _check_p(p, allow_inf=False)
    if p == 1:
        return OperatorField.identity(u.space, u.dim, u.mask)
    if p == 0:
        return rank_one(sys.eta[0], sys.xi[0])
    q = conjugate_exponent(p)
    th = sys.theta_values ** (p / q)
    swapped = SingularSystem(sys.space, th, sys.eta_values, sys.xi_values,
                             sys.e_values, sys.mask)
    return swapped.reconstruct()


class FunctionalConditionError(ContractError):
    """The functional fails module linearity or the row condition at a generator."""

    def __init__(self, message, generator):
        super().__init__(f"{message} at generator {generator}")
        self.generator = generator


class DualFunctional:
    """A map from operator fields to scalar fields.

    ``adjoint()`` gives ``u -> (phi(u^*))^*``.
    """

    def __init__(self, func: Callable[[OperatorField], ScalarField], space, dim, name=None):
        self.func = func
        self.space = space
        self.dim = int(dim)
        self.name = name
        self._rows = None

    def __call__(self, u: OperatorField) -> ScalarField:
        return self.func(u)

    @classmethod
    def from_operator(cls, v: OperatorField):
        """The functional ``u -> tr(u v)``."""
        return cls(lambda u: dual_pair(v, u), v.space, v.dim, name="pairing")

    @classmethod
    def trace(cls, space, dim):
        return cls(_tr, space, dim, name="trace")

    def adjoint(self) -> "DualFunctional":
        return DualFunctional(lambda u: self.func(u.H).conj(), self.space, self.dim,
                              name=f"{self.name}*" if self.name else None)

    def rows(self) -> np.ndarray:
        """Values ``phi(e_lambda <., e_iota>)`` arranged as ``[t, iota, lambda]``."""
        if self._rows is None:
            d = self.dim
            gens = [standard_generator(self.space, d, i) for i in range(d)]
            out = np.zeros((len(self.space), d, d), dtype=complex)
            for lam in range(d):
                for iota in range(d):
                    out[:, iota, lam] = self.func(rank_one(gens[lam], gens[iota])).values
            self._rows = out
        return self._rows


def functional_to_operator(phi: DualFunctional, rng=None, tol=1e-9) -> OperatorField:
    """Recover ``v`` with ``phi = tr(. v)`` from a module-linear functional.

    The fiber entry ``(iota, lambda)`` of ``v`` is ``phi(e_lambda <., e_iota>)``.
    Module linearity ``phi(g x) = phi(g) x`` is checked on every generator
    ``g`` with a random scalar field ``x``, and the result is checked to
    reproduce ``phi`` on the generators; failures raise
    :class:`FunctionalConditionError` naming the generator.
    """
    rng = np.random.default_rng(0) if rng is None else rng
    d, space = phi.dim, phi.space
    rows = phi.rows()
    if not np.all(np.isfinite(rows)):
        raise FunctionalConditionError("non-finite value", None)
    scale = max(float(np.max(np.abs(rows))), 1.0)
    gens = [standard_generator(space, d, i) for i in range(d)]
    x = random_scalar_field(space, rng)
    xs = max(x.sup_norm(), 1.0)
    for lam in range(d):
        for iota in range(d):
            g = rank_one(gens[lam], gens[iota])
            lhs = phi(g * x).values
            rhs = rows[:, iota, lam] * x.values
            if np.max(np.abs(lhs - rhs)) > tol * scale * xs:
                raise FunctionalConditionError("phi(u x) != phi(u) x", (iota, lam))
    v = OperatorField(space, rows)
    for lam in range(d):
        for iota in range(d):
            g = rank_one(gens[lam], gens[iota])
            if np.max(np.abs(dual_pair(v, g).values - rows[:, iota, lam])) > tol * scale:
                raise FunctionalConditionError("round trip mismatch", (iota, lam))
    return v
