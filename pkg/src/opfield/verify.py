"""Randomised conformance suite for the operator-field identities and inequalities."""
from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from . import denselin
from .fieldcore import (
    OperatorField,
    ParameterSpace,
    VectorField,
    inner_product,
    random_operator_field,
    random_scalar_field,
    random_vector_field,
    rank_one,
)
from .kernelop import (
    KernelField,
    L2Basis,
    QuadratureSpace,
    adjoint_kernel,
    kernel_to_operator,
    separable_kernel,
)
from .schatten import (
    phase_align,
    random_omega_family,
    schatten_decompose,
    schatten_decompose_positive,
    singular_omega_pair,
    omega_sum,
    theta_array,
    truncate_tail,
    truncation_bound,
)
from .traceclass import (
    DualFunctional,
    conjugate_exponent,
    dual_pair,
    fiber_trace,
    functional_to_operator,
    lp_norm,
    norming_element,
    trace,
)

__all__ = [
    "CheckRecord",
    "VerificationReport",
    "weyl_sum_violation",
    "weyl_product_violation",
    "run_suite",
    "CHECKS",
    "P_VALUES",
]

P_VALUES = (1.0, 1.5, 2.0, 3.0, np.inf)
NORMING_P = (0.0, 1.0, 2.0, 3.0)


@dataclass
class CheckRecord:
    name: str
    reference: str
    max_violation: float
    tolerance: float
    runtime: float | None = None

    @property
    def status(self):
        return "pass" if self.max_violation <= self.tolerance else "fail"

    def as_dict(self):
        d = {"name": self.name, "reference": self.reference, "status": self.status,
             "max_violation": float(self.max_violation), "tolerance": float(self.tolerance)}
        if self.runtime is not None:
            d["runtime"] = self.runtime
        return d


@dataclass
class VerificationReport:
    seed: int
    trials: int
    records: list = field(default_factory=list)

    @property
    def passed(self):
        return all(r.status == "pass" for r in self.records)

    def as_dict(self):
        return {"seed": self.seed, "trials": self.trials,
                "status": "pass" if self.passed else "fail",
                "checks": [r.as_dict() for r in self.records]}


def weyl_sum_violation(theta_u, theta_v, theta_sum):
    """Largest excess in ``theta_{2n-1}(u+v) <= theta_n(u) + theta_n(v)`` and
    ``theta_{2n}(u+v) <= theta_n(u) + theta_{n+1}(v)``.

    Arrays have shape ``(d, |T|)`` with index 0 holding ``theta_1``.
    """
    tu, tv, ts = (np.asarray(a, dtype=float) for a in (theta_u, theta_v, theta_sum))
    d = ts.shape[0]
    tv_ext = np.vstack([tv, np.zeros((1,) + tv.shape[1:])])
    worst = -np.inf
    for n in range(1, d + 1):
        if 2 * n - 1 <= d:
            worst = max(worst, float(np.max(ts[2 * n - 2] - tu[n - 1] - tv[n - 1])))
        if 2 * n <= d:
            worst = max(worst, float(np.max(ts[2 * n - 1] - tu[n - 1] - tv_ext[n])))
    return max(worst, 0.0)


def weyl_product_violation(theta_u, theta_v, theta_prod):
    """Largest excess in ``theta_{2n-1}(uv) <= theta_n(u) theta_n(v)`` and
    ``theta_{2n}(uv) <= theta_n(u) theta_{n+1}(v)``."""
    tu, tv, tp = (np.asarray(a, dtype=float) for a in (theta_u, theta_v, theta_prod))
    d = tp.shape[0]
    tv_ext = np.vstack([tv, np.zeros((1,) + tv.shape[1:])])
    worst = -np.inf
    for n in range(1, d + 1):
        if 2 * n - 1 <= d:
            worst = max(worst, float(np.max(tp[2 * n - 2] - tu[n - 1] * tv[n - 1])))
        if 2 * n <= d:
            worst = max(worst, float(np.max(tp[2 * n - 1] - tu[n - 1] * tv_ext[n])))
    return max(worst, 0.0)


def _unit(u):
    return u * (1.0 / u.op_norm())


def _lp(theta, p):
    if p == 0 or np.isinf(p):
        return float(np.max(theta[0]))
    return float(np.max(np.sum(theta ** p, axis=0))) ** (1 / p)


# Each check receives (rng, space, d) and returns a violation for one trial.

def _check_reconstruction(rng, space, d):
    u = random_operator_field(space, d, rng)
    sys = schatten_decompose(u)
    return sys.residual(u) / u.op_norm()


def _check_orthonormality(rng, space, d):
    return schatten_decompose(random_operator_field(space, d, rng)).orthonormality_defect()


def _check_theta_adjoint(rng, space, d):
    u = random_operator_field(space, d, rng)
    _, absu = denselin.polar(u.matrices)
    t, ts, ta = theta_array(u), theta_array(u.H), theta_array(OperatorField(space, absu))
    return float(max(np.max(np.abs(t - ts)), np.max(np.abs(t - ta)))) / u.op_norm()


def _check_theta_square(rng, space, d):
    u = random_operator_field(space, d, rng)
    t = theta_array(u)
    return float(np.max(np.abs(theta_array(u.H @ u) - t ** 2))) / u.op_norm() ** 2


def _check_weyl_sum(rng, space, d):
    u, v = (_unit(random_operator_field(space, d, rng)) for _ in range(2))
    return weyl_sum_violation(theta_array(u), theta_array(v), theta_array(u + v))


def _check_weyl_product(rng, space, d):
    u, v = (_unit(random_operator_field(space, d, rng)) for _ in range(2))
    return weyl_product_violation(theta_array(u), theta_array(v), theta_array(u @ v))


def _check_triangle(rng, space, d):
    u, v = (_unit(random_operator_field(space, d, rng)) for _ in range(2))
    tu, tv, ts = theta_array(u), theta_array(v), theta_array(u + v)
    return max(max(_lp(ts, p) - _lp(tu, p) - _lp(tv, p), 0.0) for p in P_VALUES)


def _check_holder(rng, space, d):
    u, v = (_unit(random_operator_field(space, d, rng)) for _ in range(2))
    tu, tv = theta_array(u), theta_array(v)
    t_uv, t_vu = theta_array(u @ v), theta_array(v @ u)
    worst = 0.0
    for p in P_VALUES:
        q = conjugate_exponent(p)
        rhs = _lp(tu, p) * _lp(tv, q)
        worst = max(worst, _lp(t_uv, 1) - rhs, _lp(t_vu, 1) - rhs)
    return worst


def _check_sandwich(rng, space, d):
    u, v, w = (_unit(random_operator_field(space, d, rng)) for _ in range(3))
    tu, t = theta_array(u), theta_array(v @ u @ w)
    scale = v.op_norm() * w.op_norm()
    return max(max(_lp(t, p) - scale * _lp(tu, p), 0.0) for p in P_VALUES)


def _check_norming(rng, space, d):
    u = random_operator_field(space, d, rng)
    sys = schatten_decompose(u)
    worst = 0.0
    for p in NORMING_P:
        v = norming_element(u, sys, p)
        rhs = _lp(theta_array(u), p) * _lp(theta_array(v), conjugate_exponent(p))
        for prod in (u @ v, v @ u):
            worst = max(worst, abs(_lp(theta_array(prod), 1) - rhs) / rhs)
    return worst


def _check_trace_cyclic(rng, space, d):
    u, v = (random_operator_field(space, d, rng) for _ in range(2))
    return float(np.max(np.abs((dual_pair(v, u) - dual_pair(u, v)).values))) / (u.op_norm() * v.op_norm() * d)


def _check_trace_module(rng, space, d):
    u = random_operator_field(space, d, rng)
    x = random_scalar_field(space, rng)
    lhs = trace(u * x).values
    rhs = trace(u).values * x.values
    return float(np.max(np.abs(lhs - rhs))) / (u.op_norm() * x.sup_norm() * d)


def _check_trace_rank_one(rng, space, d):
    xi, eta = random_vector_field(space, d, rng), random_vector_field(space, d, rng)
    lhs = trace(rank_one(xi, eta)).values
    rhs = inner_product(xi, eta).values
    return float(np.max(np.abs(lhs - rhs))) / (xi.sup_norm() * eta.sup_norm())


def _check_trace_positive(rng, space, d):
    u = random_operator_field(space, d, rng, positive=True)
    tr = trace(u, schatten_decompose_positive(u))
    n1 = lp_norm(u, 1).norm
    return abs(tr.sup_norm() - n1) / n1 + float(np.max(np.abs(tr.values.imag))) / n1


def _check_trace_independent(rng, space, d):
    u = random_operator_field(space, d, rng)
    a = trace(u, schatten_decompose(u))
    b = trace(u, schatten_decompose(u.H, anchor=space.points[-1]).adjoint())
    return float(np.max(np.abs(a.values - b.values))) / (u.op_norm() * d)


def _check_truncation(rng, space, d):
    u = random_operator_field(space, d, rng)
    sys = schatten_decompose(u)
    worst = 0.0
    for k in (1, 5, 10):
        for p in (1.0, 2.0):
            rem = lp_norm(u - truncate_tail(u, sys, k, p), p).norm
            worst = max(worst, rem - truncation_bound(k, p))
    return max(worst, 0.0)


def _check_omega_bound(rng, space, d):
    u = _unit(random_operator_field(space, d, rng))
    th = theta_array(u)
    worst = 0.0
    for p in (1.0, 2.0, 3.0):
        bound = np.sum(th ** p, axis=0)
        f1, f2 = random_omega_family(space, d, rng), random_omega_family(space, d, rng)
        worst = max(worst, float(np.max(omega_sum(u, f1, f2, p).values.real - bound)))
    return max(worst, 0.0)


def _check_omega_attained(rng, space, d):
    u = _unit(random_operator_field(space, d, rng))
    sys = schatten_decompose(u)
    fam_eta, fam_xi = singular_omega_pair(sys)
    th = theta_array(u)
    worst = 0.0
    for p in (1.0, 2.0, 3.0):
        val = omega_sum(u, fam_eta, fam_xi, p).values.real
        worst = max(worst, float(np.max(np.abs(val - np.sum(th ** p, axis=0)))))
    return worst


def _check_dual_round_trip(rng, space, d):
    v0 = random_operator_field(space, d, rng)
    v = functional_to_operator(DualFunctional.from_operator(v0), rng)
    return float(np.max(np.abs(v.matrices - v0.matrices))) / v0.op_norm()


def _check_dual_involution(rng, space, d):
    v, u = random_operator_field(space, d, rng), random_operator_field(space, d, rng)
    lhs = DualFunctional.from_operator(v.H)(u).values
    rhs = DualFunctional.from_operator(v).adjoint()(u).values
    return float(np.max(np.abs(lhs - rhs))) / (u.op_norm() * v.op_norm() * d)


def _random_kernel(rng, space, n):
    quad = QuadratureSpace(tuple(range(n)), rng.uniform(0.2, 1.0, n))
    vals = rng.standard_normal((n, n, len(space))) + 1j * rng.standard_normal((n, n, len(space)))
    return KernelField(quad, space, vals)


def _check_kernel_adjoint(rng, space, d):
    w = _random_kernel(rng, space, d)
    basis = L2Basis.nodal(w.quad)
    op, op_adj = kernel_to_operator(w, basis), kernel_to_operator(adjoint_kernel(w), basis)
    return (op_adj - op.H).op_norm() / op.op_norm()


def _check_kernel_hs(rng, space, d):
    w = _random_kernel(rng, space, d)
    th = theta_array(kernel_to_operator(w, L2Basis.nodal(w.quad)))
    mu = w.quad.weights
    rhs = np.einsum("rst,r,s->t", np.abs(w.values) ** 2, mu, mu)
    return float(np.max(np.abs(np.sum(th ** 2, axis=0) - rhs) / rhs))


def _check_kernel_separable(rng, space, d):
    quad = QuadratureSpace(tuple(range(d)), rng.uniform(0.2, 1.0, d))
    a = rng.standard_normal((d, len(space))) + 1j * rng.standard_normal((d, len(space)))
    b = rng.standard_normal(d) + 1j * rng.standard_normal(d)
    th = theta_array(kernel_to_operator(separable_kernel(quad, space, a, b), L2Basis.nodal(quad)))
    return float(np.max(th[1:] / th[0])) if d > 1 else 0.0


def _check_phase_alignment(rng, space, d):
    path = ParameterSpace.path(len(space))
    base = rng.standard_normal(d) + 1j * rng.standard_normal(d)
    base /= np.linalg.norm(base)
    phases = np.exp(2j * np.pi * rng.random(len(path)))
    eta = VectorField(path, phases[:, None] * base[None, :])
    xi = phase_align(eta)
    const = float(np.max(np.abs(xi.components - xi.components[0])))
    proj = lambda f: f.components[:, :, None] * np.conj(f.components)[:, None, :]
    return max(const, float(np.max(np.abs(proj(xi) - proj(eta)))))


CHECKS = [
    # name, reference statement, tolerance key, function
    ("schatten_reconstruction", "u = sum theta_n xi_n <., eta_n>", "reconstruction", _check_reconstruction),
    ("u_orthonormality", "<xi_m, xi_n> = delta_mn e_n(u)", "reconstruction", _check_orthonormality),
    ("theta_adjoint_abs", "theta_n(u) = theta_n(u*) = theta_n(|u|)", "identity", _check_theta_adjoint),
    ("theta_square", "theta_n(u*u) = theta_n(u)^2", "identity", _check_theta_square),
    ("weyl_sum", "theta_{2n-1}(u+v) <= theta_n(u) + theta_n(v)", "inequality", _check_weyl_sum),
    ("weyl_product", "theta_{2n-1}(uv) <= theta_n(u) theta_n(v)", "inequality", _check_weyl_product),
    ("lp_triangle", "||u+v||_p <= ||u||_p + ||v||_p", "inequality", _check_triangle),
    ("holder", "||uv||_1 <= ||u||_p ||v||_q", "inequality", _check_holder),
    ("sandwich", "||vuw||_p <= ||v|| ||u||_p ||w||", "inequality", _check_sandwich),
    ("norming_attainment", "||uv||_1 = ||vu||_1 = ||u||_p ||v||_q", "attainment", _check_norming),
    ("trace_cyclic", "tr(uv) = tr(vu)", "identity", _check_trace_cyclic),
    ("trace_module", "tr(ux) = tr(u) x", "identity", _check_trace_module),
    ("trace_rank_one", "tr(xi <., eta>) = <xi, eta>", "identity", _check_trace_rank_one),
    ("trace_positive_norm", "||tr u|| = ||u||_1 for u >= 0", "identity", _check_trace_positive),
    ("trace_decomposition_independent", "tr u does not depend on the decomposition", "identity", _check_trace_independent),
    ("truncation_bound", "||u - u_k||_p <= (1/k)(sum n^-2p)^(1/p)", "exact", _check_truncation),
    ("omega_bound", "sum |<u zeta_n, zeta'_n>|^p <= sum theta_n^p", "inequality", _check_omega_bound),
    ("omega_attained", "singular vectors attain sum theta_n^p", "inequality", _check_omega_attained),
    ("dual_round_trip", "v -> tr(. v) -> v", "reconstruction", _check_dual_round_trip),
    ("dual_involution", "tr(. v*) = (tr(.* v))*", "identity", _check_dual_involution),
    ("kernel_adjoint", "operator of w'(r,s) = w(s,r)* is the adjoint", "identity", _check_kernel_adjoint),
    ("kernel_hs_identity", "sum theta_n(w)^2 = ||w(.,.)(t)||_2^2", "reconstruction", _check_kernel_hs),
    ("kernel_separable_rank", "separable kernel gives rank-one fibers", "identity", _check_kernel_separable),
    ("phase_alignment", "aligned field constant, projections unchanged", "identity", _check_phase_alignment),
]

SUITE_TOLERANCES = {"reconstruction": 1e-9, "identity": 1e-10, "inequality": 1e-9,
                    "attainment": 1e-8, "exact": 0.0}


def _fixture_records(scenario, tol, timings):
    recs = []
    for name, u in sorted(scenario.operators.items()):
        start = time.perf_counter()
        sys = schatten_decompose(u)
        scale = max(u.op_norm(), np.finfo(float).tiny)
        viol = max(sys.residual(u) / scale, sys.orthonormality_defect())
        recs.append(CheckRecord(f"fixture:{name}:decomposition", "u = sum theta_n xi_n <., eta_n>",
                                viol, tol["reconstruction"],
                                time.perf_counter() - start if timings else None))
        start = time.perf_counter()
        tr_err = float(np.max(np.abs(trace(u, sys).values - fiber_trace(u).values))) / (scale * u.dim)
        recs.append(CheckRecord(f"fixture:{name}:trace", "tr u = sum theta_n <xi_n, eta_n>",
                                tr_err, tol["identity"],
                                time.perf_counter() - start if timings else None))
    for name, w in sorted(scenario.kernels.items()):
        start = time.perf_counter()
        basis = L2Basis.nodal(w.quad)
        op = kernel_to_operator(w, basis)
        th = theta_array(op)
        mu = w.quad.weights
        rhs = np.einsum("rst,r,s->t", np.abs(w.values) ** 2, mu, mu)
        err = float(np.max(np.abs(np.sum(th ** 2, axis=0) - rhs) / np.maximum(rhs, 1e-300)))
        adj = (kernel_to_operator(adjoint_kernel(w), basis) - op.H).op_norm() / max(op.op_norm(), 1e-300)
        recs.append(CheckRecord(f"fixture:{name}:kernel", "w' gives the adjoint; HS identity",
                                max(err, adj), tol["reconstruction"],
                                time.perf_counter() - start if timings else None))
    return recs


def run_suite(seed=0, trials=20, d=6, n_points=8, scenario=None, tolerances=None,
              timings=False) -> VerificationReport:
    """Run every check on ``trials`` random instances and on a scenario's fixtures.

    All randomness derives from ``seed``; without ``timings`` the report is
    byte-for-byte reproducible.
    """
    tol = dict(SUITE_TOLERANCES)
    if tolerances:
        tol.update(tolerances)
    report = VerificationReport(seed, trials)
    if scenario is not None:
        report.records.extend(_fixture_records(scenario, tol, timings))
    space = ParameterSpace.path(n_points)
    root = np.random.SeedSequence(seed)
    for (name, ref, key, fn), child in zip(CHECKS, root.spawn(len(CHECKS))):
        rng = np.random.default_rng(child)
        start = time.perf_counter()
        worst = 0.0
        for _ in range(trials):
            worst = max(worst, float(fn(rng, space, d)))
        runtime = time.perf_counter() - start if timings else None
        report.records.append(CheckRecord(name, ref, worst, tol[key], runtime))
    return report
