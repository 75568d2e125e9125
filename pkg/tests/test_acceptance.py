"""Acceptance suite: one test per criterion, each at its stated tolerance.

Every test records a PASS/FAIL line; the lines are printed in the pytest
terminal summary. Running this file directly prints them too.
"""
import numpy as np

from opfield.denselin import polar
from opfield.fieldcore import (
    OperatorField,
    ParameterSpace,
    VectorField,
    inner_product,
    random_operator_field,
    random_scalar_field,
    random_vector_field,
    rank_one,
)
from opfield.kernelop import (
    KernelField,
    L2Basis,
    QuadratureSpace,
    adjoint_kernel,
    kernel_to_operator,
    separable_kernel,
)
from opfield.schatten import (
    SingularSystem,
    omega_sum,
    phase_align,
    random_omega_family,
    schatten_decompose,
    singular_omega_pair,
    theta_array,
    truncate_tail,
    truncation_bound,
)
from opfield.traceclass import (
    DualFunctional,
    conjugate_exponent,
    functional_to_operator,
    lp_norm,
    norming_element,
    trace,
)
from opfield.verify import weyl_product_violation, weyl_sum_violation

RESULTS = {}


def record(criterion, *checks):
    """Store one line for a criterion; ``checks`` are ``(label, violation, tolerance)``."""
    ok = all(worst <= tol for _, worst, tol in checks)
    parts = "; ".join(f"{label} {worst:.2e} <= {tol:g}" for label, worst, tol in checks)
    RESULTS[criterion] = f"{'PASS' if ok else 'FAIL'}  {criterion}: {parts}"
    return ok


def _lp(theta, p):
    if p == 0 or np.isinf(p):
        return float(np.max(theta[0]))
    return float(np.max(np.sum(theta ** p, axis=0))) ** (1 / p)


def test_01_reconstruction():
    rng = np.random.default_rng(101)
    sp = ParameterSpace.path(16)
    rec = orth = 0.0
    for _ in range(20):
        u = random_operator_field(sp, 8, rng)
        s = schatten_decompose(u)
        rec = max(rec, s.residual(u) / u.op_norm())
        orth = max(orth, s.orthonormality_defect())
    assert record("C1",
                  ("reconstruction, relative to ||u||", rec, 1e-9),
                  ("u-orthonormality of both systems", orth, 1e-9))


def test_02_theta_identities():
    rng = np.random.default_rng(102)
    sp = ParameterSpace.path(16)
    worst = 0.0
    for _ in range(20):
        u = random_operator_field(sp, 8, rng)
        th = theta_array(u)
        scale = th[0]  # theta_1(u)(t), pointwise
        _, absu = polar(u.matrices)
        for other in (theta_array(u.H), theta_array(OperatorField(sp, absu))):
            worst = max(worst, float(np.max(np.abs(other - th) / scale)))
        worst = max(worst, float(np.max(np.abs(theta_array(u.H @ u) - th ** 2) / scale ** 2)))
    assert record("C2",
                  ("theta identities, relative per point", worst, 1e-10))


def test_03_inequalities():
    rng = np.random.default_rng(103)
    sp = ParameterSpace.path(8)
    worst = 0.0
    for _ in range(100):
        u, v, w = (random_operator_field(sp, 6, rng) for _ in range(3))
        tu, tv = theta_array(u), theta_array(v)
        worst = max(worst, weyl_sum_violation(tu, tv, theta_array(u + v)))
        worst = max(worst, weyl_product_violation(tu, tv, theta_array(u @ v)))
        tuv, tvuw = theta_array(u @ v), theta_array(v @ u @ w)
        tsum = theta_array(u + v)
        for p in (1.0, 1.5, 2.0, 3.0, np.inf):
            q = conjugate_exponent(p)
            worst = max(worst, _lp(tsum, p) - _lp(tu, p) - _lp(tv, p))
            worst = max(worst, _lp(tuv, 1) - _lp(tu, p) * _lp(tv, q))
            worst = max(worst, _lp(tvuw, p) - v.op_norm() * _lp(tu, p) * w.op_norm())
    assert record("C3",
                  ("Weyl, triangle, Hoelder and sandwich inequalities", worst, 1e-9))


def test_04_norming_attainment():
    rng = np.random.default_rng(104)
    sp = ParameterSpace.path(8)
    worst = 0.0
    for _ in range(20):
        u = random_operator_field(sp, 6, rng)
        s = schatten_decompose(u)
        for p in (0.0, 1.0, 2.0, 3.0):
            v = norming_element(u, s, p)
            rhs = lp_norm(u, p).norm * lp_norm(v, conjugate_exponent(p)).norm
            for prod in (u @ v, v @ u):
                worst = max(worst, abs(lp_norm(prod, 1).norm - rhs) / rhs)
    assert record("C4",
                  ("norming element attains Hoelder, relative", worst, 1e-8))


def test_05_trace_identities():
    rng = np.random.default_rng(105)
    sp = ParameterSpace.path(8)
    worst = indep = 0.0
    for _ in range(20):
        u, v = random_operator_field(sp, 6, rng), random_operator_field(sp, 6, rng)
        x = random_scalar_field(sp, rng)
        xi, eta = random_vector_field(sp, 6, rng), random_vector_field(sp, 6, rng)
        nu = lp_norm(u, 1).norm
        worst = max(worst, (trace(u @ v) - trace(v @ u)).sup_norm() / (nu * v.op_norm()))
        worst = max(worst, (trace(u * x) - trace(u) * x).sup_norm() / (nu * x.sup_norm()))
        ip = inner_product(xi, eta)
        worst = max(worst, (trace(rank_one(xi, eta)) - ip).sup_norm() / (xi.sup_norm() * eta.sup_norm()))
        pos = u.H @ u
        n1 = lp_norm(pos, 1).norm
        worst = max(worst, abs(trace(pos).sup_norm() - n1) / n1)
        # a second decomposition: other anchor, adjoint route, extra unit phases
        a = schatten_decompose(u)
        b = schatten_decompose(u.H, anchor=sp.points[-1]).adjoint()
        ph = np.exp(2j * np.pi * rng.random(b.theta_values.shape))[:, :, None]
        b = SingularSystem(sp, b.theta_values, b.xi_values * ph, b.eta_values * ph, b.e_values)
        indep = max(indep, (trace(u, a) - trace(u, b)).sup_norm() / nu)
    assert record("C5",
                  ("trace identities, relative", worst, 1e-10),
                  ("trace independent of the decomposition", indep, 1e-10))


def test_06_truncation_bound():
    rng = np.random.default_rng(106)
    sp = ParameterSpace.path(8)
    worst = -np.inf
    for scale in (0.01, 0.1, 1.0):
        for _ in range(5):
            u = OperatorField(sp, scale * random_operator_field(sp, 6, rng).matrices)
            s = schatten_decompose(u)
            for k in (1, 5, 10):
                for p in (1.0, 2.0):
                    tail = lp_norm(u - truncate_tail(u, s, k, p), p).norm
                    worst = max(worst, tail - truncation_bound(k, p))
    assert record("C6",
                  ("truncation bound, no slack", max(worst, 0.0), 0.0))


def test_07_omega_characterisation():
    rng = np.random.default_rng(107)
    sp = ParameterSpace.path(8)
    over = attain = 0.0
    for _ in range(50):
        u = random_operator_field(sp, 6, rng)
        th = theta_array(u)
        fam, fam2 = random_omega_family(sp, 6, rng), random_omega_family(sp, 6, rng)
        eta, xi = singular_omega_pair(schatten_decompose(u))
        for p in (1.0, 1.5, 2.0, 3.0):
            bound = np.sum(th ** p, axis=0)
            over = max(over, float(np.max(omega_sum(u, fam, fam2, p).values.real - bound)))
            attain = max(attain, float(np.max(np.abs(omega_sum(u, eta, xi, p).values.real - bound) / bound)))
    assert record("C7",
                  ("random families stay below sum theta^p", over, 1e-9),
                  ("singular vectors attain sum theta^p, relative", attain, 1e-9))


def test_08_dual_round_trip():
    rng = np.random.default_rng(108)
    sp = ParameterSpace.path(8)
    trip = invol = 0.0
    for _ in range(20):
        v0 = random_operator_field(sp, 5, rng)
        v = functional_to_operator(DualFunctional.from_operator(v0), rng)
        trip = max(trip, (v - v0).op_norm() / v0.op_norm())
        u = random_operator_field(sp, 5, rng)
        lhs = DualFunctional.from_operator(v0.H)(u)
        rhs = DualFunctional.from_operator(v0).adjoint()(u)
        invol = max(invol, (lhs - rhs).sup_norm() / (lp_norm(u, 1).norm * v0.op_norm()))
    assert record("C8",
                  ("functional_to_operator recovers v0, relative", trip, 1e-9),
                  ("involution compatibility, relative", invol, 1e-10))


def test_09_kernel_operators():
    rng = np.random.default_rng(109)
    sp = ParameterSpace.path(8)
    adj = hs = rank = 0.0
    for _ in range(20):
        n = 12
        quad = QuadratureSpace(tuple(range(n)), rng.random(n) + 0.05)
        w = KernelField(quad, sp, rng.standard_normal((n, n, 8)) + 1j * rng.standard_normal((n, n, 8)))
        basis = L2Basis.gram_schmidt(quad, rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n)))
        op = kernel_to_operator(w, basis)
        adj = max(adj, (kernel_to_operator(adjoint_kernel(w), basis) - op.H).op_norm())
        mu = quad.weights
        rhs = np.einsum("rst,r,s->t", np.abs(w.values) ** 2, mu, mu)
        hs = max(hs, float(np.max(np.abs(np.sum(theta_array(op) ** 2, axis=0) - rhs) / rhs)))
        a = rng.standard_normal((n, 8)) + 1j * rng.standard_normal((n, 8))
        b = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        th = theta_array(kernel_to_operator(separable_kernel(quad, sp, a, b), basis))
        rank = max(rank, float(np.max(th[1] / th[0])))
    f4_sp = ParameterSpace(("t1", "t2"), [(0, 1)])
    f4 = separable_kernel(QuadratureSpace(("r1", "r2"), [0.5, 0.5]), f4_sp, [1, 2], [1, 1])
    th = theta_array(kernel_to_operator(f4, L2Basis.nodal(f4.quad)))
    f4_err = float(np.max(np.abs(th[0] ** 2 - 2.5)))
    assert record("C9",
                  ("adjoint kernel gives the adjoint operator", adj, 1e-10),
                  ("Hilbert-Schmidt identity, relative per point", hs, 1e-9),
                  ("separable kernels: theta_2 / theta_1", rank, 1e-10),
                  ("F4 theta_1^2 = 2.5", f4_err, 1e-12))


def test_10_phase_alignment():
    rng = np.random.default_rng(110)
    sp = ParameterSpace.path(32)
    const = proj = 0.0
    for _ in range(20):
        v = rng.standard_normal(6) + 1j * rng.standard_normal(6)
        v /= np.linalg.norm(v)
        eta = VectorField(sp, np.exp(2j * np.pi * rng.random(32))[:, None] * v)
        xi = phase_align(eta)
        const = max(const, float(np.max(np.abs(xi.components - xi.components[0]))))
        before = np.einsum("ti,tj->tij", eta.components, eta.components.conj())
        after = np.einsum("ti,tj->tij", xi.components, xi.components.conj())
        proj = max(proj, float(np.max(np.abs(after - before))))
    assert record("C10",
                  ("aligned field is constant", const, 1e-10),
                  ("projection fields unchanged", proj, 1e-12))


if __name__ == "__main__":
    for name, fn in sorted(globals().copy().items()):
        if name.startswith("test_"):
            try:
                fn()
            except AssertionError:
                pass
    print("\n".join(RESULTS.values()))
