import numpy as np
import pytest
from hypothesis import given, strategies as st

from opfield.fieldcore import (
    ContractError,
    OperatorField,
    ParameterSpace,
    ScalarField,
    VectorField,
    fiber_eval,
    inner_product,
    is_positive,
    module_scale,
    neighbor_jump,
    random_operator_field,
    random_scalar_field,
    random_vector_field,
    rank_one,
    standard_generator,
)

seeds = st.integers(0, 2**31 - 1)


def test_space_rejects_bad_input():
    with pytest.raises(ContractError):
        ParameterSpace(())
    with pytest.raises(ContractError):
        ParameterSpace(("a", "a"))
    with pytest.raises(ContractError):
        ParameterSpace(("a", "b", "c"), [(0, 1)])  # disconnected
    with pytest.raises(ContractError):
        ParameterSpace(("a", "b"), [(0, 5)])


def test_traversal_bfs_and_declared_order():
    star = ParameterSpace.range(4, [(0, 2), (2, 1), (2, 3)])
    order, parents = star.traversal(0)
    assert order == [0, 2, 1, 3]
    assert parents == [None, 2, 0, 2]
    order, parents = ParameterSpace.range(3).traversal(1)
    assert order == [1, 0, 2]
    assert parents == [1, None, 0]


def test_inner_product_examples(two_points):
    e = VectorField(two_points, [1, 0])
    np.testing.assert_array_equal(inner_product(e, e).values, [1, 1])
    xi, eta = VectorField(two_points, [3, 4]), VectorField(two_points, [0, 1])
    np.testing.assert_array_equal(inner_product(xi, eta).values, [4, 4])
    f = VectorField(two_points, [0, 1])
    np.testing.assert_array_equal(inner_product(e, f).values, [0, 0])
    with pytest.raises(ContractError):
        inner_product(e, VectorField(two_points, [1, 0, 0]))


@given(seeds)
def test_inner_product_module_axioms(seed):
    rng = np.random.default_rng(seed)
    sp = ParameterSpace.range(5)
    xi, eta = random_vector_field(sp, 3, rng), random_vector_field(sp, 3, rng)
    x = random_scalar_field(sp, rng)
    # linear in the first argument, conjugate linear in the second
    assert (inner_product(xi * x, eta) - inner_product(xi, eta) * x).sup_norm() < 1e-12 * (1 + xi.sup_norm() * eta.sup_norm() * x.sup_norm())
    assert (inner_product(eta, xi) - inner_product(xi, eta).conj()).sup_norm() < 1e-12 * (1 + xi.sup_norm() * eta.sup_norm())
    assert np.all(inner_product(xi, xi).values.real >= 0)


def test_fiber_eval_and_identity(two_points, rng):
    np.testing.assert_array_equal(fiber_eval(OperatorField.identity(two_points, 3), "t2"), np.eye(3))
    u = random_operator_field(two_points, 3, rng)
    v = random_operator_field(two_points, 3, rng)
    np.testing.assert_allclose(fiber_eval(u @ v, "t1"), fiber_eval(u, "t1") @ fiber_eval(v, "t1"))


def test_rank_one_examples(two_points, rng):
    u = rank_one(VectorField(two_points, [1, 0]), VectorField(two_points, [0, 1]))
    np.testing.assert_array_equal(u.matrices, np.broadcast_to([[0, 1], [0, 0]], (2, 2, 2)))
    xi = random_vector_field(two_points, 3, rng)
    np.testing.assert_allclose(fiber_eval(rank_one(xi, xi), "t1"), np.outer(xi.at("t1"), xi.at("t1").conj()))
    z = xi * ScalarField(two_points, 1 / xi.norms().values)
    p = rank_one(z, z)
    assert np.max(np.abs((p @ p - p).matrices)) < 1e-14
    assert np.max(np.abs((p.H - p).matrices)) < 1e-15


def test_rank_one_action(two_points, rng):
    xi, eta, zeta = (random_vector_field(two_points, 4, rng) for _ in range(3))
    lhs = (rank_one(xi, eta) @ zeta).components
    rhs = (xi * inner_product(zeta, eta)).components
    assert np.max(np.abs(lhs - rhs)) < 1e-12


def test_module_scale(two_points, rng):
    u = random_operator_field(two_points, 3, rng)
    assert module_scale(u, ScalarField.one(two_points)).matrices.tolist() == u.matrices.tolist()
    assert not np.any(module_scale(u, ScalarField.constant(two_points, 0)).matrices)


def test_is_positive(two_points, rng):
    assert is_positive(OperatorField.identity(two_points, 3))
    assert not is_positive(OperatorField(two_points, np.diag([1.0, -1.0])))
    u = random_operator_field(two_points, 4, rng, positive=True)
    # eigenvalue oracle
    assert np.all(np.linalg.eigvalsh(u.matrices) >= -1e-12) and is_positive(u)
    with pytest.raises(ContractError):
        is_positive(OperatorField(two_points, [[0, 1], [0, 0]]))


def test_masks(two_points):
    mask = [[1, 0], [1, 1]]
    with pytest.raises(ContractError):
        VectorField(two_points, [[1, 1], [1, 1]], mask)
    g = standard_generator(two_points, 2, 1, mask)
    np.testing.assert_array_equal(g.components, [[0, 0], [0, 1]])
    with pytest.raises(ContractError):
        g + VectorField(two_points, [[1, 0], [1, 1]], [[1, 0], [1, 0]])


def test_space_mismatch(rng):
    a, b = ParameterSpace.range(2), ParameterSpace.range(2, [(0, 1)])
    with pytest.raises(ContractError):
        random_operator_field(a, 2, rng) + random_operator_field(b, 2, rng)


def test_neighbor_jump(two_points):
    assert neighbor_jump(ScalarField(two_points, [1.0, 3.0])) == 2.0
    assert neighbor_jump(ScalarField(ParameterSpace.range(2), [1.0, 3.0])) == 0.0
    assert neighbor_jump(OperatorField(two_points, [np.eye(2), 2 * np.eye(2)])) == pytest.approx(1.0)


@given(seeds)
def test_adjoint_of_product(seed):
    rng = np.random.default_rng(seed)
    sp = ParameterSpace.range(3)
    u, v = random_operator_field(sp, 3, rng), random_operator_field(sp, 3, rng)
    assert np.max(np.abs(((u @ v).H - v.H @ u.H).matrices)) < 1e-12
    xi, eta = random_vector_field(sp, 3, rng), random_vector_field(sp, 3, rng)
    lhs = inner_product(u @ xi, eta).values
    rhs = inner_product(xi, u.H @ eta).values
    assert np.max(np.abs(lhs - rhs)) < 1e-11 * (1 + np.max(np.abs(lhs)))
