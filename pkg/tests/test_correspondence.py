import numpy as np
import pytest
from hypothesis import given, strategies as st

from kmslab import catalog
from kmslab.algebra import BlockAlgebra, ShapeError, TraceVector, evaluate_trace
from kmslab.correspondence import (BimoduleOperator, Correspondence, associator, elementary_tensor,
                                   elementary_tensor_chain, frame_partial_sums, identity_correspondence,
                                   induced_trace, induced_trace_functional, inner_product, left_act,
                                   right_act, tensor, tensor_inner_product, tensor_operator,
                                   tensor_power, theta)

seeds = st.integers(0, 2 ** 32 - 1)


def _random_trace(X, rng):
    return TraceVector(X.algebra, rng.uniform(0.0, 1.0, size=X.num_blocks))


def test_dimensions_and_rows():
    X = Correspondence(BlockAlgebra((1, 2)), [[1, 1], [0, 2]])
    assert tuple(X.k) == (3, 4)
    assert X.is_full()
    # rows are ordered by (v, copy, inner)
    assert X.row(0, 1, 0, 1) == 2
    assert X.row(1, 1, 1, 0) == 2
    assert len(X.basis()) == 3 * 1 + 4 * 2
    assert len(X.frame()) == 3 + 4


def test_not_full():
    X = Correspondence(BlockAlgebra((1, 1)), [[1, 0], [0, 0]])
    assert not X.is_full()


def test_mismatched_modules():
    X = Correspondence(BlockAlgebra((1,)), [[2]])
    Y = Correspondence(BlockAlgebra((1,)), [[3]])
    with pytest.raises(ShapeError):
        inner_product(X.basis()[0], Y.basis()[0])


@given(seeds)
def test_inner_product_axioms(seed):
    rng = np.random.default_rng(seed)
    X, _, _ = catalog.random_instance(seed)
    A = X.algebra
    xi, eta = X.random_vector(rng), X.random_vector(rng)
    a = A.random_element(rng)
    assert inner_product(xi, right_act(eta, a)).distance(inner_product(xi, eta) @ a) < 1e-12
    assert inner_product(left_act(a, xi), eta).distance(inner_product(xi, left_act(a.adjoint(), eta))) < 1e-12
    assert inner_product(xi, eta).adjoint().distance(inner_product(eta, xi)) < 1e-12
    assert inner_product(xi, xi).is_positive()


@given(seeds)
def test_left_action_is_star_homomorphism(seed):
    rng = np.random.default_rng(seed)
    X, _, _ = catalog.random_instance(seed)
    A = X.algebra
    a, b = A.random_element(rng), A.random_element(rng)
    assert (X.left_action(a) @ X.left_action(b)).distance(X.left_action(a @ b)) < 1e-12
    assert X.left_action(a).adjoint().distance(X.left_action(a.adjoint())) < 1e-12
    assert X.left_action(A.identity()).distance(X.identity_operator()) < 1e-15


@given(seeds)
def test_theta_rank_one(seed):
    rng = np.random.default_rng(seed)
    X, _, _ = catalog.random_instance(seed)
    xi, eta, zeta = (X.random_vector(rng) for _ in range(3))
    assert (theta(xi, eta) @ zeta).distance(right_act(xi, inner_product(eta, zeta))) < 1e-12
    assert theta(xi, eta).adjoint().distance(theta(eta, xi)) < 1e-12


@given(seeds)
def test_frame_reconstructs_identity(seed):
    X, _, _ = catalog.random_instance(seed)
    total = X.zero_operator()
    for xi in X.frame():
        total = total + theta(xi, xi)
    assert total.distance(X.identity_operator()) < 1e-14


@given(seeds)
def test_induced_trace_identities(seed):
    rng = np.random.default_rng(seed)
    X, _, _ = catalog.random_instance(seed)
    tau = _random_trace(X, rng)
    xi, eta = X.random_vector(rng), X.random_vector(rng)
    assert abs(induced_trace(tau, theta(xi, eta)) - evaluate_trace(tau, inner_product(eta, xi))) < 1e-11
    S, T = X.random_operator(rng), X.random_operator(rng)
    assert abs(induced_trace(tau, S @ T) - induced_trace(tau, T @ S)) < 1e-11
    P = X.random_operator(rng, positive=True)
    sums = frame_partial_sums(tau, P)
    assert np.all(np.diff(sums) >= -1e-12)
    assert abs(sums[-1] - induced_trace(tau, P).real) < 1e-11


@given(seeds)
def test_induced_trace_functional_is_transfer(seed):
    rng = np.random.default_rng(seed)
    X, D, _ = catalog.random_instance(seed)
    tau = _random_trace(X, rng)
    T = D.exp(-0.7)
    tau_T = induced_trace_functional(tau, T)
    Top = T.to_operator()
    for a in X.algebra.matrix_units():
        assert abs(tau_T(a) - induced_trace(tau, X.left_action(a) @ Top)) < 1e-12


def test_tensor_multiplicities():
    X = Correspondence(BlockAlgebra((1, 2)), [[1, 1], [0, 2]])
    Y = Correspondence(BlockAlgebra((1, 2)), [[0, 1], [1, 1]])
    XY = tensor(X, Y)
    assert np.array_equal(XY.mult, Y.mult @ X.mult)
    assert tensor_power(X, 0) == identity_correspondence(X.algebra)
    assert tensor_power(X, 1) == X
    assert np.array_equal(tensor_power(X, 3).mult, X.mult @ X.mult @ X.mult)


@given(seeds)
def test_elementary_tensor_inner_product(seed):
    rng = np.random.default_rng(seed)
    X, _, _ = catalog.random_instance(seed)
    x1, x2, y1, y2 = (X.random_vector(rng) for _ in range(4))
    lhs = inner_product(elementary_tensor(x1, x2), elementary_tensor(y1, y2))
    rhs = inner_product(x2, left_act(inner_product(x1, y1), y2))
    assert lhs.distance(rhs) < 1e-11
    assert tensor_inner_product([x1, x2], [y1, y2]).distance(rhs) < 1e-11


@given(seeds)
def test_tensor_is_balanced(seed):
    rng = np.random.default_rng(seed)
    X, _, _ = catalog.random_instance(seed)
    xi, eta = X.random_vector(rng), X.random_vector(rng)
    a = X.algebra.random_element(rng)
    lhs = elementary_tensor(right_act(xi, a), eta)
    rhs = elementary_tensor(xi, left_act(a, eta))
    assert lhs.distance(rhs) < 1e-12


@given(seeds)
def test_tensor_operator_on_elementary_tensors(seed):
    rng = np.random.default_rng(seed)
    X, D, _ = catalog.random_instance(seed)
    S = X.random_operator(rng)
    T = D.exp(-0.3)
    xi, eta = X.random_vector(rng), X.random_vector(rng)
    lhs = tensor_operator(S, T) @ elementary_tensor(xi, eta)
    rhs = elementary_tensor(S @ xi, T.to_operator() @ eta)
    assert lhs.distance(rhs) < 1e-11


@given(st.integers(0, 500))
def test_associator_is_permutation(seed):
    rng = np.random.default_rng(seed)
    X, _, _ = catalog.random_instance(seed, V_max=2)
    perms = associator(X, X, X)
    left = tensor(tensor(X, X), X)
    for u, p in enumerate(perms):
        assert sorted(p.tolist()) == list(range(left.k[u]))
    vs = [X.random_vector(rng) for _ in range(3)]
    a = elementary_tensor(elementary_tensor(vs[0], vs[1]), vs[2])
    b = elementary_tensor_chain(vs)
    for u, p in enumerate(perms):
        assert np.allclose(b.blocks[u], a.blocks[u][p], atol=1e-12)


def test_bimodule_operator_round_trip():
    rng = np.random.default_rng(4)
    X, _, _ = catalog.random_instance(11)
    B = X.random_bimodule_operator(rng)
    assert BimoduleOperator.from_operator(B.to_operator()).to_operator().distance(B.to_operator()) < 1e-14
    # a rank-one operator on M_2 does not commute with the left action
    Y = Correspondence(BlockAlgebra((2,)), [[1]])
    xi = Y.basis_vector(0, 0, 0, 0)
    with pytest.raises(ValueError):
        BimoduleOperator.from_operator(theta(xi, xi))
