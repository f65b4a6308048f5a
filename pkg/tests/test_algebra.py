import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, strategies as st

from kmslab.algebra import (AlgebraElement, BlockAlgebra, CoeffDynamics, KmsFunctional, ShapeError,
                            TraceVector, kms_pairing, sigma_apply, verify_kms_functional)
from kmslab import _linalg

dims_st = st.lists(st.integers(1, 3), min_size=1, max_size=3).map(tuple)


def test_identity_and_units():
    A = BlockAlgebra((1, 2))
    one = A.identity()
    assert A.dimension == 5
    assert len(A.matrix_units()) == 5
    for e in A.matrix_units():
        assert (one @ e).allclose(e)
    assert (A.unit_vector(1, 0, 1) @ A.unit_vector(1, 1, 0)).allclose(A.unit_vector(1, 0, 0))


@given(dims_st, st.integers(0, 2 ** 32 - 1))
def test_star_algebra_laws(dims, seed):
    rng = np.random.default_rng(seed)
    A = BlockAlgebra(dims)
    x, y = A.random_element(rng), A.random_element(rng)
    assert (x @ y).adjoint().allclose(y.adjoint() @ x.adjoint(), 1e-12)
    assert (x.adjoint() @ x).is_positive()
    assert A.random_positive(rng).is_positive()


def test_shape_errors():
    with pytest.raises(ShapeError):
        BlockAlgebra((1,)).identity() @ BlockAlgebra((2,)).identity()
    with pytest.raises(ShapeError):
        TraceVector(BlockAlgebra((1, 2)), [1.0])
    with pytest.raises(ValueError):
        TraceVector(BlockAlgebra((1,)), [-0.1])


def test_trace_vector_state():
    A = BlockAlgebra((1, 2))
    tau = TraceVector(A, [0.5, 0.25])
    assert tau.mass == pytest.approx(1.0)
    assert tau.is_state()
    assert tau(A.unit_vector(1, 0, 0)) == pytest.approx(0.25)
    assert TraceVector(A, [2.0, 1.0]).normalized().is_state()


@given(st.integers(0, 2 ** 32 - 1))
def test_sigma_group_law(seed):
    rng = np.random.default_rng(seed)
    A = BlockAlgebra((2, 3))
    H = CoeffDynamics(A, tuple(_linalg.random_hermitian(rng, d) for d in A.block_dims))
    a = A.random_element(rng)
    s, t = rng.normal(size=2)
    assert sigma_apply(H, 0.0, a).allclose(a)
    lhs = sigma_apply(H, s, sigma_apply(H, t, a))
    assert lhs.distance(sigma_apply(H, s + t, a)) < 1e-12
    # real times act by automorphisms
    b = A.random_element(rng)
    assert sigma_apply(H, t, a @ b).distance(sigma_apply(H, t, a) @ sigma_apply(H, t, b)) < 1e-12


@given(st.integers(0, 2 ** 32 - 1), st.floats(0.1, 3.0))
def test_gibbs_functional_is_kms(seed, beta):
    rng = np.random.default_rng(seed)
    A = BlockAlgebra((1, 2, 3))
    H = CoeffDynamics(A, tuple(_linalg.random_hermitian(rng, d) for d in A.block_dims))
    phi = KmsFunctional.gibbs_state(H, beta)
    assert phi.mass == pytest.approx(1.0)
    units = A.matrix_units()
    # sigma_{i beta}(x) has entries of size up to exp(beta * spread of H); gate relative to it
    scale = max(1.0, max(sigma_apply(H, 1j * beta, x).norm() for x in units) * phi.mass)
    assert verify_kms_functional(phi, [(x, y) for x in units for y in units]) < 1e-12 * scale


def test_trace_is_not_kms_for_nontrivial_dynamics():
    A = BlockAlgebra((2,))
    H = CoeffDynamics(A, (np.diag([0.0, 1.0]),))
    phi = KmsFunctional(1.0, H, [0.5])
    tr = KmsFunctional(1.0, CoeffDynamics.trivial(A), [0.5])
    units = A.matrix_units()
    pairs = [(x, y) for x in units for y in units]
    assert verify_kms_functional(phi, pairs) < 1e-14
    worst = max(abs(tr(x @ y) - tr(y @ sigma_apply(H, 1j, x))) for x, y in pairs)
    assert worst > 1e-2


@given(st.integers(0, 2 ** 32 - 1))
def test_kms_pairing_against_scipy_sqrtm(seed):
    rng = np.random.default_rng(seed)
    A = BlockAlgebra((2, 3))
    rho = A.random_positive(rng) + A.identity() * 0.1
    x, y = A.random_element(rng), A.random_element(rng)
    expected = sum(np.trace(scipy.linalg.sqrtm(r) @ a @ scipy.linalg.sqrtm(r) @ b)
                   for r, a, b in zip(rho.blocks, x.blocks, y.blocks))
    assert abs(kms_pairing(rho, x, y) - expected) < 1e-10


def test_kms_pairing_rejects_singular_density():
    A = BlockAlgebra((2,))
    rho = AlgebraElement(A, (np.diag([1.0, 0.0]),))
    with pytest.raises(ValueError):
        kms_pairing(rho, A.identity(), A.identity())
