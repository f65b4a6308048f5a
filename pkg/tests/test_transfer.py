import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, strategies as st

from kmslab import catalog
from kmslab.algebra import BlockAlgebra, TraceVector
from kmslab.correspondence import Correspondence, induced_trace, induced_trace_functional, tensor
from kmslab.transfer import (Generator, PositiveEnergyError, apply_F, collatz_wielandt, critical_beta,
                             invariant_solver, is_irreducible, is_nilpotent, spectral_radius,
                             subinvariant_solver, tensor_generator, transfer_matrix)

seeds = st.integers(0, 2 ** 32 - 1)


def test_transfer_matrix_by_hand():
    X = Correspondence(BlockAlgebra((1, 2)), [[2, 0], [1, 1]])
    D = Generator(X, {(0, 0): np.diag([1.0, 2.0]), (1, 0): [[0.5]], (1, 1): [[3.0]]})
    Z = transfer_matrix(X, D, 1.0).Z
    expected = np.array([[np.exp(-1) + np.exp(-2), 0.0], [np.exp(-0.5), np.exp(-3)]])
    assert np.allclose(Z, expected, atol=1e-15)


@given(seeds, st.floats(0.05, 3.0))
def test_apply_F_is_induced_trace(seed, beta):
    """(F tau)(a) = Tr_tau(pi(a) exp(-beta D)) computed on the module."""
    rng = np.random.default_rng(seed)
    X, D, _ = catalog.random_instance(seed)
    tau = TraceVector(X.algebra, rng.uniform(0, 1, size=X.num_blocks))
    Ftau = apply_F(tau, transfer_matrix(X, D, beta))
    heat = [scipy.linalg.expm(-beta * b) for b in D.to_operator().blocks]
    for a in X.algebra.matrix_units():
        pa = X.left_action(a)
        expected = sum(t * np.trace(p @ e) for t, p, e in zip(tau.t, pa.blocks, heat))
        assert abs(Ftau(a) - expected) < 1e-12
    assert np.allclose(induced_trace_functional(tau, D.exp(-beta)).t, Ftau.t, atol=1e-14)


@given(seeds, st.floats(0.0, 3.0))
def test_spectral_radius_matches_eigvals(seed, beta):
    X, D, _ = catalog.random_instance(seed)
    Z = transfer_matrix(X, D, beta).Z
    sd = spectral_radius(Z)
    oracle = float(np.max(np.abs(np.linalg.eigvals(Z))))
    assert abs(sd.r - oracle) <= 1e-9 * max(1.0, oracle)
    assert sd.lower <= oracle + 1e-9 and sd.upper >= oracle - 1e-9


def test_collatz_wielandt_brackets():
    Z = np.array([[1.0, 2.0], [3.0, 0.5]])
    r = float(np.max(np.abs(np.linalg.eigvals(Z))))
    lo, hi = collatz_wielandt(Z, np.array([0.3, 0.7]))
    assert lo <= r <= hi


def test_patterns():
    assert is_nilpotent(np.array([[0.0, 1.0], [0.0, 0.0]]))
    assert not is_nilpotent(np.array([[0.0, 1.0], [1.0, 0.0]]))
    assert is_irreducible(np.array([[0.0, 1.0], [1.0, 0.0]]))
    assert not is_irreducible(np.array([[1.0, 1.0], [0.0, 1.0]]))


@pytest.mark.parametrize("n", [2, 3, 4, 7])
def test_cuntz_critical_beta(n):
    X, D = catalog.cuntz(n, 1.0)
    assert abs(critical_beta(X, D) - np.log(n)) < 1e-10
    X, D = catalog.cuntz(n, 2.0)
    assert abs(critical_beta(X, D) - np.log(n) / 2.0) < 1e-10


def test_degenerate_critical_beta():
    X, D = catalog.cuntz(1, 1.0)
    assert critical_beta(X, D) == 0.0  # r(Z(beta)) = e^{-beta} reaches 1 only at beta = 0
    X, D = catalog.acyclic()
    assert critical_beta(X, D) is None
    X, D = catalog.identity_bimodule(BlockAlgebra((1,)))
    with pytest.raises(PositiveEnergyError):
        critical_beta(X, D)


def test_fibonacci_critical_beta():
    X, D = catalog.cuntz_krieger(catalog.fibonacci())
    golden = (1 + np.sqrt(5)) / 2
    assert abs(critical_beta(X, D) - np.log(golden)) < 1e-10


@given(seeds)
def test_radius_is_decreasing_in_beta(seed):
    X, D, _ = catalog.random_instance(seed)
    radii = [spectral_radius(transfer_matrix(X, D, b)).r for b in np.linspace(0, 4, 9)]
    assert all(b <= a * (1 + 1e-12) + 1e-15 for a, b in zip(radii, radii[1:]))


@given(seeds)
def test_solvers_agree_with_critical_beta(seed):
    X, D, _ = catalog.random_instance(seed)
    bc = critical_beta(X, D)
    if bc is None or bc == 0.0:
        return
    A = X.algebra
    above = subinvariant_solver(transfer_matrix(X, D, bc + 0.3), A)
    assert above is not None and above.is_state()
    below = subinvariant_solver(transfer_matrix(X, D, 0.7 * bc), A)
    if is_irreducible(transfer_matrix(X, D, 1.0).Z):
        assert below is None
        inv = invariant_solver(transfer_matrix(X, D, bc), A)
        assert inv is not None
        assert np.max(np.abs(transfer_matrix(X, D, bc).Z.T @ inv.t - inv.t)) < 1e-9


@given(seeds, st.floats(0.1, 2.0))
def test_transfer_composition_law(seed, beta):
    """Z for X (x) Y with the Kronecker-sum generator equals Z_Y Z_X."""
    X, D, _ = catalog.random_instance(seed)
    Y, E, _ = catalog.random_instance(seed + 1)
    if Y.algebra != X.algebra:
        Y, E = X, D
    DXY = tensor_generator(D, E)
    ZXY = transfer_matrix(tensor(X, Y), DXY, beta).Z
    ZX, ZY = transfer_matrix(X, D, beta).Z, transfer_matrix(Y, E, beta).Z
    assert np.allclose(ZXY, ZY @ ZX, rtol=1e-11, atol=1e-14)


def test_cooling_bound_cuntz():
    X, D = catalog.cuntz(2, 1.0)
    beta = np.log(2) + 0.3
    Z = transfer_matrix(X, D, beta).Z
    t = np.array([1.0])
    d = X.algebra.dims
    cur = t.copy()
    for n in range(21):
        assert cur @ d <= np.exp(-0.3 * n) * (t @ d) * (1 + 1e-12)
        cur = Z.T @ cur
