import numpy as np
import pytest
from hypothesis import given, strategies as st

from kmslab import catalog
from kmslab.catalog import ExelLacaInstance, el_inequalities
from kmslab.transfer import critical_beta, spectral_radius, subinvariant_solver, transfer_matrix

seeds = st.integers(0, 2 ** 32 - 1)


def _blockwise_subinvariant(inst, beta, t, tol=1e-12):
    X, D = catalog.cuntz_krieger(inst)
    z = transfer_matrix(X, D, beta).Z
    return bool(np.all(z.T @ t - t <= tol * np.maximum(1.0, t)))


def test_cuntz_validation():
    with pytest.raises(ValueError):
        catalog.cuntz(0)
    with pytest.raises(ValueError):
        catalog.cuntz(2, 0.0)
    X, D = catalog.cuntz(3, 0.5)
    assert X.mult.tolist() == [[3]]
    assert D.eigenvalues().tolist() == pytest.approx([0.5] * 3)


def test_exel_laca_validation():
    with pytest.raises(ValueError, match="zero row"):
        ExelLacaInstance([[1, 1], [0, 0]], [2, 2])
    with pytest.raises(ValueError, match="zero column"):
        ExelLacaInstance([[1, 0], [1, 0]], [2, 2])
    with pytest.raises(ValueError, match="repeated columns"):
        ExelLacaInstance([[1, 1], [1, 1]], [2, 2])
    with pytest.raises(ValueError):
        ExelLacaInstance([[1, 1], [1, 0]], [1.0, 2.0])
    with pytest.raises(ValueError):
        ExelLacaInstance([[1, 2], [1, 0]], [2, 2])


def test_cuntz_krieger_model():
    inst = ExelLacaInstance([[1, 1, 0], [0, 1, 1], [1, 0, 1]], [2.0, 3.0, 2.5])
    X, D = catalog.cuntz_krieger(inst)
    assert np.array_equal(X.mult, inst.T.T)
    beta = 0.9
    Z = transfer_matrix(X, D, beta).Z
    assert np.allclose(Z, inst.T.T * inst.N[None, :] ** (-beta))


def test_fibonacci_perron_vector():
    X, D = catalog.cuntz_krieger(catalog.fibonacci())
    bc = critical_beta(X, D)
    golden = (1 + np.sqrt(5)) / 2
    sd = spectral_radius(transfer_matrix(X, D, bc))
    expected = np.array([golden, 1.0]) / (golden + 1.0)
    assert np.allclose(sd.vector, expected, atol=1e-9)


def test_q_function():
    inst = catalog.fibonacci()
    assert catalog.q_function(inst, [], []).tolist() == [1, 1]
    assert catalog.q_function(inst, [1], []).tolist() == [1, 0]
    assert catalog.q_function(inst, [], [1]).tolist() == [0, 1]


def test_el_enumeration_count_and_guard():
    inst = catalog.fibonacci()
    rep = el_inequalities(inst, 1.0, np.array([0.6, 0.4]))
    assert rep.checked == 9
    big = catalog.random_el_instance(0, 13)
    with pytest.raises(ValueError):
        el_inequalities(big, 1.0, np.ones(13) / 13)


@given(seeds, st.integers(2, 5), st.floats(0.05, 3.0))
def test_el_equivalence(seed, n, beta):
    rng = np.random.default_rng(seed)
    inst = catalog.random_el_instance(seed, n)
    X, D = catalog.cuntz_krieger(inst)
    candidates = [rng.dirichlet(np.ones(n))]
    sol = subinvariant_solver(transfer_matrix(X, D, beta), X.algebra)
    if sol is not None:
        candidates.append(sol.t)
    for t in candidates:
        assert el_inequalities(inst, beta, t).holds == _blockwise_subinvariant(inst, beta, t)


def test_identity_bimodule_transfer():
    X, D = catalog.identity_bimodule((1, 2))
    assert np.allclose(transfer_matrix(X, D, 3.0).Z, np.eye(2))


def test_random_instance_determinism_and_invariants():
    for seed in range(30):
        X1, D1, H1 = catalog.random_instance(seed, with_H=True)
        X2, D2, H2 = catalog.random_instance(seed, with_H=True)
        assert X1 == X2
        assert all(np.array_equal(D1.slots[s], D2.slots[s]) for s in X1.slots())
        assert all(np.array_equal(a, b) for a, b in zip(H1.H, H2.H))
        assert X1.is_full()
        assert D1.positive_energy
        assert X1.num_blocks <= 3 and max(X1.algebra.block_dims) <= 2 and X1.mult.max() <= 2


@given(seeds)
def test_transfer_entries_decrease_in_beta(seed):
    X, D, _ = catalog.random_instance(seed)
    Zs = [transfer_matrix(X, D, b).Z for b in (0.0, 0.5, 1.0, 2.0)]
    for a, b in zip(Zs, Zs[1:]):
        assert np.all(b <= a)


def test_acyclic_instance():
    X, D = catalog.acyclic()
    assert spectral_radius(transfer_matrix(X, D, 0.0)).r == 0.0


def test_direct_sum():
    first = catalog.cuntz(2)
    second = catalog.cuntz_krieger(catalog.fibonacci())
    X, D = catalog.direct_sum(first, second)
    assert X.algebra.block_dims == (1, 1, 1)
    Z = transfer_matrix(X, D, 1.0).Z
    assert Z[0, 1] == 0.0 and Z[1, 0] == 0.0
    assert Z[0, 0] == pytest.approx(2 * np.exp(-1.0))


def test_standard_instances_have_critical_beta():
    for name, (X, D) in catalog.standard_instances().items():
        bc = critical_beta(X, D)
        assert bc is not None and bc > 0, name
        assert abs(spectral_radius(transfer_matrix(X, D, bc)).r - 1.0) < 1e-9
