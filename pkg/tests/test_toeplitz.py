import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from kmslab import catalog
from kmslab.correspondence import inner_product
from kmslab.fock import build_fock, element_matrix, letters_matrix
from kmslab.toeplitz import (MonomialWord, ToeplitzElement, distance, gamma_apply, gauge_apply,
                             normal_order, random_element, random_letters)
from kmslab.weights import TwistedIsometryGroup

seeds = st.integers(0, 2 ** 32 - 1)


def _small_instance(seed):
    return catalog.random_instance(seed, V_max=2, d_max=2, mult_max=2)


def test_cuntz_relations():
    X, _ = catalog.cuntz(2)
    e1, e2 = X.basis()
    one = ToeplitzElement.unit(X)
    assert distance(normal_order([("T*", e1), ("T", e1)]), one) < 1e-15
    assert distance(normal_order([("T*", e1), ("T", e2)]), ToeplitzElement.zero(X)) < 1e-15
    # T_e1 T*_e1 stays a word: it is a projection, not the unit
    p = normal_order([("T", e1), ("T*", e1)])
    assert distance(p, one) > 0.5
    assert distance(p @ p, p) < 1e-15


@given(seeds)
def test_contraction_rule(seed):
    rng = np.random.default_rng(seed)
    X, _, _ = _small_instance(seed)
    x, y = X.random_vector(rng), X.random_vector(rng)
    lhs = normal_order([("T*", x), ("T", y)])
    assert distance(lhs, ToeplitzElement(X, inner_product(x, y))) < 1e-12


@given(seeds)
def test_absorption_rules(seed):
    rng = np.random.default_rng(seed)
    X, _, _ = _small_instance(seed)
    xi = X.random_vector(rng)
    a = X.algebra.random_element(rng)
    from kmslab.correspondence import left_act, right_act
    cases = [
        ([a, ("T", xi)], [("T", left_act(a, xi))]),
        ([("T", xi), a], [("T", right_act(xi, a))]),
        ([a, ("T*", xi)], [("T*", right_act(xi, a.adjoint()))]),
        ([("T*", xi), a], [("T*", left_act(a.adjoint(), xi))]),
    ]
    for lhs, rhs in cases:
        assert distance(normal_order(lhs, X), normal_order(rhs, X)) < 1e-12


@given(seeds)
def test_associativity_and_confluence(seed):
    """Six letters multiplied in random association orders give one normal form."""
    rng = np.random.default_rng(seed)
    X, _, _ = _small_instance(seed)
    letters = random_letters(X, rng, 6)
    reference = normal_order(letters, X)
    from kmslab.toeplitz import as_element
    for _ in range(3):
        items = [as_element(l, X) for l in letters]
        while len(items) > 1:
            i = int(rng.integers(0, len(items) - 1))
            items[i:i + 2] = [items[i] @ items[i + 1]]
        assert distance(items[0], reference) < 1e-10 * max(1.0, _size(reference))


def _size(x):
    from kmslab.toeplitz import kernels
    return max(float(np.max(np.abs(b))) for blocks in kernels(x).values() for b in blocks if b.size)


@given(seeds)
def test_normal_order_is_idempotent(seed):
    rng = np.random.default_rng(seed)
    X, _, _ = _small_instance(seed)
    x = random_element(X, rng, 3)
    assert distance(normal_order([x]), x) == 0.0


@given(seeds)
def test_adjoint(seed):
    rng = np.random.default_rng(seed)
    X, _, _ = _small_instance(seed)
    x, y = random_element(X, rng, 2), random_element(X, rng, 2)
    assert distance(x.adjoint().adjoint(), x) == 0.0
    assert distance((x @ y).adjoint(), y.adjoint() @ x.adjoint()) < 1e-10 * max(1.0, _size(x @ y))


@settings(max_examples=10)
@given(st.integers(0, 2000))
def test_fock_faithfulness(seed):
    """Normal ordering agrees with the Fock matrices on levels the product cannot overflow."""
    rng = np.random.default_rng(seed)
    X, _, _ = _small_instance(seed)
    L, N = 4, 5
    try:
        F = build_fock(X, N, cap=3000)
    except MemoryError:
        return
    letters = random_letters(X, rng, L)
    spatial = letters_matrix(letters, F).restrict_input(N - L)
    algebraic = element_matrix(normal_order(letters, X), F).restrict_input(N - L)
    assert spatial.distance(algebraic) < 1e-10 * max(1.0, _size(normal_order(letters, X)))


def test_gamma_on_cuntz():
    X, D = catalog.cuntz(2)
    e1 = X.basis()[0]
    beta = 0.8
    t = gamma_apply(ToeplitzElement.creation(e1), 1j * beta, D)
    assert distance(t, ToeplitzElement.creation(e1) * np.exp(-beta)) < 1e-15
    s = gamma_apply(ToeplitzElement.annihilation(e1), 1j * beta, D)
    assert distance(s, ToeplitzElement.annihilation(e1) * np.exp(beta)) < 1e-14


@given(seeds)
def test_gamma_group_law_and_automorphism(seed):
    rng = np.random.default_rng(seed)
    X, D, H = catalog.random_instance(seed, V_max=2, with_H=True)
    U = TwistedIsometryGroup(D, H)
    x, y = random_element(X, rng, 2), random_element(X, rng, 2)
    s, t = rng.normal(size=2)
    assert distance(gamma_apply(x, 0.0, U), x) < 1e-13
    assert distance(gamma_apply(gamma_apply(x, s, U), t, U), gamma_apply(x, s + t, U)) < 1e-10 * max(1, _size(x))
    lhs = gamma_apply(x @ y, t, U)
    rhs = gamma_apply(x, t, U) @ gamma_apply(y, t, U)
    assert distance(lhs, rhs) < 1e-10 * max(1.0, _size(x @ y))
    assert distance(gamma_apply(x.adjoint(), t, U), gamma_apply(x, t, U).adjoint()) < 1e-10 * max(1, _size(x))


def test_gauge_action():
    X, _ = catalog.cuntz(3)
    e = X.basis()
    x = ToeplitzElement.from_word(X, MonomialWord((e[0], e[1]), (e[2],)))
    g = gauge_apply(x, 0.4)
    assert distance(g, x * np.exp(0.4j)) < 1e-15
    bal = ToeplitzElement.from_word(X, MonomialWord((e[0],), (e[2],)))
    assert distance(gauge_apply(bal, 1.3), bal) < 1e-15


def test_word_degrees():
    X, _ = catalog.cuntz(2)
    e1, e2 = X.basis()
    w = MonomialWord((e1, e2), (e1,))
    assert (w.m, w.n, w.degree, w.length) == (2, 1, 1, 3)
    assert (w.adjoint().m, w.adjoint().n) == (1, 2)


def test_mixed_modules_rejected():
    X, _ = catalog.cuntz(2)
    Y, _ = catalog.cuntz(3)
    with pytest.raises(Exception):
        ToeplitzElement.creation(X.basis()[0]) @ ToeplitzElement.creation(Y.basis()[0])
