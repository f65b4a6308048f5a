"""Standard instances: Cuntz algebras, Cuntz-Krieger algebras, degenerate and random cases."""

from dataclasses import dataclass
from itertools import product as iproduct

import numpy as np

from . import _linalg
from .algebra import BlockAlgebra, CoeffDynamics, TraceVector
from .correspondence import Correspondence, identity_correspondence
from .transfer import Generator, transfer_matrix

EL_MAX_INDEX = 12


def cuntz(n, lam=1.0):
    """C^n over A = C with D = lam * 1; the Cuntz algebra O_n with critical beta log(n)/lam."""
    if int(n) != n or n < 1:
        raise ValueError("n must be a positive integer")
    if not lam > 0:
        raise ValueError("lambda must be positive")
    X = Correspondence(BlockAlgebra((1,)), [[int(n)]])
    return X, Generator.scalar(X, float(lam))


@dataclass(frozen=True, eq=False)
class ExelLacaInstance:
    """0-1 matrix T over I = {0..n-1} and weights N_j > 1 (U_t xi_j = N_j^{it} xi_j).

    The coefficient algebra generated by the rows of T is all of C^I only
    when the columns of T are pairwise distinct, which is required here.
    """

    T: np.ndarray
    N: np.ndarray

    def __post_init__(self):
        T = np.array(self.T, dtype=int)
        N = np.array(self.N, dtype=float).reshape(-1)
        if T.ndim != 2 or T.shape[0] != T.shape[1] or T.shape[0] == 0:
            raise ValueError("T must be a nonempty square matrix")
        if not np.all((T == 0) | (T == 1)):
            raise ValueError("T must be a 0-1 matrix")
        if N.shape != (T.shape[0],):
            raise ValueError("need one weight N_j per index")
        if np.any(~T.any(axis=1)):
            raise ValueError("T has a zero row: %s" % np.flatnonzero(~T.any(axis=1)).tolist())
        if np.any(~T.any(axis=0)):
            raise ValueError("T has a zero column: %s" % np.flatnonzero(~T.any(axis=0)).tolist())
        cols = [tuple(T[:, k]) for k in range(T.shape[1])]
        if len(set(cols)) != len(cols):
            raise ValueError("T has repeated columns; the rows then generate a proper subalgebra "
                             "of C^I and this finite model would be wrong")
        if np.any(N <= 1):
            raise ValueError("weights N_j must exceed 1 (positive energy)")
        T.setflags(write=False)
        N.setflags(write=False)
        object.__setattr__(self, "T", T)
        object.__setattr__(self, "N", N)

    @property
    def size(self):
        return self.T.shape[0]


def cuntz_krieger(inst):
    """Blocks of size 1 indexed by I, mult[w][v] = T(v, w) and D^{(w,v)} = log N_v."""
    n = inst.size
    X = Correspondence(BlockAlgebra((1,) * n), inst.T.T.copy())
    slots = {(w, v): [[np.log(inst.N[v])]] for (w, v) in X.slots()}
    return X, Generator(X, slots)


def fibonacci(N=(np.e, np.e)):
    return ExelLacaInstance(np.array([[1, 1], [1, 0]]), np.array(N, dtype=float))


def q_function(inst, Y, Z):
    """q(Y,Z)(k) = prod_{l in Y} T(l,k) prod_{k' in Z} (1 - T(k',k)) as a 0-1 vector."""
    T = inst.T
    out = np.ones(inst.size, dtype=int)
    for l in Y:
        out = out * T[l]
    for k in Z:
        out = out * (1 - T[k])
    return out


@dataclass(frozen=True)
class ElReport:
    """Outcome of the (Y, Z) family: pairs checked, violations (Y, Z, lhs - rhs), equality pairs."""

    checked: int
    violations: tuple
    max_violation: float
    equalities: int

    @property
    def holds(self):
        return not self.violations


def el_inequalities(inst, beta, tau, tol=1e-12, max_index=EL_MAX_INDEX):
    """Check sum_j N_j^{-beta} T(Y,Z,j) tau(q_j) <= tau(q(Y,Z)) for all disjoint Y, Z.

    Each index goes to Y, to Z or to neither, so there are 3^|I| pairs.
    """
    n = inst.size
    if n > max_index:
        raise ValueError("|I| = %d exceeds the enumeration guard %d" % (n, max_index))
    t = np.asarray(tau.t if isinstance(tau, TraceVector) else tau, dtype=float)
    T = inst.T
    tau_q = T @ t
    weights = inst.N ** (-beta) * tau_q
    violations = []
    equalities = 0
    worst = -np.inf
    checked = 0
    for assign in iproduct((0, 1, 2), repeat=n):
        Y = [i for i, a in enumerate(assign) if a == 1]
        Zs = [i for i, a in enumerate(assign) if a == 2]
        q = q_function(inst, Y, Zs)
        lhs = float(weights @ q)
        rhs = float(t @ q)
        diff = lhs - rhs
        worst = max(worst, diff)
        checked += 1
        scale = max(1.0, abs(rhs))
        if diff > tol * scale:
            violations.append((tuple(Y), tuple(Zs), diff))
        elif abs(diff) <= tol * scale:
            equalities += 1
    return ElReport(checked, tuple(violations), float(worst), equalities)


def identity_bimodule(A):
    """A over itself with D = 0: F is the identity on traces."""
    if not isinstance(A, BlockAlgebra):
        A = BlockAlgebra(tuple(A))
    X = identity_correspondence(A)
    return X, Generator.zero(X)


def _random_generator(rng, X, lo=0.1, hi=2.0):
    slots = {}
    for s in X.slots():
        n = X.mult[s]
        U = _linalg.random_unitary(rng, n)
        slots[s] = (U * rng.uniform(lo, hi, size=n)) @ U.conj().T
    return Generator(X, slots)


def random_instance(seed, V_max=3, d_max=2, mult_max=2, with_H=False, full=True):
    """Deterministic random (X, D, H) with positive-energy D (eigenvalues in [0.1, 2]).

    With `full` every right block receives at least one copy, so <X, X> = A.
    H is None unless `with_H`.
    """
    if min(V_max, d_max, mult_max) < 1:
        raise ValueError("bounds must be at least 1")
    rng = np.random.default_rng(seed)
    V = int(rng.integers(1, V_max + 1))
    dims = tuple(int(d) for d in rng.integers(1, d_max + 1, size=V))
    mult = rng.integers(0, mult_max + 1, size=(V, V))
    if full:
        for w in range(V):
            if not mult[w].any():
                mult[w, rng.integers(0, V)] = int(rng.integers(1, mult_max + 1))
    elif not mult.any():
        mult[rng.integers(0, V), rng.integers(0, V)] = 1
    A = BlockAlgebra(dims)
    X = Correspondence(A, mult)
    D = _random_generator(rng, X)
    H = None
    if with_H:
        H = CoeffDynamics(A, tuple(_linalg.random_hermitian(rng, d, 0.5) for d in dims))
    return X, D, H


def random_el_instance(seed, n):
    """Random valid Exel-Laca data on n indices (rejection sampling on T)."""
    rng = np.random.default_rng(seed)
    while True:
        T = rng.integers(0, 2, size=(n, n))
        try:
            return ExelLacaInstance(T, rng.uniform(1.5, 4.0, size=n))
        except ValueError:
            continue


def acyclic():
    """Two blocks (1, 2) with a single edge: Z is nilpotent and no critical beta exists."""
    X = Correspondence(BlockAlgebra((1, 2)), [[0, 0], [1, 0]])
    return X, Generator.scalar(X, 1.0)


def standard_instances():
    """Named (X, D) pairs with a critical inverse temperature."""
    out = {}
    for n in (2, 3, 4):
        out["cuntz%d" % n] = cuntz(n, 1.0)
    out["fibonacci"] = cuntz_krieger(fibonacci())
    out["golden-mean-3"] = cuntz_krieger(ExelLacaInstance(np.array([[1, 1, 0], [0, 1, 1], [1, 0, 1]]),
                                                          np.array([2.0, 3.0, 2.5])))
    X = Correspondence(BlockAlgebra((1, 2)), [[1, 1], [1, 1]])
    out["matrix-blocks"] = (X, Generator(X, {(0, 0): [[1.0]], (0, 1): [[0.7]],
                                             (1, 0): [[1.3]], (1, 1): [[0.9]]}))
    return out


def direct_sum(first, second):
    """(X1 + X2, D1 + D2) over A1 + A2, with no edges between the two parts."""
    (X1, D1), (X2, D2) = first, second
    V1, V2 = X1.num_blocks, X2.num_blocks
    A = BlockAlgebra(X1.algebra.block_dims + X2.algebra.block_dims)
    mult = np.zeros((V1 + V2, V1 + V2), dtype=int)
    mult[:V1, :V1] = X1.mult
    mult[V1:, V1:] = X2.mult
    X = Correspondence(A, mult)
    slots = dict(D1.slots)
    slots.update({(w + V1, v + V1): m for (w, v), m in D2.slots.items()})
    return X, Generator(X, slots)


def transfer_at(X, D, beta):
    return transfer_matrix(X, D, beta).Z


__all__ = [
    "cuntz", "ExelLacaInstance", "cuntz_krieger", "fibonacci", "q_function", "ElReport",
    "el_inequalities", "identity_bimodule", "random_instance", "random_el_instance", "acyclic",
    "standard_instances", "direct_sum", "transfer_at", "EL_MAX_INDEX",
]
