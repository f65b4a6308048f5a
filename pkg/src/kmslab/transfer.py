"""Quasi-free generators and the transfer operator on traces.

With a generator D (a Hermitian bimodule map) the operator
``F tau = Tr_tau(pi(.) exp(-beta D))`` acts on trace coefficients through
the nonnegative matrix ``Z_{wv}(beta) = tr exp(-beta D^{(w,v)})``:
``(F tau)_v = sum_w Z_{wv} t_w``.  KMS states of the Toeplitz algebra are
parametrized by states with ``Z^T t <= t`` and those of the Cuntz-Pimsner
quotient by ``Z^T t == t``.
"""

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog
from scipy.sparse.csgraph import connected_components

from . import _linalg
from .algebra import ShapeError, TraceVector
from .correspondence import BimoduleOperator, tensor

SOLVER_TOL = 1e-9


class PositiveEnergyError(ValueError):
    """The generator has a non-positive eigenvalue."""


class Generator(BimoduleOperator):
    """Hermitian bimodule map D; U_t = exp(itD) is the module dynamics."""

    def __init__(self, module, slots):
        super().__init__(module, slots)
        for key, m in self.slots.items():
            if not _linalg.is_hermitian(m):
                raise ValueError("generator slot %s is not Hermitian" % (key,))
            self.slots[key] = 0.5 * (m + m.conj().T)

    @classmethod
    def scalar(cls, module, lam):
        return cls(module, {s: lam * np.eye(module.mult[s]) for s in module.slots()})

    @classmethod
    def zero(cls, module):
        return cls.scalar(module, 0.0)

    def eigenvalues(self):
        vals = [np.linalg.eigvalsh(m) for m in self.slots.values()]
        return np.concatenate(vals) if vals else np.zeros(0)

    @property
    def min_eigenvalue(self):
        ev = self.eigenvalues()
        return float(ev.min()) if ev.size else np.inf

    @property
    def positive_energy(self):
        return self.min_eigenvalue > 0

    def exp(self, z):
        """exp(z D) slotwise; z = it gives U_t, z = -beta the heat kernel."""
        return BimoduleOperator(self.module, {s: _linalg.expmh(m, z) for s, m in self.slots.items()})

    def unitary(self, t):
        return self.exp(1j * t)


def tensor_generator(DX, DY):
    """Generator of U (x) V on X (x) Y: the Kronecker sum, slotwise.

    The copy order matches ``tensor_bimodule`` (Y's copy outer, X's inner),
    so ``exp(-beta (DX (x) DY)) = exp(-beta DX) (x) exp(-beta DY)``.
    """
    X, Y = DX.module, DY.module
    XY = tensor(X, Y)
    V = X.num_blocks
    slots = {}
    for (u, v) in XY.slots():
        parts = []
        for w in range(V):
            if Y.mult[u, w] > 0 and X.mult[w, v] > 0:
                a, b = DY.slots[(u, w)], DX.slots[(w, v)]
                parts.append(np.kron(a, np.eye(b.shape[0])) + np.kron(np.eye(a.shape[0]), b))
        n = XY.mult[u, v]
        m = np.zeros((n, n), dtype=complex)
        i = 0
        for p in parts:
            m[i:i + p.shape[0], i:i + p.shape[0]] = p
            i += p.shape[0]
        slots[(u, v)] = m
    return Generator(XY, slots)


def heat_kernel(D, beta):
    """exp(-beta D); a contraction when D has positive energy and beta > 0."""
    return D.exp(-beta)


@dataclass(frozen=True, eq=False)
class TransferMatrix:
    beta: float
    Z: np.ndarray

    def __post_init__(self):
        z = np.array(self.Z, dtype=float)
        if z.ndim != 2 or z.shape[0] != z.shape[1]:
            raise ShapeError("transfer matrix must be square")
        if np.any(z < 0):
            raise ValueError("transfer matrix must be entrywise nonnegative")
        z.setflags(write=False)
        object.__setattr__(self, "Z", z)

    @property
    def size(self):
        return self.Z.shape[0]


def _as_Z(Z):
    return Z.Z if isinstance(Z, TransferMatrix) else np.asarray(Z, dtype=float)


def transfer_matrix(X, D, beta):
    if D.module != X:
        raise ShapeError("generator belongs to a different correspondence")
    Z = np.zeros((X.num_blocks, X.num_blocks))
    for (w, v), m in D.slots.items():
        Z[w, v] = np.exp(-beta * np.linalg.eigvalsh(m)).sum()
    return TransferMatrix(float(beta), Z)


def apply_F(tau, Z):
    """(F tau)_v = sum_w Z_{wv} t_w."""
    z = _as_Z(Z)
    if z.shape[0] != tau.algebra.num_blocks:
        raise ShapeError("transfer matrix and trace have different sizes")
    return TraceVector(tau.algebra, np.clip(z.T @ tau.t, 0.0, None))


# --- spectral analysis -----------------------------------------------------

@dataclass(frozen=True)
class SpectralData:
    """Spectral radius with Collatz-Wielandt bounds and a left eigenvector.

    ``vector`` is a nonnegative solution of ``Z^T x = r x`` with unit l1
    norm, or None when Z is nilpotent.
    """

    r: float
    lower: float
    upper: float
    vector: np.ndarray
    irreducible: bool


def is_nilpotent(Z):
    """Exact test on the zero pattern: a nonnegative matrix is nilpotent iff its graph is acyclic."""
    p = (_as_Z(Z) > 0).astype(int)
    n = p.shape[0]
    q = np.eye(n, dtype=int)
    for _ in range(n):
        q = np.minimum(q @ p, 1)
    return not q.any()


def is_irreducible(Z):
    z = _as_Z(Z)
    if z.shape[0] == 1:
        return bool(z[0, 0] > 0)
    ncomp, _ = connected_components(z > 0, directed=True, connection="strong")
    return ncomp == 1


def collatz_wielandt(Z, x):
    """min/max of (Z^T x)_i / x_i for a strictly positive x: bounds on r(Z)."""
    z = _as_Z(Z)
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0):
        raise ValueError("Collatz-Wielandt bounds need a strictly positive vector")
    ratios = (z.T @ x) / x
    return float(ratios.min()), float(ratios.max())


def _power_iteration(B, maxiter=20000, rtol=1e-14, stall=50, stall_rtol=1e-12):
    """Power iteration on B + I; returns (x, lower, upper, converged).

    Starts from the modulus of numpy's dominant eigenvector and stops once
    the Collatz-Wielandt gap has not improved for `stall` steps, accepting
    the result if the gap is below `stall_rtol` (rounding floor).
    """
    n = B.shape[0]
    w, v = np.linalg.eig(B)
    x = np.abs(v[:, int(np.argmax(w.real))]) + 1e-300
    x /= x.sum()
    lo, hi = 0.0, np.inf
    best, since = np.inf, 0
    for _ in range(maxiter):
        y = B @ x + x
        y /= y.sum()
        if np.all(y > 0):
            ratios = (B @ y) / y
            lo, hi = ratios.min(), ratios.max()
            gap = hi - lo
            if gap <= rtol * max(1.0, hi):
                return y, float(lo), float(hi), True
            if gap < best:
                best, since = gap, 0
            else:
                since += 1
                if since >= stall:
                    return y, float(lo), float(hi), bool(gap <= stall_rtol * max(1.0, hi))
        x = y
    return x, float(lo), float(hi), False


def spectral_radius(Z):
    z = _as_Z(Z)
    n = z.shape[0]
    irreducible = is_irreducible(z)
    if is_nilpotent(z):
        return SpectralData(0.0, 0.0, 0.0, None, irreducible)
    if irreducible:
        x, lo, hi, ok = _power_iteration(z.T)
        if ok:
            return SpectralData(0.5 * (lo + hi), lo, hi, x / x.sum(), True)
    ev = np.linalg.eigvals(z)
    r = float(np.max(np.abs(ev)))
    # certified upper bound from a strictly positive vector
    xp, _, _, _ = _power_iteration(z.T + 1e-9 * r * np.ones((n, n)) / n, maxiter=2000, rtol=1e-12)
    _, upper = collatz_wielandt(z, xp)
    vec = nonnegative_eigenvector(z, r)
    lower = r
    if vec is not None and np.all(vec > 0):
        lower, upper2 = collatz_wielandt(z, vec)
        upper = min(upper, upper2)
    return SpectralData(r, min(lower, r), max(upper, r), vec, irreducible)


def _minimax_lp(B, weights, two_sided):
    """min s over {t >= 0, weights . t = 1} with (B t)_i <= s (and >= -s)."""
    n = B.shape[0]
    c = np.zeros(n + 1)
    c[-1] = 1.0
    rows = [np.hstack([B, -np.ones((n, 1))])]
    if two_sided:
        rows.append(np.hstack([-B, -np.ones((n, 1))]))
    A_ub = np.vstack(rows)
    b_ub = np.zeros(A_ub.shape[0])
    A_eq = np.hstack([np.asarray(weights, dtype=float), [0.0]])[None, :]
    bounds = [(0, None)] * n + [(None, None)]
    res = linprog(c, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=[1.0], bounds=bounds, method="highs")
    if res.status != 0:
        return None, np.inf
    t = np.clip(res.x[:n], 0.0, None)
    t /= float(np.asarray(weights) @ t)
    resid = B @ t
    s = float(np.max(np.abs(resid))) if two_sided else float(np.max(resid))
    return t, s


def nonnegative_eigenvector(Z, r, tol=1e-9):
    """A nonnegative x with Z^T x = r x and unit l1 norm, if one exists."""
    z = _as_Z(Z)
    n = z.shape[0]
    t, s = _minimax_lp(z.T - r * np.eye(n), np.ones(n), two_sided=True)
    if t is None or s > tol * max(1.0, r):
        return None
    return t


def critical_beta(X, D, tol=1e-12, maxiter=200):
    """The beta > 0 with r(Z(beta)) = 1, by bisection on the monotone map beta -> r.

    Returns 0.0 when r(Z(0)) = 1 already and None when r(Z(beta)) < 1 for
    all beta >= 0 (nilpotent pattern) or the radius never reaches 1.
    """
    if not D.positive_energy:
        raise PositiveEnergyError(
            "critical beta needs positive energy (every eigenvalue of D > 0); "
            "min eigenvalue is %g" % D.min_eigenvalue)

    def radius(b):
        return spectral_radius(transfer_matrix(X, D, b)).r

    r0 = radius(0.0)
    if r0 == 0.0 or r0 < 1.0 - tol:
        return None
    if abs(r0 - 1.0) <= tol:
        return 0.0
    lo, hi = 0.0, 1.0
    while radius(hi) > 1.0:
        lo, hi = hi, 2.0 * hi
        if hi > 1e8:
            return None
    for _ in range(maxiter):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if radius(mid) > 1.0:
            lo = mid
        else:
            hi = mid
    b = 0.5 * (lo + hi)
    if abs(radius(b) - 1.0) > max(tol, 1e-9):
        return None
    return b


def state_weights(algebra, weights=None):
    return algebra.dims if weights is None else np.asarray(weights, dtype=float)


def subinvariant_solver(Z, A, tol=SOLVER_TOL, weights=None):
    """A state t >= 0 with Z^T t <= t, or None.

    Feasibility is decided by the LP  min max_v (Z^T t - t)_v  over the
    simplex {t >= 0, weights . t = 1} (weights default to the block sizes).
    """
    z = _as_Z(Z)
    if z.shape[0] != A.num_blocks:
        raise ShapeError("transfer matrix and algebra have different sizes")
    t, s = _minimax_lp(z.T - np.eye(z.shape[0]), state_weights(A, weights), two_sided=False)
    if t is None or s > tol:
        return None
    return TraceVector(A, t)


def invariant_solver(Z, A, tol=SOLVER_TOL, weights=None):
    """A state t >= 0 with Z^T t = t (sup-norm residual <= tol), or None."""
    z = _as_Z(Z)
    if z.shape[0] != A.num_blocks:
        raise ShapeError("transfer matrix and algebra have different sizes")
    n = z.shape[0]
    w = state_weights(A, weights)
    if is_irreducible(z):
        # the fixed vector is the Perron vector; take it directly when r = 1
        sd = spectral_radius(z)
        if sd.vector is not None and abs(sd.r - 1.0) <= tol:
            t = sd.vector / float(w @ sd.vector)
            if np.max(np.abs(z.T @ t - t)) <= tol:
                return TraceVector(A, t)
    t, s = _minimax_lp(z.T - np.eye(n), w, two_sided=True)
    if t is None or s > tol:
        return None
    return TraceVector(A, t)


def subinvariance_residual(tau, Z):
    """max_v (F tau - tau)_v; <= 0 for subinvariant traces."""
    z = _as_Z(Z)
    return float(np.max(z.T @ tau.t - tau.t))


def invariance_residual(tau, Z):
    z = _as_Z(Z)
    return float(np.max(np.abs(z.T @ tau.t - tau.t)))
