"""KMS states of Toeplitz algebras and their structure.

A KMS state at inverse temperature beta is determined by its restriction
phi_A to the coefficient algebra:

    phi(T_xi T*_eta) = phi_A(<eta, U_{i beta} xi>)   when deg xi == deg eta,
                     = 0                              otherwise,

with ``U_{i beta} = exp(-beta D)`` for trivial coefficient dynamics.  The
restriction must be a trace (or a KMS functional) that is subinvariant under
the transfer operator; invariant ones give states of the Cuntz-Pimsner
quotient.  ``beta = inf`` is reserved for ground states.
"""

from dataclasses import dataclass

import numpy as np

from . import _linalg
from .algebra import (AlgebraElement, KmsFunctional, ShapeError, TraceVector, evaluate_trace,
                      kms_functional_eval)
from .correspondence import tensor_inner_product
from .toeplitz import MonomialWord, ToeplitzElement, gamma_apply
from .transfer import SOLVER_TOL, _as_Z, spectral_radius, subinvariance_residual, transfer_matrix
from .weights import _as_group

INF = float("inf")


class KmsState:
    """The (gamma, beta)-KMS state of the Toeplitz algebra determined by its restriction to A.

    Parameters
    ----------
    X : Correspondence
    D : Generator or TwistedIsometryGroup
        Module dynamics; a bare Generator means trivial coefficient dynamics.
    beta : float
        Positive and finite; ground states have their own class.
    tau : TraceVector or KmsFunctional
        Restriction to A.  A TraceVector is read as sum_v t_v tr(.).
    validate : bool
        Check subinvariance and normalization.  Switching this off is only
        meant for partial sums and negative controls.
    """

    def __init__(self, X, D, beta, tau, validate=True, tol=SOLVER_TOL):
        if beta == INF:
            raise ValueError("beta = inf is only available through ground_state")
        self.module = X
        self.group = _as_group(D)
        if self.group.module != X:
            raise ShapeError("dynamics belong to a different correspondence")
        self.beta = float(beta)
        if isinstance(tau, TraceVector):
            if not self.group.H.is_trivial:
                raise ValueError("a trace restriction needs trivial coefficient dynamics")
            phi = KmsFunctional(self.beta, self.group.H, tau.t)
        elif isinstance(tau, KmsFunctional):
            phi = tau
        else:
            raise TypeError("tau must be a TraceVector or a KmsFunctional")
        if phi.algebra != X.algebra:
            raise ShapeError("restriction lives over a different algebra")
        self.phi = phi
        self.Z = transfer_matrix(X, self.group.D, self.beta)
        if validate:
            if not abs(phi.mass - 1.0) <= tol:
                raise ValueError("restriction is not a state (mass %.17g)" % phi.mass)
            res = subinvariance_residual(TraceVector(X.algebra, phi.c), self.Z)
            if res > tol:
                raise ValueError("restriction is not subinvariant: max(F tau - tau) = %.3g" % res)

    @property
    def tau(self):
        """Coefficient vector as a TraceVector (the trace itself when H = 0)."""
        return TraceVector(self.module.algebra, self.phi.c)

    @property
    def D(self):
        return self.group.D

    def restriction(self, a):
        return kms_functional_eval(self.phi, a)

    def evaluate_word(self, word):
        if word.m != word.n:
            return 0j
        if word.m == 0:
            return self.restriction(self.module.algebra.identity())
        shifted = [self.group.apply(xi, 1j * self.beta) for xi in word.left]
        return self.restriction(tensor_inner_product(word.right, shifted))

    def __call__(self, x):
        return evaluate_kms_state(self, x)


def evaluate_kms_state(phi, x):
    """phi(x) for a MonomialWord, ToeplitzElement or AlgebraElement."""
    if isinstance(phi, GroundState):
        return phi(x)
    if isinstance(x, MonomialWord):
        return phi.evaluate_word(x)
    if isinstance(x, AlgebraElement):
        return phi.restriction(x)
    if x.module != phi.module:
        raise ShapeError("element of a different Toeplitz algebra")
    total = phi.restriction(x.a)
    for c, w in x.terms:
        if w.m == w.n:
            total += c * phi.evaluate_word(w)
    return complex(total)


def verify_kms(phi, x, y):
    """|phi(xy) - phi(y gamma_{i beta}(x))|, computed in the normal-ordered calculus."""
    lhs = evaluate_kms_state(phi, x @ y)
    rhs = evaluate_kms_state(phi, y @ gamma_apply(x, 1j * phi.beta, phi.group))
    return abs(lhs - rhs)


def kms_scale(phi, x, y):
    return max(1.0, abs(evaluate_kms_state(phi, x @ y)))


def two_point_identity_residual(phi, xi, eta):
    """|phi(T_xi T*_eta) - Tr_tau(theta_{xi,eta} exp(-beta D))| for trivial coefficient dynamics."""
    from .correspondence import induced_trace, theta
    h = phi.group.D.exp(-phi.beta).to_operator()
    lhs = phi.evaluate_word(MonomialWord((xi,), (eta,)))
    rhs = induced_trace(phi.tau, theta(xi, eta) @ h)
    return abs(lhs - rhs)


# --- Wold decomposition ----------------------------------------------------

@dataclass(frozen=True)
class WoldDecomposition:
    """tau = tau_finite + tau_infinite with tau_finite = sum_n F^n tau0 and F tau_infinite = tau_infinite."""

    tau: TraceVector
    tau_finite: TraceVector
    tau_infinite: TraceVector
    tau0: TraceVector
    lam: float

    def residuals(self, Z, terms=None):
        """(sum, fixed point, series) residuals."""
        z = _as_Z(Z)
        s = float(np.max(np.abs(self.tau_finite.t + self.tau_infinite.t - self.tau.t)))
        f = float(np.max(np.abs(z.T @ self.tau_infinite.t - self.tau_infinite.t)))
        series = _series(z, self.tau0.t, terms)
        r = float(np.max(np.abs(series - self.tau_finite.t)))
        return s, f, r


def _series(z, t0, terms=None, tol=1e-15):
    """sum_{n>=0} (Z^T)^n t0, summed until the increments vanish."""
    acc = np.array(t0, dtype=float)
    cur = acc.copy()
    limit = 100000 if terms is None else terms
    for _ in range(limit):
        cur = z.T @ cur
        acc += cur
        if np.sum(cur) <= tol * max(1.0, np.sum(acc)):
            break
    return acc


WOLD_STEP_TOL = 1e-12
WOLD_MAX_ITER = 10000


def _power_limit(z, t):
    """lim_n (Z^T)^n t for subinvariant t, where the iterates decrease monotonically."""
    sd = spectral_radius(z)
    if sd.upper < 1.0:
        return np.zeros_like(t)
    cur = np.array(t, dtype=float)
    for _ in range(WOLD_MAX_ITER):
        nxt = z.T @ cur
        if np.sum(np.abs(nxt - cur)) < WOLD_STEP_TOL:
            return nxt
        cur = nxt
    # slow mixing: jump ahead along a subsequence by repeated squaring
    P = z.T.copy()
    for _ in range(60):
        P = P @ P
        nxt = P @ cur
        if np.sum(np.abs(nxt - cur)) < WOLD_STEP_TOL:
            return nxt
        cur = nxt
    return cur


def wold_decompose(tau, Z, tol=SOLVER_TOL):
    """Split a subinvariant trace into its finite and infinite parts."""
    z = _as_Z(Z)
    t = tau.t
    res = float(np.max(z.T @ t - t)) if t.size else 0.0
    if res > tol:
        raise ValueError("trace is not subinvariant: max(F tau - tau) = %.3g" % res)
    A = tau.algebra
    t0 = np.clip(t - z.T @ t, 0.0, None)
    t_inf = np.clip(np.minimum(_power_limit(z, t), t), 0.0, None)
    t_fin = np.clip(t - t_inf, 0.0, None)
    fin = TraceVector(A, t_fin)
    return WoldDecomposition(tau, fin, TraceVector(A, t_inf), TraceVector(A, t0), fin.mass)


def classify_type(phi, tol=1e-9):
    """'finite', 'infinite' or 'mixed' according to the Wold masses of the restriction."""
    wd = wold_decompose(phi.tau, phi.Z)
    total = wd.tau.mass
    if wd.tau_infinite.mass <= tol * max(1.0, total):
        return "finite"
    if wd.tau_finite.mass <= tol * max(1.0, total):
        return "infinite"
    return "mixed"


def ideal_blocks(X):
    """Blocks spanning I_X = {a : pi(a) compact}; every block at finite dimension."""
    return list(range(X.num_blocks))


def check_ox_descends(phi, tol=SOLVER_TOL, ideal=None):
    """Whether phi factors through the Cuntz-Pimsner quotient: F tau = tau on I_X."""
    if isinstance(phi, GroundState):
        return False
    blocks = ideal_blocks(phi.module) if ideal is None else list(ideal)
    if not blocks:
        return True
    z = phi.Z.Z
    c = phi.phi.c
    return bool(np.max(np.abs((z.T @ c - c)[blocks])) <= tol)


def j_X(b, X):
    """j_X(b) = sum_r T_{b xi_r} T*_{xi_r} over the canonical frame, for b in B(X)."""
    if isinstance(b, AlgebraElement):
        b = X.left_action(b)
    terms = []
    for xi in X.frame():
        terms.append((1.0, MonomialWord((b @ xi,), (xi,))))
    return ToeplitzElement(X, None, terms)


def defect_element(a, X):
    """a - j_X(pi(a)), a generator of the kernel of the quotient map."""
    return ToeplitzElement(X, a) - j_X(a, X)


# --- ground states ---------------------------------------------------------

class GroundState:
    """The generalized Fock state of a state omega on A (beta = inf)."""

    beta = INF

    def __init__(self, X, omega, tol=1e-9):
        self.module = X
        A = X.algebra
        if isinstance(omega, TraceVector):
            density = AlgebraElement(A, tuple(t * np.eye(d) for t, d in zip(omega.t, A.block_dims)))
        elif isinstance(omega, KmsFunctional):
            density = AlgebraElement(A, omega.densities())
        elif isinstance(omega, AlgebraElement):
            density = omega
        else:
            raise TypeError("omega must be a TraceVector, KmsFunctional or density AlgebraElement")
        if density.algebra != A:
            raise ShapeError("omega lives over a different algebra")
        if not density.is_positive(tol):
            raise ValueError("omega is not positive")
        mass = sum(np.trace(b).real for b in density.blocks)
        if abs(mass - 1.0) > tol:
            raise ValueError("omega is not normalized (mass %.17g)" % mass)
        self.density = density

    def restriction(self, a):
        return complex(sum(np.trace(b @ r) for b, r in zip(a.blocks, self.density.blocks)))

    def __call__(self, x):
        if isinstance(x, MonomialWord):
            return self.restriction(self.module.algebra.identity()) if x.length == 0 else 0j
        if isinstance(x, AlgebraElement):
            return self.restriction(x)
        return self.restriction(x.a)


def ground_state(omega, X):
    return GroundState(X, omega)


# --- generalized quasi-free states -----------------------------------------

@dataclass(frozen=True, eq=False)
class QuasiFreeSpec:
    """Traces tau_0, tau_1, ... and positive bimodule maps S_1, S_2, ....

    ``taus`` and ``ops`` are finite lists extended by ``tail``: with
    "constant" the last entries repeat; with "geometric" the last trace is
    multiplied by ``ratio`` at every further level and the last operator
    repeats.
    """

    module: object
    taus: tuple
    ops: tuple
    tail: str = "constant"
    ratio: float = 1.0

    def __post_init__(self):
        if self.tail not in ("constant", "geometric"):
            raise ValueError("tail rule must be 'constant' or 'geometric'")
        if not self.taus or not self.ops:
            raise ValueError("need at least tau_0 and S_1")
        object.__setattr__(self, "taus", tuple(self.taus))
        object.__setattr__(self, "ops", tuple(self.ops))

    def tau(self, n):
        if n < len(self.taus):
            return self.taus[n]
        last = self.taus[-1]
        if self.tail == "constant":
            return last
        k = n - len(self.taus) + 1
        return TraceVector(last.algebra, last.t * self.ratio ** k)

    def op(self, n):
        """S_n for n >= 1."""
        if n < 1:
            raise ValueError("operators are indexed from 1")
        return self.ops[min(n, len(self.ops)) - 1]

    def horizon(self):
        """Levels after which the compatibility checks repeat."""
        return max(len(self.taus), len(self.ops) + 1) + 1


def _compat(spec, n):
    """Coefficients of Tr_{tau_n}(pi(.) S_n) - tau_{n-1}(.)."""
    S = spec.op(n)
    z = S.slot_traces().real
    return z.T @ spec.tau(n).t - spec.tau(n - 1).t, z


class QuasiFreeState:
    """phi(T_xi T*_zeta) = tau_n(<zeta, S_1 xi_1 (x) ... (x) S_n xi_n>) on balanced words."""

    def __init__(self, spec, tol=1e-9):
        self.spec = spec
        self.module = spec.module
        if not spec.tau(0).is_state(tol):
            raise ValueError("tau_0 must be a state")
        for S in spec.ops:
            if S.module != self.module or not S.is_positive(tol):
                raise ValueError("S_n must be positive bimodule maps on X")
        equal = True
        for n in range(1, spec.horizon() + 1):
            diff, _ = _compat(spec, n)
            if np.max(diff) > tol:
                raise ValueError("compatibility fails at level %d: max violation %.3g" % (n, np.max(diff)))
            if np.max(np.abs(diff[ideal_blocks(self.module)])) > tol:
                equal = False
        self.descends = equal
        self._ops = {}

    def _operator(self, n):
        if n not in self._ops:
            self._ops[n] = self.spec.op(n).to_operator()
        return self._ops[n]

    def restriction(self, a):
        return evaluate_trace(self.spec.tau(0), a)

    def evaluate_word(self, w):
        if w.m != w.n:
            return 0j
        if w.m == 0:
            return self.restriction(self.module.algebra.identity())
        shifted = [self._operator(i + 1) @ xi for i, xi in enumerate(w.left)]
        return evaluate_trace(self.spec.tau(w.m), tensor_inner_product(w.right, shifted))

    def __call__(self, x):
        if isinstance(x, MonomialWord):
            return self.evaluate_word(x)
        if isinstance(x, AlgebraElement):
            return self.restriction(x)
        total = self.restriction(x.a)
        for c, w in x.terms:
            total += c * self.evaluate_word(w)
        return complex(total)


def quasi_free_state(spec, tol=1e-9):
    return QuasiFreeState(spec, tol)


def kms_quasi_free_spec(X, D, beta, tau):
    """The data tau_n = tau, S_n = exp(-beta D) realizing the KMS state of tau."""
    S = D.exp(-beta)
    return QuasiFreeSpec(X, (tau,), (S,), "constant")


# --- positivity evidence ---------------------------------------------------

def moment_matrix(phi, elements):
    n = len(elements)
    G = np.zeros((n, n), dtype=complex)
    for i, x in enumerate(elements):
        xs = x.adjoint()
        for j, y in enumerate(elements):
            G[i, j] = phi(xs @ y)
    return G


def moment_matrix_psd(phi, elements):
    """Smallest eigenvalue of the Gram matrix G_ij = phi(x_i* x_j)."""
    G = moment_matrix(phi, elements)
    return _linalg.min_eigenvalue(0.5 * (G + G.conj().T))


def basis_words(X, max_length, unit=True, vectors=None):
    """The unit and all words with m + n <= max_length over `vectors` (default: the canonical basis).

    Returned as ToeplitzElements; the count grows like len(vectors)^max_length.
    """
    from itertools import product as iproduct
    basis = X.basis() if vectors is None else list(vectors)
    out = [ToeplitzElement.unit(X)] if unit else []
    for total in range(1, max_length + 1):
        for m in range(total + 1):
            n = total - m
            for left in iproduct(basis, repeat=m):
                for right in iproduct(basis, repeat=n):
                    out.append(ToeplitzElement.from_word(X, MonomialWord(left, right)))
    return out


def algebra_elements(X):
    """Matrix units of A as Toeplitz elements."""
    return [ToeplitzElement(X, a) for a in X.algebra.matrix_units()]


__all__ = [
    "KmsState", "evaluate_kms_state", "verify_kms", "WoldDecomposition", "wold_decompose",
    "classify_type", "check_ox_descends", "j_X", "defect_element", "GroundState", "ground_state",
    "QuasiFreeSpec", "QuasiFreeState", "quasi_free_state", "kms_quasi_free_spec",
    "moment_matrix", "moment_matrix_psd", "basis_words", "ideal_blocks", "INF",
    "two_point_identity_residual", "algebra_elements",
]
