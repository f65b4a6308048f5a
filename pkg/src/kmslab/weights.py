"""KMS functionals with nontrivial coefficient dynamics, and induced weights.

Module dynamics here are pairs (D, H): an edge generator D (a Hermitian
bimodule map) and blockwise coefficient Hamiltonians H.  On the right block
w the module group is

    U_z(xi)_w = exp(iz G_w) xi_w exp(-iz H_w),
    G_w = sum_v ( D^{(w,v)} (x) 1_{d_v} + 1_{mult[w][v]} (x) H_v ),

which satisfies <U_t xi, U_t eta> = sigma_t(<xi, eta>) and
U_t(a xi) = sigma_t(a) U_t xi.  The induced dynamics on B(X) is Ad exp(itG),
so every KMS functional on B(X) has the form T -> sum_w c_w tr(T_w exp(-beta G_w)).
"""

from dataclasses import dataclass

import numpy as np

from . import _linalg
from .algebra import (CoeffDynamics, KmsFunctional, ShapeError,
                      kms_functional_eval, sigma_apply, verify_kms_functional)
from .correspondence import (ModuleOperator, ModuleVector, _blockdiag, inner_product,
                             tensor, tensor_operator, theta)
from .transfer import (Generator, invariant_solver, subinvariant_solver, tensor_generator,
                       transfer_matrix)

KMS_CHECK_TOL = 1e-9
RESTRICT_GATE = 1e-8


class TwistedIsometryGroup:
    """The module dynamics U_z built from an edge generator D and coefficient dynamics H."""

    def __init__(self, D, H=None):
        X = D.module
        if H is None:
            H = CoeffDynamics.trivial(X.algebra)
        if H.algebra != X.algebra:
            raise ShapeError("coefficient dynamics over a different algebra")
        self.D = D
        self.H = H
        self.module = X
        d = X.algebra.block_dims
        G = []
        for w in range(X.num_blocks):
            parts = []
            for v in range(X.num_blocks):
                n = X.mult[w, v]
                if n == 0:
                    continue
                parts.append(np.kron(D.slots[(w, v)], np.eye(d[v])) + np.kron(np.eye(n), H.H[v]))
            G.append(_blockdiag(parts, X.k[w]))
        self.G = tuple(G)
        self._cache = {}

    @classmethod
    def from_generator(cls, D):
        return cls(D, None)

    @property
    def algebra(self):
        return self.module.algebra

    def exp_G(self, z):
        """Blocks of exp(z G_w), cached per z."""
        key = ("G", complex(z))
        if key not in self._cache:
            self._cache[key] = _frozen(_linalg.expmh(g, z) for g in self.G)
        return self._cache[key]

    def exp_H(self, z):
        key = ("H", complex(z))
        if key not in self._cache:
            self._cache[key] = _frozen(self.H.exp(z))
        return self._cache[key]

    def apply(self, xi, z):
        """U_z(xi) for complex z (entire at finite dimension)."""
        if xi.module != self.module:
            raise ShapeError("vector belongs to a different module")
        left = self.exp_G(1j * z)
        right = self.exp_H(-1j * z)
        return ModuleVector(xi.module, tuple(l @ x @ r for l, x, r in zip(left, xi.blocks, right)))

    def sigma(self, a, z):
        return sigma_apply(self.H, z, a)

    def gamma_operator(self, T, z):
        """Ad U_z on B(X): exp(izG) T exp(-izG)."""
        left = self.exp_G(1j * z)
        right = self.exp_G(-1j * z)
        return ModuleOperator(T.module, tuple(l @ t @ r for l, t, r in zip(left, T.blocks, right)))

    def tensor(self, other):
        """U (x) V on X (x) Y (same coefficient dynamics on both factors)."""
        if not all(np.allclose(a, b) for a, b in zip(self.H.H, other.H.H)):
            raise ShapeError("tensor of module dynamics needs matching coefficient dynamics")
        return TwistedIsometryGroup(tensor_generator(self.D, other.D), self.H)


def _frozen(mats):
    out = tuple(mats)
    for m in out:
        m.setflags(write=False)
    return out


def _as_group(U):
    if isinstance(U, TwistedIsometryGroup):
        return U
    if isinstance(U, Generator):
        return TwistedIsometryGroup(U)
    raise TypeError("expected a Generator or a TwistedIsometryGroup")


@dataclass(frozen=True, eq=False)
class InducedWeight:
    """kappa(T) = sum_w c_w tr(T_w exp(-beta G_w)) on B(X)."""

    group: TwistedIsometryGroup
    beta: float
    c: np.ndarray

    @property
    def module(self):
        return self.group.module

    def densities(self):
        return tuple(c * e for c, e in zip(self.c, self.group.exp_G(-self.beta)))

    def __call__(self, T):
        if T.module != self.module:
            raise ShapeError("operator on a different module")
        return complex(sum(np.trace(t @ rho) for t, rho in zip(T.blocks, self.densities())))


def _check_kms(phi, tol=KMS_CHECK_TOL):
    units = phi.algebra.matrix_units()
    pairs = [(x, y) for x in units for y in units]
    scale = max(1.0, phi.mass)
    res = verify_kms_functional(phi, pairs)
    if res > tol * scale:
        raise ValueError("functional fails the KMS condition (residual %.3g)" % res)


def induce_weight(phi, X, U):
    """The induced weight kappa_phi on B(X).

    kappa_phi is characterized by kappa(theta_{xi,xi}) =
    phi(<U_{i beta/2} xi, U_{i beta/2} xi>); with the closed form above it
    simply carries phi's coefficients over to the right blocks of X.
    """
    U = _as_group(U)
    if U.module != X:
        raise ShapeError("module dynamics belong to a different correspondence")
    if not all(np.allclose(a, b) for a, b in zip(phi.dynamics.H, U.H.H)):
        raise ShapeError("functional and module dynamics use different coefficient dynamics")
    _check_kms(phi)
    return InducedWeight(U, phi.beta, np.array(phi.c, dtype=float))


def weight_by_frame(phi, U, T, frame=None):
    """sum_{xi in frame} phi(<U_{i beta/2} xi, T U_{i beta/2} xi>), the frame definition of kappa_phi(T)."""
    U = _as_group(U)
    frame = U.module.frame() if frame is None else frame
    total = 0j
    for xi in frame:
        x = U.apply(xi, 0.5j * phi.beta)
        total += kms_functional_eval(phi, inner_product(x, T @ x))
    return complex(total)


def defining_property_residual(kappa, phi, vectors=None):
    """max |kappa(theta_{xi,eta}) - phi(<U_{i beta/2} eta, U_{i beta/2} xi>)| over pairs of vectors."""
    U = kappa.group
    vectors = U.module.basis() if vectors is None else vectors
    shifted = [U.apply(x, 0.5j * phi.beta) for x in vectors]
    worst = 0.0
    for x, ux in zip(vectors, shifted):
        for y, uy in zip(vectors, shifted):
            lhs = kappa(theta(x, y))
            rhs = kms_functional_eval(phi, inner_product(uy, ux))
            worst = max(worst, abs(lhs - rhs))
    return worst


def restrict_weight(kappa, X=None, U=None, gate=RESTRICT_GATE):
    """The KMS functional phi on A with phi(<xi,xi>) = kappa(theta_{U_{-i beta/2} xi, U_{-i beta/2} xi}).

    Solved as a least-squares system over the canonical basis of X; the
    module must be full, otherwise some coefficient is undetermined.
    """
    U = kappa.group if U is None else _as_group(U)
    X = U.module if X is None else X
    if not X.is_full():
        raise ValueError("module is not full: <X,X> misses blocks %s"
                         % [w for w in range(X.num_blocks) if X.k[w] == 0])
    beta = kappa.beta
    eH = U.H.exp(-beta)
    rows, rhs = [], []
    for xi in X.basis():
        ip = inner_product(xi, xi)
        rows.append([np.trace(b @ e).real for b, e in zip(ip.blocks, eH)])
        eta = U.apply(xi, -0.5j * beta)
        rhs.append(kappa(theta(eta, eta)).real)
    M, b = np.array(rows), np.array(rhs)
    c, *_ = np.linalg.lstsq(M, b, rcond=None)
    if np.linalg.matrix_rank(M) < X.num_blocks:
        raise ValueError("restriction is underdetermined (module not full)")
    resid = np.max(np.abs(M @ c - b)) if b.size else 0.0
    if resid > gate * max(1.0, np.max(np.abs(b))):
        raise ValueError("weight is not induced from a KMS functional (residual %.3g)" % resid)
    return KmsFunctional(beta, U.H, np.clip(c, 0.0, None))


def functional_on_algebra(kappa, X, H, beta):
    """The KMS functional a -> kappa(pi(a)) on A, recovered on matrix units.

    `kappa` is any callable on B(X); the coefficients are fitted by least
    squares against sum_v c_v tr(a_v exp(-beta H_v)).
    """
    eH = H.exp(-beta)
    rows, rhs = [], []
    for a in X.algebra.matrix_units():
        rows.append([np.trace(b @ e) for b, e in zip(a.blocks, eH)])
        rhs.append(kappa(X.left_action(a)))
    M, b = np.array(rows), np.array(rhs)
    c, *_ = np.linalg.lstsq(M, b, rcond=None)
    return KmsFunctional(beta, H, np.clip(c.real, 0.0, None)), float(np.max(np.abs(M @ c - b)))


def apply_F_general(phi, X, U):
    """F phi = kappa_phi restricted to A through the left action.

    On coefficients this is c'_v = sum_w Z_{wv}(beta) c_w with the same
    transfer matrix as for trivial coefficient dynamics, because
    exp(-beta G_w) factorizes as exp(-beta D) (x) exp(-beta H) slotwise.
    """
    U = _as_group(U)
    Z = transfer_matrix(X, U.D, phi.beta).Z
    return KmsFunctional(phi.beta, phi.dynamics, np.clip(Z.T @ phi.c, 0.0, None))


def apply_F_definitional(phi, X, U):
    """Reference path for F: build kappa_phi by frame sums, then evaluate on pi(A)."""
    U = _as_group(U)
    psi, _ = functional_on_algebra(lambda T: weight_by_frame(phi, U, T), X, phi.dynamics, phi.beta)
    return psi


def weight_stages_check(X, Y, U, V, phi, operators):
    """max |kappa^{U(x)V}_phi(S (x) 1) - kappa^U_psi(S)| with psi = kappa^V_phi|_A."""
    U, V = _as_group(U), _as_group(V)
    psi = apply_F_general(phi, Y, V)
    UV = U.tensor(V)
    XY = tensor(X, Y)
    if UV.module != XY:
        raise ShapeError("composed dynamics do not live on X (x) Y")
    k_xy = induce_weight(phi, XY, UV)
    k_x = induce_weight(psi, X, U)
    one = Y.identity_operator()
    worst = 0.0
    for S in operators:
        lhs = k_xy(tensor_operator(S, one))
        rhs = k_x(S)
        worst = max(worst, abs(lhs - rhs))
    return worst


@dataclass(frozen=True)
class GeneralKmsSolution:
    """Answer of the coefficient-cone problem at one beta.

    ``toeplitz`` is a KMS state of A with F phi <= phi (or None), ``pimsner``
    one with F phi = phi (or None); both normalized so phi(1) = 1.
    """

    beta: float
    Z: np.ndarray
    weights: np.ndarray
    toeplitz: KmsFunctional
    pimsner: KmsFunctional


def solve_kms_states_general(X, U, beta, tol=1e-9):
    U = _as_group(U)
    if beta <= 0:
        raise ValueError("beta must be positive")
    Z = transfer_matrix(X, U.D, beta)
    weights = np.array([np.trace(e).real for e in U.H.exp(-beta)])
    sub = subinvariant_solver(Z, X.algebra, tol=tol, weights=weights)
    inv = invariant_solver(Z, X.algebra, tol=tol, weights=weights)
    mk = (lambda t: None if t is None else KmsFunctional(beta, U.H, t.t))
    return GeneralKmsSolution(beta, Z.Z, weights, mk(sub), mk(inv))


def intertwining_residual(U, xi, eta, a, t):
    """max of ||<U_t xi, U_t eta> - sigma_t(<xi,eta>)|| and ||U_t(a xi) - sigma_t(a) U_t xi||."""
    from .correspondence import left_act
    lhs = inner_product(U.apply(xi, t), U.apply(eta, t))
    rhs = U.sigma(inner_product(xi, eta), t)
    r1 = lhs.distance(rhs)
    r2 = U.apply(left_act(a, xi), t).distance(left_act(U.sigma(a, t), U.apply(xi, t)))
    return max(r1, r2)


def kms_residual_on_BX(kappa, pairs):
    """max |kappa(xy) - kappa(y gamma_{i beta}(x))| over operator pairs."""
    worst = 0.0
    for x, y in pairs:
        lhs = kappa(x @ y)
        rhs = kappa(y @ kappa.group.gamma_operator(x, 1j * kappa.beta))
        worst = max(worst, abs(lhs - rhs))
    return worst


__all__ = [
    "TwistedIsometryGroup", "InducedWeight", "induce_weight", "restrict_weight",
    "apply_F_general", "apply_F_definitional", "weight_stages_check",
    "solve_kms_states_general", "GeneralKmsSolution", "weight_by_frame",
    "defining_property_residual", "functional_on_algebra", "intertwining_residual",
    "kms_residual_on_BX",
]
