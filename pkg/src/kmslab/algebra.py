"""Finite-dimensional C*-algebras written as direct sums of matrix blocks.

An algebra is fixed by its block sizes ``d_v``; elements are tuples of
``d_v x d_v`` complex matrices.  Traces on such an algebra are nonnegative
weights ``t_v`` on the unnormalized block traces, and the only coefficient
dynamics we model are blockwise inner groups ``Ad exp(itH_v)``.

The trace convention throughout the package is the *unnormalized* matrix
trace on each block, so a trace vector ``t`` is a state iff
``sum_v t_v d_v == 1``.
"""

from dataclasses import dataclass

import numpy as np

from . import _linalg


class ShapeError(ValueError):
    """Raised when objects living over different algebras/modules are mixed."""


@dataclass(frozen=True)
class BlockAlgebra:
    """The algebra M_{d_0} + ... + M_{d_{V-1}}."""

    block_dims: tuple

    def __post_init__(self):
        dims = tuple(int(d) for d in self.block_dims)
        if len(dims) < 1:
            raise ValueError("an algebra needs at least one block")
        if any(d < 1 for d in dims):
            raise ValueError("block dimensions must be positive, got %s" % (dims,))
        object.__setattr__(self, "block_dims", dims)

    @property
    def num_blocks(self):
        return len(self.block_dims)

    @property
    def dims(self):
        return np.array(self.block_dims, dtype=float)

    @property
    def dimension(self):
        return sum(d * d for d in self.block_dims)

    def identity(self):
        return AlgebraElement(self, tuple(np.eye(d, dtype=complex) for d in self.block_dims))

    def zeros(self):
        return AlgebraElement(self, tuple(np.zeros((d, d), dtype=complex) for d in self.block_dims))

    def element(self, blocks):
        return AlgebraElement(self, tuple(blocks))

    def unit_vector(self, v, i=0, j=0):
        """Matrix unit e_ij sitting in block v."""
        a = self.zeros()
        blocks = list(a.blocks)
        blocks[v] = blocks[v].copy()
        blocks[v][i, j] = 1.0
        return AlgebraElement(self, tuple(blocks))

    def matrix_units(self):
        """All matrix units, a linear basis of the algebra."""
        out = []
        for v, d in enumerate(self.block_dims):
            for i in range(d):
                for j in range(d):
                    out.append(self.unit_vector(v, i, j))
        return out

    def random_element(self, rng, hermitian=False):
        blocks = []
        for d in self.block_dims:
            z = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
            if hermitian:
                z = 0.5 * (z + z.conj().T)
            blocks.append(z)
        return AlgebraElement(self, tuple(blocks))

    def random_positive(self, rng):
        return AlgebraElement(self, tuple(_linalg.random_psd(rng, d) for d in self.block_dims))


@dataclass(frozen=True, eq=False)
class AlgebraElement:
    algebra: BlockAlgebra
    blocks: tuple

    def __post_init__(self):
        blocks = tuple(_linalg.as_matrix(b) for b in self.blocks)
        if len(blocks) != self.algebra.num_blocks:
            raise ShapeError("expected %d blocks, got %d" % (self.algebra.num_blocks, len(blocks)))
        for b, d in zip(blocks, self.algebra.block_dims):
            if b.shape != (d, d):
                raise ShapeError("block of shape %s does not match dimension %d" % (b.shape, d))
        object.__setattr__(self, "blocks", blocks)

    def _check(self, other):
        if not isinstance(other, AlgebraElement):
            return NotImplemented
        if other.algebra != self.algebra:
            raise ShapeError("elements of different algebras")
        return other

    def __add__(self, other):
        if self._check(other) is NotImplemented:
            return NotImplemented
        return AlgebraElement(self.algebra, tuple(a + b for a, b in zip(self.blocks, other.blocks)))

    def __sub__(self, other):
        if self._check(other) is NotImplemented:
            return NotImplemented
        return AlgebraElement(self.algebra, tuple(a - b for a, b in zip(self.blocks, other.blocks)))

    def __neg__(self):
        return AlgebraElement(self.algebra, tuple(-a for a in self.blocks))

    def __mul__(self, c):
        if isinstance(c, AlgebraElement):
            return NotImplemented
        return AlgebraElement(self.algebra, tuple(c * a for a in self.blocks))

    __rmul__ = __mul__

    def __matmul__(self, other):
        if self._check(other) is NotImplemented:
            return NotImplemented
        return AlgebraElement(self.algebra, tuple(a @ b for a, b in zip(self.blocks, other.blocks)))

    def adjoint(self):
        return AlgebraElement(self.algebra, tuple(a.conj().T for a in self.blocks))

    def norm(self):
        """C*-norm: the largest block operator norm."""
        return max(np.linalg.norm(a, 2) if a.size else 0.0 for a in self.blocks)

    def is_positive(self, tol=1e-12):
        return all(_linalg.is_psd(a, tol) for a in self.blocks)

    def allclose(self, other, atol=1e-12):
        self._check(other)
        return all(np.allclose(a, b, rtol=0, atol=atol) for a, b in zip(self.blocks, other.blocks))

    def distance(self, other):
        self._check(other)
        return max(float(np.max(np.abs(a - b))) if a.size else 0.0
                   for a, b in zip(self.blocks, other.blocks))


@dataclass(frozen=True, eq=False)
class TraceVector:
    """Trace tau(a) = sum_v t_v tr(a_v) with nonnegative weights t_v."""

    algebra: BlockAlgebra
    t: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.t, dtype=float).reshape(-1)
        if t.shape != (self.algebra.num_blocks,):
            raise ShapeError("trace vector needs %d coefficients" % self.algebra.num_blocks)
        if np.any(t < 0):
            raise ValueError("trace coefficients must be nonnegative, got %s" % t)
        t.setflags(write=False)
        object.__setattr__(self, "t", t)

    @property
    def mass(self):
        """tau(1)."""
        return float(self.t @ self.algebra.dims)

    def is_state(self, tol=1e-9):
        return abs(self.mass - 1.0) <= tol

    def normalized(self):
        m = self.mass
        if m <= 0:
            raise ValueError("cannot normalize the zero trace")
        return TraceVector(self.algebra, self.t / m)

    def __call__(self, a):
        return evaluate_trace(self, a)


def evaluate_trace(tau, a):
    """tau(a) = sum_v t_v tr(a_v)."""
    if a.algebra != tau.algebra:
        raise ShapeError("trace and element live over different algebras")
    return complex(sum(t * np.trace(b) for t, b in zip(tau.t, a.blocks)))


@dataclass(frozen=True, eq=False)
class CoeffDynamics:
    """sigma_z(a)_v = exp(izH_v) a_v exp(-izH_v), with Hermitian H_v."""

    algebra: BlockAlgebra
    H: tuple

    def __post_init__(self):
        hs = tuple(_linalg.as_matrix(h, d) for h, d in zip(self.H, self.algebra.block_dims))
        if len(hs) != self.algebra.num_blocks:
            raise ShapeError("one Hamiltonian block per algebra block is required")
        for h in hs:
            if not _linalg.is_hermitian(h):
                raise ValueError("coefficient dynamics must be Hermitian blockwise")
        object.__setattr__(self, "H", hs)

    @classmethod
    def trivial(cls, algebra):
        return cls(algebra, tuple(np.zeros((d, d)) for d in algebra.block_dims))

    @property
    def is_trivial(self):
        return all(not np.any(h) for h in self.H)

    def exp(self, z):
        """Blocks of exp(z H)."""
        return tuple(_linalg.expmh(h, z) for h in self.H)


def sigma_apply(H, z, a):
    """Analytic continuation sigma_z(a) of the coefficient dynamics."""
    if a.algebra != H.algebra:
        raise ShapeError("dynamics and element live over different algebras")
    left = H.exp(1j * z)
    right = H.exp(-1j * z)
    return AlgebraElement(a.algebra, tuple(l @ b @ r for l, b, r in zip(left, a.blocks, right)))


@dataclass(frozen=True, eq=False)
class KmsFunctional:
    """phi(a) = sum_v c_v tr(a_v exp(-beta H_v)).

    These are exactly the (sigma, beta)-KMS positive functionals for the
    blockwise inner dynamics: on each block the KMS functional is unique up
    to the scalar c_v.
    """

    beta: float
    dynamics: CoeffDynamics
    c: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.c, dtype=float).reshape(-1)
        if c.shape != (self.dynamics.algebra.num_blocks,):
            raise ShapeError("need one coefficient per block")
        if np.any(c < 0):
            raise ValueError("KMS coefficients must be nonnegative")
        c.setflags(write=False)
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "beta", float(self.beta))

    @property
    def algebra(self):
        return self.dynamics.algebra

    def densities(self):
        """Blocks c_v exp(-beta H_v); phi(a) = sum_v tr(a_v rho_v)."""
        if "_rho" not in self.__dict__:
            rho = tuple(c * e for c, e in zip(self.c, self.dynamics.exp(-self.beta)))
            for r in rho:
                r.setflags(write=False)
            object.__setattr__(self, "_rho", rho)
        return self._rho

    def block_weights(self):
        """tr exp(-beta H_v): the normalization weights of the coefficient cone."""
        return np.array([np.trace(e).real for e in self.dynamics.exp(-self.beta)])

    @property
    def mass(self):
        return float(self.c @ self.block_weights())

    def __call__(self, a):
        return kms_functional_eval(self, a)

    @classmethod
    def from_trace(cls, tau, beta=0.0):
        return cls(beta, CoeffDynamics.trivial(tau.algebra), tau.t)

    @classmethod
    def gibbs_state(cls, dynamics, beta):
        """The normalized functional with every c_v equal."""
        c = np.ones(dynamics.algebra.num_blocks)
        phi = cls(beta, dynamics, c)
        return cls(beta, dynamics, c / phi.mass)


def kms_functional_eval(phi, a):
    if a.algebra != phi.algebra:
        raise ShapeError("functional and element live over different algebras")
    return complex(sum(np.sum(b * rho.T) for b, rho in zip(a.blocks, phi.densities())))


def kms_pairing(density, x, y):
    """The pairing (x, y) = Phi(x sigma_{-i/2}(y)) for Phi = tr(rho .).

    For a faithful functional Phi = sum_v tr(rho_v .) with modular group
    Ad rho^{it}, this is sum_v tr(rho_v^{1/2} x_v rho_v^{1/2} y_v).
    `density` holds the blocks rho_v (weights already folded in).
    """
    if not (density.algebra == x.algebra == y.algebra):
        raise ShapeError("density and arguments live over different algebras")
    total = 0j
    for rho, a, b in zip(density.blocks, x.blocks, y.blocks):
        if not _linalg.is_hermitian(rho):
            raise ValueError("density must be Hermitian")
        w, v = _linalg.eigh(rho)
        if w[0] <= 0:
            raise ValueError("density is singular or not positive (min eigenvalue %g)" % w[0])
        r = (v * np.sqrt(w)) @ v.conj().T
        total += np.trace(r @ a @ r @ b)
    return complex(total)


def verify_kms_functional(phi, pairs, tol=None):
    """Largest |phi(xy) - phi(y sigma_{i beta}(x))| over the given pairs.

    `tol` is accepted for symmetry with the other verifiers; the residual is
    returned either way and callers compare it against their own gate.
    """
    worst = 0.0
    for x, y in pairs:
        lhs = kms_functional_eval(phi, x @ y)
        rhs = kms_functional_eval(phi, y @ sigma_apply(phi.dynamics, 1j * phi.beta, x))
        worst = max(worst, abs(lhs - rhs))
    return worst
