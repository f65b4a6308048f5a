"""Hilbert bimodules over a block algebra, described by multiplicities.

A correspondence X over A = M_{d_0} + ... + M_{d_{V-1}} is fixed by the
integer matrix ``mult[w][v]``: the number of copies of the irreducible
left block v inside the right block w.  The right-block-w part of X is the
space of ``k_w x d_w`` matrices, ``k_w = sum_v mult[w][v] d_v``, with rows
ordered canonically as (v ascending, copy, inner index).  The inner product
is ``<xi, eta>_w = xi_w^* eta_w`` and the left action of ``a`` is
``pi_w(a) = sum_v 1_{mult[w][v]} (x) a_v`` in that row order.

Adjointable operators are then just k_w x k_w matrices per block, and the
A-bimodule maps are the matrices ``sum_v S^{(w,v)} (x) 1_{d_v}``.

Tensor products X (x)_A Y are again of this form with
``mult_{X(x)Y} = mult_Y @ mult_X``.  The copy index of the (u, v) slot of
X (x) Y runs over triples (w, copy in Y's (u, w) slot, copy in X's (w, v)
slot) in lexicographic order, i.e. length-two paths v -> w -> u.  The
permutation between this canonical order and the "natural" order produced
by stacking xi_w eta-chunks is stored explicitly so every identification is
an index bijection.
"""

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from . import _linalg
from .algebra import AlgebraElement, BlockAlgebra, ShapeError, TraceVector


class Correspondence:
    """Right Hilbert A-bimodule given by block multiplicities."""

    def __init__(self, algebra, mult, factors=None):
        if not isinstance(algebra, BlockAlgebra):
            algebra = BlockAlgebra(tuple(algebra))
        m = np.array(mult, dtype=int)
        V = algebra.num_blocks
        if m.shape != (V, V):
            raise ShapeError("multiplicity matrix must be %dx%d, got %s" % (V, V, m.shape))
        if np.any(m < 0):
            raise ValueError("multiplicities must be nonnegative")
        m.setflags(write=False)
        self.algebra = algebra
        self.mult = m
        self.factors = factors
        d = algebra.block_dims
        self.k = tuple(int(sum(m[w, v] * d[v] for v in range(V))) for w in range(V))
        # offset[w][v] = first row of the left-block-v segment in right block w
        offs = []
        for w in range(V):
            row, acc = [], 0
            for v in range(V):
                row.append(acc)
                acc += m[w, v] * d[v]
            offs.append(tuple(row))
        self.offset = tuple(offs)

    def __repr__(self):
        return "Correspondence(dims=%s, mult=%s)" % (self.algebra.block_dims, self.mult.tolist())

    def __eq__(self, other):
        if other is self:
            return True
        return (isinstance(other, Correspondence) and other.algebra == self.algebra
                and np.array_equal(other.mult, self.mult))

    def __hash__(self):
        return hash((self.algebra.block_dims, self.mult.tobytes()))

    @property
    def num_blocks(self):
        return self.algebra.num_blocks

    def slots(self):
        """Pairs (w, v) with a nonzero multiplicity."""
        V = self.num_blocks
        return [(w, v) for w in range(V) for v in range(V) if self.mult[w, v] > 0]

    def row(self, w, v, copy, inner):
        """Row index of (v, copy, inner) inside right block w."""
        if not (0 <= copy < self.mult[w, v]) or not (0 <= inner < self.algebra.block_dims[v]):
            raise IndexError("no row (v=%d, copy=%d, inner=%d) in block %d" % (v, copy, inner, w))
        return self.offset[w][v] + copy * self.algebra.block_dims[v] + inner

    def is_full(self):
        """<X, X> spans A iff every right block is nonzero."""
        return all(k > 0 for k in self.k)

    # constructors for vectors and operators
    def zero_vector(self):
        d = self.algebra.block_dims
        return ModuleVector(self, tuple(np.zeros((self.k[w], d[w]), dtype=complex)
                                        for w in range(self.num_blocks)))

    def basis_vector(self, w, v, copy, inner, col=0):
        """The matrix unit at row (v, copy, inner), column `col` of block w."""
        x = self.zero_vector()
        blocks = [b.copy() for b in x.blocks]
        blocks[w][self.row(w, v, copy, inner), col] = 1.0
        return ModuleVector(self, tuple(blocks))

    def basis(self):
        """All matrix units E_{r,j}: a linear basis of X."""
        out = []
        d = self.algebra.block_dims
        for w in range(self.num_blocks):
            for r in range(self.k[w]):
                for j in range(d[w]):
                    blocks = [b.copy() for b in self.zero_vector().blocks]
                    blocks[w][r, j] = 1.0
                    out.append(ModuleVector(self, tuple(blocks)))
        return out

    def frame(self):
        """Canonical frame {E_{r,0}}: the theta_{xi,xi} are the diagonal units and sum to 1."""
        out = []
        for w in range(self.num_blocks):
            for r in range(self.k[w]):
                blocks = [b.copy() for b in self.zero_vector().blocks]
                blocks[w][r, 0] = 1.0
                out.append(ModuleVector(self, tuple(blocks)))
        return out

    def identity_operator(self):
        return ModuleOperator(self, tuple(np.eye(k, dtype=complex) for k in self.k))

    def zero_operator(self):
        return ModuleOperator(self, tuple(np.zeros((k, k), dtype=complex) for k in self.k))

    def left_action(self, a):
        """pi(a) as a ModuleOperator."""
        if a.algebra != self.algebra:
            raise ShapeError("element and module live over different algebras")
        blocks = []
        for w in range(self.num_blocks):
            parts = [np.kron(np.eye(self.mult[w, v]), a.blocks[v])
                     for v in range(self.num_blocks) if self.mult[w, v] > 0]
            blocks.append(_blockdiag(parts, self.k[w]))
        return ModuleOperator(self, tuple(blocks))

    def random_vector(self, rng):
        d = self.algebra.block_dims
        return ModuleVector(self, tuple(rng.normal(size=(self.k[w], d[w]))
                                        + 1j * rng.normal(size=(self.k[w], d[w]))
                                        for w in range(self.num_blocks)))

    def random_operator(self, rng, positive=False):
        if positive:
            return ModuleOperator(self, tuple(_linalg.random_psd(rng, k) for k in self.k))
        return ModuleOperator(self, tuple(rng.normal(size=(k, k)) + 1j * rng.normal(size=(k, k))
                                          for k in self.k))

    def random_bimodule_operator(self, rng, positive=False):
        slots = {}
        for (w, v) in self.slots():
            n = self.mult[w, v]
            if positive:
                slots[(w, v)] = _linalg.random_psd(rng, n)
            else:
                slots[(w, v)] = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        return BimoduleOperator(self, slots)

    @cached_property
    def _tensor_cache(self):
        return {}


def _blockdiag(parts, size):
    out = np.zeros((size, size), dtype=complex)
    i = 0
    for p in parts:
        n = p.shape[0]
        out[i:i + n, i:i + n] = p
        i += n
    if i != size:
        raise ShapeError("block diagonal assembly mismatch (%d != %d)" % (i, size))
    return out


def identity_correspondence(algebra):
    """A as a bimodule over itself: one copy of block v in right block v."""
    return Correspondence(algebra, np.eye(algebra.num_blocks, dtype=int))


@dataclass(frozen=True, eq=False)
class ModuleVector:
    module: Correspondence
    blocks: tuple

    def __post_init__(self):
        X = self.module
        if len(self.blocks) != X.num_blocks:
            raise ShapeError("vector needs %d blocks" % X.num_blocks)
        blocks = tuple(np.asarray(b, dtype=complex) for b in self.blocks)
        for w, b in enumerate(blocks):
            if b.shape != (X.k[w], X.algebra.block_dims[w]):
                raise ShapeError("block %d has shape %s, expected %s"
                                 % (w, b.shape, (X.k[w], X.algebra.block_dims[w])))
        object.__setattr__(self, "blocks", blocks)

    def _check(self, other):
        if not isinstance(other, ModuleVector):
            return NotImplemented
        if other.module != self.module:
            raise ShapeError("vectors of different modules")
        return other

    def __add__(self, other):
        if self._check(other) is NotImplemented:
            return NotImplemented
        return ModuleVector(self.module, tuple(a + b for a, b in zip(self.blocks, other.blocks)))

    def __sub__(self, other):
        if self._check(other) is NotImplemented:
            return NotImplemented
        return ModuleVector(self.module, tuple(a - b for a, b in zip(self.blocks, other.blocks)))

    def __neg__(self):
        return ModuleVector(self.module, tuple(-a for a in self.blocks))

    def __mul__(self, c):
        """Scalar multiple, or right action when `c` is an AlgebraElement."""
        if isinstance(c, AlgebraElement):
            return right_act(self, c)
        return ModuleVector(self.module, tuple(c * a for a in self.blocks))

    def __rmul__(self, c):
        if isinstance(c, AlgebraElement):
            return left_act(c, self)
        return self * c

    def norm(self):
        """||xi|| = ||<xi, xi>||^{1/2}."""
        return float(np.sqrt(inner_product(self, self).norm()))

    def allclose(self, other, atol=1e-12):
        self._check(other)
        return all(np.allclose(a, b, rtol=0, atol=atol) for a, b in zip(self.blocks, other.blocks))

    def distance(self, other):
        self._check(other)
        return max([float(np.max(np.abs(a - b))) for a, b in zip(self.blocks, other.blocks) if a.size]
                   or [0.0])


@dataclass(frozen=True, eq=False)
class ModuleOperator:
    """Adjointable operator on X: one k_w x k_w matrix per right block."""

    module: Correspondence
    blocks: tuple

    def __post_init__(self):
        X = self.module
        if len(self.blocks) != X.num_blocks:
            raise ShapeError("operator needs %d blocks" % X.num_blocks)
        blocks = tuple(np.asarray(b, dtype=complex) for b in self.blocks)
        for w, b in enumerate(blocks):
            if b.shape != (X.k[w], X.k[w]):
                raise ShapeError("block %d has shape %s, expected %s" % (w, b.shape, (X.k[w], X.k[w])))
        object.__setattr__(self, "blocks", blocks)

    def _check(self, other):
        if other.module != self.module:
            raise ShapeError("operators on different modules")

    def __add__(self, other):
        self._check(other)
        return ModuleOperator(self.module, tuple(a + b for a, b in zip(self.blocks, other.blocks)))

    def __sub__(self, other):
        self._check(other)
        return ModuleOperator(self.module, tuple(a - b for a, b in zip(self.blocks, other.blocks)))

    def __mul__(self, c):
        return ModuleOperator(self.module, tuple(c * a for a in self.blocks))

    __rmul__ = __mul__

    def __matmul__(self, other):
        if isinstance(other, ModuleVector):
            return apply_operator(self, other)
        self._check(other)
        return ModuleOperator(self.module, tuple(a @ b for a, b in zip(self.blocks, other.blocks)))

    def adjoint(self):
        return ModuleOperator(self.module, tuple(a.conj().T for a in self.blocks))

    def norm(self):
        return max([np.linalg.norm(a, 2) for a in self.blocks if a.size] or [0.0])

    def is_positive(self, tol=1e-12):
        return all(_linalg.is_psd(a, tol) for a in self.blocks)

    def allclose(self, other, atol=1e-12):
        self._check(other)
        return all(np.allclose(a, b, rtol=0, atol=atol) for a, b in zip(self.blocks, other.blocks))

    def distance(self, other):
        self._check(other)
        return max([float(np.max(np.abs(a - b))) for a, b in zip(self.blocks, other.blocks) if a.size]
                   or [0.0])

    def is_bimodule_map(self, tol=1e-10):
        """Commutes with the left action of every matrix unit of A."""
        X = self.module
        scale = max(1.0, self.norm())
        for a in X.algebra.matrix_units():
            p = X.left_action(a)
            if (self @ p).distance(p @ self) > tol * scale:
                return False
        return True


class BimoduleOperator:
    """A-bimodule map on X, stored as one mult[w][v]-square matrix per slot."""

    def __init__(self, module, slots):
        self.module = module
        clean = {}
        for (w, v) in module.slots():
            n = module.mult[w, v]
            s = slots.get((w, v))
            clean[(w, v)] = np.zeros((n, n), dtype=complex) if s is None else _linalg.as_matrix(s, n)
        extra = set(slots) - set(clean)
        if any(np.any(slots[key]) for key in extra):
            raise ShapeError("slot(s) %s have zero multiplicity" % sorted(extra))
        self.slots = clean

    def __repr__(self):
        return "BimoduleOperator(%r, slots=%d)" % (self.module, len(self.slots))

    @classmethod
    def identity(cls, module):
        return cls(module, {s: np.eye(module.mult[s]) for s in module.slots()})

    @classmethod
    def from_operator(cls, T, tol=1e-10):
        """Recover the slot matrices of a bimodule map, rejecting anything else."""
        if not T.is_bimodule_map(tol):
            raise ValueError("operator is not an A-bimodule map")
        X = T.module
        d = X.algebra.block_dims
        slots = {}
        for (w, v) in X.slots():
            n = X.mult[w, v]
            idx = [X.offset[w][v] + mu * d[v] for mu in range(n)]
            slots[(w, v)] = T.blocks[w][np.ix_(idx, idx)]
        return cls(X, slots)

    def map(self, f):
        return BimoduleOperator(self.module, {s: f(m) for s, m in self.slots.items()})

    def __add__(self, other):
        return BimoduleOperator(self.module, {s: m + other.slots[s] for s, m in self.slots.items()})

    def __mul__(self, c):
        return self.map(lambda m: c * m)

    __rmul__ = __mul__

    def __matmul__(self, other):
        if other.module != self.module:
            raise ShapeError("bimodule operators on different modules")
        return BimoduleOperator(self.module, {s: m @ other.slots[s] for s, m in self.slots.items()})

    def adjoint(self):
        return self.map(lambda m: m.conj().T)

    def is_positive(self, tol=1e-12):
        return all(_linalg.is_psd(m, tol) for m in self.slots.values())

    def is_hermitian(self, tol=_linalg.HERMITIAN_TOL):
        return all(_linalg.is_hermitian(m, tol) for m in self.slots.values())

    def to_operator(self):
        X = self.module
        d = X.algebra.block_dims
        blocks = []
        for w in range(X.num_blocks):
            parts = [np.kron(self.slots[(w, v)], np.eye(d[v]))
                     for v in range(X.num_blocks) if X.mult[w, v] > 0]
            blocks.append(_blockdiag(parts, X.k[w]))
        return ModuleOperator(X, tuple(blocks))

    def slot_traces(self):
        """Matrix of tr S^{(w,v)} (zero where the slot is empty)."""
        V = self.module.num_blocks
        z = np.zeros((V, V), dtype=complex)
        for (w, v), m in self.slots.items():
            z[w, v] = np.trace(m)
        return z


# --- basic module operations ---------------------------------------------

def inner_product(xi, eta):
    """<xi, eta> = sum_w xi_w^* eta_w, conjugate-linear in xi."""
    if xi.module != eta.module:
        raise ShapeError("vectors of different modules")
    return AlgebraElement(xi.module.algebra, tuple(a.conj().T @ b for a, b in zip(xi.blocks, eta.blocks)))


def left_act(a, xi):
    p = xi.module.left_action(a)
    return apply_operator(p, xi)


def right_act(xi, a):
    if a.algebra != xi.module.algebra:
        raise ShapeError("element and module live over different algebras")
    return ModuleVector(xi.module, tuple(x @ b for x, b in zip(xi.blocks, a.blocks)))


def apply_operator(T, xi):
    if T.module != xi.module:
        raise ShapeError("operator and vector live on different modules")
    return ModuleVector(xi.module, tuple(t @ x for t, x in zip(T.blocks, xi.blocks)))


def theta(xi, eta):
    """The rank-one operator theta_{xi,eta}: zeta -> xi <eta, zeta>."""
    if xi.module != eta.module:
        raise ShapeError("vectors of different modules")
    return ModuleOperator(xi.module, tuple(a @ b.conj().T for a, b in zip(xi.blocks, eta.blocks)))


def induced_trace(tau, T):
    """Tr_tau(T) = sum_w t_w tr(T_w).

    This is the closed form of the supremum over frames; it is linear, so it
    is defined for every T (real when T is self-adjoint).
    """
    if tau.algebra != T.module.algebra:
        raise ShapeError("trace and operator live over different algebras")
    return complex(sum(t * np.trace(b) for t, b in zip(tau.t, T.blocks)))


def frame_partial_sums(tau, T, frame=None):
    """Partial sums sum_{xi in I_j} tau(<xi, T xi>) along a nested chain of frames.

    Without a closed form this is how Tr_tau is defined; for positive T the
    sums increase and reach ``induced_trace`` at the full frame.
    """
    from .algebra import evaluate_trace
    frame = T.module.frame() if frame is None else frame
    sums, acc = [], 0.0
    for xi in frame:
        acc += evaluate_trace(tau, inner_product(xi, apply_operator(T, xi))).real
        sums.append(acc)
    return np.array(sums)


def induced_trace_functional(tau, T):
    """tau_T(a) = Tr_tau(pi(a) T) for a positive bimodule map T."""
    X = T.module
    if tau.algebra != X.algebra:
        raise ShapeError("trace and operator live over different algebras")
    if not T.is_positive(1e-12):
        raise ValueError("induced trace functional needs a positive bimodule map")
    z = T.slot_traces().real
    return TraceVector(X.algebra, np.clip(z.T @ tau.t, 0.0, None))


# --- tensor products -------------------------------------------------------

@dataclass(frozen=True)
class _TensorLayout:
    """Row bookkeeping for X (x) Y at one right block u.

    ``chunks`` lists, in natural order, (w, copy_y, y_row_start, nat_start)
    for every d_w-row chunk of Y_u; ``perm`` maps canonical rows to natural
    rows (canonical = natural[perm]).
    """

    chunks: tuple
    perm: np.ndarray = field(repr=False)


def tensor(X, Y):
    """X (x)_A Y with multiplicities mult_Y @ mult_X and canonical path indexing."""
    if X.algebra != Y.algebra:
        raise ShapeError("tensor factors must share the coefficient algebra")
    # the layout depends only on the two multiplicity matrices
    cache = X._tensor_cache
    if Y in cache:
        return cache[Y]
    A = X.algebra
    V = A.num_blocks
    d = A.block_dims
    mult = Y.mult @ X.mult
    XY = Correspondence(A, mult, factors=(X, Y))
    layouts = []
    for u in range(V):
        chunks = []
        nat_base = {}
        nat = 0
        for w in range(V):
            nat_base[w] = nat
            for mu_y in range(Y.mult[u, w]):
                chunks.append((w, mu_y, Y.offset[u][w] + mu_y * d[w], nat))
                nat += X.k[w]
        perm = []
        for v in range(V):
            for w in range(V):
                for mu_y in range(Y.mult[u, w]):
                    for mu_x in range(X.mult[w, v]):
                        start = nat_base[w] + mu_y * X.k[w] + X.offset[w][v] + mu_x * d[v]
                        perm.extend(range(start, start + d[v]))
        perm = np.array(perm, dtype=int)
        if perm.size != XY.k[u] or nat != XY.k[u]:
            raise AssertionError("tensor layout mismatch at block %d" % u)
        layouts.append(_TensorLayout(tuple(chunks), perm))
    XY.layouts = tuple(layouts)
    cache[Y] = XY
    return XY


def tensor_power(X, n):
    """X^{(x)n}, built as X (x) X^{(x)(n-1)}; n = 0 gives A itself."""
    if n < 0:
        raise ValueError("tensor power must be nonnegative")
    if n == 0:
        return identity_correspondence(X.algebra)
    out = X
    for _ in range(n - 1):
        out = tensor(X, out)
    return out


def creation_blocks(xi, Y, XY=None):
    """Matrices of eta -> xi (x) eta, one (k^{XY}_u x k^Y_u) block per u."""
    X = xi.module
    XY = tensor(X, Y) if XY is None else XY
    d = X.algebra.block_dims
    out = []
    for u, lay in enumerate(XY.layouts):
        m = np.zeros((XY.k[u], Y.k[u]), dtype=complex)
        for (w, _, ystart, nstart) in lay.chunks:
            m[nstart:nstart + X.k[w], ystart:ystart + d[w]] = xi.blocks[w]
        out.append(m[lay.perm, :])
    return out


def elementary_tensor(xi, eta):
    """xi (x) eta in X (x) Y, balanced over A."""
    X, Y = xi.module, eta.module
    if X.algebra != Y.algebra:
        raise ShapeError("incompatible correspondences")
    XY = tensor(X, Y)
    mats = creation_blocks(xi, Y, XY)
    return ModuleVector(XY, tuple(m @ e for m, e in zip(mats, eta.blocks)))


def elementary_tensor_chain(vectors):
    """xi_1 (x) (xi_2 (x) ( ... (x) xi_n)), the left-iterated convention."""
    vectors = list(vectors)
    if not vectors:
        raise ValueError("need at least one factor")
    out = vectors[-1]
    for xi in reversed(vectors[:-1]):
        out = elementary_tensor(xi, out)
    return out


def tensor_inner_product(xis, etas, a=None):
    """<xi_1 (x) ... (x) xi_n, eta_1 (x) ... (x) eta_n> without building X^{(x)n}.

    Uses <xi_1 (x) x', eta_1 (x) y'> = <x', <xi_1, eta_1> y'>, so the
    result is <xi_n, a_{n-1} eta_n> with a_k = <xi_k, a_{k-1} eta_k>.
    The optional `a` is inserted in the middle: <xi, a eta>.
    """
    xis, etas = list(xis), list(etas)
    if len(xis) != len(etas):
        raise ValueError("tensor inner product needs equal degrees")
    if not xis:
        raise ValueError("empty tensors: use the algebra directly")
    acc = a
    for x, e in zip(xis, etas):
        e2 = e if acc is None else left_act(acc, e)
        acc = inner_product(x, e2)
    return acc


def tensor_bimodule(S, T):
    """S (x) T for bimodule maps S on X and T on Y, as a bimodule map on X (x) Y."""
    X, Y = S.module, T.module
    XY = tensor(X, Y)
    V = X.num_blocks
    slots = {}
    for (u, v) in XY.slots():
        parts = [np.kron(T.slots[(u, w)], S.slots[(w, v)])
                 for w in range(V) if Y.mult[u, w] > 0 and X.mult[w, v] > 0]
        slots[(u, v)] = _blockdiag(parts, XY.mult[u, v])
    return BimoduleOperator(XY, slots)


def tensor_operator(S, T):
    """S (x) T on X (x) Y for S in B(X) and a bimodule map T on Y.

    `T` may be a BimoduleOperator or a ModuleOperator; the latter is checked
    to commute with the left action first.
    """
    if isinstance(T, ModuleOperator):
        T = BimoduleOperator.from_operator(T)
    X, Y = S.module, T.module
    XY = tensor(X, Y)
    blocks = []
    for u, lay in enumerate(XY.layouts):
        nat = np.zeros((XY.k[u], XY.k[u]), dtype=complex)
        V = X.num_blocks
        start = 0
        for w in range(V):
            n = Y.mult[u, w]
            if n == 0:
                continue
            size = n * X.k[w]
            nat[start:start + size, start:start + size] = np.kron(T.slots[(u, w)], S.blocks[w])
            start += size
        p = lay.perm
        blocks.append(nat[np.ix_(p, p)])
    return ModuleOperator(XY, tuple(blocks))


def associator(X, Y, Z):
    """Row bijection (X(x)Y)(x)Z -> X(x)(Y(x)Z) per block, found on matrix units.

    Returns a list of index arrays ``p`` with
    ``(xi (x) (eta (x) zeta))_u == ((xi (x) eta) (x) zeta)_u[p]``.
    """
    left = tensor(tensor(X, Y), Z)
    right = tensor(X, tensor(Y, Z))
    if not np.array_equal(left.mult, right.mult):
        raise AssertionError("tensor product is not associative on multiplicities")
    maps = [dict() for _ in range(X.num_blocks)]
    for xi in X.basis():
        for eta in Y.basis():
            xe = elementary_tensor(xi, eta)
            if not any(np.any(b) for b in xe.blocks):
                continue
            for zeta in Z.basis():
                a = elementary_tensor(xe, zeta)
                b = elementary_tensor(xi, elementary_tensor(eta, zeta))
                for u in range(X.num_blocks):
                    ra, ca = np.nonzero(np.abs(a.blocks[u]) > 0.5)
                    rb, cb = np.nonzero(np.abs(b.blocks[u]) > 0.5)
                    for i, j in zip(rb, ra):
                        maps[u][int(i)] = int(j)
    out = []
    for u in range(X.num_blocks):
        p = np.array([maps[u][i] for i in range(right.k[u])], dtype=int)
        out.append(p)
    return out
