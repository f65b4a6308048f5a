"""Truncated Fock module A + X + X^{(x)2} + ... + X^{(x)N} with explicit matrices.

Operators are stored level-indexed: a dict mapping (out_level, in_level)
to one matrix per right block u, of shape k^{(out)}_u x k^{(in)}_u.  Level
n uses the canonical basis of X^{(x)n} = X (x) X^{(x)(n-1)}.  Creation out
of level N is dropped, so the Toeplitz relation holds exactly on levels
below N.
"""

from dataclasses import dataclass

import numpy as np

from . import _linalg
from .algebra import ShapeError
from .correspondence import creation_blocks, identity_correspondence, tensor, tensor_bimodule
from .toeplitz import ToeplitzElement, word_letters
from .transfer import collatz_wielandt, spectral_radius, transfer_matrix

DEFAULT_CAP = 10 ** 4


@dataclass(frozen=True, eq=False)
class FockTruncation:
    X: object
    N: int
    levels: tuple

    @property
    def algebra(self):
        return self.X.algebra

    @property
    def num_blocks(self):
        return self.X.num_blocks

    def level_sizes(self, u):
        return [L.k[u] for L in self.levels]

    @property
    def block_sizes(self):
        """K_u = sum_n k^{(n)}_u."""
        return tuple(sum(self.level_sizes(u)) for u in range(self.num_blocks))

    @property
    def dimension(self):
        """Complex dimension of the truncated module: sum_u K_u d_u."""
        d = self.algebra.block_dims
        return sum(K * du for K, du in zip(self.block_sizes, d))

    def level_dimension(self, n):
        d = self.algebra.block_dims
        return sum(k * du for k, du in zip(self.levels[n].k, d))

    def zero(self):
        return FockOperator(self, {})

    def identity(self):
        return FockOperator(self, {(n, n): [np.eye(k, dtype=complex) for k in L.k]
                                   for n, L in enumerate(self.levels)})

    def vacuum_projection(self):
        return FockOperator(self, {(0, 0): [np.eye(d, dtype=complex) for d in self.algebra.block_dims]})


def build_fock(X, N, cap=DEFAULT_CAP):
    """Levels 0..N of the Fock module; refuses truncations above `cap` complex dimensions."""
    if N < 0:
        raise ValueError("truncation level must be nonnegative")
    d = X.algebra.block_dims
    levels = [identity_correspondence(X.algebra)]
    total = sum(du * du for du in d)
    for n in range(1, N + 1):
        # predicted sizes first so oversized requests fail before allocation
        mult = X.mult if n == 1 else levels[-1].mult @ X.mult
        k = [int(sum(mult[u, v] * d[v] for v in range(len(d)))) for u in range(len(d))]
        total += sum(ku * du for ku, du in zip(k, d))
        if total > cap:
            raise MemoryError("truncated Fock module needs dimension %d, above the cap %d" % (total, cap))
        levels.append(X if n == 1 else tensor(X, levels[-1]))
    return FockTruncation(X, N, tuple(levels))


class FockOperator:
    """Level-block operator on a FockTruncation."""

    def __init__(self, F, blocks):
        self.F = F
        clean = {}
        for (p, q), mats in blocks.items():
            if not (0 <= p <= F.N and 0 <= q <= F.N):
                raise ShapeError("level pair %s outside the truncation" % ((p, q),))
            Lp, Lq = F.levels[p], F.levels[q]
            mats = [np.asarray(m, dtype=complex) for m in mats]
            for u, m in enumerate(mats):
                if m.shape != (Lp.k[u], Lq.k[u]):
                    raise ShapeError("level block %s/%d has shape %s" % ((p, q), u, m.shape))
            clean[(p, q)] = mats
        self.blocks = clean

    def _check(self, other):
        if other.F is not self.F:
            raise ShapeError("operators on different truncations")

    def __add__(self, other):
        self._check(other)
        out = {k: list(v) for k, v in self.blocks.items()}
        for k, v in other.blocks.items():
            out[k] = [a + b for a, b in zip(out[k], v)] if k in out else list(v)
        return FockOperator(self.F, out)

    def __sub__(self, other):
        return self + (-1.0) * other

    def __mul__(self, c):
        return FockOperator(self.F, {k: [c * m for m in v] for k, v in self.blocks.items()})

    __rmul__ = __mul__

    def __matmul__(self, other):
        self._check(other)
        out = {}
        for (p, q), a in self.blocks.items():
            for (q2, r), b in other.blocks.items():
                if q2 != q:
                    continue
                prod = [x @ y for x, y in zip(a, b)]
                out[(p, r)] = [s + t for s, t in zip(out[(p, r)], prod)] if (p, r) in out else prod
        return FockOperator(self.F, out)

    def adjoint(self):
        return FockOperator(self.F, {(q, p): [m.conj().T for m in v] for (p, q), v in self.blocks.items()})

    def block(self, p, q):
        if (p, q) in self.blocks:
            return self.blocks[(p, q)]
        return [np.zeros((self.F.levels[p].k[u], self.F.levels[q].k[u]), dtype=complex)
                for u in range(self.F.num_blocks)]

    def compress(self, max_level):
        """Keep only the blocks with both levels <= max_level."""
        return FockOperator(self.F, {k: v for k, v in self.blocks.items()
                                     if k[0] <= max_level and k[1] <= max_level})

    def restrict_input(self, max_level):
        """Keep the blocks with input level <= max_level (all output levels)."""
        return FockOperator(self.F, {k: v for k, v in self.blocks.items() if k[1] <= max_level})

    def distance(self, other):
        self._check(other)
        worst = 0.0
        for key in set(self.blocks) | set(other.blocks):
            for a, b in zip(self.block(*key), other.block(*key)):
                if a.size:
                    worst = max(worst, float(np.max(np.abs(a - b))))
        return worst

    def dense(self, u):
        """Flattened matrix on right block u (levels in order); for inspection only."""
        sizes = self.F.level_sizes(u)
        offs = np.concatenate([[0], np.cumsum(sizes)])
        out = np.zeros((offs[-1], offs[-1]), dtype=complex)
        for (p, q), v in self.blocks.items():
            out[offs[p]:offs[p + 1], offs[q]:offs[q + 1]] = v[u]
        return out

    def is_positive(self, tol=1e-12):
        return all(_linalg.is_psd(self.dense(u), tol) for u in range(self.F.num_blocks))


def creation_matrix(xi, F):
    """T_xi: level n -> level n+1 for n < N; level N goes to zero."""
    if xi.module != F.X:
        raise ShapeError("vector from a different module")
    out = {}
    for n in range(F.N):
        # level 1 is X itself; X (x) A carries the (identity) row layout
        target = tensor(F.X, F.levels[0]) if n == 0 else F.levels[n + 1]
        out[(n + 1, n)] = creation_blocks(xi, F.levels[n], target)
    return FockOperator(F, out)


def annihilation_matrix(xi, F):
    return creation_matrix(xi, F).adjoint()


def pi_matrix(a, F):
    """Diagonal left action of a on every level."""
    return FockOperator(F, {(n, n): list(L.left_action(a).blocks) for n, L in enumerate(F.levels)})


def _level_powers(S, F):
    """Slotwise tensor powers S^{(x)n} for n = 1..N, matching the level layouts."""
    powers = [None, S]
    for n in range(2, F.N + 1):
        p = tensor_bimodule(S, powers[-1])
        if p.module != F.levels[n]:
            raise ShapeError("tensor power does not match level %d" % n)
        powers.append(p)
    return powers[:F.N + 1]


def _gamma(S, F):
    out = {(0, 0): [np.eye(d, dtype=complex) for d in F.algebra.block_dims]}
    for n, p in enumerate(_level_powers(S, F)):
        if n:
            out[(n, n)] = list(p.to_operator().blocks)
    return FockOperator(F, out)


def gamma_density(D, beta, F):
    """Gamma_N(exp(-beta D)) = sum_n exp(-beta D)^{(x)n}, level 0 the identity."""
    if D.module != F.X:
        raise ShapeError("generator for a different module")
    return _gamma(D.exp(-beta), F)


def gamma_unitary(D, z, F):
    """Gamma_N(exp(izD)), the spatial implementation of gamma_z."""
    if D.module != F.X:
        raise ShapeError("generator for a different module")
    return _gamma(D.exp(1j * z), F)


def element_matrix(x, F):
    """Matrix of a ToeplitzElement: each word as the product of its letter matrices."""
    if x.module != F.X:
        raise ShapeError("element of a different Toeplitz algebra")
    out = pi_matrix(x.a, F)
    for c, w in x.terms:
        acc = None
        for kind, v in word_letters(w):
            m = creation_matrix(v, F) if kind == "T" else annihilation_matrix(v, F)
            acc = m if acc is None else acc @ m
        out = out + c * acc
    return out


def letters_matrix(letters, F):
    """Product of the matrices of a list of letters (see toeplitz.normal_order)."""
    from .algebra import AlgebraElement
    acc = F.identity()
    for l in letters:
        if isinstance(l, AlgebraElement):
            m = pi_matrix(l, F)
        elif isinstance(l, ToeplitzElement):
            m = element_matrix(l, F)
        else:
            kind, v = l
            m = creation_matrix(v, F) if kind == "T" else annihilation_matrix(v, F)
        acc = acc @ m
    return acc


class FockState:
    """Phi_N(x) = sum_n Tr_{tau0}(x_{nn} Gamma_n) on the truncation."""

    def __init__(self, tau0, F, D, beta, check=True):
        if check:
            r = spectral_radius(transfer_matrix(F.X, D, beta)).upper
            if not r < 1.0:
                raise ValueError("finite-type realization needs r(Z(beta)) < 1 (certified bound %.6g)" % r)
        self.tau0 = tau0
        self.F = F
        self.beta = beta
        self.density = gamma_density(D, beta, F)

    def __call__(self, x):
        total = 0j
        t = self.tau0.t
        for n in range(self.F.N + 1):
            if (n, n) not in x.blocks:
                continue
            for u, (a, g) in enumerate(zip(x.blocks[(n, n)], self.density.blocks[(n, n)])):
                if t[u]:
                    total += t[u] * np.sum(a * g.T)  # tr(a g) without the product
        return complex(total)


def fock_state(tau0, F, D, beta):
    return FockState(tau0, F, D, beta)


def level_masses(tau0, D, beta, N):
    """<(Z^T)^n t0, d> for n = 0..N: the trace of Gamma_n against tau0."""
    z = transfer_matrix(D.module, D, beta).Z
    d = D.module.algebra.dims
    out, cur = [], np.array(tau0.t, dtype=float)
    for _ in range(N + 1):
        out.append(float(cur @ d))
        cur = z.T @ cur
    return np.array(out)


@dataclass(frozen=True)
class TailBound:
    bound: float
    r_upper: float


def certified_radius(Z):
    """(x, r_bar) with x > 0 and Z^T x <= r_bar x componentwise."""
    z = np.asarray(Z, dtype=float)
    n = z.shape[0]
    sd = spectral_radius(z)
    x = sd.vector if sd.vector is not None and np.all(sd.vector > 0) else None
    if x is None:
        # perturb to a positive matrix; its Perron vector certifies a bound for z
        eps = 1e-9 * max(1.0, float(z.max()))
        zp = z + eps * np.ones((n, n))
        x = spectral_radius(zp).vector
    _, hi = collatz_wielandt(z, x)
    return x, hi


def tail_bound(tau0, D, beta, N):
    """Upper bound for sum_{n > N} <(Z^T)^n t0, d>, with the certified radius used.

    With x > 0 and Z^T x <= r x, t0 <= c x gives (Z^T)^n t0 <= c r^n x, so
    the tail is at most c <x, d> r^{N+1} / (1 - r).
    """
    z = transfer_matrix(D.module, D, beta).Z
    x, r = certified_radius(z)
    if not r < 1.0:
        raise ValueError("tail bound needs r(Z(beta)) < 1 (certified bound %.6g)" % r)
    c = float(np.max(tau0.t / x))
    d = D.module.algebra.dims
    bound = c * float(x @ d) * r ** (N + 1) / (1.0 - r)
    return TailBound(bound * (1.0 + 1e-12), r)


def true_tail(tau0, D, beta, N, terms=100000, tol=1e-18):
    """sum_{n > N} <(Z^T)^n t0, d> by direct summation."""
    z = transfer_matrix(D.module, D, beta).Z
    d = D.module.algebra.dims
    cur = np.array(tau0.t, dtype=float)
    for _ in range(N + 1):
        cur = z.T @ cur
    total = 0.0
    for _ in range(terms):
        m = float(cur @ d)
        total += m
        if m <= tol:
            break
        cur = z.T @ cur
    return total


def partial_trace(tau0, D, beta, K):
    """sum_{j<=K} F^j tau0 as a trace vector (no normalization)."""
    from .algebra import TraceVector
    z = transfer_matrix(D.module, D, beta).Z
    acc = np.zeros_like(tau0.t)
    cur = np.array(tau0.t, dtype=float)
    for _ in range(K + 1):
        acc = acc + cur
        cur = z.T @ cur
    return TraceVector(tau0.algebra, acc)


def defect(a, F):
    """pi(a) P_0: the image of a - j_X(a) on the Fock module."""
    return FockOperator(F, {(0, 0): list(a.blocks)})


__all__ = [
    "FockTruncation", "FockOperator", "build_fock", "creation_matrix", "annihilation_matrix",
    "pi_matrix", "gamma_density", "gamma_unitary", "element_matrix", "letters_matrix",
    "FockState", "fock_state", "level_masses", "TailBound", "certified_radius", "tail_bound",
    "true_tail", "partial_trace", "defect", "DEFAULT_CAP",
]
