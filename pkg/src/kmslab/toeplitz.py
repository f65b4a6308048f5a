"""Normal-ordered calculus in the Toeplitz algebra of a correspondence.

An element is an algebra summand ``a`` plus a finite linear combination of
words ``T_{xi_1} ... T_{xi_m} T*_{eta_n} ... T*_{eta_1}``.  A word stores
its creation factors ``left = (xi_1, ..., xi_m)`` and its annihilation
factors ``right = (eta_1, ..., eta_n)``, so that the word equals
``T_xi T*_eta`` for the elementary tensors ``xi = xi_1 (x) ... (x) xi_m`` and
``eta = eta_1 (x) ... (x) eta_n``.

Products are normal-ordered with the single rewrite rule
``T*_x T_y = pi(<x, y>)`` and absorbed into neighbouring factors with

    a T_x = T_{a x},   T_x a = T_{x a},   a T*_x = T*_{x a*},   T*_x a = T*_{a* x}.

Every word has at least one factor; words without factors live in the
algebra summand.  Two elements are compared through their kernels: the
word ``T_xi T*_eta`` of bidegree (m, n) corresponds to the compact operator
``theta_{xi, eta}`` from X^{(x)n} to X^{(x)m}, and elements are equal in
the Toeplitz algebra iff all kernels agree.
"""

from dataclasses import dataclass

import numpy as np

from .algebra import AlgebraElement, ShapeError
from .correspondence import (ModuleVector, elementary_tensor_chain, identity_correspondence,
                             inner_product, left_act, right_act)


@dataclass(frozen=True, eq=False)
class MonomialWord:
    """T_{xi_1}...T_{xi_m} T*_{eta_n}...T*_{eta_1}; the empty word is the unit."""

    left: tuple = ()
    right: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "left", tuple(self.left))
        object.__setattr__(self, "right", tuple(self.right))
        mods = {id(x.module): x.module for x in self.left + self.right}
        if len({m for m in mods.values()}) > 1:
            raise ShapeError("word mixes vectors of different modules")

    @property
    def m(self):
        return len(self.left)

    @property
    def n(self):
        return len(self.right)

    @property
    def degree(self):
        """Gauge degree m - n."""
        return self.m - self.n

    @property
    def length(self):
        return self.m + self.n

    def adjoint(self):
        return MonomialWord(self.right, self.left)


class ToeplitzElement:
    """a + sum_k c_k w_k with words in normal order (annihilators to the right)."""

    def __init__(self, X, a=None, terms=()):
        self.module = X
        self.a = X.algebra.zeros() if a is None else a
        if self.a.algebra != X.algebra:
            raise ShapeError("algebra summand over a different algebra")
        clean = []
        for c, w in terms:
            if c == 0:
                continue
            for x in w.left + w.right:
                if x.module != X:
                    raise ShapeError("word factor lives on a different module")
            if w.length == 0:
                self.a = self.a + c * X.algebra.identity()
            else:
                clean.append((complex(c), w))
        self.terms = tuple(clean)

    # constructors
    @classmethod
    def unit(cls, X):
        return cls(X, X.algebra.identity())

    @classmethod
    def zero(cls, X):
        return cls(X)

    @classmethod
    def from_algebra(cls, X, a):
        return cls(X, a)

    @classmethod
    def creation(cls, xi):
        return cls(xi.module, None, [(1.0, MonomialWord((xi,), ()))])

    @classmethod
    def annihilation(cls, xi):
        return cls(xi.module, None, [(1.0, MonomialWord((), (xi,)))])

    @classmethod
    def from_word(cls, X, word, coef=1.0):
        return cls(X, None, [(coef, word)])

    def __repr__(self):
        degs = sorted({(w.m, w.n) for _, w in self.terms})
        return "ToeplitzElement(%d words, bidegrees %s)" % (len(self.terms), degs)

    # linear structure
    def _check(self, other):
        if not isinstance(other, ToeplitzElement):
            return False
        if other.module != self.module:
            raise ShapeError("elements of Toeplitz algebras of different modules")
        return True

    def __add__(self, other):
        if isinstance(other, AlgebraElement):
            other = ToeplitzElement(self.module, other)
        if not self._check(other):
            return NotImplemented
        return ToeplitzElement(self.module, self.a + other.a, self.terms + other.terms)

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-1.0) * other

    def __neg__(self):
        return (-1.0) * self

    def __mul__(self, c):
        if isinstance(c, (ToeplitzElement, AlgebraElement)):
            return NotImplemented
        return ToeplitzElement(self.module, c * self.a, [(c * k, w) for k, w in self.terms])

    __rmul__ = __mul__

    def __matmul__(self, other):
        if isinstance(other, AlgebraElement):
            other = ToeplitzElement(self.module, other)
        if not self._check(other):
            return NotImplemented
        return product(self, other)

    def __rmatmul__(self, other):
        if isinstance(other, AlgebraElement):
            return product(ToeplitzElement(self.module, other), self)
        return NotImplemented

    def adjoint(self):
        return ToeplitzElement(self.module, self.a.adjoint(),
                               [(np.conj(c), w.adjoint()) for c, w in self.terms])

    def max_length(self):
        return max([w.length for _, w in self.terms] or [0])

    def bidegrees(self):
        return sorted({(w.m, w.n) for _, w in self.terms})


# --- products --------------------------------------------------------------

def _lmul_word(a, word):
    """a * word, absorbed into the leftmost factor."""
    if word.left:
        return MonomialWord((left_act(a, word.left[0]),) + word.left[1:], word.right)
    # a T*_{eta_n} = T*_{eta_n a*}
    r = word.right
    return MonomialWord((), r[:-1] + (right_act(r[-1], a.adjoint()),))


def _rmul_word(word, a):
    """word * a, absorbed into the rightmost factor."""
    if word.right:
        # T*_{eta_1} a = T*_{a* eta_1}
        return MonomialWord(word.left, (left_act(a.adjoint(), word.right[0]),) + word.right[1:])
    l = word.left
    return MonomialWord(l[:-1] + (right_act(l[-1], a),), ())


def _word_product(w1, w2):
    """Normal-ordered form of w1 * w2: either (None, word) or (a, None) for a pure algebra element."""
    R1, L2 = w1.right, w2.left
    k = min(len(R1), len(L2))
    if k == 0:
        if not R1:
            return None, MonomialWord(w1.left + w2.left, w2.right)
        return None, MonomialWord(w1.left, w2.right + w1.right)
    # T*_{eta_k}...T*_{eta_1} T_{zeta_1}...T_{zeta_k} contracts to a
    a = inner_product(R1[0], L2[0])
    for i in range(1, k):
        a = inner_product(R1[i], left_act(a, L2[i]))
    if len(R1) > k:
        rest = (left_act(a.adjoint(), R1[k]),) + R1[k + 1:]
        return None, MonomialWord(w1.left, w2.right + rest)
    if len(L2) > k:
        rest = (left_act(a, L2[k]),) + L2[k + 1:]
        return None, MonomialWord(w1.left + rest, w2.right)
    # fully contracted: T_{L1} a T*_{R2}
    if w1.left:
        return None, MonomialWord(w1.left[:-1] + (right_act(w1.left[-1], a),), w2.right)
    if w2.right:
        r = w2.right
        return None, MonomialWord((), r[:-1] + (right_act(r[-1], a.adjoint()),))
    return a, None


def product(x, y):
    """Normal-ordered product of two Toeplitz elements."""
    X = x.module
    a = x.a @ y.a
    terms = []
    for c, w in y.terms:
        if np.any([np.any(b) for b in x.a.blocks]):
            terms.append((c, _lmul_word(x.a, w)))
    for c, w in x.terms:
        if np.any([np.any(b) for b in y.a.blocks]):
            terms.append((c, _rmul_word(w, y.a)))
    for c1, w1 in x.terms:
        for c2, w2 in y.terms:
            b, w = _word_product(w1, w2)
            if w is None:
                a = a + (c1 * c2) * b
            else:
                terms.append((c1 * c2, w))
    return ToeplitzElement(X, a, terms)


def normal_order(letters, X=None):
    """Normal-ordered form of a product of letters.

    Letters are ToeplitzElements, AlgebraElements, or pairs ``("T", xi)`` /
    ``("T*", xi)``.  An empty product is the unit (X must then be given).
    """
    letters = list(letters)
    if X is None:
        for l in letters:
            if isinstance(l, ToeplitzElement):
                X = l.module
                break
            if isinstance(l, tuple):
                X = l[1].module
                break
    if X is None:
        raise ValueError("cannot infer the module from an empty or algebra-only product")
    acc = ToeplitzElement.unit(X)
    for l in letters:
        acc = acc @ as_element(l, X)
    return acc


def as_element(letter, X):
    if isinstance(letter, ToeplitzElement):
        return letter
    if isinstance(letter, AlgebraElement):
        return ToeplitzElement(X, letter)
    if isinstance(letter, MonomialWord):
        return ToeplitzElement.from_word(X, letter)
    kind, xi = letter
    if kind == "T":
        return ToeplitzElement.creation(xi)
    if kind in ("T*", "Tstar"):
        return ToeplitzElement.annihilation(xi)
    raise ValueError("unknown letter %r" % (kind,))


def word_letters(word):
    """The word as its sequence of letters, left to right."""
    return ([("T", x) for x in word.left] + [("T*", e) for e in reversed(word.right)])


# --- gauge action and dynamics ---------------------------------------------

def gamma_apply(x, z, U):
    """gamma_z(x) for the quasi-free dynamics of U (a Generator or a TwistedIsometryGroup).

    Creation factors become U_z xi, annihilation factors U_{conj z} eta, and
    the algebra summand follows the coefficient dynamics.
    """
    from .weights import _as_group
    U = _as_group(U)
    if U.module != x.module:
        raise ShapeError("dynamics belong to a different correspondence")
    zc = np.conj(z)
    terms = [(c, MonomialWord(tuple(U.apply(xi, z) for xi in w.left),
                              tuple(U.apply(eta, zc) for eta in w.right)))
             for c, w in x.terms]
    a = x.a if U.H.is_trivial else U.sigma(x.a, z)
    return ToeplitzElement(x.module, a, terms)


def gauge_apply(x, angle):
    """The gauge action: multiplies words of degree k by exp(i k angle)."""
    return ToeplitzElement(x.module, x.a, [(c * np.exp(1j * angle * w.degree), w) for c, w in x.terms])


# --- kernels ---------------------------------------------------------------

def _unit_vector(X):
    """1_A as a vector of the identity bimodule (level 0 of the Fock module)."""
    E = identity_correspondence(X.algebra)
    return ModuleVector(E, tuple(np.eye(d, dtype=complex) for d in X.algebra.block_dims))


def word_kernel(word, X):
    """Blocks of theta_{xi, eta} : X^{(x)n} -> X^{(x)m} for the word T_xi T*_eta."""
    xi = elementary_tensor_chain(word.left) if word.left else _unit_vector(X)
    eta = elementary_tensor_chain(word.right) if word.right else _unit_vector(X)
    return [a @ b.conj().T for a, b in zip(xi.blocks, eta.blocks)]


def kernels(x):
    """Map (m, n) -> per-block kernel matrices; determines x uniquely."""
    out = {(0, 0): [b.copy() for b in x.a.blocks]}
    for c, w in x.terms:
        key = (w.m, w.n)
        k = word_kernel(w, x.module)
        if key in out:
            out[key] = [p + c * q for p, q in zip(out[key], k)]
        else:
            out[key] = [c * q for q in k]
    return out


def distance(x, y):
    """Largest entrywise difference between the kernels of x and y."""
    kx, ky = kernels(x), kernels(y)
    worst = 0.0
    for key in set(kx) | set(ky):
        a = kx.get(key)
        b = ky.get(key)
        if a is None:
            a = [np.zeros_like(q) for q in b]
        if b is None:
            b = [np.zeros_like(q) for q in a]
        for p, q in zip(a, b):
            if p.size:
                worst = max(worst, float(np.max(np.abs(p - q))))
    return worst


def random_word(X, rng, m, n, scale=1.0):
    return MonomialWord(tuple(scale * X.random_vector(rng) for _ in range(m)),
                        tuple(scale * X.random_vector(rng) for _ in range(n)))


def random_element(X, rng, max_length, num_terms=2, scale=1.0):
    """Random combination of words with m + n <= max_length plus an algebra summand."""
    terms = []
    for _ in range(num_terms):
        total = int(rng.integers(1, max_length + 1)) if max_length > 0 else 0
        if total == 0:
            continue
        m = int(rng.integers(0, total + 1))
        c = complex(rng.normal(), rng.normal())
        terms.append((c, random_word(X, rng, m, total - m, scale)))
    return ToeplitzElement(X, X.algebra.random_element(rng), terms)


def random_letters(X, rng, count):
    out = []
    for _ in range(count):
        r = rng.integers(0, 3)
        if r == 0:
            out.append(("T", X.random_vector(rng)))
        elif r == 1:
            out.append(("T*", X.random_vector(rng)))
        else:
            out.append(X.algebra.random_element(rng))
    return out
