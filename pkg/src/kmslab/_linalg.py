"""Small dense linear-algebra helpers shared by the modules.

Everything here works on Hermitian (or Hermitian-up-to-rounding) matrices
of modest size, where a full eigendecomposition is cheap.
"""

import numpy as np

HERMITIAN_TOL = 1e-10


def as_matrix(a, n=None):
    """Return `a` as a complex 2-d array, optionally checking it is n x n."""
    m = np.atleast_2d(np.asarray(a, dtype=complex))
    if m.ndim != 2:
        raise ValueError("expected a matrix, got array of shape %s" % (m.shape,))
    if n is not None and m.shape != (n, n):
        raise ValueError("expected a %dx%d matrix, got shape %s" % (n, n, m.shape))
    return m


def is_hermitian(a, tol=HERMITIAN_TOL):
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        return False
    if a.size == 0:
        return True
    scale = max(1.0, float(np.max(np.abs(a))))
    return bool(np.max(np.abs(a - a.conj().T)) <= tol * scale)


def eigh(a):
    """Eigendecomposition of a Hermitian matrix (symmetrized first)."""
    a = np.asarray(a, dtype=complex)
    if a.size == 0:
        return np.zeros(0), np.zeros((0, 0), dtype=complex)
    h = 0.5 * (a + a.conj().T)
    return np.linalg.eigh(h)


def funcm(a, f):
    """Apply the scalar function `f` to a Hermitian matrix via its spectrum.

    `f` receives the real eigenvalues and may return complex values, which
    is what the analytic continuation of the dynamics needs.
    """
    w, v = eigh(a)
    if w.size == 0:
        return np.zeros((0, 0), dtype=complex)
    return (v * f(w)) @ v.conj().T


def expmh(a, z=1.0):
    """exp(z * a) for Hermitian `a` and any complex `z`."""
    return funcm(a, lambda w: np.exp(z * w))


def sqrtm_psd(a):
    return funcm(a, lambda w: np.sqrt(np.clip(w, 0.0, None)))


def min_eigenvalue(a):
    w, _ = eigh(a)
    return float(w[0]) if w.size else np.inf


def is_psd(a, tol=1e-12):
    a = np.asarray(a)
    if a.size == 0:
        return True
    if not is_hermitian(a, max(tol, HERMITIAN_TOL)):
        return False
    scale = max(1.0, float(np.max(np.abs(a))))
    return min_eigenvalue(a) >= -tol * scale


def random_unitary(rng, n):
    z = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def random_hermitian(rng, n, scale=1.0):
    z = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return scale * 0.5 * (z + z.conj().T)


def random_psd(rng, n, rank=None):
    rank = n if rank is None else rank
    z = rng.normal(size=(n, rank)) + 1j * rng.normal(size=(n, rank))
    return z @ z.conj().T
