"""Shared oracles and fixtures for the test suite."""

import numpy as np

from kmslab import catalog
from kmslab.algebra import TraceVector
from kmslab.transfer import critical_beta, spectral_radius, subinvariant_solver, transfer_matrix


def catalog_states(offsets=(0.0, 0.5)):
    """(name, X, D, beta, tau) for every standard instance at beta_c + offset."""
    out = []
    for name, (X, D) in catalog.standard_instances().items():
        bc = critical_beta(X, D)
        for off in offsets:
            beta = bc + off
            tau = subinvariant_solver(transfer_matrix(X, D, beta), X.algebra)
            out.append((name, X, D, beta, tau))
    return out


def finite_type_trace(X, D, beta, rng):
    """A random normalized trace sum_n F^n tau0 (requires r(Z(beta)) < 1)."""
    z = transfer_matrix(X, D, beta).Z
    t0 = rng.uniform(0.0, 1.0, size=X.num_blocks)
    acc, cur = t0.copy(), t0.copy()
    for _ in range(5000):
        cur = z.T @ cur
        acc += cur
        if cur.sum() < 1e-18:
            break
    tau = TraceVector(X.algebra, acc)
    scale = tau.mass
    return TraceVector(X.algebra, acc / scale), TraceVector(X.algebra, t0 / scale)


def perron_beta(Z_of_beta):
    """Numerical oracle: spectral radius via numpy eigenvalues."""
    return float(np.max(np.abs(np.linalg.eigvals(Z_of_beta))))


def radius(X, D, beta):
    return spectral_radius(transfer_matrix(X, D, beta)).r
