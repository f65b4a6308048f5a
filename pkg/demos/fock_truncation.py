"""
Finite-type states on a truncated Fock module
=============================================

Below the critical temperature a KMS state is Tr(Gamma(e^{-beta D}) .)
on the Fock module.  Truncating at level N leaves a tail we can bound.
"""

import numpy as np

from kmslab import catalog
from kmslab.algebra import TraceVector
from kmslab.fock import FockState, build_fock, element_matrix, tail_bound, true_tail
from kmslab.states import KmsState
from kmslab.toeplitz import MonomialWord, ToeplitzElement

X, D = catalog.cuntz(2)
beta = np.log(3)
tau = TraceVector(X.algebra, [1.0])
tau0 = TraceVector(X.algebra, [1.0 / 3.0])  # tau - F tau
phi = KmsState(X, D, beta, tau)
e1 = X.basis()[0]
p = ToeplitzElement.from_word(X, MonomialWord((e1,), (e1,)))

for N in (2, 4, 6, 8, 10):
    F = build_fock(X, N)
    Phi = FockState(tau0, F, D, beta)
    one = Phi(F.identity()).real
    print("N = %2d  dim %5d  Phi(1) = %.6f  Phi(T T*) = %.6f  (exact %.6f)  tail <= %.2e (true %.2e)"
          % (N, F.dimension, one, Phi(element_matrix(p, F)).real, phi(p).real,
             tail_bound(tau0, D, beta, N).bound, true_tail(tau0, D, beta, N)))
