"""
Equilibrium temperatures of the Cuntz algebras
==============================================

C^n over A = C with energy 1 on every basis vector.  Below log n there is
no KMS state, at log n exactly one (which also lives on the quotient), and
above it every state is of finite type.
"""

import numpy as np

from kmslab import catalog
from kmslab.algebra import TraceVector
from kmslab.states import KmsState, classify_type, check_ox_descends
from kmslab.toeplitz import MonomialWord
from kmslab.transfer import critical_beta, subinvariant_solver, transfer_matrix

for n in (2, 3, 4):
    X, D = catalog.cuntz(n)
    bc = critical_beta(X, D)
    print("n = %d: critical beta %.12f (log n = %.12f)" % (n, bc, np.log(n)))

# sweep beta for O_2 and ask the LP for a subinvariant trace
X, D = catalog.cuntz(2)
for beta in np.sort(np.append(np.linspace(0.3, 1.5, 7), np.log(2))):
    tau = subinvariant_solver(transfer_matrix(X, D, beta), X.algebra)
    if tau is None:
        print("beta = %.2f: no KMS state" % beta)
        continue
    phi = KmsState(X, D, beta, tau)
    print("beta = %.2f: %s type, descends to O_2: %s" % (beta, classify_type(phi), check_ox_descends(phi)))

# two-point functions at the critical temperature: phi(T_e T*_e) = e^{-beta}
e1, e2 = X.basis()
phi = KmsState(X, D, np.log(2), TraceVector(X.algebra, [1.0]))
for word, label in ((MonomialWord((e1,), (e1,)), "T_e1 T*_e1"),
                    (MonomialWord((e1, e2), (e1, e2)), "T_e1 T_e2 T*_e2 T*_e1"),
                    (MonomialWord((e1,), (e2,)), "T_e1 T*_e2")):
    print("phi(%s) = %.6f" % (label, phi(word).real))
