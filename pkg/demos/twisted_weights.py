"""
KMS weights with coefficient dynamics
=====================================

A = M_2 acting on X = M_2 with H = diag(0, 1) on the coefficients and
energy 1 on the edge.  The induced weight on B(X) is computed in closed
form and by a frame sum, and restricting it gives back the functional.
"""

import numpy as np

from kmslab.algebra import BlockAlgebra, CoeffDynamics, KmsFunctional
from kmslab.correspondence import Correspondence, theta
from kmslab.transfer import Generator
from kmslab.weights import (TwistedIsometryGroup, apply_F_general, induce_weight, restrict_weight,
                            solve_kms_states_general, weight_by_frame)

A = BlockAlgebra((2,))
X = Correspondence(A, [[1]])
H = CoeffDynamics(A, (np.diag([0.0, 1.0]),))
U = TwistedIsometryGroup(Generator.scalar(X, 1.0), H)

phi = KmsFunctional.gibbs_state(H, 1.0)
kappa = induce_weight(phi, X, U)
for r in range(2):
    xi = X.basis_vector(0, 0, 0, r)
    print("kappa(theta_xi%d) = %.6f  (c e^{-%d} = %.6f)" % (r, kappa(theta(xi, xi)).real, r + 1,
                                                             phi.c[0] * np.exp(-(r + 1))))

T = X.random_operator(np.random.default_rng(0))
print("closed form %.12f, frame sum %.12f" % (kappa(T).real, weight_by_frame(phi, U, T).real))
print("restricted coefficient %.12f (original %.12f)" % (restrict_weight(kappa).c[0], phi.c[0]))
print("F phi coefficient %.6f = e^{-1} c" % apply_F_general(phi, X, U).c[0])

sol = solve_kms_states_general(X, U, 1.0)
print("Toeplitz KMS state:", sol.toeplitz.c, " quotient state:", sol.pimsner)
