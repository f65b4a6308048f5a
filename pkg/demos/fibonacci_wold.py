"""
Cuntz-Krieger algebra of the golden-mean shift
==============================================

T = [[1, 1], [1, 0]] with weights N = (e, e).  The critical inverse
temperature is the log of the golden ratio and the invariant trace is the
Perron vector.  Above it, KMS states split into a finite and an infinite
part; we build a mixed example by hand and recover the parts.
"""

import numpy as np

from kmslab import catalog
from kmslab.algebra import TraceVector
from kmslab.states import wold_decompose
from kmslab.transfer import critical_beta, invariant_solver, transfer_matrix

inst = catalog.fibonacci()
X, D = catalog.cuntz_krieger(inst)
bc = critical_beta(X, D)
golden = (1 + np.sqrt(5)) / 2
print("critical beta %.12f, log(golden) %.12f" % (bc, np.log(golden)))

Z = transfer_matrix(X, D, bc)
inv = invariant_solver(Z, X.algebra)
print("invariant trace", inv.t, "expected", np.array([golden, 1.0]) / (golden + 1))

# the (Y, Z) inequalities agree with blockwise subinvariance
for beta, t in ((bc, inv.t), (bc, np.array([0.5, 0.5])), (bc + 1.0, np.array([0.5, 0.5]))):
    rep = catalog.el_inequalities(inst, beta, t)
    print("beta %.3f, t %s: %d pairs checked, holds = %s" % (beta, t, rep.checked, rep.holds))

# Wold decomposition of a trace above the critical point
beta = bc + 0.7
Z = transfer_matrix(X, D, beta).Z
t0 = np.array([0.2, 0.1])
t_fin = np.linalg.solve(np.eye(2) - Z.T, t0)  # sum_n (Z^T)^n t0
wd = wold_decompose(TraceVector(X.algebra, t_fin), Z)
print("tau0 recovered:", wd.tau0.t, "infinite part:", wd.tau_infinite.t)
