"""KMS states of quasi-free dynamics on Toeplitz and Cuntz-Pimsner algebras over finite block algebras."""

from .algebra import (AlgebraElement, BlockAlgebra, CoeffDynamics, KmsFunctional, ShapeError,
                      TraceVector, evaluate_trace, kms_functional_eval, kms_pairing, sigma_apply,
                      verify_kms_functional)
from .correspondence import (BimoduleOperator, Correspondence, ModuleOperator, ModuleVector,
                             identity_correspondence, induced_trace, induced_trace_functional,
                             inner_product, tensor, tensor_inner_product, tensor_power, theta)
from .transfer import (Generator, PositiveEnergyError, TransferMatrix, apply_F, critical_beta,
                       invariant_solver, spectral_radius, subinvariant_solver, transfer_matrix)
from .toeplitz import MonomialWord, ToeplitzElement, gamma_apply, normal_order
from .states import (GroundState, KmsState, QuasiFreeSpec, WoldDecomposition, check_ox_descends,
                     classify_type, evaluate_kms_state, ground_state, moment_matrix_psd,
                     quasi_free_state, verify_kms, wold_decompose)
from .weights import (InducedWeight, TwistedIsometryGroup, apply_F_general, induce_weight,
                      restrict_weight, solve_kms_states_general, weight_stages_check)
from .fock import (FockTruncation, build_fock, creation_matrix, defect, fock_state, gamma_density,
                   tail_bound)
from .catalog import (ExelLacaInstance, cuntz, cuntz_krieger, el_inequalities, fibonacci,
                      identity_bimodule, random_instance)

__version__ = "0.1.0"
