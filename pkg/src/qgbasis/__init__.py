"""Quasi-greedy bases: greedy approximation, conditionality constants k_N,
the Olevskii block construction and the closed-form exponent bounds."""
from .errors import BudgetExceeded, NumericalError, ValidationError
from .core import as_coeffs, dominates, indicator, restrict, support, support_set
from .spaces import (BasisInstance, DirectSum, GramSpace, SequenceSpace, canonical_basis,
                     dirichlet_weighted_norm, direct_sum, gram_basis, gram_from_weighted_trig,
                     rotated_pair_basis, weighted_trig_basis)
from .weights import fourier_coeff_weight, fourier_coeffs_weight
from .greedy import (TiePolicy, best_nterm_error, estimate_qg_constant, greedy_projection,
                     greedy_set, greedy_sets, lebesgue_ratio)
from .conditionality import (democracy_profile, k_n_exact, k_n_lower, knH_witness,
                             odd_block_witness, projection_norm, sign_partition_witness,
                             witness_ratio)
from .olevskii import (block_layout, haar_matrix, olevskii_basis, project_components,
                       reconstruct, verify_bonek)
from .bounds import (alpha_branches, alpha_of_K, alpha_p, c_p_const, chain_envelope_check,
                     delta_of_K, infer_K_lower_from_pairs, pair_inequality_check,
                     weak_parallelogram_check)

__version__ = "0.1.0"
