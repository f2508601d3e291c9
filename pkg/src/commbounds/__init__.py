"""Numerical verification of commutator norm bounds.

Evaluators for ``||[X, Y]||^2`` bounds, the operator ``Y -> [X^T, [X, Y]]``
with its closed-form block spectrum, extremal search, and a seeded Monte
Carlo harness. Hot loops run under numba when available; set
``COMMBOUNDS_DISABLE_NUMBA=1`` to force the pure numpy path.
"""

from ._accel import USE_NUMBA
from .bounds import (
    BoundReport,
    NotApplicableError,
    bw_bound,
    cdck_bound,
    cdck_vs_kyfan_gap,
    evaluate_all,
    infnorm_bound,
    kyfan_bound,
    pythagorean_split_check,
    scalar_inequality_check,
)
from .campaign import CampaignSummary, compare_bounds, replay, run_campaign
from .ensembles import EnsembleSpec, draw, sample
from .extremal import (
    ExtremalResult,
    certify_equality_pair,
    change_of_variables,
    companion_check,
    find_extremal,
    orthogonalize_z,
)
from .linalg import (
    BlockPair,
    DimensionError,
    commutator,
    elementary,
    frobenius_norm_sq,
    offdiag_max_abs,
    parse_matrix,
    read_matrix,
    trace_inner_product,
    triangular_split,
    write_matrix,
)
from .operators import (
    GenericityReport,
    GenericSpectrumPrediction,
    NonGenericError,
    block_commutator_norm_sq,
    check_genericity,
    lemma2_spectrum,
    perturb_to_generic,
    spectrum_report,
    t_apply,
    t_materialize,
    tilde_apply,
    tilde_materialize,
)
from .spectral import ConvergenceError, power_iteration, svd, symmetric_eigen

__version__ = "0.1.0"
