"""hsdemix: demix a data matrix into a low-rank part plus a dictionary-sparse part.

The core model is ``M = L + D S`` where ``M`` holds one voxel spectrum
per column, ``L`` is low-rank background, ``D`` is a dictionary of target
signatures and ``S`` is sparse either entry-wise or column-wise.  The
package provides the accelerated proximal gradient solver, incoherence
diagnostics with recovery certificates, dictionary learning, pseudo-inverse
and matched-filter baselines, ROC evaluation, and binary file formats for
cubes, label maps and dictionaries.
"""

from .dictlearn import Dictionary, DictLearnConfig, fista_lasso, dict_update, learn_dictionary
from .diagnostics import (
    DiagnosticsReport,
    GroundTruth,
    beta_u,
    columnwise_certificate,
    entrywise_certificate,
    frame_bounds,
    gamma_u,
    gamma_v,
    mu,
    mu_upper_bound,
    xi,
)
from .dataio import (
    HsCube,
    LabelMap,
    SynthSpec,
    fold,
    normalize_data,
    normalize_dictionary,
    read_cube,
    read_dict,
    read_labels,
    support_labels,
    synthesize,
    synthesize_separated,
    unfold,
    write_cube,
    write_dict,
    write_labels,
)
from .baselines import matched_filter, matched_filter_pinv, op_pinv, rpca_pinv, transform_pinv
from .evaluation import (
    LabeledScores,
    RocCurve,
    lambda_grid,
    lambda_sweep,
    lambda_upper,
    roc,
    solution_scores,
)
from .matrices import Mat, SvdFactors, matrix, norm, project_colspace, project_complement, pseudo_inverse, svd
from .prox import column_soft_threshold, soft_threshold, svt
from .solver import DemixConfig, DemixSolution, Sparsity, apg_demix, lipschitz_constant, objective

__version__ = "0.1.0"

__all__ = [
    "DemixConfig",
    "DemixSolution",
    "DiagnosticsReport",
    "Dictionary",
    "DictLearnConfig",
    "GroundTruth",
    "HsCube",
    "LabelMap",
    "LabeledScores",
    "Mat",
    "RocCurve",
    "Sparsity",
    "SvdFactors",
    "SynthSpec",
    "apg_demix",
    "beta_u",
    "column_soft_threshold",
    "columnwise_certificate",
    "dict_update",
    "entrywise_certificate",
    "fista_lasso",
    "fold",
    "frame_bounds",
    "gamma_u",
    "gamma_v",
    "lambda_grid",
    "lambda_sweep",
    "lambda_upper",
    "learn_dictionary",
    "lipschitz_constant",
    "matched_filter",
    "matched_filter_pinv",
    "matrix",
    "mu",
    "mu_upper_bound",
    "norm",
    "normalize_data",
    "normalize_dictionary",
    "objective",
    "op_pinv",
    "project_colspace",
    "project_complement",
    "pseudo_inverse",
    "read_cube",
    "read_dict",
    "read_labels",
    "roc",
    "rpca_pinv",
    "soft_threshold",
    "solution_scores",
    "support_labels",
    "svd",
    "svt",
    "synthesize",
    "synthesize_separated",
    "transform_pinv",
    "unfold",
    "write_cube",
    "write_dict",
    "write_labels",
    "xi",
]
