"""Comparison methods: pseudo-inverse reductions and matched filtering.

``rpca_pinv`` / ``op_pinv`` left-multiply the data by the dictionary
pseudo-inverse and run the shared solver with an identity dictionary, so
they reduce the demixing task to plain robust PCA / outlier pursuit on
the transformed data.  ``matched_filter`` scores the raw data against the
dictionary; ``matched_filter_pinv`` scores the transformed data.
"""

import numpy as np

from . import matrices, solver
from .errors import DegenerateInputError, PreconditionError
from .matrices import Mat
from .solver import DemixConfig, DemixSolution, Sparsity


def transform_pinv(m: Mat, d: Mat) -> Mat:
    """Transformed data ``pinv(d) @ m``."""
    return matrices.frozen(matrices.pseudo_inverse(d) @ m)


def rpca_pinv(m: Mat, d: Mat, cfg: DemixConfig) -> DemixSolution:
    """Robust PCA on the pseudo-inversed data (entry-wise sparsity)."""
    if cfg.mode is not Sparsity.ENTRY:
        raise PreconditionError("rpca_pinv expects the entry-wise mode")
    mt = transform_pinv(m, d)
    eye = matrices.matrix(np.eye(d.shape[1]))
    return solver.apg_demix(mt, eye, cfg)


def op_pinv(m: Mat, d: Mat, cfg: DemixConfig) -> DemixSolution:
    """Outlier pursuit on the pseudo-inversed data (column-wise sparsity)."""
    if cfg.mode is not Sparsity.COLUMN:
        raise PreconditionError("op_pinv expects the column-wise mode")
    mt = transform_pinv(m, d)
    eye = matrices.matrix(np.eye(d.shape[1]))
    return solver.apg_demix(mt, eye, cfg)


def _unit_columns(d: Mat) -> np.ndarray:
    norms = np.linalg.norm(d, axis=0)
    zero = np.flatnonzero(norms == 0.0)
    if zero.size:
        raise DegenerateInputError(f"dictionary column {int(zero[0])} is zero")
    return d / norms


def _normalized_or_zero(m: Mat) -> np.ndarray:
    # zero data columns stay zero and therefore score 0
    norms = np.linalg.norm(m, axis=0)
    out = np.array(m)
    nz = norms > 0.0
    out[:, nz] /= norms[nz]
    return out


def matched_filter(m: Mat, d: Mat) -> np.ndarray:
    """Max absolute inner product of each normalized data column with the atoms."""
    dn = _unit_columns(d)
    mn = _normalized_or_zero(m)
    return np.max(np.abs(dn.T @ mn), axis=0)


def matched_filter_pinv(m: Mat, d: Mat) -> np.ndarray:
    """Max absolute entry of each column of the normalized pseudo-inversed data."""
    mt = transform_pinv(m, d)
    mn = _normalized_or_zero(mt)
    return np.max(np.abs(mn), axis=0)
