"""Proximal operators: entry-wise, singular-value, and column-norm soft thresholding."""

import numpy as np

from . import matrices
from .errors import PreconditionError
from .matrices import Mat


def _check_tau(tau: float) -> float:
    tau = float(tau)
    if tau < 0.0 or not np.isfinite(tau):
        raise PreconditionError(f"threshold must be finite and >= 0, got {tau}")
    return tau


def soft_threshold(y: Mat, tau: float) -> Mat:
    """Entry-wise shrinkage ``sign(y) * max(|y| - tau, 0)``.

    Exact proximal operator of ``tau * ||.||_1``.
    """
    tau = _check_tau(tau)
    if tau == 0.0:
        return matrices.frozen(y)
    return matrices.frozen(np.sign(y) * np.maximum(np.abs(y) - tau, 0.0))


def svt(y: Mat, tau: float) -> Mat:
    """Singular value thresholding: soft-threshold the singular values of ``y``.

    Exact proximal operator of ``tau * ||.||_*``.
    """
    out, _ = svt_with_sigma(y, tau)
    return out


def svt_with_sigma(y: Mat, tau: float):
    """Like :func:`svt` but also returns the thresholded singular values.

    The returned sigma gives the nuclear norm of the output for free,
    which the solver uses to evaluate its objective without a second SVD.
    """
    tau = _check_tau(tau)
    f = matrices.svd(y)
    sig = np.maximum(f.sigma - tau, 0.0)
    out = matrices.frozen((f.u * sig) @ f.vt)
    return out, sig


def column_soft_threshold(y: Mat, tau: float) -> Mat:
    """Shrink each column toward zero by ``tau`` in l2 norm.

    Column j maps to ``max(||y_j|| - tau, 0) * y_j / ||y_j||``; zero
    columns stay zero.  Exact proximal operator of ``tau * ||.||_{1,2}``.
    """
    tau = _check_tau(tau)
    if tau == 0.0:
        return matrices.frozen(y)
    norms = np.linalg.norm(y, axis=0)
    scale = np.zeros_like(norms)
    nz = norms > 0.0
    scale[nz] = np.maximum(norms[nz] - tau, 0.0) / norms[nz]
    return matrices.frozen(y * scale[None, :])
