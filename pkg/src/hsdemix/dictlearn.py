"""Alternating sparse-coding / dictionary-update learning of spectral dictionaries.

Given target-class voxels Y (one column per voxel), alternates

    A-step:  min_A ||Y - D A||_F^2 + rho ||A||_1          (FISTA)
    D-step:  min_{D : unit columns} ||Y - D A||_F^2        (exact solve + renormalize)

until the relative fit ||Y - D A||_F / ||Y||_F drops below epsilon.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import matrices
from .errors import DegenerateInputError, DimensionError, PreconditionError
from .matrices import Mat

# Ridge damping for the dictionary-step normal equations.
_RIDGE = 1e-10


@dataclass(frozen=True)
class DictLearnConfig:
    """Learning inputs: atom count, sparsity weight, fit tolerance, iteration caps."""

    d: int
    rho: float
    epsilon: float = 1e-3
    max_alternations: int = 100
    fista_iters: int = 200
    seed: int = 0

    def __post_init__(self):
        if self.d < 1:
            raise PreconditionError("need at least one dictionary atom")
        if not self.rho > 0.0:
            raise PreconditionError(f"rho must be positive, got {self.rho}")
        if not self.epsilon > 0.0:
            raise PreconditionError(f"epsilon must be positive, got {self.epsilon}")
        if self.max_alternations < 0 or self.fista_iters < 1:
            raise PreconditionError("iteration counts out of range")


@dataclass(frozen=True)
class Dictionary:
    """An f x d dictionary with provenance: learned, sampled voxels, or external."""

    mat: Mat
    unit_columns: bool
    provenance: str
    rho: Optional[float] = None


def fista_lasso(y: Mat, d: Mat, rho: float, iters: int, init: Optional[Mat] = None) -> Mat:
    """Approximate minimizer of ``||y - d a||_F^2 + rho ||a||_1``.

    Runs FISTA with step size ``1 / sigma_max(d)^2`` and returns the
    best iterate seen, so the objective never exceeds the one at the
    starting point (zeros unless ``init`` is given).
    """
    if rho < 0.0:
        raise PreconditionError(f"rho must be >= 0, got {rho}")
    if y.shape[0] != d.shape[0]:
        raise DimensionError(f"y has {y.shape[0]} rows but d has {d.shape[0]}")
    smax = matrices.norm(d, "spectral")
    a = np.zeros((d.shape[1], y.shape[1])) if init is None else np.array(init)
    if smax == 0.0:
        return matrices.frozen(np.zeros_like(a))
    step = 1.0 / (smax * smax)
    thresh = 0.5 * rho * step

    def penalized(x):
        r = y - d @ x
        return float(np.sum(r * r)) + rho * float(np.sum(np.abs(x)))

    best = a.copy()
    best_obj = penalized(a)
    z = a.copy()
    t = 1.0
    dt = d.T
    for _ in range(iters):
        grad = dt @ (d @ z - y)
        g = z - step * grad
        a_next = np.sign(g) * np.maximum(np.abs(g) - thresh, 0.0)
        t_next = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t * t))
        z = a_next + ((t - 1.0) / t_next) * (a_next - a)
        a = a_next
        t = t_next
        obj = penalized(a)
        if obj < best_obj:
            best_obj = obj
            best = a.copy()
    return matrices.frozen(best)


def dict_update(y: Mat, a: Mat, rng: Optional[np.random.Generator] = None):
    """Exact dictionary step followed by column renormalization.

    Solves the ridge-damped normal equations ``D (A A^T + eps I) = Y A^T``,
    rescales the columns to unit norm, and absorbs the scaling into the
    returned coefficients so the product ``D A`` is unchanged.  Atoms with
    zero usage (all-zero rows of ``a``) are re-drawn from the unit sphere.

    Returns ``(d_hat, a_rescaled)``.
    """
    if rng is None:
        rng = np.random.default_rng(0)
    k = a.shape[0]
    gram = a @ a.T + _RIDGE * np.eye(k)
    dmat = np.linalg.solve(gram, (y @ a.T).T).T
    norms = np.linalg.norm(dmat, axis=0)

    dead = norms <= 0.0
    if np.any(dead):
        for i in np.flatnonzero(dead):
            col = rng.standard_normal(y.shape[0])
            dmat[:, i] = col / np.linalg.norm(col)
        norms = np.where(dead, 1.0, norms)

    d_hat = dmat / norms
    a_rescaled = a * norms[:, None]
    return matrices.frozen(d_hat), matrices.frozen(a_rescaled)


def learn_dictionary(y: Mat, cfg: DictLearnConfig):
    """Alternating minimization per the learning loop above.

    Returns ``(Dictionary, fit_trace)`` where ``fit_trace[k]`` is the
    relative fit after k alternations (entry 0 belongs to the zero
    coefficients of the random initialization).  Alternation stops as
    soon as a step fails to improve the fit, which keeps the trace
    non-increasing.
    """
    y_norm = float(np.linalg.norm(y, "fro"))
    if y_norm == 0.0:
        raise DegenerateInputError("cannot learn a dictionary from all-zero data")
    rng = np.random.default_rng(cfg.seed)

    dmat = rng.standard_normal((y.shape[0], cfg.d))
    dmat /= np.linalg.norm(dmat, axis=0)
    a = np.zeros((cfg.d, y.shape[1]))
    fits = [1.0]

    for _ in range(cfg.max_alternations):
        if fits[-1] < cfg.epsilon:
            break
        a_new = fista_lasso(y, matrices.frozen(dmat), cfg.rho, cfg.fista_iters, init=a)
        d_new, a_scaled = dict_update(y, a_new, rng=rng)
        fit = float(np.linalg.norm(y - d_new @ a_scaled, "fro")) / y_norm
        if fit > fits[-1]:
            break
        dmat, a = np.asarray(d_new), np.asarray(a_scaled)
        fits.append(fit)

    out = Dictionary(
        mat=matrices.frozen(dmat),
        unit_columns=True,
        provenance="learned",
        rho=cfg.rho,
    )
    return out, fits
