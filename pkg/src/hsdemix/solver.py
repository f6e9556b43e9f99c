"""Accelerated proximal gradient solver for low-rank + dictionary-sparse demixing.

Solves the penalized programs

    min_{L,S}  nu*||L||_*  +  nu*lambda*||S||_1      + 1/2 ||M - L - D S||_F^2
    min_{L,S}  nu*||L||_*  +  nu*lambda*||S||_{1,2}  + 1/2 ||M - L - D S||_F^2

for the entry-wise and column-wise sparsity regimes, with FISTA momentum
and geometric continuation of ``nu`` from ``||M||`` (spectral) down to
``nu_bar``.
"""

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from . import matrices, prox
from .errors import DimensionError, DivergenceError, NumericError, PreconditionError
from .matrices import Mat


class Sparsity(str, Enum):
    """Sparsity regime of the coefficient matrix S."""

    ENTRY = "entry"
    COLUMN = "column"


@dataclass(frozen=True)
class DemixConfig:
    """Solver inputs.

    lam            regularization weight (lambda_e or lambda_c)
    shrink_factor  geometric continuation factor v in (0, 1)
    nu_bar         terminal continuation value
    max_iters      iteration cap
    rel_tol        relative iterate-change stopping threshold, applied
                   once nu has reached nu_bar
    """

    mode: Sparsity
    lam: float
    shrink_factor: float = 0.95
    nu_bar: float = 1e-4
    max_iters: int = 5000
    rel_tol: float = 1e-6

    def __post_init__(self):
        object.__setattr__(self, "mode", Sparsity(self.mode))
        if not self.lam > 0.0:
            raise PreconditionError(f"lambda must be positive, got {self.lam}")
        if not 0.0 < self.shrink_factor < 1.0:
            raise PreconditionError(
                f"shrink factor must lie in (0, 1), got {self.shrink_factor}"
            )
        if not self.nu_bar > 0.0:
            raise PreconditionError(f"nu_bar must be positive, got {self.nu_bar}")
        if self.max_iters < 1:
            raise PreconditionError("max_iters must be at least 1")
        if self.rel_tol < 0.0:
            raise PreconditionError("rel_tol must be nonnegative")


@dataclass
class SolverState:
    """One iteration of solver state (exposed for fixed-point tests)."""

    l_cur: Mat
    l_prev: Mat
    s_cur: Mat
    s_prev: Mat
    t_cur: float
    t_prev: float
    nu: float
    iter: int
    nuclear_cur: float = field(default=float("nan"))


@dataclass(frozen=True)
class DemixSolution:
    l_hat: Mat
    s_hat: Mat
    objective_trace: tuple
    iters_used: int
    converged: bool


def lipschitz_constant(d: Mat) -> float:
    """Smoothness constant of the quadratic fit term: ``1 + sigma_max(d)^2``.

    Equals the largest eigenvalue of ``[I D]^T [I D]`` without forming
    the Gram matrix.
    """
    smax = matrices.norm(d, "spectral")
    return 1.0 + smax * smax


def momentum_next(t: float) -> float:
    """FISTA momentum recurrence ``t -> (1 + sqrt(4 t^2 + 1)) / 2``."""
    return 0.5 * (1.0 + math.sqrt(4.0 * t * t + 1.0))


def _sparsity_penalty(s: Mat, mode: Sparsity) -> float:
    if mode is Sparsity.ENTRY:
        return float(np.sum(np.abs(s)))
    return float(np.sum(np.linalg.norm(s, axis=0)))


def objective(m: Mat, l: Mat, s: Mat, d: Mat, nu: float, cfg: DemixConfig) -> float:
    """Penalized objective value at (l, s) for weight ``nu``."""
    if m.shape != l.shape:
        raise DimensionError(f"m {m.shape} and l {l.shape} differ")
    if d.shape[1] != s.shape[0] or s.shape[1] != m.shape[1] or d.shape[0] != m.shape[0]:
        raise DimensionError(
            f"incompatible shapes: m {m.shape}, d {d.shape}, s {s.shape}"
        )
    resid = m - l - d @ s
    fit = 0.5 * float(np.sum(resid * resid))
    return nu * matrices.norm(l, "nuclear") + nu * cfg.lam * _sparsity_penalty(
        s, cfg.mode
    ) + fit


def apg_step(m: Mat, d: Mat, cfg: DemixConfig, lf: float, state: SolverState) -> SolverState:
    """Advance the solver by one accelerated proximal gradient iteration."""
    w = (state.t_prev - 1.0) / state.t_cur
    tl = state.l_cur + w * (state.l_cur - state.l_prev)
    ts = state.s_cur + w * (state.s_cur - state.s_prev)

    resid = m - tl - d @ ts
    gl = tl + resid / lf
    gs = ts + (d.T @ resid) / lf

    l_next, sig = prox.svt_with_sigma(gl, state.nu / lf)
    tau_s = state.nu * cfg.lam / lf
    if cfg.mode is Sparsity.ENTRY:
        s_next = prox.soft_threshold(gs, tau_s)
    else:
        s_next = prox.column_soft_threshold(gs, tau_s)

    return SolverState(
        l_cur=l_next,
        l_prev=state.l_cur,
        s_cur=s_next,
        s_prev=state.s_cur,
        t_cur=momentum_next(state.t_cur),
        t_prev=state.t_cur,
        nu=max(cfg.shrink_factor * state.nu, cfg.nu_bar),
        iter=state.iter + 1,
        nuclear_cur=float(np.sum(sig)),
    )


def initial_state(m: Mat, d: Mat) -> SolverState:
    """Zero iterates, unit momentum, ``nu = ||M||`` (spectral)."""
    f, nm = m.shape
    dc = d.shape[1]
    z_l = matrices.zeros(f, nm)
    z_s = matrices.zeros(dc, nm)
    return SolverState(
        l_cur=z_l,
        l_prev=z_l,
        s_cur=z_s,
        s_prev=z_s,
        t_cur=1.0,
        t_prev=1.0,
        nu=matrices.norm(m, "spectral"),
        iter=0,
        nuclear_cur=0.0,
    )


def apg_demix(m: Mat, d: Mat, cfg: DemixConfig) -> DemixSolution:
    """Run the accelerated solver until the iterates settle or max_iters.

    Convergence is declared once the continuation weight has reached
    ``nu_bar`` and

        max(||L_k+1 - L_k||_F, ||S_k+1 - S_k||_F) / max(1, ||M||_F) <= rel_tol.

    Raises
    ------
    DivergenceError
        If a non-finite iterate or objective appears; the exception
        carries the iteration index.
    """
    if d.shape[0] != m.shape[0]:
        raise DimensionError(f"m has {m.shape[0]} rows but d has {d.shape[0]}")
    lf = lipschitz_constant(d)
    state = initial_state(m, d)
    denom = max(1.0, matrices.norm(m, "frobenius"))

    trace = []
    converged = False
    for _ in range(cfg.max_iters):
        nu_used = state.nu
        try:
            new = apg_step(m, d, cfg, lf, state)
        except NumericError as exc:
            raise DivergenceError(
                f"non-finite value inside iteration {state.iter + 1}: {exc}",
                iteration=state.iter + 1,
            ) from exc

        if not (np.all(np.isfinite(new.l_cur)) and np.all(np.isfinite(new.s_cur))):
            raise DivergenceError(
                f"non-finite iterate at iteration {new.iter}", iteration=new.iter
            )
        with np.errstate(over="ignore"):
            resid = m - new.l_cur - d @ new.s_cur
            obj = (
                nu_used * new.nuclear_cur
                + nu_used * cfg.lam * _sparsity_penalty(new.s_cur, cfg.mode)
                + 0.5 * float(np.sum(resid * resid))
            )
        if not np.isfinite(obj):
            raise DivergenceError(
                f"non-finite objective at iteration {new.iter}", iteration=new.iter
            )
        trace.append(obj)

        delta = max(
            float(np.linalg.norm(new.l_cur - state.l_cur, "fro")),
            float(np.linalg.norm(new.s_cur - state.s_cur, "fro")),
        )
        state = new
        if nu_used <= cfg.nu_bar and delta / denom <= cfg.rel_tol:
            converged = True
            break

    return DemixSolution(
        l_hat=state.l_cur,
        s_hat=state.s_cur,
        objective_trace=tuple(trace),
        iters_used=state.iter,
        converged=converged,
    )
