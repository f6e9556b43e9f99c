"""Incoherence measures and sufficient-condition certificates for demixing.

Quantifies how separable a low-rank component L and a dictionary-sparse
component D S are: frame bounds of D, the subspace similarity mu, the
complement similarity beta_U, the spikiness measures gamma_U / gamma_V,
the cross terms xi_e / xi_c, and from them the sparsity caps and the
admissible regularization interval [lambda_min, lambda_max] for each
sparsity regime.  Certificates report every violated inequality by name
instead of raising.
"""

import json
import math
import warnings
from dataclasses import dataclass, field, asdict
from typing import Optional

import numpy as np
import scipy.linalg

from . import matrices
from .errors import PreconditionError
from .matrices import Mat
from .solver import Sparsity

# Rank cutoff when recovering the factors of a numerically low-rank L.
_RANK_CUT = 1e-9

# Power iteration controls for mu (seeded for reproducible reports).
_MU_SEED = 1234
_MU_MAX_ITERS = 1000
_MU_TOL = 1e-8

# Fixed note emitted with every report: which column-threshold semantics
# the solver applies (relevant when interpreting lambda_c intervals).
_COLUMN_PROX_NOTE = (
    "column threshold: block soft-thresholding, the proximal operator of "
    "the l1,2 column-norm penalty"
)


@dataclass(frozen=True)
class GroundTruth:
    """Planted pair (l, s) with its sparsity regime and support.

    ``support`` is a frozenset of ``(atom, column)`` pairs in the
    entry-wise regime and a frozenset of column indices in the
    column-wise regime.
    """

    l: Mat
    s: Mat
    mode: Sparsity
    support: frozenset

    @classmethod
    def from_parts(cls, l: Mat, s: Mat, mode) -> "GroundTruth":
        """Derive the support from the exact nonzeros of ``s``."""
        mode = Sparsity(mode)
        if mode is Sparsity.ENTRY:
            rows, cols = np.nonzero(s)
            support = frozenset(zip(rows.tolist(), cols.tolist()))
        else:
            support = frozenset(np.flatnonzero(np.any(s != 0.0, axis=0)).tolist())
        return cls(l=matrices.frozen(l), s=matrices.frozen(s), mode=mode, support=support)


@dataclass
class DiagnosticsReport:
    """Every incoherence quantity plus the certificate verdict."""

    mode: str
    mu: float
    mu_is_upper_bound: bool
    beta_u: Optional[float]
    gamma_u: float
    gamma_v: float
    xi_e: float
    xi_c: float
    alpha_l: float
    alpha_u: float
    gfp_ok: bool
    r: int
    s_count: int
    c_small: Optional[float]
    c_e: Optional[float]
    c_c: Optional[float]
    s_e_max: Optional[float]
    s_c_max: Optional[float]
    lambda_min: Optional[float]
    lambda_max: Optional[float]
    lemma_holds: Optional[bool]
    theorem_holds: bool
    failure_reasons: list = field(default_factory=list)
    notes: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {k: _json_value(v) for k, v in asdict(self).items()}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def _json_value(v):
    if isinstance(v, np.floating):
        v = float(v)
    if isinstance(v, float) and not math.isfinite(v):
        return repr(v)
    return v


def frame_bounds(d: Mat):
    """Generalized frame bounds ``(sigma_min(d)^2, sigma_max(d)^2)``.

    A rank-deficient (or fat) dictionary yields ``alpha_l = 0`` so the
    caller can flag the violation instead of failing.
    """
    sig = matrices.svd(d, truncate=False).sigma
    alpha_u = float(sig[0] * sig[0])
    if d.shape[1] > d.shape[0] or sig[0] == 0.0 or sig[-1] <= matrices.RANK_TOL * sig[0]:
        return 0.0, alpha_u
    return float(sig[-1] * sig[-1]), alpha_u


def low_rank_factors(l: Mat):
    """Compact factors (u, sigma, v) of ``l`` with rank read off at 1e-9 * sigma_1."""
    f = matrices.svd(l, truncate=False)
    if f.sigma[0] == 0.0:
        raise PreconditionError("low-rank component is identically zero")
    r = int(np.count_nonzero(f.sigma > _RANK_CUT * f.sigma[0]))
    return (
        matrices.frozen(f.u[:, :r]),
        f.sigma[:r].copy(),
        matrices.frozen(f.vt[:r, :].T),
    )


def _project_lowrank(z, u, v):
    # P_U z + z P_V - P_U z P_V, evaluated with thin factors only
    a = u.T @ z
    b = z @ v
    c = u.T @ b
    return u @ a + b @ v.T - u @ (c @ v.T)


def _column_bases(d: Mat, support, mode: Sparsity, nm: int):
    """Per-column orthonormal bases of the dictionary-sparse subspace."""
    if mode is Sparsity.ENTRY:
        atoms_by_col = {}
        for atom, col in support:
            atoms_by_col.setdefault(int(col), []).append(int(atom))
        out = []
        for col, atoms in sorted(atoms_by_col.items()):
            q = matrices.orthonormal_basis(d[:, sorted(atoms)])
            if q.shape[1]:
                out.append((col, q))
        return out
    q = matrices.orthonormal_basis(d)
    if q.shape[1] == 0:
        return []
    return [(int(col), q) for col in sorted(support)]


def _project_dict_subspace(z, bases):
    out = np.zeros_like(z)
    for col, q in bases:
        out[:, col] = q @ (q.T @ z[:, col])
    return out


def _mu_power_iteration(u, v, bases, shape):
    rng = np.random.default_rng(_MU_SEED)
    z = np.zeros(shape)
    for col, q in bases:
        z[:, col] = q @ rng.standard_normal(q.shape[1])
    nz = np.linalg.norm(z)
    if nz == 0.0:
        return 0.0
    z /= nz
    lam_prev = -1.0
    lam = 0.0
    for _ in range(_MU_MAX_ITERS):
        w = _project_dict_subspace(_project_lowrank(z, u, v), bases)
        lam = float(np.sum(z * w))
        nw = np.linalg.norm(w)
        if nw <= 1e-32:
            return 0.0
        z = w / nw
        if abs(lam - lam_prev) <= _MU_TOL * max(lam, 1e-30):
            break
        lam_prev = lam
    return float(math.sqrt(min(max(lam, 0.0), 1.0)))


def mu(gt: GroundTruth, d: Mat) -> float:
    """Largest ratio ``||P_L(z)||_F / ||z||_F`` over the dictionary-sparse subspace.

    The subspace is spanned by products ``d @ h`` with ``h`` restricted to
    the ground-truth support (entry pattern or column support).  Computed
    by seeded power iteration on the composed projection; clamped to [0, 1].
    An empty support yields 0.
    """
    if not gt.support:
        return 0.0
    u, _, v = low_rank_factors(gt.l)
    bases = _column_bases(d, gt.support, gt.mode, gt.l.shape[1])
    if not bases:
        return 0.0
    return _mu_power_iteration(u, v, bases, gt.l.shape)


def mu_upper_bound(l: Mat, d: Mat) -> float:
    """Support-free upper bound on mu: every column of the sparse part free."""
    u, _, v = low_rank_factors(l)
    q = matrices.orthonormal_basis(d)
    if q.shape[1] == 0:
        return 0.0
    bases = [(col, q) for col in range(l.shape[1])]
    return _mu_power_iteration(u, v, bases, l.shape)


def beta_u(u: Mat, d: Mat) -> float:
    """Worst-case energy fraction of ``d @ w`` outside the column space of u.

    Largest generalized eigenvalue of ``(d^T (I - P_U) d, d^T d)``,
    clamped to [0, 1].
    """
    matrices._check_orthonormal(u)
    cross = d.T @ u
    b = d.T @ d
    a = b - cross @ cross.T
    try:
        vals = scipy.linalg.eigh(a, b, eigvals_only=True)
    except (scipy.linalg.LinAlgError, np.linalg.LinAlgError) as exc:
        raise PreconditionError(f"dictionary must have full column rank: {exc}") from exc
    return float(min(max(vals[-1], 0.0), 1.0))


def gamma_u(u: Mat, d: Mat) -> float:
    """Max fraction of a single dictionary column lying inside span(u)."""
    matrices._check_orthonormal(u)
    norms2 = np.sum(d * d, axis=0)
    keep = norms2 > 0.0
    if not np.all(keep):
        warnings.warn(
            f"gamma_u: skipping zero dictionary columns {np.flatnonzero(~keep).tolist()}"
        )
    if not np.any(keep):
        return 0.0
    proj2 = np.sum((u.T @ d) ** 2, axis=0)
    return float(min(np.max(proj2[keep] / norms2[keep]), 1.0))


def gamma_v(v: Mat) -> float:
    """Max squared row norm of v: row-space spikiness in [r/nm, 1]."""
    matrices._check_orthonormal(v, name="v")
    return float(min(np.max(np.sum(v * v, axis=1)), 1.0))


def xi(u: Mat, v: Mat, d: Mat):
    """Cross terms ``(||d^T u v^T||_inf, ||d^T u v^T||_inf,2)``."""
    matrices._check_orthonormal(u)
    matrices._check_orthonormal(v, name="v")
    k = (d.T @ u) @ v.T
    return float(np.max(np.abs(k))), float(np.max(np.linalg.norm(k, axis=0)))


def _base_quantities(gt: GroundTruth, d: Mat):
    u, sig, v = low_rank_factors(gt.l)
    alpha_l, alpha_u = frame_bounds(d)
    gfp_ok = alpha_l > 0.0
    bu = beta_u(u, d) if gfp_ok else None
    gu = gamma_u(u, d)
    gv = gamma_v(v)
    xe, xc = xi(u, v, d)
    mu_val = mu(gt, d)
    return u, sig, v, alpha_l, alpha_u, gfp_ok, bu, gu, gv, xe, xc, mu_val


def entrywise_certificate(gt: GroundTruth, d: Mat) -> DiagnosticsReport:
    """Sufficient conditions for exact entry-wise recovery plus the lambda interval.

    Populates the sparsity cap ``s_e_max = (1 - mu)^2 / 2 * nm / r``, the
    coupling constant c and ``C_e = c / (alpha_l (1 - mu)^2 - c)``, and

        lambda_min = (1 + C_e) / (1 - C_e) * xi_e
        lambda_max = (sqrt(alpha_l) (1 - mu) - sqrt(r alpha_u) mu) / sqrt(s_e).

    ``theorem_holds`` is true iff every hypothesis passes; each violated
    inequality is listed by name.
    """
    if gt.mode is not Sparsity.ENTRY:
        raise PreconditionError("entry-wise certificate needs entry-wise ground truth")
    u, sig, v, alpha_l, alpha_u, gfp_ok, bu, gu, gv, xe, xc, mu_val = _base_quantities(gt, d)
    r = len(sig)
    f_rows, nm = gt.l.shape
    d_cols = d.shape[1]
    s_e = len(gt.support)
    failures = []
    notes = [_COLUMN_PROX_NOTE]

    if not gfp_ok:
        failures.append("GFP violated: alpha_l = 0 (rank-deficient dictionary)")

    one_minus_mu_sq = (1.0 - mu_val) ** 2
    s_e_max = 0.5 * one_minus_mu_sq * nm / r

    if s_e == 0:
        notes.append("empty support: certificate is vacuous")
        return DiagnosticsReport(
            mode=Sparsity.ENTRY.value,
            mu=mu_val,
            mu_is_upper_bound=False,
            beta_u=bu,
            gamma_u=gu,
            gamma_v=gv,
            xi_e=xe,
            xi_c=xc,
            alpha_l=alpha_l,
            alpha_u=alpha_u,
            gfp_ok=gfp_ok,
            r=r,
            s_count=0,
            c_small=None,
            c_e=None,
            c_c=None,
            s_e_max=s_e_max,
            s_c_max=None,
            lambda_min=None,
            lambda_max=None,
            lemma_holds=None,
            theorem_holds=not failures,
            failure_reasons=failures,
            notes=notes,
        )

    if alpha_l > 0.0 and one_minus_mu_sq > 0.0 and alpha_l > 1.0 / one_minus_mu_sq:
        failures.append("alpha_l exceeds 1/(1-mu)^2")
    if s_e > s_e_max:
        failures.append("s_e exceeds s_e^max")

    # Admissible gamma_U bound, branch depending on where s_e falls.
    if s_e <= min(d_cols, s_e_max):
        gu_bound = (one_minus_mu_sq - 2.0 * s_e * gv) / (2.0 * s_e * (1.0 + gv))
    else:
        gu_bound = (one_minus_mu_sq - 2.0 * s_e * gv) / (2.0 * (d_cols + s_e * gv))
    if gu > gu_bound:
        failures.append("gamma_U exceeds its admissible bound")

    c_small = (
        0.5 * alpha_u * ((1.0 + 2.0 * gu) * (min(s_e, d_cols) + s_e * gv)
                         + 2.0 * gv * min(s_e, nm))
        - 0.5 * alpha_l * (min(s_e, d_cols) + s_e * gv)
    )
    denom = alpha_l * one_minus_mu_sq - c_small
    if denom <= 0.0:
        failures.append("C_e denominator nonpositive: alpha_l(1-mu)^2 <= c")
        c_e = math.inf
    else:
        c_e = c_small / denom
    if not 0.0 <= c_e < 1.0:
        failures.append("C_e outside [0, 1)")
        lambda_min = math.inf
    else:
        lambda_min = (1.0 + c_e) / (1.0 - c_e) * xe
    lambda_max = (
        math.sqrt(alpha_l) * (1.0 - mu_val) - math.sqrt(r * alpha_u) * mu_val
    ) / math.sqrt(s_e)
    if not (lambda_max > lambda_min >= 0.0):
        failures.append("empty lambda interval: lambda_max <= lambda_min or lambda_min < 0")

    return DiagnosticsReport(
        mode=Sparsity.ENTRY.value,
        mu=mu_val,
        mu_is_upper_bound=False,
        beta_u=bu,
        gamma_u=gu,
        gamma_v=gv,
        xi_e=xe,
        xi_c=xc,
        alpha_l=alpha_l,
        alpha_u=alpha_u,
        gfp_ok=gfp_ok,
        r=r,
        s_count=s_e,
        c_small=c_small,
        c_e=c_e,
        c_c=None,
        s_e_max=s_e_max,
        s_c_max=None,
        lambda_min=lambda_min,
        lambda_max=lambda_max,
        lemma_holds=None,
        theorem_holds=not failures,
        failure_reasons=failures,
        notes=notes,
    )


def columnwise_certificate(gt: GroundTruth, d: Mat) -> DiagnosticsReport:
    """Sufficient conditions for column-wise oracle-model recovery.

    Uses the cap ``s_c_max = alpha_l / (alpha_u gamma_V) * (1 - mu)^2 / beta_U``,
    the constant ``C_c = (alpha_u / alpha_l) * gamma_V beta_U / (1 - mu)^2``, and

        lambda_min = (xi_c + sqrt(r s_c alpha_u) mu C_c) / (1 - s_c C_c)
        lambda_max = (sqrt(alpha_l) (1 - mu) - sqrt(r alpha_u) mu) / sqrt(s_c).

    The subspace-identifiability predicate (``mu < 1``) is reported
    separately in ``lemma_holds``.
    """
    if gt.mode is not Sparsity.COLUMN:
        raise PreconditionError("column-wise certificate needs column-wise ground truth")
    u, sig, v, alpha_l, alpha_u, gfp_ok, bu, gu, gv, xe, xc, mu_val = _base_quantities(gt, d)
    r = len(sig)
    f_rows, nm = gt.l.shape
    s_c = len(gt.support)
    failures = []
    notes = [_COLUMN_PROX_NOTE]
    lemma_holds = mu_val < 1.0

    if not gfp_ok:
        failures.append("GFP violated: alpha_l = 0 (rank-deficient dictionary)")
    if not lemma_holds:
        failures.append("mu >= 1: column space not identifiable")

    one_minus_mu_sq = (1.0 - mu_val) ** 2
    if gfp_ok and bu is not None and bu > 0.0 and gv > 0.0:
        s_c_max = (alpha_l / (alpha_u * gv)) * (one_minus_mu_sq / bu)
        c_c = (alpha_u / alpha_l) * gv * bu / one_minus_mu_sq if one_minus_mu_sq > 0 else math.inf
    else:
        s_c_max = math.inf if gfp_ok else None
        c_c = 0.0 if gfp_ok else None

    if s_c == 0:
        notes.append("empty support: certificate is vacuous")
        return DiagnosticsReport(
            mode=Sparsity.COLUMN.value,
            mu=mu_val,
            mu_is_upper_bound=False,
            beta_u=bu,
            gamma_u=gu,
            gamma_v=gv,
            xi_e=xe,
            xi_c=xc,
            alpha_l=alpha_l,
            alpha_u=alpha_u,
            gfp_ok=gfp_ok,
            r=r,
            s_count=0,
            c_small=None,
            c_e=None,
            c_c=c_c,
            s_e_max=None,
            s_c_max=s_c_max,
            lambda_min=None,
            lambda_max=None,
            lemma_holds=lemma_holds,
            theorem_holds=not failures,
            failure_reasons=failures,
            notes=notes,
        )

    if s_c_max is not None and s_c > s_c_max:
        failures.append("s_c exceeds s_c^max")

    lambda_min = None
    if c_c is not None:
        den = 1.0 - s_c * c_c
        if den <= 0.0:
            failures.append("1 - s_c C_c nonpositive: lambda_min undefined")
            lambda_min = math.inf
        else:
            lambda_min = (xc + math.sqrt(r * s_c * alpha_u) * mu_val * c_c) / den
    lambda_max = (
        math.sqrt(alpha_l) * (1.0 - mu_val) - math.sqrt(r * alpha_u) * mu_val
    ) / math.sqrt(s_c)
    if lambda_min is None or not (lambda_max > lambda_min >= 0.0):
        failures.append("empty lambda interval: lambda_max <= lambda_min or lambda_min < 0")

    return DiagnosticsReport(
        mode=Sparsity.COLUMN.value,
        mu=mu_val,
        mu_is_upper_bound=False,
        beta_u=bu,
        gamma_u=gu,
        gamma_v=gv,
        xi_e=xe,
        xi_c=xc,
        alpha_l=alpha_l,
        alpha_u=alpha_u,
        gfp_ok=gfp_ok,
        r=r,
        s_count=s_c,
        c_small=None,
        c_e=None,
        c_c=c_c,
        s_e_max=None,
        s_c_max=s_c_max,
        lambda_min=lambda_min,
        lambda_max=lambda_max,
        lemma_holds=lemma_holds,
        theorem_holds=not failures,
        failure_reasons=failures,
        notes=notes,
    )
