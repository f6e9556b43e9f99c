"""ROC/AUC machinery, score extraction, curve flipping, and lambda sweeps."""

import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import matrices, solver
from .errors import DegenerateInputError, HsdemixError, NumericError, UndefinedRocError
from .matrices import Mat
from .solver import DemixConfig, DemixSolution, Sparsity


@dataclass(frozen=True)
class LabeledScores:
    """Per-column detection scores with binary labels (target = 1)."""

    scores: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.scores, dtype=np.float64)
        y = np.asarray(self.labels)
        if s.ndim != 1 or y.shape != s.shape:
            raise DegenerateInputError(
                f"scores {s.shape} and labels {y.shape} must be equal-length vectors"
            )
        object.__setattr__(self, "scores", s)
        object.__setattr__(self, "labels", (y != 0).astype(np.int64))


@dataclass(frozen=True)
class RocCurve:
    """Threshold sweep (threshold, tpr, fpr), trapezoidal AUC, flip flag, best point.

    The first point anchors the curve at (tpr, fpr) = (0, 0) with an
    infinite threshold; the sweep then walks every distinct score from
    high to low (classifier: score >= threshold).  ``best_point``
    maximizes Youden's J = tpr - fpr, ties going to the highest
    threshold.  When ``flipped`` is set the raw scores had AUC < 0.5 and
    the reported curve was computed on negated scores.
    """

    points: tuple
    auc: float
    flipped: bool
    best_point: tuple


def solution_scores(sol: DemixSolution) -> np.ndarray:
    """Column l2 norms of the sparse estimate: one detection score per voxel."""
    return np.linalg.norm(sol.s_hat, axis=0)


def _sweep_points(scores, labels):
    order = np.argsort(-scores, kind="stable")
    s_sorted = scores[order]
    pos = labels[order] == 1
    tp = np.cumsum(pos)
    fp = np.cumsum(~pos)
    # keep the last index of each run of equal scores: all >= threshold included
    last = np.flatnonzero(np.diff(s_sorted) != 0.0)
    idx = np.concatenate([last, [scores.size - 1]])
    p = tp[-1]
    n = fp[-1]
    points = [(math.inf, 0.0, 0.0)]
    for i in idx:
        points.append((float(s_sorted[i]), float(tp[i] / p), float(fp[i] / n)))
    return tuple(points)


def _trapezoid(points) -> float:
    area = 0.0
    for (_, tpr0, fpr0), (_, tpr1, fpr1) in zip(points, points[1:]):
        area += (fpr1 - fpr0) * (tpr1 + tpr0) / 2.0
    return float(area)


def _best_by_youden(points):
    best = points[0]
    best_j = best[1] - best[2]
    for pt in points[1:]:
        j = pt[1] - pt[2]
        if j > best_j:
            best, best_j = pt, j
    return best


def roc(ls: LabeledScores) -> RocCurve:
    """ROC over every distinct score threshold, with the flip rule applied.

    Raises
    ------
    UndefinedRocError
        If the labels contain a single class.
    """
    n_pos = int(np.sum(ls.labels == 1))
    if n_pos == 0 or n_pos == ls.labels.size:
        raise UndefinedRocError("ROC needs at least one positive and one negative label")
    points = _sweep_points(ls.scores, ls.labels)
    auc = _trapezoid(points)
    flipped = auc < 0.5
    if flipped:
        points = _sweep_points(-ls.scores, ls.labels)
        auc = _trapezoid(points)
    return RocCurve(points=points, auc=auc, flipped=flipped, best_point=_best_by_youden(points))


def lambda_upper(m: Mat, d: Mat, mode: Sparsity) -> float:
    """Right endpoint of the admissible lambda range for a sweep.

    ``||d^T m||_inf / ||m||`` (entry-wise) or ``||d^T m||_inf,2 / ||m||``
    (column-wise), with a spectral-norm denominator.  At this value the
    very first sparse update of the solver thresholds everything to zero.
    """
    dtm = matrices.frozen(d.T @ m)
    kind = "inf" if Sparsity(mode) is Sparsity.ENTRY else "inf_2"
    num = matrices.norm(dtm, kind)
    den = matrices.norm(m, "spectral")
    if num == 0.0 or den == 0.0:
        raise DegenerateInputError("lambda range is degenerate: d^T m or m is zero")
    return num / den


def lambda_grid(upper: float, n_lambdas: int) -> np.ndarray:
    """``n_lambdas`` uniform points on ``(0, upper]``: ``upper * k / n``."""
    if n_lambdas < 1:
        raise DegenerateInputError("need at least one lambda")
    return upper * np.arange(1, n_lambdas + 1) / n_lambdas


@dataclass(frozen=True)
class SweepEntry:
    """Outcome of one sweep solve; ``error`` is set when the solve failed."""

    lam: float
    auc: Optional[float] = None
    flipped: Optional[bool] = None
    best_point: Optional[tuple] = None
    iters_used: Optional[int] = None
    converged: Optional[bool] = None
    curve: Optional[RocCurve] = None
    error: Optional[str] = None


def lambda_sweep(
    m: Mat,
    d: Mat,
    base_cfg: DemixConfig,
    n_lambdas: int,
    labels,
    jobs: Optional[int] = None,
):
    """Solve, score and evaluate over a uniform lambda grid.

    Returns ``(best_curve, entries)`` where ``best_curve`` is the ROC of
    the highest-AUC lambda (ties to the smaller lambda) and ``entries``
    lists every grid point in order.  Per-lambda solver failures are
    recorded in the table without aborting the sweep.
    """
    labels = np.asarray(labels)
    grid = lambda_grid(lambda_upper(m, d, base_cfg.mode), n_lambdas)

    def solve_one(lam: float) -> SweepEntry:
        cfg = DemixConfig(
            mode=base_cfg.mode,
            lam=float(lam),
            shrink_factor=base_cfg.shrink_factor,
            nu_bar=base_cfg.nu_bar,
            max_iters=base_cfg.max_iters,
            rel_tol=base_cfg.rel_tol,
        )
        try:
            sol = solver.apg_demix(m, d, cfg)
            curve = roc(LabeledScores(scores=solution_scores(sol), labels=labels))
        except HsdemixError as exc:
            return SweepEntry(lam=float(lam), error=str(exc))
        return SweepEntry(
            lam=float(lam),
            auc=curve.auc,
            flipped=curve.flipped,
            best_point=curve.best_point,
            iters_used=sol.iters_used,
            converged=sol.converged,
            curve=curve,
        )

    workers = jobs if jobs and jobs > 0 else (os.cpu_count() or 1)
    if workers == 1:
        entries = [solve_one(lam) for lam in grid]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            entries = list(pool.map(solve_one, grid))

    best_idx = None
    for i, e in enumerate(entries):
        if e.auc is not None and (best_idx is None or e.auc > entries[best_idx].auc):
            best_idx = i
    if best_idx is None:
        raise NumericError("every lambda in the sweep failed")
    return entries[best_idx].curve, entries


def _point_dict(pt):
    if pt is None:
        return None
    thr, tpr, fpr = pt
    return {
        "threshold": repr(thr) if not math.isfinite(thr) else thr,
        "tpr": tpr,
        "fpr": fpr,
    }


def curve_dict(curve: RocCurve, include_points: bool = True) -> dict:
    out = {
        "auc": curve.auc,
        "flipped": curve.flipped,
        "best_point": _point_dict(curve.best_point),
    }
    if include_points:
        out["points"] = [_point_dict(p) for p in curve.points]
    return out


def sweep_report(method: str, entries, best_curve: RocCurve) -> dict:
    """JSON-ready evaluation report for a lambda sweep."""
    table = []
    for e in entries:
        table.append(
            {
                "lambda": e.lam,
                "auc": e.auc,
                "flipped": e.flipped,
                "best_point": _point_dict(e.best_point),
                "iters": e.iters_used,
                "converged": e.converged,
                "error": e.error,
            }
        )
    return {
        "method": method,
        "best_point_rule": "maximize Youden's J = tpr - fpr over the reported curve",
        "lambda_grid": [e.lam for e in entries],
        "per_lambda": table,
        "best": curve_dict(best_curve),
    }


def write_curve_csv(curve: RocCurve, path) -> None:
    """Winning curve as threshold,tpr,fpr rows for plotting."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("threshold,tpr,fpr\n")
        for thr, tpr, fpr in curve.points:
            fh.write(f"{thr},{tpr},{fpr}\n")


def report_json(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True)
