"""Dense-matrix foundation: validated storage, norms, SVD, pseudo-inverse, projections.

Matrices are plain float64 numpy arrays kept in column-major (Fortran)
order, frozen after construction.  Every voxel of an unfolded
hyperspectral cube is one column, so column-oriented norms and
projections stay contiguous.
"""

from dataclasses import dataclass

import numpy as np

from .errors import (
    DimensionError,
    NonFiniteError,
    NumericError,
    PreconditionError,
    SingularMatrixError,
)

# Singular values below RANK_TOL * sigma_max are treated as zero when a
# compact factorization or an inverse is formed.
RANK_TOL = 1e-12

# Tolerance on ||U^T U - I||_max when a basis is required to be orthonormal.
ORTHO_TOL = 1e-8

Mat = np.ndarray

NORM_KINDS = (
    "spectral",
    "nuclear",
    "frobenius",
    "l1",
    "l1_2",
    "inf",
    "inf_2",
    "inf_inf",
)


def matrix(data) -> Mat:
    """Build a validated, immutable 2-D float64 matrix in column-major order.

    Raises
    ------
    DimensionError
        If ``data`` is not two-dimensional or is empty.
    NonFiniteError
        If any entry is NaN or infinite.
    """
    a = np.array(data, dtype=np.float64, order="F", copy=True)
    if a.ndim != 2:
        raise DimensionError(f"expected a 2-D array, got ndim={a.ndim}")
    if a.size == 0:
        raise DimensionError(f"empty matrix of shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise NonFiniteError("matrix entries must be finite (no NaN/Inf)")
    a.setflags(write=False)
    return a


def zeros(rows: int, cols: int) -> Mat:
    return frozen(np.zeros((rows, cols), order="F"))


def frozen(a: np.ndarray) -> Mat:
    """Return ``a`` as an immutable column-major view/copy (no validation)."""
    out = np.asfortranarray(a, dtype=np.float64)
    if out is a and a.flags.writeable:
        out = a.copy(order="F")
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class SvdFactors:
    """Compact SVD ``u @ diag(sigma) @ vt`` with sigma descending."""

    u: Mat
    sigma: np.ndarray
    vt: Mat

    def reconstruct(self) -> Mat:
        return frozen((self.u * self.sigma) @ self.vt)


def svd(a: Mat, truncate: bool = True) -> SvdFactors:
    """Compact singular value decomposition of ``a``.

    Singular values below ``RANK_TOL * sigma[0]`` are dropped from the
    compact form when ``truncate`` is set.

    Raises
    ------
    NumericError
        If the underlying iteration fails to converge.
    """
    if a.size == 0:
        raise DimensionError("svd of an empty matrix")
    try:
        u, s, vt = np.linalg.svd(a, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise NumericError(f"svd failed to converge: {exc}") from exc
    if truncate and s.size and s[0] > 0.0:
        k = int(np.count_nonzero(s >= RANK_TOL * s[0]))
        k = max(k, 1)
        u, s, vt = u[:, :k], s[:k], vt[:k, :]
    s = s.copy()
    s.setflags(write=False)
    return SvdFactors(u=frozen(u), sigma=s, vt=frozen(vt))


def pseudo_inverse(d: Mat) -> Mat:
    """Moore-Penrose pseudo-inverse of a full-rank thin or fat matrix.

    Raises
    ------
    SingularMatrixError
        If ``d`` is rank-deficient; the message names the offending
        ``sigma_min / sigma_max`` ratio.
    """
    f = svd(d, truncate=False)
    smax = f.sigma[0]
    smin = f.sigma[-1]
    if smax == 0.0 or smin / smax <= RANK_TOL:
        ratio = 0.0 if smax == 0.0 else smin / smax
        raise SingularMatrixError(
            f"rank-deficient matrix: sigma_min/sigma_max = {ratio:.3e} "
            f"<= {RANK_TOL:.0e}",
            sigma_ratio=ratio,
        )
    return frozen(f.vt.T @ ((1.0 / f.sigma)[:, None] * f.u.T))


def norm(a: Mat, kind: str) -> float:
    """Matrix norm by name.

    ``spectral``  largest singular value
    ``nuclear``   sum of singular values
    ``frobenius`` entry-wise l2
    ``l1``        sum of absolute entries
    ``l1_2``      sum of column l2 norms
    ``inf``       max absolute entry
    ``inf_2``     max column l2 norm
    ``inf_inf``   max row l1 norm
    """
    if a.size == 0:
        raise DimensionError("norm of an empty matrix")
    if kind == "spectral":
        return float(svd(a, truncate=False).sigma[0])
    if kind == "nuclear":
        return float(np.sum(svd(a, truncate=False).sigma))
    if kind == "frobenius":
        return float(np.linalg.norm(a, "fro"))
    if kind == "l1":
        return float(np.sum(np.abs(a)))
    if kind == "l1_2":
        return float(np.sum(np.linalg.norm(a, axis=0)))
    if kind == "inf":
        return float(np.max(np.abs(a)))
    if kind == "inf_2":
        return float(np.max(np.linalg.norm(a, axis=0)))
    if kind == "inf_inf":
        return float(np.max(np.sum(np.abs(a), axis=1)))
    raise ValueError(f"unknown norm kind {kind!r}; expected one of {NORM_KINDS}")


def column_norms(a: Mat) -> np.ndarray:
    return np.linalg.norm(a, axis=0)


def _check_orthonormal(u: Mat, name: str = "u") -> None:
    gram = u.T @ u
    err = float(np.max(np.abs(gram - np.eye(u.shape[1]))))
    if err > ORTHO_TOL:
        raise PreconditionError(
            f"{name} does not have orthonormal columns "
            f"(max |u^T u - I| = {err:.3e} > {ORTHO_TOL:.0e})"
        )


def project_colspace(u: Mat, x: Mat) -> Mat:
    """Orthogonal projection of the columns of ``x`` onto span(columns of u)."""
    _check_orthonormal(u)
    if u.shape[0] != x.shape[0]:
        raise DimensionError(f"row mismatch: u is {u.shape}, x is {x.shape}")
    return frozen(u @ (u.T @ x))


def project_complement(u: Mat, x: Mat) -> Mat:
    """Projection of ``x`` onto the orthogonal complement of span(columns of u)."""
    _check_orthonormal(u)
    if u.shape[0] != x.shape[0]:
        raise DimensionError(f"row mismatch: u is {u.shape}, x is {x.shape}")
    return frozen(x - u @ (u.T @ x))


def orthonormal_basis(a: Mat) -> Mat:
    """Orthonormal basis of the column space of ``a`` (rank-truncated)."""
    f = svd(a, truncate=False)
    if f.sigma[0] == 0.0:
        return frozen(np.zeros((a.shape[0], 0)))
    k = int(np.count_nonzero(f.sigma >= RANK_TOL * f.sigma[0]))
    return frozen(f.u[:, :k])
