"""Cube folding, normalization, binary file formats, and synthetic instances.

File formats (all little-endian):

    HSC cube:        "HSC1", u32 n, m, f, then n*m*f float64 values,
                     voxel-major: for each voxel p (column-major over the
                     n x m grid, p = col*n + row) its f band values.
    HSL label map:   "HSL1", u32 n, m, then n*m u32 class ids, same
                     voxel order (0 = unlabeled).
    HSD dictionary:  "HSD1", u32 f, d, then f*d float64 column-major.
"""

import struct
from dataclasses import dataclass

import numpy as np

from . import matrices
from .dictlearn import Dictionary
from .diagnostics import GroundTruth
from .errors import (
    DataFormatError,
    DegenerateInputError,
    DimensionError,
    MagicError,
    NonFiniteError,
    PreconditionError,
    TruncationError,
)
from .matrices import Mat
from .solver import Sparsity

_U32_MAX = 2**32 - 1


@dataclass(frozen=True)
class HsCube:
    """An n x m x f reflectance volume; ``values[i, j, :]`` is voxel (i, j)."""

    n: int
    m: int
    f: int
    values: np.ndarray

    def __post_init__(self):
        if self.n < 1 or self.m < 1 or self.f < 1:
            raise DimensionError(f"cube dimensions must be positive: {self.n}x{self.m}x{self.f}")
        if self.values.shape != (self.n, self.m, self.f):
            raise DimensionError(
                f"values shape {self.values.shape} != ({self.n},{self.m},{self.f})"
            )
        if not np.all(np.isfinite(self.values)):
            raise NonFiniteError("cube values must be finite")


@dataclass(frozen=True)
class LabelMap:
    """Per-voxel class ids (0 = unlabeled), flattened in voxel order."""

    n: int
    m: int
    class_ids: np.ndarray

    def __post_init__(self):
        if self.n < 1 or self.m < 1:
            raise DimensionError("label map dimensions must be positive")
        if self.class_ids.shape != (self.n * self.m,):
            raise DimensionError(
                f"expected {self.n * self.m} class ids, got {self.class_ids.shape}"
            )
        if np.any(self.class_ids < 0):
            raise DataFormatError("class ids must be nonnegative")


@dataclass(frozen=True)
class SynthSpec:
    """Shape, rank, sparsity regime, magnitude scales and seed of a planted instance."""

    f: int
    d: int
    nm: int
    r: int
    mode: Sparsity
    sparsity: int
    l_scale: float = 1.0
    s_scale: float = 1.0
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "mode", Sparsity(self.mode))
        if min(self.f, self.d, self.nm) < 1:
            raise PreconditionError("f, d, nm must be positive")
        if not 1 <= self.r <= min(self.f, self.nm):
            raise PreconditionError(f"need 1 <= r <= min(f, nm), got r={self.r}")
        cap = self.d * self.nm if self.mode is Sparsity.ENTRY else self.nm
        if not 0 <= self.sparsity <= cap:
            raise PreconditionError(f"sparsity {self.sparsity} outside [0, {cap}]")
        if self.l_scale <= 0 or self.s_scale <= 0:
            raise PreconditionError("magnitude scales must be positive")


def unfold(cube: HsCube) -> Mat:
    """f x nm matrix whose column p is voxel p (p = col*n + row)."""
    flat = cube.values.reshape(cube.n * cube.m, cube.f, order="F")
    return matrices.matrix(flat.T)


def fold(mat: Mat, n: int, m: int) -> HsCube:
    """Inverse of :func:`unfold`; exact round trip."""
    if mat.shape[1] != n * m:
        raise DimensionError(f"matrix has {mat.shape[1]} columns, expected n*m={n * m}")
    values = np.asarray(mat).T.reshape(n, m, mat.shape[0], order="F").copy()
    return HsCube(n=n, m=m, f=mat.shape[0], values=values)


def normalize_data(m: Mat):
    """Divide by the max absolute entry; returns ``(normalized, scale)``."""
    scale = matrices.norm(m, "inf")
    if scale == 0.0:
        raise DegenerateInputError("cannot normalize an all-zero data matrix")
    return matrices.frozen(m / scale), scale


def normalize_dictionary(d: Mat, data_scale: float) -> Dictionary:
    """Scale a sampled-voxel dictionary by the data scale, then unit-normalize columns."""
    if data_scale <= 0.0:
        raise PreconditionError(f"data scale must be positive, got {data_scale}")
    scaled = d / data_scale
    norms = np.linalg.norm(scaled, axis=0)
    zero = np.flatnonzero(norms == 0.0)
    if zero.size:
        raise DegenerateInputError(f"dictionary column {int(zero[0])} is zero")
    return Dictionary(
        mat=matrices.frozen(scaled / norms),
        unit_columns=True,
        provenance="sampled",
    )


def _orthonormal(rng, rows, cols):
    q, _ = np.linalg.qr(rng.standard_normal((rows, cols)))
    return q


def _planted_sigma(rng, spec):
    sig = (1.0 + rng.uniform(size=spec.r)) * spec.l_scale
    return np.sort(sig)[::-1]


def _plant_sparse(rng, spec, columns=None):
    """Coefficient matrix with the requested sparsity pattern."""
    s = np.zeros((spec.d, spec.nm))
    if spec.sparsity == 0:
        return s
    if spec.mode is Sparsity.ENTRY:
        if columns is None:
            flat = rng.choice(spec.d * spec.nm, size=spec.sparsity, replace=False)
            rows, cols = flat % spec.d, flat // spec.d
        else:
            cols = columns
            rows = rng.integers(0, spec.d, size=spec.sparsity)
        mags = (1.0 + rng.uniform(size=spec.sparsity)) * spec.s_scale
        signs = rng.choice([-1.0, 1.0], size=spec.sparsity)
        s[rows, cols] = signs * mags
    else:
        cols = rng.choice(spec.nm, size=spec.sparsity, replace=False) if columns is None else columns
        s[:, cols] = rng.standard_normal((spec.d, spec.sparsity)) * spec.s_scale
    return s


def synthesize(spec: SynthSpec):
    """Random planted instance ``m = l + d s`` with known factors.

    U and V are orthonormalized Gaussian, the singular values of L are
    uniform in ``[1, 2] * l_scale``, D is Gaussian with unit columns, and
    S carries the requested sparsity with magnitudes in
    ``[1, 2] * s_scale`` (entry-wise) or dense Gaussian columns
    (column-wise).  Returns ``(m, ground_truth, dictionary)``.
    """
    rng = np.random.default_rng(spec.seed)
    u = _orthonormal(rng, spec.f, spec.r)
    v = _orthonormal(rng, spec.nm, spec.r)
    sig = _planted_sigma(rng, spec)
    l = (u * sig) @ v.T

    dmat = rng.standard_normal((spec.f, spec.d))
    dmat /= np.linalg.norm(dmat, axis=0)

    s = _plant_sparse(rng, spec)
    m = l + dmat @ s
    gt = GroundTruth.from_parts(l, s, spec.mode)
    dic = Dictionary(mat=matrices.matrix(dmat), unit_columns=True, provenance="external")
    return matrices.matrix(m), gt, dic


def _spread_rows(count: int, r: int) -> np.ndarray:
    """Orthonormal count x r block whose rows all have squared norm r/count.

    Built from the constant vector and leading sine/cosine pairs, which
    keeps the row-space maximally spread out.
    """
    if r >= count:
        raise PreconditionError("spread construction needs r < number of free columns")
    t = np.arange(count)
    cols = []
    if r % 2 == 1:
        cols.append(np.full(count, 1.0 / np.sqrt(count)))
    for k in range(1, r // 2 + 1):
        ang = 2.0 * np.pi * k * t / count
        cols.append(np.sqrt(2.0 / count) * np.cos(ang))
        cols.append(np.sqrt(2.0 / count) * np.sin(ang))
    v = np.column_stack(cols[:r])
    return v / np.linalg.norm(v, axis=0)


def synthesize_separated(spec: SynthSpec):
    """Well-separated planted instance built to satisfy the recovery conditions.

    The dictionary is an orthonormal block drawn orthogonal to the column
    space of L (tight frame, zero cross terms), the sparse support sits on
    columns where the row space of L is exactly zero, and the remaining
    rows of V are maximally spread so its spikiness attains ``r / (nm - s)``.
    Entry-wise instances place one entry per support column.
    """
    rng = np.random.default_rng(spec.seed)
    if spec.r + spec.d > spec.f:
        raise PreconditionError("separated construction needs r + d <= f")
    frame = _orthonormal(rng, spec.f, spec.r + spec.d)
    u, dmat = frame[:, : spec.r], frame[:, spec.r :]

    n_cols = spec.sparsity
    cols = np.sort(rng.choice(spec.nm, size=n_cols, replace=False)) if n_cols else np.array([], dtype=int)
    free = np.setdiff1d(np.arange(spec.nm), cols)
    v = np.zeros((spec.nm, spec.r))
    v[free, :] = _spread_rows(free.size, spec.r)

    sig = _planted_sigma(rng, spec)
    l = (u * sig) @ v.T
    s = _plant_sparse(rng, spec, columns=cols)
    m = l + dmat @ s
    gt = GroundTruth.from_parts(l, s, spec.mode)
    dic = Dictionary(mat=matrices.matrix(dmat), unit_columns=True, provenance="external")
    return matrices.matrix(m), gt, dic


def support_labels(gt: GroundTruth) -> np.ndarray:
    """Binary per-column labels: 1 where the planted sparse part is active."""
    cols = np.zeros(gt.s.shape[1], dtype=np.int64)
    if gt.mode is Sparsity.ENTRY:
        for _, col in gt.support:
            cols[col] = 1
    else:
        for col in gt.support:
            cols[col] = 1
    return cols


# ---------------------------------------------------------------------------
# Binary formats
# ---------------------------------------------------------------------------


def _check_u32(name, *vals):
    for v in vals:
        if not 0 <= v <= _U32_MAX:
            raise DataFormatError(f"{name}: dimension {v} overflows u32")


def _read_exact(path, magic, header_fmt):
    with open(path, "rb") as fh:
        blob = fh.read()
    if len(blob) < 4 or blob[:4] != magic:
        raise MagicError(f"{path}: expected magic {magic!r}, got {blob[:4]!r}")
    hdr_size = struct.calcsize(header_fmt)
    if len(blob) < 4 + hdr_size:
        raise TruncationError(
            f"{path}: header truncated", expected_bytes=4 + hdr_size, actual_bytes=len(blob)
        )
    header = struct.unpack_from(header_fmt, blob, 4)
    return header, blob[4 + hdr_size :]


def _payload(path, rest, count, dtype):
    expected = count * dtype.itemsize
    if len(rest) != expected:
        raise TruncationError(
            f"{path}: payload has {len(rest)} bytes, expected {expected}",
            expected_bytes=expected,
            actual_bytes=len(rest),
        )
    return np.frombuffer(rest, dtype=dtype)


def write_cube(cube: HsCube, path) -> None:
    _check_u32("cube", cube.n, cube.m, cube.f)
    m = unfold(cube)
    payload = np.asarray(m, dtype="<f8").ravel(order="F").tobytes()
    with open(path, "wb") as fh:
        fh.write(b"HSC1")
        fh.write(struct.pack("<III", cube.n, cube.m, cube.f))
        fh.write(payload)


def read_cube(path) -> HsCube:
    (n, m, f), rest = _read_exact(path, b"HSC1", "<III")
    if n < 1 or m < 1 or f < 1:
        raise DataFormatError(f"{path}: nonpositive dimensions {n}x{m}x{f}")
    vals = _payload(path, rest, n * m * f, np.dtype("<f8"))
    if not np.all(np.isfinite(vals)):
        raise NonFiniteError(f"{path}: cube payload contains NaN/Inf")
    mat = vals.reshape(f, n * m, order="F")
    return fold(matrices.matrix(mat), n, m)


def write_labels(labels: LabelMap, path) -> None:
    _check_u32("labels", labels.n, labels.m, int(labels.class_ids.max(initial=0)))
    with open(path, "wb") as fh:
        fh.write(b"HSL1")
        fh.write(struct.pack("<II", labels.n, labels.m))
        fh.write(np.asarray(labels.class_ids, dtype="<u4").tobytes())


def read_labels(path) -> LabelMap:
    (n, m), rest = _read_exact(path, b"HSL1", "<II")
    if n < 1 or m < 1:
        raise DataFormatError(f"{path}: nonpositive dimensions {n}x{m}")
    ids = _payload(path, rest, n * m, np.dtype("<u4")).astype(np.int64)
    return LabelMap(n=n, m=m, class_ids=ids)


def write_dict(dic: Dictionary, path) -> None:
    f, d = dic.mat.shape
    _check_u32("dictionary", f, d)
    with open(path, "wb") as fh:
        fh.write(b"HSD1")
        fh.write(struct.pack("<II", f, d))
        fh.write(np.asarray(dic.mat, dtype="<f8").ravel(order="F").tobytes())


def read_dict(path) -> Dictionary:
    (f, d), rest = _read_exact(path, b"HSD1", "<II")
    if f < 1 or d < 1:
        raise DataFormatError(f"{path}: nonpositive dimensions {f}x{d}")
    vals = _payload(path, rest, f * d, np.dtype("<f8"))
    if not np.all(np.isfinite(vals)):
        raise NonFiniteError(f"{path}: dictionary payload contains NaN/Inf")
    mat = matrices.matrix(vals.reshape(f, d, order="F"))
    unit = bool(np.all(np.abs(np.linalg.norm(mat, axis=0) - 1.0) <= 1e-10))
    return Dictionary(mat=mat, unit_columns=unit, provenance="external")
