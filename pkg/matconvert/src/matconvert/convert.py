"""Readers for .mat arrays and writers for the HSC/HSL binary formats.

The writers implement the target formats directly (little-endian magic +
u32 header + payload) so the conversion can be verified against the
consumer's own reader as an independent round trip.
"""

import struct
import warnings

import numpy as np
import scipy.io


class ConvertError(Exception):
    """Base error for conversion failures."""


class MissingVariableError(ConvertError):
    """Requested variable not present in the .mat file."""


class ShapeError(ConvertError):
    """Array has the wrong dimensionality or mismatched dimensions."""


def _load_hdf5_matlab(path, variable_name):
    # MATLAB v7.3 is HDF5 with reversed axis order
    import h5py

    with h5py.File(path, "r") as fh:
        keys = [k for k in fh.keys() if not k.startswith("#")]
        if variable_name not in keys:
            raise MissingVariableError(
                f"variable {variable_name!r} not in {path}; available: {sorted(keys)}"
            )
        arr = np.asarray(fh[variable_name])
    return arr.transpose(tuple(reversed(range(arr.ndim))))


def load_mat_array(path, variable_name) -> np.ndarray:
    """Numeric array ``variable_name`` from a .mat file (any common version)."""
    try:
        payload = scipy.io.loadmat(path)
    except (NotImplementedError, ValueError) as exc:
        # v7.3 files are HDF5 containers scipy refuses; try that route
        try:
            return _load_hdf5_matlab(path, variable_name)
        except (OSError, ImportError):
            raise ConvertError(f"cannot read {path}: {exc}") from exc
    data = {k: v for k, v in payload.items() if not k.startswith("__")}
    if variable_name not in data:
        raise MissingVariableError(
            f"variable {variable_name!r} not in {path}; available: {sorted(data)}"
        )
    return np.asarray(data[variable_name])


def write_hsc(arr: np.ndarray, path) -> int:
    """Write an (n, m, f) cube as an HSC file; returns bytes written.

    Payload is voxel-major: voxels walk the spatial grid column-major
    (p = col * n + row), each contributing its f band values.
    """
    n, m, f = arr.shape
    voxels = np.ascontiguousarray(
        arr.reshape(n * m, f, order="F"), dtype="<f8"
    )
    blob = b"HSC1" + struct.pack("<III", n, m, f) + voxels.tobytes()
    with open(path, "wb") as fh:
        fh.write(blob)
    return len(blob)


def write_hsl(ids: np.ndarray, path) -> int:
    """Write an (n, m) class-id matrix as an HSL file; returns bytes written."""
    n, m = ids.shape
    flat = np.ascontiguousarray(ids.ravel(order="F"), dtype="<u4")
    blob = b"HSL1" + struct.pack("<II", n, m) + flat.tobytes()
    with open(path, "wb") as fh:
        fh.write(blob)
    return len(blob)


def convert_cube(mat_path, variable_name, out_path) -> dict:
    """Convert a 3-D reflectance array to an HSC file.

    Returns a summary with the dimensions and output size.  Values are
    cast to float64 regardless of the stored dtype.
    """
    arr = load_mat_array(mat_path, variable_name)
    if arr.ndim != 3:
        raise ShapeError(
            f"variable {variable_name!r} has shape {arr.shape}; expected a 3-D cube"
        )
    arr = arr.astype(np.float64)
    if not np.all(np.isfinite(arr)):
        raise ConvertError(f"variable {variable_name!r} contains NaN/Inf")
    n, m, f = arr.shape
    size = write_hsc(arr, out_path)
    return {
        "variable": variable_name,
        "n": n,
        "m": m,
        "f": f,
        "out": str(out_path),
        "bytes": size,
    }


def convert_labels(mat_path, variable_name, out_path, check_against=None) -> dict:
    """Convert a 2-D class matrix to an HSL file; reports per-class counts.

    ``check_against`` names an HSC file whose spatial dimensions the
    labels must match.
    """
    arr = load_mat_array(mat_path, variable_name)
    if arr.ndim != 2:
        raise ShapeError(
            f"variable {variable_name!r} has shape {arr.shape}; expected a 2-D matrix"
        )
    if not np.issubdtype(arr.dtype, np.number):
        raise ConvertError(f"variable {variable_name!r} is not numeric")
    ids = np.rint(np.asarray(arr, dtype=np.float64)).astype(np.int64)
    if np.any(ids < 0):
        raise ConvertError("negative class ids are not representable")

    if check_against is not None:
        n, m = _hsc_spatial_dims(check_against)
        if (n, m) != ids.shape:
            raise ShapeError(
                f"labels are {ids.shape} but {check_against} holds a {n}x{m} grid"
            )

    values, counts = np.unique(ids, return_counts=True)
    per_class = {int(v): int(c) for v, c in zip(values, counts)}
    labeled = sum(c for v, c in per_class.items() if v != 0)
    if labeled == 0:
        warnings.warn("no labeled voxels: every class id is 0")

    n, m = ids.shape
    size = write_hsl(ids, out_path)
    return {
        "variable": variable_name,
        "n": n,
        "m": m,
        "classes": per_class,
        "labeled_voxels": labeled,
        "out": str(out_path),
        "bytes": size,
    }


def _hsc_spatial_dims(path):
    with open(path, "rb") as fh:
        head = fh.read(16)
    if len(head) < 16 or head[:4] != b"HSC1":
        raise ConvertError(f"{path} is not an HSC file")
    n, m, _ = struct.unpack("<III", head[4:16])
    return n, m
