"""matconvert: turn community .mat hyperspectral data into HSC/HSL files.

Reads MATLAB files (v5/v6/v7 via scipy, v7.3 via h5py) holding a
reflectance cube or a ground-truth class matrix and writes the binary
formats consumed by the hsdemix toolkit.  Values are always cast to
float64 (cubes) or u32 (labels); the voxel order is column-major over
the spatial grid, matching the consumer byte for byte.
"""

from .convert import (
    ConvertError,
    MissingVariableError,
    ShapeError,
    convert_cube,
    convert_labels,
    load_mat_array,
    write_hsc,
    write_hsl,
)

__version__ = "0.1.0"

__all__ = [
    "ConvertError",
    "MissingVariableError",
    "ShapeError",
    "convert_cube",
    "convert_labels",
    "load_mat_array",
    "write_hsc",
    "write_hsl",
]
