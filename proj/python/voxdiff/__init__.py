"""Volumetric diffusion super-resolution pipeline.

Volumes are numpy arrays shaped (nz, ny, nx); C order matches the on-disk
x-fastest layout byte for byte.
"""

from voxdiff._core import (
    Checkpoint,
    Error,
    __version__,
    anatomy,
    bar_phantom,
    degrade,
    denormalize,
    merge,
    mtf,
    normalize,
    read_volume,
    sample,
    schedule,
    train,
    write_volume,
)

__all__ = [
    "Checkpoint",
    "Error",
    "__version__",
    "anatomy",
    "bar_phantom",
    "degrade",
    "denormalize",
    "merge",
    "mtf",
    "normalize",
    "read_volume",
    "sample",
    "schedule",
    "train",
    "write_volume",
]
