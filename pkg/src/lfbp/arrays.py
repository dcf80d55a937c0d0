"""Core array types for shift-variant light-field PSFs and their backprojections.

Conventions
-----------
A light-field PSF array ``H`` is 5-D with dimensions ``(n_s, n_t, n_x, n_y,
n_z)``.  The slice ``H[:, :, x, y, z]`` is the sensor-plane pattern produced
by a point source whose lateral position within the elementary cell (its
*phase*) is ``(x, y)``, at depth ``z``.  A backprojection array ``H'`` has the
same shape; the slice ``H'[:, :, x', y', z]`` is the object-space pattern of
the backprojection of a sensor pixel whose phase within the cell is
``(x', y')``.  So the first two axes hold pixel offsets in ``H`` but voxel
offsets in ``H'``, and the third/fourth axes hold a voxel phase in ``H`` but a
pixel phase in ``H'`` — the shapes coincide, the meanings swap.

Index bookkeeping (the one place it is written down): the mathematical
contract is 1-based, ``s = 1..n_s`` etc.; NumPy storage is 0-based, so
``H(s, t, x, y, z)`` lives at ``data[s-1, t-1, x-1, y-1, z-1]``.  Helper
functions in :mod:`lfbp.transform` take and return 1-based indices; array
code subtracts 1 exactly once, at the indexing site.

Element order is ``s`` fastest, then ``t``, ``x``, ``y``, and ``z`` slowest,
both in memory (Fortran-ordered ndarray) and in the LF5 container.  This
keeps each depth plane contiguous.

All stored values are nonnegative; reductions accumulate in float64.
Arrays are immutable after construction (the underlying buffer is marked
read-only), so they can be shared between threads freely.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidDims


@dataclass(frozen=True)
class Dims5:
    """Validated dimensions of a 5-D light-field array.

    ``n_s, n_t`` are the sensor-pattern extent in pixels, ``n_x, n_y`` the
    elementary-cell extent in voxels (odd by contract), ``n_z`` the number of
    depth planes.
    """

    n_s: int
    n_t: int
    n_x: int
    n_y: int
    n_z: int

    def __post_init__(self) -> None:
        for name in ("n_s", "n_t", "n_x", "n_y", "n_z"):
            v = getattr(self, name)
            if not isinstance(v, (int, np.integer)) or isinstance(v, bool):
                raise InvalidDims(f"{name} must be an integer, got {v!r}")
            object.__setattr__(self, name, int(v))
        if min(self.n_s, self.n_t, self.n_x, self.n_y, self.n_z) < 1:
            raise InvalidDims(f"all dimensions must be >= 1, got {self.shape}")
        if self.n_x % 2 == 0 or self.n_y % 2 == 0:
            raise InvalidDims(
                f"elementary cell must be odd-sized, got n_x={self.n_x}, n_y={self.n_y}")
        if self.n_s < self.n_x or self.n_t < self.n_y:
            raise InvalidDims(
                f"pattern extent must cover the cell: "
                f"(n_s, n_t)=({self.n_s}, {self.n_t}) < (n_x, n_y)=({self.n_x}, {self.n_y})")

    @classmethod
    def unchecked(cls, n_s: int, n_t: int, n_x: int, n_y: int, n_z: int) -> "Dims5":
        """Build without validation (for inspecting foreign files only)."""
        obj = object.__new__(cls)
        for name, v in zip(("n_s", "n_t", "n_x", "n_y", "n_z"),
                           (n_s, n_t, n_x, n_y, n_z)):
            object.__setattr__(obj, name, int(v))
        return obj

    @property
    def shape(self) -> tuple[int, int, int, int, int]:
        return (self.n_s, self.n_t, self.n_x, self.n_y, self.n_z)

    @property
    def n_pixels(self) -> int:
        """Pixels per pattern, n_s * n_t."""
        return self.n_s * self.n_t

    @property
    def n_voxels(self) -> int:
        """Voxels per elementary cell column, n_x * n_y * n_z."""
        return self.n_x * self.n_y * self.n_z


_FLOAT_DTYPES = (np.float32, np.float64)


def _as_field(data: np.ndarray, shape: tuple[int, ...], what: str) -> np.ndarray:
    """Validate and freeze a nonnegative float array of the given shape."""
    arr = np.asarray(data)
    fresh = False
    if arr.dtype not in _FLOAT_DTYPES:
        arr = arr.astype(np.float64, order="F")
        fresh = True
    if arr.shape != shape:
        raise InvalidDims(f"{what} shape {arr.shape} does not match {shape}")
    # NaN fails this comparison too, so it is rejected along with negatives.
    if not bool((arr >= 0).all()):
        raise InvalidDims(f"{what} must be nonnegative")
    if not arr.flags.f_contiguous:
        arr = arr.copy(order="F")
    elif arr.flags.writeable and not fresh:
        # do not freeze a caller-owned buffer in place
        arr = arr.copy(order="F")
    arr.flags.writeable = False
    return arr


class _Field5:
    """Shared machinery of the two 5-D array types."""

    __slots__ = ("dims", "data")

    def __init__(self, dims: Dims5, data: np.ndarray):
        if not isinstance(dims, Dims5):
            raise InvalidDims(f"dims must be a Dims5, got {type(dims).__name__}")
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "data", _as_field(data, dims.shape, type(self).__name__))

    def __setattr__(self, name, value):
        raise AttributeError(f"{type(self).__name__} is immutable")

    @classmethod
    def _wrap(cls, dims: Dims5, data: np.ndarray) -> "_Field5":
        """Adopt a buffer we own (or a read-only view) without copy or checks."""
        obj = object.__new__(cls)
        arr = data if data.flags.f_contiguous else np.asfortranarray(data)
        arr.flags.writeable = False
        object.__setattr__(obj, "dims", dims)
        object.__setattr__(obj, "data", arr)
        return obj

    @property
    def dtype(self) -> np.dtype:
        return self.data.dtype

    def __eq__(self, other) -> bool:
        return (type(self) is type(other) and self.dims == other.dims
                and np.array_equal(self.data, other.data))

    def __repr__(self) -> str:
        return f"{type(self).__name__}(dims={self.dims.shape}, dtype={self.data.dtype})"


class PsfArray(_Field5):
    """Per-voxel-phase sensor patterns H(s, t, x, y, z)."""


class BackprojArray(_Field5):
    """Per-pixel-phase object-space patterns H'(s', t', x', y', z)."""


class Volume:
    """A nonnegative object-space stack g(X, Y, Z)."""

    __slots__ = ("data",)

    def __init__(self, data: np.ndarray):
        arr = np.asarray(data)
        if arr.ndim != 3:
            raise InvalidDims(f"volume must be 3-D, got ndim={arr.ndim}")
        object.__setattr__(self, "data", _as_field(arr, arr.shape, "Volume"))

    def __setattr__(self, name, value):
        raise AttributeError("Volume is immutable")

    @property
    def shape(self) -> tuple[int, int, int]:
        return self.data.shape

    @property
    def n_z(self) -> int:
        return self.data.shape[2]


class Image:
    """A nonnegative sensor image f(S, T)."""

    __slots__ = ("data",)

    def __init__(self, data: np.ndarray):
        arr = np.asarray(data)
        if arr.ndim != 2:
            raise InvalidDims(f"image must be 2-D, got ndim={arr.ndim}")
        object.__setattr__(self, "data", _as_field(arr, arr.shape, "Image"))

    def __setattr__(self, name, value):
        raise AttributeError("Image is immutable")

    @property
    def shape(self) -> tuple[int, int]:
        return self.data.shape


def new_psf(dims: Dims5, fill: float = 0.0, dtype=np.float64) -> PsfArray:
    """Allocate a PSF array with every element set to ``fill``."""
    if fill < 0:
        raise InvalidDims(f"fill value must be nonnegative, got {fill}")
    data = np.full(dims.shape, fill, dtype=dtype, order="F")
    return PsfArray(dims, data)


def _plane_sum(data: np.ndarray, z: int, what: str) -> np.ndarray:
    n_z = data.shape[4]
    if not 1 <= z <= n_z:
        raise InvalidDims(f"{what}: z={z} outside 1..{n_z}")
    plane = data[:, :, :, :, z - 1]
    flat = plane.reshape(plane.shape[0], plane.shape[1], -1)
    # Summing in ascending order makes the result a function of the value
    # multiset alone, independent of how the phases are arranged.  The sums
    # of H and of its rearrangement H' then agree bitwise, not just within
    # rounding.
    return np.sort(flat, axis=-1).sum(axis=-1, dtype=np.float64)


def sum_forward_plane(psf: PsfArray, z: int) -> np.ndarray:
    """Sum each pattern slice of depth plane ``z`` over the voxel phases.

    Returns an ``(n_s, n_t)`` float64 array: the image a uniformly lit cell
    at that depth would project.
    """
    return _plane_sum(psf.data, z, "sum_forward_plane")


def sum_backward_plane(bp: BackprojArray, z: int) -> np.ndarray:
    """Sum each object-space slice of depth plane ``z`` over the pixel phases.

    Returns an ``(n_s, n_t)`` float64 array; equals the 180-degree rotation
    of :func:`sum_forward_plane` of the source PSF, exactly.
    """
    return _plane_sum(bp.data, z, "sum_backward_plane")


def rotate180_lateral(plane: np.ndarray) -> np.ndarray:
    """Rotate a 2-D plane by 180 degrees (flip both axes)."""
    plane = np.asarray(plane)
    if plane.ndim != 2:
        raise InvalidDims(f"rotate180_lateral expects a 2-D plane, got ndim={plane.ndim}")
    return plane[::-1, ::-1].copy()
