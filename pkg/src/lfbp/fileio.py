"""LF5 container I/O and PGM export.

LF5 layout (all multi-byte fields little-endian):

========  =====  =========================================
offset    size   field
========  =====  =========================================
0         4      magic ``b"LF5D"``
4         4      format version, u32, currently 1
8         1      element type: 1 = float32, 2 = float64
9         3      reserved, must be zero
12        20     dims, five u32: n_s, n_t, n_x, n_y, n_z
32        ...    payload, s fastest then t, x, y, z slowest
========  =====  =========================================

Round trips are bit-exact for both element types.  Images and volumes reuse
the same container with degenerate dims — an image ``(N_S, N_T)`` is stored
as ``(N_S, N_T, 1, 1, 1)`` and a volume ``(N_X, N_Y, N_Z)`` as
``(N_X, N_Y, 1, 1, N_Z)`` — so there is one parser and one writer.
"""
from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .arrays import BackprojArray, Dims5, Image, PsfArray, Volume, _Field5
from .errors import DimsError, FormatError, InvalidDims, IoError, NonFiniteInput

MAGIC = b"LF5D"
VERSION = 1
_HEADER = struct.Struct("<4sIB3s5I")

_DTYPE_CODES = {1: np.dtype("<f4"), 2: np.dtype("<f8")}
_CODE_FOR_KIND = {"f4": 1, "f8": 2}


def _dtype_code(dtype: np.dtype) -> int:
    try:
        return _CODE_FOR_KIND[np.dtype(dtype).str[1:]]
    except KeyError:
        raise FormatError(f"unsupported element dtype {dtype}") from None


def save(array: PsfArray | BackprojArray, path) -> None:
    """Write a 5-D array to ``path`` as an LF5 container."""
    if not isinstance(array, _Field5):
        raise FormatError(f"save expects a PsfArray or BackprojArray, got {type(array).__name__}")
    dims = array.dims
    code = _dtype_code(array.dtype)
    header = _HEADER.pack(MAGIC, VERSION, code, b"\x00\x00\x00",
                          dims.n_s, dims.n_t, dims.n_x, dims.n_y, dims.n_z)
    payload = np.asarray(array.data, dtype=_DTYPE_CODES[code]).ravel(order="F")
    try:
        with open(path, "wb") as fh:
            fh.write(header)
            payload.tofile(fh)
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc


def read_lf5(path) -> tuple[tuple[int, int, int, int, int], np.ndarray]:
    """Parse an LF5 file into raw dims and a Fortran-ordered ndarray.

    Performs format validation only; dimension semantics are checked by the
    typed loaders.
    """
    try:
        blob = Path(path).read_bytes()
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc
    if len(blob) < _HEADER.size:
        raise FormatError(f"{path}: truncated header ({len(blob)} bytes)")
    magic, version, code, reserved, *dims = _HEADER.unpack_from(blob)
    if magic != MAGIC:
        raise FormatError(f"{path}: bad magic {magic!r}")
    if version != VERSION:
        raise FormatError(f"{path}: unsupported version {version}")
    if code not in _DTYPE_CODES:
        raise FormatError(f"{path}: unknown element type code {code}")
    if reserved != b"\x00\x00\x00":
        raise FormatError(f"{path}: reserved bytes not zero")
    dtype = _DTYPE_CODES[code]
    count = int(np.prod(dims, dtype=np.int64))
    expect = _HEADER.size + count * dtype.itemsize
    if len(blob) != expect:
        raise FormatError(f"{path}: payload is {len(blob) - _HEADER.size} bytes, "
                          f"expected {expect - _HEADER.size}")
    flat = np.frombuffer(blob, dtype=dtype, offset=_HEADER.size)
    data = flat.reshape(tuple(dims), order="F")
    return tuple(dims), data


def _load_field(path, cls, allow_invalid_dims: bool):
    raw_dims, data = read_lf5(path)
    try:
        dims = Dims5(*raw_dims)
    except InvalidDims as exc:
        if not allow_invalid_dims:
            raise DimsError(f"{path}: {exc}") from exc
        dims = Dims5.unchecked(*raw_dims)
        return cls._wrap(dims, data)
    return cls(dims, data)


def load_psf(path, allow_invalid_dims: bool = False) -> PsfArray:
    """Load an LF5 file as a PSF array.

    With ``allow_invalid_dims`` set, files whose header violates the
    dimension contract are still returned (unvalidated) for inspection.
    """
    return _load_field(path, PsfArray, allow_invalid_dims)


def load_backprojection(path, allow_invalid_dims: bool = False) -> BackprojArray:
    """Load an LF5 file as a backprojection array."""
    return _load_field(path, BackprojArray, allow_invalid_dims)


# ---------------------------------------------------------------------------
# degenerate-dims wrappers for images and volumes


def save_image(image: Image, path) -> None:
    n_s, n_t = image.shape
    dims = Dims5(n_s, n_t, 1, 1, 1)
    save(PsfArray(dims, image.data.reshape(dims.shape, order="F")), path)


def load_image(path) -> Image:
    raw_dims, data = read_lf5(path)
    if raw_dims[2:] != (1, 1, 1):
        raise DimsError(f"{path}: dims {raw_dims} are not an image encoding (N_S, N_T, 1, 1, 1)")
    return Image(data.reshape(raw_dims[:2], order="F"))


def save_volume(volume: Volume, path) -> None:
    n_x, n_y, n_z = volume.shape
    dims = Dims5(n_x, n_y, 1, 1, n_z)
    save(PsfArray(dims, volume.data.reshape(dims.shape, order="F")), path)


def load_volume(path) -> Volume:
    raw_dims, data = read_lf5(path)
    if raw_dims[2:4] != (1, 1):
        raise DimsError(f"{path}: dims {raw_dims} are not a volume encoding (N_X, N_Y, 1, 1, N_Z)")
    shape = (raw_dims[0], raw_dims[1], raw_dims[4])
    return Volume(data.reshape(shape, order="F"))


# ---------------------------------------------------------------------------
# PGM export


def export_pgm(plane: np.ndarray, path) -> None:
    """Write a 2-D plane as a 16-bit binary PGM (P5) image.

    The maximum value maps to 65535 with linear scaling and round-half-up;
    an all-zero plane stays all zero.
    """
    plane = np.asarray(plane, dtype=np.float64)
    if plane.ndim != 2:
        raise InvalidDims(f"export_pgm expects a 2-D plane, got ndim={plane.ndim}")
    if not np.isfinite(plane).all():
        raise NonFiniteInput("export_pgm: plane contains non-finite values")
    if (plane < 0).any():
        raise InvalidDims("export_pgm: plane contains negative values")
    peak = plane.max()
    if peak == 0:
        pixels = np.zeros(plane.shape, dtype=">u2")
    else:
        pixels = np.floor(plane * (65535.0 / peak) + 0.5).astype(">u2")
    height, width = plane.shape
    header = f"P5\n{width} {height}\n65535\n".encode("ascii")
    try:
        with open(path, "wb") as fh:
            fh.write(header)
            fh.write(pixels.tobytes(order="C"))
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc
