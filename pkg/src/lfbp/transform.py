"""Backprojection arrays by pure index rearrangement.

The forward model tiles the sensor with copies of the elementary cell: a
voxel of phase ``(x, y)`` always contributes the same pattern ``H(:, :, x,
y, z)``, shifted to its position.  Every element a pixel receives during
forward projection is therefore already present in ``H``, and the
backprojection array ``H'`` — the per-pixel-phase collection of those
elements — can be computed without arithmetic, by copying each element of
``H`` to one position in ``H'``.

Per axis the mapping works on a window of ``n_s`` lattice slices.  A slice
counter ``m`` runs over that window; ``slice_index`` re-centres it,
``wrap_phase`` folds it periodically into a source phase ``x``, and
``target_cell`` yields the pixel phase ``x'`` the copy belongs to, while
``mirror_index`` reverses the pattern coordinate (backprojected patterns
point from the pixel back into the object, hence the 180-degree flip).  The
window is extended far enough that every target phase is produced for every
pattern coordinate; a window clipped to ``m = 1..n_s`` would leave the
outermost pattern rows of the off-centre phases unassigned, breaking both
reversibility and the exactness of the adjoint identity.

For odd ``n_s, n_t`` the mapping is a bijection (and an involution:
applying it twice is the identity).  Even pixel dimensions lack a central
pixel; the mirror drops coordinate ``n_s`` (or ``n_t``), the transform is
lossy, and the inverse is refused.
"""
from __future__ import annotations

import logging
from functools import lru_cache

import numpy as np

from .arrays import BackprojArray, Dims5, PsfArray
from .errors import EvenPixelDims, InvalidDims

log = logging.getLogger(__name__)


def slice_index(m: int, n_pix: int, n_cell: int) -> int:
    """Re-centre lattice-slice counter ``m`` on the periodic tiling.

    The window of ``n_pix`` slices extends the ``n_cell`` core slices by
    ``n_pix - n_cell`` repeated ones; the returned index is relative to the
    core (and may be <= 0 or > n_cell before wrapping).
    """
    return m - (n_pix - n_cell) // 2


def wrap_phase(alpha: int, n_cell: int) -> int:
    """Fold a re-centred slice index periodically into the phase range 1..n_cell."""
    if alpha > n_cell:
        return alpha - ((alpha - 1) // n_cell) * n_cell
    if alpha <= 0:
        return alpha + (-((alpha - 1) // n_cell)) * n_cell
    return alpha


def target_cell(s: int, alpha: int, n_pix: int, n_cell: int) -> int:
    """Pixel phase receiving the copy of pattern row ``s`` from slice ``alpha``.

    Values outside ``1..n_cell`` mean the combination belongs to a different
    window position and produces no assignment.
    """
    return s - n_cell + alpha + (n_cell - 1) // 2 - (n_pix - n_cell) // 2


def mirror_index(s: int, n_pix: int) -> int:
    """Reversed pattern coordinate; 0 (no assignment) for s = n_pix on even sizes."""
    return n_pix - s + (n_pix % 2)


@lru_cache(maxsize=64)
def phase_pair_table(n_pix: int, n_cell: int) -> np.ndarray:
    """Source phase for every (pattern coordinate, target phase) pair, one axis.

    Returns an ``(n_pix, n_cell)`` array ``tab`` with ``tab[s-1, xp-1]`` the
    1-based source phase ``x`` whose element ``H(s, x)`` lands in
    ``H'(mirror_index(s), xp)``.  Row ``s`` is built by walking the slice
    window from the first slice whose target phase is 1; each row is a
    cyclic permutation of ``1..n_cell``.
    """
    if n_cell % 2 == 0 or n_cell < 1 or n_pix < n_cell:
        raise InvalidDims(f"invalid axis pair n_pix={n_pix}, n_cell={n_cell}")
    two_d = 2 * ((n_pix - n_cell) // 2)
    centre = (n_cell - 1) // 2
    tab = np.empty((n_pix, n_cell), dtype=np.intp)
    for s in range(1, n_pix + 1):
        m_first = 1 - s + n_cell + two_d - centre
        for k, m in enumerate(range(m_first, m_first + n_cell)):
            alpha = slice_index(m, n_pix, n_cell)
            xp = target_cell(s, alpha, n_pix, n_cell)
            assert xp == k + 1
            tab[s - 1, k] = wrap_phase(alpha, n_cell)
    tab.flags.writeable = False
    return tab


def _source_pixels(n_pix: int) -> np.ndarray:
    """0-based source pattern coordinate per valid target coordinate."""
    n_valid = n_pix - (1 - n_pix % 2)
    return np.asarray([mirror_index(sp, n_pix) - 1 for sp in range(1, n_valid + 1)],
                      dtype=np.intp)


def dropped_source_count(dims: Dims5) -> int:
    """Source elements with no target under the mapping (0 for odd n_s, n_t)."""
    v_s = dims.n_s - (1 - dims.n_s % 2)
    v_t = dims.n_t - (1 - dims.n_t % 2)
    return (dims.n_s * dims.n_t - v_s * v_t) * dims.n_x * dims.n_y * dims.n_z


def compute_backprojection(psf: PsfArray) -> BackprojArray:
    """Rearrange a PSF array into its backprojection array.

    Every element of the result is either an exact copy of one ``H``
    element or 0 (possible only for even ``n_s``/``n_t``, where the mirror
    drops one pattern row/column).  All depth planes share the lateral
    mapping and are copied together.
    """
    dims = psf.dims
    S = _source_pixels(dims.n_s)
    T = _source_pixels(dims.n_t)
    X = phase_pair_table(dims.n_s, dims.n_x)[S] - 1   # (v_s, n_x)
    Y = phase_pair_table(dims.n_t, dims.n_y)[T] - 1   # (v_t, n_y)
    out = np.zeros(dims.shape, dtype=psf.dtype, order="F")
    out[:len(S), :len(T)] = psf.data[S[:, None, None, None],
                                     T[None, :, None, None],
                                     X[:, None, :, None],
                                     Y[None, :, None, :], :]
    dropped = dropped_source_count(dims)
    if dropped:
        log.warning("even pixel dims %s: %d source elements have no target and were dropped",
                    (dims.n_s, dims.n_t), dropped)
    return BackprojArray._wrap(dims, out)


def compute_psf_from_backprojection(bp: BackprojArray) -> PsfArray:
    """Invert the rearrangement; exact for odd pixel dims, refused otherwise."""
    dims = bp.dims
    if dims.n_s % 2 == 0 or dims.n_t % 2 == 0:
        raise EvenPixelDims(
            f"inverse undefined for even pixel dims (n_s, n_t)=({dims.n_s}, {dims.n_t}): "
            "the forward mapping drops elements")
    S = _source_pixels(dims.n_s)
    T = _source_pixels(dims.n_t)
    X = phase_pair_table(dims.n_s, dims.n_x)[S] - 1
    Y = phase_pair_table(dims.n_t, dims.n_y)[T] - 1
    out = np.empty(dims.shape, dtype=bp.dtype, order="F")
    # same index set as the forward mapping, source and target exchanged
    out[S[:, None, None, None],
        T[None, :, None, None],
        X[:, None, :, None],
        Y[None, :, None, :], :] = bp.data
    return PsfArray._wrap(dims, out)
