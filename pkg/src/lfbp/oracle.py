"""Brute-force backprojection reference built on the forward model.

This module computes the backprojection array the slow, literal way: it
simulates the forward projection of every voxel on a padded virtual grid and
records, per reference pixel, which pattern element each voxel contributes.
No index identities from :mod:`lfbp.transform` are used; agreement between
the two implementations is what the verification tools check, so this code
must stay independent of the rearrangement formulas.

Runtime scales with ``n_s * n_t * n_x * n_y * n_z`` element visits in plain
Python and is orders of magnitude slower than the rearrangement; the
benchmark harness uses it as the stand-in for a conventional implementation.
"""
from __future__ import annotations

import numpy as np

from .arrays import BackprojArray, PsfArray
from .errors import InvalidDims
from .projector import pattern_centre


def oracle_backprojection(psf: PsfArray, extra_padding: int = 0) -> BackprojArray:
    """Backprojection array by explicit forward-model bookkeeping.

    For each depth plane: one reference pixel is chosen per pixel phase, a
    voxel grid padded by at least ``ceil(n_s/2) + n_x`` (analogously in t/y)
    is walked, and the pattern element each voxel lands on the reference
    pixel is stored at the slot given by the voxel's offset from that pixel.
    ``extra_padding`` widens the grid beyond the minimum; the result must
    not depend on it.

    Two constants fix the storage convention.  The offset-to-slot centre is
    chosen so the voxel directly under the reference pixel maps to the
    middle slot (odd sizes); for even sizes, which have no middle, centre
    and reference-pixel anchor are pinned one pixel low — fixed once against
    the rearrangement and kept as part of the array contract.
    """
    if extra_padding < 0:
        raise InvalidDims(f"extra_padding must be >= 0, got {extra_padding}")
    dims = psf.dims
    n_s, n_t, n_x, n_y, n_z = dims.shape
    c_s, c_t = pattern_centre(n_s), pattern_centre(n_t)
    # slot = voxel offset + storage centre
    store_s = c_s if n_s % 2 else n_s - c_s
    store_t = c_t if n_t % 2 else n_t - c_t
    pad_s = (n_s + 1) // 2 + n_x + extra_padding
    pad_t = (n_t + 1) // 2 + n_y + extra_padding
    # reference pixels sit at B + phase, with B a multiple of the cell so
    # that pixel B + p has phase p; shifted one low on even pixel axes
    base_s = n_x * (pad_s // n_x + 1) - (0 if n_s % 2 else 1)
    base_t = n_y * (pad_t // n_y + 1) - (0 if n_t % 2 else 1)
    grid_s = range(base_s + 1 - pad_s, base_s + n_x + pad_s + 1)
    grid_t = range(base_t + 1 - pad_t, base_t + n_y + pad_t + 1)

    H = psf.data
    out = np.zeros(dims.shape, dtype=psf.dtype, order="F")
    for z in range(n_z):
        for xp in range(1, n_x + 1):
            ref_s = base_s + xp
            for yp in range(1, n_y + 1):
                ref_t = base_t + yp
                for vx in grid_s:
                    row = ref_s - vx + c_s          # pattern row hitting the pixel
                    if row < 1 or row > n_s:
                        continue
                    slot_s = vx - ref_s + store_s   # stored voxel offset
                    if slot_s < 1 or slot_s > n_s:
                        continue
                    phase_x = (vx - 1) % n_x + 1
                    for vy in grid_t:
                        col = ref_t - vy + c_t
                        if col < 1 or col > n_t:
                            continue
                        slot_t = vy - ref_t + store_t
                        if slot_t < 1 or slot_t > n_t:
                            continue
                        phase_y = (vy - 1) % n_y + 1
                        out[slot_s - 1, slot_t - 1, xp - 1, yp - 1, z] = \
                            H[row - 1, col - 1, phase_x - 1, phase_y - 1, z]
    return BackprojArray._wrap(dims, out)
