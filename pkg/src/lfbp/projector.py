"""Forward projection, backprojection and Richardson-Lucy deconvolution.

A voxel at grid position (X, Y, Z) contributes its pattern
``H[:, :, phase(X), phase(Y), Z]`` to the image, centred so that the
pattern's middle element lands on the pixel directly under the voxel;
contributions past the image border are dropped.  Backprojection is
available in two algebraically identical forms: the literal adjoint of the
forward operator, and the per-pixel stamp using the rearranged array, which
is the fast path used by the deconvolution loop.

All reductions accumulate in float64 regardless of the stored dtype.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .arrays import BackprojArray, Image, PsfArray, Volume
from .errors import DimMismatch, NonFiniteInput

log = logging.getLogger(__name__)


def pattern_centre(n: int) -> int:
    """Pattern coordinate of the zero-offset element (pixel under the voxel).

    The exact middle for odd sizes; one past the half for even sizes, which
    pairs with the even-size conventions of the rearrangement.
    """
    return (n + 1) // 2 if n % 2 else n // 2 + 1


def _windows(n_grid: int, n_pat: int, centre: int):
    """Clipped pattern windows for every grid coordinate on one axis.

    Pattern row ``target - source + centre`` pairs grid rows with pattern
    rows; for 0-based source index ``i`` the targets ``lo[i]:hi[i]`` carry
    pattern rows ``a0[i]:a0[i] + hi[i] - lo[i]``.  Serves both directions:
    pixels covered by a voxel's pattern, and voxels covered by a pixel's.
    """
    idx = np.arange(n_grid)
    lo = np.maximum(idx + 1 - centre, 0)            # first target, clipped
    hi = np.minimum(idx + n_pat - centre + 1, n_grid)   # one past the last
    a0 = lo - idx + centre - 1                      # pattern row matching lo
    return lo, hi, a0


def _check_finite(name: str, data: np.ndarray) -> None:
    if not np.isfinite(data).all():
        raise NonFiniteInput(f"{name} contains NaN or Inf")


def forward_project(psf: PsfArray, volume: Volume) -> Image:
    """Project a volume through the PSF array onto the sensor grid.

    The image has the same lateral size as the volume; the volume's depth
    must match the PSF's.
    """
    n_s, n_t, n_x, n_y, n_z = psf.dims.shape
    nvx, nvy, nvz = volume.shape
    if nvz != n_z:
        raise DimMismatch(f"volume has {nvz} depth planes, PSF array has {n_z}")
    H = psf.data
    g = volume.data
    s_lo, s_hi, a0 = _windows(nvx, n_s, pattern_centre(n_s))
    t_lo, t_hi, b0 = _windows(nvy, n_t, pattern_centre(n_t))
    out = np.zeros((nvx, nvy), dtype=np.float64)
    for z in range(n_z):
        for x in range(nvx):
            px = x % n_x
            sl, sh, a = s_lo[x], s_hi[x], a0[x]
            for y in range(nvy):
                w = g[x, y, z]
                if w == 0.0:
                    continue
                tl, th, b = t_lo[y], t_hi[y], b0[y]
                out[sl:sh, tl:th] += w * H[a:a + sh - sl, b:b + th - tl,
                                           px, y % n_y, z]
    return Image(out)


def backproject_adjoint(psf: PsfArray, image: Image) -> Volume:
    """Adjoint of :func:`forward_project`: gather per voxel through ``H``."""
    n_s, n_t, n_x, n_y, n_z = psf.dims.shape
    nvx, nvy = image.shape
    f = image.data.astype(np.float64, copy=False)
    s_lo, s_hi, a0 = _windows(nvx, n_s, pattern_centre(n_s))
    t_lo, t_hi, b0 = _windows(nvy, n_t, pattern_centre(n_t))
    out = np.zeros((nvx, nvy, n_z), dtype=np.float64)
    for z in range(n_z):
        for x in range(nvx):
            px = x % n_x
            sl, sh, a = s_lo[x], s_hi[x], a0[x]
            for y in range(nvy):
                tl, th, b = t_lo[y], t_hi[y], b0[y]
                pat = psf.data[a:a + sh - sl, b:b + th - tl, px, y % n_y, z]
                out[x, y, z] = np.sum(f[sl:sh, tl:th] * pat, dtype=np.float64)
    return Volume(out)


def backproject(bp: BackprojArray, image: Image) -> Volume:
    """Backproject by stamping each pixel's voxel pattern from ``H'``.

    Equal to :func:`backproject_adjoint` up to float rounding; one stamp per
    pixel instead of one gather per voxel, and the natural form for the
    deconvolution inner loop.
    """
    n_s, n_t, n_x, n_y, n_z = bp.dims.shape
    npx, npy = image.shape
    f = image.data
    x_lo, x_hi, a0 = _windows(npx, n_s, pattern_centre(n_s))
    y_lo, y_hi, b0 = _windows(npy, n_t, pattern_centre(n_t))
    out = np.zeros((npx, npy, n_z), dtype=np.float64)
    for s in range(npx):
        ps = s % n_x
        xl, xh, a = x_lo[s], x_hi[s], a0[s]
        for t in range(npy):
            w = f[s, t]
            if w == 0.0:
                continue
            yl, yh, b = y_lo[t], y_hi[t], b0[t]
            out[xl:xh, yl:yh, :] += w * bp.data[a:a + xh - xl, b:b + yh - yl,
                                                ps, t % n_y, :]
    return Volume(out)


def normalizer(bp: BackprojArray, image_shape: tuple[int, int]) -> Volume:
    """Backprojection of an all-ones image: per-voxel total sensitivity."""
    ones = Image(np.ones(image_shape, dtype=np.float64))
    return backproject(bp, ones)


def _safe_divide(num: np.ndarray, den: np.ndarray, eps: float) -> np.ndarray:
    """Elementwise num/den with entries below ``eps * den.max()`` zeroed."""
    out = np.zeros(num.shape, dtype=np.float64)
    peak = float(den.max()) if den.size else 0.0
    if peak <= 0.0:
        return out
    ok = den >= eps * peak
    if eps * peak == 0.0:
        ok &= den > 0.0
    np.divide(num, den, out=out, where=ok)
    return out


@dataclass
class RlState:
    """Result of a Richardson-Lucy run.

    ``mse_history[k]`` is the mean squared residual between the measured
    image and the reprojection of the estimate after update ``k + 1``.
    """
    estimate: Volume
    iterations: int
    normalizer: Volume
    mse_history: list[float] = field(default_factory=list)
    dead_voxels: int = 0


def rl_run(psf: PsfArray, bp: BackprojArray, image: Image,
           iterations: int = 20, eps: float = 1e-12) -> RlState:
    """Richardson-Lucy deconvolution of ``image`` against the PSF pair.

    Multiplicative updates from an all-ones start; divisions are safeguarded
    with ``eps`` so voxels the system never senses stay at zero instead of
    blowing up.  ``psf`` and ``bp`` must describe the same geometry (``bp``
    normally comes from :func:`lfbp.transform.compute_backprojection`).
    """
    if psf.dims != bp.dims:
        raise DimMismatch(
            f"PSF dims {psf.dims.shape} != backprojection dims {bp.dims.shape}")
    if iterations < 1:
        raise ValueError(f"iterations must be >= 1, got {iterations}")
    _check_finite("image", image.data)
    _check_finite("psf", psf.data)
    _check_finite("backprojection", bp.data)

    f = image.data.astype(np.float64, copy=False)
    norm = normalizer(bp, image.shape)
    dead = int(np.count_nonzero(norm.data < eps * max(float(norm.data.max()), 0.0)))
    if dead:
        log.warning("%d voxels receive no sensor coverage and stay zero", dead)

    n_z = psf.dims.n_z
    g = np.ones((image.shape[0], image.shape[1], n_z), dtype=np.float64)
    history: list[float] = []
    for _ in range(iterations):
        reproj = forward_project(psf, Volume(g))
        ratio = _safe_divide(f, reproj.data, eps)
        back = backproject(bp, Image(ratio))
        g = g * _safe_divide(back.data, norm.data, eps)
        resid = forward_project(psf, Volume(g))
        history.append(float(np.mean((f - resid.data) ** 2, dtype=np.float64)))
    return RlState(Volume(g), iterations, norm, history, dead)
