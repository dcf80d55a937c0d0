"""Synthetic PSF arrays: lenslet-array spot models and random fills.

The spot model is deliberately simple — each lenslet inside a
defocus-dependent aperture disc images a point source as a Gaussian spot on
the sensor — but it reproduces the structure that matters for the
rearrangement and projection code: per-phase pixel patterns that tile
periodically with the lenslet pitch, grow with defocus, and differ between
lens types on multi-focal arrays.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .arrays import Dims5, PsfArray
from .errors import InvalidDims, LayoutMismatch, SynthesisError
from .projector import pattern_centre

_KINDS = ("rect", "hex", "hex3")


def _odd(value: float) -> int:
    """Nearest odd integer (ties and even roundings bump upward)."""
    n = round(value)
    return n if n % 2 else n + 1


@dataclass(frozen=True)
class MlaLayout:
    """Periodic lenslet layout with an odd-sized unit cell in sensor pixels.

    Build through :meth:`rect`, :meth:`hexagonal` or :meth:`hex3` rather
    than the constructor; ``cell`` is derived from the pitch there.  One
    lenslet always sits at the centre pixel of the cell.
    """
    kind: str
    pitch: float
    cell: tuple[int, int]
    lens_types: int = 1

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise InvalidDims(f"unknown layout kind {self.kind!r}")
        if self.pitch <= 0:
            raise InvalidDims(f"pitch must be positive, got {self.pitch}")
        cx, cy = self.cell
        if cx < 1 or cy < 1 or cx % 2 == 0 or cy % 2 == 0:
            raise InvalidDims(f"cell must be odd and positive, got {self.cell}")

    @classmethod
    def rect(cls, pitch: float) -> "MlaLayout":
        """Square lattice, one lenslet per cell."""
        return cls("rect", pitch, (_odd(pitch), _odd(pitch)))

    @classmethod
    def hexagonal(cls, pitch: float) -> "MlaLayout":
        """Hexagonal lattice: row spacing ``sqrt(3)/2 * pitch``, alternate
        rows shifted by half a pitch; two lenslets per cell."""
        return cls("hex", pitch, (_odd(pitch), _odd(math.sqrt(3.0) * pitch)))

    @classmethod
    def hex3(cls, pitch: float) -> "MlaLayout":
        """Hexagonal lattice with three lens types cycling along each row;
        the cell spans three pitches so the type pattern tiles exactly."""
        return cls("hex3", pitch, (_odd(3.0 * pitch), _odd(math.sqrt(3.0) * pitch)),
                   lens_types=3)

    def spots(self, centre: tuple[float, float],
              radius: float) -> list[tuple[float, float, int]]:
        """Lenslets within ``radius`` of ``centre``, as offsets from it.

        Returns ``(du, dv, lens_type)`` triples.  The nearest lenslet is
        always included even when the disc is empty, so every point has at
        least one spot.
        """
        cu, cv = centre
        cx, cy = self.cell
        u_anchor, v_anchor = (cx + 1) / 2.0, (cy + 1) / 2.0
        u_step = cx / 3.0 if self.kind == "hex3" else float(cx)
        v_step = float(cy) if self.kind == "rect" else cy / 2.0
        staggered = self.kind != "rect"

        reach = radius + 2.0 * max(u_step, v_step)
        j_lo = math.floor((cv - reach - v_anchor) / v_step)
        j_hi = math.ceil((cv + reach - v_anchor) / v_step)
        inside: list[tuple[float, float, int]] = []
        nearest = None
        nearest_d2 = math.inf
        for j in range(j_lo, j_hi + 1):
            dv = v_anchor + j * v_step - cv
            shift = (j % 2) * u_step / 2.0 if staggered else 0.0
            i_lo = math.floor((cu - reach - u_anchor - shift) / u_step)
            i_hi = math.ceil((cu + reach - u_anchor - shift) / u_step)
            for i in range(i_lo, i_hi + 1):
                du = u_anchor + shift + i * u_step - cu
                lens = (i + 2 * (j % 2)) % 3 if self.kind == "hex3" else 0
                d2 = du * du + dv * dv
                if d2 <= radius * radius:
                    inside.append((du, dv, lens))
                if d2 < nearest_d2:
                    nearest_d2 = d2
                    nearest = (du, dv, lens)
        if not inside and nearest is not None:
            inside.append(nearest)
        return inside


@dataclass(frozen=True)
class SpotOptics:
    """Tuning knobs for the Gaussian spot model.

    The aperture disc radius grows linearly with distance from the focal
    plane, ``0.55 * pitch + pitch * z_step * |z - z0| / fnumber``, and spot
    width as ``sigma * (1 + sigma_gain * |z - z0|)``.  ``focal_plane`` is
    the 1-based in-focus depth index; ``None`` means the middle plane, and
    values outside ``1..n_z`` are allowed — the stack then sits entirely to
    one side of focus, so no two stored planes share a defocus distance.
    ``type_scale`` multiplies the spot width per lens type on hex3 layouts.
    """
    sigma: float = 0.7
    fnumber: float = 8.0
    z_step: float = 2.0
    sigma_gain: float = 0.25
    focal_plane: int | None = None
    type_scale: tuple[float, ...] = (1.0, 0.7, 1.4)

    def __post_init__(self):
        if self.sigma <= 0 or self.fnumber <= 0 or self.z_step < 0:
            raise InvalidDims("sigma and fnumber must be positive, z_step >= 0")
        if self.sigma_gain < 0 or any(s <= 0 for s in self.type_scale):
            raise InvalidDims("sigma_gain must be >= 0 and type_scale positive")


def synth_psf(layout: MlaLayout, dims: Dims5,
              optics: SpotOptics | None = None,
              dtype=np.float64) -> PsfArray:
    """Synthesize a PSF array for ``layout`` with the given dimensions.

    ``(n_x, n_y)`` must equal the layout cell.  Every per-phase pattern is
    normalized to unit sum, so forward projection conserves total intensity
    away from the image border.
    """
    if (dims.n_x, dims.n_y) != layout.cell:
        raise LayoutMismatch(
            f"array cell ({dims.n_x}, {dims.n_y}) does not match "
            f"layout cell {layout.cell}")
    opt = optics or SpotOptics()
    if len(opt.type_scale) < layout.lens_types:
        raise InvalidDims(
            f"{layout.lens_types} lens types need {layout.lens_types} "
            f"type_scale entries, got {len(opt.type_scale)}")
    n_s, n_t, n_x, n_y, n_z = dims.shape
    z0 = opt.focal_plane if opt.focal_plane is not None else (n_z + 1) // 2

    rows = np.arange(1, n_s + 1, dtype=np.float64) - pattern_centre(n_s)
    cols = np.arange(1, n_t + 1, dtype=np.float64) - pattern_centre(n_t)
    data = np.zeros(dims.shape, dtype=np.float64, order="F")
    for z in range(1, n_z + 1):
        defocus = abs(z - z0)
        radius = 0.55 * layout.pitch + layout.pitch * opt.z_step * defocus / opt.fnumber
        width = opt.sigma * (1.0 + opt.sigma_gain * defocus)
        for x in range(1, n_x + 1):
            for y in range(1, n_y + 1):
                pat = np.zeros((n_s, n_t))
                for du, dv, lens in layout.spots((float(x), float(y)), radius):
                    sig = width * opt.type_scale[lens]
                    es = np.exp(-((rows - du) ** 2) / (2.0 * sig * sig))
                    et = np.exp(-((cols - dv) ** 2) / (2.0 * sig * sig))
                    pat += np.outer(es, et)
                total = pat.sum()
                if total <= 0.0:
                    raise SynthesisError(
                        f"empty pattern at (x={x}, y={y}, z={z}); spots fall "
                        f"too far outside the {n_s}x{n_t} pattern window")
                data[:, :, x - 1, y - 1, z - 1] = pat / total
    return PsfArray._wrap(dims, np.asfortranarray(data.astype(dtype, copy=False)))


def random_psf(dims: Dims5, density: float = 0.05, seed: int = 0,
               dtype=np.float64) -> PsfArray:
    """Sparse random PSF array for tests and benchmarks.

    Each element is nonzero with probability ``density``, drawn uniformly
    from (0, 1].  The draw order is fixed, so (dims, density, seed, dtype)
    fully determine the result.
    """
    if not 0.0 < density <= 1.0:
        raise InvalidDims(f"density must be in (0, 1], got {density}")
    rng = np.random.default_rng(seed)
    mask = rng.random(dims.shape) < density
    values = 1.0 - rng.random(dims.shape)      # uniform over (0, 1]
    data = np.where(mask, values, 0.0).astype(dtype, copy=False)
    return PsfArray._wrap(dims, np.asfortranarray(data))
