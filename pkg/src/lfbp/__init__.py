"""lfbp — light-field PSF rearrangement, projection and deconvolution.

The package turns a five-dimensional shift-variant light-field PSF array
into its backprojection array by pure index rearrangement, provides the
matching forward/backward projectors and a Richardson-Lucy loop built on
them, and ships a brute-force reference plus a benchmark harness to prove
the fast path exact.
"""
from .arrays import (BackprojArray, Dims5, Image, PsfArray, Volume, new_psf,
                     rotate180_lateral, sum_backward_plane, sum_forward_plane)
from .bench import BenchCase, run_benchmark, time_transform
from .errors import (DimMismatch, DimsError, EvenPixelDims, FormatError,
                     InvalidDims, IoError, LayoutMismatch, LfbpError,
                     NonFiniteInput, SynthesisError, VerificationFailure)
from .fileio import (export_pgm, load_backprojection, load_image, load_psf,
                     load_volume, save, save_image, save_volume)
from .oracle import oracle_backprojection
from .projector import (RlState, backproject, backproject_adjoint,
                        forward_project, normalizer, pattern_centre, rl_run)
from .synth import MlaLayout, SpotOptics, random_psf, synth_psf
from .transform import (compute_backprojection, compute_psf_from_backprojection,
                        dropped_source_count, mirror_index, slice_index,
                        target_cell, wrap_phase)

__version__ = "0.1.0"

__all__ = [
    "BackprojArray", "BenchCase", "DimMismatch", "Dims5", "DimsError",
    "EvenPixelDims", "FormatError", "Image", "InvalidDims", "IoError",
    "LayoutMismatch", "LfbpError", "MlaLayout", "NonFiniteInput", "PsfArray",
    "RlState", "SpotOptics", "SynthesisError", "VerificationFailure",
    "Volume", "backproject", "backproject_adjoint", "compute_backprojection",
    "compute_psf_from_backprojection", "dropped_source_count", "export_pgm",
    "forward_project", "load_backprojection", "load_image", "load_psf",
    "load_volume", "mirror_index", "new_psf", "normalizer",
    "oracle_backprojection", "pattern_centre", "random_psf",
    "rl_run", "rotate180_lateral", "run_benchmark", "save", "save_image",
    "save_volume", "slice_index", "sum_backward_plane", "sum_forward_plane",
    "synth_psf", "target_cell", "time_transform", "wrap_phase",
]
