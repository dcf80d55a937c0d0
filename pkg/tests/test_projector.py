import numpy as np
import pytest

from lfbp import (DimMismatch, Dims5, Image, NonFiniteInput, PsfArray, Volume,
                  backproject, backproject_adjoint, compute_backprojection,
                  forward_project, new_psf, normalizer, pattern_centre,
                  random_psf, rl_run)
from lfbp.projector import _safe_divide


def test_pattern_centre():
    assert pattern_centre(3) == 2
    assert pattern_centre(9) == 5
    assert pattern_centre(4) == 3
    assert pattern_centre(1) == 1


def test_zero_volume_projects_to_zero_image():
    psf = random_psf(Dims5(9, 9, 3, 3, 2), seed=0)
    img = forward_project(psf, Volume(np.zeros((15, 15, 2))))
    assert img.shape == (15, 15)
    assert not img.data.any()


def test_single_voxel_stamps_its_pattern():
    d = Dims5(5, 5, 3, 3, 2)
    psf = random_psf(d, density=1.0, seed=8)
    g = np.zeros((15, 15, 2))
    g[7, 6, 1] = 2.0                      # interior voxel, pattern fits fully
    img = forward_project(psf, Volume(g))
    want = np.zeros((15, 15))
    c = pattern_centre(5)
    want[7 - (c - 1):7 + c, 6 - (c - 1):6 + c] = 2.0 * psf.data[:, :, 7 % 3, 6 % 3, 1]
    assert np.array_equal(img.data, want)


def test_border_contributions_are_dropped():
    d = Dims5(5, 5, 3, 3, 1)
    psf = new_psf(d, fill=1.0)
    g = np.zeros((7, 7, 1))
    g[0, 0, 0] = 1.0                      # corner voxel: only a 3x3 clip fits
    img = forward_project(psf, Volume(g))
    assert img.data.sum() == 9.0
    assert np.count_nonzero(img.data) == 9
    g2 = np.zeros((7, 7, 1))
    g2[3, 3, 0] = 1.0                     # interior voxel: full pattern
    assert forward_project(psf, Volume(g2)).data.sum() == 25.0


def test_cell_shift_equivariance():
    # moving a source by one whole cell shifts its image by the same amount
    d = Dims5(9, 9, 3, 3, 1)
    psf = random_psf(d, density=0.8, seed=4)
    g1 = np.zeros((31, 31, 1)); g1[10, 12, 0] = 1.0
    g2 = np.zeros((31, 31, 1)); g2[13, 12, 0] = 1.0
    f1 = forward_project(psf, Volume(g1)).data
    f2 = forward_project(psf, Volume(g2)).data
    assert np.array_equal(f1[6:15, :], f2[9:18, :])


def test_forward_rejects_depth_mismatch():
    psf = random_psf(Dims5(5, 5, 3, 3, 2), seed=0)
    with pytest.raises(DimMismatch):
        forward_project(psf, Volume(np.zeros((9, 9, 3))))


def test_backprojections_agree_and_are_adjoint():
    d = Dims5(9, 9, 3, 3, 3)
    psf = random_psf(d, density=0.4, seed=17)
    bp = compute_backprojection(psf)
    rng = np.random.default_rng(17)
    g = Volume(rng.random((31, 31, 3)))
    f = Image(rng.random((31, 31)))

    via_bp = backproject(bp, f)
    via_adj = backproject_adjoint(psf, f)
    denom = np.maximum(np.abs(via_adj.data), 1e-300)
    assert np.max(np.abs(via_bp.data - via_adj.data) / denom) < 1e-12

    lhs = float(np.vdot(forward_project(psf, g).data, f.data))
    rhs = float(np.vdot(g.data, via_bp.data))
    assert abs(lhs - rhs) / abs(lhs) < 1e-10


def test_float32_arrays_accumulate_in_float64():
    psf = random_psf(Dims5(5, 5, 3, 3, 1), density=1.0, seed=3, dtype=np.float32)
    img = forward_project(psf, Volume(np.ones((9, 9, 1))))
    assert img.data.dtype == np.float64
    vol = backproject_adjoint(psf, Image(np.ones((9, 9))))
    assert vol.data.dtype == np.float64


def test_normalizer_is_backprojected_ones():
    d = Dims5(7, 7, 3, 3, 2)
    psf = random_psf(d, density=0.6, seed=6)
    bp = compute_backprojection(psf)
    norm = normalizer(bp, (13, 13))
    want = backproject_adjoint(psf, Image(np.ones((13, 13))))
    denom = np.maximum(np.abs(want.data), 1e-300)
    assert np.max(np.abs(norm.data - want.data) / denom) < 1e-12


def test_safe_divide():
    num = np.asarray([1.0, 1.0, 1.0, 1.0])
    den = np.asarray([2.0, 1e-30, 0.0, 4.0])
    out = _safe_divide(num, den, eps=1e-12)
    assert out.tolist() == [0.5, 0.0, 0.0, 0.25]    # tiny and zero entries gated
    assert not _safe_divide(num, np.zeros(4), eps=1e-12).any()


def test_rl_zero_image_gives_zero_volume():
    d = Dims5(5, 5, 3, 3, 1)
    psf = random_psf(d, density=0.9, seed=5)
    bp = compute_backprojection(psf)
    state = rl_run(psf, bp, Image(np.zeros((9, 9))), iterations=3)
    assert not state.estimate.data.any()
    assert state.mse_history == [0.0, 0.0, 0.0]


def test_rl_iterates_and_records_history():
    d = Dims5(5, 5, 3, 3, 2)
    psf = random_psf(d, density=0.9, seed=15)
    bp = compute_backprojection(psf)
    g = np.zeros((11, 11, 2)); g[5, 5, 0] = 1.0; g[2, 8, 1] = 0.5
    f = forward_project(psf, Volume(g))
    state = rl_run(psf, bp, f, iterations=6)
    assert state.iterations == 6
    assert len(state.mse_history) == 6
    assert (state.estimate.data >= 0).all()
    assert state.mse_history[-1] < state.mse_history[0]


def test_rl_argument_checks():
    d = Dims5(5, 5, 3, 3, 1)
    psf = random_psf(d, density=0.9, seed=1)
    bp = compute_backprojection(psf)
    with pytest.raises(ValueError):
        rl_run(psf, bp, Image(np.zeros((9, 9))), iterations=0)
    other = compute_backprojection(random_psf(Dims5(7, 7, 3, 3, 1), seed=1))
    with pytest.raises(DimMismatch):
        rl_run(psf, other, Image(np.zeros((9, 9))), iterations=1)
    with pytest.raises(NonFiniteInput):
        rl_run(psf, bp, Image(np.full((9, 9), np.inf)), iterations=1)
