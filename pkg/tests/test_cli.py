import subprocess
import sys

import numpy as np
import pytest

import lfbp
from lfbp.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.fixture()
def psf_file(tmp_path):
    path = tmp_path / "h.lf5"
    lfbp.save(lfbp.random_psf(lfbp.Dims5(9, 9, 3, 3, 2), seed=3), path)
    return path


def test_transform_and_verify_roundtrip(capsys, tmp_path, psf_file):
    ht = tmp_path / "ht.lf5"
    code, _, err = run(capsys, "transform", str(psf_file), str(ht))
    assert code == 0
    assert "9x9x3x3x2" in err

    code, out, _ = run(capsys, "verify", str(psf_file))
    assert code == 0
    assert out.startswith("PASS")

    code, out, _ = run(capsys, "verify", str(psf_file), "--against", str(ht))
    assert code == 0 and "PASS" in out

    back = tmp_path / "back.lf5"
    code, _, _ = run(capsys, "transform", "--inverse", str(ht), str(back))
    assert code == 0
    assert back.read_bytes() == psf_file.read_bytes()


def test_verify_catches_corruption(capsys, tmp_path, psf_file):
    ht = tmp_path / "ht.lf5"
    assert main(["transform", str(psf_file), str(ht)]) == 0
    capsys.readouterr()
    blob = bytearray(ht.read_bytes())
    blob[32 + 8 * 5] ^= 0x01                       # flip one payload bit
    ht.write_bytes(bytes(blob))
    code, out, _ = run(capsys, "verify", str(psf_file), "--against", str(ht))
    assert code == 1
    assert out.startswith("FAIL")
    assert "(s,t,x,y,z)=" in out


def test_corrupt_magic_exits_2(capsys, tmp_path, psf_file):
    bad = tmp_path / "bad.lf5"
    bad.write_bytes(b"ZZZZ" + psf_file.read_bytes()[4:])
    code, _, err = run(capsys, "transform", str(bad), str(tmp_path / "o.lf5"))
    assert code == 2
    assert "FormatError" in err


def test_missing_input_exits_2(capsys, tmp_path):
    code, _, err = run(capsys, "verify", str(tmp_path / "absent.lf5"))
    assert code == 2
    assert "IoError" in err


def test_synth_subcommand_layouts(capsys, tmp_path):
    for layout, dims in [("rect", "11x11x5x5x2"), ("hex", "11x11x5x9x1"),
                         ("hex3", "9x5x9x5x1"), ("random", "9x9x3x3x1")]:
        out = tmp_path / f"{layout}.lf5"
        code, _, err = run(capsys, "synth", str(out), "--dims", dims,
                           "--layout", layout, "--pitch", "5" if layout != "hex3" else "3")
        assert code == 0, (layout, err)
        assert out.exists()


def test_synth_determinism(capsys, tmp_path):
    a, b = tmp_path / "a.lf5", tmp_path / "b.lf5"
    args = ["synth", "--dims", "9x9x3x3x1", "--layout", "random", "--seed", "7"]
    assert main(args[:1] + [str(a)] + args[1:]) == 0
    assert main(args[:1] + [str(b)] + args[1:]) == 0
    capsys.readouterr()
    assert a.read_bytes() == b.read_bytes()


def test_project_forward_backward_and_adjoint(capsys, tmp_path, psf_file):
    vol = tmp_path / "g.lf5"
    rng = np.random.default_rng(0)
    lfbp.save_volume(lfbp.Volume(rng.random((15, 15, 2))), vol)
    img = tmp_path / "f.lf5"
    code, _, _ = run(capsys, "project", "--forward", "--psf", str(psf_file),
                     "--volume", str(vol), "--output", str(img))
    assert code == 0
    assert lfbp.load_image(img).shape == (15, 15)

    ht = tmp_path / "ht.lf5"
    assert main(["transform", str(psf_file), str(ht)]) == 0
    back = tmp_path / "b.lf5"
    code, _, _ = run(capsys, "project", "--backward", "--bp", str(ht),
                     "--image", str(img), "--output", str(back))
    assert code == 0
    assert lfbp.load_volume(back).shape == (15, 15, 2)

    code, out, _ = run(capsys, "project", "--check-adjoint",
                       "--psf", str(psf_file), "--size", "21")
    assert code == 0
    assert "rel=" in out


def test_project_zero_volume(capsys, tmp_path, psf_file):
    vol = tmp_path / "z.lf5"
    lfbp.save_volume(lfbp.Volume(np.zeros((9, 9, 2))), vol)
    img = tmp_path / "f.lf5"
    assert main(["project", "--forward", "--psf", str(psf_file),
                 "--volume", str(vol), "--output", str(img)]) == 0
    capsys.readouterr()
    assert not lfbp.load_image(img).data.any()


def test_project_mode_needs_inputs(capsys, psf_file):
    code, _, err = run(capsys, "project", "--forward", "--psf", str(psf_file))
    assert code == 2
    assert "InvalidDims" in err


def test_deconv_writes_volume_and_history(capsys, tmp_path):
    h = tmp_path / "h.lf5"
    assert main(["synth", str(h), "--dims", "11x11x5x5x2", "--layout", "rect",
                 "--pitch", "5", "--focal-plane", "0"]) == 0
    psf = lfbp.load_psf(h)
    g = np.zeros((15, 15, 2)); g[7, 7, 0] = 1.0
    f = tmp_path / "f.lf5"
    lfbp.save_image(lfbp.forward_project(psf, lfbp.Volume(g)), f)
    out = tmp_path / "g.lf5"
    hist = tmp_path / "mse.csv"
    code, _, err = run(capsys, "deconv", "--psf", str(h), "--image", str(f),
                       "--output", str(out), "--iters", "5",
                       "--history", str(hist))
    assert code == 0
    assert lfbp.load_volume(out).shape == (15, 15, 2)
    lines = hist.read_text().splitlines()
    assert lines[0] == "iteration,mse"
    assert len(lines) == 6


def test_export_rotation_relation(capsys, tmp_path, psf_file):
    # the summed forward plane of H and summed backward plane of H' render
    # the same image up to a 180-degree rotation
    ht = tmp_path / "ht.lf5"
    assert main(["transform", str(psf_file), str(ht)]) == 0
    fwd = tmp_path / "fwd.pgm"
    bwd = tmp_path / "bwd.pgm"
    assert main(["export", str(psf_file), str(fwd), "--plane", "2",
                 "--mode", "sum-forward"]) == 0
    assert main(["export", str(ht), str(bwd), "--plane", "2",
                 "--mode", "sum-backward"]) == 0
    capsys.readouterr()

    def pixels(path):
        blob = path.read_bytes()
        head = b"P5\n9 9\n65535\n"
        assert blob.startswith(head)
        return np.frombuffer(blob[len(head):], dtype=">u2").reshape(9, 9)

    assert np.array_equal(pixels(fwd), pixels(bwd)[::-1, ::-1])


def test_config_file_supplies_defaults(capsys, tmp_path):
    cfg = tmp_path / "lfbp.cfg"
    cfg.write_text("seed = 7\nlayout = random\ndims = 9x9x3x3x1\n")
    a = tmp_path / "a.lf5"
    code, _, _ = run(capsys, "--config", str(cfg), "synth", str(a))
    assert code == 0
    b = tmp_path / "b.lf5"
    assert main(["synth", str(b), "--dims", "9x9x3x3x1", "--layout", "random",
                 "--seed", "7"]) == 0
    capsys.readouterr()
    assert a.read_bytes() == b.read_bytes()
    # explicit flags beat config values
    c = tmp_path / "c.lf5"
    assert main(["--config", str(cfg), "synth", str(c), "--seed", "8"]) == 0
    capsys.readouterr()
    assert c.read_bytes() != a.read_bytes()


def test_config_rejects_unknown_keys(capsys, tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("no_such_option = 1\n")
    code, _, err = run(capsys, "--config", str(cfg), "verify", "x.lf5")
    assert code == 2
    assert "FormatError" in err and "no_such_option" in err


def test_config_rejects_malformed_lines(capsys, tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("just a line without equals\n")
    code, _, err = run(capsys, "--config", str(cfg), "verify", "x.lf5")
    assert code == 2
    assert "FormatError" in err


def test_bench_subcommand(capsys, tmp_path):
    csv = tmp_path / "bench.csv"
    code, out, err = run(capsys, "bench", "--sizes", "9x9x3x3x1 6x7x3x3x1",
                         "--csv", str(csv))
    assert code == 0
    assert "verified" in out and "yes" in out
    lines = csv.read_text().splitlines()
    assert lines[0] == "n_s,n_t,n_x,n_y,n_z,fast_s,oracle_s,speedup,verified"
    figure = tmp_path / "bench.csv.png"
    assert figure.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"


def test_unknown_subcommand_is_a_usage_error():
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 2


def test_module_entry_point(tmp_path):
    # `python -m lfbp` must work for scripted use
    res = subprocess.run([sys.executable, "-m", "lfbp", "synth",
                          str(tmp_path / "h.lf5"), "--dims", "9x9x3x3x1",
                          "--layout", "random"],
                         capture_output=True, text=True)
    assert res.returncode == 0, res.stderr
    assert (tmp_path / "h.lf5").exists()
    res = subprocess.run([sys.executable, "-m", "lfbp", "verify",
                          str(tmp_path / "h.lf5")],
                         capture_output=True, text=True)
    assert res.returncode == 0
    assert res.stdout.startswith("PASS")
