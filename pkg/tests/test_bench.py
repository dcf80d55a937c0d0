import numpy as np
import pytest

from lfbp import Dims5, run_benchmark, time_transform
from lfbp.bench import CSV_HEADER, PRESETS, format_table, render_figure, write_csv


@pytest.fixture(scope="module")
def smoke_cases():
    # real (tiny) benchmark run shared across the assertions below
    return run_benchmark([(9, 9, 3, 3, 1), (6, 7, 3, 3, 1)], repeats=3, seed=0)


def test_run_benchmark_verifies(smoke_cases):
    assert len(smoke_cases) == 2
    for case in smoke_cases:
        assert case.verified
        assert case.fast_s > 0 and case.oracle_s > 0
        assert case.speedup == pytest.approx(case.oracle_s / case.fast_s)
        assert case.repeats == 3
    assert smoke_cases[0].dims == Dims5(9, 9, 3, 3, 1)


def test_repeats_floor():
    with pytest.raises(ValueError):
        run_benchmark([(9, 9, 3, 3, 1)], repeats=2)


def test_csv_schema(tmp_path, smoke_cases):
    path = tmp_path / "bench.csv"
    write_csv(smoke_cases, path)
    lines = path.read_text().splitlines()
    assert lines[0] == CSV_HEADER
    assert lines[0] == "n_s,n_t,n_x,n_y,n_z,fast_s,oracle_s,speedup,verified"
    assert len(lines) == 3
    first = lines[1].split(",")
    assert first[:5] == ["9", "9", "3", "3", "1"]
    assert first[8] == "true"
    float(first[5]); float(first[6]); float(first[7])   # numeric columns parse


def test_format_table(smoke_cases):
    text = format_table(smoke_cases)
    assert "9x9x3x3x1" in text
    assert "verified" in text and "yes" in text
    # environment note lines
    assert text.splitlines()[0].startswith("#")
    assert "median of 3 repeats" in text
    assert "rss" in text


def test_render_figure(tmp_path, smoke_cases):
    path = tmp_path / "bench.png"
    render_figure(smoke_cases, path)
    assert path.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"


def test_time_transform():
    assert time_transform(Dims5(9, 9, 3, 3, 1), repeats=3, seed=1) > 0.0


def test_presets():
    assert (89, 89, 11, 11, 11) in PRESETS["large"]
    assert (91, 91, 15, 15, 11) in PRESETS["large"]
    for sizes in PRESETS.values():
        for size in sizes:
            Dims5(*size)     # every preset size satisfies the contract
