"""Benchmark harness: rearrangement vs. brute-force reference.

Each case builds a sparse random PSF array, times both implementations
(median of at least three repeats, ``time.perf_counter``), and verifies
that the two results are bitwise identical.  Reports go out as an aligned
text table, a CSV file with a fixed column schema, and a bar-chart figure
rendered next to the CSV.
"""
from __future__ import annotations

import logging
import os
import platform
import resource
import statistics
import time
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from .arrays import Dims5
from .oracle import oracle_backprojection
from .synth import random_psf
from .transform import compute_backprojection

log = logging.getLogger(__name__)

CSV_HEADER = "n_s,n_t,n_x,n_y,n_z,fast_s,oracle_s,speedup,verified"

PRESETS: dict[str, list[tuple[int, int, int, int, int]]] = {
    "smoke": [(9, 9, 3, 3, 2), (15, 13, 5, 3, 2), (19, 11, 9, 5, 2)],
    "large": [(89, 89, 11, 11, 11), (91, 91, 15, 15, 11)],
}


@dataclass(frozen=True)
class BenchCase:
    """One benchmarked size: median timings and the verification verdict."""
    dims: Dims5
    repeats: int
    fast_s: float
    oracle_s: float
    speedup: float
    verified: bool


def time_transform(dims: Dims5, repeats: int = 3, seed: int = 0,
                   density: float = 0.05) -> float:
    """Median wall time of the rearrangement alone, in seconds."""
    psf = random_psf(dims, density=density, seed=seed)
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        compute_backprojection(psf)
        times.append(time.perf_counter() - t0)
    return statistics.median(times)


def run_benchmark(sizes: Iterable[Sequence[int] | Dims5], repeats: int = 3,
                  seed: int = 0, density: float = 0.05,
                  progress: Callable[[str], None] | None = None) -> list[BenchCase]:
    """Time and verify every size; returns one :class:`BenchCase` each.

    ``seed + case index`` seeds each case's random array.  A verification
    mismatch is recorded (and logged), not raised, so the remaining cases
    still run.
    """
    if repeats < 3:
        raise ValueError(f"medians need at least 3 repeats, got {repeats}")
    cases = []
    for index, size in enumerate(sizes):
        dims = size if isinstance(size, Dims5) else Dims5(*size)
        if progress:
            progress(f"[{index + 1}] {'x'.join(map(str, dims.shape))} ...")
        psf = random_psf(dims, density=density, seed=seed + index)

        fast_times, oracle_times = [], []
        for _ in range(repeats):
            t0 = time.perf_counter()
            fast = compute_backprojection(psf)
            fast_times.append(time.perf_counter() - t0)
        for _ in range(repeats):
            t0 = time.perf_counter()
            slow = oracle_backprojection(psf)
            oracle_times.append(time.perf_counter() - t0)

        verified = bool(np.array_equal(fast.data, slow.data))
        if not verified:
            log.error("verification FAILED for dims %s", dims.shape)
        fast_s = statistics.median(fast_times)
        oracle_s = statistics.median(oracle_times)
        cases.append(BenchCase(dims, repeats, fast_s, oracle_s,
                               oracle_s / fast_s, verified))
    return cases


def _environment_note(repeats: int) -> list[str]:
    threads = os.environ.get("LFBP_THREADS", "")
    rss_mib = resource.getrusage(resource.RUSAGE_SELF).ru_maxrss / 1024.0
    return [
        f"# {platform.node()} {platform.machine()}, {os.cpu_count()} cpus, "
        f"python {platform.python_version()}, numpy {np.__version__}",
        f"# threads: {threads or 'unset'} (transform runs single-threaded), "
        f"median of {repeats} repeats, peak rss {rss_mib:.0f} MiB",
    ]


def format_table(cases: Sequence[BenchCase]) -> str:
    """Aligned text report with an environment header."""
    lines = _environment_note(cases[0].repeats if cases else 0)
    head = f"{'dims':>20} {'fast [s]':>10} {'oracle [s]':>10} {'speedup':>8}  verified"
    lines.append(head)
    lines.append("-" * len(head))
    for c in cases:
        dims = "x".join(map(str, c.dims.shape))
        lines.append(f"{dims:>20} {c.fast_s:>10.4f} {c.oracle_s:>10.4f} "
                     f"{c.speedup:>7.1f}x  {'yes' if c.verified else 'NO'}")
    return "\n".join(lines)


def write_csv(cases: Sequence[BenchCase], path) -> None:
    """CSV report, one row per case, schema :data:`CSV_HEADER`."""
    rows = [CSV_HEADER]
    for c in cases:
        n_s, n_t, n_x, n_y, n_z = c.dims.shape
        rows.append(f"{n_s},{n_t},{n_x},{n_y},{n_z},{c.fast_s:.6f},"
                    f"{c.oracle_s:.6f},{c.speedup:.2f},"
                    f"{'true' if c.verified else 'false'}")
    with open(path, "w", encoding="ascii") as fh:
        fh.write("\n".join(rows) + "\n")


def render_figure(cases: Sequence[BenchCase], path) -> None:
    """Bar chart of the two timings per case (log scale), saved to ``path``."""
    from matplotlib.backends.backend_agg import FigureCanvasAgg
    from matplotlib.figure import Figure

    fig = Figure(figsize=(6.8, 4.2), dpi=120)
    FigureCanvasAgg(fig)
    ax = fig.subplots()
    pos = np.arange(len(cases))
    fast = [c.fast_s for c in cases]
    slow = [c.oracle_s for c in cases]
    ax.bar(pos - 0.2, fast, width=0.4, label="rearrangement")
    ax.bar(pos + 0.2, slow, width=0.4, label="brute force")
    for p, c in zip(pos, cases):
        ax.annotate(f"{c.speedup:.0f}x", (p + 0.2, c.oracle_s),
                    ha="center", va="bottom", fontsize=8)
    ax.set_yscale("log")
    ax.set_xticks(pos)
    ax.set_xticklabels(["x".join(map(str, c.dims.shape)) for c in cases],
                       fontsize=8, rotation=15)
    ax.set_ylabel("median wall time [s]")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path)
