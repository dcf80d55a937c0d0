"""Command line interface.

Diagnostics and progress go to stderr; machine-readable results go to
stdout or to the requested output files.  Exit codes: 0 on success, 1 when
a verification or comparison fails (or on unexpected I/O trouble), 2 for
malformed inputs, bad dimensions and other usage errors.

``--config FILE`` preloads defaults for any option from a flat
``key = value`` file; explicit command line flags win.
"""
from __future__ import annotations

import argparse
import logging
import sys
import time

import numpy as np

from . import bench as bench_mod
from . import fileio
from .arrays import Dims5, Image, Volume, sum_backward_plane, sum_forward_plane
from .errors import FormatError, InvalidDims, IoError, LfbpError
from .oracle import oracle_backprojection
from .projector import (backproject, backproject_adjoint, forward_project,
                        rl_run)
from .synth import MlaLayout, SpotOptics, random_psf, synth_psf
from .transform import compute_backprojection, compute_psf_from_backprojection

log = logging.getLogger(__name__)


def _say(msg: str) -> None:
    print(msg, file=sys.stderr)


def _parse_dims(text: str) -> Dims5:
    parts = text.replace(",", "x").split("x")
    if len(parts) != 5:
        raise InvalidDims(f"dims need five integers, got {text!r}")
    try:
        values = [int(p) for p in parts]
    except ValueError:
        raise InvalidDims(f"dims need five integers, got {text!r}") from None
    return Dims5(*values)


def _np_dtype(name: str):
    return np.float32 if name == "f32" else np.float64


# ---------------------------------------------------------------------------
# config files


def _parse_config(path) -> dict[str, str]:
    """Flat ``key = value`` file; ``#`` starts a comment."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise IoError(f"cannot read config {path}: {exc}") from exc
    out: dict[str, str] = {}
    for lineno, line in enumerate(lines, 1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise FormatError(f"{path}:{lineno}: expected 'key = value'")
        key, value = body.split("=", 1)
        out[key.strip().replace("-", "_")] = value.strip()
    return out


_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off"}


def _apply_config(subparsers: list[argparse.ArgumentParser],
                  cfg: dict[str, str], path) -> None:
    used = set()
    for sub in subparsers:
        defaults = {}
        for action in sub._actions:
            if action.dest not in cfg:
                continue
            raw = cfg[action.dest]
            if isinstance(action, (argparse._StoreTrueAction,
                                   argparse._StoreFalseAction)):
                low = raw.lower()
                if low not in _TRUE | _FALSE:
                    raise FormatError(f"{path}: {action.dest} must be a "
                                      f"boolean, got {raw!r}")
                defaults[action.dest] = low in _TRUE
            elif action.type is not None:
                try:
                    defaults[action.dest] = action.type(raw)
                except (TypeError, ValueError) as exc:
                    raise FormatError(f"{path}: bad value for "
                                      f"{action.dest}: {raw!r}") from exc
            else:
                defaults[action.dest] = raw
            used.add(action.dest)
        if defaults:
            sub.set_defaults(**defaults)
    unknown = sorted(set(cfg) - used)
    if unknown:
        raise FormatError(f"{path}: unknown option(s): {', '.join(unknown)}")


# ---------------------------------------------------------------------------
# subcommands


def _cmd_transform(args) -> int:
    t0 = time.perf_counter()
    if args.inverse:
        src = fileio.load_backprojection(args.input)
        result = compute_psf_from_backprojection(src)
    else:
        src = fileio.load_psf(args.input)
        result = compute_backprojection(src)
    fileio.save(result, args.output)
    _say(f"{'x'.join(map(str, src.dims.shape))} rearranged in "
         f"{time.perf_counter() - t0:.3f} s -> {args.output}")
    return 0


def _cmd_verify(args) -> int:
    psf = fileio.load_psf(args.input)
    slow = oracle_backprojection(psf, extra_padding=args.extra_padding)
    if args.against:
        fast = fileio.load_backprojection(args.against)
        if fast.dims != psf.dims:
            raise InvalidDims(f"{args.against} dims {fast.dims.shape} do not "
                              f"match {args.input} dims {psf.dims.shape}")
        label = "stored backprojection"
    else:
        fast = compute_backprojection(psf)
        label = "rearrangement"
    if np.array_equal(fast.data, slow.data):
        print(f"PASS {'x'.join(map(str, psf.dims.shape))}: {label} "
              f"matches brute force bitwise")
        return 0
    bad = np.flatnonzero((fast.data != slow.data).ravel(order="F"))
    first = np.unravel_index(bad[0], psf.dims.shape, order="F")
    coord = tuple(int(i) + 1 for i in first)
    print(f"FAIL {'x'.join(map(str, psf.dims.shape))}: {bad.size} elements "
          f"differ, first at (s,t,x,y,z)={coord}")
    return 1


def _cmd_synth(args) -> int:
    if not args.dims:
        raise InvalidDims("synth needs --dims (flag or config file)")
    dims = _parse_dims(args.dims)
    if args.layout == "random":
        psf = random_psf(dims, density=args.density, seed=args.seed,
                         dtype=_np_dtype(args.dtype))
    else:
        factory = {"rect": MlaLayout.rect, "hex": MlaLayout.hexagonal,
                   "hex3": MlaLayout.hex3}[args.layout]
        layout = factory(args.pitch)
        optics = SpotOptics(sigma=args.sigma, fnumber=args.fnumber,
                            z_step=args.z_step, sigma_gain=args.sigma_gain,
                            focal_plane=args.focal_plane)
        psf = synth_psf(layout, dims, optics, dtype=_np_dtype(args.dtype))
    fileio.save(psf, args.output)
    _say(f"wrote {args.layout} PSF array {'x'.join(map(str, dims.shape))} "
         f"({args.dtype}) -> {args.output}")
    return 0


def _cmd_project(args) -> int:
    if args.forward:
        if not (args.psf and args.volume and args.output):
            raise InvalidDims("--forward needs --psf, --volume and --output")
        img = forward_project(fileio.load_psf(args.psf),
                              fileio.load_volume(args.volume))
        fileio.save_image(img, args.output)
        _say(f"projected {img.shape[0]}x{img.shape[1]} image -> {args.output}")
        return 0
    if args.backward:
        if not (args.bp and args.image and args.output):
            raise InvalidDims("--backward needs --bp, --image and --output")
        vol = backproject(fileio.load_backprojection(args.bp),
                          fileio.load_image(args.image))
        fileio.save_volume(vol, args.output)
        _say(f"backprojected {'x'.join(map(str, vol.shape))} volume "
             f"-> {args.output}")
        return 0
    # adjoint identity check: <H g, f> must equal <g, H' f>
    if not args.psf:
        raise InvalidDims("--check-adjoint needs --psf")
    psf = fileio.load_psf(args.psf)
    bp = (fileio.load_backprojection(args.bp) if args.bp
          else compute_backprojection(psf))
    rng = np.random.default_rng(args.seed)
    n = args.size
    g = Volume(rng.random((n, n, psf.dims.n_z)))
    f = Image(rng.random((n, n)))
    lhs = float(np.vdot(forward_project(psf, g).data, f.data))
    rhs = float(np.vdot(g.data, backproject(bp, f).data))
    rel = abs(lhs - rhs) / max(abs(lhs), abs(rhs), 1e-300)
    print(f"<Hg,f>={lhs:.17e}  <g,H'f>={rhs:.17e}  rel={rel:.3e}")
    if rel > args.tolerance:
        _say(f"adjoint identity violated (rel {rel:.3e} > {args.tolerance:g})")
        return 1
    return 0


def _cmd_deconv(args) -> int:
    psf = fileio.load_psf(args.psf)
    image = fileio.load_image(args.image)
    bp = (fileio.load_backprojection(args.bp) if args.bp
          else compute_backprojection(psf))
    t0 = time.perf_counter()
    state = rl_run(psf, bp, image, iterations=args.iters, eps=args.eps)
    fileio.save_volume(state.estimate, args.output)
    _say(f"{args.iters} iterations in {time.perf_counter() - t0:.2f} s, "
         f"final mse {state.mse_history[-1]:.6e} -> {args.output}")
    if args.history:
        with open(args.history, "w", encoding="ascii") as fh:
            fh.write("iteration,mse\n")
            for k, mse in enumerate(state.mse_history, 1):
                fh.write(f"{k},{mse:.12e}\n")
        _say(f"mse history -> {args.history}")
    return 0


def _cmd_export(args) -> int:
    if args.mode == "sum-forward":
        field = fileio.load_psf(args.input)
        plane = sum_forward_plane(field, args.plane)
    else:
        field = fileio.load_backprojection(args.input)
        plane = sum_backward_plane(field, args.plane)
    fileio.export_pgm(plane, args.output)
    _say(f"{args.mode} of plane {args.plane} -> {args.output}")
    return 0


def _bench_sizes(args) -> list[tuple[int, ...]]:
    if args.sizes:
        return [tuple(_parse_dims(spec).shape) for spec in args.sizes.split()]
    return list(bench_mod.PRESETS[args.preset])


def _cmd_bench(args) -> int:
    cases = bench_mod.run_benchmark(
        _bench_sizes(args), repeats=args.repeats, seed=args.seed,
        density=args.density, progress=_say)
    print(bench_mod.format_table(cases))
    if args.csv:
        bench_mod.write_csv(cases, args.csv)
        _say(f"csv -> {args.csv}")
        if not args.no_figure:
            figure = args.figure or str(args.csv) + ".png"
            bench_mod.render_figure(cases, figure)
            _say(f"figure -> {figure}")
    return 0 if all(c.verified for c in cases) else 1


# ---------------------------------------------------------------------------
# parser


def _build_parser() -> tuple[argparse.ArgumentParser,
                             list[argparse.ArgumentParser]]:
    parser = argparse.ArgumentParser(
        prog="lfbp",
        description="Light-field PSF rearrangement, projection and "
                    "deconvolution tools.")
    parser.add_argument("--config", metavar="FILE",
                        help="read option defaults from a key = value file")
    parser.add_argument("--verbose", action="store_true",
                        help="log progress details to stderr")
    sub = parser.add_subparsers(dest="command", required=True)
    children = []

    p = sub.add_parser("transform",
                       help="rearrange a PSF array into its backprojection "
                            "array (or back)")
    p.add_argument("input")
    p.add_argument("output")
    p.add_argument("--inverse", action="store_true",
                   help="input is a backprojection array; recover the PSF "
                        "array (odd pixel dims only)")
    p.set_defaults(func=_cmd_transform)
    children.append(p)

    p = sub.add_parser("verify",
                       help="check the rearrangement against the brute-force "
                            "reference")
    p.add_argument("input")
    p.add_argument("--against", metavar="LF5",
                   help="check this stored backprojection array instead of "
                        "recomputing the rearrangement")
    p.add_argument("--extra-padding", type=int, default=0,
                   help="widen the reference's voxel grid (result must not "
                        "change)")
    p.set_defaults(func=_cmd_verify)
    children.append(p)

    p = sub.add_parser("synth", help="synthesize a PSF array")
    p.add_argument("output")
    p.add_argument("--dims", metavar="SxTxXxYxZ",
                   help="array dimensions (may also come from --config)")
    p.add_argument("--layout", choices=("rect", "hex", "hex3", "random"),
                   default="rect")
    p.add_argument("--pitch", type=float, default=11.0,
                   help="lenslet pitch in pixels (spot layouts)")
    p.add_argument("--sigma", type=float, default=0.7)
    p.add_argument("--fnumber", type=float, default=8.0)
    p.add_argument("--z-step", type=float, default=2.0)
    p.add_argument("--sigma-gain", type=float, default=0.25)
    p.add_argument("--focal-plane", type=int, default=None,
                   help="1-based in-focus depth index (default: middle)")
    p.add_argument("--density", type=float, default=0.05,
                   help="nonzero fraction for --layout random")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--dtype", choices=("f32", "f64"), default="f64")
    p.set_defaults(func=_cmd_synth)
    children.append(p)

    p = sub.add_parser("project",
                       help="apply the forward or backward projector")
    mode = p.add_mutually_exclusive_group(required=True)
    mode.add_argument("--forward", action="store_true")
    mode.add_argument("--backward", action="store_true")
    mode.add_argument("--check-adjoint", action="store_true",
                      help="compare <Hg,f> with <g,H'f> on random data")
    p.add_argument("--psf", metavar="LF5")
    p.add_argument("--bp", metavar="LF5",
                   help="backprojection array (computed from --psf if absent)")
    p.add_argument("--volume", metavar="LF5")
    p.add_argument("--image", metavar="LF5")
    p.add_argument("--output", metavar="LF5")
    p.add_argument("--size", type=int, default=31,
                   help="lateral grid size for --check-adjoint")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tolerance", type=float, default=1e-10)
    p.set_defaults(func=_cmd_project)
    children.append(p)

    p = sub.add_parser("deconv",
                       help="Richardson-Lucy deconvolution of an image")
    p.add_argument("--psf", required=True, metavar="LF5")
    p.add_argument("--image", required=True, metavar="LF5")
    p.add_argument("--bp", metavar="LF5")
    p.add_argument("--output", required=True, metavar="LF5")
    p.add_argument("--iters", type=int, default=20)
    p.add_argument("--eps", type=float, default=1e-12)
    p.add_argument("--history", metavar="CSV",
                   help="write per-iteration mean squared error")
    p.set_defaults(func=_cmd_deconv)
    children.append(p)

    p = sub.add_parser("export",
                       help="render a depth plane summary as a 16-bit PGM")
    p.add_argument("input")
    p.add_argument("output")
    p.add_argument("--plane", type=int, default=1, help="1-based depth index")
    p.add_argument("--mode", choices=("sum-forward", "sum-backward"),
                   default="sum-forward")
    p.set_defaults(func=_cmd_export)
    children.append(p)

    p = sub.add_parser("bench",
                       help="time the rearrangement against the reference")
    p.add_argument("--preset", choices=sorted(bench_mod.PRESETS),
                   default="smoke")
    p.add_argument("--sizes", metavar="SPECS",
                   help="space-separated SxTxXxYxZ list, overrides --preset")
    p.add_argument("--repeats", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--density", type=float, default=0.05)
    p.add_argument("--csv", metavar="FILE")
    p.add_argument("--figure", metavar="PNG",
                   help="figure path (default: CSV path + .png)")
    p.add_argument("--no-figure", action="store_true")
    p.set_defaults(func=_cmd_bench)
    children.append(p)

    return parser, children


def main(argv=None) -> int:
    bootstrap = argparse.ArgumentParser(add_help=False)
    bootstrap.add_argument("--config")
    known, _ = bootstrap.parse_known_args(argv)

    try:
        parser, children = _build_parser()
        if known.config:
            _apply_config(children, _parse_config(known.config), known.config)
        args = parser.parse_args(argv)
        logging.basicConfig(
            stream=sys.stderr, format="%(levelname)s: %(message)s",
            level=logging.INFO if args.verbose else logging.WARNING)
        return args.func(args)
    except LfbpError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
