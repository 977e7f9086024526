"""Command-line driver, one subcommand per pipeline stage.

Exit status is 0 on success, 1 on a usage error and 2 when an input cannot
be read or parsed (or an output cannot be written). Failures print a single
diagnostic line on stderr.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .gradient import DEFAULT_CANNY_HIGH, DEFAULT_LOW_RATIO, canny_edges, gradient_to_images, sobel
from .hough import HOUGH_MODES, HoughParams, hough_transform, render_accumulator
from .peaks import (
    DEFAULT_NMS_RHO,
    DEFAULT_NMS_THETA,
    DEFAULT_THRESHOLD_FRAC,
    clip_to_image,
    draw_segments,
    find_peaks,
    line_of_peak,
    peaks_to_csv,
    segments_to_csv,
)
from .raster import GrayImage, PGMError, RectSpec, SceneSpec, generate, read_pgm, write_pgm
from .rect import (
    DEFAULT_MAX_PEAKS,
    DEFAULT_RECT_PEAK_THRESHOLD,
    DEFAULT_STRIDE,
    DEFAULT_WINDOW_SIZE,
    RectTolerances,
    RectWindow,
    hits_to_json,
    match_extended,
    match_regular,
    scan,
    windowed_hough,
)

_PARAMS = HoughParams()
_TOL = RectTolerances()


class UsageError(Exception):
    pass


class InputError(Exception):
    pass


class _HelpFormatter(argparse.ArgumentDefaultsHelpFormatter):
    """Append ``(default: ...)`` to every flag that has a concrete default."""

    def _get_help_string(self, action):
        if action.default is None or action.default is False or not action.option_strings:
            return action.help
        return super()._get_help_string(action)


class _Parser(argparse.ArgumentParser):
    def __init__(self, *args, **kwargs):
        kwargs.setdefault("formatter_class", _HelpFormatter)
        super().__init__(*args, **kwargs)

    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _floats(text: str, n_min: int, n_max: int, what: str) -> list[float]:
    try:
        vals = [float(v) for v in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"{what} must be comma-separated numbers, got {text!r}")
    if not n_min <= len(vals) <= n_max:
        raise argparse.ArgumentTypeError(f"{what} takes {n_min}..{n_max} values, got {text!r}")
    return vals


def _rect_arg(text: str) -> RectSpec:
    v = _floats(text, 4, 6, "--rect")
    intensity = int(v[4]) if len(v) > 4 else 255
    angle = v[5] if len(v) > 5 else 0.0
    return RectSpec((v[0], v[1]), v[2], v[3], intensity, angle)


def _pair_arg(text: str) -> tuple[float, float]:
    x, y = _floats(text, 2, 2, "coordinate")
    return (x, y)


def _window_arg(text: str) -> tuple[int, int]:
    col, row = _floats(text, 2, 2, "--window")
    if col != int(col) or row != int(row):
        raise argparse.ArgumentTypeError("--window takes integer pixel indices")
    return (int(col), int(row))


# -- flag groups ----------------------------------------------------------------


def _add_edge_flags(p):
    g = p.add_argument_group("edges")
    g.add_argument("--sigma", type=float, default=0.0, help="Gaussian pre-smoothing, 0 disables")
    g.add_argument("--canny-high", type=float, default=DEFAULT_CANNY_HIGH, help="upper hysteresis threshold")
    g.add_argument(
        "--canny-low",
        type=float,
        default=None,
        help=f"lower hysteresis threshold (default: {DEFAULT_LOW_RATIO} x high)",
    )
    g.add_argument("--norm", choices=("l2", "l1"), default="l2", help="gradient magnitude norm")


def _add_hough_flags(p, with_mode=True):
    g = p.add_argument_group("accumulator")
    if with_mode:
        g.add_argument("--mode", choices=HOUGH_MODES, default="extended", help="transform variant")
    g.add_argument("--delta-rho", type=float, default=_PARAMS.delta_rho, help="rho bin width (px)")
    g.add_argument("--delta-theta", type=float, default=_PARAMS.delta_theta, help="theta bin width (deg)")
    g.add_argument(
        "--theta-window", type=float, default=_PARAMS.theta_window, help="voting half-window (deg)"
    )
    g.add_argument("--weight-mode", choices=("unit", "magnitude"), default=_PARAMS.weight_mode, help="vote weight")


def _add_peak_flags(p, threshold=DEFAULT_THRESHOLD_FRAC):
    g = p.add_argument_group("peaks")
    g.add_argument("--threshold", type=float, default=threshold, help="fraction of the maximum")
    g.add_argument("--nms-theta", type=float, default=DEFAULT_NMS_THETA, help="suppression radius (deg)")
    g.add_argument("--nms-rho", type=float, default=DEFAULT_NMS_RHO, help="suppression radius (px)")


def _add_rect_flags(p):
    g = p.add_argument_group("rectangles")
    g.add_argument("--rules", choices=("regular", "extended"), default="extended", help="constellation rule set")
    g.add_argument("--window-size", type=int, default=DEFAULT_WINDOW_SIZE, help="odd window side (px)")
    g.add_argument("--stride", type=int, default=DEFAULT_STRIDE, help="window step (px)")
    g.add_argument(
        "--window",
        type=_window_arg,
        default=None,
        metavar="COL,ROW",
        help="evaluate only the window centered here instead of scanning",
    )
    g.add_argument("--max-peaks", type=int, default=DEFAULT_MAX_PEAKS, help="peaks entering the search")
    g.add_argument("--tol-theta", type=float, default=_TOL.tol_theta, help="pair orientation (deg)")
    g.add_argument("--tol-orth", type=float, default=_TOL.tol_orth, help="pair orthogonality (deg)")
    g.add_argument("--tol-rho", type=float, default=_TOL.tol_rho, help="pair rho balance (px)")
    g.add_argument("--tol-height", type=float, default=_TOL.tol_height, help="relative height gap")
    g.add_argument("--strict-height", action="store_true", help="check heights against side lengths")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="orienthough", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("synth", help="write a synthetic test scene")
    p.add_argument("kind", choices=("stripe", "rectangle_scene", "step_edge", "single_dot"))
    p.add_argument("output", type=Path)
    p.add_argument("--width", type=int, default=200, help="image width (px)")
    p.add_argument("--height", type=int, default=200, help="image height (px)")
    p.add_argument("--angle", type=float, default=0.0, help="line direction (deg)")
    p.add_argument("--thickness", type=float, default=2.0, help="stripe width (px)")
    p.add_argument("--offset", type=float, default=0.0, help="shift along the normal (px)")
    p.add_argument("--bright", type=int, default=255, help="foreground intensity")
    p.add_argument("--dark", type=int, default=0, help="background intensity")
    p.add_argument(
        "--rect",
        type=_rect_arg,
        action="append",
        default=[],
        metavar="X,Y,A,B[,I[,ANGLE]]",
        help="rectangle in centered coordinates (repeatable)",
    )
    p.add_argument("--point", type=_pair_arg, default=(0.0, 0.0), metavar="X,Y", help="single_dot position")
    p.add_argument("--supersample", type=int, default=1, help="subsamples per axis")
    p.add_argument("--noise-seed", type=int, default=0, help="noise RNG seed")
    p.add_argument("--noise-sigma", type=float, default=0.0, help="Gaussian noise std")

    p = sub.add_parser("gradient", help="write Sobel gx and gy as images")
    p.add_argument("input", type=Path)
    p.add_argument("gx_output", type=Path)
    p.add_argument("gy_output", type=Path)
    p.add_argument("--sigma", type=float, default=0.0, help="Gaussian pre-smoothing, 0 disables")

    p = sub.add_parser("edges", help="write the Canny edge map")
    p.add_argument("input", type=Path)
    p.add_argument("output", type=Path)
    _add_edge_flags(p)

    p = sub.add_parser("hough", help="write the rendered accumulator and its CSV dump")
    p.add_argument("input", type=Path)
    p.add_argument("output", type=Path)
    p.add_argument("csv_output", type=Path)
    _add_edge_flags(p)
    _add_hough_flags(p)

    p = sub.add_parser("peaks", help="write accumulator peaks as CSV")
    p.add_argument("input", type=Path)
    p.add_argument("output", type=Path)
    _add_edge_flags(p)
    _add_hough_flags(p)
    _add_peak_flags(p)

    p = sub.add_parser("lines", help="write clipped line segments and an overlay")
    p.add_argument("input", type=Path)
    p.add_argument("output", type=Path)
    p.add_argument("overlay_output", type=Path)
    _add_edge_flags(p)
    _add_hough_flags(p)
    _add_peak_flags(p)

    p = sub.add_parser("rect", help="write rectangle hits as JSON")
    p.add_argument("input", type=Path)
    p.add_argument("output", type=Path)
    _add_edge_flags(p)
    _add_hough_flags(p, with_mode=False)
    _add_peak_flags(p, threshold=DEFAULT_RECT_PEAK_THRESHOLD)
    _add_rect_flags(p)
    return parser


# -- stages ---------------------------------------------------------------------


def _read(path: Path) -> GrayImage:
    try:
        data = path.read_bytes()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror or exc}")
    try:
        return read_pgm(data)
    except PGMError as exc:
        raise InputError(f"{path}: {exc}")


def _write(path: Path, data) -> None:
    try:
        if isinstance(data, str):
            path.write_bytes(data.encode("ascii"))
        else:
            path.write_bytes(data)
    except OSError as exc:
        raise InputError(f"cannot write {path}: {exc.strerror or exc}")


def _edges(args, img):
    grad = sobel(img, sigma=args.sigma)
    return grad, canny_edges(grad, args.canny_high, args.canny_low, norm=args.norm)


def _params(args) -> HoughParams:
    return HoughParams(args.delta_rho, args.delta_theta, args.theta_window, args.weight_mode)


def _accumulator(args):
    img = _read(args.input)
    grad, edges = _edges(args, img)
    return img, hough_transform(img, grad, edges, _params(args), args.mode)


def _run_synth(args):
    spec = SceneSpec(
        args.kind,
        width=args.width,
        height=args.height,
        angle=args.angle,
        thickness=args.thickness,
        offset=args.offset,
        bright=args.bright,
        dark=args.dark,
        rects=args.rect,
        point=args.point,
        supersample=args.supersample,
        noise_seed=args.noise_seed,
        noise_sigma=args.noise_sigma,
    )
    _write(args.output, write_pgm(generate(spec)))


def _run_gradient(args):
    gx, gy = gradient_to_images(sobel(_read(args.input), sigma=args.sigma))
    _write(args.gx_output, write_pgm(gx))
    _write(args.gy_output, write_pgm(gy))


def _run_edges(args):
    _, edges = _edges(args, _read(args.input))
    _write(args.output, write_pgm(edges.to_image()))


def _run_hough(args):
    _, acc = _accumulator(args)
    _write(args.output, write_pgm(render_accumulator(acc)))
    _write(args.csv_output, acc.to_csv())


def _peaks(args, acc):
    return find_peaks(acc, args.threshold, args.nms_theta, args.nms_rho)


def _run_peaks(args):
    _, acc = _accumulator(args)
    _write(args.output, peaks_to_csv(_peaks(args, acc)))


def _run_lines(args):
    img, acc = _accumulator(args)
    segments = []
    for p in _peaks(args, acc):
        line = line_of_peak(p)
        seg = clip_to_image(line, img.width, img.height)
        if seg is not None:
            segments.append((line, seg))
    _write(args.output, segments_to_csv(segments, img.width, img.height))
    overlay = draw_segments(img.pixels, [s for _, s in segments], value=0)
    _write(args.overlay_output, write_pgm(GrayImage(overlay)))


def _run_rect(args):
    img = _read(args.input)
    grad, edges = _edges(args, img)
    params = _params(args)
    tol = RectTolerances(args.tol_theta, args.tol_orth, args.tol_rho, args.tol_height, args.strict_height)
    if args.window is None:
        hits = scan(
            img, grad, edges, args.window_size, args.stride, params, tol, args.rules,
            args.threshold, args.nms_theta, args.nms_rho, args.max_peaks,
        )
    else:
        mode = "extended" if args.rules == "extended" else "regular"
        acc = windowed_hough(img, grad, edges, RectWindow(args.window, args.window_size), params, mode)
        matcher = match_extended if args.rules == "extended" else match_regular
        hits = matcher(_peaks(args, acc), tol, args.window, args.max_peaks)
    _write(args.output, hits_to_json(hits))


_COMMANDS = {
    "synth": _run_synth,
    "gradient": _run_gradient,
    "edges": _run_edges,
    "hough": _run_hough,
    "peaks": _run_peaks,
    "lines": _run_lines,
    "rect": _run_rect,
}


def run(argv: list[str] | None = None) -> int:
    """Run one subcommand and return its exit status."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        _COMMANDS[args.command](args)
    except UsageError as exc:
        print(str(exc), file=sys.stderr)
        return 1
    except ValueError as exc:
        # Parameter values that parse but violate a module precondition.
        print(f"orienthough: {exc}", file=sys.stderr)
        return 1
    except InputError as exc:
        print(f"orienthough: {exc}", file=sys.stderr)
        return 2
    except SystemExit as exc:
        # --help
        return int(exc.code or 0)
    return 0


def main() -> None:
    sys.exit(run())
