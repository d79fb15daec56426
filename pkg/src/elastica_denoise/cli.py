"""Command-line interface.

Four subcommands: ``denoise`` (run one solver), ``synth`` (write clean and
noisy ring images), ``metrics`` (compare two image files), and ``compare``
(run a grid of solver configurations on one shared input and report them
side by side, figures included).

The CLI is a thin shell: every number it prints comes from a library call
with the same configuration. Exit codes: 0 success, 2 configuration error,
3 I/O error, 4 solver divergence.
"""

from __future__ import annotations

import argparse
import csv
import math
import os
import sys

from .imgio import (
    MalformedImageError,
    MalformedTraceError,
    UnsupportedImageError,
    load_image,
    save_image,
    save_trace,
)
from .model import SolverParams, nmad, nrmse, psnr
from .report import save_comparison_figures, save_trace_figure
from .solvers import DivergenceError, SolverKind, StopRule, run
from .synth import NoiseSpec, RingSpec, add_gaussian_noise, make_rings

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3
EXIT_DIVERGED = 4

# Parameter defaults; any of these can also come from a --config file, and
# explicit flags override the file.
DEFAULTS = {
    "solver": "ralm",
    "a": 1.0,
    "b": 0.1,
    "lam": 11.0,
    "r1": 50.0,
    "r2": 3.0,
    "r3": 2.0,
    "gamma": 1e-5,
    "delta1": 1e-2,
    "delta2": 1e-2,
    "epsilon": 1e-4,
    "tol": 9e-5,
    "max_iter": 10000,
    "noise_variance": 0.01,
    "seed": 0,
    "add_noise": False,
}

_PARAM_KEYS = ("a", "b", "lam", "r1", "r2", "r3", "gamma", "delta1", "delta2", "epsilon", "tol")
_CONFIG_ALIASES = {"lambda": "lam", "variance": "noise_variance"}


class ConfigError(ValueError):
    pass


def _fmt(x: float) -> str:
    if isinstance(x, float) and math.isinf(x):
        return "inf" if x > 0 else "-inf"
    if isinstance(x, float) and math.isnan(x):
        return "nan"
    return f"{x:#.6g}"


def _parse_config_file(path: str) -> dict:
    values = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected key=value, got {line!r}")
            key, value = (part.strip() for part in line.split("=", 1))
            values[_normalize_key(key)] = value
    return values


def _normalize_key(key: str) -> str:
    key = key.strip().lower().replace("-", "_")
    return _CONFIG_ALIASES.get(key, key)


def _parse_bool(text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"expected a boolean, got {text!r}")


def _resolve(args, config: dict, key: str, cast):
    """Flag value if given, else config-file value, else built-in default."""
    flag = getattr(args, key, None)
    if flag is not None:
        return flag
    if key in config:
        raw = config[key]
        try:
            return _parse_bool(raw) if cast is bool else cast(raw)
        except ValueError as exc:
            raise ConfigError(f"config key {key}: {exc}") from None
    return DEFAULTS.get(key)


def _resolved_settings(args) -> dict:
    config = _parse_config_file(args.config) if getattr(args, "config", None) else {}
    unknown = set(config) - set(DEFAULTS) - {"input", "rings", "radii", "intensities"}
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    out = {}
    for key, default in DEFAULTS.items():
        cast = type(default)
        out[key] = _resolve(args, config, key, cast)
    for key in ("input", "rings", "radii", "intensities"):
        out[key] = _resolve(args, config, key, str)
    return out


def _make_params(settings: dict, **overrides) -> SolverParams:
    kwargs = {key: settings[key] for key in _PARAM_KEYS}
    kwargs["max_iter"] = int(settings["max_iter"])
    kwargs.update(overrides)
    return SolverParams(**kwargs)


def _parse_size(text: str):
    text = text.lower().strip()
    if "x" in text:
        m, n = text.split("x", 1)
        return int(m), int(n)
    return int(text), int(text)


def _parse_float_list(text: str):
    return tuple(float(part) for part in text.split(",") if part.strip())


def _alternating_intensities(count: int):
    return tuple(0.15 if k % 2 == 0 else 0.85 for k in range(count))


def _ring_spec(settings: dict) -> RingSpec:
    size = _parse_size(settings["rings"])
    radii = settings.get("radii")
    if not radii:
        return RingSpec.default(size)
    radii = _parse_float_list(radii)
    intensities = settings.get("intensities")
    if intensities:
        intensities = _parse_float_list(intensities)
    else:
        intensities = _alternating_intensities(len(radii) + 1)
    return RingSpec(size=size, radii=radii, intensities=intensities)


def _load_input(settings: dict):
    """Build (observed image, reference or None) from the resolved settings."""
    has_input = bool(settings.get("input"))
    has_rings = bool(settings.get("rings"))
    if has_input == has_rings:
        raise ConfigError("exactly one of --input and --rings is required")
    if has_input:
        clean = None
        f = load_image(settings["input"])
    else:
        clean = make_rings(_ring_spec(settings))
        f = clean
    if settings["add_noise"]:
        f = add_gaussian_noise(f, NoiseSpec(settings["noise_variance"], int(settings["seed"])))
    return f, clean


def _solver_kind(name: str) -> SolverKind:
    try:
        return SolverKind(name.lower())
    except ValueError:
        raise ConfigError(f"unknown solver {name!r}; choose from "
                          f"{[k.value for k in SolverKind]}") from None


def _add_solver_arguments(parser: argparse.ArgumentParser):
    grp = parser.add_argument_group("solver parameters")
    grp.add_argument("--solver", choices=[k.value for k in SolverKind],
                     help="solver variant (default ralm)")
    grp.add_argument("--a", type=float, help="TV weight")
    grp.add_argument("--b", type=float, help="curvature weight (0 = plain TV)")
    grp.add_argument("--lambda", dest="lam", type=float, help="fidelity weight")
    grp.add_argument("--r1", type=float, help="direction-constraint penalty")
    grp.add_argument("--r2", type=float, help="gradient-constraint penalty")
    grp.add_argument("--r3", type=float, help="divergence-constraint penalty")
    grp.add_argument("--gamma", type=float, help="proximal weight of the n-update")
    grp.add_argument("--delta1", type=float, help="u-update step size")
    grp.add_argument("--delta2", type=float, help="n-update step size")
    grp.add_argument("--epsilon", type=float, help="magnitude regularization (default 1e-4)")
    grp.add_argument("--tol", type=float, help="relative-residual stopping threshold")
    grp.add_argument("--max-iter", dest="max_iter", type=int, help="iteration cap")


def _add_input_arguments(parser: argparse.ArgumentParser):
    grp = parser.add_argument_group("input")
    grp.add_argument("--input", help="grayscale PGM/PNG image to denoise")
    grp.add_argument("--rings", help="use a synthetic rings image, e.g. 256 or 512x512")
    grp.add_argument("--radii", help="comma list of ring radii (with --rings)")
    grp.add_argument("--intensities", help="comma list of annulus intensities (radii+1 values)")
    grp.add_argument("--reference", help="clean reference image for quality metrics")
    grp.add_argument("--add-noise", dest="add_noise", action="store_const", const=True,
                     help="add seeded Gaussian noise to the input before solving")
    grp.add_argument("--noise-variance", dest="noise_variance", type=float,
                     help="noise variance (default 0.01)")
    grp.add_argument("--seed", type=int, help="noise seed (default 0)")
    grp.add_argument("--config", help="key=value file with any of the above; flags win")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="elastica-denoise",
        description="TV / elastica image denoising with augmented-Lagrangian solvers.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    d = sub.add_parser("denoise", help="run one solver on an image")
    _add_input_arguments(d)
    _add_solver_arguments(d)
    d.add_argument("--output", help="restored image path (.pgm or .png)")
    d.add_argument("--format", choices=["pgm", "pgm-ascii", "png"],
                   help="output image format (default from extension)")
    d.add_argument("--trace", help="write per-iteration CSV trace here")
    d.add_argument("--figure", help="render the trace as a PNG figure here")
    d.set_defaults(func=cmd_denoise)

    s = sub.add_parser("synth", help="write clean and noisy ring images")
    s.add_argument("--size", default="512", help="image size, e.g. 512 or 512x512")
    s.add_argument("--radii", help="comma list of ring radii (default: canonical geometry)")
    s.add_argument("--intensities", help="comma list of annulus intensities")
    s.add_argument("--variance", type=float, default=0.01, help="noise variance")
    s.add_argument("--seed", type=int, default=0, help="noise seed")
    s.add_argument("--clean", required=True, help="output path for the clean image")
    s.add_argument("--noisy", required=True, help="output path for the noisy image")
    s.set_defaults(func=cmd_synth)

    m = sub.add_parser("metrics", help="print PSNR/NRMSE/NMAD between two images")
    m.add_argument("reference", help="reference image file")
    m.add_argument("test", help="test image file")
    m.set_defaults(func=cmd_metrics)

    c = sub.add_parser("compare", help="run several solver configurations side by side")
    _add_input_arguments(c)
    _add_solver_arguments(c)
    c.add_argument("--out-dir", required=True, help="directory for traces, images and figures")
    c.add_argument("--cell", action="append", default=[], metavar="KEY=VAL[,KEY=VAL...]",
                   help="one solver cell overriding the base flags; repeatable")
    c.add_argument("--preset", choices=["b0-consistency"],
                   help="built-in experiment: RALM and LALMn at b=0, r1 in {50,500,5000}")
    c.add_argument("--image-format", choices=["pgm", "pgm-ascii", "png"], default="pgm",
                   help="format of per-cell restored images")
    c.add_argument("--no-figures", action="store_true", help="skip figure rendering")
    c.set_defaults(func=cmd_compare)
    return parser


def cmd_denoise(args) -> int:
    settings = _resolved_settings(args)
    kind = _solver_kind(settings["solver"])
    params = _make_params(settings)
    f, clean = _load_input(settings)
    if args.reference:
        reference = load_image(args.reference)
        if reference.shape != f.shape:
            raise ConfigError(
                f"reference shape {reference.shape} does not match input {f.shape}")
    else:
        reference = clean

    try:
        u, trace = run(f, kind, params, StopRule(params.tol, params.max_iter), reference)
    except DivergenceError as err:
        print(f"error: {err}", file=sys.stderr)
        if args.trace and err.trace is not None:
            save_trace(err.trace, args.trace)
        return EXIT_DIVERGED

    if args.output:
        save_image(u, args.output, format=args.format)
    if args.trace:
        save_trace(trace, args.trace)
    if args.figure:
        save_trace_figure(trace, args.figure, title=f"{kind.value} ({len(trace)} iterations)")

    if reference is not None:
        line_psnr, line_nrmse, line_nmad = (
            psnr(reference, u), nrmse(reference, u), nmad(reference, u))
    else:
        line_psnr = line_nrmse = line_nmad = math.nan
    print(f"iter={len(trace)} energy={_fmt(_last(trace.energy))} psnr={_fmt(line_psnr)} "
          f"nrmse={_fmt(line_nrmse)} nmad={_fmt(line_nmad)}")
    return EXIT_OK


def cmd_synth(args) -> int:
    size = _parse_size(args.size)
    if args.radii:
        radii = _parse_float_list(args.radii)
        intensities = (_parse_float_list(args.intensities) if args.intensities
                       else _alternating_intensities(len(radii) + 1))
        spec = RingSpec(size=size, radii=radii, intensities=intensities)
    else:
        spec = RingSpec.default(size)
    clean = make_rings(spec)
    noisy = add_gaussian_noise(clean, NoiseSpec(args.variance, args.seed))
    save_image(clean, args.clean)
    save_image(noisy, args.noisy)
    print(f"wrote {args.clean} and {args.noisy} ({spec.size[0]}x{spec.size[1]}, "
          f"variance={args.variance}, seed={args.seed})")
    return EXIT_OK


def cmd_metrics(args) -> int:
    reference = load_image(args.reference)
    test = load_image(args.test)
    for label, metric in (("PSNR", psnr), ("NRMSE", nrmse), ("NMAD", nmad)):
        try:
            value = metric(reference, test)
        except ValueError:
            value = math.nan  # undefined for this reference (e.g. constant image)
        print(f"{label} {_fmt(value)}")
    return EXIT_OK


def _parse_cell(text: str, index: int):
    overrides = {}
    label = None
    for item in text.split(","):
        item = item.strip()
        if not item:
            continue
        if "=" not in item:
            raise ConfigError(f"cell {text!r}: expected key=value items")
        key, value = (part.strip() for part in item.split("=", 1))
        key = _normalize_key(key)
        if key == "label":
            label = value
        elif key == "solver":
            overrides["solver"] = value
        elif key == "max_iter":
            overrides["max_iter"] = int(value)
        elif key in _PARAM_KEYS:
            overrides[key] = float(value)
        else:
            raise ConfigError(f"cell {text!r}: unknown key {key!r}")
    if label is None:
        label = f"cell{index}-{overrides.get('solver', 'base')}"
    return label, overrides


def _preset_cells(name: str):
    if name != "b0-consistency":
        raise ConfigError(f"unknown preset {name!r}")
    cells = []
    for solver in ("ralm", "lalmn"):
        for r1 in (50.0, 500.0, 5000.0):
            cells.append((f"{solver}-r1-{r1:g}", {"solver": solver, "b": 0.0, "r1": r1}))
    return cells


def _last(values) -> float:
    return values[-1] if values else math.nan


def _trace_columns_equal(a, b) -> bool:
    if len(a) != len(b):
        return False
    for x, y in zip(a, b):
        if math.isnan(x) and math.isnan(y):
            continue
        if x != y:
            return False
    return True


def _traces_identical(traces) -> bool:
    """Same u-trajectory indices (energy, psnr, residual) in every trace."""
    first = traces[0]
    for other in traces[1:]:
        if not (
            _trace_columns_equal(first.energy, other.energy)
            and _trace_columns_equal(first.psnr, other.psnr)
            and _trace_columns_equal(first.residual, other.residual)
        ):
            return False
    return True


def cmd_compare(args) -> int:
    settings = _resolved_settings(args)
    f, clean = _load_input(settings)
    if args.reference:
        reference = load_image(args.reference)
    else:
        reference = clean

    cells = []
    if args.preset:
        cells.extend(_preset_cells(args.preset))
    for index, text in enumerate(args.cell):
        cells.append(_parse_cell(text, index))
    if not cells:
        cells.append(("base", {}))

    os.makedirs(args.out_dir, exist_ok=True)
    ext = {"pgm": ".pgm", "pgm-ascii": ".pgm", "png": ".png"}[args.image_format]

    results = {}
    failures = {}
    for label, overrides in cells:
        kind = _solver_kind(overrides.pop("solver", settings["solver"]))
        max_iter = int(overrides.pop("max_iter", settings["max_iter"]))
        params = _make_params(settings, max_iter=max_iter, **overrides)
        try:
            u, trace = run(f, kind, params, StopRule(params.tol, max_iter), reference)
        except DivergenceError as err:
            failures[label] = err
            if err.trace is not None:
                save_trace(err.trace, os.path.join(args.out_dir, f"{label}.csv"))
            continue
        save_trace(trace, os.path.join(args.out_dir, f"{label}.csv"))
        save_image(u, os.path.join(args.out_dir, label + ext), format=args.image_format)
        results[label] = (kind, u, trace)

    summary_path = os.path.join(args.out_dir, "summary.csv")
    with open(summary_path, "w", encoding="ascii", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["label", "solver", "status", "iterations", "energy",
                         "psnr", "nrmse", "nmad", "residual", "norm_n", "seconds"])
        for label, overrides in cells:
            if label in failures:
                err = failures[label]
                writer.writerow([label, "", "diverged", err.iteration] + [""] * 7)
                continue
            kind, u, trace = results[label]
            if reference is not None:
                q_psnr, q_nrmse, q_nmad = (
                    psnr(reference, u), nrmse(reference, u), nmad(reference, u))
            else:
                q_psnr = q_nrmse = q_nmad = math.nan
            writer.writerow([
                label, kind.value, "ok", len(trace), _fmt(_last(trace.energy)),
                _fmt(q_psnr), _fmt(q_nrmse), _fmt(q_nmad),
                _fmt(_last(trace.residual)), _fmt(_last(trace.norm_n)),
                f"{trace.duration:.3f}",
            ])

    if not args.no_figures and results:
        save_comparison_figures({lbl: t for lbl, (_, _, t) in results.items()}, args.out_dir)

    header = f"{'label':<20} {'solver':<7} {'status':<9} {'iter':>6} {'psnr':>10} {'residual':>12}"
    print(header)
    for label, _ in cells:
        if label in failures:
            print(f"{label:<20} {'':<7} {'diverged':<9} {failures[label].iteration:>6}")
            continue
        kind, u, trace = results[label]
        q_psnr = psnr(reference, u) if reference is not None else math.nan
        print(f"{label:<20} {kind.value:<7} {'ok':<9} {len(trace):>6} "
              f"{_fmt(q_psnr):>10} {_fmt(_last(trace.residual)):>12}")

    if args.preset == "b0-consistency":
        for solver in ("ralm", "lalmn"):
            labels = [lbl for lbl, _ in cells if lbl.startswith(f"{solver}-r1-")]
            if any(lbl in failures for lbl in labels):
                print(f"{solver}: identical across r1: n/a (cell diverged)")
                continue
            identical = _traces_identical([results[lbl][2] for lbl in labels])
            print(f"{solver}: identical across r1: {'yes' if identical else 'no'}")

    print(f"summary written to {summary_path}")
    return EXIT_DIVERGED if failures else EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (MalformedImageError, UnsupportedImageError, MalformedTraceError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
