"""Command-line front end: ``kgbeams {sample,verify,compare,info}``.

Exit status: 0 pass, 1 tolerance failure, 2 usage or grid error,
3 parameter out of range, 4 output not writable.

The number of worker threads is read from ``KGBEAMS_WORKERS`` (default: the
available CPU count).  Work is split into fixed-size chunks independent of
the worker count and reassembled in order, so outputs are byte-identical for
any degree of parallelism.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from . import __version__
from .beams import (
    FAMILIES,
    BeamPhysical,
    BesselParams,
    BGParams,
    BranchCutError,
    ComplexField,
    HGIndices,
    LGIndices,
    ParameterRangeError,
    family_info,
    field_mass,
    make_field,
    resolve_params,
)
from .construct import (
    ContourSpec,
    QuadratureSpec,
    bessel_from_quadrature,
    bg_from_quadrature,
    rodrigues_hg,
    rodrigues_lg,
)
from .coords import SpacetimePoint
from .specfun import SeriesConvergenceError
from .verify import FDSpec, StencilEvaluationError, _compare_values, _residuals, sample_points

EXIT_OK = 0
EXIT_TOLERANCE = 1
EXIT_USAGE = 2
EXIT_PARAMETER = 3
EXIT_IO = 4

WORKERS_ENV = "KGBEAMS_WORKERS"
CHUNK = 4096
POINT_CHUNK = 8
AXES = ("t", "x", "y", "z")
INT_PARAMS = {"n", "l", "mx", "ny", "k"}
COMPARE_MODES = {"lg": "rodrigues", "hg": "rodrigues", "bessel": "quadrature", "bg": "quadrature"}


class GridError(ValueError):
    pass


class UsageError(ValueError):
    pass


# ---------------------------------------------------------------- config


@dataclass(frozen=True)
class GridSpec:
    """Axes sampled as ``start:stop:count``; the rest fixed to scalars."""

    axes: dict
    fixed: dict
    cap: int = 10 ** 7

    def __post_init__(self):
        for name, (start, stop, count) in self.axes.items():
            if name not in AXES:
                raise GridError(f"unknown grid axis {name!r}")
            if not start <= stop:
                raise GridError(f"axis {name}: start > stop")
            if count < 1:
                raise GridError(f"axis {name}: count must be >= 1")
            if count == 1 and start != stop:
                raise GridError(f"axis {name}: a single sample needs start == stop")
        if self.n_points > self.cap:
            raise GridError(f"grid has {self.n_points} points, above the cap {self.cap}")

    @classmethod
    def parse(cls, text: str, fixed: dict, cap: int = 10 ** 7) -> "GridSpec":
        axes = {}
        for item in filter(None, (s.strip() for s in (text or "").split(","))):
            try:
                name, rng = item.split("=")
                start, stop, count = rng.split(":")
                axes[name.strip()] = (float(start), float(stop), int(count))
            except ValueError:
                raise GridError(f"bad grid item {item!r}; expected axis=start:stop:count") from None
            if name.strip() in fixed and fixed[name.strip()] is not None:
                raise GridError(f"axis {name.strip()} is both gridded and fixed")
        fixed = {k: float(v if v is not None else 0.0) for k, v in fixed.items() if k not in axes}
        return cls(axes=axes, fixed=fixed, cap=cap)

    @property
    def n_points(self) -> int:
        n = 1
        for _, _, c in self.axes.values():
            n *= c
        return n

    def axis_values(self, name):
        if name in self.axes:
            start, stop, count = self.axes[name]
            return np.linspace(start, stop, count)
        return np.array([self.fixed.get(name, 0.0)])

    def points(self):
        """Flattened ``(t, x, y, z)`` arrays in t-major, then x, y, z order."""
        mesh = np.meshgrid(*(self.axis_values(a) for a in AXES), indexing="ij")
        return tuple(m.ravel() for m in mesh)

    def to_dict(self) -> dict:
        return {"axes": {k: list(v) for k, v in self.axes.items()}, "fixed": dict(self.fixed), "cap": self.cap}

    @classmethod
    def from_dict(cls, d) -> "GridSpec":
        return cls(axes={k: (float(v[0]), float(v[1]), int(v[2])) for k, v in d["axes"].items()},
                   fixed={k: float(v) for k, v in d["fixed"].items()}, cap=int(d["cap"]))


@dataclass(frozen=True)
class RunConfig:
    command: str
    family: str
    params: dict
    grid: GridSpec | None = None
    n_points: int = 20
    seed: int = 0
    fd: FDSpec = FDSpec()
    contour: ContourSpec = ContourSpec()
    quadrature: QuadratureSpec = QuadratureSpec()
    threshold: float | None = None
    out: str | None = None
    format: str = "csv"
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "command": self.command,
            "family": self.family,
            "params": dict(self.params),
            "grid": None if self.grid is None else self.grid.to_dict(),
            "n_points": self.n_points,
            "seed": self.seed,
            "fd": asdict(self.fd),
            "contour": asdict(self.contour),
            "quadrature": asdict(self.quadrature),
            "threshold": self.threshold,
            "out": self.out,
            "format": self.format,
            "extra": dict(self.extra),
        }

    @classmethod
    def from_dict(cls, d) -> "RunConfig":
        return cls(
            command=d["command"], family=d["family"], params=dict(d["params"]),
            grid=None if d["grid"] is None else GridSpec.from_dict(d["grid"]),
            n_points=int(d["n_points"]), seed=int(d["seed"]),
            fd=FDSpec(**d["fd"]), contour=ContourSpec(**d["contour"]),
            quadrature=QuadratureSpec(**d["quadrature"]),
            threshold=d["threshold"], out=d["out"], format=d["format"], extra=dict(d["extra"]),
        )


def _dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def header_record(cfg: RunConfig) -> dict:
    return {"kgbeams": __version__, "config": cfg.to_dict()}


def read_header(path: str) -> RunConfig:
    """Rebuild the :class:`RunConfig` from a CSV header or a binary sidecar."""
    with open(path, "r", encoding="utf-8") as fh:
        first = fh.readline()
    if first.startswith("#"):
        first = first[1:]
    return RunConfig.from_dict(json.loads(first)["config"])


# ---------------------------------------------------------------- execution helpers


def worker_count() -> int:
    raw = os.environ.get(WORKERS_ENV)
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            raise UsageError(f"{WORKERS_ENV} must be an integer, got {raw!r}") from None
    return os.cpu_count() or 1


def _chunked_map(func, arrays, chunk):
    n = len(arrays[0])
    bounds = [(i, min(i + chunk, n)) for i in range(0, n, chunk)]
    jobs = [tuple(a[i:j] for a in arrays) for i, j in bounds]
    workers = worker_count()
    if workers > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda args: func(*args), jobs))
    else:
        parts = [func(*args) for args in jobs]
    return parts


def evaluate_grid(fld: ComplexField, grid: GridSpec):
    t, x, y, z = grid.points()
    if t.size == 0:
        return (t, x, y, z), np.zeros(0, dtype=complex)
    parts = _chunked_map(lambda *a: np.atleast_1d(fld.evaluate(*a)), (t, x, y, z), CHUNK)
    return (t, x, y, z), np.concatenate(parts)


def _parse_params(text: str | None) -> dict:
    out = {}
    for item in filter(None, (s.strip() for s in (text or "").split(","))):
        try:
            k, v = item.split("=")
        except ValueError:
            raise UsageError(f"bad parameter {item!r}; expected name=value") from None
        k = k.strip()
        try:
            out[k] = int(v) if k in INT_PARAMS else float(v)
        except ValueError:
            raise ParameterRangeError(f"parameter {k}: cannot parse {v!r}") from None
    return out


def _open_out(path, mode):
    try:
        return open(path, mode)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror}") from exc


def _write_report(report: dict, out: str | None):
    text = json.dumps(report, sort_keys=True, indent=2) + "\n"
    if out:
        with _open_out(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------- commands


def cmd_sample(cfg: RunConfig) -> int:
    fld = make_field(cfg.family, cfg.params)
    (t, x, y, z), vals = evaluate_grid(fld, cfg.grid)
    meta = header_record(cfg)
    if cfg.format == "csv":
        table = np.column_stack([t, x, y, z, vals.real, vals.imag])
        fh = _open_out(cfg.out, "w") if cfg.out else sys.stdout
        try:
            fh.write("# " + _dumps(meta) + "\n")
            fh.write("t,x,y,z,re,im\n")
            np.savetxt(fh, table, fmt="%.17g", delimiter=",")
        finally:
            if cfg.out:
                fh.close()
    elif cfg.format == "f64le":
        if not cfg.out:
            raise UsageError("--format f64le needs --out")
        data = np.empty(2 * vals.size, dtype="<f8")
        data[0::2] = vals.real
        data[1::2] = vals.imag
        with _open_out(cfg.out, "wb") as fh:
            fh.write(data.tobytes())
        with _open_out(cfg.out + ".json", "w") as fh:
            fh.write(_dumps(dict(meta, shape=[cfg.grid.axes.get(a, (0, 0, 1))[2] for a in AXES],
                                 layout="complex128 as little-endian (re, im) pairs, t-major")) + "\n")
    else:
        raise UsageError(f"unknown format {cfg.format!r}")
    return EXIT_OK


def cmd_verify(cfg: RunConfig) -> int:
    fld = make_field(cfg.family, cfg.params)
    threshold = 1e-6 if cfg.threshold is None else cfg.threshold
    m = field_mass(fld)
    if cfg.n_points:
        pts = sample_points(cfg.n_points, cfg.seed)
        parts = _chunked_map(lambda *a: _residuals(fld, SpacetimePoint(*a), m, cfg.fd)[2],
                             pts.arrays(), POINT_CHUNK)
        rel = np.concatenate(parts)
        i = int(np.argmax(rel))
        worst = dict(zip(AXES, pts[i].as_tuple()))
        max_rel, mean_rel = float(rel[i]), float(np.mean(rel))
    else:
        worst, max_rel, mean_rel = None, 0.0, 0.0
    passed = max_rel <= threshold
    _write_report({
        "kgbeams": __version__,
        "config": cfg.to_dict(),
        "max_relative": max_rel,
        "mean_relative": mean_rel,
        "worst_point": worst,
        "threshold": threshold,
        "passed": passed,
    }, cfg.out)
    return EXIT_OK if passed else EXIT_TOLERANCE


def _physical(pr):
    return BeamPhysical(E=float(pr["E"]), m=float(pr["m"]), w0=float(pr["w0"]))


def construction_field(family: str, params: dict, contour: ContourSpec = ContourSpec(),
                       quadrature: QuadratureSpec = QuadratureSpec()) -> ComplexField:
    """The constructive-engine counterpart of a closed-form family."""
    pr = resolve_params(family, params)
    if family == "lg":
        idx, phys = LGIndices(int(pr["n"]), int(pr["l"])), _physical(pr)
        func = lambda t, x, y, z: rodrigues_lg(idx, (t, x, y, z), phys, contour)  # noqa: E731
    elif family == "hg":
        idx, phys = HGIndices(int(pr["mx"]), int(pr["ny"])), _physical(pr)
        func = lambda t, x, y, z: rodrigues_hg(idx, (t, x, y, z), phys, contour)  # noqa: E731
    elif family == "bessel":
        prm = BesselParams(float(pr["p_perp"]), float(pr["p_z"]), int(pr["l"]))
        func = lambda t, x, y, z: bessel_from_quadrature(prm, (t, x, y, z), float(pr["m"]), quadrature)  # noqa: E731
    elif family == "bg":
        prm, phys = BGParams(float(pr["b"]), int(pr["l"])), _physical(pr)
        func = lambda t, x, y, z: bg_from_quadrature(prm, (t, x, y, z), phys, quadrature)  # noqa: E731
    else:
        raise UsageError(f"family {family!r} has no construction counterpart; "
                         f"supported: {', '.join(COMPARE_MODES)}")
    return ComplexField(func, family=f"{family}:{COMPARE_MODES[family]}", params=pr)


def cmd_compare(cfg: RunConfig) -> int:
    mode = cfg.extra.get("mode") or COMPARE_MODES.get(cfg.family)
    if COMPARE_MODES.get(cfg.family) != mode:
        raise UsageError(f"family {cfg.family!r} does not support mode {mode!r}")
    closed = make_field(cfg.family, cfg.params)
    built = construction_field(cfg.family, cfg.params, cfg.contour, cfg.quadrature)
    threshold = 1e-9 if cfg.threshold is None else cfg.threshold
    pts = sample_points(cfg.n_points, cfg.seed)
    va = np.concatenate(_chunked_map(lambda *a: np.atleast_1d(built.evaluate(*a)), pts.arrays(), POINT_CHUNK)) \
        if cfg.n_points else np.zeros(0, complex)
    vb = np.atleast_1d(closed(pts)) if cfg.n_points else np.zeros(0, complex)
    rep = _compare_values(va, vb, pts if cfg.n_points else None)
    passed = rep.max_rel_dev <= threshold
    _write_report({
        "kgbeams": __version__,
        "config": cfg.to_dict(),
        "mode": mode,
        "max_abs_dev": rep.max_abs_dev,
        "max_rel_dev": rep.max_rel_dev,
        "max_pointwise_rel_dev": rep.max_pointwise_rel_dev,
        "argmax_point": None if rep.argmax_point is None else dict(zip(AXES, rep.argmax_point.as_tuple())),
        "n_points": rep.n_points,
        "threshold": threshold,
        "passed": passed,
    }, cfg.out)
    return EXIT_OK if passed else EXIT_TOLERANCE


def info_text(family: str) -> str:
    info = family_info(family)
    lines = [f"{info.id}: {info.title}", f"  formula: {info.formula}", "  parameters:"]
    from .beams import RANGES
    for name in info.params:
        lo, hi = info.ranges.get(name, RANGES[name])
        lines.append(f"    {name:7s} default {info.defaults[name]!s:6s} range [{lo}, {hi}]")
    if info.order_param:
        lines.append(f"  rotation eigenphase order: {info.order_param}")
    if info.conventions:
        lines.append(f"  conventions: {info.conventions}")
    lines.append("  units: hbar = c = 1")
    return "\n".join(lines)


def cmd_info(family: str) -> int:
    print(info_text(family))
    return EXIT_OK


# ---------------------------------------------------------------- argument parsing


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kgbeams", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("family", help=f"one of: {', '.join(FAMILIES)}")
        p.add_argument("--params", default="", help="comma-separated name=value pairs")
        p.add_argument("--out", default=None, help="output path (default: stdout)")

    def sampled(p):
        p.add_argument("--points", type=int, default=20, dest="n_points")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--threshold", type=float, default=None)

    s = sub.add_parser("sample", help="evaluate a family on a grid")
    common(s)
    s.add_argument("--grid", default="", help='e.g. "x=-5:5:101,y=-5:5:101"')
    for a in AXES:
        s.add_argument(f"--{a}", type=float, default=None, help=f"fixed {a} value (default 0)")
    s.add_argument("--format", choices=("csv", "f64le"), default="csv")
    s.add_argument("--cap", type=int, default=10 ** 7, help="maximum number of grid points")

    v = sub.add_parser("verify", help="KG residual check at seeded random points")
    common(v)
    sampled(v)
    v.add_argument("--fd-order", type=int, default=8)
    v.add_argument("--fd-step", type=float, default=1e-2)

    c = sub.add_parser("compare", help="construction engine against closed form")
    common(c)
    sampled(c)
    c.add_argument("--mode", choices=("rodrigues", "quadrature"), default=None)
    c.add_argument("--nodes", type=int, default=None, help="quadrature or contour node count")
    c.add_argument("--radius-scale", type=float, default=1.0)

    i = sub.add_parser("info", help="describe a family")
    i.add_argument("family")
    return parser


def config_from_args(args) -> RunConfig:
    family_info(args.family)
    params = resolve_params(args.family, _parse_params(args.params))
    if args.command == "sample":
        grid = GridSpec.parse(args.grid, {a: getattr(args, a) for a in AXES}, cap=args.cap)
        return RunConfig("sample", args.family, params, grid=grid, out=args.out, format=args.format)
    if args.command == "verify":
        return RunConfig("verify", args.family, params, n_points=args.n_points, seed=args.seed,
                         fd=FDSpec(order=args.fd_order, step=args.fd_step),
                         threshold=args.threshold, out=args.out)
    mode = args.mode or COMPARE_MODES.get(args.family)
    is_quad = mode == "quadrature"
    contour = ContourSpec(nodes=None if is_quad else args.nodes, radius_scale=args.radius_scale)
    quad = QuadratureSpec(nodes=args.nodes) if (is_quad and args.nodes) else QuadratureSpec()
    return RunConfig("compare", args.family, params, n_points=args.n_points, seed=args.seed,
                     contour=contour, quadrature=quad, threshold=args.threshold, out=args.out,
                     extra={"mode": mode})


def run_config(cfg: RunConfig) -> int:
    return {"sample": cmd_sample, "verify": cmd_verify, "compare": cmd_compare}[cfg.command](cfg)


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "info":
            return cmd_info(args.family)
        return run_config(config_from_args(args))
    except KeyError as exc:
        print(f"error: {exc.args[0]}", file=sys.stderr)
        return EXIT_USAGE
    except (GridError, UsageError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ParameterRangeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARAMETER
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (StencilEvaluationError, BranchCutError, SeriesConvergenceError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_TOLERANCE


if __name__ == "__main__":
    sys.exit(main())
