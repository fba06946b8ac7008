"""Command-line front end.

Commands: ``channel``, ``sweep``, ``tomography``, ``ellipsoid``, ``compare``.
Angles are degrees on the command line; ``magic1`` = atan(1/sqrt 2) and
``magic2`` = atan(sqrt 2).  Exit codes: 0 ok, 2 usage, 3 I/O, 4 reconstruction
failure, 5 malformed input data.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import process as proc
from .errors import PolQPTError
from .io import MalformedDataError, chi_to_csv, chi_to_dict, dumps_json, read_chi, rows_to_csv
from .measurement import DEFAULT_EXPOSURE, child_seed
from .optics import SCHEME_I, SCHEME_II, ChannelScheme
from .qstate import parse_state
from .tomography import FULL4, UNITAL3, reconstruct_process_full, theory_chi

EXIT_OK, EXIT_USAGE, EXIT_IO, EXIT_RECONSTRUCTION, EXIT_MALFORMED = 0, 2, 3, 4, 5
THEORY = "theory"
MODES = (THEORY, UNITAL3, FULL4)
SYMBOLIC_ANGLES = {
    "magic1": float(np.degrees(np.arctan(1 / np.sqrt(2)))),
    "magic2": float(np.degrees(np.arctan(np.sqrt(2)))),
}
DEFAULT_SWEEP = (0.0, 90.0, 2.5)


class UsageError(Exception):
    pass


@dataclass
class ExperimentConfig:
    scheme: str = SCHEME_I
    angle_degrees: float | None = None
    sweep: tuple[float, float, float] | None = None
    inputs: list[str] | None = None
    exposure: float = DEFAULT_EXPOSURE
    seed: int | None = None
    mode: str = THEORY
    qst: str = "ml"
    output_path: str | None = None
    format: str = "json"
    grid: tuple[int, int] = (24, 48)

    def channel(self, angle_degrees: float | None = None) -> ChannelScheme:
        deg = self.angle_degrees if angle_degrees is None else angle_degrees
        return ChannelScheme(self.scheme, np.radians(deg))

    def resolved_inputs(self) -> list[str]:
        if self.inputs:
            return list(self.inputs)
        if self.mode == FULL4:
            return ["h", "v", "p", "r"]
        return ["h", "p", "r"] if self.scheme == SCHEME_I else ["a", "b", "c"]


# --- parsing -----------------------------------------------------------------------------


def parse_scheme(value: str) -> str:
    key = str(value).strip().lower().removeprefix("scheme").strip("_- ")
    if key in ("i", "1"):
        return SCHEME_I
    if key in ("ii", "2"):
        return SCHEME_II
    raise UsageError(f"unknown scheme {value!r} (use I or II)")


def parse_angle(value) -> float:
    if isinstance(value, (int, float)):
        return float(value)
    key = str(value).strip().lower()
    if key in SYMBOLIC_ANGLES:
        return SYMBOLIC_ANGLES[key]
    try:
        return float(key)
    except ValueError:
        raise UsageError(f"cannot parse angle {value!r}") from None


def parse_sweep(value) -> tuple[float, float, float]:
    if isinstance(value, dict):
        try:
            parts = [value["start"], value["stop"], value["step"]]
        except KeyError as err:
            raise UsageError(f"sweep object missing {err}") from None
    else:
        parts = str(value).split(":")
    if len(parts) != 3:
        raise UsageError(f"sweep must be start:stop:step, got {value!r}")
    start, stop, step = (parse_angle(p) for p in parts)
    if not step > 0:
        raise UsageError("sweep step must be positive")
    if stop < start:
        raise UsageError("sweep stop must not be below start")
    return start, stop, step


def sweep_angles(start: float, stop: float, step: float) -> list[float]:
    n = int(np.floor((stop - start) / step + 1e-9)) + 1
    return [start + k * step for k in range(n)]


def parse_grid(value) -> tuple[int, int]:
    if isinstance(value, (list, tuple)):
        parts = list(value)
    else:
        parts = str(value).lower().split("x")
    try:
        n_lat, n_lon = (int(p) for p in parts)
    except (TypeError, ValueError):
        raise UsageError(f"grid must look like 24x48, got {value!r}") from None
    if n_lat < 2 or n_lon < 1:
        raise UsageError("grid needs at least 2 latitudes and 1 longitude")
    return n_lat, n_lon


def _load_config_file(path: str) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as err:
        raise UsageError(f"cannot read config file {path}: {err}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as err:
        raise UsageError(f"config file {path} is not valid JSON: {err}") from None
    if not isinstance(data, dict):
        raise UsageError("config file must hold a JSON object")
    return data


def build_config(args: argparse.Namespace, default_mode: str = THEORY) -> ExperimentConfig:
    """Merge a JSON config file (if any) with command-line flags; flags win."""
    raw = _load_config_file(args.config) if getattr(args, "config", None) else {}
    flags = {
        "scheme": args.scheme,
        "angle_degrees": getattr(args, "angle", None),
        "sweep": getattr(args, "sweep", None),
        "inputs": args.inputs,
        "exposure": args.exposure,
        "seed": args.seed,
        "mode": getattr(args, "mode", None),
        "qst": getattr(args, "qst", None),
        "output_path": args.out,
        "format": args.format,
        "grid": getattr(args, "grid", None),
    }
    raw.update({k: v for k, v in flags.items() if v is not None})

    cfg = ExperimentConfig()
    cfg.scheme = parse_scheme(raw.get("scheme", SCHEME_I))
    if raw.get("angle_degrees") is not None:
        cfg.angle_degrees = parse_angle(raw["angle_degrees"])
    if raw.get("sweep") is not None:
        cfg.sweep = parse_sweep(raw["sweep"])
    if raw.get("inputs") is not None:
        inputs = raw["inputs"]
        cfg.inputs = [inputs] if isinstance(inputs, str) else [
            i if isinstance(i, str) else ",".join(str(x) for x in i) for i in inputs
        ]
        for item in cfg.inputs:
            try:
                parse_state(item)
            except ValueError as err:
                raise UsageError(str(err)) from None
    try:
        cfg.exposure = float(raw.get("exposure", DEFAULT_EXPOSURE))
    except (TypeError, ValueError):
        raise UsageError(f"bad exposure {raw.get('exposure')!r}") from None
    if not cfg.exposure > 0:
        raise UsageError("exposure must be positive")
    if raw.get("seed") is not None:
        try:
            cfg.seed = int(raw["seed"])
        except (TypeError, ValueError):
            raise UsageError(f"bad seed {raw['seed']!r}") from None
        if cfg.seed < 0:
            raise UsageError("seed must be non-negative")
    cfg.mode = raw.get("mode", default_mode)
    if cfg.mode not in MODES:
        raise UsageError(f"mode must be one of {MODES}")
    cfg.qst = raw.get("qst", "ml")
    if cfg.qst not in ("ml", "linear"):
        raise UsageError("qst must be 'ml' or 'linear'")
    cfg.output_path = raw.get("output_path")
    cfg.format = raw.get("format", "json")
    if cfg.format not in ("json", "csv"):
        raise UsageError("format must be 'json' or 'csv'")
    if raw.get("grid") is not None:
        cfg.grid = parse_grid(raw["grid"])
    return cfg


def _require_angle(cfg: ExperimentConfig) -> None:
    if cfg.angle_degrees is None:
        raise UsageError("--angle is required")


def _require_seed(cfg: ExperimentConfig) -> None:
    if cfg.mode != THEORY and cfg.seed is None:
        raise UsageError(f"--seed is required for mode {cfg.mode}")


# --- shared computations -----------------------------------------------------------------


def _fl(values) -> list:
    return [float(v) for v in np.ravel(values)]


def _process_summary(chi) -> dict:
    return {
        "eigenvalues": _fl(proc.chi_eigenvalues(chi)),
        "ellipsoid_radii": _fl(proc.ellipsoid_radii(chi)),
        "unitality_residual": proc.unitality_residual(chi),
    }


def _reconstruct(cfg: ExperimentConfig, scheme: ChannelScheme, seed: int):
    inputs = cfg.resolved_inputs()
    return reconstruct_process_full(scheme, inputs, cfg.exposure, seed, cfg.mode, qst=cfg.qst)


def _process_for(cfg: ExperimentConfig, scheme: ChannelScheme, seed: int | None) -> np.ndarray:
    if cfg.mode == THEORY:
        return theory_chi(scheme)
    return _reconstruct(cfg, scheme, seed).chi


def _write(cfg: ExperimentConfig, text: str) -> None:
    if cfg.output_path is None:
        sys.stdout.write(text)
        return
    try:
        Path(cfg.output_path).write_text(text)
    except OSError as err:
        raise OSError(f"cannot write {cfg.output_path}: {err}") from err


def _fmt(values) -> str:
    return " ".join(f"{v:.6f}" for v in values)


def _print_matrix(name: str, m) -> None:
    print(f"{name}:")
    for row in np.asarray(m):
        print("  " + " ".join(f"{v:+.6f}" for v in row))


# --- commands ----------------------------------------------------------------------------


def cmd_channel(cfg: ExperimentConfig) -> int:
    _require_angle(cfg)
    if cfg.mode != THEORY:
        raise UsageError("channel reports the theoretical process; use 'tomography' for reconstructions")
    scheme = cfg.channel()
    chi = theory_chi(scheme)
    summary = _process_summary(chi)
    print(f"{scheme.tag} at {cfg.angle_degrees:.6g} deg")
    _print_matrix("chi (real)", chi.real)
    _print_matrix("chi (imag)", chi.imag)
    _print_matrix("PTM", proc.chi_to_ptm(chi))
    print(f"eigenvalues: {_fmt(summary['eigenvalues'])}")
    print(f"ellipsoid radii: {_fmt(summary['ellipsoid_radii'])}")
    if cfg.output_path is not None:
        if cfg.format == "csv":
            _write(cfg, chi_to_csv(chi))
        else:
            payload = {
                "command": "channel",
                "scheme": scheme.tag,
                "angle_degrees": cfg.angle_degrees,
                "chi": chi_to_dict(chi),
                "ptm": proc.chi_to_ptm(chi).tolist(),
                **summary,
            }
            _write(cfg, dumps_json(payload))
    return EXIT_OK


SWEEP_HEADER = [
    "angle_degrees", "eig1", "eig2", "eig3", "eig4",
    "radius1", "radius2", "radius3", "unitality_residual", "fidelity_to_theory",
]


def sweep_rows(cfg: ExperimentConfig) -> list[dict]:
    """One row per angle; stochastic rows use child seed ``(seed, row index)``."""
    angles = sweep_angles(*(cfg.sweep or DEFAULT_SWEEP))
    rows = []
    for idx, deg in enumerate(angles):
        scheme = cfg.channel(deg)
        theory = theory_chi(scheme)
        if cfg.mode == THEORY:
            chi, fidelity = theory, None
        else:
            chi = _reconstruct(cfg, scheme, child_seed(cfg.seed, idx)).chi
            fidelity = proc.process_fidelity(chi, theory)
        summary = _process_summary(chi)
        rows.append({"angle_degrees": float(deg), **summary, "fidelity_to_theory": fidelity})
    return rows


def cmd_sweep(cfg: ExperimentConfig) -> int:
    _require_seed(cfg)
    rows = sweep_rows(cfg)
    if cfg.format == "csv":
        text = rows_to_csv(SWEEP_HEADER, [
            [r["angle_degrees"], *r["eigenvalues"], *r["ellipsoid_radii"],
             r["unitality_residual"], r["fidelity_to_theory"]]
            for r in rows
        ])
    else:
        payload = {
            "command": "sweep",
            "scheme": cfg.scheme,
            "mode": cfg.mode,
            "qst": None if cfg.mode == THEORY else cfg.qst,
            "inputs": None if cfg.mode == THEORY else cfg.resolved_inputs(),
            "exposure": None if cfg.mode == THEORY else cfg.exposure,
            "seed": cfg.seed,
            "rows": rows,
        }
        text = dumps_json(payload)
    _write(cfg, text)
    if cfg.output_path is not None:
        print(f"{len(rows)} rows written to {cfg.output_path}")
    return EXIT_OK


def cmd_tomography(cfg: ExperimentConfig) -> int:
    _require_angle(cfg)
    if cfg.mode == THEORY:
        raise UsageError("tomography needs --mode unital3 or full4")
    _require_seed(cfg)
    scheme = cfg.channel()
    result = _reconstruct(cfg, scheme, cfg.seed)
    theory = theory_chi(scheme)
    fidelity = proc.process_fidelity(result.chi, theory)
    tp = proc.trace_preservation_residual(result.chi)
    summary = _process_summary(result.chi)
    print(f"{scheme.tag} at {cfg.angle_degrees:.6g} deg, {cfg.mode}, inputs {' '.join(cfg.resolved_inputs())}")
    _print_matrix("chi (real)", result.chi.real)
    _print_matrix("chi (imag)", result.chi.imag)
    print(f"eigenvalues: {_fmt(summary['eigenvalues'])}")
    print(f"ellipsoid radii: {_fmt(summary['ellipsoid_radii'])}")
    print(f"fidelity to theory: {fidelity:.6f}")
    print(f"unitality residual: {summary['unitality_residual']:.3e}")
    print(f"trace-preservation residual: {tp:.3e}")
    if cfg.output_path is not None:
        if cfg.format == "csv":
            _write(cfg, chi_to_csv(result.chi))
        else:
            payload = {
                "command": "tomography",
                "scheme": scheme.tag,
                "angle_degrees": cfg.angle_degrees,
                "mode": cfg.mode,
                "qst": cfg.qst,
                "inputs": cfg.resolved_inputs(),
                "exposure": cfg.exposure,
                "seed": cfg.seed,
                "chi": chi_to_dict(result.chi),
                "chi_linear": chi_to_dict(result.chi_linear),
                "output_stokes": [_fl(s) for s in result.output_stokes],
                **summary,
                "fidelity_to_theory": fidelity,
                "trace_preservation_residual": tp,
            }
            _write(cfg, dumps_json(payload))
    return EXIT_OK


def sphere_grid(n_lat: int, n_lon: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Latitudes (poles included), longitudes and the unit Stokes vectors, row-major."""
    lat = np.linspace(-90.0, 90.0, n_lat)
    lon = np.arange(n_lon) * (360.0 / n_lon)
    la, lo = np.meshgrid(np.radians(lat), np.radians(lon), indexing="ij")
    pts = np.stack([np.cos(la) * np.cos(lo), np.cos(la) * np.sin(lo), np.sin(la)], axis=-1)
    return lat, lon, pts.reshape(-1, 3)


def cmd_ellipsoid(cfg: ExperimentConfig) -> int:
    _require_angle(cfg)
    _require_seed(cfg)
    scheme = cfg.channel()
    chi = _process_for(cfg, scheme, cfg.seed)
    bmap = proc.bloch_map(chi)
    n_lat, n_lon = cfg.grid
    lat, lon, pts = sphere_grid(n_lat, n_lon)
    images = bmap(pts)
    lat_col = np.repeat(lat, n_lon)
    lon_col = np.tile(lon, n_lat)
    radii = proc.ellipsoid_radii(chi)
    if cfg.format == "csv":
        text = rows_to_csv(
            ["lat_degrees", "lon_degrees", "s1", "s2", "s3", "out1", "out2", "out3"],
            [[float(a), float(b), *map(float, p), *map(float, q)]
             for a, b, p, q in zip(lat_col, lon_col, pts, images)],
        )
    else:
        text = dumps_json({
            "command": "ellipsoid",
            "scheme": scheme.tag,
            "angle_degrees": cfg.angle_degrees,
            "mode": cfg.mode,
            "seed": cfg.seed,
            "grid": [n_lat, n_lon],
            "ellipsoid_radii": _fl(radii),
            "linear": bmap.linear.tolist(),
            "translation": _fl(bmap.translation),
            "latitudes_degrees": _fl(lat),
            "longitudes_degrees": _fl(lon),
            "inputs": pts.tolist(),
            "images": images.tolist(),
        })
    _write(cfg, text)
    if cfg.output_path is not None:
        print(f"{len(pts)} points written to {cfg.output_path}; radii {_fmt(radii)}")
    return EXIT_OK


def compare_processes(chi_a, chi_b) -> dict:
    return {
        "fidelity": proc.process_fidelity(chi_a, chi_b),
        "eigenvalues_a": _fl(proc.chi_eigenvalues(chi_a)),
        "eigenvalues_b": _fl(proc.chi_eigenvalues(chi_b)),
        "max_entry_difference": float(np.abs(np.asarray(chi_a) - np.asarray(chi_b)).max()),
    }


def cmd_compare(path_a: str, path_b: str, out: str | None = None) -> int:
    chis = []
    for path in (path_a, path_b):
        try:
            chis.append(read_chi(path))
        except OSError as err:
            print(f"error: cannot read {path}: {err}", file=sys.stderr)
            return EXIT_IO
        except MalformedDataError as err:
            print(f"error: {path}: {err}", file=sys.stderr)
            return EXIT_MALFORMED
    try:
        report = compare_processes(*chis)
    except ValueError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_MALFORMED
    print(f"fidelity: {report['fidelity']:.12f}")
    print(f"eigenvalues A: {_fmt(report['eigenvalues_a'])}")
    print(f"eigenvalues B: {_fmt(report['eigenvalues_b'])}")
    print(f"max |chi_A - chi_B|: {report['max_entry_difference']:.6f}")
    if out is not None:
        try:
            Path(out).write_text(dumps_json({"command": "compare", "a": path_a, "b": path_b, **report}))
        except OSError as err:
            print(f"I/O error: cannot write {out}: {err}", file=sys.stderr)
            return EXIT_IO
    return EXIT_OK


# --- argument parser ---------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file mirroring the experiment config; flags override it")
    common.add_argument("--scheme", help="I or II")
    common.add_argument("--inputs", nargs="+", help="input states: h v p m r l, MUB a b c, or s1,s2,s3")
    common.add_argument("--exposure", type=float, help=f"expected counts per projector (default {DEFAULT_EXPOSURE:g})")
    common.add_argument("--seed", type=int, help="RNG seed (required for simulated tomography)")
    common.add_argument("--out", help="output file (default: stdout for data commands)")
    common.add_argument("--format", choices=("json", "csv"))

    parser = argparse.ArgumentParser(prog="polqpt", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("channel", parents=[common], help="theoretical process at one angle")
    p.add_argument("--angle", help="degrees, or magic1 / magic2")

    p = sub.add_parser("sweep", parents=[common], help="eigenvalues and radii over an angle grid")
    p.add_argument("--sweep", help="start:stop:step in degrees (default 0:90:2.5)")
    p.add_argument("--mode", choices=MODES)
    p.add_argument("--qst", choices=("ml", "linear"))

    p = sub.add_parser("tomography", parents=[common], help="simulated process tomography")
    p.add_argument("--angle", help="degrees, or magic1 / magic2")
    p.add_argument("--mode", choices=(UNITAL3, FULL4))
    p.add_argument("--qst", choices=("ml", "linear"))

    p = sub.add_parser("ellipsoid", parents=[common], help="sphere grid and its image under the channel")
    p.add_argument("--angle", help="degrees, or magic1 / magic2")
    p.add_argument("--mode", choices=MODES)
    p.add_argument("--qst", choices=("ml", "linear"))
    p.add_argument("--grid", help="latitudes x longitudes (default 24x48)")

    p = sub.add_parser("compare", help="compare two serialized chi matrices")
    p.add_argument("path_a")
    p.add_argument("path_b")
    p.add_argument("--out", help="write the comparison as JSON")
    return parser


COMMANDS = {
    "channel": cmd_channel,
    "sweep": cmd_sweep,
    "tomography": cmd_tomography,
    "ellipsoid": cmd_ellipsoid,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    if args.command == "compare":
        return cmd_compare(args.path_a, args.path_b, args.out)
    try:
        cfg = build_config(args, UNITAL3 if args.command == "tomography" else THEORY)
        return COMMANDS[args.command](cfg)
    except UsageError as err:
        print(f"usage error: {err}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as err:
        print(f"I/O error: {err}", file=sys.stderr)
        return EXIT_IO
    except PolQPTError as err:
        diagnostic = {"error": type(err).__name__, "message": str(err)}
        if getattr(err, "n_iterations", None) is not None:
            diagnostic["n_iterations"] = err.n_iterations
        print(dumps_json(diagnostic), file=sys.stderr, end="")
        return EXIT_RECONSTRUCTION
    except ValueError as err:
        print(f"usage error: {err}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
