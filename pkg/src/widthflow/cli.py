"""Command line entry point.

Subcommands: check-speed, flow, width, verify, report.  Every run is driven
by one nested config (defaults, then an optional JSON file, then repeated
``--set dotted.key=value`` overrides) and the fully resolved config is echoed
into each JSON artifact, so outputs document the run that produced them.

Exit codes: 0 success, 1 failed checks or a domain error (lost convexity,
no geodesic, violated speed condition), 2 usage and configuration errors.
Outputs contain no timestamps; rerunning a config reproduces them byte for
byte.  The WIDTHFLOW_OUT environment variable overrides ``output_dir``.
"""
from __future__ import annotations

import argparse
import copy
import json
import os
import sys
from dataclasses import asdict
from pathlib import Path

import numpy as np

from .errors import ConfigError, WidthflowError
from .flow import EXTINCT, FlowSample, FlowTrace, StepControl, run_flow
from .geom import AxiSurface, TriMesh, axi_to_mesh, icosphere
from .speed import check_conditions, make_speed
from .svgplot import Series, line_plot
from .verify import (
    extinction_bound_check,
    geodesic_energy_decay_check,
    powered_energy_decay_check,
    width_decay_check,
)
from .width import default_axes, make_width_probe, width_estimate

DEFAULTS = {
    "surface": {"kind": "sphere", "radius": 1.0, "a": 1.0, "c": 2.0,
                "resolution": 200, "support": None, "path": None},
    "speed": {"name": "arithmetic-mean", "n": 2, "k": 1, "p": 2.0},
    "control": {"safety": 0.2, "eps_extinct": None, "max_time": None,
                "snapshot_stride": 4000, "method": "euler"},
    "width": {"slice_count": 33, "sweeps": 200, "axes": "coordinate",
              "azimuth_count": 96, "subdivisions": 5},
    "verify": {"checks": None, "residual_threshold": 0.1, "eps_mesh": 0.03,
               "tol": None, "geodesic_slices": 33, "geodesic_sweeps": 200},
    "probes": ["width"],
    "output_dir": "widthflow-out",
    "seed": 0,
    "jobs": None,
}

_SURFACE_KINDS = ("sphere", "spheroid", "custom-axi", "mesh-file")


# ---------------------------------------------------------------------------
# Config plumbing.

def _merge(base: dict, override: dict, trail: str = "") -> dict:
    out = copy.deepcopy(base)
    for key, value in override.items():
        dotted = f"{trail}{key}"
        if key not in base:
            raise ConfigError(f"unknown config key {dotted!r}")
        if isinstance(base[key], dict) and isinstance(value, dict):
            out[key] = _merge(base[key], value, trail=f"{dotted}.")
        else:
            out[key] = copy.deepcopy(value)
    return out


def _apply_set(config: dict, assignment: str) -> None:
    if "=" not in assignment:
        raise ConfigError(f"--set expects dotted.key=value, got {assignment!r}")
    key, raw = assignment.split("=", 1)
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    node = config
    parts = key.split(".")
    for part in parts[:-1]:
        if not isinstance(node.get(part), dict):
            raise ConfigError(f"unknown config key {key!r}")
        node = node[part]
    if parts[-1] not in node:
        raise ConfigError(f"unknown config key {key!r}")
    node[parts[-1]] = value


def load_config(args) -> dict:
    config = copy.deepcopy(DEFAULTS)
    if getattr(args, "config", None):
        path = Path(args.config)
        if not path.is_file():
            raise ConfigError(f"config file not found: {path}")
        try:
            file_cfg = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file is not valid JSON: {exc}") from exc
        if not isinstance(file_cfg, dict):
            raise ConfigError("config file must hold a JSON object")
        config = _merge(config, file_cfg)
    for assignment in getattr(args, "set", None) or []:
        _apply_set(config, assignment)
    if getattr(args, "out", None):
        config["output_dir"] = args.out
    env_out = os.environ.get("WIDTHFLOW_OUT")
    if env_out:
        config["output_dir"] = env_out
    if getattr(args, "jobs", None):
        config["jobs"] = args.jobs
    _validate(config)
    return config


def _validate(config: dict) -> None:
    kind = config["surface"]["kind"]
    if kind not in _SURFACE_KINDS:
        raise ConfigError(f"surface.kind must be one of {_SURFACE_KINDS}, got {kind!r}")
    if kind == "mesh-file":
        path = config["surface"]["path"]
        if not path:
            raise ConfigError("surface.path is required for kind mesh-file")
        if not Path(path).is_file():
            raise ConfigError(f"mesh file not found: {path}")
    if kind == "custom-axi" and not config["surface"]["support"]:
        raise ConfigError("surface.support is required for kind custom-axi")
    for field in ("radius", "a", "c"):
        if not config["surface"][field] > 0.0:
            raise ConfigError(f"surface.{field} must be positive")
    if config["width"]["slice_count"] < 8:
        raise ConfigError("width.slice_count must be >= 8")
    if config["width"]["sweeps"] < 0:
        raise ConfigError("width.sweeps must be >= 0")
    for probe in config["probes"]:
        if isinstance(probe, str):
            if probe != "width":
                raise ConfigError(f"unknown probe {probe!r}")
        elif isinstance(probe, dict):
            if probe.get("kind", "width") != "width":
                raise ConfigError(f"unknown probe kind {probe.get('kind')!r}")
            allowed = {"kind", "slice_count", "sweeps", "axes", "azimuth_count", "warm"}
            unknown = set(probe) - allowed
            if unknown:
                raise ConfigError(f"unknown probe keys: {sorted(unknown)}")
        else:
            raise ConfigError("probes entries must be 'width' or an options dict")
    jobs = config["jobs"]
    if jobs is not None and jobs < 1:
        raise ConfigError("jobs must be >= 1")


def _jobs(config: dict) -> int:
    return config["jobs"] or os.cpu_count() or 1


# ---------------------------------------------------------------------------
# Builders.

def _load_obj(path: str) -> TriMesh:
    vertices: list[list[float]] = []
    faces: list[list[int]] = []
    try:
        for line in Path(path).read_text().splitlines():
            parts = line.split()
            if not parts or parts[0] not in ("v", "f"):
                continue
            if parts[0] == "v":
                vertices.append([float(x) for x in parts[1:4]])
            else:
                ids = [int(tok.split("/")[0]) for tok in parts[1:]]
                if len(ids) != 3:
                    raise ConfigError(f"non-triangular face in {path}")
                faces.append([i - 1 for i in ids])
        return TriMesh(np.array(vertices, dtype=float), np.array(faces, dtype=np.int64))
    except ConfigError:
        raise
    except (ValueError, IndexError) as exc:
        raise ConfigError(f"could not parse mesh file {path}: {exc}") from exc


def build_surface(config: dict):
    """Initial surface for the flow: axisymmetric unless a mesh file is given."""
    surf = config["surface"]
    kind = surf["kind"]
    if kind == "sphere":
        return AxiSurface.sphere(surf["radius"], surf["resolution"])
    if kind == "spheroid":
        return AxiSurface.spheroid(surf["a"], surf["c"], surf["resolution"])
    if kind == "custom-axi":
        return AxiSurface.from_full(np.asarray(surf["support"], dtype=float))
    return _load_obj(surf["path"])


def build_mesh(config: dict) -> TriMesh:
    """Triangle mesh for width and geodesic checks."""
    surf = config["surface"]
    kind = surf["kind"]
    subdivisions = config["width"]["subdivisions"]
    if kind == "sphere":
        return icosphere(subdivisions, radius=surf["radius"])
    if kind == "spheroid":
        base = icosphere(subdivisions)
        return base.with_vertices(base.vertices * np.array([surf["a"], surf["a"], surf["c"]]))
    if kind == "custom-axi":
        return axi_to_mesh(AxiSurface.from_full(np.asarray(surf["support"], dtype=float)),
                           config["width"]["azimuth_count"])
    return _load_obj(surf["path"])


def build_speed(config: dict):
    sp = config["speed"]
    return make_speed(sp["name"], n=sp["n"], k=sp["k"], p=sp["p"])


def build_control(config: dict) -> StepControl:
    ctl = config["control"]
    try:
        return StepControl(safety=ctl["safety"], eps_extinct=ctl["eps_extinct"],
                           max_time=ctl["max_time"], snapshot_stride=ctl["snapshot_stride"],
                           method=ctl["method"])
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _resolve_axes(config: dict):
    axes = config["width"]["axes"]
    if axes == "coordinate":
        return np.eye(3)
    if axes == "random":
        return default_axes(seed=config["seed"])
    arr = np.asarray(axes, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 3:
        raise ConfigError("width.axes must be 'coordinate', 'random', or a list of 3-vectors")
    return arr


def _probes(config: dict):
    """Width probes for the flow; a probe is lighter than the width command.

    String entries take the probe defaults; dict entries may override
    slice_count, sweeps, axes (a list of 3-vectors), azimuth_count, warm.
    """
    probes = []
    for entry in config["probes"]:
        options = {} if isinstance(entry, str) else {
            k: v for k, v in entry.items() if k != "kind"}
        if "axes" in options:
            options["axes"] = tuple(map(tuple, np.asarray(options["axes"], dtype=float)))
        probes.append(make_width_probe(**options))
    return probes


# ---------------------------------------------------------------------------
# Output helpers.

def _out_dir(config: dict) -> Path:
    path = Path(config["output_dir"])
    path.mkdir(parents=True, exist_ok=True)
    return path


def _write_json(path: Path, payload) -> None:
    path.write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n")


def _flow_summary(trace: FlowTrace, config: dict) -> dict:
    return {
        "termination": trace.termination,
        "extinction_time": trace.extinction_time,
        "samples": len(trace.samples),
        "meta": trace.meta,
        "experiment": config,
    }


def _plot_trace(trace: FlowTrace, out: Path, c0: float | None = None) -> None:
    ts = np.array([s.t for s in trace.samples])
    inr = np.array([s.inradius for s in trace.samples])
    pinch = np.array([s.sup_pinching for s in trace.samples])
    line_plot(out / "inradius_plot.svg", [Series("inradius", ts, inr)],
              title="Inradius", xlabel="t", ylabel="inradius")
    line_plot(out / "pinching_plot.svg", [Series("sup pinching", ts, pinch)],
              title="Pinching ratio", xlabel="t", ylabel="sup |H| / (n F)")
    wt, wv = trace.width_series()
    if len(wt) > 0:
        series = [Series("W(t)", wt, wv)]
        if c0 is not None:
            n = trace.meta.get("n", 2)
            bound = wv[0] - 4.0 * np.pi / (n * c0) * (wt - wt[0])
            series.append(Series("decay bound", wt, np.maximum(bound, 0.0), dashed=True))
        line_plot(out / "width_plot.svg", series, title="Width", xlabel="t", ylabel="W")


# ---------------------------------------------------------------------------
# Subcommands.

def cmd_check_speed(args) -> int:
    config = load_config(args)
    spec = make_speed(args.name, n=args.n, k=args.k, p=args.p)
    report = check_conditions(spec, sample_count=args.samples, rng_seed=config["seed"])
    violations = report.violations(spec)
    payload = {
        "speed": {"name": spec.name, "n": spec.n, "k": spec.degree_k,
                  "declared_shape": spec.shape},
        "report": asdict(report),
        "violations": violations,
        "pass": not violations,
    }
    _write_json(_out_dir(config) / "check_speed.json", payload)
    print(json.dumps(payload, sort_keys=True, indent=2))
    return 0 if not violations else 1


def cmd_flow(args) -> int:
    config = load_config(args)
    if args.max_time is not None:
        config["control"]["max_time"] = args.max_time
    surface = build_surface(config)
    spec = build_speed(config)
    trace = run_flow(surface, spec, build_control(config), probes=_probes(config))
    out = _out_dir(config)
    trace.to_csv(out / "trace.csv")
    _write_json(out / "flow.json", _flow_summary(trace, config))
    print(f"termination {trace.termination!r} after {trace.meta['steps']} steps; "
          f"artifacts in {out}")
    return 0


def cmd_width(args) -> int:
    config = load_config(args)
    mesh = build_mesh(config)
    w = config["width"]
    est = width_estimate(mesh, axes=_resolve_axes(config), slice_count=w["slice_count"],
                         sweeps=w["sweeps"], jobs=_jobs(config))
    eps = config["control"]["eps_extinct"] or 1e-3
    payload = {
        "value": est.value,
        "axis": list(est.axis),
        "slice_count": w["slice_count"],
        "sweeps": w["sweeps"],
        "residual": est.geodesic_residual,
        "argmax_index": est.argmax_index,
        "degenerate": bool(est.value == 0.0 or mesh.bbox_diagonal() < eps),
        "experiment": config,
    }
    _write_json(_out_dir(config) / "width.json", payload)
    print(json.dumps({k: payload[k] for k in ("value", "axis", "residual")},
                     sort_keys=True, indent=2))
    return 0


def _trace_from_csv(path: str) -> FlowTrace:
    rows = Path(path).read_text().strip().splitlines()
    if not rows or not rows[0].startswith("t,"):
        raise ConfigError(f"{path} does not look like a trace CSV")
    samples = []
    for row in rows[1:]:
        cells = row.split(",")
        width = float(cells[4]) if len(cells) > 4 and cells[4] else None
        samples.append(FlowSample(t=float(cells[0]), inradius=float(cells[1]),
                                  sup_pinching=float(cells[2]), max_speed=float(cells[3]),
                                  width=width))
    return FlowTrace(samples=samples, termination="FromFile", extinction_time=None,
                     meta={"n": 2, "mode": "csv", "source": str(path)})


def cmd_verify(args) -> int:
    config = load_config(args)
    out = _out_dir(config)
    vcfg = config["verify"]

    if args.trace_csv:
        trace = _trace_from_csv(args.trace_csv)
        reports = width_decay_check(trace, args.C0, tol=vcfg["tol"],
                                    eps_mesh=vcfg["eps_mesh"])
        _plot_trace(trace, out, c0=args.C0)
        verdict = [r.to_dict() for r in reports]
        _write_json(out / "verdict.json", verdict)
        failed = [r for r in reports if not r.passed]
        for r in reports:
            print(f"{'pass' if r.passed else 'FAIL'}  {r.name}: margin {r.margin:.6g}")
        return 1 if failed else 0

    spec = build_speed(config)
    checks = vcfg["checks"]
    if checks is None:
        checks = ["width-decay", "geodesic-energy-decay"]
        if config["control"]["max_time"] is None:
            checks.append("extinction")
        if spec.degree_k >= 2:
            checks.append("powered-energy-decay")
    known = {"width-decay", "extinction", "geodesic-energy-decay", "powered-energy-decay"}
    unknown = set(checks) - known
    if unknown:
        raise ConfigError(f"unknown verify checks: {sorted(unknown)}")

    surface = build_surface(config)
    trace = run_flow(surface, spec, build_control(config), probes=_probes(config))
    c0 = trace.meta["C0"]
    trace.to_csv(out / "trace.csv")
    _write_json(out / "flow.json", _flow_summary(trace, config))

    reports = []
    if "width-decay" in checks:
        reports.extend(width_decay_check(trace, c0, tol=vcfg["tol"],
                                         eps_mesh=vcfg["eps_mesh"]))
    if "extinction" in checks:
        reports.append(extinction_bound_check(trace, c0))
    mesh = None
    if "geodesic-energy-decay" in checks or "powered-energy-decay" in checks:
        mesh = build_mesh(config)
    if "geodesic-energy-decay" in checks:
        reports.append(geodesic_energy_decay_check(
            mesh, spec, slice_count=vcfg["geodesic_slices"],
            sweeps=vcfg["geodesic_sweeps"],
            residual_threshold=vcfg["residual_threshold"]))
    if "powered-energy-decay" in checks:
        reports.append(powered_energy_decay_check(
            mesh, spec, slice_count=vcfg["geodesic_slices"],
            sweeps=vcfg["geodesic_sweeps"],
            residual_threshold=vcfg["residual_threshold"]))

    verdict = [r.to_dict() for r in reports]
    _write_json(out / "verdict.json", verdict)
    _plot_trace(trace, out, c0=c0)
    failed = [r for r in reports if not r.passed]
    quotient_fails = sum(1 for r in failed if "quotient" in r.name)
    for r in reports:
        if "quotient" not in r.name or not r.passed:
            print(f"{'pass' if r.passed else 'FAIL'}  {r.name}: margin {r.margin:.6g}")
    n_quotients = sum(1 for r in reports if "quotient" in r.name)
    if n_quotients:
        print(f"quotient checks: {n_quotients - quotient_fails}/{n_quotients} pass")
    return 1 if failed else 0


def cmd_report(args) -> int:
    config = load_config(args)
    source = Path(args.input) if args.input else Path(config["output_dir"])
    csv_path = source / "trace.csv"
    if not csv_path.is_file():
        raise ConfigError(f"no trace.csv in {source}")
    trace = _trace_from_csv(csv_path)
    out = _out_dir(config)
    _plot_trace(trace, out, c0=args.C0)
    ts = [s.t for s in trace.samples]
    wt, wv = trace.width_series()
    print(f"samples {len(trace.samples)} over t in [{ts[0]:.6g}, {ts[-1]:.6g}]; "
          f"final inradius {trace.samples[-1].inradius:.6g}")
    if len(wt):
        print(f"width samples {len(wt)}: first {wv[0]:.6g}, last {wv[-1]:.6g}")
    verdict_path = source / "verdict.json"
    if verdict_path.is_file():
        verdict = json.loads(verdict_path.read_text())
        passed = sum(1 for r in verdict if r["pass"])
        print(f"verdict: {passed}/{len(verdict)} checks pass")
    return 0


# ---------------------------------------------------------------------------
# Parser.

def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file")
    common.add_argument("--set", action="append", metavar="KEY=VALUE",
                        help="override a config entry (dotted path, JSON value)")
    common.add_argument("--out", "-o", help="output directory")
    common.add_argument("--jobs", type=int, help="worker cap (default: all cores)")

    parser = argparse.ArgumentParser(prog="widthflow",
                                     description="Curvature flow width experiments")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check-speed", parents=[common],
                       help="sample the structural conditions of a speed")
    p.add_argument("--name", required=True)
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--p", type=float, default=2.0)
    p.add_argument("--samples", type=int, default=20_000)
    p.set_defaults(func=cmd_check_speed)

    p = sub.add_parser("flow", parents=[common], help="integrate a curvature flow")
    p.add_argument("--max-time", type=float, default=None)
    p.set_defaults(func=cmd_flow)

    p = sub.add_parser("width", parents=[common], help="min-max width of a surface")
    p.set_defaults(func=cmd_width)

    p = sub.add_parser("verify", parents=[common],
                       help="run a flow and check the decay inequalities")
    p.add_argument("--trace-csv", help="check an existing trace instead of flowing")
    p.add_argument("--C0", type=float, default=1.0,
                   help="pinching constant for --trace-csv mode")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("report", parents=[common],
                       help="replot and summarize existing artifacts")
    p.add_argument("--input", help="directory holding trace.csv (default: output_dir)")
    p.add_argument("--C0", type=float, default=None,
                   help="draw the decay bound line with this constant")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except WidthflowError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
