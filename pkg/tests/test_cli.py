"""Command line interface: exit codes, artifacts, and determinism."""
import json
import os
import subprocess
import sys

import numpy as np
import pytest

from widthflow.geom import icosphere

TWO_PI = 2.0 * np.pi


def run_cli(*args, cwd, env_extra=None):
    env = os.environ.copy()
    env.pop("WIDTHFLOW_OUT", None)
    if env_extra:
        env.update(env_extra)
    proc = subprocess.run([sys.executable, "-m", "widthflow", *args],
                          capture_output=True, text=True, cwd=cwd, env=env)
    return proc.returncode, proc.stdout, proc.stderr


def write_obj(mesh, path):
    with open(path, "w") as f:
        for p in mesh.vertices:
            f.write(f"v {p[0]:.17g} {p[1]:.17g} {p[2]:.17g}\n")
        for t in mesh.triangles:
            f.write(f"f {t[0] + 1} {t[1] + 1} {t[2] + 1}\n")


FAST_FLOW = ("--set", "surface.resolution=100", "--set", "probes=[]")


# ---------------------------------------------------------------------------
# check-speed.

def test_check_speed_concave_passes(tmp_path):
    code, out, _ = run_cli("check-speed", "--name", "geometric-mean", "--n", "2",
                           "-o", "out", cwd=tmp_path)
    assert code == 0
    payload = json.loads((tmp_path / "out" / "check_speed.json").read_text())
    assert payload["pass"] is True
    assert payload["violations"] == []
    assert payload["report"]["shape_verdict"] == "concave"
    assert json.loads(out)["pass"] is True


def test_check_speed_broken_fails(tmp_path):
    code, out, _ = run_cli("check-speed", "--name", "broken-asym", "-o", "out",
                           cwd=tmp_path)
    assert code == 1
    payload = json.loads(out)
    assert "symmetry" in payload["violations"]


def test_check_speed_requires_name(tmp_path):
    code, _, err = run_cli("check-speed", cwd=tmp_path)
    assert code == 2
    assert "--name" in err


# ---------------------------------------------------------------------------
# flow.

def test_flow_reaches_sphere_extinction(tmp_path):
    code, _, _ = run_cli("flow", *FAST_FLOW, "-o", "out", cwd=tmp_path)
    assert code == 0
    summary = json.loads((tmp_path / "out" / "flow.json").read_text())
    assert summary["termination"] == "Extinct"
    assert summary["extinction_time"] == pytest.approx(0.5, abs=1e-3)
    header = (tmp_path / "out" / "trace.csv").read_text().splitlines()[0]
    assert header == "t,inradius,sup_pinching,max_speed,width,dwdt_quotient"
    assert summary["experiment"]["surface"]["kind"] == "sphere"


def test_flow_max_time_flag(tmp_path):
    code, _, _ = run_cli("flow", "--max-time", "0.05", "--set",
                         "surface.resolution=64", "--set", "probes=[]",
                         "-o", "out", cwd=tmp_path)
    assert code == 0
    summary = json.loads((tmp_path / "out" / "flow.json").read_text())
    assert summary["termination"] == "MaxTimeReached"


def test_flow_rejects_nonconvex_mesh(tmp_path):
    m = icosphere(2)
    dented = m.vertices.copy()
    dented[0] *= 0.55
    write_obj(m.with_vertices(dented), tmp_path / "dent.obj")
    code, _, err = run_cli("flow", "--set", "surface.kind=mesh-file",
                           "--set", "surface.path=dent.obj", "-o", "out",
                           cwd=tmp_path)
    assert code == 1
    assert "InitialNotConvex" in err


# ---------------------------------------------------------------------------
# width.

def test_width_json_schema_and_value(tmp_path):
    code, _, _ = run_cli("width", "--set", "width.subdivisions=3",
                         "--set", "width.slice_count=9", "--set", "width.sweeps=40",
                         "-o", "out", cwd=tmp_path)
    assert code == 0
    payload = json.loads((tmp_path / "out" / "width.json").read_text())
    for key in ("value", "axis", "slice_count", "sweeps", "residual",
                "argmax_index", "degenerate", "experiment"):
        assert key in payload
    assert payload["value"] == pytest.approx(TWO_PI, rel=0.03)
    assert payload["degenerate"] is False
    assert payload["slice_count"] == 9 and payload["sweeps"] == 40


def test_width_point_like_mesh_flagged_degenerate(tmp_path):
    write_obj(icosphere(1).scaled(1e-6), tmp_path / "dust.obj")
    code, _, _ = run_cli("width", "--set", "surface.kind=mesh-file",
                         "--set", "surface.path=dust.obj",
                         "--set", "width.slice_count=9", "--set", "width.sweeps=5",
                         "-o", "out", cwd=tmp_path)
    assert code == 0
    payload = json.loads((tmp_path / "out" / "width.json").read_text())
    assert payload["degenerate"] is True
    assert payload["value"] < 1e-9


def test_width_unparseable_mesh_is_config_error(tmp_path):
    (tmp_path / "bad.obj").write_text("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 3\n")
    code, _, err = run_cli("width", "--set", "surface.kind=mesh-file",
                           "--set", "surface.path=bad.obj", "-o", "out", cwd=tmp_path)
    assert code == 2
    assert "config error" in err


def test_width_missing_mesh_file(tmp_path):
    code, _, err = run_cli("width", "--set", "surface.kind=mesh-file",
                           "--set", "surface.path=nope.obj", cwd=tmp_path)
    assert code == 2
    assert "not found" in err


# ---------------------------------------------------------------------------
# verify.

VERIFY_ARGS = (
    "--set", "surface.resolution=64",
    "--set", 'probes=[{"kind":"width","slice_count":9,"sweeps":20,'
             '"azimuth_count":48,"axes":[[0,0,1]]}]',
    "--set", "width.subdivisions=4",
    "--set", "verify.geodesic_slices=17",
    "--set", "verify.geodesic_sweeps=60",
)


def test_verify_sphere_pipeline_passes(tmp_path):
    code, out, _ = run_cli("verify", *VERIFY_ARGS, "-o", "out", cwd=tmp_path)
    assert code == 0, out
    verdict = json.loads((tmp_path / "out" / "verdict.json").read_text())
    assert all(r["pass"] for r in verdict)
    names = {r["name"] for r in verdict}
    assert "width-decay-integrated" in names
    assert "extinction-bound" in names
    assert "geodesic-energy-decay" in names
    for plot in ("width_plot.svg", "pinching_plot.svg", "inradius_plot.svg"):
        assert (tmp_path / "out" / plot).is_file()
    assert (tmp_path / "out" / "trace.csv").is_file()


def test_verify_stalled_trace_fails(tmp_path):
    rows = ["t,inradius,sup_pinching,max_speed,width,dwdt_quotient"]
    rows += [f"{t},1,1,1,5.0," for t in (0.0, 0.1, 0.2, 0.3)]
    (tmp_path / "stalled.csv").write_text("\n".join(rows) + "\n")
    code, out, _ = run_cli("verify", "--trace-csv", "stalled.csv", "--C0", "1.0",
                           "-o", "out", cwd=tmp_path)
    assert code == 1
    verdict = json.loads((tmp_path / "out" / "verdict.json").read_text())
    assert any(not r["pass"] for r in verdict)


def test_verify_unknown_check_rejected(tmp_path):
    code, _, err = run_cli("verify", "--set", 'verify.checks=["nope"]',
                           *VERIFY_ARGS, cwd=tmp_path)
    assert code == 2
    assert "unknown verify checks" in err


# ---------------------------------------------------------------------------
# report.

def test_report_replots_flow_artifacts(tmp_path):
    code, _, _ = run_cli("flow", "--set", "surface.resolution=64",
                         "--set", "control.snapshot_stride=2000",
                         "--set", 'probes=[{"slice_count":9,"sweeps":10,'
                                  '"azimuth_count":48,"axes":[[0,0,1]]}]',
                         "-o", "artifacts", cwd=tmp_path)
    assert code == 0
    code, out, _ = run_cli("report", "--input", "artifacts", "--C0", "1.0",
                           "-o", "replot", cwd=tmp_path)
    assert code == 0
    assert "samples" in out and "width samples" in out
    assert (tmp_path / "replot" / "width_plot.svg").is_file()


# ---------------------------------------------------------------------------
# Config handling and determinism.

def test_unknown_config_key_rejected(tmp_path):
    code, _, err = run_cli("flow", "--set", "nosuch.key=1", cwd=tmp_path)
    assert code == 2
    assert "unknown config key" in err


def test_config_file_drives_run(tmp_path):
    config = {"surface": {"kind": "sphere", "resolution": 64},
              "control": {"max_time": 0.02}, "probes": [],
              "output_dir": "from_config"}
    (tmp_path / "exp.json").write_text(json.dumps(config))
    code, _, _ = run_cli("flow", "--config", "exp.json", cwd=tmp_path)
    assert code == 0
    summary = json.loads((tmp_path / "from_config" / "flow.json").read_text())
    assert summary["experiment"]["surface"]["resolution"] == 64
    assert summary["experiment"]["control"]["max_time"] == 0.02
    assert summary["experiment"]["control"]["safety"] == 0.2


def test_env_var_overrides_output_dir(tmp_path):
    code, _, _ = run_cli("check-speed", "--name", "arithmetic-mean", "-o", "ignored",
                         cwd=tmp_path, env_extra={"WIDTHFLOW_OUT": "envdir"})
    assert code == 0
    assert (tmp_path / "envdir" / "check_speed.json").is_file()
    assert not (tmp_path / "ignored").exists()


def test_repeated_runs_are_byte_identical(tmp_path):
    args = ("flow", "--set", "surface.resolution=64",
            "--set", "control.snapshot_stride=2000",
            "--set", 'probes=[{"slice_count":9,"sweeps":10,"azimuth_count":48,'
                     '"axes":[[0,0,1]]}]',
            "-o", "out")
    assert run_cli(*args, cwd=tmp_path)[0] == 0
    first_csv = (tmp_path / "out" / "trace.csv").read_bytes()
    first_json = (tmp_path / "out" / "flow.json").read_bytes()
    assert run_cli(*args, cwd=tmp_path)[0] == 0
    assert (tmp_path / "out" / "trace.csv").read_bytes() == first_csv
    assert (tmp_path / "out" / "flow.json").read_bytes() == first_json
