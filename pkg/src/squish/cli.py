"""Headless command-line front end.

Subcommands: run a scenario file, run the stability sweep, run the
integrator accuracy study, export meshes, and launch the interactive
service. Outputs are written atomically (temp + rename) and stdout
stays machine-parseable whenever --out is set.

Exit codes: 0 success, 1 invalid input, 2 scenario diverged.
"""

from __future__ import annotations

import json
import os
import sys
import tempfile
from pathlib import Path

import click

from . import engine, mesh
from .engine import METRICS_HEADER, SWEEP_HEADER, ScenarioScript
from .integrate import FreeFall, IntegratorKind, Oscillator, order_of_accuracy

# Reserved: the engine carries no entropy source; setting SQUISH_SEEDLESS=1
# asserts that expectation and is a no-op today.
SEEDLESS_ENV = "SQUISH_SEEDLESS"


def _atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w") as handle:
            handle.write(text)
        os.chmod(tmp, 0o644)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _parse_floats(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x.strip()]


@click.group()
def main() -> None:
    """Two-layer soft-body simulation toolkit."""


@main.command("run")
@click.argument("scenario", type=click.Path(path_type=Path))
@click.option("--out", "out_dir", type=click.Path(path_type=Path), default=Path("."),
              show_default=True, help="Directory for output files.")
@click.option("--format", "fmt", type=click.Choice(["json", "csv", "both"]),
              default="both", show_default=True,
              help="Emit the snapshot stream (json), the metrics table (csv), or both.")
@click.option("--plot", is_flag=True, help="Also render a metrics figure (PNG).")
def cmd_run(scenario: Path, out_dir: Path, fmt: str, plot: bool) -> None:
    """Replay a scenario file headlessly."""
    if not scenario.exists():
        click.echo(f"error: scenario file not found: {scenario}", err=True)
        sys.exit(1)
    try:
        text = scenario.read_text()
    except OSError as exc:
        click.echo(f"error: cannot read scenario: {exc}", err=True)
        sys.exit(1)
    try:
        script = ScenarioScript.from_json(text)
    except json.JSONDecodeError as exc:
        click.echo(f"error: malformed JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}",
                   err=True)
        sys.exit(1)
    except (KeyError, TypeError, ValueError) as exc:
        click.echo(f"error: invalid scenario: {exc}", err=True)
        sys.exit(1)

    snapshots = list(engine.run(script))
    stem = scenario.stem
    if fmt in ("json", "both"):
        stream = "\n".join(s.to_json_line() for s in snapshots) + "\n"
        _atomic_write(out_dir / f"{stem}.snapshots.ndjson", stream)
    if fmt in ("csv", "both"):
        table = METRICS_HEADER + "\n" + "\n".join(s.metrics_row() for s in snapshots) + "\n"
        _atomic_write(out_dir / f"{stem}.metrics.csv", table)
    if plot:
        from . import report
        report.plot_run(snapshots, out_dir / f"{stem}.metrics.png")
    if snapshots[-1].diverged:
        click.echo(f"diverged at step {snapshots[-1].step}", err=True)
        sys.exit(2)
    sys.exit(0)


@main.command("sweep")
@click.option("--dts", default="0.003,0.03,0.3", show_default=True,
              help="Comma-separated timesteps.")
@click.option("--integrators", default="euler,midpoint,rk4", show_default=True,
              help="Comma-separated integrator names.")
@click.option("--steps", default=5000, show_default=True, type=int)
@click.option("--body", "body_json", default=None,
              help="Body spec as JSON (defaults to the level-1 two-layer sphere).")
@click.option("--out", "out_path", type=click.Path(path_type=Path), default=None,
              help="CSV output path (defaults to stdout).")
@click.option("--plot", is_flag=True, help="Also render the survival grid (PNG).")
def cmd_sweep(dts: str, integrators: str, steps: int, body_json: str | None,
              out_path: Path | None, plot: bool) -> None:
    """Stability ladder: timestep x integrator survival table."""
    try:
        dt_list = tuple(_parse_floats(dts))
        kinds = tuple(IntegratorKind(name.strip()) for name in integrators.split(","))
        body_spec = json.loads(body_json) if body_json else None
    except ValueError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)
    cells = engine.stability_sweep(body_spec=body_spec, dt_list=dt_list,
                                   integrators=kinds, steps=steps)
    table = SWEEP_HEADER + "\n" + "\n".join(c.row() for c in cells) + "\n"
    if out_path is not None:
        _atomic_write(out_path, table)
        if plot:
            from . import report
            report.plot_sweep(cells, out_path.with_suffix(".png"))
    else:
        click.echo(table, nl=False)
        if plot:
            from . import report
            report.plot_sweep(cells, Path("sweep.png"))
    sys.exit(0)


@main.command("accuracy")
@click.option("--system", "system_name", type=click.Choice(["oscillator", "freefall"]),
              default="oscillator", show_default=True)
@click.option("--dts", default="0.02,0.01,0.005,0.0025", show_default=True)
@click.option("--t-final", default=2.0, show_default=True, type=float)
@click.option("--out", "out_path", type=click.Path(path_type=Path), default=None)
@click.option("--plot", is_flag=True, help="Also render the log-log error plot (PNG).")
def cmd_accuracy(system_name: str, dts: str, t_final: float,
                 out_path: Path | None, plot: bool) -> None:
    """Convergence study on a closed-form test system."""
    try:
        h_list = _parse_floats(dts)
    except ValueError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)
    system = Oscillator() if system_name == "oscillator" else FreeFall()
    tables = [order_of_accuracy(system, kind, h_list, t_final) for kind in IntegratorKind]
    lines = ["integrator,h,error,fitted_order"]
    for t in tables:
        for r in t.rows:
            lines.append(f"{t.kind.value},{r.h!r},{r.error!r},{t.fitted_order!r}")
    text = "\n".join(lines) + "\n"
    if out_path is not None:
        _atomic_write(out_path, text)
        if plot:
            from . import report
            report.plot_accuracy(tables, out_path.with_suffix(".png"))
    else:
        click.echo(text, nl=False)
        if plot:
            from . import report
            report.plot_accuracy(tables, Path("accuracy.png"))
    sys.exit(0)


@main.command("mesh")
@click.argument("kind", type=click.Choice(["1d", "ring2d", "sphere_polar", "sphere_octa"]))
@click.option("--iterations", default=1, show_default=True, type=int)
@click.option("--slices", default=10, show_default=True, type=int)
@click.option("--stacks", default=10, show_default=True, type=int)
@click.option("--n", default=12, show_default=True, type=int)
@click.option("--radius", default=1.0, show_default=True, type=float)
@click.option("--r-inner", default=1.5, show_default=True, type=float)
@click.option("--r-outer", default=2.0, show_default=True, type=float)
@click.option("--layered/--single", default=False, show_default=True,
              help="Export a linked two-layer body instead of a bare mesh.")
@click.option("--out", "out_path", type=click.Path(path_type=Path), default=None)
def cmd_mesh(kind: str, iterations: int, slices: int, stacks: int, n: int,
             radius: float, r_inner: float, r_outer: float,
             layered: bool, out_path: Path | None) -> None:
    """Export a mesh (or two-layer body) as JSON."""
    from .config import SimConfig
    cfg = SimConfig()
    try:
        if kind == "1d":
            doc = mesh.body_to_json(mesh.build_1d((0.0, 2.0), (0.0, 1.0)))
        elif kind == "ring2d":
            doc = mesh.body_to_json(mesh.build_ring_2d(n, r_inner, r_outer, cfg))
        elif kind == "sphere_octa":
            if layered:
                doc = mesh.body_to_json(
                    mesh.build_layered_sphere_octa(iterations, r_inner, r_outer, cfg))
            else:
                doc = mesh.mesh_to_json(mesh.build_sphere_octa(iterations, radius))
        else:
            if layered:
                doc = mesh.body_to_json(
                    mesh.build_layered_sphere_polar(slices, stacks, r_inner, r_outer, cfg))
            else:
                doc = mesh.mesh_to_json(mesh.build_sphere_polar(slices, stacks, radius))
    except mesh.ConstructionError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)
    text = json.dumps(doc, separators=(",", ":")) + "\n"
    if out_path is not None:
        _atomic_write(out_path, text)
    else:
        click.echo(text, nl=False)
    sys.exit(0)


@main.command("serve")
@click.option("--port", default=8000, show_default=True, type=int)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--body", "body_json", default=None,
              help='Body spec as JSON, e.g. {"kind":"ring2d","n":12}.')
@click.option("--dt", default=None, type=float, help="Override the timestep.")
@click.option("--fps", default=30.0, show_default=True, type=float,
              help="Snapshot broadcast rate (frames per second of wall time).")
def cmd_serve(port: int, host: str, body_json: str | None, dt: float | None,
              fps: float) -> None:
    """Run the interactive drag service (WebSocket /ws + viewer assets)."""
    import uvicorn

    from .server import create_app

    try:
        body_spec = json.loads(body_json) if body_json else None
    except json.JSONDecodeError as exc:
        click.echo(f"error: malformed --body JSON: {exc}", err=True)
        sys.exit(1)
    app = create_app(body_spec=body_spec, dt=dt, fps=fps)
    uvicorn.run(app, host=host, port=port, log_level="warning")


if __name__ == "__main__":
    main()
