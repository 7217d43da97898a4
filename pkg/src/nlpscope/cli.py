"""Command line entry point: run solves, export analytics, launch the service.

Exit codes: 0 ok, 1 runtime failure (e.g. diverged solve), 2 usage or
not-found, 3 environment (busy port, missing UI bundle).
"""

from __future__ import annotations

import dataclasses
import json
import os
import socket
import sys
from pathlib import Path
from typing import Optional

import click
import numpy as np

from . import suite
from .errors import DivergedError, InvalidArgumentError, NlpscopeError, NotFoundError
from .solver import SolverOptions, kkt_residual, solve
from .trace import optimization_trajectory, write_trace
from .service import ServiceConfig, SessionState, create_app, load_config
from .service import schemas, session as session_mod

EXIT_RUNTIME = 1
EXIT_USAGE = 2
EXIT_ENV = 3


def _fail(code: int, message: str):
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _parse_opts(pairs: tuple[str, ...]) -> SolverOptions:
    fields = {f.name: f.type for f in dataclasses.fields(SolverOptions)}
    overrides = {}
    for pair in pairs:
        if "=" not in pair:
            _fail(EXIT_USAGE, f"--opt expects key=value, got {pair!r}")
        key, value = pair.split("=", 1)
        if key not in fields:
            _fail(EXIT_USAGE, f"unknown solver option {key!r} (known: {', '.join(fields)})")
        caster = int if fields[key] == "int" else float
        try:
            overrides[key] = caster(value)
        except ValueError:
            _fail(EXIT_USAGE, f"option {key} expects {caster.__name__}, got {value!r}")
    try:
        return SolverOptions(**overrides)
    except InvalidArgumentError as exc:
        _fail(EXIT_USAGE, str(exc))


def _resolve_problem(spec: str):
    path = Path(spec)
    if path.exists():
        scene = suite.parse_scene(path.read_text(encoding="utf-8"))
        return suite.make_waypoint_path(scene), suite.straight_line_init(scene)
    problem = suite.get_problem(spec)
    return problem, suite.default_init(spec)


@click.group()
def main():
    """Constrained-optimization workbench with trace analytics."""


@main.command()
def problems():
    """List the built-in problem registry."""
    for info in suite.list_problems():
        click.echo(f"{info.name}: n={info.n} T={info.T} "
                   f"eq={info.num_equalities} ineq={info.num_inequalities}")


@main.command(name="solve")
@click.option("--problem", "problem_spec", required=True,
              help="Registry name or path to a scene file.")
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--x0", default=None, help="Initial point, space-separated numbers.")
@click.option("--opt", "opts", multiple=True, help="Solver option key=value (repeatable).")
def solve_cmd(problem_spec: str, out_path: str, x0: Optional[str], opts: tuple[str, ...]):
    """Solve a problem and write the full optimization trace."""
    options = _parse_opts(opts)
    try:
        problem, x_init = _resolve_problem(problem_spec)
    except NotFoundError as exc:
        _fail(EXIT_USAGE, str(exc))
    except NlpscopeError as exc:
        _fail(EXIT_USAGE, f"bad scene file: {exc}")
    if x0 is not None:
        x_init = np.array([float(v) for v in x0.split()])
    try:
        result = solve(problem, x_init, options)
    except DivergedError as exc:
        if exc.trace is not None:
            write_trace(exc.trace, out_path)
            click.echo(f"diverged; partial trace written to {out_path}", err=True)
        _fail(EXIT_RUNTIME, str(exc))
    except InvalidArgumentError as exc:
        _fail(EXIT_USAGE, str(exc))
    write_trace(result.trace, out_path)
    steps = len(optimization_trajectory(result.trace))
    residual = kkt_residual(problem, result.x_star, result.duals)
    click.echo(f"converged={result.converged} feasible={result.feasible} "
               f"steps={steps} kkt_residual={residual:.3e}")
    click.echo(f"trace written to {out_path}")


def _load_session(trace_path: str) -> SessionState:
    if not Path(trace_path).exists():
        _fail(EXIT_USAGE, f"trace file not found: {trace_path}")
    try:
        return SessionState.from_file(trace_path)
    except NlpscopeError as exc:
        _fail(EXIT_RUNTIME, f"cannot load trace: {exc}")


@main.command()
@click.option("--trace", "trace_path", required=True, type=click.Path())
@click.option("--what", required=True,
              type=click.Choice(["progression", "groups", "paths", "landscape"]))
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--render", "render_path", default=None, type=click.Path(),
              help="Also write an SVG rendering (requires matplotlib).")
@click.option("--group", default=None, help="groups: export one group's series.")
@click.option("--expanded", is_flag=True, help="groups: per-member series.")
@click.option("--steps", default=None, help="paths/landscape: comma-separated step indices.")
@click.option("--configs", default=None, help="paths: comma-separated configuration indices.")
@click.option("--step", default=None, type=int, help="landscape: default-plane step.")
@click.option("--resolution", default="64x64", help="landscape: ROWSxCOLS.")
@click.option("--functions", default="objective", help="landscape: comma-separated selectors.")
@click.option("--tau", default=None, type=float, help="landscape: feasibility threshold.")
@click.option("--duals-step", default=None, type=int, help="landscape: duals snapshot step.")
def export(trace_path, what, out_path, render_path, group, expanded, steps, configs,
           step, resolution, functions, tau, duals_step):
    """Write an analytics result as a structured data file (wire schema v1)."""
    session = _load_session(trace_path)
    csv = lambda s: [int(v) for v in s.split(",")] if s else None
    try:
        if what == "progression":
            response = session_mod.build_progression(session)
        elif what == "groups":
            if group is None:
                meta = session_mod.build_meta(session)
                payload = {"api_version": schemas.API_VERSION,
                           "groups": [g.model_dump() for g in meta.groups]}
                Path(out_path).write_text(json.dumps(payload, indent=1), encoding="utf-8")
                click.echo(f"wrote {out_path}")
                return
            response = session_mod.build_group_series(session, group, expanded)
        elif what == "paths":
            response = session_mod.build_projection(session, csv(steps), csv(configs))
        else:  # landscape
            if steps is not None:
                picked = csv(steps)
                if len(picked) != 3:
                    _fail(EXIT_USAGE, "landscape --steps needs exactly three indices")
                plane = session_mod.build_threepoint_plane(session, *picked)
            else:
                sel = step if step is not None else max(0, len(session.points) // 2)
                plane = session_mod.build_default_plane(session, sel)
            try:
                rows, cols = (int(v) for v in resolution.lower().split("x"))
            except ValueError:
                _fail(EXIT_USAGE, f"--resolution expects ROWSxCOLS, got {resolution!r}")
            request = schemas.SampleRequest(
                plane_id=plane.plane_id,
                resolution=(rows, cols),
                functions=functions.split(","),
                tau=tau,
                duals_step=duals_step,
            )
            response = session_mod.build_sample(session, request)
    except (NotFoundError, InvalidArgumentError) as exc:
        _fail(EXIT_USAGE, str(exc))
    except NlpscopeError as exc:
        _fail(EXIT_RUNTIME, str(exc))

    Path(out_path).write_text(response.model_dump_json(indent=1), encoding="utf-8")
    click.echo(f"wrote {out_path}")
    if render_path is not None:
        from . import render
        renderers = {
            "progression": render.render_progression,
            "groups": render.render_group_series,
            "paths": render.render_projection,
            "landscape": render.render_landscape,
        }
        renderers[what](response, render_path)
        click.echo(f"rendered {render_path}")


def _default_ui_dir() -> Optional[str]:
    bundled = Path(__file__).resolve().parents[2].parent / "frontend" / "dist"
    return str(bundled) if bundled.is_dir() else None


@main.command()
@click.option("--trace", "trace_path", required=True, type=click.Path())
@click.option("--listen", default=None, help="host:port (default 127.0.0.1:8137).")
@click.option("--config", "config_path", default=None, type=click.Path(exists=True))
@click.option("--ui", is_flag=True, help="Also serve the web UI bundle at /.")
@click.option("--ui-dir", default=None, type=click.Path(), help="UI bundle directory.")
def serve(trace_path, listen, config_path, ui, ui_dir):
    """Start the read-only query service over one trace."""
    try:
        config = load_config(config_path)
    except (OSError, ValueError, NlpscopeError) as exc:
        _fail(EXIT_USAGE, f"bad config: {exc}")
    if listen is not None:
        host, _, port = listen.rpartition(":")
        if not host or not port.isdigit():
            _fail(EXIT_USAGE, f"--listen expects host:port, got {listen!r}")
        config.host, config.port = host, int(port)
    if ui:
        config.ui_dir = ui_dir or config.ui_dir or _default_ui_dir()
        if config.ui_dir is None or not Path(config.ui_dir).is_dir():
            _fail(EXIT_ENV, "UI bundle not found; build the frontend or pass --ui-dir")

    session = _load_session(trace_path)

    probe = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    try:
        probe.bind((config.host, config.port))
    except OSError as exc:
        _fail(EXIT_ENV, f"cannot bind {config.listen}: {exc}")
    finally:
        probe.close()

    import uvicorn
    app = create_app(session, config)
    click.echo(f"serving trace {trace_path} on http://{config.listen}")
    uvicorn.run(app, host=config.host, port=config.port, log_level="warning")


if __name__ == "__main__":
    main()
