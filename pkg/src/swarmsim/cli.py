"""Command-line front end.

Subcommands: run a single simulation, compare the two steering laws on
one seed and map, benchmark the real-time factor across swarm sizes,
export plot-ready CSVs from a finished record, and serve the live
steering socket.

Exit codes: 0 success, 2 invalid config or unreadable input, 3 run
aborted by a dynamics blowup.
"""

from __future__ import annotations

import sys
from pathlib import Path

import click

from . import __version__
from . import config as config_mod
from . import engine
from . import record as record_mod

EXIT_INVALID = 2
EXIT_ABORTED = 3


def _fail(code: int, message: str):
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _sim_options(f):
    opts = [
        click.option("--config", default=None,
                     help="Config file path or builtin scenario name."),
        click.option("--algorithm", default=None,
                     type=click.Choice(["olfati_saber", "vasarhelyi"])),
        click.option("--agents", default=None, type=int),
        click.option("--seed", default=None, type=int),
        click.option("--dt", default=None, type=float),
        click.option("--t-end", "t_end", default=None, type=float),
        click.option("--dynamics", default=None,
                     type=click.Choice(["point_mass", "quadcopter"])),
        click.option("--neighbor-mode", "neighbor_mode", default=None,
                     type=click.Choice(["metric", "topological"])),
        click.option("--radius", default=None, type=float),
        click.option("--nn", default=None, type=int),
        click.option("--map-density", "map_density", default=None, type=float),
    ]
    for opt in reversed(opts):
        f = opt(f)
    return f


def _load(config_source, out_dir=None, **overrides):
    try:
        cfg, sp, qp = config_mod.load_config(config_source)
        return config_mod.apply_overrides(cfg, sp, qp, out_dir=out_dir, **overrides)
    except config_mod.ConfigError as exc:
        _fail(EXIT_INVALID, str(exc))


def _progress(done: int, total: int):
    click.echo(f"  tick {done}/{total} ({100 * done // total}%)")


def _print_summary(rec: record_mod.RunRecord):
    click.echo(f"ticks: {rec.n_ticks}  wall: {rec.wall_seconds:.2f} s  "
               f"RTF: {rec.real_time_factor:.3f}")
    final = rec.final_metrics()
    if final is not None:
        click.echo(
            "final metrics: "
            f"order={final.phi_order:.4f} "
            f"safety_ag={final.phi_safety_ag:.4f} "
            f"safety_obs={final.phi_safety_obs:.4f} "
            f"union={final.phi_union:.4f} "
            f"connectivity={final.phi_connectivity:.4f}"
        )
    if rec.aborted:
        click.echo(f"ABORTED at tick {rec.aborted['tick']}: {rec.aborted['reason']}")


@click.group()
@click.version_option(__version__, prog_name="swarmsim")
def main():
    """Headless multi-drone swarm simulator."""


@main.command("run")
@_sim_options
@click.option("--out", envvar="SWARMSIM_OUT_DIR", default=None,
              help="Run-record directory (env: SWARMSIM_OUT_DIR).")
@click.option("--quiet", is_flag=True, help="Suppress progress output.")
def cmd_run(config, out, quiet, **overrides):
    """Run one simulation and write its record."""
    cfg, sp, qp = _load(config, out_dir=out, **overrides)
    rec = engine.run(cfg, sp, qp, out_dir=cfg.out_dir,
                     progress=None if quiet else _progress)
    _print_summary(rec)
    if cfg.out_dir:
        click.echo(f"record written to {cfg.out_dir}")
    if rec.aborted:
        sys.exit(EXIT_ABORTED)


_COMPARE_COLUMNS = [
    "phi_order", "phi_connectivity", "phi_union",
    "phi_safety_ag", "phi_safety_obs",
    "dist_min", "dist_avg", "dist_max",
    "speed_min", "speed_avg", "speed_max",
]


@main.command("compare")
@_sim_options
@click.option("--left", default="olfati_saber",
              type=click.Choice(["olfati_saber", "vasarhelyi"]))
@click.option("--right", default="vasarhelyi",
              type=click.Choice(["olfati_saber", "vasarhelyi"]))
@click.option("--out", envvar="SWARMSIM_OUT_DIR", default="compare_out",
              help="Output directory for both records and the merged table.")
@click.option("--quiet", is_flag=True)
def cmd_compare(config, left, right, out, quiet, **overrides):
    """Run both steering laws on the same seed and map, side by side."""
    names = [left, right] if left != right else [f"{left}-left", f"{right}-right"]
    algorithms = [left, right]
    out_root = Path(out)
    records = []
    for name, algorithm in zip(names, algorithms):
        overrides_n = dict(overrides)
        overrides_n["algorithm"] = algorithm
        cfg, sp, qp = _load(config, **overrides_n)
        if not quiet:
            click.echo(f"running {name} ...")
        rec = engine.run(cfg, sp, qp, out_dir=out_root / name,
                         progress=None if quiet else _progress)
        record_mod.export_panels(rec, out_root / name / "panels")
        _print_summary(rec)
        records.append(rec)
        if rec.aborted:
            sys.exit(EXIT_ABORTED)

    rows = min(len(records[0].metrics), len(records[1].metrics))
    header = ["t"]
    for col in _COMPARE_COLUMNS:
        header += [f"{col}_{name}" for name in names]
    lines = [",".join(header)]
    for k in range(rows):
        frames = [records[0].metrics[k], records[1].metrics[k]]
        cells = [repr(frames[0].t)]
        for col in _COMPARE_COLUMNS:
            cells += [repr(float(getattr(f, col))) for f in frames]
        lines.append(",".join(cells))
    table = out_root / "comparison.csv"
    table.write_text("\n".join(lines) + "\n")
    click.echo(f"comparison table written to {table}")


@main.command("bench")
@click.option("--sizes", default="2,4,8,16,32,64,128,256,512,1024",
              help="Comma-separated swarm sizes.")
@click.option("--dynamics", "dynamics_modes", default="point_mass",
              help="Comma-separated dynamics modes.")
@click.option("--algorithms", default="olfati_saber,vasarhelyi",
              help="Comma-separated steering laws.")
@click.option("--t-end", "t_end", default=20.0, type=float)
@click.option("--dt", default=0.01, type=float)
@click.option("--seed", default=0, type=int)
@click.option("--out", envvar="SWARMSIM_OUT_DIR", default=None,
              help="Also write bench.csv here.")
def cmd_bench(sizes, dynamics_modes, algorithms, t_end, dt, seed, out):
    """Measure the real-time factor over a swarm-size sweep.

    Metrics and state recording are disabled so the timing covers the
    simulation loop only; cells run sequentially to keep measurements
    clean.  A failing cell is recorded and the sweep continues.
    """
    size_list = [int(s) for s in sizes.split(",") if s]
    mode_list = [m.strip() for m in dynamics_modes.split(",") if m.strip()]
    alg_list = [a.strip() for a in algorithms.split(",") if a.strip()]
    rows = []
    click.echo(f"{'dynamics':<12} {'algorithm':<14} {'N':>5} "
               f"{'wall_s':>9} {'RTF':>8}  status")
    for mode in mode_list:
        for algorithm in alg_list:
            for n in size_list:
                try:
                    cfg, sp, qp = config_mod.load_config(None)
                    cfg.dynamics_mode = mode
                    cfg.t_end = t_end
                    cfg.dt = dt
                    cfg.rng_seed = seed
                    cfg.metrics_stride = 0
                    sp.algorithm = algorithm
                    sp.n_agents = n
                    sp.nn = min(sp.nn, max(1, n - 1))
                    rec = engine.run(cfg, sp, qp, collect_states=False)
                    rows.append((mode, algorithm, n, rec.wall_seconds,
                                 rec.real_time_factor, "ok"))
                    click.echo(f"{mode:<12} {algorithm:<14} {n:>5} "
                               f"{rec.wall_seconds:>9.3f} "
                               f"{rec.real_time_factor:>8.3f}  ok")
                except Exception as exc:
                    rows.append((mode, algorithm, n, float("nan"),
                                 float("nan"), f"failed: {exc}"))
                    click.echo(f"{mode:<12} {algorithm:<14} {n:>5} "
                               f"{'-':>9} {'-':>8}  failed: {exc}")
    if out:
        out_dir = Path(out)
        out_dir.mkdir(parents=True, exist_ok=True)
        lines = ["dynamics,algorithm,n_agents,wall_seconds,real_time_factor,status"]
        for row in rows:
            lines.append(",".join([row[0], row[1], str(row[2]),
                                   repr(row[3]), repr(row[4]),
                                   row[5].replace(",", ";")]))
        (out_dir / "bench.csv").write_text("\n".join(lines) + "\n")
        click.echo(f"bench table written to {out_dir / 'bench.csv'}")


@main.command("export")
@click.argument("run_dir", type=click.Path(exists=True, file_okay=False))
@click.option("--out", default=None,
              help="Output directory (default: <run_dir>/panels).")
def cmd_export(run_dir, out):
    """Write plot-ready CSV panels from a finished run record."""
    try:
        rec = record_mod.load_record(run_dir)
    except (record_mod.SchemaError, FileNotFoundError) as exc:
        _fail(EXIT_INVALID, str(exc))
    target = Path(out) if out else Path(run_dir) / "panels"
    files = record_mod.export_panels(rec, target)
    for path in files:
        click.echo(str(path))


@main.command("serve")
@_sim_options
@click.option("--port", default=8000, type=int)
@click.option("--host", default="127.0.0.1")
@click.option("--rate", default=30.0, type=float,
              help="Frame broadcast rate (frames per second).")
@click.option("--ui-dir", default=None,
              help="Directory with the built browser UI (default: ./frontend/dist).")
def cmd_serve(config, port, host, rate, ui_dir, **overrides):
    """Serve the live-steering socket and the browser UI."""
    cfg, sp, qp = _load(config, **overrides)
    try:
        import uvicorn
        from .live import create_app
    except ImportError as exc:
        _fail(EXIT_INVALID, f"live server dependencies missing: {exc}")
    app = create_app(cfg, sp, qp, frame_rate=rate, ui_dir=ui_dir)
    click.echo(f"serving on http://{host}:{port} (frames at {rate}/s)")
    uvicorn.run(app, host=host, port=port, log_level="warning")


if __name__ == "__main__":
    main()
