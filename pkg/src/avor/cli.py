"""Command-line entry points: run, characterize, eval, serve."""

from __future__ import annotations

import sys
from pathlib import Path

import click
import numpy as np

from .config import AppConfig, load_config
from .engine import MODELS, export_risk_csv, run_scenario
from .errors import AvorError, DegenerateTraceError
from .metrics import (
    EvalReport,
    aggregate_ratings,
    detect_onset,
    load_rating,
    normalize_risk,
    report_to_csv,
    rmse_per_phase,
)
from .scenario import (
    POPULATIONS,
    characterize_cutin,
    load_scenario,
    segment_phases,
)

EXIT_VALIDATION = 1
EXIT_IO = 2


def _load_trace(path, cfg: AppConfig):
    try:
        return load_scenario(path)
    except OSError as exc:
        click.echo(f"error: cannot read {path}: {exc}", err=True)
        sys.exit(EXIT_IO)
    except AvorError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_VALIDATION)


@click.group()
@click.option("--config", "config_path", type=click.Path(), default=None,
              help="TOML configuration file.")
@click.pass_context
def main(ctx, config_path):
    """Cut-in perceived-risk simulation and evaluation."""
    try:
        ctx.obj = load_config(config_path)
    except OSError as exc:
        click.echo(f"error: cannot read config: {exc}", err=True)
        sys.exit(EXIT_IO)


@main.command()
@click.argument("scenario_path", type=click.Path())
@click.option("--models", default="drf,avor", show_default=True,
              help="Comma-separated subset of drf,avor.")
@click.option("--population", default=None,
              type=click.Choice(POPULATIONS), help="Override the scene population.")
@click.option("--out", "out_path", default="risk.csv", show_default=True)
@click.pass_obj
def run(cfg: AppConfig, scenario_path, models, population, out_path):
    """Replay a scenario and write the per-frame risk traces as CSV."""
    wanted = [m.strip().upper() for m in models.split(",") if m.strip()]
    unknown = set(wanted) - set(MODELS)
    if unknown:
        click.echo(f"error: unknown model(s) {sorted(unknown)}", err=True)
        sys.exit(EXIT_VALIDATION)
    trace = _load_trace(scenario_path, cfg)
    traces = run_scenario(
        trace, wanted, cfg.drf, cfg.costs, cfg.engine, population=population
    )
    seg = None
    try:
        seg = segment_phases(trace, cfg.segmentation)
    except AvorError:
        pass  # phase annotation is best-effort for non-cut-in scenarios
    normalized = {}
    for tr in traces:
        try:
            normalized[tr.model] = normalize_risk(
                tr.value, cfg.normalization.offset, cfg.normalization.scale
            )
        except DegenerateTraceError:
            pass
    try:
        export_risk_csv(traces, out_path, seg, normalized)
    except OSError as exc:
        click.echo(f"error: cannot write {out_path}: {exc}", err=True)
        sys.exit(EXIT_IO)
    click.echo(f"wrote {out_path}")


@main.command()
@click.argument("scenario_path", type=click.Path())
@click.pass_obj
def characterize(cfg: AppConfig, scenario_path):
    """Print segmentation and kinematic statistics of the cut-in."""
    trace = _load_trace(scenario_path, cfg)
    try:
        seg = segment_phases(trace, cfg.segmentation)
        ch = characterize_cutin(trace, seg)
    except AvorError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_VALIDATION)
    click.echo(f"scenario              {trace.id} ({trace.risk_label})")
    click.echo(f"phase I start [s]     {seg.t_I_start:.2f}")
    click.echo(f"phase II start [s]    {seg.t_II_start:.2f}")
    click.echo(f"phase III start [s]   {seg.t_III_start:.2f}")
    click.echo(f"phase III end [s]     {seg.t_III_end:.2f}")
    click.echo(f"cut-in duration [s]   {ch.duration:.2f}")
    click.echo(f"avg V_lat [m/s]       {ch.v_lat_avg:.4f}")
    click.echo(f"max V_lat [m/s]       {ch.v_lat_max:.4f}")
    click.echo(f"avg a_lat [m/s^2]     {ch.a_lat_avg:.4f}")
    click.echo(f"initial distance [m]  {ch.initial_cutin_distance:.2f}")


def evaluate_conditions(scenario_paths, ratings_dir, cfg: AppConfig):
    """Pair rating files with scenarios and score both models per condition."""
    traces = {}
    for path in scenario_paths:
        trace = _load_trace(path, cfg)
        traces[trace.id] = trace

    ratings = []
    for path in sorted(Path(ratings_dir).glob("*.json")):
        try:
            ratings.append(load_rating(path))
        except (AvorError, KeyError, ValueError) as exc:
            click.echo(f"warning: skipping {path}: {exc}", err=True)
    groups: dict[tuple[str, str], list] = {}
    for r in ratings:
        if r.scenario_id in traces:
            groups.setdefault((r.scenario_id, r.population), []).append(r)
    if not groups:
        return None

    cells = {}
    onset = {}
    for (sid, pop), group in sorted(groups.items()):
        trace = traces[sid]
        seg = segment_phases(trace, cfg.segmentation)
        grid_t = trace.times
        mean_srr, _ = aggregate_ratings(group, grid_t)
        sel0 = (grid_t >= seg.t_phase0_start) & (grid_t < seg.t_I_start)
        c_bar = float(mean_srr[sel0].mean())
        model_traces = run_scenario(
            trace, MODELS, cfg.drf, cfg.costs, cfg.engine, population=pop
        )
        for tr in model_traces:
            norm = normalize_risk(tr.value, c_bar, cfg.normalization.scale)
            for phase, value in rmse_per_phase(norm, mean_srr, grid_t, seg).items():
                cells[(tr.model, sid, pop, phase)] = value
        for r in group:
            key = f"{r.rater_id}/{sid}/{pop}"
            onset[key] = detect_onset(r, seg, cfg.evaluation.onset_threshold)
    return EvalReport(cells=cells, onset=onset)


@main.command("eval")
@click.argument("scenario_paths", type=click.Path(), nargs=-1, required=True)
@click.option("--ratings-dir", type=click.Path(), required=True)
@click.option("--out", "out_path", default="eval.csv", show_default=True)
@click.pass_obj
def eval_cmd(cfg: AppConfig, scenario_paths, ratings_dir, out_path):
    """Score DRF and AVOR against recorded ratings; write a per-phase RMSE CSV."""
    if not Path(ratings_dir).is_dir():
        click.echo(f"error: ratings dir {ratings_dir} not found", err=True)
        sys.exit(EXIT_IO)
    try:
        report = evaluate_conditions(scenario_paths, ratings_dir, cfg)
    except AvorError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_VALIDATION)
    if report is None:
        click.echo("error: no rating files match the given scenarios", err=True)
        sys.exit(EXIT_VALIDATION)
    scenario_ids = sorted({key[1] for key in report.cells})
    try:
        report_to_csv(report, out_path, scenario_ids)
    except OSError as exc:
        click.echo(f"error: cannot write {out_path}: {exc}", err=True)
        sys.exit(EXIT_IO)
    click.echo(f"wrote {out_path} ({len(report.cells)} cells)")
    click.echo(f"onset fraction {report.onset_fraction:.2f} "
               f"(threshold {cfg.evaluation.onset_threshold})")


@main.command()
@click.option("--port", default=8000, show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--scenarios-dir", type=click.Path(exists=True), default="scenarios",
              show_default=True)
@click.option("--data-dir", type=click.Path(), default="ratings", show_default=True)
@click.pass_obj
def serve(cfg: AppConfig, port, host, scenarios_dir, data_dir):
    """Serve scenarios and collect subjective risk ratings over HTTP."""
    import uvicorn

    from .service import create_app

    app = create_app(Path(scenarios_dir), Path(data_dir), cfg)
    try:
        uvicorn.run(app, host=host, port=port)
    except OSError as exc:
        click.echo(f"error: cannot bind {host}:{port}: {exc}", err=True)
        sys.exit(EXIT_VALIDATION)


if __name__ == "__main__":
    main()
