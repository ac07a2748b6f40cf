"""Command-line entry point.

Exit codes: 0 success, 2 configuration error, 3 input error,
4 solver failure.
"""

from __future__ import annotations

import sys

import click

from ..errors import ConfigurationError, InputError, PipelineError, SolverDivergedError
from .config import PipelineConfig
from .runner import run_all, run_eval, run_gen_scene, run_reconstruct, run_render, run_track

_CONFIG_OPTIONS = [
    click.option("--config", "config_path", required=True, type=click.Path(), help="Pipeline config JSON."),
    click.option("--out", "out_dir", default=None, type=click.Path(), help="Override the output directory."),
    click.option("--seed", default=None, type=int, help="Override the config seed."),
    click.option("--threads", default=None, type=int, help="Worker thread cap."),
]


def _with_config_options(fn):
    for option in reversed(_CONFIG_OPTIONS):
        fn = option(fn)
    return fn


def _execute(runner, config_path, out_dir, seed, threads):
    try:
        config = PipelineConfig.load(config_path, out_dir=out_dir, seed=seed, threads=threads)
        result = runner(config)
    except ConfigurationError as exc:
        click.echo(f"configuration error: {exc}", err=True)
        sys.exit(2)
    except SolverDivergedError as exc:
        click.echo(f"solver failure: {exc}", err=True)
        sys.exit(4)
    except (InputError, PipelineError) as exc:
        click.echo(f"input error: {exc}", err=True)
        sys.exit(3)
    return result


@click.group()
def main():
    """Sparse-view capture pipeline: reconstruct, track, render, evaluate."""


@main.command("gen-scene")
@_with_config_options
def gen_scene_cmd(config_path, out_dir, seed, threads):
    """Write a synthetic scene: meshes, renders, depths, calibration, skeletons."""
    meta = _execute(run_gen_scene, config_path, out_dir, seed, threads)
    click.echo(f"scene written: {meta['frames']} frame(s), {len(meta['cameras'])} cameras")


@main.command("reconstruct")
@_with_config_options
def reconstruct_cmd(config_path, out_dir, seed, threads):
    """Reconstruct per-frame meshes from images and 2D skeletons."""
    per_frame = _execute(run_reconstruct, config_path, out_dir, seed, threads)
    for tag, info in per_frame.items():
        click.echo(f"{tag}: {info['vertices']} vertices, {info['triangles']} triangles")


@main.command("track")
@_with_config_options
def track_cmd(config_path, out_dir, seed, threads):
    """Track the reconstructed sequence into consistent topology."""
    per_frame = _execute(run_track, config_path, out_dir, seed, threads)
    for tag, info in per_frame.items():
        flag = " (fallback)" if info["warning"] else ""
        click.echo(f"{tag}: mean surface distance {info['mean_distance_m']:.6f} m{flag}")


@main.command("render")
@_with_config_options
def render_cmd(config_path, out_dir, seed, threads):
    """Synthesize the configured novel view from the tracked/reconstructed mesh."""
    info = _execute(run_render, config_path, out_dir, seed, threads)
    click.echo(f"novel view rendered (hole fraction {info['hole_fraction']:.4f})")


@main.command("eval")
@_with_config_options
def eval_cmd(config_path, out_dir, seed, threads):
    """Report reconstruction and rendering metrics against the scene ground truth."""
    reports = _execute(run_eval, config_path, out_dir, seed, threads)
    for report in reports:
        value = "null" if report["value"] is None else f"{report['value']:.6g}"
        click.echo(f"{report['metric']}: {value} {report['units']}".rstrip())


@main.command("all")
@_with_config_options
def all_cmd(config_path, out_dir, seed, threads):
    """Run gen-scene, reconstruct, track (multi-frame), render and eval."""
    reports = _execute(run_all, config_path, out_dir, seed, threads)
    for report in reports:
        value = "null" if report["value"] is None else f"{report['value']:.6g}"
        click.echo(f"{report['metric']}: {value} {report['units']}".rstrip())


if __name__ == "__main__":
    main()
