"""Command-line interface: decompose, oa, rgb, stats, simulate.

Exit codes: 0 success, 2 usage error, 3 I/O failure, 4 numeric failure.
The worker pool size is capped by the POLSAR_SD_THREADS environment
variable; every pipeline is deterministic for a given seed and flag set
regardless of the worker count.
"""

from __future__ import annotations

import functools
import sys

import click
import numpy as np

from . import raster as rio
from .divergence import DistanceFamily
from .errors import (
    BadRoi,
    BadSceneSpec,
    InvalidParams,
    PolsarError,
    RasterIOError,
)
from .orientation import SearchConfig, oa_curves
from .scene import SceneSpec, generate_scene


def _handle_errors(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except (BadRoi, BadSceneSpec, InvalidParams) as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(2)
        except (RasterIOError, OSError) as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(3)
        except PolsarError as exc:
            click.echo(f"numeric failure: {exc}", err=True)
            sys.exit(4)

    return wrapper


def _search_config(grid_step_deg, distance, l_eval, l_cap) -> SearchConfig:
    family = (
        DistanceFamily.KULLBACK_LEIBLER
        if distance == "kl"
        else DistanceFamily.HELLINGER
    )
    try:
        return SearchConfig(
            grid_step=np.deg2rad(grid_step_deg),
            l_eval=l_eval,
            distance_family=family,
            l_cap=l_cap,
        )
    except InvalidParams as exc:
        raise click.UsageError(str(exc))


def _parse_pixel(value):
    if value is None:
        return None
    try:
        r, c = (int(v) for v in value.split(","))
        return r, c
    except ValueError:
        raise click.UsageError("--curves expects row,col")


def _parse_roi(values):
    rois = []
    for value in values:
        try:
            rois.append(tuple(int(v) for v in value.split(",")))
        except ValueError:
            raise click.UsageError("--roi expects r0,c0,r1,c1")
        if len(rois[-1]) != 4:
            raise click.UsageError("--roi expects r0,c0,r1,c1")
    return rois


search_options = [
    click.option("--grid-step-deg", type=float, default=0.1, show_default=True,
                 help="Angle grid resolution in degrees."),
    click.option("--distance", type=click.Choice(["hellinger", "kl"]),
                 default="hellinger", show_default=True,
                 help="Distance family for curve values."),
    click.option("--l-eval", type=float, default=4.0, show_default=True,
                 help="Look count for reported distance values."),
    click.option("--l-cap", type=float, default=1e4, show_default=True,
                 help="Upper bound for the look-parameter maximisation."),
]


def _with_search_options(fn):
    for option in reversed(search_options):
        fn = option(fn)
    return fn


@click.group()
@click.version_option(package_name="sdpolsar")
def main():
    """Polarimetric SAR decomposition and orientation-angle toolkit."""


@main.command()
@click.argument("input_dir", type=click.Path(exists=True, file_okay=False))
@click.argument("output_dir", type=click.Path(file_okay=False))
@click.option("--method", type=click.Choice(["y4o", "y4r", "sdy4o"]),
              default="sdy4o", show_default=True)
@_with_search_options
@_handle_errors
def decompose(input_dir, output_dir, method, grid_step_deg, distance, l_eval, l_cap):
    """Decompose a T3 raster into scattering power planes."""
    cfg = _search_config(grid_step_deg, distance, l_eval, l_cap)
    t3 = rio.read_t3(input_dir)
    power = rio.decompose_raster(t3, method, cfg)
    rio.write_power(power, output_dir)
    click.echo(
        f"{method}: {t3.rows}x{t3.cols} pixels, "
        f"negative-power pixels: {power.negative_percentage():.2f}%"
    )


@main.command()
@click.argument("input_dir", type=click.Path(exists=True, file_okay=False))
@click.argument("output_dir", type=click.Path(file_okay=False))
@click.option("--method", type=click.Choice(["lee", "sd"]), default="sd",
              show_default=True)
@click.option("--curves", default=None,
              help="row,col of one pixel whose distance curves are written as CSV.")
@_with_search_options
@_handle_errors
def oa(input_dir, output_dir, method, curves, grid_step_deg, distance, l_eval, l_cap):
    """Estimate per-pixel orientation angles (degrees, in [-22.5, 22.5])."""
    cfg = _search_config(grid_step_deg, distance, l_eval, l_cap)
    pixel = _parse_pixel(curves)
    t3 = rio.read_t3(input_dir)
    theta = rio.oa_raster(t3, method, cfg)
    rio.write_angle_plane(theta, output_dir, method)
    if pixel is not None:
        r, c = pixel
        if not (0 <= r < t3.rows and 0 <= c < t3.cols):
            raise BadRoi(f"curve pixel {pixel} outside raster")
        table = oa_curves(t3.matrix_at(r, c), cfg)
        csv_path = f"{output_dir}/curves_{r}_{c}.csv"
        table.write_csv(csv_path)
        click.echo(f"curves written to {csv_path}")
    click.echo(f"{method}: angle plane written to {output_dir}")


@main.command()
@click.argument("input_dir", type=click.Path(exists=True, file_okay=False))
@click.argument("output_png", type=click.Path(dir_okay=False))
@_handle_errors
def rgb(input_dir, output_png):
    """Render a power raster as an RGBA composite (R=Pd, G=Pv, B=Ps)."""
    power = rio.read_power(input_dir)
    rio.write_rgb_png(power, output_png)
    click.echo(f"image written to {output_png}")


@main.command()
@click.argument("input_dir", type=click.Path(exists=True, file_okay=False))
@click.option("--roi", multiple=True, required=True,
              help="r0,c0,r1,c1 half-open rectangle; repeatable.")
@click.option("--output-csv", type=click.Path(dir_okay=False), default=None)
@click.option("--output-json", type=click.Path(dir_okay=False), default=None)
@_handle_errors
def stats(input_dir, roi, output_csv, output_json):
    """Mean powers and negative-power percentages over regions of interest."""
    import csv as csv_mod
    import json as json_mod

    power = rio.read_power(input_dir)
    rows = rio.roi_stats(power, _parse_roi(roi))
    header = ["roi", "mean_ps", "mean_pd", "mean_pv", "mean_pc",
              "frac_ps", "frac_pd", "frac_pv", "negative_percent"]
    click.echo("  ".join(header))
    for entry in rows:
        d = entry.as_dict()
        click.echo("  ".join(str(d[k]) for k in header))
    if output_csv:
        with open(output_csv, "w", newline="") as fh:
            writer = csv_mod.writer(fh)
            writer.writerow(header)
            for entry in rows:
                d = entry.as_dict()
                writer.writerow([d[k] for k in header])
    if output_json:
        with open(output_json, "w") as fh:
            json_mod.dump([entry.as_dict() for entry in rows], fh, indent=2)


@main.command()
@click.argument("scene_json", type=click.Path(exists=True, dir_okay=False))
@click.argument("output_dir", type=click.Path(file_okay=False))
@click.option("--seed", type=int, default=None,
              help="Override the seed stored in the scene document.")
@_handle_errors
def simulate(scene_json, output_dir, seed):
    """Generate a synthetic scene: T3 bands plus ground-truth planes."""
    import dataclasses
    from pathlib import Path

    spec = SceneSpec.from_json(scene_json)
    if seed is not None:
        spec = dataclasses.replace(spec, seed=seed)
    t3, truth = generate_scene(spec)
    rio.write_t3(t3, output_dir)
    out = Path(output_dir)
    np.ascontiguousarray(truth.theta_deg, dtype="<f4").tofile(out / "theta_true.bin")
    np.ascontiguousarray(
        truth.labels.astype(np.float32), dtype="<f4"
    ).tofile(out / "class_label.bin")
    click.echo(
        f"scene {t3.rows}x{t3.cols} written to {output_dir} "
        f"(looks={'inf' if spec.looks is None else spec.looks}, seed={spec.seed})"
    )


if __name__ == "__main__":
    main()
