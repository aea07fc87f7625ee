"""Command line front end.

Exit codes: 0 success, 1 usage error, 2 domain failure (bad config,
infeasible build, missing results, ...), 3 unexpected error. Progress
chatter goes to stderr; stdout carries only the requested output.
"""

from __future__ import annotations

import json
import os
import sys

import click

from . import __version__
from .classify import classify_content, classify_frequency
from .config import default_config, load_config
from .dataset import build_dataset, load_manifest, verify_dataset
from .errors import MoirebenchError
from .io import read_image
from .metrics import (
    EvaluationReport,
    evaluate_submission,
    format_leaderboard,
    format_report,
    leaderboard,
)
from .mos.study import (
    compute_mos,
    create_study,
    export_results,
    load_study,
    RatingStore,
    save_study,
    select_mos_images,
)
from .sources import make_sample_sources


def _log(msg):
    click.echo(msg, err=True)


@click.group()
@click.version_option(version=__version__, prog_name="moirebench")
def cli():
    """Synthetic screen-capture dataset toolkit."""


@cli.command()
@click.argument("config", required=False, type=click.Path(dir_okay=False))
@click.option("--source", "source_dir", required=True, type=click.Path(file_okay=False))
@click.option("--out", "out_dir", required=True, type=click.Path(file_okay=False))
@click.option("--seed", type=int, default=None, help="Master seed (overrides config).")
@click.option(
    "--jobs",
    type=int,
    default=None,
    envvar="MOIREBENCH_JOBS",
    help="Parallel workers (default 1, or MOIREBENCH_JOBS).",
)
def generate(config, source_dir, out_dir, seed, jobs):
    """Build a dataset from CONFIG (JSON, optional) and verify it."""
    cfg = load_config(config) if config else default_config()
    master_seed = seed if seed is not None else cfg.pipeline.seed
    build_dataset(
        source_dir,
        out_dir,
        cfg.split,
        cfg.pipeline,
        master_seed,
        thresholds=cfg.content_thresholds,
        band_edges=cfg.frequency_band_edges,
        freq_imbalance_ratio=cfg.freq_imbalance_ratio,
        rebalance_retry_cap=cfg.rebalance_retry_cap,
        n_jobs=jobs or 1,
        log=_log,
    )
    _log("verifying build")
    report = verify_dataset(out_dir, regen_sample=2, seed=master_seed)
    _log(report.summary())
    if not report.ok:
        raise MoirebenchError(f"dataset verification failed:\n{report.summary()}")
    click.echo(os.path.join(out_dir, "manifest.json"))


@cli.command()
@click.option("--results", "results_dir", required=True, type=click.Path(file_okay=False))
@click.option("--gt", "dataset_dir", required=True, type=click.Path(file_okay=False))
@click.option(
    "--manifest",
    "manifest_path",
    type=click.Path(dir_okay=False),
    default=None,
    help="Explicit manifest path (default: <gt>/manifest.json).",
)
@click.option("--split", default="test", show_default=True)
@click.option("--name", default=None, help="Submission name for the report.")
@click.option(
    "--format",
    "fmt",
    type=click.Choice(["table", "machine"]),
    default="table",
    show_default=True,
)
def evaluate(results_dir, dataset_dir, manifest_path, split, name, fmt):
    """Score a directory of restored images against a dataset split."""
    report = evaluate_submission(
        results_dir,
        manifest_path if manifest_path else dataset_dir,
        split=split,
        name=name,
    )
    if fmt == "machine":
        click.echo(report.to_json())
    else:
        click.echo(format_report(report))


@cli.command()
@click.option("--image", "image_path", type=click.Path(dir_okay=False), default=None)
@click.option("--pattern", "pattern_path", type=click.Path(dir_okay=False), default=None)
def classify(image_path, pattern_path):
    """Print the content class of --image or frequency group of --pattern."""
    if (image_path is None) == (pattern_path is None):
        raise click.UsageError("pass exactly one of --image or --pattern")
    if image_path:
        click.echo(classify_content(read_image(image_path)).value)
    else:
        click.echo(classify_frequency(read_image(pattern_path)).value)


@cli.command("leaderboard")
@click.argument("reports", nargs=-1, required=True, type=click.Path(dir_okay=False))
@click.option(
    "--rank",
    "rank_key",
    type=click.Choice(["psnr", "mos"]),
    default="psnr",
    show_default=True,
)
@click.option(
    "--mos-export",
    type=click.Path(dir_okay=False),
    default=None,
    help="Join MOS totals from a study export (method names must match).",
)
def leaderboard_cmd(reports, rank_key, mos_export):
    """Rank evaluation report JSON files."""
    loaded = {}
    for path in reports:
        with open(path, "r", encoding="utf-8") as fh:
            report = EvaluationReport.from_json(fh.read())
        name = report.name or os.path.splitext(os.path.basename(path))[0]
        if name in loaded:
            raise click.UsageError(f"duplicate submission name {name!r}")
        loaded[name] = report
    mos_scores = None
    if mos_export:
        with open(mos_export, "r", encoding="utf-8") as fh:
            payload = json.load(fh)
        mos_scores = {row["method"]: row["mos"] for row in payload["methods"]}
    rows = leaderboard(loaded, rank_key=rank_key, mos_scores=mos_scores)
    click.echo(format_leaderboard(rows))


@cli.command()
@click.option("--out", "out_dir", required=True, type=click.Path(file_okay=False))
@click.option("--per-class", type=int, default=8, show_default=True)
@click.option("--size", type=int, default=192, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
def sources(out_dir, per_class, size, seed):
    """Render synthetic source pages for trying the pipeline out."""
    paths = make_sample_sources(out_dir, per_class=per_class, size=size, seed=seed)
    _log(f"wrote {len(paths)} sources")
    click.echo(out_dir)


@cli.group()
def mos():
    """Blinded opinion study commands."""


@mos.command("create")
@click.option("--dataset", "dataset_dir", required=True, type=click.Path(file_okay=False))
@click.option(
    "--method",
    "methods",
    multiple=True,
    required=True,
    help="NAME=DIR of restored images; repeatable.",
)
@click.option("--images", "n_images", type=int, default=20, show_default=True)
@click.option("--judges", type=int, default=5, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--split", default="test", show_default=True)
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False))
def mos_create(dataset_dir, methods, n_images, judges, seed, split, out_path):
    """Design a study over a dataset split and write the study file."""
    method_dirs = {}
    for spec_arg in methods:
        name, sep, d = spec_arg.partition("=")
        if not sep or not name or not d:
            raise click.UsageError(f"--method expects NAME=DIR, got {spec_arg!r}")
        method_dirs[name] = d
    manifest = load_manifest(dataset_dir)
    images = select_mos_images(manifest, n_images, seed, split=split)
    gt_dir = os.path.join(dataset_dir, split, "clean")
    study = create_study(method_dirs, gt_dir, images, judges, seed)
    save_study(study, out_path)
    _log(f"{len(study.queries)} queries across {judges} judge(s)")
    click.echo(out_path)
    click.echo(f"operator-key: {study.operator_key}")


@mos.command("serve")
@click.option("--study", "study_path", required=True, type=click.Path(dir_okay=False))
@click.option("--port", type=int, default=8765, show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--ratings", "ratings_path", type=click.Path(dir_okay=False), default=None)
def mos_serve(study_path, port, host, ratings_path):
    """Serve the rating UI and API for a study."""
    from .mos.service import serve

    _log(f"serving study {study_path} on http://{host}:{port}/")
    serve(study_path, port=port, host=host, ratings_path=ratings_path)


@mos.command("export")
@click.option("--study", "study_path", required=True, type=click.Path(dir_okay=False))
@click.option("--ratings", "ratings_path", type=click.Path(dir_okay=False), default=None)
@click.option("--out", "out_path", type=click.Path(dir_okay=False), default=None)
def mos_export(study_path, ratings_path, out_path):
    """Export ranked study results as JSON (stdout by default)."""
    from .mos.service import default_ratings_path

    study = load_study(study_path)
    store = RatingStore(ratings_path or default_ratings_path(study_path))
    payload = export_results(study, store)
    text = json.dumps(payload, indent=2, sort_keys=True)
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
        click.echo(out_path)
    else:
        click.echo(text)
    totals = compute_mos(study, store)
    for row in payload["methods"]:
        _log(f"{row['method']}: MOS {totals[row['method']]}")


def main(argv=None):
    try:
        return cli.main(args=argv, standalone_mode=False) or 0
    except click.ClickException as exc:
        exc.show()
        return 1
    except click.Abort:
        click.echo("aborted", err=True)
        return 1
    except MoirebenchError as exc:
        click.echo(f"error: {exc}", err=True)
        return 2
    except Exception as exc:  # pragma: no cover - last resort
        click.echo(f"unexpected error: {exc}", err=True)
        return 3


if __name__ == "__main__":
    sys.exit(main())
