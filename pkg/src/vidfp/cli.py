"""Command-line surface: inspect, synth, train, predict, evaluate,
core-params.

Exit codes: 0 success, 1 usage error, 2 input/parse failure, 3 model
mismatch.  `VIDFP_MODEL` supplies the model path when `--model` is omitted.
"""

from __future__ import annotations

import csv
import functools
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import click
import numpy as np

from . import bmff, evaluate, h264, metaclass, model as model_mod, report, synth, tree as tree_mod
from .errors import ManifestError, ModelMismatch, VidfpError
from .manifest import load_manifest

click.UsageError.exit_code = 1  # spec reserves 2 for input/parse failures

MODEL_ENV_VAR = "VIDFP_MODEL"

EXIT_INPUT = 2
EXIT_MODEL = 3


def _handle_errors(func):
    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except ModelMismatch as exc:
            click.echo("model mismatch: %s" % exc, err=True)
            sys.exit(EXIT_MODEL)
        except (VidfpError, OSError) as exc:
            click.echo("error: %s" % exc, err=True)
            sys.exit(EXIT_INPUT)
    return wrapper


@click.group()
@click.version_option(package_name="vidfp")
def cli() -> None:
    """Camera-model attribution from video container and codec metadata."""


def _exclusion_option(func):
    return click.option("--exclusion-profile", "exclusion_profile",
                        type=click.Choice(["content", "user-adjustable", "none"]),
                        default="content", show_default=True,
                        help="Field exclusion profile applied before featurization.")(func)


def _model_path(explicit: str | None) -> str:
    import os

    path = explicit or os.environ.get(MODEL_ENV_VAR)
    if not path:
        raise click.UsageError("no model given: pass --model or set $%s" % MODEL_ENV_VAR)
    return path


def _load_samples(entries, exclusions, jobs: int):
    def analyze(entry):
        return model_mod.analyze_path(entry.path, exclusions, label=entry.label)

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(analyze, entries))
    return [analyze(entry) for entry in entries]


@cli.command()
@click.argument("file", type=click.Path(exists=True, dir_okay=False))
@click.option("--boxes", is_flag=True, help="Dump the box tree.")
@click.option("--params", is_flag=True, help="Dump decoded SPS/PPS/VUI tables.")
@click.option("--tree", "show_tree", is_flag=True, help="Dump the joint metadata tree.")
@click.option("--signature", is_flag=True, help="Print structure digest and embedding summary.")
@click.option("--json", "as_json", is_flag=True, help="Machine-readable box dump (one node per line).")
@click.option("--model", "model_path", type=click.Path(), default=None,
              help="Model used to resolve the metaclass for --signature.")
@_exclusion_option
@_handle_errors
def inspect(file, boxes, params, show_tree, signature, as_json, model_path, exclusion_profile):
    """Parse one file and dump the requested views."""
    if not any([boxes, params, show_tree, signature, as_json]):
        boxes = True
    box_tree = bmff.parse_boxes(file)

    if boxes or as_json:
        if as_json:
            for record in bmff.dump_json_records(box_tree):
                click.echo(json.dumps(record, sort_keys=True))
        else:
            for line in bmff.dump_lines(box_tree):
                click.echo(line)

    if params:
        try:
            records = bmff.extract_parameter_set_blobs(box_tree)
        except VidfpError as exc:
            click.echo("codec: %s" % exc)
        else:
            setting = model_mod.setting_from_record(records[0])
            _dump_params(setting)

    if show_tree or signature:
        exclusions = tree_mod.load_exclusion_profile(exclusion_profile)
        analyzed = model_mod.analyze_source(file, exclusions, identifier=str(file))
        if show_tree:
            for line in tree_mod.dump_tree_lines(analyzed.tree):
                click.echo(line)
        if signature:
            digest = metaclass.tree_hash(analyzed.structure)
            embedding = metaclass.ldp_embed(analyzed.structure)
            click.echo("tree-hash: %s" % digest)
            click.echo("ldp: %d bins, %d nonzero, sum %d"
                       % (embedding.size, int(np.count_nonzero(embedding)), int(embedding.sum())))
            if model_path:
                trained = model_mod.load_model(_model_path(model_path))
                if trained.index is not None:
                    mc = metaclass.assign(analyzed.structure, trained.index)
                    click.echo("metaclass: %s" % ("unknown" if mc == metaclass.UNKNOWN_METACLASS else mc))


def _dump_params(setting: h264.EncodingSetting) -> None:
    click.echo("SPS")
    for param in setting.sps.params:
        click.echo("  %-45s %s" % (param.name, param.render()))
    for i, pps in enumerate(setting.pps_list):
        click.echo("PPS[%d]" % i)
        for param in pps.params:
            click.echo("  %-45s %s" % (param.name, param.render()))
    if setting.vui is not None:
        click.echo("VUI")
        for param in setting.vui.params:
            click.echo("  %-45s %s" % (param.name, param.render()))
    else:
        click.echo("VUI: absent")


@cli.command(name="synth")
@click.option("--out", "out_dir", type=click.Path(file_okay=False), required=True)
@click.option("--classes", "n_classes", type=int, default=12, show_default=True)
@click.option("--samples", type=int, default=20, show_default=True, help="Files per class.")
@click.option("--clone-pairs", type=int, default=0, show_default=True,
              help="Trailing class pairs sharing identical device-stable metadata.")
@click.option("--seed", type=int, default=0, show_default=True)
@_handle_errors
def synth_cmd(out_dir, n_classes, samples, clone_pairs, seed):
    """Generate a synthetic labeled corpus and its manifest."""
    spec = synth.default_spec(n_classes, samples, seed, clone_pairs=clone_pairs)
    manifest = synth.write_corpus(spec, out_dir)
    click.echo("wrote %d files, manifest %s" % (n_classes * samples, manifest))


@cli.command()
@click.argument("manifest", type=click.Path(exists=True, dir_okay=False))
@click.option("--out", "out_path", type=click.Path(dir_okay=False), required=True,
              help="Model file to write.")
@click.option("--representation", type=click.Choice(["hierarchical", "flat", "sparse", "tta", "codec"]),
              default="hierarchical", show_default=True)
@click.option("--level1", type=click.Choice(["hash", "ldp"]), default="hash", show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--jobs", type=int, default=1, show_default=True)
@_exclusion_option
@_handle_errors
def train(manifest, out_path, representation, level1, seed, jobs, exclusion_profile):
    """Train a model from a labeled manifest."""
    del seed  # training is deterministic; the flag is accepted for symmetry
    entries = load_manifest(manifest)
    labels = {entry.label for entry in entries}
    if len(labels) < 2:
        raise ManifestError("training needs at least 2 classes, manifest has %d" % len(labels))
    exclusions = tree_mod.load_exclusion_profile(exclusion_profile)
    samples = _load_samples(entries, exclusions, jobs)
    trained = model_mod.train_model(samples, representation=representation,
                                    level1=level1, exclusions=exclusions)
    model_mod.save_model(trained, out_path)
    click.echo("trained %s model on %d files / %d classes"
               % (representation, len(samples), len(labels)))
    if trained.index is not None:
        click.echo("metaclasses: %d" % trained.metaclass_count)
    click.echo("model written to %s" % out_path)


@cli.command()
@click.argument("files", nargs=-1, required=True, type=click.Path())
@click.option("--model", "model_path", type=click.Path(), default=None,
              help="Model file (default: $%s)." % MODEL_ENV_VAR)
@click.option("--jobs", type=int, default=1, show_default=True)
@_handle_errors
def predict(files, model_path, jobs):
    """Classify files: path, predicted class, metaclass, fallback flag."""
    trained = model_mod.load_model(_model_path(model_path))
    exclusions = tree_mod.load_exclusion_profile(trained.exclusion_profile)
    model_mod.check_exclusion_compatibility(trained, exclusions)

    def classify(path):
        analyzed = model_mod.analyze_path(path, exclusions)
        return model_mod.predict_model(trained, analyzed)

    failures = 0
    results = []
    if jobs > 1:
        def safe(path):
            try:
                return classify(path)
            except (VidfpError, OSError) as exc:
                return exc
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(safe, files))
    else:
        for path in files:
            try:
                results.append(classify(path))
            except (VidfpError, OSError) as exc:
                results.append(exc)

    for path, outcome in zip(files, results):
        if isinstance(outcome, Exception):
            failures += 1
            click.echo("%s\tERROR\t%s" % (path, outcome))
            continue
        mc = "unknown" if outcome.metaclass_id == metaclass.UNKNOWN_METACLASS else outcome.metaclass_id
        if outcome.metaclass_id is None:
            mc = "-"
        click.echo("%s\t%s\t%s\t%s" % (path, outcome.label, mc,
                                       "fallback" if outcome.used_fallback else "direct"))
    if failures:
        sys.exit(EXIT_INPUT)


@cli.command()
@click.argument("manifest", type=click.Path(exists=True, dir_okay=False))
@click.option("--folds", type=int, default=5, show_default=True)
@click.option("--runs", type=int, default=10, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--representation", type=click.Choice(["hierarchical", "flat", "sparse", "tta", "codec"]),
              default="hierarchical", show_default=True)
@click.option("--level1", type=click.Choice(["hash", "ldp"]), default="hash", show_default=True)
@click.option("--out", "out_dir", type=click.Path(file_okay=False), default=None,
              help="Directory for report.json, confusion CSV, and figures.")
@click.option("--export-features", type=click.Path(dir_okay=False), default=None,
              help="Write the full-corpus feature matrix as CSV.")
@click.option("--jobs", type=int, default=1, show_default=True)
@_exclusion_option
@_handle_errors
def evaluate_cmd(manifest, folds, runs, seed, representation, level1, out_dir,
                 export_features, jobs, exclusion_profile):
    """Stratified k-fold cross-validation over a labeled manifest."""
    entries = load_manifest(manifest)
    exclusions = tree_mod.load_exclusion_profile(exclusion_profile)
    samples = _load_samples(entries, exclusions, jobs)
    if export_features:
        descriptors, labels, matrix = model_mod.corpus_feature_matrix(samples, representation)
        with open(export_features, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["label"] + descriptors)
            for label, row in zip(labels, matrix):
                writer.writerow([label] + ["%g" % v for v in row])
        click.echo("wrote %s" % export_features)
    cv = evaluate.kfold_cv(samples, k=folds, runs=runs, seed=seed,
                           representation=representation, level1=level1,
                           exclusions=exclusions)
    click.echo(report.render_text(cv))
    if out_dir:
        for path in report.write_outputs(cv, out_dir):
            click.echo("wrote %s" % path)


cli.add_command(evaluate_cmd, name="evaluate")


@cli.command(name="core-params")
@click.argument("input_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--brand-level", is_flag=True,
              help="Group labels by brand (text before the first underscore).")
@click.option("--drop-user-adjustable", is_flag=True,
              help="Drop the four frame-geometry coordinates.")
@click.option("--folds", type=int, default=5, show_default=True)
@click.option("--runs", type=int, default=10, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", "out_dir", type=click.Path(file_okay=False), default=None)
@click.option("--export-vectors", type=click.Path(dir_okay=False), default=None,
              help="Write the (possibly blob-derived) 11-column vectors as CSV.")
@_handle_errors
def core_params(input_file, brand_level, drop_user_adjustable, folds, runs, seed, out_dir,
                export_vectors):
    """Classify from the 11-value core parameter vectors.

    INPUT_FILE is either a CSV of labeled vectors (columns: label plus the
    11 core parameters) or JSON lines with hex-encoded SPS/PPS blobs
    (`{"label":..., "sps":..., "pps":..., "height":...}`).
    """
    labels, matrix = _load_core_vectors(input_file)
    if export_vectors:
        _write_core_csv(export_vectors, labels, matrix)
        click.echo("wrote %s" % export_vectors)
    if brand_level:
        labels = [label.split("_", 1)[0] for label in labels]
    if drop_user_adjustable:
        keep = [i for i in range(matrix.shape[1]) if i not in h264.USER_ADJUSTABLE_CORE_INDICES]
        matrix = matrix[:, keep]
    cv = evaluate.vector_kfold_cv(matrix, labels, k=folds, runs=runs, seed=seed)
    click.echo(report.render_text(cv))
    if out_dir:
        for path in report.write_outputs(cv, out_dir):
            click.echo("wrote %s" % path)


def _load_core_vectors(path: str) -> tuple[list[str], np.ndarray]:
    text = Path(path).read_text(encoding="utf-8")
    first_line = next((line for line in text.splitlines() if line.strip()), "")
    if first_line.lstrip().startswith("{"):
        return _core_vectors_from_blobs(text)
    if "," in first_line:
        return _core_vectors_from_csv(text)
    return _core_vectors_from_hex_lines(text)


def _blob_record_to_vector(label: str, sps_hex: str, pps_hex: str, height) -> tuple[str, tuple]:
    sps = h264.parse_sps(bytes.fromhex(sps_hex))
    pps = h264.parse_pps(bytes.fromhex(pps_hex))
    setting = h264.EncodingSetting(sps=sps, pps_list=[pps])
    pixels = int(height) if height is not None else sps.height_pixels
    return label, h264.core_param_vector(setting, pixels).values


def _core_vectors_from_blobs(text: str) -> tuple[list[str], np.ndarray]:
    labels, rows = [], []
    for line in text.splitlines():
        if not line.strip():
            continue
        record = json.loads(line)
        label, values = _blob_record_to_vector(str(record["label"]), record["sps"],
                                               record["pps"], record.get("height"))
        labels.append(label)
        rows.append(values)
    if not rows:
        raise ManifestError("no blob records found")
    return labels, np.asarray(rows, dtype=np.float64)


def _core_vectors_from_hex_lines(text: str) -> tuple[list[str], np.ndarray]:
    # whitespace format: label sps_hex pps_hex [height], one record per line
    labels, rows = [], []
    for line in text.splitlines():
        parts = line.split()
        if not parts:
            continue
        if len(parts) not in (3, 4):
            raise ManifestError("hex-blob lines need label sps pps [height]: %r" % line)
        label, values = _blob_record_to_vector(parts[0], parts[1], parts[2],
                                               parts[3] if len(parts) == 4 else None)
        labels.append(label)
        rows.append(values)
    if not rows:
        raise ManifestError("no blob records found")
    return labels, np.asarray(rows, dtype=np.float64)


def _core_vectors_from_csv(text: str) -> tuple[list[str], np.ndarray]:
    reader = csv.reader(text.splitlines())
    rows = [row for row in reader if row and any(cell.strip() for cell in row)]
    if not rows:
        raise ManifestError("no vector rows found")
    if rows and rows[0] and rows[0][0].strip().lower() == "label":
        rows = rows[1:]
    labels, vectors = [], []
    for row in rows:
        if len(row) != 1 + len(h264.CORE_PARAM_NAMES):
            raise ManifestError("vector rows need a label plus %d values, got %d cells"
                                % (len(h264.CORE_PARAM_NAMES), len(row)))
        labels.append(row[0].strip())
        try:
            vectors.append([float(cell) for cell in row[1:]])
        except ValueError as exc:
            raise ManifestError("malformed vector row %r: %s" % (row, exc)) from exc
    return labels, np.asarray(vectors, dtype=np.float64)


def _write_core_csv(path: str, labels, matrix) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["label"] + list(h264.CORE_PARAM_NAMES))
        for label, row in zip(labels, matrix):
            writer.writerow([label] + ["%g" % v for v in row])


def main() -> None:
    cli(prog_name="vidfp")


if __name__ == "__main__":
    main()
