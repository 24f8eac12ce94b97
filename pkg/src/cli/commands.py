# src/cli/commands.py

import argparse
import csv
import json
import logging
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from src.cli.cli_dataclasses import (
    STRATEGIES,
    InputItem,
    PredictionRecord,
    read_predictions,
    write_predictions,
)
from src.cli.inputs import WAV_SUFFIX, collect_inputs, feature_map_for
from src.dsp.dsp_dataclasses import MfccConfig
from src.dsp.feature_map_io import FEATURE_MAP_SUFFIX, save_feature_map
from src.dsp.synthetic import synth_corpus
from src.dsp.wav_io import save_wav
from src.model.fcn_model import FcnModel, forward
from src.model.model_dataclasses import AD, CLASS_NAMES, BackboneConfig
from src.model.model_store import load_model, save_model
from src.model.padding_drift import padding_drift_report
from src.nncore.weight_file import load_weights
from src.settings.settings_manager import SettingsManager
from src.trainer.ensembles import ensemble
from src.trainer.history import write_history, write_summary
from src.trainer.manifest import MANIFEST_HEADER, load_manifest, load_samples, save_manifest
from src.trainer.metrics import BASELINE_ROWS, confusion, metrics, report_rows
from src.trainer.splitting import split_two_fold
from src.trainer.trainer_dataclasses import DatasetManifest, ManifestEntry, TrainConfig
from src.trainer.training import train
from src.utils.error_handling import (
    EXIT_DATA_ERROR,
    EXIT_DIVERGED,
    EXIT_SUCCESS,
    EXIT_USAGE,
    ArgumentError,
    CliError,
    DspError,
    InvalidConfigError,
    ModelError,
    ModelSchemaError,
    NNCoreError,
    TrainerError,
    TrainingDivergedError,
    VizError,
    WeightFileError,
)
from src.utils.file_logger import (
    CLI_LOG_FILE_PATH,
    TRAINING_LOG_FILE_NAME,
    initialize_log_file,
    log_command_call,
)
from src.viz.heatmap import heatmap
from src.viz.render import PPM_SUFFIX, render

# Failures of a single input file; the batch commands log these and carry on.
PER_FILE_ERRORS = (OSError, DspError, ModelError, NNCoreError, VizError, ArgumentError)
METRICS_HEADER = ["model", "class", "precision", "recall", "f1", "accuracy"]
BASELINE_NAME = "baseline"
DEFAULT_WORKERS = 4


class CliArgumentParser(argparse.ArgumentParser):
    """argparse parser whose usage errors surface as CliError (exit code 1)."""

    def error(self, message):
        self.print_usage(sys.stderr)
        raise CliError(f"{self.prog}: {message}", "USAGE")


def _log_call(name: str, args: argparse.Namespace) -> None:
    initialize_log_file(CLI_LOG_FILE_PATH, title="Command log")
    log_command_call(
        CLI_LOG_FILE_PATH, name, **{k: v for k, v in vars(args).items() if k != "handler"}
    )


def _settings(args: argparse.Namespace) -> SettingsManager:
    """Config file (if any) with the command-line flags applied on top."""
    settings = SettingsManager(getattr(args, "config", None))
    flag_keys = {
        "alpha": "backbone.width_multiplier",
        "seed": "train.seed",
        "epochs": "train.max_epochs",
        "batch_size": "train.batch_size",
        "lr": "train.optimizer.learning_rate",
        "min_selection_epoch": "train.min_selection_epoch",
    }
    for flag, key in flag_keys.items():
        value = getattr(args, flag, None)
        if value is not None:
            settings.set(key, value)
    for flag, key in (
        ("augment", "train.augment_mask"),
        ("standardize", "train.standardize_input"),
        ("masked_gap", "train.masked_gap"),
    ):
        if getattr(args, flag, False):
            settings.set(key, True)
    return settings


def _run_per_file(function, items: list[InputItem], workers: int) -> list:
    """Applies `function` to every item in order; failed items yield their exception."""

    def guarded(item: InputItem):
        try:
            return function(item)
        except PER_FILE_ERRORS as e:
            logging.error(f"{item.path}: {str(e)}")
            return e

    with ThreadPoolExecutor(max_workers=max(1, workers)) as executor:
        return list(executor.map(guarded, items))


def cmd_extract(args: argparse.Namespace) -> int:
    """
    Writes one .mfcm per input audio file and a manifest of the written maps.
    Labels and folds carry over when --in (or --labels) is a manifest; otherwise
    the label column is left blank for the user to fill in.
    """
    _log_call("cmd_extract", args)
    mfcc_config = _settings(args).mfcc_config()
    items = collect_inputs(args.input, (WAV_SUFFIX,))
    known = {}
    if args.labels:
        known = {entry.id: entry for entry in load_manifest(args.labels).entries}

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)

    def extract_one(item: InputItem):
        feature_map = feature_map_for(item, mfcc_config)
        return save_feature_map(feature_map, out_dir / f"{item.id}{FEATURE_MAP_SUFFIX}"), feature_map

    results = _run_per_file(extract_one, items, args.workers)

    rows = []
    failures = 0
    for item, result in zip(items, results):
        if isinstance(result, Exception):
            failures += 1
            continue
        map_path, feature_map = result
        print(f"{item.id}\t{feature_map.p}\t{feature_map.t}")
        label, fold = item.label, item.fold
        if item.id in known:
            label, fold = known[item.id].label, known[item.id].fold
        rows.append([item.id, map_path.name, "" if label is None else label, fold or ""])

    manifest_path = out_dir / "manifest.csv"
    with manifest_path.open("w", newline="") as file:
        writer = csv.writer(file, lineterminator="\n")
        writer.writerow(MANIFEST_HEADER)
        writer.writerows(rows)
    logging.info(f"Extracted {len(rows)} of {len(items)} files into {out_dir}")

    if failures:
        raise CliError(f"{failures} of {len(items)} files failed to extract", "PARTIAL_FAILURE")
    return EXIT_SUCCESS


def _strategy_folds(
    manifest: DatasetManifest, strategy: str, seed: int
) -> tuple[DatasetManifest, DatasetManifest | None]:
    if strategy == "m3":
        return manifest, None
    if manifest.has_folds():
        fold_a, fold_b = manifest.fold("A"), manifest.fold("B")
    else:
        fold_a, fold_b = split_two_fold(manifest, seed)
    return (fold_a, fold_b) if strategy == "m1" else (fold_b, fold_a)


def _initial_model(
    init_weights: str | None, backbone: BackboneConfig, cfg: TrainConfig
) -> FcnModel | None:
    """A fresh model whose backbone comes from `init_weights`; None without the flag."""
    if not init_weights:
        return None
    model = FcnModel.initialize(backbone, seed=cfg.seed, standardize_input=cfg.standardize_input)
    try:
        model.load_state_dict(load_weights(init_weights), backbone_only=True)
    except (WeightFileError, ModelSchemaError) as e:
        raise CliError(f"Cannot start from {init_weights}: {str(e)}", "INIT_WEIGHTS")
    logging.info(f"Backbone initialised from {init_weights}")
    return model


def cmd_train(args: argparse.Namespace) -> int:
    """
    m1 trains on fold A and validates on fold B, m2 swaps the folds, m3 trains
    on everything and keeps the lowest-loss epoch; "all" runs the three in turn.
    Writes m{k}_best.fcnw (+ sidecar), m{k}_history.csv and m{k}_summary.json.
    """
    _log_call("cmd_train", args)
    settings = _settings(args)
    mfcc_config = settings.mfcc_config()
    backbone = settings.backbone_config()
    base_config = settings.train_config()
    manifest = load_manifest(args.manifest)
    samples = {sample.id: sample for sample in load_samples(manifest)}

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    strategies = STRATEGIES if args.strategy == "all" else (args.strategy,)

    for strategy in strategies:
        cfg = settings.train_config()
        if strategy == "m3":
            cfg.selection = "min_train_loss"
        fold_train, fold_val = _strategy_folds(manifest, strategy, base_config.seed)
        train_samples = [samples[i] for i in fold_train.ids]
        val_samples = [samples[i] for i in fold_val.ids] if fold_val is not None else None

        logging.info(f"Strategy {strategy}: {len(train_samples)} training samples")
        try:
            result = train(
                train_samples,
                val_samples,
                cfg,
                backbone=backbone,
                model=_initial_model(args.init_weights, backbone, cfg),
                log_file=out_dir / TRAINING_LOG_FILE_NAME,
            )
        except TrainingDivergedError as e:
            raise CliError(
                f"Strategy {strategy} diverged at epoch {e.epoch}, batch {e.batch}: {str(e)}",
                "DIVERGED",
            )

        save_model(result.model, mfcc_config, out_dir / f"{strategy}_best.fcnw")
        write_history(result.history, out_dir / f"{strategy}_history.csv")
        write_summary(result, strategy, out_dir / f"{strategy}_summary.json")
        print(f"{strategy}\tbest_epoch={result.best_epoch}\t{result.criterion}={result.best_value:.6f}")
    return EXIT_SUCCESS


def _model_paths(values: list[str]) -> list[Path]:
    paths = [Path(p) for value in values for p in value.split(",") if p]
    if not 1 <= len(paths) <= 3:
        raise CliError(f"--model takes 1 to 3 weight files, got {len(paths)}", "USAGE")
    return paths


def cmd_predict(args: argparse.Namespace) -> int:
    """
    One JSON line {id, probs, label} per input. Two models are averaged, three
    are summed. Heatmaps, when requested, come from the first model.
    """
    _log_call("cmd_predict", args)
    stored = [load_model(path) for path in _model_paths(args.model)]
    items = collect_inputs(args.input, (WAV_SUFFIX, FEATURE_MAP_SUFFIX))
    heatmap_dir = Path(args.heatmap) if args.heatmap else None

    def predict_one(item: InputItem) -> PredictionRecord:
        predictions = []
        for k, member in enumerate(stored):
            feature_map = feature_map_for(item, member.mfcc_config)
            prediction = forward(member.model, feature_map, masked_gap=args.masked_gap)
            predictions.append(prediction)
            if k == 0 and heatmap_dir is not None:
                hm = heatmap(prediction.time_activations, class_index=args.class_index)
                render(
                    feature_map,
                    hm,
                    heatmap_dir / f"{item.id}{PPM_SUFFIX}",
                    mfcc_config=member.mfcc_config,
                )
        return PredictionRecord.from_prediction(item.id, ensemble(predictions))

    results = _run_per_file(predict_one, items, args.workers)
    records = [r for r in results if isinstance(r, PredictionRecord)]
    failures = len(results) - len(records)

    if args.out:
        write_predictions(records, args.out)
    else:
        for record in records:
            print(record.to_json_line())

    if failures:
        raise CliError(f"{failures} of {len(items)} inputs could not be scored", "PARTIAL_FAILURE")
    return EXIT_SUCCESS


def cmd_ensemble(args: argparse.Namespace) -> int:
    """Merges per-model prediction files by id (2 files averaged, 3 summed)."""
    _log_call("cmd_ensemble", args)
    if not 2 <= len(args.pred) <= 3:
        raise CliError(f"--pred takes 2 or 3 prediction files, got {len(args.pred)}", "USAGE")
    members = [read_predictions(path) for path in args.pred]
    reference_ids = [record.id for record in members[0]]
    by_id = [{record.id: record for record in records} for records in members]
    for path, records in zip(args.pred[1:], by_id[1:]):
        if set(records) != set(reference_ids):
            missing = sorted(set(reference_ids) ^ set(records))
            raise CliError(f"{path} does not cover the same ids; differing: {missing}", "ID_MISMATCH")

    merged = [
        PredictionRecord.from_prediction(
            sample_id, ensemble([records[sample_id].to_prediction() for records in by_id])
        )
        for sample_id in reference_ids
    ]
    write_predictions(merged, args.out)
    logging.info(f"Wrote {len(merged)} merged predictions to {args.out}")
    return EXIT_SUCCESS


def _format_row(row: dict) -> list[str]:
    return [
        row["model"],
        row["class"],
        f"{row['precision']:.4f}",
        f"{row['recall']:.4f}",
        f"{row['f1']:.4f}",
        f"{row['accuracy']:.4f}",
    ]


def cmd_evaluate(args: argparse.Namespace) -> int:
    """Table-shaped metrics (one row per class) for each prediction file."""
    _log_call("cmd_evaluate", args)
    manifest = load_manifest(args.manifest)
    labels = {entry.id: entry.label for entry in manifest.entries}
    names = args.names or [Path(path).stem for path in args.pred]
    if len(names) != len(args.pred):
        raise CliError(f"{len(names)} names given for {len(args.pred)} prediction files", "USAGE")

    rows = []
    for name, path in zip(names, args.pred):
        records = read_predictions(path)
        missing = sorted(record.id for record in records if record.id not in labels)
        if missing:
            raise CliError(f"{path}: ids not in the manifest: {missing}", "UNKNOWN_IDS")
        counts = confusion([r.label for r in records], [labels[r.id] for r in records])
        rows.extend(report_rows(metrics(counts), name))
    if args.with_baseline:
        for class_index, row in sorted(BASELINE_ROWS.items()):
            rows.append(
                {
                    "model": BASELINE_NAME,
                    "class": CLASS_NAMES[class_index],
                    "precision": row.precision,
                    "recall": row.recall,
                    "f1": row.f1,
                    "accuracy": row.accuracy,
                }
            )

    table = [_format_row(row) for row in rows]
    widths = [max(len(h), *(len(r[i]) for r in table)) for i, h in enumerate(METRICS_HEADER)]
    print("  ".join(h.ljust(w) for h, w in zip(METRICS_HEADER, widths)))
    for row in table:
        print("  ".join(cell.ljust(w) for cell, w in zip(row, widths)))

    if args.out:
        out_path = Path(args.out)
        out_path.parent.mkdir(parents=True, exist_ok=True)
        with out_path.open("w", newline="") as file:
            writer = csv.writer(file, lineterminator="\n")
            writer.writerow(METRICS_HEADER)
            writer.writerows(table)
    return EXIT_SUCCESS


def cmd_report_padding(args: argparse.Namespace) -> int:
    """Probability drift under trailing zero-padding, for one model over a set of maps."""
    _log_call("cmd_report_padding", args)
    stored = load_model(args.model)
    items = collect_inputs(args.input, (WAV_SUFFIX, FEATURE_MAP_SUFFIX))
    maps = [feature_map_for(item, stored.mfcc_config) for item in items]
    report = padding_drift_report(
        stored.model, maps, pad_fraction=args.pad_fraction, masked_gap=args.masked_gap
    )
    print(
        f"samples={len(report.drifts)}\tmean_drift={report.mean_drift:.6g}\t"
        f"max_drift={report.max_drift:.6g}\tlabel_flips={report.label_flips}"
    )
    if args.out:
        with Path(args.out).open("w") as file:
            json.dump(report.to_dict(), file, indent=2, sort_keys=True)
    return EXIT_SUCCESS


def cmd_synth(args: argparse.Namespace) -> int:
    """Synthetic two-class corpus: WAVs, a manifest and the inserted pause spans."""
    _log_call("cmd_synth", args)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    utterances = synth_corpus(args.n, args.seed, duration_s=args.duration, prefix=args.prefix)

    entries = []
    pauses = {}
    for utterance in utterances:
        wav_path = out_dir / f"{utterance.id}{WAV_SUFFIX}"
        save_wav(utterance.signal, wav_path)
        entries.append(ManifestEntry(id=utterance.id, path=wav_path, label=utterance.label))
        pauses[utterance.id] = [list(span) for span in utterance.pause_spans]
    save_manifest(DatasetManifest(entries), out_dir / "manifest.csv")
    with (out_dir / "pauses.json").open("w") as file:
        json.dump(
            {"sample_rate_hz": MfccConfig().sample_rate_hz, "pauses": pauses},
            file,
            indent=2,
            sort_keys=True,
        )
    logging.info(f"Wrote {len(utterances)} synthetic utterances to {out_dir}")
    return EXIT_SUCCESS


def build_parser() -> CliArgumentParser:
    parser = CliArgumentParser(
        prog="fcn-dementia",
        description="Dementia screening from speech with a fully convolutional network.",
    )
    parser.add_argument("--verbose", action="store_true", help="Log at DEBUG level")
    parser.add_argument("--log-file", default="fcn.log", help="Application log file")
    subparsers = parser.add_subparsers(dest="command", metavar="COMMAND")
    subparsers.required = True

    extract = subparsers.add_parser("extract", help="Convert WAV files to MFCC feature maps")
    extract.add_argument("--in", dest="input", required=True, help="WAV file, directory or manifest")
    extract.add_argument("--out", required=True, help="Output directory")
    extract.add_argument("--config", help="YAML/JSON config file")
    extract.add_argument("--labels", help="Manifest supplying labels and folds by id")
    extract.add_argument("--workers", type=int, default=DEFAULT_WORKERS)
    extract.set_defaults(handler=cmd_extract)

    train_parser = subparsers.add_parser("train", help="Train m1, m2, m3 or all three")
    train_parser.add_argument("--manifest", required=True)
    train_parser.add_argument("--strategy", choices=STRATEGIES + ("all",), required=True)
    train_parser.add_argument("--out", required=True)
    train_parser.add_argument("--config")
    train_parser.add_argument("--seed", type=int)
    train_parser.add_argument("--alpha", type=float, help="Width multiplier in (0, 1]")
    train_parser.add_argument("--epochs", type=int)
    train_parser.add_argument("--batch-size", type=int)
    train_parser.add_argument("--lr", type=float)
    train_parser.add_argument("--min-selection-epoch", type=int)
    train_parser.add_argument("--augment", action="store_true", help="Random time masking")
    train_parser.add_argument("--standardize", action="store_true")
    train_parser.add_argument("--masked-gap", action="store_true")
    train_parser.add_argument(
        "--init-weights", help="Start from the backbone of this .fcnw file; the head is fresh"
    )
    train_parser.set_defaults(handler=cmd_train)

    predict = subparsers.add_parser("predict", help="Score WAV or .mfcm inputs")
    predict.add_argument("--model", nargs="+", required=True, help="1 to 3 .fcnw files")
    predict.add_argument("--in", dest="input", required=True)
    predict.add_argument("--out", help="JSONL output (stdout when omitted)")
    predict.add_argument("--heatmap", help="Directory for heatmap renders")
    predict.add_argument("--class-index", type=int, choices=(0, 1), default=AD)
    predict.add_argument("--masked-gap", action="store_true")
    predict.add_argument("--workers", type=int, default=DEFAULT_WORKERS)
    predict.set_defaults(handler=cmd_predict)

    evaluate = subparsers.add_parser("evaluate", help="Per-class precision, recall, F1, accuracy")
    evaluate.add_argument("--pred", nargs="+", required=True)
    evaluate.add_argument("--names", nargs="+")
    evaluate.add_argument("--manifest", required=True)
    evaluate.add_argument("--out", help="CSV output")
    evaluate.add_argument("--with-baseline", action="store_true")
    evaluate.set_defaults(handler=cmd_evaluate)

    ensemble_parser = subparsers.add_parser("ensemble", help="Merge 2 or 3 prediction files")
    ensemble_parser.add_argument("--pred", nargs="+", required=True)
    ensemble_parser.add_argument("--out", required=True)
    ensemble_parser.set_defaults(handler=cmd_ensemble)

    padding = subparsers.add_parser("report-padding", help="Measure zero-padding drift")
    padding.add_argument("--model", required=True)
    padding.add_argument("--in", dest="input", required=True)
    padding.add_argument("--pad-fraction", type=float, default=0.25)
    padding.add_argument("--masked-gap", action="store_true")
    padding.add_argument("--out", help="JSON report")
    padding.set_defaults(handler=cmd_report_padding)

    # Hidden: the synthetic corpus used by the end-to-end checks.
    synth = subparsers.add_parser("synth")
    synth.add_argument("--out", required=True)
    synth.add_argument("--n", type=int, default=60)
    synth.add_argument("--seed", type=int, default=0)
    synth.add_argument("--duration", type=float, default=4.0)
    synth.add_argument("--prefix", default="synth")
    synth.set_defaults(handler=cmd_synth)
    return parser


def configure_logging(verbose: bool, log_file: str | None) -> None:
    handlers: list[logging.Handler] = [logging.StreamHandler()]
    if log_file:
        handlers.insert(0, logging.FileHandler(log_file))
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.INFO,
        format="%(asctime)s - %(levelname)s - %(message)s",
        handlers=handlers,
    )


def run(argv: list[str] | None = None, configure_logs: bool = False) -> int:
    """Parses `argv`, runs the subcommand and returns its exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if configure_logs:
            configure_logging(args.verbose, args.log_file)
        return args.handler(args)
    except CliError as e:
        print(e.format_error_message(), file=sys.stderr)
        return e.exit_code
    except SystemExit as e:
        # --help
        return e.code if isinstance(e.code, int) else EXIT_SUCCESS
    except TrainingDivergedError as e:
        logging.error(str(e))
        return EXIT_DIVERGED
    except InvalidConfigError as e:
        logging.error(f"Invalid configuration: {str(e)}")
        return EXIT_USAGE
    except (TrainerError, DspError, ModelError, NNCoreError, VizError, ArgumentError, OSError) as e:
        logging.error(str(e))
        return EXIT_DATA_ERROR


def main() -> None:
    sys.exit(run(configure_logs=True))
