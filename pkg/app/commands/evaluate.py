"""evaluate subcommand: score predictions and write histogram CSVs."""

import argparse
from pathlib import Path

from app.pipeline import RunConfig, build_metadata, emit_output
from core.config import settings
from core.errors import EXIT_OK, ConfigError
from repositories.dataset_repository import DatasetRepository, with_csv_header
from repositories.files import canonical_json, write_bytes
from services.metrics_service import EvaluationService, write_comparison_csv, write_histogram_csv

COMPARISON = ("scenegraph_qa", "global_cogmap_qa")


def get_evaluation_service() -> EvaluationService:
    return EvaluationService()


def cmd_evaluate(config: RunConfig) -> int:
    """
    Score --predictions against --ground-truth.

    Writes ``<name>.csv`` per error summary into --out, plus ``cogmap_comparison.csv``
    when both grid tasks are present; prints counts, no-parse rate and means.
    """
    if config.predictions is None or config.ground_truth is None or config.out is None:
        raise ConfigError("evaluate needs --predictions, --ground-truth and --out")
    repository = DatasetRepository()
    ground_truth = repository.load_records(config.ground_truth)
    predictions = repository.load_predictions(config.predictions)

    width = config.bin_width
    report = get_evaluation_service().evaluate(
        predictions,
        ground_truth,
        cogmap_bin_width=width or settings.cogmap_bin_width,
        center_bin_width=width or settings.center_bin_width,
        size_bin_width=width or settings.size_bin_width,
        yaw_bin_width=width or settings.yaw_bin_width,
    )

    metadata = build_metadata(config, [repository.digests])
    out_dir = Path(config.out)
    for name, summary in report.summaries.items():
        write_bytes(out_dir / f"{name}.csv", with_csv_header(metadata, write_histogram_csv(summary)), "histogram")
    if all(task in report.summaries for task in COMPARISON):
        comparison = write_comparison_csv({task: report.summaries[task] for task in COMPARISON})
        write_bytes(out_dir / "cogmap_comparison.csv", with_csv_header(metadata, comparison), "comparison")

    summary = {
        "predictions": report.prediction_count,
        "no_parse": report.no_parse_count,
        "no_parse_rate": report.no_parse_rate,
        "unanswered": report.unanswered_count,
        "mean_error": {name: s.mean_error for name, s in report.summaries.items()},
        "median_error": {name: s.median_error for name, s in report.summaries.items()},
    }
    emit_output(canonical_json(summary), None, "evaluation summary")
    return EXIT_OK


def register(
    subparsers: "argparse._SubParsersAction[argparse.ArgumentParser]",
    common: argparse.ArgumentParser,
) -> None:
    evaluate = subparsers.add_parser("evaluate", parents=[common], help="Score model answers")
    evaluate.add_argument("--predictions", required=True, help="Prediction JSONL ({id, answer_text})")
    evaluate.add_argument("--ground-truth", dest="ground_truth", required=True, help="QA JSONL from emit-qa")
    evaluate.add_argument("--bin-width", dest="bin_width", type=float, help="Histogram bin width for every summary")
    evaluate.set_defaults(command="evaluate", handler=cmd_evaluate)
