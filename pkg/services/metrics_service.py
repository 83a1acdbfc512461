"""Answer parsing, error metrics, histograms and prediction scoring."""

import csv
import io
import math
import re
from collections import Counter
from collections.abc import Mapping, Sequence

import numpy as np

from core.config import settings
from core.errors import (
    AnswerParseError,
    InvalidSizeError,
    MetricsError,
    NoParseError,
    OutOfRangeError,
    SchemaMismatchError,
)
from core.logging import LoggingMixin
from domain.models import (
    Box7DoF,
    EvalSummary,
    EvaluationReport,
    GridCoord,
    GroundingSummary,
    QARecord,
    Vec3,
)
from domain.schemas import PredictionRecord
from services.geometry import wrap_yaw

GRID_ANSWER = re.compile(r"\[\s*(-?\d+)\s*,\s*(-?\d+)\s*\]")

_NUMBER = r"([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)"
BOX7_ANSWER = re.compile(r"[(\[]\s*" + r"\s*,\s*".join([_NUMBER] * 7) + r"\s*[)\]]")

# Absorbs float noise in e / width when e sits on a bin edge
BIN_EPS = 1e-9


def parse_grid_answer(text: str) -> GridCoord:
    """
    Extract the first bracketed integer pair from free text.

    Raises:
        NoParseError: If no "[u, v]" pair is present
        OutOfRangeError: If u or v lies outside 0..9
    """
    match = GRID_ANSWER.search(text)
    if match is None:
        raise NoParseError("no [u, v] pair in answer", text=text[:200])
    u, v = int(match.group(1)), int(match.group(2))
    if not (0 <= u <= 9 and 0 <= v <= 9):
        raise OutOfRangeError(f"grid cell [{u}, {v}] outside 0..9", u=u, v=v)
    return GridCoord(u=u, v=v)


def parse_box7_answer(text: str) -> Box7DoF:
    """
    Extract the first 7-tuple of reals, wrapping yaw into (−π, π].

    Raises:
        NoParseError: If no 7-tuple is present
        InvalidSizeError: If a size component is not positive
    """
    match = BOX7_ANSWER.search(text)
    if match is None:
        raise NoParseError("no 7-value box tuple in answer", text=text[:200])
    x, y, z, length, width, height, yaw = (float(g) for g in match.groups())
    if not all(math.isfinite(v) for v in (x, y, z, length, width, height, yaw)):
        raise NoParseError("box values must be finite", text=text[:200])
    if min(length, width, height) <= 0:
        raise InvalidSizeError("box sizes must be positive", size=[length, width, height])
    return Box7DoF(center=Vec3(x=x, y=y, z=z), size=(length, width, height), yaw=wrap_yaw(yaw))


def summarize(errors: Sequence[float], bin_width: float) -> EvalSummary:
    """
    Mean, median and sparse fixed-width histogram of per-sample errors.

    Sample e falls in bin floor(e / bin_width); only non-empty bins are listed.
    """
    if not errors:
        raise MetricsError("cannot summarize an empty error list")
    if not bin_width > 0:
        raise MetricsError("bin width must be positive", bin_width=bin_width)
    values = np.asarray(errors, dtype=float)
    scaled = values / bin_width + BIN_EPS
    first, last = int(math.floor(scaled.min())), int(math.floor(scaled.max()))
    edges = np.arange(first, last + 2)
    counts, _ = np.histogram(scaled, bins=edges)
    return EvalSummary(
        count=len(values),
        mean_error=float(values.mean()),
        median_error=float(np.median(values)),
        bin_width=bin_width,
        histogram=tuple(
            (round(int(k) * bin_width, 10), int(n)) for k, n in zip(edges[:-1], counts, strict=True) if n
        ),
    )


def _check_pairs(preds: Sequence[object], gts: Sequence[object]) -> None:
    if len(preds) != len(gts):
        raise MetricsError("prediction and ground-truth counts differ", predictions=len(preds), ground_truth=len(gts))
    if not preds:
        raise MetricsError("no samples to score")


def cogmap_error(
    preds: Sequence[GridCoord],
    gts: Sequence[GridCoord],
    bin_width: float | None = None,
) -> EvalSummary:
    """Euclidean distance in grid units between predicted and true cells."""
    _check_pairs(preds, gts)
    errors = [math.hypot(p.u - g.u, p.v - g.v) for p, g in zip(preds, gts, strict=True)]
    return summarize(errors, bin_width or settings.cogmap_bin_width)


def grounding_errors(
    preds: Sequence[Box7DoF],
    gts: Sequence[Box7DoF],
    center_bin_width: float | None = None,
    size_bin_width: float | None = None,
    yaw_bin_width: float | None = None,
) -> GroundingSummary:
    """
    Per-component 7-DoF errors.

    Center: 3D Euclidean distance (m). Size: mean of |Δl|, |Δw|, |Δh| (m).
    Yaw: |wrap_yaw(θ_pred − θ_true)| (rad).
    """
    _check_pairs(preds, gts)
    center, size, yaw = [], [], []
    for p, g in zip(preds, gts, strict=True):
        center.append(float(np.linalg.norm(p.center.as_array() - g.center.as_array())))
        size.append(float(np.mean(np.abs(np.subtract(p.size, g.size)))))
        yaw.append(abs(wrap_yaw(p.yaw - g.yaw)))
    return GroundingSummary(
        center=summarize(center, center_bin_width or settings.center_bin_width),
        size=summarize(size, size_bin_width or settings.size_bin_width),
        yaw=summarize(yaw, yaw_bin_width or settings.yaw_bin_width),
    )


def _csv_bytes(rows: Sequence[Sequence[object]]) -> bytes:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerows(rows)
    return buffer.getvalue().encode("utf-8")


def write_histogram_csv(summary: EvalSummary) -> bytes:
    """Header "bin_lower,count", one row per bin ascending, then mean and median rows."""
    rows: list[list[object]] = [["bin_lower", "count"]]
    rows += [[lower, count] for lower, count in summary.histogram]
    rows.append(["mean", summary.mean_error])
    rows.append(["median", summary.median_error])
    return _csv_bytes(rows)


def write_comparison_csv(summaries: Mapping[str, EvalSummary]) -> bytes:
    """
    Side-by-side histograms over the union of bins, zero-filled.

    Raises:
        MetricsError: If no summaries are given or their bin widths differ
    """
    if not summaries:
        raise MetricsError("nothing to compare")
    widths = {s.bin_width for s in summaries.values()}
    if len(widths) != 1:
        raise MetricsError("compared summaries must share one bin width", bin_widths=sorted(widths))

    names = list(summaries)
    counts = {name: dict(summary.histogram) for name, summary in summaries.items()}
    lowers = sorted({lower for per_bin in counts.values() for lower in per_bin})
    rows: list[list[object]] = [["bin_lower", *names]]
    rows += [[lower, *(counts[name].get(lower, 0) for name in names)] for lower in lowers]
    rows.append(["mean", *(summaries[name].mean_error for name in names)])
    rows.append(["median", *(summaries[name].median_error for name in names)])
    return _csv_bytes(rows)


class EvaluationService(LoggingMixin):
    """Scores prediction records against emitted QA ground truth."""

    def evaluate(
        self,
        predictions: Sequence[PredictionRecord],
        ground_truth: Sequence[QARecord],
        cogmap_bin_width: float | None = None,
        center_bin_width: float | None = None,
        size_bin_width: float | None = None,
        yaw_bin_width: float | None = None,
    ) -> EvaluationReport:
        """
        Join predictions to ground truth by record id and score them per task.

        Unparseable answers (no match, out-of-range cell, non-positive size) are
        counted in ``no_parse_count`` and left out of every error summary.
        Ground-truth records without a prediction are counted as unanswered.

        Summaries are keyed by task for grid tasks and ``grounding_center``,
        ``grounding_size``, ``grounding_yaw`` for grounding.

        Raises:
            SchemaMismatchError: On prediction ids absent from the ground truth or repeated ids
        """
        self.log_operation_start("evaluate", predictions=len(predictions), ground_truth=len(ground_truth))
        truth = {record.id: record for record in ground_truth}
        if len(truth) != len(ground_truth):
            raise SchemaMismatchError("ground truth repeats record ids")
        seen = Counter(p.id for p in predictions)
        repeated = sorted(i for i, n in seen.items() if n > 1)
        if repeated:
            raise SchemaMismatchError("predictions repeat record ids", ids=repeated[:20])
        unknown = sorted(set(seen) - set(truth))
        if unknown:
            raise SchemaMismatchError(
                "predictions reference ids absent from the ground truth",
                unknown_ids=unknown[:20],
                unknown_count=len(unknown),
            )

        grid_pairs: dict[str, tuple[list[GridCoord], list[GridCoord]]] = {}
        box_preds: list[Box7DoF] = []
        box_gts: list[Box7DoF] = []
        no_parse = 0
        for prediction in sorted(predictions, key=lambda p: truth[p.id].sort_key()):
            record = truth[prediction.id]
            try:
                if isinstance(record.ground_truth, GridCoord):
                    parsed_grid = parse_grid_answer(prediction.answer_text)
                    preds, gts = grid_pairs.setdefault(record.task, ([], []))
                    preds.append(parsed_grid)
                    gts.append(record.ground_truth)
                else:
                    box_preds.append(parse_box7_answer(prediction.answer_text))
                    box_gts.append(record.ground_truth)
            except AnswerParseError as exc:
                no_parse += 1
                self.logger.debug("Unparseable answer", id=prediction.id, reason=exc.message)

        summaries: dict[str, EvalSummary] = {
            task: cogmap_error(preds, gts, cogmap_bin_width) for task, (preds, gts) in sorted(grid_pairs.items())
        }
        if box_preds:
            grounding = grounding_errors(box_preds, box_gts, center_bin_width, size_bin_width, yaw_bin_width)
            summaries["grounding_center"] = grounding.center
            summaries["grounding_size"] = grounding.size
            summaries["grounding_yaw"] = grounding.yaw

        report = EvaluationReport(
            prediction_count=len(predictions),
            no_parse_count=no_parse,
            unanswered_count=len(set(truth) - set(seen)),
            summaries=summaries,
        )
        self.log_operation_success(
            "evaluate",
            predictions=report.prediction_count,
            no_parse_rate=round(report.no_parse_rate, 6),
            unanswered=report.unanswered_count,
        )
        return report
