"""QA / prediction JSONL codecs and CSV headers."""

import json
from collections.abc import Sequence
from pathlib import Path
from typing import Any

from pydantic import ValidationError

from core.errors import SchemaMismatchError
from domain.models import QARecord
from domain.schemas import MetadataHeader, PredictionRecord
from repositories.files import FileRepository, json_line


def serialize_jsonl(records: Sequence[QARecord], metadata: MetadataHeader | None = None) -> bytes:
    """
    One JSON object per line sorted by (scene_id, task, provenance index).

    Empty input without metadata gives empty bytes; otherwise every line, the
    optional ``{"metadata": ...}`` first line included, ends with a newline.
    """
    lines = []
    if metadata is not None:
        lines.append(json_line({"metadata": metadata.model_dump(mode="json")}))
    lines += [json_line(record.to_dict()) for record in sorted(records, key=QARecord.sort_key)]
    return "".join(line + "\n" for line in lines).encode("utf-8")


def _json_lines(data: bytes, kind: str) -> list[tuple[int, Any]]:
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise SchemaMismatchError(f"{kind} file is not UTF-8") from exc
    parsed = []
    for number, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            value = json.loads(line)
        except json.JSONDecodeError as exc:
            raise SchemaMismatchError(f"{kind} line {number} is not JSON", line=number) from exc
        if isinstance(value, dict) and set(value) == {"metadata"}:
            continue
        parsed.append((number, value))
    return parsed


def parse_jsonl(data: bytes) -> list[QARecord]:
    """
    Inverse of ``serialize_jsonl``; a metadata line is skipped.

    Raises:
        SchemaMismatchError: On a line that is not a valid QA record
    """
    records = []
    for number, value in _json_lines(data, "QA"):
        try:
            records.append(QARecord.model_validate(value))
        except ValidationError as exc:
            raise SchemaMismatchError(
                f"QA line {number} is not a valid record: {exc.errors()[0]['msg']}",
                line=number,
            ) from exc
    return records


def parse_predictions(data: bytes) -> list[PredictionRecord]:
    """
    Parse a prediction JSONL file of ``{id, answer_text}`` objects.

    Raises:
        SchemaMismatchError: On a line that is not a valid prediction
    """
    predictions = []
    for number, value in _json_lines(data, "prediction"):
        try:
            predictions.append(PredictionRecord.model_validate(value))
        except ValidationError as exc:
            raise SchemaMismatchError(
                f"prediction line {number} is not a valid record: {exc.errors()[0]['msg']}",
                line=number,
            ) from exc
    return predictions


def with_csv_header(metadata: MetadataHeader, body: bytes) -> bytes:
    """Prefix CSV bytes with ``# key=value`` comment lines."""
    lines = [
        f"# tool={metadata.tool}",
        f"# version={metadata.version}",
        f"# command={metadata.command}",
        f"# config={json_line(metadata.config)}",
    ]
    lines += [f"# input.{path}={digest}" for path, digest in metadata.inputs.items()]
    return ("\n".join(lines) + "\n").encode("utf-8") + body


class DatasetRepository(FileRepository):
    """Loads QA ground-truth and prediction files."""

    def load_records(self, path: str | Path) -> list[QARecord]:
        records = parse_jsonl(self.read(path, "ground truth"))
        self.logger.debug("QA records loaded", path=str(path), count=len(records))
        return records

    def load_predictions(self, path: str | Path) -> list[PredictionRecord]:
        predictions = parse_predictions(self.read(path, "predictions"))
        self.logger.debug("Predictions loaded", path=str(path), count=len(predictions))
        return predictions
