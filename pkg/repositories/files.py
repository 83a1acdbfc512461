"""File access and canonical encodings shared by the repositories."""

import hashlib
import json
from pathlib import Path
from typing import Any

from pydantic import BaseModel

from core.errors import ScaffoldIOError
from core.logging import LoggingMixin, RepositoryLogger


def sha256_hex(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def read_bytes(path: str | Path, kind: str) -> bytes:
    """
    Read a whole input file.

    Raises:
        ScaffoldIOError: If the file cannot be read
    """
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        raise ScaffoldIOError(f"cannot read {kind} file {str(path)!r}: {exc.strerror or exc}", path=str(path)) from exc
    RepositoryLogger.log_read(kind, str(path), len(data), sha256=sha256_hex(data))
    return data


def write_bytes(path: str | Path, data: bytes, kind: str) -> None:
    """
    Write an output file in one call, creating parent directories.

    Raises:
        ScaffoldIOError: If the file cannot be written
    """
    target = Path(path)
    try:
        target.parent.mkdir(parents=True, exist_ok=True)
        target.write_bytes(data)
    except OSError as exc:
        raise ScaffoldIOError(f"cannot write {kind} file {str(path)!r}: {exc.strerror or exc}", path=str(path)) from exc
    RepositoryLogger.log_write(kind, str(path), len(data), sha256=sha256_hex(data))


def canonical_json(value: Any) -> bytes:
    """Sorted keys, 2-space indent, UTF-8, trailing newline."""
    return (json.dumps(value, sort_keys=True, indent=2, ensure_ascii=False) + "\n").encode("utf-8")


def dump_document(document: BaseModel) -> bytes:
    return canonical_json(document.model_dump(mode="json", exclude_none=True))


def json_line(value: Any) -> str:
    return json.dumps(value, sort_keys=True, ensure_ascii=False, separators=(",", ":"))


class FileRepository(LoggingMixin):
    """Base for repositories that read input files and remember their digests."""

    def __init__(self) -> None:
        super().__init__()
        self.digests: dict[str, str] = {}

    def read(self, path: str | Path, kind: str) -> bytes:
        data = read_bytes(path, kind)
        self.digests[str(path)] = sha256_hex(data)
        return data
