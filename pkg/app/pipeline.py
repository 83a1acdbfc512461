"""Run configuration, output metadata and the per-scene worker pool."""

import argparse
import multiprocessing
import sys
from collections.abc import Callable, Iterable, Sequence
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Any, Literal, TypeVar

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from core.config import TOOL_NAME, TOOL_VERSION, settings
from core.errors import ConfigError
from core.logging import active_logging_config, get_run_id, init_worker
from domain.models import ReferralKind
from domain.schemas import MetadataHeader
from repositories.files import write_bytes
from services.qa_service import parse_policy

T = TypeVar("T")
R = TypeVar("R")

QATaskFlag = Literal["scenegraph", "grounding", "global_cogmap"]
ReconstructMode = Literal["continuous", "quantized"]

# Never recorded in output metadata
PATH_FIELDS = {"scenes", "graph", "out", "predictions", "ground_truth"}


class RunConfig(BaseModel):
    """Effective configuration of one CLI invocation (flags over settings defaults)."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    command: str
    scenes: tuple[str, ...] = ()
    graph: str | None = None
    out: str | None = None
    predictions: str | None = None
    ground_truth: str | None = None
    delta: float = Field(default_factory=lambda: settings.delta, gt=0)
    seed: int = Field(default_factory=lambda: settings.seed, ge=0)
    policy: tuple[ReferralKind, ...] = Field(default_factory=lambda: parse_policy(settings.policy))
    jobs: int = Field(default_factory=lambda: settings.jobs, ge=1)
    task: QATaskFlag = "scenegraph"
    mode: ReconstructMode = "continuous"
    k: int = Field(default=10, ge=1)
    bin_width: float | None = Field(default=None, gt=0)

    @field_validator("policy", mode="before")
    @classmethod
    def validate_policy(cls, value: Any) -> Any:
        return parse_policy(value) if isinstance(value, str) else value

    @classmethod
    def from_args(cls, args: argparse.Namespace) -> "RunConfig":
        """
        Build from parsed flags; unset flags fall back to settings.

        Raises:
            ConfigError: On any invalid value
        """
        values = {
            key: value
            for key, value in vars(args).items()
            if key in cls.model_fields and value is not None
        }
        if "scenes" in values:
            values["scenes"] = tuple(values["scenes"])
        try:
            return cls(**values)
        except ValidationError as exc:
            first = exc.errors()[0]
            field = ".".join(str(part) for part in first["loc"])
            raise ConfigError(f"invalid --{field.replace('_', '-')}: {first['msg']}", field=field) from exc

    def recorded(self) -> dict[str, Any]:
        """Config as written into output metadata: no paths, no worker count."""
        return self.model_dump(mode="json", exclude=PATH_FIELDS | {"jobs", "command"})


def build_metadata(config: RunConfig, digests: Iterable[dict[str, str]]) -> MetadataHeader:
    inputs: dict[str, str] = {}
    for group in digests:
        inputs.update(group)
    return MetadataHeader(
        tool=TOOL_NAME,
        version=TOOL_VERSION,
        command=config.command,
        config=config.recorded(),
        inputs=dict(sorted(inputs.items())),
    )


def parallel_map(func: Callable[[T], R], items: Sequence[T], jobs: int) -> list[R]:
    """Apply ``func`` to every item, results in input order regardless of ``jobs``."""
    if jobs <= 1 or len(items) <= 1:
        return [func(item) for item in items]
    level, json_output = active_logging_config()
    context = multiprocessing.get_context(settings.start_method)
    with ProcessPoolExecutor(
        max_workers=min(jobs, len(items)),
        mp_context=context,
        initializer=init_worker,
        initargs=(level, json_output, get_run_id()),
    ) as pool:
        return list(pool.map(func, items))


def emit_output(data: bytes, out: str | None, kind: str) -> None:
    """Write to ``out`` or, without one, to stdout."""
    if out is None:
        sys.stdout.write(data.decode("utf-8"))
        sys.stdout.flush()
    else:
        write_bytes(Path(out), data, kind)
