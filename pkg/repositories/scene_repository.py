"""Scene JSON codec and loader."""

import json
from collections.abc import Sequence
from pathlib import Path
from typing import Any

from pydantic import ValidationError

from core.errors import SceneFormatError
from domain.models import Scene
from domain.schemas import CameraDocument, ObjectDocument, SceneDocument
from repositories.files import FileRepository, dump_document


def _rows(flat: Sequence[float]) -> list[list[float]]:
    return [list(flat[0:3]), list(flat[3:6]), list(flat[6:9])]


def _xyz(values: Sequence[float]) -> dict[str, float]:
    return {"x": values[0], "y": values[1], "z": values[2]}


def _field_path(loc: tuple[int | str, ...]) -> str:
    return ".".join(str(part) for part in loc)


def _object_id_at(raw: Any, loc: tuple[int | str, ...]) -> str | None:
    if len(loc) >= 2 and loc[0] == "objects" and isinstance(loc[1], int):
        try:
            object_id = raw["objects"][loc[1]]["id"]
        except (KeyError, IndexError, TypeError):
            return None
        return object_id if isinstance(object_id, str) else None
    return None


def _format_error(exc: ValidationError, raw: Any) -> SceneFormatError:
    first = exc.errors()[0]
    loc = tuple(first["loc"])
    field = _field_path(loc)
    object_id = _object_id_at(raw, loc)
    where = f"object {object_id!r} " if object_id else ""
    return SceneFormatError(
        f"invalid scene: {where}{field or '<root>'}: {first['msg']}",
        object_id=object_id,
        field=field,
        error_count=exc.error_count(),
    )


def scene_from_document(document: SceneDocument) -> Scene:
    """
    Build the domain scene from a parsed document.

    Raises:
        SceneFormatError: On duplicate object ids
        ValidationError: On any other domain invariant
    """
    seen: dict[str, int] = {}
    for index, obj in enumerate(document.objects):
        if obj.id in seen:
            raise SceneFormatError(
                f"invalid scene: duplicate object id {obj.id!r}",
                object_id=obj.id,
                field=f"objects.{index}.id",
                first_index=seen[obj.id],
            )
        seen[obj.id] = index

    trajectory = None
    if document.trajectory is not None:
        trajectory = [
            {"index": cam.index, "rotation": _rows(cam.rotation), "translation": _xyz(cam.translation)}
            for cam in document.trajectory
        ]
    return Scene.model_validate(
        {
            "scene_id": document.scene_id,
            "objects": [
                {
                    "id": obj.id,
                    "category": obj.category,
                    "box": {"center": _xyz(obj.center), "size": obj.size, "rotation": _rows(obj.rotation)},
                    "first_frame": obj.first_frame,
                }
                for obj in document.objects
            ],
            "trajectory": trajectory,
        }
    )


def scene_to_document(scene: Scene) -> SceneDocument:
    return SceneDocument(
        scene_id=scene.scene_id,
        objects=[
            ObjectDocument(
                id=obj.id,
                category=obj.category,
                center=list(obj.box.center.as_tuple()),
                size=list(obj.box.size),
                rotation=[v for row in obj.box.rotation for v in row],
                first_frame=obj.first_frame,
            )
            for obj in scene.objects
        ],
        trajectory=None
        if scene.trajectory is None
        else [
            CameraDocument(
                index=cam.index,
                rotation=[v for row in cam.rotation for v in row],
                translation=list(cam.translation.as_tuple()),
            )
            for cam in scene.trajectory
        ],
    )


def parse_scene(data: bytes) -> Scene:
    """
    Parse and validate a scene JSON document, preserving object order.

    Raises:
        SceneFormatError: On malformed JSON or any violated scene invariant; the
            detail names the offending object id and field path
    """
    try:
        raw = json.loads(data.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise SceneFormatError(f"scene is not valid UTF-8 JSON: {exc}") from exc
    try:
        return scene_from_document(SceneDocument.model_validate(raw))
    except ValidationError as exc:
        raise _format_error(exc, raw) from exc


def serialize_scene(scene: Scene) -> bytes:
    """Canonical scene JSON; inverse of ``parse_scene``."""
    return dump_document(scene_to_document(scene))


class SceneRepository(FileRepository):
    """Loads scene files."""

    def load(self, path: str | Path) -> Scene:
        """
        Read and parse one scene file.

        Raises:
            ScaffoldIOError: If the file cannot be read
            SceneFormatError: If its content is not a valid scene
        """
        try:
            scene = parse_scene(self.read(path, "scene"))
        except SceneFormatError as exc:
            exc.detail.setdefault("path", str(path))
            raise
        self.logger.debug("Scene loaded", path=str(path), scene_id=scene.scene_id, objects=len(scene.objects))
        return scene

    def load_many(self, paths: Sequence[str | Path]) -> list[Scene]:
        return [self.load(path) for path in paths]
