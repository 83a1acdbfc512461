"""Test configuration and fixtures."""

import json
from collections.abc import Callable, Sequence
from pathlib import Path
from typing import Any

import numpy as np
import pytest

from domain.models import Scene
from domain.schemas import SceneDocument
from repositories.scene_repository import scene_from_document
from services.geometry import look_rotation

IDENTITY = [1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0]


def object_document(
    object_id: str,
    category: str,
    center: Sequence[float],
    size: Sequence[float] = (1.0, 1.0, 1.0),
    rotation: Sequence[float] = IDENTITY,
    first_frame: int | None = None,
) -> dict[str, Any]:
    document: dict[str, Any] = {
        "id": object_id,
        "category": category,
        "center": [float(c) for c in center],
        "size": [float(s) for s in size],
        "rotation": [float(r) for r in rotation],
    }
    if first_frame is not None:
        document["first_frame"] = first_frame
    return document


def camera_document(
    forward: Sequence[float],
    position: Sequence[float] = (0.0, 0.0, 0.0),
    index: int = 0,
) -> dict[str, Any]:
    rotation = look_rotation(tuple(forward))  # type: ignore[arg-type]
    return {
        "index": index,
        "rotation": [float(v) for v in rotation.reshape(-1)],
        "translation": [float(p) for p in position],
    }


def scene_document(
    scene_id: str,
    objects: Sequence[dict[str, Any]],
    trajectory: Sequence[dict[str, Any]] | None = None,
) -> dict[str, Any]:
    document: dict[str, Any] = {"scene_id": scene_id, "objects": list(objects)}
    if trajectory is not None:
        document["trajectory"] = list(trajectory)
    return document


def build_scene(document: dict[str, Any]) -> Scene:
    return scene_from_document(SceneDocument.model_validate(document))


def random_scene_document(rng: np.random.Generator, n: int, scene_id: str = "random") -> dict[str, Any]:
    """n objects with distinct centers in a 12 m square, ids zero-padded so order is stable."""
    centers = rng.uniform(0.0, 12.0, size=(n, 2))
    objects = [
        object_document(f"obj_{i:03d}", f"category_{i % 4}", (x, y, 0.5))
        for i, (x, y) in enumerate(centers)
    ]
    return scene_document(scene_id, objects)


@pytest.fixture
def make_object() -> Callable[..., dict[str, Any]]:
    return object_document


@pytest.fixture
def make_camera() -> Callable[..., dict[str, Any]]:
    return camera_document


@pytest.fixture
def make_scene() -> Callable[..., Scene]:
    """Build a validated Scene from object (and optional camera) documents."""

    def _make(
        scene_id: str,
        objects: Sequence[dict[str, Any]],
        trajectory: Sequence[dict[str, Any]] | None = None,
    ) -> Scene:
        return build_scene(scene_document(scene_id, objects, trajectory))

    return _make


@pytest.fixture
def random_scene() -> Callable[..., Scene]:
    def _make(rng: np.random.Generator, n: int) -> Scene:
        return build_scene(random_scene_document(rng, n))

    return _make


@pytest.fixture
def triangle_document() -> dict[str, Any]:
    """Anchors at (0, 0) and (0, -2), target at (2, -2): the target lands in cell [7, 3]."""
    return scene_document(
        "triangle",
        [
            object_document("a", "sofa", (0.0, 0.0, 0.5)),
            object_document("b", "table", (0.0, -2.0, 0.5)),
            object_document("c", "lamp", (2.0, -2.0, 0.5)),
        ],
    )


@pytest.fixture
def triangle_scene(triangle_document: dict[str, Any]) -> Scene:
    return build_scene(triangle_document)


@pytest.fixture
def room_document() -> dict[str, Any]:
    """Five furniture pieces within a 3 m room, camera at the origin looking along +x."""
    return scene_document(
        "room",
        [
            object_document("bed", "bed", (1.0, 1.0, 0.4), size=(2.0, 1.6, 0.5)),
            object_document("chair_0", "chair", (2.0, 0.0, 0.45), size=(0.5, 0.5, 0.9), first_frame=3),
            object_document("chair_1", "chair", (2.5, 1.5, 0.45), size=(0.5, 0.5, 0.9), first_frame=17),
            object_document("desk", "desk", (2.5, 0.5, 0.4), size=(1.2, 0.6, 0.75)),
            object_document("lamp", "lamp", (1.5, 2.0, 1.2), size=(0.3, 0.3, 0.4)),
        ],
        trajectory=[camera_document((1.0, 0.0, 0.0))],
    )


@pytest.fixture
def room_scene(room_document: dict[str, Any]) -> Scene:
    return build_scene(room_document)


@pytest.fixture
def two_cluster_document() -> dict[str, Any]:
    """Two tight triangles 50 m apart."""
    return scene_document(
        "two_clusters",
        [
            object_document("a", "box", (0.0, 0.0, 0.5)),
            object_document("b", "box", (1.0, 0.0, 0.5)),
            object_document("c", "box", (0.0, 1.0, 0.5)),
            object_document("d", "box", (50.0, 0.0, 0.5)),
            object_document("e", "box", (51.0, 0.0, 0.5)),
            object_document("f", "box", (50.0, 1.0, 0.5)),
        ],
    )


@pytest.fixture
def two_cluster_scene(two_cluster_document: dict[str, Any]) -> Scene:
    return build_scene(two_cluster_document)


@pytest.fixture
def write_json(tmp_path: Path) -> Callable[[str, Any], Path]:
    """Write a JSON document under tmp_path and return its path."""

    def _write(name: str, document: Any) -> Path:
        path = tmp_path / name
        path.write_text(json.dumps(document, indent=2), encoding="utf-8")
        return path

    return _write


@pytest.fixture
def scene_batch(
    write_json: Callable[[str, Any], Path],
    room_document: dict[str, Any],
    triangle_document: dict[str, Any],
) -> list[str]:
    """Three scene files with trajectories: room, triangle and a 10-object random layout."""
    camera = camera_document((1.0, 0.0, 0.0), position=(-1.0, -1.0, 1.5))
    triangle = dict(triangle_document, trajectory=[camera])
    layout = dict(random_scene_document(np.random.default_rng(7), 10, scene_id="layout"), trajectory=[camera])
    return [
        str(write_json("room.json", room_document)),
        str(write_json("triangle.json", triangle)),
        str(write_json("layout.json", layout)),
    ]
