"""Test scene parsing, validation and serialization."""

import json

import pytest

from core.errors import SceneFormatError
from domain.models import Box7DoF, Vec3, center_distance
from repositories.scene_repository import SceneRepository, parse_scene, serialize_scene


def _bytes(document) -> bytes:
    return json.dumps(document).encode("utf-8")


def test_parse_scene_preserves_object_order(room_document):
    """Test objects keep their document order."""
    scene = parse_scene(_bytes(room_document))

    assert scene.scene_id == "room"
    assert scene.object_ids == ("bed", "chair_0", "chair_1", "desk", "lamp")
    assert scene.get_object("chair_1").first_frame == 17
    assert scene.first_camera() is not None


def test_duplicate_object_id_rejected(make_object):
    """Test a repeated id is reported with its field path."""
    document = {
        "scene_id": "dup",
        "objects": [
            make_object("chair", "chair", (0, 0, 0)),
            make_object("chair", "chair", (1, 0, 0)),
        ],
    }

    with pytest.raises(SceneFormatError) as exc_info:
        parse_scene(_bytes(document))

    assert exc_info.value.detail["object_id"] == "chair"
    assert exc_info.value.detail["field"] == "objects.1.id"


def test_zero_size_names_offending_object(make_object):
    """Test a zero box length fails and names the object."""
    document = {
        "scene_id": "flat",
        "objects": [
            make_object("ok", "table", (0, 0, 0)),
            make_object("rug_3", "rug", (1, 0, 0), size=(0.0, 1.0, 0.01)),
        ],
    }

    with pytest.raises(SceneFormatError) as exc_info:
        parse_scene(_bytes(document))

    assert exc_info.value.detail["object_id"] == "rug_3"
    assert "rug_3" in exc_info.value.message
    assert exc_info.value.detail["field"].startswith("objects.1.box.size")


def test_non_orthonormal_rotation_rejected(make_object):
    """Test scaled rotations are not accepted."""
    document = {
        "scene_id": "bad",
        "objects": [make_object("box", "box", (0, 0, 0), rotation=[2, 0, 0, 0, 1, 0, 0, 0, 1])],
    }

    with pytest.raises(SceneFormatError):
        parse_scene(_bytes(document))


def test_reflection_rejected(make_object):
    """Test a determinant −1 matrix is not a rotation."""
    document = {
        "scene_id": "mirror",
        "objects": [make_object("box", "box", (0, 0, 0), rotation=[-1, 0, 0, 0, 1, 0, 0, 0, 1])],
    }

    with pytest.raises(SceneFormatError):
        parse_scene(_bytes(document))


def test_camera_indices_must_increase(make_object, make_camera):
    """Test trajectories with repeated frame indices are rejected."""
    document = {
        "scene_id": "cams",
        "objects": [make_object("box", "box", (0, 0, 0))],
        "trajectory": [make_camera((1, 0, 0), index=4), make_camera((0, 1, 0), index=4)],
    }

    with pytest.raises(SceneFormatError):
        parse_scene(_bytes(document))


def test_empty_scene_rejected():
    """Test a scene needs at least one object."""
    with pytest.raises(SceneFormatError):
        parse_scene(_bytes({"scene_id": "empty", "objects": []}))


def test_invalid_json_rejected():
    """Test malformed bytes raise a format error."""
    with pytest.raises(SceneFormatError):
        parse_scene(b"{not json")


def test_serialize_parse_round_trip(room_document):
    """Test serialize_scene is the inverse of parse_scene."""
    scene = parse_scene(_bytes(room_document))
    data = serialize_scene(scene)

    assert parse_scene(data) == scene
    assert serialize_scene(parse_scene(data)) == data
    assert data.endswith(b"\n")


def test_center_distance(make_scene, make_object):
    """Test center distance is Euclidean in 3D."""
    scene = make_scene(
        "dist",
        [make_object("p", "box", (0, 0, 0)), make_object("q", "box", (3, 4, 12))],
    )

    assert center_distance(scene.get_object("p"), scene.get_object("q")) == pytest.approx(13.0)


def test_box7_answer_text_has_no_negative_zero():
    """Test -0.001 prints as 0.00."""
    box = Box7DoF(center=Vec3(x=-0.001, y=1.0, z=0.5), size=(1.0, 2.0, 0.5), yaw=-0.004)

    assert box.to_answer() == "(0.00, 1.00, 0.50, 1.00, 2.00, 0.50, 0.00)"


def test_repository_missing_file(tmp_path):
    """Test an unreadable path is an I/O error with exit code 3."""
    from core.errors import ScaffoldIOError

    with pytest.raises(ScaffoldIOError) as exc_info:
        SceneRepository().load(tmp_path / "missing.json")

    assert exc_info.value.exit_code == 3


def test_repository_records_digest(write_json, triangle_document):
    """Test loaded files are fingerprinted."""
    path = write_json("triangle.json", triangle_document)
    repository = SceneRepository()

    scene = repository.load(path)

    assert scene.scene_id == "triangle"
    assert list(repository.digests) == [str(path)]
    assert len(repository.digests[str(path)]) == 64
