"""Pydantic schemas for the toolkit's JSON/JSONL document formats."""

from typing import Any

from pydantic import BaseModel, ConfigDict, Field


class DocumentModel(BaseModel):
    """Base class for on-disk documents."""

    model_config = ConfigDict(extra="forbid")


# Scene JSON
class ObjectDocument(DocumentModel):
    """One object of a scene document."""

    id: str = Field(description="Object id, unique within the scene")
    category: str = Field(description="Semantic category, e.g. 'chair'")
    center: list[float] = Field(min_length=3, max_length=3, description="Box center [x, y, z] in meters")
    size: list[float] = Field(min_length=3, max_length=3, description="Box extents [l, w, h] in meters")
    rotation: list[float] = Field(
        min_length=9,
        max_length=9,
        description="Object-to-world rotation, 9 reals row-major",
    )
    first_frame: int | None = Field(
        default=None,
        description="Index of the first video frame in which the object appears",
    )


class CameraDocument(DocumentModel):
    """One camera frame of a scene trajectory."""

    index: int = Field(description="Frame index")
    rotation: list[float] = Field(
        min_length=9,
        max_length=9,
        description="Camera-to-world rotation, 9 reals row-major; optical axis is camera +z",
    )
    translation: list[float] = Field(
        min_length=3,
        max_length=3,
        description="Camera optical center in world coordinates (meters)",
    )


class SceneDocument(DocumentModel):
    """Canonical scene JSON document."""

    scene_id: str = Field(description="Scene identifier")
    objects: list[ObjectDocument] = Field(description="Objects in scene order")
    trajectory: list[CameraDocument] | None = Field(
        default=None,
        description="Camera frames with strictly increasing indices",
    )

    model_config = {
        "extra": "forbid",
        "json_schema_extra": {
            "example": {
                "scene_id": "scene0000_00",
                "objects": [
                    {
                        "id": "chair_0",
                        "category": "chair",
                        "center": [1.0, 2.0, 0.45],
                        "size": [0.5, 0.5, 0.9],
                        "rotation": [1, 0, 0, 0, 1, 0, 0, 0, 1],
                        "first_frame": 12,
                    }
                ],
                "trajectory": [
                    {"index": 0, "rotation": [0, 0, 1, -1, 0, 0, 0, -1, 0], "translation": [0, 0, 1.5]}
                ],
            }
        },
    }


# Graph JSON
class LocalCogMapDocument(DocumentModel):
    """LocalCogMap JSON."""

    anchor_a: str
    anchor_b: str
    target: str
    target_grid: list[int] = Field(min_length=2, max_length=2)
    target_grid_continuous: list[float] = Field(min_length=2, max_length=2)
    out_of_grid: bool


class ValidationDocument(DocumentModel):
    """Validation report as written next to a graph."""

    connected: bool
    rigid: bool
    components: list[list[str]]
    stalled_at: int | None = None
    seed: int | None = None
    placed_count: int = 0


class GraphDocument(DocumentModel):
    """Scene graph JSON."""

    scene_id: str
    delta: float = Field(gt=0, description="Distance threshold used by graph generation (meters)")
    placement_order: list[str] = Field(default_factory=list, description="Object ids in insertion order")
    lcms: list[LocalCogMapDocument]
    validation: ValidationDocument | None = None


# Output headers
class MetadataHeader(DocumentModel):
    """Provenance header embedded in every CLI output file."""

    tool: str
    version: str
    command: str
    config: dict[str, Any] = Field(description="Effective configuration (excluding worker count)")
    inputs: dict[str, str] = Field(description="Input path -> sha256 of its content")


class GraphFileDocument(DocumentModel):
    metadata: MetadataHeader
    graphs: list[GraphDocument]


class SceneValidationDocument(DocumentModel):
    scene_id: str
    validation: ValidationDocument


class ValidationFileDocument(DocumentModel):
    metadata: MetadataHeader
    reports: list[SceneValidationDocument]


class TripletSampleDocument(DocumentModel):
    scene_id: str
    k: int
    seed: int
    lcms: list[LocalCogMapDocument]
    validation: ValidationDocument


class TripletSampleFileDocument(DocumentModel):
    metadata: MetadataHeader
    samples: list[TripletSampleDocument]


class LayoutDocument(DocumentModel):
    """Reconstructed BEV layout of one scene."""

    scene_id: str
    mode: str = Field(pattern="^(continuous|quantized)$")
    positions: dict[str, list[float]]
    residual: float | None = Field(default=None, description="Similarity-aligned RMS residual (meters)")


class LayoutFileDocument(DocumentModel):
    metadata: MetadataHeader
    layouts: list[LayoutDocument]


class FrameDocument(DocumentModel):
    origin: list[float]
    x_axis: list[float]
    y_axis: list[float]
    up: list[float]


class NormalizedBoxDocument(DocumentModel):
    id: str
    category: str
    center: list[float]
    size: list[float]
    yaw: float


class NormalizedSceneDocument(DocumentModel):
    scene_id: str
    frame: FrameDocument
    boxes: list[NormalizedBoxDocument]
    gimbal_degenerate: list[str] = Field(default_factory=list)


class NormalizedFileDocument(DocumentModel):
    metadata: MetadataHeader
    scenes: list[NormalizedSceneDocument]


# Prediction JSONL
class PredictionRecord(DocumentModel):
    """One model answer to be scored."""

    id: str = Field(description="Id of the ground-truth QA record")
    answer_text: str = Field(description="Raw model output")

    model_config = {
        "extra": "forbid",
        "json_schema_extra": {"example": {"id": "scene0000_00/scenegraph_qa/0", "answer_text": "[7, 3]"}},
    }
