"""Domain models: scenes, boxes, frames, LocalCogMaps, scene graphs, referrals, QA records."""

import math
from typing import Annotated, Literal

import numpy as np
from pydantic import Field, FiniteFloat, PositiveFloat, field_validator, model_validator

from core.config import (
    ANCHOR_A_CELL,
    ANCHOR_B_CELL,
    GRID_MAX,
    ORTHONORMAL_TOL,
    UNIT_AXIS_TOL,
)
from domain.base import DomainModel

Row3 = tuple[FiniteFloat, FiniteFloat, FiniteFloat]
Matrix3 = tuple[Row3, Row3, Row3]
Size3 = tuple[PositiveFloat, PositiveFloat, PositiveFloat]
BEVPoint = tuple[float, float]
ObjectId = Annotated[str, Field(min_length=1)]


def round_half_away(value: float) -> int:
    """Round to the nearest integer, halves away from zero."""
    return int(math.copysign(math.floor(abs(value) + 0.5), value))


def format_fixed(value: float, digits: int = 2) -> str:
    """Fixed-point text without a negative zero."""
    text = f"{value:.{digits}f}"
    if float(text) == 0.0:
        text = f"{0.0:.{digits}f}"
    return text


def check_rotation(rows: Matrix3) -> Matrix3:
    """Reject matrices that are not proper rotations (tolerance ``ORTHONORMAL_TOL``)."""
    matrix = np.asarray(rows, dtype=float)
    gram_error = float(np.max(np.abs(matrix.T @ matrix - np.eye(3))))
    if gram_error > ORTHONORMAL_TOL:
        raise ValueError(f"rotation is not orthonormal (max |RᵀR − I| = {gram_error:.3g})")
    det = float(np.linalg.det(matrix))
    if abs(det - 1.0) > ORTHONORMAL_TOL:
        raise ValueError(f"rotation determinant must be +1, got {det:.6f}")
    return rows


# Scene model
class Vec3(DomainModel):
    """A 3D point or direction in meters."""

    x: FiniteFloat
    y: FiniteFloat
    z: FiniteFloat

    @classmethod
    def from_array(cls, values: np.ndarray | tuple[float, float, float]) -> "Vec3":
        x, y, z = (float(v) for v in values)
        return cls(x=x, y=y, z=z)

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z], dtype=float)

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.x, self.y, self.z)


class Box9DoF(DomainModel):
    """Oriented box from dataset metadata: center, extents and object-to-world rotation."""

    center: Vec3
    size: Size3
    rotation: Matrix3

    @field_validator("rotation")
    @classmethod
    def validate_rotation(cls, value: Matrix3) -> Matrix3:
        return check_rotation(value)

    def rotation_array(self) -> np.ndarray:
        return np.asarray(self.rotation, dtype=float)


class CameraFrame(DomainModel):
    """Camera-to-world pose of one video frame (optical axis = camera +z)."""

    index: int = Field(ge=0)
    rotation: Matrix3
    translation: Vec3

    @field_validator("rotation")
    @classmethod
    def validate_rotation(cls, value: Matrix3) -> Matrix3:
        return check_rotation(value)

    def rotation_array(self) -> np.ndarray:
        return np.asarray(self.rotation, dtype=float)

    @property
    def optical_center(self) -> Vec3:
        return self.translation

    def optical_axis(self) -> np.ndarray:
        return self.rotation_array()[:, 2]


class ObjectRecord(DomainModel):
    """One annotated object instance."""

    id: ObjectId
    category: Annotated[str, Field(min_length=1)]
    box: Box9DoF
    first_frame: int | None = Field(default=None, ge=0)


def center_distance(a: ObjectRecord, b: ObjectRecord) -> float:
    """Euclidean distance between 3D box centers (meters)."""
    return float(np.linalg.norm(a.box.center.as_array() - b.box.center.as_array()))


class Scene(DomainModel):
    """A scene's objects and optional camera trajectory."""

    scene_id: str
    objects: tuple[ObjectRecord, ...] = Field(min_length=1)
    trajectory: tuple[CameraFrame, ...] | None = None

    @model_validator(mode="after")
    def validate_scene(self) -> "Scene":
        seen: set[str] = set()
        for obj in self.objects:
            if obj.id in seen:
                raise ValueError(f"duplicate object id {obj.id!r}")
            seen.add(obj.id)
        if self.trajectory:
            indices = [frame.index for frame in self.trajectory]
            if any(b <= a for a, b in zip(indices, indices[1:], strict=False)):
                raise ValueError("camera frame indices must be strictly increasing")
        return self

    @property
    def object_ids(self) -> tuple[str, ...]:
        return tuple(obj.id for obj in self.objects)

    def get_object(self, object_id: str) -> ObjectRecord:
        for obj in self.objects:
            if obj.id == object_id:
                return obj
        raise KeyError(object_id)

    def objects_by_category(self) -> dict[str, list[ObjectRecord]]:
        """Category -> instances in scene order."""
        groups: dict[str, list[ObjectRecord]] = {}
        for obj in self.objects:
            groups.setdefault(obj.category, []).append(obj)
        return groups

    def first_camera(self) -> CameraFrame | None:
        if not self.trajectory:
            return None
        return min(self.trajectory, key=lambda frame: frame.index)


# Geometry
class UnifiedFrame(DomainModel):
    """Global grounding frame: origin at the first camera, +x along its ground-plane heading."""

    origin: Vec3
    x_axis: Vec3
    y_axis: Vec3
    up: Vec3

    @model_validator(mode="after")
    def validate_axes(self) -> "UnifiedFrame":
        axes = self.basis()
        if float(np.max(np.abs(axes.T @ axes - np.eye(3)))) > UNIT_AXIS_TOL:
            raise ValueError("frame axes must be orthonormal")
        if float(np.linalg.det(axes)) <= 0:
            raise ValueError("frame must be right-handed")
        return self

    def basis(self) -> np.ndarray:
        """Columns are the frame axes in source coordinates."""
        return np.column_stack([self.x_axis.as_array(), self.y_axis.as_array(), self.up.as_array()])


class Box7DoF(DomainModel):
    """(x_c, y_c, z_c, l, w, h, yaw) in the unified frame; yaw in (−π, π]."""

    center: Vec3
    size: Size3
    yaw: FiniteFloat

    @field_validator("yaw")
    @classmethod
    def validate_yaw(cls, value: float) -> float:
        if not -math.pi < value <= math.pi:
            raise ValueError(f"yaw {value} outside (-pi, pi]")
        return value

    def as_tuple(self) -> tuple[float, float, float, float, float, float, float]:
        return (*self.center.as_tuple(), *self.size, self.yaw)

    def to_answer(self) -> str:
        """Canonical answer text, 2-decimal fixed point."""
        return "(" + ", ".join(format_fixed(v) for v in self.as_tuple()) + ")"

    def rounded(self) -> "Box7DoF":
        """The box exactly as its answer text states it."""
        values = [float(format_fixed(v)) for v in self.as_tuple()]
        return Box7DoF(
            center=Vec3(x=values[0], y=values[1], z=values[2]),
            size=(values[3], values[4], values[5]),
            yaw=values[6],
        )


# LocalCogMap
class GridCoord(DomainModel):
    """A cell of the 10×10 cognitive-map grid."""

    u: int = Field(ge=0, le=GRID_MAX)
    v: int = Field(ge=0, le=GRID_MAX)

    def as_tuple(self) -> tuple[int, int]:
        return (self.u, self.v)

    def to_answer(self) -> str:
        return f"[{self.u}, {self.v}]"


ANCHOR_A_GRID = GridCoord(u=ANCHOR_A_CELL[0], v=ANCHOR_A_CELL[1])
ANCHOR_B_GRID = GridCoord(u=ANCHOR_B_CELL[0], v=ANCHOR_B_CELL[1])


def clamp_cell(value: float) -> int:
    return min(max(round_half_away(value), 0), GRID_MAX)


def outside_grid(continuous: BEVPoint) -> bool:
    return any(c < 0 or c > GRID_MAX for c in continuous)


class LocalCogMap(DomainModel):
    """One (anchor, anchor, target) triplet on the 10×10 grid."""

    anchor_a_id: ObjectId
    anchor_b_id: ObjectId
    target_id: ObjectId
    anchor_a_grid: GridCoord = ANCHOR_A_GRID
    anchor_b_grid: GridCoord = ANCHOR_B_GRID
    target_grid: GridCoord
    target_grid_continuous: tuple[FiniteFloat, FiniteFloat]
    out_of_grid: bool

    @model_validator(mode="after")
    def validate_triplet(self) -> "LocalCogMap":
        if len({self.anchor_a_id, self.anchor_b_id, self.target_id}) != 3:
            raise ValueError("anchor and target ids must be pairwise distinct")
        if self.anchor_a_grid != ANCHOR_A_GRID or self.anchor_b_grid != ANCHOR_B_GRID:
            raise ValueError("anchor cells are fixed at (5, 5) and (5, 3)")
        expected = tuple(clamp_cell(c) for c in self.target_grid_continuous)
        if self.target_grid.as_tuple() != expected:
            raise ValueError(f"target_grid {self.target_grid.as_tuple()} != quantized {expected}")
        if self.out_of_grid != outside_grid(self.target_grid_continuous):
            raise ValueError("out_of_grid flag disagrees with continuous target")
        return self

    @property
    def ids(self) -> tuple[str, str, str]:
        return (self.anchor_a_id, self.anchor_b_id, self.target_id)


# Scene graph
class SceneGraph(DomainModel):
    """Ordered chain of LocalCogMaps with insertion provenance.

    Any LCM list can be held so hand-built graphs can be validated; graphs from
    incremental generation also satisfy ``is_incremental_chain``.
    """

    scene_id: str
    delta: PositiveFloat
    placement_order: tuple[str, ...]
    lcms: tuple[LocalCogMap, ...]

    def object_ids(self) -> set[str]:
        ids = set(self.placement_order)
        for lcm in self.lcms:
            ids.update(lcm.ids)
        return ids

    def is_incremental_chain(self) -> bool:
        if not self.lcms or len(self.placement_order) != len(self.lcms) + 2:
            return False
        if len(set(self.placement_order)) != len(self.placement_order):
            return False
        first = self.lcms[0]
        if set(first.ids) != set(self.placement_order[:3]):
            return False
        placed = set(self.placement_order[:3])
        for lcm, new_id in zip(self.lcms[1:], self.placement_order[3:], strict=True):
            if lcm.target_id != new_id or lcm.target_id in placed:
                return False
            if lcm.anchor_a_id not in placed or lcm.anchor_b_id not in placed:
                return False
            placed.add(new_id)
        return True


class ValidationReport(DomainModel):
    """Connectivity and rigidity of a set of LocalCogMaps."""

    connected: bool
    rigid: bool
    components: tuple[tuple[str, ...], ...]
    stalled_at: int | None = None
    seed: int | None = None
    placed_count: int = 0

    @model_validator(mode="after")
    def validate_report(self) -> "ValidationReport":
        if self.rigid and not self.connected:
            raise ValueError("a rigid graph must be connected")
        if (self.stalled_at is None) != self.rigid:
            raise ValueError("stalled_at must be set exactly when the graph is not rigid")
        return self


# Referral
ReferralKind = Literal["proximity", "direction", "temporal"]
RejectionReason = Literal[
    "singleton_category",
    "ambiguous_margin",
    "not_extreme",
    "shared_sector",
    "boundary_proximity",
    "coincident_anchors",
    "target_at_anchor",
    "tied_first_frame",
    "no_anchor",
]


class Referral(DomainModel):
    """An unambiguous referring expression for one object."""

    kind: ReferralKind
    target_id: ObjectId
    category: str
    anchor_ids: tuple[str, ...] = Field(default=(), max_length=2)
    phrase: str
    qualifier: str


class ReferralRejection(DomainModel):
    """Why a referral strategy could not single out the target."""

    kind: ReferralKind
    target_id: ObjectId
    reason: RejectionReason
    detail: str = ""


# QA records
QATask = Literal["scenegraph_qa", "grounding_qa", "global_cogmap_qa"]


class Provenance(DomainModel):
    """Where a QA record came from: LCM index, or object plus referral."""

    index: int = Field(ge=0)
    lcm_index: int | None = None
    object_id: str | None = None
    referral: Referral | None = None


class QARecord(DomainModel):
    """One self-contained question/answer sample."""

    id: str
    scene_id: str
    task: QATask
    template_id: str
    system_context: str
    question: str
    answer: str
    ground_truth: GridCoord | Box7DoF
    provenance: Provenance

    @model_validator(mode="after")
    def validate_answer(self) -> "QARecord":
        if self.answer != self.ground_truth.to_answer():
            raise ValueError("answer must be the canonical serialization of ground_truth")
        grid_task = self.task != "grounding_qa"
        if grid_task != isinstance(self.ground_truth, GridCoord):
            raise ValueError(f"ground_truth type does not match task {self.task}")
        return self

    def sort_key(self) -> tuple[str, str, int]:
        return (self.scene_id, self.task, self.provenance.index)


# Evaluation
class EvalSummary(DomainModel):
    """Error distribution summary with a fixed-width sparse histogram."""

    count: int = Field(ge=0)
    mean_error: float
    median_error: float
    bin_width: PositiveFloat
    histogram: tuple[tuple[float, int], ...]

    @model_validator(mode="after")
    def validate_histogram(self) -> "EvalSummary":
        if sum(count for _, count in self.histogram) != self.count:
            raise ValueError("histogram counts must sum to count")
        return self


class GroundingSummary(DomainModel):
    """Per-component grounding errors."""

    center: EvalSummary
    size: EvalSummary
    yaw: EvalSummary


class EvaluationReport(DomainModel):
    """Outcome of scoring a prediction file against ground truth."""

    prediction_count: int = Field(ge=0)
    no_parse_count: int = Field(ge=0)
    unanswered_count: int = Field(ge=0)
    summaries: dict[str, EvalSummary] = Field(default_factory=dict)

    @property
    def no_parse_rate(self) -> float:
        return self.no_parse_count / self.prediction_count if self.prediction_count else 0.0
