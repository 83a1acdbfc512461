"""Unambiguous object referral: proximity, direction and temporal-order strategies."""

import math
from collections.abc import Mapping, Sequence

import numpy as np

from core.config import DEGENERACY_EPS, DIRECTION_MARGIN_DEG, PROXIMITY_MARGIN
from core.errors import ReferralDataError
from core.logging import LoggingMixin
from domain.models import (
    ObjectRecord,
    Referral,
    ReferralKind,
    ReferralRejection,
    RejectionReason,
    Scene,
    center_distance,
)
from services.geometry import scene_bev_positions
from services.templates import (
    DIRECTION_PHRASE,
    DIRECTION_RELATIONS,
    PROXIMITY_PHRASES,
    TEMPORAL_PHRASE,
    ordinal,
)

ReferralResult = Referral | ReferralRejection
CategoryIndex = Mapping[str, Sequence[ObjectRecord]]

# Sector boundaries in degrees, counter-clockwise from the front direction
SECTOR_BOUNDARIES = (-135.0, -45.0, 45.0, 135.0)


def relative_gap(a: float, b: float) -> float:
    """|a − b| relative to the larger of the two; 0 when both are 0."""
    larger = max(a, b)
    return abs(a - b) / larger if larger > 0 else 0.0


def bearing_degrees(origin: np.ndarray, front: np.ndarray, point: np.ndarray) -> float | None:
    """Signed angle of ``point`` seen from ``origin``, CCW from ``front``; None at the origin."""
    offset = point - origin
    if float(np.linalg.norm(offset)) < DEGENERACY_EPS:
        return None
    cross = front[0] * offset[1] - front[1] * offset[0]
    return math.degrees(math.atan2(float(cross), float(front @ offset)))


def sector_of(angle: float) -> str:
    """Map a bearing in (−180, 180] to front / left / behind / right (CCW is left)."""
    if -45.0 < angle < 45.0:
        return "front"
    if 45.0 <= angle < 135.0:
        return "left"
    if -135.0 < angle <= -45.0:
        return "right"
    return "behind"


def boundary_clearance(angle: float) -> float:
    return min(abs(angle - boundary) for boundary in SECTOR_BOUNDARIES)


class ReferralService(LoggingMixin):
    """Builds referring expressions and checks them against their own resolver."""

    def proximity_referral(
        self,
        scene: Scene,
        target_id: str,
        anchor_id: str,
        categories: CategoryIndex | None = None,
    ) -> ReferralResult:
        """
        Refer to the target as the same-category instance nearest to / furthest from an anchor.

        Accepted only when the target is the strict extreme and beats the runner-up
        by a relative distance margin of at least ``PROXIMITY_MARGIN``.

        Raises:
            ReferralDataError: If an id is unknown or the anchor is the target
        """
        target = self._object(scene, target_id)
        anchor = self._object(scene, anchor_id)
        if anchor_id == target_id:
            raise ReferralDataError("anchor must differ from target", target_id=target_id)

        categories = categories if categories is not None else scene.objects_by_category()
        candidates = self._same_category(categories, target, exclude=(anchor_id,))
        if len(candidates) == 1:
            return self._reject("proximity", target_id, "singleton_category")

        ranked = sorted(candidates, key=lambda obj: (center_distance(obj, anchor), obj.id))
        if ranked[0].id == target_id:
            qualifier, runner_up = "nearest", ranked[1]
        elif ranked[-1].id == target_id:
            qualifier, runner_up = "furthest", ranked[-2]
        else:
            return self._reject("proximity", target_id, "not_extreme")

        margin = relative_gap(center_distance(target, anchor), center_distance(runner_up, anchor))
        if margin < PROXIMITY_MARGIN:
            return self._reject(
                "proximity",
                target_id,
                "ambiguous_margin",
                f"{qualifier} by {margin:.4f} over {runner_up.id}",
            )

        return Referral(
            kind="proximity",
            target_id=target_id,
            category=target.category,
            anchor_ids=(anchor_id,),
            phrase=PROXIMITY_PHRASES[qualifier].format(
                category=target.category,
                anchor_category=anchor.category,
            ),
            qualifier=qualifier,
        )

    def direction_referral(
        self,
        scene: Scene,
        target_id: str,
        position_anchor_id: str,
        orientation_anchor_id: str,
        bev: Mapping[str, np.ndarray] | None = None,
        categories: CategoryIndex | None = None,
    ) -> ReferralResult:
        """
        Refer to the target by its sector around the position anchor.

        Front is the BEV direction from the position anchor toward the orientation
        anchor; the plane splits into four 90° sectors centered on front, left,
        behind and right. Accepted only when the target is alone among its category
        in its sector and at least ``DIRECTION_MARGIN_DEG`` from either boundary.

        Args:
            bev: Precomputed ``scene_bev_positions(scene)``, reused across anchor pairs
            categories: Precomputed ``scene.objects_by_category()``

        Raises:
            ReferralDataError: If an id is unknown or the three ids are not distinct
        """
        ids = (target_id, position_anchor_id, orientation_anchor_id)
        if len(set(ids)) != 3:
            raise ReferralDataError("direction referral needs three distinct ids", ids=list(ids))
        target = self._object(scene, target_id)
        position = self._object(scene, position_anchor_id)
        orientation = self._object(scene, orientation_anchor_id)

        bev = bev if bev is not None else scene_bev_positions(scene)
        origin = bev[position_anchor_id]
        front = bev[orientation_anchor_id] - origin
        if float(np.linalg.norm(front)) < DEGENERACY_EPS:
            return self._reject("direction", target_id, "coincident_anchors")
        front = front / np.linalg.norm(front)

        angle = bearing_degrees(origin, front, bev[target_id])
        if angle is None:
            return self._reject("direction", target_id, "target_at_anchor")
        clearance = boundary_clearance(angle)
        if clearance < DIRECTION_MARGIN_DEG:
            return self._reject("direction", target_id, "boundary_proximity", f"{clearance:.2f} deg")

        sector = sector_of(angle)
        categories = categories if categories is not None else scene.objects_by_category()
        for other in self._same_category(categories, target, exclude=(position_anchor_id, orientation_anchor_id)):
            if other.id == target_id:
                continue
            other_angle = bearing_degrees(origin, front, bev[other.id])
            if other_angle is not None and sector_of(other_angle) == sector:
                return self._reject("direction", target_id, "shared_sector", f"{sector} shared with {other.id}")

        return Referral(
            kind="direction",
            target_id=target_id,
            category=target.category,
            anchor_ids=(position_anchor_id, orientation_anchor_id),
            phrase=DIRECTION_PHRASE.format(
                category=target.category,
                relation=DIRECTION_RELATIONS[sector],
                position_category=position.category,
                orientation_category=orientation.category,
            ),
            qualifier=sector,
        )

    def temporal_referral(
        self,
        scene: Scene,
        target_id: str,
        categories: CategoryIndex | None = None,
    ) -> ReferralResult:
        """
        Refer to the target by the order in which its category first appears.

        Raises:
            ReferralDataError: If any instance of the category lacks ``first_frame``
        """
        target = self._object(scene, target_id)
        categories = categories if categories is not None else scene.objects_by_category()
        instances = categories[target.category]
        missing = sorted(obj.id for obj in instances if obj.first_frame is None)
        if missing:
            raise ReferralDataError(
                f"first_frame missing for category {target.category!r}",
                object_ids=missing,
            )
        frames = sorted(obj.first_frame for obj in instances if obj.first_frame is not None)
        if len(set(frames)) != len(frames):
            return self._reject("temporal", target_id, "tied_first_frame")

        rank = frames.index(target.first_frame) + 1  # type: ignore[arg-type]
        return Referral(
            kind="temporal",
            target_id=target_id,
            category=target.category,
            phrase=TEMPORAL_PHRASE.format(ordinal=ordinal(rank), category=target.category),
            qualifier=str(rank),
        )

    def options(
        self,
        scene: Scene,
        target_id: str,
        kind: ReferralKind,
        categories: CategoryIndex | None = None,
        bev: Mapping[str, np.ndarray] | None = None,
    ) -> list[ReferralResult]:
        """
        Run one strategy over every admissible anchor choice, in a fixed order.

        Proximity anchors are the other-category objects by increasing distance from
        the target; direction anchors are ordered pairs of those same objects.
        Temporal referral has no anchors and yields a single result. Callers scoring
        many targets of one scene pass ``categories`` and ``bev`` built once.
        """
        categories = categories if categories is not None else scene.objects_by_category()
        if kind == "temporal":
            return [self.temporal_referral(scene, target_id, categories)]

        target = self._object(scene, target_id)
        anchors = sorted(
            (obj for obj in scene.objects if obj.category != target.category),
            key=lambda obj: (center_distance(obj, target), obj.id),
        )
        if kind == "proximity":
            if not anchors:
                return [self._reject(kind, target_id, "no_anchor", "no object of another category")]
            return [self.proximity_referral(scene, target_id, a.id, categories) for a in anchors]
        if len(anchors) < 2:
            return [self._reject(kind, target_id, "no_anchor", "fewer than two objects of other categories")]

        bev = bev if bev is not None else scene_bev_positions(scene)
        return [
            self.direction_referral(scene, target_id, p.id, o.id, bev=bev, categories=categories)
            for p in anchors
            for o in anchors
            if p.id != o.id
        ]

    def refer(self, scene: Scene, target_id: str, kind: ReferralKind) -> ReferralResult:
        """First accepted referral among ``options``, else the first rejection."""
        results = self.options(scene, target_id, kind)
        return next((r for r in results if isinstance(r, Referral)), results[0])

    def resolve(
        self,
        scene: Scene,
        kind: ReferralKind,
        category: str,
        qualifier: str,
        anchor_ids: Sequence[str] = (),
    ) -> set[str]:
        """
        Ids of every object a referral description could denote.

        An accepted referral resolves to exactly its target; ambiguous descriptions
        resolve to several ids.
        """
        candidates = [
            obj for obj in scene.objects_by_category().get(category, []) if obj.id not in anchor_ids
        ]
        if not candidates:
            return set()

        if kind == "proximity":
            anchor = self._object(scene, anchor_ids[0])
            distances = {obj.id: center_distance(obj, anchor) for obj in candidates}
            extreme = min(distances.values()) if qualifier == "nearest" else max(distances.values())
            return {i for i, d in distances.items() if relative_gap(d, extreme) < PROXIMITY_MARGIN}

        if kind == "direction":
            bev = scene_bev_positions(scene)
            origin = bev[anchor_ids[0]]
            front = bev[anchor_ids[1]] - origin
            front = front / np.linalg.norm(front)
            matched = set()
            for obj in candidates:
                angle = bearing_degrees(origin, front, bev[obj.id])
                if angle is not None and sector_of(angle) == qualifier:
                    matched.add(obj.id)
            return matched

        rank = int(qualifier)
        frames = sorted({obj.first_frame for obj in candidates if obj.first_frame is not None})
        if rank > len(frames):
            return set()
        return {obj.id for obj in candidates if obj.first_frame == frames[rank - 1]}

    @staticmethod
    def _object(scene: Scene, object_id: str) -> ObjectRecord:
        try:
            return scene.get_object(object_id)
        except KeyError:
            raise ReferralDataError(
                f"unknown object {object_id!r}", scene_id=scene.scene_id, object_id=object_id
            ) from None

    @staticmethod
    def _same_category(categories: CategoryIndex, target: ObjectRecord, exclude: Sequence[str]) -> list[ObjectRecord]:
        return [obj for obj in categories[target.category] if obj.id not in exclude]

    def _reject(
        self,
        kind: ReferralKind,
        target_id: str,
        reason: RejectionReason,
        detail: str = "",
    ) -> ReferralRejection:
        self.logger.debug("Referral rejected", kind=kind, target_id=target_id, reason=reason, detail=detail)
        return ReferralRejection(kind=kind, target_id=target_id, reason=reason, detail=detail)
