"""MultiQA emission: scene-graph, grounding and global cognitive map QA records."""

import hashlib
from collections.abc import Iterable, Mapping, Sequence
from typing import cast, get_args

import numpy as np

from core.config import REFERRAL_STRATEGIES
from core.errors import (
    ConfigError,
    GimbalDegenerateError,
    NonRigidGraphError,
    QAEmissionError,
    ReferralDataError,
)
from core.logging import LoggingMixin
from domain.models import (
    Box7DoF,
    GridCoord,
    Provenance,
    QARecord,
    QATask,
    Referral,
    ReferralKind,
    Scene,
    SceneGraph,
    format_fixed,
)
from services.geometry import box9_to_box7, scene_bev_positions, scene_unified_frame
from services.localcogmap import encode_global_cogmap
from services.referral_service import CategoryIndex, ReferralService
from services.scene_graph_service import SceneGraphService
from services.templates import (
    BARE_PHRASE,
    GLOBAL_COGMAP_QUESTION,
    GLOBAL_COGMAP_SYSTEM_CONTEXT,
    GLOBAL_COGMAP_TEMPLATE_ID,
    GROUNDING_QUESTION,
    GROUNDING_SYSTEM_CONTEXT,
    GROUNDING_TEMPLATE_ID,
    SCENEGRAPH_QUESTION,
    SCENEGRAPH_SYSTEM_CONTEXT,
    SCENEGRAPH_TEMPLATE_ID,
)

Policy = tuple[ReferralKind, ...]

DEFAULT_POLICY: Policy = cast(Policy, REFERRAL_STRATEGIES)


def parse_policy(value: str | Iterable[str]) -> Policy:
    """
    Parse a referral strategy order such as ``"direction,proximity"``.

    Raises:
        ConfigError: On an empty policy, an unknown strategy or a repeated one
    """
    names = [n.strip() for n in value.split(",")] if isinstance(value, str) else [n.strip() for n in value]
    names = [n for n in names if n]
    known = get_args(ReferralKind)
    unknown = [n for n in names if n not in known]
    if not names or unknown:
        raise ConfigError(
            "policy must list referral strategies from " + ", ".join(known),
            policy=names,
            unknown=unknown,
        )
    if len(set(names)) != len(names):
        raise ConfigError("policy lists a strategy more than once", policy=names)
    return cast(Policy, tuple(names))


def record_id(scene_id: str, task: QATask, index: int) -> str:
    return f"{scene_id}/{task}/{index}"


def referral_rng(scene_id: str, seed: int) -> np.random.Generator:
    """Per-scene generator: depends on the seed and scene id, never on processing order."""
    digest = int.from_bytes(hashlib.sha256(scene_id.encode("utf-8")).digest()[:8], "big")
    return np.random.default_rng([seed, digest])


class QAService(LoggingMixin):
    """Service that turns scene graphs and referrals into QA records."""

    def __init__(
        self,
        graph_service: SceneGraphService | None = None,
        referral_service: ReferralService | None = None,
    ) -> None:
        super().__init__()
        self.graph_service = graph_service or SceneGraphService()
        self.referral_service = referral_service or ReferralService()

    def emit_scenegraph_qa(self, graph: SceneGraph, scene: Scene) -> list[QARecord]:
        """
        One record per LocalCogMap asking for the target's cell given both anchors.

        Raises:
            QAEmissionError: If the graph belongs to another scene or names unknown objects
            NonRigidGraphError: If the graph is not rigid
        """
        self.log_operation_start("emit_scenegraph_qa", scene_id=scene.scene_id)
        if graph.scene_id != scene.scene_id:
            raise QAEmissionError(
                "graph and scene ids differ",
                graph_scene_id=graph.scene_id,
                scene_id=scene.scene_id,
            )
        unknown = sorted(graph.object_ids() - set(scene.object_ids))
        if unknown:
            raise QAEmissionError("graph names objects absent from the scene", unknown_ids=unknown)

        report = self.graph_service.validate(graph.lcms, graph.object_ids())
        if not report.rigid:
            raise NonRigidGraphError(
                "scene-graph QA needs a rigid graph",
                scene_id=scene.scene_id,
                stalled_at=report.stalled_at,
                connected=report.connected,
            )

        categories = {obj.id: obj.category for obj in scene.objects}
        records = []
        for index, lcm in enumerate(graph.lcms):
            question = SCENEGRAPH_QUESTION.format(
                anchor_a_category=categories[lcm.anchor_a_id],
                anchor_a_id=lcm.anchor_a_id,
                anchor_b_category=categories[lcm.anchor_b_id],
                anchor_b_id=lcm.anchor_b_id,
                target_category=categories[lcm.target_id],
                target_id=lcm.target_id,
            )
            records.append(
                QARecord(
                    id=record_id(scene.scene_id, "scenegraph_qa", index),
                    scene_id=scene.scene_id,
                    task="scenegraph_qa",
                    template_id=SCENEGRAPH_TEMPLATE_ID,
                    system_context=SCENEGRAPH_SYSTEM_CONTEXT,
                    question=question,
                    answer=lcm.target_grid.to_answer(),
                    ground_truth=lcm.target_grid,
                    provenance=Provenance(index=index, lcm_index=index),
                )
            )
        self.log_operation_success("emit_scenegraph_qa", scene_id=scene.scene_id, records=len(records))
        return records

    def emit_grounding_qa(
        self,
        scene: Scene,
        policy: Sequence[ReferralKind] = DEFAULT_POLICY,
        seed: int = 0,
    ) -> list[QARecord]:
        """
        Emit one 7-DoF grounding record per referable object.

        Objects are visited in id order. A singleton-category object is named by its
        bare category; otherwise strategies are tried in policy order and the first
        strategy with an accepted referral supplies it, the seed choosing among that
        strategy's accepted anchor choices. Objects without a referral, with a
        gimbal-degenerate box, or with a size that rounds to zero are skipped and logged.

        Args:
            scene: Scene with a camera trajectory
            policy: Referral strategy preference order
            seed: Seed for choosing among accepted referrals

        Raises:
            MissingTrajectoryError: If the scene has no trajectory
            DegenerateFrameError: If the first camera looks straight up or down
        """
        self.log_operation_start("emit_grounding_qa", scene_id=scene.scene_id, policy=list(policy), seed=seed)
        frame = scene_unified_frame(scene)
        rng = referral_rng(scene.scene_id, seed)
        categories = scene.objects_by_category()
        bev = scene_bev_positions(scene)

        records: list[QARecord] = []
        skipped = 0
        for obj in sorted(scene.objects, key=lambda o: o.id):
            try:
                box = box9_to_box7(frame, obj.box)
            except GimbalDegenerateError as exc:
                skipped += 1
                self.logger.warning("Skipping object", scene_id=scene.scene_id, object_id=obj.id, reason=exc.message)
                continue
            if any(float(format_fixed(s)) <= 0 for s in box.size):
                skipped += 1
                self.logger.warning(
                    "Skipping object",
                    scene_id=scene.scene_id,
                    object_id=obj.id,
                    reason="size rounds to zero",
                )
                continue

            referral: Referral | None = None
            if len(categories[obj.category]) == 1:
                phrase = BARE_PHRASE.format(category=obj.category)
            else:
                referral = self._choose_referral(scene, obj.id, policy, rng, categories, bev)
                if referral is None:
                    skipped += 1
                    continue
                phrase = referral.phrase

            ground_truth: Box7DoF = box.rounded()
            index = len(records)
            records.append(
                QARecord(
                    id=record_id(scene.scene_id, "grounding_qa", index),
                    scene_id=scene.scene_id,
                    task="grounding_qa",
                    template_id=GROUNDING_TEMPLATE_ID,
                    system_context=GROUNDING_SYSTEM_CONTEXT,
                    question=GROUNDING_QUESTION.format(phrase=phrase),
                    answer=ground_truth.to_answer(),
                    ground_truth=ground_truth,
                    provenance=Provenance(index=index, object_id=obj.id, referral=referral),
                )
            )
        self.log_operation_success(
            "emit_grounding_qa",
            scene_id=scene.scene_id,
            records=len(records),
            skipped=skipped,
        )
        return records

    def emit_global_cogmap_qa(self, scene: Scene) -> list[QARecord]:
        """One record per object placing it on the scene-wide 10×10 grid."""
        encoded = encode_global_cogmap(scene_bev_positions(scene))
        records = []
        for index, obj in enumerate(sorted(scene.objects, key=lambda o: o.id)):
            grid: GridCoord = encoded[obj.id][0]
            records.append(
                QARecord(
                    id=record_id(scene.scene_id, "global_cogmap_qa", index),
                    scene_id=scene.scene_id,
                    task="global_cogmap_qa",
                    template_id=GLOBAL_COGMAP_TEMPLATE_ID,
                    system_context=GLOBAL_COGMAP_SYSTEM_CONTEXT,
                    question=GLOBAL_COGMAP_QUESTION.format(category=obj.category, object_id=obj.id),
                    answer=grid.to_answer(),
                    ground_truth=grid,
                    provenance=Provenance(index=index, object_id=obj.id),
                )
            )
        self.logger.info("Emitted global cogmap QA", scene_id=scene.scene_id, records=len(records))
        return records

    def _choose_referral(
        self,
        scene: Scene,
        object_id: str,
        policy: Sequence[ReferralKind],
        rng: np.random.Generator,
        categories: CategoryIndex,
        bev: Mapping[str, np.ndarray],
    ) -> Referral | None:
        reasons: dict[str, str] = {}
        for kind in policy:
            try:
                results = self.referral_service.options(scene, object_id, kind, categories, bev)
            except ReferralDataError as exc:
                reasons[kind] = exc.message
                continue
            accepted = [r for r in results if isinstance(r, Referral)]
            if accepted:
                return accepted[int(rng.integers(len(accepted)))]
            reasons[kind] = ", ".join(sorted({r.reason for r in results if not isinstance(r, Referral)}))
        self.logger.info(
            "Skipping object without an unambiguous referral",
            scene_id=scene.scene_id,
            object_id=object_id,
            reasons=reasons,
        )
        return None
