"""normalize subcommand: every box as a 7-DoF box in its scene's unified frame."""

import argparse
import sys

from app.pipeline import RunConfig, build_metadata, emit_output, parallel_map
from core.errors import EXIT_OK, EXIT_VALIDATION, GimbalDegenerateError
from core.logging import service_logger
from domain.models import Scene
from domain.schemas import FrameDocument, NormalizedBoxDocument, NormalizedFileDocument, NormalizedSceneDocument
from repositories.files import dump_document
from repositories.scene_repository import SceneRepository
from services.geometry import box9_to_box7, scene_unified_frame


def normalize_scene(scene: Scene) -> NormalizedSceneDocument:
    """
    Raises:
        MissingTrajectoryError: If the scene has no trajectory
        DegenerateFrameError: If the first camera looks straight up or down
    """
    frame = scene_unified_frame(scene)
    boxes = []
    degenerate = []
    for obj in scene.objects:
        try:
            box = box9_to_box7(frame, obj.box)
        except GimbalDegenerateError as exc:
            service_logger.warning("Gimbal-degenerate box", scene_id=scene.scene_id, object_id=obj.id, reason=exc.message)
            degenerate.append(obj.id)
            continue
        boxes.append(
            NormalizedBoxDocument(
                id=obj.id,
                category=obj.category,
                center=list(box.center.as_tuple()),
                size=list(box.size),
                yaw=box.yaw,
            )
        )
    return NormalizedSceneDocument(
        scene_id=scene.scene_id,
        frame=FrameDocument(
            origin=list(frame.origin.as_tuple()),
            x_axis=list(frame.x_axis.as_tuple()),
            y_axis=list(frame.y_axis.as_tuple()),
            up=list(frame.up.as_tuple()),
        ),
        boxes=boxes,
        gimbal_degenerate=degenerate,
    )


def cmd_normalize(config: RunConfig) -> int:
    """Write normalized boxes; exit 1 if any box is gimbal-degenerate (they are listed)."""
    scene_repository = SceneRepository()
    scenes = scene_repository.load_many(config.scenes)
    normalized = parallel_map(normalize_scene, scenes, config.jobs)

    document = NormalizedFileDocument(metadata=build_metadata(config, [scene_repository.digests]), scenes=normalized)
    emit_output(dump_document(document), config.out, "normalized boxes")
    degenerate = [f"{s.scene_id}/{object_id}" for s in normalized for object_id in s.gimbal_degenerate]
    if degenerate:
        print(f"gimbal-degenerate boxes: {', '.join(degenerate)}", file=sys.stderr)
        return EXIT_VALIDATION
    return EXIT_OK


def register(
    subparsers: "argparse._SubParsersAction[argparse.ArgumentParser]",
    common: argparse.ArgumentParser,
) -> None:
    normalize = subparsers.add_parser("normalize", parents=[common], help="Convert boxes to the unified 7-DoF frame")
    normalize.add_argument("--scene", dest="scenes", nargs="+", required=True, help="Scene JSON file(s)")
    normalize.set_defaults(command="normalize", handler=cmd_normalize)
