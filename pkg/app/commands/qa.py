"""emit-qa subcommand."""

import argparse
import sys
from functools import partial

from app.pipeline import RunConfig, build_metadata, emit_output, parallel_map
from core.errors import EXIT_OK, ConfigError, DegenerateFrameError, QAEmissionError
from domain.models import QARecord, ReferralKind, Scene, SceneGraph
from repositories.dataset_repository import serialize_jsonl
from repositories.graph_repository import GraphRepository
from repositories.scene_repository import SceneRepository
from services.qa_service import QAService


def get_qa_service() -> QAService:
    return QAService()


def _scenegraph_records(pair: tuple[SceneGraph, Scene]) -> list[QARecord]:
    graph, scene = pair
    return get_qa_service().emit_scenegraph_qa(graph, scene)


def _grounding_records(scene: Scene, policy: tuple[ReferralKind, ...], seed: int) -> list[QARecord] | None:
    """Records of one scene, or None when its first camera gives no unified frame."""
    service = get_qa_service()
    try:
        return service.emit_grounding_qa(scene, policy, seed)
    except DegenerateFrameError as exc:
        service.log_operation_error("emit_grounding_qa", exc, scene_id=scene.scene_id, skipped=True)
        return None


def _global_cogmap_records(scene: Scene) -> list[QARecord]:
    return get_qa_service().emit_global_cogmap_qa(scene)


def cmd_emit_qa(config: RunConfig) -> int:
    """Write the requested QA task as sorted JSONL with a metadata first line."""
    scene_repository = SceneRepository()
    graph_repository = GraphRepository()
    scenes = scene_repository.load_many(config.scenes)

    batches: list[list[QARecord]]
    skipped: list[str] = []
    if config.task == "scenegraph":
        if config.graph is None:
            raise ConfigError("--task scenegraph needs --graph")
        by_id = {scene.scene_id: scene for scene in scenes}
        pairs = []
        for graph in graph_repository.load(config.graph):
            if graph.scene_id not in by_id:
                raise QAEmissionError(f"no --scene given for graph {graph.scene_id!r}", scene_id=graph.scene_id)
            pairs.append((graph, by_id[graph.scene_id]))
        batches = parallel_map(_scenegraph_records, pairs, config.jobs)
    elif config.task == "grounding":
        results = parallel_map(
            partial(_grounding_records, policy=config.policy, seed=config.seed),
            scenes,
            config.jobs,
        )
        skipped = [scene.scene_id for scene, result in zip(scenes, results, strict=True) if result is None]
        batches = [result for result in results if result is not None]
    else:
        batches = parallel_map(_global_cogmap_records, scenes, config.jobs)

    records = [record for batch in batches for record in batch]
    metadata = build_metadata(config, [scene_repository.digests, graph_repository.digests])
    emit_output(serialize_jsonl(records, metadata), config.out, "QA")
    if skipped:
        print(f"skipped scenes with a vertical first-camera axis: {', '.join(skipped)}", file=sys.stderr)
    return EXIT_OK


def register(
    subparsers: "argparse._SubParsersAction[argparse.ArgumentParser]",
    common: argparse.ArgumentParser,
) -> None:
    emit = subparsers.add_parser("emit-qa", parents=[common], help="Emit QA records as JSONL")
    emit.add_argument("--scene", dest="scenes", nargs="+", required=True, help="Scene JSON file(s)")
    emit.add_argument("--graph", help="Graph JSON file (scenegraph task)")
    emit.add_argument("--task", choices=["scenegraph", "grounding", "global_cogmap"], help="QA task to emit")
    emit.add_argument("--policy", help="Referral strategy order, e.g. proximity,direction,temporal")
    emit.set_defaults(command="emit-qa", handler=cmd_emit_qa)
