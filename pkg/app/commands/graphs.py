"""Scene-graph subcommands: build-graph, validate, reconstruct, sample-triplets."""

import argparse
import sys
from functools import partial

from app.pipeline import RunConfig, build_metadata, emit_output, parallel_map
from core.errors import EXIT_OK, EXIT_VALIDATION
from domain.models import Scene, SceneGraph
from domain.schemas import (
    GraphDocument,
    GraphFileDocument,
    LayoutDocument,
    LayoutFileDocument,
    SceneValidationDocument,
    TripletSampleDocument,
    TripletSampleFileDocument,
    ValidationFileDocument,
)
from repositories.files import dump_document
from repositories.graph_repository import GraphRepository, graph_to_document, lcm_to_document, report_to_document
from repositories.scene_repository import SceneRepository
from services.alignment import procrustes_align
from services.geometry import scene_bev_positions
from services.scene_graph_service import SceneGraphService


def get_scene_graph_service() -> SceneGraphService:
    return SceneGraphService()


def _build_one(scene: Scene, delta: float) -> GraphDocument:
    service = get_scene_graph_service()
    graph = service.build_incremental(scene, delta)
    report = service.validate(graph.lcms, scene.object_ids)
    return graph_to_document(graph, report)


def _sample_one(scene: Scene, k: int, seed: int) -> TripletSampleDocument:
    service = get_scene_graph_service()
    lcms = service.sample_random_triplets(scene, k, seed)
    report = service.validate(lcms, scene.object_ids)
    return TripletSampleDocument(
        scene_id=scene.scene_id,
        k=k,
        seed=seed,
        lcms=[lcm_to_document(lcm) for lcm in lcms],
        validation=report_to_document(report),
    )


def _reconstruct_one(graph: SceneGraph, continuous: bool) -> dict[str, list[float]]:
    positions = get_scene_graph_service().reconstruct(graph, use_continuous=continuous)
    return {object_id: [float(c) for c in point] for object_id, point in sorted(positions.items())}


def scenes_by_id(scenes: list[Scene]) -> dict[str, Scene]:
    return {scene.scene_id: scene for scene in scenes}


def cmd_build_graph(config: RunConfig) -> int:
    """Write one incremental scene graph plus validation report per scene."""
    scene_repository = SceneRepository()
    scenes = scene_repository.load_many(config.scenes)
    graphs = parallel_map(partial(_build_one, delta=config.delta), scenes, config.jobs)

    document = GraphFileDocument(metadata=build_metadata(config, [scene_repository.digests]), graphs=graphs)
    emit_output(dump_document(document), config.out, "graph")
    failed = [g.scene_id for g in graphs if g.validation is not None and not g.validation.rigid]
    if failed:
        print(f"graph validation failed for: {', '.join(failed)}", file=sys.stderr)
        return EXIT_VALIDATION
    return EXIT_OK


def cmd_validate(config: RunConfig) -> int:
    """Report connectivity and rigidity of every graph in --graph."""
    graph_repository = GraphRepository()
    scene_repository = SceneRepository()
    graphs = graph_repository.load(config.graph or "")
    scenes = scenes_by_id(scene_repository.load_many(config.scenes))
    service = get_scene_graph_service()

    reports: list[SceneValidationDocument] = []
    rigid = True
    for graph in graphs:
        object_ids = graph.object_ids()
        if graph.scene_id in scenes:
            object_ids |= set(scenes[graph.scene_id].object_ids)
        report = service.validate(graph.lcms, object_ids)
        rigid = rigid and report.rigid
        reports.append(SceneValidationDocument(scene_id=graph.scene_id, validation=report_to_document(report)))
        print(
            f"{graph.scene_id}: connected={report.connected} rigid={report.rigid} stalled_at={report.stalled_at}",
            file=sys.stderr,
        )

    metadata = build_metadata(config, [graph_repository.digests, scene_repository.digests])
    document = ValidationFileDocument(metadata=metadata, reports=reports)
    emit_output(dump_document(document), config.out, "validation")
    return EXIT_OK if rigid else EXIT_VALIDATION


def cmd_reconstruct(config: RunConfig) -> int:
    """Recover BEV layouts; with --scene, report the similarity-aligned residual."""
    graph_repository = GraphRepository()
    scene_repository = SceneRepository()
    graphs = graph_repository.load(config.graph or "")
    scenes = scenes_by_id(scene_repository.load_many(config.scenes))
    continuous = config.mode == "continuous"
    layouts = parallel_map(partial(_reconstruct_one, continuous=continuous), graphs, config.jobs)

    documents = []
    for graph, positions in zip(graphs, layouts, strict=True):
        residual = None
        reference = scenes.get(graph.scene_id)
        if reference is not None:
            truth = scene_bev_positions(reference)
            _, residual = procrustes_align(positions, {i: truth[i] for i in positions if i in truth})
            print(f"{graph.scene_id}: residual={residual:.6g} mode={config.mode}", file=sys.stderr)
        documents.append(
            LayoutDocument(scene_id=graph.scene_id, mode=config.mode, positions=positions, residual=residual)
        )

    metadata = build_metadata(config, [graph_repository.digests, scene_repository.digests])
    emit_output(dump_document(LayoutFileDocument(metadata=metadata, layouts=documents)), config.out, "layout")
    return EXIT_OK


def cmd_sample_triplets(config: RunConfig) -> int:
    """Random-triplet baseline: sample k LocalCogMaps per scene and validate them."""
    scene_repository = SceneRepository()
    scenes = scene_repository.load_many(config.scenes)
    samples = parallel_map(partial(_sample_one, k=config.k, seed=config.seed), scenes, config.jobs)
    for sample in samples:
        report = sample.validation
        print(
            f"{sample.scene_id}: k={sample.k} connected={report.connected} "
            f"rigid={report.rigid} components={len(report.components)}",
            file=sys.stderr,
        )
    document = TripletSampleFileDocument(metadata=build_metadata(config, [scene_repository.digests]), samples=samples)
    emit_output(dump_document(document), config.out, "triplet sample")
    return EXIT_OK


def register(
    subparsers: "argparse._SubParsersAction[argparse.ArgumentParser]",
    common: argparse.ArgumentParser,
) -> None:
    build = subparsers.add_parser("build-graph", parents=[common], help="Incremental scene graph generation")
    build.add_argument("--scene", dest="scenes", nargs="+", required=True, help="Scene JSON file(s)")
    build.add_argument("--delta", type=float, help="Initial-triplet distance threshold in meters")
    build.set_defaults(command="build-graph", handler=cmd_build_graph)

    validate = subparsers.add_parser("validate", parents=[common], help="Check graph connectivity and rigidity")
    validate.add_argument("--graph", required=True, help="Graph JSON file")
    validate.add_argument("--scene", dest="scenes", nargs="+", help="Scenes whose objects must all be placed")
    validate.set_defaults(command="validate", handler=cmd_validate)

    reconstruct = subparsers.add_parser("reconstruct", parents=[common], help="Recover BEV layouts from rigid graphs")
    reconstruct.add_argument("--graph", required=True, help="Graph JSON file")
    reconstruct.add_argument("--scene", dest="scenes", nargs="+", help="Reference scenes for the residual")
    reconstruct.add_argument("--mode", choices=["continuous", "quantized"], help="Decode continuous or grid targets")
    reconstruct.set_defaults(command="reconstruct", handler=cmd_reconstruct)

    sample = subparsers.add_parser("sample-triplets", parents=[common], help="Random-triplet graphs (failure-mode demo)")
    sample.add_argument("--scene", dest="scenes", nargs="+", required=True, help="Scene JSON file(s)")
    sample.add_argument("--k", type=int, help="Triplets per scene")
    sample.set_defaults(command="sample-triplets", handler=cmd_sample_triplets)
