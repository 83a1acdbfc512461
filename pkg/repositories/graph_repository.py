"""Graph, LocalCogMap and validation report JSON codecs."""

import json
from pathlib import Path
from typing import Any

from pydantic import ValidationError

from core.errors import GraphFormatError
from domain.models import GridCoord, LocalCogMap, SceneGraph, ValidationReport
from domain.schemas import GraphDocument, LocalCogMapDocument, ValidationDocument
from repositories.files import FileRepository


def lcm_to_document(lcm: LocalCogMap) -> LocalCogMapDocument:
    return LocalCogMapDocument(
        anchor_a=lcm.anchor_a_id,
        anchor_b=lcm.anchor_b_id,
        target=lcm.target_id,
        target_grid=list(lcm.target_grid.as_tuple()),
        target_grid_continuous=list(lcm.target_grid_continuous),
        out_of_grid=lcm.out_of_grid,
    )


def lcm_from_document(document: LocalCogMapDocument) -> LocalCogMap:
    u, v = document.target_grid
    x, y = document.target_grid_continuous
    return LocalCogMap(
        anchor_a_id=document.anchor_a,
        anchor_b_id=document.anchor_b,
        target_id=document.target,
        target_grid=GridCoord(u=u, v=v),
        target_grid_continuous=(x, y),
        out_of_grid=document.out_of_grid,
    )


def lcm_to_dict(lcm: LocalCogMap) -> dict[str, Any]:
    """LocalCogMap JSON object."""
    return lcm_to_document(lcm).model_dump(mode="json")


def lcm_from_dict(data: dict[str, Any]) -> LocalCogMap:
    """
    Raises:
        GraphFormatError: If the object is not a valid LocalCogMap
    """
    try:
        return lcm_from_document(LocalCogMapDocument.model_validate(data))
    except ValidationError as exc:
        raise GraphFormatError(f"invalid LocalCogMap: {exc.errors()[0]['msg']}", lcm=data) from exc


def report_to_document(report: ValidationReport) -> ValidationDocument:
    return ValidationDocument(
        connected=report.connected,
        rigid=report.rigid,
        components=[list(c) for c in report.components],
        stalled_at=report.stalled_at,
        seed=report.seed,
        placed_count=report.placed_count,
    )


def graph_to_document(graph: SceneGraph, report: ValidationReport | None = None) -> GraphDocument:
    return GraphDocument(
        scene_id=graph.scene_id,
        delta=graph.delta,
        placement_order=list(graph.placement_order),
        lcms=[lcm_to_document(lcm) for lcm in graph.lcms],
        validation=report_to_document(report) if report is not None else None,
    )


def graph_from_document(document: GraphDocument) -> SceneGraph:
    return SceneGraph(
        scene_id=document.scene_id,
        delta=document.delta,
        placement_order=tuple(document.placement_order),
        lcms=tuple(lcm_from_document(lcm) for lcm in document.lcms),
    )


def parse_graphs(data: bytes) -> list[SceneGraph]:
    """
    Parse a graph file: either the CLI output (``{"metadata", "graphs"}``) or a
    single bare graph object, e.g. a hand-built one.

    Raises:
        GraphFormatError: On malformed JSON or an invalid graph
    """
    try:
        raw = json.loads(data.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise GraphFormatError(f"graph file is not valid UTF-8 JSON: {exc}") from exc
    entries = raw.get("graphs") if isinstance(raw, dict) and "graphs" in raw else [raw]
    if not isinstance(entries, list):
        raise GraphFormatError("'graphs' must be a list")

    graphs = []
    for index, entry in enumerate(entries):
        try:
            graphs.append(graph_from_document(GraphDocument.model_validate(entry)))
        except ValidationError as exc:
            first = exc.errors()[0]
            field = ".".join(str(part) for part in first["loc"])
            raise GraphFormatError(
                f"invalid graph #{index}: {field or '<root>'}: {first['msg']}",
                graph_index=index,
                field=field,
            ) from exc
    return graphs


class GraphRepository(FileRepository):
    """Loads graph files."""

    def load(self, path: str | Path) -> list[SceneGraph]:
        graphs = parse_graphs(self.read(path, "graph"))
        self.logger.debug("Graphs loaded", path=str(path), count=len(graphs))
        return graphs
