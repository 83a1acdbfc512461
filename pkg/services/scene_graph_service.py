"""Scene graph generation, validation and layout reconstruction over LocalCogMaps."""

import math
from collections.abc import Iterable, Sequence
from itertools import combinations

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components
from scipy.spatial.distance import pdist, squareform

from core.config import DEGENERACY_EPS, EXHAUSTIVE_MAX_OBJECTS
from core.errors import (
    InstanceTooLargeError,
    NonRigidGraphError,
    SceneGraphError,
    TooFewObjectsError,
    UnknownObjectError,
)
from core.logging import LoggingMixin
from domain.models import LocalCogMap, Scene, SceneGraph, ValidationReport
from services.alignment import procrustes_align
from services.geometry import scene_bev_positions
from services.localcogmap import decode_target, encode_triplet

Triplet = tuple[int, int, int]

# Rejection sampling takes over from full enumeration above this many triplets
ENUMERATION_LIMIT = 200_000


class _SceneIndex:
    """Objects of one scene in lexicographic id order, with distances and BEV points."""

    def __init__(self, scene: Scene):
        self.ids = sorted(scene.object_ids)
        by_id = {obj.id: obj for obj in scene.objects}
        centers = np.array([by_id[i].box.center.as_array() for i in self.ids])
        self.dist = squareform(pdist(centers)) if len(self.ids) > 1 else np.zeros((1, 1))
        bev = scene_bev_positions(scene)
        self.bev = np.array([bev[i] for i in self.ids])

    def __len__(self) -> int:
        return len(self.ids)

    def diameter(self, triplet: Triplet) -> float:
        i, j, k = triplet
        return float(max(self.dist[i, j], self.dist[j, k], self.dist[i, k]))

    def separated(self, i: int, j: int) -> bool:
        return bool(np.linalg.norm(self.bev[i] - self.bev[j]) >= DEGENERACY_EPS)

    def assign_roles(self, triplet: Triplet) -> tuple[int, int, int] | None:
        """(anchor A, anchor B, target): smallest two ids anchor unless they coincide in BEV."""
        i, j, k = triplet
        for a, b, t in ((i, j, k), (i, k, j), (j, k, i)):
            if self.separated(a, b):
                return a, b, t
        return None

    def encode(self, anchor_a: int, anchor_b: int, target: int) -> LocalCogMap:
        return encode_triplet(
            self.bev[anchor_a],
            self.bev[anchor_b],
            self.bev[target],
            (self.ids[anchor_a], self.ids[anchor_b], self.ids[target]),
        )


class SceneGraphService(LoggingMixin):
    """Service for LocalCogMap scene graph operations."""

    def build_incremental(self, scene: Scene, delta: float) -> SceneGraph:
        """
        Incremental scene graph generation.

        Seeds the graph with the first δ-compact triplet in lexicographic id order,
        then repeatedly attaches the outside object nearest to the placed set,
        anchored on its two nearest placed objects.

        Args:
            scene: Scene with at least 3 objects
            delta: Maximum pairwise center distance of the initial triplet (meters)

        Returns:
            SceneGraph with N - 2 LocalCogMaps

        Raises:
            TooFewObjectsError: If the scene has fewer than 3 objects
            SceneGraphError: If delta is not positive or every object shares one BEV point
        """
        self.log_operation_start("build_incremental", scene_id=scene.scene_id, delta=delta)
        self._check_inputs(scene, delta)
        index = _SceneIndex(scene)

        initial = self._initial_triplet(index, delta, scene.scene_id)
        lcms = [index.encode(*initial)]
        placed = list(initial)
        outside = np.ones(len(index), dtype=bool)
        outside[placed] = False

        nearest = index.dist[:, placed].min(axis=1)
        while outside.any():
            # argmin returns the lowest index, i.e. the smallest id, on ties
            candidate = int(np.argmin(np.where(outside, nearest, np.inf)))
            anchor_a, anchor_b = self._nearest_anchor_pair(index, candidate, placed)
            lcms.append(index.encode(anchor_a, anchor_b, candidate))
            placed.append(candidate)
            outside[candidate] = False
            nearest = np.minimum(nearest, index.dist[:, candidate])

        graph = SceneGraph(
            scene_id=scene.scene_id,
            delta=delta,
            placement_order=tuple(index.ids[i] for i in placed),
            lcms=tuple(lcms),
        )
        self.log_operation_success(
            "build_incremental",
            scene_id=scene.scene_id,
            lcm_count=len(lcms),
            out_of_grid=sum(lcm.out_of_grid for lcm in lcms),
        )
        return graph

    def exhaustive_triplets(self, scene: Scene, delta: float) -> list[LocalCogMap]:
        """
        Encode every triplet whose max pairwise center distance is within delta.

        Anchors are the two lexicographically smallest ids. Cubic in the object count,
        so scenes above ``EXHAUSTIVE_MAX_OBJECTS`` objects are refused.
        """
        if len(scene.objects) > EXHAUSTIVE_MAX_OBJECTS:
            raise InstanceTooLargeError(
                f"exhaustive enumeration is limited to {EXHAUSTIVE_MAX_OBJECTS} objects",
                scene_id=scene.scene_id,
                object_count=len(scene.objects),
            )
        self._check_inputs(scene, delta)
        index = _SceneIndex(scene)
        triplets = (t for t in combinations(range(len(index)), 3) if index.diameter(t) <= delta)
        return self._encode_all(index, triplets, scene.scene_id)

    def sample_random_triplets(self, scene: Scene, k: int, seed: int) -> list[LocalCogMap]:
        """
        Draw k triplets uniformly without replacement (all of them if k ≥ C(N, 3)).

        Output is in lexicographic triplet order and depends only on (scene, k, seed).
        """
        if k < 1:
            raise SceneGraphError("k must be at least 1", k=k)
        self._check_inputs(scene, 1.0)
        index = _SceneIndex(scene)
        n = len(index)
        total = math.comb(n, 3)
        rng = np.random.default_rng(seed)

        chosen: Iterable[Triplet]
        if k >= total:
            chosen = combinations(range(n), 3)
        elif total <= ENUMERATION_LIMIT:
            every = list(combinations(range(n), 3))
            chosen = [every[i] for i in np.sort(rng.choice(total, size=k, replace=False))]
        else:
            drawn: set[Triplet] = set()
            while len(drawn) < k:
                a, b, c = sorted(int(x) for x in rng.choice(n, size=3, replace=False))
                drawn.add((a, b, c))
            chosen = sorted(drawn)

        lcms = self._encode_all(index, chosen, scene.scene_id)
        self.logger.info("Sampled random triplets", scene_id=scene.scene_id, k=k, seed=seed, total=total)
        return lcms

    def validate(self, lcms: Sequence[LocalCogMap], object_ids: Iterable[str]) -> ValidationReport:
        """
        Check connectivity and rigidity of a set of LocalCogMaps.

        Connected: the id-triples, read as hyperedges, join every object into one
        component. Rigid: starting from some LCM, repeatedly placing the target of
        any LCM whose two anchors are placed reaches every object.

        Raises:
            UnknownObjectError: If an LCM references an id outside object_ids
        """
        ids = sorted(set(object_ids))
        known = set(ids)
        unknown = sorted({i for lcm in lcms for i in lcm.ids} - known)
        if unknown:
            raise UnknownObjectError("LocalCogMaps reference unknown objects", unknown_ids=unknown)

        components = self._components(lcms, ids)

        best_seed: int | None = None
        best_placed = 0
        best_applied: list[bool] = []
        for seed in range(len(lcms)):
            placed, applied = self._simulate_placement(lcms, seed)
            if len(placed) > best_placed:
                best_seed, best_placed, best_applied = seed, len(placed), applied
            if len(placed) == len(ids):
                break

        rigid = bool(ids) and best_placed == len(ids)
        stalled_at: int | None = None
        if not rigid:
            stalled_at = next((i for i, done in enumerate(best_applied) if not done), len(lcms))
        report = ValidationReport(
            connected=len(components) == 1,
            rigid=rigid,
            components=components,
            stalled_at=stalled_at,
            seed=best_seed,
            placed_count=best_placed,
        )
        if not rigid:
            self.log_validation_error(
                "validate",
                ["graph is not rigid" if report.connected else "graph is disconnected"],
                components=len(components),
                stalled_at=stalled_at,
            )
        return report

    def reconstruct(self, graph: SceneGraph, use_continuous: bool = True) -> dict[str, np.ndarray]:
        """
        Recover a BEV layout from a rigid graph, up to one global similarity.

        The seeding LCM's anchor A is placed at (0, 0) and anchor B at (0, -2), i.e.
        one grid cell per meter; every other target is decoded from placed anchors.

        Raises:
            NonRigidGraphError: If the graph does not validate as rigid
        """
        report = self.validate(graph.lcms, graph.object_ids())
        if not report.rigid or report.seed is None:
            raise NonRigidGraphError(
                "graph is not rigid; layout cannot be reconstructed",
                scene_id=graph.scene_id,
                stalled_at=report.stalled_at,
                connected=report.connected,
            )

        seed_lcm = graph.lcms[report.seed]
        positions: dict[str, np.ndarray] = {
            seed_lcm.anchor_a_id: np.array([0.0, 0.0]),
            seed_lcm.anchor_b_id: np.array([0.0, -2.0]),
        }
        positions[seed_lcm.target_id] = self._decode(seed_lcm, positions, use_continuous)

        pending = [lcm for i, lcm in enumerate(graph.lcms) if i != report.seed]
        while pending:
            remaining = []
            for lcm in pending:
                if lcm.anchor_a_id in positions and lcm.anchor_b_id in positions:
                    if lcm.target_id not in positions:
                        positions[lcm.target_id] = self._decode(lcm, positions, use_continuous)
                else:
                    remaining.append(lcm)
            if len(remaining) == len(pending):
                raise AssertionError("rigid graph left LocalCogMaps without placed anchors")
            pending = remaining
        return positions

    def quantization_error(self, graph: SceneGraph, scene: Scene) -> float:
        """Procrustes residual of the quantized reconstruction against the true BEV layout (meters)."""
        layout = self.reconstruct(graph, use_continuous=False)
        truth = scene_bev_positions(scene)
        _, residual = procrustes_align(layout, {i: truth[i] for i in layout})
        return residual

    def _check_inputs(self, scene: Scene, delta: float) -> None:
        if len(scene.objects) < 3:
            raise TooFewObjectsError(
                f"scene {scene.scene_id!r} has fewer than 3 objects",
                scene_id=scene.scene_id,
                object_count=len(scene.objects),
            )
        if not delta > 0:
            raise SceneGraphError("delta must be positive", delta=delta)

    def _initial_triplet(self, index: _SceneIndex, delta: float, scene_id: str) -> tuple[int, int, int]:
        fallback: tuple[int, int, int] | None = None
        fallback_diameter = math.inf
        for triplet in combinations(range(len(index)), 3):
            roles = index.assign_roles(triplet)
            if roles is None:
                continue
            diameter = index.diameter(triplet)
            if diameter <= delta:
                return roles
            if diameter < fallback_diameter:
                fallback, fallback_diameter = roles, diameter
        if fallback is None:
            raise SceneGraphError("all objects share one BEV position", scene_id=scene_id)
        self.logger.warning(
            "No triplet within delta; seeding with the most compact triplet",
            scene_id=scene_id,
            delta=delta,
            diameter=round(fallback_diameter, 6),
        )
        return fallback

    def _nearest_anchor_pair(self, index: _SceneIndex, target: int, placed: list[int]) -> tuple[int, int]:
        ranked = sorted(placed, key=lambda v: (index.dist[target, v], v))
        if index.separated(ranked[0], ranked[1]):
            return ranked[0], ranked[1]
        pairs = (
            (a, b)
            for a, b in combinations(ranked, 2)
            if index.separated(a, b)
        )
        best = min(
            pairs,
            key=lambda p: (index.dist[target, p[0]] + index.dist[target, p[1]], p[0], p[1]),
            default=None,
        )
        if best is None:
            raise SceneGraphError("placed objects share one BEV position")
        a, b = best
        # nearer anchor takes cell (5, 5)
        return (a, b) if (index.dist[target, a], a) <= (index.dist[target, b], b) else (b, a)

    def _encode_all(self, index: _SceneIndex, triplets: Iterable[Triplet], scene_id: str) -> list[LocalCogMap]:
        lcms = []
        for triplet in triplets:
            roles = index.assign_roles(triplet)
            if roles is None:
                self.logger.info(
                    "Skipping triplet with coincident BEV positions",
                    scene_id=scene_id,
                    ids=[index.ids[i] for i in triplet],
                )
                continue
            lcms.append(index.encode(*roles))
        return lcms

    @staticmethod
    def _components(lcms: Sequence[LocalCogMap], ids: list[str]) -> tuple[tuple[str, ...], ...]:
        if not ids:
            return ()
        position = {object_id: i for i, object_id in enumerate(ids)}
        rows, cols = [], []
        for lcm in lcms:
            a, b, t = (position[i] for i in lcm.ids)
            rows += [a, a]
            cols += [b, t]
        adjacency = coo_matrix((np.ones(len(rows)), (rows, cols)), shape=(len(ids), len(ids)))
        _, labels = connected_components(adjacency, directed=False)
        groups: dict[int, list[str]] = {}
        for object_id, label in zip(ids, labels, strict=True):
            groups.setdefault(int(label), []).append(object_id)
        return tuple(sorted(tuple(group) for group in groups.values()))

    @staticmethod
    def _simulate_placement(lcms: Sequence[LocalCogMap], seed: int) -> tuple[set[str], list[bool]]:
        placed = set(lcms[seed].ids)
        applied = [False] * len(lcms)
        applied[seed] = True
        changed = True
        while changed:
            changed = False
            for i, lcm in enumerate(lcms):
                if not applied[i] and lcm.anchor_a_id in placed and lcm.anchor_b_id in placed:
                    applied[i] = True
                    placed.add(lcm.target_id)
                    changed = True
        return placed, applied

    @staticmethod
    def _decode(lcm: LocalCogMap, positions: dict[str, np.ndarray], use_continuous: bool) -> np.ndarray:
        return decode_target(
            lcm,
            positions[lcm.anchor_a_id],
            positions[lcm.anchor_b_id],
            continuous=use_continuous,
        )
