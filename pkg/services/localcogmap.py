"""LocalCogMap codec: anchor/anchor/target triplets on the 10×10 BEV grid.

Grid convention: anchor A sits at (5, 5) and anchor B at (5, 3), so one grid cell
is half the anchor separation. +v points from B toward A; +u is +v turned 90°
clockwise, which keeps (u, v) positively oriented.
"""

import math
from collections.abc import Mapping, Sequence

import numpy as np

from core.config import ANCHOR_A_CELL, ANCHOR_B_CELL, DEGENERACY_EPS, GRID_MAX
from core.errors import CoincidentAnchorsError, NonFiniteError
from domain.models import (
    BEVPoint,
    GridCoord,
    LocalCogMap,
    clamp_cell,
    outside_grid,
)

ANCHOR_SPAN_CELLS = ANCHOR_A_CELL[1] - ANCHOR_B_CELL[1]


def _grid_frame(anchor_a: np.ndarray, anchor_b: np.ndarray) -> tuple[float, np.ndarray, np.ndarray]:
    """Return (cell size, û, v̂) for two anchors."""
    offset = anchor_a - anchor_b
    separation = float(np.linalg.norm(offset))
    if separation < DEGENERACY_EPS:
        raise CoincidentAnchorsError(
            "anchors coincide in the ground plane",
            separation=separation,
        )
    v_hat = offset / separation
    u_hat = np.array([v_hat[1], -v_hat[0]])
    return separation / ANCHOR_SPAN_CELLS, u_hat, v_hat


def quantize(continuous: Sequence[float]) -> tuple[GridCoord, bool]:
    """Round half away from zero, clamp to [0, 9]; flag continuous values outside the grid."""
    u, v = (float(c) for c in continuous)
    if not (math.isfinite(u) and math.isfinite(v)):
        raise NonFiniteError("grid coordinates must be finite", value=[u, v])
    return GridCoord(u=clamp_cell(u), v=clamp_cell(v)), outside_grid((u, v))


def encode_triplet(
    anchor_a: Sequence[float],
    anchor_b: Sequence[float],
    target: Sequence[float],
    ids: tuple[str, str, str],
) -> LocalCogMap:
    """
    Encode a target's BEV position relative to two anchors.

    Args:
        anchor_a: BEV point of anchor A (grid cell (5, 5))
        anchor_b: BEV point of anchor B (grid cell (5, 3))
        target: BEV point of the target
        ids: (anchor A id, anchor B id, target id)

    Raises:
        CoincidentAnchorsError: If the anchors are closer than ``DEGENERACY_EPS``
    """
    p_a = np.asarray(anchor_a, dtype=float)
    cell, u_hat, v_hat = _grid_frame(p_a, np.asarray(anchor_b, dtype=float))
    offset = np.asarray(target, dtype=float) - p_a
    continuous = (
        ANCHOR_A_CELL[0] + float(offset @ u_hat) / cell,
        ANCHOR_A_CELL[1] + float(offset @ v_hat) / cell,
    )
    grid, out_of_grid = quantize(continuous)
    return LocalCogMap(
        anchor_a_id=ids[0],
        anchor_b_id=ids[1],
        target_id=ids[2],
        target_grid=grid,
        target_grid_continuous=continuous,
        out_of_grid=out_of_grid,
    )


def decode_target(
    lcm: LocalCogMap,
    anchor_a: Sequence[float],
    anchor_b: Sequence[float],
    continuous: bool = False,
) -> np.ndarray:
    """Invert ``encode_triplet``: BEV position of the target given both anchors."""
    p_a = np.asarray(anchor_a, dtype=float)
    cell, u_hat, v_hat = _grid_frame(p_a, np.asarray(anchor_b, dtype=float))
    u, v = lcm.target_grid_continuous if continuous else lcm.target_grid.as_tuple()
    return p_a + cell * ((u - ANCHOR_A_CELL[0]) * u_hat + (v - ANCHOR_A_CELL[1]) * v_hat)


def encode_global_cogmap(positions: Mapping[str, Sequence[float]]) -> dict[str, tuple[GridCoord, BEVPoint]]:
    """
    Project a whole layout onto one 10×10 grid (the scene-wide baseline).

    The larger of the x/y extents spans cells 0..9; a single-point layout uses 1 m cells.
    """
    points = np.array([np.asarray(p, dtype=float) for p in positions.values()]).reshape(-1, 2)
    lower = points.min(axis=0)
    extent = float((points.max(axis=0) - lower).max())
    cell = extent / GRID_MAX if extent > DEGENERACY_EPS else 1.0
    encoded: dict[str, tuple[GridCoord, BEVPoint]] = {}
    for object_id, point in zip(positions, points, strict=True):
        u, v = ((point - lower) / cell).tolist()
        grid, _ = quantize((u, v))
        encoded[object_id] = (grid, (float(u), float(v)))
    return encoded
