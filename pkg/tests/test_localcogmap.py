"""Test the LocalCogMap triplet codec and the scene-wide grid."""

import math

import numpy as np
import pytest

from core.errors import CoincidentAnchorsError, GraphFormatError, NonFiniteError
from domain.models import GridCoord, LocalCogMap
from repositories.graph_repository import lcm_from_dict, lcm_to_dict
from services.localcogmap import decode_target, encode_global_cogmap, encode_triplet, quantize

IDS = ("a", "b", "t")


def test_worked_example():
    """Test anchors (0, 0), (0, −2) put a target at (2, −2) in cell [7, 3]."""
    lcm = encode_triplet((0.0, 0.0), (0.0, -2.0), (2.0, -2.0), IDS)

    assert lcm.target_grid == GridCoord(u=7, v=3)
    assert lcm.target_grid_continuous == pytest.approx((7.0, 3.0))
    assert lcm.out_of_grid is False
    assert lcm.anchor_a_grid.as_tuple() == (5, 5)
    assert lcm.anchor_b_grid.as_tuple() == (5, 3)


def test_far_target_is_clamped_and_flagged():
    """Test a target at (20, 0) clamps to [9, 5] and is flagged."""
    lcm = encode_triplet((0.0, 0.0), (0.0, -2.0), (20.0, 0.0), IDS)

    assert lcm.target_grid.as_tuple() == (9, 5)
    assert lcm.out_of_grid is True


def test_anchors_decode_to_their_cells():
    """Test anchor positions encode to (5, 5) and (5, 3)."""
    a, b = (1.5, -0.5), (4.0, 2.0)

    assert encode_triplet(a, b, a, IDS).target_grid.as_tuple() == (5, 5)
    assert encode_triplet(a, b, b, IDS).target_grid.as_tuple() == (5, 3)


def test_coincident_anchors_rejected():
    """Test anchors closer than the degeneracy tolerance."""
    with pytest.raises(CoincidentAnchorsError):
        encode_triplet((1.0, 1.0), (1.0, 1.0), (2.0, 2.0), IDS)


@pytest.mark.parametrize(
    ("continuous", "expected", "flagged"),
    [
        ((4.5, 5.5), (5, 6), False),
        ((9.4, 0.0), (9, 0), True),
        ((8.6, 0.0), (9, 0), False),
        ((7.5, 2.49), (8, 2), False),
        ((9.6, 5.0), (9, 5), True),
        ((-0.4, 5.0), (0, 5), True),
        ((-0.5, 3.0), (0, 3), True),
        ((0.0, 9.0), (0, 9), False),
    ],
)
def test_quantize(continuous, expected, flagged):
    """Test half-away-from-zero rounding, clamping and the out-of-grid flag."""
    grid, out_of_grid = quantize(continuous)

    assert grid.as_tuple() == expected
    assert out_of_grid is flagged


def test_quantize_rejects_non_finite():
    """Test NaN coordinates are refused."""
    with pytest.raises(NonFiniteError):
        quantize((math.nan, 1.0))


def test_lcm_rejects_repeated_ids():
    """Test anchor and target ids must differ."""
    with pytest.raises(ValueError):
        LocalCogMap(
            anchor_a_id="a",
            anchor_b_id="a",
            target_id="t",
            target_grid=GridCoord(u=5, v=5),
            target_grid_continuous=(5.0, 5.0),
            out_of_grid=False,
        )


def test_lcm_rejects_inconsistent_grid():
    """Test the stored cell must match the continuous position."""
    with pytest.raises(ValueError):
        LocalCogMap(
            anchor_a_id="a",
            anchor_b_id="b",
            target_id="t",
            target_grid=GridCoord(u=2, v=2),
            target_grid_continuous=(5.0, 5.0),
            out_of_grid=False,
        )


def test_continuous_round_trip():
    """Test decoding the continuous target recovers the input within 1e-9 m."""
    rng = np.random.default_rng(3)
    for _ in range(500):
        a, b, t = rng.uniform(-10, 10, size=(3, 2))
        if np.linalg.norm(a - b) < 1e-3:
            continue
        lcm = encode_triplet(a, b, t, IDS)
        np.testing.assert_allclose(decode_target(lcm, a, b, continuous=True), t, atol=1e-9)


def test_quantized_decode_error_bound():
    """Test in-grid targets decode within half a cell diagonal."""
    rng = np.random.default_rng(5)
    checked = 0
    for _ in range(10_000):
        a, b = rng.uniform(-5, 5, size=(2, 2))
        separation = float(np.linalg.norm(a - b))
        if separation < 1e-3:
            continue
        t = a + rng.uniform(-2.5, 2.5, size=2) * separation
        lcm = encode_triplet(a, b, t, IDS)
        if lcm.out_of_grid:
            continue
        cell = separation / 2
        error = float(np.linalg.norm(decode_target(lcm, a, b) - t))
        assert error <= cell * math.sqrt(2) / 2 + 1e-9
        checked += 1
    assert checked > 1000


def test_similarity_equivariance():
    """Test rotating, scaling and translating all three points keeps the cell."""
    rng = np.random.default_rng(9)
    for _ in range(200):
        a, b, t = rng.uniform(-5, 5, size=(3, 2))
        if np.linalg.norm(a - b) < 1e-2:
            continue
        angle, scale = rng.uniform(-math.pi, math.pi), rng.uniform(0.2, 5.0)
        shift = rng.uniform(-20, 20, size=2)
        rot = np.array([[math.cos(angle), -math.sin(angle)], [math.sin(angle), math.cos(angle)]])

        original = encode_triplet(a, b, t, IDS)
        moved = encode_triplet(*(scale * rot @ p + shift for p in (a, b, t)), IDS)

        np.testing.assert_allclose(
            moved.target_grid_continuous, original.target_grid_continuous, atol=1e-8
        )
        # rounding may only differ at exact half-cell boundaries
        if not any(abs(c - math.floor(c) - 0.5) < 1e-6 for c in original.target_grid_continuous):
            assert moved.target_grid == original.target_grid


def test_mirror_flips_u():
    """Test reflecting the layout across the anchor line mirrors u about 5."""
    a, b, t = np.array([0.0, 0.0]), np.array([0.0, -2.0]), np.array([1.3, -0.7])
    mirror = np.array([-1.0, 1.0])

    original = encode_triplet(a, b, t, IDS)
    mirrored = encode_triplet(a * mirror, b * mirror, t * mirror, IDS)

    u, v = original.target_grid_continuous
    assert mirrored.target_grid_continuous == pytest.approx((10.0 - u, v))


def test_global_cogmap_spans_grid():
    """Test the larger extent spans cells 0..9."""
    encoded = encode_global_cogmap({"p": (0.0, 0.0), "q": (9.0, 0.0), "r": (0.0, 4.5)})

    assert encoded["p"][0].as_tuple() == (0, 0)
    assert encoded["q"][0].as_tuple() == (9, 0)
    assert encoded["r"][0].as_tuple() == (0, 5)
    assert encoded["r"][1] == pytest.approx((0.0, 4.5))


def test_global_cogmap_single_point():
    """Test a zero-extent layout uses 1 m cells."""
    encoded = encode_global_cogmap({"p": (3.0, 4.0), "q": (3.0, 4.0)})

    assert encoded["p"][0].as_tuple() == (0, 0)
    assert encoded["q"][0].as_tuple() == (0, 0)


def test_lcm_json_object():
    """Test the LocalCogMap JSON field names and that it parses back."""
    lcm = encode_triplet((0.0, 0.0), (0.0, -2.0), (20.0, 0.0), IDS)

    data = lcm_to_dict(lcm)

    assert set(data) == {"anchor_a", "anchor_b", "target", "target_grid", "target_grid_continuous", "out_of_grid"}
    assert data["target_grid"] == [9, 5]
    assert data["out_of_grid"] is True
    assert lcm_from_dict(data) == lcm


def test_lcm_json_object_rejects_bad_cells():
    """Test grid cells outside the 10x10 grid."""
    data = lcm_to_dict(encode_triplet((0.0, 0.0), (0.0, -2.0), (2.0, -2.0), IDS))
    data["target_grid"] = [12, 3]

    with pytest.raises(GraphFormatError):
        lcm_from_dict(data)
