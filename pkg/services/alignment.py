"""Least-squares similarity alignment of 2D layouts (Umeyama, reflections excluded)."""

from collections.abc import Mapping, Sequence

import numpy as np

from core.config import DEGENERACY_EPS
from core.errors import AlignmentError
from domain.base import DomainModel


class SimilarityTransform(DomainModel):
    """x ↦ scale · R(angle) · x + translation."""

    scale: float
    angle: float
    translation: tuple[float, float]

    def rotation(self) -> np.ndarray:
        c, s = np.cos(self.angle), np.sin(self.angle)
        return np.array([[c, -s], [s, c]])

    def apply(self, points: np.ndarray) -> np.ndarray:
        return self.scale * (np.asarray(points, dtype=float) @ self.rotation().T) + np.asarray(self.translation)


def _stack(layout: Mapping[str, Sequence[float]], ids: list[str]) -> np.ndarray:
    return np.array([np.asarray(layout[i], dtype=float) for i in ids]).reshape(-1, 2)


def procrustes_align(
    layout_a: Mapping[str, Sequence[float]],
    layout_b: Mapping[str, Sequence[float]],
) -> tuple[SimilarityTransform, float]:
    """
    Find the similarity mapping ``layout_a`` onto ``layout_b``.

    Returns:
        Tuple of (transform, RMS residual in layout_b units)

    Raises:
        AlignmentError: On mismatched ids, fewer than 2 ids, or a zero-variance layout
    """
    if set(layout_a) != set(layout_b):
        raise AlignmentError(
            "layouts must cover the same ids",
            only_in_a=sorted(set(layout_a) - set(layout_b)),
            only_in_b=sorted(set(layout_b) - set(layout_a)),
        )
    ids = sorted(layout_a)
    if len(ids) < 2:
        raise AlignmentError("alignment needs at least 2 points", count=len(ids))

    source = _stack(layout_a, ids)
    target = _stack(layout_b, ids)
    source_mean = source.mean(axis=0)
    target_mean = target.mean(axis=0)
    source_centered = source - source_mean
    target_centered = target - target_mean

    source_var = float((source_centered**2).sum(axis=1).mean())
    target_var = float((target_centered**2).sum(axis=1).mean())
    if source_var < DEGENERACY_EPS**2 or target_var < DEGENERACY_EPS**2:
        raise AlignmentError("layout points all coincide", source_var=source_var, target_var=target_var)

    covariance = target_centered.T @ source_centered / len(ids)
    u, s, vh = np.linalg.svd(covariance)

    # deal with reflection
    e = np.ones(2)
    if np.linalg.det(u) * np.linalg.det(vh) < 0:
        e[-1] = -1
    rotation = u @ np.diag(e) @ vh
    scale = float((s * e).sum() / source_var)
    translation = target_mean - scale * rotation @ source_mean

    transform = SimilarityTransform(
        scale=scale,
        angle=float(np.arctan2(rotation[1, 0], rotation[0, 0])),
        translation=(float(translation[0]), float(translation[1])),
    )
    residuals = transform.apply(source) - target
    rms = float(np.sqrt((residuals**2).sum(axis=1).mean()))
    return transform, rms
