"""Scoring estimated configurations against ground truth.

Relative localization fixes geometry only up to rotation, reflection and
translation, so before measuring error the estimate is aligned to the truth
by orthogonal Procrustes (SVD of the centered cross-covariance; reflections
are allowed because they are unobservable from distances).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .edm import PointConfig


@dataclass(frozen=True)
class AlignmentResult:
    """Best rigid map estimate -> truth and the residual errors.

    ``rotation`` is orthogonal (possibly a reflection); a point x maps to
    rotation @ x + translation. ``per_point_error`` holds the residual
    Euclidean distances after alignment and ``mean_error`` their mean.
    """

    rotation: np.ndarray
    translation: np.ndarray
    per_point_error: np.ndarray
    mean_error: float

    def apply(self, x: np.ndarray) -> np.ndarray:
        return np.asarray(x) @ self.rotation.T + self.translation


def align_and_score(estimate: PointConfig, truth: PointConfig) -> AlignmentResult:
    """Align ``estimate`` to ``truth`` and report residuals."""
    if estimate.x.shape != truth.x.shape:
        raise ValueError("estimate and truth must have the same shape")
    a = estimate.x
    b = truth.x
    ca = a.mean(axis=0)
    cb = b.mean(axis=0)
    h = (a - ca).T @ (b - cb)
    u, _, vt = np.linalg.svd(h)
    q = u @ vt  # row convention: centered estimate @ q lands on centered truth
    rotation = q.T
    translation = cb - ca @ q
    aligned = a @ q + translation
    per_point = np.linalg.norm(aligned - b, axis=1)
    return AlignmentResult(
        rotation=rotation,
        translation=translation,
        per_point_error=per_point,
        mean_error=float(per_point.mean()),
    )
