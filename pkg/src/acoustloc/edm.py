"""Euclidean distance matrices.

The package works with squared distances throughout: an EDM here stores
d_ij^2, optionally masked where pairs were never measured.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class PointConfig:
    """N points in 2-D or 3-D, one row per point."""

    x: np.ndarray

    def __post_init__(self) -> None:
        x = np.asarray(self.x, dtype=np.float64)
        if x.ndim != 2 or x.shape[0] < 1:
            raise ValueError("point configuration must be a nonempty N x dim array")
        if x.shape[1] not in (2, 3):
            raise ValueError("only 2-D and 3-D configurations are supported")
        if not np.all(np.isfinite(x)):
            raise ValueError("coordinates must be finite")
        object.__setattr__(self, "x", x)

    @property
    def n_points(self) -> int:
        return int(self.x.shape[0])

    @property
    def dim(self) -> int:
        return int(self.x.shape[1])


@dataclass
class Edm:
    """Matrix of squared distances with a validity mask.

    The diagonal is zero and always masked valid; masked-off entries carry
    no meaning and are kept at zero by convention.
    """

    dsq: np.ndarray
    mask: np.ndarray

    def __post_init__(self) -> None:
        dsq = np.asarray(self.dsq, dtype=np.float64)
        mask = np.asarray(self.mask, dtype=bool)
        if dsq.ndim != 2 or dsq.shape[0] != dsq.shape[1] or dsq.shape != mask.shape:
            raise ValueError("EDM must be square with a matching mask")
        if not np.all(mask.diagonal()):
            raise ValueError("diagonal entries are self-distances and must stay valid")
        self.dsq = dsq
        self.mask = mask

    @property
    def n_points(self) -> int:
        return int(self.dsq.shape[0])

    @property
    def complete(self) -> bool:
        return bool(self.mask.all())

    def to_dict(self) -> dict:
        return {"dsq": self.dsq.tolist(), "mask": self.mask.tolist()}

    @classmethod
    def from_dict(cls, data: dict) -> "Edm":
        return cls(dsq=np.asarray(data["dsq"]), mask=np.asarray(data["mask"]))


def edm_from_points(points: PointConfig) -> Edm:
    """Exact squared-distance matrix of a configuration (full mask)."""
    x = points.x
    diff = x[:, None, :] - x[None, :, :]
    dsq = np.einsum("ijk,ijk->ij", diff, diff)
    return Edm(dsq=dsq, mask=np.ones(dsq.shape, dtype=bool))


def centering_matrix(n: int) -> np.ndarray:
    """L = I - (1/n) 1 1^T, the projector removing the centroid."""
    return np.eye(n) - np.ones((n, n)) / n


def gram_matrix(m: Edm) -> np.ndarray:
    """Centered Gram matrix G = -(1/2) L D L of a complete EDM."""
    if not m.complete:
        raise ValueError("Gram matrix needs a complete EDM")
    n = m.n_points
    L = centering_matrix(n)
    g = -0.5 * (L @ m.dsq @ L)
    return (g + g.T) / 2.0  # kill roundoff asymmetry before eigendecomposition


def is_edm(m: Edm, tol: float = 1e-9) -> bool:
    """Schoenberg test: symmetric, hollow, and -L D L positive semidefinite.

    Eigenvalues are accepted down to ``-tol`` times the largest magnitude
    eigenvalue. Masked matrices cannot be tested; complete them first.
    """
    if not m.complete:
        raise ValueError("Schoenberg criterion needs a complete EDM")
    d = m.dsq
    scale = max(float(np.abs(d).max()), 1.0)
    if float(np.abs(d - d.T).max()) > tol * scale:
        return False
    if float(np.abs(np.diagonal(d)).max()) > tol * scale:
        return False
    evals = np.linalg.eigvalsh(2.0 * gram_matrix(m))  # -L D L
    bound = tol * max(float(np.abs(evals).max()), 1e-300)
    return bool(evals.min() >= -bound)


def metric_checks(m: Edm, tol: float = 1e-9) -> list[str]:
    """Report which metric-space properties the masked distances violate.

    Returns a subset of ["non-negativity", "self-distance", "symmetry",
    "triangle inequality"], empty when all checks pass. Only entries with
    valid masks take part; triangle inequalities are checked on distances
    (square roots) over triples whose three pairs are all measured.
    """
    n = m.n_points
    dsq = m.dsq
    mask = m.mask
    scale = max(float(np.abs(dsq[mask]).max()) if mask.any() else 0.0, 1.0)
    violations: list[str] = []

    if np.any(dsq[mask] < -tol * scale):
        violations.append("non-negativity")
    if float(np.abs(np.diagonal(dsq)).max()) > tol * scale:
        violations.append("self-distance")
    both = mask & mask.T
    if np.any(np.abs(dsq - dsq.T)[both] > tol * scale) or not np.array_equal(mask, mask.T):
        violations.append("symmetry")

    d = np.sqrt(np.clip(dsq, 0.0, None))
    dscale = max(float(d[mask].max()) if mask.any() else 0.0, 1.0)
    triangle_ok = True
    for i in range(n):
        for j in range(n):
            if i == j or not mask[i, j]:
                continue
            for k in range(n):
                if k in (i, j) or not (mask[i, k] and mask[k, j]):
                    continue
                if d[i, j] > d[i, k] + d[k, j] + tol * dscale:
                    triangle_ok = False
    if not triangle_ok:
        violations.append("triangle inequality")
    return violations
