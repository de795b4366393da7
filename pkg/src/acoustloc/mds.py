"""Configuration recovery from squared-distance matrices.

Two solvers: classical (spectral) multidimensional scaling for complete
noise-free matrices, and weighted s-stress minimization for the realistic
case of noisy, partially missing measurements. The s-stress objective

    cost(X) = sum_ij w_ij (||x_i - x_j||^2 - dsq_ij)^2

is a quartic polynomial in every single coordinate, so cyclic coordinate
descent can take exact scalar steps: each update solves the cubic first-order
condition in closed form and keeps the best real root. Output configurations
are determined only up to rotation, reflection and translation.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import shortest_path

from .edm import Edm, PointConfig, centering_matrix, gram_matrix


class NotEdmError(ValueError):
    """Input matrix is not a Euclidean distance matrix."""


class UnderConstrainedError(ValueError):
    """Too few measured pairs to pin the configuration down."""


@dataclass
class SStressProblem:
    """Weighted s-stress instance: target squared distances, weights, dim.

    Weights are non-negative, zero on the diagonal and zero wherever the
    target mask is invalid, so masked-off entries can never influence the
    cost.
    """

    target: Edm
    weights: np.ndarray
    dim: int = 2

    def __post_init__(self) -> None:
        w = np.asarray(self.weights, dtype=np.float64)
        n = self.target.n_points
        if w.shape != (n, n):
            raise ValueError("weight matrix must match the target EDM")
        if np.any(w < 0):
            raise ValueError("weights must be non-negative")
        if np.any(w.diagonal() != 0):
            raise ValueError("diagonal weights must be zero")
        if np.any(w[~self.target.mask] != 0):
            raise ValueError("weights on masked-off pairs must be zero")
        if self.dim not in (2, 3):
            raise ValueError("embedding dimension must be 2 or 3")
        self.weights = w


@dataclass(frozen=True)
class SolverSettings:
    """Iteration budget, relative-improvement stop, and initialization.

    ``init`` is "classical" (spectral start on the shortest-path completed
    matrix) or "random" (seeded uniform box).
    """

    max_iters: int = 500
    rel_tol: float = 1e-8
    init: str = "classical"
    seed: int = 0

    def __post_init__(self) -> None:
        if self.max_iters < 1:
            raise ValueError("need at least one sweep")
        if self.rel_tol < 0:
            raise ValueError("relative tolerance must be non-negative")
        if self.init not in ("classical", "random"):
            raise ValueError("init must be 'classical' or 'random'")


def classical_mds(d: Edm, dim: int, tol: float = 1e-9) -> PointConfig:
    """Spectral embedding of a complete EDM into ``dim`` coordinates.

    Takes the top ``dim`` eigenpairs of the centered Gram matrix and scales
    eigenvectors by root eigenvalues. The output is centered at the origin;
    orientation is whatever the eigendecomposition produced. Raises
    NotEdmError if a leading eigenvalue is negative beyond tolerance, since
    then no Euclidean configuration reproduces the input.
    """
    if not d.complete:
        raise ValueError("classical MDS needs a complete EDM")
    n = d.n_points
    if n < dim + 1:
        raise ValueError("need at least dim + 1 points")
    g = gram_matrix(d)
    evals, evecs = np.linalg.eigh(g)
    order = np.argsort(evals)[::-1]
    top = evals[order[:dim]]
    vecs = evecs[:, order[:dim]]
    scale = max(float(np.abs(evals).max()), 1e-300)
    if np.any(top < -tol * scale):
        raise NotEdmError("leading Gram eigenvalues are negative: not a Euclidean distance matrix")
    coords = vecs * np.sqrt(np.clip(top, 0.0, None))
    return PointConfig(x=coords)


def sstress_cost(points: PointConfig, prob: SStressProblem) -> float:
    """Weighted squared mismatch between model and target squared distances."""
    x = points.x
    diff = x[:, None, :] - x[None, :, :]
    dsq_model = np.einsum("ijk,ijk->ij", diff, diff)
    resid = dsq_model - prob.target.dsq
    return float(np.sum(prob.weights * resid * resid))


def sstress_gradient(points: PointConfig, prob: SStressProblem) -> np.ndarray:
    """Analytic gradient of the s-stress cost, one row per point."""
    x = points.x
    diff = x[:, None, :] - x[None, :, :]
    dsq_model = np.einsum("ijk,ijk->ij", diff, diff)
    resid = dsq_model - prob.target.dsq
    c = (prob.weights + prob.weights.T) * resid
    return 4.0 * (c.sum(axis=1)[:, None] * x - c @ x)


def _restricted_terms(prob: SStressProblem, x: np.ndarray, point: int, axis: int):
    """Coefficients of the single-coordinate slice of the cost.

    With t the moving coordinate, the slice is sum_j v_j ((t - c_j)^2 + e_j)^2
    over neighbours j, where v folds both weight orientations, c_j is the
    neighbour's coordinate on this axis and e_j the residual cross-axis
    offset against the target.
    """
    v_full = prob.weights[point, :] + prob.weights[:, point]
    idx = np.flatnonzero(v_full > 0)
    v = v_full[idx]
    c = x[idx, axis]
    others = [a for a in range(x.shape[1]) if a != axis]
    r = ((x[point, others] - x[np.ix_(idx, others)]) ** 2).sum(axis=1)
    e = r - prob.target.dsq[point, idx]
    return v, c, e


def _restricted_cost(t: float, v: np.ndarray, c: np.ndarray, e: np.ndarray) -> float:
    q = (t - c) ** 2 + e
    return float(np.sum(v * q * q))


def coordinate_update(prob: SStressProblem, current: PointConfig, point: int, axis: int) -> float:
    """Exact minimizer of the cost along one coordinate of one point.

    The slice is an upward quartic, so its stationary points are the real
    roots of a cubic; the root with the lowest slice cost wins, with ties
    broken toward the current value. Points with no positively weighted
    neighbour keep their coordinate.
    """
    x = current.x
    t0 = float(x[point, axis])
    v, c, e = _restricted_terms(prob, x, point, axis)
    if v.size == 0:
        return t0
    s0 = float(v.sum())
    s1 = float((v * c).sum())
    s2 = float((v * c * c).sum())
    s3 = float((v * c * c * c).sum())
    e0 = float((v * e).sum())
    e1 = float((v * e * c).sum())
    # derivative/4 = s0 t^3 - 3 s1 t^2 + (3 s2 + e0) t - (s3 + e1)
    roots = np.roots([s0, -3.0 * s1, 3.0 * s2 + e0, -(s3 + e1)])
    real = roots[np.abs(roots.imag) <= 1e-8 * (1.0 + np.abs(roots.real))].real
    if real.size == 0:
        return t0
    costs = np.array([_restricted_cost(t, v, c, e) for t in real])
    best = float(costs.min())
    if best >= _restricted_cost(t0, v, c, e):
        return t0
    tied = real[costs <= best + 1e-12 * (1.0 + best)]
    return float(tied[np.argmin(np.abs(tied - t0))])


def _spectral_embed(dsq: np.ndarray, dim: int) -> PointConfig:
    """Lenient top-eigenpair embedding used for initialization only."""
    n = dsq.shape[0]
    L = centering_matrix(n)
    g = -0.5 * (L @ dsq @ L)
    g = (g + g.T) / 2.0
    evals, evecs = np.linalg.eigh(g)
    order = np.argsort(evals)[::-1][:dim]
    coords = evecs[:, order] * np.sqrt(np.clip(evals[order], 0.0, None))
    return PointConfig(x=coords)


def _complete_by_shortest_path(target: Edm) -> np.ndarray | None:
    """Fill masked-off squared distances with squared graph distances.

    Measured pairs become edges weighted by plain distance; missing entries
    take the shortest-path length, squared. Returns None when the
    measurement graph is disconnected.
    """
    n = target.n_points
    d = np.sqrt(np.clip(target.dsq, 0.0, None))
    graph = np.where(target.mask, d, 0.0)
    np.fill_diagonal(graph, 0.0)
    sp = shortest_path(csr_matrix(graph), method="D", directed=False)
    if not np.all(np.isfinite(sp)):
        return None
    filled = np.where(target.mask, d, sp)
    filled = (filled + filled.T) / 2.0
    np.fill_diagonal(filled, 0.0)
    return filled**2


def _initial_config(prob: SStressProblem, settings: SolverSettings) -> PointConfig:
    n = prob.target.n_points
    if settings.init == "classical":
        dsq = (
            prob.target.dsq
            if prob.target.complete
            else _complete_by_shortest_path(prob.target)
        )
        if dsq is not None:
            return _spectral_embed(dsq, prob.dim)
        # disconnected measurement graph: fall through to the random box
    rng = np.random.default_rng(settings.seed)
    measured = prob.target.mask & ~np.eye(n, dtype=bool)
    box = float(np.sqrt(max(prob.target.dsq[measured].max(), 0.0))) if measured.any() else 1.0
    box = max(box, 1e-6)
    return PointConfig(x=rng.uniform(0.0, box, size=(n, prob.dim)))


def _check_localizable(prob: SStressProblem) -> None:
    n = prob.target.n_points
    degree = ((prob.weights + prob.weights.T) > 0).sum(axis=1)
    needed = min(prob.dim + 1, n - 1)
    bad = np.flatnonzero(degree < needed)
    if bad.size:
        raise UnderConstrainedError(
            f"points {bad.tolist()} have fewer than {needed} positively weighted pairs"
        )


def sstress_solve(
    prob: SStressProblem,
    settings: SolverSettings | None = None,
    x0: PointConfig | None = None,
) -> tuple[PointConfig, list[float]]:
    """Minimize the s-stress cost by cyclic exact coordinate descent.

    Sweeps points in index order and axes in ascending order within each
    point, recording the cost after every full sweep (the trace starts with
    the initial cost). Stops when the relative per-sweep improvement drops
    below ``rel_tol`` or after ``max_iters`` sweeps. Every scalar step is a
    global minimizer of its slice, so the trace never increases.

    ``x0`` overrides the configured initialization, e.g. to warm-start from
    a known configuration.
    """
    settings = settings or SolverSettings()
    _check_localizable(prob)
    n = prob.target.n_points
    if x0 is not None:
        if x0.x.shape != (n, prob.dim):
            raise ValueError("x0 has the wrong shape for this problem")
        x = x0.x.copy()
    else:
        x = _initial_config(prob, settings).x.copy()

    trace = [sstress_cost(PointConfig(x=x), prob)]
    for _ in range(settings.max_iters):
        for i in range(n):
            for a in range(prob.dim):
                x[i, a] = coordinate_update(prob, PointConfig(x=x), i, a)
        cost = sstress_cost(PointConfig(x=x), prob)
        trace.append(cost)
        prev = trace[-2]
        if prev - cost <= settings.rel_tol * max(prev, 1e-300):
            break
    return PointConfig(x=x.copy()), trace


def sstress_solve_multistart(
    prob: SStressProblem,
    settings: SolverSettings | None = None,
    n_starts: int = 8,
) -> tuple[PointConfig, list[float]]:
    """Run ``sstress_solve`` from several starts and keep the lowest cost.

    Masked problems have genuine spurious minima that any single start,
    classical included, can land in; restarts make recovery reliable. The
    first start uses ``settings`` unchanged, the remaining n_starts - 1 use
    random boxes with seeds derived from ``settings.seed``, so the whole
    procedure stays deterministic.
    """
    if n_starts < 1:
        raise ValueError("need at least one start")
    settings = settings or SolverSettings()
    attempts = [settings]
    attempts += [
        replace(settings, init="random", seed=settings.seed + 1 + k)
        for k in range(n_starts - 1)
    ]
    best: tuple[PointConfig, list[float]] | None = None
    for attempt in attempts:
        est, trace = sstress_solve(prob, attempt)
        if best is None or trace[-1] < best[1][-1]:
            best = (est, trace)
    return best
