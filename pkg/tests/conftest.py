"""Shared synthetic-data builders for the test suite."""
import numpy as np

from acoustloc import DistanceMeasurement, MeasurementSet, PointConfig, edm_from_points
from acoustloc.scenario import PRESETS


def grid6() -> PointConfig:
    return PointConfig(x=np.asarray(PRESETS["grid33"]))


def random_points(rng: np.random.Generator, n: int, dim: int = 2, box: float = 2.0) -> PointConfig:
    return PointConfig(x=rng.uniform(0.0, box, size=(n, dim)))


def half_split_sigma(n: int, sig_lo: float, sig_hi: float, rng: np.random.Generator) -> np.ndarray:
    """Per-pair noise scales with a random half of the pairs at sig_lo."""
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    rng.shuffle(pairs)
    sig = np.zeros((n, n))
    for k, (i, j) in enumerate(pairs):
        s = sig_lo if k < len(pairs) // 2 else sig_hi
        sig[i, j] = sig[j, i] = s
    return sig


def synth_sets(points: PointConfig, m: int, sigma, rng: np.random.Generator) -> MeasurementSet:
    """m noisy distance measurements of a configuration.

    ``sigma`` is a scalar or an N x N matrix of per-pair noise scales;
    noise is drawn i.i.d. per repetition and symmetrized, distances are
    clipped at zero.
    """
    d_true = np.sqrt(edm_from_points(points).dsq)
    n = points.n_points
    sig = np.broadcast_to(np.asarray(sigma, dtype=float), (n, n))
    sets = []
    for _ in range(m):
        noise = rng.normal(0.0, 1.0, (n, n)) * sig
        noise = np.triu(noise, 1)
        noise = noise + noise.T
        d = np.clip(d_true + noise, 0.0, None)
        np.fill_diagonal(d, 0.0)
        sets.append(DistanceMeasurement(d=d, mask=np.ones((n, n), dtype=bool)))
    return MeasurementSet(measurements=sets)


def hetero_experiment(seed: int, m: int = 5, sig_lo: float = 0.01, sig_hi: float = 0.10):
    """One seeded heteroscedastic trial: grid geometry plus m noisy sets."""
    pts = grid6()
    sig = half_split_sigma(6, sig_lo, sig_hi, np.random.default_rng(seed))
    ms = synth_sets(pts, m, sig, np.random.default_rng(10_000 + seed))
    return pts, ms
