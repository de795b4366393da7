import numpy as np
import pytest

from acoustloc.alignment import align_and_score
from acoustloc.edm import Edm, PointConfig, edm_from_points
from acoustloc.mds import (
    NotEdmError,
    SolverSettings,
    SStressProblem,
    UnderConstrainedError,
    classical_mds,
    coordinate_update,
    sstress_cost,
    sstress_gradient,
    sstress_solve,
    sstress_solve_multistart,
)

from conftest import random_points


def uniform_problem(target: Edm, dim: int = 2) -> SStressProblem:
    w = np.where(target.mask, 1.0, 0.0)
    np.fill_diagonal(w, 0.0)
    return SStressProblem(target=target, weights=w, dim=dim)


# ---------------------------------------------------------------- classical


def test_classical_unit_square_round_trip():
    pts = PointConfig(x=np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]))
    m = edm_from_points(pts)
    rec = classical_mds(m, dim=2)
    assert np.max(np.abs(rec.x.mean(axis=0))) < 1e-9  # centered output
    back = edm_from_points(rec)
    assert np.max(np.abs(back.dsq - m.dsq)) < 1e-9


def test_classical_random_round_trips():
    rng = np.random.default_rng(21)
    for _ in range(30):
        dim = int(rng.choice([2, 3]))
        n = int(rng.integers(dim + 1, 10))
        pts = random_points(rng, n, dim=dim)
        m = edm_from_points(pts)
        back = edm_from_points(classical_mds(m, dim=dim))
        assert np.max(np.abs(back.dsq - m.dsq)) < 1e-9 * max(m.dsq.max(), 1.0)


def test_classical_collinear_collapses_second_axis():
    pts = PointConfig(x=np.array([[0.0, 0.0], [1.0, 0.0], [2.5, 0.0], [4.0, 0.0]]))
    rec = classical_mds(edm_from_points(pts), dim=2)
    assert np.max(np.abs(rec.x[:, 1])) < 1e-6


def test_classical_rejects_bad_inputs():
    mask = np.ones((4, 4), dtype=bool)
    mask[0, 1] = mask[1, 0] = False
    with pytest.raises(ValueError):
        classical_mds(Edm(dsq=np.zeros((4, 4)), mask=mask), dim=2)
    tiny = edm_from_points(PointConfig(x=np.zeros((2, 2))))
    with pytest.raises(ValueError):
        classical_mds(tiny, dim=2)


def test_classical_flags_non_euclidean_input():
    # -L D L has a strictly negative eigenvalue among its top two
    dsq = np.array([[0.0, -1.0, -1.0], [-1.0, 0.0, -1.0], [-1.0, -1.0, 0.0]])
    m = Edm(dsq=dsq, mask=np.ones((3, 3), dtype=bool))
    with pytest.raises(NotEdmError):
        classical_mds(m, dim=2)


# ------------------------------------------------------------------- cost


def test_cost_zero_at_truth_and_with_zero_weights():
    rng = np.random.default_rng(22)
    pts = random_points(rng, 5)
    prob = uniform_problem(edm_from_points(pts))
    assert sstress_cost(pts, prob) == 0.0
    zero = SStressProblem(target=prob.target, weights=np.zeros((5, 5)), dim=2)
    other = random_points(rng, 5)
    assert sstress_cost(other, zero) == 0.0


def test_cost_matches_hand_expansion():
    target = edm_from_points(
        PointConfig(x=np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 2.0]]))
    )
    x = PointConfig(x=np.array([[0.0, 0.0], [2.0, 0.0], [1.0, 1.0]]))
    w = np.array([[0.0, 1.0, 2.0], [0.5, 0.0, 1.0], [1.0, 3.0, 0.0]])
    prob = SStressProblem(target=target, weights=w, dim=2)
    expected = 0.0
    for i in range(3):
        for j in range(3):
            model = np.sum((x.x[i] - x.x[j]) ** 2)
            expected += w[i, j] * (model - target.dsq[i, j]) ** 2
    assert sstress_cost(x, prob) == pytest.approx(expected, rel=1e-12)


def test_cost_invariant_under_isometry():
    rng = np.random.default_rng(23)
    pts = random_points(rng, 6)
    target = edm_from_points(random_points(rng, 6))
    prob = uniform_problem(target)
    theta = 1.234
    q = np.array([[np.cos(theta), -np.sin(theta)], [np.sin(theta), np.cos(theta)]])
    moved = PointConfig(x=pts.x @ q.T + np.array([3.0, -1.0]))
    a = sstress_cost(pts, prob)
    b = sstress_cost(moved, prob)
    assert abs(a - b) < 1e-9 * max(a, 1.0)


# --------------------------------------------------------------- gradient


def test_gradient_matches_central_differences():
    rng = np.random.default_rng(24)
    for _ in range(3):
        n = 5
        target = edm_from_points(random_points(rng, n))
        w = rng.uniform(0.1, 2.0, size=(n, n))
        np.fill_diagonal(w, 0.0)
        prob = SStressProblem(target=target, weights=w, dim=2)
        x = random_points(rng, n).x
        grad = sstress_gradient(PointConfig(x=x), prob)
        step = 1e-6
        for i in range(n):
            for a in range(2):
                xp = x.copy()
                xm = x.copy()
                xp[i, a] += step
                xm[i, a] -= step
                num = (
                    sstress_cost(PointConfig(x=xp), prob)
                    - sstress_cost(PointConfig(x=xm), prob)
                ) / (2 * step)
                scale = max(abs(num), abs(grad[i, a]), 1.0)
                assert abs(grad[i, a] - num) < 1e-5 * scale


def test_gradient_zero_at_perfect_fit():
    rng = np.random.default_rng(25)
    pts = random_points(rng, 5)
    grad = sstress_gradient(pts, uniform_problem(edm_from_points(pts)))
    assert np.max(np.abs(grad)) < 1e-12


# -------------------------------------------------------- coordinate step


def test_coordinate_update_tie_breaks_toward_current():
    # slice cost (t^2 - 1)^2: minima at -1 and +1, current 3 picks +1
    target = Edm(dsq=np.array([[0.0, 1.0], [1.0, 0.0]]), mask=np.ones((2, 2), bool))
    w = np.array([[0.0, 1.0], [0.0, 0.0]])
    prob = SStressProblem(target=target, weights=w, dim=2)
    cur = PointConfig(x=np.array([[0.0, 0.0], [3.0, 0.0]]))
    assert coordinate_update(prob, cur, 1, 0) == pytest.approx(1.0, abs=1e-9)


def test_coordinate_update_isolated_point_keeps_value():
    target = Edm(dsq=np.zeros((3, 3)), mask=np.ones((3, 3), bool))
    w = np.zeros((3, 3))
    w[0, 1] = w[1, 0] = 1.0  # point 2 has no positive weight
    prob = SStressProblem(target=target, weights=w, dim=2)
    cur = PointConfig(x=np.array([[0.0, 0.0], [1.0, 0.0], [5.0, -2.0]]))
    assert coordinate_update(prob, cur, 2, 0) == 5.0
    assert coordinate_update(prob, cur, 2, 1) == -2.0


def slice_cost(prob, x, point, axis, t):
    y = x.copy()
    y[point, axis] = t
    return sstress_cost(PointConfig(x=y), prob)


def test_coordinate_update_beats_dense_grid():
    rng = np.random.default_rng(26)
    grid = np.linspace(-5.0, 5.0, 2001)
    for _ in range(20):
        n = int(rng.integers(3, 7))
        target = edm_from_points(random_points(rng, n))
        w = rng.uniform(0.0, 1.5, size=(n, n))
        np.fill_diagonal(w, 0.0)
        prob = SStressProblem(target=target, weights=w, dim=2)
        x = random_points(rng, n).x
        point = int(rng.integers(0, n))
        axis = int(rng.integers(0, 2))
        t_star = coordinate_update(prob, PointConfig(x=x), point, axis)
        assert np.isfinite(t_star)
        c_star = slice_cost(prob, x, point, axis, t_star)
        c_grid = min(slice_cost(prob, x, point, axis, t) for t in grid)
        assert c_star <= c_grid + 1e-9 * (1.0 + c_grid)


# ------------------------------------------------------------------ solve


def test_solve_trace_starts_at_init_and_never_increases():
    rng = np.random.default_rng(27)
    for seed in range(4):
        n = 6
        truth = random_points(rng, n)
        dsq = edm_from_points(truth).dsq + rng.normal(0, 0.05, (n, n))
        dsq = np.clip((dsq + dsq.T) / 2.0, 0.0, None)
        np.fill_diagonal(dsq, 0.0)
        target = Edm(dsq=dsq, mask=np.ones((n, n), bool))
        prob = uniform_problem(target)
        _, trace = sstress_solve(prob, SolverSettings(init="random", seed=seed, max_iters=60))
        assert len(trace) >= 2
        diffs = np.diff(np.asarray(trace))
        assert np.all(diffs <= 1e-12 * max(trace[0], 1.0))


def test_solve_recovers_complete_noiseless():
    rng = np.random.default_rng(28)
    for seed in (0, 1, 2):
        truth = random_points(rng, 5)
        prob = uniform_problem(edm_from_points(truth))
        est, trace = sstress_solve(prob, SolverSettings(init="random", seed=seed))
        assert trace[-1] < 1e-10
        assert align_and_score(est, truth).mean_error < 1e-5


def test_solve_recovers_with_two_pairs_missing():
    # masked problems keep spurious minima, so recovery goes through restarts
    rng = np.random.default_rng(29)
    truth = random_points(rng, 5)
    m = edm_from_points(truth)
    mask = m.mask.copy()
    for i, j in ((0, 3), (1, 4)):  # 2 of the 10 pairs never measured
        mask[i, j] = mask[j, i] = False
    dsq = np.where(mask, m.dsq, 0.0)
    prob = uniform_problem(Edm(dsq=dsq, mask=mask))
    est, trace = sstress_solve_multistart(prob)
    assert trace[-1] < 1e-9
    assert align_and_score(est, truth).mean_error < 1e-4


def test_multistart_matches_single_solve_for_one_start():
    rng = np.random.default_rng(33)
    prob = uniform_problem(edm_from_points(random_points(rng, 5)))
    settings = SolverSettings(init="random", seed=4)
    single_est, single_trace = sstress_solve(prob, settings)
    multi_est, multi_trace = sstress_solve_multistart(prob, settings, n_starts=1)
    assert np.array_equal(single_est.x, multi_est.x)
    assert single_trace == multi_trace
    with pytest.raises(ValueError):
        sstress_solve_multistart(prob, settings, n_starts=0)


def test_multistart_is_deterministic_and_never_worse():
    rng = np.random.default_rng(34)
    truth = random_points(rng, 6)
    dsq = edm_from_points(truth).dsq + rng.normal(0, 0.08, (6, 6))
    dsq = np.clip((dsq + dsq.T) / 2.0, 0.0, None)
    np.fill_diagonal(dsq, 0.0)
    prob = uniform_problem(Edm(dsq=dsq, mask=np.ones((6, 6), bool)))
    _, single = sstress_solve(prob)
    est_a, multi_a = sstress_solve_multistart(prob, n_starts=5)
    est_b, multi_b = sstress_solve_multistart(prob, n_starts=5)
    assert multi_a[-1] <= single[-1] + 1e-15
    assert multi_a == multi_b
    assert np.array_equal(est_a.x, est_b.x)


def test_solve_warm_start_at_truth_stops_immediately():
    rng = np.random.default_rng(30)
    truth = random_points(rng, 6)
    prob = uniform_problem(edm_from_points(truth))
    est, trace = sstress_solve(prob, x0=truth)
    assert trace[0] < 1e-18
    assert len(trace) == 2  # one sweep confirms convergence
    assert align_and_score(est, truth).mean_error < 1e-9


def test_solve_rejects_under_constrained_points():
    n = 5
    mask = np.ones((n, n), dtype=bool)
    for j in range(n):  # point 4 keeps only its pair with point 0
        if j not in (0, 4):
            mask[4, j] = mask[j, 4] = False
    dsq = np.where(mask, 1.0, 0.0)
    np.fill_diagonal(dsq, 0.0)
    target = Edm(dsq=dsq, mask=mask)
    prob = uniform_problem(target)
    with pytest.raises(UnderConstrainedError):
        sstress_solve(prob)


def test_solve_disconnected_graph_falls_back_to_random_init():
    # two complete 4-cliques, no cross edges: shortest paths cannot complete
    rng = np.random.default_rng(31)
    n = 8
    truth = random_points(rng, n)
    m = edm_from_points(truth)
    mask = np.zeros((n, n), dtype=bool)
    mask[:4, :4] = True
    mask[4:, 4:] = True
    dsq = np.where(mask, m.dsq, 0.0)
    prob = uniform_problem(Edm(dsq=dsq, mask=mask))
    est, trace = sstress_solve(prob, SolverSettings(max_iters=100))
    assert np.all(np.isfinite(est.x))
    assert trace[-1] < 1e-8  # each clique is embeddable on its own


def test_solve_x0_shape_checked():
    rng = np.random.default_rng(32)
    prob = uniform_problem(edm_from_points(random_points(rng, 4)))
    with pytest.raises(ValueError):
        sstress_solve(prob, x0=PointConfig(x=np.zeros((5, 2))))


def test_solve_matches_refined_grid_on_tiny_instance():
    """Global check on N=3 against a brute-force oracle.

    The triangle-violating target has no zero-cost fit, so the solver has to
    find a genuine interior optimum. Canonical form p0=(0,0), p1=(a,0),
    p2=(b,c) removes the isometry freedom; a refined grid over (a, b, c)
    brackets the global minimum.
    """
    dsq = np.array([[0.0, 1.0, 16.0], [1.0, 0.0, 1.0], [16.0, 1.0, 0.0]])
    target = Edm(dsq=dsq, mask=np.ones((3, 3), bool))
    prob = uniform_problem(target)
    solver_cost = np.inf
    starts = [SolverSettings(max_iters=2000, rel_tol=1e-14)]
    starts += [
        SolverSettings(max_iters=2000, rel_tol=1e-14, init="random", seed=s)
        for s in range(5)
    ]
    for settings in starts:
        _, trace = sstress_solve(prob, settings)
        solver_cost = min(solver_cost, trace[-1])

    def grid_cost(a, b, c):
        d01 = a**2
        d02 = b**2 + c**2
        d12 = (b - a) ** 2 + c**2
        return 2.0 * ((d01 - 1.0) ** 2 + (d02 - 16.0) ** 2 + (d12 - 1.0) ** 2)

    lo = np.array([0.0, -3.0, 0.0])
    hi = np.array([6.0, 6.0, 5.0])
    best = np.inf
    center = None
    for _ in range(4):  # coarse-to-fine refinement
        axes = [np.linspace(lo[k], hi[k], 31) for k in range(3)]
        aa, bb, cc = np.meshgrid(*axes, indexing="ij")
        costs = grid_cost(aa, bb, cc)
        idx = np.unravel_index(np.argmin(costs), costs.shape)
        best = float(costs[idx])
        center = np.array([axes[k][idx[k]] for k in range(3)])
        span = (hi - lo) / 8.0
        lo = center - span
        hi = center + span
        lo[0] = max(lo[0], 0.0)
        lo[2] = max(lo[2], 0.0)
    assert abs(solver_cost - best) < 1e-3 * max(best, 1.0)


def test_settings_and_problem_validation():
    with pytest.raises(ValueError):
        SolverSettings(max_iters=0)
    with pytest.raises(ValueError):
        SolverSettings(rel_tol=-1.0)
    with pytest.raises(ValueError):
        SolverSettings(init="annealing")
    target = edm_from_points(PointConfig(x=np.zeros((3, 2))))
    w = np.zeros((3, 3))
    w[0, 1] = -1.0
    with pytest.raises(ValueError):
        SStressProblem(target=target, weights=w, dim=2)
    w = np.zeros((3, 3))
    np.fill_diagonal(w, 1.0)
    with pytest.raises(ValueError):
        SStressProblem(target=target, weights=w, dim=2)
    with pytest.raises(ValueError):
        SStressProblem(target=target, weights=np.zeros((2, 2)), dim=2)
    with pytest.raises(ValueError):
        SStressProblem(target=target, weights=np.zeros((3, 3)), dim=4)
    masked = Edm(dsq=np.zeros((3, 3)), mask=np.eye(3, dtype=bool))
    w = np.zeros((3, 3))
    w[0, 1] = 1.0  # positive weight on a masked-off pair
    with pytest.raises(ValueError):
        SStressProblem(target=masked, weights=w, dim=2)
