import numpy as np
import pytest

from henonlab.continuation import (
    BranchMonitorError,
    ContinuationOptions,
    branch_continuity_constant,
    branch_to_csv,
    continue_branch,
    endpoint_soliton,
    local_uniqueness_probe,
)
from henonlab.grids import LogGrid
from henonlab.params import Params
from henonlab.transform import differentiate


@pytest.fixture(scope="module")
def short_branch():
    par = Params(N=3, s=0.6, alpha=0.0, p=3.0)
    grid = LogGrid(L=14.0, M=701)
    opts = ContinuationOptions(ds0=0.02, ds_max=0.06)
    return grid, opts, continue_branch(par, 0.6, 0.8, grid, opts)


def test_endpoint_soliton_p3():
    grid = LogGrid(L=14.0, M=1401)
    sol = endpoint_soliton(3.0, 0.25, grid)
    assert sol.meta["amplitude"] == pytest.approx(np.sqrt(0.5), rel=1e-14)
    assert sol.meta["sech_rate"] == pytest.approx(0.5, rel=1e-14)
    assert sol.values[grid.mid] == pytest.approx(np.sqrt(0.5), rel=1e-14)
    assert np.argmax(sol.values) == grid.mid
    # substitute into -Q'' + A Q - Q^p on an interior window
    d2 = differentiate(grid, differentiate(grid, sol.values))
    resid = -d2 + 0.25 * sol.values - sol.values**3
    win = np.abs(grid.nodes()) <= 10.0
    assert np.max(np.abs(resid[win])) < 1e-6 * np.max(sol.values)


def test_endpoint_soliton_p2():
    grid = LogGrid(L=14.0, M=1401)
    sol = endpoint_soliton(2.0, 0.25, grid)
    assert sol.meta["amplitude"] == pytest.approx(0.375, rel=1e-14)  # 3A/2
    d2 = differentiate(grid, differentiate(grid, sol.values))
    resid = -d2 + 0.25 * sol.values - sol.values**2
    win = np.abs(grid.nodes()) <= 10.0
    assert np.max(np.abs(resid[win])) < 1e-6 * np.max(sol.values)


def test_endpoint_soliton_validation():
    grid = LogGrid(L=12.0, M=301)
    with pytest.raises(ValueError):
        endpoint_soliton(0.9, 0.25, grid)
    with pytest.raises(ValueError):
        endpoint_soliton(3.0, -1.0, grid)


def test_trivial_branch_single_point():
    par = Params(N=3, s=0.7, alpha=0.0, p=3.0)
    grid = LogGrid(L=12.0, M=501)
    pts = continue_branch(par, 0.7, 0.7, grid)
    assert len(pts) == 1
    assert pts[0].s == 0.7
    assert pts[0].residual < 1e-8


def test_branch_monitors(short_branch):
    grid, opts, pts = short_branch
    assert pts[0].s == 0.6 and pts[-1].s == pytest.approx(0.8)
    assert all(p.min_value > 0.0 for p in pts)
    assert all(p.morse_index_even == 1 for p in pts)
    assert all(p.residual < 1e-8 for p in pts)
    sup0 = pts[0].sup_norm
    assert all(p.sup_norm <= 10.0 * sup0 for p in pts)
    assert np.all(np.diff([p.s for p in pts]) > 0)
    # decay rates track (N-2s)/2 loosely along the branch
    for p in pts:
        m = (3 - 2 * p.s) / 2.0
        assert p.decay_rates[0] == pytest.approx(m, rel=0.1)


def test_branch_continuity(short_branch):
    _, _, pts = short_branch
    C = branch_continuity_constant(pts)
    assert np.isfinite(C) and C < 50.0


def test_local_uniqueness_probe(short_branch):
    grid, opts, pts = short_branch
    mid_point = pts[len(pts) // 2]
    dist = local_uniqueness_probe(mid_point, grid, rel_amplitude=0.01, seed=3, opts=opts)
    assert dist < 1e-6


def test_sup_norm_monitor_trips():
    # the amplitude grows toward smaller s, so a tight safety factor trips
    par = Params(N=3, s=0.6, alpha=0.0, p=3.0)
    grid = LogGrid(L=12.0, M=501)
    opts = ContinuationOptions(ds0=0.02, sup_safety=1.0 + 1e-9)
    with pytest.raises(BranchMonitorError) as exc:
        continue_branch(par, 0.6, 0.45, grid, opts)
    assert exc.value.point is not None
    assert exc.value.point.sup_norm > 0


def test_numerical_s_star_recorded():
    # an unreachable corrector tolerance forces step-halving to ds_min; the
    # branch stops at the start point and records the numerical s*
    from henonlab.solver import SolveOptions

    par = Params(N=3, s=0.6, alpha=0.0, p=3.0)
    grid = LogGrid(L=12.0, M=301)
    opts = ContinuationOptions(
        ds0=0.02, ds_min=1e-3, tol=1e-30, solve_opts=SolveOptions(tol=1e-9)
    )
    pts = continue_branch(par, 0.6, 0.9, grid, opts)
    assert len(pts) == 1
    assert pts[0].profile.meta.get("s_star") == pytest.approx(0.6)


def test_branch_csv(tmp_path, short_branch):
    _, _, pts = short_branch
    csv_path = tmp_path / "branch.csv"
    json_path = tmp_path / "branch.json"
    branch_to_csv(pts, csv_path, json_path)
    lines = csv_path.read_text().strip().split("\n")
    header = "s,sup_norm,min_value,residual,morse_index_even,L2_norm,Lp1_norm,newton_iters"
    assert lines[1] == header
    assert len(lines) == 2 + len(pts)
    import json

    meta = json.loads(json_path.read_text())
    assert meta["n_points"] == len(pts)
    assert meta["N"] == 3 and meta["p"] == 3.0
