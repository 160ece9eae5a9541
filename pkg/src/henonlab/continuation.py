"""Continuation of even ground states of (T_s + A_{s,N}) Q = Q^p in s, at fixed p.

The operator and the constant move with s while the exponent stays fixed;
each accepted point seeds the next through a secant predictor and an
even-subspace Newton corrector.  Monitors enforce what the underlying theory
guarantees along the branch: strict positivity, even Morse index one, and a
uniform sup-norm bound.  Near s = 1 the branch approaches the classical
soliton of -Q'' + A Q = Q^p.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import eigvalsh

from .grids import LogGrid
from .kernel import kernel_table
from .operator import assemble_T
from .params import Params, hardy_constant
from .solver import SolveOptions, SolverError, _even_basis, _newton_even, solve_ground_state
from .spectrum import assemble_linearized
from .transform import Profile, decay_rate_fit


class BranchMonitorError(RuntimeError):
    """A branch monitor failed; the offending point is attached."""

    def __init__(self, message, point=None):
        super().__init__(message)
        self.point = point


@dataclass
class BranchPoint:
    s: float
    profile: Profile
    morse_index_even: int
    residual: float
    sup_norm: float
    min_value: float
    decay_rates: tuple
    newton_iters: int
    L2_norm: float
    Lp1_norm: float


@dataclass
class ContinuationOptions:
    ds0: float = 0.01
    ds_max: float = 0.04
    ds_min: float = 1e-6
    tol: float = 1e-9
    quad_tol: float = 1e-10
    sup_safety: float = 10.0
    easy_newton_iters: int = 4
    easy_successes: int = 3
    morse_tol: float = 1e-8
    solve_opts: SolveOptions = field(default_factory=SolveOptions)


def _branch_params(N: int, p: float, s: float) -> Params:
    # the branch equation carries no Henon weight; alpha = 0 holds p fixed
    return Params(N=N, s=s, alpha=0.0, p=p)


def _operator_at(params: Params, grid: LogGrid, quad_tol: float):
    return assemble_T(params, grid, kernel_table(params, grid, quad_tol))


def _even_morse(opmatrix, values, p, tol):
    lin = assemble_linearized(opmatrix, values, p)
    P = _even_basis(opmatrix.grid)
    block = P.T @ lin.entries @ P
    vals = eigvalsh(0.5 * (block + block.T), subset_by_index=[0, 4])
    return int(np.sum(vals < -tol)), vals


def _make_point(s, params, grid, values, opmatrix, newton_iters, p, opts):
    from .solver import residual_norm

    prof = Profile(grid=grid, values=values, variable="log", parity="even", params=params)
    morse, _ = _even_morse(opmatrix, values, p, opts.morse_tol)
    h = grid.h
    return BranchPoint(
        s=s,
        profile=prof,
        morse_index_even=morse,
        residual=residual_norm(values, opmatrix, p),
        sup_norm=float(np.max(np.abs(values))),
        min_value=float(np.min(values)),
        decay_rates=decay_rate_fit(prof),
        newton_iters=newton_iters,
        L2_norm=float(np.sqrt(h * np.sum(values**2))),
        Lp1_norm=float((h * np.sum(np.abs(values) ** (p + 1))) ** (1.0 / (p + 1))),
    )


def _check_monitors(point: BranchPoint, sup_bound: float):
    if point.min_value <= 0.0:
        raise BranchMonitorError(f"positivity lost at s={point.s}", point)
    if point.morse_index_even != 1:
        raise BranchMonitorError(
            f"even Morse index {point.morse_index_even} != 1 at s={point.s}", point
        )
    if point.sup_norm > sup_bound:
        raise BranchMonitorError(
            f"sup norm {point.sup_norm:.3e} exceeds bound {sup_bound:.3e} at s={point.s}", point
        )


def continue_branch(
    params: Params,
    s0: float,
    s_end: float,
    grid: LogGrid,
    opts: ContinuationOptions | None = None,
) -> list:
    """Branch of solutions from s0 toward s_end at fixed exponent p."""
    opts = opts or ContinuationOptions()
    p = params.p
    N = params.N

    par0 = _branch_params(N, p, s0)
    op0 = _operator_at(par0, grid, opts.quad_tol)
    q0 = solve_ground_state(par0, grid, opts.solve_opts, opmatrix=op0)
    pt0 = _make_point(s0, par0, grid, q0.values, op0, q0.meta["newton_iterations"], p, opts)
    sup_bound = opts.sup_safety * pt0.sup_norm
    _check_monitors(pt0, sup_bound)
    points = [pt0]
    if s_end == s0:
        return points

    direction = 1.0 if s_end > s0 else -1.0
    ds = opts.ds0
    easy = 0
    while True:
        s_prev = points[-1].s
        if direction * (s_end - s_prev) <= 0:
            break
        s_next = s_prev + direction * ds
        if direction * (s_next - s_end) > 0:
            s_next = s_end
        # secant predictor once two points exist
        if len(points) >= 2:
            sa, sb = points[-2].s, points[-1].s
            va, vb = points[-2].profile.values, points[-1].profile.values
            guess = vb + (vb - va) * ((s_next - sb) / (sb - sa))
        else:
            guess = points[-1].profile.values.copy()
        par = _branch_params(N, p, s_next)
        op = _operator_at(par, grid, opts.quad_tol)
        try:
            values, iters, _ = _newton_even(
                op, guess, p, opts.tol, opts.solve_opts.max_newton
            )
            if np.min(values) <= 0.0:
                raise SolverError("corrector landed on a sign-changing profile")
        except SolverError:
            ds *= 0.5
            easy = 0
            if ds < opts.ds_min:
                points[-1].profile.meta["s_star"] = s_prev
                break
            continue
        point = _make_point(s_next, par, grid, values, op, iters, p, opts)
        _check_monitors(point, sup_bound)
        points.append(point)
        if iters <= opts.easy_newton_iters:
            easy += 1
            if easy >= opts.easy_successes:
                ds = min(2.0 * ds, opts.ds_max)
                easy = 0
        else:
            easy = 0
    return points


def endpoint_soliton(p: float, A: float, grid: LogGrid) -> Profile:
    """Classical soliton of -Q'' + A Q = Q^p sampled on the grid.

    Q(kappa) = ((p+1) A / 2)^{1/(p-1)} sech^{2/(p-1)}((p-1) sqrt(A) kappa / 2).
    """
    if p <= 1.0 or A <= 0.0:
        raise ValueError(f"soliton needs p > 1 and A > 0, got p={p}, A={A}")
    kappa = grid.nodes()
    amp = ((p + 1.0) * A / 2.0) ** (1.0 / (p - 1.0))
    width = (p - 1.0) * np.sqrt(A) / 2.0
    vals = amp / np.cosh(width * kappa) ** (2.0 / (p - 1.0))
    return Profile(
        grid=grid,
        values=vals,
        variable="log",
        parity="even",
        params=None,
        meta={"amplitude": amp, "sech_rate": width, "p": p, "A": A},
    )


def local_uniqueness_probe(
    point: BranchPoint,
    grid: LogGrid,
    rel_amplitude: float = 0.01,
    seed: int = 0,
    opts: ContinuationOptions | None = None,
) -> float:
    """Restart the corrector from a perturbed even profile; L2 distance back to the point."""
    opts = opts or ContinuationOptions()
    p = point.profile.params.p
    par = point.profile.params
    op = _operator_at(par, grid, opts.quad_tol)
    rng = np.random.default_rng(seed)
    noise = rng.standard_normal(grid.M)
    noise = 0.5 * (noise + noise[::-1])
    noise *= rel_amplitude * point.sup_norm / np.max(np.abs(noise))
    start = point.profile.values + noise
    values, _, _ = _newton_even(op, start, p, opts.tol, opts.solve_opts.max_newton)
    return float(np.sqrt(grid.h * np.sum((values - point.profile.values) ** 2)))


def branch_continuity_constant(points) -> float:
    """Largest ||Q_{s+ds} - Q_s||_{L2} / ds along the branch (C^1 branch estimate)."""
    best = 0.0
    for a, b in zip(points[:-1], points[1:]):
        ds = abs(b.s - a.s)
        if ds == 0:
            continue
        h = a.profile.grid.h
        dist = np.sqrt(h * np.sum((b.profile.values - a.profile.values) ** 2))
        best = max(best, float(dist / ds))
    return best


def branch_to_csv(points, csv_path, json_path=None) -> None:
    lines = [
        "# henonlab branch v1",
        "s,sup_norm,min_value,residual,morse_index_even,L2_norm,Lp1_norm,newton_iters",
    ]
    for pt in points:
        lines.append(
            f"{pt.s:.17g},{pt.sup_norm:.17g},{pt.min_value:.17g},{pt.residual:.17g},"
            f"{pt.morse_index_even},{pt.L2_norm:.17g},{pt.Lp1_norm:.17g},{pt.newton_iters}"
        )
    with open(csv_path, "w") as f:
        f.write("\n".join(lines) + "\n")
    if json_path is not None:
        p0 = points[0].profile.params
        meta = {
            "N": p0.N,
            "p": p0.p,
            "s_first": points[0].s,
            "s_last": points[-1].s,
            "n_points": len(points),
            "hardy_last": hardy_constant(p0.N, points[-1].s),
            "continuity_constant": branch_continuity_constant(points),
        }
        with open(json_path, "w") as f:
            json.dump(meta, f, indent=2, sort_keys=True)
            f.write("\n")
