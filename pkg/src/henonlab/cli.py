"""Experiment orchestration: config, subcommands, artifacts, and reports.

Every run writes its artifacts plus a manifest (config echo, versions, wall
time) into one output directory, and a <command>_checks.json with named
boolean checks that the report command aggregates.  Data files carry no
wall-clock content, so identical configs reproduce byte-identical CSVs.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from dataclasses import asdict, dataclass

import numpy as np

from . import __version__
from .continuation import (
    BranchMonitorError,
    ContinuationOptions,
    branch_to_csv,
    continue_branch,
    endpoint_soliton,
)
from .grids import LogGrid
from .kernel import A_via_integral, kernel_table
from .operator import assemble_T, rayleigh_form
from .params import (
    AdmissibilityError,
    Params,
    critical_exponent,
    hardy_constant,
    normalization_constant,
)
from .solver import SolveOptions, solve_ground_state
from .spectrum import (
    assemble_linearized,
    parity_spectrum,
    singular_map,
    spectrum_report_to_csv,
)
from .transform import (
    decay_rate_fit,
    differentiate,
    generator_z,
    profile_to_csv,
    radial_cosine,
)


@dataclass
class RunConfig:
    experiment: str
    N: int = 3
    s: float = 0.5
    alpha: float = 0.0
    p: float | None = None
    L: float = 18.0
    M: int = 2001
    quad_tol: float = 1e-10
    solve_tol: float = 1e-9
    eig_tol: float = 1e-8
    out: str = "henonlab_run"
    # branch extras
    s0: float = 0.6
    s_end: float = 0.999
    ds_max: float = 0.04
    write_profiles: bool = False
    # spectrum extras
    k: int = 6

    def validate(self):
        if self.experiment not in ("constants", "kernel", "solve", "spectrum", "branch", "report"):
            raise ValueError(f"unknown experiment {self.experiment!r}")
        if self.experiment != "report":
            if self.M % 2 == 0 or self.M < 3:
                raise ValueError(f"M must be odd and >= 3, got {self.M}")
            if self.L < 10.0:
                raise ValueError(f"L must be >= 10, got {self.L}")
        if self.experiment in ("constants", "kernel", "solve", "spectrum"):
            Params(N=self.N, s=self.s, alpha=self.alpha, p=self.p)  # raises if inadmissible
        if self.experiment == "branch":
            Params(N=self.N, s=self.s0, alpha=0.0, p=self.p)

    def params(self) -> Params:
        return Params(N=self.N, s=self.s, alpha=self.alpha, p=self.p)

    def grid(self) -> LogGrid:
        return LogGrid(L=self.L, M=self.M)


def _write_json(path, payload):
    with open(path, "w") as f:
        json.dump(payload, f, indent=2, sort_keys=True)
        f.write("\n")


def _write_manifest(cfg: RunConfig, outdir, wall_time, extra=None):
    import scipy

    manifest = {
        "config": asdict(cfg),
        "versions": {
            "henonlab": __version__,
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "python": sys.version.split()[0],
        },
        "wall_time_s": wall_time,
    }
    if extra:
        manifest.update(extra)
    _write_json(os.path.join(outdir, "manifest.json"), manifest)


def _run_constants(cfg: RunConfig, outdir):
    par = cfg.params()
    A_gamma = hardy_constant(cfg.N, cfg.s)
    A_int = A_via_integral(par, tol=min(1e-9, cfg.quad_tol * 10))
    rel = abs(A_int - A_gamma) / A_gamma
    payload = {
        "N": cfg.N,
        "s": cfg.s,
        "alpha": cfg.alpha,
        "p_critical": critical_exponent(cfg.N, cfg.s, cfg.alpha),
        "A_gamma": A_gamma,
        "A_integral": A_int,
        "A_rel_difference": rel,
        "normalization_C": normalization_constant(cfg.N, cfg.s),
    }
    _write_json(os.path.join(outdir, "constants.json"), payload)
    checks = {"A_consistency_1e-6": bool(rel < 1e-6)}
    _write_json(os.path.join(outdir, "constants_checks.json"), checks)
    return checks


def _run_kernel(cfg: RunConfig, outdir):
    par, grid = cfg.params(), cfg.grid()
    table = kernel_table(par, grid, cfg.quad_tol)
    ts = table.t_samples()
    lines = ["# henonlab kernel table", "t,K"]
    lines += [f"{t:.17g},{v:.17g}" for t, v in zip(ts, table.values)]
    with open(os.path.join(outdir, "kernel.csv"), "w") as f:
        f.write("\n".join(lines) + "\n")
    # tail diagnostic at a far sample
    rate = (cfg.N + 2 * cfg.s) / 2.0
    far = min(int(10.0 / grid.h), table.J) - 1
    tail_ratio = float(table.values[far] / (table.tail_coeff * np.exp(-rate * ts[far])))
    payload = {
        "h": table.h,
        "J": table.J,
        "sing_coeff": table.sing_coeff,
        "sing_exponent": table.sing_exponent,
        "sing_exponent_expected": -(1.0 + 2.0 * cfg.s),
        "fit_residual": table.fit_residual,
        "tail_coeff": table.tail_coeff,
        "tail_ratio_at_10": tail_ratio,
    }
    _write_json(os.path.join(outdir, "kernel.json"), payload)
    body = table.values[table.values > 0]
    checks = {
        "values_positive": bool(np.all(table.values >= 0.0)),
        "values_strictly_decreasing": bool(np.all(np.diff(body) < 0.0)),
        "sing_exponent_within_1pct": bool(
            abs(table.sing_exponent / (1.0 + 2.0 * cfg.s) + 1.0) < 0.01
        ),
    }
    _write_json(os.path.join(outdir, "kernel_checks.json"), checks)
    return checks


def _run_solve(cfg: RunConfig, outdir):
    par, grid = cfg.params(), cfg.grid()
    table = kernel_table(par, grid, cfg.quad_tol)
    op = assemble_T(par, grid, table)
    opts = SolveOptions(tol=cfg.solve_tol, quad_tol=cfg.quad_tol)
    prof = solve_ground_state(par, grid, opts, opmatrix=op)
    profile_to_csv(prof, os.path.join(outdir, "profile.csv"))
    rates = decay_rate_fit(prof)
    p = par.p
    lhs = rayleigh_form(op, -p * np.abs(prof.values) ** (p - 1.0), prof.values)
    rhs = (1.0 - p) * grid.h * np.sum(np.abs(prof.values) ** (p + 1.0))
    rayleigh_rel = abs(lhs - rhs) / abs(rhs)
    payload = {
        "residual": prof.meta["residual"],
        "newton_iterations": prof.meta["newton_iterations"],
        "flow_iterations": prof.meta["flow_iterations"],
        "max_value": float(np.max(prof.values)),
        "min_value": float(np.min(prof.values)),
        "center_of_mass": prof.meta["center_of_mass"],
        "decay_rate_left": rates[0],
        "decay_rate_right": rates[1],
        "decay_rate_expected": par.decay_rate,
        "rayleigh_identity_lhs": lhs,
        "rayleigh_identity_rhs": rhs,
        "rayleigh_rel_difference": rayleigh_rel,
    }
    _write_json(os.path.join(outdir, "solve.json"), payload)
    checks = {
        "residual_below_tol": bool(prof.meta["residual"] < cfg.solve_tol),
        "positive": bool(np.min(prof.values) > 0.0),
        "peak_at_origin": bool(int(np.argmax(prof.values)) == grid.mid),
        "center_of_mass_within_h": bool(abs(prof.meta["center_of_mass"]) < grid.h),
        "rayleigh_identity_1e-6": bool(rayleigh_rel < 1e-6),
        "decay_rates_within_5pct": bool(
            abs(rates[0] / par.decay_rate - 1.0) < 0.05
            and abs(rates[1] / par.decay_rate - 1.0) < 0.05
        ),
    }
    _write_json(os.path.join(outdir, "solve_checks.json"), checks)
    return checks


def _run_spectrum(cfg: RunConfig, outdir):
    par, grid = cfg.params(), cfg.grid()
    table = kernel_table(par, grid, cfg.quad_tol)
    op = assemble_T(par, grid, table)
    opts = SolveOptions(tol=cfg.solve_tol, quad_tol=cfg.quad_tol)
    prof = solve_ground_state(par, grid, opts, opmatrix=op)
    profile_to_csv(prof, os.path.join(outdir, "profile.csv"))
    lin = assemble_linearized(op, prof, par.p)
    report = parity_spectrum(lin, k=cfg.k, morse_tol=cfg.eig_tol)
    spectrum_report_to_csv(
        report,
        os.path.join(outdir, "spectrum.csv"),
        os.path.join(outdir, "spectrum.json"),
    )
    zero = report.odd_zero_mode()
    uhat_prime = differentiate(grid, prof.values)
    cos = abs(
        float(zero.vector @ uhat_prime)
        / (np.linalg.norm(zero.vector) * np.linalg.norm(uhat_prime))
    )
    # back-transformed odd mode against the scaling generator
    zrad = generator_z(prof)
    phi_rad = singular_map(report, par).pairs
    odd_rad = [q for q in phi_rad if q.parity == "odd"]
    odd_rad = min(odd_rad, key=lambda q: abs(q.eigenvalue))
    cos_z = radial_cosine(odd_rad.profile, zrad)
    evens = report.pairs("even")
    zero_tol = report.zero_mode_tolerance()
    even_gap_ok = all(abs(ep.eigenvalue) > 10.0 * zero_tol for ep in evens)
    checks = {
        "morse_index_is_1": bool(report.morse_index_full == 1),
        "lambda1_negative": bool(report.lambda1 < 0.0),
        "odd_zero_mode_small": bool(abs(zero.eigenvalue) <= 1e-3 * abs(report.lambda1)),
        "odd_mode_matches_derivative": bool(cos > 0.999),
        "odd_mode_matches_generator": bool(cos_z > 0.999),
        "no_even_near_zero": bool(even_gap_ok),
        "second_even_sign_changes_le_2": bool(
            len(evens) < 2 or evens[1].sign_changes <= 2
        ),
    }
    _write_json(os.path.join(outdir, "spectrum_checks.json"), checks)
    return checks


def _run_branch(cfg: RunConfig, outdir):
    par = Params(N=cfg.N, s=cfg.s0, alpha=0.0, p=cfg.p)
    grid = cfg.grid()
    opts = ContinuationOptions(
        ds_max=cfg.ds_max,
        tol=cfg.solve_tol,
        quad_tol=cfg.quad_tol,
        solve_opts=SolveOptions(tol=cfg.solve_tol, quad_tol=cfg.quad_tol),
    )
    points = continue_branch(par, cfg.s0, cfg.s_end, grid, opts)
    branch_to_csv(
        points, os.path.join(outdir, "branch.csv"), os.path.join(outdir, "branch.json")
    )
    if cfg.write_profiles:
        pdir = os.path.join(outdir, "profiles")
        os.makedirs(pdir, exist_ok=True)
        for i, pt in enumerate(points):
            profile_to_csv(pt.profile, os.path.join(pdir, f"profile_{i:04d}.csv"))
    last = points[-1]
    A1 = ((cfg.N - 2) / 2.0) ** 2
    sol = endpoint_soliton(par.p, A1, grid)
    dist = float(np.sqrt(grid.h * np.sum((last.profile.values - sol.values) ** 2)))
    payloads = {
        "n_points": len(points),
        "s_last": last.s,
        "endpoint_soliton_distance_L2": dist,
        "endpoint_soliton_amplitude": sol.meta["amplitude"],
    }
    _write_json(os.path.join(outdir, "branch_endpoint.json"), payloads)
    checks = {
        "all_points_positive": bool(all(pt.min_value > 0.0 for pt in points)),
        "morse_even_all_1": bool(all(pt.morse_index_even == 1 for pt in points)),
        "sup_norm_bounded": bool(
            max(pt.sup_norm for pt in points) <= 10.0 * points[0].sup_norm
        ),
        "reached_s_end": bool(abs(last.s - cfg.s_end) < 1e-12),
    }
    if cfg.s_end >= 0.99:
        checks["endpoint_matches_soliton_1e-2"] = bool(dist < 1e-2)
    _write_json(os.path.join(outdir, "branch_checks.json"), checks)
    return checks


def write_report(run_dir):
    """Aggregate every *_checks.json in run_dir into a summary table."""
    rows = []
    for name in sorted(os.listdir(run_dir)):
        if not name.endswith("_checks.json"):
            continue
        with open(os.path.join(run_dir, name)) as f:
            checks = json.load(f)
        for key, ok in sorted(checks.items()):
            rows.append((name[: -len("_checks.json")], key, bool(ok)))
    lines_md = ["# henonlab run report", "", "| experiment | check | status |", "|---|---|---|"]
    lines_csv = ["experiment,check,status"]
    n_fail = 0
    for exp, key, ok in rows:
        status = "pass" if ok else "FAIL"
        n_fail += 0 if ok else 1
        lines_md.append(f"| {exp} | {key} | {status} |")
        lines_csv.append(f"{exp},{key},{status}")
    if not rows:
        lines_md.append("| (none) | no checks found | warning |")
    with open(os.path.join(run_dir, "report.md"), "w") as f:
        f.write("\n".join(lines_md) + "\n")
    with open(os.path.join(run_dir, "report.csv"), "w") as f:
        f.write("\n".join(lines_csv) + "\n")
    return rows, n_fail


def run_experiment(cfg: RunConfig) -> int:
    """Execute one subcommand; artifacts plus manifest land in cfg.out."""
    try:
        cfg.validate()
    except (ValueError, AdmissibilityError) as exc:
        print(json.dumps({"error": str(exc), "kind": "invalid-config"}), file=sys.stderr)
        return 2
    outdir = cfg.out
    os.makedirs(outdir, exist_ok=True)
    t0 = time.perf_counter()
    try:
        if cfg.experiment == "constants":
            checks = _run_constants(cfg, outdir)
        elif cfg.experiment == "kernel":
            checks = _run_kernel(cfg, outdir)
        elif cfg.experiment == "solve":
            checks = _run_solve(cfg, outdir)
        elif cfg.experiment == "spectrum":
            checks = _run_spectrum(cfg, outdir)
        elif cfg.experiment == "branch":
            checks = _run_branch(cfg, outdir)
        elif cfg.experiment == "report":
            rows, n_fail = write_report(outdir)
            if not rows:
                print("warning: no checks found in run directory", file=sys.stderr)
            return 1 if n_fail else 0
    except BranchMonitorError as exc:
        print(json.dumps({"error": str(exc), "kind": "monitor-violation"}), file=sys.stderr)
        return 1
    except Exception as exc:
        print(json.dumps({"error": str(exc), "kind": type(exc).__name__}), file=sys.stderr)
        return 1
    _write_manifest(cfg, outdir, time.perf_counter() - t0)
    return 0 if all(checks.values()) else 1


def _build_parser():
    ap = argparse.ArgumentParser(prog="henonlab", description=__doc__)
    sub = ap.add_subparsers(dest="experiment", required=True)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file; flags override its keys")
    common.add_argument("--N", type=int)
    common.add_argument("--s", type=float)
    common.add_argument("--alpha", type=float)
    common.add_argument("--p", type=float)
    common.add_argument("--L", type=float)
    common.add_argument("--M", type=int)
    common.add_argument("--tol", type=float, help="solver tolerance")
    common.add_argument("--out", help="output directory")
    sub.add_parser("constants", parents=[common])
    sub.add_parser("kernel", parents=[common])
    sub.add_parser("solve", parents=[common])
    sp = sub.add_parser("spectrum", parents=[common])
    sp.add_argument("--k", type=int, help="eigenpairs per parity")
    br = sub.add_parser("branch", parents=[common])
    br.add_argument("--s0", type=float)
    br.add_argument("--s-end", dest="s_end", type=float)
    br.add_argument("--ds-max", dest="ds_max", type=float)
    br.add_argument("--profiles", action="store_true", dest="write_profiles")
    rp = sub.add_parser("report")
    rp.add_argument("--run", required=True, help="run directory to aggregate")
    return ap


def config_from_args(argv) -> RunConfig:
    ns = _build_parser().parse_args(argv)
    if ns.experiment == "report":
        return RunConfig(experiment="report", out=ns.run)
    base = {}
    if ns.config:
        with open(ns.config) as f:
            base = json.load(f)
    base["experiment"] = ns.experiment
    mapping = {
        "N": "N",
        "s": "s",
        "alpha": "alpha",
        "p": "p",
        "L": "L",
        "M": "M",
        "out": "out",
        "k": "k",
        "s0": "s0",
        "s_end": "s_end",
        "ds_max": "ds_max",
        "write_profiles": "write_profiles",
    }
    for arg, key in mapping.items():
        val = getattr(ns, arg, None)
        if val is not None and val is not False:
            base[key] = val
    if getattr(ns, "tol", None) is not None:
        base["solve_tol"] = ns.tol
    return RunConfig(**base)


def main(argv=None) -> int:
    cfg = config_from_args(sys.argv[1:] if argv is None else argv)
    return run_experiment(cfg)


if __name__ == "__main__":
    sys.exit(main())
