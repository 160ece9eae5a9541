"""Change of variables between radial profiles on (0, inf) and log-variable profiles on R.

U(r) = r^{-(N-2s)/2} Uhat(ln r).  Radial grids are always the exponential
image of a LogGrid; no independent radial discretization exists here.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .grids import LogGrid
from .params import Params

PARITY_TOL = 1e-12


@dataclass
class Profile:
    """Function samples on a LogGrid, in the log variable or its radial image.

    parity refers to the log picture; it is verified on construction for log
    profiles and carried through for radial ones.
    """

    grid: LogGrid
    values: np.ndarray
    variable: str = "log"  # "log" | "radial"
    parity: str = "none"  # "even" | "odd" | "none"
    params: Params | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.variable not in ("log", "radial"):
            raise ValueError(f"unknown variable tag {self.variable!r}")
        if self.parity not in ("even", "odd", "none"):
            raise ValueError(f"unknown parity tag {self.parity!r}")
        if self.values.shape != (self.grid.M,):
            raise ValueError(f"values length {self.values.shape} != grid M={self.grid.M}")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("profile values must be finite")
        if self.variable == "log" and self.parity != "none":
            sign = 1.0 if self.parity == "even" else -1.0
            defect = np.max(np.abs(self.values - sign * self.values[::-1]))
            scale = max(np.max(np.abs(self.values)), 1e-300)
            if defect > PARITY_TOL * scale:
                raise ValueError(f"declared {self.parity} but reflection defect {defect:.3e}")

    def coordinates(self) -> np.ndarray:
        return self.grid.nodes() if self.variable == "log" else self.grid.radii()

    def copy_with(self, **kw) -> "Profile":
        d = dict(grid=self.grid, values=self.values.copy(), variable=self.variable,
                 parity=self.parity, params=self.params, meta=dict(self.meta))
        d.update(kw)
        return Profile(**d)


def _exponent(params: Params) -> float:
    return (params.N - 2.0 * params.s) / 2.0


def to_log_profile(profile: Profile) -> Profile:
    """Uhat(kappa) = e^{kappa (N-2s)/2} U(e^kappa) on the shared nodes."""
    if profile.variable != "radial":
        raise ValueError("to_log_profile expects a radial profile")
    if profile.params is None:
        raise ValueError("profile needs params for the change of variables")
    r = profile.grid.radii()
    if np.any(r <= 0.0):
        raise ValueError("radii must be strictly positive")
    vals = r ** _exponent(profile.params) * profile.values
    return Profile(grid=profile.grid, values=vals, variable="log",
                   parity=profile.parity, params=profile.params, meta=dict(profile.meta))


def from_log_profile(profile: Profile) -> Profile:
    """U(r) = r^{-(N-2s)/2} Uhat(ln r), inverse of to_log_profile on shared nodes."""
    if profile.variable != "log":
        raise ValueError("from_log_profile expects a log profile")
    if profile.params is None:
        raise ValueError("profile needs params for the change of variables")
    r = profile.grid.radii()
    vals = r ** (-_exponent(profile.params)) * profile.values
    return Profile(grid=profile.grid, values=vals, variable="radial",
                   parity=profile.parity, params=profile.params, meta=dict(profile.meta))


def differentiate(grid: LogGrid, values: np.ndarray) -> np.ndarray:
    """Fourth-order finite-difference derivative on the uniform grid, one-sided at the ends."""
    if grid.M < 7:
        raise ValueError(f"need at least 7 nodes to differentiate, got M={grid.M}")
    h = grid.h
    v = np.asarray(values, dtype=float)
    d = np.empty_like(v)
    d[2:-2] = (-v[4:] + 8.0 * v[3:-1] - 8.0 * v[1:-3] + v[:-4]) / (12.0 * h)
    fwd = np.array([-25.0, 48.0, -36.0, 16.0, -3.0]) / (12.0 * h)
    for i in (0, 1):
        d[i] = fwd @ v[i : i + 5]
        d[-1 - i] = -(fwd @ v[-1 - i : -6 - i : -1])
    return d


def generator_z(profile: Profile, route: str = "log") -> Profile:
    """Scaling generator z = (N-2s)/2 U + r U'.

    The definition of record is the back-transform of the log derivative:
    z = from_log(Uhat'); the direct radial route r U' + (N-2s)/2 U is kept as
    a cross-check.
    """
    if profile.params is None:
        raise ValueError("profile needs params")
    if profile.grid.h > 0.1:
        raise ValueError(f"grid too coarse for differentiation: h={profile.grid.h} > 0.1")
    if route == "log":
        logp = profile if profile.variable == "log" else to_log_profile(profile)
        dvals = differentiate(logp.grid, logp.values)
        parity = {"even": "odd", "odd": "even"}.get(logp.parity, "none")
        dlog = Profile(grid=logp.grid, values=dvals, variable="log", parity=parity,
                       params=profile.params)
        return from_log_profile(dlog)
    if route == "radial":
        radp = profile if profile.variable == "radial" else from_log_profile(profile)
        r = radp.grid.radii()
        # dU/dr = dU/dkappa / r on the exponential grid
        dU = differentiate(radp.grid, radp.values) / r
        vals = _exponent(profile.params) * radp.values + r * dU
        return Profile(grid=radp.grid, values=vals, variable="radial", parity="none",
                       params=profile.params)
    raise ValueError(f"unknown route {route!r}")


def decay_rate_fit(profile: Profile, window=(0.55, 0.85)) -> tuple[float, float]:
    """Least-squares slopes of -log(values) against |kappa| on the outer windows.

    window is a fraction pair (lo, hi) of the half-width L; returns
    (rate_left, rate_right).
    """
    if profile.variable != "log":
        raise ValueError("decay fit expects a log profile")
    kappa = profile.grid.nodes()
    L = profile.grid.L
    lo, hi = window[0] * L, window[1] * L
    rates = []
    for side in (-1.0, 1.0):
        mask = (side * kappa >= lo) & (side * kappa <= hi)
        vals = profile.values[mask]
        if np.any(vals <= 0.0):
            raise ValueError("nonpositive values in decay-fit window")
        slope = np.polyfit(np.abs(kappa[mask]), -np.log(vals), 1)[0]
        rates.append(float(slope))
    return rates[0], rates[1]


def radial_inner(a: Profile, b: Profile) -> float:
    """Inner product int f g r^{N-2s-1} dr under which the change of variables is unitary.

    On the exponential grid this is h * sum f_i g_i r_i^{N-2s}, and equals the
    plain h-weighted product of the corresponding log profiles.
    """
    if a.variable != "radial" or b.variable != "radial":
        raise ValueError("radial_inner expects radial profiles")
    if a.grid != b.grid:
        raise ValueError("profiles live on different grids")
    params = a.params or b.params
    if params is None:
        raise ValueError("profiles need params for the weight exponent")
    r = a.grid.radii()
    w = r ** (params.N - 2.0 * params.s)
    return float(a.grid.h * np.sum(a.values * b.values * w))


def radial_cosine(a: Profile, b: Profile) -> float:
    """Cosine similarity in the weighted radial inner product."""
    num = radial_inner(a, b)
    return abs(num) / np.sqrt(radial_inner(a, a) * radial_inner(b, b))


def profile_to_csv(profile: Profile, path) -> None:
    """Two-column CSV (coordinate, value) with a comment header carrying the tags."""
    p = profile.params
    lines = ["# henonlab profile v1"]
    if p is not None:
        lines.append(f"# N={p.N} s={p.s:.17g} alpha={p.alpha:.17g} p={p.p:.17g}")
    lines.append(f"# variable={profile.variable} parity={profile.parity}"
                 f" L={profile.grid.L:.17g} M={profile.grid.M}")
    lines.append("coordinate,value")
    coords = profile.coordinates()
    for x, v in zip(coords, profile.values):
        lines.append(f"{x:.17g},{v:.17g}")
    with open(path, "w") as f:
        f.write("\n".join(lines) + "\n")


def profile_from_csv(path, params: Params | None = None) -> Profile:
    header = {}
    coords, vals = [], []
    with open(path) as f:
        for line in f:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                for kv in line[1:].split():
                    if "=" in kv:
                        k, v = kv.split("=", 1)
                        header[k] = v
                continue
            if line.startswith("coordinate"):
                continue
            x, v = line.split(",")
            coords.append(float(x))
            vals.append(float(v))
    grid = LogGrid(L=float(header["L"]), M=int(header["M"]))
    if params is None and "N" in header:
        params = Params(N=int(header["N"]), s=float(header["s"]),
                        alpha=float(header["alpha"]), p=float(header["p"]))
    return Profile(grid=grid, values=np.asarray(vals), variable=header.get("variable", "log"),
                   parity=header.get("parity", "none"), params=params)
