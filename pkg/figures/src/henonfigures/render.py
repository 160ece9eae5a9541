"""Parsers for the henonlab CSV artifacts and the three figure kinds."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

KINDS = ("profile", "spectrum", "branch")

BRANCH_COLUMNS = [
    "s",
    "sup_norm",
    "min_value",
    "residual",
    "morse_index_even",
    "L2_norm",
    "Lp1_norm",
    "newton_iters",
]


class FigureParseError(ValueError):
    """Input artifact failed to parse; message names the file and line."""


@dataclass
class FigureSpec:
    kind: str
    inputs: list
    output: str
    style: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise FigureParseError(f"unknown figure kind {self.kind!r}; expected one of {KINDS}")
        if not self.inputs:
            raise FigureParseError("at least one input CSV is required")
        for path in self.inputs:
            if not os.path.exists(path):
                raise FigureParseError(f"{path}: input file does not exist")


def _read_csv(path, expected_header_prefix):
    """Rows of a #-commented CSV; raises with file and line on malformed input."""
    header = None
    rows = []
    comments = {}
    with open(path) as f:
        for lineno, raw in enumerate(f, start=1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                for kv in line[1:].split():
                    if "=" in kv:
                        k, v = kv.split("=", 1)
                        comments[k] = v
                continue
            if header is None:
                header = line.split(",")
                if not line.startswith(expected_header_prefix):
                    raise FigureParseError(
                        f"{path}:{lineno}: expected header starting with "
                        f"{expected_header_prefix!r}, got {line!r}"
                    )
                continue
            parts = line.split(",")
            if len(parts) != len(header):
                raise FigureParseError(
                    f"{path}:{lineno}: {len(parts)} fields, header has {len(header)}"
                )
            rows.append(parts)
    if header is None:
        raise FigureParseError(f"{path}: no data header found")
    return header, rows, comments


def read_profile(path):
    header, rows, comments = _read_csv(path, "coordinate")
    try:
        coords = np.array([float(r[0]) for r in rows])
        values = np.array([float(r[1]) for r in rows])
    except ValueError as exc:
        raise FigureParseError(f"{path}: non-numeric data ({exc})") from exc
    return coords, values, comments


def read_spectrum(path):
    header, rows, _ = _read_csv(path, "index")
    try:
        parsed = [
            (int(r[0]), r[1], float(r[2]), int(r[3]), int(r[4])) for r in rows
        ]
    except (ValueError, IndexError) as exc:
        raise FigureParseError(f"{path}: malformed spectrum row ({exc})") from exc
    sidecar = os.path.splitext(path)[0] + ".json"
    meta = {}
    if os.path.exists(sidecar):
        with open(sidecar) as f:
            meta = json.load(f)
    return parsed, meta


def read_branch(path):
    header, rows, _ = _read_csv(path, "s,")
    missing = [c for c in BRANCH_COLUMNS if c not in header]
    if missing:
        raise FigureParseError(f"{path}: missing branch columns {missing}")
    idx = {c: header.index(c) for c in BRANCH_COLUMNS}
    try:
        data = {c: np.array([float(r[idx[c]]) for r in rows]) for c in BRANCH_COLUMNS}
    except ValueError as exc:
        raise FigureParseError(f"{path}: non-numeric branch data ({exc})") from exc
    return data


def _save(fig, output):
    fig.savefig(output, dpi=150, metadata={"Software": "henonlab-figures"})
    plt.close(fig)


def _render_profile(spec: FigureSpec):
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    for path in spec.inputs:
        coords, values, comments = read_profile(path)
        label = os.path.splitext(os.path.basename(path))[0]
        ax.plot(coords, values, lw=1.4, label=label)
    var = comments.get("variable", "log")
    ax.set_xlabel("kappa" if var == "log" else "r")
    ax.set_ylabel("value")
    if spec.style.get("logy"):
        ax.set_yscale("log")
    ax.legend(frameon=False)
    ax.set_title("profile overlay")
    fig.tight_layout()
    _save(fig, spec.output)
    return {"curves": len(spec.inputs)}


def _render_spectrum(spec: FigureSpec):
    pairs, meta = read_spectrum(spec.inputs[0])
    fig, ax = plt.subplots(figsize=(5.2, 4.6))
    xpos = {"even": 0.0, "odd": 1.0}
    sub_zero = 0
    for _, parity, lam, _, zero_flag in pairs:
        x = xpos.get(parity, 2.0)
        below = lam < 0.0 and not zero_flag  # flagged zero modes are not Morse markers
        sub_zero += int(below)
        color = "tab:red" if below else ("tab:green" if zero_flag else "tab:blue")
        marker = "v" if below else ("o" if zero_flag else "_")
        ax.plot([x], [lam], marker, ms=11, color=color)
    ax.axhline(0.0, color="k", lw=0.8)
    edge = meta.get("essential_edge")
    if edge is not None:
        ax.axhline(edge, color="tab:gray", ls="--", lw=1.0)
        ax.text(1.45, edge, "essential edge", va="bottom", fontsize=8, color="tab:gray")
    ax.set_xticks([0, 1], ["even", "odd"])
    ax.set_xlim(-0.6, 1.9)
    ax.set_ylabel("eigenvalue")
    ax.set_title("eigenvalue ladder by parity")
    fig.tight_layout()
    _save(fig, spec.output)
    return {"sub_zero_markers": sub_zero, "n_pairs": len(pairs)}


def _render_branch(spec: FigureSpec):
    data = read_branch(spec.inputs[0])
    s = data["s"]
    if np.any(np.diff(s) == 0):
        raise FigureParseError(f"{spec.inputs[0]}: repeated s values on the branch")
    fig, axes = plt.subplots(2, 2, figsize=(8.4, 6.0), sharex=True)
    (a, b), (c, d) = axes
    a.plot(s, data["sup_norm"], "o-", ms=3)
    a.set_ylabel("sup norm")
    b.plot(s, data["min_value"], "o-", ms=3, color="tab:green")
    b.set_ylabel("min value")
    c.semilogy(s, np.maximum(data["residual"], 1e-17), "o-", ms=3, color="tab:orange")
    c.set_ylabel("residual")
    c.set_xlabel("s")
    d.step(s, data["morse_index_even"], where="mid", color="tab:red")
    d.set_ylim(-0.25, max(2.0, data["morse_index_even"].max() + 0.5))
    d.set_ylabel("even Morse index")
    d.set_xlabel("s")
    fig.suptitle("continuation branch diagnostics")
    fig.tight_layout()
    _save(fig, spec.output)
    return {"n_points": len(s), "monotone_s": bool(np.all(np.diff(s) > 0))}


def render(spec: FigureSpec) -> dict:
    """Write the figure for spec and return a small summary of what was drawn."""
    if spec.kind == "profile":
        return _render_profile(spec)
    if spec.kind == "spectrum":
        return _render_spectrum(spec)
    return _render_branch(spec)
