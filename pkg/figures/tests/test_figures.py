import json
import subprocess
import sys

import pytest

from henonfigures import FigureParseError, FigureSpec, render
from henonfigures.cli import main as cli_main

PROFILE_CSV = """# henonlab profile v1
# N=3 s=0.5 alpha=0 p=2
# variable=log parity=even L=4 M=9
coordinate,value
-4,0.0366
-3,0.0993
-2,0.2658
-1,0.6481
0,1.0
1,0.6481
2,0.2658
3,0.0993
4,0.0366
"""

SPECTRUM_CSV = """# henonlab spectrum report v1
index,parity,eigenvalue,sign_changes,zero_mode_flag
0,even,-0.8254,0,0
1,odd,-2.6e-14,0,1
2,even,0.4388,1,0
"""

BRANCH_CSV = """# henonlab branch v1
s,sup_norm,min_value,residual,morse_index_even,L2_norm,Lp1_norm,newton_iters
0.6,1.04,1e-06,2e-12,1,1.8,1.5,3
0.62,1.03,1e-06,3e-12,1,1.79,1.49,2
0.66,1.01,1e-06,1e-12,1,1.77,1.48,2
0.74,0.95,1e-06,2e-12,1,1.72,1.44,2
"""


@pytest.fixture()
def artifacts(tmp_path):
    (tmp_path / "profile.csv").write_text(PROFILE_CSV)
    (tmp_path / "oracle.csv").write_text(PROFILE_CSV.replace("1.0\n", "0.999\n"))
    (tmp_path / "spectrum.csv").write_text(SPECTRUM_CSV)
    (tmp_path / "spectrum.json").write_text(json.dumps({"essential_edge": 0.6366}))
    (tmp_path / "branch.csv").write_text(BRANCH_CSV)
    return tmp_path


def test_profile_overlay(artifacts, tmp_path):
    out = tmp_path / "profile.png"
    spec = FigureSpec(
        kind="profile",
        inputs=[str(artifacts / "profile.csv"), str(artifacts / "oracle.csv")],
        output=str(out),
    )
    summary = render(spec)
    assert summary["curves"] == 2
    assert out.exists() and out.stat().st_size > 0


def test_spectrum_ladder_counts_sub_zero(artifacts, tmp_path):
    out = tmp_path / "spectrum.png"
    spec = FigureSpec(kind="spectrum", inputs=[str(artifacts / "spectrum.csv")], output=str(out))
    summary = render(spec)
    assert summary["sub_zero_markers"] == 1  # Morse index one: single marker below zero
    assert summary["n_pairs"] == 3
    assert out.exists() and out.stat().st_size > 0


def test_branch_traces(artifacts, tmp_path):
    out = tmp_path / "branch.png"
    spec = FigureSpec(kind="branch", inputs=[str(artifacts / "branch.csv")], output=str(out))
    summary = render(spec)
    assert summary["n_points"] == 4
    assert summary["monotone_s"] is True
    assert out.exists()


def test_rerender_byte_stable(artifacts, tmp_path):
    out1, out2 = tmp_path / "a.png", tmp_path / "b.png"
    for out in (out1, out2):
        render(FigureSpec(kind="spectrum", inputs=[str(artifacts / "spectrum.csv")], output=str(out)))
    assert out1.read_bytes() == out2.read_bytes()


def test_missing_input_named():
    with pytest.raises(FigureParseError) as exc:
        FigureSpec(kind="profile", inputs=["/nonexistent/x.csv"], output="o.png")
    assert "/nonexistent/x.csv" in str(exc.value)


def test_unknown_kind_rejected():
    with pytest.raises(FigureParseError):
        FigureSpec(kind="surface", inputs=["x.csv"], output="o.png")


def test_malformed_row_names_file_and_line(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("coordinate,value\n0,1\n1\n")
    with pytest.raises(FigureParseError) as exc:
        render(FigureSpec(kind="profile", inputs=[str(bad)], output=str(tmp_path / "o.png")))
    assert "bad.csv:3" in str(exc.value)


def test_branch_missing_column_explicit(tmp_path):
    bad = tmp_path / "branch.csv"
    bad.write_text("s,sup_norm\n0.6,1.0\n")
    with pytest.raises(FigureParseError) as exc:
        render(FigureSpec(kind="branch", inputs=[str(bad)], output=str(tmp_path / "o.png")))
    assert "missing branch columns" in str(exc.value)


def test_cli_roundtrip(artifacts, tmp_path):
    out = tmp_path / "cli.png"
    rc = cli_main(["spectrum", "--in", str(artifacts / "spectrum.csv"), "--out", str(out)])
    assert rc == 0 and out.exists()
    rc_bad = cli_main(["profile", "--in", "/nope.csv", "--out", str(tmp_path / "x.png")])
    assert rc_bad == 1


def test_on_real_primary_artifacts(tmp_path):
    """Integration: render the actual artifacts the primary CLI emits."""
    env_runs = tmp_path / "runs"
    for args in (
        ["solve", "--N", "3", "--s", "0.5", "--alpha", "0", "--L", "12", "--M", "601",
         "--out", str(env_runs / "solve")],
        ["spectrum", "--N", "3", "--s", "0.5", "--alpha", "0", "--L", "12", "--M", "601",
         "--out", str(env_runs / "spectrum")],
        ["branch", "--N", "3", "--p", "3.0", "--s0", "0.6", "--s-end", "0.66",
         "--L", "12", "--M", "501", "--out", str(env_runs / "branch")],
    ):
        r = subprocess.run(
            [sys.executable, "-m", "henonlab.cli", *args], capture_output=True, text=True
        )
        assert r.returncode == 0, r.stderr
    s1 = render(FigureSpec(kind="profile",
                           inputs=[str(env_runs / "solve" / "profile.csv")],
                           output=str(tmp_path / "p.png")))
    s2 = render(FigureSpec(kind="spectrum",
                           inputs=[str(env_runs / "spectrum" / "spectrum.csv")],
                           output=str(tmp_path / "s.png")))
    s3 = render(FigureSpec(kind="branch",
                           inputs=[str(env_runs / "branch" / "branch.csv")],
                           output=str(tmp_path / "b.png")))
    assert s1["curves"] == 1
    assert s2["sub_zero_markers"] == 1  # ground state has Morse index one
    assert s3["monotone_s"] is True
