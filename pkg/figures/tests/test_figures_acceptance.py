"""Secondary acceptance: figures on the real artifacts of criteria 3, 4, 6."""

import subprocess
import sys

import pytest

from henonfigures import FigureSpec, render


def run_primary(args):
    r = subprocess.run(
        [sys.executable, "-m", "henonlab.cli", *args], capture_output=True, text=True
    )
    assert r.returncode == 0, r.stderr


@pytest.fixture(scope="module")
def production_artifacts(tmp_path_factory):
    root = tmp_path_factory.mktemp("runs")
    run_primary(
        ["spectrum", "--N", "3", "--s", "0.5", "--alpha", "0", "--L", "18", "--M", "2001",
         "--out", str(root / "spec")]
    )
    run_primary(
        ["branch", "--N", "3", "--p", "3.0", "--s0", "0.6", "--s-end", "0.999",
         "--L", "18", "--M", "2001", "--out", str(root / "branch")]
    )
    return root


def test_criterion_9_figures(production_artifacts, tmp_path):
    root = production_artifacts
    # criterion 3 artifact: the ground-state profile (written by the spectrum run)
    s_prof = render(
        FigureSpec(kind="profile", inputs=[str(root / "spec" / "profile.csv")],
                   output=str(tmp_path / "profile.png"))
    )
    assert s_prof["curves"] == 1
    # criterion 4 artifact: the parity spectrum; exactly one sub-zero marker
    out1 = tmp_path / "ladder.png"
    s_spec = render(
        FigureSpec(kind="spectrum", inputs=[str(root / "spec" / "spectrum.csv")],
                   output=str(out1))
    )
    assert s_spec["sub_zero_markers"] == 1
    # criterion 6 artifact: the continuation branch
    s_branch = render(
        FigureSpec(kind="branch", inputs=[str(root / "branch" / "branch.csv")],
                   output=str(tmp_path / "branch.png"))
    )
    assert s_branch["monotone_s"] is True
    # re-render is byte-stable
    out2 = tmp_path / "ladder2.png"
    render(FigureSpec(kind="spectrum", inputs=[str(root / "spec" / "spectrum.csv")],
                      output=str(out2)))
    assert out1.read_bytes() == out2.read_bytes()
    print("ACCEPTANCE 9: PASS — profile/spectrum/branch rendered, one sub-zero marker, "
          "byte-stable re-render")


def test_primary_has_no_secondary_dependency():
    """The primary suite (criteria 1-8) runs with this package absent."""
    import henonlab
    import os

    src = os.path.dirname(henonlab.__file__)
    for name in os.listdir(src):
        if name.endswith(".py"):
            with open(os.path.join(src, name)) as f:
                assert "henonfigures" not in f.read()
