"""Multiscale behavior: a sharp step versus a diffuse ramp.

The test signal carries a unit step and a linear ramp of equal total rise.
At t=5 the narrow filter fires on the step and barely sees the ramp; at t=30
the wide filter picks up the diffuse variation instead.
"""

import argparse
from pathlib import Path

import numpy as np

from mahf.cli import main as mahf_main
from mahf.io_mesh import VertexSignal, write_mesh, write_signal_csv
from mahf.synthetic import flat_grid


def run(out_dir: Path) -> int:
    out_dir.mkdir(parents=True, exist_ok=True)
    mesh = flat_grid(40, 20, spacing=5.0)
    mesh_path = out_dir / "strip.off"
    write_mesh(mesh_path, mesh)
    x = mesh.vertices[:, 0]
    signal = np.where(x < 47.5, 0.0, 1.0)
    ramp = x >= 97.5
    signal = np.where(ramp, 1.0 + (x - 100.0) / (x.max() - 100.0), signal)
    signal_path = out_dir / "step_ramp.csv"
    write_signal_csv(signal_path, VertexSignal(signal, name="step_ramp"))
    return mahf_main([
        "filter", "--mesh", str(mesh_path), "--signal", str(signal_path),
        "--k", "1", "--t", "5", "--t", "30",
        "--out", str(out_dir / "multiscale.ply"),
    ])


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out-dir", type=Path, default=Path(__file__).parent / "out")
    args = ap.parse_args()
    raise SystemExit(run(args.out_dir))
