"""Heat-kernel rows on a sphere at increasing diffusion times.

Writes one scalar field per t; rendered side by side they show the kernel
spreading smoothly from a point source as t grows.
"""

import argparse
from pathlib import Path

from mahf.cli import main as mahf_main
from mahf.io_mesh import write_mesh
from mahf.synthetic import icosphere


def run(out_dir: Path, mesh_path: str | None) -> int:
    out_dir.mkdir(parents=True, exist_ok=True)
    if mesh_path is None:
        mesh_path = out_dir / "sphere.off"
        write_mesh(mesh_path, icosphere(3, radius=20.0))
    return mahf_main([
        "kernel", "--mesh", str(mesh_path), "--vertex", "0",
        "--t", "5", "--t", "25", "--t", "50", "--t", "100",
        "--out", str(out_dir / "kernel.ply"),
    ])


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out-dir", type=Path, default=Path(__file__).parent / "out")
    ap.add_argument("--mesh", default=None, help="optional real mesh instead of the sphere")
    args = ap.parse_args()
    raise SystemExit(run(args.out_dir, args.mesh))
