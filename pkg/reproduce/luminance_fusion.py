"""Separate luminance and geometry variation, then fuse them.

A striped color pattern is painted on a cube: luminance edges live inside
the flat faces while geometric variation lives on the creases.  Filtering
the luminance and the normal field separately keeps the two variation
sources apart; the fused field (beta = 1/3) combines them.
"""

import argparse
from pathlib import Path

import numpy as np

from mahf.cli import main as mahf_main
from mahf.io_mesh import Mesh, write_mesh
from mahf.synthetic import cube_surface


def striped_cube(divisions: int = 12, edge: float = 40.0) -> Mesh:
    base = cube_surface(divisions, edge)
    stripes = 0.5 + 0.5 * np.sign(np.sin(base.vertices[:, 0] * np.pi / 10.0 + 0.3))
    colors = np.column_stack([stripes, stripes, stripes])
    return Mesh(base.vertices, base.faces, colors=colors)


def run(out_dir: Path, mesh_path: str | None) -> int:
    out_dir.mkdir(parents=True, exist_ok=True)
    if mesh_path is None:
        mesh_path = out_dir / "striped_cube.ply"
        write_mesh(mesh_path, striped_cube())
    luminance_out = out_dir / "luminance_response.ply"
    code = mahf_main([
        "filter", "--mesh", str(mesh_path), "--luminance", "--k", "1",
        "--t", "10", "--out", str(luminance_out),
    ])
    if code:
        return code
    normal_out = out_dir / "normal_response.ply"
    code = mahf_main([
        "normal-variation", "--mesh", str(mesh_path), "--k", "1", "--t", "10",
        "--out", str(normal_out),
    ])
    if code:
        return code
    return mahf_main([
        "fuse", "--a", str(out_dir / "luminance_response_k1_t10.ply"),
        "--b", str(normal_out), "--beta", "0.333333",
        "--mesh", str(mesh_path), "--out", str(out_dir / "fusion.ply"),
    ])


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out-dir", type=Path, default=Path(__file__).parent / "out")
    ap.add_argument("--mesh", default=None,
                    help="optional real textured mesh (PLY with per-vertex colors)")
    args = ap.parse_args()
    raise SystemExit(run(args.out_dir, args.mesh))
