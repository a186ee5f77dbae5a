"""Command-line surface: ingest, assemble, filter, emit.

Every command writes its response fields plus a JSON manifest that records
all parameters and the library version, so a run can be re-executed exactly.
Exit codes: 0 success, 1 internal or numerical failure, 2 usage or input
error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .baselines import MhwSpec, mhw_normal_variation
from .errors import (GeometryError, MahfError, MeshFormatError, NumericalError,
                     OperatorError, SignalFormatError)
from .filters import FilterSpec, apply_filter, fuse, normal_variation
from .geometry import build_frames, pca_normals, vertex_normals
from .io_mesh import (REC601_WEIGHTS, Mesh, VertexSignal, parse_mesh,
                      parse_signal, rgb_to_luminance, write_response,
                      write_signal_csv)
from .laplacian import cotan_operator, gaussian_knn_operator
from .spectral import HeatParams, heat_kernel_row


def _add_mesh_args(p):
    p.add_argument("--mesh", required=True, help="input mesh or point-cloud file")
    p.add_argument("--mesh-format", choices=["off", "obj", "ply"], default=None,
                   help="override the format inferred from the suffix")
    p.add_argument("--triangulate", action="store_true",
                   help="fan-triangulate polygonal faces instead of rejecting them")


def _add_operator_args(p):
    p.add_argument("--operator", choices=["cotangent", "gaussian-knn"], default=None,
                   help="default: cotangent for meshes, gaussian-knn for point clouds")
    p.add_argument("--knn", type=int, default=8, help="neighbor count for gaussian-knn")
    p.add_argument("--sigma", default="auto",
                   help="gaussian width, or 'auto' for the mean k-th neighbor distance")


def _add_heat_args(p):
    p.add_argument("--t", dest="ts", action="append", type=float, required=True,
                   metavar="T", help="diffusion time; repeat for a multiscale sweep")
    p.add_argument("--order", type=int, default=50, help="Chebyshev order")
    p.add_argument("--support-threshold", type=float, default=1e-4,
                   help="relative kernel cutoff defining the localized support")
    p.add_argument("--area-normalize-t", action="store_true",
                   help="interpret t relative to a unit-area surface "
                        "(multiplies t by the total mass)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mahf",
        description="Multiscale anisotropic harmonic filtering of signals "
                    "on meshes, point clouds and graphs.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("filter", help="filter a per-vertex scalar signal")
    _add_mesh_args(p)
    _add_operator_args(p)
    _add_heat_args(p)
    p.add_argument("--k", type=int, default=1, help="harmonic order")
    p.add_argument("--signal", default=None, help="CSV file with one value per vertex")
    p.add_argument("--signal-property", default=None,
                   help="name of a per-vertex scalar property in the input PLY")
    p.add_argument("--luminance", action="store_true",
                   help="use the luminance of per-vertex colors as the signal")
    p.add_argument("--luma-weights", type=float, nargs=3, default=list(REC601_WEIGHTS),
                   metavar=("R", "G", "B"), help="luminance conversion weights")
    p.add_argument("--field", choices=["r2", "real", "imag"], default="r2",
                   help="which response component to write")
    p.add_argument("--out", required=True, help="output path (.ply or .csv)")
    p.set_defaults(func=cmd_filter)

    p = sub.add_parser("normal-variation",
                       help="aggregate filter response over the normal components")
    _add_mesh_args(p)
    _add_operator_args(p)
    _add_heat_args(p)
    p.add_argument("--k", type=int, default=1, help="harmonic order")
    p.add_argument("--baseline", choices=["mhw"], default=None,
                   help="write the Mexican Hat Wavelet aggregate instead")
    p.add_argument("--out", required=True, help="output path (.ply or .csv)")
    p.set_defaults(func=cmd_normal_variation)

    p = sub.add_parser("fuse", help="weighted sum of two response fields")
    p.add_argument("--a", required=True, help="first field (CSV or PLY)")
    p.add_argument("--b", required=True, help="second field (CSV or PLY)")
    p.add_argument("--a-property", default="quality")
    p.add_argument("--b-property", default="quality")
    p.add_argument("--beta", type=float, required=True, help="weight of the second field")
    p.add_argument("--mesh", default=None, help="mesh file, required for PLY output")
    p.add_argument("--mesh-format", choices=["off", "obj", "ply"], default=None)
    p.add_argument("--triangulate", action="store_true")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_fuse)

    p = sub.add_parser("kernel", help="emit heat-kernel rows as scalar fields")
    _add_mesh_args(p)
    _add_operator_args(p)
    _add_heat_args(p)
    p.add_argument("--vertex", type=int, required=True, help="source vertex index")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_kernel)
    return parser


def _load_mesh(args):
    return parse_mesh(args.mesh, fmt=args.mesh_format, triangulate=args.triangulate)


def _sigma_value(raw):
    if raw == "auto":
        return "auto"
    try:
        return float(raw)
    except ValueError:
        raise ValueError(f"--sigma must be a number or 'auto', got {raw!r}") from None


def _build_operator(args, mesh):
    kind = args.operator
    if kind is None:
        kind = "cotangent" if mesh.n_faces else "gaussian-knn"
    if kind == "cotangent":
        if mesh.n_faces == 0:
            raise OperatorError("cotangent operator requested for a point cloud; "
                                "use --operator gaussian-knn")
        return cotan_operator(mesh), kind
    return gaussian_knn_operator(mesh.vertices, args.knn, _sigma_value(args.sigma)), kind


def _frames_for(args, mesh):
    if mesh.normals is not None:
        normals = mesh.normals
    elif mesh.n_faces:
        normals = vertex_normals(mesh)
    else:
        normals = pca_normals(mesh.vertices, max(args.knn, 3))
    return build_frames(normals), normals


def _effective_ts(args, op):
    ts = sorted(set(args.ts))
    if any(t < 0 for t in ts):
        raise ValueError("diffusion times must be nonnegative")
    if args.area_normalize_t:
        total = float(op.mass.sum())
        return ts, [t * total for t in ts]
    return ts, ts


def _suffixed(out: Path, tag: str) -> Path:
    return out.with_name(f"{out.stem}{tag}{out.suffix}")


def _write_field(path: Path, mesh, field: VertexSignal):
    fmt = path.suffix.lower().lstrip(".")
    if fmt not in ("ply", "csv"):
        raise ValueError(f"output must be .ply or .csv, got {path.suffix!r}")
    write_response(path, mesh, field, fmt=fmt)


def _write_manifest(out: Path, command: str, parameters: dict, outputs: list[Path]):
    manifest = {
        "command": command,
        "version": __version__,
        "parameters": parameters,
        "outputs": [str(p) for p in outputs],
    }
    path = out.with_name(f"{out.stem}_manifest.json")
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")


def _common_parameters(args, kind, ts):
    return {
        "mesh": str(args.mesh),
        "mesh_format": args.mesh_format,
        "triangulate": args.triangulate,
        "operator": kind,
        "knn": args.knn,
        "sigma": args.sigma,
        "t": ts,
        "order": args.order,
        "support_threshold": args.support_threshold,
        "area_normalize_t": args.area_normalize_t,
    }


def cmd_filter(args) -> int:
    mesh = _load_mesh(args)
    sources = [args.signal is not None, args.signal_property is not None, args.luminance]
    if sum(sources) != 1:
        raise ValueError("exactly one of --signal, --signal-property, --luminance "
                         "must be given")
    if args.signal is not None:
        signal = parse_signal(args.signal, expected_length=mesh.n_vertices)
        source = {"signal": str(args.signal)}
    elif args.signal_property is not None:
        signal = parse_signal(args.mesh, property_name=args.signal_property,
                              expected_length=mesh.n_vertices)
        source = {"signal_property": args.signal_property}
    else:
        signal = rgb_to_luminance(mesh, weights=args.luma_weights)
        source = {"luminance": True, "luma_weights": list(args.luma_weights)}

    op, kind = _build_operator(args, mesh)
    frames, _ = _frames_for(args, mesh)
    ts_raw, ts_eff = _effective_ts(args, op)
    out = Path(args.out)
    outputs = []
    for t_raw, t_eff in zip(ts_raw, ts_eff):
        spec = FilterSpec(args.k, HeatParams(t_eff, args.order, args.support_threshold))
        response = apply_filter(op, frames, mesh.vertices, spec, signal)
        values = {"r2": response.r2, "real": response.r_real,
                  "imag": response.r_imag}[args.field]
        path = _suffixed(out, f"_k{args.k}_t{t_raw:g}")
        _write_field(path, mesh, VertexSignal(values, name=args.field))
        outputs.append(path)

    parameters = _common_parameters(args, kind, ts_raw)
    parameters.update(source)
    parameters.update({"k": args.k, "field": args.field, "out": str(out)})
    _write_manifest(out, "filter", parameters, outputs)
    return 0


def cmd_normal_variation(args) -> int:
    mesh = _load_mesh(args)
    op, kind = _build_operator(args, mesh)
    frames, normals = _frames_for(args, mesh)
    if mesh.normals is None:
        mesh = Mesh(mesh.vertices, mesh.faces, colors=mesh.colors, normals=normals)
    ts_raw, ts_eff = _effective_ts(args, op)
    out = Path(args.out)
    outputs = []
    for t_raw, t_eff in zip(ts_raw, ts_eff):
        if args.baseline == "mhw":
            field = mhw_normal_variation(mesh, op, MhwSpec(t_eff, args.order))
        else:
            spec = FilterSpec(args.k, HeatParams(t_eff, args.order,
                                                 args.support_threshold))
            field = normal_variation(mesh, op, frames, spec)
        path = _suffixed(out, f"_k{args.k}_t{t_raw:g}") if len(ts_raw) > 1 else out
        _write_field(path, mesh, field)
        outputs.append(path)

    parameters = _common_parameters(args, kind, ts_raw)
    parameters.update({"k": args.k, "baseline": args.baseline, "out": str(out)})
    _write_manifest(out, "normal-variation", parameters, outputs)
    return 0


def _load_field(path_str: str, property_name: str) -> VertexSignal:
    return parse_signal(path_str, property_name=property_name)


def cmd_fuse(args) -> int:
    a = _load_field(args.a, args.a_property)
    b = _load_field(args.b, args.b_property)
    if len(a) != len(b):
        raise SignalFormatError(f"field lengths differ: {len(a)} vs {len(b)}")
    fused = fuse(a, b, args.beta)
    out = Path(args.out)
    if out.suffix.lower() == ".ply":
        if args.mesh is None:
            raise ValueError("PLY output requires --mesh")
        mesh = _load_mesh(args)
        _write_field(out, mesh, fused)
    elif out.suffix.lower() == ".csv":
        write_signal_csv(out, fused)
    else:
        raise ValueError(f"output must be .ply or .csv, got {out.suffix!r}")
    _write_manifest(out, "fuse", {
        "a": str(args.a), "b": str(args.b),
        "a_property": args.a_property, "b_property": args.b_property,
        "beta": args.beta, "mesh": args.mesh, "out": str(out),
    }, [out])
    return 0


def cmd_kernel(args) -> int:
    mesh = _load_mesh(args)
    op, kind = _build_operator(args, mesh)
    if not 0 <= args.vertex < mesh.n_vertices:
        raise ValueError(f"vertex {args.vertex} out of range for "
                         f"{mesh.n_vertices} vertices")
    ts_raw, ts_eff = _effective_ts(args, op)
    out = Path(args.out)
    outputs = []
    for t_raw, t_eff in zip(ts_raw, ts_eff):
        row = heat_kernel_row(op, HeatParams(t_eff, args.order,
                                             args.support_threshold), args.vertex)
        path = _suffixed(out, f"_v{args.vertex}_t{t_raw:g}")
        _write_field(path, mesh, VertexSignal(row.values, name="kernel"))
        outputs.append(path)

    parameters = _common_parameters(args, kind, ts_raw)
    parameters.update({"vertex": args.vertex, "out": str(out)})
    _write_manifest(out, "kernel", parameters, outputs)
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else 0
    try:
        return int(args.func(args) or 0)
    except (FileNotFoundError, IsADirectoryError, PermissionError,
            MeshFormatError, SignalFormatError, GeometryError, OperatorError,
            ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (NumericalError, ArithmeticError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return 1
    except MahfError as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
