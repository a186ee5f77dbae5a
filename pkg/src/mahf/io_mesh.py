"""ASCII mesh and per-vertex signal I/O.

Reads and writes the ASCII variants of OFF, OBJ and PLY plus newline-separated
CSV columns for per-vertex scalars.  Vertex order is authoritative: every
signal and response field is positionally aligned with the vertex sequence of
the file it came from.  Binary PLY is rejected; ASCII keeps the surface
testable and diffable.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import MeshFormatError, SignalFormatError

REC601_WEIGHTS = (0.299, 0.587, 0.114)

# %.17g round-trips float64 exactly through decimal text
_FMT = "%.17g"

_PLY_INT_TYPES = {"char", "uchar", "short", "ushort", "int", "uint",
                  "int8", "uint8", "int16", "uint16", "int32", "uint32"}
_PLY_FLOAT_TYPES = {"float", "double", "float32", "float64"}


@dataclass(frozen=True)
class Mesh:
    """Triangle mesh, or a point cloud when ``faces`` is empty.

    Parameters
    ----------
    vertices : (N, 3) float array
        Vertex positions in model units.
    faces : (F, 3) int array
        Vertex-index triples; may be empty for point clouds.
    colors : (N, 3) float array, optional
        Per-vertex RGB in [0, 1].
    normals : (N, 3) float array, optional
        Per-vertex unit normals.
    """

    vertices: np.ndarray
    faces: np.ndarray
    colors: np.ndarray | None = None
    normals: np.ndarray | None = None

    def __post_init__(self):
        v = np.ascontiguousarray(np.asarray(self.vertices, dtype=np.float64))
        if v.ndim != 2 or v.shape[1] != 3:
            raise ValueError(f"vertices must be (N, 3), got {v.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("vertices contain non-finite values")
        f = np.asarray(self.faces, dtype=np.int64)
        if f.size == 0:
            f = np.zeros((0, 3), dtype=np.int64)
        if f.ndim != 2 or f.shape[1] != 3:
            raise ValueError(f"faces must be (F, 3), got {f.shape}")
        n = v.shape[0]
        if f.size:
            if f.min() < 0 or f.max() >= n:
                raise ValueError("face index out of range")
            degenerate = (f[:, 0] == f[:, 1]) | (f[:, 1] == f[:, 2]) | (f[:, 0] == f[:, 2])
            if degenerate.any():
                raise ValueError(f"face {int(np.flatnonzero(degenerate)[0])} repeats a vertex index")
        object.__setattr__(self, "vertices", v)
        object.__setattr__(self, "faces", np.ascontiguousarray(f))

        if self.colors is not None:
            c = np.ascontiguousarray(np.asarray(self.colors, dtype=np.float64))
            if c.shape != (n, 3):
                raise ValueError(f"colors must be ({n}, 3), got {c.shape}")
            if c.min() < -1e-9 or c.max() > 1 + 1e-9:
                raise ValueError("colors must lie in [0, 1]")
            object.__setattr__(self, "colors", np.clip(c, 0.0, 1.0))
        if self.normals is not None:
            m = np.ascontiguousarray(np.asarray(self.normals, dtype=np.float64))
            if m.shape != (n, 3):
                raise ValueError(f"normals must be ({n}, 3), got {m.shape}")
            norms = np.linalg.norm(m, axis=1)
            if np.max(np.abs(norms - 1.0)) > 1e-6:
                raise ValueError("normals must have unit length (within 1e-6)")
            object.__setattr__(self, "normals", m)

    @property
    def n_vertices(self) -> int:
        return self.vertices.shape[0]

    @property
    def n_faces(self) -> int:
        return self.faces.shape[0]

    @property
    def is_point_cloud(self) -> bool:
        return self.faces.shape[0] == 0


@dataclass(frozen=True)
class VertexSignal:
    """Real scalar per vertex, positionally aligned with a mesh."""

    values: np.ndarray
    name: str = "signal"

    def __post_init__(self):
        v = np.ascontiguousarray(np.asarray(self.values, dtype=np.float64)).reshape(-1)
        if not np.all(np.isfinite(v)):
            raise ValueError(f"signal '{self.name}' contains non-finite values")
        object.__setattr__(self, "values", v)

    def __len__(self) -> int:
        return self.values.shape[0]


def _meaningful_lines(text: str) -> list[str]:
    """Non-empty lines with '#' comments stripped (OFF/OBJ convention)."""
    out = []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if line:
            out.append(line)
    return out


def _floats(tokens, path, what):
    try:
        return [float(t) for t in tokens]
    except ValueError as exc:
        raise MeshFormatError(f"{path}: non-numeric token in {what}: {exc}") from None


def _scale_colors(c: np.ndarray) -> np.ndarray:
    # byte-valued colors are common in OFF/COFF files
    if c.size and c.max() > 1.0 + 1e-9:
        c = c / 255.0
    return c


def _fan_triangulate(indices, triangulate, path):
    if len(indices) < 3:
        raise MeshFormatError(f"{path}: face with fewer than 3 vertices")
    if len(indices) == 3:
        return [tuple(indices)]
    if not triangulate:
        raise MeshFormatError(
            f"{path}: non-triangle face with {len(indices)} sides "
            "(pass triangulate=True to fan-triangulate)")
    return [(indices[0], indices[i], indices[i + 1]) for i in range(1, len(indices) - 1)]


def _parse_off(path: Path, triangulate: bool) -> Mesh:
    lines = _meaningful_lines(path.read_text())
    if not lines:
        raise MeshFormatError(f"{path}: empty file")
    head = lines[0].split()
    if head[0] not in ("OFF", "COFF"):
        raise MeshFormatError(f"{path}: malformed header, expected OFF or COFF")
    has_colors = head[0] == "COFF"
    if len(head) == 4:
        counts, body = head[1:], lines[1:]
    elif len(head) == 1:
        if len(lines) < 2:
            raise MeshFormatError(f"{path}: missing count line")
        counts, body = lines[1].split(), lines[2:]
    else:
        raise MeshFormatError(f"{path}: malformed header line")
    try:
        nv, nf, _ne = (int(c) for c in counts)
    except ValueError:
        raise MeshFormatError(f"{path}: malformed count line") from None

    if len(body) != nv + nf:
        raise MeshFormatError(
            f"{path}: count mismatch (declared {nv} vertices and {nf} faces, "
            f"found {len(body)} records)")
    verts, colors = [], []
    for line in body[:nv]:
        row = _floats(line.split(), path, "vertex record")
        if len(row) == 3:
            verts.append(row)
        elif len(row) >= 6:
            verts.append(row[:3])
            colors.append(row[3:6])
        else:
            raise MeshFormatError(f"{path}: vertex record with {len(row)} columns")
    if has_colors and len(colors) not in (0, nv):
        raise MeshFormatError(f"{path}: COFF vertex records missing color columns")

    faces = []
    for line in body[nv:]:
        toks = line.split()
        try:
            row = [int(t) for t in toks]
        except ValueError:
            raise MeshFormatError(f"{path}: non-numeric token in face record") from None
        if not row or len(row) != row[0] + 1:
            raise MeshFormatError(f"{path}: face record arity mismatch")
        faces.extend(_fan_triangulate(row[1:], triangulate, path))

    kw = {}
    if colors:
        kw["colors"] = _scale_colors(np.asarray(colors))
    try:
        return Mesh(np.asarray(verts, dtype=np.float64).reshape(-1, 3), faces, **kw)
    except ValueError as exc:
        raise MeshFormatError(f"{path}: {exc}") from None


def _parse_obj(path: Path, triangulate: bool) -> Mesh:
    verts, colors, vns = [], [], []
    corners: list[tuple[int, int | None]] = []
    face_arity: list[int] = []
    for line in _meaningful_lines(path.read_text()):
        toks = line.split()
        key = toks[0]
        if key == "v":
            row = _floats(toks[1:], path, "vertex record")
            if len(row) in (3, 4):
                verts.append(row[:3])
            elif len(row) >= 6:
                verts.append(row[:3])
                colors.append(row[3:6])
            else:
                raise MeshFormatError(f"{path}: vertex record with {len(row)} columns")
        elif key == "vn":
            row = _floats(toks[1:], path, "normal record")
            if len(row) != 3:
                raise MeshFormatError(f"{path}: vn record with {len(row)} columns")
            vns.append(row)
        elif key == "f":
            refs = toks[1:]
            face_arity.append(len(refs))
            for ref in refs:
                parts = ref.split("/")
                if not parts[0]:
                    raise MeshFormatError(f"{path}: face token missing vertex index: {ref!r}")
                try:
                    vi = int(parts[0])
                    ni = int(parts[2]) if len(parts) >= 3 and parts[2] else None
                except ValueError:
                    raise MeshFormatError(f"{path}: non-numeric face token {ref!r}") from None
                vi = vi - 1 if vi > 0 else len(verts) + vi
                if ni is not None:
                    ni = ni - 1 if ni > 0 else len(vns) + ni
                corners.append((vi, ni))
        # vt, usemtl, mtllib, g, o, s and friends are ignored

    faces = []
    pos = 0
    normals_match = bool(vns) and len(vns) == len(verts)
    for arity in face_arity:
        group = corners[pos:pos + arity]
        pos += arity
        for ref_v, ref_n in group:
            if ref_n is not None and ref_n != ref_v:
                # per-corner normals that do not mirror vertex order cannot be
                # attached as per-vertex data
                normals_match = False
        faces.extend(_fan_triangulate([c[0] for c in group], triangulate, path))

    kw = {}
    if colors:
        if len(colors) != len(verts):
            raise MeshFormatError(f"{path}: only some vertex records carry colors")
        kw["colors"] = _scale_colors(np.asarray(colors))
    if normals_match:
        m = np.asarray(vns, dtype=np.float64)
        norms = np.linalg.norm(m, axis=1)
        if np.any(norms == 0):
            raise MeshFormatError(f"{path}: zero-length vertex normal")
        kw["normals"] = m / norms[:, None]
    try:
        return Mesh(np.asarray(verts, dtype=np.float64).reshape(-1, 3), faces, **kw)
    except ValueError as exc:
        raise MeshFormatError(f"{path}: {exc}") from None


def _read_ply(path: Path, triangulate: bool):
    """Parse an ASCII PLY into (vertex column table, faces, int-typed names)."""
    lines = [ln.rstrip("\n") for ln in path.read_text().splitlines()]
    it = iter(line.strip() for line in lines)
    try:
        first = next(tok for tok in it if tok)
    except StopIteration:
        raise MeshFormatError(f"{path}: empty file") from None
    if first != "ply":
        raise MeshFormatError(f"{path}: malformed header, expected 'ply'")

    elements: list[tuple[str, int, list[tuple[str, str]]]] = []
    fmt_seen = False
    for line in it:
        if not line or line.startswith("comment") or line.startswith("obj_info"):
            continue
        toks = line.split()
        if toks[0] == "format":
            if len(toks) < 2 or toks[1] != "ascii":
                raise MeshFormatError(f"{path}: binary PLY is not supported, "
                                      "convert the file to ascii")
            fmt_seen = True
        elif toks[0] == "element":
            if len(toks) != 3:
                raise MeshFormatError(f"{path}: malformed element line")
            try:
                elements.append((toks[1], int(toks[2]), []))
            except ValueError:
                raise MeshFormatError(f"{path}: malformed element count") from None
        elif toks[0] == "property":
            if not elements:
                raise MeshFormatError(f"{path}: property before any element")
            if toks[1] == "list":
                if len(toks) != 5:
                    raise MeshFormatError(f"{path}: malformed list property")
                elements[-1][2].append(("list", toks[4]))
            else:
                if len(toks) != 3:
                    raise MeshFormatError(f"{path}: malformed property line")
                elements[-1][2].append((toks[1], toks[2]))
        elif toks[0] == "end_header":
            break
        else:
            raise MeshFormatError(f"{path}: unexpected header keyword {toks[0]!r}")
    else:
        raise MeshFormatError(f"{path}: missing end_header")
    if not fmt_seen:
        raise MeshFormatError(f"{path}: missing format line")

    data = [line for line in it if line]
    cursor = 0
    columns: dict[str, np.ndarray] = {}
    int_typed: set[str] = set()
    faces: list[tuple[int, int, int]] = []
    for name, count, props in elements:
        if name == "vertex":
            if any(t == "list" for t, _ in props):
                raise MeshFormatError(f"{path}: list properties on vertices are unsupported")
            rows = data[cursor:cursor + count]
            if len(rows) < count:
                raise MeshFormatError(f"{path}: vertex count mismatch "
                                      f"(declared {count}, found {len(rows)})")
            cursor += count
            table = np.empty((count, len(props)), dtype=np.float64)
            for r, row in enumerate(rows):
                toks = row.split()
                if len(toks) != len(props):
                    raise MeshFormatError(f"{path}: vertex row has {len(toks)} columns, "
                                          f"expected {len(props)}")
                table[r] = _floats(toks, path, "vertex record")
            for c, (ptype, pname) in enumerate(props):
                columns[pname] = table[:, c]
                if ptype in _PLY_INT_TYPES:
                    int_typed.add(pname)
        elif name == "face":
            if len(props) != 1 or props[0][0] != "list" or \
                    props[0][1] not in ("vertex_indices", "vertex_index"):
                raise MeshFormatError(f"{path}: unsupported face properties")
            rows = data[cursor:cursor + count]
            if len(rows) < count:
                raise MeshFormatError(f"{path}: face count mismatch "
                                      f"(declared {count}, found {len(rows)})")
            cursor += count
            for row in rows:
                try:
                    vals = [int(t) for t in row.split()]
                except ValueError:
                    raise MeshFormatError(f"{path}: non-numeric token in face record") from None
                if not vals or len(vals) != vals[0] + 1:
                    raise MeshFormatError(f"{path}: face record arity mismatch")
                faces.extend(_fan_triangulate(vals[1:], triangulate, path))
        else:
            # unknown scalar-only elements are skipped row-by-row
            cursor += count
    if cursor < len(data):
        raise MeshFormatError(f"{path}: trailing content after declared elements")
    return columns, faces, int_typed


def _mesh_from_ply(path: Path, triangulate: bool) -> Mesh:
    columns, faces, int_typed = _read_ply(path, triangulate)
    for axis in ("x", "y", "z"):
        if axis not in columns:
            raise MeshFormatError(f"{path}: vertex element lacks '{axis}' property")
    verts = np.column_stack([columns["x"], columns["y"], columns["z"]])
    kw = {}
    if all(c in columns for c in ("red", "green", "blue")):
        rgb = np.column_stack([columns["red"], columns["green"], columns["blue"]])
        if {"red", "green", "blue"} & int_typed:
            rgb = rgb / 255.0
        kw["colors"] = rgb
    if all(c in columns for c in ("nx", "ny", "nz")):
        m = np.column_stack([columns["nx"], columns["ny"], columns["nz"]])
        norms = np.linalg.norm(m, axis=1)
        if np.any(norms == 0):
            raise MeshFormatError(f"{path}: zero-length vertex normal")
        kw["normals"] = m / norms[:, None]
    try:
        return Mesh(verts, faces, **kw)
    except ValueError as exc:
        raise MeshFormatError(f"{path}: {exc}") from None


_PARSERS = {"off": _parse_off, "obj": _parse_obj, "ply": _mesh_from_ply,
            "ply-ascii": _mesh_from_ply}


def detect_format(path: str | Path) -> str:
    suffix = Path(path).suffix.lower().lstrip(".")
    if suffix in ("off", "obj", "ply"):
        return suffix
    raise MeshFormatError(f"{path}: cannot infer mesh format from suffix {suffix!r}")


def parse_mesh(path: str | Path, fmt: str | None = None, triangulate: bool = False) -> Mesh:
    """Parse an OFF/OBJ/PLY-ascii file into a validated :class:`Mesh`.

    Raises :class:`MeshFormatError` for any malformed input; a partially
    constructed mesh never escapes.
    """
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"no such mesh file: {path}")
    fmt = fmt or detect_format(path)
    try:
        parser = _PARSERS[fmt.lower()]
    except KeyError:
        raise MeshFormatError(f"unsupported mesh format {fmt!r}") from None
    return parser(path, triangulate)


def parse_signal(path: str | Path, *, property_name: str = "quality",
                 expected_length: int | None = None) -> VertexSignal:
    """Read a per-vertex scalar from a CSV column or a PLY vertex property."""
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"no such signal file: {path}")
    if path.suffix.lower() == ".ply":
        columns, _faces, _ = _read_ply(path, triangulate=False)
        if property_name not in columns:
            raise SignalFormatError(f"{path}: no per-vertex property named {property_name!r}")
        values, name = columns[property_name], property_name
    else:
        values, name = _read_csv_column(path)
    if expected_length is not None and len(values) != expected_length:
        raise SignalFormatError(f"{path}: signal has {len(values)} values, "
                                f"expected {expected_length}")
    try:
        return VertexSignal(values, name=name)
    except ValueError as exc:
        raise SignalFormatError(f"{path}: {exc}") from None


def _read_csv_column(path: Path):
    lines = [ln.strip().rstrip(",") for ln in path.read_text().splitlines()]
    lines = [ln for ln in lines if ln]
    if not lines:
        raise SignalFormatError(f"{path}: empty signal file")
    name = path.stem
    start = 0
    try:
        float(lines[0])
    except ValueError:
        name, start = lines[0], 1   # single optional header line
    values = []
    for ln in lines[start:]:
        if len(ln.split()) != 1 or "," in ln:
            raise SignalFormatError(f"{path}: expected one value per line, got {ln!r}")
        try:
            values.append(float(ln))
        except ValueError:
            raise SignalFormatError(f"{path}: non-numeric token {ln!r}") from None
    return np.asarray(values, dtype=np.float64), name


def _vertex_rows(mesh: Mesh) -> np.ndarray:
    if mesh.normals is not None:
        return np.hstack([mesh.vertices, mesh.normals])
    return mesh.vertices


def write_mesh(path: str | Path, mesh: Mesh, fmt: str | None = None) -> None:
    """Serialize a mesh as OFF/OBJ/PLY-ascii, round-trippable bit-exactly."""
    path = Path(path)
    fmt = (fmt or detect_format(path)).lower()
    if fmt == "off":
        _write_off(path, mesh)
    elif fmt == "obj":
        _write_obj(path, mesh)
    elif fmt in ("ply", "ply-ascii"):
        _write_ply(path, mesh, field=None)
    else:
        raise MeshFormatError(f"unsupported mesh format {fmt!r}")


def _write_off(path: Path, mesh: Mesh) -> None:
    with open(path, "w") as fh:
        fh.write("COFF\n" if mesh.colors is not None else "OFF\n")
        fh.write(f"{mesh.n_vertices} {mesh.n_faces} 0\n")
        rows = mesh.vertices if mesh.colors is None else np.hstack([mesh.vertices, mesh.colors])
        for row in rows:
            fh.write(" ".join(_FMT % v for v in row) + "\n")
        for f in mesh.faces:
            fh.write(f"3 {f[0]} {f[1]} {f[2]}\n")


def _write_obj(path: Path, mesh: Mesh) -> None:
    with open(path, "w") as fh:
        rows = mesh.vertices if mesh.colors is None else np.hstack([mesh.vertices, mesh.colors])
        for row in rows:
            fh.write("v " + " ".join(_FMT % v for v in row) + "\n")
        if mesh.normals is not None:
            for row in mesh.normals:
                fh.write("vn " + " ".join(_FMT % v for v in row) + "\n")
            for f in mesh.faces:
                fh.write(f"f {f[0]+1}//{f[0]+1} {f[1]+1}//{f[1]+1} {f[2]+1}//{f[2]+1}\n")
        else:
            for f in mesh.faces:
                fh.write(f"f {f[0]+1} {f[1]+1} {f[2]+1}\n")


def _write_ply(path: Path, mesh: Mesh, field: VertexSignal | None) -> None:
    with open(path, "w") as fh:
        fh.write("ply\nformat ascii 1.0\n")
        fh.write(f"element vertex {mesh.n_vertices}\n")
        fh.write("property float x\nproperty float y\nproperty float z\n")
        if mesh.normals is not None:
            fh.write("property float nx\nproperty float ny\nproperty float nz\n")
        if mesh.colors is not None:
            fh.write("property uchar red\nproperty uchar green\nproperty uchar blue\n")
        if field is not None:
            fh.write("property float quality\n")
        fh.write(f"element face {mesh.n_faces}\n")
        fh.write("property list uchar int vertex_indices\n")
        fh.write("end_header\n")
        base = _vertex_rows(mesh)
        colors = None
        if mesh.colors is not None:
            colors = np.rint(mesh.colors * 255.0).astype(int)
        for i in range(mesh.n_vertices):
            toks = [_FMT % v for v in base[i]]
            if colors is not None:
                toks.extend(str(c) for c in colors[i])
            if field is not None:
                toks.append(_FMT % field.values[i])
            fh.write(" ".join(toks) + "\n")
        for f in mesh.faces:
            fh.write(f"3 {f[0]} {f[1]} {f[2]}\n")


def write_response(path: str | Path, mesh: Mesh, field: VertexSignal,
                   fmt: str | None = None) -> None:
    """Emit a response field for external visualization.

    PLY output carries the field as a per-vertex float property named
    ``quality``; CSV output is one value per vertex in vertex order.
    """
    path = Path(path)
    if len(field) != mesh.n_vertices:
        raise ValueError(f"field has {len(field)} values for a mesh with "
                         f"{mesh.n_vertices} vertices")
    fmt = (fmt or path.suffix.lower().lstrip(".")).lower()
    if fmt in ("ply", "ply-ascii"):
        _write_ply(path, mesh, field)
    elif fmt == "csv":
        write_signal_csv(path, field)
    else:
        raise MeshFormatError(f"unsupported response format {fmt!r}")


def write_signal_csv(path: str | Path, field: VertexSignal) -> None:
    """One decimal value per line, in vertex order."""
    with open(path, "w") as fh:
        for v in field.values:
            fh.write(_FMT % v + "\n")


def rgb_to_luminance(mesh: Mesh, weights=REC601_WEIGHTS) -> VertexSignal:
    """Per-vertex luminance from RGB colors (Rec. 601 weights by default)."""
    if mesh.colors is None:
        raise ValueError("mesh has no per-vertex colors")
    w = np.asarray(weights, dtype=np.float64)
    if w.shape != (3,):
        raise ValueError("weights must be three numbers")
    return VertexSignal(mesh.colors @ w, name="luminance")
