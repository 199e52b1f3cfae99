"""Mesh ingestion and export: OFF, OBJ (triangles only) and the canonical dump.

The canonical dump is plain text, one record per line::

    v <id> <x> <y> <z>
    f <i> <j> <k>
    el <i> <j> <length>

``el`` lines override lengths derived from the ``v`` coordinates, which lets
intrinsic surfaces (doubled squares, surgered tubes) round-trip exactly.
"""

import numpy as np

from .errors import ParseError
from .surface import TriangulatedSurface, edge_key


def load_surface(data, fmt):
    """Parse ``data`` (bytes or str) in the declared format into a surface.

    ``fmt`` is one of ``"OFF"``, ``"OBJ"``, ``"DUMP"``.  Validation and
    orientation fixing happen in the surface constructor.
    """
    if isinstance(data, bytes):
        data = data.decode("utf-8", errors="replace")
    fmt = fmt.upper()
    if fmt == "OFF":
        coords, faces = _parse_off(data)
        return TriangulatedSurface(faces, coords=coords)
    if fmt == "OBJ":
        coords, faces = _parse_obj(data)
        return TriangulatedSurface(faces, coords=coords)
    if fmt == "DUMP":
        return loads_dump(data)
    raise ParseError(f"unknown format {fmt!r}")


def load_surface_path(path):
    """Load a mesh file, inferring the format from its extension."""
    text = open(path, "r").read()
    lower = str(path).lower()
    if lower.endswith(".off"):
        return load_surface(text, "OFF")
    if lower.endswith(".obj"):
        return load_surface(text, "OBJ")
    return load_surface(text, "DUMP")


def _tokens(data):
    for lineno, line in enumerate(data.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if line:
            yield lineno, line.split()


def _parse_off(data):
    rows = list(_tokens(data))
    if not rows:
        raise ParseError("empty OFF input")
    idx = 0
    if rows[0][1][0].upper() == "OFF":
        if len(rows[0][1]) > 1:
            rows[0] = (rows[0][0], rows[0][1][1:])
        else:
            idx = 1
    if idx >= len(rows):
        raise ParseError("OFF header with no counts")
    try:
        nv, nf = int(rows[idx][1][0]), int(rows[idx][1][1])
    except (ValueError, IndexError):
        raise ParseError(f"bad OFF counts on line {rows[idx][0]}")
    idx += 1
    if len(rows) < idx + nv + nf:
        raise ParseError("OFF input truncated")
    coords = np.empty((nv, 3))
    for i in range(nv):
        lineno, toks = rows[idx + i]
        try:
            coords[i] = [float(toks[0]), float(toks[1]), float(toks[2])]
        except (ValueError, IndexError):
            raise ParseError(f"bad vertex on line {lineno}")
    faces = []
    for i in range(nf):
        lineno, toks = rows[idx + nv + i]
        try:
            k = int(toks[0])
            ids = [int(t) for t in toks[1:1 + k]]
        except (ValueError, IndexError):
            raise ParseError(f"bad face on line {lineno}")
        if k != 3:
            raise ParseError(f"face on line {lineno} has {k} sides; triangles only")
        faces.append(ids)
    return coords, np.array(faces, dtype=np.int64)


def _parse_obj(data):
    coords = []
    faces = []
    for lineno, toks in _tokens(data):
        if toks[0] == "v":
            try:
                coords.append([float(toks[1]), float(toks[2]), float(toks[3])])
            except (ValueError, IndexError):
                raise ParseError(f"bad vertex on line {lineno}")
        elif toks[0] == "f":
            refs = toks[1:]
            if len(refs) != 3:
                raise ParseError(f"face on line {lineno} has {len(refs)} sides; triangles only")
            ids = []
            for r in refs:
                head = r.split("/", 1)[0]
                try:
                    i = int(head)
                except ValueError:
                    raise ParseError(f"bad face reference {r!r} on line {lineno}")
                # OBJ is 1-based; negatives count from the end
                ids.append(i - 1 if i > 0 else len(coords) + i)
            faces.append(ids)
    if not coords or not faces:
        raise ParseError("OBJ input has no usable vertices or faces")
    return np.array(coords), np.array(faces, dtype=np.int64)


def loads_dump(data):
    coords = {}
    faces = []
    overrides = {}
    for lineno, toks in _tokens(data):
        kind = toks[0]
        try:
            if kind == "v":
                coords[int(toks[1])] = (float(toks[2]), float(toks[3]), float(toks[4]))
            elif kind == "f":
                faces.append((int(toks[1]), int(toks[2]), int(toks[3])))
            elif kind == "el":
                overrides[edge_key(int(toks[1]), int(toks[2]))] = float(toks[3])
            else:
                raise ParseError(f"unknown record {kind!r} on line {lineno}")
        except (ValueError, IndexError):
            raise ParseError(f"malformed record on line {lineno}")
    if not faces:
        raise ParseError("dump has no faces")
    n = max(coords) + 1 if coords else 0
    faces = np.array(faces, dtype=np.int64)
    have_coords = n > int(faces.max())
    xyz = None
    if have_coords:
        xyz = np.zeros((n, 3))
        for i, p in coords.items():
            xyz[i] = p
    lengths = None
    if overrides:
        lengths = dict(overrides)
        if xyz is not None:
            # fill the rest from coordinates
            for i, tri in enumerate(faces):
                a, b, c = (int(x) for x in tri)
                for u, v in ((a, b), (b, c), (c, a)):
                    k = edge_key(u, v)
                    if k not in lengths:
                        lengths[k] = float(np.linalg.norm(xyz[u] - xyz[v]))
    return TriangulatedSurface(faces, edge_lengths=lengths, coords=xyz)


def dumps_surface(surface, include_lengths=True):
    """Canonical text dump; byte-stable for identical surfaces."""
    out = []
    if surface.coords is not None:
        for i, (x, y, z) in enumerate(surface.coords):
            out.append(f"v {i} {float(x)!r} {float(y)!r} {float(z)!r}")
    else:
        for i in range(surface.n_vertices):
            out.append(f"v {i} 0.0 0.0 0.0")
        include_lengths = True
    for a, b, c in surface.faces:
        out.append(f"f {a} {b} {c}")
    if include_lengths:
        for e, (u, v) in enumerate(surface.edges):
            out.append(f"el {u} {v} {float(surface.edge_len[e])!r}")
    return "\n".join(out) + "\n"


def dumps_off(surface):
    """OFF export from embedded coordinates (approximate for intrinsic meshes)."""
    if surface.coords is None:
        raise ParseError("surface has no embedded coordinates to export as OFF")
    out = ["OFF", f"{surface.n_vertices} {surface.n_faces} 0"]
    for x, y, z in surface.coords:
        out.append(f"{float(x)!r} {float(y)!r} {float(z)!r}")
    for a, b, c in surface.faces:
        out.append(f"3 {a} {b} {c}")
    return "\n".join(out) + "\n"
