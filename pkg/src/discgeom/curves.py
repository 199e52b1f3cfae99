"""Discrete curves on a surface: vertex paths plus optional edge-interior points.

Most of the machinery works with pure vertex paths (tuples of vertex ids on
the working surface); ``MeshCurve`` wraps those with a cached length and a
combinatorial simplicity flag, and additionally supports points in edge
interiors for loading and for cut exports.
"""

import math
from dataclasses import dataclass

from .errors import DegenerateError, MalformedHomotopy
from .surface import edge_key

LENGTH_RTOL = 1e-9


@dataclass(frozen=True)
class EdgePoint:
    """A point at parameter ``t`` in (0,1) along the edge from u to v."""
    u: int
    v: int
    t: float

    def canonical(self):
        if self.u < self.v:
            return self
        return EdgePoint(self.v, self.u, 1.0 - self.t)


def _common_face(surface, pts):
    """A face containing all the given curve points, or None."""
    sets = []
    for p in pts:
        if isinstance(p, EdgePoint):
            fs = set(surface.faces_of_edge(p.u, p.v))
        else:
            fs = set(surface.vertex_faces[int(p)])
        sets.append(fs)
    common = set.intersection(*sets)
    return min(common) if common else None


def _layout_triangle(la, lb, lc):
    """Planar coordinates of a triangle with sides |BC|=la, |CA|=lb, |AB|=lc."""
    ax, ay = 0.0, 0.0
    bx, by = lc, 0.0
    cx = (lb * lb + lc * lc - la * la) / (2.0 * lc)
    cy2 = lb * lb - cx * cx
    cy = math.sqrt(max(cy2, 0.0))
    return (ax, ay), (bx, by), (cx, cy)


def _point_in_face(surface, face, p):
    a, b, c = surface.face_vertices(face)
    la = surface.length_of(b, c)
    lb = surface.length_of(c, a)
    lc = surface.length_of(a, b)
    pa, pb, pc = _layout_triangle(la, lb, lc)
    pos = {a: pa, b: pb, c: pc}
    if isinstance(p, EdgePoint):
        x0, y0 = pos[p.u]
        x1, y1 = pos[p.v]
        return (x0 + p.t * (x1 - x0), y0 + p.t * (y1 - y0))
    return pos[int(p)]


def segment_length(surface, p, q):
    """Straight-segment length between two curve points sharing a face/edge."""
    if not isinstance(p, EdgePoint) and not isinstance(q, EdgePoint):
        u, v = int(p), int(q)
        if u == v:
            return 0.0
        return surface.length_of(u, v)
    if isinstance(p, EdgePoint) and isinstance(q, EdgePoint):
        pc, qc = p.canonical(), q.canonical()
        if (pc.u, pc.v) == (qc.u, qc.v):
            return abs(pc.t - qc.t) * surface.length_of(pc.u, pc.v)
    if isinstance(p, EdgePoint) and not isinstance(q, EdgePoint):
        pc = p.canonical()
        if int(q) == pc.u:
            return pc.t * surface.length_of(pc.u, pc.v)
        if int(q) == pc.v:
            return (1.0 - pc.t) * surface.length_of(pc.u, pc.v)
    if isinstance(q, EdgePoint) and not isinstance(p, EdgePoint):
        return segment_length(surface, q, p)
    face = _common_face(surface, (p, q))
    if face is None:
        raise DegenerateError(f"curve points {p} and {q} share no face")
    x0, y0 = _point_in_face(surface, face, p)
    x1, y1 = _point_in_face(surface, face, q)
    return math.hypot(x1 - x0, y1 - y0)


class MeshCurve:
    """An ordered chain of curve points with a cached length.

    ``closed`` curves repeat their first point implicitly (points[0] is not
    duplicated at the end).  The simplicity flag is combinatorial: no curve
    point occurs twice.
    """

    def __init__(self, surface, points, closed=False):
        points = tuple(
            p.canonical() if isinstance(p, EdgePoint) else int(p) for p in points)
        if not points:
            raise DegenerateError("empty curve")
        self.surface = surface
        self.points = points
        self.closed = bool(closed)
        self.length = self._compute_length()
        self.is_simple = len(set(points)) == len(points)

    @classmethod
    def from_vertices(cls, surface, vertices, closed=False):
        return cls(surface, [int(v) for v in vertices], closed=closed)

    def _pairs(self):
        pts = self.points
        for i in range(len(pts) - 1):
            yield pts[i], pts[i + 1]
        if self.closed and len(pts) > 1:
            yield pts[-1], pts[0]

    def _compute_length(self):
        return sum(segment_length(self.surface, p, q) for p, q in self._pairs())

    def check_cached_length(self):
        """Recompute the length and verify the cache within tolerance."""
        fresh = self._compute_length()
        scale = max(abs(fresh), abs(self.length), 1e-300)
        if abs(fresh - self.length) > LENGTH_RTOL * scale:
            raise MalformedHomotopy(
                f"cached length {self.length} != recomputed {fresh}")
        return fresh

    @property
    def vertex_ids(self):
        """Vertex-id tuple; raises if any point is in an edge interior."""
        if any(isinstance(p, EdgePoint) for p in self.points):
            raise DegenerateError("curve has edge-interior points")
        return self.points

    def reversed(self):
        return MeshCurve(self.surface, tuple(reversed(self.points)), closed=self.closed)

    def __len__(self):
        return len(self.points)

    def __repr__(self):
        kind = "loop" if self.closed else "path"
        return f"MeshCurve({kind}, {len(self.points)} pts, length={self.length:.6g})"


# -- vertex-path helpers used throughout the engine -------------------------

def cat(*parts):
    """Concatenate vertex paths that chain end-to-start, dropping duplicates."""
    parts = [tuple(p) for p in parts if len(p) > 0]
    if not parts:
        return ()
    out = list(parts[0])
    for p in parts[1:]:
        if out[-1] != p[0]:
            raise DegenerateError(f"paths do not chain: ...{out[-1]} vs {p[0]}...")
        out.extend(p[1:])
    return tuple(out)


def rev(path):
    return tuple(reversed(path))


def drop_spurs(path):
    """Remove immediate backtracks x,y,x and stutters x,x from a vertex path."""
    out = list(path)
    changed = True
    while changed:
        changed = False
        i = 0
        while i < len(out) - 1:
            if out[i] == out[i + 1]:
                del out[i + 1]
                changed = True
            elif i + 2 < len(out) and out[i] == out[i + 2]:
                del out[i + 1:i + 3]
                changed = True
            else:
                i += 1
    return tuple(out)


def cycle_rotate(cycle, start):
    """Rotate an open-cycle vertex list so it begins at ``start``."""
    i = cycle.index(start)
    return list(cycle[i:]) + list(cycle[:i])


def cycle_arc(cycle, a, b):
    """The arc of an open-cycle list from a to b, walking forward (inclusive)."""
    rot = cycle_rotate(list(cycle), a)
    j = rot.index(b)
    return tuple(rot[:j + 1])
