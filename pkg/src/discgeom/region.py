"""Disc sub-regions of a surface: face sets with a simple boundary cycle.

Also home to the two combinatorial workhorses used by cutting and homotopy
construction: splitting a face set along a vertex path, and computing the
face set enclosed between two vertex paths with common endpoints (mod-2
winding over the dual graph).
"""

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .curves import EdgePoint, MeshCurve, cat, rev
from .errors import CutError, SideError, TopologyError
from .surface import TriangulatedSurface, edge_key

OUTER = -1  # virtual outer node of the dual graph, for disc surfaces


class DiscRegion:
    """An edge-connected face set whose closure is a disc.

    Immutable; carries its own cache for graphs and metric summaries.
    """

    def __init__(self, surface, faces, validate=True):
        self.surface = surface
        face_array = np.asarray(sorted(int(f) for f in set(faces)), dtype=np.int64)
        if face_array.size == 0:
            raise TopologyError("empty region")
        self.face_array = face_array
        self.face_array.setflags(write=False)
        self.faces = frozenset(int(f) for f in face_array)
        self._cache = {}
        if validate:
            self.boundary_cycle  # walks and checks the frontier
            self._validate()

    @classmethod
    def full_disc(cls, surface):
        if not surface.is_disc:
            raise TopologyError("full_disc requires a disc surface")
        return cls(surface, range(surface.n_faces), validate=False)

    # -- metric roll-ups ---------------------------------------------------

    @property
    def area(self):
        return float(self.surface.face_areas[self.face_array].sum())

    @property
    def n_faces(self):
        return int(self.face_array.size)

    @property
    def boundary_length(self):
        cyc = self.boundary_cycle
        return self.surface.path_length(list(cyc) + [cyc[0]])

    @property
    def boundary_cycle(self):
        """Boundary vertices in cyclic order (region kept on a fixed side)."""
        if "bcycle" not in self._cache:
            self._cache["bcycle"] = _walk_frontier(self.surface, self.faces)
        return self._cache["bcycle"]

    @property
    def boundary_vertex_set(self):
        if "bverts" not in self._cache:
            self._cache["bverts"] = frozenset(self.boundary_cycle)
        return self._cache["bverts"]

    @property
    def vertex_set(self):
        if "verts" not in self._cache:
            self._cache["verts"] = frozenset(
                int(v) for v in self.surface.faces[self.face_array].ravel())
        return self._cache["verts"]

    @property
    def interior_vertex_list(self):
        if "iverts" not in self._cache:
            self._cache["iverts"] = sorted(self.vertex_set - self.boundary_vertex_set)
        return self._cache["iverts"]

    @property
    def boundary_curve(self):
        if "bcurve" not in self._cache:
            self._cache["bcurve"] = MeshCurve.from_vertices(
                self.surface, self.boundary_cycle, closed=True)
        return self._cache["bcurve"]

    def _validate(self):
        fa = self.face_array
        surf = self.surface
        # edge-connectivity of the face set
        comps = face_components(surf, fa)
        if len(comps) != 1:
            raise TopologyError(f"region has {len(comps)} components")
        # Euler characteristic of the closure must be 1
        verts = set(int(v) for v in surf.faces[fa].ravel())
        edges = set(int(e) for e in surf.face_edges[fa].ravel())
        chi = len(verts) - len(edges) + fa.size
        if chi != 1:
            raise TopologyError(f"region closure has Euler characteristic {chi}, not a disc")

    def contains_vertex(self, v):
        return int(v) in self.vertex_set

    def subregion(self, faces, validate=True):
        return DiscRegion(self.surface, faces, validate=validate)

    def __repr__(self):
        return (f"DiscRegion({self.n_faces} faces, area={self.area:.6g}, "
                f"|bd|={self.boundary_length:.6g})")


def _walk_frontier(surface, face_set):
    """Ordered boundary cycle of a face set; raises if not a single simple cycle."""
    nxt = {}
    n_frontier = 0
    for f in face_set:
        a, b, c = surface.face_vertices(f)
        for u, v in ((a, b), (b, c), (c, a)):
            e = surface.edge_index[edge_key(u, v)]
            fa, fb = surface.edge_faces[e]
            other = int(fb) if int(fa) == f else int(fa)
            if other < 0 or other not in face_set:
                # frontier half-edge; orient against the face winding so the
                # region sits on a consistent side
                if v in nxt:
                    raise TopologyError("region boundary pinches at a vertex")
                nxt[v] = u
                n_frontier += 1
    if not nxt:
        raise TopologyError("face set has no frontier (closed surface)")
    start = min(nxt)
    cycle = [start]
    cur = nxt[start]
    while cur != start:
        cycle.append(cur)
        cur = nxt.get(cur)
        if cur is None or len(cycle) > n_frontier:
            raise TopologyError("region frontier does not close into one cycle")
    if len(cycle) != n_frontier:
        raise TopologyError("region frontier has more than one cycle")
    return tuple(cycle)


# -- dual-graph utilities ----------------------------------------------------

def _dual_arrays(surface):
    """Per-edge dual endpoints (face ids; OUTER mapped to n_faces)."""
    cache = surface._cache
    if "dual" not in cache:
        ef = surface.edge_faces
        u = ef[:, 0].copy()
        v = np.where(ef[:, 1] >= 0, ef[:, 1], surface.n_faces)
        cache["dual"] = (u, v)
    return cache["dual"]


def face_components(surface, face_ids, cut_edge_ids=()):
    """Edge-connected components of a face set, not crossing the cut edges.

    Returns a list of sorted int arrays, ordered by smallest face id.
    """
    face_ids = np.asarray(face_ids, dtype=np.int64)
    in_set = np.zeros(surface.n_faces + 1, dtype=bool)
    in_set[face_ids] = True
    du, dv = _dual_arrays(surface)
    ok = in_set[du] & in_set[dv]
    if len(cut_edge_ids):
        cut = np.zeros(surface.n_edges, dtype=bool)
        cut[np.asarray(list(cut_edge_ids), dtype=np.int64)] = True
        ok &= ~cut
    n = surface.n_faces + 1
    rows = np.concatenate([du[ok], dv[ok]])
    cols = np.concatenate([dv[ok], du[ok]])
    data = np.ones(rows.size, dtype=np.int8)
    adj = csr_matrix((data, (rows, cols)), shape=(n, n))
    _, labels = connected_components(adj, directed=False)
    groups = {}
    for f in face_ids:
        groups.setdefault(labels[f], []).append(int(f))
    comps = [np.array(sorted(g), dtype=np.int64) for g in groups.values()]
    comps.sort(key=lambda arr: int(arr[0]))
    return comps


def path_edge_ids(surface, path):
    """Edge ids along a vertex path (skipping stationary steps)."""
    out = []
    for u, v in zip(path[:-1], path[1:]):
        if u != v:
            out.append(surface.edge_index[edge_key(int(u), int(v))])
    return out


def odd_edge_ids(surface, closed_walk):
    """Edge ids traversed an odd number of times by a closed vertex walk."""
    counts = {}
    for u, v in zip(closed_walk[:-1], closed_walk[1:]):
        if u == v:
            continue
        e = surface.edge_index[edge_key(int(u), int(v))]
        counts[e] = counts.get(e, 0) + 1
    return [e for e, c in sorted(counts.items()) if c % 2 == 1]


def parity_faces(surface, odd_edges, anchor=OUTER):
    """Faces with odd mod-2 winding relative to the anchor.

    ``odd_edges`` must form an even subgraph (it always does for a closed
    walk).  ``anchor`` is a face id known to be outside, or OUTER for the
    virtual outer node of a disc surface.
    """
    if anchor == OUTER and not surface.has_boundary:
        raise CutError("mod-2 winding on a closed surface needs an anchor face")
    du, dv = _dual_arrays(surface)
    n = surface.n_faces + 1
    odd = np.zeros(surface.n_edges, dtype=bool)
    if len(odd_edges):
        odd[np.asarray(list(odd_edges), dtype=np.int64)] = True
    keep = ~odd
    rows = np.concatenate([du[keep], dv[keep]])
    cols = np.concatenate([dv[keep], du[keep]])
    adj = csr_matrix((np.ones(rows.size, dtype=np.int8), (rows, cols)), shape=(n, n))
    ncomp, labels = connected_components(adj, directed=False)

    parity = np.full(ncomp, -1, dtype=np.int8)
    anchor_node = surface.n_faces if anchor == OUTER else int(anchor)
    parity[labels[anchor_node]] = 0
    # propagate parity across the odd edges on the (tiny) component graph
    pairs = [(labels[du[e]], labels[dv[e]]) for e in np.nonzero(odd)[0]]
    changed = True
    while changed:
        changed = False
        for a, b in pairs:
            if parity[a] >= 0 and parity[b] < 0:
                parity[b] = parity[a] ^ 1
                changed = True
            elif parity[b] >= 0 and parity[a] < 0:
                parity[a] = parity[b] ^ 1
                changed = True
            elif parity[a] >= 0 and parity[b] >= 0 and parity[a] == parity[b]:
                raise CutError("odd edge set is not a mod-2 boundary")
    parity[parity < 0] = 0  # components unreachable from the anchor: outside
    face_parity = parity[labels[:surface.n_faces]]
    return np.nonzero(face_parity == 1)[0]


def enclosed_between(surface, walk_a, walk_b, anchor=OUTER):
    """Faces enclosed between two vertex walks with equal endpoints."""
    if walk_a[0] != walk_b[0] or walk_a[-1] != walk_b[-1]:
        raise CutError("walks must share endpoints")
    closed = cat(tuple(walk_a), rev(tuple(walk_b)))
    odd = odd_edge_ids(surface, closed)
    if not odd:
        return np.empty(0, dtype=np.int64)
    return parity_faces(surface, odd, anchor=anchor)


# -- cutting -----------------------------------------------------------------

def snap_cut_to_edges(surface, cut):
    """Split edges under the cut's edge-interior points; return (surface, path).

    Produces a refined copy of the surface (never mutates) in which the cut
    is a pure vertex path.
    """
    pts = cut.points if isinstance(cut, MeshCurve) else tuple(cut)
    epts = [p for p in pts if isinstance(p, EdgePoint)]
    if not epts:
        path = [int(p) for p in pts]
        return surface, tuple(path)
    from .curves import _layout_triangle  # local import to avoid cycle noise

    faces = [list(map(int, tri)) for tri in surface.faces]
    lengths = {edge_key(int(u), int(v)): float(surface.edge_len[e])
               for e, (u, v) in enumerate(surface.edges)}
    coords = None if surface.coords is None else [list(map(float, r))
                                                  for r in surface.coords]
    next_id = surface.n_vertices
    snapped = []
    for p in pts:
        if not isinstance(p, EdgePoint):
            snapped.append(int(p))
            continue
        pc = p.canonical()
        u, v, t = pc.u, pc.v, pc.t
        L = lengths[edge_key(u, v)]
        w = next_id
        next_id += 1
        incident = [i for i, tri in enumerate(faces) if u in tri and v in tri]
        if not incident:
            raise CutError(f"cut point on a non-edge {(u, v)}")
        for i in incident:
            tri = faces[i]
            x = next(z for z in tri for _ in [0] if z not in (u, v))
            # split the flat triangle; |wx| from planar layout
            luv, lvx, lxu = lengths[edge_key(u, v)], lengths[edge_key(v, x)], lengths[edge_key(x, u)]
            (ux, uy), (vx_, vy), (xx, xy) = _layout_triangle(lvx, lxu, luv)
            wx_ = ux + t * (vx_ - ux)
            wy_ = uy + t * (vy - uy)
            lengths[edge_key(w, x)] = float(np.hypot(xx - wx_, xy - wy_))
            # replace tri by two children, preserving winding
            iu, iv = tri.index(u), tri.index(v)
            tri_a = list(tri)
            tri_a[iv] = w
            tri_b = list(tri)
            tri_b[iu] = w
            faces[i] = tri_a
            faces.append(tri_b)
        lengths[edge_key(u, w)] = t * L
        lengths[edge_key(w, v)] = (1.0 - t) * L
        lengths.pop(edge_key(u, v), None)
        if coords is not None:
            cu, cv = np.array(coords[u]), np.array(coords[v])
            coords.append(list(cu + t * (cv - cu)))
        snapped.append(w)
    refined = TriangulatedSurface(np.array(faces, dtype=np.int64),
                                  edge_lengths=lengths,
                                  coords=None if coords is None else np.array(coords))
    return refined, tuple(snapped)


def extract_subdisc(parent, cut, side):
    """Sub-disc of ``parent`` on the requested side of the cut.

    ``parent`` is a surface or DiscRegion; ``cut`` a MeshCurve (closed, or an
    arc with endpoints on the parent boundary); ``side`` is "left" or "right"
    relative to the cut direction.  Edge-interior cut points trigger edge
    splitting on a fresh surface copy.
    """
    if side not in ("left", "right"):
        raise SideError(f"side must be 'left' or 'right', got {side!r}")
    if isinstance(parent, TriangulatedSurface):
        surface = parent
        faces = np.arange(surface.n_faces)
    else:
        surface = parent.surface
        faces = parent.face_array
    work, path = snap_cut_to_edges(surface, cut)
    if work is not surface:
        if faces.size != surface.n_faces:
            raise CutError("edge-interior cuts are only supported on whole surfaces")
        faces = np.arange(work.n_faces)
        surface = work

    closed = isinstance(cut, MeshCurve) and cut.closed
    if closed:
        path = path + (path[0],)
    core = path[:-1] if closed else path
    if len(set(core)) != len(core):
        raise CutError("cut is not simple")
    cut_edges = path_edge_ids(surface, path)
    if not cut_edges:
        raise CutError("cut has no edges")
    comps = face_components(surface, faces, cut_edges)
    if len(comps) != 2:
        raise CutError(f"cut does not separate (got {len(comps)} components)")

    left_faces = set()
    right_faces = set()
    for u, v in zip(path[:-1], path[1:]):
        for f in surface.faces_of_edge(u, v):
            a, b, c = surface.face_vertices(f)
            # the face whose winding contains the directed edge u->v lies on
            # the left of the cut
            if (u, v) in ((a, b), (b, c), (c, a)):
                left_faces.add(f)
            else:
                right_faces.add(f)
    comp_sets = [set(int(f) for f in comp) for comp in comps]
    left_idx = [i for i, s in enumerate(comp_sets) if s & left_faces]
    right_idx = [i for i, s in enumerate(comp_sets) if s & right_faces]
    if len(set(left_idx)) != 1 or len(set(right_idx)) != 1 or left_idx[0] == right_idx[0]:
        raise SideError("requested side is ambiguous for this cut")
    pick = comps[left_idx[0]] if side == "left" else comps[right_idx[0]]
    return DiscRegion(surface, pick)


def split_by_path(region, path):
    """Split a region along an interior vertex path; returns the two face sets.

    The path endpoints must lie on the region boundary (or the path must be
    a closed cycle).  Returns ``(comps, cut_edges)`` with comps ordered by
    smallest face id.
    """
    cut_edges = path_edge_ids(region.surface, path)
    comps = face_components(region.surface, region.face_array, cut_edges)
    return comps, cut_edges
