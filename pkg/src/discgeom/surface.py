"""Intrinsic triangulated surfaces: disc or sphere topology, edge-length metric.

A surface is a set of oriented triangles over integer vertex ids plus a
positive length per undirected edge.  Embedded 3D coordinates are optional
and only used for generation, export and plotting; all geometry (areas,
distances) is computed from the edge lengths alone.  Instances are immutable
after construction: refinement and cutting return new surfaces.
"""

from collections import defaultdict, deque

import numpy as np

from .errors import DegenerateError, TopologyError

# triangles thinner than this (area relative to longest edge squared) are
# rejected as degenerate
HERON_REL_FLOOR = 1e-12


def edge_key(u, v):
    """Canonical undirected edge as an ordered pair."""
    return (u, v) if u < v else (v, u)


def heron_areas(a, b, c):
    """Vectorized triangle areas from side lengths (numerically stable form)."""
    a, b, c = np.asarray(a, float), np.asarray(b, float), np.asarray(c, float)
    # Kahan's ordering: a >= b >= c
    hi = np.maximum(np.maximum(a, b), c)
    lo = np.minimum(np.minimum(a, b), c)
    mid = a + b + c - hi - lo
    t = (hi + (mid + lo)) * (lo - (hi - mid)) * (lo + (hi - mid)) * (hi + (mid - lo))
    t = np.where(t > 0.0, t, 0.0)
    return 0.25 * np.sqrt(t)


def propagate_orientation(faces, edge_faces_list):
    """Flip faces to a consistent winding; raise if non-orientable.

    ``edge_faces_list`` maps canonical edge -> list of incident face ids.
    Returns a new (m, 3) int array.
    """
    faces = [tuple(f) for f in faces]
    m = len(faces)
    oriented = [None] * m

    def directed_edges(tri):
        return [(tri[0], tri[1]), (tri[1], tri[2]), (tri[2], tri[0])]

    for start in range(m):
        if oriented[start] is not None:
            continue
        oriented[start] = faces[start]
        queue = deque([start])
        while queue:
            cur = queue.popleft()
            for u, v in directed_edges(oriented[cur]):
                for nb in edge_faces_list[edge_key(u, v)]:
                    if nb == cur:
                        continue
                    tri = oriented[nb] if oriented[nb] is not None else faces[nb]
                    # consistent orientation: the shared edge must appear in
                    # opposite directions in the two faces
                    same_dir = (u, v) in directed_edges(tri)
                    if oriented[nb] is None:
                        oriented[nb] = tri[::-1] if same_dir else tri
                        queue.append(nb)
                    elif same_dir:
                        raise TopologyError("surface is not orientable")
    return np.array(oriented, dtype=np.int64)


class TriangulatedSurface:
    """An oriented triangulated 2-manifold (disc or sphere) with edge lengths.

    Parameters
    ----------
    faces : (m, 3) int array
        Consistently orientable triangles over vertex ids 0..n-1.
    edge_lengths : dict or None
        Length per canonical edge pair.  Derived from ``coords`` if omitted.
    coords : (n, 3) float array or None
        Optional embedding, used for generation and export only.
    """

    def __init__(self, faces, edge_lengths=None, coords=None, validate=True):
        faces = np.asarray(faces, dtype=np.int64)
        if faces.ndim != 2 or faces.shape[1] != 3:
            raise TopologyError("faces must be an (m, 3) array")
        if faces.shape[0] == 0:
            raise TopologyError("surface has no faces")
        if coords is not None:
            coords = np.asarray(coords, dtype=float)
            if coords.ndim != 2 or coords.shape[1] != 3:
                raise TopologyError("coords must be an (n, 3) array")

        self.n_vertices = int(faces.max()) + 1
        if faces.min() < 0:
            raise TopologyError("negative vertex id in faces")

        # collect undirected edges and incidence
        edge_faces_list = defaultdict(list)
        for i, (a, b, c) in enumerate(faces):
            if a == b or b == c or a == c:
                raise DegenerateError(f"face {i} repeats a vertex")
            for u, v in ((a, b), (b, c), (c, a)):
                edge_faces_list[edge_key(int(u), int(v))].append(i)
        for e, fs in edge_faces_list.items():
            if len(fs) > 2:
                raise TopologyError(f"edge {e} belongs to {len(fs)} faces (non-manifold)")

        faces = propagate_orientation(faces, edge_faces_list)
        self.faces = faces
        self.faces.setflags(write=False)
        self.n_faces = faces.shape[0]

        edges = np.array(sorted(edge_faces_list.keys()), dtype=np.int64)
        self.edges = edges
        self.edges.setflags(write=False)
        self.n_edges = edges.shape[0]
        self.edge_index = {edge_key(int(u), int(v)): e for e, (u, v) in enumerate(edges)}

        if edge_lengths is None:
            if coords is None:
                raise DegenerateError("need coords or explicit edge lengths")
            vec = coords[edges[:, 0]] - coords[edges[:, 1]]
            elen = np.sqrt((vec * vec).sum(axis=1))
        else:
            elen = np.empty(self.n_edges)
            elen.fill(np.nan)
            for (u, v), ln in edge_lengths.items():
                elen[self.edge_index[edge_key(int(u), int(v))]] = float(ln)
            if np.isnan(elen).any():
                missing = int(np.isnan(elen).argmax())
                raise DegenerateError(f"missing length for edge {tuple(edges[missing])}")
        if (elen <= 0.0).any():
            bad = int((elen <= 0.0).argmax())
            raise DegenerateError(f"non-positive length on edge {tuple(edges[bad])}")
        self.edge_len = elen
        self.edge_len.setflags(write=False)

        self.coords = coords
        if coords is not None:
            self.coords.setflags(write=False)

        # per-face edge ids and areas
        fe = np.empty((self.n_faces, 3), dtype=np.int64)
        for i, (a, b, c) in enumerate(faces):
            fe[i, 0] = self.edge_index[edge_key(int(a), int(b))]
            fe[i, 1] = self.edge_index[edge_key(int(b), int(c))]
            fe[i, 2] = self.edge_index[edge_key(int(c), int(a))]
        self.face_edges = fe
        self.face_edges.setflags(write=False)

        side = elen[fe]
        areas = heron_areas(side[:, 0], side[:, 1], side[:, 2])
        longest = side.max(axis=1)
        bad = areas < HERON_REL_FLOOR * longest * longest
        if bad.any():
            raise DegenerateError(
                f"face {int(bad.argmax())} is degenerate (Heron area below threshold)")
        self.face_areas = areas
        self.face_areas.setflags(write=False)

        # edge -> (faceA, faceB) with -1 for the missing side
        ef = np.full((self.n_edges, 2), -1, dtype=np.int64)
        for e_pair, fs in edge_faces_list.items():
            e = self.edge_index[e_pair]
            ef[e, 0] = fs[0]
            if len(fs) == 2:
                ef[e, 1] = fs[1]
        self.edge_faces = ef
        self.edge_faces.setflags(write=False)
        self.boundary_edge_mask = ef[:, 1] < 0
        self.boundary_edge_mask.setflags(write=False)

        self._cache = {}
        if validate:
            self._validate_topology()

    # -- derived topology ------------------------------------------------

    @property
    def area(self):
        return float(self.face_areas.sum())

    @property
    def max_edge_length(self):
        return float(self.edge_len.max())

    @property
    def euler_characteristic(self):
        return self.n_vertices - self.n_edges + self.n_faces

    @property
    def has_boundary(self):
        return bool(self.boundary_edge_mask.any())

    @property
    def is_sphere(self):
        return not self.has_boundary and self.euler_characteristic == 2

    @property
    def is_disc(self):
        return self.has_boundary and self.euler_characteristic == 1

    @property
    def boundary_length(self):
        return float(self.edge_len[self.boundary_edge_mask].sum())

    @property
    def boundary_vertices(self):
        """Set of vertex ids lying on the surface boundary."""
        if "bverts" not in self._cache:
            bs = self.edges[self.boundary_edge_mask]
            self._cache["bverts"] = frozenset(int(x) for x in bs.ravel())
        return self._cache["bverts"]

    @property
    def boundary_cycle(self):
        """Boundary vertex cycle ordered against the face winding.

        Returned as a list with ``cycle[0] != cycle[-1]``; closure implicit.
        """
        if "bcycle" not in self._cache:
            self._cache["bcycle"] = self._walk_boundary()
        return self._cache["bcycle"]

    def _directed_edge_set(self):
        if "dirset" not in self._cache:
            s = set()
            for a, b, c in self.faces:
                s.add((int(a), int(b)))
                s.add((int(b), int(c)))
                s.add((int(c), int(a)))
            self._cache["dirset"] = s
        return self._cache["dirset"]

    def _walk_boundary(self):
        if not self.has_boundary:
            return []
        dirset = self._directed_edge_set()
        nxt = {}
        for u, v in self.edges[self.boundary_edge_mask]:
            u, v = int(u), int(v)
            # orient the boundary edge so its reverse is the face half-edge
            s, t = (u, v) if (v, u) in dirset else (v, u)
            if s in nxt:
                raise TopologyError("boundary is not a single simple cycle")
            nxt[s] = t
        start = min(nxt)
        cycle = [start]
        cur = nxt[start]
        while cur != start:
            cycle.append(cur)
            if cur not in nxt:
                raise TopologyError("boundary walk broke off (open boundary chain)")
            cur = nxt[cur]
            if len(cycle) > len(nxt):
                raise TopologyError("boundary walk does not close up")
        if len(cycle) != len(nxt):
            raise TopologyError("boundary has more than one cycle")
        return cycle

    def _validate_topology(self):
        # connectivity over face adjacency
        seen = np.zeros(self.n_faces, dtype=bool)
        seen[0] = True
        queue = deque([0])
        while queue:
            f = queue.popleft()
            for e in self.face_edges[f]:
                for g in self.edge_faces[e]:
                    if g >= 0 and not seen[g]:
                        seen[g] = True
                        queue.append(g)
        if not seen.all():
            raise TopologyError("surface is not connected")

        # every vertex must be referenced and have a single fan of faces
        used = np.zeros(self.n_vertices, dtype=bool)
        used[self.faces.ravel()] = True
        if not used.all():
            raise TopologyError(f"vertex {int((~used).argmax())} is not used by any face")
        self._check_vertex_links()

        chi = self.euler_characteristic
        if self.has_boundary:
            if chi != 1:
                raise TopologyError(f"disc surface must have Euler characteristic 1, got {chi}")
            self._walk_boundary()
        else:
            if chi != 2:
                raise TopologyError(f"closed surface must have Euler characteristic 2, got {chi}")

    def _check_vertex_links(self):
        # faces around each vertex must form one edge-connected fan
        vert_faces = defaultdict(list)
        for i, tri in enumerate(self.faces):
            for v in tri:
                vert_faces[int(v)].append(i)
        for v, fs in vert_faces.items():
            if len(fs) == 1:
                continue
            # union-find over the faces at v, joined across edges at v
            parent = {f: f for f in fs}

            def find(x):
                while parent[x] != x:
                    parent[x] = parent[parent[x]]
                    x = parent[x]
                return x

            edge_at_v = defaultdict(list)
            for f in fs:
                a, b, c = self.faces[f]
                others = [int(x) for x in (a, b, c) if x != v]
                for w in others:
                    edge_at_v[w].append(f)
            for w, ff in edge_at_v.items():
                for f in ff[1:]:
                    ra, rb = find(ff[0]), find(f)
                    if ra != rb:
                        parent[ra] = rb
            roots = {find(f) for f in fs}
            if len(roots) != 1:
                raise TopologyError(f"vertex {v} has a pinched link (non-manifold)")

    # -- metric helpers ---------------------------------------------------

    def length_of(self, u, v):
        """Length of the edge between vertices u and v."""
        return float(self.edge_len[self.edge_index[edge_key(int(u), int(v))]])

    def has_edge(self, u, v):
        return edge_key(int(u), int(v)) in self.edge_index

    def path_length(self, path):
        """Total length of a vertex path (consecutive entries must be edges)."""
        total = 0.0
        for u, v in zip(path[:-1], path[1:]):
            if u != v:
                total += self.length_of(u, v)
        return total

    def faces_of_edge(self, u, v):
        e = self.edge_index[edge_key(int(u), int(v))]
        return tuple(int(f) for f in self.edge_faces[e] if f >= 0)

    def face_vertices(self, f):
        return tuple(int(x) for x in self.faces[f])

    @property
    def face_set_index(self):
        """dict frozenset{a,b,c} -> face id, for move legality checks."""
        if "fsidx" not in self._cache:
            self._cache["fsidx"] = {
                frozenset(int(x) for x in tri): i for i, tri in enumerate(self.faces)}
        return self._cache["fsidx"]

    @property
    def vertex_faces(self):
        if "vfaces" not in self._cache:
            vf = defaultdict(list)
            for i, tri in enumerate(self.faces):
                for v in tri:
                    vf[int(v)].append(i)
            self._cache["vfaces"] = dict(vf)
        return self._cache["vfaces"]

    def vertex_link_cycle(self, v):
        """Ordered neighbour cycle (or boundary-to-boundary path) around v."""
        fs = self.vertex_faces[v]
        nxt = {}
        for f in fs:
            tri = [int(x) for x in self.faces[f]]
            i = tri.index(v)
            a, b = tri[(i + 1) % 3], tri[(i + 2) % 3]
            nxt[a] = b
        starts = [a for a in nxt if a not in nxt.values()]
        start = starts[0] if starts else min(nxt)
        out = [start]
        cur = nxt.get(start)
        while cur is not None and cur != start and len(out) <= len(nxt) + 1:
            out.append(cur)
            cur = nxt.get(cur)
        return out

    # -- refinement --------------------------------------------------------

    def midpoint_refine(self):
        """Split every edge at its midpoint, each face into four (flat rule).

        Returns ``(surface, face_parent)`` where ``face_parent[j]`` is the
        parent face of child face j.  Edge lengths follow the flat-triangle
        rule, so areas are preserved exactly and graph distances can only
        decrease.
        """
        n = self.n_vertices
        mid_of_edge = n + np.arange(self.n_edges)

        new_faces = np.empty((4 * self.n_faces, 3), dtype=np.int64)
        face_parent = np.repeat(np.arange(self.n_faces), 4)
        lengths = {}
        for e, (u, v) in enumerate(self.edges):
            half = self.edge_len[e] / 2.0
            m = int(mid_of_edge[e])
            lengths[edge_key(int(u), m)] = half
            lengths[edge_key(int(v), m)] = half
        for i in range(self.n_faces):
            a, b, c = (int(x) for x in self.faces[i])
            eab, ebc, eca = (int(x) for x in self.face_edges[i])
            mab, mbc, mca = (int(mid_of_edge[eab]), int(mid_of_edge[ebc]),
                             int(mid_of_edge[eca]))
            new_faces[4 * i + 0] = (a, mab, mca)
            new_faces[4 * i + 1] = (mab, b, mbc)
            new_faces[4 * i + 2] = (mca, mbc, c)
            new_faces[4 * i + 3] = (mab, mbc, mca)
            # each midsegment is parallel to, and half of, the side it misses
            lengths[edge_key(mab, mbc)] = self.edge_len[eca] / 2.0
            lengths[edge_key(mbc, mca)] = self.edge_len[eab] / 2.0
            lengths[edge_key(mca, mab)] = self.edge_len[ebc] / 2.0

        coords = None
        if self.coords is not None:
            mids = 0.5 * (self.coords[self.edges[:, 0]] + self.coords[self.edges[:, 1]])
            coords = np.vstack([self.coords, mids])
        surf = TriangulatedSurface(new_faces, edge_lengths=lengths, coords=coords,
                                   validate=False)
        return surf, face_parent

    def __repr__(self):
        kind = "sphere" if self.is_sphere else ("disc" if self.is_disc else "surface")
        return (f"TriangulatedSurface({kind}, V={self.n_vertices}, "
                f"F={self.n_faces}, area={self.area:.6g})")
