"""Deterministic shortest paths on the vertex/edge graph of a surface.

Distance fields are computed with scipy's Dijkstra; paths are extracted by a
greedy descent on the distance values with ties broken toward the smallest
vertex id, which makes every returned path reproducible bit-for-bit and
independent of scipy's internal predecessor choices.
"""

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import dijkstra as _csgraph_dijkstra

from .errors import BudgetError, Unreachable
from .surface import TriangulatedSurface, edge_key


def _surface_and_faces(obj):
    """Accept a TriangulatedSurface or anything exposing .surface/.faces."""
    if isinstance(obj, TriangulatedSurface):
        return obj, None
    return obj.surface, obj.face_array


class Graph:
    """CSR view of (a masked subset of) a surface's edge graph."""

    def __init__(self, surface, edge_mask=None, weight_scale=None):
        self.surface = surface
        n = surface.n_vertices
        edges = surface.edges
        lens = surface.edge_len
        if weight_scale is not None:
            lens = lens * np.asarray(weight_scale, dtype=float)
        if edge_mask is not None:
            edges = edges[edge_mask]
            lens = lens[edge_mask]
        u, v = edges[:, 0], edges[:, 1]
        rows = np.concatenate([u, v])
        cols = np.concatenate([v, u])
        data = np.concatenate([lens, lens])
        self.matrix = csr_matrix((data, (rows, cols)), shape=(n, n))
        self.indptr = self.matrix.indptr
        self.indices = self.matrix.indices
        self.weights = self.matrix.data

    def neighbors(self, v):
        lo, hi = self.indptr[v], self.indptr[v + 1]
        return self.indices[lo:hi], self.weights[lo:hi]


def build_graph(region, forbidden_vertices=(), forbidden_edges=(),
                forbidden_faces=(), weight_scale=None):
    """Graph over the region's faces minus the forbidden elements.

    ``region`` is a surface or a disc region.  Forbidden vertices knock out
    all incident edges; forbidden edges are (u, v) pairs; forbidden faces
    drop edges that have no other allowed incident face.  ``weight_scale``
    optionally multiplies each edge weight (used for soft repulsion; the
    true metric is unaffected).
    """
    surface, faces = _surface_and_faces(region)
    ef = surface.edge_faces
    if faces is None and not forbidden_faces:
        allowed = np.ones(surface.n_edges, dtype=bool)
    else:
        face_ok = np.ones(surface.n_faces, dtype=bool)
        if faces is not None:
            face_ok[:] = False
            face_ok[faces] = True
        if forbidden_faces:
            face_ok[list(forbidden_faces)] = False
        side_a = face_ok[ef[:, 0]]
        side_b = (ef[:, 1] >= 0) & face_ok[np.maximum(ef[:, 1], 0)]
        allowed = side_a | side_b
    if forbidden_vertices:
        forb = np.zeros(surface.n_vertices, dtype=bool)
        forb[list(forbidden_vertices)] = True
        allowed &= ~(forb[surface.edges[:, 0]] | forb[surface.edges[:, 1]])
    if forbidden_edges:
        ids = [surface.edge_index[edge_key(u, v)] for u, v in forbidden_edges
               if edge_key(u, v) in surface.edge_index]
        allowed[ids] = False
    return Graph(surface, allowed, weight_scale=weight_scale)


def full_graph(region):
    """Cached unmasked graph for a surface or region."""
    surface, faces = _surface_and_faces(region)
    holder = region if faces is not None else surface
    cache = getattr(holder, "_cache", None)
    if cache is None:
        return build_graph(region)
    if "graph" not in cache:
        cache["graph"] = build_graph(region)
    return cache["graph"]


class DistanceField:
    """Distances from a source set, with deterministic path extraction.

    ``dist[v]`` is +inf for unreachable vertices.  ``pred`` is scipy's
    predecessor array (informational); extracted paths descend the distance
    values directly with smallest-id tie-breaking.
    """

    def __init__(self, graph, sources, dist, pred):
        self.graph = graph
        self.sources = tuple(int(s) for s in sources)
        self.dist = dist
        self.pred = pred

    def distance(self, v):
        return float(self.dist[int(v)])

    def path_to(self, target):
        """Shortest vertex path from the nearest source to ``target``."""
        t = int(target)
        if not np.isfinite(self.dist[t]):
            raise Unreachable(f"vertex {t} is not reachable from the sources")
        path = [t]
        cur = t
        guard = self.graph.matrix.shape[0] + 1
        while self.dist[cur] > 0.0:
            nbr, w = self.graph.neighbors(cur)
            cand = self.dist[nbr] + w
            order = np.lexsort((nbr, cand))
            nxt = int(nbr[order[0]])
            if self.dist[nxt] >= self.dist[cur]:
                raise Unreachable(f"distance descent stalled at vertex {cur}")
            path.append(nxt)
            cur = nxt
            guard -= 1
            if guard == 0:
                raise Unreachable("distance descent failed to terminate")
        path.reverse()
        return tuple(path)

    def farthest(self):
        """(vertex, distance) of the farthest reachable vertex (smallest id wins)."""
        d = np.where(np.isfinite(self.dist), self.dist, -1.0)
        v = int(d.argmax())
        return v, float(d[v])


def distance_field(region, sources, forbidden_vertices=(), forbidden_edges=(),
                   forbidden_faces=(), graph=None):
    """Multi-source distance field on the (masked) region graph."""
    if graph is None:
        if forbidden_vertices or forbidden_edges or forbidden_faces:
            graph = build_graph(region, forbidden_vertices, forbidden_edges,
                                forbidden_faces)
        else:
            graph = full_graph(region)
    src = sorted({int(s) for s in sources})
    if not src:
        raise Unreachable("empty source set")
    dist, pred, _ = _csgraph_dijkstra(
        graph.matrix, directed=True, indices=src, min_only=True,
        return_predecessors=True)
    return DistanceField(graph, src, dist, pred)


def shortest_path(region, a, b, avoid=None):
    """Deterministic shortest vertex path from a to b within the region.

    ``avoid`` is an optional dict with ``vertices``/``edges``/``faces`` keys
    masking out parts of the graph (endpoints are never masked).
    """
    a, b = int(a), int(b)
    if a == b:
        return (a,)
    avoid = avoid or {}
    fv = set(avoid.get("vertices", ())) - {a, b}
    field = distance_field(region, [a], forbidden_vertices=fv,
                           forbidden_edges=avoid.get("edges", ()),
                           forbidden_faces=avoid.get("faces", ()))
    if not np.isfinite(field.dist[b]):
        raise Unreachable(f"no path from {a} to {b} under the given mask")
    return field.path_to(b)


def shortest_path_to_set(region, a, targets, avoid=None):
    """Shortest path from ``a`` to the nearest vertex of ``targets``.

    Only the last point of the returned path lies in the target set.
    """
    a = int(a)
    targets = {int(t) for t in targets}
    if a in targets:
        return (a,)
    avoid = avoid or {}
    fv = set(avoid.get("vertices", ())) - {a} - targets
    field = distance_field(region, [a], forbidden_vertices=fv,
                           forbidden_edges=avoid.get("edges", ()),
                           forbidden_faces=avoid.get("faces", ()))
    t_arr = np.fromiter(sorted(targets), dtype=np.int64)
    d = field.dist[t_arr]
    if not np.isfinite(d).any():
        raise Unreachable("no target vertex is reachable")
    order = np.lexsort((t_arr, d))
    best = int(t_arr[order[0]])
    return field.path_to(best)


def min_separator(region, arc_a, arc_c, boundary_vertices):
    """Shortest path from arc_a to arc_c whose interior avoids the boundary.

    ``arc_a``/``arc_c`` are vertex sequences on the region boundary;
    ``boundary_vertices`` is the full boundary vertex set.  The returned path
    starts on arc_a, ends on arc_c and is interior-disjoint from the
    boundary, so it separates a disc region into two.
    """
    A = {int(v) for v in arc_a}
    C = {int(v) for v in arc_c}
    if A & C:
        raise Unreachable("separator arcs are not disjoint")
    forbidden = set(boundary_vertices) - A - C
    field = distance_field(region, sorted(A), forbidden_vertices=forbidden)
    t_arr = np.fromiter(sorted(C), dtype=np.int64)
    d = field.dist[t_arr]
    if not np.isfinite(d).any():
        raise Unreachable("separator arcs are mutually unreachable")
    order = np.lexsort((t_arr, d))
    best = int(t_arr[order[0]])
    path = field.path_to(best)
    # interior must be clean of boundary vertices by construction
    assert not any(v in forbidden for v in path[1:-1])
    return path


def steiner_refine(surface, levels, vertex_budget=None, with_map=False):
    """Subdivide every edge 2**levels times with flat length interpolation.

    Graph distances on the result are no larger than on the input and no
    smaller than the true polyhedral distances.  Raises BudgetError before
    exceeding ``vertex_budget``.
    """
    if levels < 0:
        raise ValueError("levels must be >= 0")
    face_parent = np.arange(surface.n_faces)
    out = surface
    for _ in range(levels):
        predicted = out.n_vertices + out.n_edges
        if vertex_budget is not None and predicted > vertex_budget:
            raise BudgetError(
                f"refinement would produce {predicted} vertices "
                f"(budget {vertex_budget})")
        out, fp = out.midpoint_refine()
        face_parent = face_parent[fp]
    if with_map:
        return out, face_parent
    return out
