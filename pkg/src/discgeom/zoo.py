"""Parametric test-surface generators.

Flat and curved standards (discs, rectangles, caps, spheres) plus the
adversarial shapes: the doubled-square pillow, thin ellipsoids, the
three-legged starfish, and finger discs carrying a binary tree of thin
tubes whose area grows with depth while the diameter barely moves.

Everything is deterministic: equal specs produce byte-identical canonical
dumps.  Intrinsic shapes (pillow, starfish, finger discs) carry exact flat
edge lengths; their embedded coordinates are for plotting only.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ResolutionError
from .surface import TriangulatedSurface, edge_key

SHAPES = ("flat_disc", "flat_rect", "cap", "pillow", "icosphere",
          "thin_ellipsoid", "starfish", "finger_disc", "bumpy_random")


@dataclass(frozen=True)
class ZooSpec:
    shape: str
    params: dict = field(default_factory=dict)
    resolution: float = 0.1

    def __post_init__(self):
        if self.shape not in SHAPES:
            raise ValueError(f"unknown shape {self.shape!r}; know {SHAPES}")
        if self.resolution <= 0:
            raise ResolutionError("resolution must be positive")


def generate(spec):
    """Build the surface described by a ZooSpec (validated on construction)."""
    fn = {
        "flat_disc": flat_disc,
        "flat_rect": flat_rect,
        "cap": spherical_cap,
        "pillow": pillow,
        "icosphere": icosphere,
        "thin_ellipsoid": thin_ellipsoid,
        "starfish": starfish,
        "finger_disc": finger_disc,
        "bumpy_random": bumpy_random,
    }[spec.shape]
    return fn(resolution=spec.resolution, **spec.params)


# -- ring-based discs ----------------------------------------------------------

def _ring_disc(n_rings, ring_radius, point_at):
    """Shared combinatorics: center + rings of 6i vertices."""
    coords = [point_at(0.0, 0.0)]
    ring_start = [0]
    for i in range(1, n_rings + 1):
        ring_start.append(len(coords))
        cnt = 6 * i
        for k in range(cnt):
            coords.append(point_at(ring_radius(i), 2.0 * math.pi * k / cnt))
    faces = []
    for k in range(6):
        faces.append([0, 1 + k, 1 + (k + 1) % 6])
    for i in range(1, n_rings):
        inner, outer = ring_start[i], ring_start[i + 1]
        ni, no = 6 * i, 6 * (i + 1)
        for s in range(6):
            a = [inner + (s * i + j) % ni for j in range(i + 1)]
            b = [outer + (s * (i + 1) + j) % no for j in range(i + 2)]
            for j in range(i + 1):
                faces.append([a[j], b[j], b[j + 1]])
                if j < i:
                    faces.append([a[j], b[j + 1], a[j + 1]])
    return np.array(coords), np.array(faces, dtype=np.int64)


def flat_disc(radius=1.0, resolution=0.1):
    """Flat round disc of the given radius in the z=0 plane."""
    if radius <= 0:
        raise ResolutionError("radius must be positive")
    n = max(2, int(round(radius / resolution)))
    coords, faces = _ring_disc(
        n, lambda i: radius * i / n,
        lambda r, t: (r * math.cos(t), r * math.sin(t), 0.0))
    return TriangulatedSurface(faces, coords=coords)


def spherical_cap(radius=1.0, angle=1.0, resolution=0.1):
    """Geodesic cap of a round sphere: polar angle in (0, pi)."""
    if not 0.0 < angle < math.pi:
        raise ResolutionError("cap angle must lie in (0, pi)")
    n = max(2, int(round(radius * angle / resolution)))

    def point_at(theta, phi):
        return (radius * math.sin(theta) * math.cos(phi),
                radius * math.sin(theta) * math.sin(phi),
                radius * math.cos(theta))

    coords, faces = _ring_disc(n, lambda i: angle * i / n, point_at)
    return TriangulatedSurface(faces, coords=coords)


def flat_rect(width=1.0, height=1.0, resolution=0.1):
    """Flat axis-aligned rectangle meshed as a diagonal grid."""
    if width <= 0 or height <= 0:
        raise ResolutionError("rectangle sides must be positive")
    nx = max(1, int(round(width / resolution)))
    ny = max(1, int(round(height / resolution)))
    xs = np.linspace(0.0, width, nx + 1)
    ys = np.linspace(0.0, height, ny + 1)
    coords = np.array([(x, y, 0.0) for y in ys for x in xs])
    faces = []
    for j in range(ny):
        for i in range(nx):
            a = j * (nx + 1) + i
            b, c, d = a + 1, a + nx + 2, a + nx + 1
            faces.append([a, b, c])
            faces.append([a, c, d])
    return TriangulatedSurface(np.array(faces, dtype=np.int64), coords=coords)


# -- intrinsic doubling --------------------------------------------------------

def double_disc(surface):
    """Glue two copies of a disc along their boundary: an intrinsic sphere.

    Edge lengths are copied exactly; bottom-copy coordinates are mirrored in
    z (plotting only; for flat inputs the copies coincide).  Interior edges
    with both endpoints on the boundary would double into parallel edges, so
    they are midpoint-split first.
    """
    from .curves import EdgePoint
    from .region import snap_cut_to_edges

    if not surface.is_disc:
        raise ResolutionError("double_disc needs a disc surface")
    while True:
        bv = surface.boundary_vertices
        bad = [EdgePoint(int(u), int(v), 0.5)
               for e, (u, v) in enumerate(surface.edges)
               if not surface.boundary_edge_mask[e]
               and int(u) in bv and int(v) in bv]
        if not bad:
            break
        surface, _ = snap_cut_to_edges(surface, bad)
    bverts = surface.boundary_vertices
    remap = {}
    n = surface.n_vertices
    extra = 0
    for v in range(n):
        if v in bverts:
            remap[v] = v
        else:
            remap[v] = n + extra
            extra += 1
    faces = [list(tri) for tri in surface.faces]
    for a, b, c in surface.faces:
        faces.append([remap[int(c)], remap[int(b)], remap[int(a)]])
    lengths = {}
    for e, (u, v) in enumerate(surface.edges):
        u, v = int(u), int(v)
        lengths[edge_key(u, v)] = float(surface.edge_len[e])
        lengths[edge_key(remap[u], remap[v])] = float(surface.edge_len[e])
    coords = None
    if surface.coords is not None:
        coords = np.vstack([surface.coords,
                            np.zeros((extra, 3))])
        for v in range(n):
            if v not in bverts:
                x, y, z = surface.coords[v]
                coords[remap[v]] = (x, y, -z)
    return TriangulatedSurface(np.array(faces, dtype=np.int64),
                               edge_lengths=lengths, coords=coords)


def pillow(side=1.0, resolution=0.1):
    """Two flat squares glued along their boundary: the minimal exact sphere."""
    return double_disc(flat_rect(side, side, resolution))


# -- round spheres -------------------------------------------------------------

def _icosahedron():
    t = (1.0 + math.sqrt(5.0)) / 2.0
    verts = np.array([
        (-1, t, 0), (1, t, 0), (-1, -t, 0), (1, -t, 0),
        (0, -1, t), (0, 1, t), (0, -1, -t), (0, 1, -t),
        (t, 0, -1), (t, 0, 1), (-t, 0, -1), (-t, 0, 1)], dtype=float)
    verts /= np.linalg.norm(verts[0])
    faces = np.array([
        (0, 11, 5), (0, 5, 1), (0, 1, 7), (0, 7, 10), (0, 10, 11),
        (1, 5, 9), (5, 11, 4), (11, 10, 2), (10, 7, 6), (7, 1, 8),
        (3, 9, 4), (3, 4, 2), (3, 2, 6), (3, 6, 8), (3, 8, 9),
        (4, 9, 5), (2, 4, 11), (6, 2, 10), (8, 6, 7), (9, 8, 1)],
        dtype=np.int64)
    return verts, faces


def _icosphere_mesh(subdivisions):
    verts, faces = _icosahedron()
    verts = [tuple(v) for v in verts]
    for _ in range(subdivisions):
        mid_cache = {}
        new_faces = []

        def midpoint(i, j):
            k = (i, j) if i < j else (j, i)
            if k not in mid_cache:
                p = np.array(verts[i]) + np.array(verts[j])
                p /= np.linalg.norm(p)
                verts.append(tuple(p))
                mid_cache[k] = len(verts) - 1
            return mid_cache[k]

        for a, b, c in faces:
            ab, bc, ca = midpoint(a, b), midpoint(b, c), midpoint(c, a)
            new_faces += [[a, ab, ca], [ab, b, bc], [ca, bc, c], [ab, bc, ca]]
        faces = np.array(new_faces, dtype=np.int64)
    return np.array(verts), faces


def icosphere(radius=1.0, subdivisions=3, resolution=None):
    """Geodesic sphere; ``resolution`` (if given) picks the subdivision depth."""
    if resolution is not None:
        # icosahedron edge is about 1.05r; each subdivision halves it
        need = 1.05 * radius
        subdivisions = 0
        while need > resolution and subdivisions < 7:
            need /= 2.0
            subdivisions += 1
    verts, faces = _icosphere_mesh(subdivisions)
    return TriangulatedSurface(faces, coords=verts * radius)


def thin_ellipsoid(ax=5.0, by=0.1, cz=0.1, resolution=0.1, rings_min=9,
                   segments_min=8):
    """Ellipsoid of revolution about the long axis, meshed in rings.

    Ring stations are spaced by meridian arc length, so the mesh contains
    clean transverse cycles (the short separating curves the theory finds).
    """
    a, b, c = float(ax), float(by), float(cz)
    # meridian arc length by quadrature over the polar angle
    thetas = np.linspace(0.0, math.pi, 2048)
    ds = np.sqrt((a * np.sin(thetas)) ** 2 + (b * np.cos(thetas)) ** 2)
    arc = np.concatenate([[0.0], np.cumsum(0.5 * (ds[1:] + ds[:-1])
                                           * np.diff(thetas))])
    total = float(arc[-1])
    n = max(rings_min, int(round(total / resolution)))
    m = max(segments_min, int(round(2.0 * math.pi * max(b, c) / resolution)))
    # invert the arc-length table for evenly spaced stations
    stations = [float(np.interp(k * total / n, arc, thetas))
                for k in range(1, n)]

    coords = [(a, 0.0, 0.0)]
    for th in stations:
        for k in range(m):
            ph = 2.0 * math.pi * k / m
            coords.append((a * math.cos(th), b * math.sin(th) * math.cos(ph),
                           c * math.sin(th) * math.sin(ph)))
    coords.append((-a, 0.0, 0.0))
    south = len(coords) - 1

    faces = []
    ring = lambda j, k: 1 + j * m + (k % m)
    for k in range(m):
        faces.append([0, ring(0, k + 1), ring(0, k)])
    for j in range(len(stations) - 1):
        for k in range(m):
            p0, p1 = ring(j, k), ring(j, k + 1)
            q0, q1 = ring(j + 1, k), ring(j + 1, k + 1)
            faces.append([p0, p1, q1])
            faces.append([p0, q1, q0])
    last = len(stations) - 1
    for k in range(m):
        faces.append([south, ring(last, k), ring(last, k + 1)])
    return TriangulatedSurface(np.array(faces, dtype=np.int64),
                               coords=np.array(coords))


# -- welded planar assemblies ----------------------------------------------------

class _Weld:
    """Coordinate-welded mesh assembly for exact planar constructions."""

    def __init__(self):
        self.coords = []
        self.index = {}
        self.faces = []

    def vertex(self, x, y):
        key = (round(float(x), 12), round(float(y), 12))
        if key not in self.index:
            self.index[key] = len(self.coords)
            self.coords.append((key[0], key[1], 0.0))
        return self.index[key]

    def grid(self, origin, u_dir, v_dir, nu, nv, du, dv):
        """Rectangular strip of nu x nv cells; returns nothing (welded)."""
        ox, oy = origin
        ux, uy = u_dir
        vx, vy = v_dir
        ids = [[self.vertex(ox + i * du * ux + j * dv * vx,
                            oy + i * du * uy + j * dv * vy)
                for j in range(nv + 1)] for i in range(nu + 1)]
        for i in range(nu):
            for j in range(nv):
                a, b = ids[i][j], ids[i + 1][j]
                c, d = ids[i + 1][j + 1], ids[i][j + 1]
                self.faces.append([a, b, c])
                self.faces.append([a, c, d])

    def fan(self, center_xy, rim_pts):
        c = self.vertex(*center_xy)
        rim = [self.vertex(x, y) for x, y in rim_pts]
        for a, b in zip(rim, rim[1:]):
            self.faces.append([c, a, b])

    def build(self):
        return TriangulatedSurface(np.array(self.faces, dtype=np.int64),
                                   coords=np.array(self.coords))


def starfish(legs=3, leg_length=2.0, leg_width=0.1, resolution=0.05):
    """Doubled planar star: a thin-legged sphere (three legs by default).

    Each leg is a leg_length x leg_width strip attached to one side of a
    regular polygon hub; the flat domain is doubled into a sphere, mimicking
    a starfish made of thin ellipsoid halves.
    """
    if legs < 3:
        raise ResolutionError("need at least 3 legs")
    if leg_width < 2.0 * resolution:
        raise ResolutionError("leg_width must be at least twice the resolution")
    w = _Weld()
    rho = leg_width / (2.0 * math.sin(math.pi / legs))
    corners = [(rho * math.cos(2 * math.pi * (k + 0.5) / legs),
                rho * math.sin(2 * math.pi * (k + 0.5) / legs))
               for k in range(legs)]
    mw = max(1, int(round(leg_width / resolution)))
    ml = max(2, int(round(leg_length / resolution)))
    rim = []
    for k in range(legs):
        x0, y0 = corners[k]
        x1, y1 = corners[(k + 1) % legs]
        for j in range(mw):
            t = j / mw
            rim.append((x0 + t * (x1 - x0), y0 + t * (y1 - y0)))
    rim.append(rim[0])
    w.fan((0.0, 0.0), rim)
    for k in range(legs):
        x0, y0 = corners[k]
        x1, y1 = corners[(k + 1) % legs]
        ex, ey = (x1 - x0) / leg_width, (y1 - y0) / leg_width
        nxv, nyv = ey, -ex   # outward normal of the hub side
        w.grid((x0, y0), (nxv, nyv), (ex, ey), ml, mw,
               leg_length / ml, leg_width / mw)
    return double_disc(w.build())


# -- finger discs ----------------------------------------------------------------

class _Surgeon:
    """Mutable mesh for intrinsic tube surgery, built once at the end."""

    def __init__(self, surface):
        self.faces = {i: list(map(int, tri)) for i, tri in enumerate(surface.faces)}
        self.next_face = surface.n_faces
        self.lengths = {edge_key(int(u), int(v)): float(surface.edge_len[e])
                        for e, (u, v) in enumerate(surface.edges)}
        self.coords = [tuple(map(float, r)) for r in surface.coords]
        self.next_vert = surface.n_vertices

    def new_vertex(self, xyz):
        self.coords.append(tuple(float(c) for c in xyz))
        self.next_vert += 1
        return self.next_vert - 1

    def add_face(self, tri):
        self.faces[self.next_face] = list(tri)
        self.next_face += 1
        return self.next_face - 1

    def set_len(self, u, v, value):
        self.lengths[edge_key(u, v)] = float(value)

    def centroid(self, tri):
        return np.mean([np.array(self.coords[v]) for v in tri], axis=0)

    def build(self):
        faces = np.array(list(self.faces.values()), dtype=np.int64)
        return TriangulatedSurface(faces, edge_lengths=self.lengths,
                                   coords=np.array(self.coords))


def _trapezoid_diagonal(e_bottom, e_top, leg):
    eta2 = leg * leg - 0.25 * (e_bottom - e_top) ** 2
    eta = math.sqrt(max(eta2, 1e-24))
    return math.hypot(0.5 * (e_bottom + e_top), eta)


def _frame(direction):
    d = np.asarray(direction, float)
    d = d / np.linalg.norm(d)
    ref = np.array([1.0, 0.0, 0.0])
    if abs(np.dot(ref, d)) > 0.9:
        ref = np.array([0.0, 1.0, 0.0])
    u = np.cross(d, ref)
    u /= np.linalg.norm(u)
    return d, u, np.cross(d, u)


def _attach_tube(s, face_id, depth, tube_len, direction):
    """Replace a face by a triangular tube; recurse on two tip children.

    A branching tip ends in a hexagonal ring capped by a subdivided triangle
    whose two corner faces (half the width) become the child openings.
    """
    tri = s.faces.pop(face_id)
    a, b, c = tri
    sides = [s.lengths[edge_key(a, b)], s.lengths[edge_key(b, c)],
             s.lengths[edge_key(c, a)]]
    width = sum(sides) / 3.0
    n_rings = max(2, int(round(tube_len / width)))
    h = max(tube_len / n_rings,
            0.51 * max(abs(e - width) for e in sides), 0.2 * width)
    d, u, v = _frame(direction)
    center = s.centroid(tri)

    ring, ring_sides = list(tri), sides
    for j in range(1, n_rings + 1):
        ctr = center + d * (h * j)
        rad = width / math.sqrt(3.0)
        new = [s.new_vertex(ctr + rad * (math.cos(2 * math.pi * k / 3) * u
                                         + math.sin(2 * math.pi * k / 3) * v))
               for k in range(3)]
        for k in range(3):
            p0, p1 = ring[k], ring[(k + 1) % 3]
            q0, q1 = new[k], new[(k + 1) % 3]
            s.set_len(q0, q1, width)
            s.set_len(p0, q0, h)
            s.set_len(p0, q1, _trapezoid_diagonal(ring_sides[k], width, h))
            s.add_face([p0, q1, q0])
            s.add_face([p0, p1, q1])
        ring, ring_sides = new, [width] * 3

    if depth <= 0:
        s.add_face([ring[2], ring[1], ring[0]])
        return

    # hexagonal transition ring: corners plus side midpoints, then a
    # subdivided cap whose corner faces open into the child tubes
    half = width / 2.0
    ctr = s.centroid(ring) + d * h
    rad = width / math.sqrt(3.0)
    corners = [s.new_vertex(ctr + rad * (math.cos(2 * math.pi * k / 3) * u
                                         + math.sin(2 * math.pi * k / 3) * v))
               for k in range(3)]
    mids = [s.new_vertex(0.5 * (np.array(s.coords[corners[k]])
                               + np.array(s.coords[corners[(k + 1) % 3]])))
            for k in range(3)]
    eta = math.sqrt(max(h * h, 1e-24))
    diag_m = math.hypot(width / 2.0, eta)
    for k in range(3):
        p0, p1 = ring[k], ring[(k + 1) % 3]
        ck, mk, ck1 = corners[k], mids[k], corners[(k + 1) % 3]
        s.set_len(ck, mk, half)
        s.set_len(mk, ck1, half)
        s.set_len(p0, ck, h)
        s.set_len(p0, mk, diag_m)
        s.set_len(p1, mk, diag_m)
        s.add_face([p0, mk, ck])
        s.add_face([p0, p1, mk])
        s.add_face([p1, ck1, mk])
    m01, m12, m20 = mids
    c0, c1, c2 = corners
    s.set_len(m01, m12, half)
    s.set_len(m12, m20, half)
    s.set_len(m20, m01, half)
    child_a = s.add_face([c0, m20, m01])
    child_b = s.add_face([m01, m12, c1])
    s.add_face([m20, c2, m12])
    s.add_face([m01, m20, m12])
    rot = math.pi / 4.0
    _attach_tube(s, child_a, depth - 1, tube_len,
                 math.cos(rot) * d + math.sin(rot) * u)
    _attach_tube(s, child_b, depth - 1, tube_len,
                 math.cos(rot) * d - math.sin(rot) * u)


def finger_disc(depth=1, base_radius=1.0, tube_length=None, resolution=0.1):
    """Flat disc carrying a depth-level binary tree of thin flat tubes.

    Tube widths halve at every branching while lengths stay constant, so the
    added area per level is roughly constant and the total area grows about
    linearly in the depth while the diameter stays comparable to the base
    disc's.  Used to make contraction excess grow.
    """
    if depth < 0:
        raise ResolutionError("depth must be >= 0")
    tube_length = tube_length or 0.6 * base_radius
    base = flat_disc(base_radius, resolution=base_radius / 3.0)
    s = _Surgeon(base)
    if depth > 0:
        _attach_tube(s, 0, depth - 1, tube_length, np.array([0.0, 0.0, 1.0]))
    surf = s.build()
    while surf.max_edge_length > resolution and surf.n_faces < 1_000_000:
        surf, _ = surf.midpoint_refine()
    return surf


# -- random bumps -----------------------------------------------------------------

def bumpy_random(base="sphere", seed=0, amplitude=0.25, bumps=6,
                 radius=1.0, resolution=0.1):
    """Random smooth bumps over a disc (heightfield) or sphere (radial)."""
    rng = np.random.default_rng(int(seed))
    if base == "disc":
        flat = flat_disc(radius, resolution)
        xy = flat.coords[:, :2]
        z = np.zeros(len(xy))
        for _ in range(bumps):
            cx, cy = rng.uniform(-0.6 * radius, 0.6 * radius, 2)
            amp = rng.uniform(-amplitude, amplitude) * radius
            sig = rng.uniform(0.2, 0.5) * radius
            d2 = (xy[:, 0] - cx) ** 2 + (xy[:, 1] - cy) ** 2
            z += amp * np.exp(-d2 / (2 * sig * sig))
        rho2 = (xy ** 2).sum(axis=1)
        z *= np.maximum(0.0, 1.0 - rho2 / (radius * radius))
        coords = np.column_stack([xy, z])
        return TriangulatedSurface(flat.faces, coords=coords)
    if base == "sphere":
        sph = icosphere(radius, resolution=resolution)
        pts = sph.coords / radius
        scale = np.ones(len(pts))
        for _ in range(bumps):
            c = rng.normal(size=3)
            c /= np.linalg.norm(c)
            amp = rng.uniform(-amplitude, amplitude)
            sig = rng.uniform(0.3, 0.8)
            d2 = ((pts - c) ** 2).sum(axis=1)
            scale += amp * np.exp(-d2 / (2 * sig * sig))
        scale = np.maximum(scale, 0.3)
        return TriangulatedSurface(sph.faces, coords=pts * scale[:, None] * radius)
    raise ResolutionError(f"unknown bumpy base {base!r}")
