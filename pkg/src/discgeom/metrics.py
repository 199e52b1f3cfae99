"""Metric summaries of surfaces and regions: area, boundary, diameter, d_D, delta_D.

All distances are graph distances on the surface at its current refinement,
so they are upper approximations of the polyhedral metric that converge
under refinement.  The diameter and d_D are estimated from farthest-point
sweeps and sampled boundary sources; both estimates are lower bounds of the
graph quantity and the sampling gap is reported so consumers can widen
tolerances accordingly.
"""

from dataclasses import dataclass

import numpy as np

from .config import DEFAULT_CONFIG
from .geodesics import distance_field, full_graph
from .surface import TriangulatedSurface


@dataclass(frozen=True)
class MetricSummary:
    area: float
    boundary_length: float
    diameter: float
    d_d: float
    delta_d: float
    sample_gap: float = 0.0  # boundary-arc gap between d_D sample sources

    def __post_init__(self):
        if not (self.delta_d <= self.d_d + 1e-12 and self.d_d <= self.diameter + 1e-12):
            raise ValueError("metric summary ordering delta <= d_D <= diameter violated")


def _vertex_list(obj):
    if isinstance(obj, TriangulatedSurface):
        return np.arange(obj.n_vertices)
    return np.fromiter(sorted(obj.vertex_set), dtype=np.int64)


def _region_max(dist, verts):
    d = dist[verts]
    d = d[np.isfinite(d)]
    return float(d.max()) if d.size else 0.0


def _eccentricity(obj, source, verts, graph):
    field = distance_field(obj, [source], graph=graph)
    d = field.dist[verts]
    ok = np.isfinite(d)
    arg = int(verts[ok][d[ok].argmax()])
    return float(d[ok].max()), arg


def diameter_estimate(obj, rounds=4, extra_sources=()):
    """Iterated farthest-point sweep; a lower bound of the graph diameter."""
    graph = full_graph(obj)
    verts = _vertex_list(obj)
    best = 0.0
    cur = int(verts.min())
    seen = set()
    for source in list(extra_sources) + [cur]:
        source = int(source)
        for _ in range(rounds):
            if source in seen:
                break
            seen.add(source)
            ecc, far = _eccentricity(obj, source, verts, graph)
            if ecc > best:
                best = ecc
            source = far
    return best


def _sample_boundary(cycle, lengths_along, cap):
    """Indices of <= cap boundary sources, roughly equally spaced by arc length."""
    n = len(cycle)
    if n <= cap:
        return list(range(n)), 0.0
    total = lengths_along[-1]
    targets = np.linspace(0.0, total, cap, endpoint=False)
    idx = sorted(set(int(np.searchsorted(lengths_along, t)) % n for t in targets))
    gaps = []
    for k in range(len(idx)):
        a, b = idx[k], idx[(k + 1) % len(idx)]
        arc = (lengths_along[b] - lengths_along[a]) % total
        gaps.append(arc)
    return idx, max(gaps) if gaps else 0.0


def metric_summary(obj, config=None):
    """MetricSummary of a surface or DiscRegion (cached on the object)."""
    config = config or DEFAULT_CONFIG
    cache = getattr(obj, "_cache", None)
    if cache is not None and "summary" in cache:
        return cache["summary"]

    if isinstance(obj, TriangulatedSurface):
        area = obj.area
        is_sphere = obj.is_sphere
        cycle = [] if is_sphere else obj.boundary_cycle
        blen = 0.0 if is_sphere else obj.boundary_length
        surface = obj
    else:
        area = obj.area
        is_sphere = False
        cycle = list(obj.boundary_cycle)
        blen = obj.boundary_length
        surface = obj.surface

    verts = _vertex_list(obj)
    graph = full_graph(obj)

    if is_sphere:
        diam = diameter_estimate(obj)
        summary = MetricSummary(area, 0.0, diam, diam, diam, 0.0)
    else:
        # delta_D: one multi-source field from the whole boundary
        field = distance_field(obj, cycle, graph=graph)
        delta = _region_max(field.dist, verts)

        # d_D: max eccentricity over sampled boundary sources
        lengths_along = np.zeros(len(cycle))
        for i in range(1, len(cycle)):
            lengths_along[i] = lengths_along[i - 1] + surface.length_of(
                cycle[i - 1], cycle[i])
        closing = surface.length_of(cycle[-1], cycle[0])
        idx, gap = _sample_boundary(cycle, np.append(lengths_along,
                                                     lengths_along[-1] + closing),
                                    config.ecc_samples)
        d_d = 0.0
        far_pts = []
        for k in idx:
            ecc, far = _eccentricity(obj, cycle[k], verts, graph)
            if ecc > d_d:
                d_d = ecc
            far_pts.append(far)
        diam = diameter_estimate(obj, extra_sources=far_pts[:2])
        d_d = max(d_d, delta)
        diam = max(diam, d_d)
        summary = MetricSummary(area, blen, diam, d_d, delta, gap)

    if cache is not None:
        cache["summary"] = summary
    return summary


def boundary_distance_field(region):
    """Distance-to-boundary field of a region (used for cut seeds)."""
    return distance_field(region, list(region.boundary_cycle))
