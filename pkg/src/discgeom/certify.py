"""Bound formulas, length certificates, and the subdisc-inequality ledger.

Each BoundKind evaluates one published length bound from metric summaries.
A certificate's verdict is PASS when the achieved quantity stays below
bound * (1 + slack) + (max edge length) * depth, the declared absorption of
all discretization error; FAIL certificates are returned, never raised.
Excess kinds compare (achieved - boundary length) instead of the raw value.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .config import DEFAULT_CONFIG
from .errors import MalformedHomotopy
from .geodesics import distance_field
from .metrics import MetricSummary

LOG43 = math.log(4.0 / 3.0)
SMALL_AREA_RATIO = (2.0 / 3.0) ** 6.5  # Thm 1.2 branch threshold sqrt(A)/diam


def paper_ceil(x):
    """Integer part of x + 1 (the ceiling convention used by the bounds)."""
    return math.floor(x) + 1.0


@dataclass(frozen=True)
class BoundKind:
    """A named bound formula, with optional parameters.

    ``n`` parametrizes the logarithmic-induction family; ``inner`` is the
    kind wrapped by the geodesic-fan reduction.
    """
    name: str
    n: int = 0
    inner: object = None

    def __str__(self):
        if self.name == "LEMMA_7_2":
            return f"LEMMA_7_2(n={self.n})"
        if self.name == "PROP_7_3_WRAP":
            return f"PROP_7_3_WRAP[{self.inner}]"
        return self.name


THM_1_1 = BoundKind("THM_1_1")
THM_1_2 = BoundKind("THM_1_2")
THM_1_2_SMALL = BoundKind("THM_1_2_SMALL")
THM_1_6A = BoundKind("THM_1_6A")
THM_1_6B = BoundKind("THM_1_6B")
THM_1_6C = BoundKind("THM_1_6C")
THM_1_6D_EXCESS = BoundKind("THM_1_6D_EXCESS")
MAIN_A_EXCESS = BoundKind("MAIN_A_EXCESS")
THM_1_3A = BoundKind("THM_1_3A")
THM_1_3B = BoundKind("THM_1_3B")

EXCESS_KINDS = {"THM_1_6D_EXCESS", "MAIN_A_EXCESS"}
SPHERE_KINDS = {"THM_1_3A", "THM_1_3B"}


def lemma_7_2(n):
    return BoundKind("LEMMA_7_2", n=int(n))


def fan_wrap(inner):
    return BoundKind("PROP_7_3_WRAP", inner=inner)


def applicable(kind, m: MetricSummary):
    """Whether the kind's predicate accepts these metrics."""
    L, A, d = m.boundary_length, m.area, m.diameter
    sA = math.sqrt(A)
    name = kind.name
    if name in SPHERE_KINDS:
        return L == 0.0
    if L <= 0.0:
        return False
    if name == "THM_1_6A":
        return L <= 2.0 * math.sqrt(3.0) * sA
    if name == "THM_1_6B":
        return L <= 6.0 * sA
    if name == "THM_1_6C":
        return L > 6.0 * sA
    if name == "THM_1_6D_EXCESS":
        return d >= 3.0 * sA
    if name == "THM_1_2_SMALL":
        return sA <= SMALL_AREA_RATIO * d
    return True


def bound_value(kind, m: MetricSummary, config=None):
    """Evaluate the bound formula; raises ValueError when inapplicable."""
    config = config or DEFAULT_CONFIG
    if not applicable(kind, m):
        raise ValueError(f"{kind} is not applicable to these metrics")
    L, A, diam, d_d, delta = (m.boundary_length, m.area, m.diameter,
                              m.d_d, m.delta_d)
    sA = math.sqrt(A)
    C, D = config.c_const, config.d_const
    name = kind.name

    if name == "THM_1_1":
        return 2.0 * L + D * sA + 2.0 * diam
    if name == "THM_1_2":
        return L + 159.0 * diam + 40.0 * diam * max(0.0, math.log(sA / diam))
    if name == "THM_1_2_SMALL":
        return L + 50.0 * diam
    if name == "THM_1_6A":
        return L + D * sA + 2.0 * d_d
    if name == "THM_1_6B":
        return L + C * sA + 2.0 * d_d
    if name == "THM_1_6C":
        steps = paper_ceil(math.log((L - 4.0 * sA) / (2.0 * sA)) / LOG43)
        return L + 2.0 * max(0.0, steps) * sA + C * sA + 2.0 * d_d
    if name == "THM_1_6D_EXCESS":
        return (3.0 * diam + (2.0 / LOG43) * sA
                * math.log((2.0 / 3.0) * (2.0 * diam / sA - 4.0)) + C * sA)
    if name == "MAIN_A_EXCESS":
        return 200.0 * diam * max(1.0, math.log(sA / diam))
    if name == "THM_1_3A":
        return D * sA + 2.0 * diam
    if name == "THM_1_3B":
        return 159.0 * diam + 40.0 * diam * max(0.0, math.log(sA / diam))
    if name == "LEMMA_7_2":
        return (2.0 * L + 2.0 * d_d + 8.0 * kind.n * delta
                + C * math.sqrt((2.0 / 3.0) ** kind.n * A))
    if name == "PROP_7_3_WRAP":
        return _fan_wrap_value(kind.inner, m, config)
    raise ValueError(f"unknown bound kind {kind}")


def _fan_wrap_value(inner, m, config, grid=1024):
    """max over t of [L - t + inner(L_t)] with L_t = min(2(L-t), 2t, 2 diam)."""
    L, diam = m.boundary_length, m.diameter
    ts = np.linspace(0.0, L, grid + 1)
    best = -math.inf
    for t in ts:
        Lt = min(2.0 * (L - t), 2.0 * t, 2.0 * diam)
        if Lt <= 0.0:
            val = L - t
        else:
            mt = MetricSummary(m.area, Lt, m.diameter, m.d_d, m.delta_d,
                               m.sample_gap)
            kinds = [inner]
            if inner.name in ("THM_1_6A", "THM_1_6B", "THM_1_6C"):
                kinds = [THM_1_6A, THM_1_6B, THM_1_6C]
            val = None
            for k in kinds:
                if applicable(k, mt):
                    val = L - t + bound_value(k, mt, config)
                    break
            if val is None:
                val = L - t
        best = max(best, val)
    return best


def second_form_margin(x):
    """The Thm 1.6 C simplification ratio at x = |bd|/sqrt(A); < 0.9735 < 1."""
    x = np.asarray(x, dtype=float)
    return 2.0 * np.log(2.0 * (x - 4.0) / 3.0) / (LOG43 * x)


def log_branch_constant_margin(k):
    """C*k + 16*log_{3/2}(1/k), which must stay below 154 on the k-interval."""
    k = np.asarray(k, dtype=float)
    return DEFAULT_CONFIG.c_const * k + 16.0 * np.log(1.0 / k) / math.log(1.5)


@dataclass(frozen=True)
class LengthCertificate:
    kind: BoundKind
    metrics: MetricSummary
    constants: dict
    bound: float
    achieved: float
    measured: float      # what was compared: raw max length, or the excess
    slack: float
    additive_slack: float
    verdict: str         # PASS | FAIL | INAPPLICABLE
    provenance: str = ""

    @property
    def margin(self):
        return self.bound * (1.0 + self.slack) + self.additive_slack - self.measured

    def to_json_dict(self):
        return {
            "schema": "discgeom/certificate-v1",
            "kind": str(self.kind),
            "bound": float(self.bound),
            "achieved": float(self.achieved),
            "measured": float(self.measured),
            "is_excess": self.kind.name in EXCESS_KINDS,
            "slack": float(self.slack),
            "additive_slack": float(self.additive_slack),
            "verdict": self.verdict,
            "provenance": self.provenance,
            "metrics": {
                "area": self.metrics.area,
                "boundary_length": self.metrics.boundary_length,
                "diameter": self.metrics.diameter,
                "d_D": self.metrics.d_d,
                "delta_D": self.metrics.delta_d,
            },
            "constants": dict(self.constants),
        }


def check_certificate(homotopy, kind, m, config=None, depth=None):
    """Build a certificate for a homotopy against one bound kind.

    FAIL verdicts are returned, never raised; INAPPLICABLE when the kind's
    predicate rejects the metrics.
    """
    config = config or DEFAULT_CONFIG
    if homotopy.lengths.shape[0] != len(homotopy.moves) + 1:
        raise MalformedHomotopy("homotopy lengths out of step with moves")
    achieved = homotopy.max_length
    depth = homotopy.depth if depth is None else depth
    h_edge = homotopy.surface.max_edge_length
    add = h_edge * max(1, depth)
    constants = {"D_CONST": config.d_const, "C_CONST": config.c_const}

    if not applicable(kind, m):
        return LengthCertificate(kind, m, constants, float("nan"), achieved,
                                 float("nan"), config.slack, add,
                                 "INAPPLICABLE", homotopy.provenance_hash())
    bound = bound_value(kind, m, config)
    measured = achieved - m.boundary_length if kind.name in EXCESS_KINDS else achieved
    ok = measured <= bound * (1.0 + config.slack) + add
    return LengthCertificate(kind, m, constants, bound, achieved, measured,
                             config.slack, add, "PASS" if ok else "FAIL",
                             homotopy.provenance_hash())


# -- subdisc inequality ledger -------------------------------------------------

@dataclass(frozen=True)
class LedgerRecord:
    """One recursion step's Lemma 4.1 / 4.2 measurements."""
    context: str
    d_parent: float
    d_child: float
    child_boundary: float
    cut_length: float          # |bd child \ bd parent|
    alpha_length: float        # nan when no connecting geodesic on record
    lemma41_ok: bool
    lemma41_applicable: bool
    lemma41_margin: float
    lemma42_ok: bool
    lemma42_applicable: bool
    lemma42_margin: float

    CSV_HEADER = ("context,d_parent,d_child,child_boundary,cut_length,"
                  "alpha_length,l41_applicable,l41_ok,l41_margin,"
                  "l42_applicable,l42_ok,l42_margin")

    def to_csv_row(self):
        return (f"{self.context},{self.d_parent:.9g},{self.d_child:.9g},"
                f"{self.child_boundary:.9g},{self.cut_length:.9g},"
                f"{self.alpha_length:.9g},{int(self.lemma41_applicable)},"
                f"{int(self.lemma41_ok)},{self.lemma41_margin:.9g},"
                f"{int(self.lemma42_applicable)},{int(self.lemma42_ok)},"
                f"{self.lemma42_margin:.9g}")


def _dd_estimate(region, config, cache=None):
    """Sampled max boundary eccentricity: (lower estimate, sampling gap)."""
    key = region.faces
    if cache is not None and key in cache:
        return cache[key]
    cycle = list(region.boundary_cycle)
    surf = region.surface
    n = len(cycle)
    step = max(1, n // config.ecc_samples)
    sources = cycle[::step]
    gap = 0.0
    if step > 1:
        arc = 0.0
        for i in range(n):
            arc += surf.length_of(cycle[i], cycle[(i + 1) % n])
        gap = arc * step / n
    verts = np.fromiter(sorted(region.vertex_set), dtype=np.int64)
    best = 0.0
    for s in sources:
        fld = distance_field(region, [s])
        d = fld.dist[verts]
        d = d[np.isfinite(d)]
        if d.size and float(d.max()) > best:
            best = float(d.max())
    out = (best, gap)
    if cache is not None:
        cache[key] = out
    return out


def subdisc_ledger(parent, child, alpha=None, config=None, cache=None,
                   context=""):
    """Measure the two subdisc diameter inequalities for one recursion step.

    Lemma 4.1: d_child + |alpha| <= d_parent + |bd child|       (needs alpha)
    Lemma 4.2: d_child <= d_parent + |bd child \\ bd parent|    (needs shared
    boundary).  Violations are recorded, not raised.
    """
    config = config or DEFAULT_CONFIG
    surf = parent.surface
    d_par, gap_par = _dd_estimate(parent, config, cache)
    d_chi, gap_chi = _dd_estimate(child, config, cache)
    # widen the left side by its sampling gap so the check stays honest
    d_chi_hi = d_chi + gap_chi / 2.0

    child_bd = child.boundary_length
    parent_edges = set()
    cyc = list(parent.boundary_cycle)
    from .surface import edge_key
    for i in range(len(cyc)):
        parent_edges.add(edge_key(cyc[i], cyc[(i + 1) % len(cyc)]))
    cut_len = 0.0
    shared = False
    ccyc = list(child.boundary_cycle)
    for i in range(len(ccyc)):
        k = edge_key(ccyc[i], ccyc[(i + 1) % len(ccyc)])
        if k in parent_edges:
            shared = True
        else:
            cut_len += surf.length_of(*k)

    h = surf.max_edge_length
    slack = config.slack

    a_len = float("nan")
    l41_app = alpha is not None
    l41_ok, l41_margin = True, float("nan")
    if l41_app:
        a_len = surf.path_length(alpha)
        rhs = d_par + child_bd
        lhs = d_chi_hi + a_len
        l41_margin = rhs * (1.0 + slack) + h - lhs
        l41_ok = l41_margin >= 0.0

    l42_app = shared
    l42_ok, l42_margin = True, float("nan")
    if l42_app:
        rhs = d_par + cut_len
        l42_margin = rhs * (1.0 + slack) + h - d_chi_hi
        l42_ok = l42_margin >= 0.0

    return LedgerRecord(context, d_par, d_chi_hi, child_bd, cut_len, a_len,
                        l41_ok, l41_app, l41_margin,
                        l42_ok, l42_app, l42_margin)


def ledger_csv(records):
    lines = [LedgerRecord.CSV_HEADER]
    lines += [r.to_csv_row() for r in records]
    return "\n".join(lines) + "\n"
