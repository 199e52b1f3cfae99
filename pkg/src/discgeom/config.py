"""Engine configuration: certified-bound constants, slack, and budgets.

The two bound constants are kept as configuration because the inequalities
they certify hold for any values above the documented thresholds; the
defaults are the published ones.  Budgets may be overridden through
``DISCGEOM_*`` environment variables (budgets only, nothing else).
"""

import os
from dataclasses import dataclass, field, replace


def _env_int(name, default):
    raw = os.environ.get(name)
    if raw is None:
        return default
    try:
        return int(raw)
    except ValueError:
        raise ValueError(f"{name} must be an integer, got {raw!r}")


@dataclass(frozen=True)
class EngineConfig:
    # bound-formula constants (config-overridable)
    d_const: float = 664.0
    c_const: float = 686.0

    # certificate slack: multiplicative part, plus (max edge length) x depth
    # additive part applied at verdict time
    slack: float = 0.10

    # geodesic accuracy knob: every edge is subdivided 2**refine_levels times
    refine_levels: int = 1

    # area floor for the small-area base case, as a multiple of the largest
    # triangle area of the working surface
    area_floor_factor: float = 4.0

    # regions at or below this face count are swept greedily instead of
    # being subdivided further
    leaf_faces: int = 12

    # candidate cap for diameter-cut witness searches
    witness_cap: int = 64

    # boundary-source sample cap for d_D estimates
    ecc_samples: int = 24

    # resource budgets (env-overridable)
    vertex_budget: int = field(default_factory=lambda: _env_int("DISCGEOM_VERTEX_BUDGET", 1_500_000))
    move_budget: int = field(default_factory=lambda: _env_int("DISCGEOM_MOVE_BUDGET", 2_000_000))
    max_depth: int = field(default_factory=lambda: _env_int("DISCGEOM_MAX_DEPTH", 64))

    # whether contraction runs record the subdisc-inequality ledger
    ledger: bool = True

    def with_(self, **kw):
        """Return a copy with the given fields replaced."""
        return replace(self, **kw)


DEFAULT_CONFIG = EngineConfig()
