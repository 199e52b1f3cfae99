"""Move-level homotopies: elementary triangle moves, sweeps, verification.

A homotopy is a sequence of vertex-path curves where consecutive curves
differ by exactly one elementary move:

* ``push``  -- replace one triangle side (u,v) by the other two (u,w,v);
* ``pull``  -- replace two sides (u,w,v) by the third (u,v);
* ``spur_ins``/``spur_del`` -- insert or delete a one-edge backtrack
  (u) <-> (u,v,u).

Homotopies are stored as an initial curve plus the move list; intermediate
curves are reproduced by replay, which keeps memory linear in the number of
moves.  The generic sweep transforms the current curve into an explicit
target curve by crossing a prescribed face set, choosing length-minimizing
moves; the face set between two curves is recovered by mod-2 winding.
"""

import hashlib
import json
from collections import deque

import numpy as np

from .curves import cat, drop_spurs, rev
from .errors import BudgetError, HomotopyError, MalformedHomotopy
from .region import OUTER, odd_edge_ids, parity_faces


# -- move primitives ---------------------------------------------------------

def apply_move(surface, curve, move):
    """Apply one elementary move to a vertex-path tuple; returns (curve, dlen)."""
    kind = move[0]
    c = curve
    if kind == "push":
        _, i, w, f = move
        u, v = c[i], c[i + 1]
        _require_face(surface, f, (u, v, w))
        dlen = surface.length_of(u, w) + surface.length_of(w, v) - surface.length_of(u, v)
        return c[:i + 1] + (w,) + c[i + 1:], dlen
    if kind == "pull":
        _, i, f = move
        u, w, v = c[i], c[i + 1], c[i + 2]
        if u == v:
            raise MalformedHomotopy("pull across a spur; use spur_del")
        _require_face(surface, f, (u, w, v))
        dlen = surface.length_of(u, v) - surface.length_of(u, w) - surface.length_of(w, v)
        return c[:i + 1] + c[i + 2:], dlen
    if kind == "spur_ins":
        _, i, v = move
        u = c[i]
        if not surface.has_edge(u, v):
            raise MalformedHomotopy(f"spur over non-edge ({u},{v})")
        return c[:i + 1] + (v, u) + c[i + 1:], 2.0 * surface.length_of(u, v)
    if kind == "spur_del":
        _, i = move
        u, v, u2 = c[i], c[i + 1], c[i + 2]
        if u != u2:
            raise MalformedHomotopy(f"spur_del at {i}: {u},{v},{u2} is not a spur")
        return c[:i + 1] + c[i + 3:], -2.0 * surface.length_of(u, v)
    raise MalformedHomotopy(f"unknown move kind {kind!r}")


def _require_face(surface, f, tri):
    want = frozenset(int(x) for x in tri)
    if len(want) != 3:
        raise MalformedHomotopy(f"degenerate triangle {tri}")
    got = frozenset(surface.face_vertices(f))
    if got != want:
        raise MalformedHomotopy(f"move face {f}={tuple(sorted(got))} != {tuple(sorted(want))}")


def diff_is_elementary(surface, c1, c2):
    """Check two curves differ by one legal move, from the curves alone."""
    c1, c2 = tuple(c1), tuple(c2)
    if abs(len(c2) - len(c1)) not in (1, 2):
        return False
    i = 0
    while i < min(len(c1), len(c2)) and c1[i] == c2[i]:
        i += 1
    j = 0
    while (j < min(len(c1), len(c2)) - i
           and c1[len(c1) - 1 - j] == c2[len(c2) - 1 - j]):
        j += 1
    a = c1[max(i - 1, 0):len(c1) - j + 1]
    b = c2[max(i - 1, 0):len(c2) - j + 1]
    if len(b) < len(a):
        a, b = b, a
    if a and b and (a[0] != b[0] or a[-1] != b[-1]):
        return False
    fsi = surface.face_set_index
    if len(a) == 2 and len(b) == 3:
        u, v = a
        w = b[1]
        return frozenset((u, w, v)) in fsi and u != v
    if len(a) == 1 and len(b) == 3:
        return b[0] == b[2] == a[0] and surface.has_edge(b[0], b[1])
    if len(a) == 2 and len(b) == 4 and b[0] == b[2]:
        # spur inserted at a shared endpoint of the window
        return surface.has_edge(b[0], b[1]) and b[3] == a[1]
    if len(a) == 2 and len(b) == 4 and b[1] == b[3]:
        return surface.has_edge(b[1], b[2]) and b[0] == a[0]
    return False


# -- homotopy object ---------------------------------------------------------

class Homotopy:
    """Finite curve family linked by elementary moves (path or based-loop)."""

    def __init__(self, surface, kind, initial, moves, lengths, tags=(), depth=0):
        if kind not in ("path", "loop"):
            raise MalformedHomotopy(f"bad homotopy kind {kind!r}")
        self.surface = surface
        self.kind = kind
        self.initial = tuple(int(v) for v in initial)
        self.moves = list(moves)
        self.lengths = np.asarray(lengths, dtype=float)
        self.tags = list(tags)
        self.depth = int(depth)
        if self.lengths.shape[0] != len(self.moves) + 1:
            raise MalformedHomotopy("lengths array must have one entry per curve")

    @property
    def n_curves(self):
        return len(self.moves) + 1

    @property
    def max_length(self):
        return float(self.lengths.max())

    def curves(self):
        """Yield every curve by replay (tuples of vertex ids)."""
        c = self.initial
        yield c
        for mv in self.moves:
            c, _ = apply_move(self.surface, c, mv)
            yield c

    @property
    def final(self):
        if not hasattr(self, "_final"):
            c = self.initial
            for mv in self.moves:
                c, _ = apply_move(self.surface, c, mv)
            self._final = c
        return self._final

    def swept_faces(self):
        out = set()
        for mv in self.moves:
            if mv[0] == "push":
                out.add(int(mv[3]))
            elif mv[0] == "pull":
                out.add(int(mv[2]))
        return out

    def provenance_hash(self):
        blob = json.dumps([list(self.initial), [list(m) for m in self.moves]],
                          separators=(",", ":")).encode()
        return hashlib.sha256(blob).hexdigest()

    def check_invariants(self):
        """Full independent validation; raises MalformedHomotopy on failure."""
        verify_replay(self.surface, self.kind, self.initial, self.moves, self.lengths)
        return True

    def to_json_dict(self, surface_dump=None, certificate=None, extra=None):
        d = {
            "schema": "discgeom/homotopy-v1",
            "kind": self.kind,
            "initial_curve": list(self.initial),
            "moves": [list(m) for m in self.moves],
            "lengths": [float(x) for x in self.lengths],
            "max_length": self.max_length,
            "stage_tags": [[int(i), t] for i, t in self.tags],
            "depth": self.depth,
            "provenance_sha256": self.provenance_hash(),
        }
        if surface_dump is not None:
            d["surface_dump"] = surface_dump
        if certificate is not None:
            d["certificate"] = certificate
        if extra:
            d.update(extra)
        return d


def verify_replay(surface, kind, initial, moves, lengths=None, sample_every=256):
    """Independently re-derive the curve family and validate every invariant.

    Checks each move's legality against the mesh, endpoint/basepoint fixity,
    and recomputes lengths (incrementally per move, from scratch on sampled
    curves).  Returns (n_curves, max_length).
    """
    c = tuple(int(v) for v in initial)
    if kind == "loop" and (len(c) < 1 or c[0] != c[-1]):
        raise MalformedHomotopy("loop curves must start and end at the basepoint")
    p0, q0 = c[0], c[-1]
    length = surface.path_length(c)
    maxlen = length
    if lengths is not None and abs(length - lengths[0]) > 1e-9 * max(1.0, length):
        raise MalformedHomotopy("stored length of curve 0 does not match mesh")
    for k, mv in enumerate(moves):
        i = mv[1]
        span = {"push": 2, "pull": 3, "spur_ins": 1, "spur_del": 3}.get(mv[0], 1)
        if i < 0 or i + span > len(c):
            raise MalformedHomotopy(f"move {k} position out of range")
        c2, dlen = apply_move(surface, c, mv)
        if c2[0] != p0 or c2[-1] != q0:
            raise MalformedHomotopy(f"move {k} changed an endpoint")
        length += dlen
        c = c2
        if (k + 1) % sample_every == 0:
            fresh = surface.path_length(c)
            if abs(fresh - length) > 1e-9 * max(1.0, fresh):
                raise MalformedHomotopy(f"length drift at curve {k + 1}")
            length = fresh
        if lengths is not None and abs(length - lengths[k + 1]) > 1e-9 * max(1.0, length):
            raise MalformedHomotopy(f"stored length of curve {k + 1} does not match mesh")
        if length > maxlen:
            maxlen = length
    fresh = surface.path_length(c)
    if abs(fresh - length) > 1e-9 * max(1.0, fresh):
        raise MalformedHomotopy("final length drift")
    return len(moves) + 1, max(maxlen, fresh)


# -- builder and sweeps ------------------------------------------------------

class HomotopyBuilder:
    """Accumulates moves; the workhorse behind every contraction strategy."""

    def __init__(self, surface, initial, kind="path", anchor=OUTER,
                 move_budget=2_000_000):
        self.surface = surface
        self.kind = kind
        self.anchor = anchor
        self.initial = tuple(int(v) for v in initial)
        self.current = self.initial
        self.moves = []
        self.length = surface.path_length(self.initial)
        self.lengths = [self.length]
        self.tags = []
        self.move_budget = move_budget
        self.depth_seen = 0
        # active window: (prefix keep, suffix keep); moves may only modify
        # vertices strictly between the kept stretches
        self._window = (0, 0)

    def mark(self, tag):
        self.tags.append((len(self.moves), tag))

    def note_depth(self, depth):
        if depth > self.depth_seen:
            self.depth_seen = depth

    def _apply(self, move):
        if len(self.moves) >= self.move_budget:
            raise BudgetError(f"move budget {self.move_budget} exceeded")
        self.current, dlen = apply_move(self.surface, self.current, move)
        self.length += dlen
        self.moves.append(move)
        self.lengths.append(self.length)

    def push(self, i, w, face):
        self._apply(("push", int(i), int(w), int(face)))

    def pull(self, i, face):
        self._apply(("pull", int(i), int(face)))

    def spur_ins(self, i, v):
        self._apply(("spur_ins", int(i), int(v)))

    def spur_del(self, i):
        self._apply(("spur_del", int(i)))

    def finish(self):
        return Homotopy(self.surface, self.kind, self.initial, self.moves,
                        self.lengths, self.tags, self.depth_seen)

    # -- sweeps --------------------------------------------------------------

    def advance_to(self, target, tag=None, faces=None):
        """Move the current curve onto ``target`` across the enclosed faces.

        The target is matched exactly (it may contain deliberate backtracks);
        when ``faces`` is not given, the face set to cross is recovered from
        the mod-2 winding of current+reversed-target.  All moves are confined
        to the span where current and target disagree, so context stretches
        of the curve that run alongside the swept faces are never touched.
        """
        target = tuple(int(v) for v in target)
        cur = self.current
        if cur[0] != target[0] or cur[-1] != target[-1]:
            raise HomotopyError("advance_to target has different endpoints")
        if tag:
            self.mark(tag)
        if cur == target:
            return
        if faces is None:
            odd = odd_edge_ids(self.surface, cat(cur, rev(target)))
            faces = parity_faces(self.surface, odd, anchor=self.anchor) if odd else []
        p_keep = 0
        while (p_keep < min(len(cur), len(target)) - 1
               and cur[p_keep] == target[p_keep]):
            p_keep += 1
        s_keep = 0
        while (s_keep < min(len(cur), len(target)) - p_keep - 1
               and cur[len(cur) - 1 - s_keep] == target[len(target) - 1 - s_keep]):
            s_keep += 1
        prev = self._window
        self._window = (p_keep, s_keep)
        try:
            self.sweep_across(faces, target)
        finally:
            self._window = prev

    def sweep_across(self, face_set, target, _depth=0):
        """Cross exactly ``face_set``, farthest-from-target faces first.

        The curtain order (descending dual-graph distance from the target
        curve) keeps the unswept set hugging the target, which avoids
        pinching off pockets that would leave windings behind.
        """
        F = set(int(f) for f in face_set)
        layer = self._target_layers(F, target)
        while F:
            mv = self._best_move(F, layer)
            if mv is None:
                raise HomotopyError(
                    f"sweep stalled with {len(F)} faces left", partial=self.finish())
            self._apply(mv[0])
            if mv[1] is not None:
                F.discard(mv[1])
            elif mv[0][0] == "spur_ins":
                # a seed backtrack: consume one of its faces right away so
                # the eager spur cleanup cannot cancel the seed
                _, i, u = mv[0]
                v = self.current[i]
                f = next(f for f in self.surface.faces_of_edge(v, u) if f in F)
                w = next(x for x in self.surface.face_vertices(f)
                         if x not in (v, u))
                self._apply(("push", i + 1, w, f))
                F.discard(f)
        self._settle_to(tuple(target), _depth)

    def _target_layers(self, F, target):
        """Dual-graph BFS depth of each F face from the target curve."""
        surface = self.surface
        seeds = deque()
        layer = {}
        for u, v in zip(target[:-1], target[1:]):
            if u == v:
                continue
            for f in surface.faces_of_edge(u, v):
                if f in F and f not in layer:
                    layer[f] = 0
                    seeds.append(f)
        while seeds:
            f = seeds.popleft()
            for e in surface.face_edges[f]:
                for g in surface.edge_faces[e]:
                    g = int(g)
                    if g >= 0 and g in F and g not in layer:
                        layer[g] = layer[f] + 1
                        seeds.append(g)
        far = max(layer.values(), default=0) + 1
        for f in F:
            layer.setdefault(f, far)
        return layer

    def _bounds(self):
        """Index range the active window allows moves to modify."""
        p_keep, s_keep = self._window
        lo = max(p_keep - 1, 0)
        hi = len(self.current) - s_keep   # first frozen suffix position
        return lo, hi

    def _best_move(self, F, layer=None):
        """(move, face_consumed): deepest-layer face, cheapest length change.

        Spur deletions that cannot strand frontier faces are always taken
        first.  When the curve only touches the remaining faces at vertices,
        a seed backtrack is emitted.  Moves outside the active window are
        never considered.
        """
        surface = self.surface
        c = self.current
        fsi = surface.face_set_index
        lo, hi = self._bounds()
        if layer is None:
            layer = {}
        best = None  # key tuple, move, face
        for i in range(lo, min(len(c) - 2, hi - 1)):
            u, w, v = c[i], c[i + 1], c[i + 2]
            if u == v:
                # spur: delete only if its edge is not carrying the frontier
                # and the whole backtrack sits inside the window
                if i + 2 >= hi:
                    continue
                fs = surface.faces_of_edge(u, w)
                if sum(1 for f in fs if f in F) != 1:
                    d = -2.0 * surface.length_of(u, w)
                    key = (0, d, i, -1)
                    if best is None or key < best[0]:
                        best = (key, ("spur_del", i), None)
                continue
            f = fsi.get(frozenset((u, w, v)))
            if f is not None and f in F:
                d = (surface.length_of(u, v) - surface.length_of(u, w)
                     - surface.length_of(w, v))
                key = (1, -layer.get(f, 0), d, i, -1)
                if best is None or key < best[0]:
                    best = (key, ("pull", i, f), f)
        if best is not None and best[0][0] == 0:
            return best[1], best[2]
        for i in range(lo, min(len(c) - 1, hi)):
            u, v = c[i], c[i + 1]
            if u == v:
                continue
            for f in surface.faces_of_edge(u, v):
                if f not in F:
                    continue
                w = next(x for x in surface.face_vertices(f) if x not in (u, v))
                d = (surface.length_of(u, w) + surface.length_of(w, v)
                     - surface.length_of(u, v))
                key = (1, -layer.get(f, 0), d, i, w)
                if best is None or key < best[0]:
                    best = (key, ("push", i, w, f), f)
        if best is not None:
            return best[1], best[2]
        # the curve touches the remaining faces only at vertices: seed a
        # backtrack into the region so pushes can start
        for i in range(lo, min(len(c), hi)):
            v = c[i]
            for f in sorted(surface.vertex_faces.get(v, ())):
                if f in F:
                    u = min(x for x in surface.face_vertices(f) if x != v)
                    return ("spur_ins", i, u), None
        return None

    def _settle_to(self, target, _depth=0):
        """Spur-adjust the current curve until it equals the target exactly.

        After a face sweep the curves agree mod 2 but may still differ by
        one-edge backtracks, integer-winding lassos, or content reached
        through a different doubled corridor.  Order of repairs: free
        reduction; exact backtrack expansion; re-sweep of residual parity;
        contraction of the smallest enclosed excursion; corridor insertion
        along the reduced target until such an excursion appears.
        """
        target = tuple(target)
        reduced_target = drop_spurs(target)
        for _ in range(64):
            self._reduce_spurs()
            if self.current == target:
                return
            if self.current == reduced_target:
                self._expand_nested(target)
                return
            odd = odd_edge_ids(self.surface, cat(self.current, rev(target)))
            if odd:
                if _depth >= 8:
                    break
                faces = parity_faces(self.surface, odd, anchor=self.anchor)
                self.sweep_across(faces, target, _depth + 1)
                return
            if self._unwind_one_lasso(_depth):
                continue
            if _depth >= 8 or not self._corridor_repair(reduced_target, _depth):
                break
        raise HomotopyError(
            f"sweep did not settle onto its target "
            f"(got {len(self.current)} pts, want {len(target)})",
            partial=self.finish())

    def _reduce_spurs(self):
        while True:
            c = self.current
            lo, hi = self._bounds()
            for i in range(lo, min(len(c) - 2, hi - 1)):
                if c[i] == c[i + 2] and i + 2 < hi:
                    self.spur_del(i)
                    break
            else:
                return

    def _expand_nested(self, target):
        """Rebuild the target's backtracks onto a fully reduced current."""
        guard = len(target) + 2
        while self.current != target and guard > 0:
            guard -= 1
            c, t = self.current, target
            k = 0
            while k < min(len(c), len(t)) and c[k] == t[k]:
                k += 1
            if k == 0 or k >= len(t):
                break
            self.spur_ins(k - 1, t[k])
        if self.current != target:
            raise HomotopyError("backtrack expansion missed the target",
                                partial=self.finish())

    def _corridor_repair(self, reduced_target, _depth):
        """Reroute a conjugated tail: walk the target corridor into the curve
        until a small enclosed excursion forms, then contract it."""
        for _ in range(len(reduced_target)):
            c, t = self.current, reduced_target
            k = 0
            while k < min(len(c), len(t)) and c[k] == t[k]:
                k += 1
            if k == 0 or k >= len(t):
                return False
            self.spur_ins(k - 1, t[k])
            if self._unwind_one_lasso(_depth):
                return True
        return False

    def _unwind_one_lasso(self, _depth=0):
        """Contract the parasitic closed excursion enclosing the fewest faces.

        Windows that enclose a dominant share of the surface are left alone:
        collapsing them would destroy the homotopy content rather than clean
        up a stray winding.
        """
        if _depth >= 6:
            return False
        c = self.current
        lo, hi = self._bounds()
        last_seen = {}
        best = None
        for j in range(lo, min(len(c), hi)):
            v = c[j]
            if v in last_seen:
                i = last_seen[v]
                if not (i == 0 and j == len(c) - 1):
                    window = c[i:j + 1]
                    odd = odd_edge_ids(self.surface, window)
                    if odd:
                        faces = parity_faces(self.surface, odd,
                                             anchor=self.anchor)
                        if len(faces) and (best is None
                                           or len(faces) < len(best[2])):
                            best = (i, j, faces)
            last_seen[v] = j
        if best is None:
            return False
        i, j, faces = best
        if len(faces) > max(16, self.surface.n_faces // 4):
            return False
        collapsed = c[:i + 1] + c[j + 1:]
        self.sweep_across(faces, collapsed, _depth + 1)
        return True

    def collapse_loop_tail(self):
        """Contract a loop of the form w . rev(w) to the constant basepoint."""
        if self.kind != "loop":
            raise HomotopyError("collapse_loop_tail requires a loop homotopy")
        if len(self.current) % 2 == 0:
            raise HomotopyError("loop is not an exact out-and-back")
        while len(self.current) > 1:
            c = self.current
            m = (len(c) - 1) // 2
            if c[m - 1] != c[m + 1]:
                raise HomotopyError("loop tail is not symmetric; cannot cancel")
            self.spur_del(m - 1)
