"""Coarse-graining a random planar graph-like state to a square cluster-like grid.

The reduction works on graphs whose vertices are integer (x, y) tuples, as
produced by :func:`quditspt.percolation.config_to_graph`.

1. Slide a w x w array of l x l blocks over the lattice, centre first, and
   look for a network with crossing (i, j) inside block (i, j).  For w = 2
   this is one induced cycle around a central hole; larger grids route
   horizontal paths through each block row and vertical paths that meet every
   horizontal path in one contiguous segment.  Paths are chord-free, so no
   edge cleanup is needed on lattices of degree at most 4 (the cleanup
   helpers are still provided for general graphs).
2. Every vertex off the network is measured in Z.
3. Each crossing segment is shortened with rule c to one interior vertex and
   then merged into a single four-leg vertex with an X pair (rule b).
4. Wires between crossings are shortened with rule c until crossings touch.
"""

from __future__ import annotations

import heapq
import json
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .core import QuditError
from .graphlike import (GraphLikeState, Step, k_connect, k_disconnect, oracle_step,
                        stabilizer_check)

SUBCRITICAL = "subcritical instance"
REACH_TRIES = (0.34, 0.67, 1.0)
PENALTY_TRIES = (4, 1)
HOLE_TRIES = (0.5, 0.25, 0.0)
EXCERPT_MAX = 10


# ---------------------------------------------------------------------------
# schedule bookkeeping


class Recorder:
    """Applies rule steps to a graph while logging them."""

    def __init__(self, g: GraphLikeState, rng: np.random.Generator, trace: bool = False):
        self.g = g
        self.rng = rng
        self.schedule: list[Step] = []
        self.trace: list[GraphLikeState] | None = [] if trace else None

    def _outcome(self) -> int:
        return int(self.rng.integers(self.g.d))

    def _run(self, step: Step) -> None:
        if self.trace is not None:
            self.trace.append(self.g)
        self.g = step.apply(self.g)
        self.schedule.append(step)

    def z(self, v) -> None:
        self._run(Step("z", (v,), (self._outcome(),)))

    def zxk(self, v, k: int) -> None:
        self._run(Step("zxk", (v,), (self._outcome(),), k % self.g.d))

    def connect(self, v) -> None:
        """Rule c on a degree-2 vertex, fusing its neighbours with weight 1."""
        nb = list(self.g.neighbors(v).items())
        if len(nb) != 2:
            raise QuditError("wire shortening needs a degree-2 vertex")
        (x, p), (y, q) = nb
        if self.g.weight(x, y):
            raise QuditError("wire neighbours are already joined")
        self.zxk(v, k_connect(p, q, self.g.d))

    def junction(self, v, a, c) -> None:
        nb = self.g.neighbors(v)
        self.zxk(v, k_disconnect(self.g.weight(a, c), nb[a], nb[c], self.g.d))

    def x_pair(self, a, b) -> None:
        self._run(Step("x_pair", (a, b), (self._outcome(), self._outcome())))


# ---------------------------------------------------------------------------
# cleanup helpers for graphs with excess edges


def clean_wire(rec: Recorder, wire: list) -> list:
    """Walk a wire from its first vertex, always jumping to the furthest wire neighbour.

    Wire vertices skipped by a jump are measured in Z; returns the kept wire.
    """
    pos = {v: i for i, v in enumerate(wire)}
    kept = [wire[0]]
    i = 0
    while i < len(wire) - 1:
        nb = [pos[u] for u in rec.g.neighbors(wire[i]) if u in pos and pos[u] > i]
        if not nb:
            raise QuditError("wire is disconnected")
        j = max(nb)
        for t in range(i + 1, j):
            rec.z(wire[t])
        kept.append(wire[j])
        i = j
    return kept


def junction_case(g: GraphLikeState, wire: list, x) -> str:
    """Classify how the end x of a side wire touches the through wire.

    'b': one attachment (already T-shaped); 'c': two adjacent attachments;
    'd': attachments further apart.
    """
    idx = sorted(i for i, v in enumerate(wire) if v in g.neighbors(x))
    if not idx:
        raise QuditError("side wire does not touch the through wire")
    if len(idx) == 1:
        return "b"
    if len(idx) == 2 and idx[1] == idx[0] + 1:
        return "c"
    return "d"


def resolve_junction(rec: Recorder, wire: list, x) -> list:
    """Turn the attachment of x to the through wire into a T-junction.

    Returns the through wire after the cleanup.
    """
    case = junction_case(rec.g, wire, x)
    idx = sorted(i for i, v in enumerate(wire) if v in rec.g.neighbors(x))
    if case == "b":
        return list(wire)
    if case == "c":
        a, b = wire[idx[0]], wire[idx[1]]
        if idx[1] + 1 >= len(wire):
            a, b = b, a
        # rule c on b cuts a-x; b's far neighbour becomes the junction
        rec.junction(b, a, x)
        return [v for v in wire if v != b]
    lo, hi = idx[0], idx[-1]
    for t in range(lo + 1, hi):
        rec.z(wire[t])
    return wire[: lo + 1] + [x] + wire[hi:]


# ---------------------------------------------------------------------------
# network search


@dataclass
class Network:
    h_paths: list  # w lists of vertices, left to right
    v_paths: list  # w lists of free vertices per layer: v_paths[j][i] joins row i to i+1
    segments: dict  # (i, j) -> (lo, hi) index interval on h_paths[i]

    def vertices(self) -> set:
        vs = set()
        w = len(self.h_paths)
        for i, path in enumerate(self.h_paths):
            lo, hi = self.segments[(i, 0)][0], self.segments[(i, w - 1)][1]
            vs.update(path[lo:hi + 1])
        for runs in self.v_paths:
            for run in runs:
                vs.update(run)
        return vs

    def to_dict(self) -> dict:
        enc = lambda v: list(v)
        return {"h_paths": [[enc(v) for v in p] for p in self.h_paths],
                "v_paths": [[[enc(v) for v in run] for run in runs] for runs in self.v_paths],
                "segments": [[i, j, lo, hi] for (i, j), (lo, hi) in sorted(self.segments.items())]}


def _placements(g, w: int, block: int | None) -> list:
    """Candidate (rows, cols) block arrays, nearest the lattice centre first.

    ``block`` is the block height in lattice rows (default a fifth of the
    height); the width is scaled by the aspect ratio of the vertex coordinates.
    """
    xs = [v[0] for v in g.vertices]
    ys = [v[1] for v in g.vertices]
    x0, x1, y0, y1 = min(xs), max(xs), min(ys), max(ys)
    ly = block if block is not None else max(2, (y1 - y0 + 1) // 5)
    lx = max(2, round(ly * (x1 - x0 + 1) / (y1 - y0 + 1)))
    if ly < 2 or w * ly > y1 - y0 + 1 or w * lx > x1 - x0 + 1:
        raise QuditError("lattice too small for the requested grid")
    out = []
    # offsets step by half a block
    for oy in range(y0, y1 - w * ly + 2, max(1, ly // 2)):
        for ox in range(x0, x1 - w * lx + 2, max(1, lx // 2)):
            off = (abs(2 * ox + w * lx - x0 - x1 - 1) / lx
                   + abs(2 * oy + w * ly - y0 - y1 - 1) / ly)
            rows = [(oy + i * ly, oy + (i + 1) * ly - 1) for i in range(w)]
            cols = [(ox + j * lx, ox + (j + 1) * lx - 1) for j in range(w)]
            out.append((off, oy, ox, rows, cols))
    out.sort(key=lambda t: t[:3])
    return [(rows, cols) for *_, rows, cols in out]


def _key(v):
    return (v[0], v[1])


def _inside(v, rng_x, rng_y) -> bool:
    return rng_x[0] <= v[0] <= rng_x[1] and rng_y[0] <= v[1] <= rng_y[1]


def _h_path(g, allowed: set, row, cols, reach: float = 1.0, penalty: int = 2, lean: int = 0):
    """Path visiting blocks (row, 0), ..., (row, w-1) in order.

    It starts in the outer ``reach`` fraction of the first block and ends in
    the outer fraction of the last one.  Dijkstra over (vertex, stage) with a
    unit step cost plus ``penalty`` per row of distance outside the band; ties
    go to the leftmost-lowest vertex.  ``lean`` = -1/+1 pulls the path towards
    the bottom/top of its band.  The result is shortcut until chordless.
    """
    w = len(cols)
    y0, y1 = row
    width = cols[0][1] - cols[0][0] + 1
    x_start = cols[0][0] + reach * width
    x_end = cols[-1][1] - reach * width

    def cost(v):
        tilt = (v[1] - y0) if lean < 0 else (y1 - v[1]) if lean > 0 else 0
        return 1 + penalty * max(0, y0 - v[1], v[1] - y1) + 0.1 * max(tilt, 0)

    def stage_of(v, stage):
        if stage + 1 < w and _inside(v, cols[stage + 1], row):
            return stage + 1
        return stage

    dist, prev, pq = {}, {}, []
    for v in sorted((v for v in allowed if _inside(v, cols[0], row) and v[0] <= x_start),
                    key=_key):
        st = (v, 0)
        dist[st] = cost(v)
        prev[st] = None
        heapq.heappush(pq, (dist[st], _key(v), 0, st))
    goal = None
    while pq:
        c, _, _, st = heapq.heappop(pq)
        if c > dist[st]:
            continue
        u, stage = st
        if stage == w - 1 and u[0] >= x_end:
            goal = st
            break
        for x in sorted(g.neighbors(u), key=_key):
            if x not in allowed:
                continue
            nxt = (x, stage_of(x, stage))
            nc = c + cost(x)
            if nc < dist.get(nxt, float("inf")):
                dist[nxt] = nc
                prev[nxt] = st
                heapq.heappush(pq, (nc, _key(x), nxt[1], nxt))
    if goal is None:
        return None
    path = []
    st = goal
    while st is not None:
        path.append(st[0])
        st = prev[st]
    path = _shortcut(g, path[::-1])
    if len(set(path)) != len(path):
        return None
    # every block of the row must still be visited, in order
    stage = 0
    if not _inside(path[0], cols[0], row):
        return None
    for v in path:
        stage = stage_of(v, stage)
    return path if stage == w - 1 else None


def _shortcut(g, path: list) -> list:
    """Remove chords by jumping to the furthest later neighbour."""
    pos = {}
    for t, v in enumerate(path):
        pos[v] = t  # later occurrences win, which also removes loops
    out, t = [], 0
    while t < len(path):
        v = path[t]
        out.append(v)
        later = [pos[x] for x in g.neighbors(v) if x in pos and pos[x] > t]
        if t == len(path) - 1:
            break
        t = max(later) if later else t + 1
    return out


def _v_path(g, allowed: set, col, rows, h_paths, h_index):
    """Layered BFS for the vertical path through blocks (0, j) ... (w-1, j).

    States are (free vertex, layer, pending entry vertex).  A free vertex may
    touch an H path only at the vertex it exits from or is about to enter.
    Returns (runs, segments) or None.
    """
    w = len(h_paths)
    on_h = {v: i for i, p in enumerate(h_paths) for v in p}
    free = {v for v in allowed if v not in on_h}

    def in_block(v, i):
        return _inside(v, col, rows[i])

    def classify(u, layer, allowed_exit=None):
        """State for stepping onto free vertex u at this layer, or None."""
        t = {x for x in g.neighbors(u) if x in on_h} - {allowed_exit}
        if not t:
            return (u, layer, None)
        if len(t) == 1:
            (a,) = t
            if on_h[a] == layer and in_block(a, layer):
                return (u, layer, a)
        return None

    prev = {}
    queue = deque()
    for b in sorted((v for v in h_paths[0] if in_block(v, 0)), key=_key):
        for u in sorted(g.neighbors(b), key=_key):
            if u in free:
                st = classify(u, 1, b)
                if st is not None and st not in prev:
                    prev[st] = (None, ("start", b))
                    queue.append(st)
    goal = None
    while queue:
        st = queue.popleft()
        u, layer, pend = st
        if pend is not None:
            i = layer
            if i == w - 1:
                goal = (st, pend)
                break
            path = h_paths[i]
            ia = h_index[i][pend]
            for ib in sorted(range(len(path)), key=lambda t: (abs(t - ia), t)):
                t = abs(ib - ia) + 1
                lo, hi = min(ia, ib), max(ia, ib)
                if t == 2 or not in_block(path[ib], i):
                    continue
                if not all(col[0] <= v[0] <= col[1] for v in path[lo:hi + 1]):
                    continue
                b = path[ib]
                for u2 in sorted(g.neighbors(b), key=_key):
                    if u2 not in free or u2 == u:
                        continue
                    nxt = classify(u2, i + 1, b)
                    if nxt is not None and nxt not in prev:
                        prev[nxt] = (st, ("cross", i, lo, hi))
                        queue.append(nxt)
            continue
        for u2 in sorted(g.neighbors(u), key=_key):
            if u2 in free:
                nxt = classify(u2, layer)
                if nxt is not None and nxt not in prev:
                    prev[nxt] = (st, ("step",))
                    queue.append(nxt)
    if goal is None:
        return None
    st, a_last = goal
    segs = {w - 1: (h_index[w - 1][a_last],) * 2}
    runs: list[list] = [[] for _ in range(w - 1)]
    while st is not None:
        u, layer, _ = st
        runs[layer - 1].append(u)
        parent, how = prev[st]
        if how[0] == "cross":
            segs[how[1]] = (how[2], how[3])
        elif how[0] == "start":
            segs[0] = (h_index[0][how[1]],) * 2
        st = parent
    return [r[::-1] for r in runs], segs


def _closed_nbhd(g, vs) -> set:
    out = set(vs)
    for v in vs:
        out.update(g.neighbors(v))
    return out


def find_network(g: GraphLikeState, w: int, block: int | None = None,
                 max_retries: int = 50) -> Network:
    """Locate a w x w grid of chord-free paths, crossing (i, j) inside block (i, j).

    A w x w array of blocks is slid over the lattice, centre first.  For w = 2
    the network is one induced ring around a central hole; larger grids use
    horizontal paths through the blocks of each row and vertical paths that
    meet every horizontal path once, in a contiguous segment inside the
    matching block.  No edge joins two network vertices except along the paths.
    """
    if w < 2:
        raise QuditError("the target grid needs w >= 2")
    live = {v for v in g.vertices if g.degree(v) > 0}
    if not live:
        raise QuditError(SUBCRITICAL)
    places = _placements(g, w, block)
    if w == 2:
        for frac in HOLE_TRIES:
            for rows, cols in places:
                net = _ring_network(g, live, rows, cols, frac)
                if net is not None:
                    return net
        raise QuditError(SUBCRITICAL)
    for rows, cols in places:
        for reach in REACH_TRIES:
            for penalty in PENALTY_TRIES:
                try:
                    return _network_attempt(g, live, rows, cols, reach, penalty, max_retries)
                except QuditError:
                    pass
    raise QuditError(SUBCRITICAL)


def _crosses_ray(a, b, cx: float, cy: float) -> bool:
    """Does edge a-b cross the ray from (cx, cy) towards +x?"""
    (x1, y1), (x2, y2) = a, b
    if (y1 > cy) == (y2 > cy):
        return False
    x = x1 + (cy - y1) * (x2 - x1) / (y2 - y1)
    return x > cx


def _odd_cycle(g, allowed: set, cx: float, cy: float):
    """Shortest cycle in ``allowed`` winding an odd number of times around (cx, cy).

    Splitting a closed walk at a repeated vertex or along a chord gives two
    shorter closed walks, one of them still odd, so the shortest one is an
    induced cycle.
    """
    starts = sorted({v for v in allowed for x in g.neighbors(v)
                     if x in allowed and _crosses_ray(v, x, cx, cy)}, key=_key)
    best = None
    for s in starts:
        prev = {(s, 0): None}
        queue = deque([(s, 0)])
        while queue:
            st = queue.popleft()
            if best is not None and len(_unwind(prev, st)) >= len(best):
                break
            u, par = st
            for x in sorted(g.neighbors(u), key=_key):
                if x not in allowed:
                    continue
                nxt = (x, par ^ _crosses_ray(u, x, cx, cy))
                if nxt in prev:
                    continue
                prev[nxt] = st
                if nxt == (s, 1):
                    cyc = _unwind(prev, st)
                    if best is None or len(cyc) < len(best):
                        best = cyc
                    queue.clear()
                    break
                queue.append(nxt)
    return best


def _unwind(prev: dict, st) -> list:
    out = []
    while st is not None:
        out.append(st[0])
        st = prev[st]
    return out[::-1]


def _ring_network(g, live: set, rows, cols, frac: float) -> Network | None:
    """2 x 2 network from an induced cycle around a central hole.

    The hole spans ``frac`` of a block on each side of the array centre,
    which keeps the ring away from the single faces there.  Crossing (i, j) is the ring vertex in
    block (i, j) nearest the block centre.
    """
    # half-integer centre, so no vertex sits on the ray
    cx = (cols[0][1] + cols[1][0]) / 2
    cy = (rows[0][1] + rows[1][0]) / 2
    hx = frac * (cols[0][1] - cols[0][0] + 1)
    hy = frac * (rows[0][1] - rows[0][0] + 1)
    allowed = {v for v in live if abs(v[0] - cx) > hx or abs(v[1] - cy) > hy}
    cyc = _odd_cycle(g, allowed, cx, cy)
    if cyc is None:
        return None
    n = len(cyc)
    pos = {}
    for (i, j) in ((0, 0), (0, 1), (1, 1), (1, 0)):
        mid = ((cols[j][0] + cols[j][1]) / 2, (rows[i][0] + rows[i][1]) / 2)
        cand = [t for t, v in enumerate(cyc) if _inside(v, cols[j], rows[i])]
        if not cand:
            return None
        pos[(i, j)] = min(cand, key=lambda t: ((cyc[t][0] - mid[0]) ** 2
                                               + (cyc[t][1] - mid[1]) ** 2, t))
    # walk the ring from crossing (0, 0) in the direction that meets (0, 1) first
    order = [pos[k] for k in ((0, 0), (0, 1), (1, 1), (1, 0))]
    for step in (1, -1):
        rel = [((t - order[0]) * step) % n for t in order]
        if rel == sorted(rel):
            break
    else:
        return None
    ring = [cyc[(order[0] + step * t) % n] for t in range(n)]
    a, b, c, e = (((t - order[0]) * step) % n for t in order)
    h0, h1 = ring[a:b + 1], ring[c:e + 1][::-1]
    runs0, runs1 = [ring[e + 1:][::-1]], [ring[b + 1:c]]
    if not runs0[0] or not runs1[0]:
        return None
    segments = {(0, 0): (0, 0), (0, 1): (len(h0) - 1,) * 2,
                (1, 0): (0, 0), (1, 1): (len(h1) - 1,) * 2}
    net = Network([h0, h1], [runs0, runs1], segments)
    return net if _chord_free(g, net) else None


def _network_attempt(g, live, rows, cols, reach, penalty, max_retries) -> Network:
    w = len(rows)
    h_paths = [None] * w
    allowed = set(live)
    # outer rows first, hugging the lattice edge, so the middle stays open
    for i in sorted(range(w), key=lambda i: (min(i, w - 1 - i), i)):
        lean = -1 if i == 0 else 1 if i == w - 1 else 0
        p = _h_path(g, allowed, rows[i], cols, reach, penalty, lean)
        if p is None:
            raise QuditError(SUBCRITICAL)
        h_paths[i] = p
        allowed -= _closed_nbhd(g, p)
    h_index = [{v: t for t, v in enumerate(p)} for p in h_paths]
    net_h = {v for p in h_paths for v in p}
    v_paths, segments = [], {}
    allowed = set(live)
    for j, col in enumerate(cols):
        banned: set = set()
        for _ in range(max_retries):
            found = _v_path(g, allowed - banned, col, rows, h_paths, h_index)
            if found is None:
                raise QuditError(SUBCRITICAL)
            runs, segs = found
            bad = _run_defects(g, runs, net_h)
            if not bad:
                break
            banned |= bad
        else:
            raise QuditError(SUBCRITICAL)
        v_paths.append(runs)
        for i, sg in segs.items():
            segments[(i, j)] = sg
        allowed -= _closed_nbhd(g, [v for run in runs for v in run])
    for i in range(w):
        ivs = [segments[(i, j)] for j in range(w)]
        if any(ivs[j][1] >= ivs[j + 1][0] for j in range(w - 1)):
            raise QuditError(SUBCRITICAL)
    net = Network(h_paths, v_paths, segments)
    if not _chord_free(g, net):
        raise QuditError(SUBCRITICAL)
    return net


def _run_defects(g, runs, net_h) -> set:
    """Free vertices that sit next to another free vertex of the path off the run order."""
    order = {}
    for r, run in enumerate(runs):
        for t, v in enumerate(run):
            if v in order:
                return {v}
            order[v] = (r, t)
    bad = set()
    for v, (r, t) in order.items():
        for x in g.neighbors(v):
            if x in order and x != v:
                r2, t2 = order[x]
                if not (r2 == r and abs(t2 - t) == 1):
                    bad.add(max(v, x))
    return bad


def _designed_edges(net: Network) -> set:
    w = len(net.h_paths)
    edges = set()
    add = lambda a, b: edges.add(frozenset((a, b)))
    for i, p in enumerate(net.h_paths):
        lo, hi = net.segments[(i, 0)][0], net.segments[(i, w - 1)][1]
        for t in range(lo, hi):
            add(p[t], p[t + 1])
    for j, runs in enumerate(net.v_paths):
        for i, run in enumerate(runs):
            for t in range(len(run) - 1):
                add(run[t], run[t + 1])
            lo, hi = net.segments[(i, j)]
            lo2, hi2 = net.segments[(i + 1, j)]
            below = [net.h_paths[i][lo], net.h_paths[i][hi]]
            above = [net.h_paths[i + 1][lo2], net.h_paths[i + 1][hi2]]
            for a in below:
                add(a, run[0])
            for a in above:
                add(a, run[-1])
    return edges


def _chord_free(g: GraphLikeState, net: Network) -> bool:
    vs = net.vertices()
    designed = _designed_edges(net)
    for a, b, _ in g.edges():
        if a in vs and b in vs and frozenset((a, b)) not in designed:
            return False
    # the designed end-attachments must be real edges, one per run end
    for j, runs in enumerate(net.v_paths):
        for i, run in enumerate(runs):
            for row, end in ((i, run[0]), (i + 1, run[-1])):
                lo, hi = net.segments[(row, j)]
                ends = {net.h_paths[row][lo], net.h_paths[row][hi]}
                if sum(1 for a in ends if g.weight(a, end)) != 1:
                    return False
    return True


# ---------------------------------------------------------------------------
# reduction


@dataclass
class Reduction:
    schedule: list
    graph: GraphLikeState
    crossings: dict  # (i, j) -> vertex of the final grid
    network: Network | None = None
    trace: list | None = field(default=None, repr=False)

    def to_dict(self) -> dict:
        enc = lambda v: list(v) if isinstance(v, tuple) else v
        return {"schema": "quditspt.reduction/1",
                "schedule": [s.to_dict() for s in self.schedule],
                "crossings": [[i, j, enc(v)] for (i, j), v in sorted(self.crossings.items())],
                "final_graph": json.loads(self.graph.to_json()),
                "network": self.network.to_dict() if self.network else None}


def grid_crossings(g: GraphLikeState, w: int) -> dict | None:
    """If g is already a w x w grid (by coordinate rank), map (i, j) to vertices."""
    vs = g.vertices
    if len(vs) != w * w:
        return None
    xs = sorted({v[0] for v in vs})
    ys = sorted({v[1] for v in vs})
    if len(xs) != w or len(ys) != w:
        return None
    cross = {(ys.index(v[1]), xs.index(v[0])): v for v in vs}
    return cross if is_grid(g, cross, w) else None


def is_grid(g: GraphLikeState, crossings: dict, w: int) -> bool:
    """Edges exactly between row/column neighbours of the crossing map, all nonzero."""
    if len(crossings) != w * w or set(crossings.values()) != set(g.vertices):
        return False
    want = set()
    for i in range(w):
        for j in range(w):
            if j + 1 < w:
                want.add(frozenset((crossings[(i, j)], crossings[(i, j + 1)])))
            if i + 1 < w:
                want.add(frozenset((crossings[(i, j)], crossings[(i + 1, j)])))
    have = {frozenset((a, b)) for a, b, wt in g.edges() if wt % g.d}
    return have == want


def reduce_to_cluster(g: GraphLikeState, w: int = 2, block: int | None = None,
                      seed: int | np.random.Generator = 0, trace: bool = False) -> Reduction:
    """Measurement schedule turning g into a w x w cluster-like grid.

    Outcomes are drawn from ``seed`` and the rules are applied symbolically.
    Raises QuditError("subcritical instance") when no suitable network exists.
    """
    g.dim.require_odd("reduction with rule c")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    done = grid_crossings(g, w)
    if done is not None:
        return Reduction([], g.copy(), done, None, [] if trace else None)
    net = find_network(g, w, block)
    rec = Recorder(g, rng, trace)
    keep = net.vertices()
    for v in sorted(g.vertices, key=_key):
        if v not in keep:
            rec.z(v)
    crossings = {}
    for (i, j), (lo, hi) in sorted(net.segments.items()):
        seg = net.h_paths[i][lo:hi + 1]
        crossings[(i, j)] = _merge_segment(rec, seg)
    for v in sorted(rec.g.vertices, key=_key):
        if v not in crossings.values():
            rec.connect(v)
    if not is_grid(rec.g, crossings, w):
        raise QuditError("reduction did not produce a square grid")
    return Reduction(rec.schedule, rec.g, crossings, net, rec.trace)


def _merge_segment(rec: Recorder, seg: list):
    """Collapse a crossing segment s0..s_{t-1} onto s0."""
    if len(seg) == 1:
        return seg[0]
    if len(seg) == 2:
        raise QuditError("two-vertex crossing segments cannot be merged")
    while len(seg) > 3:
        rec.connect(seg[1])
        seg = [seg[0]] + seg[2:]
    rec.x_pair(seg[2], seg[1])
    return seg[0]


def apply_schedule(g: GraphLikeState, schedule) -> GraphLikeState:
    for step in schedule:
        g = step.apply(g)
    return g


def excerpt(g: GraphLikeState, step: Step) -> GraphLikeState:
    """Induced subgraph on the measured vertices and their neighbours, with frames."""
    vs = set(step.vertices)
    for v in step.vertices:
        vs.update(g.neighbors(v))
    sub = GraphLikeState(g.dim, sorted(vs, key=_key))
    for a, b, w in g.edges():
        if a in vs and b in vs:
            sub.set_edge(a, b, w)
    for v in vs:
        sub.frames[v] = g.frames[v]
    return sub


@dataclass
class ExcerptReport:
    checked: int = 0
    skipped: int = 0
    min_fidelity: float = 1.0
    failures: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures


def check_excerpts(g: GraphLikeState, schedule, max_qudits: int = EXCERPT_MAX,
                   tol: float = 1e-9) -> ExcerptReport:
    """Replay the schedule, checking each step on its local excerpt with the oracle."""
    rep = ExcerptReport()
    cap = g.d ** max_qudits
    for n, step in enumerate(schedule):
        sub = excerpt(g, step)
        if len(sub) > max_qudits:
            rep.skipped += 1
        else:
            fid = oracle_step(sub, step, cap=cap)
            rep.checked += 1
            if fid is None or fid < 1 - tol:
                rep.failures.append({"step": n, "fidelity": fid, **step.to_dict()})
            else:
                rep.min_fidelity = min(rep.min_fidelity, fid)
        g = step.apply(g)
    return rep


def verify_final(red: Reduction, cap: int | None = None) -> bool:
    g = red.graph
    return stabilizer_check(g, cap=cap or g.d ** len(g))
