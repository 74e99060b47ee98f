"""Monte Carlo percolation of the residual lattice after domain measurement.

Each plaquette (domain site) gets a uniform outcome in Z_d; an edge is
occupied iff its two flanking plaquettes disagree.  Spanning means one
cluster joins the left and right boundaries and one (possibly other) cluster
joins the top and bottom boundaries.

Geometry conventions (open boundaries throughout):

* honeycomb: a brick wall of L x L hexagons.  Hexagon (r, c) has corner
  column x0 = 2c + (r mod 2) and vertices (x0..x0+2, r), (x0..x0+2, r+1).
  Left boundary: the x0 vertices of column-0 hexagons; right: the x0+2
  vertices of column L-1; bottom: y = 0; top: y = L.
* square: (L+1) x (L+1) corners of L x L squares; boundaries are the
  extreme rows and columns.

Outcomes are drawn on a padded (L+2) x (L+2) plaquette grid so that every
edge, including boundary ones, has two flanking plaquettes.
"""

from __future__ import annotations

import math
import os
import time
from dataclasses import dataclass, field
from functools import lru_cache

import numba
import numpy as np
from numba import njit, prange

from .core import QuditError, as_dim

# skip numba's probe of an outdated TBB; OpenMP is always available here
numba.config.THREADING_LAYER = "omp"

LEFT, RIGHT, BOTTOM, TOP = 1, 2, 4, 8
KINDS = ("honeycomb", "square")
CHUNK = 500


def rng_from_seed(seed: int) -> np.random.Generator:
    """Counter-based generator; the identity is recorded in output metadata."""
    return np.random.Generator(np.random.Philox(int(seed)))


def rng_identity(seed: int) -> dict:
    return {"bit_generator": "Philox-4x64", "numpy": np.__version__, "seed": int(seed)}


def configure_threads() -> int:
    n = os.environ.get("QUDITSPT_THREADS")
    if n:
        numba.set_num_threads(max(1, min(int(n), numba.config.NUMBA_NUM_THREADS)))
    return numba.get_num_threads()


# ---------------------------------------------------------------------------
# geometry


@dataclass(frozen=True)
class Geometry:
    kind: str
    L: int
    vertices: np.ndarray  # (V, 2) integer coordinates
    edges: np.ndarray  # (E, 2) vertex indices
    flank: np.ndarray  # (E, 2) indices of the two flanking plaquettes
    plaquettes: np.ndarray  # (P, 2) padded plaquette coordinates (r, c) or (x, y)
    centers: np.ndarray  # (P, 2) float plaquette centres
    bmask: np.ndarray  # (V,) boundary flags

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @property
    def n_plaquettes(self) -> int:
        return len(self.plaquettes)

    def vertex_index(self) -> dict:
        return {tuple(v): i for i, v in enumerate(self.vertices.tolist())}

    def edge_signs(self) -> np.ndarray:
        """Sign of each flanking triangle (plaquette, b, c) in the plane.

        Vertices are 2-coloured b/c by coordinate parity; the two flanking
        plaquettes of an edge always get opposite signs.
        """
        out = np.zeros(self.flank.shape, dtype=np.int64)
        for e, (u, v) in enumerate(self.edges):
            pu, pv = self.vertices[u], self.vertices[v]
            if (pu[0] + pu[1]) % 2:  # order as (b, c) with b the even-parity end
                pu, pv = pv, pu
            for side in range(2):
                cx, cy = self.centers[self.flank[e, side]]
                cross = (pu[0] - cx) * (pv[1] - cy) - (pu[1] - cy) * (pv[0] - cx)
                out[e, side] = 1 if cross > 0 else -1
        return out


def _hex_edges(r: int, c: int) -> tuple[list, tuple]:
    x0 = 2 * c + (r % 2)
    bottom = [((x0, r), (x0 + 1, r)), ((x0 + 1, r), (x0 + 2, r))]
    top = [((x0, r + 1), (x0 + 1, r + 1)), ((x0 + 1, r + 1), (x0 + 2, r + 1))]
    vert = [((x0, r), (x0, r + 1)), ((x0 + 2, r), (x0 + 2, r + 1))]
    return bottom + top + vert, (x0 + 1.0, r + 0.5)


def _square_edges(x: int, y: int) -> tuple[list, tuple]:
    es = [((x, y), (x + 1, y)), ((x, y + 1), (x + 1, y + 1)),
          ((x, y), (x, y + 1)), ((x + 1, y), (x + 1, y + 1))]
    return es, (x + 0.5, y + 0.5)


@lru_cache(maxsize=64)
def build_geometry(kind: str, L: int) -> Geometry:
    if kind not in KINDS:
        raise QuditError(f"kind must be one of {KINDS}")
    if L < 2:
        raise QuditError("L must be at least 2")
    cell = _hex_edges if kind == "honeycomb" else _square_edges
    plaqs, centers, owner = [], [], {}
    real_edges = set()
    for a in range(-1, L + 1):
        for b in range(-1, L + 1):
            # honeycomb cells are (row, col); square cells are (x, y)
            es, ctr = cell(a, b) if kind == "honeycomb" else cell(b, a)
            pid = len(plaqs)
            plaqs.append((a, b) if kind == "honeycomb" else (b, a))
            centers.append(ctr)
            real = 0 <= a < L and 0 <= b < L
            for e in es:
                key = tuple(sorted(e))
                owner.setdefault(key, []).append(pid)
                if real:
                    real_edges.add(key)
    edges = sorted(real_edges, key=lambda e: (e[0][1], e[0][0], e[1][1], e[1][0]))
    verts = sorted({v for e in edges for v in e}, key=lambda v: (v[1], v[0]))
    vidx = {v: i for i, v in enumerate(verts)}
    flank = np.array([owner[e] for e in edges], dtype=np.int64)
    if flank.shape[1:] != (2,):
        raise AssertionError("every edge must have two flanking plaquettes")
    bmask = np.zeros(len(verts), dtype=np.uint8)
    if kind == "honeycomb":
        for c_side, flag, dx in ((0, LEFT, 0), (L - 1, RIGHT, 2)):
            for r in range(L):
                x = 2 * c_side + (r % 2) + dx
                for y in (r, r + 1):
                    bmask[vidx[(x, y)]] |= flag
    else:
        for v, i in vidx.items():
            bmask[i] |= LEFT if v[0] == 0 else 0
            bmask[i] |= RIGHT if v[0] == L else 0
    for v, i in vidx.items():
        bmask[i] |= BOTTOM if v[1] == 0 else 0
        bmask[i] |= TOP if v[1] == L else 0
    return Geometry(
        kind, L,
        np.array(verts, dtype=np.int64),
        np.array([(vidx[u], vidx[v]) for u, v in edges], dtype=np.int64),
        flank,
        np.array(plaqs, dtype=np.int64),
        np.array(centers, dtype=float),
        bmask,
    )


# ---------------------------------------------------------------------------
# union-find (array based, shared by the Python wrapper and the kernels)


@njit(cache=True)
def uf_find(parent, x):
    root = x
    while parent[root] != root:
        root = parent[root]
    while parent[x] != root:
        nxt = parent[x]
        parent[x] = root
        x = nxt
    return root


@njit(cache=True)
def uf_union(parent, rank, a, b):
    ra = uf_find(parent, a)
    rb = uf_find(parent, b)
    if ra == rb:
        return False
    if rank[ra] < rank[rb]:
        ra, rb = rb, ra
    parent[rb] = ra
    if rank[ra] == rank[rb]:
        rank[ra] += 1
    return True


class UnionFind:
    """Disjoint sets with union by rank and path compression."""

    def __init__(self, n: int):
        self.parent = np.arange(n, dtype=np.int64)
        self.rank = np.zeros(n, dtype=np.int64)
        self.merges = 0

    def find(self, x: int) -> int:
        return int(uf_find(self.parent, x))

    def union(self, a: int, b: int) -> bool:
        merged = bool(uf_union(self.parent, self.rank, a, b))
        self.merges += merged
        return merged

    def n_clusters(self) -> int:
        return len({self.find(i) for i in range(len(self.parent))})


@njit(cache=True)
def _spans_mask(n_vert, edges, occupied, bmask):
    parent = np.arange(n_vert)
    rank = np.zeros(n_vert, dtype=np.int64)
    for e in range(edges.shape[0]):
        if occupied[e]:
            uf_union(parent, rank, edges[e, 0], edges[e, 1])
    flags = np.zeros(n_vert, dtype=np.uint8)
    for v in range(n_vert):
        if bmask[v]:
            r = uf_find(parent, v)
            flags[r] |= bmask[v]
    lr = False
    tb = False
    for v in range(n_vert):
        f = flags[v]
        if (f & 3) == 3:
            lr = True
        if (f & 12) == 12:
            tb = True
    return lr and tb


@njit(cache=True, parallel=True)
def _count_spanning(n_vert, edges, flank, bmask, outcomes, uniforms, p_grid):
    """Spanning counts per deletion probability.

    outcomes: (T, P) plaquette outcomes.  uniforms: (T, E) or (T, 0); an
    occupied edge is deleted when its uniform falls below p.
    """
    T = outcomes.shape[0]
    E = edges.shape[0]
    n_p = p_grid.shape[0]
    hits = np.zeros((T, n_p), dtype=np.int64)
    for t in prange(T):
        occ = np.empty(E, dtype=np.bool_)
        for e in range(E):
            occ[e] = outcomes[t, flank[e, 0]] != outcomes[t, flank[e, 1]]
        for j in range(n_p):
            if uniforms.shape[1] == 0:
                mask = occ
            else:
                mask = np.empty(E, dtype=np.bool_)
                for e in range(E):
                    mask[e] = occ[e] and uniforms[t, e] >= p_grid[j]
            hits[t, j] = 1 if _spans_mask(n_vert, edges, mask, bmask) else 0
    return hits.sum(axis=0)


# ---------------------------------------------------------------------------
# configurations


@dataclass
class EdgeConfig:
    geometry: Geometry
    outcomes: np.ndarray
    occupied: np.ndarray
    d: int

    @property
    def n_occupied(self) -> int:
        return int(self.occupied.sum())


def config_from_outcomes(geom: Geometry, outcomes: np.ndarray, d: int) -> EdgeConfig:
    outcomes = np.asarray(outcomes, dtype=np.int64) % d
    if outcomes.shape != (geom.n_plaquettes,):
        raise QuditError("one outcome per padded plaquette is required")
    occ = outcomes[geom.flank[:, 0]] != outcomes[geom.flank[:, 1]]
    return EdgeConfig(geom, outcomes, occ, d)


def sample_config(d: int, L: int, kind: str, rng) -> EdgeConfig:
    dim = as_dim(d)
    geom = build_geometry(kind, L)
    gen = rng if isinstance(rng, np.random.Generator) else rng_from_seed(rng)
    return config_from_outcomes(geom, gen.integers(0, dim.d, geom.n_plaquettes), dim.d)


def spans(config: EdgeConfig, occupied: np.ndarray | None = None) -> bool:
    g = config.geometry
    occ = config.occupied if occupied is None else np.asarray(occupied, dtype=bool)
    return bool(_spans_mask(g.n_vertices, g.edges, occ, g.bmask))


def cluster_labels(config: EdgeConfig) -> tuple[np.ndarray, UnionFind]:
    g = config.geometry
    uf = UnionFind(g.n_vertices)
    for e in np.flatnonzero(config.occupied):
        uf.union(*g.edges[e])
    return np.array([uf.find(i) for i in range(g.n_vertices)]), uf


def config_to_graph(config: EdgeConfig, k: int = 1):
    """Weighted graph-like state of the occupied edges, weight k * sum(sign * m)."""
    from .graphlike import GraphLikeState

    geom = config.geometry
    signs = geom.edge_signs()
    verts = [tuple(v) for v in geom.vertices.tolist()]
    g = GraphLikeState(config.d, verts)
    for e in np.flatnonzero(config.occupied):
        u, v = geom.edges[e]
        w = k * int(signs[e, 0] * config.outcomes[geom.flank[e, 0]]
                    + signs[e, 1] * config.outcomes[geom.flank[e, 1]])
        g.set_edge(verts[u], verts[v], w)
    return g


# ---------------------------------------------------------------------------
# experiments


@dataclass(frozen=True)
class TrialPlan:
    d: int
    L: int
    kind: str = "honeycomb"
    trials: int = 10000
    seed: int = 0
    delete_p: float = 0.0

    def __post_init__(self):
        as_dim(self.d)
        if self.trials < 1:
            raise QuditError("trials must be >= 1")
        if not 0.0 <= self.delete_p <= 1.0:
            raise QuditError("delete_p must lie in [0, 1]")
        if self.kind not in KINDS:
            raise QuditError(f"kind must be one of {KINDS}")


@dataclass
class Estimate:
    prob: float
    stderr: float
    trials: int
    meta: dict = field(default_factory=dict)


def _stderr(p: float, n: int) -> float:
    return math.sqrt(max(p * (1 - p), 0.0) / n)


def percolation_probability(plan: TrialPlan) -> Estimate:
    configure_threads()
    geom = build_geometry(plan.kind, plan.L)
    gen = rng_from_seed(plan.seed)
    p_grid = np.array([plan.delete_p])
    t0 = time.perf_counter()
    hits = 0
    done = 0
    while done < plan.trials:
        n = min(CHUNK, plan.trials - done)
        outcomes = gen.integers(0, plan.d, (n, geom.n_plaquettes), dtype=np.int8)
        if plan.delete_p > 0:
            uniforms = gen.random((n, geom.n_edges), dtype=np.float32)
        else:
            uniforms = np.zeros((n, 0), dtype=np.float32)
        hits += int(_count_spanning(geom.n_vertices, geom.edges, geom.flank, geom.bmask,
                                    outcomes, uniforms, p_grid)[0])
        done += n
    prob = hits / plan.trials
    meta = {"rng": rng_identity(plan.seed), "wall_time_s": time.perf_counter() - t0,
            "geometry": geometry_note(plan.kind)}
    return Estimate(prob, _stderr(prob, plan.trials), plan.trials, meta)


def stability_curve(d: int, L: int, p_grid, kind: str = "honeycomb", patterns: int = 50,
                    deletions: int = 50, seed: int = 0) -> list[Estimate]:
    """Spanning probability after deleting occupied edges with probability p.

    Each (pattern, deletion) pair draws one uniform per edge and reuses it
    for every p, so curves are monotone per sample (common random numbers).
    Patterns come from the same stream as :func:`percolation_probability`,
    so the p = 0 point equals its estimate with ``trials = patterns``.
    """
    configure_threads()
    as_dim(d)
    p_grid = np.asarray(sorted(float(p) for p in p_grid))
    if len(p_grid) == 0 or p_grid[0] < 0 or p_grid[-1] > 1:
        raise QuditError("deletion probabilities must lie in [0, 1]")
    geom = build_geometry(kind, L)
    gen = rng_from_seed(seed)
    # deletions use a jumped copy of the stream; patterns match percolation_probability
    del_gen = np.random.Generator(np.random.Philox(int(seed)).jumped())
    t0 = time.perf_counter()
    hits = np.zeros(len(p_grid), dtype=np.int64)
    done = 0
    while done < patterns:
        block = gen.integers(0, d, (min(CHUNK, patterns - done), geom.n_plaquettes), dtype=np.int8)
        done += len(block)
        for pattern in block:
            outcomes = np.broadcast_to(pattern, (deletions, geom.n_plaquettes))
            uniforms = del_gen.random((deletions, geom.n_edges), dtype=np.float32)
            hits += _count_spanning(geom.n_vertices, geom.edges, geom.flank, geom.bmask,
                                    np.ascontiguousarray(outcomes), uniforms, p_grid)
    n = patterns * deletions
    wall = time.perf_counter() - t0
    out = []
    for p, h in zip(p_grid, hits):
        prob = h / n
        out.append(Estimate(prob, _stderr(prob, n), n,
                            {"delete_p": float(p), "rng": rng_identity(seed), "wall_time_s": wall,
                             "patterns": patterns, "deletions": deletions}))
    return out


def geometry_note(kind: str) -> str:
    if kind == "honeycomb":
        return "open brick-wall honeycomb, L x L hexagons, padded outcome grid"
    return "open square lattice, L x L squares, padded outcome grid"
