"""Three-coloured triangulated lattices and the Z_d^3 SPT states built on them.

Two geometries are provided:

* triangular: sites ``(x, y)`` on a rhombic patch, colour ``(x - y) mod 3``.
  Up triangles ``(x,y),(x+1,y),(x,y+1)`` carry sign +1, down triangles
  ``(x+1,y),(x,y+1),(x+1,y+1)`` carry sign -1.  ``Lx, Ly`` count sites.
* Union-Jack: ``Lx x Ly`` squares.  Corners sit at even coordinates
  ``(2i, 2j)`` and square centres at ``(2i+1, 2j+1)``.  Each square is cut
  into four triangles (centre plus one side); a triangle's sign is the
  orientation of (a, b, c) in the plane.

Colour "a" is the domain sublattice in both cases.  Removing it leaves a
honeycomb (triangular) or square (Union-Jack) residual lattice whose edges
are each flanked by one or two domain sites.
"""

from __future__ import annotations

import itertools
import json
from fractions import Fraction
from dataclasses import dataclass, field
from typing import Hashable, Mapping

import numpy as np

from .core import DimLike, QuditError, as_dim
from .graphlike import GraphLikeState
from .statevector import DEFAULT_CAP, StateVector, fidelity_up_to_phase, pauli_x

COLORS = ("a", "b", "c")
Site = Hashable


@dataclass(frozen=True)
class Triangle:
    """Vertices ordered by colour (a, b, c) plus the CCZ sign."""

    a: Site
    b: Site
    c: Site
    sign: int
    geom: tuple = field(default=None, compare=False)

    @property
    def sites(self) -> tuple:
        return (self.a, self.b, self.c)


@dataclass
class Lattice:
    kind: str
    boundary: str
    sites: list
    color: dict
    triangles: list
    coords: dict = field(default_factory=dict)
    shape: tuple = ()
    period: tuple = None

    def __post_init__(self):
        self._check()

    # -- invariants -------------------------------------------------------

    def _check(self) -> None:
        for t in self.triangles:
            if (self.color[t.a], self.color[t.b], self.color[t.c]) != COLORS:
                raise QuditError(f"triangle {t.sites} is not properly 3-coloured")
            if t.sign not in (1, -1):
                raise QuditError("triangle signs must be +1 or -1")
        for edge, tris in self.edge_triangles().items():
            if len(tris) > 2:
                raise QuditError(f"edge {edge} lies in more than two triangles")
            if len(tris) == 2 and tris[0].sign == tris[1].sign:
                raise QuditError(f"triangles sharing edge {edge} have equal signs")
            if self.boundary == "periodic" and len(tris) != 2:
                raise QuditError(f"periodic lattice edge {edge} is not in two triangles")

    def edge_triangles(self) -> dict:
        """Triangles per geometric edge.

        On small tori two distinct edges can join the same pair of sites, so
        edges are keyed by their endpoints plus their midpoint in the plane.
        """
        out: dict = {}
        for t in self.triangles:
            pos = t.geom or tuple(self.coords.get(s, (0, 0)) for s in t.sites)
            for (u, pu), (v, pv) in itertools.combinations(zip(t.sites, pos), 2):
                mid = ((pu[0] + pv[0]) / 2, (pu[1] + pv[1]) / 2)
                if self.period:
                    mid = (mid[0] % self.period[0], mid[1] % self.period[1])
                out.setdefault((frozenset((u, v)), mid), []).append(t)
        return out

    # -- views ------------------------------------------------------------

    def sites_of(self, color: str) -> list:
        if color not in COLORS:
            raise QuditError(f"colour must be one of {COLORS}")
        return [s for s in self.sites if self.color[s] == color]

    @property
    def domain(self) -> list:
        return self.sites_of("a")

    @property
    def residual_sites(self) -> list:
        return [s for s in self.sites if self.color[s] != "a"]

    def residual_edges(self) -> dict:
        """Map each b-c edge to its flanking (domain site, sign) pairs."""
        out = {}
        for t in self.triangles:
            key = (t.b, t.c)
            out.setdefault(key, []).append((t.a, t.sign))
        return out

    def neighbors(self, s: Site) -> set:
        nb = set()
        for t in self.triangles:
            if s in t.sites:
                nb.update(t.sites)
        nb.discard(s)
        return nb

    def residual_degree(self, s: Site) -> int:
        return sum(1 for e in self.residual_edges() if s in e)

    def subpatch(self, keep) -> "Lattice":
        """Open patch keeping only triangles whose three sites are all in ``keep``."""
        keep = set(keep)
        tris = [t for t in self.triangles if set(t.sites) <= keep]
        sites = [s for s in self.sites if s in keep]
        return Lattice(self.kind, "open", sites, {s: self.color[s] for s in sites}, tris,
                       {s: self.coords[s] for s in sites if s in self.coords}, (), None)

    # -- serialisation ----------------------------------------------------

    def to_json(self) -> str:
        enc = lambda s: list(s) if isinstance(s, tuple) else s
        return json.dumps({
            "schema": "quditspt.lattice/1",
            "kind": self.kind,
            "boundary": self.boundary,
            "shape": list(self.shape),
            "sites": [[enc(s), self.color[s]] for s in self.sites],
            "period": list(self.period) if self.period else None,
            "triangles": [[enc(t.a), enc(t.b), enc(t.c), t.sign,
                           [list(p) for p in t.geom] if t.geom else None] for t in self.triangles],
            "domain": [enc(s) for s in self.domain],
        })

    @classmethod
    def from_json(cls, text: str) -> "Lattice":
        data = json.loads(text)
        dec = lambda s: tuple(s) if isinstance(s, list) else s
        sites = [dec(s) for s, _ in data["sites"]]
        color = {dec(s): c for s, c in data["sites"]}
        tris = [Triangle(dec(a), dec(b), dec(c), sg, tuple(map(tuple, gm)) if gm else None)
                for a, b, c, sg, gm in data["triangles"]]
        period = tuple(data["period"]) if data["period"] else None
        return cls(data["kind"], data["boundary"], sites, color, tris, {s: s for s in sites},
                   tuple(data["shape"]), period)


def _ordered(points, color, sign, wrap) -> Triangle:
    by = {color[wrap(*p)]: p for p in points}
    pts = (by["a"], by["b"], by["c"])
    return Triangle(*(wrap(*p) for p in pts), sign, pts)


def triangular(Lx: int, Ly: int, boundary: str = "open") -> Lattice:
    if Lx < 2 or Ly < 2:
        raise QuditError("triangular lattice needs Lx, Ly >= 2")
    periodic = boundary == "periodic"
    if periodic and (Lx % 3 or Ly % 3):
        raise QuditError("periodic triangular lattice needs Lx, Ly divisible by 3 to stay 3-colourable")
    sites = [(x, y) for y in range(Ly) for x in range(Lx)]
    color = {s: COLORS[(s[0] - s[1]) % 3] for s in sites}
    wrap = (lambda x, y: (x % Lx, y % Ly)) if periodic else (lambda x, y: (x, y))
    xr = range(Lx) if periodic else range(Lx - 1)
    yr = range(Ly) if periodic else range(Ly - 1)
    tris = []
    for y in yr:
        for x in xr:
            up = [(x, y), (x + 1, y), (x, y + 1)]
            down = [(x + 1, y), (x, y + 1), (x + 1, y + 1)]
            tris.append(_ordered(up, color, +1, wrap))
            tris.append(_ordered(down, color, -1, wrap))
    return Lattice("triangular", boundary, sites, color, tris, {s: s for s in sites}, (Lx, Ly),
                   (Lx, Ly) if periodic else None)


def _orientation(p, q, r) -> int:
    cross = (q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0])
    return 1 if cross > 0 else -1


def union_jack(Lx: int, Ly: int, boundary: str = "open") -> Lattice:
    if Lx < 1 or Ly < 1:
        raise QuditError("Union-Jack lattice needs at least one square")
    periodic = boundary == "periodic"
    if periodic and (Lx % 2 or Ly % 2 or Lx < 2 or Ly < 2):
        raise QuditError("periodic Union-Jack lattice needs even Lx, Ly >= 2")
    W, H = 2 * Lx, 2 * Ly
    wrap = (lambda p: (p[0] % W, p[1] % H)) if periodic else (lambda p: p)
    cx = range(0, W, 2) if periodic else range(0, W + 1, 2)
    cy = range(0, H, 2) if periodic else range(0, H + 1, 2)
    corners = [(x, y) for y in cy for x in cx]
    centres = [(2 * i + 1, 2 * j + 1) for j in range(Ly) for i in range(Lx)]
    color = {s: ("b" if (s[0] // 2 + s[1] // 2) % 2 == 0 else "c") for s in corners}
    color.update({s: "a" for s in centres})
    tris = []
    for (ax, ay) in centres:
        ring = [(ax - 1, ay - 1), (ax + 1, ay - 1), (ax + 1, ay + 1), (ax - 1, ay + 1)]
        for p, q in zip(ring, ring[1:] + ring[:1]):
            # orientation from unwrapped geometry, then wrap site names
            by = {color[wrap(p)]: p, color[wrap(q)]: q}
            sign = _orientation((ax, ay), by["b"], by["c"])
            tris.append(Triangle((ax, ay), wrap(by["b"]), wrap(by["c"]), sign,
                                 ((ax, ay), by["b"], by["c"])))
    sites = corners + centres
    return Lattice("unionjack", boundary, sites, color, tris, {s: s for s in sites}, (Lx, Ly),
                   (W, H) if periodic else None)


def build_lattice(kind: str, Lx: int, Ly: int, boundary: str = "open") -> Lattice:
    kind = kind.lower().replace("-", "").replace("_", "")
    if boundary not in ("open", "periodic"):
        raise QuditError("boundary must be 'open' or 'periodic'")
    if kind == "triangular":
        return triangular(Lx, Ly, boundary)
    if kind == "unionjack":
        return union_jack(Lx, Ly, boundary)
    raise QuditError(f"unknown lattice kind {kind!r}")


# ---------------------------------------------------------------------------
# named patches used by the oracle checks


def two_plaquette_patch() -> Lattice:
    """One b-c edge flanked by an up and a down triangle (4 sites)."""
    return triangular(2, 2)


def junction_patch() -> Lattice:
    """A b site with its six neighbours: three residual edges meeting at b."""
    lat = triangular(5, 5)
    centre = next(s for s in [(2, 2), (2, 1), (1, 2), (3, 2)] if lat.color[s] == "b")
    return lat.subpatch({centre} | lat.neighbors(centre))


def face_patch(n_faces: int = 1) -> Lattice:
    """Honeycomb faces for the domain-wall check: a-sites with their full rings.

    One face is 7 qudits; two adjacent faces share a b-c edge and total 12.
    """
    lat = triangular(7, 7)
    faces = [s for s in [(3, 3), (4, 4)] if lat.color[s] == "a"]
    if n_faces not in (1, 2) or len(faces) < n_faces:
        raise QuditError("face_patch supports one or two faces")
    keep = set()
    for f in faces[:n_faces]:
        keep |= {f} | lat.neighbors(f)
    return lat.subpatch(keep)


# ---------------------------------------------------------------------------
# SPT states


def build_spt_state(lat: Lattice, k: int, d: DimLike, cap: int = DEFAULT_CAP) -> StateVector:
    """prod_up CCZ^k prod_down CCZ^-k |+...+> on the lattice sites."""
    dim = as_dim(d)
    if k % dim.d == 0:
        raise QuditError("k must be nonzero mod d (k = 0 is the trivial phase)")
    s = StateVector.plus(dim, lat.sites, cap=cap)
    for t in lat.triangles:
        s = s.apply_ccz_pow(t.sign * k, t.a, t.b, t.c)
    return s


def apply_color_x(state: StateVector, lat: Lattice, color: str, m: int, sites=None) -> StateVector:
    targets = lat.sites_of(color) if sites is None else list(sites)
    op = pauli_x(state.d, m)
    for s in targets:
        state = state.apply(op, s)
    return state


def verify_symmetry(state: StateVector, lat: Lattice, color: str, m: int) -> float:
    """Fidelity between X^m on every site of ``color`` and the original state."""
    if lat.boundary != "periodic":
        raise QuditError("symmetry check needs a periodic lattice; open edges break the up/down pairing")
    return fidelity_up_to_phase(apply_color_x(state, lat, color, m), state)


def residual_graph(lat: Lattice, outcomes: Mapping, k: int, d: DimLike) -> GraphLikeState:
    """Graph-like state predicted after measuring the domain sites."""
    dim = as_dim(d)
    missing = [s for s in lat.domain if s not in outcomes]
    if missing:
        raise QuditError(f"outcome map incomplete, missing {missing[:3]}")
    g = GraphLikeState(dim, lat.residual_sites)
    for (b, c), flank in lat.residual_edges().items():
        w = k * sum(sign * int(outcomes[a]) for a, sign in flank)
        g.add_to_edge(b, c, w)
    return g


def measure_domain_sublattice(state: StateVector, lat: Lattice, k: int, outcomes=None, rng=None):
    """Measure every domain site in the computational basis.

    Outcomes are forced when ``outcomes`` is given, else sampled from ``rng``.
    Returns (predicted graph, residual state vector, outcomes used).
    """
    used = {}
    s = state
    for a in lat.domain:
        forced = None if outcomes is None else outcomes.get(a)
        if outcomes is not None and forced is None:
            raise QuditError(f"outcome map incomplete, missing {a!r}")
        res = s.measure(a, outcome=forced, rng=rng, discard=True)
        used[a] = res.outcome
        s = res.state
    return residual_graph(lat, used, k, state.d), s, used


def junction_statistics(d: int) -> dict:
    """Exact fractions of 0/2/3 occupied edges at a honeycomb junction.

    Enumerates all d^3 outcome triples of the three flanking domain sites.
    """
    counts = {0: 0, 1: 0, 2: 0, 3: 0}
    occupied = 0
    for m in itertools.product(range(d), repeat=3):
        n = sum((m[i] - m[(i + 1) % 3]) % d != 0 for i in range(3))
        counts[n] += 1
        occupied += n
    total = d**3
    return {
        "fractions": {n: Fraction(c, total) for n, c in counts.items()},
        "edge_occupation": Fraction(occupied, 3 * total),
    }


# ---------------------------------------------------------------------------
# decorated domain walls


def ddw_orientation(lat: Lattice) -> dict:
    """Wall orientations theta[(face, domain, wall)] in {+1, -1}.

    Around each face the ring alternates 1D domains (b) and walls (c).  The
    arrow convention runs clockwise around every face: the wall reached by
    stepping counter-clockwise from a domain gets +1, the other -1.
    """
    theta = {}
    for f in lat.domain:
        ring = _ring(lat, f)
        if len(ring) != 6:
            raise QuditError(f"face {f!r} does not have a complete hexagonal ring in this patch")
        for i, v in enumerate(ring):
            if lat.color[v] != "b":
                continue
            theta[(f, v, ring[(i + 1) % 6])] = +1
            theta[(f, v, ring[(i - 1) % 6])] = -1
    return theta


def _ring(lat: Lattice, f: Site) -> list:
    """Neighbours of face f sorted counter-clockwise by angle."""
    fx, fy = _xy(lat, f)
    nb = [s for s in lat.neighbors(f)]

    def angle(s):
        x, y = _xy(lat, s)
        return np.arctan2(y - fy, x - fx)

    return sorted(nb, key=angle)


def _xy(lat: Lattice, s: Site) -> tuple:
    """Planar embedding used for angles (sheared triangular coordinates)."""
    x, y = lat.coords.get(s, s)
    if lat.kind == "triangular":
        return (x + 0.5 * y, y * np.sqrt(3) / 2)
    return (x, y)


def build_ddw_phases(lat: Lattice, k: int, d: DimLike, theta=None) -> np.ndarray:
    """Phase exponents of U^k built face by face from controlled W operators.

    For face f in state alpha_f, each 1D domain b on its boundary with walls
    l and r contributes w^{k alpha_f j_b (theta_l j_l + theta_r j_r)}.
    Returns an integer tensor over ``lat.sites`` (site order as listed).
    """
    d = int(as_dim(d))
    theta = ddw_orientation(lat) if theta is None else theta
    _check_theta(lat, theta)
    idx = {s: i for i, s in enumerate(lat.sites)}
    n = len(lat.sites)
    grids = np.indices((d,) * n, dtype=np.int64)
    expo = np.zeros((d,) * n, dtype=np.int64)
    for (f, b, c), th in theta.items():
        expo += k * th * grids[idx[f]] * grids[idx[b]] * grids[idx[c]]
    return expo % d


def _check_theta(lat: Lattice, theta) -> None:
    per_domain: dict = {}
    for (f, b, c), th in theta.items():
        if th not in (1, -1):
            raise QuditError("orientation values must be +1 or -1")
        per_domain.setdefault((f, b), []).append(th)
    for key, vals in per_domain.items():
        if len(vals) == 2 and vals[0] == vals[1]:
            raise QuditError(f"inconsistent orientation: both walls of domain {key[1]!r} in face {key[0]!r} agree")


def ccz_phases(lat: Lattice, k: int, d: DimLike) -> np.ndarray:
    d = int(as_dim(d))
    idx = {s: i for i, s in enumerate(lat.sites)}
    n = len(lat.sites)
    grids = np.indices((d,) * n, dtype=np.int64)
    expo = np.zeros((d,) * n, dtype=np.int64)
    for t in lat.triangles:
        expo += k * t.sign * grids[idx[t.a]] * grids[idx[t.b]] * grids[idx[t.c]]
    return expo % d


def build_ddw_operator(lat: Lattice, k: int, d: DimLike, theta=None) -> np.ndarray:
    """Diagonal of U^k (as complex phases) from the domain-wall construction."""
    d = int(as_dim(d))
    return np.exp(2j * np.pi * build_ddw_phases(lat, k, d, theta) / d)


def ddw_equivalence(lat: Lattice, k: int, d: DimLike, theta=None) -> float:
    """Fidelity between U^k|+..+> (domain-wall form) and the signed CCZ product."""
    d = int(as_dim(d))
    n = len(lat.sites)
    amp = d ** (-n / 2)
    lhs = StateVector(as_dim(d), build_ddw_operator(lat, k, d, theta) * amp, tuple(lat.sites),
                      cap=d**n)
    rhs = StateVector(as_dim(d), np.exp(2j * np.pi * ccz_phases(lat, k, d) / d) * amp,
                      tuple(lat.sites), cap=d**n)
    return fidelity_up_to_phase(lhs, rhs)
