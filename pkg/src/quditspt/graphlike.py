"""Symbolic qudit graph-like states and their measurement rewrite rules.

A graph-like state is ``prod CZ_(ab)^{r_ab} |+>^n`` with weights in Z_d \\ {0},
followed by a local unitary ("frame") on every vertex.  The rules below turn
a single-qudit measurement into a graph edit plus diagonal corrections on the
neighbours; frames absorb those corrections.

Measuring vertex ``v`` "in graph basis B" means measuring the lab qudit in the
basis ``U_v B``, where ``U_v`` is v's frame.  ``lab_basis`` builds that basis so
the rules can be checked against the state-vector oracle.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Hashable, Iterable

import numpy as np

from .core import DimLike, QuditError, as_dim, half_times, mod_inverse
from .statevector import (DEFAULT_CAP, MeasBasis, StateVector, basis_vectors,
                          fidelity_up_to_phase, pauli_x, pauli_z, s_perm)

Vertex = Hashable


@dataclass(frozen=True)
class LocalFrame:
    """The unitary  w^phase . diag(w^{(z+lin) j + quad j^2}) . X^x . S_perm.

    All exponents live in Z_d.  ``z`` collects Pauli-Z byproducts and ``lin``
    the linear part of quadratic corrections; they act identically but are
    kept apart for bookkeeping.
    """

    d: int
    z: int = 0
    x: int = 0
    perm: int = 1
    lin: int = 0
    quad: int = 0
    phase: int = 0

    def __post_init__(self):
        d = self.d
        for name in ("z", "x", "lin", "quad", "phase"):
            object.__setattr__(self, name, int(getattr(self, name)) % d)
        object.__setattr__(self, "perm", int(self.perm) % d)
        if self.perm == 0:
            raise QuditError("frame permutation S_0 is singular")

    @classmethod
    def identity(cls, d: DimLike) -> "LocalFrame":
        return cls(int(d))

    @classmethod
    def diagonal(cls, d: DimLike, z: int = 0, lin: int = 0, quad: int = 0) -> "LocalFrame":
        return cls(int(d), z=z, lin=lin, quad=quad)

    @property
    def is_identity(self) -> bool:
        return (self.z, self.x, self.perm, self.lin, self.quad) == (0, 0, 1, 0, 0)

    def matrix(self, with_phase: bool = True) -> np.ndarray:
        d = self.d
        j = np.arange(d)
        e = ((self.z + self.lin) * j + self.quad * j * j) % d
        if with_phase:
            e = (e + self.phase) % d
        diag = np.diag(np.exp(2j * np.pi * e / d))
        return diag @ pauli_x(d, self.x) @ s_perm(d, self.perm)

    def compose(self, other: "LocalFrame") -> "LocalFrame":
        """self . other (other acts first)."""
        if other.d != self.d:
            raise QuditError("frame dimension mismatch")
        d = self.d
        c1inv = mod_inverse(self.perm, d)
        # move other's diagonal left through S_{c1}
        a2 = (other.z + other.lin) * c1inv
        z2, lin2 = other.z * c1inv, other.lin * c1inv
        b2 = other.quad * c1inv * c1inv
        # then through X^{x1}
        x1 = self.x
        phase = self.phase + other.phase + a2 * x1 + b2 * x1 * x1
        lin2 = lin2 + 2 * b2 * x1
        return LocalFrame(
            d,
            z=self.z + z2,
            lin=self.lin + lin2,
            quad=self.quad + b2,
            x=self.x + self.perm * other.x,
            perm=self.perm * other.perm,
            phase=phase,
        )

    def then(self, correction: "LocalFrame") -> "LocalFrame":
        """Frame after a new correction that acts before the old frame."""
        return self.compose(correction)

    def to_dict(self) -> dict:
        return {"z": self.z, "x": self.x, "perm": self.perm, "lin": self.lin, "quad": self.quad,
                "phase": self.phase}


class GraphLikeState:
    """Weighted graph plus per-vertex frames over Z_d, d prime."""

    def __init__(self, d: DimLike, vertices: Iterable[Vertex] = (), edges=None):
        self.dim = as_dim(d)
        self._adj: dict[Vertex, dict[Vertex, int]] = {}
        self.frames: dict[Vertex, LocalFrame] = {}
        for v in vertices:
            self.add_vertex(v)
        if edges:
            items = edges.items() if isinstance(edges, dict) else edges
            for (a, b), w in items:
                self.set_edge(a, b, w)

    # -- structure --------------------------------------------------------

    @property
    def d(self) -> int:
        return self.dim.d

    @property
    def vertices(self) -> list:
        return list(self._adj)

    def __contains__(self, v) -> bool:
        return v in self._adj

    def __len__(self) -> int:
        return len(self._adj)

    def add_vertex(self, v: Vertex) -> None:
        if v not in self._adj:
            self._adj[v] = {}
            self.frames[v] = LocalFrame.identity(self.d)

    def _require(self, v: Vertex) -> None:
        if v not in self._adj:
            raise QuditError(f"vertex {v!r} not in graph")

    def remove_vertex(self, v: Vertex) -> None:
        self._require(v)
        for u in self._adj.pop(v):
            del self._adj[u][v]
        del self.frames[v]

    def weight(self, a: Vertex, b: Vertex) -> int:
        return self._adj.get(a, {}).get(b, 0)

    def set_edge(self, a: Vertex, b: Vertex, w: int) -> None:
        if a == b:
            raise QuditError("self-loops are not allowed")
        self.add_vertex(a)
        self.add_vertex(b)
        w = int(w) % self.d
        if w == 0:
            self._adj[a].pop(b, None)
            self._adj[b].pop(a, None)
        else:
            self._adj[a][b] = w
            self._adj[b][a] = w

    def add_to_edge(self, a: Vertex, b: Vertex, w: int) -> None:
        self.set_edge(a, b, self.weight(a, b) + int(w))

    def neighbors(self, v: Vertex) -> dict:
        self._require(v)
        return dict(self._adj[v])

    def degree(self, v: Vertex) -> int:
        return len(self._adj[v])

    def edges(self) -> list:
        seen = []
        order = {v: i for i, v in enumerate(self._adj)}
        for a, nb in self._adj.items():
            for b, w in nb.items():
                if order[a] < order[b]:
                    seen.append((a, b, w))
        return seen

    def correct(self, v: Vertex, correction: LocalFrame) -> None:
        self.frames[v] = self.frames[v].then(correction)

    def frame_free(self) -> bool:
        return all(f.is_identity for f in self.frames.values())

    def copy(self) -> "GraphLikeState":
        g = GraphLikeState(self.dim)
        g._adj = {v: dict(nb) for v, nb in self._adj.items()}
        g.frames = dict(self.frames)
        return g

    def bare(self) -> "GraphLikeState":
        g = self.copy()
        g.frames = {v: LocalFrame.identity(self.d) for v in g.frames}
        return g

    def same_as(self, other: "GraphLikeState") -> bool:
        """Symbolic equality of graphs and frames (global phases ignored)."""
        if set(self.vertices) != set(other.vertices):
            return False
        if any(self._adj[v] != other._adj[v] for v in self._adj):
            return False
        strip = lambda f: (f.z, f.x, f.perm, f.lin, f.quad)
        return all(strip(self.frames[v]) == strip(other.frames[v]) for v in self._adj)

    # -- oracle bridge ----------------------------------------------------

    def to_statevector(self, order=None, cap: int = DEFAULT_CAP) -> StateVector:
        labels = list(order) if order is not None else self.vertices
        if set(labels) != set(self.vertices):
            raise QuditError("order must list every vertex")
        s = StateVector.plus(self.dim, labels, cap=cap)
        for a, b, w in self.edges():
            s = s.apply_cz_pow(w, a, b)
        for v in labels:
            f = self.frames[v]
            if not f.is_identity:
                s = s.apply(f.matrix(), v)
        return s

    def lab_basis(self, v: Vertex, graph_basis: MeasBasis) -> MeasBasis:
        f = self.frames[v]
        if f.is_identity:
            return graph_basis
        return MeasBasis.custom(f.matrix() @ basis_vectors(graph_basis, self.dim))

    # -- serialisation ----------------------------------------------------

    def to_json(self) -> str:
        enc = lambda v: list(v) if isinstance(v, tuple) else v
        return json.dumps({
            "schema": "quditspt.graph/1",
            "d": self.d,
            "vertices": [enc(v) for v in self.vertices],
            "edges": [[enc(a), enc(b), w] for a, b, w in self.edges()],
            "frames": [[enc(v), f.to_dict()] for v, f in self.frames.items() if not f.is_identity],
        })

    @classmethod
    def from_json(cls, text: str) -> "GraphLikeState":
        data = json.loads(text)
        dec = lambda v: tuple(v) if isinstance(v, list) else v
        g = cls(data["d"], [dec(v) for v in data["vertices"]])
        for a, b, w in data["edges"]:
            g.set_edge(dec(a), dec(b), w)
        for v, f in data["frames"]:
            g.frames[dec(v)] = LocalFrame(data["d"], **f)
        return g

    def __repr__(self):
        return f"GraphLikeState(d={self.d}, |V|={len(self)}, |E|={len(self.edges())})"


# ---------------------------------------------------------------------------
# stabilizers


def stabilizer_failures(g: GraphLikeState, state: StateVector | None = None,
                        cap: int = DEFAULT_CAP, tol: float = 1e-10) -> list[str]:
    """Vertices whose stabilizer X_a^dag prod Z_b^{r_ab} (or its adjoint) fails.

    Frames are ignored: by default the check runs on the bare graph state.
    Passing ``state`` checks that vector against g's stabilizers instead.
    """
    bare = g.bare()
    psi = bare.to_statevector(cap=cap) if state is None else state
    d = g.d
    bad = []
    for a in bare.vertices:
        for sign in (1, -1):
            s = psi.apply(pauli_x(d, -sign), a)
            for b, w in bare.neighbors(a).items():
                s = s.apply(pauli_z(d, sign * w), b)
            if not np.allclose(s.vector(), psi.vector(), atol=tol):
                bad.append(f"{a!r}{'' if sign == 1 else ' (adjoint)'}")
    return bad


def stabilizer_check(g: GraphLikeState, state: StateVector | None = None,
                     cap: int = DEFAULT_CAP) -> bool:
    return not stabilizer_failures(g, state, cap)


# ---------------------------------------------------------------------------
# rules


def measure_z(g: GraphLikeState, v: Vertex, m: int) -> GraphLikeState:
    """Rule a: Z-basis outcome m on v deletes v; neighbours pick up Z^{m w}."""
    g._require(v)
    out = g.copy()
    for x, w in g.neighbors(v).items():
        out.correct(x, LocalFrame.diagonal(g.d, z=m * w))
    out.remove_vertex(v)
    return out


def measure_x_pair(g: GraphLikeState, a: Vertex, b: Vertex, m: int, n: int) -> GraphLikeState:
    """Rule b: X outcomes m on a and n on b, where b has neighbours exactly {a, c}.

    a and b disappear and a's other neighbours re-attach to c.
    """
    g._require(a)
    g._require(b)
    nb_b = g.neighbors(b)
    if len(nb_b) != 2 or a not in nb_b:
        raise QuditError("rule b needs b of degree 2 with a as one neighbour")
    d = g.d
    (c,) = [u for u in nb_b if u != a]
    p, q = nb_b[a], nb_b[c]
    pinv = mod_inverse(p, d)
    out = g.copy()
    r = g.weight(a, c)
    for x, w in g.neighbors(a).items():
        if x in (b, c):
            continue
        out.add_to_edge(x, c, -w * pinv * q)
        out.correct(x, LocalFrame.diagonal(d, z=w * pinv * n))
    corr = LocalFrame.diagonal(d, z=m * pinv * q, lin=r * pinv * n, quad=-r * pinv * q)
    out.correct(c, corr)
    out.remove_vertex(a)
    out.remove_vertex(b)
    return out


def measure_zxk(g: GraphLikeState, v: Vertex, k: int, m: int) -> GraphLikeState:
    """Rule c: ZX^k outcome m on v (odd d).

    Every neighbour pair (x, y) gets r_xy -= k w_x w_y; each neighbour gets the
    diagonal w^{(m + k/2) w_x j - (k/2) w_x^2 j^2}.
    """
    g.dim.require_odd("rule c")
    g._require(v)
    d = g.d
    if k % d == 0:
        raise QuditError("rule c needs k != 0")
    hk = half_times(k, d)
    nb = list(g.neighbors(v).items())
    out = g.copy()
    for i, (x, wx) in enumerate(nb):
        for y, wy in nb[i + 1:]:
            out.add_to_edge(x, y, -k * wx * wy)
        out.correct(x, LocalFrame.diagonal(d, lin=(m + hk) * wx, quad=-hk * wx * wx))
    out.remove_vertex(v)
    return out


def k_connect(p: int, q: int, d: DimLike) -> int:
    """k that turns a path x-v-y with weights p, q into a CZ edge x-y (r = 0)."""
    d = int(d)
    return (-mod_inverse(p, d) * mod_inverse(q, d)) % d


def k_disconnect(r: int, p: int, q: int, d: DimLike) -> int:
    """k that cancels an existing x-y weight r through v (weights p, q)."""
    d = int(d)
    return (r * mod_inverse(p, d) * mod_inverse(q, d)) % d


def measure_junction(g: GraphLikeState, v: Vertex, a: Vertex, c: Vertex, m: int) -> GraphLikeState:
    """Junction rule: ZX^k on v with k chosen to cut the a-c edge.

    The remaining neighbour pairs of v get re-weighted as in rule c.
    """
    nb = g.neighbors(v)
    if a not in nb or c not in nb:
        raise QuditError("a and c must both neighbour v")
    r = g.weight(a, c)
    if r == 0:
        raise QuditError("junction rule needs an existing a-c edge")
    return measure_zxk(g, v, k_disconnect(r, nb[a], nb[c], g.d), m)


@dataclass
class Step:
    """One scheduled measurement: rule a ('z'), b ('x_pair') or c ('zxk')."""

    rule: str
    vertices: tuple
    outcomes: tuple = ()
    k: int | None = None

    def graph_basis(self) -> list:
        if self.rule == "z":
            return [MeasBasis.computational()]
        if self.rule == "x_pair":
            return [MeasBasis.fourier(), MeasBasis.fourier()]
        return [MeasBasis.zxk(self.k)]

    def apply(self, g: GraphLikeState) -> GraphLikeState:
        if self.rule == "z":
            return measure_z(g, self.vertices[0], self.outcomes[0])
        if self.rule == "x_pair":
            return measure_x_pair(g, *self.vertices, *self.outcomes)
        if self.rule == "zxk":
            return measure_zxk(g, self.vertices[0], self.k, self.outcomes[0])
        raise QuditError(f"unknown rule {self.rule!r}")

    def to_dict(self) -> dict:
        enc = lambda v: list(v) if isinstance(v, tuple) else v
        return {"rule": self.rule, "vertices": [enc(v) for v in self.vertices],
                "outcomes": list(self.outcomes), "k": self.k}


def oracle_step(g: GraphLikeState, step: Step, cap: int = DEFAULT_CAP) -> float | None:
    """Fidelity between the rule's prediction and a forced state-vector measurement.

    Returns None when the forced outcome has zero Born weight (the branch
    cannot occur, so there is nothing to compare).
    """
    psi = g.to_statevector(cap=cap)
    try:
        for v, basis, o in zip(step.vertices, step.graph_basis(), step.outcomes):
            psi = psi.measure(v, g.lab_basis(v, basis), outcome=o, discard=True).state
    except QuditError as exc:
        if "zero probability" in str(exc):
            return None
        raise
    predicted = step.apply(g).to_statevector(order=psi.labels, cap=cap)
    return fidelity_up_to_phase(predicted, psi)


def reduce_to_cluster(*args, **kwargs):
    """See :func:`quditspt.reduction.reduce_to_cluster`."""
    from .reduction import reduce_to_cluster as _impl

    return _impl(*args, **kwargs)
