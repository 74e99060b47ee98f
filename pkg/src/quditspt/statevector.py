"""Dense n-qudit state vectors.

Amplitudes are stored as a tensor of shape ``(d,) * n``; axis ``i`` is the
i-th site in ``labels``.  Flattening in C order therefore makes site 0 the
most significant digit of the basis index.

Sites are addressed by label.  Labels default to ``0..n-1`` but may be any
hashable (graph vertices, lattice coordinates), which keeps bookkeeping sane
when measured sites are discarded.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Hashable, Iterable, Sequence

import numpy as np

from .core import DimLike, PrimeDim, QuditError, as_dim, mod_inverse

DEFAULT_CAP = 5**8

NORM_TOL = 1e-10
ZERO_PROB = 1e-12


# ---------------------------------------------------------------------------
# single-qudit operators (the paper's conventions: X|k> = |k-1>)


def omega(d: DimLike) -> complex:
    return np.exp(2j * np.pi / int(d))


def pauli_x(d: DimLike, power: int = 1) -> np.ndarray:
    """X**power with X|k> = |k-1 mod d>."""
    d = int(d)
    out = np.zeros((d, d), dtype=complex)
    for k in range(d):
        out[(k - power) % d, k] = 1.0
    return out


def pauli_z(d: DimLike, power: int = 1) -> np.ndarray:
    d = int(d)
    return np.diag(omega(d) ** ((power * np.arange(d)) % d))


def plus_vec(d: DimLike, j: int = 0) -> np.ndarray:
    """|+_j> = d^-1/2 sum_k w^{jk} |k>."""
    d = int(d)
    k = np.arange(d)
    return omega(d) ** ((j * k) % d) / math.sqrt(d)


def fourier(d: DimLike) -> np.ndarray:
    d = int(d)
    j, k = np.meshgrid(np.arange(d), np.arange(d), indexing="ij")
    return omega(d) ** ((j * k) % d) / math.sqrt(d)


def fourier_q(d: DimLike, q: int) -> np.ndarray:
    """F_q = sum_k |+_{qk}><k|."""
    d = int(d)
    return np.stack([plus_vec(d, q * k) for k in range(d)], axis=1)


def s_perm(d: DimLike, c: int) -> np.ndarray:
    """S_c = sum_k |ck><k|; a permutation for c != 0 and prime d."""
    d = int(d)
    if c % d == 0:
        raise QuditError("S_0 is not a permutation")
    out = np.zeros((d, d), dtype=complex)
    for k in range(d):
        out[(c * k) % d, k] = 1.0
    return out


def diag_phase(d: DimLike, exponents: Sequence[float]) -> np.ndarray:
    """diag(w**e_j); exponents may be real."""
    d = int(d)
    e = np.asarray(exponents, dtype=float)
    return np.diag(np.exp(2j * np.pi * e / d))


def is_unitary(u: np.ndarray, tol: float = 1e-10) -> bool:
    u = np.asarray(u)
    return u.shape[0] == u.shape[1] and np.allclose(u @ u.conj().T, np.eye(u.shape[0]), atol=tol)


@dataclass(frozen=True)
class LocalUnitary:
    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.ndim != 2 or not is_unitary(m):
            raise QuditError("matrix is not unitary")
        object.__setattr__(self, "matrix", m)

    @property
    def d(self) -> int:
        return self.matrix.shape[0]

    def dagger(self) -> "LocalUnitary":
        return LocalUnitary(self.matrix.conj().T)


# ---------------------------------------------------------------------------
# measurement bases


def zxk_alphas(k: int, d: DimLike) -> list[int]:
    """Phase exponents of the ZX^k eigenbasis, gauge alpha_0 = 0.

    Iterates alpha_{l+k} = alpha_l - l along the cycle l -> l+k, which visits
    every residue because k is invertible.
    """
    dim = as_dim(d)
    dim.require_odd("the ZX^k basis")
    d = dim.d
    if k % d == 0:
        raise QuditError("ZX^k basis needs k != 0 mod d")
    alpha = [None] * d
    alpha[0] = 0
    l = 0
    for _ in range(d - 1):
        alpha[(l + k) % d] = (alpha[l] - l) % d
        l = (l + k) % d
    # closing the cycle must be consistent; this is where odd d matters
    assert (alpha[l] - l - alpha[(l + k) % d]) % d == 0
    return alpha


@dataclass(frozen=True)
class MeasBasis:
    """A named orthonormal measurement basis.

    ``kind`` is one of computational, fourier, zxk, fq_dagger, custom.
    Outcome ``m`` always means "projected onto the m-th basis vector".
    For fourier this is |+_m>, for zxk the eigenvector of ZX^k with
    eigenvalue w^m, and for fq_dagger the vector F_q^dagger |m>.
    """

    kind: str
    param: object = None

    @classmethod
    def computational(cls) -> "MeasBasis":
        return cls("computational")

    @classmethod
    def fourier(cls) -> "MeasBasis":
        return cls("fourier")

    @classmethod
    def zxk(cls, k: int) -> "MeasBasis":
        return cls("zxk", int(k))

    @classmethod
    def fq_dagger(cls, q: int) -> "MeasBasis":
        return cls("fq_dagger", int(q))

    @classmethod
    def custom(cls, columns: np.ndarray) -> "MeasBasis":
        lu = columns if isinstance(columns, LocalUnitary) else LocalUnitary(columns)
        return cls("custom", lu)

    @classmethod
    def eigenbasis(cls, op: np.ndarray, d: DimLike) -> "MeasBasis":
        """Eigenbasis of a unitary whose spectrum is the d-th roots of unity.

        Column s is the eigenvector with eigenvalue w**s.
        """
        d = int(d)
        vals, vecs = np.linalg.eig(np.asarray(op, dtype=complex))
        labels = np.rint(np.angle(vals) * d / (2 * np.pi)).astype(int) % d
        if len(set(labels.tolist())) != d or not np.allclose(np.abs(vals), 1.0, atol=1e-9):
            raise QuditError("operator spectrum is not the non-degenerate d-th roots of unity")
        cols = np.zeros((d, d), dtype=complex)
        for s, v in zip(labels, vecs.T):
            cols[:, s] = v / np.linalg.norm(v)
        # eig on a normal matrix with distinct eigenvalues is orthogonal up to rounding
        q, r = np.linalg.qr(cols)
        cols = q * (np.diag(r) / np.abs(np.diag(r)))
        return cls.custom(cols)

    def vectors(self, d: DimLike) -> np.ndarray:
        return basis_vectors(self, d)


def basis_vectors(basis: MeasBasis, d: DimLike) -> np.ndarray:
    """d x d matrix whose column m is the basis vector for outcome m."""
    dim = as_dim(d)
    d = dim.d
    if basis.kind == "computational":
        return np.eye(d, dtype=complex)
    if basis.kind == "fourier":
        return fourier(d)
    if basis.kind == "zxk":
        k = basis.param
        alpha = zxk_alphas(k, dim)
        w = omega(d)
        cols = np.zeros((d, d), dtype=complex)
        for m in range(d):
            for l in range(d):
                cols[(l + m) % d, m] = w ** alpha[l]
        return cols / math.sqrt(d)
    if basis.kind == "fq_dagger":
        q = basis.param
        if q % d == 0:
            raise QuditError("F_q needs q != 0")
        return fourier_q(d, q).conj().T
    if basis.kind == "custom":
        m = basis.param.matrix
        if m.shape != (d, d):
            raise QuditError("custom basis has the wrong dimension")
        return m
    raise QuditError(f"unknown basis kind {basis.kind!r}")


# ---------------------------------------------------------------------------


@dataclass
class MeasurementResult:
    outcome: int
    state: "StateVector"
    probability: float


@dataclass
class StateVector:
    dim: PrimeDim
    amps: np.ndarray
    labels: tuple = field(default=())
    cap: int = DEFAULT_CAP

    def __post_init__(self):
        self.dim = as_dim(self.dim)
        n = self.amps.ndim
        if not self.labels:
            self.labels = tuple(range(n))
        self.labels = tuple(self.labels)
        if len(self.labels) != n or len(set(self.labels)) != n:
            raise QuditError("labels must be distinct, one per site")
        if any(s != self.dim.d for s in self.amps.shape):
            raise QuditError("amplitude tensor does not match d")
        if self.dim.d**n > self.cap:
            raise QuditError(f"d^n = {self.dim.d}^{n} exceeds the state-vector cap {self.cap}")

    # -- construction -----------------------------------------------------

    @classmethod
    def plus(cls, d: DimLike, sites, cap: int = DEFAULT_CAP) -> "StateVector":
        """|+>^n; ``sites`` is a count or an iterable of labels."""
        dim = as_dim(d)
        labels = tuple(range(sites)) if isinstance(sites, int) else tuple(sites)
        n = len(labels)
        if dim.d**n > cap:
            raise QuditError(f"d^n = {dim.d}^{n} exceeds the state-vector cap {cap}")
        amps = np.full((dim.d,) * n, dim.d ** (-n / 2), dtype=complex)
        return cls(dim, amps, labels, cap)

    @classmethod
    def product(cls, d: DimLike, vectors: Sequence[np.ndarray], labels=None,
                cap: int = DEFAULT_CAP) -> "StateVector":
        dim = as_dim(d)
        if dim.d ** len(vectors) > cap:
            raise QuditError("state-vector cap exceeded")
        amps = np.array(1.0 + 0j)
        for v in vectors:
            v = np.asarray(v, dtype=complex)
            amps = np.multiply.outer(amps, v / np.linalg.norm(v))
        return cls(dim, amps, tuple(labels) if labels else (), cap)

    @classmethod
    def basis(cls, d: DimLike, digits: Sequence[int], labels=None,
              cap: int = DEFAULT_CAP) -> "StateVector":
        d = int(d)
        return cls.product(d, [np.eye(d)[k % d] for k in digits], labels, cap)

    @classmethod
    def from_vector(cls, d: DimLike, vec: np.ndarray, labels=None,
                    cap: int = DEFAULT_CAP) -> "StateVector":
        dim = as_dim(d)
        vec = np.asarray(vec, dtype=complex)
        n = round(math.log(vec.size, dim.d)) if vec.size > 1 else 0
        if dim.d**n != vec.size:
            raise QuditError("vector length is not a power of d")
        vec = vec / np.linalg.norm(vec)
        return cls(dim, vec.reshape((dim.d,) * n), tuple(labels) if labels else (), cap)

    def copy(self) -> "StateVector":
        return StateVector(self.dim, self.amps.copy(), self.labels, self.cap)

    # -- basic accessors --------------------------------------------------

    @property
    def d(self) -> int:
        return self.dim.d

    @property
    def n(self) -> int:
        return self.amps.ndim

    def vector(self) -> np.ndarray:
        return self.amps.reshape(-1)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))

    def axis(self, site: Hashable) -> int:
        try:
            return self.labels.index(site)
        except ValueError:
            raise QuditError(f"site {site!r} not in state") from None

    def _with(self, amps: np.ndarray, labels=None) -> "StateVector":
        return StateVector(self.dim, amps, self.labels if labels is None else labels, self.cap)

    def tensor(self, other: "StateVector") -> "StateVector":
        if other.d != self.d:
            raise QuditError("dimension mismatch")
        if set(self.labels) & set(other.labels):
            raise QuditError("tensor product would duplicate labels")
        if self.d ** (self.n + other.n) > self.cap:
            raise QuditError("state-vector cap exceeded")
        return self._with(np.multiply.outer(self.amps, other.amps), self.labels + other.labels)

    def reorder(self, labels: Sequence[Hashable]) -> "StateVector":
        labels = tuple(labels)
        if set(labels) != set(self.labels) or len(labels) != self.n:
            raise QuditError("reorder needs a permutation of the current labels")
        perm = [self.axis(s) for s in labels]
        return self._with(np.transpose(self.amps, perm), labels)

    # -- gates ------------------------------------------------------------

    def apply_phase_table(self, sites: Sequence[Hashable], exponents: np.ndarray) -> "StateVector":
        """Multiply the amplitude of |.. k_a .. k_b ..> by w**exponents[k_a, k_b, ...].

        Integer tables are reduced mod d before exponentiation; float tables
        are used as-is (real exponents).
        """
        axes = [self.axis(s) for s in sites]
        if len(set(axes)) != len(axes):
            raise QuditError("repeated site")
        table = np.asarray(exponents)
        if np.issubdtype(table.dtype, np.integer):
            table = table % self.d
        phase = np.exp(2j * np.pi * table / self.d)
        # bring table axes into the state's axis order, then broadcast
        order = np.argsort(axes)
        phase = np.transpose(phase, order)
        shape = [1] * self.n
        for ax in sorted(axes):
            shape[ax] = self.d
        return self._with(self.amps * phase.reshape(shape))

    def apply_cz_pow(self, q: int, a: Hashable, b: Hashable) -> "StateVector":
        if a == b:
            raise QuditError("CZ needs two distinct sites")
        k = np.arange(self.d)
        return self.apply_phase_table([a, b], int(q) * np.multiply.outer(k, k))

    def apply_ccz_pow(self, k: int, a: Hashable, b: Hashable, c: Hashable) -> "StateVector":
        if len({a, b, c}) != 3:
            raise QuditError("CCZ needs three distinct sites")
        r = np.arange(self.d)
        table = int(k) * np.multiply.outer(np.multiply.outer(r, r), r)
        return self.apply_phase_table([a, b, c], table)

    def apply(self, op: np.ndarray, sites) -> "StateVector":
        """Apply a (d^m x d^m) operator to the listed sites (first = most significant)."""
        if not isinstance(sites, (list, tuple)) or sites in self.labels:
            sites = [sites]
        m = len(sites)
        op = np.asarray(op, dtype=complex).reshape((self.d,) * (2 * m))
        axes = [self.axis(s) for s in sites]
        if len(set(axes)) != m:
            raise QuditError("repeated site")
        out = np.tensordot(op, self.amps, axes=(list(range(m, 2 * m)), axes))
        # tensordot puts the new axes first; move them back
        out = np.moveaxis(out, list(range(m)), axes)
        return self._with(out)

    def apply_pauli(self, site: Hashable, x: int = 0, z: int = 0) -> "StateVector":
        """Apply Z**z X**x (X first)."""
        op = pauli_z(self.d, z) @ pauli_x(self.d, x)
        return self.apply(op, site)

    # -- measurement ------------------------------------------------------

    def _project(self, site, vec: np.ndarray) -> np.ndarray:
        return np.tensordot(vec.conj(), self.amps, axes=([0], [self.axis(site)]))

    def probabilities(self, site: Hashable, basis: MeasBasis) -> np.ndarray:
        cols = basis_vectors(basis, self.dim)
        ax = self.axis(site)
        proj = np.tensordot(cols.conj(), self.amps, axes=([0], [ax]))
        p = np.sum(np.abs(proj.reshape(self.d, -1)) ** 2, axis=1)
        return p / np.sum(np.abs(self.amps) ** 2)

    def measure(self, site: Hashable, basis: MeasBasis | None = None, outcome: int | None = None,
                rng=None, discard: bool = False) -> MeasurementResult:
        """Projective measurement of one site.

        With ``outcome`` given the result is forced (an error if its Born
        weight is below 1e-12); otherwise it is sampled from ``rng`` (a numpy
        Generator or a seed).  ``discard`` drops the measured site from the
        returned state instead of leaving it in the basis vector.
        """
        basis = basis or MeasBasis.computational()
        cols = basis_vectors(basis, self.dim)
        total = float(np.sum(np.abs(self.amps) ** 2))
        if outcome is None:
            probs = self.probabilities(site, basis)
            gen = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
            outcome = int(gen.choice(self.d, p=probs / probs.sum()))
        outcome = int(outcome)
        if not 0 <= outcome < self.d:
            raise QuditError(f"outcome {outcome} outside [0, {self.d})")
        vec = cols[:, outcome]
        reduced = self._project(site, vec)
        weight = float(np.sum(np.abs(reduced) ** 2))
        prob = weight / total
        if prob < ZERO_PROB:
            raise QuditError(f"forced outcome {outcome} has zero probability")
        reduced = reduced / math.sqrt(weight)
        ax = self.axis(site)
        if discard:
            labels = self.labels[:ax] + self.labels[ax + 1:]
            return MeasurementResult(outcome, StateVector(self.dim, reduced, labels, self.cap), prob)
        collapsed = np.moveaxis(np.multiply.outer(vec, reduced), 0, ax)
        return MeasurementResult(outcome, self._with(collapsed), prob)

    def project(self, site: Hashable, vec: np.ndarray) -> "StateVector":
        """Unnormalised <vec|_site applied to the state (site removed)."""
        reduced = self._project(site, np.asarray(vec, dtype=complex))
        ax = self.axis(site)
        return StateVector(self.dim, reduced, self.labels[:ax] + self.labels[ax + 1:], self.cap)

    # -- serialisation ----------------------------------------------------

    def to_json(self) -> str:
        flat = self.vector()
        return json.dumps({
            "schema": "quditspt.statevector/1",
            "d": self.d,
            "n": self.n,
            "sites": [repr(s) if not isinstance(s, (int, str)) else s for s in self.labels],
            "order": "site 0 is the most significant digit",
            "amps": [[float(z.real), float(z.imag)] for z in flat],
        })

    @classmethod
    def from_json(cls, text: str) -> "StateVector":
        data = json.loads(text)
        vec = np.array([complex(re, im) for re, im in data["amps"]])
        d = data["d"]
        n = data["n"]
        amps = vec.reshape((d,) * n) if n else vec.reshape(())
        return cls(PrimeDim(d), amps, tuple(data["sites"]), max(DEFAULT_CAP, d**n))


def new_plus_state(d: DimLike, n: int, cap: int = DEFAULT_CAP) -> StateVector:
    return StateVector.plus(d, n, cap)


def fidelity_up_to_phase(a: StateVector, b: StateVector) -> float:
    """|<a|b>| for normalised inputs; labels must agree as sets.

    ``b`` is reordered to ``a``'s label order first.
    """
    if a.d != b.d or a.n != b.n:
        raise QuditError("shape mismatch")
    if a.labels != b.labels:
        b = b.reorder(a.labels)
    va, vb = a.vector(), b.vector()
    return float(abs(np.vdot(va, vb)) / (np.linalg.norm(va) * np.linalg.norm(vb)))


def operator_fidelity(a: np.ndarray, b: np.ndarray) -> float:
    """|tr(a^dag b)| / (||a|| ||b||): 1 iff a and b agree up to a scalar."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    return float(abs(np.vdot(a, b)) / (np.linalg.norm(a) * np.linalg.norm(b)))


def equal_up_to_phase(a: np.ndarray, b: np.ndarray, tol: float = 1e-10) -> bool:
    return operator_fidelity(a, b) >= 1 - tol


def kron_all(mats: Iterable[np.ndarray]) -> np.ndarray:
    out = np.eye(1, dtype=complex)
    for m in mats:
        out = np.kron(out, m)
    return out


def s_inverse(d: DimLike, c: int) -> np.ndarray:
    return s_perm(d, mod_inverse(c, d))
