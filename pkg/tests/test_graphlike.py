import itertools
import json

import numpy as np
import pytest

from quditspt.core import QuditError, half_times
from quditspt.graphlike import (GraphLikeState, LocalFrame, Step, k_connect, k_disconnect,
                                measure_junction, measure_x_pair, measure_z, measure_zxk,
                                oracle_step, stabilizer_check, stabilizer_failures)
from quditspt.statevector import MeasBasis, StateVector, fidelity_up_to_phase, omega, zxk_alphas


def random_graph(d, n, rng, frames=True, p=0.5):
    g = GraphLikeState(d, range(n))
    for a, b in itertools.combinations(range(n), 2):
        if rng.random() < p:
            g.set_edge(a, b, int(rng.integers(1, d)))
    if frames:
        for v in range(n):
            z, x, perm, lin, quad = rng.integers(0, d, 5)
            g.frames[v] = LocalFrame(d, z=z, x=x, perm=max(1, perm), lin=lin, quad=quad)
    return g


def test_to_statevector_examples():
    g = GraphLikeState(3, [0, 1])
    assert fidelity_up_to_phase(g.to_statevector(), StateVector.plus(3, 2)) == pytest.approx(1)
    g = GraphLikeState(2, [0, 1], {(0, 1): 1})
    assert np.allclose(g.to_statevector().vector(), np.array([1, 1, 1, -1]) / 2)


def test_weight_zero_not_stored():
    g = GraphLikeState(3, [0, 1], {(0, 1): 2})
    g.add_to_edge(0, 1, 1)
    assert g.edges() == []
    with pytest.raises(QuditError):
        g.set_edge(0, 0, 1)


def test_stabilizer_triangle():
    g = GraphLikeState(3, [0, 1, 2], {(0, 1): 1, (1, 2): 2, (0, 2): 1})
    assert stabilizer_check(g)


@pytest.mark.parametrize("p,q", list(itertools.product(range(1, 5), repeat=2)))
def test_stabilizer_path_d5(p, q):
    assert stabilizer_check(GraphLikeState(5, "abc", {("a", "b"): p, ("b", "c"): q}))


def test_stabilizer_negative_control():
    g = GraphLikeState(3, [0, 1, 2], {(0, 1): 1, (1, 2): 2})
    psi = g.to_statevector()
    corrupted = GraphLikeState(3, [0, 1, 2], {(0, 1): 1, (1, 2): 1})
    assert stabilizer_check(g, psi)
    assert not stabilizer_check(corrupted, psi)
    assert "2" in " ".join(stabilizer_failures(corrupted, psi))


def test_measure_z_examples():
    g = GraphLikeState(3, "abc", {("a", "b"): 1, ("b", "c"): 1})
    out = measure_z(g, "b", 0)
    assert out.edges() == [] and out.frame_free()
    out = measure_z(g, "b", 1)
    assert out.edges() == []
    assert out.frames["a"].z == 1 and out.frames["c"].z == 1
    with pytest.raises(QuditError):
        measure_z(g, "zz", 0)


def test_measure_x_pair_chain_example():
    g = GraphLikeState(3, "xabc", {("x", "a"): 1, ("a", "b"): 1, ("b", "c"): 1})
    out = measure_x_pair(g, "a", "b", 0, 0)
    assert out.edges() == [("x", "c", 2)]


def test_measure_x_pair_isolated_left():
    g = GraphLikeState(3, "abc", {("a", "b"): 1, ("b", "c"): 2})
    out = measure_x_pair(g, "a", "b", 1, 2)
    assert out.vertices == ["c"] and out.edges() == []


def test_measure_x_pair_requires_degree_two():
    g = GraphLikeState(3, "abcd", {("a", "b"): 1, ("b", "c"): 1, ("b", "d"): 1})
    with pytest.raises(QuditError):
        measure_x_pair(g, "a", "b", 0, 0)


@pytest.mark.parametrize("d", [3, 5])
def test_rules_on_paths_exhaustive(d):
    for p, q in itertools.product(range(1, d), repeat=2):
        g = GraphLikeState(d, "xabc", {("x", "a"): 1, ("a", "b"): p, ("b", "c"): q})
        for m, n in itertools.product(range(d), repeat=2):
            f = oracle_step(g, Step("x_pair", ("a", "b"), (m, n)))
            assert f is None or f > 1 - 1e-9


def test_zxk_connect_example():
    g = GraphLikeState(3, "abc", {("a", "b"): 1, ("b", "c"): 1})
    k = k_connect(1, 1, 3)
    assert k == 2
    out = measure_zxk(g, "b", k, 0)
    assert out.edges() == [("a", "c", 1)]


def test_zxk_disconnect_example():
    g = GraphLikeState(3, "abc", {("a", "b"): 1, ("b", "c"): 1, ("a", "c"): 2})
    k = k_disconnect(2, 1, 1, 3)
    assert k == 2
    assert measure_zxk(g, "b", k, 1).edges() == []


def test_junction_rule_example():
    d, p, q, s, r = 5, 1, 2, 3, 4
    g = GraphLikeState(d, "vacx", {("v", "a"): p, ("v", "c"): q, ("v", "x"): s, ("a", "c"): r})
    out = measure_junction(g, "v", "a", "c", 0)
    k = k_disconnect(r, p, q, d)
    assert out.weight("a", "c") == 0
    assert out.weight("a", "x") == (-k * p * s) % d
    assert out.weight("c", "x") == (-k * q * s) % d
    for m in range(d):
        f = oracle_step(g, Step("zxk", ("v",), (m,), k))
        assert f > 1 - 1e-9


def test_zxk_rejects_bad_input():
    g = GraphLikeState(3, "ab", {("a", "b"): 1})
    with pytest.raises(QuditError):
        measure_zxk(g, "a", 0, 0)
    with pytest.raises(QuditError):
        measure_zxk(GraphLikeState(2, "ab", {("a", "b"): 1}), "a", 1, 0)


@pytest.mark.parametrize("d", [3, 5, 7])
def test_f_of_r_identity(d):
    w = omega(d)
    for k in range(1, d):
        alpha = zxk_alphas(k, d)
        f0 = sum(w ** (-a) for a in alpha)
        for R in range(d):
            fR = sum(w ** (-alpha[l] + l * R) for l in range(d))
            assert abs(fR / f0 - w ** ((-half_times(k, d) * R * (R - 1)) % d)) < 1e-10


@pytest.mark.parametrize("d", [3, 5])
def test_random_rules_match_oracle(d):
    rng = np.random.default_rng(d)
    for _ in range(15):
        n = int(rng.integers(3, 7))
        g = random_graph(d, n, rng)
        v = int(rng.integers(0, n))
        for m in range(d):
            f = oracle_step(g, Step("z", (v,), (m,)))
            assert f is None or f > 1 - 1e-9
            k = int(rng.integers(1, d))
            f = oracle_step(g, Step("zxk", (v,), (m,), k))
            assert f is None or f > 1 - 1e-9


def test_measure_z_commutes_on_disjoint_vertices():
    rng = np.random.default_rng(3)
    g = random_graph(5, 6, rng)
    a = measure_z(measure_z(g, 0, 2), 1, 3)
    b = measure_z(measure_z(g, 1, 3), 0, 2)
    assert a.same_as(b)


@pytest.mark.parametrize("d", [3, 5])
def test_frames_compose_like_matrices(d):
    rng = np.random.default_rng(d)
    for _ in range(30):
        A, B, C = [LocalFrame(d, *rng.integers(0, d, 2), int(rng.integers(1, d)), *rng.integers(0, d, 3))
                   for _ in range(3)]
        assert np.allclose(A.compose(B).matrix(), A.matrix() @ B.matrix(), atol=1e-10)
        assert np.allclose(A.compose(B).compose(C).matrix(), A.compose(B.compose(C)).matrix(), atol=1e-10)


def test_graph_json_roundtrip():
    g = random_graph(5, 4, np.random.default_rng(1))
    back = GraphLikeState.from_json(g.to_json())
    assert back.same_as(g)
    assert json.loads(g.to_json())["schema"] == "quditspt.graph/1"


def test_lab_basis_identity_frame_passthrough():
    g = GraphLikeState(3, "ab", {("a", "b"): 1})
    assert g.lab_basis("a", MeasBasis.fourier()) == MeasBasis.fourier()
