import pytest

from quditspt.core import (PhaseExp, PrimeDim, QuditError, ZdElem, half_times, mod_inverse,
                           omega_complex)


@pytest.mark.parametrize("a,d,expected", [(1, 5, 1), (2, 5, 3), (4, 7, 2)])
def test_mod_inverse_examples(a, d, expected):
    assert mod_inverse(a, d) == expected
    assert mod_inverse(ZdElem.of(a, d)) == ZdElem.of(expected, d)


@pytest.mark.parametrize("d", [2, 3, 5, 7, 11, 13])
def test_mod_inverse_property(d):
    for a in range(1, d):
        assert a * mod_inverse(a, d) % d == 1


def test_mod_inverse_zero():
    with pytest.raises(QuditError, match="no inverse"):
        mod_inverse(0, 5)


@pytest.mark.parametrize("k,d,expected", [(0, 3, 0), (0, 7, 0), (1, 3, 2), (3, 5, 4)])
def test_half_times_examples(k, d, expected):
    assert half_times(k, d) == expected


@pytest.mark.parametrize("d", [3, 5, 7, 11])
def test_half_times_doubles_back(d):
    for k in range(d):
        assert 2 * half_times(k, d) % d == k


def test_half_times_rejects_d2():
    with pytest.raises(QuditError, match="half undefined"):
        half_times(1, 2)


def test_omega_examples():
    assert abs(omega_complex(0, 3) - 1) < 1e-12
    assert abs(omega_complex(1, 2) + 1) < 1e-12
    with pytest.raises(QuditError):
        PrimeDim(4)


@pytest.mark.parametrize("d", [2, 3, 5])
def test_omega_is_homomorphism(d):
    for a in range(d):
        for b in range(d):
            lhs = omega_complex(a, d) * omega_complex(b, d)
            assert abs(lhs - omega_complex((a + b) % d, d)) < 1e-12
            assert abs(abs(omega_complex(a, d)) - 1) < 1e-12


def test_zd_arithmetic_closed():
    d = PrimeDim(7)
    a, b = ZdElem(3, d), ZdElem(5, d)
    assert (a + b).value == 1
    assert (a * b).value == 1
    assert (-a).value == 4
    assert (a ** -1) * a == 1
    assert (a - 10).value == 0
    p = PhaseExp(a) * PhaseExp(b)
    assert p.exponent == 1
    assert abs(complex(p) * complex(p.conj()) - 1) < 1e-12


def test_mixing_dimensions_rejected():
    with pytest.raises(QuditError):
        ZdElem.of(1, 3) + ZdElem.of(1, 5)
