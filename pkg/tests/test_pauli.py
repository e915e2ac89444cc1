import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from patchcode.pauli import (
    Angle,
    DimensionError,
    CapacityError,
    PauliRotation,
    PauliString,
    commutes,
    conjugate_through_rotation,
    multiply,
    projective_distance,
    rotation_unitary,
)


def test_label_roundtrip():
    for label in ["X", "-Y", "iZZ", "-iXIZ", "YIXZ"]:
        p = PauliString.from_label(label)
        assert PauliString.from_label(p.label()) == p
    assert PauliString.from_label("-Y_IXZ") == PauliString.from_label("-YIXZ")


def test_bad_labels():
    with pytest.raises(ValueError):
        PauliString.from_label("Q")
    with pytest.raises(ValueError):
        PauliString.from_label("")
    with pytest.raises(ValueError):
        PauliString.from_label("--X")


def test_identity_multiply():
    p = PauliString.from_label("XZY")
    assert multiply(PauliString.identity(3), p) == p
    assert multiply(p, PauliString.identity(3)) == p


def test_single_qubit_products():
    X = PauliString.from_label("X")
    Y = PauliString.from_label("Y")
    Z = PauliString.from_label("Z")
    assert multiply(X, Z) == PauliString.from_label("-iY")
    assert multiply(Z, X) == PauliString.from_label("iY")
    assert multiply(X, Y) == PauliString.from_label("iZ")
    assert multiply(X, X) == PauliString.identity(1)


def test_two_qubit_product_phase():
    zz = PauliString.from_label("ZZ")
    xx = PauliString.from_label("XX")
    assert multiply(zz, xx) == PauliString.from_label("-YY")


def test_dimension_error():
    with pytest.raises(DimensionError):
        multiply(PauliString.from_label("X"), PauliString.from_label("XX"))
    with pytest.raises(DimensionError):
        commutes(PauliString.from_label("X"), PauliString.from_label("XX"))


def test_commutes_basics():
    X = PauliString.from_label("X")
    Z = PauliString.from_label("Z")
    assert not commutes(X, Z)
    assert commutes(PauliString.from_label("ZZ"), PauliString.from_label("XX"))
    for lab in ["XIZ", "-YYX", "ZZZ"]:
        p = PauliString.from_label(lab)
        assert commutes(p, p)


def _random_string(rng, n):
    x = rng.integers(0, 2, n, dtype=np.uint8)
    z = rng.integers(0, 2, n, dtype=np.uint8)
    return PauliString(x, z, int(rng.integers(0, 4)))


def test_multiply_against_dense_random():
    rng = np.random.default_rng(7)
    for _ in range(300):
        n = int(rng.integers(1, 5))
        a, b = _random_string(rng, n), _random_string(rng, n)
        prod = multiply(a, b)
        assert prod.e in (0, 1, 2, 3)
        dense = a.to_matrix() @ b.to_matrix()
        assert np.allclose(dense, prod.to_matrix(), atol=1e-12)


def test_commutes_exhaustive_two_qubits():
    # all 4^k x 4^k unsigned pairs for k <= 2
    for n in (1, 2):
        strings = []
        for bits in range(4**n):
            x = [(bits >> (2 * q)) & 1 for q in range(n)]
            z = [(bits >> (2 * q + 1)) & 1 for q in range(n)]
            strings.append(PauliString(x, z))
        for a in strings:
            for b in strings:
                ab = a.to_matrix() @ b.to_matrix()
                ba = b.to_matrix() @ a.to_matrix()
                assert commutes(a, b) == np.allclose(ab, ba, atol=1e-12)


@settings(max_examples=200, deadline=None)
@given(st.data())
def test_phase_closure_property(data):
    n = data.draw(st.integers(1, 48))
    bits = data.draw(st.binary(min_size=4 * n, max_size=4 * n))
    arr = np.frombuffer(bits, dtype=np.uint8) % 2
    a = PauliString(arr[:n], arr[n : 2 * n], 0)
    b = PauliString(arr[2 * n : 3 * n], arr[3 * n :], 0)
    prod = multiply(a, b)
    assert prod.e in (0, 1, 2, 3)
    # associativity spot check: (a*b)*b^-1 == a
    assert multiply(prod, b.adjoint()) == a


# -- angles -----------------------------------------------------------


def test_angle_canonical_form():
    a = Angle.dyadic(2, 3)  # 2pi/8 = pi/4
    assert (a.num, a.k) == (1, 2)
    assert Angle.dyadic(8, 3).is_zero  # 8pi/8 = pi -> global phase
    assert Angle.dyadic(0, 5).is_zero
    assert Angle.dyadic(9, 3).num == -7 or Angle.dyadic(9, 3).num == 9 % 16
    # 9pi/8 reduces into (-pi, pi]: 9pi/8 - 2pi = -7pi/8
    assert (Angle.dyadic(9, 3).num, Angle.dyadic(9, 3).k) == (-7, 3)


def test_angle_levels():
    assert Angle.dyadic(1, 1).level() == "pauli"
    assert Angle.dyadic(-1, 2).level() == "clifford"
    assert Angle.dyadic(1, 3).level() == "t"
    assert Angle.dyadic(3, 4).level() == "small"
    assert Angle.generic(0.3).level() == "generic"
    assert Angle.dyadic(1, 0).is_zero  # pi rotation: -identity


def test_angle_addition():
    t = Angle.dyadic(1, 3)
    assert (t + t) == Angle.dyadic(1, 2)
    assert (t + -t).is_zero
    s = Angle.dyadic(1, 2)
    assert (s + s) == Angle.dyadic(1, 1)
    g = Angle.generic(0.25)
    assert abs((g + t).radians() - (0.25 + np.pi / 8)) < 1e-15


def test_angle_json_roundtrip():
    for a in [Angle.dyadic(-3, 4), Angle.dyadic(1, 3), Angle.generic(1.234)]:
        assert Angle.from_json(a.to_json()) == a


# -- rotations --------------------------------------------------------


def test_rotation_axis_normalization():
    r = PauliRotation(PauliString.from_label("-Z"), Angle.dyadic(1, 3))
    assert r.axis == PauliString.from_label("Z")
    assert r.angle == Angle.dyadic(-1, 3)
    with pytest.raises(ValueError):
        PauliRotation(PauliString.from_label("iZ"), Angle.dyadic(1, 3))


def test_rotation_unitary_pi_2_is_pauli():
    for lab in ["Z", "X", "YX"]:
        p = PauliString.from_label(lab)
        u = rotation_unitary(PauliRotation(p, Angle.dyadic(1, 1)))
        assert projective_distance(u, p.to_matrix()) < 1e-12


def test_rotation_unitary_zero_angle():
    u = rotation_unitary(PauliRotation.from_label("XZ", Angle.dyadic(0, 0)))
    assert np.allclose(u, np.eye(4))


def test_rotation_unitary_t_gate():
    u = rotation_unitary(PauliRotation.from_label("Z", Angle.dyadic(1, 3)))
    expect = np.diag([np.exp(-1j * np.pi / 8), np.exp(1j * np.pi / 8)])
    assert np.max(np.abs(u - expect)) < 1e-12


def test_rotation_unitary_unitarity():
    rng = np.random.default_rng(3)
    for _ in range(50):
        n = int(rng.integers(1, 4))
        r = PauliRotation(_random_string(rng, n).unsigned(), Angle.generic(float(rng.normal())))
        u = rotation_unitary(r)
        assert np.max(np.abs(u @ u.conj().T - np.eye(1 << n))) < 1e-12


def test_rotation_capacity_error():
    big = PauliString.identity(9)
    with pytest.raises(CapacityError):
        rotation_unitary(PauliRotation(big, Angle.dyadic(1, 3)), max_qubits=6)


def test_conjugate_through_rotation_matches_dense():
    rng = np.random.default_rng(11)
    for _ in range(200):
        n = int(rng.integers(1, 4))
        axis = _random_string(rng, n).unsigned()
        p = _random_string(rng, n)
        p = p.unsigned() if p.e in (1, 3) else p
        k = int(rng.integers(1, 3))
        num = int(rng.choice([-3, -1, 1, 3])) if k == 2 else int(rng.choice([-1, 1]))
        f = PauliRotation(axis, Angle.dyadic(num, k))
        got = conjugate_through_rotation(f, p)
        uf = rotation_unitary(f)
        dense = uf.conj().T @ p.to_matrix() @ uf
        assert np.allclose(dense, got.to_matrix(), atol=1e-10)
