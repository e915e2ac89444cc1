import itertools
import math

import numpy as np
import pytest

from patchcode.pauli import (
    Angle,
    PauliMeasurement,
    PauliRotation,
    PauliString,
    projective_distance,
    rotation_unitary,
)
from patchcode.sim import (
    DistillationCircuit,
    LogicalState,
    NoiseSpec,
    SimulationError,
    auto_corrected_rotation_program,
    cascade_rotation_program,
    distill_monte_carlo,
    explicit_quarter_program,
    magic_rotation_program,
    multi_pauli_controlled,
    post_corrected_rotation_program,
    run_measurement_program,
    selective_quarter_program,
    wilson_interval,
)


def amps_of(labels_or_state):
    return labels_or_state.amps.copy()


def test_prepare_basic_states():
    s = LogicalState(1)
    s.prepare(0, "0")
    assert np.allclose(s.amps, [1, 0])

    s = LogicalState(1)
    s.prepare(0, "m")
    expect = np.array([1, np.exp(1j * np.pi / 4)]) / np.sqrt(2)
    assert np.allclose(s.amps, expect)

    s = LogicalState(1)
    s.prepare(0, "phi", angle=Angle.dyadic(1, 3))
    assert np.allclose(s.amps, expect)  # |pi/8> == |m>


def test_prepare_in_use_errors():
    s = LogicalState(2)
    s.prepare(0, "+")
    with pytest.raises(SimulationError):
        s.prepare(0, "0")


def test_prepare_full_noise_is_single_pauli():
    expect = np.array([1, np.exp(1j * np.pi / 4)]) / np.sqrt(2)
    corrupted = []
    for letter in "XYZ":
        s = LogicalState(1)
        s.prepare(0, "m")
        s.apply_pauli(PauliString.from_label(letter))
        corrupted.append(s.amps)
    for seed in range(8):
        s = LogicalState(1, seed=seed)
        s.prepare(0, "m", noise=NoiseSpec(p=1.0))
        dists = [projective_distance(s.amps[:, None], c[:, None]) for c in corrupted]
        assert min(dists) < 1e-12
        assert projective_distance(s.amps[:, None], expect[:, None]) > 0.1


def test_measure_deterministic_z():
    s = LogicalState(1)
    s.prepare(0, "0")
    out = s.measure_pauli(PauliMeasurement.from_label("Z"))
    assert out == 1
    assert np.allclose(s.amps, [1, 0])


def test_measure_bell_prep():
    # ZZ on |+>|+> gives each outcome with probability 1/2 and Bell states
    counts = {1: 0, -1: 0}
    for seed in range(200):
        s = LogicalState(2, seed=seed)
        s.prepare(0, "+")
        s.prepare(1, "+")
        out = s.measure_pauli(PauliMeasurement.from_label("ZZ"))
        counts[out] += 1
        if out == 1:
            assert np.allclose(s.amps, np.array([1, 0, 0, 1]) / np.sqrt(2))
        else:
            assert np.allclose(s.amps, np.array([0, 1, 1, 0]) / np.sqrt(2))
    assert 60 < counts[1] < 140


def test_measure_forced_and_zero_probability():
    s = LogicalState(1)
    s.prepare(0, "0")
    with pytest.raises(SimulationError):
        s.measure_pauli(PauliMeasurement.from_label("Z"), forced=-1)


def test_bell_stabilizers_deterministic():
    s = LogicalState(2)
    s.prepare(0, "+")
    s.prepare(1, "+")
    s.measure_pauli(PauliMeasurement.from_label("ZZ"), forced=1)
    assert s.measure_pauli(PauliMeasurement.from_label("XX")) == 1
    assert s.measure_pauli(PauliMeasurement.from_label("ZZ")) == 1


def test_measure_idempotent():
    rng = np.random.default_rng(5)
    for seed in range(20):
        s = LogicalState(3, seed=seed)
        for q in range(3):
            s.prepare(q, "m")
        m = PauliMeasurement.from_label("XZY")
        o1 = s.measure_pauli(m)
        before = s.amps.copy()
        o2 = s.measure_pauli(m)
        assert o1 == o2
        assert np.allclose(before, s.amps)


def test_norm_preserved():
    s = LogicalState(4, seed=9)
    for q in range(4):
        s.prepare(q, "m", noise=NoiseSpec(0.5))
    s.apply_rotation(PauliRotation.from_label("XYZX", Angle.generic(0.37)))
    s.measure_pauli(PauliMeasurement.from_label("ZIIZ"))
    assert abs(s.norm() - 1.0) < 1e-10


def test_apply_rotation_pi2_on_plus():
    s = LogicalState(1)
    s.prepare(0, "+")
    s.apply_rotation(PauliRotation.from_label("Z", Angle.dyadic(1, 1)))
    minus = np.array([1, -1]) / np.sqrt(2)
    assert projective_distance(s.amps[:, None], minus[:, None]) < 1e-12


def test_apply_rotation_matches_dense():
    rng = np.random.default_rng(21)
    for _ in range(30):
        n = int(rng.integers(1, 4))
        s = LogicalState(n, seed=int(rng.integers(1 << 30)))
        for q in range(n):
            s.prepare(q, "m")
        axis = PauliString(
            rng.integers(0, 2, n, dtype=np.uint8), rng.integers(0, 2, n, dtype=np.uint8)
        )
        r = PauliRotation(axis, Angle.generic(float(rng.normal())))
        expect = rotation_unitary(r) @ s.amps
        s.apply_rotation(r)
        assert np.max(np.abs(s.amps - expect)) < 1e-12


def _random_states(n, count, seed):
    rng = np.random.default_rng(seed)
    for _ in range(count):
        v = rng.normal(size=1 << n) + 1j * rng.normal(size=1 << n)
        yield v / np.linalg.norm(v)


def _check_program_equals(axis_label, angle, build, n_extra, branch_keys, states=12):
    """Every forced branch of the program must equal the target rotation."""
    axis = PauliString.from_label(axis_label)
    nd = axis.n
    n = nd + n_extra
    target = rotation_unitary(PauliRotation(axis, angle), max_qubits=6)
    for forced_bits in itertools.product([1, -1], repeat=len(branch_keys)):
        forced = dict(zip(branch_keys, forced_bits))
        checked = 0
        for psi in _random_states(nd, states, seed=hash((forced_bits, axis_label)) % (1 << 30)):
            s = LogicalState(n, seed=1)
            s.amps = np.kron(psi, _basis_zero(n - nd))
            s.fresh = [False] * nd + [True] * (n - nd)
            try:
                run_measurement_program(s, build(axis, n), forced=forced)
            except SimulationError:
                break  # branch unreachable for this forcing pattern
            out = s.amps.reshape(1 << nd, 1 << (n - nd))[:, 0]
            out = out / np.linalg.norm(out)
            got = out[:, None]
            want = (target @ psi)[:, None]
            assert projective_distance(got, want) < 1e-9
            checked += 1
        # either the branch was unreachable from the first state or all passed
        assert checked in (0, states)


def _basis_zero(k):
    v = np.zeros(1 << k)
    v[0] = 1.0
    return v


def test_magic_rotation_program_all_branches():
    def build(axis, n):
        return magic_rotation_program(axis.__class__.from_letters(
            {q: axis.letter(q) for q in range(axis.n)}, n), m=n - 1)

    _check_program_equals("Z", Angle.dyadic(1, 3), build, 1, ["pz", "x"])
    _check_program_equals("XZ", Angle.dyadic(1, 3), build, 1, ["pz", "x"])
    _check_program_equals("Y", Angle.dyadic(1, 3), build, 1, ["pz", "x"])


def test_explicit_quarter_program_all_branches():
    def build(axis, n):
        return explicit_quarter_program(axis.__class__.from_letters(
            {q: axis.letter(q) for q in range(axis.n)}, n), c=n - 1)

    _check_program_equals("Z", Angle.dyadic(1, 2), build, 1, ["py", "xc"])
    _check_program_equals("YX", Angle.dyadic(1, 2), build, 1, ["py", "xc"])


def test_selective_quarter_program_both_modes():
    def build_on(axis, n):
        return selective_quarter_program(axis.__class__.from_letters(
            {q: axis.letter(q) for q in range(axis.n)}, n), c=n - 1, perform=True)

    def build_off(axis, n):
        return selective_quarter_program(axis.__class__.from_letters(
            {q: axis.letter(q) for q in range(axis.n)}, n), c=n - 1, perform=False)

    _check_program_equals("XZ", Angle.dyadic(1, 2), build_on, 1, ["py", "xc"])
    _check_program_equals("XZ", Angle.dyadic(0, 0), build_off, 1, ["py", "zc"])


def test_auto_corrected_program_all_branches():
    def build(axis, n):
        return auto_corrected_rotation_program(axis.__class__.from_letters(
            {q: axis.letter(q) for q in range(axis.n)}, n), m=n - 2, c=n - 1)

    _check_program_equals("Z", Angle.dyadic(1, 3), build, 2, ["a", "b", "x", "zc", "xc"])
    _check_program_equals("ZX", Angle.dyadic(1, 3), build, 2, ["a", "b", "x", "zc", "xc"])


def test_post_corrected_program_both_signs():
    for want in (1, -1):
        def build(axis, n, want=want):
            return post_corrected_rotation_program(axis.__class__.from_letters(
                {q: axis.letter(q) for q in range(axis.n)}, n), m=n - 2, c=n - 1, want=want)

        _check_program_equals("XY", Angle.dyadic(want, 3), build, 2,
                              ["b0", "a", "x", "zc", "xc"])


def test_cascade_program_pi8():
    def build(axis, n):
        full = axis.__class__.from_letters(
            {q: axis.letter(q) for q in range(axis.n)}, n)
        return cascade_rotation_program(full, [n - 3, n - 2, n - 1], Angle.dyadic(1, 3))

    keys = ["s0", "s1", "s2", "disc1", "disc2", "disc3"]
    # enumerate only the escalation outcomes; discards sampled freely
    axis = PauliString.from_label("ZX")
    target = rotation_unitary(PauliRotation(axis, Angle.dyadic(1, 3)))
    for s0 in (1, -1):
        for s1 in (1, -1):
            for s2 in (1, -1):
                forced = {"s0": s0, "s1": s1, "s2": s2}
                for psi in _random_states(2, 8, seed=abs(s0 * 9 + s1 * 3 + s2)):
                    s = LogicalState(5, seed=2)
                    s.amps = np.kron(psi, _basis_zero(3))
                    s.fresh = [False, False, True, True, True]
                    try:
                        run_measurement_program(s, build(axis, 5), forced=forced)
                    except SimulationError:
                        break
                    out = s.amps.reshape(4, 8)[:, 0]
                    out /= np.linalg.norm(out)
                    assert projective_distance(out[:, None], (target @ psi)[:, None]) < 1e-9


def test_multi_pauli_controlled_is_cnot():
    p1 = PauliString.from_label("ZI")
    p2 = PauliString.from_label("IX")
    u = np.eye(4)
    for r in multi_pauli_controlled(p1, p2):
        u = rotation_unitary(r) @ u
    cnot = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)
    assert projective_distance(u, cnot) < 1e-12


def test_dangling_outcome_reference():
    from patchcode.sim import Cond, Apply

    s = LogicalState(1)
    steps = [Cond.eq("nope", 1, [Apply(PauliString.from_label("X"))])]
    with pytest.raises(SimulationError):
        run_measurement_program(s, steps)


def test_empty_program():
    s = LogicalState(1)
    t = run_measurement_program(s, [])
    assert t.outcomes == {}


# -- Monte Carlo -------------------------------------------------------


def _circuit_15to1():
    from patchcode.distill import registry

    return registry()["15-to-1"].simulation_circuit()


def test_wilson_interval_degenerate():
    lo, hi = wilson_interval(0, 1000)
    assert lo < 1e-12 and hi < 0.005
    lo, hi = wilson_interval(1000, 1000)
    assert hi > 1 - 1e-12 and lo > 0.995


def test_distill_p0():
    circ = _circuit_15to1()
    res = distill_monte_carlo(circ, p=0.0, trials=2000, seed=3)
    assert res.accepted == res.trials
    assert res.output_errors == 0


def test_distill_acceptance_smoke():
    circ = _circuit_15to1()
    res = distill_monte_carlo(circ, p=0.01, trials=200_000, seed=5)
    expect = (1 - 0.01) ** 15
    sigma = math.sqrt(expect * (1 - expect) / res.trials)
    assert abs(res.acceptance - expect) < 4 * sigma
    assert res.acceptance_ci[0] < expect < res.acceptance_ci[1]
