"""Small logical-level state-vector simulator.

Ground-truth oracle for circuit transpilation, board protocols and
distillation fidelity.  Qubit 0 is the most significant bit of the
amplitude index, matching the Kronecker convention in :mod:`.pauli`.

State preparation labels:

  ``0``     computational zero
  ``+``     X eigenstate
  ``Y``     |0> + i|1>
  ``m``     |0> + exp(i pi/4)|1>   (pi/8-rotation resource)
  ``mbar``  |0> + exp(-i pi/4)|1>
  ``phi``   |0> + exp(2 i phi)|1>  (takes an angle argument)

Preparing anything other than ``0``/``+`` is noisy: with probability p a
random Pauli spoils the qubit.  The Monte-Carlo distillation engine uses
a dephasing error channel instead (each resource use is Z-flipped with
probability p); the closed-form acceptance and output-error targets hold
only for that channel, see NoiseSpec.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .pauli import Angle, PauliMeasurement, PauliRotation, PauliString, CapacityError

_H = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)


def _phase_diag(angle: float) -> np.ndarray:
    return np.array([[1, 0], [0, np.exp(1j * angle)]], dtype=complex)


_LABEL_UNITARY = {
    "0": np.eye(2, dtype=complex),
    "+": _H,
    "Y": _phase_diag(math.pi / 2) @ _H,
    "m": _phase_diag(math.pi / 4) @ _H,
    "mbar": _phase_diag(-math.pi / 4) @ _H,
}

NOISELESS_LABELS = ("0", "+")


@dataclass(frozen=True)
class NoiseSpec:
    """Injected-state error model.

    ``uniform``: with probability p apply a uniformly random non-identity
    Pauli to the prepared qubit (the framework's raw injection model).
    ``dephasing``: with probability p apply Z.  The distillation
    acceptance (1-p)^n and the leading-order output-error polynomials are
    exact only under dephasing; uniform injections produce coherent
    quarter-rotation errors that the checks catch only half the time.
    """

    p: float = 0.0
    kind: str = "uniform"

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise ValueError("noise probability must be in [0, 1]")
        if self.kind not in ("uniform", "dephasing"):
            raise ValueError(f"unknown noise kind {self.kind!r}")


class SimulationError(RuntimeError):
    pass


class LogicalState:
    """Dense n-qubit state with Born-rule Pauli measurements."""

    def __init__(self, n: int, seed: int | None = 0, max_qubits: int = 14):
        if n < 1:
            raise ValueError("need at least one qubit")
        if n > max_qubits:
            raise CapacityError(f"{n} qubits exceeds simulator bound {max_qubits}")
        self.n = n
        self.amps = np.zeros(1 << n, dtype=complex)
        self.amps[0] = 1.0
        self.fresh = [True] * n
        self.rng = np.random.Generator(np.random.Philox(key=seed or 0))
        self.seed = seed

    # -- helpers --------------------------------------------------------

    def copy(self) -> "LogicalState":
        out = LogicalState.__new__(LogicalState)
        out.n = self.n
        out.amps = self.amps.copy()
        out.fresh = list(self.fresh)
        out.rng = self.rng
        out.seed = self.seed
        return out

    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))

    def _bitmask(self, qubit: int) -> int:
        return 1 << (self.n - 1 - qubit)

    def _apply_1q(self, qubit: int, u: np.ndarray) -> None:
        a = self.amps.reshape(1 << qubit, 2, -1)
        self.amps = np.einsum("ij,ajb->aib", u, a).reshape(-1)

    def _pauli_vec(self, p: PauliString) -> np.ndarray:
        """Return P|psi> without forming a dense matrix."""
        if p.n != self.n:
            raise SimulationError(f"operator on {p.n} qubits, state has {self.n}")
        xmask = 0
        zmask = 0
        for q in range(self.n):
            if p.x[q]:
                xmask |= self._bitmask(q)
            if p.z[q]:
                zmask |= self._bitmask(q)
        idx = np.arange(1 << self.n)
        par = _parity(idx & zmask)
        # normal form P = i^(e + sum x.z) X^x Z^z
        g = (p.e + int((p.x.astype(int) * p.z.astype(int)).sum())) % 4
        out = np.empty_like(self.amps)
        out[idx ^ xmask] = (1j**g) * np.where(par, -1.0, 1.0) * self.amps
        return out

    # -- operations ------------------------------------------------------

    def prepare(self, qubit: int, label: str, noise: NoiseSpec | None = None,
                angle: Angle | None = None) -> None:
        """Initialize a fresh qubit in a labeled state (rule set I)."""
        if not self.fresh[qubit]:
            raise SimulationError(f"qubit {qubit} already in use")
        if label == "phi":
            if angle is None:
                raise ValueError("phi preparation needs an angle")
            u = _phase_diag(2.0 * angle.radians()) @ _H
        else:
            try:
                u = _LABEL_UNITARY[label]
            except KeyError:
                raise ValueError(f"unknown state label {label!r}") from None
        self._apply_1q(qubit, u)
        self.fresh[qubit] = False
        if noise is not None and noise.p > 0 and label not in NOISELESS_LABELS:
            if self.rng.random() < noise.p:
                if noise.kind == "dephasing":
                    letter = "Z"
                else:
                    letter = self.rng.choice(["X", "Y", "Z"])
                self.apply_pauli(PauliString.single(self.n, qubit, str(letter)))

    def apply_pauli(self, p: PauliString) -> None:
        self.amps = self._pauli_vec(p)

    def apply_rotation(self, r: PauliRotation) -> None:
        """Multiply by exp(-i P phi); sparse, no dense matrix."""
        phi = r.angle.radians()
        if phi == 0.0:
            return
        pv = self._pauli_vec(r.axis)
        self.amps = math.cos(phi) * self.amps - 1j * math.sin(phi) * pv

    def measure_pauli(self, m: PauliMeasurement, forced: int | None = None,
                      atol: float = 1e-12) -> int:
        """Measure a Pauli product; returns the +-1 outcome and projects."""
        pv = self._pauli_vec(m.basis)
        plus = 0.5 * (self.amps + pv)
        p_plus = float(np.vdot(plus, plus).real)
        p_plus = min(max(p_plus, 0.0), 1.0)
        if forced is not None:
            prob = p_plus if forced == 1 else 1.0 - p_plus
            if prob <= atol:
                raise SimulationError(
                    f"cannot force outcome {forced:+d} of {m.basis.label()}: probability {prob:.3e}"
                )
            outcome = forced
        else:
            outcome = 1 if self.rng.random() < p_plus else -1
        proj = plus if outcome == 1 else 0.5 * (self.amps - pv)
        self.amps = proj / np.linalg.norm(proj)
        return outcome

    def discard(self, qubit: int, basis: str, forced: int | None = None) -> int:
        """Single-qubit X/Z readout; frees the qubit and resets it to |0>."""
        meas = PauliMeasurement(PauliString.single(self.n, qubit, basis))
        outcome = self.measure_pauli(meas, forced=forced)
        # rotate the (now product) factor back to |0> so the slot is reusable
        x_mat = np.array([[0, 1], [1, 0]], dtype=complex)
        if basis == "Z":
            if outcome == -1:
                self._apply_1q(qubit, x_mat)
        elif basis == "X":
            self._apply_1q(qubit, _H if outcome == 1 else x_mat @ _H)
        else:
            raise ValueError("discard basis must be X or Z")
        self.fresh[qubit] = True
        return outcome

    def fidelity_with(self, other_amps: np.ndarray) -> float:
        return float(abs(np.vdot(other_amps, self.amps)) ** 2)


def _parity(v: np.ndarray) -> np.ndarray:
    v = v.copy()
    shift = 32
    while shift:
        v ^= v >> shift
        shift //= 2
    return (v & 1).astype(bool)


# ---------------------------------------------------------------------------
# Measurement programs
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Prepare:
    qubit: int
    label: str
    angle: Angle | None = None


@dataclass(frozen=True)
class Measure:
    key: str
    basis: PauliMeasurement
    forced: int | None = None


@dataclass(frozen=True)
class Discard:
    key: str
    qubit: int
    basis: str
    forced: int | None = None


@dataclass(frozen=True)
class Rotate:
    rotation: PauliRotation


@dataclass(frozen=True)
class Apply:
    pauli: PauliString


@dataclass(frozen=True)
class Cond:
    """Run ``steps`` when a predicate over earlier outcomes holds.

    ``pred`` is ("eq", key, value) or ("parity", (key, ...), value) where
    the parity of +-1 outcomes is their product.
    """

    pred: tuple
    steps: tuple

    @classmethod
    def eq(cls, key: str, value: int, steps) -> "Cond":
        return cls(("eq", key, value), tuple(steps))

    @classmethod
    def parity(cls, keys, value: int, steps) -> "Cond":
        return cls(("parity", tuple(keys), value), tuple(steps))


Step = Prepare | Measure | Discard | Rotate | Apply | Cond


@dataclass
class Transcript:
    outcomes: dict = field(default_factory=dict)
    seed: int | None = None

    def to_json(self):
        return {"outcomes": dict(self.outcomes), "seed": self.seed}


def run_measurement_program(state: LogicalState, steps, noise: NoiseSpec | None = None,
                            forced: dict | None = None) -> Transcript:
    """Execute prepare/measure/conditional steps against a state in place.

    ``forced`` maps outcome keys to +-1 to pin measurement branches for
    deterministic verification.
    """
    transcript = Transcript(seed=state.seed)
    forced = forced or {}

    def eval_pred(pred) -> bool:
        if pred[0] == "eq":
            _, key, value = pred
            if key not in transcript.outcomes:
                raise SimulationError(f"condition references unknown outcome {key!r}")
            return transcript.outcomes[key] == value
        if pred[0] == "parity":
            _, keys, value = pred
            prod = 1
            for key in keys:
                if key not in transcript.outcomes:
                    raise SimulationError(f"condition references unknown outcome {key!r}")
                prod *= transcript.outcomes[key]
            return prod == value
        raise SimulationError(f"unknown predicate {pred!r}")

    def run(seq):
        for step in seq:
            if isinstance(step, Prepare):
                state.prepare(step.qubit, step.label, noise=noise, angle=step.angle)
            elif isinstance(step, Measure):
                f = forced.get(step.key, step.forced)
                transcript.outcomes[step.key] = state.measure_pauli(step.basis, forced=f)
            elif isinstance(step, Discard):
                f = forced.get(step.key, step.forced)
                transcript.outcomes[step.key] = state.discard(step.qubit, step.basis, forced=f)
            elif isinstance(step, Rotate):
                state.apply_rotation(step.rotation)
            elif isinstance(step, Apply):
                state.apply_pauli(step.pauli)
            elif isinstance(step, Cond):
                if eval_pred(step.pred):
                    run(step.steps)
            else:
                raise SimulationError(f"unknown step {step!r}")

    run(steps)
    return transcript


# -- gadget builders ---------------------------------------------------------
#
# These return step lists realizing a target rotation on data qubits via
# resource-state consumption, with every Pauli/Clifford correction spelled
# out so that each outcome branch reproduces the target exactly.


def _embed(p: PauliString, n: int, extra: dict[int, str] | None = None) -> PauliString:
    letters = {q: p.letter(q) for q in range(p.n) if p.letter(q) != "I"}
    if extra:
        letters.update(extra)
    return PauliString.from_letters(letters, n, e=p.e)


def magic_rotation_program(axis: PauliString, m: int, tag: str = "") -> list:
    """P_{pi/8} by consuming |m> on qubit ``m`` (basic consumption gadget).

    Measures P (x) Z_m, applies the corrective quarter rotation on -1,
    then reads the resource out in X with a Pauli fix-up on -1.
    """
    n = axis.n
    pz = PauliMeasurement(_embed(axis, n, {m: "Z"}))
    full_axis = _embed(axis, n)
    return [
        Prepare(m, "m"),
        Measure(tag + "pz", pz),
        Cond.eq(tag + "pz", -1, [Rotate(PauliRotation(full_axis, Angle.dyadic(1, 2)))]),
        Discard(tag + "x", m, "X"),
        Cond.eq(tag + "x", -1, [Apply(full_axis)]),
    ]


def explicit_quarter_program(axis: PauliString, c: int, tag: str = "") -> list:
    """P_{pi/4} via a P (x) Y measurement against a |0> ancilla ``c``."""
    n = axis.n
    py = PauliMeasurement(_embed(axis, n, {c: "Y"}))
    full_axis = _embed(axis, n)
    return [
        Prepare(c, "0"),
        Measure(tag + "py", py),
        Discard(tag + "xc", c, "X"),
        # the applied rotation is P_{-py*xc*pi/4}; a Pauli fixes the wrong sign
        Cond.parity([tag + "py", tag + "xc"], 1, [Apply(full_axis)]),
    ]


def selective_quarter_program(axis: PauliString, c: int, perform: bool, tag: str = "") -> list:
    """P_{pi/4} or identity, chosen by the ancilla readout basis."""
    n = axis.n
    py = PauliMeasurement(_embed(axis, n, {c: "Y"}))
    full_axis = _embed(axis, n)
    steps = [Prepare(c, "0"), Measure(tag + "py", py)]
    if perform:
        steps += [
            Discard(tag + "xc", c, "X"),
            Cond.parity([tag + "py", tag + "xc"], 1, [Apply(full_axis)]),
        ]
    else:
        steps += [
            Discard(tag + "zc", c, "Z"),
            Cond.eq(tag + "zc", -1, [Apply(full_axis)]),
        ]
    return steps


def auto_corrected_rotation_program(axis: PauliString, m: int, c: int, tag: str = "") -> list:
    """P_{pi/8} with the Clifford correction folded into a basis choice.

    P (x) Z_m and Z_m (x) Y_c commute and are measured together; the
    correction qubit is then read out in Z (outcome +1 path) or X
    (outcome -1 path, enacting the quarter rotation).
    """
    n = axis.n
    pz = PauliMeasurement(_embed(axis, n, {m: "Z"}))
    zy = PauliMeasurement(PauliString.from_letters({m: "Z", c: "Y"}, n))
    full_axis = _embed(axis, n)
    a, b, x, zc, xc = (tag + k for k in ("a", "b", "x", "zc", "xc"))
    return [
        Prepare(m, "m"),
        Prepare(c, "0"),
        Measure(a, pz),
        Measure(b, zy),
        Discard(x, m, "X"),
        Cond.eq(x, -1, [Apply(full_axis)]),
        Cond.eq(a, 1, [
            Discard(zc, c, "Z"),
            Cond.eq(zc, -1, [Apply(full_axis)]),
        ]),
        Cond.eq(a, -1, [
            Discard(xc, c, "X"),
            # effective P(x)Y outcome is a*b = -b; extra rotation is
            # P_{-(a b) xc pi/4}; we need +pi/4, so b*xc = -1 succeeds
            Cond.parity([b, xc], -1, [Apply(full_axis)]),
        ]),
    ]


def post_corrected_rotation_program(axis: PauliString, m: int, c: int, want: int,
                                    tag: str = "") -> list:
    """P_{want * pi/8} using an |m>-|c> pair, sign decided at readout time.

    The pair is prepared (Z_m (x) Y_c measured), the data couples through
    P (x) Z_m, the magic state is read out in X, and only later is ``c``
    measured in Z or X to pin the rotation sign.
    """
    if want not in (1, -1):
        raise ValueError("want must be +-1")
    n = axis.n
    pz = PauliMeasurement(_embed(axis, n, {m: "Z"}))
    zy = PauliMeasurement(PauliString.from_letters({m: "Z", c: "Y"}, n))
    full_axis = _embed(axis, n)
    b0, a, x, zc, xc = (tag + k for k in ("b0", "a", "x", "zc", "xc"))
    return [
        # resource preparation
        Prepare(m, "m"),
        Prepare(c, "0"),
        Measure(b0, zy),
        # consumption
        Measure(a, pz),
        Discard(x, m, "X"),
        Cond.eq(x, -1, [Apply(full_axis)]),
        # deferred sign choice
        Cond.eq(a, want, [
            Discard(zc, c, "Z"),
            Cond.eq(zc, -1, [Apply(full_axis)]),
        ]),
        Cond.eq(a, -want, [
            Discard(xc, c, "X"),
            # the X readout swings the rotation by b0*xc quarters; the
            # wrong swing leaves a residual Pauli on either sign choice
            Cond.parity([b0, xc], -1, [Apply(full_axis)]),
        ]),
    ]


def cascade_rotation_program(axis: PauliString, resources: list[int],
                             angle: Angle, tag: str = "") -> list:
    """P_phi via a resource-state cascade |phi>, |2 phi>, |4 phi>, ...

    The resources are entangled with the data through a single
    P-controlled X-product Clifford, then read out in Z one at a time;
    outcome -1 escalates to the next (doubled-angle) resource.  Leftover
    resources are discarded in X with Pauli fix-ups.  For phi = pi/2^k a
    depth-k cascade terminates exactly.
    """
    n = axis.n
    full_axis = _embed(axis, n)
    phi = angle
    steps: list = []
    for j, r in enumerate(resources):
        a_j = phi
        for _ in range(j):
            a_j = a_j + a_j
        steps.append(Prepare(r, "phi", angle=a_j))
    x_all = _embed(PauliString.identity(n), n, {r: "X" for r in resources})
    controlled = multi_pauli_controlled(full_axis, x_all)
    steps.extend(Rotate(r) for r in controlled)

    def discard_rest(rest):
        out = []
        for r in rest:
            key = f"{tag}disc{r}"
            out.append(Discard(key, r, "X"))
            out.append(Cond.eq(key, -1, [Apply(full_axis)]))
        return out

    def cascade(j: int, acc_deficit: Angle):
        """acc_deficit = target - applied so far, in case of failure path."""
        r = resources[j]
        key = f"{tag}s{j}"
        success_steps = discard_rest(resources[j + 1:])
        fail_angle = acc_deficit  # informational; corrections are exact below
        out = [Discard(key, r, "Z")]
        out.append(Cond.eq(key, 1, success_steps))
        if j + 1 < len(resources):
            out.append(Cond.eq(key, -1, cascade(j + 1, fail_angle)))
        # deepest failure leaves P_{phi - pi}, a global phase off target
        return out

    steps.extend(cascade(0, angle))
    return steps


def multi_pauli_controlled(p1: PauliString, p2: PauliString) -> list[PauliRotation]:
    """C(P1, P2) as its three commuting quarter rotations."""
    return [
        PauliRotation(p1 * p2, Angle.dyadic(1, 2)),
        PauliRotation(p2, Angle.dyadic(-1, 2)),
        PauliRotation(p1, Angle.dyadic(-1, 2)),
    ]


# ---------------------------------------------------------------------------
# Distillation Monte Carlo
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DistillationCircuit:
    """Extracted rotation circuit in simulation form.

    ``initial`` holds one label per circuit qubit; ``rotations`` are the
    explicit Z-type rotations in execution order; ``checks`` are the
    X-readout qubits whose +1 outcomes gate acceptance; ``outputs`` are
    the distilled qubits.  ``resource_uses`` is the total number of noisy
    resource-state uses (initial non-Pauli states + consumed rotations).
    """

    name: str
    initial: tuple
    rotations: tuple
    checks: tuple
    outputs: tuple

    @property
    def qubits(self) -> int:
        return len(self.initial)

    @property
    def resource_uses(self) -> int:
        noisy_initial = sum(1 for lab in self.initial if lab not in NOISELESS_LABELS)
        return noisy_initial + len(self.rotations)


@dataclass
class MonteCarloResult:
    trials: int
    accepted: int
    output_errors: int
    seed: int
    acceptance: float = 0.0
    acceptance_ci: tuple = (0.0, 1.0)
    error_rate: float = 0.0
    error_ci: tuple = (0.0, 1.0)

    def finalize(self):
        self.acceptance = self.accepted / self.trials if self.trials else 0.0
        self.acceptance_ci = wilson_interval(self.accepted, self.trials)
        self.error_rate = self.output_errors / self.accepted if self.accepted else 0.0
        self.error_ci = wilson_interval(self.output_errors, self.accepted)
        return self

    def to_json(self):
        return {
            "trials": self.trials,
            "accepted": self.accepted,
            "output_errors": self.output_errors,
            "seed": self.seed,
            "acceptance": self.acceptance,
            "acceptance_ci": list(self.acceptance_ci),
            "error_rate": self.error_rate,
            "error_ci": list(self.error_ci),
        }


def wilson_interval(k: int, n: int, z: float = 1.959963984540054) -> tuple:
    """Wilson score interval for a binomial proportion."""
    if n == 0:
        return (0.0, 1.0)
    phat = k / n
    denom = 1 + z * z / n
    center = (phat + z * z / (2 * n)) / denom
    half = z * math.sqrt(phat * (1 - phat) / n + z * z / (4 * n * n)) / denom
    return (max(0.0, center - half), min(1.0, center + half))


def _ideal_final_state(circuit: DistillationCircuit) -> np.ndarray:
    state = LogicalState(circuit.qubits, seed=0)
    for q, lab in enumerate(circuit.initial):
        state.prepare(q, lab)
    for rot in circuit.rotations:
        state.apply_rotation(rot)
    return state.amps


def distill_monte_carlo(circuit: DistillationCircuit, p: float, trials: int,
                        seed: int = 0, batch: int = 1 << 16) -> MonteCarloResult:
    """Trajectory simulation of a distillation run with dephased resources.

    Every resource use (noisy initial state or consumed rotation state)
    independently suffers a Z flip with probability p.  Acceptance
    post-selects on all check qubits reading X=+1; the output error rate
    is the infidelity of the post-selected output register against the
    protocol's own noiseless output.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    nq = circuit.qubits
    if nq > 14:
        raise CapacityError(f"{nq} qubits exceeds simulator bound")
    if sorted(circuit.checks) + sorted(circuit.outputs) != sorted(
        list(circuit.checks) + list(circuit.outputs)
    ) or set(circuit.checks) | set(circuit.outputs) != set(range(nq)):
        raise ValueError("checks and outputs must partition the circuit qubits")
    dim = 1 << nq

    ideal = _ideal_final_state(circuit)

    # all error content commutes to the end as a Z pattern over qubits
    noisy_initial = [q for q, lab in enumerate(circuit.initial) if lab not in NOISELESS_LABELS]
    axes = np.array(
        [[int(r.axis.z[q]) for q in range(nq)] for r in circuit.rotations], dtype=np.int8
    )
    init_rows = np.zeros((len(noisy_initial), nq), dtype=np.int8)
    for i, q in enumerate(noisy_initial):
        init_rows[i, q] = 1
    gen = np.vstack([init_rows, axes]) if len(axes) else init_rows
    uses = gen.shape[0]
    assert uses == circuit.resource_uses

    checks = list(circuit.checks)
    order = checks + [q for q in range(nq) if q not in checks]
    ideal_p = ideal.reshape([2] * nq).transpose(order).reshape(-1)
    ncheck = len(checks)
    sub = 1 << (nq - ncheck)

    # noiseless output register (acceptance must be deterministic at p=0)
    chi0 = ideal_p.reshape(1 << ncheck, sub).sum(axis=0) / math.sqrt(1 << ncheck)
    n0 = np.linalg.norm(chi0)
    if abs(n0 - 1.0) > 1e-9:
        raise SimulationError(
            f"{circuit.name}: checks are not deterministic on the noiseless run "
            f"(projection norm {n0:.6f})"
        )
    ideal_out = chi0 / n0

    rng = np.random.Generator(np.random.Philox(key=seed))
    # Z patterns act per qubit; align generator columns with the permuted axes
    gen_p = gen[:, order]

    accepted = 0
    errors = 0
    done = 0
    bits = np.array([(np.arange(dim) >> (nq - 1 - i)) & 1 for i in range(nq)], dtype=np.int8)
    while done < trials:
        b = min(batch, trials - done)
        flips = rng.random((b, uses)) < p
        pattern = (flips.astype(np.int8) @ gen_p) % 2  # (b, nq) in permuted order
        par = (pattern @ bits) % 2  # (b, dim)
        states = ideal_p[None, :] * np.where(par.astype(bool), -1.0, 1.0)
        chi = states.reshape(b, 1 << ncheck, sub).sum(axis=1) / math.sqrt(1 << ncheck)
        p_acc = np.einsum("ij,ij->i", chi, chi.conj()).real
        u = rng.random(b)
        acc = u < p_acc
        nacc = int(acc.sum())
        if nacc:
            chi_acc = chi[acc]
            norms = np.sqrt(np.einsum("ij,ij->i", chi_acc, chi_acc.conj()).real)
            overlap = np.abs(chi_acc @ ideal_out.conj()) / norms
            fid = overlap**2
            err = rng.random(nacc) > fid
            errors += int(err.sum())
        accepted += nacc
        done += b
    return MonteCarloResult(trials=trials, accepted=accepted,
                            output_errors=errors, seed=seed).finalize()
