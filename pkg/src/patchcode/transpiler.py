"""Conversion of gate circuits to the canonical rotation form.

The canonical form is: layers of mutually commuting non-Clifford Pauli
rotations (|angle| < pi/4), followed by terminal Pauli product
measurements, with all Pauli- and Clifford-level content commuted into a
residual frame that is kept for auditing.  A greedy fixed-point pass
moves rotations into earlier layers whenever they commute with the whole
layer, merging equal axes by angle addition and expelling any resulting
Clifford-level rotation into the frame.

Text format, one element per line::

    qubits 3
    GATE h 0
    GATE cnot 0 1
    ROT +ZIX 1/8
    CPAULI ZI IX          # controlled Pauli C(P1, ..., Pm)
    MEAS -ZZI

Rotation fractions are dyadic (odd/2^k times pi) or a float in radians.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .pauli import (
    Angle,
    CapacityError,
    PauliMeasurement,
    PauliRotation,
    PauliString,
    commutes,
    conjugate_through_rotation,
    projective_distance,
    rotation_unitary,
)

CANONICAL_FORMAT = "patchcode.canonical/1"


class TranspileError(ValueError):
    pass


@dataclass(frozen=True)
class NamedGate:
    name: str
    targets: tuple

    def __post_init__(self):
        if self.name.lower() not in _NAMED_ARITY:
            raise TranspileError(f"unknown gate name {self.name!r}")
        if len(self.targets) != _NAMED_ARITY[self.name.lower()]:
            raise TranspileError(
                f"{self.name} expects {_NAMED_ARITY[self.name.lower()]} targets"
            )


@dataclass(frozen=True)
class ControlledPauli:
    """C(P1, ..., Pm): joint -1 eigenspaces of the listed Paulis get a sign."""

    paulis: tuple

    def __post_init__(self):
        if len(self.paulis) < 2:
            raise TranspileError("controlled gate needs at least two Pauli operators")
        supports = [set(p.support()) for p in self.paulis]
        for i in range(len(supports)):
            for j in range(i + 1, len(supports)):
                if supports[i] & supports[j]:
                    raise TranspileError("controlled-Pauli operands must not overlap")


GateElement = PauliRotation | PauliMeasurement | NamedGate | ControlledPauli

_NAMED_ARITY = {
    "h": 1, "s": 1, "sdg": 1, "t": 1, "tdg": 1,
    "x": 1, "y": 1, "z": 1,
    "cnot": 2, "cx": 2, "cz": 2,
    "toffoli": 3, "ccx": 3, "ccz": 3,
}


@dataclass
class GateCircuit:
    n: int
    elements: list = field(default_factory=list)

    def append(self, element: GateElement) -> None:
        for p in _element_paulis(element):
            if p.n != self.n:
                raise TranspileError(
                    f"element acts on {p.n} qubits, circuit has {self.n}"
                )
        if isinstance(element, NamedGate) and any(
            t < 0 or t >= self.n for t in element.targets
        ):
            raise TranspileError(f"targets {element.targets} outside 0..{self.n - 1}")
        self.elements.append(element)


def _element_paulis(element: GateElement) -> list[PauliString]:
    if isinstance(element, PauliRotation):
        return [element.axis]
    if isinstance(element, PauliMeasurement):
        return [element.basis]
    if isinstance(element, ControlledPauli):
        return list(element.paulis)
    return []


# ---------------------------------------------------------------------------
# Gate decompositions
# ---------------------------------------------------------------------------


def named_gate_to_rotations(gate: NamedGate, n: int) -> list[PauliRotation]:
    """Rotation sequence (in application order) equal to the gate up to phase."""
    name = gate.name.lower()
    t = gate.targets

    def rot(letters: dict, num: int, k: int) -> PauliRotation:
        return PauliRotation(PauliString.from_letters(letters, n), Angle.dyadic(num, k))

    if name == "s":
        return [rot({t[0]: "Z"}, 1, 2)]
    if name == "sdg":
        return [rot({t[0]: "Z"}, -1, 2)]
    if name == "t":
        return [rot({t[0]: "Z"}, 1, 3)]
    if name == "tdg":
        return [rot({t[0]: "Z"}, -1, 3)]
    if name == "h":
        return [rot({t[0]: "Z"}, 1, 2), rot({t[0]: "X"}, 1, 2), rot({t[0]: "Z"}, 1, 2)]
    if name in ("x", "y", "z"):
        return [rot({t[0]: name.upper()}, 1, 1)]
    if name in ("cnot", "cx"):
        return [
            rot({t[0]: "Z", t[1]: "X"}, 1, 2),
            rot({t[1]: "X"}, -1, 2),
            rot({t[0]: "Z"}, -1, 2),
        ]
    if name == "cz":
        return [
            rot({t[0]: "Z", t[1]: "Z"}, 1, 2),
            rot({t[1]: "Z"}, -1, 2),
            rot({t[0]: "Z"}, -1, 2),
        ]
    if name in ("toffoli", "ccx", "ccz"):
        last = "X" if name in ("toffoli", "ccx") else "Z"
        paulis = [
            PauliString.single(n, t[0], "Z"),
            PauliString.single(n, t[1], "Z"),
            PauliString.single(n, t[2], last),
        ]
        return multi_controlled_to_rotations(paulis)
    raise TranspileError(f"unknown gate name {gate.name!r}")


def multi_controlled_to_rotations(paulis: list[PauliString]) -> list[PauliRotation]:
    """C(P1, ..., Pm) as 2^m - 1 rotations of magnitude pi/2^m.

    One rotation per non-empty subset S, axis the product of the chosen
    operators, angle (-1)^|S| pi/2^m.  All axes mutually commute, so the
    rotation depth of the gate is one.
    """
    m = len(paulis)
    if m < 2:
        raise TranspileError("need at least two Pauli operators")
    gate = ControlledPauli(tuple(paulis))  # validates disjoint supports
    out = []
    for mask in range(1, 1 << m):
        axis = None
        for i in range(m):
            if mask >> i & 1:
                axis = paulis[i] if axis is None else axis * paulis[i]
        sign = 1 if bin(mask).count("1") % 2 == 0 else -1
        out.append(PauliRotation(axis, Angle.dyadic(sign, m)))
    return out


# ---------------------------------------------------------------------------
# Canonical circuits
# ---------------------------------------------------------------------------


@dataclass
class CanonicalCircuit:
    """Rotation layers + terminal measurements + residual Clifford frame."""

    n: int
    layers: list = field(default_factory=list)  # list[list[PauliRotation]]
    measurements: list = field(default_factory=list)
    frame: list = field(default_factory=list)  # applied after the layers, in order

    def rotations(self):
        for layer in self.layers:
            yield from layer

    def validate(self) -> None:
        for layer in self.layers:
            if not layer:
                raise TranspileError("empty layer")
            for i in range(len(layer)):
                if layer[i].angle.is_dyadic and layer[i].angle.k < 3:
                    raise TranspileError("Clifford-level rotation left in a layer")
                for j in range(i + 1, len(layer)):
                    if not commutes(layer[i].axis, layer[j].axis):
                        raise TranspileError("non-commuting rotations share a layer")
                    if layer[i].axis.same_axis(layer[j].axis):
                        raise TranspileError("duplicate axis in a layer")

    def to_unitary(self, max_qubits: int = 6) -> np.ndarray:
        if self.n > max_qubits:
            raise CapacityError(f"{self.n} qubits exceeds dense bound {max_qubits}")
        u = np.eye(1 << self.n, dtype=complex)
        for layer in self.layers:
            for r in layer:
                u = rotation_unitary(r, max_qubits) @ u
        for f in self.frame:
            u = rotation_unitary(f, max_qubits) @ u
        return u

    def to_json(self) -> dict:
        return {
            "format": CANONICAL_FORMAT,
            "qubits": self.n,
            "layers": [[r.to_json() for r in layer] for layer in self.layers],
            "measurements": [m.to_json() for m in self.measurements],
            "clifford_frame": [f.to_json() for f in self.frame],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "CanonicalCircuit":
        if obj.get("format") != CANONICAL_FORMAT:
            raise TranspileError(f"unsupported format {obj.get('format')!r}")
        return cls(
            n=obj["qubits"],
            layers=[[PauliRotation.from_json(r) for r in layer] for layer in obj["layers"]],
            measurements=[PauliMeasurement.from_json(m) for m in obj["measurements"]],
            frame=[PauliRotation.from_json(f) for f in obj["clifford_frame"]],
        )


def push_clifford_right(circuit: GateCircuit) -> CanonicalCircuit:
    """Commute all Clifford-level content to the end of the circuit.

    A quarter rotation moved right past P'_phi leaves the axis alone when
    the axes commute and otherwise maps P' -> i P P'.  Terminal Z (or any
    Pauli) measurements absorb the frame, becoming Pauli product
    measurements.  Measurements must be terminal.
    """
    out = CanonicalCircuit(n=circuit.n)
    seen_measurement = False

    def conj_through_frame(p: PauliString) -> PauliString:
        for f in reversed(out.frame):
            p = conjugate_through_rotation(f, p)
        return p

    def process_rotation(r: PauliRotation) -> None:
        ang = r.angle
        if ang.is_zero:
            return
        if ang.is_dyadic and ang.k >= 3:
            half = 1 << (ang.k - 2)
            rem = ang.num % (2 * half)
            if rem > half:
                rem -= 2 * half
            quarters = (ang.num - rem) // half
            if quarters:
                process_rotation(PauliRotation(r.axis, Angle.dyadic(quarters, 2)))
            ang = Angle.dyadic(rem, ang.k)
            if ang.is_zero:
                return
        if ang.is_clifford_level():
            axis = r.axis if r.axis.e == 0 else -r.axis
            signed = PauliRotation(r.axis, ang)
            out.frame.append(signed)
            return
        axis = conj_through_frame(r.axis)
        place_rotation(PauliRotation(axis, ang))

    def place_rotation(r: PauliRotation) -> None:
        if out.layers:
            layer = out.layers[-1]
            if all(commutes(r.axis, other.axis) for other in layer):
                merge_into(layer, r)
                if not layer:
                    out.layers.pop()
                return
        out.layers.append([r])

    def merge_into(layer: list, r: PauliRotation) -> None:
        for i, other in enumerate(layer):
            if other.axis.same_axis(r.axis):
                summed = other.angle + r.angle
                del layer[i]
                if summed.is_zero:
                    return
                merged = PauliRotation(other.axis, summed)
                if summed.is_dyadic and summed.k < 3:
                    out.frame.append(merged)
                else:
                    layer.append(merged)
                return
        layer.append(r)

    for element in circuit.elements:
        if isinstance(element, PauliMeasurement):
            basis = conj_through_frame(element.basis)
            out.measurements.append(PauliMeasurement(basis))
            seen_measurement = True
            continue
        if seen_measurement:
            raise TranspileError("gates after a measurement are not supported")
        if isinstance(element, PauliRotation):
            process_rotation(element)
        elif isinstance(element, NamedGate):
            for r in named_gate_to_rotations(element, circuit.n):
                process_rotation(r)
        elif isinstance(element, ControlledPauli):
            for r in multi_controlled_to_rotations(list(element.paulis)):
                process_rotation(r)
        else:
            raise TranspileError(f"unsupported element {element!r}")
    return out


def compress_layers(circuit: CanonicalCircuit) -> CanonicalCircuit:
    """Greedy fixed point: pull rotations into earlier commuting layers.

    Repeatedly moves rotation j from layer i+1 to layer i when it
    commutes with everything in layer i.  Equal axes merge by angle
    addition; a merged Clifford-level rotation is commuted through the
    remaining layers into the frame.  The layer count never increases.
    """
    layers = [list(layer) for layer in circuit.layers]
    frame = list(circuit.frame)

    def expel_clifford(c: PauliRotation, from_index: int) -> None:
        for layer in layers[from_index:]:
            for idx, r in enumerate(layer):
                axis = conjugate_through_rotation(c, r.axis)
                layer[idx] = PauliRotation(axis, r.angle)
        frame.insert(0, c)

    changed = True
    while changed:
        changed = False
        i = 0
        while i + 1 < len(layers):
            target, source = layers[i], layers[i + 1]
            for r in list(source):
                if not all(commutes(r.axis, o.axis) for o in target):
                    continue
                source.remove(r)
                changed = True
                for j, other in enumerate(target):
                    if other.axis.same_axis(r.axis):
                        summed = other.angle + r.angle
                        del target[j]
                        if summed.is_zero:
                            break
                        merged = PauliRotation(other.axis, summed)
                        if summed.is_dyadic and summed.k < 3:
                            expel_clifford(merged, i + 1)
                        else:
                            target.append(merged)
                        break
                else:
                    target.append(r)
            if not source:
                del layers[i + 1]
            else:
                i += 1
        layers = [l for l in layers if l]
    out = CanonicalCircuit(n=circuit.n, layers=layers,
                           measurements=list(circuit.measurements), frame=frame)
    out.validate()
    return out


def transpile(circuit: GateCircuit) -> CanonicalCircuit:
    return compress_layers(push_clifford_right(circuit))


def metrics(circuit: CanonicalCircuit) -> dict:
    """T count/depth and rotation count/depth of a canonical circuit."""
    t_count = 0
    t_depth = 0
    rotation_count = 0
    for layer in circuit.layers:
        has_t = False
        for r in layer:
            rotation_count += 1
            if r.angle.is_dyadic and r.angle.k == 3:
                t_count += 1
                has_t = True
        t_depth += has_t
    return {
        "t_count": t_count,
        "t_depth": t_depth,
        "rotation_count": rotation_count,
        "rotation_depth": len(circuit.layers),
    }


# ---------------------------------------------------------------------------
# Dense oracle (independent of the rotation path)
# ---------------------------------------------------------------------------

_DENSE = {
    "h": np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2),
    "s": np.diag([1, 1j]).astype(complex),
    "sdg": np.diag([1, -1j]).astype(complex),
    "t": np.diag([1, np.exp(1j * math.pi / 4)]),
    "tdg": np.diag([1, np.exp(-1j * math.pi / 4)]),
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.diag([1, -1]).astype(complex),
}


def _embed(u: np.ndarray, targets: tuple, n: int) -> np.ndarray:
    k = len(targets)
    full = np.zeros((1 << n, 1 << n), dtype=complex)
    rest = [q for q in range(n) if q not in targets]
    for col in range(1 << n):
        tbits = sum(((col >> (n - 1 - q)) & 1) << (k - 1 - i) for i, q in enumerate(targets))
        base = col
        for i, q in enumerate(targets):
            base &= ~(1 << (n - 1 - q))
        for row_t in range(1 << k):
            amp = u[row_t, tbits]
            if amp == 0:
                continue
            row = base
            for i, q in enumerate(targets):
                if (row_t >> (k - 1 - i)) & 1:
                    row |= 1 << (n - 1 - q)
            full[row, col] += amp
    return full


def element_unitary(element: GateElement, n: int, max_qubits: int = 6) -> np.ndarray:
    if n > max_qubits:
        raise CapacityError(f"{n} qubits exceeds dense bound {max_qubits}")
    if isinstance(element, PauliRotation):
        return rotation_unitary(element, max_qubits)
    if isinstance(element, NamedGate):
        name = element.name.lower()
        if name in _DENSE:
            return _embed(_DENSE[name], element.targets, n)
        if name in ("cnot", "cx"):
            cnot = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]],
                            dtype=complex)
            return _embed(cnot, element.targets, n)
        if name == "cz":
            return _embed(np.diag([1, 1, 1, -1]).astype(complex), element.targets, n)
        if name in ("toffoli", "ccx", "ccz"):
            last = _DENSE["x"] if name != "ccz" else _DENSE["z"]
            u = np.eye(8, dtype=complex)
            u[6:, 6:] = last
            return _embed(u, element.targets, n)
        raise TranspileError(f"no dense form for {element.name!r}")
    if isinstance(element, ControlledPauli):
        # phase -1 exactly on the joint -1 eigenspace of all operators
        proj = np.eye(1 << n, dtype=complex)
        for p in element.paulis:
            proj = proj @ (np.eye(1 << n) - p.to_matrix(max_qubits)) / 2
        return np.eye(1 << n) - 2 * proj
    raise TranspileError(f"no dense form for {element!r}")


def circuit_unitary(circuit: GateCircuit, max_qubits: int = 6) -> np.ndarray:
    """Dense product of the circuit's gate elements (measurements excluded)."""
    u = np.eye(1 << circuit.n, dtype=complex)
    for element in circuit.elements:
        if isinstance(element, PauliMeasurement):
            continue
        u = element_unitary(element, circuit.n, max_qubits) @ u
    return u


def verify_equivalence(circuit: GateCircuit, canonical: CanonicalCircuit,
                       max_qubits: int = 5, atol: float = 1e-9) -> float:
    """Projective distance between a circuit and its canonical form."""
    d = projective_distance(circuit_unitary(circuit, max_qubits),
                            canonical.to_unitary(max_qubits))
    if d > atol:
        raise TranspileError(f"canonical form deviates by {d:.3e}")
    return d


# ---------------------------------------------------------------------------
# Text format
# ---------------------------------------------------------------------------


def parse_circuit(text: str) -> GateCircuit:
    circuit = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        try:
            if parts[0] == "qubits":
                if circuit is not None:
                    raise TranspileError("duplicate qubits line")
                circuit = GateCircuit(n=int(parts[1]))
                continue
            if circuit is None:
                raise TranspileError("first line must declare qubits")
            if parts[0] == "ROT":
                axis = PauliString.from_label(parts[1])
                circuit.append(PauliRotation(axis, _parse_angle(parts[2])))
            elif parts[0] == "GATE":
                circuit.append(NamedGate(parts[1], tuple(int(q) for q in parts[2:])))
            elif parts[0] == "MEAS":
                circuit.append(PauliMeasurement(PauliString.from_label(parts[1])))
            elif parts[0] == "CPAULI":
                circuit.append(ControlledPauli(
                    tuple(PauliString.from_label(p) for p in parts[1:])
                ))
            else:
                raise TranspileError(f"unknown directive {parts[0]!r}")
        except (ValueError, IndexError, TranspileError) as exc:
            raise TranspileError(f"line {lineno}: {exc}") from exc
    if circuit is None:
        raise TranspileError("missing qubits declaration")
    return circuit


def _parse_angle(token: str) -> Angle:
    if "/" in token:
        num, den = token.split("/")
        den = int(den)
        k = den.bit_length() - 1
        if 1 << k != den:
            raise TranspileError(f"denominator {den} is not a power of two")
        return Angle.dyadic(int(num), k)
    return Angle.generic(float(token))


def emit_circuit(circuit: GateCircuit) -> str:
    lines = [f"qubits {circuit.n}"]
    for element in circuit.elements:
        if isinstance(element, PauliRotation):
            a = element.angle
            if a.is_dyadic:
                lines.append(f"ROT {element.axis.label()} {a.num}/{1 << a.k}")
            else:
                lines.append(f"ROT {element.axis.label()} {a.rad!r}")
        elif isinstance(element, NamedGate):
            lines.append(f"GATE {element.name} " + " ".join(map(str, element.targets)))
        elif isinstance(element, PauliMeasurement):
            lines.append(f"MEAS {element.basis.label()}")
        elif isinstance(element, ControlledPauli):
            lines.append("CPAULI " + " ".join(p.label() for p in element.paulis))
    return "\n".join(lines) + "\n"


def canonical_to_json_str(circuit: CanonicalCircuit) -> str:
    return json.dumps(circuit.to_json(), indent=2, sort_keys=True) + "\n"
