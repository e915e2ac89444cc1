"""Exact algebra of signed multi-qubit Pauli products and rotations.

A Pauli string on n qubits is encoded symplectically by two bit vectors
``x`` and ``z`` plus a phase exponent ``e`` (mod 4), meaning

    P = i^e * L_0 (x) L_1 (x) ... (x) L_{n-1}

where the per-qubit letter is I (x=0,z=0), X (1,0), Z (0,1) or Y (1,1),
and Y carries its usual definition Y = i X Z.  Qubit 0 is the leftmost
letter and the most significant bit of a dense-matrix index.

Textual form: an optional sign prefix ``+ - i -i +i`` followed by letters
``IXYZ``; underscores between letters are ignored, so ``-Y_IXZ`` and
``-YIXZ`` both denote -(Y (x) I (x) X (x) Z).

Rotation angles are kept exact for dyadic multiples of pi (odd numerator
over 2^k) and as double-precision radians otherwise, so that circuit
manipulations never rely on floating-point equality of pi/8 multiples.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

_MAT = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}

_PHASES = (1, 1j, -1, -1j)  # i^e for e = 0..3

_LETTER_TO_XZ = {"I": (0, 0), "X": (1, 0), "Y": (1, 1), "Z": (0, 1)}
_XZ_TO_LETTER = {(0, 0): "I", (1, 0): "X", (1, 1): "Y", (0, 1): "Z"}

_SIGN_TO_EXP = {"": 0, "+": 0, "i": 1, "+i": 1, "-": 2, "-i": 3}
_EXP_TO_SIGN = {0: "", 1: "i", 2: "-", 3: "-i"}


class DimensionError(ValueError):
    """Operands act on different qubit counts."""


class CapacityError(ValueError):
    """Dense-matrix request exceeds the configured qubit bound."""


class PauliString:
    """Signed n-qubit Pauli product with exact {1, i, -1, -i} phase."""

    __slots__ = ("x", "z", "e")

    def __init__(self, x, z, e: int = 0):
        x = np.asarray(x, dtype=np.uint8)
        z = np.asarray(z, dtype=np.uint8)
        if x.shape != z.shape or x.ndim != 1 or x.size < 1:
            raise ValueError("x/z bit vectors must be equal-length, nonempty 1-D")
        self.x = x
        self.z = z
        self.e = int(e) % 4

    # -- construction -------------------------------------------------

    @classmethod
    def from_label(cls, label: str) -> "PauliString":
        """Parse textual form, e.g. ``XIZ``, ``-Y_IXZ``, ``iZZ``."""
        s = label.strip().replace("_", "")
        sign = ""
        while s and s[0] in "+-i":
            sign += s[0]
            s = s[1:]
        if sign not in _SIGN_TO_EXP:
            raise ValueError(f"bad sign prefix in Pauli label: {label!r}")
        if not s or any(c not in "IXYZ" for c in s):
            raise ValueError(f"bad Pauli letters in label: {label!r}")
        x = [_LETTER_TO_XZ[c][0] for c in s]
        z = [_LETTER_TO_XZ[c][1] for c in s]
        return cls(x, z, _SIGN_TO_EXP[sign])

    @classmethod
    def identity(cls, n: int) -> "PauliString":
        return cls(np.zeros(n, dtype=np.uint8), np.zeros(n, dtype=np.uint8), 0)

    @classmethod
    def single(cls, n: int, qubit: int, letter: str, e: int = 0) -> "PauliString":
        """One non-identity letter at ``qubit`` on an n-qubit register."""
        x = np.zeros(n, dtype=np.uint8)
        z = np.zeros(n, dtype=np.uint8)
        x[qubit], z[qubit] = _LETTER_TO_XZ[letter]
        return cls(x, z, e)

    @classmethod
    def from_letters(cls, letters: dict[int, str], n: int, e: int = 0) -> "PauliString":
        x = np.zeros(n, dtype=np.uint8)
        z = np.zeros(n, dtype=np.uint8)
        for q, c in letters.items():
            x[q], z[q] = _LETTER_TO_XZ[c]
        return cls(x, z, e)

    # -- views ---------------------------------------------------------

    @property
    def n(self) -> int:
        return self.x.size

    @property
    def phase(self) -> complex:
        return _PHASES[self.e]

    def letter(self, qubit: int) -> str:
        return _XZ_TO_LETTER[(int(self.x[qubit]), int(self.z[qubit]))]

    def letters(self) -> str:
        return "".join(self.letter(q) for q in range(self.n))

    def label(self) -> str:
        return _EXP_TO_SIGN[self.e] + self.letters()

    def weight(self) -> int:
        """Number of non-identity letters."""
        return int(np.count_nonzero(self.x | self.z))

    def support(self) -> list[int]:
        return [int(q) for q in np.nonzero(self.x | self.z)[0]]

    def is_identity(self) -> bool:
        return self.weight() == 0

    def is_hermitian(self) -> bool:
        return self.e in (0, 2)

    def unsigned(self) -> "PauliString":
        return PauliString(self.x, self.z, 0)

    def __repr__(self) -> str:
        return f"PauliString({self.label()!r})"

    def __eq__(self, other) -> bool:
        if not isinstance(other, PauliString):
            return NotImplemented
        return (
            self.e == other.e
            and self.n == other.n
            and np.array_equal(self.x, other.x)
            and np.array_equal(self.z, other.z)
        )

    def __hash__(self) -> int:
        return hash((self.x.tobytes(), self.z.tobytes(), self.e))

    def same_axis(self, other: "PauliString") -> bool:
        """Equal up to phase."""
        return np.array_equal(self.x, other.x) and np.array_equal(self.z, other.z)

    # -- algebra --------------------------------------------------------

    def __mul__(self, other: "PauliString") -> "PauliString":
        return multiply(self, other)

    def __neg__(self) -> "PauliString":
        return PauliString(self.x, self.z, self.e + 2)

    def adjoint(self) -> "PauliString":
        # Letters are hermitian; only the phase conjugates.
        return PauliString(self.x, self.z, -self.e)

    def to_matrix(self, max_qubits: int = 12) -> np.ndarray:
        if self.n > max_qubits:
            raise CapacityError(f"{self.n} qubits exceeds dense bound {max_qubits}")
        m = np.array([[self.phase]], dtype=complex)
        for q in range(self.n):
            m = np.kron(m, _MAT[self.letter(q)])
        return m


def multiply(a: PauliString, b: PauliString) -> PauliString:
    """Group product a*b with exact phase tracking."""
    if a.n != b.n:
        raise DimensionError(f"qubit counts differ: {a.n} vs {b.n}")
    ax, az, bx, bz = (v.astype(np.int64) for v in (a.x, a.z, b.x, b.z))
    x = (ax + bx) % 2
    z = (az + bz) % 2
    # Letter-form exponents: convert both to X^x Z^z normal form, multiply,
    # convert back.  Normal-form reordering of Z_a past X_b costs (-1)^(za.xb).
    e = (
        a.e
        + b.e
        + int((ax * az).sum())
        + int((bx * bz).sum())
        + 2 * int((az * bx).sum())
        - int((x * z).sum())
    )
    return PauliString(x, z, e)


def commutes(a: PauliString, b: PauliString) -> bool:
    """True iff the strings commute (even number of clashing letters)."""
    if a.n != b.n:
        raise DimensionError(f"qubit counts differ: {a.n} vs {b.n}")
    clash = (a.x.astype(np.int64) * b.z).sum() + (a.z.astype(np.int64) * b.x).sum()
    return clash % 2 == 0


# ---------------------------------------------------------------------------
# Angles
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Angle:
    """Rotation angle: exact dyadic multiple of pi, or generic radians.

    Dyadic payload means ``num * pi / 2**k`` with odd ``num`` (canonical),
    reduced into (-pi, pi].  ``k`` classifies the gate level: 1 = Pauli,
    2 = Clifford (pi/4), 3 = T level (pi/8), >=4 smaller.  The zero angle
    is the dyadic ``num=0, k=0``.
    """

    kind: str  # "dyadic" | "generic"
    num: int = 0
    k: int = 0
    rad: float = 0.0

    @classmethod
    def dyadic(cls, num: int, k: int) -> "Angle":
        if k < 0:
            raise ValueError("k must be >= 0")
        num = int(num)
        # strip factors of two from the numerator
        while num != 0 and num % 2 == 0 and k > 0:
            num //= 2
            k -= 1
        if num == 0 or k == 0:
            # multiples of pi are global phases: rotation is trivial
            return cls("dyadic", 0, 0, 0.0)
        # reduce modulo 2*pi into (-pi, pi]
        period = 1 << (k + 1)  # num is defined mod 2^(k+1)
        num %= period
        if num > period // 2:
            num -= period
        if num == 0:
            return cls("dyadic", 0, 0, 0.0)
        return cls("dyadic", num, k, 0.0)

    @classmethod
    def generic(cls, rad: float) -> "Angle":
        return cls("generic", 0, 0, float(rad))

    @classmethod
    def pi_over(cls, denom_power: int, sign: int = 1) -> "Angle":
        """pi / 2**denom_power with a sign."""
        return cls.dyadic(sign, denom_power)

    @property
    def is_zero(self) -> bool:
        if self.kind == "dyadic":
            return self.num == 0
        return self.rad == 0.0

    @property
    def is_dyadic(self) -> bool:
        return self.kind == "dyadic"

    def radians(self) -> float:
        if self.kind == "dyadic":
            return self.num * math.pi / (1 << self.k)
        return self.rad

    def level(self) -> str:
        """Classify: 'zero', 'pauli', 'clifford', 't', 'small', 'generic'."""
        if self.is_zero:
            return "zero"
        if self.kind == "generic":
            return "generic"
        if self.k == 0:
            return "zero"  # odd multiple of pi: global phase only
        if self.k == 1:
            return "pauli"
        if self.k == 2:
            return "clifford"
        if self.k == 3:
            return "t"
        return "small"

    def is_clifford_level(self) -> bool:
        return self.level() in ("zero", "pauli", "clifford")

    def __add__(self, other: "Angle") -> "Angle":
        if self.is_dyadic and other.is_dyadic:
            f = Fraction(self.num, 1 << self.k) + Fraction(other.num, 1 << other.k)
            den = f.denominator
            k = den.bit_length() - 1  # den is a power of two
            return Angle.dyadic(f.numerator, k)
        return Angle.generic(self.radians() + other.radians())

    def __neg__(self) -> "Angle":
        if self.is_dyadic:
            return Angle.dyadic(-self.num, self.k)
        return Angle.generic(-self.rad)

    def label(self) -> str:
        if self.is_dyadic:
            if self.num == 0:
                return "0"
            num = "-" if self.num == -1 else ("" if self.num == 1 else str(self.num))
            return f"{num}pi/{1 << self.k}"
        return f"{self.rad:g}rad"

    def to_json(self):
        if self.is_dyadic:
            return {"num": self.num, "den": 1 << self.k}
        return {"rad": self.rad}

    @classmethod
    def from_json(cls, obj) -> "Angle":
        if "rad" in obj:
            return cls.generic(obj["rad"])
        den = obj["den"]
        k = den.bit_length() - 1
        if 1 << k != den:
            raise ValueError(f"denominator {den} is not a power of two")
        return cls.dyadic(obj["num"], k)


PI_2 = Angle.dyadic(1, 1)
PI_4 = Angle.dyadic(1, 2)
PI_8 = Angle.dyadic(1, 3)


# ---------------------------------------------------------------------------
# Rotations and measurements
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PauliRotation:
    """exp(-i * axis * angle); axis phase is normalized to +1.

    A negative axis is folded into the angle's sign, matching the
    convention that a sign lives in the corner of a rotation box.
    """

    axis: PauliString
    angle: Angle

    def __post_init__(self):
        if self.axis.e == 2:
            object.__setattr__(self, "axis", -self.axis)
            object.__setattr__(self, "angle", -self.angle)
        if self.axis.e in (1, 3):
            raise ValueError("rotation axis must be hermitian (phase +/-1)")

    @classmethod
    def from_label(cls, axis: str, angle: Angle) -> "PauliRotation":
        return cls(PauliString.from_label(axis), angle)

    @property
    def n(self) -> int:
        return self.axis.n

    def inverse(self) -> "PauliRotation":
        return PauliRotation(self.axis, -self.angle)

    def label(self) -> str:
        return f"{self.axis.letters()}_{self.angle.label()}"

    def __repr__(self) -> str:
        return f"PauliRotation({self.label()})"

    def to_json(self):
        return {"axis": self.axis.label(), "angle": self.angle.to_json()}

    @classmethod
    def from_json(cls, obj) -> "PauliRotation":
        return cls(PauliString.from_label(obj["axis"]), Angle.from_json(obj["angle"]))


@dataclass(frozen=True)
class PauliMeasurement:
    """Measurement of a hermitian Pauli product; sign folds into the basis."""

    basis: PauliString

    def __post_init__(self):
        if self.basis.e in (1, 3):
            raise ValueError("measurement basis must be hermitian")
        if self.basis.is_identity():
            raise ValueError("measurement basis must be non-identity")

    @classmethod
    def from_label(cls, label: str) -> "PauliMeasurement":
        return cls(PauliString.from_label(label))

    @property
    def n(self) -> int:
        return self.basis.n

    @property
    def sign(self) -> int:
        return 1 if self.basis.e == 0 else -1

    def label(self) -> str:
        return self.basis.label()

    def to_json(self):
        return {"basis": self.basis.label()}

    @classmethod
    def from_json(cls, obj) -> "PauliMeasurement":
        return cls(PauliString.from_label(obj["basis"]))


def rotation_unitary(r: PauliRotation, max_qubits: int = 6) -> np.ndarray:
    """Dense exp(-i*P*phi).  P^2 = 1, so this is cos(phi) - i sin(phi) P."""
    if r.n > max_qubits:
        raise CapacityError(f"{r.n} qubits exceeds dense bound {max_qubits}")
    phi = r.angle.radians()
    p = r.axis.to_matrix(max_qubits)
    return math.cos(phi) * np.eye(1 << r.n) - 1j * math.sin(phi) * p


def conjugate_by_quarter(q: PauliString, p: PauliString, steps: int = 1) -> PauliString:
    """Conjugate p by exp(-i*q*pi/4) moved across it: p -> Q(pi/4)^dag p Q(pi/4).

    If [q, p] = 0 the string is unchanged; otherwise one step maps
    p -> i q p (a hermitian string again).  ``steps`` is taken mod 4.
    """
    steps %= 4
    if steps == 0 or commutes(q, p):
        return p
    for _ in range(steps):
        qp = multiply(q, p)
        p = PauliString(qp.x, qp.z, qp.e + 1)  # i * q * p
    return p


def conjugate_through_rotation(f: PauliRotation, p: PauliString) -> PauliString:
    """Move a Clifford-level rotation f right past an axis/basis p.

    Returns f^dag p f.  Only defined for dyadic angles at the Pauli or
    Clifford level (k = 1 or 2).
    """
    ang = f.angle
    if not ang.is_dyadic or ang.k > 2:
        raise ValueError("only Pauli- or Clifford-level rotations conjugate exactly")
    if ang.is_zero:
        return p
    quarters = ang.num * (1 << (2 - ang.k))
    return conjugate_by_quarter(f.axis, p, quarters)


def projective_distance(u: np.ndarray, v: np.ndarray) -> float:
    """Max-norm distance between unitaries minimized over a global phase."""
    tr = np.trace(v.conj().T @ u)
    if abs(tr) < 1e-14:
        # orthogonal in Hilbert-Schmidt: no phase helps, report raw distance
        return float(np.max(np.abs(u - v)))
    phase = tr / abs(tr)
    return float(np.max(np.abs(u - phase * v)))
