"""Triorthogonal-matrix machinery and magic-state distillation models.

A binary matrix over GF(2) generates a transversal-T code: after
Gaussian elimination, removing weight-1 columns (puncturing) turns the
matching rows into logical qubits.  Even-weight rows describe X
stabilizers, odd-weight rows X logicals.  The extracted distillation
circuit has one qubit per row and one Z-type rotation per column, with
weight-1 columns absorbed into the initial states.

The registry ships the source matrices as data files together with the
tabulated tile/tick layouts and closed-form error/success models used by
the resource estimator.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from importlib import resources
from itertools import combinations

import numpy as np

from .pauli import Angle, PauliRotation, PauliString
from .sim import DistillationCircuit, distill_monte_carlo


class MatrixError(ValueError):
    pass


@dataclass
class TriorthMatrix:
    """Binary matrix with rows split into stabilizer and logical rows."""

    arr: np.ndarray
    name: str = ""
    declared_class: str = ""

    def __post_init__(self):
        self.arr = (np.asarray(self.arr, dtype=np.uint8) % 2).copy()
        if self.arr.ndim != 2 or self.arr.size == 0:
            raise MatrixError("matrix must be a nonempty 2-D 0/1 grid")

    @property
    def rows(self) -> int:
        return self.arr.shape[0]

    @property
    def cols(self) -> int:
        return self.arr.shape[1]

    def row_weights(self) -> np.ndarray:
        return self.arr.sum(axis=1)

    def stabilizer_rows(self) -> list[int]:
        return [r for r in range(self.rows) if self.arr[r].sum() % 2 == 0]

    def logical_rows(self) -> list[int]:
        return [r for r in range(self.rows) if self.arr[r].sum() % 2 == 1]

    def __eq__(self, other) -> bool:
        return isinstance(other, TriorthMatrix) and np.array_equal(self.arr, other.arr)

    # -- I/O: plain text grid with a small header -----------------------

    @classmethod
    def loads(cls, text: str, name: str = "") -> "TriorthMatrix":
        rows = cols = None
        klass = ""
        grid = []
        for line in text.splitlines():
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if line.startswith("rows "):
                rows = int(line.split()[1])
            elif line.startswith("cols "):
                cols = int(line.split()[1])
            elif line.startswith("class "):
                klass = line.split()[1]
            else:
                if any(c not in "01" for c in line):
                    raise MatrixError(f"bad grid line: {line!r}")
                grid.append([int(c) for c in line])
        arr = np.array(grid, dtype=np.uint8)
        if rows is not None and arr.shape[0] != rows:
            raise MatrixError(f"header says {rows} rows, grid has {arr.shape[0]}")
        if cols is not None and arr.shape[1] != cols:
            raise MatrixError(f"header says {cols} cols, grid has {arr.shape[1]}")
        return cls(arr, name=name, declared_class=klass)

    def dumps(self) -> str:
        lines = [f"rows {self.rows}", f"cols {self.cols}"]
        if self.declared_class:
            lines.append(f"class {self.declared_class}")
        lines.extend("".join(str(int(v)) for v in row) for row in self.arr)
        return "\n".join(lines) + "\n"

    @classmethod
    def load_bundled(cls, stem: str) -> "TriorthMatrix":
        path = resources.files("patchcode.data.matrices").joinpath(stem + ".txt")
        return cls.loads(path.read_text(), name=stem)


def check_triorthogonal(m: TriorthMatrix, strict: bool = True):
    """Evaluate the row/pair/triple overlap conditions.

    Strict: row sums = 0 (mod 8), pair overlaps = 0 (mod 4), triple
    overlaps = 0 (mod 2).  Semi: all three mod 2.  Returns ``(ok,
    violation)`` where the violation names the first failing condition.
    """
    a = m.arr.astype(np.int64)
    mod_row, mod_pair = (8, 4) if strict else (2, 2)
    for r in range(m.rows):
        w = int(a[r].sum())
        if w % mod_row != 0:
            return False, {"kind": "row", "rows": (r,), "value": w, "mod": mod_row}
    for r, s in combinations(range(m.rows), 2):
        w = int((a[r] * a[s]).sum())
        if w % mod_pair != 0:
            return False, {"kind": "pair", "rows": (r, s), "value": w, "mod": mod_pair}
    for r, s, t in combinations(range(m.rows), 3):
        w = int((a[r] * a[s] * a[t]).sum())
        if w % 2 != 0:
            return False, {"kind": "triple", "rows": (r, s, t), "value": w, "mod": 2}
    return True, None


def punctured_strict(m: TriorthMatrix, level: int = 3) -> bool:
    """Strict conditions adapted to punctured matrices.

    At the pi/8 level stabilizer rows must have weight 0 (mod 8),
    logical rows share a common odd residue (+-1 mod 8, fixing the
    chirality), pairs are 0 (mod 4) and triples 0 (mod 2).  At the pi/4
    level all moduli halve and the triple condition drops.
    """
    a = m.arr.astype(np.int64)
    mod_row = 8 if level == 3 else 4
    mod_pair = 4 if level == 3 else 2
    log_res = {int(a[r].sum()) % mod_row for r in m.logical_rows()}
    if any(int(a[r].sum()) % mod_row != 0 for r in m.stabilizer_rows()):
        return False
    if len(log_res) > 1 or (log_res and next(iter(log_res)) not in (1, mod_row - 1)):
        return False
    for r, s in combinations(range(m.rows), 2):
        if int((a[r] * a[s]).sum()) % mod_pair != 0:
            return False
    if level == 3:
        for r, s, t in combinations(range(m.rows), 3):
            if int((a[r] * a[s] * a[t]).sum()) % 2 != 0:
                return False
    return True


def echelon(m: TriorthMatrix) -> TriorthMatrix:
    """Gauss-Jordan elimination assigning pivots bottom-up.

    Columns are scanned left to right; each pivot row is swapped into the
    lowest unassigned slot and its column cleared everywhere else.  The
    bundled echelon-form matrices are fixed points of this routine.
    """
    a = m.arr.copy()
    rows, cols = a.shape
    slot = rows - 1
    for col in range(cols):
        if slot < 0:
            break
        pivot = next((r for r in range(slot, -1, -1) if a[r, col]), None)
        if pivot is None:
            continue
        if pivot != slot:
            a[[pivot, slot]] = a[[slot, pivot]]
        for r in range(rows):
            if r != slot and a[r, col]:
                a[r] ^= a[slot]
        slot -= 1
    return TriorthMatrix(a, name=m.name + "~" if m.name else "", declared_class=m.declared_class)


def puncture(m: TriorthMatrix, k: int) -> TriorthMatrix:
    """Echelonize, then drop the first k weight-1 columns.

    The rows whose pivots are removed turn odd-weight and become the
    code's logical qubits; row order is preserved.
    """
    e = echelon(m)
    weights = e.arr.sum(axis=0)
    singles = [c for c in range(e.cols) if weights[c] == 1]
    if len(singles) < k:
        raise MatrixError(f"only {len(singles)} weight-1 columns, cannot puncture {k}")
    drop = set(singles[:k])
    keep = [c for c in range(e.cols) if c not in drop]
    return TriorthMatrix(e.arr[:, keep], name=f"{m.name}/punctured{k}",
                         declared_class="punctured")


# ---------------------------------------------------------------------------
# Circuit extraction
# ---------------------------------------------------------------------------


@dataclass
class ExtractedCircuit:
    """Rotation circuit read off a punctured matrix.

    One qubit per row; ``initial`` per-qubit labels with weight-1 columns
    absorbed; explicit Z-type rotations in column order; a Clifford
    correction (Z-type quarter rotations) for semi-triorthogonal parents.
    """

    qubits: int
    initial: list
    rotations: list
    correction: list = field(default_factory=list)
    checks: tuple = ()
    outputs: tuple = ()

    @property
    def rotation_count(self) -> int:
        return len(self.rotations)


class CorrectionSearchError(RuntimeError):
    pass


#: known Clifford corrections (appended column pairs), seeded from the source
_KNOWN_CORRECTIONS = {
    # 20-to-4: four pairs of columns supported on the three stabilizer rows
    "semi_24col/punctured4": [(2,), (1,), (0,), (0, 1, 2)],
}


def find_clifford_correction(m: TriorthMatrix, max_columns: int = 8,
                             key: str | None = None) -> list[tuple]:
    """Column pairs extending a punctured semi matrix to strict form.

    Each returned tuple is the row support of one appended pair of equal
    columns, i.e. one Z-type quarter rotation.  Known instances are
    served from a seed table; otherwise a breadth-first search over
    supports runs up to ``max_columns`` appended columns.
    """
    if punctured_strict(m):
        return []
    seed = _KNOWN_CORRECTIONS.get(key or m.name)
    if seed is not None and _correction_reaches_strict(m, seed):
        return [tuple(s) for s in seed]
    supports = [tuple(s) for r in range(1, m.rows + 1)
                for s in combinations(range(m.rows), r)]
    queue = deque([()])
    seen = {()}
    while queue:
        state = queue.popleft()
        if len(state) * 2 >= max_columns:
            continue
        for sup in supports:
            cand = tuple(sorted(state + (sup,)))
            if cand in seen:
                continue
            seen.add(cand)
            if _correction_reaches_strict(m, cand):
                return [tuple(s) for s in cand]
            queue.append(cand)
    raise CorrectionSearchError(
        f"no strict completion within {max_columns} appended columns"
    )


def _correction_reaches_strict(m: TriorthMatrix, pairs) -> bool:
    cols = []
    for sup in pairs:
        col = np.zeros((m.rows, 1), dtype=np.uint8)
        col[list(sup)] = 1
        cols.extend([col, col])
    ext = TriorthMatrix(np.hstack([m.arr] + cols)) if cols else m
    return punctured_strict(ext)


def extract_circuit(m: TriorthMatrix, level: int = 3,
                    correction_key: str | None = None) -> ExtractedCircuit:
    """Initial states + one rotation per column, weight-1 columns absorbed.

    ``level`` sets the rotation angle pi/2^level (3 for magic-state
    protocols, 2 for the Y-state benchmark).  Semi-triorthogonal parents
    get a Z-type quarter-rotation correction, one per appended column
    pair, carried with negative sign so that folding it into the circuit
    flips initial resource states to their conjugates.
    """
    nq = m.rows
    weights = m.arr.sum(axis=0)
    stab = m.stabilizer_rows()
    logical = m.logical_rows()
    resource = {3: "m", 2: "Y"}.get(level)
    if resource is None:
        raise ValueError("level must be 2 or 3")
    initial = ["+"] * nq
    rotations = []
    for c in range(m.cols):
        support = [r for r in range(nq) if m.arr[r, c]]
        if weights[c] == 1:
            initial[support[0]] = resource
            continue
        axis = PauliString.from_letters({r: "Z" for r in support}, nq)
        rotations.append(PauliRotation(axis, Angle.pi_over(level)))
    correction = []
    if not punctured_strict(m, level=level):
        if level != 3:
            raise MatrixError("quarter-level matrix fails its overlap conditions")
        for sup in find_clifford_correction(m, key=correction_key):
            axis = PauliString.from_letters({r: "Z" for r in sup}, nq)
            correction.append(PauliRotation(axis, Angle.dyadic(-1, 2)))
    return ExtractedCircuit(
        qubits=nq, initial=initial, rotations=rotations, correction=correction,
        checks=tuple(stab), outputs=tuple(logical),
    )


def fold_correction(circ: ExtractedCircuit) -> ExtractedCircuit:
    """Fold quarter-rotation corrections into initial states and rotations.

    Single-qubit corrections conjugate that qubit's resource state
    (m <-> mbar); a multi-qubit correction merges into an existing
    rotation with the same axis.  Anything unfoldable stays explicit.
    """
    initial = list(circ.initial)
    rotations = list(circ.rotations)
    leftover = []
    flip = {"m": "mbar", "mbar": "m"}
    for corr in circ.correction:
        support = corr.axis.support()
        if len(support) == 1 and initial[support[0]] in flip:
            initial[support[0]] = flip[initial[support[0]]]
            continue
        for i, rot in enumerate(rotations):
            if rot.axis.same_axis(corr.axis):
                merged = rot.angle + corr.angle
                rotations[i] = PauliRotation(rot.axis, merged)
                break
        else:
            leftover.append(corr)
    return ExtractedCircuit(
        qubits=circ.qubits, initial=initial, rotations=rotations,
        correction=leftover, checks=circ.checks, outputs=circ.outputs,
    )


# ---------------------------------------------------------------------------
# Protocol registry
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ErrorModel:
    coefficient: float
    exponent: int
    per_state: bool  # coefficient describes a single output state
    correlated: bool = False

    def output_error(self, p: float) -> float:
        return self.coefficient * p**self.exponent


@dataclass
class DistillationProtocol:
    """Registry entry: code parameters, layouts, and closed-form models."""

    name: str
    n: int
    k: int
    m_x: int
    error: ErrorModel
    layouts: dict = field(default_factory=dict)  # variant -> (tiles, ticks)
    matrix_stem: str | None = None
    puncture_count: int = 0
    level: int = 3
    simulable: bool = True
    notes: str = ""

    def success_probability(self, p: float) -> float:
        return (1.0 - p) ** self.n

    def matrix(self) -> TriorthMatrix:
        if self.matrix_stem is None:
            raise MatrixError(f"{self.name} has no bundled matrix")
        m = TriorthMatrix.load_bundled(self.matrix_stem)
        if self.puncture_count:
            m = puncture(m, self.puncture_count)
            m.name = f"{self.matrix_stem}/punctured{self.puncture_count}"
        return m

    def extracted(self) -> ExtractedCircuit:
        return extract_circuit(self.matrix(), level=self.level,
                               correction_key=f"{self.matrix_stem}/punctured{self.puncture_count}")

    def simulation_circuit(self) -> DistillationCircuit:
        circ = fold_correction(self.extracted())
        if circ.correction:
            raise MatrixError(f"{self.name}: unfoldable Clifford correction")
        return DistillationCircuit(
            name=self.name,
            initial=tuple(circ.initial),
            rotations=tuple(circ.rotations),
            checks=circ.checks,
            outputs=circ.outputs,
        )

    def monte_carlo(self, p: float, trials: int, seed: int = 0):
        if not self.simulable:
            raise MatrixError(f"{self.name} exceeds the simulator capacity")
        return distill_monte_carlo(self.simulation_circuit(), p, trials, seed=seed)


def registry() -> dict:
    """All protocols the estimator and CLI know about."""
    protos = [
        DistillationProtocol(
            name="15-to-1", n=15, k=1, m_x=4,
            error=ErrorModel(35.0, 3, per_state=True),
            layouts={"standard": (11, 11), "modified": (32, 11)},
            matrix_stem="triorth_16col", puncture_count=1,
        ),
        DistillationProtocol(
            name="14-to-2", n=14, k=2, m_x=3,
            error=ErrorModel(7.0, 2, per_state=False, correlated=True),
            layouts={},
            matrix_stem="triorth_16col", puncture_count=2,
        ),
        DistillationProtocol(
            name="20-to-4", n=20, k=4, m_x=3,
            error=ErrorModel(22.0, 2, per_state=False, correlated=True),
            layouts={"standard": (14, 17)},
            matrix_stem="semi_24col", puncture_count=4,
        ),
        DistillationProtocol(
            name="7-to-1", n=7, k=1, m_x=3,
            error=ErrorModel(7.0, 3, per_state=True),
            layouts={"standard": (7, 4)},
            matrix_stem="steane_7col", puncture_count=0, level=2,
            notes="Y-state benchmark; output coefficient derived by weight "
                  "enumeration of the bundled matrix",
        ),
        DistillationProtocol(
            name="116-to-12", n=116, k=12, m_x=17,
            error=ErrorModel(41.25, 4, per_state=True),
            layouts={"compact": (44, 99), "wide": (81, 50), "modified": (93, 53)},
            simulable=False,
        ),
        DistillationProtocol(
            name="912-to-112", n=912, k=112, m_x=64,
            error=ErrorModel(10.63, 6, per_state=True),
            layouts={"wide": (440, 424)},
            simulable=False,
        ),
        DistillationProtocol(
            name="225-to-1", n=225, k=1, m_x=4,
            error=ErrorModel(35.0**4, 9, per_state=True),
            layouts={"standard": (176, 15)},
            simulable=False,
            notes="two concatenated 15-to-1 rounds; 11 first-level blocks "
                  "feed one 15-rotation second level",
        ),
        DistillationProtocol(
            name="3k+4-to-k", n=0, k=0, m_x=0,
            error=ErrorModel(0.0, 0, per_state=True),
            simulable=False,
            notes="family cited without construction; metadata only",
        ),
    ]
    return {p.name: p for p in protos}


def error_model(name: str, p: float) -> dict:
    """Closed-form output error for a registry protocol."""
    proto = registry().get(name)
    if proto is None or proto.error.exponent == 0:
        raise KeyError(f"no error model for protocol {name!r}")
    total = proto.error.output_error(p)
    if proto.error.per_state:
        per_state = total
        total = per_state * proto.k if proto.k > 1 else per_state
    else:
        per_state = total / proto.k
    return {
        "protocol": name,
        "p": p,
        "per_state": per_state,
        "total": total,
        "correlated": proto.error.correlated,
    }


def block_layout(name: str, variant: str = "standard", p: float = 0.0) -> dict:
    """Tiles, ticks and throughput for a protocol block.

    Tabulated layouts win over the generic 1.5(m_x+k)+4 tiles and
    n-m_x ticks formula; the per-state period folds in the success
    probability (1-p)^n.
    """
    proto = registry().get(name)
    if proto is None:
        raise KeyError(f"unknown protocol {name!r}")
    if variant in proto.layouts:
        tiles, ticks = proto.layouts[variant]
        tabulated = True
    elif variant == "generic" or not proto.layouts:
        tiles = 1.5 * (proto.m_x + proto.k) + 4
        ticks = proto.n - proto.m_x
        tabulated = False
    else:
        raise KeyError(f"unknown layout variant {variant!r} for {name}")
    success = proto.success_probability(p)
    period = ticks / (proto.k * success) if success > 0 else math.inf
    return {
        "protocol": name,
        "variant": variant,
        "tiles": tiles,
        "ticks": ticks,
        "tabulated": tabulated,
        "outputs": proto.k,
        "success": success,
        "ticks_per_state": period,
        "st_cost": tiles * ticks,
        "st_cost_per_state": tiles * ticks / proto.k,
    }


def cost_per_state(n: int, m_x: int, k: int, p: float, d: int | None = None) -> float:
    """Space-time cost per output state as a d^3 coefficient."""
    if not 0 <= p < 1:
        raise ValueError("p must be in [0, 1)")
    if k < 1:
        raise ValueError("k must be >= 1")
    return (1.5 * (m_x + k) + 4) * (n - m_x) / (k * (1 - p) ** n)


# ---------------------------------------------------------------------------
# Concatenation / pipeline throughput (discrete events)
# ---------------------------------------------------------------------------


@dataclass
class ThroughputReport:
    output_period: float
    feed_period: float
    skip_rate: float
    tiles: int
    effective_cost: float
    outputs: int
    ticks: int

    def to_json(self):
        return self.__dict__.copy()


def concatenated_throughput(levels: list[dict], p: float, seed: int = 0,
                            horizon_outputs: int = 2000) -> ThroughputReport:
    """Event-driven steady-state評価 of a distillation pipeline.

    ``levels`` is a list of {"protocol": name, "count": int, "variant":
    str} from producers to the final consumer.  Single-level trees report
    the block's own average output period.  Two-level trees model
    staggered first-level blocks feeding a second level that consumes one
    input state per tick and skips a tick when none is ready.
    """
    if not levels or len(levels) > 2:
        raise ValueError("pipeline must have one or two levels")
    reg = registry()
    for lv in levels:
        if lv["protocol"] not in reg:
            raise ValueError(f"unknown protocol {lv['protocol']!r}")
    rng = np.random.Generator(np.random.Philox(key=seed))

    if len(levels) == 1:
        lv = levels[0]
        proto = reg[lv["protocol"]]
        lay = block_layout(lv["protocol"], lv.get("variant", "standard"))
        count = lv.get("count", 1)
        ticks = 0
        outputs = 0
        while outputs < horizon_outputs:
            ticks += lay["ticks"]
            if rng.random() < proto.success_probability(p):
                outputs += proto.k
        per_state = ticks / outputs / count
        tiles = lay["tiles"] * count
        return ThroughputReport(
            output_period=per_state, feed_period=per_state,
            skip_rate=0.0, tiles=tiles,
            effective_cost=tiles * per_state,
            outputs=outputs * count, ticks=ticks,
        )

    first, second = levels
    p1 = reg[first["protocol"]]
    p2 = reg[second["protocol"]]
    lay1 = block_layout(first["protocol"], first.get("variant", "standard"))
    count1 = first.get("count", 1)
    period1 = lay1["ticks"]
    succ1 = p1.success_probability(p)
    # second level: all n rotations explicit (inputs are distilled states)
    consume_needed = p2.n
    out_err1 = error_model(first["protocol"], p)["per_state"]
    succ2 = (1.0 - out_err1) ** p2.n

    buffer = 0
    consumed = 0
    outputs = 0
    stalls = 0
    ticks = 0
    tiles = second_tiles(first, second, reg)
    while outputs < horizon_outputs:
        ticks += 1
        # one first-level block finishes each tick when staggered
        finishing = sum(1 for b in range(count1) if (ticks - b) % period1 == 0)
        for _ in range(finishing):
            if rng.random() < succ1:
                buffer += p1.k
        if buffer > 0:
            buffer -= 1
            consumed += 1
            if consumed == consume_needed:
                consumed = 0
                if rng.random() < succ2:
                    outputs += p2.k
        else:
            stalls += 1
    period = ticks / outputs
    return ThroughputReport(
        output_period=period,
        feed_period=period1 / count1,
        skip_rate=stalls / ticks,
        tiles=tiles,
        effective_cost=tiles * period / p2.k,
        outputs=outputs,
        ticks=ticks,
    )


def second_tiles(first: dict, second: dict, reg) -> int:
    """Total tile count of a two-level pipeline block."""
    if first["protocol"] == "15-to-1" and second["protocol"] == "15-to-1":
        lay = registry()["225-to-1"].layouts["standard"]
        return lay[0]
    t1 = block_layout(first["protocol"], first.get("variant", "standard"))["tiles"]
    t2 = block_layout(second["protocol"], second.get("variant", "standard"))["tiles"]
    return t1 * first.get("count", 1) + t2
