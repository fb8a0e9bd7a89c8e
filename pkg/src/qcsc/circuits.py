"""Circuit IR: gates, circuits, the dense-unitary oracle and ZNE folding.

Two-qubit gates act on ``targets = (a, b)`` with the 4x4 matrix written in the
local basis ``bit_a + 2*bit_b``; for ``CX`` the first target is the control.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import reduce

import numpy as np
from scipy.stats import unitary_group

from .pauli import PauliTerm

SQRT_HALF = 1 / np.sqrt(2)

_FIXED = {
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "SX": 0.5 * np.array([[1 + 1j, 1 - 1j], [1 - 1j, 1 + 1j]]),
    "H": SQRT_HALF * np.array([[1, 1], [1, -1]], dtype=complex),
    "S": np.diag([1, 1j]),
    "Sdg": np.diag([1, -1j]),
    "CX": np.array([[1, 0, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0], [0, 1, 0, 0]], dtype=complex),
}
SWAP = np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex)

ONE_QUBIT = {"X", "SX", "RZ", "H", "S", "Sdg", "U1q"}
TWO_QUBIT = {"CX", "RZZ", "U2q"}
PARAMETRIC = {"RZ", "RZZ"}
KINDS = ONE_QUBIT | TWO_QUBIT

MAX_ORACLE_QUBITS = 10


def rz_matrix(theta: float) -> np.ndarray:
    return np.diag([np.exp(-0.5j * theta), np.exp(0.5j * theta)])


def rzz_matrix(theta: float) -> np.ndarray:
    a, b = np.exp(-0.5j * theta), np.exp(0.5j * theta)
    return np.diag([a, b, b, a])


def is_unitary(u: np.ndarray, atol: float = 1e-10) -> bool:
    u = np.asarray(u)
    return u.ndim == 2 and u.shape[0] == u.shape[1] and np.allclose(
        u.conj().T @ u, np.eye(u.shape[0]), atol=atol, rtol=0)


@dataclass(frozen=True, eq=False)
class Gate:
    kind: str
    targets: tuple[int, ...]
    theta: float | None = None
    matrix_: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        targets = tuple(int(t) for t in self.targets)
        object.__setattr__(self, "targets", targets)
        arity = 1 if self.kind in ONE_QUBIT else 2
        if len(targets) != arity:
            raise ValueError(f"{self.kind} takes {arity} target(s), got {targets}")
        if len(set(targets)) != arity or min(targets) < 0:
            raise ValueError(f"invalid targets {targets}")
        if self.kind in PARAMETRIC:
            if self.theta is None:
                raise ValueError(f"{self.kind} needs theta")
            object.__setattr__(self, "theta", float(self.theta))
        if self.kind in ("U1q", "U2q"):
            m = np.array(self.matrix_, dtype=complex)
            if m.shape != (2 ** arity, 2 ** arity) or not is_unitary(m):
                raise ValueError(f"{self.kind} matrix must be a {2 ** arity}x{2 ** arity} unitary")
            m.setflags(write=False)
            object.__setattr__(self, "matrix_", m)

    @property
    def arity(self) -> int:
        return len(self.targets)

    @property
    def matrix(self) -> np.ndarray:
        if self.kind == "RZ":
            return rz_matrix(self.theta)
        if self.kind == "RZZ":
            return rzz_matrix(self.theta)
        if self.matrix_ is not None:
            return self.matrix_
        return _FIXED[self.kind]

    def inverse(self) -> "Gate":
        if self.kind in ("X", "H", "CX"):
            return self
        if self.kind == "S":
            return Gate("Sdg", self.targets)
        if self.kind == "Sdg":
            return Gate("S", self.targets)
        if self.kind in PARAMETRIC:
            return Gate(self.kind, self.targets, -self.theta)
        kind = "U1q" if self.arity == 1 else "U2q"
        return Gate(kind, self.targets, matrix_=self.matrix.conj().T)

    def __eq__(self, other):
        if not isinstance(other, Gate):
            return NotImplemented
        return (self.kind == other.kind and self.targets == other.targets
                and self.theta == other.theta
                and np.array_equal(self.matrix, other.matrix))

    def __hash__(self):
        return hash((self.kind, self.targets, self.theta))

    def to_json_dict(self) -> dict:
        out = {"kind": self.kind, "targets": list(self.targets)}
        if self.theta is not None:
            out["theta"] = self.theta
        if self.matrix_ is not None:
            out["matrix"] = [[[float(z.real), float(z.imag)] for z in row] for row in self.matrix_]
        return out

    @classmethod
    def from_json_dict(cls, data: dict) -> "Gate":
        matrix = data.get("matrix")
        if matrix is not None:
            matrix = np.array([[complex(re, im) for re, im in row] for row in matrix])
        return cls(data["kind"], tuple(data["targets"]), data.get("theta"), matrix)


@dataclass(frozen=True)
class Circuit:
    num_qubits: int
    gates: tuple[Gate, ...] = ()

    def __post_init__(self):
        gates = tuple(self.gates)
        object.__setattr__(self, "gates", gates)
        if self.num_qubits < 0:
            raise ValueError("num_qubits must be non-negative")
        for g in gates:
            if max(g.targets) >= self.num_qubits:
                raise ValueError(f"gate {g.kind} on {g.targets} outside {self.num_qubits} qubits")

    def __len__(self):
        return len(self.gates)

    def __add__(self, other: "Circuit") -> "Circuit":
        return Circuit(max(self.num_qubits, other.num_qubits), self.gates + other.gates)

    def inverse(self) -> "Circuit":
        return Circuit(self.num_qubits, tuple(g.inverse() for g in reversed(self.gates)))

    def count(self, arity: int | None = None) -> int:
        return sum(1 for g in self.gates if arity is None or g.arity == arity)

    def to_json_dict(self) -> dict:
        return {"num_qubits": self.num_qubits, "gates": [g.to_json_dict() for g in self.gates]}

    @classmethod
    def from_json_dict(cls, data: dict) -> "Circuit":
        return cls(int(data["num_qubits"]), tuple(Gate.from_json_dict(g) for g in data["gates"]))

    def dumps(self) -> str:
        return json.dumps(self.to_json_dict())

    @classmethod
    def loads(cls, text: str) -> "Circuit":
        return cls.from_json_dict(json.loads(text))


_PAULI_MATS = [np.eye(2, dtype=complex), _FIXED["X"],
               np.array([[0, -1j], [1j, 0]]), np.diag([1.0 + 0j, -1.0])]


def _lift_1q(u: np.ndarray, q: int, n: int) -> np.ndarray:
    # qubit n-1 is the leftmost Kronecker factor
    factors = [u if k == q else np.eye(2) for k in reversed(range(n))]
    return reduce(np.kron, factors, np.eye(1))


def lift_gate(g: Gate, n: int) -> np.ndarray:
    """Full ``2**n`` matrix of ``g`` built from Kronecker products only."""
    if g.arity == 1:
        return _lift_1q(g.matrix, g.targets[0], n)
    a, b = g.targets
    u = g.matrix
    out = np.zeros((1 << n, 1 << n), dtype=complex)
    # expand u = sum c_kl P_k(on b) (x) P_l(on a); the local basis has b as high bit
    for k, pk in enumerate(_PAULI_MATS):
        for l, pl in enumerate(_PAULI_MATS):
            c = np.trace(np.kron(pk, pl).conj().T @ u) / 4
            if abs(c) < 1e-15:
                continue
            factors = [pk if j == b else pl if j == a else np.eye(2) for j in reversed(range(n))]
            out += c * reduce(np.kron, factors, np.eye(1))
    return out


def to_matrix(c: Circuit) -> np.ndarray:
    """Dense unitary of ``c`` (gates applied in program order)."""
    if c.num_qubits > MAX_ORACLE_QUBITS:
        raise ValueError(f"{c.num_qubits} qubits exceeds oracle limit {MAX_ORACLE_QUBITS}")
    mat = np.eye(1 << c.num_qubits, dtype=complex)
    for g in c.gates:
        mat = lift_gate(g, c.num_qubits) @ mat
    return mat


def equal_up_to_phase(a: np.ndarray, b: np.ndarray, atol: float = 1e-9) -> bool:
    """Compare unitaries modulo a global phase via the normalized trace overlap."""
    overlap = np.vdot(a, b)
    phase = overlap / abs(overlap) if abs(overlap) > 0 else 1.0
    return bool(np.max(np.abs(a * phase - b)) <= atol)


def fold_global(c: Circuit, factor: int) -> Circuit:
    """Noise-amplified copy ``C (C^dagger C)^((factor-1)/2)``."""
    if factor < 1 or factor % 2 == 0:
        raise ValueError(f"fold factor must be odd and >= 1, got {factor}")
    inv = c.inverse().gates
    gates = c.gates + (inv + c.gates) * ((factor - 1) // 2)
    return Circuit(c.num_qubits, gates)


def pauli_rotation_circuit(term: PauliTerm, theta: float, num_qubits: int | None = None) -> Circuit:
    """Circuit for ``exp(-i theta/2 P)`` where ``P`` is the Pauli string of ``term``.

    The coefficient of ``term`` is ignored; fold it into ``theta``.  Uses basis
    changes onto Z, a CX ladder in ascending qubit order, ``RZ(theta)`` on the
    highest qubit, then the mirror image.
    """
    if term.is_identity:
        raise ValueError("cannot build a rotation for the identity string")
    n = max(term.support) + 1 if num_qubits is None else num_qubits
    into_z = []
    for q, axis in term.paulis:
        if axis == "X":
            into_z.append(Gate("H", (q,)))
        elif axis == "Y":
            into_z += [Gate("Sdg", (q,)), Gate("H", (q,))]
    qs = term.support
    ladder = [Gate("CX", (qs[k], qs[k + 1])) for k in range(len(qs) - 1)]
    gates = into_z + ladder + [Gate("RZ", (qs[-1],), theta)]
    gates += [g.inverse() for g in reversed(ladder)] + [g.inverse() for g in reversed(into_z)]
    return Circuit(n, tuple(gates))


def random_circuit(num_qubits: int, depth: int, rng: np.random.Generator) -> Circuit:
    """Random circuit mixing every gate kind; used by the randomized suites."""
    kinds = sorted(ONE_QUBIT | (TWO_QUBIT if num_qubits > 1 else set()))
    gates = []
    for _ in range(depth):
        kind = kinds[int(rng.integers(len(kinds)))]
        if kind in ONE_QUBIT:
            targets = (int(rng.integers(num_qubits)),)
        else:
            targets = tuple(int(x) for x in rng.choice(num_qubits, 2, replace=False))
        theta = float(rng.uniform(-np.pi, np.pi)) if kind in PARAMETRIC else None
        matrix = None
        if kind == "U1q":
            matrix = unitary_group.rvs(2, random_state=rng)
        elif kind == "U2q":
            matrix = unitary_group.rvs(4, random_state=rng)
        gates.append(Gate(kind, targets, theta, matrix))
    return Circuit(num_qubits, tuple(gates))
