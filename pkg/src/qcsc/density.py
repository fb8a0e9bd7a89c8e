"""Density-matrix simulation with gate conjugation and Kraus noise channels.

``rho`` is stored row-major, so its flattened form is a vector over ``2n``
bits: column qubit ``q`` is bit ``q`` and row qubit ``q`` is bit ``n + q``.
``G rho G^dagger`` is then two strided kernel passes on that vector, ``G`` on
the row bits followed by ``conj(G)`` on the column bits, and the ``2**n``-sized
operator is never formed.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field

import numpy as np

from .circuits import Circuit, Gate, KINDS, ONE_QUBIT
from .pauli import QubitOperator, pauli_action
from .statevector import StateVec, _kernel_1q, _kernel_2q, _ordered_2q

MAX_DM_QUBITS = 13

_PAULIS = [np.eye(2, dtype=complex), np.array([[0, 1], [1, 0]], dtype=complex),
           np.array([[0, -1j], [1j, 0]]), np.diag([1.0 + 0j, -1.0])]


@dataclass
class DensityMatrix:
    num_qubits: int
    data: np.ndarray

    def __post_init__(self):
        if self.num_qubits > MAX_DM_QUBITS:
            raise ValueError(f"{self.num_qubits} qubits exceeds density-matrix limit {MAX_DM_QUBITS}")
        dim = 1 << self.num_qubits
        self.data = np.ascontiguousarray(self.data, dtype=np.complex128)
        if self.data.shape != (dim, dim):
            raise ValueError(f"expected {dim}x{dim} matrix, got {self.data.shape}")

    @classmethod
    def zeros(cls, num_qubits: int) -> "DensityMatrix":
        dim = 1 << num_qubits
        data = np.zeros((dim, dim), dtype=np.complex128)
        data[0, 0] = 1
        return cls(num_qubits, data)

    @classmethod
    def from_state(cls, s: StateVec) -> "DensityMatrix":
        psi = s.amplitudes
        return cls(s.num_qubits, np.outer(psi, psi.conj()))

    @classmethod
    def maximally_mixed(cls, num_qubits: int) -> "DensityMatrix":
        dim = 1 << num_qubits
        return cls(num_qubits, np.eye(dim, dtype=np.complex128) / dim)

    def copy(self) -> "DensityMatrix":
        return DensityMatrix(self.num_qubits, self.data.copy())

    def trace(self) -> complex:
        return complex(np.trace(self.data))

    def is_valid(self, atol: float = 1e-9, psd_tol: float = 1e-8) -> bool:
        d = self.data
        if not np.allclose(d, d.conj().T, atol=atol, rtol=0):
            return False
        if abs(self.trace() - 1) > atol:
            return False
        return bool(np.linalg.eigvalsh(d).min() >= -psd_tol)

    def _flat(self) -> np.ndarray:
        return self.data.reshape(-1)


def _conjugate(flat: np.ndarray, n: int, u: np.ndarray, targets: tuple[int, ...]) -> None:
    """``rho <- u rho u^dagger`` on the flattened matrix; ``u`` need not be unitary."""
    u = np.asarray(u, dtype=np.complex128)
    if len(targets) == 1:
        q = targets[0]
        _kernel_1q(flat, u, n + q)
        _kernel_1q(flat, np.ascontiguousarray(u.conj()), q)
    else:
        m, p, q = _ordered_2q(u, *targets)
        m = np.ascontiguousarray(m)
        _kernel_2q(flat, m, n + p, n + q)
        _kernel_2q(flat, np.ascontiguousarray(m.conj()), p, q)


def _check_targets(rho: DensityMatrix, targets):
    for q in targets:
        if not 0 <= q < rho.num_qubits:
            raise IndexError(f"qubit {q} out of range for {rho.num_qubits} qubits")


def apply_gate(rho: DensityMatrix, g: Gate) -> None:
    """``rho <- G rho G^dagger`` in place."""
    _check_targets(rho, g.targets)
    _conjugate(rho._flat(), rho.num_qubits, g.matrix, g.targets)


def check_kraus(kraus, atol: float = 1e-9) -> list[np.ndarray]:
    """Validate a trace-preserving Kraus set and return it as arrays."""
    ops = [np.asarray(k, dtype=np.complex128) for k in kraus]
    if not ops:
        raise ValueError("empty Kraus set")
    dim = ops[0].shape[0]
    if dim not in (2, 4) or any(k.shape != (dim, dim) for k in ops):
        raise ValueError("Kraus operators must all be 2x2 or all 4x4")
    total = sum(k.conj().T @ k for k in ops)
    if not np.allclose(total, np.eye(dim), atol=atol, rtol=0):
        raise ValueError("channel is not trace preserving (sum K^dagger K != I)")
    return ops


def apply_channel(rho: DensityMatrix, kraus, targets: tuple[int, ...] | None = None) -> None:
    """``rho <- sum_k K rho K^dagger`` on ``targets`` (default: all qubits)."""
    ops = check_kraus(kraus)
    arity = 1 if ops[0].shape[0] == 2 else 2
    if targets is None:
        targets = tuple(range(rho.num_qubits))
    targets = tuple(targets)
    if len(targets) != arity:
        raise ValueError(f"{arity}-qubit channel given targets {targets}")
    _check_targets(rho, targets)
    flat = rho._flat()
    acc = np.zeros_like(flat)
    for k in ops:
        tmp = flat.copy()
        _conjugate(tmp, rho.num_qubits, k, targets)
        acc += tmp
    flat[:] = acc


# -- channels -----------------------------------------------------------------

def depolarizing(p: float, arity: int = 1) -> list[np.ndarray]:
    """``rho -> (1-p) rho + p I/d`` written with the ``d**2`` Pauli strings.

    Every non-identity Pauli string gets weight ``p/d**2``, so the 2-qubit
    channel is uniform over the 15 non-identity strings.
    """
    if not 0 <= p <= 1:
        raise ValueError("depolarizing p must be in [0, 1]")
    d2 = 4 ** arity
    ops = []
    for labels in itertools.product(range(4), repeat=arity):
        mat = np.eye(1, dtype=complex)
        for lab in reversed(labels):
            mat = np.kron(mat, _PAULIS[lab])
        weight = 1 - p * (d2 - 1) / d2 if not any(labels) else p / d2
        ops.append(np.sqrt(weight) * mat)
    return ops


def amplitude_damping(gamma: float) -> list[np.ndarray]:
    if not 0 <= gamma <= 1:
        raise ValueError("gamma must be in [0, 1]")
    return [np.array([[1, 0], [0, np.sqrt(1 - gamma)]], dtype=complex),
            np.array([[0, np.sqrt(gamma)], [0, 0]], dtype=complex)]


def bit_flip(p: float) -> list[np.ndarray]:
    return [np.sqrt(1 - p) * _PAULIS[0], np.sqrt(p) * _PAULIS[1]]


def phase_flip(p: float) -> list[np.ndarray]:
    return [np.sqrt(1 - p) * _PAULIS[0], np.sqrt(p) * _PAULIS[3]]


def _channel_from_spec(spec: dict, arity: int) -> list[np.ndarray]:
    name = spec["channel"]
    if name == "depolarizing":
        return depolarizing(float(spec["p"]), arity)
    if name == "kraus":
        return [np.array([[complex(*z) for z in row] for row in k]) for k in spec["operators"]]
    if arity != 1:
        raise ValueError(f"channel {name!r} is single-qubit only")
    if name == "amplitude_damping":
        return amplitude_damping(float(spec.get("gamma", spec.get("p"))))
    if name == "bit_flip":
        return bit_flip(float(spec["p"]))
    if name == "phase_flip":
        return phase_flip(float(spec["p"]))
    raise ValueError(f"unknown channel {name!r}")


@dataclass
class NoiseModel:
    """Kraus channel per gate kind, applied on the gate's targets after the gate."""

    channels: dict[str, list[np.ndarray]] = field(default_factory=dict)

    def __post_init__(self):
        checked = {}
        for kind, kraus in self.channels.items():
            if kind not in KINDS:
                raise ValueError(f"unknown gate kind {kind!r} in noise model")
            ops = check_kraus(kraus)
            arity = 1 if kind in ONE_QUBIT else 2
            if ops[0].shape[0] != 2 ** arity:
                raise ValueError(f"{kind} needs a {arity}-qubit channel")
            checked[kind] = ops
        self.channels = checked

    @classmethod
    def uniform_depolarizing(cls, p: float) -> "NoiseModel":
        return cls({k: depolarizing(p, 1 if k in ONE_QUBIT else 2) for k in KINDS})

    @classmethod
    def from_json_dict(cls, data: dict) -> "NoiseModel":
        """Parse ``{"gates": {"CX": {"channel": "depolarizing", "p": 0.01}}}``.

        The key ``"*"`` supplies a channel for every kind not listed.
        """
        gates = dict(data.get("gates", {}))
        default = gates.pop("*", None)
        channels = {}
        for kind in sorted(KINDS):
            spec = gates.pop(kind, default)
            if spec is not None:
                channels[kind] = _channel_from_spec(spec, 1 if kind in ONE_QUBIT else 2)
        if gates:
            raise ValueError(f"unknown gate kinds in noise model: {sorted(gates)}")
        return cls(channels)

    @classmethod
    def loads(cls, text: str) -> "NoiseModel":
        return cls.from_json_dict(json.loads(text))


def run_noisy(c: Circuit, nm: NoiseModel | None = None,
              init: DensityMatrix | StateVec | None = None) -> DensityMatrix:
    """Apply each gate, then its kind's channel on the same targets."""
    if c.num_qubits > MAX_DM_QUBITS:
        raise ValueError(f"{c.num_qubits} qubits exceeds density-matrix limit {MAX_DM_QUBITS}")
    if init is None:
        rho = DensityMatrix.zeros(c.num_qubits)
    elif isinstance(init, StateVec):
        rho = DensityMatrix.from_state(init)
    else:
        rho = init.copy()
    if rho.num_qubits != c.num_qubits:
        raise ValueError("initial state size does not match circuit")
    channels = nm.channels if nm is not None else {}
    flat = rho._flat()
    for g in c.gates:
        apply_gate(rho, g)
        kraus = channels.get(g.kind)
        if kraus is not None:
            acc = np.zeros_like(flat)
            for k in kraus:
                tmp = flat.copy()
                _conjugate(tmp, rho.num_qubits, k, g.targets)
                acc += tmp
            flat[:] = acc
    return rho


def expectation_dm(rho: DensityMatrix, op: QubitOperator) -> float:
    """``Tr(rho op)`` summed over Pauli terms."""
    if op.num_qubits > rho.num_qubits:
        raise ValueError(f"operator on {op.num_qubits} qubits, state has {rho.num_qubits}")
    if not op.is_hermitian:
        raise ValueError("expectation needs a Hermitian operator")
    idx = np.arange(1 << rho.num_qubits, dtype=np.int64)
    total = 0j
    for term in op.terms:
        flip, phase = pauli_action(term, rho.num_qubits)
        total += term.coeff * np.sum(phase * rho.data[idx, idx ^ flip])
    return float(total.real)


def trace_distance(a: DensityMatrix | np.ndarray, b: DensityMatrix | np.ndarray) -> float:
    a = a.data if isinstance(a, DensityMatrix) else np.asarray(a)
    b = b.data if isinstance(b, DensityMatrix) else np.asarray(b)
    return 0.5 * float(np.abs(np.linalg.eigvalsh(a - b)).sum())
