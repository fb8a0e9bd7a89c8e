"""State-vector simulation with in-place strided gate kernels.

A 1-qubit gate on qubit ``q`` updates the amplitude pairs
``(s_i, s_i + 2**q)`` with ``s_i = floor(i / 2**q) * 2**(q+1) + i % 2**q``
for ``i`` in ``[0, 2**(n-1))``.  A 2-qubit gate on ``p < q`` updates the blocks
``(s_i, s_i + 2**p, s_i + 2**q, s_i + 2**p + 2**q)`` for ``i`` in
``[0, 2**(n-2))``.  The kernels loop over ``i`` exactly like that; blocks are
disjoint so the parallel loop gives bitwise-identical results for any thread
count.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numba
import numpy as np
from numba import njit, prange
from numba.core.errors import NumbaWarning

from .circuits import SWAP, Circuit, Gate, is_unitary
from .pauli import QubitOperator, pauli_action

# numba falls back to another threading layer when the system TBB is too old
warnings.filterwarnings("ignore", message="The TBB threading layer", category=NumbaWarning)

BYTES_PER_AMPLITUDE = 16


def index_1q(i, q):
    """Base index ``s_i`` of the ``i``-th amplitude pair for a gate on ``q``."""
    return (i // (1 << q)) * (1 << (q + 1)) + i % (1 << q)


def index_2q(i, p, q):
    """Base index ``s_i`` of the ``i``-th 4-block for a gate on ``p < q``."""
    hi = i // (1 << p)
    return ((hi // (1 << (q - p - 1))) * (1 << (q + 1))
            + (hi % (1 << (q - p - 1))) * (1 << (p + 1)) + i % (1 << p))


@njit(parallel=True, cache=True)
def _kernel_1q(psi, u, q):
    stride = 1 << q
    low = stride - 1
    u00, u01, u10, u11 = u[0, 0], u[0, 1], u[1, 0], u[1, 1]
    for i in prange(psi.shape[0] >> 1):
        s = ((i >> q) << (q + 1)) + (i & low)
        a0 = psi[s]
        a1 = psi[s + stride]
        psi[s] = u00 * a0 + u01 * a1
        psi[s + stride] = u10 * a0 + u11 * a1


@njit(parallel=True, cache=True)
def _kernel_2q(psi, u, p, q):
    sp = 1 << p
    sq = 1 << q
    lowp = sp - 1
    midmask = (1 << (q - p - 1)) - 1
    for i in prange(psi.shape[0] >> 2):
        hi = i >> p
        s = ((hi >> (q - p - 1)) << (q + 1)) + ((hi & midmask) << (p + 1)) + (i & lowp)
        a0 = psi[s]
        a1 = psi[s + sp]
        a2 = psi[s + sq]
        a3 = psi[s + sp + sq]
        for r in range(4):
            psi[s + (r & 1) * sp + (r >> 1) * sq] = (
                u[r, 0] * a0 + u[r, 1] * a1 + u[r, 2] * a2 + u[r, 3] * a3)


def _ordered_2q(u: np.ndarray, p: int, q: int):
    """Reorder targets to ``p < q``, conjugating ``u`` by the bit swap if needed."""
    if p < q:
        return u, p, q
    return SWAP @ u @ SWAP, q, p


def set_num_threads(n: int) -> None:
    """Cap the data-parallel kernel threads."""
    numba.set_num_threads(max(1, min(int(n), numba.config.NUMBA_NUM_THREADS)))


@dataclass
class StateVec:
    """Amplitudes of an ``n``-qubit pure state; bit ``q`` of an index is qubit ``q``."""

    num_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        self.amplitudes = np.ascontiguousarray(self.amplitudes, dtype=np.complex128)
        if self.amplitudes.shape != (1 << self.num_qubits,):
            raise ValueError(f"expected {1 << self.num_qubits} amplitudes, "
                             f"got shape {self.amplitudes.shape}")

    @classmethod
    def zeros(cls, num_qubits: int) -> "StateVec":
        """The basis state |0...0>."""
        amps = np.zeros(1 << num_qubits, dtype=np.complex128)
        amps[0] = 1
        return cls(num_qubits, amps)

    @classmethod
    def basis(cls, num_qubits: int, index: int) -> "StateVec":
        amps = np.zeros(1 << num_qubits, dtype=np.complex128)
        amps[index] = 1
        return cls(num_qubits, amps)

    @classmethod
    def random(cls, num_qubits: int, rng: np.random.Generator) -> "StateVec":
        amps = rng.normal(size=1 << num_qubits) + 1j * rng.normal(size=1 << num_qubits)
        return cls(num_qubits, amps / np.linalg.norm(amps))

    @staticmethod
    def memory_bytes(num_qubits: int) -> int:
        return BYTES_PER_AMPLITUDE << num_qubits

    def norm(self) -> float:
        return float(np.vdot(self.amplitudes, self.amplitudes).real)

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def copy(self) -> "StateVec":
        return StateVec(self.num_qubits, self.amplitudes.copy())


def _check_qubit(s: StateVec, q: int):
    if not 0 <= q < s.num_qubits:
        raise IndexError(f"qubit {q} out of range for {s.num_qubits} qubits")


def apply_1q(s: StateVec, u: np.ndarray, q: int) -> None:
    """Apply a 2x2 unitary to qubit ``q`` in place."""
    _check_qubit(s, q)
    u = np.asarray(u, dtype=np.complex128)
    if u.shape != (2, 2) or not is_unitary(u):
        raise ValueError("U must be a 2x2 unitary")
    _kernel_1q(s.amplitudes, u, q)


def apply_2q(s: StateVec, u: np.ndarray, p: int, q: int) -> None:
    """Apply a 4x4 unitary in place; local basis index is ``bit_p + 2*bit_q``."""
    _check_qubit(s, p)
    _check_qubit(s, q)
    if p == q:
        raise ValueError("two-qubit gate needs distinct qubits")
    u = np.asarray(u, dtype=np.complex128)
    if u.shape != (4, 4) or not is_unitary(u):
        raise ValueError("U must be a 4x4 unitary")
    u, p, q = _ordered_2q(u, p, q)
    _kernel_2q(s.amplitudes, np.ascontiguousarray(u), p, q)


def apply_gate(s: StateVec, g: Gate) -> None:
    # gate matrices are validated when the Gate is built
    if g.arity == 1:
        _check_qubit(s, g.targets[0])
        _kernel_1q(s.amplitudes, g.matrix.astype(np.complex128), g.targets[0])
    else:
        p, q = g.targets
        _check_qubit(s, p)
        _check_qubit(s, q)
        u, p, q = _ordered_2q(g.matrix, p, q)
        _kernel_2q(s.amplitudes, np.ascontiguousarray(u, dtype=np.complex128), p, q)


def run(c: Circuit, init: StateVec | None = None) -> StateVec:
    """Simulate ``c`` on a copy of ``init`` (default |0...0>)."""
    if init is None:
        state = StateVec.zeros(c.num_qubits)
    else:
        if init.num_qubits != c.num_qubits:
            raise ValueError("initial state size does not match circuit")
        state = init.copy()
    for g in c.gates:
        apply_gate(state, g)
    return state


def expectation(s: StateVec, op: QubitOperator) -> float:
    """``<psi|op|psi>`` evaluated term by term from bit masks."""
    if op.num_qubits > s.num_qubits:
        raise ValueError(f"operator on {op.num_qubits} qubits, state has {s.num_qubits}")
    if not op.is_hermitian:
        raise ValueError("expectation needs a Hermitian operator")
    psi = s.amplitudes
    idx = np.arange(psi.shape[0], dtype=np.int64)
    total = 0j
    for term in op.terms:
        flip, phase = pauli_action(term, s.num_qubits)
        # P|b> = phase[b] |b ^ flip>
        total += term.coeff * np.sum(np.conj(psi[idx ^ flip]) * phase * psi)
    return float(total.real)


def sample(s: StateVec, shots: int, seed: int = 0) -> dict[int, int]:
    """Histogram ``{basis index: count}`` of ``shots`` computational-basis draws."""
    if shots < 1:
        raise ValueError("shots must be >= 1")
    probs = s.probabilities()
    probs = probs / probs.sum()
    counts = np.random.default_rng(seed).multinomial(shots, probs)
    nz = np.flatnonzero(counts)
    return {int(i): int(counts[i]) for i in nz}


def sample_array(s: StateVec, shots: int, rng: np.random.Generator) -> np.ndarray:
    """``shots`` basis-state indices drawn from ``|amplitude|^2``."""
    probs = s.probabilities()
    return rng.choice(probs.shape[0], size=shots, p=probs / probs.sum())
