"""Odd-even SWAP networks for all-pairs interactions on a line of qubits.

Layer ``k`` (1-based) swaps position pairs ``(0,1), (2,3), ...`` when ``k`` is
odd and ``(1,2), (3,4), ...`` when ``k`` is even.  After ``n`` layers every
pair of logical qubits has been adjacent exactly once (at the moment it is
swapped) and the logical order is reversed.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .circuits import SWAP, Circuit, Gate, rzz_matrix
from .pauli import QubitOperator


@dataclass(frozen=True)
class Meeting:
    i: int
    j: int
    layer: int
    position: int


@dataclass(frozen=True)
class SwapSchedule:
    n: int
    layers: tuple[tuple[tuple[int, int], ...], ...]
    meeting_log: tuple[Meeting, ...]
    initial_layout: tuple[int, ...] = field(default=())

    @property
    def final_layout(self) -> tuple[int, ...]:
        """Logical qubit held by each position once the network has run."""
        layout = list(self.initial_layout)
        for layer in self.layers:
            for p, q in layer:
                layout[p], layout[q] = layout[q], layout[p]
        return tuple(layout)

    def to_json_dict(self) -> dict:
        return {
            "n": self.n,
            "initial_layout": list(self.initial_layout),
            "layers": [[list(pair) for pair in layer] for layer in self.layers],
            "meetings": [[m.i, m.j, m.layer, m.position] for m in self.meeting_log],
        }


def swap_network(n: int, initial_layout=None) -> SwapSchedule:
    """Odd-even transposition network on ``n`` positions.

    ``initial_layout[p]`` is the logical qubit starting at position ``p``
    (identity by default).  Meetings record logical pairs as ``(min, max)``.
    """
    if n < 2:
        raise ValueError("a SWAP network needs n >= 2")
    layout = list(range(n)) if initial_layout is None else [int(x) for x in initial_layout]
    if sorted(layout) != list(range(n)):
        raise ValueError("initial_layout must be a permutation of range(n)")
    start = tuple(layout)
    layers, meetings = [], []
    for k in range(1, n + 1):
        first = 0 if k % 2 == 1 else 1
        pairs = tuple((p, p + 1) for p in range(first, n - 1, 2))
        for p, q in pairs:
            a, b = layout[p], layout[q]
            meetings.append(Meeting(min(a, b), max(a, b), k, p))
            layout[p], layout[q] = b, a
        layers.append(pairs)
    return SwapSchedule(n, tuple(layers), tuple(meetings), start)


def _pair_coefficients(op: QubitOperator, n: int, axes: str = "ZZ") -> dict[tuple[int, int], float]:
    if not op.is_hermitian:
        raise ValueError("interaction coefficients must be real")
    coeffs = {}
    for term in op.terms:
        if term.weight != 2 or any(a != axes[0] for _, a in term.paulis):
            raise ValueError(f"term {term.label()!r} is not a {axes} pair interaction")
        i, j = term.support
        if j >= n:
            raise ValueError(f"term {term.label()!r} acts outside {n} qubits")
        coeffs[(i, j)] = term.coeff.real
    return coeffs


def compile_dense_interactions(op: QubitOperator, n: int, t: float = 1.0,
                               initial_layout=None) -> Circuit:
    """Circuit for ``prod exp(-i c_ij t Z_i Z_j)`` using only adjacent positions.

    Each meeting emits one 2-qubit block ``SWAP . RZZ(2 c_ij t)`` on the two
    positions (a pure SWAP when the pair has no term).  Qubit indices in the
    circuit are positions; the logical order at the end is
    ``swap_network(n, initial_layout).final_layout``.
    """
    coeffs = _pair_coefficients(op, n)
    sched = swap_network(n, initial_layout)
    by_layer = {}
    for m in sched.meeting_log:
        by_layer[(m.layer, m.position)] = coeffs.get((m.i, m.j), 0.0)
    gates = []
    for k, layer in enumerate(sched.layers, start=1):
        for p, q in layer:
            c = by_layer[(k, p)]
            block = SWAP @ rzz_matrix(2 * c * t) if c else SWAP
            gates.append(Gate("U2q", (p, q), matrix_=block))
    return Circuit(n, tuple(gates))


def layout_permutation(layout, n: int) -> np.ndarray:
    """Permutation matrix sending logical qubit ``layout[p]`` to position ``p``."""
    dim = 1 << n
    perm = np.zeros((dim, dim))
    for b in range(dim):
        image = 0
        for p, logical in enumerate(layout):
            if b >> logical & 1:
                image |= 1 << p
        perm[image, b] = 1
    return perm


def schedule_json(n: int) -> str:
    return json.dumps(swap_network(n).to_json_dict())
