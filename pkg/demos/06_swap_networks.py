# %% [markdown]
# # SWAP networks on a line
#
# n layers of alternating nearest-neighbour SWAPs bring every pair of qubits
# next to each other exactly once and reverse the line.  Fusing a ZZ rotation
# into each SWAP gives all-to-all ZZ evolution with nearest-neighbour gates only.

# %%
import numpy as np
from scipy.linalg import expm

from qcsc.circuits import to_matrix
from qcsc.pauli import QubitOperator
from qcsc.pauli import to_matrix as operator_matrix
from qcsc.swapnet import compile_dense_interactions, layout_permutation, swap_network

# %%
sched = swap_network(5)
for k, layer in enumerate(sched.layers, start=1):
    print(f"layer {k}: {layer}")
print("meetings:", [(m.i, m.j) for m in sched.meeting_log])
print("final layout:", sched.final_layout)

# %% [markdown]
# Compile exp(-i t sum c_ij Z_i Z_j) for random couplings and compare with the
# exact exponential once the final qubit relabelling is accounted for.

# %%
n, t = 5, 0.8
rng = np.random.default_rng(1)
op = QubitOperator.from_terms([(f"Z{i} Z{j}", rng.normal()) for i in range(n)
                               for j in range(i + 1, n)], n)
circuit = compile_dense_interactions(op, n, t)
want = layout_permutation(sched.final_layout, n) @ expm(-1j * t * operator_matrix(op))
print(len(circuit), "two-qubit blocks, all nearest-neighbour:",
      all(abs(g.targets[0] - g.targets[1]) == 1 for g in circuit.gates))
print("max deviation", np.abs(to_matrix(circuit) - want).max())
