# %% [markdown]
# # State-vector and density-matrix simulation
#
# The state-vector simulator applies gates in place with strided kernels
# (qubit q is bit 2^q of the basis index).  The density-matrix simulator adds
# Kraus channels after each gate according to a noise model.

# %%
import time

import numpy as np

from qcsc.circuits import Circuit, Gate, random_circuit
from qcsc.density import NoiseModel, expectation_dm, run_noisy, trace_distance
from qcsc.pauli import QubitOperator
from qcsc.statevector import StateVec, expectation, run, sample

# %% [markdown]
# A GHZ state, its sampled bitstrings and a parity expectation.

# %%
ghz = Circuit(3, (Gate("H", (0,)), Gate("CX", (0, 1)), Gate("CX", (1, 2))))
psi = run(ghz)
print(np.round(psi.amplitudes, 4))
print({format(k, "03b"): v for k, v in sample(psi, 1000, seed=1).items()})
zz = QubitOperator.from_terms([("Z0 Z2", 1.0)], 3)
print("<Z0 Z2> =", expectation(psi, zz))

# %% [markdown]
# Without noise the two simulators agree to machine precision.

# %%
rng = np.random.default_rng(3)
c = random_circuit(4, 25, rng)
pure = run(c).amplitudes
rho = run_noisy(c, None)
print("trace distance", trace_distance(rho, np.outer(pure, pure.conj())))

# %% [markdown]
# Depolarizing noise on every gate pulls <Z0 Z2> towards zero.

# %%
for p in (0.0, 0.01, 0.05, 0.1):
    value = expectation_dm(run_noisy(ghz, NoiseModel.uniform_depolarizing(p)), zz)
    print(f"p={p:.2f}  <Z0 Z2> = {value:.4f}")

# %% [markdown]
# A 20-qubit random circuit, for a feel of kernel speed.

# %%
big = random_circuit(20, 500, np.random.default_rng(0))
run(random_circuit(3, 10, rng))  # compile the kernels first
t0 = time.perf_counter()
out = run(big)
print(f"20 qubits, 500 gates: {time.perf_counter() - t0:.2f} s, norm {out.norm():.12f}")
