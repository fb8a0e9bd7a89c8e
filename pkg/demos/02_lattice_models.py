# %% [markdown]
# # Lattice models and exact spectra
#
# Fermionic models are mapped to qubits with Jordan-Wigner (mode 2*site + spin),
# spin models are written directly in Pauli form.  Exact diagonalization gives
# reference energies for small sizes.

# %%
import numpy as np

from qcsc.lattice import (
    RUCL3_PARAMS,
    LatticeSpec,
    emery_hamiltonian,
    exact_spectrum,
    heisenberg,
    hubbard_hamiltonian,
    kitaev_heisenberg,
)

# %% [markdown]
# Two-site Hubbard model at half filling.  The closed form
# (U - sqrt(U^2 + 16 t^2)) / 2 is a handy check.

# %%
for u in (0.0, 4.0, 8.0):
    h = hubbard_hamiltonian(LatticeSpec.chain(2), 1.0, u)
    e0 = exact_spectrum(h, 1, n_particles=2)[0]
    print(f"U={u:3.0f}  E0={e0:+.6f}  closed form {(u - np.sqrt(u * u + 16)) / 2:+.6f}")

# %% [markdown]
# Heisenberg rings: the four-site ring has E0 = -2 for J = 1 with S = sigma/2.

# %%
for n in (4, 6, 8):
    h = heisenberg(LatticeSpec.chain(n, periodic=True), 1.0)
    print(f"ring of {n}: E0 = {exact_spectrum(h, 1)[0]:+.6f}")

# %% [markdown]
# Kitaev-Heisenberg hexagon with the alpha-RuCl3 parameter set.

# %%
print(RUCL3_PARAMS)
hexagon = LatticeSpec.honeycomb(1, 1)
print("bonds:", hexagon.typed_bonds())
h = kitaev_heisenberg(hexagon, **RUCL3_PARAMS)
print(len(h), "Pauli terms; lowest levels", np.round(exact_spectrum(h, 4), 4))

# %% [markdown]
# One cell of the three-band Emery model (d, px, py orbitals).

# %%
h = emery_hamiltonian(1, t_pd=1.3, t_pp=0.65, delta_pd=3.6, U_d=8.0, U_p=4.0, V_pd=1.2)
print(h.num_qubits, "qubits,", len(h), "terms")
print("two-hole ground energy", round(exact_spectrum(h, 1, n_particles=2)[0], 6))
