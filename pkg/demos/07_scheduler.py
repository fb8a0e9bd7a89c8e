# %% [markdown]
# # Scheduling quantum and classical jobs
#
# A discrete-event simulation of QPUs and classical nodes.  Jobs are ordered
# by fair share (usage relative to entitlement in a hub/group/project tree),
# tightly coupled jobs hold their classical nodes while on the QPU, and loosely
# coupled jobs may burst to cloud QPUs for capacity or deadlines.

# %%
from collections import Counter

from qcsc.sched import (
    BurstPolicy,
    Device,
    Job,
    Scenario,
    check_colocation,
    check_non_preemption,
    gen_vqe_workload,
    predict_runtime,
    saturating_fairshare_scenario,
    simple_tree,
    simulate,
)

# %% [markdown]
# Runtime model: circuits * shots * (depth * 2q gate time + readout) + latency.

# %%
qpu = Device("qpu0", "QPU", qubits=27, gate_time_2q=0.5, readout_time=500.0)
print(predict_runtime(Job("j", "hub/group/a", circuits=2, shots=1000, depth=100), qpu), "us")

# %% [markdown]
# Saturated single QPU with two equal-share projects; one submits jobs three
# times longer than the other.  Fair share still splits QPU time evenly.

# %%
res = simulate(saturating_fairshare_scenario(2000))
print(res.metrics["project_used_us"])
print("completed", res.metrics["completed"], "pending", res.metrics["pending_at_end"])

# %% [markdown]
# A chained VQE loop (classical preprocessing, then quantum evaluation and
# classical update per iteration) on one QPU and two nodes.

# %%
devices = [qpu, Device("node0", "CPU-node"), Device("node1", "CPU-node")]
scen = Scenario(devices, simple_tree({"vqe": 1}), gen_vqe_workload(3, 4, 200))
res = simulate(scen)
for rec in res.log.of_kind("start"):
    print(f"{rec['time']:>10d}  {rec['job']:10s} device={rec['device']} nodes={rec['nodes']}")
print("makespan", res.metrics["makespan_us"], "us")
print("non-preemption problems:", check_non_preemption(res.log))

# %% [markdown]
# Cloud bursting: a wide job does not fit locally and an urgent job would
# miss its deadline behind a long one.

# %%
cloud = Device("cloud0", "QPU", qubits=127, gate_time_2q=0.1, readout_time=100.0,
               location="cloud", cost_per_us=1.0)
jobs = [Job("long", "hub/group/a", circuits=10, shots=100, depth=100),
        Job("urgent", "hub/group/a", shots=100, depth=10, deadline=200_000),
        Job("wide", "hub/group/a", n_qubits=100, shots=10),
        Job("tight", "hub/group/a", n_qubits=100, coupling="HPC_for_Quantum")]
scen = Scenario([qpu, cloud], simple_tree({"a": 1}), jobs, BurstPolicy(allow=True))
res = simulate(scen)
for rec in res.log.of_kind("assign") + res.log.of_kind("unschedulable"):
    print(rec)
print("co-location problems:", check_colocation(res.log, scen))
print(Counter(r["kind"] for r in res.log))
