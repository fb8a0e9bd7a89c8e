"""Synthetic workloads: a chained VQE loop and a saturating fair-share mix."""

from __future__ import annotations

from .model import BurstPolicy, Device, Job, Scenario, simple_tree

VQE_DEFAULT_SIZES = {
    "n_qubits": 8,
    "depth": 20,
    "preprocess_us": 5_000_000,
    "update_us": 200_000,
    "nodes": 1,
}


def gen_vqe_workload(iterations: int, circuits_per_iter: int, shots: int, sizes: dict | None = None,
                     project: str = "hub/group/vqe", prefix: str = "vqe") -> list[Job]:
    """One classical preprocessing job, then per iteration a quantum job and a
    classical parameter update, each depending on the previous job.

    ``sizes`` may override ``n_qubits``, ``depth``, ``preprocess_us``,
    ``update_us`` and ``nodes`` (classical nodes held by each step).
    """
    if iterations < 1:
        raise ValueError("iterations must be >= 1")
    s = {**VQE_DEFAULT_SIZES, **(sizes or {})}
    jobs = [Job(f"{prefix}-pre", project, kind="classical", coupling="Quantum_in_HPC",
                circuits=0, depth=0, n_qubits=0, shots=0, classical_node_need=s["nodes"],
                classical_time=s["preprocess_us"])]
    for k in range(iterations):
        q = Job(f"{prefix}-q{k:04d}", project, kind="quantum", coupling="Quantum_in_HPC",
                circuits=circuits_per_iter, depth=s["depth"], n_qubits=s["n_qubits"], shots=shots,
                classical_node_need=s["nodes"], depends_on=(jobs[-1].id,))
        u = Job(f"{prefix}-u{k:04d}", project, kind="classical", coupling="Quantum_in_HPC",
                circuits=0, depth=0, n_qubits=0, shots=0, classical_node_need=s["nodes"],
                classical_time=s["update_us"], depends_on=(q.id,))
        jobs += [q, u]
    return jobs


def saturating_fairshare_scenario(n_jobs: int = 4000, horizon_us: int | None = None,
                                  shares=(1.0, 1.0), lengths=(1, 3)) -> Scenario:
    """Projects with the given shares all submit at time 0 on one QPU.

    Project ``i`` submits ``n_jobs / len(shares)`` identical jobs of
    ``lengths[i]`` circuits (1 ms each on the default device), so demand far
    exceeds capacity and the dispatcher alone decides who runs.  The default
    horizon is half the total work.
    """
    qpu = Device("qpu0", "QPU", qubits=27, gate_time_2q=0.5, readout_time=500.0)
    names = [f"p{i}" for i in range(len(shares))]
    tree = simple_tree(dict(zip(names, shares)))
    per = n_jobs // len(shares)
    jobs, work = [], 0
    for i, name in enumerate(names):
        for k in range(per):
            job = Job(f"{name}-{k:05d}", f"hub/group/{name}", circuits=lengths[i], depth=1000,
                      n_qubits=4, shots=1)
            jobs.append(job)
            work += lengths[i] * 1000
    if horizon_us is None:
        horizon_us = work // 2
    return Scenario([qpu], tree, jobs, BurstPolicy(allow=False), horizon_us)
