from __future__ import annotations

import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qcsc.sched import (
    BurstPolicy,
    CloudEndpoint,
    Device,
    EventLog,
    Job,
    Scenario,
    ScenarioError,
    ShareNode,
    burst_decision,
    calibrate_runtime,
    check_colocation,
    check_dependencies,
    check_non_preemption,
    execution_intervals,
    fairshare_next,
    gen_vqe_workload,
    predict_runtime,
    saturating_fairshare_scenario,
    simple_tree,
    simulate,
)

QPU = Device("qpu0", "QPU", qubits=27, gate_time_2q=0.5, readout_time=500.0)


def _job(jid, project="hub/group/a", **kw):
    return Job(jid, project, **kw)


# -- runtime model ------------------------------------------------------------------

def test_predict_runtime_examples():
    # 1 circuit, 1000 shots, depth 100: 1000 * (50 + 500)
    job = _job("j", circuits=1, shots=1000, depth=100, n_qubits=5)
    assert predict_runtime(job, QPU) == 550_000
    slow = Device("q", "QPU", qubits=27, gate_time_2q=0.5, readout_time=500.0, submit_latency=7)
    assert predict_runtime(job, slow) == 550_007
    assert predict_runtime(_job("z", circuits=0), QPU) == 0
    with pytest.raises(ValueError):
        predict_runtime(_job("big", n_qubits=28), QPU)
    with pytest.raises(ValueError):
        predict_runtime(job, Device("cpu", "CPU-node"))


@given(st.integers(0, 50), st.integers(0, 2000), st.integers(0, 500), st.integers(1, 20))
@settings(max_examples=100, deadline=None)
def test_predict_runtime_monotone(circuits, shots, depth, bump):
    base = _job("j", circuits=circuits, shots=shots, depth=depth)
    t0 = predict_runtime(base, QPU)
    for field in ("circuits", "shots", "depth"):
        bigger = _job("j", **{"circuits": circuits, "shots": shots, "depth": depth,
                              field: getattr(base, field) + bump})
        assert predict_runtime(bigger, QPU) >= t0


def test_calibrate_runtime_recovers_parameters():
    rng = np.random.default_rng(0)
    rows = []
    for _ in range(20):
        c, s, d = int(rng.integers(1, 5)), int(rng.integers(10, 200)), int(rng.integers(5, 300))
        rows.append({"circuits": c, "shots": s, "depth": d, "duration": c * s * (d * 0.3 + 120.0)})
    g2q, readout = calibrate_runtime(rows)
    assert g2q == pytest.approx(0.3) and readout == pytest.approx(120.0)
    text = "circuits,shots,depth,duration\n" + "\n".join(
        f"{r['circuits']},{r['shots']},{r['depth']},{r['duration']}" for r in rows)
    assert calibrate_runtime(text) == pytest.approx((0.3, 120.0))
    with pytest.raises(ValueError):
        calibrate_runtime(rows[:1])


# -- fair share -------------------------------------------------------------------

def test_fairshare_prefers_underused_project():
    tree = simple_tree({"a": 1, "b": 1})
    tree.find("hub/group/a").charge(100)
    q = [_job("a1"), _job("b1", "hub/group/b", submit_time=5)]
    assert fairshare_next(q, tree, now=10) == "b1"
    assert fairshare_next(q, tree, now=0) == "a1"
    assert fairshare_next([], tree) is None


def test_fairshare_weights_by_share():
    tree = simple_tree({"a": 3, "b": 1})
    tree.find("hub/group/a").charge(200)
    tree.find("hub/group/b").charge(100)
    # a used 200 of a 3/4 share, b used 100 of a 1/4 share
    assert fairshare_next([_job("a1"), _job("b1", "hub/group/b")], tree) == "a1"


def test_fairshare_group_level_first():
    tree = ShareNode.from_json_dict({"hubs": [{"name": "h", "shares": 1, "groups": [
        {"name": "g1", "shares": 1, "projects": [{"name": "p", "shares": 1}]},
        {"name": "g2", "shares": 1, "projects": [{"name": "q", "shares": 1},
                                                 {"name": "r", "shares": 1}]},
    ]}]})
    tree.find("h/g2/q").charge(50)
    # g1 is idle so its project goes first even though h/g2/r itself is idle
    assert fairshare_next([_job("p1", "h/g1/p", submit_time=3), _job("r1", "h/g2/r")],
                          tree, now=5) == "p1"


def test_share_tree_round_trip():
    tree = simple_tree({"a": 2, "b": 1})
    again = ShareNode.from_json_dict(tree.to_json_dict())
    assert [p.path for p in again.projects()] == ["hub/group/a", "hub/group/b"]
    assert again.find("hub/group/a").fraction() == pytest.approx(2 / 3)


# -- bursting ---------------------------------------------------------------------

CLOUD = Device("cloud0", "QPU", qubits=127, gate_time_2q=0.1, readout_time=100.0,
               location="cloud", cost_per_us=1.0)
CLOUD_DEAR = Device("cloud1", "QPU", qubits=127, gate_time_2q=0.1, readout_time=100.0,
                    location="cloud", cost_per_us=5.0)


def test_burst_examples():
    policy = BurstPolicy()
    job = _job("j", circuits=1, shots=100, depth=10, n_qubits=5)
    assert burst_decision(job, [QPU], [CLOUD], policy).reason == "local"
    big = _job("big", n_qubits=100)
    d = burst_decision(big, [QPU], [CLOUD_DEAR, CLOUD], policy)
    assert (d.device, d.reason) == ("cloud0", "capacity")
    late = _job("late", circuits=1, shots=100, depth=10, n_qubits=5, deadline=60_000)
    d = burst_decision(late, [QPU], [CLOUD], policy, now=0, free_at={"qpu0": 50_000})
    assert (d.device, d.reason) == ("cloud0", "deadline")
    assert burst_decision(big, [QPU], [CLOUD], BurstPolicy(allow=False)).reason == "unschedulable"
    assert burst_decision(big, [QPU], [CLOUD], BurstPolicy(deadline_only=True)).reason \
        == "unschedulable"
    tight = _job("t", n_qubits=100, coupling="Quantum_in_HPC")
    assert burst_decision(tight, [QPU], [CLOUD], policy).reason == "unschedulable"


# -- engine -----------------------------------------------------------------------

def _scenario(jobs, devices=(QPU,), projects=("a",), **kw):
    return Scenario(list(devices), simple_tree({p: 1 for p in projects}), list(jobs), **kw)


def test_single_job_starts_immediately():
    job = _job("j", circuits=1, shots=10, depth=10, n_qubits=2, submit_time=100)
    res = simulate(_scenario([job]))
    starts = res.log.of_kind("start")
    assert starts[0]["time"] == 100 and res.metrics["mean_wait_us"] == 0
    assert res.metrics["completed"] == 1
    assert res.metrics["makespan_us"] == predict_runtime(job, QPU)


def test_two_jobs_back_to_back():
    jobs = [_job("a", shots=10, depth=10), _job("b", shots=10, depth=10)]
    res = simulate(_scenario(jobs))
    iv = execution_intervals(res.log)
    dur = predict_runtime(jobs[0], QPU)
    assert (iv["a"]["start"], iv["a"]["end"]) == (0, dur)
    assert (iv["b"]["start"], iv["b"]["end"]) == (dur, 2 * dur)


def test_shared_qpu_runs_in_parallel():
    shared = Device("qpu0", "QPU", qubits=27, gate_time_2q=0.5, readout_time=500.0, shares=2)
    assert shared.resource_model == "shares(2)"
    jobs = [_job(f"j{k}", shots=10, depth=10) for k in range(3)]
    iv = execution_intervals(simulate(_scenario(jobs, (shared,))).log)
    assert iv["j0"]["start"] == iv["j1"]["start"] == 0
    assert {iv["j0"]["slot"], iv["j1"]["slot"]} == {0, 1}
    assert iv["j2"]["start"] == iv["j0"]["end"]
    assert Device.from_json_dict({**shared.to_json_dict()}).shares == 2
    assert Device.from_json_dict({"id": "x", "qubits": 1, "resource_model": "shares(3)"}).shares == 3


def _vqe_scenario(iterations=5, nodes=2):
    devices = [QPU] + [Device(f"node{k}", "CPU-node") for k in range(nodes)]
    jobs = gen_vqe_workload(iterations, 4, 100, project="hub/group/vqe")
    return Scenario(devices, simple_tree({"vqe": 1}), jobs)


def test_vqe_workload_shape_and_chain():
    jobs = gen_vqe_workload(3, 4, 100)
    assert [j.id for j in jobs] == ["vqe-pre", "vqe-q0000", "vqe-u0000", "vqe-q0001",
                                    "vqe-u0001", "vqe-q0002", "vqe-u0002"]
    assert sum(j.is_quantum for j in jobs) == 3
    for prev, nxt in zip(jobs, jobs[1:]):
        assert nxt.depends_on == (prev.id,)
    res = simulate(_vqe_scenario(3))
    expected = sum(res.durations.values())
    assert res.metrics["makespan_us"] == expected
    assert res.metrics["completed"] == 7
    assert check_dependencies(res.log, _vqe_scenario(3)) == []


def test_quantum_in_hpc_holds_nodes():
    scen = _vqe_scenario(2, nodes=1)
    res = simulate(scen)
    for rec in res.log.of_kind("start"):
        assert rec["nodes"] == ["node0"]
    assert check_non_preemption(res.log) == []


def test_determinism_byte_identical():
    scen = saturating_fairshare_scenario(200)
    a = simulate(scen).log.to_jsonl()
    b = simulate(scen).log.to_jsonl()
    assert a == b
    jittered = Scenario.loads(json.dumps({**scen.to_json_dict(), "runtime_jitter": 0.2}))
    assert simulate(jittered, seed=3).log.to_jsonl() == simulate(jittered, seed=3).log.to_jsonl()
    assert simulate(jittered, seed=3).log.to_jsonl() != simulate(jittered, seed=4).log.to_jsonl()


def test_event_log_round_trip():
    log = simulate(_vqe_scenario(2)).log
    again = EventLog.from_jsonl(log.to_jsonl())
    assert again.to_jsonl() == log.to_jsonl()
    with pytest.raises(RuntimeError):
        log.add(0, "submit", "late")


def test_fairness_under_saturation():
    res = simulate(saturating_fairshare_scenario(2000))
    used = res.metrics["project_used_us"]
    a, b = used["hub/group/p0"], used["hub/group/p1"]
    assert abs(a - b) / max(a, b) < 0.05


def test_usage_conservation():
    scen = saturating_fairshare_scenario(400, shares=(2, 1, 1), lengths=(1, 2, 3))
    res = simulate(scen)
    qpu_jobs = [r["job"] for r in res.log.of_kind("start") if r["device"] is not None]
    finished = {r["job"] for r in res.log.of_kind("finish")}
    total = sum(res.durations[j] for j in qpu_jobs if j in finished)
    assert sum(res.metrics["project_used_us"].values()) == total


def test_deadline_job_bursts_and_capacity_job_goes_to_cloud():
    jobs = [_job("long", circuits=10, shots=100, depth=100),
            _job("urgent", shots=100, depth=10, deadline=200_000),
            _job("wide", n_qubits=100, shots=10)]
    res = simulate(_scenario(jobs, (QPU, CLOUD)))
    reasons = {r["job"]: r["reason"] for r in res.log.of_kind("assign")}
    assert reasons == {"long": "local", "urgent": "deadline", "wide": "capacity"}
    assert res.metrics["burst_fraction"] == pytest.approx(2 / 3)


def test_unschedulable_cascades():
    jobs = [_job("wide", n_qubits=100), _job("child", depends_on=("wide",)),
            _job("grandchild", depends_on=("child",))]
    res = simulate(_scenario(jobs, burst_policy=BurstPolicy(allow=False)))
    failed = {r["job"]: r["reason"] for r in res.log.of_kind("unschedulable")}
    assert failed == {"wide": "unschedulable",
                      "child": "dependency_failed", "grandchild": "dependency_failed"}
    assert res.metrics["unschedulable"] == 3


def _random_coupled_scenario(seed):
    rng = np.random.default_rng(seed)
    devices = [QPU, Device("qpu1", "QPU", qubits=10, gate_time_2q=0.3, readout_time=300.0),
               CLOUD] + [Device(f"node{k}", "CPU-node") for k in range(3)]
    jobs = []
    for k in range(60):
        coupling = ["HPC_for_Quantum", "Quantum_in_HPC", "Quantum_about_HPC"][k % 3]
        kind = "classical" if rng.random() < 0.2 else "quantum"
        deps = (f"j{int(rng.integers(k))}",) if k and rng.random() < 0.3 else ()
        jobs.append(Job(f"j{k}", ["hub/group/a", "hub/group/b"][k % 2], kind=kind,
                        coupling=coupling, circuits=int(rng.integers(1, 4)),
                        shots=int(rng.integers(10, 200)), depth=int(rng.integers(5, 100)),
                        n_qubits=int(rng.integers(1, 30)),
                        classical_node_need=int(rng.integers(0, 3)),
                        classical_time=int(rng.integers(1000, 50000)),
                        submit_time=int(rng.integers(0, 200_000)), depends_on=deps))
    return Scenario(devices, simple_tree({"a": 1, "b": 2}), jobs)


@pytest.mark.parametrize("seed", range(5))
def test_invariants_on_random_workloads(seed):
    scen = _random_coupled_scenario(seed)
    res = simulate(scen, seed)
    assert check_non_preemption(res.log) == []
    assert check_colocation(res.log, scen) == []
    assert check_dependencies(res.log, scen) == []
    m = res.metrics
    assert m["completed"] + m["unschedulable"] + m["running_at_end"] + m["pending_at_end"] \
        == len(scen.jobs)
    times = [r["time"] for r in res.log]
    assert times == sorted(times)


def test_horizon_stops_early():
    scen = saturating_fairshare_scenario(100)
    res = simulate(scen)
    assert res.metrics["pending_at_end"] > 0
    assert max(r["time"] for r in res.log) <= scen.horizon_us


def test_validation_reports_paths():
    bad = {
        "devices": [{"id": "q", "kind": "QPU", "qubits": 0},
                    {"id": "q", "kind": "Toaster", "location": "moon"}],
        "share_tree": {"hubs": [{"name": "h", "shares": 1, "groups": [
            {"name": "g", "shares": 1, "projects": [{"name": "p", "shares": 1}]}]}]},
        "jobs": [{"id": "a", "project": "h/g/nope", "coupling": "Tight"},
                 {"id": "b", "project": "h/g/p", "depends_on": ["zzz"], "shots": -1}],
    }
    with pytest.raises(ScenarioError) as info:
        Scenario.from_json_dict(bad)
    paths = {p for p, _, _ in info.value.errors}
    assert {"devices[0].qubits", "devices[1].id", "devices[1].kind", "devices[1].location",
            "jobs[0].project", "jobs[0].coupling", "jobs[1].depends_on",
            "jobs[1].shots"} <= paths
    with pytest.raises(ScenarioError):
        Scenario.from_json_dict({"devices": [{"id": "q", "bogus": 1}]})


def test_dependency_cycle_rejected():
    jobs = [_job("x", depends_on=("y",)), _job("y", depends_on=("x",))]
    with pytest.raises(ScenarioError) as info:
        _scenario(jobs).validate()
    assert info.value.errors[0][1] == "dependency_cycle"


def test_scenario_json_round_trip():
    scen = _random_coupled_scenario(1)
    again = Scenario.loads(json.dumps(scen.to_json_dict()))
    assert simulate(again).log.to_jsonl() == simulate(scen).log.to_jsonl()


def test_cloud_endpoint_lifecycle():
    ep = CloudEndpoint([QPU, CLOUD])
    assert [d.id for d in ep.list_devices()] == ["cloud0"]
    t = ep.submit(_job("j", n_qubits=3), "cloud0", now=5)
    assert ep.status(t) == "queued"
    with pytest.raises(RuntimeError):
        ep.result(t)
    t2 = ep.submit(_job("k"), "cloud0")
    assert ep.cancel(t2) and ep.status(t2) == "cancelled"
    ep._mark(t, "running", 10)
    assert not ep.cancel(t)
    ep._mark(t, "done", 30)
    assert ep.result(t) == {"job": "j", "device": "cloud0", "start": 10, "finish": 30}
    with pytest.raises(KeyError):
        ep.submit(_job("x"), "qpu0")
    with pytest.raises(ValueError):
        ep.submit(_job("x", n_qubits=500), "cloud0")
