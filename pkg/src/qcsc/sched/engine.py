"""Deterministic discrete-event simulation of a hybrid quantum/classical site.

Quantum jobs queue per QPU and are dispatched in fair-share order; classical
jobs share a pool of local CPU/GPU nodes.  Tightly coupled quantum jobs
(``HPC_for_Quantum``, ``Quantum_in_HPC``) start only when their classical
nodes can be reserved at the same time and keep them for the whole quantum
phase; they never leave the site.  Loosely coupled jobs
(``Quantum_about_HPC``) may be sent to cloud QPUs.

Events at the same microsecond are processed as completions first, then
submissions, each group ordered by job id; dispatch runs once all of them
are applied.  Nothing is preempted.  Project usage is accrued when a QPU job
completes and counts toward fair share for ``scheduling_period_us`` after
that.
"""

from __future__ import annotations

import copy
import heapq
import json
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .cloud import CloudEndpoint
from .model import Job, Scenario, ShareNode
from .policy import burst_decision, fairshare_next, predict_runtime

_PRIORITY = {"finish": 0, "submit": 1}


class EventLog:
    """Ordered ``(time, kind, payload)`` records."""

    def __init__(self):
        self.records: list[dict] = []

    def add(self, time: int, kind: str, job: str | None, **payload) -> None:
        if self.records and time < self.records[-1]["time"]:
            raise RuntimeError("event times must be nondecreasing")
        self.records.append({"time": int(time), "kind": kind, "job": job, **payload})

    def __iter__(self):
        return iter(self.records)

    def __len__(self):
        return len(self.records)

    def of_kind(self, kind: str) -> list[dict]:
        return [r for r in self.records if r["kind"] == kind]

    def to_jsonl(self) -> str:
        return "".join(json.dumps(r, sort_keys=True, separators=(",", ":")) + "\n"
                       for r in self.records)

    @classmethod
    def from_jsonl(cls, text: str) -> "EventLog":
        log = cls()
        log.records = [json.loads(line) for line in text.splitlines() if line.strip()]
        return log


@dataclass
class SimResult:
    log: EventLog
    metrics: dict
    tree: ShareNode
    durations: dict[str, int] = field(default_factory=dict)


class _Qpu:
    def __init__(self, device):
        self.device = device
        self.slots: list[int | None] = [None] * device.shares  # end time per busy slot
        self.queues: dict[str, list] = {}  # project -> heap of (submit_time, id)
        self.queued_work = 0
        self.busy = 0

    def free_slot(self) -> int | None:
        for i, end in enumerate(self.slots):
            if end is None:
                return i
        return None

    def projected_free(self, now: int) -> int:
        """Rough time a new job could start: earliest slot plus queued work per slot."""
        earliest = min(now if e is None else e for e in self.slots)
        return earliest + self.queued_work // len(self.slots)


class _Usage:
    """Per-project completed QPU time inside a trailing window."""

    def __init__(self, window: int):
        self.window = window
        self.recent: dict[str, deque] = {}
        self.total: dict[str, int] = {}

    def add(self, project: str, end: int, duration: int) -> None:
        self.recent.setdefault(project, deque()).append((end, duration))
        self.total[project] = self.total.get(project, 0) + duration

    def snapshot(self, now: int) -> dict[str, int]:
        for project, q in self.recent.items():
            while q and q[0][0] <= now - self.window:
                self.total[project] -= q.popleft()[1]
        return dict(self.total)


def simulate(scenario: Scenario, seed: int = 0) -> SimResult:
    """Run ``scenario`` to completion or to ``horizon_us``.

    ``seed`` drives the optional multiplicative runtime jitter
    (``runtime_jitter``); with zero jitter every run is identical.
    """
    scenario.validate()
    tree = copy.deepcopy(scenario.share_tree)
    log = EventLog()
    jobs = {j.id: j for j in scenario.jobs}
    job_index = {j.id: i for i, j in enumerate(scenario.jobs)}
    qpus = {d.id: _Qpu(d) for d in sorted(scenario.devices, key=lambda d: d.id) if d.is_qpu}
    local_qpus = [q.device for q in qpus.values() if q.device.location == "local"]
    cloud_qpus = [q.device for q in qpus.values() if q.device.location == "cloud"]
    nodes = sorted(d.id for d in scenario.devices if not d.is_qpu and d.location == "local")
    node_free = {n: True for n in nodes}
    node_busy = {n: 0 for n in nodes}
    cloud = CloudEndpoint(scenario.devices)
    usage = _Usage(scenario.scheduling_period_us)
    horizon = scenario.horizon_us

    dependents: dict[str, list[str]] = {}
    for j in scenario.jobs:
        for dep in j.depends_on:
            dependents.setdefault(dep, []).append(j.id)
    connected = {j.id for j in scenario.jobs if not j.is_quantum and (
        any(jobs[d].is_quantum for d in j.depends_on)
        or any(jobs[c].is_quantum for c in dependents.get(j.id, ())))}

    heap: list = []
    for j in scenario.jobs:
        heapq.heappush(heap, (j.submit_time, _PRIORITY["submit"], j.id, "submit"))

    submitted: set[str] = set()
    done: set[str] = set()
    failed: set[str] = set()
    ready_at: dict[str, int] = {}
    assigned: dict[str, str] = {}
    tickets: dict[str, str] = {}
    running: dict[str, tuple] = {}
    classical_queue: list[str] = []
    durations: dict[str, int] = {}
    waits: list[int] = []
    finishes: list[int] = []
    now = 0

    def actual_runtime(job: Job, device) -> int:
        predicted = predict_runtime(job, device)
        if scenario.runtime_jitter <= 0:
            return predicted
        rng = np.random.default_rng([seed, job_index[job.id]])
        body = predicted - device.submit_latency
        factor = 1.0 + scenario.runtime_jitter * rng.uniform(-1.0, 1.0)
        return device.submit_latency + max(0, int(round(body * factor)))

    def fail(job_id: str, reason: str) -> None:
        failed.add(job_id)
        log.add(now, "unschedulable", job_id, reason=reason)
        for child in sorted(dependents.get(job_id, ())):
            if child in submitted and child not in failed:
                fail(child, "dependency_failed")

    def make_ready(job_id: str) -> None:
        job = jobs[job_id]
        ready_at[job_id] = now
        log.add(now, "ready", job_id)
        need = job.classical_node_need if job.holds_nodes else 0
        if not job.is_quantum:
            need = max(1, job.classical_node_need)
            if need > len(nodes):
                fail(job_id, "insufficient_nodes")
                return
            classical_queue.append(job_id)
            return
        if need > len(nodes):
            fail(job_id, "insufficient_nodes")
            return
        free_at = {k: q.projected_free(now) for k, q in qpus.items()}
        decision = burst_decision(job, local_qpus, cloud_qpus, scenario.burst_policy, now, free_at)
        if decision.device is None:
            fail(job_id, decision.reason)
            return
        qpu = qpus[decision.device]
        assigned[job_id] = decision.device
        log.add(now, "assign", job_id, device=decision.device, reason=decision.reason,
                location=qpu.device.location)
        if qpu.device.location == "cloud":
            tickets[job_id] = cloud.submit(job, decision.device, now)
        heapq.heappush(qpu.queues.setdefault(job.project, []), (job.submit_time, job_id))
        qpu.queued_work += predict_runtime(job, qpu.device)

    def check_ready(job_id: str) -> None:
        if job_id in submitted and job_id not in ready_at and job_id not in failed:
            if all(d in done for d in jobs[job_id].depends_on):
                make_ready(job_id)

    def take_nodes(count: int) -> list[str]:
        picked = [n for n in nodes if node_free[n]][:count]
        for n in picked:
            node_free[n] = False
        return picked

    def start(job: Job, device_id: str | None, slot: int | None, held: list[str], duration: int):
        end = now + duration
        waits.append(now - ready_at[job.id])
        location = qpus[device_id].device.location if device_id else "local"
        log.add(now, "start", job.id, device=device_id, slot=slot, location=location,
                nodes=held, node_locations=["local"] * len(held), duration=duration)
        running[job.id] = (device_id, slot, held, now)
        if job.id in tickets:
            cloud._mark(tickets[job.id], "running", now)
        heapq.heappush(heap, (end, _PRIORITY["finish"], job.id, "finish"))

    def dispatch_quantum() -> bool:
        started = False
        free_nodes = sum(node_free.values())
        period = float(scenario.scheduling_period_us)
        used = usage.snapshot(now)
        usage_of = lambda node: sum(used.get(p.path, 0) for p in node.projects()) \
            if node.level != "project" else used.get(node.path, 0)
        for qpu in qpus.values():
            while (slot := qpu.free_slot()) is not None:
                candidates = []
                for project in sorted(qpu.queues):
                    q = qpu.queues[project]
                    skipped, pick = [], None
                    while q:
                        entry = heapq.heappop(q)
                        job = jobs[entry[1]]
                        if (job.classical_node_need if job.holds_nodes else 0) <= free_nodes:
                            pick = entry
                            break
                        skipped.append(entry)
                    for entry in skipped:
                        heapq.heappush(q, entry)
                    if pick is not None:
                        heapq.heappush(q, pick)
                        candidates.append(jobs[pick[1]])
                chosen = fairshare_next(candidates, tree, now, usage_of, period)
                if chosen is None:
                    break
                job = jobs[chosen]
                q = qpu.queues[job.project]
                q.remove((job.submit_time, job.id))
                heapq.heapify(q)
                held = take_nodes(job.classical_node_need) if job.holds_nodes else []
                free_nodes -= len(held)
                duration = actual_runtime(job, qpu.device)
                qpu.queued_work -= predict_runtime(job, qpu.device)
                qpu.slots[slot] = now + duration
                start(job, qpu.device.id, slot, held, duration)
                started = True
        return started

    def dispatch_classical() -> bool:
        started = False
        classical_queue.sort(key=lambda k: (k not in connected, jobs[k].submit_time, k))
        for job_id in list(classical_queue):
            job = jobs[job_id]
            need = max(1, job.classical_node_need)
            if need <= sum(node_free.values()):
                classical_queue.remove(job_id)
                start(job, None, None, take_nodes(need), int(job.classical_time))
                started = True
        return started

    def finish(job_id: str) -> None:
        job = jobs[job_id]
        device_id, slot, held, began = running.pop(job_id)
        duration = now - began
        durations[job_id] = duration
        for n in held:
            node_free[n] = True
            node_busy[n] += duration
        if device_id is not None:
            qpu = qpus[device_id]
            qpu.slots[slot] = None
            qpu.busy += duration
            tree.find(job.project).charge(duration)
            usage.add(job.project, now, duration)
        if job_id in tickets:
            cloud._mark(tickets[job_id], "done", now)
        done.add(job_id)
        finishes.append(now)
        log.add(now, "finish", job_id, device=device_id, slot=slot, nodes=held)

    while heap:
        t = heap[0][0]
        if horizon is not None and t > horizon:
            break
        now = t
        while heap and heap[0][0] == now:
            _, _, job_id, kind = heapq.heappop(heap)
            if kind == "finish":
                finish(job_id)
                for child in sorted(dependents.get(job_id, ())):
                    check_ready(child)
            else:
                submitted.add(job_id)
                log.add(now, "submit", job_id)
                failed_dep = [d for d in jobs[job_id].depends_on if d in failed]
                if failed_dep:
                    fail(job_id, "dependency_failed")
                else:
                    check_ready(job_id)
        while dispatch_quantum() | dispatch_classical():
            pass

    end_time = horizon if (heap and horizon is not None) else now
    metrics = _metrics(scenario, tree, qpus, node_busy, waits, finishes, assigned, done,
                       failed, running, end_time)
    return SimResult(log, metrics, tree, durations)


def _metrics(scenario, tree, qpus, node_busy, waits, finishes, assigned, done, failed,
             running, end_time) -> dict:
    first = min((j.submit_time for j in scenario.jobs), default=0)
    span = max(end_time - first, 1)
    util = {k: q.busy / (span * len(q.slots)) for k, q in qpus.items()}
    util.update({n: b / span for n, b in node_busy.items()})
    n_cloud = sum(1 for d in assigned.values() if qpus[d].device.location == "cloud")
    return {
        "completed": len(done),
        "unschedulable": len(failed),
        "running_at_end": len(running),
        "pending_at_end": len(scenario.jobs) - len(done) - len(failed) - len(running),
        "makespan_us": (max(finishes) - first) if finishes else 0,
        "mean_wait_us": float(np.mean(waits)) if waits else 0.0,
        "p95_wait_us": float(np.percentile(waits, 95)) if waits else 0.0,
        "utilization": util,
        "burst_fraction": n_cloud / len(assigned) if assigned else 0.0,
        "project_used_us": {p.path: p.used_time for p in tree.projects()},
    }


# -- log invariants -----------------------------------------------------------------

def execution_intervals(log: EventLog) -> dict[str, dict]:
    """``job -> {device, slot, nodes, start, end}`` from start/finish records."""
    out: dict[str, dict] = {}
    for r in log:
        if r["kind"] == "start":
            if r["job"] in out:
                raise AssertionError(f"job {r['job']} started twice")
            out[r["job"]] = {"device": r["device"], "slot": r["slot"], "nodes": r["nodes"],
                             "start": r["time"], "end": None, "location": r["location"],
                             "node_locations": r["node_locations"]}
        elif r["kind"] == "finish":
            out[r["job"]]["end"] = r["time"]
    return out


def check_non_preemption(log: EventLog) -> list[str]:
    """Violations of one-interval-per-job and disjoint use of each slot or node."""
    problems = []
    try:
        iv = execution_intervals(log)
    except (AssertionError, KeyError) as exc:
        return [str(exc)]
    resources: dict[tuple, list] = {}
    for job, rec in iv.items():
        end = rec["end"] if rec["end"] is not None else float("inf")
        if rec["device"] is not None:
            resources.setdefault((rec["device"], rec["slot"]), []).append((rec["start"], end, job))
        for n in rec["nodes"]:
            resources.setdefault((n, None), []).append((rec["start"], end, job))
    for key, spans in resources.items():
        spans.sort()
        for (s0, e0, j0), (s1, e1, j1) in zip(spans, spans[1:]):
            if s1 < e0:
                problems.append(f"{key}: {j0} and {j1} overlap")
    return problems


def check_colocation(log: EventLog, scenario: Scenario) -> list[str]:
    jobs = {j.id: j for j in scenario.jobs}
    problems = []
    for job, rec in execution_intervals(log).items():
        if jobs[job].coupling == "HPC_for_Quantum" and jobs[job].is_quantum:
            if rec["location"] != "local" or any(loc != "local" for loc in rec["node_locations"]):
                problems.append(f"{job} not co-located")
            if len(rec["nodes"]) != jobs[job].classical_node_need:
                problems.append(f"{job} holds {len(rec['nodes'])} nodes")
    return problems


def check_dependencies(log: EventLog, scenario: Scenario) -> list[str]:
    finished = {}
    problems = []
    for r in log:
        if r["kind"] == "finish":
            finished[r["job"]] = r["time"]
    jobs = {j.id: j for j in scenario.jobs}
    for r in log:
        if r["kind"] == "start":
            for dep in jobs[r["job"]].depends_on:
                if dep not in finished or finished[dep] > r["time"]:
                    problems.append(f"{r['job']} started before {dep} finished")
    return problems
