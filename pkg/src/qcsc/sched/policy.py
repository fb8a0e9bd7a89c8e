"""Runtime prediction, fair-share ordering and cloud-burst decisions."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .model import Device, Job, ShareNode


def predict_runtime(job: Job, device: Device) -> int:
    """Integer microseconds a quantum job occupies ``device``.

    ``circuits * shots * (depth * gate_time_2q + readout_time) + submit_latency``,
    rounded up.
    """
    if not device.is_qpu:
        raise ValueError(f"device {device.id!r} is not a QPU")
    if job.n_qubits > device.qubits:
        raise ValueError(f"job {job.id!r} needs {job.n_qubits} qubits, "
                         f"device {device.id!r} has {device.qubits}")
    body = job.circuits * job.shots * (job.depth * device.gate_time_2q + device.readout_time)
    # guard against float noise pushing exact integers up by one
    return int(math.ceil(body - 1e-9)) + int(device.submit_latency)


def calibrate_runtime(records) -> tuple[float, float]:
    """Least-squares ``(gate_time_2q, readout_time)`` from observed runs.

    ``records`` is an iterable of mappings with ``circuits``, ``shots``,
    ``depth``, ``duration`` and optionally ``latency``, or CSV text with
    those columns.
    """
    if isinstance(records, str):
        records = list(csv.DictReader(io.StringIO(records)))
    rows = [(float(r["circuits"]) * float(r["shots"]), float(r["depth"]),
             float(r["duration"]) - float(r.get("latency", 0) or 0)) for r in records]
    if len(rows) < 2:
        raise ValueError("calibration needs at least two records")
    design = np.array([[cs * d, cs] for cs, d, _ in rows])
    target = np.array([y for _, _, y in rows])
    coef, _, rank, _ = np.linalg.lstsq(design, target, rcond=None)
    if rank < 2:
        raise ValueError("records do not vary depth enough to separate gate and readout time")
    return float(coef[0]), float(coef[1])


# -- fair share -------------------------------------------------------------------

UsageFn = Callable[[ShareNode], float]


def _ancestor(node: ShareNode, level: str) -> ShareNode:
    while node.level != level:
        node = node.parent
    return node


def usage_ratio(node: ShareNode, usage: UsageFn | None = None, period: float = 1.0) -> float:
    """Used time divided by the node's entitled time over ``period``."""
    used = node.used_time if usage is None else usage(node)
    return used / (node.fraction() * period)


def fairshare_key(job: Job, tree: ShareNode, usage: UsageFn | None = None,
                  period: float = 1.0) -> tuple:
    project = tree.find(job.project)
    if project is None:
        raise KeyError(f"unknown project {job.project!r}")
    group = _ancestor(project, "group")
    return (usage_ratio(group, usage, period), usage_ratio(project, usage, period),
            job.submit_time, job.id)


def fairshare_next(queue, tree: ShareNode, now: int = 0, usage: UsageFn | None = None,
                   period: float = 1.0) -> str | None:
    """Id of the job to run next, or ``None`` for an empty queue.

    Jobs are ranked by their group's usage ratio, then their project's, then
    submit time and id.  ``usage`` maps a tree node to its recent used time
    (defaults to the node's cumulative ``used_time``).
    """
    queue = [j for j in queue if j.submit_time <= now]
    if not queue:
        return None
    return min(queue, key=lambda j: fairshare_key(j, tree, usage, period)).id


# -- cloud bursting ---------------------------------------------------------------

REASONS = ("local", "capacity", "deadline", "unschedulable")


@dataclass(frozen=True)
class BurstDecision:
    device: str | None
    reason: str
    predicted_finish: int | None = None


def _cloud_allowed(job: Job, policy) -> bool:
    return bool(policy.allow) and job.coupling == "Quantum_about_HPC"


def burst_decision(job: Job, local, cloud, policy, now: int = 0,
                   free_at: dict[str, int] | None = None) -> BurstDecision:
    """Pick a QPU for ``job`` among local devices and cloud offerings.

    Local devices are preferred (earliest predicted finish, then id).  A job
    goes to the cloud when no local QPU has enough qubits (``capacity``) or
    when every local choice would miss its deadline and some cloud QPU meets
    it (``deadline``); among eligible cloud devices the cheapest wins, then
    earliest finish, then id.  Only loosely coupled jobs may leave the site,
    and ``deadline_only`` limits bursting to the deadline case.
    """
    free_at = free_at or {}

    def finish(d: Device) -> int:
        return max(now, free_at.get(d.id, now)) + predict_runtime(job, d)

    def cost(d: Device) -> float:
        return d.cost_per_us * predict_runtime(job, d)

    local_fit = [d for d in local if d.is_qpu and d.qubits >= job.n_qubits]
    cloud_fit = [d for d in cloud if d.is_qpu and d.qubits >= job.n_qubits] \
        if _cloud_allowed(job, policy) else []
    if local_fit:
        best = min(local_fit, key=lambda d: (finish(d), d.id))
        best_finish = finish(best)
        if job.deadline is not None and best_finish > job.deadline:
            meeting = [d for d in cloud_fit if finish(d) <= job.deadline]
            if meeting:
                pick = min(meeting, key=lambda d: (cost(d), finish(d), d.id))
                return BurstDecision(pick.id, "deadline", finish(pick))
        return BurstDecision(best.id, "local", best_finish)
    if cloud_fit and not policy.deadline_only:
        pick = min(cloud_fit, key=lambda d: (cost(d), finish(d), d.id))
        return BurstDecision(pick.id, "capacity", finish(pick))
    return BurstDecision(None, "unschedulable")
