"""Minimal simulated cloud-QPU endpoint.

The interface ``list_devices / submit / status / result / cancel`` is a small
stand-in for a vendor API.  Tickets move ``queued -> running -> done`` as the
event engine reports progress; nothing here talks to a network.
"""

from __future__ import annotations

from dataclasses import dataclass

from .model import Device, Job

STATES = ("queued", "running", "done", "cancelled")


@dataclass
class Ticket:
    id: str
    job: str
    device: str
    state: str = "queued"
    submitted: int = 0
    started: int | None = None
    finished: int | None = None


class CloudEndpoint:
    def __init__(self, devices):
        self._devices = {d.id: d for d in devices if d.location == "cloud"}
        self._tickets: dict[str, Ticket] = {}

    def list_devices(self) -> list[Device]:
        return [self._devices[k] for k in sorted(self._devices)]

    def submit(self, job: Job, device_id: str, now: int = 0) -> str:
        if device_id not in self._devices:
            raise KeyError(f"unknown cloud device {device_id!r}")
        dev = self._devices[device_id]
        if job.n_qubits > dev.qubits:
            raise ValueError(f"job {job.id!r} does not fit on {device_id!r}")
        ticket = Ticket(f"t{len(self._tickets):06d}", job.id, device_id, submitted=now)
        self._tickets[ticket.id] = ticket
        return ticket.id

    def status(self, ticket_id: str) -> str:
        return self._tickets[ticket_id].state

    def result(self, ticket_id: str) -> dict:
        t = self._tickets[ticket_id]
        if t.state != "done":
            raise RuntimeError(f"ticket {ticket_id} is {t.state}")
        return {"job": t.job, "device": t.device, "start": t.started, "finish": t.finished}

    def cancel(self, ticket_id: str) -> bool:
        t = self._tickets[ticket_id]
        if t.state != "queued":
            return False
        t.state = "cancelled"
        return True

    # progress hooks driven by the engine
    def _mark(self, ticket_id: str, state: str, now: int) -> None:
        t = self._tickets[ticket_id]
        t.state = state
        if state == "running":
            t.started = now
        elif state == "done":
            t.finished = now
