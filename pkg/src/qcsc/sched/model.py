"""Scheduler world state: devices, jobs, the fair-share tree and scenarios.

All times are integer microseconds.
"""

from __future__ import annotations

import json
from graphlib import CycleError, TopologicalSorter
from dataclasses import dataclass, field

DEVICE_KINDS = ("QPU", "CPU-node", "GPU-node")
LOCATIONS = ("local", "cloud")
COUPLINGS = ("HPC_for_Quantum", "Quantum_in_HPC", "Quantum_about_HPC")
JOB_KINDS = ("quantum", "classical")
LEVELS = ("hub", "group", "project")

DAY_US = 24 * 3600 * 10**6


class ScenarioError(ValueError):
    """Validation failure; ``errors`` holds ``(path, code, message)`` triples."""

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("; ".join(f"{p}: {m}" for p, _, m in self.errors))


@dataclass(frozen=True)
class Device:
    id: str
    kind: str = "QPU"
    qubits: int = 0
    gate_time_1q: float = 0.05
    gate_time_2q: float = 0.5
    readout_time: float = 1.0
    location: str = "local"
    submit_latency: int = 0
    shares: int = 1
    cost_per_us: float = 0.0

    @property
    def is_qpu(self) -> bool:
        return self.kind == "QPU"

    @property
    def resource_model(self) -> str:
        return "qpu_exclusive" if self.shares == 1 else f"shares({self.shares})"

    @classmethod
    def from_json_dict(cls, d: dict) -> "Device":
        d = dict(d)
        model = d.pop("resource_model", "qpu_exclusive")
        shares = 1
        if isinstance(model, dict):
            shares = int(model["shares"])
        elif isinstance(model, str) and model.startswith("shares"):
            shares = int(model.strip("shares():"))
        elif model != "qpu_exclusive":
            raise ValueError(f"unknown resource model {model!r}")
        return cls(shares=shares, **d)

    def to_json_dict(self) -> dict:
        out = {k: getattr(self, k) for k in ("id", "kind", "qubits", "gate_time_1q", "gate_time_2q",
                                              "readout_time", "location", "submit_latency",
                                              "cost_per_us")}
        out["resource_model"] = "qpu_exclusive" if self.shares == 1 else {"shares": self.shares}
        return out


@dataclass(frozen=True)
class Job:
    id: str
    project: str
    kind: str = "quantum"
    coupling: str = "Quantum_about_HPC"
    circuits: int = 1
    depth: int = 1
    n_qubits: int = 1
    shots: int = 1
    classical_node_need: int = 0
    classical_time: int = 0
    submit_time: int = 0
    deadline: int | None = None
    depends_on: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "depends_on", tuple(self.depends_on))

    @property
    def is_quantum(self) -> bool:
        return self.kind == "quantum"

    @property
    def holds_nodes(self) -> bool:
        """Tightly coupled quantum jobs keep classical nodes for the whole quantum phase."""
        return self.is_quantum and self.coupling != "Quantum_about_HPC" and self.classical_node_need > 0

    @classmethod
    def from_json_dict(cls, d: dict) -> "Job":
        return cls(**d)

    def to_json_dict(self) -> dict:
        out = {k: getattr(self, k) for k in self.__dataclass_fields__}
        out["depends_on"] = list(self.depends_on)
        return out


@dataclass
class ShareNode:
    name: str
    level: str
    shares: float = 1.0
    children: list["ShareNode"] = field(default_factory=list)
    used_time: int = 0
    parent: "ShareNode | None" = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        for child in self.children:
            child.parent = self

    @property
    def path(self) -> str:
        parts, node = [], self
        while node is not None and node.level != "root":
            parts.append(node.name)
            node = node.parent
        return "/".join(reversed(parts))

    def fraction(self) -> float:
        """Share of the whole machine: product of sibling-normalized shares."""
        if self.parent is None:
            return 1.0
        total = sum(c.shares for c in self.parent.children)
        return self.parent.fraction() * self.shares / total

    def find(self, path: str) -> "ShareNode | None":
        node = self
        for name in path.split("/"):
            node = next((c for c in node.children if c.name == name), None)
            if node is None:
                return None
        return node

    def walk(self):
        yield self
        for c in self.children:
            yield from c.walk()

    def projects(self) -> list["ShareNode"]:
        return [n for n in self.walk() if n.level == "project"]

    def charge(self, duration: int) -> None:
        node = self
        while node is not None:
            node.used_time += duration
            node = node.parent

    @classmethod
    def from_json_dict(cls, data, level_index: int = -1) -> "ShareNode":
        if level_index < 0:
            hubs = data["hubs"] if isinstance(data, dict) and "hubs" in data else data
            if isinstance(hubs, dict):
                hubs = [hubs]
            return cls("root", "root", 1.0, [cls.from_json_dict(h, 0) for h in hubs])
        level = LEVELS[level_index]
        # children may also be listed under the level name ("groups", "projects")
        nested = {"hub": "groups", "group": "projects"}.get(level)
        raw = data.get("children", data.get(nested, []) if nested else [])
        children = [cls.from_json_dict(c, level_index + 1) for c in raw]
        return cls(data["name"], level, data.get("shares", 1.0), children)

    def to_json_dict(self):
        if self.level == "root":
            return {"hubs": [c.to_json_dict() for c in self.children]}
        out = {"name": self.name, "shares": self.shares}
        if self.children:
            out["children"] = [c.to_json_dict() for c in self.children]
        return out


def simple_tree(projects: dict[str, float], hub: str = "hub", group: str = "group") -> ShareNode:
    """One hub and one group holding the given ``{project: shares}``."""
    leaves = [ShareNode(name, "project", shares) for name, shares in projects.items()]
    return ShareNode("root", "root", 1.0, [ShareNode(hub, "hub", 1.0, [ShareNode(group, "group", 1.0, leaves)])])


@dataclass(frozen=True)
class BurstPolicy:
    allow: bool = True
    deadline_only: bool = False


@dataclass
class Scenario:
    devices: list[Device]
    share_tree: ShareNode
    jobs: list[Job]
    burst_policy: BurstPolicy = field(default_factory=BurstPolicy)
    horizon_us: int | None = None
    runtime_jitter: float = 0.0
    scheduling_period_us: int = DAY_US

    @classmethod
    def from_json_dict(cls, data: dict) -> "Scenario":
        errors = []
        devices, jobs = [], []
        for i, d in enumerate(data.get("devices", [])):
            try:
                devices.append(Device.from_json_dict(d))
            except (TypeError, ValueError, KeyError) as exc:
                errors.append((f"devices[{i}]", "bad_device", str(exc)))
        for i, j in enumerate(data.get("jobs", [])):
            try:
                jobs.append(Job.from_json_dict(j))
            except (TypeError, ValueError) as exc:
                errors.append((f"jobs[{i}]", "bad_job", str(exc)))
        try:
            tree = ShareNode.from_json_dict(data.get("share_tree", {"hubs": []}))
        except (KeyError, TypeError, IndexError) as exc:
            errors.append(("share_tree", "bad_share_tree", f"malformed tree: {exc}"))
            tree = ShareNode("root", "root")
        if errors:
            raise ScenarioError(errors)
        scenario = cls(devices, tree, jobs, BurstPolicy(**data.get("burst_policy", {})),
                       data.get("horizon_us"), float(data.get("runtime_jitter", 0.0)),
                       int(data.get("scheduling_period_us", DAY_US)))
        scenario.validate()
        return scenario

    @classmethod
    def loads(cls, text: str) -> "Scenario":
        return cls.from_json_dict(json.loads(text))

    def to_json_dict(self) -> dict:
        return {
            "devices": [d.to_json_dict() for d in self.devices],
            "share_tree": self.share_tree.to_json_dict(),
            "jobs": [j.to_json_dict() for j in self.jobs],
            "burst_policy": {"allow": self.burst_policy.allow,
                             "deadline_only": self.burst_policy.deadline_only},
            "horizon_us": self.horizon_us,
            "runtime_jitter": self.runtime_jitter,
            "scheduling_period_us": self.scheduling_period_us,
        }

    def validate(self) -> None:
        """Raise :class:`ScenarioError` listing every problem found."""
        errors = []
        if not self.devices:
            errors.append(("devices", "no_devices", "scenario has no devices"))
        seen = set()
        for i, d in enumerate(self.devices):
            p = f"devices[{i}]"
            if d.id in seen:
                errors.append((p + ".id", "duplicate_id", f"duplicate device id {d.id!r}"))
            seen.add(d.id)
            if d.kind not in DEVICE_KINDS:
                errors.append((p + ".kind", "bad_kind", f"unknown device kind {d.kind!r}"))
            if d.location not in LOCATIONS:
                errors.append((p + ".location", "bad_location", f"unknown location {d.location!r}"))
            if d.shares < 1:
                errors.append((p + ".resource_model", "bad_shares", "shares must be >= 1"))
            if d.submit_latency < 0:
                errors.append((p + ".submit_latency", "negative_time", "latency must be >= 0"))
            if d.is_qpu:
                if d.qubits < 1:
                    errors.append((p + ".qubits", "bad_qubits", "QPU needs >= 1 qubit"))
                for attr in ("gate_time_1q", "gate_time_2q", "readout_time"):
                    if getattr(d, attr) <= 0:
                        errors.append((f"{p}.{attr}", "nonpositive_time", f"{attr} must be > 0"))
        errors += self._validate_tree()
        ids = set()
        for i, j in enumerate(self.jobs):
            p = f"jobs[{i}]"
            if j.id in ids:
                errors.append((p + ".id", "duplicate_id", f"duplicate job id {j.id!r}"))
            ids.add(j.id)
            node = self.share_tree.find(j.project)
            if node is None or node.level != "project":
                errors.append((p + ".project", "unknown_project", f"unknown project {j.project!r}"))
            if j.kind not in JOB_KINDS:
                errors.append((p + ".kind", "bad_kind", f"unknown job kind {j.kind!r}"))
            if j.coupling not in COUPLINGS:
                errors.append((p + ".coupling", "bad_coupling", f"unknown coupling {j.coupling!r}"))
            for attr in ("circuits", "depth", "n_qubits", "shots", "classical_node_need",
                         "classical_time", "submit_time"):
                if getattr(j, attr) < 0:
                    errors.append((f"{p}.{attr}", "negative_count", f"{attr} must be >= 0"))
        for i, j in enumerate(self.jobs):
            for dep in j.depends_on:
                if dep not in ids:
                    errors.append((f"jobs[{i}].depends_on", "unknown_dependency",
                                   f"unknown dependency {dep!r}"))
        try:
            TopologicalSorter({j.id: [d for d in j.depends_on if d in ids]
                               for j in self.jobs}).prepare()
        except CycleError as exc:
            errors.append(("jobs", "dependency_cycle", f"dependency cycle: {exc.args[1]}"))
        if errors:
            raise ScenarioError(errors)

    def _validate_tree(self):
        errors = []
        if not self.share_tree.children:
            errors.append(("share_tree", "empty_tree", "share tree has no hubs"))
        for node in self.share_tree.walk():
            if node.level == "root":
                continue
            path = f"share_tree.{node.path}"
            if node.shares <= 0:
                errors.append((path, "bad_shares", "shares must be > 0"))
            if node.level != "project" and not node.children:
                errors.append((path, "missing_children", f"{node.level} {node.name!r} has no children"))
            if node.level == "project" and node.children:
                errors.append((path, "too_deep", "projects cannot have children"))
        return errors
