"""Workload-management simulation for hybrid quantum/classical sites."""

from __future__ import annotations

from .cloud import CloudEndpoint
from .engine import (EventLog, SimResult, check_colocation, check_dependencies,
                     check_non_preemption, execution_intervals, simulate)
from .model import (BurstPolicy, Device, Job, Scenario, ScenarioError, ShareNode, DAY_US,
                    simple_tree)
from .policy import (BurstDecision, burst_decision, calibrate_runtime, fairshare_key,
                     fairshare_next, predict_runtime)
from .workload import gen_vqe_workload, saturating_fairshare_scenario

__all__ = [
    "BurstDecision", "BurstPolicy", "CloudEndpoint", "DAY_US", "Device", "EventLog", "Job",
    "Scenario", "ScenarioError", "ShareNode", "SimResult", "burst_decision", "calibrate_runtime",
    "check_colocation", "check_dependencies", "check_non_preemption", "execution_intervals",
    "fairshare_key", "fairshare_next", "gen_vqe_workload", "predict_runtime",
    "saturating_fairshare_scenario", "simple_tree", "simulate",
]
