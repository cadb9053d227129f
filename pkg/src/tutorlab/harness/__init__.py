"""Headless driver: API client, simulated students, experiments, replay."""

from .client import ApiClient, ApiError
from .experiment import (
    AssignmentSpec,
    CohortSpec,
    ExperimentResult,
    ExperimentScript,
    bkt_replay_mastery,
    build_condition_csv,
    run_experiment,
)
from .replay import Divergence, ReplayReport, replay_store
from .sim import SIM_EPOCH, SimulatedStudent, StudentRuntime, run_assignment, solve_problem

__all__ = [
    "ApiClient",
    "ApiError",
    "AssignmentSpec",
    "CohortSpec",
    "Divergence",
    "ExperimentResult",
    "ExperimentScript",
    "ReplayReport",
    "SIM_EPOCH",
    "SimulatedStudent",
    "StudentRuntime",
    "bkt_replay_mastery",
    "build_condition_csv",
    "replay_store",
    "run_assignment",
    "run_experiment",
    "solve_problem",
]
