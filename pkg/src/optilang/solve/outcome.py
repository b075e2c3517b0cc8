"""Solver status taxonomy, limits, and outcome records."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum


class Status(str, Enum):
    OPTIMAL = "Optimal"
    INFEASIBLE = "Infeasible"
    UNBOUNDED = "Unbounded"
    EARLY_STOP = "EarlyStop"
    SUBOPTIMAL = "Suboptimal"


@dataclass(frozen=True)
class SolverLimits:
    max_iterations: int = 20_000
    max_nodes: int = 200_000
    time_budget: float = 300.0  # seconds of wall time
    feasibility_tol: float = 1e-7
    integrality_tol: float = 1e-6

    def __post_init__(self):
        for name in ("max_iterations", "max_nodes", "time_budget", "feasibility_tol", "integrality_tol"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")


@dataclass(frozen=True)
class SolverChoice:
    backend: str  # simplex_lp | bnb_milp
    origin: str  # hint | triage


@dataclass
class SolveStats:
    iterations: int = 0
    nodes: int = 0
    wall_time: float = 0.0

    def to_json_dict(self) -> dict:
        return {"iterations": self.iterations, "nodes": self.nodes, "wall_time": self.wall_time}


@dataclass
class SolveOutcome:
    status: Status
    assignment: dict[int, float] | None = None
    objective: float | None = None
    logs: list[str] = field(default_factory=list)
    stats: SolveStats = field(default_factory=SolveStats)
    choice: SolverChoice | None = None

    def to_json_dict(self, display_names: dict[int, str] | None = None) -> dict:
        assignment = None
        if self.assignment is not None:
            if display_names:
                assignment = {display_names[k]: v for k, v in self.assignment.items()}
            else:
                assignment = {str(k): v for k, v in self.assignment.items()}
        return {
            "status": self.status.value,
            "objective": self.objective,
            "assignment": assignment,
            "logs": list(self.logs),
            "stats": self.stats.to_json_dict(),
            "solver": None
            if self.choice is None
            else {"backend": self.choice.backend, "origin": self.choice.origin},
        }


class IncompatibleHint(ValueError):
    """The document's solver hint cannot solve this model class."""
