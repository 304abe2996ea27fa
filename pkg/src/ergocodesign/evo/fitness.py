"""Worst-case-torque fitness of a robot design over a set of human and load scenarios."""

from __future__ import annotations

import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ..coupled import CompositeSystem
from ..errors import ContractError
from ..model.model import HardwareParams
from ..statics.problem import CostWeights, StaticPostureProblem, TaskSpec
from ..statics.solve import PostureSolution, SolverOptions, solve

SKIPPED = "skipped"

__all__ = ["SKIPPED", "ScenarioCase", "CaseResult", "FitnessReport", "Evaluator", "worst_torque", "fitness_from_torques"]


@dataclass(frozen=True, eq=False)
class ScenarioCase:
    """One (human, load) pairing with the robot skeleton to be designed."""

    human: str
    load: str
    system: CompositeSystem
    task: TaskSpec


@dataclass
class CaseResult:
    """Outcome of one case: per-height stacked torques ``(tau_human, tau_robot_motor)``."""

    human: str
    load: str
    status: str
    heights: tuple[float, ...]
    torques: np.ndarray
    message: str = ""
    solution: PostureSolution | None = field(default=None, repr=False)

    @property
    def solved(self) -> bool:
        return self.status == "solved"


def worst_torque(vectors) -> tuple[int, float]:
    """Index and norm of the largest-norm vector (first one on ties)."""
    best, best_norm = -1, -np.inf
    for i, v in enumerate(vectors):
        nrm = float(np.linalg.norm(v))
        if nrm > best_norm:
            best, best_norm = i, nrm
    if best < 0:
        raise ContractError("no torque vectors to scan")
    return best, best_norm


def fitness_from_torques(vectors, scale: float) -> float:
    """``scale / max_i |v_i|``."""
    _, nrm = worst_torque(vectors)
    return scale / nrm if nrm > 0 else 0.0


@dataclass
class FitnessReport:
    """Fitness of one design.

    Attributes:
        fitness: ``scale / |tau_w|``, or 0 when any case is not solved.
        worst_norm: Norm of the worst-case torque vector (None if nothing solved).
        worst_torque: The worst-case stacked torque vector.
        worst_case: ``(human, load, height)`` of the worst case.
        cases: Per-case results in canonical (human, load) order.
        wall_time: Evaluation time in seconds (not serialized).
    """

    fitness: float
    worst_norm: float | None
    worst_torque: np.ndarray | None
    worst_case: tuple | None
    cases: list[CaseResult]
    wall_time: float = 0.0

    @property
    def feasible(self) -> bool:
        return all(c.solved for c in self.cases)

    def torque_vectors(self) -> list[tuple[str, str, float, np.ndarray]]:
        """All solved per-height torque vectors in canonical order."""
        return [(c.human, c.load, h, c.torques[k]) for c in self.cases if c.solved for k, h in enumerate(c.heights)]

    def to_dict(self) -> dict:
        return {
            "fitness": self.fitness,
            "feasible": self.feasible,
            "worst_norm": self.worst_norm,
            "worst_torque": None if self.worst_torque is None else self.worst_torque.tolist(),
            "worst_case": None if self.worst_case is None else {"human": self.worst_case[0], "load": self.worst_case[1], "height": self.worst_case[2]},
            "cases": [
                {
                    "human": c.human,
                    "load": c.load,
                    "status": c.status,
                    "message": c.message,
                    "heights": list(c.heights),
                    "torques": np.asarray(c.torques).tolist() if c.solved else None,
                }
                for c in self.cases
            ],
        }


class Evaluator:
    """Callable computing the :class:`FitnessReport` of a design (picklable for worker processes).

    Args:
        cases: Scenario cases; all must share the robot skeleton.
        weights: Objective weights and fitness scale.
        options: Inner solver options.
        keep_solutions: Attach full solutions to the case results.
        fail_fast: Stop at the first unsolved case (its fitness is 0 anyway) and
            mark the remaining cases ``skipped``.
    """

    def __init__(
        self,
        cases,
        weights: CostWeights | None = None,
        options: SolverOptions | None = None,
        keep_solutions: bool = False,
        fail_fast: bool = False,
    ):
        cases = list(cases)
        if not cases:
            raise ContractError("the scenario set is empty")
        self.cases = sorted(cases, key=lambda c: (c.human, c.load))
        self.weights = weights or CostWeights()
        self.options = options or SolverOptions()
        self.keep_solutions = keep_solutions
        self.fail_fast = fail_fast

    def solve_case(self, case: ScenarioCase, params: HardwareParams) -> CaseResult:
        problem = StaticPostureProblem(case.system, case.task, params, self.weights)
        sol = solve(problem, self.options)
        return CaseResult(
            case.human,
            case.load,
            sol.status,
            case.task.heights,
            sol.tau_bar,
            sol.message,
            sol if self.keep_solutions else None,
        )

    def __call__(self, params: HardwareParams) -> FitnessReport:
        t0 = time.perf_counter()
        results = []
        for case in self.cases:
            if self.fail_fast and results and not results[-1].solved:
                results.append(CaseResult(case.human, case.load, SKIPPED, case.task.heights, np.zeros((0, 0)), "not evaluated"))
                continue
            results.append(self.solve_case(case, params))
        return build_report(results, self.weights.fitness_scale, time.perf_counter() - t0)


    def run(self, params: HardwareParams, threads: int = 1) -> FitnessReport:
        """Like calling the evaluator, with cases spread over ``threads`` worker processes."""
        if threads <= 1 or self.fail_fast or len(self.cases) < 2:
            return self(params)
        t0 = time.perf_counter()
        with ProcessPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(self.solve_case, self.cases, [params] * len(self.cases)))
        return build_report(results, self.weights.fitness_scale, time.perf_counter() - t0)


def build_report(results: list[CaseResult], scale: float, wall_time: float = 0.0) -> FitnessReport:
    """Assemble a report from case results; sorts them canonically first."""
    results = sorted(results, key=lambda c: (c.human, c.load))
    rep = FitnessReport(0.0, None, None, None, results, wall_time)
    vecs = rep.torque_vectors()
    if vecs:
        i, nrm = worst_torque([v[3] for v in vecs])
        rep.worst_norm, rep.worst_torque, rep.worst_case = nrm, np.asarray(vecs[i][3]), vecs[i][:3]
        if rep.feasible:
            rep.fitness = scale / nrm if nrm > 0 else 0.0
    return rep
