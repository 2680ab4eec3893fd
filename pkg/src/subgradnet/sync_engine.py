"""The synchronous algorithms: weighted-average consensus and distributed
subgradient descent where every agent updates at every step.

With a malicious agent injecting u(k), the regular estimates evolve as

    x(k+1) = A x(k) + b u(k) - alpha_k d(k)

with d(k) the stacked subgradients at the current estimates; without one,
the full weight matrix drives all n agents.
"""

from __future__ import annotations

import numpy as np

from .errors import ScenarioError
from .objectives import Constant, Objective
from .scenario import Scenario
from .schedules import StepsizeSchedule
from .trace import OracleRecord, Trace
from .weights import AdjacencyPartition, partition


def consensus_step(p: AdjacencyPartition, x: np.ndarray, u) -> np.ndarray:
    """One averaging step of the regular agents: A x + b u.

    x may be a vector (n-1,) or a matrix (n-1, m) handled coordinatewise;
    u is a scalar or an (m,) vector to match.
    """
    x = np.asarray(x, dtype=float)
    if x.shape[0] != p.A.shape[0]:
        raise ValueError(f"state has {x.shape[0]} rows, expected {p.A.shape[0]}")
    u = np.asarray(u, dtype=float)
    return p.A @ x + (np.outer(p.b, u) if x.ndim == 2 else p.b * u)


def _batch_subgradients(objectives: list[Objective], X: np.ndarray) -> np.ndarray:
    """Stacked subgradients, row i for objective i at estimate row i."""
    return np.array([obj.subgradient(X[i]) for i, obj in enumerate(objectives)])


def sync_step(
    p: AdjacencyPartition,
    x: np.ndarray,
    u,
    alpha: float,
    objectives: list[Objective],
) -> tuple[np.ndarray, np.ndarray]:
    """One synchronous descent step for the regular agents.

    Returns (next estimates, applied subgradients).  With constant
    objectives this reduces exactly to :func:`consensus_step`.
    """
    if alpha < 0:
        raise ValueError("stepsize must be nonnegative")
    x_in = np.asarray(x, dtype=float)
    x = x_in[:, None] if x_in.ndim == 1 else x_in  # (n-1, m)
    if len(objectives) != x.shape[0]:
        raise ValueError(f"{len(objectives)} objectives for {x.shape[0]} agents")
    d = _batch_subgradients(objectives, x)
    nxt = consensus_step(p, x, u) - alpha * d
    if x_in.ndim == 1:
        return nxt[:, 0], d[:, 0]
    return nxt, d


class _FastSubgradients:
    """Vectorized subgradient evaluation for a homogeneous objective list.

    The per-step python dispatch of Objective.subgradient dominates long
    runs; stacking centers/scales removes it for the common families.
    """

    def __init__(self, objectives: list[Objective], m: int):
        kinds = {type(o) for o in objectives}
        self.objectives = objectives
        self.mode = "generic"
        n = len(objectives)
        if kinds == {Constant}:
            self.mode = "zero"
            self.zero = np.zeros((n, m))
        elif kinds == {type(objectives[0])} and not isinstance(objectives[0], Constant):
            from .objectives import AbsoluteDeviation, Quadratic

            if isinstance(objectives[0], AbsoluteDeviation):
                self.mode = "absolute"
                self.centers = np.vstack([o.center for o in objectives])
                self.scales = np.array([o.scale for o in objectives])[:, None]
            elif isinstance(objectives[0], Quadratic):
                self.mode = "quadratic"
                self.centers = np.vstack([o.center for o in objectives])
                self.weights = np.vstack([o.weight for o in objectives])

    def __call__(self, X: np.ndarray) -> np.ndarray:
        if self.mode == "zero":
            return self.zero
        if self.mode == "absolute":
            return self.scales * np.sign(X - self.centers)
        if self.mode == "quadratic":
            return 2.0 * self.weights * (X - self.centers)
        return _batch_subgradients(self.objectives, X)


def run_sync(
    scenario: Scenario,
    horizon: int | None = None,
    malicious_input: np.ndarray | None = None,
    seed: int | None = None,
) -> Trace:
    """Run the synchronous algorithm for K steps and record a full trace.

    Without a malicious input every agent follows the algorithm truthfully
    under the full weight matrix.  With one, the scenario's malicious agent
    is replaced by the input sequence and only the regular agents evolve.
    """
    K = scenario.horizon if horizon is None else horizon
    if K < 0:
        raise ValueError("horizon must be nonnegative")
    m = scenario.m
    init = scenario.initial_estimates(seed)

    if malicious_input is None:
        if scenario.malicious is not None:
            raise ScenarioError(
                "scenario names a malicious agent but no input sequence was given; "
                "truthful runs need a scenario without one"
            )
        W = scenario.weights
        objectives = list(scenario.objectives)
        x0 = init
        u_seq = None
    else:
        if scenario.malicious is None:
            raise ScenarioError("malicious input given but the scenario names no malicious agent")
        u_seq = np.asarray(malicious_input, dtype=float)
        if u_seq.ndim == 1:
            u_seq = u_seq[:, None]
        if u_seq.shape[0] < K or u_seq.shape[1] != m:
            raise ScenarioError(
                f"malicious input needs shape ({K}, {m}), got {u_seq.shape}"
            )
        p = partition(scenario.weights, scenario.malicious)
        W = p.A
        regulars = scenario.regular_agents()
        objectives = [scenario.objectives[i - 1] for i in regulars]
        x0 = init[[i - 1 for i in regulars]]
        b = p.b

    n_obs = x0.shape[0]
    estimates = np.empty((K + 1, n_obs, m))
    estimates[0] = x0
    subgradients = np.empty((K, n_obs, m))
    alphas = np.empty(K)
    subgrad = _FastSubgradients(objectives, m)

    x = x0.copy()
    for k in range(K):
        a_k = scenario.stepsize.at(k)
        d = subgrad(x)
        if u_seq is None:
            x = W @ x - a_k * d
        else:
            x = W @ x + np.outer(b, u_seq[k]) - a_k * d
        estimates[k + 1] = x
        subgradients[k] = d
        alphas[k] = a_k

    return Trace(
        estimates=estimates,
        inputs=u_seq[:K].copy() if u_seq is not None else None,
        stepsizes=alphas,
        oracle=OracleRecord(subgradients=subgradients),
    )
