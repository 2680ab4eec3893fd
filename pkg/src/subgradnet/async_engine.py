"""The projected asynchronous algorithm.

Each agent keeps a private update schedule.  At its r-th update time it
takes the weighted average of its neighbors' estimates, steps along its
subgradient with stepsize 1/r and projects onto the shared bounded convex
set X; at all other times it projects the weighted average unchanged.
Because estimates stay in X and averages of members are members, the
non-update branch is exactly the average.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ScenarioError, UpdateRegularityError
from .objectives import Objective
from .projection import ProjectionSet
from .scenario import Scenario
from .schedules import UpdateSchedule, check_update_regularity
from .sync_engine import _FastSubgradients, _batch_subgradients
from .trace import OracleRecord, Trace
from .weights import partition


@dataclass
class AsyncState:
    """Mutable per-run state: time, estimates inside X, update counters."""

    k: int
    estimates: np.ndarray  # (n_active, m), every row in X for k >= 1
    counters: np.ndarray  # (n_active,) updates performed so far


def async_step(
    weights: np.ndarray,
    state: AsyncState,
    schedules: list[UpdateSchedule],
    objectives: list[Objective],
    region: ProjectionSet,
    b: np.ndarray | None = None,
    u=None,
) -> tuple[AsyncState, np.ndarray, np.ndarray]:
    """Advance one time step.

    weights is the active block of the weight matrix (full matrix without a
    malicious agent, regular block A with one, in which case b and u supply
    the malicious column).  Returns the new state plus the applied
    subgradients and the perturbations omega (0 at non-update rows).
    """
    x = state.estimates
    n, m = x.shape
    if len(schedules) != n or len(objectives) != n:
        raise ScenarioError("one schedule and one objective per active agent are required")
    avg = weights @ x
    if b is not None:
        avg = avg + np.outer(b, np.asarray(u, dtype=float))

    counters = state.counters.copy()
    d = _batch_subgradients(objectives, x)
    nxt = np.empty_like(x)
    omega = np.zeros_like(x)
    for i in range(n):
        updating, r = schedules[i].is_update_time(state.k)
        if updating:
            counters[i] = r
            nxt[i] = region.project(avg[i] - d[i] / r)
            omega[i] = nxt[i] - avg[i]
        else:
            nxt[i] = region.project(avg[i])
            d[i] = 0.0
    return AsyncState(state.k + 1, nxt, counters), d, omega


def run_async(
    scenario: Scenario,
    horizon: int | None = None,
    malicious_input: np.ndarray | None = None,
    seed: int | None = None,
) -> Trace:
    """Run the asynchronous algorithm and record a full trace.

    Refuses to start unless every active agent's schedule performs a
    constant positive number of updates per window.  Initial estimates are
    projected into X at k=0 so membership holds for the whole trace.
    """
    scenario.require_async_fields()
    K = scenario.horizon if horizon is None else horizon
    if K < 0:
        raise ValueError("horizon must be nonnegative")
    m = scenario.m
    region = scenario.projection
    init = scenario.initial_estimates(seed)

    if malicious_input is None:
        active = list(range(1, scenario.n + 1))
        if scenario.malicious is not None:
            raise ScenarioError(
                "scenario names a malicious agent but no input sequence was given"
            )
        W = scenario.weights
        b = None
        u_seq = None
    else:
        if scenario.malicious is None:
            raise ScenarioError("malicious input given but the scenario names no malicious agent")
        active = scenario.regular_agents()
        p = partition(scenario.weights, scenario.malicious)
        W = p.A
        b = p.b
        u_seq = np.asarray(malicious_input, dtype=float)
        if u_seq.ndim == 1:
            u_seq = u_seq[:, None]
        if u_seq.shape[0] < K or u_seq.shape[1] != m:
            raise ScenarioError(f"malicious input needs shape ({K}, {m}), got {u_seq.shape}")

    schedules = []
    for i in active:
        s = scenario.schedules[i - 1]
        if s is None:
            raise ScenarioError(f"agent {i} has no update schedule")
        schedules.append(s)
    check = check_update_regularity(schedules, scenario.window, horizon=K)
    if not check.ok:
        raise UpdateRegularityError(
            f"refusing to run: update schedules are not window-regular "
            f"(T={scenario.window}): {check.reason}"
        )

    objectives = [scenario.objectives[i - 1] for i in active]
    x = region.project(init[[i - 1 for i in active]])
    n_act = len(active)

    estimates = np.empty((K + 1, n_act, m))
    estimates[0] = x
    subgradients = np.empty((K, n_act, m))
    omegas = np.empty((K, n_act, m))
    chis = np.zeros((K, n_act))
    counts = np.empty((K, n_act), dtype=int)
    subgrad = _FastSubgradients(objectives, m)

    counters = np.zeros(n_act, dtype=int)
    for k in range(K):
        avg = W @ x
        if b is not None:
            avg = avg + np.outer(b, u_seq[k])
        updating = np.zeros(n_act, dtype=bool)
        for i, s in enumerate(schedules):
            flag, r = s.is_update_time(k)
            if flag:
                updating[i] = True
                counters[i] = r
        d = subgrad(x)
        d[~updating] = 0.0
        step = np.zeros(n_act)
        step[updating] = 1.0 / counters[updating]
        nxt = region.project(avg - step[:, None] * d)
        x = nxt
        estimates[k + 1] = x
        subgradients[k] = d
        omegas[k] = np.where(updating[:, None], nxt - avg, 0.0)
        chis[k] = updating
        counts[k] = counters

    return Trace(
        estimates=estimates,
        inputs=u_seq[:K].copy() if u_seq is not None else None,
        stepsizes=None,
        oracle=OracleRecord(
            subgradients=subgradients, chi=chis, counters=counts, omega=omegas
        ),
    )
