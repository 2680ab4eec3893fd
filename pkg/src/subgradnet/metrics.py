"""Run diagnostics: disagreement, averages, optimality gap, boundedness."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .objectives import Objective, batch_sum_value
from .trace import Trace
from .weights import AdjacencyPartition


def disagreement(estimates: np.ndarray) -> float:
    """Largest pairwise Euclidean distance between agents' estimates.

    estimates: (n, m) or (n,) for scalar decisions.
    """
    X = np.asarray(estimates, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    if X.shape[0] == 0:
        raise ValueError("need at least one agent")
    diff = X[:, None, :] - X[None, :, :]
    return float(np.sqrt((diff**2).sum(axis=2)).max())


def disagreement_series(trace: Trace) -> np.ndarray:
    X = trace.estimates
    return np.sqrt(
        ((X[:, :, None, :] - X[:, None, :, :]) ** 2).sum(axis=3)
    ).max(axis=(1, 2))


def average_series(trace: Trace) -> np.ndarray:
    return trace.estimates.mean(axis=1)


def optimality_gap(estimates: np.ndarray, objectives: list[Objective], f_star: float) -> float:
    """Sum objective at the agents' average minus the optimal value.

    Tiny negative values (within 1e-12) are rounding at the optimum and are
    clipped to zero; anything more negative is reported as is, since it
    means the reference value is wrong.
    """
    X = np.asarray(estimates, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    xbar = X.mean(axis=0)
    raw = float(sum(obj.evaluate(xbar) for obj in objectives)) - f_star
    if -1e-12 <= raw < 0.0:
        return 0.0
    return raw


def state_infinity_bound(
    x0: np.ndarray, u_max: float, stepsize_cap: float, subgradient_bound: float,
    A: np.ndarray | AdjacencyPartition,
) -> float:
    """Worst-case sup-norm of the regular estimates under bounded input.

    Valid whenever the regular block's largest row sum is below one, which
    holds exactly when every regular agent gives the malicious agent
    positive weight.
    """
    A = A.A if isinstance(A, AdjacencyPartition) else np.asarray(A, dtype=float)
    row_max = float(np.abs(A).sum(axis=1).max())
    if row_max >= 1.0:
        raise ValueError(
            f"bound inapplicable: largest row sum of the regular block is {row_max} >= 1"
        )
    x0 = np.asarray(x0, dtype=float)
    return float(
        np.abs(x0).max() + (u_max + stepsize_cap * subgradient_bound) / (1.0 - row_max)
    )


@dataclass(frozen=True)
class RunSummary:
    disagreement: np.ndarray  # h(k), length K+1
    average: np.ndarray  # (K+1, m)
    gap: np.ndarray | None  # length K+1, None without a reference value
    state_bound: float | None  # sup-norm bound, None when inapplicable
    bound_respected: bool | None
    final_disagreement: float
    final_gap: float | None
    max_abs_estimate: float

    def to_dict(self, curve_points: int = 200) -> dict:
        idx = _decimate(len(self.disagreement), curve_points)
        d: dict = {
            "final_disagreement": self.final_disagreement,
            "max_abs_estimate": self.max_abs_estimate,
            "curve_k": idx.tolist(),
            "disagreement_curve": self.disagreement[idx].tolist(),
        }
        if self.gap is not None:
            d["final_gap"] = self.final_gap
            d["gap_curve"] = self.gap[idx].tolist()
        if self.state_bound is not None:
            d["state_bound"] = self.state_bound
            d["bound_respected"] = self.bound_respected
        return d


def _decimate(length: int, points: int) -> np.ndarray:
    if length <= points:
        return np.arange(length)
    idx = np.unique(np.linspace(0, length - 1, points).astype(int))
    return idx


def summarize(
    trace: Trace,
    objectives: list[Objective] | None = None,
    f_star: float | None = None,
    state_bound: float | None = None,
) -> RunSummary:
    h = disagreement_series(trace)
    avg = average_series(trace)
    gap = None
    if objectives is not None and f_star is not None:
        raw = batch_sum_value(objectives, avg) - f_star
        gap = np.where((raw < 0) & (raw >= -1e-12), 0.0, raw)
    max_abs = float(np.abs(trace.estimates).max())
    respected = None if state_bound is None else bool(max_abs <= state_bound)
    return RunSummary(
        disagreement=h,
        average=avg,
        gap=gap,
        state_bound=state_bound,
        bound_respected=respected,
        final_disagreement=float(h[-1]),
        final_gap=float(gap[-1]) if gap is not None else None,
        max_abs_estimate=max_abs,
    )
