"""The malicious agent's attack pipeline.

The malicious agent injects a designed 0/1 input sequence, collects the
regular agents' estimates, and solves a least-squares problem per window
to recover the weight pair (A, b).  On synchronous descent traces the
recovered weights converge as the stepsize dies out, after which the
agents' subgradients fall out of the update equation by inversion.

All operations here consume the adversary-visible view of a trace only;
update schedules, counters and ground-truth subgradients are absent from
that view by construction.  Ground truth enters solely through explicit
``truth_*`` arguments supplied by a test harness or the CLI for scoring.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import SingularDataError
from .schedules import StepsizeSchedule
from .trace import Trace, VisibleTrace

# Relative singular-value threshold below which a data matrix is treated
# as rank deficient.
SINGULAR_RTOL = 1e-10


def probe_sequence(n: int) -> np.ndarray:
    """The designed input of length 2n-1: n-1 zeros followed by n ones."""
    if n < 2:
        raise ValueError(f"need a network of at least 2 agents, got n={n}")
    return np.r_[np.zeros(n - 1), np.ones(n)]


def windowed_probe(n: int, windows: int) -> np.ndarray:
    """The probe repeated over ``windows`` aligned windows of length 2n-1."""
    if windows < 1:
        raise ValueError("need at least one window")
    return np.tile(probe_sequence(n), windows)


def window_time(n: int, window: int, step: int) -> int:
    """Global time index of position ``step`` inside ``window``."""
    return window * (2 * n - 1) + step


def assemble_data_matrices(states: np.ndarray, inputs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Build the regression pair (Y, Z) from one window of observations.

    states holds the 2n consecutive observed estimate vectors (rows) and
    inputs the 2n-1 inputs that produced the transitions.  Y stacks the
    lagged states over the input row, Z the led states, and both carry a
    leading all-ones column so that pure averaging data satisfies
    Z = (A, b) Y exactly (rows of (A, b) sum to one).
    """
    states = np.asarray(states, dtype=float)
    inputs = np.asarray(inputs, dtype=float)
    n1 = states.shape[1]
    span = 2 * (n1 + 1)  # 2n states for an n-agent network
    if states.shape[0] != span or inputs.shape != (span - 1,):
        raise ValueError(
            f"window needs {span} states and {span - 1} inputs, "
            f"got {states.shape[0]} and {inputs.shape}"
        )
    Z = np.column_stack([np.ones(n1), states[1:].T])
    Y = np.vstack([np.column_stack([np.ones(n1), states[:-1].T]), np.r_[1.0, inputs]])
    return Y, Z


def recover_weights(
    Y: np.ndarray, Z: np.ndarray, rtol: float = SINGULAR_RTOL
) -> tuple[np.ndarray, float]:
    """Least-squares estimate of (A, b) from Z ~ W Y, plus conditioning.

    Solved through the SVD of Y rather than by forming (Y Y')^{-1}.
    Returns the estimate and the smallest singular value of Y Y'.  Raises
    SingularDataError when Y is rank deficient at the relative threshold,
    which is the numerical face of a non-identifiable weight pair.
    """
    U, s, Vt = np.linalg.svd(np.asarray(Y, dtype=float), full_matrices=False)
    if s[0] == 0.0 or s[-1] < rtol * s[0]:
        raise SingularDataError(
            f"data matrix is rank deficient (singular values {s.min():.3e} .. {s.max():.3e}); "
            f"the weight pair is not identifiable from this window"
        )
    W = ((np.asarray(Z, dtype=float) @ Vt.T) / s) @ U.T
    return W, float(s[-1] ** 2)


@dataclass(frozen=True)
class WindowEstimate:
    index: int
    weights: np.ndarray | None  # (n-1, n) stacked (A, b), None when singular
    conditioning: float  # smallest singular value of Y Y' (min over coordinates)
    singular: bool
    error: float | None = None  # Frobenius distance to the true pair, harness-scored


@dataclass(frozen=True)
class RecoveryReport:
    window_length: int
    windows: tuple[WindowEstimate, ...]
    final_weights: np.ndarray | None
    subgradient_estimates: np.ndarray | None = None  # (K, n-1, m)
    subgradient_errors: np.ndarray | None = None  # same shape, harness-scored

    def window_errors(self) -> dict[int, float]:
        return {w.index: w.error for w in self.windows if w.error is not None}

    def median_subgradient_error(self, last: int | None = None) -> float:
        if self.subgradient_errors is None:
            raise ValueError("no ground-truth subgradients were supplied")
        errs = self.subgradient_errors
        if last is not None:
            errs = errs[-last:]
        return float(np.median(np.abs(errs)))

    def max_subgradient_error(self, last: int | None = None) -> float:
        if self.subgradient_errors is None:
            raise ValueError("no ground-truth subgradients were supplied")
        errs = self.subgradient_errors
        if last is not None:
            errs = errs[-last:]
        return float(np.max(np.abs(errs)))

    def to_dict(self) -> dict:
        d: dict = {
            "window_length": self.window_length,
            "windows": [
                {
                    "index": w.index,
                    "singular": w.singular,
                    "conditioning": w.conditioning,
                    **({"error": w.error} if w.error is not None else {}),
                }
                for w in self.windows
            ],
            "recovered": self.final_weights.tolist() if self.final_weights is not None else None,
        }
        if self.subgradient_errors is not None:
            a = np.abs(self.subgradient_errors)
            d["subgradient_error_quantiles"] = {
                "q10": float(np.quantile(a, 0.10)),
                "median": float(np.median(a)),
                "q90": float(np.quantile(a, 0.90)),
                "max": float(a.max()),
                "median_last_50": float(np.median(a[-50:])),
            }
        return d


def _require_visible(trace) -> VisibleTrace:
    if isinstance(trace, Trace):
        raise TypeError(
            "attack operations take the adversary-visible view; pass trace.visible()"
        )
    if not isinstance(trace, VisibleTrace):
        raise TypeError(f"expected a VisibleTrace, got {type(trace).__name__}")
    return trace


def recover_windows(
    visible: VisibleTrace,
    probe: np.ndarray,
    truth_weights: np.ndarray | None = None,
    rtol: float = SINGULAR_RTOL,
) -> tuple[list[WindowEstimate], np.ndarray | None]:
    """Per-window weight recovery over every complete probe window.

    Singular windows are flagged and skipped.  Multi-coordinate traces are
    recovered per coordinate and combined by conditioning-weighted average.
    Returns the window list and the last nonsingular estimate.
    """
    visible = _require_visible(visible)
    est = visible.estimates
    n1 = est.shape[1]
    m = est.shape[2]
    wl = 2 * (n1 + 1) - 1
    probe = np.asarray(probe, dtype=float)
    if probe.ndim == 1:
        probe = probe[:, None] * np.ones(m)
    R = min(probe.shape[0], visible.horizon) // wl
    if R < 1:
        raise ValueError(f"trace too short for one window of length {wl}")

    out: list[WindowEstimate] = []
    final = None
    for r in range(R):
        s = r * wl
        mats, conds = [], []
        for c in range(m):
            try:
                W_c, cond_c = recover_weights(
                    *assemble_data_matrices(est[s : s + wl + 1, :, c], probe[s : s + wl, c]),
                    rtol=rtol,
                )
            except SingularDataError:
                continue
            mats.append(W_c)
            conds.append(cond_c)
        if not mats:
            out.append(WindowEstimate(r, None, 0.0, True))
            continue
        weights = np.array(conds) / np.sum(conds)
        W = np.tensordot(weights, np.array(mats), axes=1)
        err = (
            float(np.linalg.norm(W - truth_weights)) if truth_weights is not None else None
        )
        out.append(WindowEstimate(r, W, float(min(conds)), False, err))
        final = W
    return out, final


def attack_consensus(
    visible: VisibleTrace,
    probe: np.ndarray,
    truth_weights: np.ndarray | None = None,
) -> RecoveryReport:
    """Exact weight recovery from a pure averaging trace under the probe."""
    visible = _require_visible(visible)
    windows, final = recover_windows(visible, probe, truth_weights)
    if final is None:
        raise SingularDataError(
            "every probe window is rank deficient; the weight pair cannot be recovered"
        )
    n1 = visible.estimates.shape[1]
    return RecoveryReport(2 * (n1 + 1) - 1, tuple(windows), final)


def _resolve_stepsizes(visible: VisibleTrace, stepsizes) -> np.ndarray:
    K = visible.horizon
    if stepsizes is None:
        if visible.stepsizes is None:
            raise ValueError(
                "no stepsize sequence: supply the granted (or assumed) schedule"
            )
        return np.asarray(visible.stepsizes, dtype=float)
    if isinstance(stepsizes, StepsizeSchedule):
        return np.array([stepsizes.at(k) for k in range(K)])
    arr = np.asarray(stepsizes, dtype=float)
    if arr.shape[0] < K:
        raise ValueError(f"stepsize sequence shorter than the trace ({arr.shape[0]} < {K})")
    return arr[:K]


def attack_sync(
    visible: VisibleTrace,
    probe: np.ndarray,
    stepsizes=None,
    truth_weights: np.ndarray | None = None,
    truth_subgradients: np.ndarray | None = None,
) -> RecoveryReport:
    """Windowed recovery plus subgradient extraction on a synchronous trace.

    The common stepsize schedule is granted to the adversary (defaulting to
    the one recorded in the visible trace).  Subgradients are extracted by
    inverting the update equation with the final window's weight estimate:

        d_hat(k) = (A_hat x(k) + b_hat u(k) - x(k+1)) / alpha_k
    """
    visible = _require_visible(visible)
    windows, final = recover_windows(visible, probe, truth_weights)
    n1 = visible.estimates.shape[1]
    wl = 2 * (n1 + 1) - 1
    if final is None:
        raise SingularDataError(
            "every probe window is rank deficient; the weight pair cannot be recovered"
        )

    alphas = _resolve_stepsizes(visible, stepsizes)
    est = visible.estimates
    K = visible.horizon
    m = est.shape[2]
    probe = np.asarray(probe, dtype=float)
    if probe.ndim == 1:
        probe = probe[:, None] * np.ones(m)
    u = probe[:K]
    A_hat, b_hat = final[:, :n1], final[:, n1]

    d_hat = np.empty((K, n1, m))
    for c in range(m):
        pred = est[:K, :, c] @ A_hat.T + np.outer(u[:, c], b_hat)
        d_hat[:, :, c] = (pred - est[1:, :, c]) / alphas[:K, None]

    errors = None
    if truth_subgradients is not None:
        errors = d_hat - np.asarray(truth_subgradients, dtype=float)[:K]
    return RecoveryReport(wl, tuple(windows), final, d_hat, errors)


def attack_async(
    visible: VisibleTrace,
    probe: np.ndarray,
    assumed_stepsizes,
    truth_weights: np.ndarray | None = None,
    truth_subgradients: np.ndarray | None = None,
) -> RecoveryReport:
    """The identical pipeline aimed at an asynchronous trace.

    Asynchronous traces carry no stepsize sequence, so the adversary must
    assume one; the resulting (large) extraction errors are the point.
    """
    return attack_sync(
        visible,
        probe,
        stepsizes=assumed_stepsizes,
        truth_weights=truth_weights,
        truth_subgradients=truth_subgradients,
    )
