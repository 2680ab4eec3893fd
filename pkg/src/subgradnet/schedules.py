"""Stepsize schedules for the synchronous algorithm and per-agent update
schedules for the asynchronous one."""

from __future__ import annotations

import math
from bisect import bisect_left
from dataclasses import dataclass, field

from .errors import ScenarioError


@dataclass(frozen=True)
class StepsizeSchedule:
    """Common stepsize sequence alpha_k, bounded above by ``cap``.

    kinds: "constant" (alpha0), "harmonic" (alpha0 / (k+1)), "explicit"
    (a finite list of values).
    """

    kind: str = "harmonic"
    alpha0: float = 1.0
    values: tuple[float, ...] = ()

    def __post_init__(self):
        if self.kind not in ("constant", "harmonic", "explicit"):
            raise ScenarioError(f"unknown stepsize kind {self.kind!r}")
        if self.kind == "explicit":
            if not self.values or any(v <= 0 for v in self.values):
                raise ScenarioError("explicit stepsizes must be a nonempty positive list")
        elif self.alpha0 <= 0:
            raise ScenarioError("stepsize alpha0 must be positive")

    def at(self, k: int) -> float:
        if self.kind == "constant":
            return self.alpha0
        if self.kind == "harmonic":
            return self.alpha0 / (k + 1)
        if k >= len(self.values):
            raise ScenarioError(
                f"explicit stepsize schedule has {len(self.values)} values, needs index {k}"
            )
        return self.values[k]

    @property
    def cap(self) -> float:
        return max(self.values) if self.kind == "explicit" else self.alpha0


@dataclass(frozen=True)
class UpdateSchedule:
    """An agent's deterministic optimization-update times.

    Either periodic (updates at offset, offset+period, ...) or an explicit
    sorted list of times.  The schedule is private to its agent: adversary
    code never receives it.
    """

    kind: str = "periodic"
    offset: int = 0
    period: int = 1
    times: tuple[int, ...] = ()

    def __post_init__(self):
        if self.kind == "periodic":
            if self.period < 1 or self.offset < 0:
                raise ScenarioError("periodic schedule needs period >= 1 and offset >= 0")
        elif self.kind == "explicit":
            if any(t < 0 for t in self.times) or list(self.times) != sorted(set(self.times)):
                raise ScenarioError("explicit update times must be sorted, unique, nonnegative")
        else:
            raise ScenarioError(f"unknown update schedule kind {self.kind!r}")

    def is_update_time(self, k: int) -> tuple[bool, int | None]:
        """Whether time k is an update time, and if so which update (1-based)."""
        if k < 0:
            raise ValueError("time index must be nonnegative")
        if self.kind == "periodic":
            if k >= self.offset and (k - self.offset) % self.period == 0:
                return True, (k - self.offset) // self.period + 1
            return False, None
        i = bisect_left(self.times, k)
        if i < len(self.times) and self.times[i] == k:
            return True, i + 1
        return False, None

    def count_in(self, start: int, stop: int) -> int:
        """Number of update times in [start, stop)."""
        if self.kind == "periodic":
            lo = max(0, -((self.offset - start) // self.period))
            hi = -((self.offset - stop) // self.period)
            return max(0, hi - lo)
        return bisect_left(self.times, stop) - bisect_left(self.times, start)


@dataclass(frozen=True)
class RegularityCheck:
    """Result of checking that every agent updates a constant positive
    number of times in every length-T window."""

    ok: bool
    window: int
    per_agent_counts: tuple[int, ...] | None
    horizon_checked: int
    exact: bool
    reason: str | None = None


def default_window(schedules: list[UpdateSchedule]) -> int:
    """Least common multiple of the periodic schedules' periods (1 if none),
    which makes the window check exact."""
    T = 1
    for s in schedules:
        if s.kind == "periodic":
            T = math.lcm(T, s.period)
    return T


def check_update_regularity(
    schedules: list[UpdateSchedule], window: int, horizon: int | None = None
) -> RegularityCheck:
    """Verify the constant-updates-per-window property.

    Periodic schedules whose period divides the window are verified exactly
    (the count is window/period in every window iff offset < period).
    Anything else is checked by counting over at least 20 windows, or over
    ceil(horizon/window) windows when a horizon is given.
    """
    if window < 1:
        raise ScenarioError("window length must be >= 1")
    n_windows = max(20, -(-(horizon or 0) // window))
    counts: list[int] = []
    exact = True
    for idx, s in enumerate(schedules):
        if s.kind == "periodic" and window % s.period == 0:
            if s.offset >= s.period:
                return RegularityCheck(
                    False, window, None, n_windows * window, True,
                    f"agent schedule {idx}: offset {s.offset} >= period {s.period} "
                    f"leaves the first window short",
                )
            counts.append(window // s.period)
            continue
        exact = False
        seen = {s.count_in(r * window, (r + 1) * window) for r in range(n_windows)}
        if len(seen) != 1 or 0 in seen:
            return RegularityCheck(
                False, window, None, n_windows * window, False,
                f"agent schedule {idx}: update counts per window are {sorted(seen)}",
            )
        counts.append(seen.pop())
    return RegularityCheck(True, window, tuple(counts), n_windows * window, exact)
