"""Euclidean projection onto bounded convex sets (boxes and balls).

Both shapes accept single points of shape (m,) or batches of shape
(..., m) and project along the last axis.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Relative slack on ball membership; it absorbs roundoff in the radial
# rescale and makes projecting twice exactly idempotent.
_BALL_SLACK = 1e-12


@dataclass(frozen=True)
class Box:
    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lower = np.atleast_1d(np.asarray(self.lower, dtype=float))
        upper = np.atleast_1d(np.asarray(self.upper, dtype=float))
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)
        if lower.shape != upper.shape:
            raise ValueError("lower and upper bounds differ in dimension")
        if np.any(lower > upper):
            raise ValueError("empty box: a lower bound exceeds its upper bound")
        if not (np.all(np.isfinite(lower)) and np.all(np.isfinite(upper))):
            raise ValueError("box bounds must be finite")

    @property
    def m(self) -> int:
        return self.lower.shape[0]

    def project(self, y) -> np.ndarray:
        y = self._check(y)
        return np.clip(y, self.lower, self.upper)

    def contains(self, y) -> bool | np.ndarray:
        y = self._check(y)
        inside = np.all((y >= self.lower) & (y <= self.upper), axis=-1)
        return bool(inside) if inside.ndim == 0 else inside

    def _check(self, y) -> np.ndarray:
        y = np.asarray(y, dtype=float)
        if y.shape[-1:] != (self.m,):
            raise ValueError(f"expected last dimension {self.m}, got shape {y.shape}")
        return y


@dataclass(frozen=True)
class Ball:
    center: np.ndarray
    radius: float

    def __post_init__(self):
        center = np.atleast_1d(np.asarray(self.center, dtype=float))
        object.__setattr__(self, "center", center)
        object.__setattr__(self, "radius", float(self.radius))
        if self.radius < 0:
            raise ValueError("ball radius must be nonnegative")

    @property
    def m(self) -> int:
        return self.center.shape[0]

    def project(self, y) -> np.ndarray:
        y = self._check(y)
        diff = y - self.center
        norm = np.linalg.norm(diff, axis=-1, keepdims=True)
        limit = self.radius * (1.0 + _BALL_SLACK)
        scale = np.where(norm > limit, self.radius / np.where(norm > 0, norm, 1.0), 1.0)
        return np.where(norm > limit, self.center + scale * diff, y)

    def contains(self, y) -> bool | np.ndarray:
        y = self._check(y)
        norm = np.linalg.norm(y - self.center, axis=-1)
        inside = norm <= self.radius * (1.0 + _BALL_SLACK)
        return bool(inside) if inside.ndim == 0 else inside

    def _check(self, y) -> np.ndarray:
        y = np.asarray(y, dtype=float)
        if y.shape[-1:] != (self.m,):
            raise ValueError(f"expected last dimension {self.m}, got shape {y.shape}")
        return y


ProjectionSet = Box | Ball
