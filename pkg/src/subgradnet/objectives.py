"""Convex per-agent objectives with deterministic subgradient selection.

Three families, all separable across coordinates:

* absolute deviation  scale * sum_j |x_j - c_j|
* diagonal quadratic  sum_j q_j (x_j - c_j)^2
* constant
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import UnboundedSubgradientError
from .projection import Box, ProjectionSet


def _vec(v, m: int | None = None) -> np.ndarray:
    a = np.atleast_1d(np.asarray(v, dtype=float))
    if m is not None and a.shape == (1,) and m > 1:
        a = np.full(m, a[0])
    return a


@dataclass(frozen=True)
class AbsoluteDeviation:
    """f(x) = scale * sum_j |x_j - center_j|."""

    center: np.ndarray
    scale: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "center", _vec(self.center))
        if self.scale < 0:
            raise ValueError("scale must be nonnegative")

    @property
    def m(self) -> int:
        return self.center.shape[0]

    def evaluate(self, x) -> float:
        x = self._check(x)
        return float(self.scale * np.sum(np.abs(x - self.center)))

    def subgradient(self, x) -> np.ndarray:
        # sign() is 0 at the kink, which is a valid subgradient and keeps
        # traces reproducible.
        x = self._check(x)
        return self.scale * np.sign(x - self.center)

    def subgradient_bound(self, region: ProjectionSet | None = None) -> float:
        return float(self.scale * np.sqrt(self.m))

    def _check(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape != self.center.shape:
            raise ValueError(f"expected dimension {self.m}, got shape {x.shape}")
        return x


@dataclass(frozen=True)
class Quadratic:
    """f(x) = sum_j weight_j (x_j - center_j)^2 with weight_j >= 0."""

    center: np.ndarray
    weight: np.ndarray = 1.0  # type: ignore[assignment]

    def __post_init__(self):
        center = _vec(self.center)
        object.__setattr__(self, "center", center)
        object.__setattr__(self, "weight", _vec(self.weight, center.shape[0]))
        if self.weight.shape != center.shape:
            raise ValueError("weight and center dimensions differ")
        if np.any(self.weight < 0):
            raise ValueError("quadratic weights must be nonnegative")

    @property
    def m(self) -> int:
        return self.center.shape[0]

    def evaluate(self, x) -> float:
        x = self._check(x)
        return float(np.sum(self.weight * (x - self.center) ** 2))

    def subgradient(self, x) -> np.ndarray:
        x = self._check(x)
        return 2.0 * self.weight * (x - self.center)

    def subgradient_bound(self, region: ProjectionSet | None = None) -> float:
        if np.all(self.weight == 0.0):
            return 0.0
        if region is None:
            raise UnboundedSubgradientError(
                "a quadratic has unbounded subgradients without a bounded region"
            )
        if isinstance(region, Box):
            reach = np.maximum(
                np.abs(region.lower - self.center), np.abs(region.upper - self.center)
            )
        else:  # ball
            reach = np.abs(region.center - self.center) + region.radius
        return float(2.0 * np.linalg.norm(self.weight * reach))

    def _check(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape != self.center.shape:
            raise ValueError(f"expected dimension {self.m}, got shape {x.shape}")
        return x


@dataclass(frozen=True)
class Constant:
    value: float = 0.0
    m: int = 1

    def evaluate(self, x) -> float:
        return float(self.value)

    def subgradient(self, x) -> np.ndarray:
        return np.zeros(self.m)

    def subgradient_bound(self, region: ProjectionSet | None = None) -> float:
        return 0.0


Objective = AbsoluteDeviation | Quadratic | Constant


def network_subgradient_bound(
    objectives: list[Objective], region: ProjectionSet | None = None
) -> float:
    """Common bound L: the largest individual subgradient bound."""
    return max(obj.subgradient_bound(region) for obj in objectives)


def batch_sum_value(objectives: list[Objective], X: np.ndarray) -> np.ndarray:
    """Sum objective evaluated at each row of X, vectorized over rows."""
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    total = np.zeros(X.shape[0])
    for o in objectives:
        if isinstance(o, AbsoluteDeviation):
            total += o.scale * np.abs(X - o.center).sum(axis=1)
        elif isinstance(o, Quadratic):
            total += ((X - o.center) ** 2 * o.weight).sum(axis=1)
        else:
            total += o.value
    return total


def _weighted_median(centers: np.ndarray, weights: np.ndarray) -> float:
    """Minimizer of sum_i w_i |x - c_i|; midpoint of the flat interval on ties."""
    order = np.argsort(centers)
    c = centers[order]
    w = weights[order]
    total = w.sum()
    if total <= 0:
        return float(c[0]) if c.size else 0.0
    cum = np.cumsum(w)
    k = int(np.searchsorted(cum, 0.5 * total))
    if abs(cum[k] - 0.5 * total) <= 1e-12 * total and k + 1 < c.size:
        return float(0.5 * (c[k] + c[k + 1]))
    return float(c[k])


def _grid_refine_1d(fun, lo: float, hi: float) -> float:
    """Coarse grid plus one local refinement pass, resolving to 1e-4 of the width."""
    width = hi - lo
    if width <= 0:
        return lo
    xs = np.linspace(lo, hi, 201)
    best = xs[np.argmin([fun(x) for x in xs])]
    half = width / 200.0
    xs = np.linspace(max(lo, best - half), min(hi, best + half), 201)
    return float(xs[np.argmin([fun(x) for x in xs])])


def sum_minimizer(
    objectives: list[Objective], region: ProjectionSet | None = None
) -> tuple[np.ndarray, float]:
    """Minimizer of the sum objective and its value.

    Closed form for pure quadratic (weighted mean) and pure absolute
    deviation (weighted median) families, coordinatewise grid search over a
    box otherwise.  Constants never move the minimizer.
    """
    if not objectives:
        raise ValueError("need at least one objective")
    m = max(getattr(obj, "m", 1) for obj in objectives)
    active = [o for o in objectives if not isinstance(o, Constant)]
    kinds = {type(o) for o in active}

    if not active:
        x_star = np.zeros(m)
    elif kinds == {AbsoluteDeviation}:
        x_star = np.array(
            [
                _weighted_median(
                    np.array([o.center[j] for o in active]),
                    np.array([o.scale for o in active]),
                )
                for j in range(m)
            ]
        )
    elif kinds == {Quadratic}:
        num = np.zeros(m)
        den = np.zeros(m)
        for o in active:
            num += o.weight * o.center
            den += o.weight
        x_star = np.where(den > 0, num / np.where(den > 0, den, 1.0), 0.0)
    else:
        if not isinstance(region, Box):
            raise ValueError(
                "mixed objective families need a box region for the grid fallback"
            )
        x_star = np.empty(m)
        for j in range(m):

            def coord_cost(t, j=j):
                total = 0.0
                for o in active:
                    if isinstance(o, AbsoluteDeviation):
                        total += o.scale * abs(t - o.center[j])
                    else:
                        total += o.weight[j] * (t - o.center[j]) ** 2
                return total

            x_star[j] = _grid_refine_1d(coord_cost, region.lower[j], region.upper[j])

    if isinstance(region, Box):
        # For separable convex objectives the constrained minimizer is the
        # coordinatewise clamp of the unconstrained one.
        x_star = np.clip(x_star, region.lower, region.upper)
    elif region is not None and not region.contains(x_star):
        raise ValueError("minimizer lies outside the projection set")

    f_star = float(sum(obj.evaluate(x_star) for obj in objectives))
    return x_star, f_star
