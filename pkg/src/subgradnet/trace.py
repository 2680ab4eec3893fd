"""Time-indexed run records and their CSV serialization.

A :class:`Trace` carries everything a run produced.  Ground-truth fields
(subgradients, update flags, counters, perturbations) live in a separate
:class:`OracleRecord` and are never part of the adversary-visible view:
:class:`VisibleTrace` simply lacks them, so adversary code cannot read
them by construction.

CSV layout (one row per time/agent/coordinate):

* visible file:  k,agent,coord,value,u,alpha
* oracle file:   k,agent,coord,value,u,alpha,d,chi,r,omega
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class OracleRecord:
    """Diagnostics reserved for test oracles and reports; hidden from attacks.

    subgradients: (K, n, m) applied subgradients d_i(k)
    chi:          (K, n) 1 where agent i made an optimization update at k
    counters:     (K, n) cumulative update count r_i(k) (0 before the first)
    omega:        (K, n, m) projected-update perturbation, exactly 0 at
                  non-update times
    """

    subgradients: np.ndarray
    chi: np.ndarray | None = None
    counters: np.ndarray | None = None
    omega: np.ndarray | None = None


@dataclass(frozen=True)
class VisibleTrace:
    """What the malicious agent observes: the regular agents' estimates,
    its own injected inputs, and (for the synchronous algorithm, where it
    is granted) the common stepsize sequence."""

    estimates: np.ndarray  # (K+1, n_observed, m)
    inputs: np.ndarray | None = None  # (K, m)
    stepsizes: np.ndarray | None = None  # (K,)

    @property
    def horizon(self) -> int:
        return self.estimates.shape[0] - 1


@dataclass(frozen=True)
class Trace:
    estimates: np.ndarray  # (K+1, n, m)
    inputs: np.ndarray | None = None
    stepsizes: np.ndarray | None = None
    oracle: OracleRecord | None = None

    @property
    def horizon(self) -> int:
        return self.estimates.shape[0] - 1

    @property
    def n_agents(self) -> int:
        return self.estimates.shape[1]

    @property
    def m(self) -> int:
        return self.estimates.shape[2]

    def visible(self) -> VisibleTrace:
        return VisibleTrace(self.estimates, self.inputs, self.stepsizes)


def traces_equal(a: Trace | VisibleTrace, b: Trace | VisibleTrace) -> bool:
    """Structural equality of the visible parts of two traces."""

    def same(x, y):
        if x is None or y is None:
            return x is None and y is None
        return x.shape == y.shape and np.array_equal(x, y)

    return (
        same(a.estimates, b.estimates)
        and same(a.inputs, b.inputs)
        and same(a.stepsizes, b.stepsizes)
    )


def _fmt(v) -> str:
    return "" if v is None else repr(float(v))


def write_trace_csv(trace: Trace, path, oracle: bool = False) -> None:
    """Write a trace; with oracle=True the ground-truth columns are included."""
    K = trace.horizon
    header = ["k", "agent", "coord", "value", "u", "alpha"]
    if oracle:
        header += ["d", "chi", "r", "omega"]
    rec = trace.oracle
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for k in range(K + 1):
            u_k = trace.inputs[k] if trace.inputs is not None and k < K else None
            a_k = trace.stepsizes[k] if trace.stepsizes is not None and k < K else None
            for i in range(trace.n_agents):
                for c in range(trace.m):
                    row = [
                        k,
                        i + 1,
                        c,
                        repr(float(trace.estimates[k, i, c])),
                        _fmt(u_k[c] if u_k is not None else None),
                        _fmt(a_k),
                    ]
                    if oracle:
                        has = rec is not None and k < K
                        row += [
                            _fmt(rec.subgradients[k, i, c] if has else None),
                            _fmt(rec.chi[k, i] if has and rec.chi is not None else None),
                            _fmt(rec.counters[k, i] if has and rec.counters is not None else None),
                            _fmt(rec.omega[k, i, c] if has and rec.omega is not None else None),
                        ]
                    w.writerow(row)


def read_trace_csv(path) -> Trace:
    """Reload a trace written by :func:`write_trace_csv`.

    Oracle columns are restored when present; a visible-only file yields a
    trace with ``oracle=None``.
    """
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    col = {name: idx for idx, name in enumerate(header)}
    if not body:
        raise ValueError(f"trace file {path} has no data rows")

    ks = [int(r[col["k"]]) for r in body]
    agents = [int(r[col["agent"]]) for r in body]
    coords = [int(r[col["coord"]]) for r in body]
    K = max(ks)
    n = max(agents)
    m = max(coords) + 1

    estimates = np.empty((K + 1, n, m))
    inputs = np.full((K, m), np.nan) if any(r[col["u"]] for r in body) else None
    steps = np.full(K, np.nan) if any(r[col["alpha"]] for r in body) else None
    has_oracle = "d" in col and any(r[col["d"]] for r in body)
    d = np.full((K, n, m), np.nan) if has_oracle else None
    chi = np.full((K, n), np.nan) if has_oracle and any(r[col["chi"]] for r in body) else None
    cnt = np.full((K, n), np.nan) if has_oracle and any(r[col["r"]] for r in body) else None
    om = np.full((K, n, m), np.nan) if has_oracle and any(r[col["omega"]] for r in body) else None

    for r in body:
        k, i, c = int(r[col["k"]]), int(r[col["agent"]]) - 1, int(r[col["coord"]])
        estimates[k, i, c] = float(r[col["value"]])
        if k < K:
            if inputs is not None and r[col["u"]]:
                inputs[k, c] = float(r[col["u"]])
            if steps is not None and r[col["alpha"]]:
                steps[k] = float(r[col["alpha"]])
            if d is not None and r[col["d"]]:
                d[k, i, c] = float(r[col["d"]])
            if chi is not None and r[col["chi"]]:
                chi[k, i] = float(r[col["chi"]])
            if cnt is not None and r[col["r"]]:
                cnt[k, i] = float(r[col["r"]])
            if om is not None and r[col["omega"]]:
                om[k, i, c] = float(r[col["omega"]])

    oracle = None
    if d is not None:
        oracle = OracleRecord(
            subgradients=d,
            chi=chi,
            counters=cnt.astype(int) if cnt is not None else None,
            omega=om,
        )
    return Trace(estimates, inputs, steps, oracle)
