"""Doubly stochastic weight matrices and the malicious-agent partition."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graphs import NetworkGraph, is_strongly_connected


def build_metropolis_weights(graph: NetworkGraph) -> np.ndarray:
    """Doubly stochastic weights on a symmetric, strongly connected graph.

    Off-diagonal weights are 1/(1 + max(deg_i, deg_j)) on arcs, and each
    diagonal entry absorbs the remainder of its row.  The result is
    symmetric, hence doubly stochastic, and positive exactly on arcs and
    the diagonal.
    """
    if not graph.is_symmetric():
        raise ValueError("metropolis weights need a symmetric graph (every arc reversed)")
    if not is_strongly_connected(graph):
        raise ValueError("graph is not strongly connected")
    n = graph.n
    deg = [graph.in_degree(i) for i in range(1, n + 1)]
    W = np.zeros((n, n))
    for (j, i) in graph.edges:
        W[i - 1, j - 1] = 1.0 / (1.0 + max(deg[i - 1], deg[j - 1]))
    for i in range(n):
        W[i, i] = 1.0 - W[i].sum()
    return W


def validate_double_stochastic(M: np.ndarray, tol: float = 1e-12) -> bool:
    """True iff M is square with entries >= -tol and all row and column
    sums within tol of 1."""
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        return False
    if not np.all(np.isfinite(M)):
        return False
    if np.any(M < -tol):
        return False
    ones = np.ones(M.shape[0])
    return bool(
        np.all(np.abs(M.sum(axis=1) - ones) <= tol)
        and np.all(np.abs(M.sum(axis=0) - ones) <= tol)
    )


def sinkhorn_doubly_stochastic(
    M: np.ndarray, tol: float = 1e-13, max_iter: int = 1000
) -> np.ndarray:
    """Scale a positive matrix to doubly stochastic by alternating row and
    column normalization."""
    M = np.array(M, dtype=float)
    if np.any(M <= 0):
        raise ValueError("sinkhorn scaling needs strictly positive entries")
    for _ in range(max_iter):
        M /= M.sum(axis=1, keepdims=True)
        M /= M.sum(axis=0, keepdims=True)
        if validate_double_stochastic(M, tol):
            return M
    raise ArithmeticError(f"sinkhorn scaling did not reach tolerance {tol}")


@dataclass(frozen=True)
class AdjacencyPartition:
    """Weight pair (A, b) seen from the malicious agent's side.

    A holds the weights among the n-1 regular agents (in their original
    order with the malicious agent removed) and b the weights each regular
    agent assigns to the malicious agent, so the regular estimates evolve
    as x(k+1) = A x(k) + b u(k) under pure averaging.
    """

    A: np.ndarray
    b: np.ndarray
    malicious_index: int

    def __post_init__(self):
        A = np.asarray(self.A, dtype=float)
        b = np.asarray(self.b, dtype=float)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)
        if A.ndim != 2 or A.shape[0] != A.shape[1] or b.shape != (A.shape[0],):
            raise ValueError(f"inconsistent partition shapes {A.shape} and {b.shape}")

    @property
    def n(self) -> int:
        """Total agent count including the malicious agent."""
        return self.A.shape[0] + 1

    def stacked(self) -> np.ndarray:
        """The (n-1) x n matrix (A, b)."""
        return np.column_stack([self.A, self.b])


def partition(M: np.ndarray, malicious_index: int) -> AdjacencyPartition:
    """Split an n x n weight matrix into the regular-agent block A and the
    malicious-agent column b."""
    M = np.asarray(M, dtype=float)
    n = M.shape[0]
    if not (1 <= malicious_index <= n):
        raise ValueError(f"malicious index {malicious_index} outside 1..{n}")
    keep = [i for i in range(n) if i != malicious_index - 1]
    A = M[np.ix_(keep, keep)]
    b = M[keep, malicious_index - 1]
    return AdjacencyPartition(A, b, malicious_index)


def embed(p: AdjacencyPartition, malicious_row: np.ndarray, malicious_self: float) -> np.ndarray:
    """Rebuild the full n x n matrix from a partition plus the malicious
    agent's own row.  Inverse of :func:`partition` on the regular block."""
    n = p.n
    row = np.asarray(malicious_row, dtype=float)
    if row.shape != (n - 1,):
        raise ValueError(f"malicious row must have length {n - 1}")
    M = np.empty((n, n))
    keep = [i for i in range(n) if i != p.malicious_index - 1]
    M[np.ix_(keep, keep)] = p.A
    M[keep, p.malicious_index - 1] = p.b
    M[p.malicious_index - 1, keep] = row
    M[p.malicious_index - 1, p.malicious_index - 1] = malicious_self
    return M
