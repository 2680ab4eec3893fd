"""Directed communication graphs.

Agents are numbered 1..n.  An arc (j, i) means agent i receives the data
sent by agent j; self-loops are implicit in the weight construction and
never stored as arcs.
"""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass(frozen=True)
class NetworkGraph:
    n: int
    edges: frozenset[tuple[int, int]] = field(default_factory=frozenset)

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"need at least one agent, got n={self.n}")
        for (j, i) in self.edges:
            if not (1 <= j <= self.n and 1 <= i <= self.n):
                raise ValueError(f"arc ({j}, {i}) references a node outside 1..{self.n}")
            if j == i:
                raise ValueError(f"self-loop ({j}, {i}) is not a valid arc")

    def neighbors(self, i: int) -> set[int]:
        """Set of agents whose data agent i receives."""
        return {j for (j, k) in self.edges if k == i}

    def in_degree(self, i: int) -> int:
        return len(self.neighbors(i))

    def is_symmetric(self) -> bool:
        return all((i, j) in self.edges for (j, i) in self.edges)


def ring_graph(n: int) -> NetworkGraph:
    """Bidirectional cycle on n nodes."""
    if n < 3:
        raise ValueError(f"a ring needs at least 3 nodes, got {n}")
    edges = set()
    for i in range(1, n + 1):
        nxt = i % n + 1
        edges.add((i, nxt))
        edges.add((nxt, i))
    return NetworkGraph(n, frozenset(edges))


def complete_graph(n: int) -> NetworkGraph:
    return NetworkGraph(
        n, frozenset((j, i) for i in range(1, n + 1) for j in range(1, n + 1) if i != j)
    )


def is_strongly_connected(graph: NetworkGraph) -> bool:
    """True iff a directed path exists between every ordered node pair.

    Checked by forward and reverse reachability from node 1.
    """
    if graph.n == 1:
        return True
    fwd: dict[int, list[int]] = {i: [] for i in range(1, graph.n + 1)}
    rev: dict[int, list[int]] = {i: [] for i in range(1, graph.n + 1)}
    for (j, i) in graph.edges:
        fwd[j].append(i)
        rev[i].append(j)

    def reaches_all(adj):
        seen = {1}
        stack = [1]
        while stack:
            for v in adj[stack.pop()]:
                if v not in seen:
                    seen.add(v)
                    stack.append(v)
        return len(seen) == graph.n

    return reaches_all(fwd) and reaches_all(rev)
