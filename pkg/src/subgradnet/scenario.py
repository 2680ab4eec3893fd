"""Scenario files: a JSON-compatible description of one run.

A scenario pins the network, weights, objectives, schedules, projection
set, horizon and seed.  Loading validates every cross-reference and
rejects unknown fields by name, so a scenario that loads is runnable.
Emission is canonical (sorted keys), making outputs diffable and runs
reproducible byte for byte.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import ScenarioError, UpdateRegularityError
from .graphs import NetworkGraph, complete_graph, is_strongly_connected, ring_graph
from .objectives import AbsoluteDeviation, Constant, Objective, Quadratic
from .projection import Ball, Box, ProjectionSet
from .schedules import (
    StepsizeSchedule,
    UpdateSchedule,
    check_update_regularity,
    default_window,
)
from .weights import build_metropolis_weights, validate_double_stochastic

_TOP_FIELDS = {
    "name", "graph", "weights", "malicious", "objectives", "stepsize",
    "schedules", "window", "projection", "initial", "horizon", "seed", "output",
}
_DEFAULT_OUTPUT = {"trace": "trace.csv", "oracle": "trace_oracle.csv", "report": "report.json"}


def _reject_unknown(d: dict, allowed: set[str], where: str) -> None:
    unknown = set(d) - allowed
    if unknown:
        raise ScenarioError(f"unknown field {sorted(unknown)[0]!r} in {where}")


@dataclass(frozen=True)
class Scenario:
    name: str
    graph: NetworkGraph
    weights: np.ndarray
    malicious: int | None
    objectives: tuple[Objective, ...]  # indexed by agent-1, length n
    stepsize: StepsizeSchedule
    schedules: tuple[UpdateSchedule, ...] | None  # per agent (None where absent)
    window: int | None
    projection: ProjectionSet | None
    initial_spec: dict
    horizon: int
    seed: int
    output: dict

    @property
    def n(self) -> int:
        return self.graph.n

    @property
    def m(self) -> int:
        for obj in self.objectives:
            if not isinstance(obj, Constant):
                return obj.m
        if self.projection is not None:
            return self.projection.m
        return 1

    def regular_agents(self) -> list[int]:
        """1-based ids of agents that follow the algorithm truthfully."""
        return [i for i in range(1, self.n + 1) if i != self.malicious]

    def initial_estimates(self, seed: int | None = None) -> np.ndarray:
        """(n, m) initial estimates; the seed resolves randomized kinds."""
        spec = self.initial_spec
        if spec["kind"] == "explicit":
            vals = np.asarray(spec["values"], dtype=float)
            if vals.ndim == 1:
                vals = vals[:, None]
            if vals.shape != (self.n, self.m):
                raise ScenarioError(
                    f"initial values have shape {vals.shape}, expected {(self.n, self.m)}"
                )
            return vals
        if spec["kind"] == "zeros":
            return np.zeros((self.n, self.m))
        rng = np.random.default_rng(self.seed if seed is None else seed)
        return rng.uniform(spec["low"], spec["high"], size=(self.n, self.m))

    def require_async_fields(self) -> None:
        if self.schedules is None or self.projection is None:
            raise ScenarioError(
                "asynchronous runs need 'schedules' and 'projection' in the scenario"
            )

    def canonical_dict(self) -> dict:
        d: dict = {
            "name": self.name,
            "graph": _graph_dict(self.graph),
            "weights": {"rule": "explicit", "matrix": self.weights.tolist()},
            "objectives": [
                _objective_dict(i + 1, o) for i, o in enumerate(self.objectives)
            ],
            "stepsize": _stepsize_dict(self.stepsize),
            "initial": dict(self.initial_spec),
            "horizon": self.horizon,
            "seed": self.seed,
            "output": dict(self.output),
        }
        if self.malicious is not None:
            d["malicious"] = self.malicious
        if self.schedules is not None:
            d["schedules"] = [
                _schedule_dict(i + 1, s)
                for i, s in enumerate(self.schedules)
                if s is not None
            ]
            d["window"] = self.window
        if self.projection is not None:
            d["projection"] = _projection_dict(self.projection)
        return d

    def canonical_json(self) -> str:
        return json.dumps(self.canonical_dict(), sort_keys=True, indent=2) + "\n"


def _graph_dict(g: NetworkGraph) -> dict:
    return {"kind": "explicit", "n": g.n, "edges": sorted(list(e) for e in g.edges)}


def _objective_dict(agent: int, o: Objective) -> dict:
    if isinstance(o, AbsoluteDeviation):
        return {"agent": agent, "kind": "absolute", "center": o.center.tolist(), "scale": o.scale}
    if isinstance(o, Quadratic):
        return {"agent": agent, "kind": "quadratic", "center": o.center.tolist(),
                "weight": o.weight.tolist()}
    return {"agent": agent, "kind": "constant", "value": o.value}


def _stepsize_dict(s: StepsizeSchedule) -> dict:
    if s.kind == "explicit":
        return {"kind": "explicit", "values": list(s.values)}
    return {"kind": s.kind, "alpha0": s.alpha0}


def _schedule_dict(agent: int, s: UpdateSchedule) -> dict:
    if s.kind == "periodic":
        return {"agent": agent, "kind": "periodic", "offset": s.offset, "period": s.period}
    return {"agent": agent, "kind": "explicit", "times": list(s.times)}


def _projection_dict(p: ProjectionSet) -> dict:
    if isinstance(p, Box):
        return {"shape": "box", "lower": p.lower.tolist(), "upper": p.upper.tolist()}
    return {"shape": "ball", "center": p.center.tolist(), "radius": p.radius}


def _parse_graph(d: dict) -> NetworkGraph:
    _reject_unknown(d, {"kind", "n", "edges"}, "graph")
    kind = d.get("kind")
    n = d.get("n")
    if not isinstance(n, int) or n < 1:
        raise ScenarioError("graph.n must be a positive integer")
    if kind == "ring":
        return ring_graph(n)
    if kind == "complete":
        return complete_graph(n)
    if kind == "explicit":
        edges = d.get("edges")
        if not isinstance(edges, list):
            raise ScenarioError("explicit graph needs an 'edges' list")
        return NetworkGraph(n, frozenset((int(j), int(i)) for j, i in edges))
    raise ScenarioError(f"unknown graph kind {kind!r}")


def _parse_weights(d: dict, graph: NetworkGraph) -> np.ndarray:
    _reject_unknown(d, {"rule", "matrix"}, "weights")
    rule = d.get("rule", "metropolis")
    if rule == "metropolis":
        return build_metropolis_weights(graph)
    if rule != "explicit":
        raise ScenarioError(f"unknown weight rule {rule!r}")
    M = np.asarray(d.get("matrix"), dtype=float)
    if M.shape != (graph.n, graph.n):
        raise ScenarioError(f"weight matrix shape {M.shape} does not match n={graph.n}")
    if not validate_double_stochastic(M, 1e-9):
        raise ScenarioError("explicit weight matrix is not doubly stochastic")
    for i in range(graph.n):
        for j in range(graph.n):
            if i != j and (M[i, j] > 0) != ((j + 1, i + 1) in graph.edges):
                raise ScenarioError(
                    f"weight matrix positivity at ({i + 1},{j + 1}) contradicts the graph"
                )
    return M


def _parse_objective(d: dict, n: int) -> tuple[int, Objective]:
    _reject_unknown(d, {"agent", "kind", "center", "scale", "weight", "value"}, "objectives")
    agent = d.get("agent")
    if not isinstance(agent, int) or not (1 <= agent <= n):
        raise ScenarioError(f"objective references agent {agent!r}, valid ids are 1..{n}")
    kind = d.get("kind")
    if kind == "absolute":
        return agent, AbsoluteDeviation(np.asarray(d["center"], dtype=float),
                                        float(d.get("scale", 1.0)))
    if kind == "quadratic":
        center = np.asarray(d["center"], dtype=float)
        return agent, Quadratic(center, np.asarray(d.get("weight", 1.0), dtype=float))
    if kind == "constant":
        return agent, Constant(float(d.get("value", 0.0)))
    raise ScenarioError(f"unknown objective kind {kind!r}")


def _parse_stepsize(d: dict) -> StepsizeSchedule:
    _reject_unknown(d, {"kind", "alpha0", "values"}, "stepsize")
    kind = d.get("kind", "harmonic")
    if kind == "explicit":
        return StepsizeSchedule("explicit", values=tuple(float(v) for v in d.get("values", ())))
    return StepsizeSchedule(kind, alpha0=float(d.get("alpha0", 1.0)))


def _parse_schedule(d: dict, n: int) -> tuple[int, UpdateSchedule]:
    _reject_unknown(d, {"agent", "kind", "offset", "period", "times"}, "schedules")
    agent = d.get("agent")
    if not isinstance(agent, int) or not (1 <= agent <= n):
        raise ScenarioError(f"schedule references agent {agent!r}, valid ids are 1..{n}")
    kind = d.get("kind", "periodic")
    if kind == "periodic":
        return agent, UpdateSchedule("periodic", offset=int(d.get("offset", 0)),
                                     period=int(d.get("period", 1)))
    if kind == "explicit":
        return agent, UpdateSchedule("explicit", times=tuple(int(t) for t in d.get("times", ())))
    raise ScenarioError(f"unknown schedule kind {kind!r}")


def _parse_projection(d: dict) -> ProjectionSet:
    _reject_unknown(d, {"shape", "lower", "upper", "center", "radius"}, "projection")
    shape = d.get("shape")
    if shape == "box":
        return Box(np.asarray(d["lower"], dtype=float), np.asarray(d["upper"], dtype=float))
    if shape == "ball":
        return Ball(np.asarray(d["center"], dtype=float), float(d["radius"]))
    raise ScenarioError(f"unknown projection shape {shape!r}")


def scenario_from_dict(data: dict) -> Scenario:
    if not isinstance(data, dict):
        raise ScenarioError("scenario root must be an object")
    _reject_unknown(data, _TOP_FIELDS, "scenario")

    graph = _parse_graph(data.get("graph", {}))
    n = graph.n
    weights = _parse_weights(data.get("weights", {"rule": "metropolis"}), graph)

    malicious = data.get("malicious")
    if malicious is not None and (not isinstance(malicious, int) or not 1 <= malicious <= n):
        raise ScenarioError(f"malicious agent {malicious!r} outside 1..{n}")

    objectives: list[Objective] = [Constant(0.0) for _ in range(n)]
    for entry in data.get("objectives", []):
        agent, obj = _parse_objective(entry, n)
        objectives[agent - 1] = obj
    dims = {o.m for o in objectives if not isinstance(o, Constant)}
    if len(dims) > 1:
        raise ScenarioError(f"objectives disagree on the decision dimension: {sorted(dims)}")

    stepsize = _parse_stepsize(data.get("stepsize", {"kind": "harmonic", "alpha0": 1.0}))

    schedules: tuple[UpdateSchedule, ...] | None = None
    window = None
    if "schedules" in data:
        sched_list: list[UpdateSchedule | None] = [None] * n
        for entry in data["schedules"]:
            agent, sched = _parse_schedule(entry, n)
            sched_list[agent - 1] = sched
        given = [s for s in sched_list if s is not None]
        window = data.get("window") or default_window(given)
        if not isinstance(window, int) or window < 1:
            raise ScenarioError("window must be a positive integer")
        check = check_update_regularity(given, window, horizon=data.get("horizon"))
        if not check.ok:
            raise UpdateRegularityError(
                f"update schedules do not make a constant positive number of updates "
                f"in every length-{window} window: {check.reason}"
            )
        schedules = tuple(sched_list)

    projection = _parse_projection(data["projection"]) if "projection" in data else None

    initial = data.get("initial", {"kind": "zeros"})
    _reject_unknown(initial, {"kind", "values", "low", "high"}, "initial")
    if initial.get("kind") not in ("explicit", "zeros", "uniform"):
        raise ScenarioError(f"unknown initial kind {initial.get('kind')!r}")

    horizon = data.get("horizon", 100)
    if not isinstance(horizon, int) or horizon < 0:
        raise ScenarioError("horizon must be a nonnegative integer")
    seed = data.get("seed", 0)
    if not isinstance(seed, int):
        raise ScenarioError("seed must be an integer")

    output = dict(_DEFAULT_OUTPUT)
    out = data.get("output", {})
    _reject_unknown(out, set(_DEFAULT_OUTPUT), "output")
    output.update(out)

    if not is_strongly_connected(graph):
        raise ScenarioError("scenario graph is not strongly connected")

    scn = Scenario(
        name=str(data.get("name", "scenario")),
        graph=graph,
        weights=weights,
        malicious=malicious,
        objectives=tuple(objectives),
        stepsize=stepsize,
        schedules=schedules,
        window=window,
        projection=projection,
        initial_spec=initial,
        horizon=horizon,
        seed=seed,
        output=output,
    )
    if scn.projection is not None and scn.projection.m != scn.m:
        raise ScenarioError(
            f"projection dimension {scn.projection.m} does not match decision dimension {scn.m}"
        )
    scn.initial_estimates()  # validate shape early
    return scn


def load_scenario(path) -> Scenario:
    with open(path) as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ScenarioError(f"scenario file {path} is not valid JSON: {exc}") from exc
    return scenario_from_dict(data)


def save_scenario(scn: Scenario, path) -> None:
    with open(path, "w") as fh:
        fh.write(scn.canonical_json())
