"""Joint distributions over tree-shaped compatibility graphs.

Each node of a :class:`CompatibilityGraph` is a block of variables and each
edge carries a distribution over the union of its two blocks. When the graph
is a tree the edge distributions can always be glued into one joint
distribution: consecutive pieces are combined by making the new variables
conditionally independent of the old ones given the shared block.
"""
from __future__ import annotations

import json
import string
from collections import deque
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .errors import MarginalMismatch, NotATree, UnknownVariable
from .probability import (
    TOL,
    Distribution,
    VariableSet,
    convert_domain,
    marginalize,
    max_abs_diff,
    reorder,
)


@dataclass(frozen=True)
class Edge:
    a: int
    b: int
    dist: Distribution


@dataclass(frozen=True)
class CompatibilityGraph:
    nodes: tuple[tuple[str, ...], ...]
    edges: tuple[Edge, ...] = ()

    def __post_init__(self):
        nodes = tuple(tuple(block) for block in self.nodes)
        edges = tuple(e if isinstance(e, Edge) else Edge(*e) for e in self.edges)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "edges", edges)
        seen: dict[str, int] = {}
        for i, block in enumerate(nodes):
            if not block:
                raise ValueError(f"node {i} has an empty block")
            for v in block:
                if v in seen:
                    raise ValueError(f"variable {v!r} appears in blocks {seen[v]} and {i}")
                seen[v] = i
        for k, e in enumerate(edges):
            if not (0 <= e.a < len(nodes) and 0 <= e.b < len(nodes)):
                raise ValueError(f"edge {k} references a missing node")
            if e.a == e.b:
                raise ValueError(f"edge {k} is a self-loop")
            expected = set(nodes[e.a]) | set(nodes[e.b])
            if set(e.dist.names) != expected:
                raise ValueError(
                    f"edge {k} distribution is over {sorted(e.dist.names)}, expected {sorted(expected)}"
                )

    @property
    def variables(self) -> tuple[str, ...]:
        return tuple(v for block in self.nodes for v in block)

    def to_json(self) -> dict:
        return {
            "nodes": [{"block": list(b)} for b in self.nodes],
            "edges": [{"a": e.a, "b": e.b, "dist": e.dist.to_json()} for e in self.edges],
        }

    @classmethod
    def from_json(cls, obj) -> "CompatibilityGraph":
        if isinstance(obj, str):
            obj = json.loads(obj)
        nodes = [tuple(n["block"]) for n in obj["nodes"]]
        edges = [Edge(int(e["a"]), int(e["b"]), Distribution.from_json(e["dist"])) for e in obj["edges"]]
        return cls(tuple(nodes), tuple(edges))


@dataclass(frozen=True)
class GlueResult:
    joint: Distribution
    glue_order: list[int] = field(default_factory=list)
    root: int = 0


def is_tree(g: CompatibilityGraph) -> bool:
    n = len(g.nodes)
    if n == 0 or len(g.edges) != n - 1:
        return False
    return len(_reachable(g, 0)) == n


def _adjacency(g: CompatibilityGraph) -> list[list[tuple[int, int]]]:
    adj: list[list[tuple[int, int]]] = [[] for _ in g.nodes]
    for k, e in enumerate(g.edges):
        adj[e.a].append((e.b, k))
        adj[e.b].append((e.a, k))
    return adj


def _reachable(g: CompatibilityGraph, root: int) -> set[int]:
    adj = _adjacency(g)
    seen = {root}
    stack = [root]
    while stack:
        u = stack.pop()
        for v, _ in adj[u]:
            if v not in seen:
                seen.add(v)
                stack.append(v)
    return seen


def glue(p: Distribution, q: Distribution, tol: float = TOL) -> Distribution:
    """Join ``p`` and ``q`` through their common variables.

    The result is over ``p``'s variables followed by ``q``'s new ones, with
    weight ``p(x_S1) * q(x_new | x_shared)``. Shared-variable events of
    probability at most ``tol`` get a uniform conditional.
    """
    q = convert_domain(q, p.domain)
    shared = [v for v in p.names if v in q.vars]
    new = [v for v in q.names if v not in p.vars]
    if shared:
        mp = marginalize(p, shared)
        mq = reorder(marginalize(q, shared), mp.names)
        diff = np.abs(mp.weights - mq.weights)
        worst = int(np.argmax(diff))
        if diff[worst] > tol:
            atom = dict(zip(mp.names, mp.vars.atom(worst)))
            raise MarginalMismatch(
                f"marginals on {shared} differ by {diff[worst]:.3g} at {atom}",
                atom=atom,
                discrepancy=float(diff[worst]),
            )
    if not new:
        return p

    letters = iter(string.ascii_letters)
    sym = {v: next(letters) for v in list(p.names) + new}
    qt = reorder(q, shared + new).tensor()
    k = len(shared)
    overlap = qt.sum(axis=tuple(range(k, qt.ndim)), keepdims=True)
    null = overlap <= tol
    cond = np.where(null, 1.0 / 2 ** len(new), qt / np.where(null, 1.0, overlap))
    subscripts = "".join(sym[v] for v in p.names) + "," + "".join(sym[v] for v in shared + new)
    out = "".join(sym[v] for v in list(p.names) + new)
    r = np.einsum(f"{subscripts}->{out}", p.tensor(), cond)
    vars = VariableSet(tuple(p.names) + tuple(new), p.domain)
    return Distribution(vars, r.reshape(-1), max(p.tol, q.tol))


def bfs_edge_order(g: CompatibilityGraph, root: int | None = None) -> tuple[int, list[int]]:
    """Root node and edge indices in breadth-first order.

    The default root is the node whose sorted block is lexicographically least.
    """
    if root is None:
        root = min(range(len(g.nodes)), key=lambda i: sorted(g.nodes[i]))
    adj = _adjacency(g)
    for nbrs in adj:
        nbrs.sort(key=lambda t: (sorted(g.nodes[t[0]]), t[1]))
    order: list[int] = []
    seen = {root}
    queue = deque([root])
    while queue:
        u = queue.popleft()
        for v, k in adj[u]:
            if v not in seen:
                seen.add(v)
                order.append(k)
                queue.append(v)
    return root, order


def extend_tree(g: CompatibilityGraph, root: int | None = None, tol: float = TOL) -> GlueResult:
    """Glue every edge distribution of a tree into one joint distribution.

    An isolated single node carries no data and yields the uniform
    distribution over its block.
    """
    if not is_tree(g):
        raise NotATree(f"graph with {len(g.nodes)} nodes and {len(g.edges)} edges is not a tree")
    if not g.edges:
        return GlueResult(Distribution.uniform(VariableSet(g.nodes[0])), [], 0)
    root, order = bfs_edge_order(g, root)
    joint: Distribution | None = None
    for k in order:
        dist = g.edges[k].dist
        if joint is None:
            joint = dist
            continue
        try:
            joint = glue(joint, dist, tol)
        except MarginalMismatch as exc:
            e = g.edges[k]
            raise MarginalMismatch(
                f"edge {k} ({e.a}-{e.b}): {exc}", atom=exc.atom, discrepancy=exc.discrepancy, edge=k
            ) from exc
    return GlueResult(joint, order, root)


def edge_marginal_error(result: GlueResult, g: CompatibilityGraph) -> float:
    """Largest atomwise gap between the joint and any edge distribution."""
    worst = 0.0
    for e in g.edges:
        m = marginalize(result.joint, e.dist.names)
        worst = max(worst, max_abs_diff(e.dist, m))
    return worst


def star_graph(center: Sequence[str], leaves: Mapping[str, Distribution] | Sequence[Distribution]) -> CompatibilityGraph:
    """Graph with one central block linked to each leaf block.

    Each distribution is over ``center`` plus the leaf's own variables.
    """
    dists = list(leaves.values()) if isinstance(leaves, Mapping) else list(leaves)
    nodes = [tuple(center)]
    edges = []
    for d in dists:
        extra = tuple(v for v in d.names if v not in center)
        if not extra:
            raise UnknownVariable(f"leaf distribution over {d.names} adds no variables")
        nodes.append(extra)
        edges.append(Edge(0, len(nodes) - 1, d))
    return CompatibilityGraph(tuple(nodes), tuple(edges))
