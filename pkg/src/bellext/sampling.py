"""Random instances for cross-validation.

Generators mix three regimes: smooth random data, data lying on a coarse
dyadic grid (so polytope boundaries are hit exactly), and data taken from a
random classical distribution (always representable).
"""
from __future__ import annotations

import itertools

import numpy as np

from .probability import Distribution, MomentConstraints, VariableSet, marginalize, moment
from .quantum import PureState, expectation, spin_along
from .representability import BCH_VARS, BchScenario
from .tree import CompatibilityGraph, Edge

DEFAULT_SEED = 20240917
GRID = np.linspace(0.0, 1.0, 9)


def random_distribution(rng: np.random.Generator, vars: VariableSet, sparse: float = 0.25) -> Distribution:
    """Dirichlet weights, with a fraction of atoms zeroed to produce null events."""
    k = 2 ** len(vars)
    w = rng.dirichlet(np.full(k, rng.choice([0.3, 1.0, 3.0])))
    if sparse and k > 1:
        mask = rng.random(k) < sparse
        if mask.all():
            mask[rng.integers(k)] = False
        w[mask] = 0.0
    return Distribution(vars, w / w.sum())


def _pair_moment(rng, pa: float, pb: float, grid: bool) -> float:
    lo, hi = max(0.0, pa + pb - 1.0), min(pa, pb)
    if grid:
        options = GRID[(GRID >= lo - 1e-12) & (GRID <= hi + 1e-12)]
        if options.size:
            return float(rng.choice(options))
    return float(rng.uniform(lo, hi))


def _singles(rng, names, grid: bool) -> dict[str, float]:
    if grid:
        return {v: float(rng.choice(GRID)) for v in names}
    return {v: float(rng.random()) for v in names}


def random_three_moments(rng: np.random.Generator, names=("A1", "A2", "B")) -> MomentConstraints:
    """Valid measurable data <A1>, <A2>, <B>, <A1 B>, <A2 B>."""
    a1, a2, b = names
    vars = VariableSet(tuple(names))
    mode = rng.integers(3)
    if mode == 2:
        d = random_distribution(rng, vars)
        keys = [(a1,), (a2,), (b,), (a1, b), (a2, b)]
        return MomentConstraints(vars, {frozenset(k): moment(d, k) for k in keys})
    grid = mode == 1
    s = _singles(rng, names, grid)
    entries = {frozenset([v]): p for v, p in s.items()}
    entries[frozenset((a1, b))] = _pair_moment(rng, s[a1], s[b], grid)
    entries[frozenset((a2, b))] = _pair_moment(rng, s[a2], s[b], grid)
    return MomentConstraints(vars, entries)


def _random_projector(rng) -> np.ndarray:
    n = rng.normal(size=3)
    return (np.eye(2) + spin_along(n / np.linalg.norm(n))) / 2


def _plane_projector(angle: float) -> np.ndarray:
    return (np.eye(2) + spin_along((np.sin(angle), 0.0, np.cos(angle)))) / 2


def random_quantum_bch(rng: np.random.Generator) -> BchScenario:
    """Two-qubit data from a random pure state and random spin projectors.

    Half of the draws jitter the singlet and its maximally violating
    directions instead, so that violations are common.
    """
    eye = np.eye(2)
    if rng.random() < 0.5:
        psi = rng.normal(size=4) + 1j * rng.normal(size=4)
        local = {v: _random_projector(rng) for v in BCH_VARS}
    else:
        t = np.pi / 4 + rng.normal(scale=0.3)
        psi = np.array([0.0, np.cos(t), -np.sin(t), 0.0])
        base = {"A1": 0.0, "A2": np.pi / 2, "B1": 5 * np.pi / 4, "B2": 3 * np.pi / 4}
        local = {v: _plane_projector(a + rng.normal(scale=0.4)) for v, a in base.items()}
    state = PureState.normalized(psi)
    ops = {v: np.kron(local[v], eye) if v.startswith("A") else np.kron(eye, local[v]) for v in BCH_VARS}
    singles = {v: expectation(state, ops[v]) for v in BCH_VARS}
    values = {(a, b): expectation(state, ops[a] @ ops[b]) for a, b in itertools.product(("A1", "A2"), ("B1", "B2"))}
    return BchScenario.from_values(singles, values)


def random_bch_scenario(rng: np.random.Generator) -> BchScenario:
    mode = rng.integers(4)
    pairs = list(itertools.product(("A1", "A2"), ("B1", "B2")))
    if mode == 3:
        return random_quantum_bch(rng)
    if mode == 2:
        d = random_distribution(rng, VariableSet(BCH_VARS))
        singles = {v: moment(d, [v]) for v in BCH_VARS}
        values = {p: moment(d, p) for p in pairs}
        return BchScenario.from_values(singles, values)
    grid = mode == 1
    singles = _singles(rng, BCH_VARS, grid)
    values = {(a, b): _pair_moment(rng, singles[a], singles[b], grid) for a, b in pairs}
    return BchScenario.from_values(singles, values)


def random_tree_graph(rng: np.random.Generator, max_vars: int = 6) -> CompatibilityGraph:
    """Random tree over random variable blocks with consistent edge data.

    Edge distributions are marginals of one hidden joint, so adjacent edges
    agree on their shared block.
    """
    n = int(rng.integers(2, max_vars + 1))
    names = [f"X{i}" for i in range(n)]
    rng.shuffle(names)
    cuts = sorted(rng.choice(np.arange(1, n), size=int(rng.integers(1, n)), replace=False).tolist())
    blocks = [tuple(names[i:j]) for i, j in zip([0] + cuts, cuts + [n])]
    hidden = random_distribution(rng, VariableSet(tuple(sorted(names))), sparse=float(rng.choice([0.0, 0.4])))
    edges = []
    for child in range(1, len(blocks)):
        parent = int(rng.integers(child))
        a, b = (parent, child) if rng.random() < 0.5 else (child, parent)
        union = blocks[a] + blocks[b]
        dist = marginalize(hidden, union)
        edges.append(Edge(a, b, dist))
    rng.shuffle(edges)
    return CompatibilityGraph(tuple(blocks), tuple(edges))
