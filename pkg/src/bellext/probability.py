"""Finite probability spaces over binary variables.

Atoms are indexed by integers in ``range(2**n)``; the first variable of a
:class:`VariableSet` is the most significant bit. Bit 1 stands for the value
1 in the ``"01"`` domain and +1 in the ``"pm"`` domain, bit 0 for 0 or -1.
With this layout the integer index of an atom is also the bitmask of the
variables that are "on", which is what the moment transforms below rely on.
"""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np

from .errors import (
    IncompleteMoments,
    InvalidDistribution,
    InvalidMoments,
    NotRealizable,
    UnknownVariable,
)

TOL = 1e-9

ZERO_ONE = "01"
PLUS_MINUS = "pm"
DOMAINS = (ZERO_ONE, PLUS_MINUS)


def _check_domain(domain: str) -> str:
    if domain not in DOMAINS:
        raise ValueError(f"domain must be one of {DOMAINS}, got {domain!r}")
    return domain


def parse_monomial(monomial: str | Iterable[str]) -> frozenset[str]:
    """Accept ``"A1,A2"``, ``"A1*A2"`` or any iterable of names."""
    if isinstance(monomial, str):
        parts = monomial.replace("*", ",").split(",")
        return frozenset(p.strip() for p in parts if p.strip())
    return frozenset(monomial)


def monomial_key(monomial: Iterable[str], order: Sequence[str] | None = None) -> str:
    names = list(monomial)
    if order is not None:
        rank = {v: i for i, v in enumerate(order)}
        names.sort(key=lambda v: rank.get(v, len(rank)))
    else:
        names.sort()
    return ",".join(names)


@dataclass(frozen=True)
class VariableSet:
    names: tuple[str, ...]
    domain: str = ZERO_ONE

    def __post_init__(self):
        object.__setattr__(self, "names", tuple(self.names))
        if len(set(self.names)) != len(self.names):
            raise ValueError(f"duplicate variable names in {self.names}")
        _check_domain(self.domain)

    def __len__(self) -> int:
        return len(self.names)

    def __iter__(self) -> Iterator[str]:
        return iter(self.names)

    def __contains__(self, name: object) -> bool:
        return name in self.names

    def index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise UnknownVariable(f"unknown variable {name!r}; known: {list(self.names)}") from None

    def mask(self, monomial: Iterable[str]) -> int:
        """Bitmask of a set of variables, consistent with atom indexing."""
        n = len(self.names)
        m = 0
        for name in monomial:
            m |= 1 << (n - 1 - self.index(name))
        return m

    def subset(self, keep: Iterable[str]) -> "VariableSet":
        keep = set(keep)
        for name in keep:
            self.index(name)
        return VariableSet(tuple(v for v in self.names if v in keep), self.domain)

    def with_domain(self, domain: str) -> "VariableSet":
        return VariableSet(self.names, domain)

    def values(self, bit: int) -> int:
        if self.domain == ZERO_ONE:
            return bit
        return 1 if bit else -1

    def atom(self, index: int) -> tuple[int, ...]:
        """Domain values of atom ``index`` in variable order."""
        n = len(self.names)
        return tuple(self.values((index >> (n - 1 - k)) & 1) for k in range(n))

    def atom_index(self, assignment: Mapping[str, int] | Sequence[int]) -> int:
        if isinstance(assignment, Mapping):
            values = [assignment[v] for v in self.names]
        else:
            values = list(assignment)
        if len(values) != len(self.names):
            raise ValueError("atom length does not match variable count")
        idx = 0
        for v in values:
            idx = (idx << 1) | _bit(v, self.domain)
        return idx

    def atoms(self) -> Iterator[tuple[int, ...]]:
        for i in range(2 ** len(self.names)):
            yield self.atom(i)


def _bit(value: int, domain: str) -> int:
    if domain == ZERO_ONE:
        if value not in (0, 1):
            raise ValueError(f"value {value!r} not in {{0, 1}}")
        return int(value)
    if value not in (-1, 1):
        raise ValueError(f"value {value!r} not in {{-1, +1}}")
    return 1 if value == 1 else 0


@lru_cache(maxsize=64)
def _bit_table(n: int) -> np.ndarray:
    """(2**n, n) array of atom bits, first variable in column 0."""
    idx = np.arange(2**n)[:, None]
    shifts = np.arange(n - 1, -1, -1)[None, :]
    table = (idx >> shifts) & 1
    table.setflags(write=False)
    return table


def monomial_vector(vars: VariableSet, monomial: Iterable[str]) -> np.ndarray:
    """Value of the product of ``monomial`` on every atom."""
    n = len(vars)
    cols = [vars.index(v) for v in parse_monomial(monomial)]
    bits = _bit_table(n)
    if not cols:
        return np.ones(2**n)
    sub = bits[:, cols]
    if vars.domain == ZERO_ONE:
        return np.prod(sub, axis=1).astype(float)
    return np.prod(2 * sub - 1, axis=1).astype(float)


@dataclass(frozen=True, eq=False)
class Distribution:
    """Probability table over the ``2**n`` atoms of ``vars``."""

    vars: VariableSet
    weights: np.ndarray
    tol: float = field(default=TOL, repr=False)

    def __post_init__(self):
        w = np.array(self.weights, dtype=float).reshape(-1)
        if w.shape != (2 ** len(self.vars),):
            raise InvalidDistribution(
                f"expected {2 ** len(self.vars)} weights for {len(self.vars)} variables, got {w.size}"
            )
        if not np.all(np.isfinite(w)):
            raise InvalidDistribution("weights must be finite")
        if w.min(initial=0.0) < -self.tol:
            raise InvalidDistribution(f"negative weight {w.min():.3e}")
        if abs(w.sum() - 1.0) > self.tol:
            raise InvalidDistribution(f"weights sum to {w.sum():.12f}, not 1")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    @classmethod
    def uniform(cls, vars: VariableSet) -> "Distribution":
        n = len(vars)
        return cls(vars, np.full(2**n, 1.0 / 2**n))

    @classmethod
    def point(cls, vars: VariableSet, assignment) -> "Distribution":
        w = np.zeros(2 ** len(vars))
        w[vars.atom_index(assignment)] = 1.0
        return cls(vars, w)

    @classmethod
    def from_function(cls, vars: VariableSet, fn) -> "Distribution":
        """Build from ``fn(atom_values) -> weight``."""
        return cls(vars, [fn(a) for a in vars.atoms()])

    @property
    def names(self) -> tuple[str, ...]:
        return self.vars.names

    @property
    def domain(self) -> str:
        return self.vars.domain

    def prob(self, assignment) -> float:
        return float(self.weights[self.vars.atom_index(assignment)])

    def tensor(self) -> np.ndarray:
        """Weights reshaped to one axis per variable."""
        return self.weights.reshape((2,) * len(self.vars))

    def moment(self, monomial) -> float:
        return moment(self, monomial)

    def to_json(self) -> dict:
        return {"vars": list(self.names), "domain": self.domain, "weights": self.weights.tolist()}

    @classmethod
    def from_json(cls, obj: Mapping | str) -> "Distribution":
        if isinstance(obj, str):
            obj = json.loads(obj)
        return cls(VariableSet(tuple(obj["vars"]), obj.get("domain", ZERO_ONE)), obj["weights"])

    def __repr__(self) -> str:
        return f"Distribution(vars={list(self.names)}, domain={self.domain!r}, weights={np.round(self.weights, 6).tolist()})"


@dataclass(frozen=True)
class MomentConstraints:
    """Partial assignment of expectation values to monomials."""

    vars: VariableSet
    entries: Mapping[frozenset, float]

    def __post_init__(self):
        clean: dict[frozenset, float] = {}
        lo = -1.0 if self.vars.domain == PLUS_MINUS else 0.0
        for key, value in dict(self.entries).items():
            mono = parse_monomial(key)
            for v in mono:
                self.vars.index(v)
            value = float(value)
            if not mono:
                if abs(value - 1.0) > TOL:
                    raise InvalidMoments(f"empty monomial must map to 1, got {value}")
                continue
            if value < lo - TOL or value > 1.0 + TOL:
                raise InvalidMoments(f"moment <{monomial_key(mono)}> = {value} outside [{lo}, 1]")
            clean[mono] = value
        object.__setattr__(self, "entries", clean)

    def __getitem__(self, monomial) -> float:
        mono = parse_monomial(monomial)
        if not mono:
            return 1.0
        return self.entries[mono]

    def __contains__(self, monomial) -> bool:
        mono = parse_monomial(monomial)
        return not mono or mono in self.entries

    def __len__(self) -> int:
        return len(self.entries)

    def get(self, monomial, default=None):
        return self[monomial] if monomial in self else default

    def restrict(self, names: Iterable[str]) -> "MomentConstraints":
        names = set(names)
        sub = self.vars.subset(names)
        return MomentConstraints(sub, {k: v for k, v in self.entries.items() if k <= names})

    def merged(self, other: "MomentConstraints", tol: float = TOL) -> "MomentConstraints":
        """Union of two constraint sets; overlapping entries must agree."""
        if other.vars.domain != self.vars.domain:
            raise InvalidMoments("cannot merge moment sets with different domains")
        names = list(self.vars.names) + [v for v in other.vars.names if v not in self.vars]
        entries = dict(self.entries)
        for k, v in other.entries.items():
            if k in entries and abs(entries[k] - v) > tol:
                raise InvalidMoments(f"conflicting values for <{monomial_key(k)}>: {entries[k]} vs {v}")
            entries[k] = v
        return MomentConstraints(VariableSet(tuple(names), self.vars.domain), entries)

    def to_json(self) -> dict:
        return {
            "vars": list(self.vars.names),
            "domain": self.vars.domain,
            "entries": {monomial_key(k, self.vars.names): v for k, v in self.entries.items()},
        }

    @classmethod
    def from_json(cls, obj: Mapping) -> "MomentConstraints":
        return cls(VariableSet(tuple(obj["vars"]), obj.get("domain", ZERO_ONE)), obj["entries"])


def moment(d: Distribution, monomial) -> float:
    """Expectation of the product of the variables in ``monomial``."""
    mono = parse_monomial(monomial)
    if not mono:
        return 1.0
    return float(d.weights @ monomial_vector(d.vars, mono))


def all_moments(d: Distribution) -> dict[frozenset, float]:
    """Every non-empty moment of ``d``."""
    return {
        frozenset(s): moment(d, s)
        for r in range(1, len(d.vars) + 1)
        for s in itertools.combinations(d.names, r)
    }


def to_moment_constraints(d: Distribution) -> MomentConstraints:
    return MomentConstraints(d.vars, all_moments(d))


def marginalize(d: Distribution, keep) -> Distribution:
    """Sum out every variable not in ``keep``; variable order follows ``d``."""
    keep = parse_monomial(keep)
    sub = d.vars.subset(keep)
    drop = tuple(i for i, v in enumerate(d.names) if v not in keep)
    if not drop:
        return d
    w = d.tensor().sum(axis=drop).reshape(-1)
    return Distribution(sub, w, d.tol)


def reorder(d: Distribution, names: Sequence[str]) -> Distribution:
    """Same distribution with variables permuted into ``names`` order."""
    names = tuple(names)
    if sorted(names) != sorted(d.names):
        raise UnknownVariable(f"{list(names)} is not a permutation of {list(d.names)}")
    if names == d.names:
        return d
    axes = [d.vars.index(v) for v in names]
    w = np.transpose(d.tensor(), axes).reshape(-1)
    return Distribution(VariableSet(names, d.domain), w, d.tol)


def rename(d: Distribution, mapping: Mapping[str, str]) -> Distribution:
    names = tuple(mapping.get(v, v) for v in d.names)
    return Distribution(VariableSet(names, d.domain), d.weights, d.tol)


def condition(d: Distribution, fixed: Mapping[str, int], tol: float = TOL) -> Distribution:
    """Restrict to the event ``fixed`` and renormalize.

    A conditioning event of probability at most ``tol`` yields the uniform
    distribution over the remaining variables.
    """
    index = []
    for k, name in enumerate(d.names):
        if name in fixed:
            index.append(_bit(fixed[name], d.domain))
        else:
            index.append(slice(None))
    for name in fixed:
        d.vars.index(name)
    rest = d.vars.subset(v for v in d.names if v not in fixed)
    block = np.asarray(d.tensor()[tuple(index)], dtype=float).reshape(-1)
    total = block.sum()
    if total <= tol:
        return Distribution.uniform(rest)
    return Distribution(rest, block / total, d.tol)


def convert_domain(d: Distribution, target: str) -> Distribution:
    """Relabel values between {0,1} and {-1,+1}; weights are unchanged."""
    _check_domain(target)
    if target == d.domain:
        return d
    return Distribution(d.vars.with_domain(target), d.weights, d.tol)


def _mask_table(vars: VariableSet, m: MomentConstraints) -> np.ndarray:
    n = len(vars)
    table = np.empty(2**n)
    table[0] = 1.0
    missing = []
    for mask in range(1, 2**n):
        names = [vars.names[k] for k in range(n) if (mask >> (n - 1 - k)) & 1]
        key = frozenset(names)
        if key not in m.entries:
            missing.append(monomial_key(names, vars.names))
            continue
        table[mask] = m.entries[key]
    if missing:
        shown = ", ".join(missing[:6]) + (" ..." if len(missing) > 6 else "")
        raise IncompleteMoments(f"{len(missing)} monomials missing: {shown}")
    return table


def _superset_mobius(f: np.ndarray, n: int) -> np.ndarray:
    """g(T) = sum over S ⊇ T of (-1)^{|S|-|T|} f(S)."""
    g = f.copy().reshape((2,) * n)
    for axis in range(n):
        lo = [slice(None)] * n
        hi = [slice(None)] * n
        lo[axis], hi[axis] = 0, 1
        g[tuple(lo)] -= g[tuple(hi)]
    return g.reshape(-1)


def _walsh_hadamard(f: np.ndarray, n: int) -> np.ndarray:
    g = f.copy().reshape((2,) * n)
    for axis in range(n):
        lo = [slice(None)] * n
        hi = [slice(None)] * n
        lo[axis], hi[axis] = 0, 1
        a, b = g[tuple(lo)].copy(), g[tuple(hi)].copy()
        # bit 1 is +1, bit 0 is -1
        g[tuple(hi)] = a + b
        g[tuple(lo)] = a - b
    return g.reshape(-1)


def moments_to_distribution(m: MomentConstraints, tol: float = TOL) -> Distribution:
    """Recover the unique distribution with the given full moment set.

    For {0,1} variables the weight of the atom whose "on" set is T is the
    inclusion-exclusion sum over all supersets S of T of
    ``(-1)**(|S|-|T|) * m(S)``. For {-1,+1} variables the inversion is the
    Walsh-Hadamard transform ``p(x) = 2**-n * sum_S m(S) prod_{i in S} x_i``.
    """
    vars = m.vars
    n = len(vars)
    table = _mask_table(vars, m)
    if vars.domain == ZERO_ONE:
        w = _superset_mobius(table, n)
    else:
        w = _walsh_hadamard(table, n) / 2**n
    worst = int(np.argmin(w))
    if w[worst] < -tol:
        raise NotRealizable(
            f"atom {dict(zip(vars.names, vars.atom(worst)))} would get weight {w[worst]:.6g}"
        )
    w = np.clip(w, 0.0, None)
    return Distribution(vars, w / w.sum(), tol)


def distribution_to_moment_table(d: Distribution) -> np.ndarray:
    """Moments indexed by bitmask (fast zeta transform); entry 0 is 1."""
    n = len(d.vars)
    if d.domain == ZERO_ONE:
        g = np.array(d.weights, dtype=float).reshape((2,) * n)
        for axis in range(n):
            lo = [slice(None)] * n
            hi = [slice(None)] * n
            lo[axis], hi[axis] = 0, 1
            g[tuple(lo)] += g[tuple(hi)]
        return g.reshape(-1)
    g = np.array(d.weights, dtype=float).reshape((2,) * n)
    for axis in range(n):
        lo = [slice(None)] * n
        hi = [slice(None)] * n
        lo[axis], hi[axis] = 0, 1
        a, b = g[tuple(lo)].copy(), g[tuple(hi)].copy()
        g[tuple(lo)] = a + b
        g[tuple(hi)] = b - a
    return g.reshape(-1)


def max_abs_diff(p: Distribution, q: Distribution) -> float:
    """Atomwise sup-distance after aligning variable order."""
    q = reorder(convert_domain(q, p.domain), p.names)
    return float(np.max(np.abs(p.weights - q.weights)))
