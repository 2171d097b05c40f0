"""Classical representability of partial moment data.

Two independent routes are provided. The closed form bounds an unmeasurable
pair correlation <A1 A2> of three {0,1} variables from the measurable data
<A1>, <A2>, <B>, <A1 B>, <A2 B>. The LP route optimizes the target moment over
all distributions on the atoms that reproduce the data. The four-observable
scenario ties them together: it is classically representable exactly when
the two intervals for <A1 A2> (one per choice of B) intersect, which is also
what the eight Clauser-Horne inequalities test.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import InvalidMoments, UnknownVariable
from .probability import (
    TOL,
    ZERO_ONE,
    Distribution,
    MomentConstraints,
    VariableSet,
    moment,
    monomial_key,
    monomial_vector,
    parse_monomial,
    reorder,
)
from .simplex import EqualityLP
from .tree import CompatibilityGraph, Edge, extend_tree

BCH_VARS = ("A1", "A2", "B1", "B2")
MAX_LP_VARS = 12


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float
    reason: str = ""
    tol: float = field(default=TOL, repr=False, compare=False)

    @classmethod
    def empty_interval(cls, reason: str) -> "Interval":
        return cls(float("inf"), float("-inf"), reason)

    @property
    def empty(self) -> bool:
        return self.lo > self.hi + self.tol

    @property
    def width(self) -> float:
        return self.hi - self.lo

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.lo + self.hi)

    def contains(self, x: float) -> bool:
        return not self.empty and self.lo - self.tol <= x <= self.hi + self.tol

    def intersect(self, other: "Interval") -> "Interval":
        lo, hi = max(self.lo, other.lo), min(self.hi, other.hi)
        reason = "" if lo <= hi + self.tol else "disjoint"
        return Interval(lo, hi, reason, self.tol)

    def close_to(self, other: "Interval", tol: float = TOL) -> bool:
        if self.empty or other.empty:
            return self.empty and other.empty
        return abs(self.lo - other.lo) <= tol and abs(self.hi - other.hi) <= tol

    def to_json(self) -> dict:
        if self.empty:
            return {"interval": None, "empty": True, "reason": self.reason or "empty"}
        return {"interval": [self.lo, self.hi], "empty": False}


def _get(m: MomentConstraints, *names: str) -> float:
    key = frozenset(names)
    if key not in m.entries:
        raise InvalidMoments(f"missing moment <{monomial_key(names)}>")
    return m.entries[key]


def _check_pair(pa: float, pb: float, pab: float, label: str, tol: float) -> None:
    for name, v in ((label.split(",")[0], pa), (label.split(",")[1], pb)):
        if not -tol <= v <= 1 + tol:
            raise InvalidMoments(f"<{name}> = {v} outside [0, 1]")
    if pab < -tol or pab > min(pa, pb) + tol or pa + pb - pab > 1 + tol:
        raise InvalidMoments(f"<{label.replace(',', ' ')}> = {pab} is not a valid joint moment")


def bell_wigner_bounds(p1: float, p2: float, pb: float, p1b: float, p2b: float) -> tuple[list[float], list[float]]:
    """Lower and upper bounds on <A1 A2> for three {0,1} variables.

    These are the facets of the three-variable correlation polytope solved
    for <A1 A2>: the four lower bounds come from <A1 A2> >= 0,
    <(A1 - B)(A2 - B)> >= 0, its B -> 1 - B image and the B -> 1 image; the
    upper bounds are <A1>, <A2> and the two images of the product bound
    under A2 <-> B and A1 <-> B.
    """
    lower = [
        0.0,
        p1b + p2b - pb,
        p1 + p2 + pb - p1b - p2b - 1.0,
        p1 + p2 - 1.0,
    ]
    upper = [
        p1,
        p2,
        p2 - p2b + p1b,
        p1 - p1b + p2b,
    ]
    return lower, upper


def bell_wigner_interval(m: MomentConstraints, a1: str = "A1", a2: str = "A2", b: str | None = None,
                         tol: float = TOL) -> Interval:
    """Closed-form range of <a1 a2> given the measurable moments with ``b``."""
    if m.vars.domain != ZERO_ONE:
        raise InvalidMoments("bell_wigner_interval expects {0,1} moments")
    if b is None:
        others = [v for v in m.vars.names if v not in (a1, a2)]
        if len(others) != 1:
            raise InvalidMoments(f"cannot infer the third variable from {list(m.vars.names)}")
        b = others[0]
    p1, p2, pb = _get(m, a1), _get(m, a2), _get(m, b)
    p1b, p2b = _get(m, a1, b), _get(m, a2, b)
    _check_pair(p1, pb, p1b, f"{a1},{b}", tol)
    _check_pair(p2, pb, p2b, f"{a2},{b}", tol)
    lower, upper = bell_wigner_bounds(p1, p2, pb, p1b, p2b)
    lo, hi = max(lower), min(upper)
    reason = "" if lo <= hi + tol else "bounds"
    return Interval(lo, hi, reason, tol)


def constraint_system(m: MomentConstraints, vars: VariableSet | Sequence[str] | None = None):
    """Rows ``A`` and right-hand side ``b`` of the moment-matching LP."""
    if vars is None:
        vars = m.vars
    elif not isinstance(vars, VariableSet):
        vars = VariableSet(tuple(vars), m.vars.domain)
    if len(vars) > MAX_LP_VARS:
        raise ValueError(f"LP over {len(vars)} variables exceeds the limit of {MAX_LP_VARS}")
    keys = sorted(m.entries, key=lambda k: (len(k), monomial_key(k, vars.names)))
    rows = [np.ones(2 ** len(vars))]
    rhs = [1.0]
    for key in keys:
        rows.append(monomial_vector(vars, key))
        rhs.append(m.entries[key])
    return vars, np.array(rows), np.array(rhs)


@dataclass
class LPInterval:
    interval: Interval
    argmin: Distribution | None = None
    argmax: Distribution | None = None


def lp_feasible(m: MomentConstraints, vars=None, tol: float = TOL) -> Distribution | None:
    """A distribution reproducing ``m``, or None when none exists."""
    vars, A, b = constraint_system(m, vars)
    lp = EqualityLP(A, b, tol)
    if not lp.feasible:
        return None
    x = lp.point()
    return Distribution(vars, x / x.sum())


def lp_interval(target, m: MomentConstraints, vars=None, tol: float = TOL, witnesses: bool = False):
    """Exact range of E[target] over distributions matching ``m``.

    Returns an :class:`Interval` (empty with reason ``"infeasible"`` when no
    distribution matches), or an :class:`LPInterval` carrying optimal
    distributions when ``witnesses`` is set.
    """
    target = parse_monomial(target)
    vars, A, b = constraint_system(m, vars)
    for v in target:
        vars.index(v)
    lp = EqualityLP(A, b, tol)
    if not lp.feasible:
        iv = Interval.empty_interval("infeasible")
        return LPInterval(iv) if witnesses else iv
    c = monomial_vector(vars, target)
    low = lp.minimize(c)
    high = lp.maximize(c)
    iv = Interval(low.value, high.value, "", tol)
    if not witnesses:
        return iv
    return LPInterval(iv, Distribution(vars, low.x / low.x.sum()), Distribution(vars, high.x / high.x.sum()))


@dataclass(frozen=True)
class BchScenario:
    """Measurable data of the four-observable setting, {0,1} convention."""

    moments: MomentConstraints

    def __post_init__(self):
        m = self.moments
        if m.vars.domain != ZERO_ONE:
            raise InvalidMoments("BchScenario uses the {0,1} convention")
        for v in BCH_VARS:
            if v not in m.vars:
                raise UnknownVariable(f"BchScenario needs variable {v}")
        for a, b in itertools.product(("A1", "A2"), ("B1", "B2")):
            _check_pair(_get(m, a), _get(m, b), _get(m, a, b), f"{a},{b}", TOL)

    @classmethod
    def from_values(cls, singles: dict[str, float], pairs: dict[tuple[str, str], float]) -> "BchScenario":
        entries = {frozenset([k]): v for k, v in singles.items()}
        entries.update({frozenset(k): v for k, v in pairs.items()})
        return cls(MomentConstraints(VariableSet(BCH_VARS), entries))

    def single(self, v: str) -> float:
        return _get(self.moments, v)

    def pair(self, a: str, b: str) -> float:
        return _get(self.moments, a, b)

    def three(self, b: str) -> MomentConstraints:
        names = ("A1", "A2", b)
        keys = [("A1",), ("A2",), (b,), ("A1", b), ("A2", b)]
        return MomentConstraints(VariableSet(names), {frozenset(k): _get(self.moments, *k) for k in keys})

    def measurable(self) -> MomentConstraints:
        keys = [(v,) for v in BCH_VARS] + list(itertools.product(("A1", "A2"), ("B1", "B2")))
        return MomentConstraints(VariableSet(BCH_VARS), {frozenset(k): _get(self.moments, *k) for k in keys})


FINE_LABELS = tuple(
    f"{side}[-A{l}B{k}]" for l, k in itertools.product((1, 2), (1, 2)) for side in ("upper", "lower")
)


def clauser_horne(s: BchScenario, l: int, k: int) -> float:
    """CH expression with the minus sign on the pair (A_l, B_k).

    ``sum of the four <A_i B_j> - 2 <A_l B_k> - <A_i> - <B_j>`` where ``i``
    and ``j`` are the indices other than ``l`` and ``k``.
    """
    i, j = 3 - l, 3 - k
    total = sum(s.pair(f"A{a}", f"B{b}") for a in (1, 2) for b in (1, 2))
    return total - 2 * s.pair(f"A{l}", f"B{k}") - s.single(f"A{i}") - s.single(f"B{j}")


def fine_inequalities(s: BchScenario) -> np.ndarray:
    """Residuals of the eight Fine inequalities; each holds iff residual <= 0.

    For each of the four CH expressions F, the pair (F, -1 - F) encodes
    ``-1 <= F <= 0``. Order matches :data:`FINE_LABELS`.
    """
    out = []
    for l, k in itertools.product((1, 2), (1, 2)):
        f = clauser_horne(s, l, k)
        out.extend([f, -1.0 - f])
    return np.array(out)


@dataclass
class RepresentabilityReport:
    interval_B1: Interval
    interval_B2: Interval
    intersection: Interval
    fine_residuals: np.ndarray
    fine_ok: bool
    representable: bool
    witness: Distribution | None = None
    notes: list[str] = field(default_factory=list)

    def to_json(self) -> dict:
        def iv(x: Interval) -> dict:
            return {"lo": None if x.empty else x.lo, "hi": None if x.empty else x.hi,
                    "empty": x.empty}

        return {
            "interval_B1": iv(self.interval_B1),
            "interval_B2": iv(self.interval_B2),
            "intersection": iv(self.intersection),
            "fine_residuals": dict(zip(FINE_LABELS, map(float, self.fine_residuals))),
            "fine_ok": self.fine_ok,
            "representable": self.representable,
            "witness": self.witness.to_json() if self.witness is not None else None,
            "notes": list(self.notes),
        }


def pair_distribution(names: Sequence[str], p1: float, p2: float, p12: float) -> Distribution:
    """Two {0,1} variables with the given singles and product moment."""
    w = np.array([1 - p1 - p2 + p12, p2 - p12, p1 - p12, p12])
    return Distribution(VariableSet(tuple(names)), np.clip(w, 0.0, None) / np.clip(w, 0.0, None).sum())


def build_witness(s: BchScenario, value: float, tol: float = TOL) -> Distribution:
    """Joint distribution on A1, A2, B1, B2 with <A1 A2> fixed to ``value``.

    The {A1, A2} block is linked to B1 and to B2; each link carries a
    three-variable model found by LP, and the star is glued as a tree.
    """
    edges = []
    for idx, b in ((1, "B1"), (2, "B2")):
        data = s.three(b).merged(
            MomentConstraints(VariableSet(("A1", "A2")), {frozenset(("A1", "A2")): value})
        )
        dist = lp_feasible(data, VariableSet(("A1", "A2", b)), tol)
        if dist is None:
            raise InvalidMoments(f"<A1 A2> = {value} is not attainable together with {b}")
        edges.append(Edge(0, idx, dist))
    # pin the shared block exactly so gluing sees identical marginals
    block = pair_distribution(("A1", "A2"), s.single("A1"), s.single("A2"), value)
    edges = [Edge(e.a, e.b, _match_block(e.dist, block)) for e in edges]
    g = CompatibilityGraph((("A1", "A2"), ("B1",), ("B2",)), tuple(edges))
    return extend_tree(g, tol=tol).joint


def _match_block(d: Distribution, block: Distribution) -> Distribution:
    """Rescale ``d`` so its marginal on ``block``'s variables equals ``block``."""
    names = list(block.names)
    rest = [v for v in d.names if v not in names]
    t = reorder(d, names + rest).tensor()
    marg = t.sum(axis=tuple(range(len(names), t.ndim)), keepdims=True)
    target = block.tensor().reshape(marg.shape)
    scale = np.where(marg > 0, target / np.where(marg > 0, marg, 1.0), 0.0)
    fixed = t * scale
    fixed = np.where(marg > 0, fixed, target / 2 ** len(rest))
    return Distribution(VariableSet(tuple(names + rest)), fixed.reshape(-1) / fixed.sum())


def bch_check(s: BchScenario, tol: float = TOL, witness: bool = True) -> RepresentabilityReport:
    i1 = bell_wigner_interval(s.three("B1"), b="B1", tol=tol)
    i2 = bell_wigner_interval(s.three("B2"), b="B2", tol=tol)
    inter = i1.intersect(i2)
    residuals = fine_inequalities(s)
    fine_ok = bool(np.all(residuals <= tol))
    representable = not inter.empty
    notes = []
    if fine_ok != representable:
        notes.append("Fine inequalities and interval intersection disagree")
    w = None
    if representable and witness:
        w = build_witness(s, float(np.clip(inter.midpoint, max(inter.lo, 0.0), inter.hi)), tol)
    return RepresentabilityReport(i1, i2, inter, residuals, fine_ok, representable, w, notes)


def bch_lp_feasible(s: BchScenario, tol: float = TOL) -> bool:
    """Direct four-variable LP feasibility of the measurable data."""
    _, A, b = constraint_system(s.measurable())
    return EqualityLP(A, b, tol).feasible


def reproduces(d: Distribution, m: MomentConstraints, tol: float = TOL) -> tuple[bool, float]:
    """Whether ``d`` matches every entry of ``m``; also the worst error."""
    worst = 0.0
    for key, value in m.entries.items():
        worst = max(worst, abs(moment(d, key) - value))
    return worst <= tol, worst
